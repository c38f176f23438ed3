"""Decomposition certificates, hypothesis reports and verification reports.

Certificates keep raw class lists so that a tampered certificate can still be
loaded and then rejected by the verifier instead of failing at parse time.
"""

from dataclasses import dataclass, field, replace
from typing import Optional

from .relations import Partition, Window


@dataclass(frozen=True)
class DiameterWitness:
    """``classes{factor}[cls]`` lies in ``ball(chain[index], center)``."""

    factor: int
    cls: int
    center: int
    index: int


@dataclass(frozen=True)
class EdgeWitness:
    """Point chain for the generator pair ``pair``; hop ``j`` stays in a class of factor ``pattern[j]``."""

    pair: tuple
    points: tuple
    pattern: tuple


@dataclass(frozen=True)
class DecompositionCertificate:
    window: Window
    classes0: tuple
    classes1: tuple
    diameter_witnesses: tuple
    edge_witnesses: tuple
    pattern: tuple
    budget: tuple  # (R, maxlen)
    method: str = ""

    @property
    def p0(self) -> Partition:
        return Partition.from_classes(self.window, self.classes0)

    @property
    def p1(self) -> Partition:
        return Partition.from_classes(self.window, self.classes1)

    @property
    def R(self) -> int:
        return self.budget[0]

    @property
    def maxlen(self) -> int:
        return self.budget[1]

    def classes(self, factor: int) -> tuple:
        return self.classes0 if factor == 0 else self.classes1

    def evolve(self, **changes) -> "DecompositionCertificate":
        return replace(self, **changes)


@dataclass(frozen=True)
class HypothesisReport:
    check: str
    passed: bool
    failing: Optional[dict] = None
    measured: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    counts: dict
    failure: Optional[dict] = None
    m: int = 0
    diameter_bounds: tuple = (0, 0)

    def __bool__(self) -> bool:
        return self.passed


def assemble(window, p0, p1, diameter_witnesses, edge_witnesses, R, method) -> DecompositionCertificate:
    """Certificate with ``pattern`` set to the longest witness shape and ``maxlen`` to its length."""
    edge_witnesses = tuple(sorted(edge_witnesses, key=lambda w: w.pair))
    longest = max((w.pattern for w in edge_witnesses), key=len, default=(0,))
    return DecompositionCertificate(
        window=window,
        classes0=tuple(p0.classes),
        classes1=tuple(p1.classes),
        diameter_witnesses=tuple(diameter_witnesses),
        edge_witnesses=edge_witnesses,
        pattern=tuple(longest),
        budget=(R, len(longest)),
        method=method,
    )
