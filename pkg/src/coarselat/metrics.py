"""Metric windows and the metric constructions: joins, augmented bases, interleavings."""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .relations import Entourage, Window, ball_mask, bits_of, iter_bits
from .structures import CoarseChain, CompositionWord, from_metric


class MetricAxiomError(ValueError):
    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


class WindowTooSmall(ValueError):
    def __init__(self, message, feasible):
        super().__init__(message)
        self.feasible = feasible


class ComparableAtBound(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MetricWindow:
    """Exact distances ``num[x, y] / scale`` with integer numerators."""

    window: Window
    num: np.ndarray = field(repr=False)
    scale: int = 1

    def __post_init__(self):
        num = np.asarray(self.num, dtype=np.int64)
        object.__setattr__(self, "num", num)
        n = self.window.size
        if num.shape != (n, n):
            raise MetricAxiomError(f"distance matrix has shape {num.shape}, expected {(n, n)}", None)
        if self.scale <= 0:
            raise MetricAxiomError("scale must be positive", None)
        check_metric(num)

    @classmethod
    def from_function(cls, n_or_window, dist) -> "MetricWindow":
        """Build from ``dist(x, y)`` returning ints or Fractions."""
        window = n_or_window if isinstance(n_or_window, Window) else Window(n_or_window)
        n = window.size
        vals = [[Fraction(dist(x, y)) for y in range(n)] for x in range(n)]
        return cls.from_fractions(window, vals)

    @classmethod
    def from_fractions(cls, window: Window, vals) -> "MetricWindow":
        scale = 1
        for row in vals:
            for v in row:
                scale = math.lcm(scale, Fraction(v).denominator)
        num = np.array([[int(Fraction(v) * scale) for v in row] for row in vals], dtype=np.int64)
        if window.size == 0:
            num = num.reshape(0, 0)
        return cls(window, num, scale)

    @classmethod
    def from_positions(cls, positions: Sequence) -> "MetricWindow":
        """Line metric ``|p(x) - p(y)|`` for rational positions."""
        pos = [Fraction(p) for p in positions]
        return cls.from_function(len(pos), lambda x, y: abs(pos[x] - pos[y]))

    @property
    def n(self) -> int:
        return self.window.size

    def dist(self, x: int, y: int) -> Fraction:
        return Fraction(int(self.num[x, y]), self.scale)

    def threshold_rows(self, radius) -> list:
        """Row bitsets of ``{(x, y) : d(x, y) <= radius}``."""
        limit = Fraction(radius) * self.scale
        mask = self.num * limit.denominator <= limit.numerator
        return [bits_of(np.flatnonzero(row).tolist()) for row in mask]

    def ball(self, x: int, radius) -> frozenset:
        return frozenset(iter_bits(self.threshold_rows_for(x, radius)))

    def threshold_rows_for(self, x: int, radius) -> int:
        limit = Fraction(radius) * self.scale
        return bits_of(np.flatnonzero(self.num[x] * limit.denominator <= limit.numerator).tolist())

    def dist_to_set(self, x: int, ys: Iterable[int]) -> Fraction:
        ys = list(ys)
        return Fraction(int(self.num[x, ys].min()), self.scale)

    def diameter(self) -> Fraction:
        return Fraction(int(self.num.max()) if self.n else 0, self.scale)


def check_metric(num: np.ndarray) -> None:
    """Raise :class:`MetricAxiomError` with a witnessing pair or triple."""
    n = num.shape[0]
    diag = np.flatnonzero(np.diagonal(num) != 0)
    if diag.size:
        x = int(diag[0])
        raise MetricAxiomError(f"d({x}, {x}) != 0", (x,))
    asym = np.argwhere(num != num.T)
    if asym.size:
        x, y = map(int, asym[0])
        raise MetricAxiomError(f"d({x}, {y}) != d({y}, {x})", (x, y))
    off = num + np.eye(n, dtype=np.int64)
    bad = np.argwhere(off <= 0)
    if bad.size:
        x, y = map(int, bad[0])
        raise MetricAxiomError(f"d({x}, {y}) is not positive", (x, y))
    for z in range(n):
        # d(x, y) <= d(x, z) + d(z, y) for all x, y at once
        viol = num > num[:, z : z + 1] + num[z : z + 1, :]
        if viol.any():
            x, y = map(int, np.argwhere(viol)[0])
            raise MetricAxiomError(f"triangle inequality fails for ({x}, {z}, {y})", (x, z, y))


def join_metric(m1: MetricWindow, m2: MetricWindow, x0: int, y0: int, r) -> MetricWindow:
    """The ``(x0, y0, r)``-join on the disjoint union (m2's points shifted by ``m1.n``).

    Cross distances are ``d(x, x0) + r + rho(y, y0)``.
    """
    r = Fraction(r)
    if r <= 0:
        raise ValueError("join length must be positive")
    m1.window.check_point(x0)
    m2.window.check_point(y0)
    scale = math.lcm(m1.scale, m2.scale, r.denominator)
    a = m1.num * (scale // m1.scale)
    b = m2.num * (scale // m2.scale)
    rr = int(r * scale)
    n1, n2 = m1.n, m2.n
    num = np.zeros((n1 + n2, n1 + n2), dtype=np.int64)
    num[:n1, :n1] = a
    num[n1:, n1:] = b
    cross = a[:, x0][:, None] + rr + b[:, y0][None, :]
    num[:n1, n1:] = cross
    num[n1:, :n1] = cross.T
    try:
        return MetricWindow(Window(n1 + n2), num, scale)
    except MetricAxiomError as exc:  # pragma: no cover - impossible by construction
        raise AssertionError(f"join violated a metric axiom: {exc}") from exc


# ------------------------------------------------------------ augmented bases

@dataclass(frozen=True, eq=False)
class AugmentedBase:
    """Words over a metric chain (tag 0) and the merge ``delta`` of ``Y`` (tag 1).

    Structure 1 is the two-step chain ``[diagonal, delta]``, so ``delta`` is
    the letter ``(1, 1)``.
    """

    base: CoarseChain
    delta: Entourage
    y: frozenset
    metric: Optional["MetricWindow"] = None

    def letter(self, tag: int, index: int) -> Entourage:
        if tag == 0:
            return self.base[index]
        if tag == 1 and index in (0, 1):
            return self.delta if index == 1 else self.base[0]
        raise ValueError(f"unknown letter {(tag, index)}")

    def ball_steps(self, x: int, word: CompositionWord) -> list:
        """Ball masks after each letter, starting from ``{x}``."""
        cur = 1 << x
        steps = [cur]
        for tag, index in word.letters:
            cur = ball_mask(self.letter(tag, index), cur)
            steps.append(cur)
        return steps

    def relates(self, x: int, x2: int, word: CompositionWord) -> bool:
        return bool(self.ball_steps(x, word)[-1] >> x2 & 1)


DELTA = (1, 1)


def augment(mchain: CoarseChain, y: Iterable[int], metric: Optional[MetricWindow] = None) -> AugmentedBase:
    """Merge ``y`` into one cell ``delta``; ``metric`` is kept for ball-growth bounds."""
    y = frozenset(y)
    for p in y:
        mchain.window.check_point(p)
    if len(y) < 2:
        raise ValueError("the merged set needs at least two points")
    mask = bits_of(y)
    rows = tuple(mask if x in y else 1 << x for x in range(mchain.window.size))
    return AugmentedBase(mchain, Entourage(mchain.window, rows), y, metric)


@dataclass(frozen=True)
class BallGrowth:
    m: Fraction
    ball: frozenset
    step_bounds: tuple


def ball_growth_certificate(ab: AugmentedBase, y0: int, word: CompositionWord) -> BallGrowth:
    """Smallest ``m`` with ``B(y0, word) <= B_d(Y, m)``, tracked letter by letter."""
    m = ab.metric
    if m is None:
        raise ValueError("augmented base carries no metric")
    if y0 not in ab.y:
        raise ValueError(f"{y0} is not in the merged set")
    ys = sorted(ab.y)
    bounds = []
    steps = ab.ball_steps(y0, word)
    for mask in steps:
        pts = list(iter_bits(mask))
        bounds.append(max(m.dist_to_set(p, ys) for p in pts))
    return BallGrowth(bounds[-1], frozenset(iter_bits(steps[-1])), tuple(bounds))


# ------------------------------------------------------------ gap witnesses

@dataclass(frozen=True)
class GapWitnesses:
    pairs: tuple  # pairs[k] serves n = k + 1
    exhausted_at: int


def gap_witnesses(m_d: MetricWindow, m_mu: MetricWindow, bound) -> GapWitnesses:
    """For n = 1, 2, ... the first pair (ID order) with ``d > n`` and ``mu < bound``."""
    if m_d.window.size != m_mu.window.size:
        raise ValueError("metrics live on different windows")
    bound = Fraction(bound)
    scale = math.lcm(m_d.scale, m_mu.scale)
    d = m_d.num * (scale // m_d.scale)
    mu = m_mu.num * (scale // m_mu.scale)
    limit = bound * scale
    close = mu * limit.denominator < limit.numerator
    pairs = []
    n = 1
    while True:
        ok = np.argwhere(close & (d > n * scale))
        if not ok.size:
            break
        a, c = map(int, ok[0])
        pairs.append((a, c))
        n += 1
    if not pairs:
        raise ComparableAtBound(f"no pair with d > 1 and mu < {bound}: comparable at this bound")
    return GapWitnesses(tuple(pairs), n)


def interpolate(m_d: MetricWindow, m_mu: MetricWindow, bound, R: int) -> AugmentedBase:
    """Augment the ``d``-chain by merging the even-indexed gap endpoints ``a_{2n}``.

    When those collapse to fewer than two points the partners ``c_{2n}`` join
    the merged set too.
    """
    gaps = gap_witnesses(m_d, m_mu, bound)
    even = gaps.pairs[1::2] or gaps.pairs[:1]
    y = {a for a, _ in even}
    if len(y) < 2:
        y |= {c for _, c in even}
    return augment(from_metric(m_d, R), y, m_d)


# ------------------------------------------------------------ interleaving bijection

@dataclass(frozen=True)
class Interleaving:
    f: tuple
    mu: MetricWindow
    exceptional: frozenset
    F: tuple  # F[n - 1] for n = 1..N
    a_seq: tuple
    b_seq: tuple
    numeration: tuple


def _disjoint_ball_sequence(m: MetricWindow, N: int, what: str) -> list:
    used = 0
    seq = []
    for n in range(N + 1):
        for a in range(m.n):
            b = m.threshold_rows_for(a, n)
            if not b & used:
                seq.append(a)
                used |= b
                break
        else:
            raise WindowTooSmall(
                f"cannot seed {what} with pairwise disjoint balls up to depth {N}", n - 1
            )
    return seq


def interleave(m_d: MetricWindow, m_rho: MetricWindow, N: int) -> Interleaving:
    """Bijection ``f`` with ``mu = rho(f, f)`` nearly separating ``d``-neighbors.

    Points are numbered block by block (``B_d(a_n, n)`` with ``a_n`` first,
    then the rest by ID).  Each point takes the first unused target, in the
    order ``b_n`` for seeds then ascending ID, that is more than ``N`` away in
    ``rho`` from the images of its already numbered ``d``-neighbors within
    ``N``.  Targets inside ``B_rho(b_i, i)`` for seeds not yet reached are
    held back while anything else fits.  A point with no admissible target
    takes the first unused one and is recorded as exceptional; ``F[n-1]`` is
    the set of points whose ``d``-ball of radius ``n`` meets an exceptional
    point.
    """
    if m_d.n != m_rho.n:
        raise ValueError("metrics live on different windows")
    n_pts = m_d.n
    a_seq = _disjoint_ball_sequence(m_d, N, "the d-sequence")
    b_seq = _disjoint_ball_sequence(m_rho, N, "the rho-sequence")

    numeration = []
    placed = 0
    for k, a in enumerate(a_seq):
        block = m_d.threshold_rows_for(a, k)
        numeration.append(a)
        numeration.extend(x for x in iter_bits(block) if x != a)
        placed |= block
    numeration.extend(x for x in range(n_pts) if not placed >> x & 1)

    near_d = m_d.threshold_rows(N)
    near_rho = m_rho.threshold_rows(N)
    reserved = [m_rho.threshold_rows_for(b, i) for i, b in enumerate(b_seq)]
    seed_index = {a: i for i, a in enumerate(a_seq)}

    f = [None] * n_pts
    assigned = 0
    unused = (1 << n_pts) - 1
    exceptional = set()
    for x in numeration:
        forbidden = 0
        for y in iter_bits(near_d[x] & assigned & ~(1 << x)):
            forbidden |= near_rho[f[y]]
        admissible = unused & ~forbidden
        k = seed_index.get(x)
        held = 0
        for i, a in enumerate(a_seq):
            if not assigned >> a & 1 and a != x:
                held |= reserved[i]
        if k is not None and admissible >> b_seq[k] & 1:
            target = b_seq[k]
        elif admissible & ~held:
            target = _lowest(admissible & ~held)
        elif admissible:
            target = _lowest(admissible)
        else:
            target = _lowest(unused)
            exceptional.add(x)
        f[x] = target
        unused &= ~(1 << target)
        assigned |= 1 << x

    assert sorted(f) == list(range(n_pts)), "interleaving map is not a bijection"
    idx = np.array(f, dtype=np.int64)
    mu = MetricWindow(Window(n_pts), m_rho.num[np.ix_(idx, idx)], m_rho.scale)

    exc_mask = bits_of(exceptional)
    F = []
    for n in range(1, N + 1):
        rows = m_d.threshold_rows(n)
        F.append(frozenset(x for x in range(n_pts) if rows[x] & exc_mask))
    return Interleaving(
        f=tuple(f),
        mu=mu,
        exceptional=frozenset(exceptional),
        F=tuple(F),
        a_seq=tuple(a_seq),
        b_seq=tuple(b_seq),
        numeration=tuple(numeration),
    )


def _lowest(mask: int) -> int:
    return (mask & -mask).bit_length() - 1
