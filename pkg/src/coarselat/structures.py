"""Truncated coarse structures as ascending chains of entourages."""

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .relations import (
    Entourage,
    NotAnEquivalence,
    Partition,
    RelationError,
    Window,
    WindowMismatch,
    bits_of,
    compose,
    equivalence_from_partition,
    intersect,
    iter_bits,
    merge_classes,
    partition_from_equivalence,
    same_window,
    union,
)


class ChainError(ValueError):
    pass


class NotWithinBudget(LookupError):
    """No witness word of length <= maxlen; a truncation verdict, not a proof of absence."""

    def __init__(self, pair, maxlen, reached):
        super().__init__(f"pair {pair} not joined by any word of length <= {maxlen}")
        self.pair = pair
        self.maxlen = maxlen
        self.reached = reached


class DegenerateStructure(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CoarseChain:
    """Entourages ``chain[0] = diagonal <= chain[1] <= ... <= chain[R]``."""

    window: Window
    chain: tuple
    label: str = "derived"

    def __post_init__(self):
        if not self.chain:
            raise ChainError("a chain needs at least the diagonal")
        for e in self.chain:
            if not same_window(e.window, self.window):
                raise WindowMismatch("chain entourage lives on a different window")
        if not self.chain[0].is_diagonal():
            raise ChainError("chain must start at the diagonal")
        for i in range(1, len(self.chain)):
            if not self.chain[i - 1].issubset(self.chain[i]):
                raise ChainError(f"chain is not ascending at index {i}")

    @property
    def R(self) -> int:
        return len(self.chain) - 1

    @property
    def top(self) -> Entourage:
        return self.chain[-1]

    def __getitem__(self, i: int) -> Entourage:
        return self.chain[i]

    def __len__(self) -> int:
        return len(self.chain)

    def truncate(self, R: int) -> "CoarseChain":
        if not 0 <= R <= self.R:
            raise ChainError(f"cannot truncate a chain of radius {self.R} to {R}")
        return CoarseChain(self.window, self.chain[: R + 1], self.label)

    def uniform_bounds(self) -> tuple:
        """Largest ball size at each index (the uniform local finiteness profile)."""
        return tuple(e.max_ball_size() for e in self.chain)


@dataclass(frozen=True)
class CompositionWord:
    """Letters ``(tag, index)``: entourage ``index`` of structure ``tag``."""

    letters: tuple

    def __post_init__(self):
        if not self.letters:
            raise ChainError("a composition word is nonempty")
        object.__setattr__(self, "letters", tuple(tuple(l) for l in self.letters))

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def tags(self) -> tuple:
        return tuple(t for t, _ in self.letters)


@dataclass(frozen=True)
class IdealSpec:
    a: frozenset


@dataclass(frozen=True)
class PermutationSet:
    window: Window
    perms: tuple

    def __post_init__(self):
        n = self.window.size
        for k, p in enumerate(self.perms):
            if len(p) != n or sorted(p) != list(range(n)):
                raise ChainError(f"permutation {k} is not a bijection of the window")


# ------------------------------------------------------------ constructors

def _grow_by(rows, step_rows, steps, frontier=None):
    """Yield successive rows of ``rows o step^k`` for k = 1..steps."""
    out = []
    cur = list(rows)
    for _ in range(steps):
        nxt = []
        for x, row in enumerate(cur):
            acc = row
            for z in iter_bits(row if frontier is None else frontier[x]):
                acc |= step_rows[z]
            nxt.append(acc)
        if frontier is not None:
            frontier = [b & ~a for a, b in zip(cur, nxt)]
        cur = nxt
        out.append(tuple(cur))
    return out


def from_graph(g, R: int) -> CoarseChain:
    """Path-metric chain: ``chain[i] = {(x, y) : d(x, y) <= i}`` by bitset BFS."""
    if R < 0:
        raise ChainError("radius must be non-negative")
    g.check_connected()
    window = g.window
    diag = Entourage.diagonal(window)
    adj = g.adjacency_masks()
    step = [a | (1 << x) for x, a in enumerate(adj)]
    chain = [diag]
    if R:
        layers = _grow_by(diag.rows, step, R, frontier=list(diag.rows))
        chain.extend(Entourage(window, rows) for rows in layers)
    return CoarseChain(window, tuple(chain), "graph")


def from_metric(m, R: int) -> CoarseChain:
    """``chain[i] = {(x, y) : d(x, y) <= i}`` for a validated metric window."""
    if R < 0:
        raise ChainError("radius must be non-negative")
    chain = [Entourage.from_rows(m.window, m.threshold_rows(i)) for i in range(R + 1)]
    chain[0] = Entourage.diagonal(m.window)
    return CoarseChain(m.window, tuple(chain), "metric")


def from_ideal(window: Window, spec: IdealSpec, R: int) -> CoarseChain:
    """Cellular chain of the ideal generated by ``A`` and the finite sets.

    ``chain[i]`` for ``i >= 1`` merges ``A`` with the first ``i - 1``
    points outside ``A`` (ascending ID) into one cell.
    """
    for x in spec.a:
        window.check_point(x)
    outside = [x for x in range(window.size) if x not in spec.a]
    chain = [Entourage.diagonal(window)]
    for i in range(1, R + 1):
        cell = set(spec.a) | set(outside[: i - 1])
        chain.append(_cell_equivalence(window, cell))
    return CoarseChain(window, tuple(chain), "ideal")


def _cell_equivalence(window: Window, cell) -> Entourage:
    mask = bits_of(cell)
    rows = [mask if mask >> x & 1 else 1 << x for x in range(window.size)]
    return Entourage(window, tuple(rows))


def from_permutations(ps: PermutationSet, R: int) -> CoarseChain:
    """``chain[1]`` links each ``x`` to ``g(x)`` and ``g^-1(x)``; ``chain[i]`` is its i-fold power."""
    window = ps.window
    rows = [1 << x for x in range(window.size)]
    for p in ps.perms:
        for x, gx in enumerate(p):
            rows[x] |= 1 << gx
            rows[gx] |= 1 << x
    first = Entourage(window, tuple(rows))
    chain = [Entourage.diagonal(window)]
    cur = first
    for i in range(1, R + 1):
        if i > 1:
            cur = compose(cur, first)
        chain.append(cur)
    return CoarseChain(window, tuple(chain), "permutation")


def transposition(n: int, x: int, y: int) -> tuple:
    p = list(range(n))
    p[x], p[y] = y, x
    return tuple(p)


def entourage_to_permutations(e: Entourage) -> PermutationSet:
    """One transposition per off-diagonal pair ``x < y`` of ``e`` or its inverse."""
    n = e.window.size
    pairs = sorted({(min(x, y), max(x, y)) for x, y in e.off_diagonal()})
    return PermutationSet(e.window, tuple(transposition(n, x, y) for x, y in pairs))


def generated_by(e: Entourage, R: Optional[int] = None) -> CoarseChain:
    """Chain of the structure generated by an equivalence.

    ``[diagonal, e, e_F2, e_F3, ...]`` where ``e_Fk`` merges the first ``k``
    classes (classes ordered by minimum point).  Default radius is the class
    count, which ends at the full relation.
    """
    p = partition_from_equivalence(e)
    k = len(p.classes)
    if R is None:
        R = max(1, k)
    chain = [Entourage.diagonal(e.window)]
    for i in range(1, R + 1):
        if i == 1:
            chain.append(e)
        else:
            merged = merge_classes(p, range(min(i, k)))
            chain.append(equivalence_from_partition(merged))
    return CoarseChain(e.window, tuple(chain), "cellular")


# ------------------------------------------------------------ lattice operations

def _check_windows(c1: CoarseChain, c2: CoarseChain) -> None:
    if not same_window(c1.window, c2.window):
        raise WindowMismatch(
            f"structures live on different windows (sizes {c1.window.size} and {c2.window.size})"
        )


def meet(c1: CoarseChain, c2: CoarseChain) -> CoarseChain:
    """Index-wise intersection; cofinal in the pairwise intersections since both chains ascend."""
    _check_windows(c1, c2)
    R = min(c1.R, c2.R)
    chain = tuple(intersect(c1[i], c2[i]) for i in range(R + 1))
    return CoarseChain(c1.window, chain, "meet")


@dataclass(frozen=True)
class JoinWitness:
    word: CompositionWord
    points: tuple


def join_member(pair, c1: CoarseChain, c2: CoarseChain, maxlen: int) -> JoinWitness:
    """Shortest word over the two top entourages relating ``pair``.

    Breadth-first search where each step moves by the top entourage of
    either chain; ties resolve by queue order, then tag 0 before tag 1,
    then ascending point ID.
    """
    _check_windows(c1, c2)
    if maxlen < 1:
        raise ChainError("maxlen must be at least 1")
    x, y = pair
    c1.window.check_point(x)
    c1.window.check_point(y)
    tops = ((0, c1.R, c1.top.rows), (1, c2.R, c2.top.rows))
    if x == y:
        return JoinWitness(CompositionWord(((0, c1.R),)), (x, x))
    parent = {x: None}
    reached = 1 << x
    frontier = [x]
    for depth in range(1, maxlen + 1):
        nxt = []
        for z in frontier:
            for tag, idx, rows in tops:
                for w in iter_bits(rows[z] & ~reached):
                    reached |= 1 << w
                    parent[w] = (z, tag, idx)
                    nxt.append(w)
                    if w == y:
                        return _unwind(parent, y)
        if not nxt:
            break
        frontier = nxt
    raise NotWithinBudget(pair, maxlen, reached)


def _unwind(parent, y) -> JoinWitness:
    points = [y]
    letters = []
    cur = y
    while parent[cur] is not None:
        z, tag, idx = parent[cur]
        letters.append((tag, idx))
        points.append(z)
        cur = z
    return JoinWitness(CompositionWord(tuple(reversed(letters))), tuple(reversed(points)))


@dataclass(frozen=True)
class Containment:
    """Either a modulus ``phi`` with ``inner[i] <= outer[phi[i]]`` or a counterexample."""

    modulus: Optional[tuple] = None
    index: Optional[int] = None
    pair: Optional[tuple] = None

    def __bool__(self) -> bool:
        return self.modulus is not None


def contains(outer: CoarseChain, inner: CoarseChain) -> Containment:
    """Smallest modulus witnessing ``inner`` inside ``outer`` at truncation."""
    _check_windows(outer, inner)
    phi = []
    j = 0
    for i, e in enumerate(inner.chain):
        # outer ascends, so the smallest admissible index is non-decreasing in i
        while j <= outer.R and not e.issubset(outer[j]):
            j += 1
        if j > outer.R:
            return Containment(index=i, pair=e.first_pair_outside(outer.top))
        phi.append(j)
    return Containment(modulus=tuple(phi))


@dataclass(frozen=True)
class ComplementCertificate:
    partition: Partition
    transversal: tuple
    witnesses: dict = field(repr=False)
    nonsingleton_classes: int
    meet_is_diagonal: bool


def transversal_complement(structure, R: Optional[int] = None):
    """Ideal structure meeting every class of ``structure``'s equivalence exactly once.

    ``structure`` is an equivalence entourage or a cellular chain whose
    ``chain[1]`` is the designated equivalence.  Returns ``(IdealSpec,
    ComplementCertificate)``; each witness ``[x, a_x, a_y, y]`` follows the
    word ``eps o eps_A o eps``.
    """
    eps = structure[1] if isinstance(structure, CoarseChain) else structure
    p = partition_from_equivalence(eps)
    if len(p.classes) < 2:
        raise DegenerateStructure("fewer than 2 classes: the equivalence is already the full relation")
    transversal = tuple(c[0] for c in p.classes)
    spec = IdealSpec(frozenset(transversal))
    rep = [transversal[p.class_of[x]] for x in range(eps.window.size)]
    n = eps.window.size
    witnesses = {(x, y): (x, rep[x], rep[y], y) for x in range(n) for y in range(n)}
    eps_a = _cell_equivalence(eps.window, transversal)
    nonsingleton = 1 if len(transversal) >= 2 else 0
    cert = ComplementCertificate(
        partition=p,
        transversal=transversal,
        witnesses=witnesses,
        nonsingleton_classes=nonsingleton,
        meet_is_diagonal=intersect(eps, eps_a).is_diagonal(),
    )
    return spec, cert


def ideal_equivalence(window: Window, spec: IdealSpec) -> Entourage:
    """``eps_A``: the partition into ``A`` and singletons."""
    return _cell_equivalence(window, spec.a)
