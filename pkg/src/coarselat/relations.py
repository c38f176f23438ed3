"""Finite relation algebra for entourages on a window.

Relations are stored row-wise: ``rows[x]`` is a Python int whose bit ``y``
is set iff ``(x, y)`` belongs to the relation.  Every entourage carries the
diagonal, so bit ``x`` of ``rows[x]`` is always set.
"""

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence


class RelationError(ValueError):
    pass


class WindowMismatch(RelationError):
    pass


class NotAnEquivalence(RelationError):
    """Raised with the offending pair (not symmetric) or triple (not transitive)."""

    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


def iter_bits(mask: int) -> Iterator[int]:
    """Yield set bit positions of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def bits_of(points: Iterable[int]) -> int:
    mask = 0
    for p in points:
        mask |= 1 << p
    return mask


@dataclass(frozen=True)
class Window:
    """Finite ordered ground set ``0..size-1``.

    ``coords`` optionally attaches an integer vector to each point (grid
    windows), ``interior`` marks points where boundary-sensitive guarantees
    apply, and ``parent`` maps points back to the IDs of the window they were
    restricted from.
    """

    size: int
    coords: Optional[tuple] = field(default=None, compare=True)
    interior: Optional[frozenset] = field(default=None, compare=True)
    parent: Optional[tuple] = field(default=None, compare=True)

    def __post_init__(self):
        if self.size < 0:
            raise RelationError("window size must be non-negative")
        if self.coords is not None and len(self.coords) != self.size:
            raise RelationError("coords length does not match window size")
        if self.interior is not None and any(not 0 <= p < self.size for p in self.interior):
            raise RelationError("interior is not a subset of the window")
        if self.parent is not None and len(self.parent) != self.size:
            raise RelationError("parent map length does not match window size")

    @property
    def points(self) -> range:
        return range(self.size)

    @property
    def full_mask(self) -> int:
        return (1 << self.size) - 1

    def check_point(self, x: int) -> None:
        if not (isinstance(x, int) and 0 <= x < self.size):
            raise RelationError(f"unknown point {x!r} for window of size {self.size}")

    def index_of_coord(self, coord) -> int:
        if self.coords is None:
            raise RelationError("window has no coordinates")
        lookup = self.__dict__.get("_coord_index")
        if lookup is None:
            lookup = {c: i for i, c in enumerate(self.coords)}
            object.__setattr__(self, "_coord_index", lookup)
        return lookup[tuple(coord)]


def same_window(a: Window, b: Window) -> bool:
    return a is b or a == b


@dataclass(frozen=True, eq=False)
class Entourage:
    """Reflexive binary relation on a window.

    Build with :meth:`from_pairs` or :meth:`from_rows`; both add the diagonal.
    """

    window: Window
    rows: tuple

    @classmethod
    def from_rows(cls, window: Window, rows: Sequence[int]) -> "Entourage":
        if len(rows) != window.size:
            raise RelationError("row count does not match window size")
        full = window.full_mask
        fixed = []
        for x, row in enumerate(rows):
            if row & ~full:
                raise RelationError(f"row {x} references points outside the window")
            fixed.append(row | (1 << x))
        return cls(window, tuple(fixed))

    @classmethod
    def from_pairs(cls, window: Window, pairs: Iterable) -> "Entourage":
        rows = [0] * window.size
        for x, y in pairs:
            window.check_point(x)
            window.check_point(y)
            rows[x] |= 1 << y
        return cls.from_rows(window, rows)

    @classmethod
    def diagonal(cls, window: Window) -> "Entourage":
        return cls(window, tuple(1 << x for x in range(window.size)))

    @classmethod
    def full(cls, window: Window) -> "Entourage":
        full = window.full_mask
        return cls(window, (full,) * window.size)

    def __contains__(self, pair) -> bool:
        x, y = pair
        return bool(self.rows[x] >> y & 1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Entourage):
            return NotImplemented
        return same_window(self.window, other.window) and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.window.size, self.rows))

    def __le__(self, other: "Entourage") -> bool:
        return self.issubset(other)

    def __repr__(self) -> str:
        extra = sorted(self.off_diagonal())
        return f"Entourage(size={self.window.size}, off_diagonal={extra})"

    def __len__(self) -> int:
        return sum(bin(r).count("1") for r in self.rows)

    def pairs(self) -> Iterator[tuple]:
        for x, row in enumerate(self.rows):
            for y in iter_bits(row):
                yield (x, y)

    def off_diagonal(self) -> Iterator[tuple]:
        for x, row in enumerate(self.rows):
            for y in iter_bits(row & ~(1 << x)):
                yield (x, y)

    def is_diagonal(self) -> bool:
        return all(row == 1 << x for x, row in enumerate(self.rows))

    def issubset(self, other: "Entourage") -> bool:
        _check_same(self, other)
        return all(a & ~b == 0 for a, b in zip(self.rows, other.rows))

    def first_pair_outside(self, other: "Entourage") -> Optional[tuple]:
        """First pair of ``self`` (row-major order) missing from ``other``."""
        _check_same(self, other)
        for x, (a, b) in enumerate(zip(self.rows, other.rows)):
            extra = a & ~b
            if extra:
                return (x, (extra & -extra).bit_length() - 1)
        return None

    def is_symmetric(self) -> bool:
        return self.rows == inverse(self).rows

    def max_ball_size(self) -> int:
        return max((bin(r).count("1") for r in self.rows), default=0)


def _check_same(a: Entourage, b: Entourage) -> None:
    if not same_window(a.window, b.window):
        raise WindowMismatch(
            f"entourages live on different windows (sizes {a.window.size} and {b.window.size})"
        )


def compose(e1: Entourage, e2: Entourage) -> Entourage:
    """``{(x, y) : exists z with (x, z) in e1 and (z, y) in e2}``."""
    _check_same(e1, e2)
    rows2 = e2.rows
    out = []
    for row in e1.rows:
        acc = 0
        for z in iter_bits(row):
            acc |= rows2[z]
        out.append(acc)
    return Entourage(e1.window, tuple(out))


def compose_all(entourages: Sequence[Entourage]) -> Entourage:
    if not entourages:
        raise RelationError("empty composition")
    acc = entourages[0]
    for e in entourages[1:]:
        acc = compose(acc, e)
    return acc


def inverse(e: Entourage) -> Entourage:
    n = e.window.size
    cols = [0] * n
    for x, row in enumerate(e.rows):
        bit = 1 << x
        for y in iter_bits(row):
            cols[y] |= bit
    return Entourage(e.window, tuple(cols))


def intersect(e1: Entourage, e2: Entourage) -> Entourage:
    _check_same(e1, e2)
    return Entourage(e1.window, tuple(a & b for a, b in zip(e1.rows, e2.rows)))


def union(e1: Entourage, e2: Entourage) -> Entourage:
    _check_same(e1, e2)
    return Entourage(e1.window, tuple(a | b for a, b in zip(e1.rows, e2.rows)))


@dataclass(frozen=True)
class Ball:
    center: int
    members: frozenset


def ball(e: Entourage, x: int) -> Ball:
    e.window.check_point(x)
    return Ball(x, frozenset(iter_bits(e.rows[x])))


def ball_mask(e: Entourage, mask: int) -> int:
    """Union of the balls around every point of ``mask``."""
    acc = 0
    rows = e.rows
    for x in iter_bits(mask):
        acc |= rows[x]
    return acc


@dataclass(frozen=True, eq=False)
class Partition:
    """Disjoint cover of a window; class order is significant."""

    window: Window
    classes: tuple
    class_of: tuple

    @classmethod
    def from_classes(cls, window: Window, classes: Iterable[Iterable[int]]) -> "Partition":
        class_of = [None] * window.size
        normalized = []
        for idx, members in enumerate(classes):
            members = tuple(sorted(members))
            if not members:
                raise RelationError(f"class {idx} is empty")
            for x in members:
                window.check_point(x)
                if class_of[x] is not None:
                    raise RelationError(f"point {x} lies in classes {class_of[x]} and {idx}")
                class_of[x] = idx
            normalized.append(members)
        missing = [x for x, c in enumerate(class_of) if c is None]
        if missing:
            raise RelationError(f"point {missing[0]} is not covered by the partition")
        return cls(window, tuple(normalized), tuple(class_of))

    @classmethod
    def from_labels(cls, window: Window, labels: Sequence) -> "Partition":
        """Group points by label; classes ordered by their minimum point."""
        groups = {}
        for x, lab in enumerate(labels):
            groups.setdefault(lab, []).append(x)
        return cls.from_classes(window, groups.values())

    @classmethod
    def singletons(cls, window: Window) -> "Partition":
        return cls(window, tuple((x,) for x in range(window.size)), tuple(range(window.size)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return same_window(self.window, other.window) and self.classes == other.classes

    def __hash__(self) -> int:
        return hash(self.classes)

    def __len__(self) -> int:
        return len(self.classes)

    def class_mask(self, idx: int) -> int:
        return bits_of(self.classes[idx])

    def canonical(self) -> "Partition":
        """Same partition with classes ordered by minimum point."""
        return Partition.from_classes(self.window, sorted(self.classes, key=lambda c: c[0]))

    def same_cells(self, other: "Partition") -> bool:
        return sorted(self.classes) == sorted(other.classes)


def equivalence_from_partition(p: Partition) -> Entourage:
    rows = [0] * p.window.size
    for members in p.classes:
        mask = bits_of(members)
        for x in members:
            rows[x] = mask
    return Entourage(p.window, tuple(rows))


def partition_from_equivalence(e: Entourage) -> Partition:
    inv = inverse(e)
    for x, (a, b) in enumerate(zip(e.rows, inv.rows)):
        if a != b:
            y = ((a ^ b) & -(a ^ b)).bit_length() - 1
            pair = (x, y) if a >> y & 1 else (y, x)
            raise NotAnEquivalence(f"not symmetric: {pair} present but its inverse is not", pair)
    rows = e.rows
    for x, row in enumerate(rows):
        for y in iter_bits(row):
            extra = rows[y] & ~row
            if extra:
                z = (extra & -extra).bit_length() - 1
                raise NotAnEquivalence(
                    f"not transitive: ({x}, {y}) and ({y}, {z}) present but ({x}, {z}) is not",
                    (x, y, z),
                )
    seen = 0
    classes = []
    for x, row in enumerate(rows):
        if not seen >> x & 1:
            classes.append(tuple(iter_bits(row)))
            seen |= row
    return Partition.from_classes(e.window, classes)


def is_equivalence(e: Entourage) -> bool:
    try:
        partition_from_equivalence(e)
    except NotAnEquivalence:
        return False
    return True


def merge_classes(p: Partition, f: Iterable[int]) -> Partition:
    """Replace the classes indexed by ``f`` with their union, placed at the smallest index."""
    f = sorted(set(f))
    if not f:
        raise RelationError("merge set must be nonempty")
    for idx in f:
        if not 0 <= idx < len(p.classes):
            raise RelationError(f"invalid class index {idx}")
    chosen = set(f)
    merged = [x for idx in f for x in p.classes[idx]]
    classes = []
    for idx, members in enumerate(p.classes):
        if idx == f[0]:
            classes.append(merged)
        elif idx not in chosen:
            classes.append(members)
    return Partition.from_classes(p.window, classes)


def restrict(e: Entourage, s: Iterable[int]) -> Entourage:
    """Intersect with ``s x s`` and re-index to a window on ``sorted(s)``.

    The new window's ``parent`` maps local IDs back to the IDs of the
    outermost ancestor window.
    """
    pts = sorted(set(s))
    if not pts:
        raise RelationError("cannot restrict to an empty set")
    for x in pts:
        e.window.check_point(x)
    if len(pts) == e.window.size:
        return e
    window = restricted_window(e.window, pts)
    local = {x: i for i, x in enumerate(pts)}
    rows = []
    for x in pts:
        row = 0
        for y in iter_bits(e.rows[x]):
            j = local.get(y)
            if j is not None:
                row |= 1 << j
        rows.append(row)
    return Entourage(window, tuple(rows))


def restricted_window(window: Window, pts: Sequence[int]) -> Window:
    parent = tuple(window.parent[x] for x in pts) if window.parent is not None else tuple(pts)
    coords = tuple(window.coords[x] for x in pts) if window.coords is not None else None
    interior = None
    if window.interior is not None:
        local = {x: i for i, x in enumerate(pts)}
        interior = frozenset(local[x] for x in window.interior if x in local)
    return Window(len(pts), coords=coords, interior=interior, parent=parent)
