import pytest
from hypothesis import given, settings, strategies as st

from coarselat.relations import (
    Entourage,
    NotAnEquivalence,
    Partition,
    RelationError,
    Window,
    WindowMismatch,
    ball,
    compose,
    compose_all,
    equivalence_from_partition,
    intersect,
    inverse,
    is_equivalence,
    merge_classes,
    partition_from_equivalence,
    restrict,
    union,
)
from coarselat.graphs import path_graph
from coarselat.structures import from_graph

from corpus import bf_compose, pairs_of


def diag(n):
    return {(x, x) for x in range(n)}


@st.composite
def entourages(draw, n=None, max_n=12):
    n = draw(st.integers(1, max_n)) if n is None else n
    pairs = draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=3 * n))
    return Entourage.from_pairs(Window(n), pairs)


@st.composite
def entourage_triples(draw):
    n = draw(st.integers(1, 12))
    return draw(entourages(n)), draw(entourages(n)), draw(entourages(n))


@st.composite
def partitions(draw, max_n=14):
    n = draw(st.integers(1, max_n))
    labels = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    return Partition.from_labels(Window(n), labels)


# ------------------------------------------------------------ examples

def test_compose_example():
    w = Window(3)
    a = Entourage.from_pairs(w, [(0, 1)])
    b = Entourage.from_pairs(w, [(1, 2)])
    assert pairs_of(compose(a, b)) == diag(3) | {(0, 1), (1, 2), (0, 2)}


def test_diagonal_is_identity_for_compose():
    w = Window(4)
    e = Entourage.from_pairs(w, [(0, 3), (2, 1)])
    assert compose(Entourage.diagonal(w), e) == e
    assert compose(e, Entourage.diagonal(w)) == e


def test_compose_rejects_other_window():
    with pytest.raises(WindowMismatch):
        compose(Entourage.diagonal(Window(3)), Entourage.diagonal(Window(4)))


def test_inverse_examples():
    w = Window(2)
    assert inverse(Entourage.diagonal(w)) == Entourage.diagonal(w)
    assert pairs_of(inverse(Entourage.from_pairs(w, [(0, 1)]))) == diag(2) | {(1, 0)}


def test_ball_examples():
    w = Window(5)
    assert ball(Entourage.diagonal(w), 3).members == frozenset({3})
    eps2 = from_graph(path_graph(5), 2)[2]
    assert ball(eps2, 0).members == frozenset({0, 1, 2})
    p = Partition.from_classes(w, [[0, 3], [1, 2, 4]])
    assert ball(equivalence_from_partition(p), 4).members == frozenset({1, 2, 4})
    with pytest.raises(RelationError):
        ball(eps2, 7)


def test_partition_equivalence_examples():
    w = Window(3)
    p = Partition.from_classes(w, [[0, 1], [2]])
    assert pairs_of(equivalence_from_partition(p)) == diag(3) | {(0, 1), (1, 0)}
    assert partition_from_equivalence(Entourage.diagonal(w)).classes == ((0,), (1,), (2,))
    with pytest.raises(NotAnEquivalence) as info:
        partition_from_equivalence(Entourage.from_pairs(w, [(0, 1)]))
    assert info.value.witness == (0, 1)


def test_non_transitive_is_rejected_with_triple():
    e = Entourage.from_pairs(Window(3), [(0, 1), (1, 0), (1, 2), (2, 1)])
    with pytest.raises(NotAnEquivalence) as info:
        partition_from_equivalence(e)
    x, y, z = info.value.witness
    assert (x, y) in e and (y, z) in e and (x, z) not in e


def test_partition_rejects_overlap_and_gaps():
    with pytest.raises(RelationError):
        Partition.from_classes(Window(3), [[0, 1], [1, 2]])
    with pytest.raises(RelationError):
        Partition.from_classes(Window(3), [[0, 1]])


def test_merge_classes_examples():
    w = Window(3)
    p = Partition.singletons(w)
    assert merge_classes(p, {0, 1}).classes == ((0, 1), (2,))
    assert merge_classes(p, {0, 1, 2}).classes == ((0, 1, 2),)
    with pytest.raises(RelationError):
        merge_classes(p, {5})
    with pytest.raises(RelationError):
        merge_classes(p, set())


def test_restrict_examples():
    w = Window(3)
    e = Entourage.from_pairs(w, [(0, 1), (1, 0)])
    assert restrict(e, range(3)) == e
    sub = restrict(e, {0, 2})
    assert sub.window.size == 2 and sub.is_diagonal()
    assert sub.window.parent == (0, 2)
    with pytest.raises(RelationError):
        restrict(e, [])


# ------------------------------------------------------------ properties

@settings(max_examples=150, deadline=None)
@given(entourage_triples())
def test_compose_matches_brute_force_and_associates(t):
    a, b, c = t
    assert pairs_of(compose(a, b)) == bf_compose(pairs_of(a), pairs_of(b))
    assert compose(a, compose(b, c)) == compose(compose(a, b), c)
    assert compose_all([a, b, c]) == compose(compose(a, b), c)


@settings(max_examples=150, deadline=None)
@given(entourage_triples())
def test_inverse_reverses_composition(t):
    a, b, _ = t
    assert inverse(inverse(a)) == a
    assert inverse(compose(a, b)) == compose(inverse(b), inverse(a))
    assert compose(a, inverse(a)) >= a


@settings(max_examples=150, deadline=None)
@given(entourage_triples())
def test_compose_is_monotone_and_balls_grow(t):
    a, b, c = t
    small = intersect(a, b)
    assert compose(small, c) <= compose(a, c)
    assert compose(c, small) <= compose(c, b)
    for x in range(a.window.size):
        assert ball(small, x).members <= ball(a, x).members
    assert pairs_of(union(a, b)) == pairs_of(a) | pairs_of(b)
    assert pairs_of(small) == pairs_of(a) & pairs_of(b)


@settings(max_examples=150, deadline=None)
@given(partitions())
def test_partition_round_trip(p):
    e = equivalence_from_partition(p)
    assert is_equivalence(e)
    q = partition_from_equivalence(e)
    assert q.same_cells(p)
    assert equivalence_from_partition(q) == e


@settings(max_examples=100, deadline=None)
@given(partitions(), st.data())
def test_restriction_of_equivalence_is_equivalence(p, data):
    s = data.draw(st.sets(st.integers(0, p.window.size - 1), min_size=1))
    sub = restrict(equivalence_from_partition(p), s)
    assert is_equivalence(sub)
    parent = sub.window.parent or range(p.window.size)
    for i, j in sub.pairs():
        assert p.class_of[parent[i]] == p.class_of[parent[j]]


@settings(max_examples=100, deadline=None)
@given(partitions(), st.data())
def test_merged_classes_dominate(p, data):
    f = data.draw(st.sets(st.integers(0, len(p.classes) - 1), min_size=1))
    merged = merge_classes(p, f)
    assert equivalence_from_partition(p) <= equivalence_from_partition(merged)
    assert len(merged.classes) == len(p.classes) - len(f) + 1
