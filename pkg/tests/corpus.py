"""Seeded instances, independent oracles and certificate mutations shared by the tests."""

import itertools
import random
from fractions import Fraction

import networkx as nx

from coarselat.certificates import DiameterWitness, EdgeWitness, assemble
from coarselat.decompose import (
    grid_decomposition,
    linking_pair_decomposition,
    net_decomposition,
    pullback_decomposition,
    sphere_decomposition,
    subdivide,
    unit_graph,
)
from coarselat.graphs import Graph, cycle_graph, grid_graph, path_graph, random_connected_graph, random_tree
from coarselat.metrics import MetricWindow
from coarselat.relations import Entourage, Partition, Window, equivalence_from_partition
from coarselat.structures import NotWithinBudget, from_graph, generated_by, join_member


# ------------------------------------------------------------ brute-force relation algebra

def pairs_of(e: Entourage) -> set:
    return set(e.pairs())


def bf_compose(a: set, b: set) -> set:
    by_first = {}
    for z, y in b:
        by_first.setdefault(z, set()).add(y)
    return {(x, y) for x, z in a for y in by_first.get(z, ())}


def random_entourage(rng, n, density=None) -> Entourage:
    density = rng.random() * 0.3 if density is None else density
    pairs = [(x, y) for x in range(n) for y in range(n) if x != y and rng.random() < density]
    return Entourage.from_pairs(Window(n), pairs)


def random_partition(rng, n, k=None) -> Partition:
    k = rng.randint(1, n) if k is None else k
    labels = [rng.randrange(k) for _ in range(n)]
    return Partition.from_labels(Window(n), labels)


def nx_graph(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    return h


def nx_distances(g: Graph) -> dict:
    return dict(nx.all_pairs_shortest_path_length(nx_graph(g)))


# ------------------------------------------------------------ certificate corpus

def small_graphs(seed: int, count: int, max_n: int = 30):
    rng = random.Random(seed)
    out = []
    for i in range(count):
        n = rng.randint(3, max_n)
        kind = i % 4
        if kind == 0:
            out.append(random_tree(n, rng))
        elif kind == 1:
            out.append(cycle_graph(n))
        elif kind == 2:
            out.append(path_graph(n))
        else:
            out.append(random_connected_graph(n, rng.randint(n - 1, min(2 * n, n * (n - 1) // 2)), rng))
    return out


def certificate_corpus(seed: int = 0, count: int = 12, max_n: int = 20):
    """``(chain, cert)`` pairs from every construction; windows stay at or below 64 points."""
    out = []
    for n, N in ((1, 8), (2, 4)):
        g, cert = grid_decomposition(n, N)
        out.append((from_graph(g, cert.R), cert))
    big = grid_graph((-4, -4), (4, 4))
    y = [x for x, c in enumerate(big.window.coords) if c[0] % 2 == 0 and c[1] % 2 == 0]
    cert = pullback_decomposition(from_graph(big, 8), y, grid_decomposition(2, 2)[1])
    out.append((from_graph(big, cert.R), cert))
    rng = random.Random(seed)
    for _ in range(2):
        pos = [0]
        for _ in range(rng.randint(8, 30)):
            pos.append(pos[-1] + rng.choice((1, 2, 3)))
        g, _ = unit_graph(MetricWindow.from_positions([Fraction(p, 3) for p in pos]))
        _, cert = net_decomposition(g, 1)
        if cert is not None:
            out.append((from_graph(g, cert.R), cert))
    for g in small_graphs(seed, count, max_n):
        _, cert = sphere_decomposition(g, 0)
        out.append((from_graph(g, cert.R), cert))
        report, cert = net_decomposition(g, 1)
        if cert is not None:
            out.append((from_graph(g, cert.R), cert))
        if len(g.edges) <= 15:
            g2, p = subdivide(g)
            _, cert = linking_pair_decomposition(g2, p, 1)
            out.append((from_graph(g2, cert.R), cert))
    return out


def rewitness(chain, p0: Partition, p1: Partition, maxlen: int, method="rewitness"):
    """Certificate for ``(p0, p1)`` built by shortest-word search; pairs with no word stay unwitnessed."""
    e0 = generated_by(equivalence_from_partition(p0), 1)
    e1 = generated_by(equivalence_from_partition(p1), 1)
    edges = []
    for x, y in chain[1].off_diagonal():
        if x > y:
            continue
        try:
            w = join_member((x, y), e0, e1, maxlen)
        except NotWithinBudget:
            continue
        edges.append(EdgeWitness((x, y), w.points, w.word.tags))
    diam = []
    for factor, p in ((0, p0), (1, p1)):
        for idx, members in enumerate(p.classes):
            center, index = _cover(chain, members)
            diam.append(DiameterWitness(factor, idx, center, index))
    cert = assemble(chain.window, p0, p1, diam, edges, chain.R, method)
    return cert.evolve(budget=(chain.R, maxlen))


def _cover(chain, members):
    for i, ent in enumerate(chain.chain):
        for c in range(chain.window.size):
            if all((c, x) in ent for x in members):
                return c, i
    return members[0], chain.R


# ------------------------------------------------------------ acceptance report

ACCEPTANCE_LINES = []


# ------------------------------------------------------------ mutations

MUTATIONS = (
    "witness_point",
    "drop_witness",
    "pattern_letter",
    "endpoint",
    "diameter_index",
    "diameter_center",
    "drop_diameter",
    "class_drop_point",
    "class_dup_point",
    "budget",
)


def _class_of(classes, n):
    lab = [None] * n
    for i, c in enumerate(classes):
        for x in c:
            lab[x] = i
    return lab


def mutate(chain, cert, rng, kind):
    """One corrupted field; ``None`` when ``kind`` has no genuine target in ``cert``."""
    n = cert.window.size
    wits = list(cert.edge_witnesses)
    if kind == "witness_point":
        w_idx = rng.randrange(len(wits))
        w = wits[w_idx]
        pts = list(w.points)
        j = rng.randrange(1, len(pts)) if len(pts) > 2 else 1
        hop = j - 1
        lab = _class_of(cert.classes(w.pattern[hop]), n)
        bad = [z for z in range(n) if lab[z] != lab[pts[hop]]]
        if not bad:
            return None
        pts[j] = rng.choice(bad)
        wits[w_idx] = EdgeWitness(w.pair, tuple(pts), w.pattern)
        return cert.evolve(edge_witnesses=tuple(wits))
    if kind == "drop_witness":
        del wits[rng.randrange(len(wits))]
        return cert.evolve(edge_witnesses=tuple(wits))
    if kind == "pattern_letter":
        w_idx = rng.randrange(len(wits))
        w = wits[w_idx]
        pat = list(w.pattern)
        pat[rng.randrange(len(pat))] = 2
        wits[w_idx] = EdgeWitness(w.pair, w.points, tuple(pat))
        return cert.evolve(edge_witnesses=tuple(wits))
    if kind == "endpoint":
        w_idx = rng.randrange(len(wits))
        w = wits[w_idx]
        pts = list(w.points)
        pts[-1] = rng.choice([z for z in range(n) if z != pts[-1]])
        wits[w_idx] = EdgeWitness(w.pair, tuple(pts), w.pattern)
        return cert.evolve(edge_witnesses=tuple(wits))
    diam = list(cert.diameter_witnesses)
    if kind == "diameter_index":
        cands = [i for i, d in enumerate(diam) if len(cert.classes(d.factor)[d.cls]) > 1]
        if not cands:
            return None
        i = rng.choice(cands)
        diam[i] = DiameterWitness(diam[i].factor, diam[i].cls, diam[i].center, 0)
        return cert.evolve(diameter_witnesses=tuple(diam))
    if kind == "diameter_center":
        i = rng.randrange(len(diam))
        d = diam[i]
        members = cert.classes(d.factor)[d.cls]
        ent = chain[min(d.index, chain.R)]
        bad = [c for c in range(n) if not all((c, x) in ent for x in members)]
        if not bad:
            return None
        diam[i] = DiameterWitness(d.factor, d.cls, rng.choice(bad), d.index)
        return cert.evolve(diameter_witnesses=tuple(diam))
    if kind == "drop_diameter":
        del diam[rng.randrange(len(diam))]
        return cert.evolve(diameter_witnesses=tuple(diam))
    if kind in ("class_drop_point", "class_dup_point"):
        factor = rng.randrange(2)
        classes = [list(c) for c in cert.classes(factor)]
        if kind == "class_drop_point":
            c = rng.randrange(len(classes))
            classes[c].pop(rng.randrange(len(classes[c])))
        else:
            if len(classes) < 2:
                return None
            a, b = rng.sample(range(len(classes)), 2)
            classes[a].append(rng.choice(classes[b]))
        field = "classes0" if factor == 0 else "classes1"
        return cert.evolve(**{field: tuple(tuple(c) for c in classes)})
    if kind == "budget":
        return cert.evolve(budget=(cert.R, cert.maxlen - 1))
    raise ValueError(kind)


def all_pairs(n):
    return itertools.product(range(n), repeat=2)
