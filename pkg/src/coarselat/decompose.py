"""Cellular join-decompositions of graph and metric structures, with certificates.

Every arbitrary choice (enumeration orders, injections, net points,
retraction targets) resolves by ascending point ID so that certificates are
reproducible.
"""

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from .certificates import (
    DecompositionCertificate,
    DiameterWitness,
    EdgeWitness,
    HypothesisReport,
    assemble,
)
from .graphs import DisconnectedGraph, Graph, grid_graph
from .relations import Partition, RelationError, Window, bits_of, iter_bits
from .structures import ChainError, CoarseChain, contains, from_graph, from_metric
from .verify import enclosing_ball, neighbor_classes, sphere_report, linking_report, net_report


class DecompositionError(ValueError):
    pass


class NotLarge(DecompositionError):
    def __init__(self, point):
        super().__init__(f"subset is not large at any available index: point {point} stays uncovered")
        self.point = point


def _diameter_witnesses(dist, p0: Partition, p1: Partition) -> list:
    out = []
    for factor, p in ((0, p0), (1, p1)):
        for idx, members in enumerate(p.classes):
            center, radius = enclosing_ball(dist, members)
            out.append(DiameterWitness(factor, idx, center, radius))
    return out


def _budget_radius(witnesses) -> int:
    return max(1, max((w.index for w in witnesses), default=0))


# ------------------------------------------------------------ grids

def grid_decomposition(n: int, N, s: int = 1):
    """Shifted-cube decomposition of the l1 grid on ``[-N, N)^n``.

    ``N`` may be a per-axis tuple.  ``p0`` cuts the box into cubes of side
    ``2s`` aligned to ``2s Z^n``; ``p1`` is ``p0`` shifted by ``(s, ..., s)``.
    Each unit step stays in one class of ``p0`` or ``p1``.
    """
    if n < 1:
        raise DecompositionError("dimension must be positive")
    half = (N,) * n if isinstance(N, int) else tuple(N)
    if len(half) != n:
        raise DecompositionError("half-width tuple does not match the dimension")
    return box_decomposition(tuple(-h for h in half), half, s)


def box_decomposition(lows, highs, s: int = 1):
    """Same construction on the box ``prod [lows[a], highs[a])``; both ends must sit on ``2s Z``."""
    if s < 1 or s & (s - 1):
        raise DecompositionError(f"scale {s} is not a power of 2")
    lows, half = tuple(lows), tuple(highs)
    n = len(lows)
    for lo, hi in zip(lows, half):
        if hi <= lo or lo % (2 * s) or hi % (2 * s):
            raise DecompositionError(f"box side [{lo}, {hi}) is not aligned to multiples of 2s = {2 * s}")
    g = grid_graph(lows, half)
    coords = g.window.coords
    side = 2 * s
    p0 = Partition.from_labels(g.window, [tuple(c // side for c in x) for x in coords])
    p1 = Partition.from_labels(g.window, [tuple((c - s) // side for c in x) for x in coords])

    witnesses = []
    for factor, p, offset in ((0, p0, 0), (1, p1, s)):
        for idx, members in enumerate(p.classes):
            corner = tuple(((coords[members[0]][a] - offset) // side) * side + offset for a in range(n))
            target = tuple(min(max(corner[a] + s, lows[a]), half[a] - 1) for a in range(n))
            center = g.window.index_of_coord(target)
            radius = max(sum(abs(coords[x][a] - target[a]) for a in range(n)) for x in members)
            witnesses.append(DiameterWitness(factor, idx, center, radius))

    edges = []
    for u, v in g.edges:
        if p0.class_of[u] == p0.class_of[v]:
            edges.append(EdgeWitness((u, v), (u, v), (0,)))
        else:
            assert p1.class_of[u] == p1.class_of[v], "unit step covered by neither partition"
            edges.append(EdgeWitness((u, v), (u, v), (1,)))
    cert = assemble(g.window, p0, p1, witnesses, edges, _budget_radius(witnesses), "cubes")
    return g, cert


def class_diameter(window: Window, members) -> int:
    """l1 diameter of a set of grid points."""
    pts = [window.coords[x] for x in members]
    n = len(pts[0])
    # max l1 distance = max over sign vectors of (max - min) of the signed sums
    best = 0
    for signs in range(1 << n):
        vals = [sum(c[a] if signs >> a & 1 else -c[a] for a in range(n)) for c in pts]
        best = max(best, max(vals) - min(vals))
    return best


# ------------------------------------------------------------ sphere layers

def sphere_decomposition(g: Graph, v0: int, k: Optional[int] = None):
    """Components of the two-layer graphs around ``v0``, split by parity of the lower layer."""
    g.check_connected()
    g.window.check_point(v0)
    dist = g.distance_matrix()
    report = sphere_report(g, v0, k, dist)
    if not report:
        return report, None
    d0 = dist[v0]
    layer_count = int(d0.max()) + 1
    labels = [[None] * g.n, [None] * g.n]
    for m in range(layer_count):
        verts = [v for v in range(g.n) if d0[v] in (m, m + 1)]
        # each vertex lies in exactly one two-layer graph of each parity
        for comp in g.induced_components(verts):
            for v in comp:
                labels[m % 2][v] = (m, comp[0])
    labels[1][v0] = ("root", v0)
    p0 = Partition.from_labels(g.window, labels[0])
    p1 = Partition.from_labels(g.window, labels[1])

    edges = []
    for u, v in g.edges:
        m = int(min(d0[u], d0[v]))
        factor = m % 2
        assert labels[factor][u] == labels[factor][v], "edge not inside a two-layer component"
        edges.append(EdgeWitness((u, v), (u, v), (factor,)))
    witnesses = _diameter_witnesses(dist, p0, p1)
    cert = assemble(g.window, p0, p1, witnesses, edges, _budget_radius(witnesses), "spheres")
    return report, cert


# ------------------------------------------------------------ linking pairs

@dataclass(frozen=True)
class LinkingPairs:
    partition: Partition
    injections: tuple  # injections[a][b] = member of class a facing neighbor class b
    links: tuple  # two-element cells


def linking_pairs(g: Graph, p: Partition) -> LinkingPairs:
    """Injections ``N(P_a) -> P_a`` and the disjoint two-element cells linking neighbor classes."""
    p = p.canonical()
    nbrs = neighbor_classes(g, p)
    injections = []
    for a, members in enumerate(p.classes):
        if len(nbrs[a]) > len(members):
            raise DecompositionError(f"class {a} has more neighbor classes than members")
        injections.append(dict(zip(nbrs[a], members)))
    links = []
    used = set()
    for a in range(len(p.classes)):
        for b in nbrs[a]:
            if b >= a:
                continue
            cell = (injections[b][a], injections[a][b])
            assert not used.intersection(cell), "linking cells are not disjoint"
            used.update(cell)
            links.append(tuple(sorted(cell)))
    return LinkingPairs(p, tuple(injections), tuple(links))


def linking_pair_decomposition(g: Graph, p: Partition, r: int, dist=None):
    """Decompose via a partition with bounded classes and few neighbor classes.

    Cross edges ``x in P, y in Q`` get the witness ``[x, f_P(Q), f_Q(P), y]``.
    """
    g.check_connected()
    dist = g.distance_matrix() if dist is None else dist
    report = linking_report(g, p, r, dist)
    if not report:
        return report, None
    lp = linking_pairs(g, p)
    p = lp.partition
    linked = set(x for cell in lp.links for x in cell)
    gamma = Partition.from_classes(
        g.window, sorted(list(lp.links) + [(v,) for v in range(g.n) if v not in linked])
    )
    edges = []
    for u, v in g.edges:
        a, b = p.class_of[u], p.class_of[v]
        if a == b:
            edges.append(EdgeWitness((u, v), (u, v), (0,)))
        else:
            chain = (u, lp.injections[a][b], lp.injections[b][a], v)
            edges.append(EdgeWitness((u, v), chain, (0, 1, 0)))
    witnesses = _diameter_witnesses(dist, p, gamma)
    measured = dict(report.measured, links=len(lp.links))
    report = HypothesisReport(report.check, True, None, measured)
    cert = assemble(g.window, p, gamma, witnesses, edges, _budget_radius(witnesses), "linking")
    return report, cert


# ------------------------------------------------------------ separated nets

def separated_net(dist, r: int) -> list:
    """Greedy (ascending ID) maximal set with pairwise disjoint balls of radius ``r``."""
    chosen = []
    for v in range(dist.shape[0]):
        if all(dist[v, x] > 2 * r for x in chosen):
            chosen.append(v)
    return chosen


def net_decomposition(g: Graph, r: int):
    """Nearest-net-point partition (classes inside ``B(x, 2r)``) fed to the linking-pair construction."""
    g.check_connected()
    dist = g.distance_matrix()
    net = separated_net(dist, r)
    assert net_report(g, net, r, dist), "greedy net is not maximal"
    nearest = []
    for v in range(g.n):
        d = dist[v, net]
        nearest.append(net[int(d.argmin())])
    p = Partition.from_labels(g.window, nearest)
    for members in p.classes:
        x = nearest[members[0]]
        assert all(dist[x, v] <= 2 * r for v in members), "class escapes B(x, 2r)"
    report, cert = linking_pair_decomposition(g, p, 2 * r, dist)
    measured = dict(report.measured, net=net, net_radius=r)
    report = HypothesisReport("net", report.passed, report.failing, measured)
    if cert is not None:
        cert = cert.evolve(method="net")
    return report, cert


# ------------------------------------------------------------ subdivision

def subdivide(g: Graph):
    """Replace each edge ``{u, v}`` (in edge order) by ``u - x - y - v``.

    New vertices get IDs ``n + 2i`` (next to ``u``) and ``n + 2i + 1`` (next to
    ``v``).  The returned partition has one cell per original vertex: the
    vertex with its adjacent new vertices.
    """
    n = g.n
    edges = []
    cells = [[v] for v in range(n)]
    for i, (u, v) in enumerate(g.edges):
        x, y = n + 2 * i, n + 2 * i + 1
        edges += [(u, x), (x, y), (y, v)]
        cells[u].append(x)
        cells[v].append(y)
    g2 = Graph.from_edges(n + 2 * len(g.edges), edges)
    return g2, Partition.from_classes(g2.window, cells)


# ------------------------------------------------------------ pullback

@dataclass(frozen=True)
class Retraction:
    index: int
    y: tuple
    f: tuple


def retraction(e: CoarseChain, y: Iterable[int]) -> Retraction:
    """``f(x)`` = smallest point of ``y`` within ``e[i]`` of ``x``, for the least symmetric ``e[i]`` that covers."""
    ys = tuple(sorted(set(y)))
    if not ys:
        raise DecompositionError("empty subset")
    ymask = bits_of(ys)
    uncovered = None
    for i, ent in enumerate(e.chain):
        if not ent.is_symmetric():
            continue
        f = []
        for x, row in enumerate(ent.rows):
            hit = row & ymask
            if not hit:
                uncovered = x
                break
            f.append(x if ymask >> x & 1 else (hit & -hit).bit_length() - 1)
        else:
            return Retraction(i, ys, tuple(f))
    raise NotLarge(uncovered if uncovered is not None else 0)


def pullback_decomposition(e: CoarseChain, y, cert_on_y: DecompositionCertificate) -> DecompositionCertificate:
    """Lift a certificate on the sub-window ``sorted(y)`` back along the retraction.

    Classes become preimages ``f^-1(C)``.  A generator pair ``(x, x')`` is
    joined through the certified pairs of ``y`` from ``f(x)`` to ``f(x')``;
    the concatenated chain has its endpoints replaced by ``x`` and ``x'`` and
    consecutive hops in the same factor merged.
    """
    ret = retraction(e, y)
    ys = ret.y
    if cert_on_y.window.size != len(ys):
        raise DecompositionError("certificate window does not match the subset")
    local = {p: i for i, p in enumerate(ys)}
    f_local = [local[t] for t in ret.f]

    classes = []
    for factor in (0, 1):
        pulled = [[] for _ in cert_on_y.classes(factor)]
        lab = Partition.from_classes(cert_on_y.window, cert_on_y.classes(factor)).class_of
        for x in range(e.window.size):
            pulled[lab[f_local[x]]].append(x)
        classes.append(Partition.from_classes(e.window, pulled))
    p0, p1 = classes

    adj = {}
    wit = {}
    for w in cert_on_y.edge_witnesses:
        a, b = w.pair
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
        wit[(a, b)] = w
    paths = {}

    def y_path(a, b):
        key = (a, b)
        if key not in paths:
            paths[key] = _bfs_path(adj, a, b)
        return paths[key]

    edges = []
    for x, x2 in e[1].off_diagonal():
        if x > x2:
            continue
        a, b = f_local[x], f_local[x2]
        if a == b:
            edges.append(EdgeWitness((x, x2), (x, x2), (0,)))
            continue
        route = y_path(a, b)
        if route is None:
            raise DecompositionError(f"no certified route between {ys[a]} and {ys[b]} in the subset")
        points = [a]
        pattern = []
        for u, v in zip(route, route[1:]):
            w = wit[(min(u, v), max(u, v))]
            pts, pat = list(w.points), list(w.pattern)
            if u > v:
                pts, pat = pts[::-1], pat[::-1]
            points.extend(pts[1:])
            pattern.extend(pat)
        points = [ys[q] for q in points]
        points[0], points[-1] = x, x2
        points, pattern = _merge_hops(points, pattern)
        edges.append(EdgeWitness((x, x2), tuple(points), tuple(pattern)))

    witnesses = []
    for factor, p in ((0, p0), (1, p1)):
        centers = {w.cls: ys[w.center] for w in cert_on_y.diameter_witnesses if w.factor == factor}
        for idx, members in enumerate(p.classes):
            witnesses.append(_pulled_witness(e, factor, idx, bits_of(members), centers.get(idx)))
    cert = assemble(e.window, p0, p1, witnesses, edges, _budget_radius(witnesses), "pullback")
    return cert


def _bfs_path(adj, a, b):
    prev = {a: None}
    queue = deque([a])
    while queue:
        u = queue.popleft()
        if u == b:
            path = [b]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return path[::-1]
        for v in sorted(adj.get(u, ())):
            if v not in prev:
                prev[v] = u
                queue.append(v)
    return None


def _merge_hops(points, pattern):
    pts = [points[0]]
    pat = []
    for j, t in enumerate(pattern):
        if pat and pat[-1] == t:
            pts[-1] = points[j + 1]
        else:
            pat.append(t)
            pts.append(points[j + 1])
    return pts, pat


def _first_index(e: CoarseChain, center: int, mask: int) -> Optional[int]:
    for j, ent in enumerate(e.chain):
        if not mask & ~ent.rows[center]:
            return j
    return None


def _pulled_witness(e, factor, idx, mask, hint) -> DiameterWitness:
    if hint is not None:
        j = _first_index(e, hint, mask)
        if j is not None:
            return DiameterWitness(factor, idx, hint, j)
    best = None
    for c in range(e.window.size):
        j = _first_index(e, c, mask)
        if j is not None and (best is None or j < best[1]):
            best = (c, j)
    if best is None:
        raise DecompositionError(f"pulled class {idx} of factor {factor} is unbounded within the chain")
    return DiameterWitness(factor, idx, best[0], best[1])


# ------------------------------------------------------------ unit-distance graph

@dataclass(frozen=True)
class UnitGraphReport:
    phi: tuple  # graph chain[i] inside metric chain[phi[i]]
    psi: tuple  # metric chain[i] inside graph chain[psi[i]]


def unit_graph(m, R: int = 3):
    """Graph joining points at distance in ``(0, 1]``, with bi-containment moduli up to ``R``."""
    n = m.n
    edges = [(x, y) for x in range(n) for y in range(x + 1, n) if m.num[x, y] <= m.scale]
    g = Graph.from_edges(n, edges)
    g.check_connected()
    g = Graph(m.window, g.edges, g.adjacency)
    diam = int(g.distance_matrix().max()) if n else 0
    mdiam = math.ceil(m.diameter())
    gchain = from_graph(g, max(R, diam))
    mchain = from_metric(m, max(R, mdiam))
    phi = contains(mchain, gchain.truncate(R))
    psi = contains(gchain, mchain.truncate(R))
    assert phi and psi, "full-radius chains must contain each other"
    return g, UnitGraphReport(phi.modulus, psi.modulus)
