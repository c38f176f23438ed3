"""Certificate replay, the brute-force join oracle, and standalone hypothesis checks.

Nothing here looks at how a certificate was built: replay uses only the
certificate and the raw entourages of the structure.
"""

from collections import deque
from typing import Optional

import numpy as np

from .certificates import DecompositionCertificate, HypothesisReport, VerificationReport
from .relations import (
    Entourage,
    Partition,
    RelationError,
    WindowMismatch,
    bits_of,
    compose,
    equivalence_from_partition,
    iter_bits,
    union,
)
from .structures import CoarseChain, ComplementCertificate, IdealSpec, ideal_equivalence

ORACLE_CAP = 60


class OracleRefused(RuntimeError):
    pass


# ------------------------------------------------------------ certificate replay

def _class_labels(window, classes):
    """Class label per point, or a failure reason for a non-partition."""
    labels = [None] * window.size
    for idx, members in enumerate(classes):
        if not members:
            return None, f"class {idx} is empty"
        for x in members:
            if not (isinstance(x, int) and 0 <= x < window.size):
                return None, f"class {idx} holds unknown point {x!r}"
            if labels[x] is not None:
                return None, f"point {x} lies in classes {labels[x]} and {idx}"
            labels[x] = idx
    for x, lab in enumerate(labels):
        if lab is None:
            return None, f"point {x} is not covered"
    return labels, None


def verify_certificate(e: CoarseChain, cert: DecompositionCertificate) -> VerificationReport:
    """Replay ``cert`` against ``e``: partitions, diameter witnesses, then generator witnesses."""
    if cert.window.size != e.window.size:
        raise WindowMismatch(
            f"certificate window has {cert.window.size} points, structure has {e.window.size}"
        )
    counts = {"classes": 0, "diameter_witnesses": 0, "edges": 0, "witnesses": len(cert.edge_witnesses)}

    def fail(obj, reason, m=0, bounds=(0, 0)):
        return VerificationReport(False, counts, {"object": obj, "reason": reason}, m, bounds)

    labels = []
    for factor in (0, 1):
        lab, reason = _class_labels(e.window, cert.classes(factor))
        if lab is None:
            return fail({"partition": factor}, reason)
        labels.append(lab)
        counts["classes"] += len(cert.classes(factor))

    R, maxlen = cert.budget
    if R > e.R:
        return fail({"budget": list(cert.budget)}, f"budget radius {R} exceeds structure radius {e.R}")

    seen = {}
    bounds = [0, 0]
    for w in cert.diameter_witnesses:
        key = (w.factor, w.cls)
        obj = {"diameter_witness": [w.factor, w.cls]}
        if w.factor not in (0, 1) or not 0 <= w.cls < len(cert.classes(w.factor)):
            return fail(obj, "witness names no class")
        if key in seen:
            return fail(obj, "duplicate witness for class")
        if not 0 <= w.index <= min(R, e.R):
            return fail(obj, f"index {w.index} outside budget radius {R}")
        if not 0 <= w.center < e.window.size:
            return fail(obj, f"unknown center {w.center}")
        row = e[w.index].rows[w.center]
        members = bits_of(cert.classes(w.factor)[w.cls])
        if members & ~row:
            stray = (members & ~row & -(members & ~row)).bit_length() - 1
            return fail(obj, f"point {stray} lies outside ball(chain[{w.index}], {w.center})")
        seen[key] = w
        bounds[w.factor] = max(bounds[w.factor], w.index)
        counts["diameter_witnesses"] += 1
    for factor in (0, 1):
        for idx in range(len(cert.classes(factor))):
            if (factor, idx) not in seen:
                return fail({"diameter_witness": [factor, idx]}, "class has no diameter witness")

    by_pair = {}
    for w in cert.edge_witnesses:
        by_pair.setdefault(tuple(w.pair), w)
    m = 0
    gen = e[1] if e.R >= 1 else e[0]
    for x, y in gen.off_diagonal():
        key = (x, y) if x < y else (y, x)
        w = by_pair.get(key)
        obj = {"edge": [x, y]}
        if w is None:
            return fail(obj, "missing witness for generator pair", m, tuple(bounds))
        points, pattern = tuple(w.points), tuple(w.pattern)
        if x > y:
            points, pattern = points[::-1], pattern[::-1]
        reason = _replay_chain(points, pattern, x, y, labels, e.window.size)
        if reason is None and len(pattern) > maxlen:
            reason = f"pattern length {len(pattern)} exceeds budget {maxlen}"
        if reason:
            return fail(obj, reason, m, tuple(bounds))
        m = max(m, len(pattern))
        counts["edges"] += 1
    return VerificationReport(True, counts, None, m, tuple(bounds))


def _replay_chain(points, pattern, x, y, labels, n) -> Optional[str]:
    if not pattern:
        return "empty pattern"
    if len(points) != len(pattern) + 1:
        return "point chain and pattern lengths disagree"
    if points[0] != x or points[-1] != y:
        return "chain endpoints do not match the pair"
    for j, t in enumerate(pattern):
        if t not in (0, 1):
            return f"pattern letter {t!r} is not a factor"
        if j and pattern[j - 1] == t:
            return "pattern does not alternate"
        a, b = points[j], points[j + 1]
        if not (0 <= a < n and 0 <= b < n):
            return f"hop {j} leaves the window"
        if labels[t][a] != labels[t][b]:
            return f"hop {j} ({a} -> {b}) leaves its factor-{t} class"
    return None


# ------------------------------------------------------------ brute-force oracle

def oracle_join_covers(e: CoarseChain, p0: Partition, p1: Partition, maxlen: int, cap: int = ORACLE_CAP):
    """Return ``None`` if ``e[1]`` lies in ``(eps_p0 | eps_p1)^maxlen``, else the first uncovered pair."""
    if e.window.size > cap:
        raise OracleRefused(f"window has {e.window.size} points, oracle cap is {cap}")
    if maxlen < 1:
        raise ValueError("maxlen must be at least 1")
    step = union(equivalence_from_partition(p0), equivalence_from_partition(p1))
    closure = step
    for _ in range(maxlen - 1):
        closure = compose(closure, step)
    gen = e[1] if e.R >= 1 else e[0]
    return gen.first_pair_outside(closure)


# ------------------------------------------------------------ complement replay

def replay_complement(eps: Entourage, cert: ComplementCertificate) -> Optional[tuple]:
    """First pair whose ``[x, a_x, a_y, y]`` witness fails the word ``eps o eps_A o eps``, or ``None``."""
    eps_a = ideal_equivalence(eps.window, IdealSpec(frozenset(cert.transversal)))
    n = eps.window.size
    for x in range(n):
        for y in range(n):
            w = cert.witnesses.get((x, y))
            if w is None or len(w) != 4 or w[0] != x or w[3] != y:
                return (x, y)
            if (w[0], w[1]) not in eps or (w[1], w[2]) not in eps_a or (w[2], w[3]) not in eps:
                return (x, y)
    return None


# ------------------------------------------------------------ hypothesis checks

def enclosing_ball(dist: np.ndarray, members) -> tuple:
    """``(center, radius)`` minimizing the max distance to ``members``; ties go to the smaller ID."""
    cols = dist[:, list(members)]
    far = np.where(cols < 0, np.iinfo(np.int64).max, cols).max(axis=1)
    center = int(np.argmin(far))
    return center, int(far[center])


def sphere_layers(g, v0: int) -> list:
    dist = g.bfs(v0)
    if min(dist) < 0:
        raise RelationError(f"vertex {dist.index(-1)} is unreachable from {v0}")
    layers = [[] for _ in range(max(dist) + 1)]
    for v, d in enumerate(dist):
        layers[d].append(v)
    return layers


def sphere_components(g, v0: int) -> list:
    """Components of each two-layer graph, as ``(m, component)`` with ``m`` the lower layer."""
    layers = sphere_layers(g, v0)
    out = []
    for m in range(len(layers)):
        verts = layers[m] + (layers[m + 1] if m + 1 < len(layers) else [])
        for comp in g.induced_components(verts):
            out.append((m, comp))
    return out


def sphere_report(g, v0: int, k: Optional[int] = None, dist=None) -> HypothesisReport:
    """Every component of every two-layer graph lies in a ball of radius ``k``."""
    dist = g.distance_matrix() if dist is None else dist
    measured = 0
    failing = None
    for m, comp in sphere_components(g, v0):
        center, radius = enclosing_ball(dist, comp)
        measured = max(measured, radius)
        if k is not None and radius > k and failing is None:
            failing = {"layer": m, "component": list(comp), "radius": radius}
    passed = failing is None
    return HypothesisReport("spheres", passed, failing, {"k": measured, "claimed_k": k, "v0": v0})


def neighbor_classes(g, p: Partition) -> list:
    """Indices of classes other than ``P`` meeting ``B(P, 1)``, ascending."""
    out = []
    for idx, members in enumerate(p.classes):
        nb = set()
        for x in members:
            for w in g.adjacency[x]:
                c = p.class_of[w]
                if c != idx:
                    nb.add(c)
        out.append(sorted(nb))
    return out


def linking_report(g, p: Partition, r: int, dist=None) -> HypothesisReport:
    """(i) each class sits in a ball of radius ``r``; (ii) it has at most ``|P|`` neighbor classes."""
    dist = g.distance_matrix() if dist is None else dist
    nbrs = neighbor_classes(g, p)
    worst_radius = 0
    worst_excess = None
    for idx, members in enumerate(p.classes):
        center, radius = enclosing_ball(dist, members)
        worst_radius = max(worst_radius, radius)
        if radius > r:
            return HypothesisReport(
                "linking", False,
                {"condition": "i", "class": idx, "members": list(members), "radius": radius},
                {"r": r, "max_radius": radius},
            )
        excess = len(nbrs[idx]) - len(members)
        worst_excess = excess if worst_excess is None else max(worst_excess, excess)
        if excess > 0:
            return HypothesisReport(
                "linking", False,
                {"condition": "ii", "class": idx, "members": list(members),
                 "neighbor_classes": len(nbrs[idx]), "size": len(members)},
                {"r": r},
            )
    return HypothesisReport(
        "linking", True, None,
        {"r": r, "max_radius": worst_radius, "max_neighbor_excess": worst_excess or 0},
    )


def net_report(g, centers, r: int, dist=None) -> HypothesisReport:
    """Balls of radius ``r`` around ``centers`` are disjoint and every ``B(v, r)`` meets one."""
    dist = g.distance_matrix() if dist is None else dist
    centers = sorted(centers)
    for i, x in enumerate(centers):
        for x2 in centers[i + 1:]:
            if 0 <= dist[x, x2] <= 2 * r:
                return HypothesisReport(
                    "net", False, {"condition": "disjoint", "centers": [x, x2]}, {"r": r}
                )
    for v in range(g.n):
        d = dist[v, centers]
        if not ((d >= 0) & (d <= 2 * r)).any():
            return HypothesisReport("net", False, {"condition": "maximal", "vertex": v}, {"r": r})
    return HypothesisReport("net", True, None, {"r": r, "centers": len(centers)})


def ulf_report(g, m: Optional[int] = None) -> HypothesisReport:
    """Uniform local finiteness: every local degree is at most ``m``."""
    deg = g.max_degree
    if m is not None and deg > m:
        v = next(v for v in range(g.n) if g.degree(v) > m)
        return HypothesisReport("ulf", False, {"vertex": v, "degree": g.degree(v)}, {"m": deg})
    return HypothesisReport("ulf", True, None, {"m": deg})


def check_hypotheses(g, which: str, **params) -> HypothesisReport:
    checks = {"spheres": sphere_report, "linking": linking_report, "net": net_report, "ulf": ulf_report}
    try:
        check = checks[which]
    except KeyError:
        raise ValueError(f"unknown check {which!r}; expected one of {sorted(checks)}") from None
    return check(g, **params)
