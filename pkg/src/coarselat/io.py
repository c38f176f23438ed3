"""Text input formats and the versioned JSON documents written by the CLI."""

import json
import random
from fractions import Fraction

from .certificates import DecompositionCertificate, DiameterWitness, EdgeWitness
from .graphs import (
    Graph,
    GraphError,
    complete_graph,
    cycle_graph,
    grid_graph,
    path_graph,
    random_connected_graph,
    random_regular_graph,
    random_tree,
    star_graph,
)
from .metrics import MetricAxiomError, MetricWindow
from .relations import Partition, RelationError, Window

SCHEMA = 1


class InputError(ValueError):
    """Malformed input; ``line`` is 1-based when known."""

    def __init__(self, message, line=None, source=None):
        where = ""
        if source is not None:
            where = f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.line = line


def _data_lines(text):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _ints(fields, lineno, source):
    try:
        return [int(f) for f in fields]
    except ValueError:
        raise InputError(f"expected integers, got {' '.join(fields)!r}", lineno, source) from None


def parse_graph(text: str, source=None) -> Graph:
    """``u v`` per line, 0-based IDs, ``#`` comments."""
    edges = []
    seen = {}
    n = 0
    for lineno, fields in _data_lines(text):
        if len(fields) != 2:
            raise InputError(f"expected 'u v', got {len(fields)} fields", lineno, source)
        u, v = _ints(fields, lineno, source)
        if u < 0 or v < 0:
            raise InputError("vertex IDs must be non-negative", lineno, source)
        if u == v:
            raise InputError(f"loop at vertex {u}", lineno, source)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise InputError(f"edge {key} repeats line {seen[key]}", lineno, source)
        seen[key] = lineno
        edges.append(key)
        n = max(n, u + 1, v + 1)
    if not edges:
        raise InputError("graph has no edges", None, source)
    return Graph.from_edges(n, edges)


def parse_metric(text: str, source=None) -> MetricWindow:
    """``u v numerator denominator`` per unordered pair."""
    vals = {}
    n = 0
    for lineno, fields in _data_lines(text):
        if len(fields) != 4:
            raise InputError("expected 'u v numerator denominator'", lineno, source)
        u, v, num, den = _ints(fields, lineno, source)
        if den <= 0:
            raise InputError("denominator must be positive", lineno, source)
        if u < 0 or v < 0:
            raise InputError("point IDs must be non-negative", lineno, source)
        vals[(min(u, v), max(u, v))] = (Fraction(num, den), lineno)
        n = max(n, u + 1, v + 1)
    rows = [[Fraction(0)] * n for _ in range(n)]
    for x in range(n):
        for y in range(x + 1, n):
            if (x, y) not in vals:
                raise InputError(f"missing distance for pair ({x}, {y})", None, source)
            d, lineno = vals[(x, y)]
            rows[x][y] = rows[y][x] = d
    for (x, y), (d, lineno) in vals.items():
        if x == y and d != 0:
            raise InputError(f"d({x}, {x}) must be 0", lineno, source)
    try:
        return MetricWindow.from_fractions(Window(n), rows)
    except MetricAxiomError as exc:
        raise InputError(f"metric axiom violated: {exc}", None, source) from None


def parse_partition(text: str, n=None, source=None) -> Partition:
    """One class per line as space-separated IDs."""
    classes = []
    top = 0
    for lineno, fields in _data_lines(text):
        members = _ints(fields, lineno, source)
        classes.append(members)
        top = max(top, max(members) + 1)
    n = top if n is None else n
    try:
        return Partition.from_classes(Window(n), classes)
    except RelationError as exc:
        raise InputError(str(exc), None, source) from None


def parse_grid(spec: str):
    """``AxBx...`` -> box sides for the window ``[0, A) x [0, B) x ...``."""
    try:
        sides = [int(s) for s in spec.lower().split("x")]
    except ValueError:
        raise InputError(f"bad grid spec {spec!r}; expected e.g. 16x16") from None
    if not sides or any(s <= 0 for s in sides):
        raise InputError(f"grid sides must be positive: {spec!r}")
    return tuple(sides)


def grid_from_spec(spec: str) -> Graph:
    sides = parse_grid(spec)
    return grid_graph((0,) * len(sides), sides)


GENERATORS = {
    "path": (1, lambda rng, n: path_graph(n)),
    "cycle": (1, lambda rng, n: cycle_graph(n)),
    "star": (1, lambda rng, k: star_graph(k)),
    "complete": (1, lambda rng, n: complete_graph(n)),
    "tree": (1, lambda rng, n: random_tree(n, rng)),
    "connected": (2, lambda rng, n, m: random_connected_graph(n, m, rng)),
    "regular": (2, lambda rng, n, d: random_regular_graph(n, d, rng)),
}


def generate_graph(spec: str, seed: int) -> Graph:
    """``kind:arg[:arg]`` such as ``tree:50`` or ``connected:30:60``, seeded."""
    kind, *args = spec.split(":")
    if kind not in GENERATORS:
        raise InputError(f"unknown generator {kind!r}; expected one of {sorted(GENERATORS)}")
    arity, make = GENERATORS[kind]
    if len(args) != arity:
        raise InputError(f"generator {kind!r} takes {arity} integer argument(s)")
    try:
        vals = [int(a) for a in args]
    except ValueError:
        raise InputError(f"bad generator arguments in {spec!r}") from None
    try:
        return make(random.Random(seed), *vals)
    except (GraphError, ValueError) as exc:
        raise InputError(str(exc)) from None


# ------------------------------------------------------------ JSON documents

def graph_to_json(g: Graph) -> dict:
    out = {"type": "graph", "n": g.n, "edges": [list(e) for e in g.edges]}
    if g.window.coords is not None:
        out["coords"] = [list(c) for c in g.window.coords]
    return out


def graph_from_json(doc: dict) -> Graph:
    if doc.get("type") != "graph":
        raise InputError(f"unsupported structure type {doc.get('type')!r}")
    coords = doc.get("coords")
    window = Window(doc["n"], coords=tuple(tuple(c) for c in coords) if coords else None)
    return Graph.from_edges(window, [tuple(e) for e in doc["edges"]])


def certificate_to_json(cert: DecompositionCertificate) -> dict:
    return {
        "budget": {"R": cert.budget[0], "maxlen": cert.budget[1]},
        "diameter_witnesses": [[w.factor, w.cls, w.center, w.index] for w in cert.diameter_witnesses],
        "method": cert.method,
        "partitions": [[list(c) for c in cert.classes0], [list(c) for c in cert.classes1]],
        "pattern": list(cert.pattern),
        "window": cert.window.size,
        "witnesses": [
            {"pair": list(w.pair), "pattern": list(w.pattern), "points": list(w.points)}
            for w in cert.edge_witnesses
        ],
    }


def certificate_from_json(doc: dict, window: Window) -> DecompositionCertificate:
    try:
        if doc["window"] != window.size:
            raise InputError(f"certificate window {doc['window']} does not match structure size {window.size}")
        p0, p1 = doc["partitions"]
        return DecompositionCertificate(
            window=window,
            classes0=tuple(tuple(c) for c in p0),
            classes1=tuple(tuple(c) for c in p1),
            diameter_witnesses=tuple(DiameterWitness(*w) for w in doc["diameter_witnesses"]),
            edge_witnesses=tuple(
                EdgeWitness(tuple(w["pair"]), tuple(w["points"]), tuple(w["pattern"]))
                for w in doc["witnesses"]
            ),
            pattern=tuple(doc["pattern"]),
            budget=(doc["budget"]["R"], doc["budget"]["maxlen"]),
            method=doc.get("method", ""),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"certificate does not match schema {SCHEMA}: {exc!r}") from None


def report_to_json(report) -> dict:
    return {
        "failing": _plain(report.failing),
        "measured": _plain(report.measured),
        "check": report.check,
        "status": "pass" if report.passed else "fail",
    }


def verification_to_json(report) -> dict:
    return {
        "counts": _plain(report.counts),
        "diameter_bounds": list(report.diameter_bounds),
        "failure": _plain(report.failure),
        "m": report.m,
        "verdict": "pass" if report.passed else "fail",
    }


def _plain(obj):
    """Convert tuples, sets and numpy scalars to JSON-ready values."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(_plain(v) for v in obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"
