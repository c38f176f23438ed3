"""Command-line front end.

Exit codes: 0 pass, 1 input error, 2 hypothesis failure, 3 verification failure.
Human summaries go to stdout; JSON documents go to files.
"""

import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import click

from . import decompose as dec
from .graphs import GraphError
from .io import (
    SCHEMA,
    InputError,
    certificate_from_json,
    certificate_to_json,
    dumps,
    generate_graph,
    graph_from_json,
    graph_to_json,
    grid_from_spec,
    parse_graph,
    parse_grid,
    parse_metric,
    parse_partition,
    report_to_json,
    verification_to_json,
    _plain,
)
from .relations import NotAnEquivalence, Partition, RelationError, Window, WindowMismatch
from .structures import (
    ChainError,
    DegenerateStructure,
    IdealSpec,
    NotWithinBudget,
    contains,
    from_graph,
    from_ideal,
    from_metric,
    generated_by,
    join_member,
    meet,
    transversal_complement,
)
from .verify import OracleRefused, oracle_join_covers, replay_complement, verify_certificate

EXIT_OK, EXIT_INPUT, EXIT_HYPOTHESIS, EXIT_VERIFY = 0, 1, 2, 3

METHODS = ("cubes", "spheres", "linking", "net", "subdivide", "unit-graph")


@dataclass
class RunConfig:
    command: str
    source: Optional[str] = None
    radius: Optional[int] = None
    maxlen: Optional[int] = None
    output: Optional[str] = None
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("radius", "maxlen"):
            val = getattr(self, name)
            if val is not None and val < 1:
                raise InputError(f"{name} must be positive")


class Exit(Exception):
    def __init__(self, code):
        self.code = code


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write(path, doc) -> None:
    Path(path).write_text(dumps(doc))


def _load_graph(graph, grid, generate, seed):
    given = [x for x in (graph, grid, generate) if x]
    if len(given) != 1:
        raise InputError("give exactly one of --graph, --grid, --generate")
    if graph:
        return parse_graph(_read(graph), source=graph)
    if grid:
        return grid_from_spec(grid)
    return generate_graph(generate, seed)


@click.group()
def cli():
    """Certified cellular decompositions of finite coarse structures."""


# ------------------------------------------------------------ decompose

@cli.command("decompose")
@click.option("--graph", type=str, help="edge-list file: one 'u v' per line")
@click.option("--grid", type=str, help="integer box sides, e.g. 16x16")
@click.option("--generate", type=str, help="seeded generator, e.g. tree:50 or connected:30:60")
@click.option("--metric", type=str, help="metric file: 'u v num den' per pair (unit-graph)")
@click.option("--method", type=click.Choice(METHODS), required=True)
@click.option("--partition", type=str, default="singletons", show_default=True,
              help="'singletons' or a file with one class per line (linking)")
@click.option("--scale", type=int, default=1, show_default=True, help="cube scale, a power of 2 (cubes)")
@click.option("--v0", type=int, default=0, show_default=True, help="root vertex (spheres)")
@click.option("--k", type=int, default=None, help="claimed component radius (spheres)")
@click.option("--r", "r", type=int, default=1, show_default=True, help="ball radius (linking, net, unit-graph)")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=str, default="certificate.json", show_default=True)
def cmd_decompose(**opts):
    """Build a certificate; self-verify it before exiting 0."""
    raise Exit(run_decompose(opts))


def run_decompose(opts) -> int:
    method = opts["method"]
    config = RunConfig("decompose", opts.get("graph") or opts.get("grid") or opts.get("generate")
                       or opts.get("metric"), output=opts["out"], seed=opts["seed"],
                       params={k: opts[k] for k in ("method", "partition", "scale", "v0", "k", "r")})
    header = {"schema": SCHEMA, "seed": opts["seed"], "config": _plain(asdict(config))}

    if method == "cubes":
        if not opts.get("grid"):
            raise InputError("cubes needs --grid")
        sides = parse_grid(opts["grid"])
        try:
            g, cert = dec.box_decomposition((0,) * len(sides), sides, opts["scale"])
        except dec.DecompositionError as exc:
            raise InputError(str(exc)) from None
        report = None
    elif method == "unit-graph":
        if not opts.get("metric"):
            raise InputError("unit-graph needs --metric")
        m = parse_metric(_read(opts["metric"]), source=opts["metric"])
        try:
            g, _ = dec.unit_graph(m)
        except GraphError as exc:
            raise InputError(f"unit-distance graph: {exc}") from None
        report, cert = dec.net_decomposition(g, opts["r"])
    else:
        g = _load_graph(opts.get("graph"), opts.get("grid"), opts.get("generate"), opts["seed"])
        if not g.is_connected():
            g.check_connected()
        if method == "spheres":
            report, cert = dec.sphere_decomposition(g, opts["v0"], opts["k"])
        elif method == "linking":
            p = _partition_for(g, opts["partition"])
            report, cert = dec.linking_pair_decomposition(g, p, opts["r"])
        elif method == "net":
            report, cert = dec.net_decomposition(g, opts["r"])
        else:
            g, p = dec.subdivide(g)
            report, cert = dec.linking_pair_decomposition(g, p, 1)

    structure = graph_to_json(g)
    if cert is None:
        doc = dict(header, kind="hypothesis", structure=structure, report=report_to_json(report))
        _write(opts["out"], doc)
        click.echo(f"hypothesis {report.check} failed: {report.failing}")
        return EXIT_HYPOTHESIS

    vreport = verify_certificate(from_graph(g, cert.R), cert)
    doc = dict(header, kind="certificate", structure=structure, certificate=certificate_to_json(cert),
               self_check=verification_to_json(vreport))
    if report is not None:
        doc["hypothesis"] = report_to_json(report)
    _write(opts["out"], doc)
    if not vreport:
        click.echo(f"self-verification failed: {vreport.failure}")
        return EXIT_VERIFY
    click.echo(
        f"{method}: {g.n} points, {len(cert.classes0)}+{len(cert.classes1)} classes, "
        f"{vreport.counts['edges']} generator pairs, pattern length {vreport.m}, "
        f"budget R={cert.R}; certificate written to {opts['out']}"
    )
    return EXIT_OK


def _partition_for(g, spec) -> Partition:
    if spec == "singletons":
        return Partition.singletons(g.window)
    p = parse_partition(_read(spec), n=g.n, source=spec)
    return Partition.from_classes(g.window, p.classes)


# ------------------------------------------------------------ verify

@cli.command("verify")
@click.argument("certificate", type=str)
@click.option("--graph", type=str, help="check against this edge list instead of the embedded structure")
@click.option("--grid", type=str, help="check against this grid instead of the embedded structure")
@click.option("--oracle", is_flag=True, help="also run the brute-force join oracle")
@click.option("--cap", type=int, default=60, show_default=True, help="oracle window cap")
@click.option("--out", type=str, default=None, help="report path (default: CERTIFICATE.report.json)")
def cmd_verify(certificate, graph, grid, oracle, cap, out):
    """Replay a certificate; exit 0 on pass, 3 on failure."""
    raise Exit(run_verify(certificate, graph, grid, oracle, cap, out))


def run_verify(certificate, graph=None, grid=None, oracle=False, cap=60, out=None) -> int:
    import json

    try:
        doc = json.loads(_read(certificate))
    except json.JSONDecodeError as exc:
        raise InputError(f"not JSON: {exc.msg}", exc.lineno, certificate) from None
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA or doc.get("kind") != "certificate":
        raise InputError(f"{certificate} is not a schema-{SCHEMA} certificate")
    if graph or grid:
        g = _load_graph(graph, grid, None, 0)
    else:
        try:
            g = graph_from_json(doc["structure"])
        except (KeyError, TypeError, GraphError, RelationError) as exc:
            raise InputError(f"embedded structure is malformed: {exc}") from None
    cert = certificate_from_json(doc.get("certificate", {}), g.window)
    chain = from_graph(g, max(1, cert.R))
    vreport = verify_certificate(chain, cert)
    result = {"schema": SCHEMA, "kind": "verification", "seed": doc.get("seed"),
              "certificate": certificate, "report": verification_to_json(vreport)}
    ok = vreport.passed
    if oracle:
        try:
            p0 = Partition.from_classes(g.window, cert.classes0)
            p1 = Partition.from_classes(g.window, cert.classes1)
            missing = oracle_join_covers(chain, p0, p1, max(1, cert.maxlen), cap=cap)
            verdict = {"verdict": "pass" if missing is None else "fail",
                       "counterexample": list(missing) if missing else None,
                       "maxlen": max(1, cert.maxlen)}
        except OracleRefused as exc:
            verdict = {"verdict": "refused", "reason": str(exc)}
        except RelationError as exc:
            verdict = {"verdict": "fail", "reason": str(exc)}
        if verdict["verdict"] != "refused":
            verdict["agrees"] = (verdict["verdict"] == "pass") == vreport.passed
            ok = ok and verdict["verdict"] == "pass"
        result["oracle"] = verdict
    out = out or str(certificate) + ".report.json"
    _write(out, result)
    line = "pass" if vreport.passed else f"FAIL {vreport.failure}"
    click.echo(f"verify: {line}; m={vreport.m}; report written to {out}")
    if oracle:
        click.echo(f"oracle: {result['oracle']['verdict']}")
    return EXIT_OK if ok else EXIT_VERIFY


# ------------------------------------------------------------ lattice

STRUCTURE_HELP = (
    "graph:FILE | grid:AxB | generate:KIND:ARGS | metric:FILE | partition:FILE | ideal:N:a,b,..."
)


def load_structure(spec: str, R: int, seed: int):
    kind, _, rest = spec.partition(":")
    if kind == "graph":
        return from_graph(parse_graph(_read(rest), source=rest), R)
    if kind == "grid":
        return from_graph(grid_from_spec(rest), R)
    if kind == "generate":
        return from_graph(generate_graph(rest, seed), R)
    if kind == "metric":
        return from_metric(parse_metric(_read(rest), source=rest), R)
    if kind == "partition":
        p = parse_partition(_read(rest), source=rest)
        from .relations import equivalence_from_partition

        return generated_by(equivalence_from_partition(p), R)
    if kind == "ideal":
        n, _, members = rest.partition(":")
        try:
            window = Window(int(n))
            a = frozenset(int(x) for x in members.split(",") if x)
            return from_ideal(window, IdealSpec(a), R)
        except (ValueError, RelationError) as exc:
            raise InputError(f"bad ideal spec {spec!r}: {exc}") from None
    raise InputError(f"unknown structure spec {spec!r}; expected {STRUCTURE_HELP}")


def _pair(text):
    try:
        x, y = (int(v) for v in text.split(","))
    except ValueError:
        raise InputError(f"bad pair {text!r}; expected x,y") from None
    return x, y


@cli.command("lattice")
@click.option("--left", required=True, help=STRUCTURE_HELP)
@click.option("--right", required=True, help=STRUCTURE_HELP)
@click.option("-R", "radius", type=int, default=3, show_default=True, help="truncation radius")
@click.option("--join-member", "pairs", multiple=True, help="pair x,y to test in the join")
@click.option("--maxlen", type=int, default=5, show_default=True, help="word budget for --join-member")
@click.option("--complement", is_flag=True, help="transversal complement of the left (cellular) structure")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=str, default="lattice.json", show_default=True)
def cmd_lattice(left, right, radius, pairs, maxlen, complement, seed, out):
    """Meet, containment moduli, join membership and complements."""
    raise Exit(run_lattice(left, right, radius, pairs, maxlen, complement, seed, out))


def run_lattice(left, right, radius, pairs=(), maxlen=5, complement=False, seed=0, out="lattice.json") -> int:
    RunConfig("lattice", radius=radius, maxlen=maxlen, seed=seed)
    a = load_structure(left, radius, seed)
    b = load_structure(right, radius, seed)
    m = meet(a, b)
    doc = {"schema": SCHEMA, "kind": "lattice", "seed": seed,
           "config": {"left": left, "right": right, "R": radius, "maxlen": maxlen}}
    doc["meet"] = {
        "off_diagonal_pairs": {
            "left": [len(e) - a.window.size for e in a.chain],
            "right": [len(e) - b.window.size for e in b.chain],
            "meet": [len(e) - m.window.size for e in m.chain],
        },
        "equals_left": all(x == y for x, y in zip(m.chain, a.chain)),
        "equals_right": all(x == y for x, y in zip(m.chain, b.chain)),
    }
    doc["contains"] = {"left_contains_right": _containment(contains(a, b)),
                       "right_contains_left": _containment(contains(b, a))}
    members = []
    for text in pairs:
        pair = _pair(text)
        try:
            w = join_member(pair, a, b, maxlen)
            members.append({"pair": list(pair), "word": [list(l) for l in w.word.letters],
                            "points": list(w.points)})
        except NotWithinBudget:
            members.append({"pair": list(pair), "verdict": "NotWithinBudget", "maxlen": maxlen})
        except RelationError as exc:
            raise InputError(str(exc)) from None
    doc["join_member"] = members
    if complement:
        try:
            spec, cert = transversal_complement(a)
        except DegenerateStructure as exc:
            doc["complement"] = {"degenerate": str(exc)}
        except NotAnEquivalence as exc:
            doc["complement"] = {"degenerate": f"left structure is not cellular: {exc}"}
        else:
            bad = replay_complement(a[1], cert)
            n = a.window.size
            doc["complement"] = {
                "transversal": sorted(spec.a),
                "word": ["eps", "eps_A", "eps"],
                "witnesses": [list(cert.witnesses[(x, y)]) for x in range(n) for y in range(n) if x != y],
                "replay": "pass" if bad is None else f"fail at {list(bad)}",
                "nonsingleton_classes": cert.nonsingleton_classes,
                "meet_is_diagonal": cert.meet_is_diagonal,
            }
    _write(out, doc)
    click.echo(f"meet off-diagonal pairs by radius: {doc['meet']['off_diagonal_pairs']['meet']}")
    for name, res in doc["contains"].items():
        click.echo(f"{name}: {res}")
    for mem in members:
        click.echo(f"join_member {mem['pair']}: {mem.get('points', mem.get('verdict'))}")
    if complement:
        comp = doc["complement"]
        click.echo(f"complement: {comp.get('transversal', comp.get('degenerate'))} replay={comp.get('replay')}")
    return EXIT_OK


def _containment(res) -> dict:
    if res:
        return {"modulus": list(res.modulus)}
    return {"counterexample": {"index": res.index, "pair": list(res.pair)}}


# ------------------------------------------------------------ entry point

def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="coarselat", standalone_mode=False)
    except Exit as exc:
        return exc.code
    except click.exceptions.Abort:
        return EXIT_INPUT
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return EXIT_INPUT
    except (InputError, GraphError, RelationError, WindowMismatch, ChainError) as exc:
        click.echo(f"input error: {exc}", err=True)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
