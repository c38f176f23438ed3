import json

import pytest

from coarselat.cli import main
from coarselat.io import (
    InputError,
    certificate_from_json,
    certificate_to_json,
    generate_graph,
    parse_graph,
    parse_grid,
    parse_metric,
    parse_partition,
)
from coarselat.decompose import grid_decomposition


# ------------------------------------------------------------ parsers

def test_parse_graph_with_comments():
    g = parse_graph("# triangle\n0 1\n1 2  # spoke\n\n2 0\n")
    assert g.n == 3 and sorted(g.edges) == [(0, 1), (0, 2), (1, 2)]


@pytest.mark.parametrize(
    "text,line",
    [("0 1\n1\n", 2), ("0 1\n1 x\n", 2), ("0 0\n", 1), ("0 1\n1 0\n", 2), ("0 -1\n", 1)],
)
def test_parse_graph_errors_name_the_line(text, line):
    with pytest.raises(InputError) as info:
        parse_graph(text, source="g.txt")
    assert info.value.line == line
    assert f"g.txt:{line}:" in str(info.value)


def test_parse_metric():
    m = parse_metric("0 1 1 2\n0 2 1 1\n1 2 1 2\n")
    assert str(m.dist(0, 1)) == "1/2" and m.dist(0, 2) == 1
    with pytest.raises(InputError):
        parse_metric("0 1 1 1\n0 2 5 1\n")
    with pytest.raises(InputError):
        parse_metric("0 1 1 1\n0 2 5 1\n1 2 1 1\n")
    with pytest.raises(InputError) as info:
        parse_metric("0 1 1 0\n")
    assert info.value.line == 1


def test_parse_partition_and_grid():
    p = parse_partition("0 2\n1\n")
    assert p.classes == ((0, 2), (1,))
    with pytest.raises(InputError):
        parse_partition("0 1\n1 2\n")
    assert parse_grid("2x16") == (2, 16)
    with pytest.raises(InputError):
        parse_grid("4xq")


def test_generators_are_seeded():
    a = generate_graph("connected:20:30", 7)
    b = generate_graph("connected:20:30", 7)
    assert a.edges == b.edges
    with pytest.raises(InputError):
        generate_graph("tree", 0)
    with pytest.raises(InputError):
        generate_graph("wheel:5", 0)


def test_certificate_json_round_trip():
    g, cert = grid_decomposition(2, 2)
    doc = json.loads(json.dumps(certificate_to_json(cert)))
    assert certificate_from_json(doc, g.window) == cert
    del doc["witnesses"]
    with pytest.raises(InputError):
        certificate_from_json(doc, g.window)


# ------------------------------------------------------------ commands

def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_decompose_grid_then_verify(tmp_path, capsys):
    cert = tmp_path / "c.json"
    code, out, _ = run(["decompose", "--grid", "2x16", "--method", "cubes", "--out", str(cert)], capsys)
    assert code == 0 and "pattern length 1" in out
    doc = json.loads(cert.read_text())
    assert doc["schema"] == 1 and doc["seed"] == 0 and doc["structure"]["n"] == 32
    assert doc["self_check"]["verdict"] == "pass"
    code, out, _ = run(["verify", str(cert), "--oracle"], capsys)
    assert code == 0 and "oracle: pass" in out
    report = json.loads((tmp_path / "c.json.report.json").read_text())
    assert report["oracle"]["agrees"] is True


def test_decompose_star_reports_hypothesis_failure(tmp_path, capsys):
    star = tmp_path / "star.txt"
    star.write_text("".join(f"0 {i}\n" for i in range(1, 6)))
    out = tmp_path / "r.json"
    code, _, _ = run(["decompose", "--graph", str(star), "--method", "linking", "--out", str(out)], capsys)
    assert code == 2
    doc = json.loads(out.read_text())
    assert doc["kind"] == "hypothesis" and doc["report"]["failing"]["condition"] == "ii"


@pytest.mark.parametrize("spec", ["tree:30", "connected:25:50", "cycle:9", "regular:12:3"])
def test_subdivide_always_certifies(tmp_path, capsys, spec):
    code, _, _ = run(["decompose", "--generate", spec, "--seed", "4", "--method", "subdivide",
                      "--out", str(tmp_path / "c.json")], capsys)
    assert code == 0


def test_tampered_certificate_exits_three(tmp_path, capsys):
    cert = tmp_path / "c.json"
    run(["decompose", "--generate", "cycle:12", "--method", "net", "--out", str(cert)], capsys)
    doc = json.loads(cert.read_text())
    w = doc["certificate"]["witnesses"][0]
    w["points"][-1] = (w["points"][-1] + 5) % 12
    cert.write_text(json.dumps(doc))
    code, out, _ = run(["verify", str(cert)], capsys)
    assert code == 3 and str(w["pair"]) in out


def test_schema_mismatch_exits_one(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema": 2, "kind": "certificate"}')
    assert run(["verify", str(bad)], capsys)[0] == 1
    bad.write_text("not json")
    assert run(["verify", str(bad)], capsys)[0] == 1


def test_input_errors_exit_one(tmp_path, capsys):
    g = tmp_path / "g.txt"
    g.write_text("0 1\n1 q\n")
    code, _, err = run(["decompose", "--graph", str(g), "--method", "spheres"], capsys)
    assert code == 1 and ":2:" in err
    assert run(["decompose", "--method", "nope"], capsys)[0] == 1
    assert run(["decompose", "--grid", "3x4", "--method", "cubes"], capsys)[0] == 1
    disconnected = tmp_path / "d.txt"
    disconnected.write_text("0 1\n2 3\n")
    assert run(["decompose", "--graph", str(disconnected), "--method", "spheres"], capsys)[0] == 1


def test_unit_graph_method(tmp_path, capsys):
    m = tmp_path / "m.txt"
    m.write_text("".join(f"{x} {y} {y - x} 2\n" for x in range(8) for y in range(x + 1, 8)))
    code, out, _ = run(["decompose", "--metric", str(m), "--method", "unit-graph",
                        "--out", str(tmp_path / "u.json")], capsys)
    assert code == 0


def test_decompose_is_byte_deterministic(tmp_path, capsys):
    outs = []
    for i in range(2):
        path = tmp_path / f"c{i}.json"
        run(["decompose", "--generate", "connected:30:45", "--seed", "9", "--method", "net",
             "--out", str(tmp_path / "c.json")], capsys)
        (tmp_path / "c.json").rename(path)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_lattice_identical_inputs(tmp_path, capsys):
    out = tmp_path / "l.json"
    code, _, _ = run(["lattice", "--left", "grid:4x4", "--right", "grid:4x4", "-R", "3", "--out", str(out)], capsys)
    doc = json.loads(out.read_text())
    assert code == 0
    assert doc["meet"]["equals_left"] and doc["meet"]["equals_right"]
    assert doc["contains"]["left_contains_right"]["modulus"] == [0, 1, 2, 3]


def test_lattice_complement_and_join(tmp_path, capsys):
    part = tmp_path / "p.txt"
    part.write_text("0 1 2\n3 4\n5 6 7 8\n")
    out = tmp_path / "l.json"
    code, _, _ = run(["lattice", "--left", f"partition:{part}", "--right", "generate:path:9", "-R", "1",
                      "--complement", "--join-member", "0,8", "--join-member", "0,1", "--maxlen", "5",
                      "--out", str(out)], capsys)
    doc = json.loads(out.read_text())
    assert code == 0
    assert doc["complement"]["transversal"] == [0, 3, 5] and doc["complement"]["replay"] == "pass"
    far = doc["join_member"][0]
    assert far["points"][0] == 0 and far["points"][-1] == 8 and len(far["word"]) <= 5
    code, _, _ = run(["lattice", "--left", "ideal:30:0", "--right", "ideal:30:1", "-R", "1",
                      "--join-member", "0,17", "--maxlen", "5", "--out", str(out)], capsys)
    assert json.loads(out.read_text())["join_member"][0]["verdict"] == "NotWithinBudget"


def test_lattice_window_mismatch(capsys):
    assert run(["lattice", "--left", "grid:4x4", "--right", "grid:4x5"], capsys)[0] == 1
