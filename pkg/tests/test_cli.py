import json
import os
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from newton_graphs.cli import main
from newton_graphs.io import function_from_spec, function_to_spec, graph_from_json, read_json

from conftest import DATA

GOLDEN = DATA / "golden"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("cmd, graph, golden, code", [
    ("check", "g2.json", "check_g2.json", 0),
    ("check", "rose.json", "check_rose.json", 1),
    ("dual", "g2.json", "dual_g2.json", 0),
    ("refine", "g2.json", "refine_g2.json", 0),
    ("angles", "g2.json", "angles_g2.json", 0),
    ("angles", "hall_fail3.json", "angles_hall_fail3.json", 1),
    ("selfdual", "g2.json", "selfdual_g2.json", 0),
])
def test_golden(capsys, cmd, graph, golden, code):
    got, out, err = run(capsys, cmd, DATA / graph)
    assert got == code and err == ""
    assert out == (GOLDEN / golden).read_text()


def test_equiv_golden(capsys):
    code, out, _ = run(capsys, "equiv", DATA / "g2.json", DATA / "g2.json")
    assert code == 0 and out == (GOLDEN / "equiv_g2.json").read_text()


def test_equiv_negative(capsys):
    code, out, _ = run(capsys, "equiv", DATA / "g2.json", DATA / "rose.json")
    assert code == 1 and json.loads(out) == {"equivalent": False, "witness": None}


def test_check_rose_report(capsys):
    _, out, _ = run(capsys, "check", DATA / "rose.json")
    rep = json.loads(out)
    assert not rep["is_newton"] and not rep["loop_free"]
    assert any(p.startswith("loops") for p in rep["problems"])


def test_check_g2_has_angle_witness(capsys):
    _, out, _ = run(capsys, "check", DATA / "g2.json")
    rep = json.loads(out)
    assert set(rep["angles"].values()) == {0.25}
    assert all(k.count(":") == 2 for k in rep["angles"])


@pytest.mark.parametrize("cmd", ["refine", "angles"])
def test_structural_errors_exit_2(capsys, cmd):
    code, out, err = run(capsys, cmd, DATA / "rose.json")
    assert code == 2 and out == ""
    assert "error" in json.loads(err)


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "check", tmp_path / "nope.json")
    assert code == 2 and json.loads(err)["error"] == "input_error"


def test_bad_json(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    code, _, err = run(capsys, "dual", p)
    assert code == 2 and json.loads(err)["error"] == "input_error"


def test_malformed_graph(capsys, tmp_path):
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"vertices": ["v"], "edges": [["a", ["v", "v"]]],
                             "rotation": {"v": ["a+"]}}))
    code, _, err = run(capsys, "check", p)
    assert code == 2 and json.loads(err)["error"] == "malformed_rotation"


@pytest.mark.parametrize("argv", [
    ["check", "--frobnicate", "x.json"],
    ["nosuch"],
    [],
    ["extract", "--horizon", "-1", "f.json"],
    ["extract", "--connection-tol", "0", "f.json"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and json.loads(err)["error"] == "usage_error"


def test_thread_variable(capsys, monkeypatch):
    monkeypatch.setenv("NEWTON_GRAPHS_THREADS", "zero")
    code, _, err = run(capsys, "dual", DATA / "g2.json")
    assert code == 2 and "NEWTON_GRAPHS_THREADS" in json.loads(err)["message"]
    monkeypatch.setenv("NEWTON_GRAPHS_THREADS", "2")
    assert run(capsys, "dual", DATA / "g2.json")[0] == 0


def test_output_file(capsys, tmp_path):
    p = tmp_path / "d.json"
    code, out, _ = run(capsys, "dual", DATA / "g2.json", "-o", p)
    assert code == 0 and out == ""
    assert p.read_text() == (GOLDEN / "dual_g2.json").read_text()
    # the emitted graph reads back without loss
    d = graph_from_json(read_json(p))
    assert d.to_dict() == json.loads(p.read_text())


def test_unwritable_output(capsys, tmp_path):
    code, _, err = run(capsys, "dual", DATA / "g2.json", "-o", tmp_path / "missing" / "x.json")
    assert code == 2 and json.loads(err)["error"] == "output_error"


def test_graph_outputs_roundtrip(capsys):
    for cmd in ("dual", "refine"):
        _, out, _ = run(capsys, cmd, DATA / "g2.json")
        data = json.loads(out)
        g = graph_from_json(data.get("graph", data))
        assert json.loads(json.dumps(g.to_dict())) == data.get("graph", data)


def test_function_spec_roundtrip():
    f = function_from_spec(read_json(DATA / "f2.json"))
    again = function_from_spec(json.loads(json.dumps(function_to_spec(f))))
    assert again == f


def test_canonical(capsys):
    code, out, _ = run(capsys, "canonical", DATA / "f2.json")
    data = json.loads(out)
    assert code == 0 and len(data["critical_points"]) == 4
    assert function_from_spec(data["function"]) == function_from_spec(read_json(DATA / "f2.json"))


def test_canonical_collision(capsys, tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"tau": [0.3, 1.0], "zeros": [[0.5, 0], [0.2, 0]],
                             "poles": [[0.5, 0], "auto"]}))
    code, _, err = run(capsys, "canonical", p)
    assert code == 2 and json.loads(err)["error"] == "zero_pole_collision"


def test_extract_rectangular_reports_connection(capsys):
    code, _, err = run(capsys, "extract", DATA / "rect.json", "--no-level")
    assert code == 2 and json.loads(err)["error"] == "saddle_connection"


def test_extract_and_roundtrip(capsys):
    code, out, _ = run(capsys, "extract", DATA / "f2.json", "--no-level")
    ex = json.loads(out)
    assert code == 0
    g = graph_from_json(ex["zero_graph"])
    assert (g.n_vertices, g.n_edges, g.n_faces) == (2, 4, 2)
    assert ex["diagnostics"]["n_legs"] == 16
    code, out2, _ = run(capsys, "extract", DATA / "f2.json", "--no-level")
    assert out2 == out

    code, out, _ = run(capsys, "roundtrip", DATA / "f2.json")
    rep = json.loads(out)
    assert code == 0 and rep["is_newton"]
    assert rep["reference_equivalence"]["orientation"] in ("preserving", "reversing")


def test_portrait_svg(capsys, tmp_path):
    p = tmp_path / "p.svg"
    code, _, _ = run(capsys, "portrait", DATA / "f2.json", "--raster", "6", "--no-level", "-o", p)
    assert code == 0
    root = ET.fromstring(p.read_text())
    assert root.tag.endswith("svg")
    ns = "{http://www.w3.org/2000/svg}"
    assert len(root.findall(f"{ns}circle")) == 4  # two zeros, two poles
    assert len(root.findall(f"{ns}path")) == 4  # saddle crosses
    assert root.findall(f"{ns}polyline")
    code, _, _ = run(capsys, "portrait", DATA / "f2.json", "--raster", "6", "--no-level",
                     "-o", tmp_path / "q.svg")
    assert (tmp_path / "q.svg").read_text() == p.read_text()


def test_console_script_subprocess():
    env = dict(os.environ)
    proc = subprocess.run([sys.executable, "-m", "newton_graphs", "check", str(DATA / "rose.json")],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 1
    assert proc.stdout == (GOLDEN / "check_rose.json").read_text()
