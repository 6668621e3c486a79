import json
import re

import pytest

from steiner_bnb.cli import main

SCHEMA_KEYS = {"instance", "scheme", "length", "topology", "steiner_points", "stats"}
STATS_KEYS = {"topologies_built", "optimizations", "lower_bounds_computed",
              "reorganizations_taken", "nodes_cut", "steps_to_first_leaf", "wall_time_s"}


@pytest.fixture
def triangle_file(tmp_path):
    p = tmp_path / "tri.txt"
    p.write_text("# equilateral\n0 0\n1 0\n0.5 0.8660254037844386\n")
    return p


def test_solve_json_schema(tmp_path, triangle_file, capsys):
    out = tmp_path / "r.json"
    assert main(["solve", str(triangle_file), "--json", str(out)]) == 0
    report = json.loads(out.read_text())
    assert SCHEMA_KEYS <= set(report)
    assert STATS_KEYS <= set(report["stats"])
    assert report["instance"] == "tri"
    assert report["length"] == pytest.approx(3 ** 0.5, rel=1e-9)
    assert report["topology"] == ""
    assert len(report["steiner_points"]) == 1


def test_solve_builtin_to_stdout(capsys):
    assert main(["solve", "builtin:paper-02", "--scheme", "original"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["scheme"] == "original"
    assert report["length"] == pytest.approx(8.867129948, rel=1e-8)


def test_solve_options_are_echoed(capsys):
    assert main(["solve", "builtin:paper-01", "--no-lower-bound", "--conv-eps", "1e-7",
                 "--max-iters", "2000", "--collision-eps", "1e-3"]) == 0
    opts = json.loads(capsys.readouterr().out)["options"]
    assert opts["use_lower_bound"] is False
    assert opts["conv_eps"] == 1e-7 and opts["max_iters"] == 2000 and opts["collision_eps"] == 1e-3


@pytest.mark.parametrize("argv", [
    ["solve", "builtin:paper-01", "--scheme", "bogus"],
    ["solve", "builtin:nope"],
    ["solve", "/nonexistent/file.txt"],
    ["solve", "builtin:paper-01", "--max-iters", "0"],
    ["enumerate", "builtin:appendix-a", "--count-only"],  # over the enumeration cap
    ["instances", "--dump", "nope"],
])
def test_input_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_bad_instance_file_exit_2(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("0 0\n1\n")
    assert main(["solve", str(p)]) == 2


def test_enumerate_count_only(capsys):
    assert main(["enumerate", "builtin:paper-03", "--count-only"]) == 0
    assert capsys.readouterr().out.strip() == "945"


def test_instances_list_and_dump(capsys):
    assert main(["instances", "--list"]) == 0
    out = capsys.readouterr().out
    assert "paper-10" in out and "appendix-a-swapped" in out
    assert main(["instances", "--dump", "paper-02"]) == 0
    lines = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
    assert len(lines) == 5 and lines[-1].split() == ["0.0", "0.0", "0.0", "1.7889"]


def test_svg_triangle(tmp_path, triangle_file):
    svg = tmp_path / "t.svg"
    assert main(["solve", str(triangle_file), "--svg", str(svg), "--json", str(tmp_path / "r.json")]) == 0
    text = svg.read_text()
    assert len(re.findall(r'<circle[^>]*fill="black"', text)) == 3
    assert len(re.findall(r'<circle[^>]*fill="white"', text)) == 1
    assert text.count("<line") == 3


def test_svg_unwritable_path(triangle_file, capsys):
    assert main(["solve", str(triangle_file), "--svg", "/nonexistent/dir/x.svg"]) == 2


def test_bench_random_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(["bench", "--random", "6", "2", "3", "--seed", "7", "--json", str(out)]) == 0
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    strip = lambda rows: [(r["instance"], r["original"]["stats"]["lower_bounds_computed"],
                           r["enhanced"]["stats"]["lower_bounds_computed"],
                           r["original"]["length"]) for r in rows]
    assert strip(ra["rows"]) == strip(rb["rows"])
    assert ra["aggregate"]["max_length_gap"] < 1e-6


def test_bench_directory(tmp_path, triangle_file, capsys):
    d = tmp_path / "inst"
    d.mkdir()
    (d / "a.txt").write_text(triangle_file.read_text())
    (d / "b.txt").write_text("0 0\n1 0\n1 1\n0 1\n")
    assert main(["bench", str(d)]) == 0
    assert "aggregate" in capsys.readouterr().out


def test_bench_empty_directory(tmp_path):
    assert main(["bench", str(tmp_path)]) == 2
