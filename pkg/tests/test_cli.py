import csv
import json

import pytest

from conftest import TOY_FILE
from iamatch.cli import main
from iamatch.io import parse_matching, parse_problem


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_generate(tmp_path, capsys):
    code, _, err = run(capsys, "generate", "-m", 4, "-n", 2, "--seed", 7, "-o", tmp_path / "p.json")
    assert code == 0 and "seed 7" in err
    p = parse_problem((tmp_path / "p.json").read_text())
    assert (p.m, p.n, p.capacities, p.seed) == (4, 2, (2, 2), 7)


def test_generate_is_byte_identical(tmp_path, capsys):
    for name in ("x.json", "y.json"):
        assert run(capsys, "generate", "-m", 100, "-n", 10, "--seed", 1, "-o", tmp_path / name)[0] == 0
    assert (tmp_path / "x.json").read_bytes() == (tmp_path / "y.json").read_bytes()


def test_generate_rejects_bad_sizes(capsys):
    code, _, err = run(capsys, "generate", "-m", 1, "-n", 1)
    assert code != 0 and "error" in err


def test_solve_inclusive(tmp_path, capsys):
    out_file = tmp_path / "m.json"
    code, out, _ = run(capsys, "solve", TOY_FILE, "--mechanism", "inclusive", "--rule", "utilitarian",
                       "-o", out_file)
    assert code == 0
    assert "a:{1,2} b:{3,4} void:{}" in out and "U = 0.187500" in out
    p = parse_problem(TOY_FILE.read_text())
    assert parse_matching(out_file.read_text(), p).assignment == (0, 0, 1, 1)


def test_solve_selective_approx(capsys):
    code, out, _ = run(capsys, "solve", TOY_FILE, "--mechanism", "selective", "--approx", "--rule", "utilitarian")
    assert code == 0 and "a:{1,2} b:{4} void:{3}" in out and "U = 0.239583" in out


def test_solve_distributed_trace(tmp_path, capsys):
    trace = tmp_path / "log.jsonl"
    code, out, _ = run(capsys, "solve", TOY_FILE, "--mechanism", "selective", "--distributed",
                       "--seed", 3, "--trace", trace)
    assert code == 0
    assert out.splitlines()[0] in ("a:{1,2} b:{4} void:{3}", "a:{1,2} b:{3} void:{4}")
    records = [json.loads(line) for line in trace.read_text().splitlines()]
    assert set(records[0]) == {"from", "to", "type", "payload"}


def test_solve_centralized_trace(tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    assert run(capsys, "solve", TOY_FILE, "--approx", "--trace", trace)[0] == 0
    first = json.loads(trace.read_text().splitlines()[0])
    assert first == {"step": 1, "event": "PROPOSE", "individual": "1", "activity": "a", "group": []}


def test_solve_hill_climb(capsys):
    code, out, _ = run(capsys, "solve", TOY_FILE, "--mechanism", "hill-climb", "--seed", 2)
    assert code == 0 and "U = " in out


def _write_matching(tmp_path, assignments):
    f = tmp_path / "m.json"
    f.write_text(json.dumps({"assignments": assignments}))
    return f


def test_check_properties(tmp_path, capsys):
    m2 = _write_matching(tmp_path, {"1": "a", "2": "a", "3": "b", "4": "b"})
    code, out, _ = run(capsys, "check", TOY_FILE, m2, "--properties", "ir,sc")
    assert code == 0 and "IR   false" in out and "SC   true" in out
    m1 = _write_matching(tmp_path, {"1": "a", "2": "a", "3": None, "4": "b"})
    code, out, _ = run(capsys, "check", TOY_FILE, m1, "--properties", "po", "--json")
    assert code == 0 and json.loads(out)["po"] is True


def test_check_rejects_oversubscribed(tmp_path, capsys):
    bad = _write_matching(tmp_path, {"1": "a", "2": "a", "3": "a", "4": "b"})
    code, _, err = run(capsys, "check", TOY_FILE, bad, "--properties", "ir")
    assert code != 0 and "oversubscribed" in err


def test_check_guard_and_force(tmp_path, capsys, monkeypatch):
    m1 = _write_matching(tmp_path, {"1": "a", "2": "a", "3": None, "4": "b"})
    monkeypatch.setenv("IAMATCH_COALITION_GUARD", "3")
    code, _, err = run(capsys, "check", TOY_FILE, m1, "--properties", "cs")
    assert code != 0 and "--force" in err
    code, out, _ = run(capsys, "check", TOY_FILE, m1, "--properties", "cs", "--force")
    assert code == 0 and "CS   false" in out


def test_census(tmp_path, capsys):
    code, out, _ = run(capsys, "census", TOY_FILE, "--reference", "fig2")
    assert code == 0 and out.startswith("total 63")
    code, out, _ = run(capsys, "census", TOY_FILE, "--json")
    doc = json.loads(out)
    assert doc["counts"]["PO"] == 15 and len(doc["maxutil_matchings"]) == 2
    pair = tmp_path / "pair.json"
    pair.write_text(json.dumps({
        "activities": [{"id": "a", "capacity": 1}],
        "individuals": [
            {"id": "1", "interests": {"a": 0.1}, "affinities": {"2": 0.0}},
            {"id": "2", "interests": {"a": 0.1}, "affinities": {"1": 0.0}},
        ],
    }))
    code, out, _ = run(capsys, "census", pair)
    assert code == 0 and out.startswith("total 3")


def test_census_guard(tmp_path, capsys):
    big = tmp_path / "big.json"
    run(capsys, "generate", "-m", 14, "-n", 2, "--seed", 1, "-o", big)
    code, _, err = run(capsys, "census", big)
    assert code != 0 and "IAMATCH_ENUM_GUARD" in err


def test_bench_csv(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["bench", "--m", "4:6", "--n", "2", "--instances", 3,
            "--algorithms", "selective-approx,inclusive,oracle,hill-climb,dist-inclusive"]
    assert run(capsys, *args, "--csv", a)[0] == 0
    assert run(capsys, *args, "--csv", b)[0] == 0
    rows_a = list(csv.DictReader(a.open()))
    rows_b = list(csv.DictReader(b.open()))
    assert list(rows_a[0]) == ["m", "n", "instance_seed", "algorithm", "rule", "U", "E",
                               "runtime_ms", "sound", "ir", "sc", "po"]
    assert len(rows_a) == 3 * 3 * 5
    strip = lambda rows: [{k: v for k, v in r.items() if k != "runtime_ms"} for r in rows]  # noqa: E731
    assert strip(rows_a) == strip(rows_b)
    for r in rows_a:
        assert float(r["runtime_ms"]) >= 0 and r["sound"] == "True"
    by = {}
    for r in rows_a:
        by.setdefault(r["instance_seed"], {})[r["algorithm"]] = float(r["U"])
    for cell in by.values():
        assert cell["selective-approx"] <= cell["oracle"] + 1e-12


def test_bench_skips_oracle_above_guard(tmp_path, capsys):
    out = tmp_path / "c.csv"
    code = run(capsys, "bench", "--m", "14", "--n", "2", "--instances", 1,
               "--algorithms", "oracle,inclusive", "--csv", out)[0]
    rows = list(csv.DictReader(out.open()))
    assert code == 0 and [r["algorithm"] for r in rows] == ["inclusive"]
    assert rows[0]["po"] == ""


def test_unknown_algorithm(capsys):
    code, _, err = run(capsys, "bench", "--m", "4", "--n", "2", "--algorithms", "magic")
    assert code != 0 and "magic" in err


def test_unknown_mechanism_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve", str(TOY_FILE), "--mechanism", "lottery"])
    assert exc.value.code == 2
