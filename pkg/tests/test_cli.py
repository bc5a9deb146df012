import json

import pytest

from sosdw.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_verify_all_small(capsys):
    code, out = run(capsys, "verify", "--suite", "all", "--n-max", "2", "--seed", "42", "--trials", "3",
                    "--format", "json", "--no-timing")
    assert code == 0
    doc = json.loads(out.out)
    assert doc["schema"] == "sosdw/1"
    assert len({r["suite"] for r in doc["records"]}) >= 15
    assert all(r["passed"] for r in doc["records"])


def test_verify_deterministic(capsys):
    args = ("verify", "--suite", "formulas", "--suite", "three-colour", "--n-max", "3", "--seed", "5",
            "--trials", "4", "--format", "json", "--no-timing")
    _, a = run(capsys, *args)
    _, b = run(capsys, *args)
    assert a.out == b.out


def test_verify_worker_count_invariant(capsys, monkeypatch):
    args = ("verify", "--suite", "symmetry", "--suite", "theta", "--n-max", "2", "--seed", "9",
            "--trials", "3", "--format", "json", "--no-timing")
    monkeypatch.setenv("SOSDW_THREADS", "1")
    _, a = run(capsys, *args)
    monkeypatch.setenv("SOSDW_THREADS", "4")
    _, b = run(capsys, *args)
    assert a.out == b.out


def test_verify_two_enumeration_exact(capsys):
    code, out = run(capsys, "verify", "--suite", "two-enumeration", "--n-max", "4", "--format", "json")
    assert code == 0
    recs = json.loads(out.out)["records"]
    assert {r["mode"] for r in recs} == {"exact"}
    assert sorted({r["n"] for r in recs}) == [1, 2, 3, 4]


def test_verify_frobenius_numeric(capsys):
    code, out = run(capsys, "verify", "--suite", "frobenius", "--trials", "50", "--format", "json")
    assert code == 0
    recs = json.loads(out.out)["records"]
    assert recs and all(r["mode"] == "numeric" and r["trials"] >= 50 for r in recs)


def test_verify_unknown_suite(capsys):
    code, out = run(capsys, "verify", "--suite", "nope")
    assert code == 2
    assert "nope" in out.err


def test_verify_bad_threads(capsys, monkeypatch):
    monkeypatch.setenv("SOSDW_THREADS", "zero")
    code, _ = run(capsys, "verify", "--suite", "det")
    assert code == 2


def test_verify_failure_exit_code(capsys, monkeypatch):
    from sosdw import verify

    def broken(cfg, rng):
        return [verify.Record("det", "forced failure", 1, "exact", False)]

    monkeypatch.setitem(verify.SUITES, "det", broken)
    code, out = run(capsys, "verify", "--suite", "det")
    assert code == 1
    assert "FAIL" in out.out


def test_evaluate_methods_agree(capsys):
    vals = {}
    for method in ("brute", "ik", "factored", "weightfn"):
        code, out = run(capsys, "evaluate", "--n", "2", "--method", method, "--seed", "3",
                        "--format", "json", "--no-timing")
        assert code == 0
        rec = json.loads(out.out)
        assert rec["schema"] == "sosdw/1" and rec["method"] == method
        vals[method] = complex(rec["value"]["re"], rec["value"]["im"])
    ref = vals["brute"]
    assert all(abs(v - ref) < 1e-10 * abs(ref) for v in vals.values())


def test_evaluate_free_fermion(capsys):
    code, out = run(capsys, "evaluate", "--n", "3", "--method", "freefermion", "--format", "json")
    assert code == 0
    assert "value" in json.loads(out.out)


def test_evaluate_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["evaluate"])
    assert exc.value.code == 2
    code, _ = run(capsys, "evaluate", "--n", "2", "--method", "rootN")
    assert code == 2


def test_evaluate_exact(capsys):
    code, out = run(capsys, "evaluate", "--n", "2", "--exact", "--format", "json")
    assert code == 0
    assert json.loads(out.out)["schema"] == "sosdw/1"


def test_tables_csv(capsys):
    code, out = run(capsys, "tables", "--n-max", "5", "--format", "csv", "--exact")
    assert code == 0
    lines = out.out.splitlines()
    assert lines[0] == "n,A_n,C_n,K0,K1,K2,p0,p1,p2"
    assert lines[1].endswith("1/2,1/2,0")
    assert len(lines) == 6


def test_bench_json(capsys):
    code, out = run(capsys, "bench", "--n-max", "2", "--trials", "2", "--format", "json")
    assert code == 0
    doc = json.loads(out.out)
    assert doc["state_counts"] == {"1": 1, "2": 2}
    assert {r["method"] for r in doc["records"]} == {"brute", "weightfn", "ik", "factored"}


def test_output_file(tmp_path, capsys):
    path = tmp_path / "out.json"
    code, out = run(capsys, "verify", "--suite", "limit-det", "--format", "json", "--out", str(path))
    assert code == 0 and out.out == ""
    assert json.loads(path.read_text())["schema"] == "sosdw/1"
