import json
import os
import subprocess
import sys

import pytest

from sposet.cli import main

RUN = [sys.executable, "-m", "sposet.cli"]


def run_cli(args, stdin=None):
    return subprocess.run(RUN + args, capture_output=True, text=True, input=stdin)


def test_gen_chain_file(tmp_path):
    out = tmp_path / "chain.txt"
    assert main(["gen", "--kind", "chain", "--n", "3", "--out", str(out)]) == 0
    lines = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
    assert lines == ["3 2", "1 2", "2 3"]


def test_gen_antichain_file(tmp_path):
    out = tmp_path / "a.txt"
    main(["gen", "--kind", "antichain", "--n", "2", "--out", str(out)])
    lines = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
    assert lines == ["2 0"]


def test_gen_deterministic_bytes(tmp_path):
    f1, f2 = tmp_path / "x1.txt", tmp_path / "x2.txt"
    for f in (f1, f2):
        main(["gen", "--kind", "random_layered", "--n", "64", "--seed", "7",
              "--out", str(f)])
    assert f1.read_bytes() == f2.read_bytes()


def test_build_query_chain(tmp_path):
    inst = tmp_path / "chain.txt"
    cont = tmp_path / "chain.spos"
    main(["gen", "--kind", "chain", "--n", "3", "--out", str(inst)])
    assert main(["build", "--in", str(inst), "--edges", "cover",
                 "--mode", "poset", "--out", str(cont)]) == 0
    r = run_cli(["query", str(cont), "1", "3"])
    assert r.returncode == 0 and r.stdout.strip() == "yes"
    r = run_cli(["query", str(cont), "3", "1"])
    assert r.stdout.strip() == "no"
    r = run_cli(["query", str(cont), "2", "2"])
    assert r.stdout.strip() == "yes"          # reflexive


def test_query_all_matches_oracle(tmp_path):
    from sposet.gen import oracle_precedes, random_layered_poset

    inst = tmp_path / "lay.txt"
    cont = tmp_path / "lay.spos"
    main(["gen", "--kind", "random_layered", "--n", "24", "--seed", "3",
          "--out", str(inst)])
    main(["build", "--in", str(inst), "--edges", "cover", "--mode", "poset",
          "--out", str(cont)])
    r = run_cli(["query", str(cont), "--all"])
    got = r.stdout.split()
    c = random_layered_poset(24, 3)
    expect = [
        "yes" if oracle_precedes(c, a, b) else "no"
        for a in range(1, 25)
        for b in range(1, 25)
    ]
    assert got == expect


def test_query_stdin(tmp_path):
    inst = tmp_path / "c.txt"
    cont = tmp_path / "c.spos"
    main(["gen", "--kind", "chain", "--n", "4", "--out", str(inst)])
    main(["build", "--in", str(inst), "--edges", "cover", "--mode", "poset",
          "--out", str(cont)])
    r = run_cli(["query", str(cont), "--stdin"], stdin="1 4\n4 1\n2 3\n")
    assert r.stdout.split() == ["yes", "no", "yes"]


def test_digraph_mode_two_cycle(tmp_path):
    inst = tmp_path / "g.txt"
    cont = tmp_path / "g.spos"
    inst.write_text("2 2\n1 2\n2 1\n")
    assert main(["build", "--in", str(inst), "--edges", "digraph",
                 "--mode", "digraph", "--out", str(cont)]) == 0
    r = run_cli(["query", str(cont), "1", "2"])
    assert r.stdout.strip() == "yes"
    r = run_cli(["query", str(cont), "2", "1"])
    assert r.stdout.strip() == "yes"


def test_relation_mode(tmp_path):
    inst = tmp_path / "r.txt"
    cont = tmp_path / "r.spos"
    inst.write_text("2 1\n1 1\n")
    assert main(["build", "--in", str(inst), "--edges", "relation",
                 "--mode", "relation", "--out", str(cont)]) == 0
    r = run_cli(["query", str(cont), "1", "1"])
    assert r.stdout.strip() == "yes"
    r = run_cli(["query", str(cont), "2", "2"])
    assert r.stdout.strip() == "no"


def test_reduction_mode(tmp_path):
    inst = tmp_path / "red.txt"
    cont = tmp_path / "red.spos"
    inst.write_text("3 2\n1 2\n2 3\n")
    main(["build", "--in", str(inst), "--edges", "cover", "--mode", "reduction",
          "--out", str(cont)])
    r = run_cli(["query", str(cont), "--stdin"], stdin="1 2\n1 3\n")
    assert r.stdout.split() == ["yes", "no"]


def test_exit_code_usage():
    r = run_cli(["build", "--in", "nope.txt", "--edges", "bogus",
                 "--mode", "poset", "--out", "x"])
    assert r.returncode == 2


def test_exit_code_validation(tmp_path):
    inst = tmp_path / "cyc.txt"
    inst.write_text("2 2\n1 2\n2 1\n")
    r = run_cli(["build", "--in", str(inst), "--edges", "cover",
                 "--mode", "poset", "--out", str(tmp_path / "x.spos")])
    assert r.returncode == 3
    assert "validation" in r.stderr


def test_exit_code_corrupt(tmp_path):
    bad = tmp_path / "bad.spos"
    bad.write_bytes(b"SPOSgarbagegarbage")
    r = run_cli(["query", str(bad), "1", "2"])
    assert r.returncode == 4


def test_verify_reports_violation(tmp_path):
    inst = tmp_path / "v.txt"
    inst.write_text("3 2\n1 2\n2 3\n")
    r = run_cli(["verify", "--in", str(inst), "--edges", "closure"])
    assert r.returncode == 3
    assert "transitivity" in r.stdout
    r = run_cli(["verify", "--in", str(inst), "--edges", "cover"])
    assert r.returncode == 0


def test_stats_json(tmp_path):
    inst = tmp_path / "s.txt"
    cont = tmp_path / "s.spos"
    main(["gen", "--kind", "random_layered", "--n", "48", "--seed", "2",
          "--out", str(inst)])
    main(["build", "--in", str(inst), "--edges", "cover", "--mode", "poset",
          "--out", str(cont)])
    r = run_cli(["stats", str(cont), "--json"])
    rep = json.loads(r.stdout)
    assert rep["mode"] == "poset"
    assert rep["total_bits"] > 0


def test_bench_json(tmp_path):
    inst = tmp_path / "b.txt"
    cont = tmp_path / "b.spos"
    main(["gen", "--kind", "random_layered", "--n", "64", "--seed", "5",
          "--out", str(inst)])
    main(["build", "--in", str(inst), "--edges", "cover", "--mode", "poset",
          "--out", str(cont)])
    r = run_cli(["bench", str(cont), "--pairs", "500", "--json"])
    rep = json.loads(r.stdout)
    assert rep["pairs"] == 500
    assert rep["ops_max"] <= 32


def test_container_round_trip_bytes(tmp_path):
    inst = tmp_path / "rt.txt"
    c1 = tmp_path / "rt1.spos"
    c2 = tmp_path / "rt2.spos"
    main(["gen", "--kind", "random_layered", "--n", "72", "--seed", "9",
          "--out", str(inst)])
    main(["build", "--in", str(inst), "--edges", "cover", "--mode", "poset",
          "--out", str(c1)])
    main(["build", "--in", str(inst), "--edges", "cover", "--mode", "poset",
          "--out", str(c2)])
    assert c1.read_bytes() == c2.read_bytes()


def test_report_writes_csv_and_figures(tmp_path):
    out = tmp_path / "rep"
    assert main(["report", "--kind", "random_layered", "--sizes", "32,64",
                 "--seeds", "2", "--out-dir", str(out)]) == 0
    assert (out / "sizes.csv").exists()
    assert (out / "ratio_trend.png").stat().st_size > 0
    assert (out / "breakdown.png").stat().st_size > 0
    header = (out / "sizes.csv").read_text().splitlines()[0]
    assert "total_bits" in header and "ratio_quarter_square" in header


def test_closure_edges_mode(tmp_path):
    inst = tmp_path / "clo.txt"
    cont = tmp_path / "clo.spos"
    inst.write_text("3 3\n1 2\n2 3\n1 3\n")
    assert main(["build", "--in", str(inst), "--edges", "closure",
                 "--mode", "poset", "--out", str(cont)]) == 0
    r = run_cli(["query", str(cont), "1", "3"])
    assert r.stdout.strip() == "yes"
