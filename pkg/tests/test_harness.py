import csv
import json
import math
from pathlib import Path

import pytest

from popproto import cli, harness
from popproto import election as el
from popproto.engine import Configuration, adversarial_config
from popproto.graph import GraphError, gen_family

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="module")
def ring6():
    return gen_family("ring", 6)


def test_plru_ring6_fifty_trials_within_50mn(ring6):
    results = harness.measure_convergence("plru", ring6, 50, seed=1, start="monochrome")
    bound = 50 * ring6.m * ring6.n
    assert all(r.steps_to_two_hop is not None and r.steps_to_two_hop < bound for r in results)
    assert all(r.steps_to_safe <= r.max_steps == bound for r in results)


def test_same_seed_same_results(ring6):
    a = harness.measure_convergence("dlru", ring6, 5, seed=9, start="monochrome")
    b = harness.measure_convergence("dlru", ring6, 5, seed=9, start="monochrome")
    assert a == b
    c = harness.measure_convergence("dlru", ring6, 5, seed=10, start="monochrome")
    assert [r.seed for r in a] != [r.seed for r in c]


def test_jobs_do_not_change_results(ring6):
    a = harness.measure_convergence("plru", ring6, 4, seed=3, start="monochrome")
    b = harness.measure_convergence("plru", ring6, 4, seed=3, start="monochrome", jobs=2)
    assert a == b


def test_zero_budget_times_out(ring6):
    (r,) = harness.measure_convergence("plru", ring6, 1, seed=0, max_steps=0, start="monochrome")
    assert r.timeout and r.steps_to_safe is None
    (r,) = harness.measure_holding(ring6, 1, seed=0, holding_budget=10, max_steps=0)
    assert r.timeout and r.holding_window == 0


def test_uniform_start_may_already_be_safe(ring6):
    # K is enormous, so a uniform draw is almost always collision free
    rs = harness.measure_convergence("plru", ring6, 5, seed=0, max_steps=0)
    assert sum(not r.timeout for r in rs) >= 4
    assert all(r.steps_to_safe in (None, 0) for r in rs)


def test_two_leaders_break_le_immediately(ring6):
    params = el.compute_params(ring6)
    p = el.bc_protocol(params)
    c = adversarial_config(p, ring6, 5)
    states = [s.copy() for s in c.states]
    for s in states:
        s.lf = el.F
    states[0].lf = states[3].lf = el.L0
    assert harness.holding_window(p, ring6, Configuration(states), 100, seed=0) == 0


def test_holding_window_bounded(ring6):
    rs = harness.measure_holding(ring6, 3, seed=4, holding_budget=2000)
    assert all(0 <= r.holding_window <= 2000 for r in rs)
    assert all(r.steps_to_S_LE <= r.max_steps for r in rs)


@pytest.mark.parametrize("bad", [dict(protocol="nope"), dict(graph="hexagon")])
def test_invalid_protocol_or_graph(bad):
    protocol = bad.get("protocol", "plru")
    if "graph" in bad:
        with pytest.raises(GraphError):
            harness.resolve_graph(bad["graph"], 6)
    else:
        with pytest.raises(ValueError):
            harness.measure_convergence(protocol, gen_family("ring", 6), 1, 0)


def test_preconditions(ring6):
    with pytest.raises(ValueError):
        harness.measure_convergence("plru", ring6, 0, 0)
    with pytest.raises(ValueError):
        harness.measure_holding(ring6, 1, 0, holding_budget=0)
    with pytest.raises(ValueError):
        harness.sweep("plru", "ring", [12, 6], 1, 0)
    with pytest.raises(ValueError):
        harness.sweep("plru", "ring", [], 1, 0)


def test_sweep_writes_csv_and_summary(tmp_path):
    out = tmp_path / "fresh" / "dir"
    summary, rows = harness.sweep("plru", "ring", [4, 6, 8], 3, seed=2, out=out)
    with open(out / "trials.csv", newline="") as fh:
        header = fh.readline()
        fh.seek(0)
        body = list(csv.DictReader(fh))
    assert header == (GOLDEN / "trials_header.csv").read_text()
    assert len(body) == len(rows) == 3 * 3
    assert [int(r["n"]) for r in body] == [4] * 3 + [6] * 3 + [8] * 3
    data = json.loads((out / "summary.json").read_text())
    assert data["params"]["sizes"] == [4, 6, 8]
    assert data["fitted_constant"] == pytest.approx(summary.fitted_constant)
    for s in summary.sizes:
        assert s.median <= s.p95
        assert 0 <= s.timeout_fraction <= 1


def test_csv_stable_across_runs(tmp_path):
    harness.sweep("dlru", "ring", [4, 5], 2, seed=8, out=tmp_path / "a")
    harness.sweep("dlru", "ring", [4, 5], 2, seed=8, out=tmp_path / "b")
    assert (tmp_path / "a" / "trials.csv").read_bytes() == (tmp_path / "b" / "trials.csv").read_bytes()


def test_timeouts_stay_in_aggregates():
    g = gen_family("ring", 6)
    results = harness.measure_convergence("plru", g, 4, seed=0, max_steps=1, start="monochrome")
    assert all(r.timeout for r in results)
    s = harness.summarize(results, g.m * g.n)
    assert s.trials == 4 and s.timeout_fraction == 1 and s.median == 1


def test_io_error_is_distinct(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(harness.HarnessIOError):
        harness.sweep("plru", "ring", [4], 1, seed=0, out=blocker / "sub")


def test_pbc_default_budget():
    g = gen_family("complete", 5)
    (r,) = harness.measure_convergence("pbc", g, 1, seed=0)
    assert r.max_steps == math.ceil(200 * g.m * r.tau * math.log2(g.n))
    assert r.t_bc == 16 * r.tau


# --- command line -----------------------------------------------------------------


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, (json.loads(out.out) if code == 0 else out.err)


def test_cli_color(capsys):
    code, rep = run_cli(capsys, "color", "--graph", "ring", "--n", "6", "--trials", "3",
                        "--start", "monochrome", "--closure-steps", "100")
    assert code == 0
    assert rep["trials"] == 3 and rep["timeouts"] == 0 and rep["closure_held"] == 3


def test_cli_elect(capsys, tmp_path):
    code, rep = run_cli(capsys, "elect", "--graph", "complete", "--n", "4", "--trials", "2",
                        "--holding-budget", "500", "--out", str(tmp_path))
    assert code == 0 and rep["full_holding"] == 2
    assert (tmp_path / "trials.csv").exists()


def test_cli_sweep(capsys, tmp_path):
    code, rep = run_cli(capsys, "sweep", "--graph", "ring", "--sizes", "4,6", "--trials", "2",
                        "--out", str(tmp_path))
    assert code == 0 and len(rep["sizes"]) == 2


def test_cli_env_seed_overrides(capsys, monkeypatch):
    args = ("color", "--n", "5", "--trials", "2", "--start", "monochrome")
    monkeypatch.setenv("POPPROTO_SEED", "11")
    _, a = run_cli(capsys, *args, "--seed", "1")
    _, b = run_cli(capsys, *args, "--seed", "2")
    monkeypatch.delenv("POPPROTO_SEED")
    _, c = run_cli(capsys, *args, "--seed", "11")
    assert a == b == c
    assert a["params"]["seed"] == 11


def test_cli_file_graph_and_caps(capsys, tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# a path\n0 1\n1 2\n2 3\n")
    code, rep = run_cli(capsys, "color", "--graph", f"file:{path}", "--cap-N", "8",
                        "--cap-Delta", "3", "--trials", "2", "--start", "monochrome")
    assert code == 0 and rep["timeouts"] == 0


def test_cli_errors(capsys, tmp_path):
    code, err = run_cli(capsys, "color", "--graph", "gnp", "--n", "5")
    assert code == 2 and "gnp" in err
    blocker = tmp_path / "f"
    blocker.write_text("")
    code, err = run_cli(capsys, "color", "--trials", "1", "--out", str(blocker / "x"))
    assert code == 3 and "I/O" in err
