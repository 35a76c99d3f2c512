import math

import pytest

from wconc import analysis, cli


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def read(path):
    with open(path, newline="") as fh:
        return fh.read()


def test_fig5_csv(tmp_path, capsys):
    out = tmp_path / "f5.csv"
    assert cli.main(["fig5", "--out", str(out)]) == 0
    text = read(out)
    assert "\r" not in text and text.endswith("\n")
    lines = text.splitlines()
    assert lines[0] == "beta_sq,alpha_sq,gamma_sq,p_total_n1,p_total_n2,p_total_n3,feasible"
    assert len(lines) == 1 + 66
    assert lines[1].startswith("0.01,")


def test_fig5_flags_infeasible(capsys):
    code, out, _ = run(["fig5", "--beta-sq-min", "0.6", "--beta-sq-max", "0.7", "--beta-sq-step", "0.05"], capsys)
    assert code == 0
    rows = [r.split(",") for r in out.splitlines()[1:]]
    assert [r[0] for r in rows] == ["0.6", "0.65", "0.7"]
    assert rows[-1][-1] == "0" and rows[-1][3] == "nan"
    assert rows[0][-1] == "1"


def test_fig5_row_at_one_third(capsys):
    code, out, _ = run(["fig5", "--beta-sq-min", str(1 / 3), "--beta-sq-max", str(1 / 3),
                        "--beta-sq-step", "0.1"], capsys)
    row = [float(x) for x in out.splitlines()[1].split(",")]
    from wconc.ecp import balanced_alpha, closed_form
    t = closed_form(balanced_alpha(1 / 3))
    assert t.xi == pytest.approx(0.3692, abs=1e-4)
    assert row[3] == pytest.approx(t.xi * t.p1o_prime, rel=1e-11)


def test_format_value():
    assert analysis.format_value(1 / 3) == "0.333333333333"
    assert analysis.format_value(7) == "7"
    assert analysis.format_value(float("nan")) == "nan"


def test_metrics_three_lines(capsys):
    code, out, _ = run(["metrics", "--g-ratio", "2.4", "--ks-ratio", "0"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 3
    assert lines[0].startswith("F_even") and lines[2].startswith("eta")


def test_fig6_small_grid(capsys):
    code, out, _ = run(["fig6", "--g-min", "1", "--g-max", "1.1", "--g-step", "0.05",
                        "--ks-min", "0", "--ks-max", "0.04", "--ks-step", "0.02"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == ",".join(analysis.FIG6_HEADER)
    assert len(lines) == 1 + 3 * 3


def test_run_ledger(capsys):
    code, out, _ = run(["run", "--trajectories", "2", "--rounds", "3", "--enumerate"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("round,consumed,successes,recycled3,recycled2,discarded,losses,empirical_p")
    assert float(lines[1].split(",")[7]) == pytest.approx(1 / 6, abs=1e-11)


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# settings\nmode = run\nseed=5   # inline\ntrajectories = 3000\nrounds=2\n")
    _, a, _ = run(["run", "--config", str(cfg)], capsys)
    _, b, _ = run(["run", "--config", str(cfg), "--seed", "6"], capsys)
    _, c, _ = run(["run", "--seed", "5", "--trajectories", "3000", "--rounds", "2"], capsys)
    assert a == c and a != b


@pytest.mark.parametrize("text", ["seed\n", "nonsense=1\n", "seed=abc\n", "mode=fig5\n"])
def test_bad_config(tmp_path, capsys, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    code, _, err = run(["run", "--config", str(cfg)], capsys)
    assert code == 1 and "error" in err


@pytest.mark.parametrize("argv", [
    ["run", "--engine", "quantum"],
    ["run", "--trajectories", "1"],
    ["run", "--weights", "1,2"],
    ["fig5", "--beta-sq-step", "0"],
    ["fig6", "--g-min", "2", "--g-max", "1"],
    ["metrics", "--ks-ratio", "-1"],
    ["compare", "--trajectories", "100"],
    ["run", "--seed", "-1"],
    ["fig5", "--unknown"],
])
def test_validation_exit_code(argv, capsys):
    assert cli.main(argv) == 1


def test_compare_pass_and_fail(monkeypatch, capsys):
    argv = ["compare", "--triples", "2", "--trajectories", "10000", "--rounds", "2"]
    code, out, _ = run(argv, capsys)
    assert code == 0 and "overall" in out
    monkeypatch.setattr(analysis, "MC_SIGMAS", -1.0)
    code, out, _ = run(argv, capsys)
    assert code == 2


def test_compare_degenerate_and_phases():
    from wconc.ecp import WParams
    res = analysis.compare_triples(0, 1, 3, 10 ** 4, extra=[WParams(0.6, 0, 0.8)])
    c = res[0]
    for name, cf, ex, mc in zip(c.names, c.closed, c.exact, c.sampled):
        if name.startswith("total"):
            assert cf == 0 and ex == pytest.approx(0, abs=1e-15) and mc == 0
    real = analysis.compare_one(WParams(0.5, 0.5, math.sqrt(0.5)), 2, 10 ** 4, 3)
    cplx = analysis.compare_one(WParams(0.5, 0.5j, math.sqrt(0.5)), 2, 10 ** 4, 3)
    assert cplx.closed == pytest.approx(real.closed, abs=1e-14)
    assert cplx.exact == pytest.approx(real.exact, abs=1e-12)


@pytest.mark.parametrize("argv", [
    ["fig5"],
    ["fig6", "--g-max", "0.7", "--ks-max", "0.1"],
    ["metrics", "--ks-ratio", "0.3", "--g-ratio", "1.3"],
    ["run", "--trajectories", "20000", "--rounds", "3"],
    ["run", "--trajectories", "50", "--rounds", "2", "--engine", "statevector", "--lossy",
     "--g-ratio", "1.3", "--ks-ratio", "0.3"],
    ["compare", "--triples", "1", "--trajectories", "10000"],
])
def test_byte_identical(tmp_path, argv, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(argv + ["--seed", "42", "--out", str(a)]) == 0
    assert cli.main(argv + ["--seed", "42", "--out", str(b)]) == 0
    assert read(a) == read(b)
    assert read(a).encode() == read(b).encode()


def test_float_grid():
    g = analysis.float_grid(0.5, 3.0, 0.05)
    assert len(g) == 51 and g[0] == 0.5 and g[-1] == 3.0
    assert len(analysis.float_grid(0, 1, 0.02)) == 51
