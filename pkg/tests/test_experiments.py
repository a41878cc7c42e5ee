import io
import math

import pytest

from egret.config import Settings
from egret.errors import ConfigError
from egret.experiments import CsvTable, ExperimentConfig, read_csv, run_experiment

import oracles


def run(experiment, seed=0, **settings):
    return run_experiment(ExperimentConfig(experiment, Settings(settings), seed))


def test_fig3a_closed_form():
    t = run("fig3a", phi="1, 10, 100")
    assert t.column("tau") == pytest.approx([math.log(2), math.log(20), math.log(200)], rel=1e-15)


def test_fig3a_log_linear_law():
    taus = run("fig3a").column("tau")
    for a, b in zip(taus, taus[1:]):
        assert b - a == pytest.approx(math.log(10), abs=1e-12)


def test_fig3b_matches_oracle():
    t = run("fig3b")
    for tau, e in zip(t.column("tau_a"), t.column("mean_gradient")):
        assert e == pytest.approx(oracles.mean_gradient(4, 2, tau, 1), rel=1e-12)


def test_fig4_peak_row():
    t = run("fig4", gamma="0.5", nu="0", mu="1")
    assert t.rows == [[0.5, 0.0, 2.0, 1.0, 2.0]]


def test_fig4_length_mismatch():
    with pytest.raises(ConfigError):
        run("fig4", nu="0, 1", mu="1")


def test_fig5_excludes_invalid_rows():
    t = run("fig5", kappa="1", tau="0.1, 1000")
    assert len(t.rows) == 1
    assert len(t.errors) == 1 and "arccos" in t.errors[0]


def test_fig5_all_rows_invalid_is_config_error():
    with pytest.raises(ConfigError):
        run("fig5", kappa="1", tau="1000")


def test_fig6_surface_varies_and_header_documents_competitors():
    t = run("fig6")
    assert len(t.rows) == 2 * 11 * 11
    assert "4 competitors" in t.to_text().splitlines()[1]
    p = t.column("probability")
    assert min(p) < 0.2 < max(p)
    # no weighting gives the uniform 1/5
    assert t.rows[0][3] == pytest.approx(0.2)


def test_fig7_rows():
    t = run("fig7", p_err="0", level="5")
    assert t.rows == [[0.0, 5, 1.0, 1.0]]
    full = run("fig7")
    assert len(full.rows) == 26 * 10


def test_route_and_sweep_are_pure_in_seed():
    a = run("route", seed=3, threads="16").to_text()
    assert a == run("route", seed=3, threads="16").to_text()
    s1 = run("sweep", seed=2, runs="3", threads="16", nodes="6", links="8").to_text()
    assert s1 == run("sweep", seed=2, runs="3", threads="16", nodes="6", links="8").to_text()
    table = read_csv(s1)
    assert all(v <= b for v, b in zip(table.column("visits"), table.column("budget")))


def test_unknown_experiment_and_seed_rules():
    with pytest.raises(ConfigError):
        ExperimentConfig("fig9")
    with pytest.raises(ConfigError):
        ExperimentConfig("route", seed=None)
    ExperimentConfig("fig3a", seed=None)


def test_csv_table_format(tmp_path):
    t = CsvTable(["a", "b"], comments=["hello"])
    t.add([1.0, 0.5])
    t.add([math.inf, 1.0])
    assert t.errors and len(t.rows) == 1
    assert t.to_text() == "# hello\na,b\n1,0.5\n"
    path = tmp_path / "t.csv"
    t.save(path)
    assert path.read_bytes() == b"# hello\na,b\n1,0.5\n"
    back = read_csv(path.read_text())
    assert back.header == ["a", "b"] and back.rows == [[1.0, 0.5]]
    with pytest.raises(ValueError):
        t.add([1.0])


def test_output_written(tmp_path):
    out = tmp_path / "f.csv"
    run_experiment(ExperimentConfig("fig3a", Settings({}), 0, str(out)))
    buf = io.StringIO()
    run("fig3a").write(buf)
    assert out.read_text() == buf.getvalue()
