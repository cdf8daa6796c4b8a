import json
from pathlib import Path

import numpy as np
import pytest

from fracocp import TimeGrid, paper_scenario, parse_config, read_csv, write_csv
from fracocp.cli import main
from fracocp.config import ConfigError, paper_scenario_text
from fracocp.focp import AdjointMode
from fracocp.output import TRAJECTORY_HEADER, format_float, read_summary
from fracocp.scenario import run_scenario

from conftest import PAPER_PARAMS


def small_config(**overrides) -> dict:
    doc = json.loads(paper_scenario_text())
    doc["grid"] = {"tf": 20, "n_steps": 50}
    doc["alphas"] = [0.9, 1]
    doc.update(overrides)
    return doc


def write_config(tmp_path: Path, doc: dict) -> Path:
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(doc))
    return path


# --- config -----------------------------------------------------------------


def test_paper_scenario_values():
    cfg = paper_scenario()
    for key, value in PAPER_PARAMS.items():
        assert getattr(cfg.model, key) == value
    assert tuple(cfg.initial_state) == (220, 100, 3, 0)
    assert cfg.alphas == (0.75, 0.85, 0.95, 1.0)
    assert (cfg.grid.tf, cfg.grid.n_steps) == (100.0, 1000)


def test_sweep_defaults_when_omitted():
    doc = small_config()
    del doc["sweep"]
    sweep = parse_config(json.dumps(doc)).sweep
    assert (sweep.omega, sweep.delta, sweep.max_iterations) == (0.5, 1e-3, 200)
    assert sweep.bounds == (0.0, 1.0)
    assert sweep.adjoint_mode is AdjointMode.FULL_HAMILTONIAN
    assert sweep.adjoint_rl_correction is False


def test_optional_blocks_default():
    doc = {"model": dict(PAPER_PARAMS), "initial_state": {"S": 1, "E": 0, "I": 0, "R": 0}}
    cfg = parse_config(json.dumps(doc))
    assert cfg.alphas == (1.0,)
    assert cfg.weights.r1 == 10 and cfg.weights.A1 == 1
    assert cfg.grid.n_steps == 1000


@pytest.mark.parametrize(
    "mutate, path",
    [
        (lambda d: d["weights"].update(r1=0), "weights.r1"),
        (lambda d: d["model"].update(alpha=1.5), "model.alpha"),
        (lambda d: d["model"].pop("mu"), "model.mu"),
        (lambda d: d["model"].update(extra=1), "model.extra"),
        (lambda d: d.update(colour="red"), "colour"),
        (lambda d: d.pop("initial_state"), "initial_state"),
        (lambda d: d["initial_state"].update(S=-1), "initial_state.S"),
        (lambda d: d["grid"].update(n_steps=1), "grid.n_steps"),
        (lambda d: d["grid"].update(n_steps=10.5), "grid.n_steps"),
        (lambda d: d["sweep"].update(omega=2), "sweep.omega"),
        (lambda d: d["sweep"].update(bounds=[1, 0]), "sweep.bounds"),
        (lambda d: d["sweep"].update(adjoint_mode="x"), "sweep.adjoint_mode"),
        (lambda d: d.update(alphas=[]), "alphas"),
        (lambda d: d.update(alphas=[0.5, 0]), "alphas[1]"),
        (lambda d: d["model"].update(beta1="0.1"), "model.beta1"),
    ],
)
def test_config_errors_are_path_qualified(mutate, path):
    doc = small_config()
    mutate(doc)
    with pytest.raises(ConfigError) as info:
        parse_config(json.dumps(doc))
    assert str(info.value).startswith(path + ":")


def test_alpha_message():
    doc = small_config()
    doc["model"]["alpha"] = 0
    with pytest.raises(ConfigError, match=r"^model\.alpha: must lie in \(0,1\]$"):
        parse_config(json.dumps(doc))


def test_malformed_json():
    with pytest.raises(ConfigError, match="malformed"):
        parse_config("{not json")


# --- CSV --------------------------------------------------------------------


def test_write_csv_layout(tmp_path):
    g = TimeGrid(1.0, 2)
    path = write_csv(tmp_path / "x.csv", g, np.arange(12.0).reshape(3, 4))
    lines = path.read_bytes().split(b"\n")
    assert lines[0] == b"t,S,E,I,R,u1,u2,lambda1,lambda2,lambda3,lambda4"
    assert lines[1] == b"0,0,1,2,3,0,0,0,0,0,0"
    assert lines[2] == b"0.5,4,5,6,7,0,0,0,0,0,0"
    assert lines[-1] == b"" and len(lines) == 5
    assert b"\r" not in path.read_bytes()


def test_csv_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(11)
    g = TimeGrid(3.0, 7)
    x, u, lam = rng.normal(size=(8, 4)) * 1e5, rng.uniform(size=(8, 2)), rng.normal(size=(8, 4)) * 1e-9
    x[0, 0] = 5e-324
    back = read_csv(write_csv(tmp_path / "r.csv", g, x, u, lam))
    assert back["S"].tobytes() == np.ascontiguousarray(x[:, 0]).tobytes()
    assert np.column_stack([back[c] for c in TRAJECTORY_HEADER[1:5]]).tobytes() == x.tobytes()
    assert np.column_stack([back["u1"], back["u2"]]).tobytes() == u.tobytes()
    assert np.column_stack([back[f"lambda{i}"] for i in range(1, 5)]).tobytes() == lam.tobytes()


def test_format_float():
    assert format_float(1.0) == "1"
    assert format_float(0.1) == "0.1"
    assert float(format_float(1 / 3)) == 1 / 3
    assert format_float(1e300) == "1e+300"


def test_write_csv_rejects_misaligned(tmp_path):
    with pytest.raises(ValueError):
        write_csv(tmp_path / "x.csv", TimeGrid(1.0, 2), np.zeros((2, 4)))


# --- scenario and CLI -------------------------------------------------------


def test_run_scenario_small(tmp_path):
    cfg = parse_config(json.dumps(small_config(output_dir=str(tmp_path / "out"))))
    result = run_scenario(cfg, svg=True)
    out = tmp_path / "out"
    names = sorted(p.name for p in out.iterdir())
    assert names == [
        "controlled_alpha0.9.csv", "controlled_alpha1.csv",
        "fig_E.svg", "fig_I.svg", "fig_R.svg", "fig_S.svg",
        "summary.csv",
        "uncontrolled_alpha0.9.csv", "uncontrolled_alpha1.csv",
    ]
    free = read_csv(out / "uncontrolled_alpha1.csv")
    for col in TRAJECTORY_HEADER[5:]:
        assert np.all(free[col] == 0)
    rows = read_summary(result.summary_path)
    assert [(r["variant"], r["alpha"]) for r in rows] == [
        ("uncontrolled", 0.9), ("controlled", 0.9), ("uncontrolled", 1.0), ("controlled", 1.0)
    ]
    assert all(r["converged"] for r in rows)


def test_summary_matches_csv_objective(tmp_path):
    from fracocp import objective

    cfg = parse_config(json.dumps(small_config(output_dir=str(tmp_path))))
    run_scenario(cfg)
    for row in read_summary(tmp_path / "summary.csv"):
        data = read_csv(tmp_path / f"{row['variant']}_alpha{format_float(row['alpha'])}.csv")
        x = np.column_stack([data[c] for c in "SEIR"])
        u = np.column_stack([data["u1"], data["u2"]])
        assert abs(objective(cfg.weights, cfg.grid, x, u) - row["objective"]) <= 1e-12 * max(1, abs(row["objective"]))


def test_pinned_controls_match_uncontrolled_csv(tmp_path):
    doc = small_config(output_dir=str(tmp_path), alphas=[1])
    doc["sweep"]["bounds"] = [0, 0]
    run_scenario(parse_config(json.dumps(doc)))
    a = read_csv(tmp_path / "controlled_alpha1.csv")
    b = read_csv(tmp_path / "uncontrolled_alpha1.csv")
    for col in ("t", "S", "E", "I", "R", "u1", "u2"):
        assert np.max(np.abs(a[col] - b[col])) <= 1e-12


def test_determinism(tmp_path):
    doc = small_config()
    for name in ("a", "b"):
        run_scenario(parse_config(json.dumps({**doc, "output_dir": str(tmp_path / name)})))
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_parallel_jobs_match_serial(tmp_path):
    doc = small_config()
    run_scenario(parse_config(json.dumps(doc)), output_dir=tmp_path / "serial")
    run_scenario(parse_config(json.dumps(doc)), output_dir=tmp_path / "par", jobs=2)
    for f in (tmp_path / "serial").iterdir():
        assert f.read_bytes() == (tmp_path / "par" / f.name).read_bytes()


def test_cli_compare(tmp_path, capsys):
    cfg = write_config(tmp_path, small_config())
    out = tmp_path / "cmp"
    assert main(["compare", "--config", str(cfg), "--svg", "--output-dir", str(out)]) == 0
    assert len(list(out.glob("*_alpha*.csv"))) == 4
    assert all((out / f"fig_{c}.svg").stat().st_size > 0 for c in "SEIR")
    assert "summary:" in capsys.readouterr().out


def test_cli_simulate_single_alpha(tmp_path):
    cfg = write_config(tmp_path, small_config())
    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(cfg), "--alpha", "0.8", "--output-dir", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["summary.csv", "uncontrolled_alpha0.8.csv"]


def test_cli_optimize_printed_adjoint(tmp_path):
    cfg = write_config(tmp_path, small_config(alphas=[1]))
    out = tmp_path / "opt"
    assert main(["optimize", "--config", str(cfg), "--paper-adjoint", "--output-dir", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["controlled_alpha1.csv", "summary.csv"]


def test_cli_config_error(tmp_path, capsys):
    doc = small_config()
    doc["weights"]["r1"] = 0
    assert main(["compare", "--config", str(write_config(tmp_path, doc))]) == 1
    assert "weights.r1" in capsys.readouterr().err
    assert main(["compare", "--config", str(tmp_path / "missing.json")]) == 1


def test_cli_io_error_leaves_no_summary(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("not a directory")
    cfg = write_config(tmp_path, small_config())
    assert main(["compare", "--config", str(cfg), "--output-dir", str(blocker / "out")]) == 3
    assert not (blocker / "out").exists()


def test_cli_numerical_abort(tmp_path, capsys):
    doc = small_config(alphas=[0.9])
    doc["model"]["beta1"] = 1e3
    doc["initial_state"] = {"S": 1e3, "E": 1e3, "I": 0, "R": 0}
    out = tmp_path / "boom"
    with np.errstate(over="ignore"):
        code = main(["simulate", "--config", str(write_config(tmp_path, doc)), "--output-dir", str(out)])
    assert code == 2
    assert "alpha=0.9" in capsys.readouterr().err
    assert not (out / "summary.csv").exists()


def test_cli_non_convergence_exit_zero(tmp_path):
    doc = small_config(alphas=[1])
    doc["sweep"]["max_iterations"] = 1
    out = tmp_path / "nc"
    assert main(["optimize", "--config", str(write_config(tmp_path, doc)), "--output-dir", str(out)]) == 0
    rows = read_summary(out / "summary.csv")
    assert rows[0]["converged"] is False
