import json

import numpy as np
import pytest

from qedft.exact import ed_filling_scan, ed_ground_state
from qedft.functional import functional_from_scan, load_functional, save_functional
from qedft.hamiltonian import HubbardModel
from qedft.lattice import chain
from qedft.workbench import (
    ConfigError,
    cmd_compare,
    cmd_generate_functional,
    cmd_import_functional,
    cmd_pure_vqe,
    cmd_run_dft,
    cmd_sweep,
    compute_metrics,
    mott_plateau_run,
    parse_config,
)
from qedft.workbench.cli import main
from qedft.workbench.manifest import read_manifest, sha256_file, verify_manifest
from qedft.workbench.tables import read_table, write_table


def base_config(**extra):
    data = {
        "seed": 5,
        "model": {"shape": 4, "t": 1.0, "U": 2.0, "ne": 2},
        "potential": {"kind": "quadratic", "center": 1.5, "scale": 0.25},
        "functional": {"source": "ED", "shape": 4},
        "scf": {"max_iterations": 200},
        "optimizer": {"restarts": 1},
    }
    data.update(extra)
    return data


# --- config ------------------------------------------------------------


def test_parse_valid_config():
    cfg = parse_config(base_config())
    assert cfg.model.shape == 4 and cfg.model.ne == 2
    assert cfg.functional.source == "ED"
    assert cfg.scf.max_iterations == 200
    assert cfg.optimizer.restarts == 1


def test_config_errors_carry_key_paths():
    with pytest.raises(ConfigError, match="model.shape"):
        parse_config({"model": {"shape": 1}})
    with pytest.raises(ConfigError, match="potential.center"):
        parse_config(base_config(potential={"kind": "quadratic", "scale": 1.0}))
    with pytest.raises(ConfigError, match="functional"):
        parse_config(base_config(functional={"source": "NOPE"}))
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(base_config(bogus=1))
    with pytest.raises(ConfigError, match="depth"):
        parse_config(base_config(functional={"source": "VQE", "shape": 4}))
    with pytest.raises(ConfigError, match="grid_points"):
        parse_config(base_config(functional={"source": "BALDA", "grid_points": 10}))
    with pytest.raises(ConfigError, match="reference"):
        parse_config(base_config(reference="nearest"))


def test_top_level_seed_flows_into_optimizer():
    cfg = parse_config(base_config(seed=9))
    assert cfg.optimizer.seed == 9
    cfg = parse_config(base_config(seed=9, optimizer={"seed": 3}))
    assert cfg.optimizer.seed == 3


# --- metrics -----------------------------------------------------------


def test_metrics_zero_for_identical_inputs():
    n = np.array([0.4, 1.1, 0.5])
    report = compute_metrics(n, -2.0, n, -2.0, "ED")
    assert report.delta_n == 0.0 and report.delta_e == 0.0


def test_metrics_single_site_difference():
    ref = np.array([1.0, 1.0, 1.0])
    approx = np.array([1.0, 1.1, 1.0])
    report = compute_metrics(approx, -1.0, ref, -1.2, "ED")
    assert report.delta_n == pytest.approx(0.1, abs=1e-12)
    assert report.delta_e == pytest.approx(0.2, abs=1e-12)
    assert report.per_site[1] == pytest.approx(0.1, abs=1e-12)


def test_metrics_per_site_formula_and_zero_reference():
    ref = np.array([1.0, 0.0])
    approx = np.array([1.05, 0.2])
    report = compute_metrics(approx, 0.0, ref, 0.0, "ED")
    assert report.per_site[0] == pytest.approx(0.05, abs=1e-12)
    assert np.isnan(report.per_site[1])
    assert np.isfinite(report.delta_n)


def test_metrics_shape_mismatch():
    with pytest.raises(ValueError):
        compute_metrics(np.ones(3), 0.0, np.ones(4), 0.0, "ED")


def test_plateau_detector():
    n = np.full(200, 0.6)
    n[90:110] = 1.005
    assert mott_plateau_run(n) == 20
    assert mott_plateau_run(np.full(200, 0.6)) == 0
    # sites pinned outside the central window do not count
    edge = np.full(200, 0.6)
    edge[:30] = 1.0
    assert mott_plateau_run(edge) == 0


# --- tables and manifests ----------------------------------------------


def test_table_round_trip(tmp_path):
    path = write_table(tmp_path / "t.tsv", "demo", ["a", "b"], [(1, 2.5), (3, -0.125)],
                       metadata={"units": "t"})
    name, meta, cols, rows = read_table(path)
    assert name == "demo" and meta["units"] == "t" and cols == ["a", "b"]
    assert rows == [["1", "2.5"], ["3", "-0.125"]]


def test_generate_functional_writes_verifiable_run(tmp_path):
    cfg = parse_config({
        "seed": 1,
        "model": {"shape": 4, "t": 1.0, "U": 2.0},
        "functional": {"source": "ED", "shape": 4},
        "out": str(tmp_path / "run"),
    })
    functional, path = cmd_generate_functional(cfg)
    assert path.exists()
    loaded = load_functional(path)
    assert np.array_equal(loaded.xc_values, functional.xc_values)
    assert verify_manifest(tmp_path / "run")
    manifest = read_manifest(tmp_path / "run")
    assert "functional.txt" in manifest["outputs"]


def test_generate_functional_is_bit_reproducible(tmp_path):
    data = {
        "seed": 3,
        "model": {"shape": 4, "t": 1.0, "U": 3.0},
        "functional": {"source": "VQE", "shape": 4, "depth": 1},
        "optimizer": {"restarts": 1},
    }
    _, p1 = cmd_generate_functional(parse_config(data), tmp_path / "a")
    _, p2 = cmd_generate_functional(parse_config(data), tmp_path / "b")
    assert sha256_file(p1) == sha256_file(p2)


def test_generate_functional_rejects_inhomogeneous_model(tmp_path):
    cfg = parse_config(base_config(out=str(tmp_path)))
    with pytest.raises(ValueError, match="homogeneous"):
        cmd_generate_functional(cfg)


def test_run_dft_emits_outputs_and_metrics(tmp_path):
    cfg = parse_config({
        "seed": 1,
        "model": {"shape": 8, "t": 1.0, "U": 4.0, "ne": 4},
        "potential": {"kind": "quadratic", "center": 3.5, "scale": 0.125},
        "functional": {"source": "HF"},
        "reference": "ed",
        "out": str(tmp_path / "run"),
    })
    result, report = cmd_run_dft(cfg)
    out = tmp_path / "run"
    for name in ("config.json", "density.tsv", "energy_trace.tsv", "result.json",
                 "metrics.json", "manifest.json"):
        assert (out / name).exists()
    assert verify_manifest(out)
    assert report is not None and report.reference_tag == "ED"
    stored = json.loads((out / "result.json").read_text())
    assert stored["ne"] == 4
    assert stored["energy"] == result.energy
    # metrics agree with a direct computation
    model = cfg.model.build_model()
    exact = ed_ground_state(model, 2, 2)
    expected = np.sqrt(np.sum((result.density - exact.site_densities) ** 2))
    assert report.delta_n == pytest.approx(expected, abs=1e-12)


def test_run_dft_with_functional_file(tmp_path):
    scan = ed_filling_scan(HubbardModel(lattice=chain(4), t=1.0, u=2.0))
    f = functional_from_scan(scan, 4)
    fpath = tmp_path / "f.txt"
    save_functional(f, fpath)
    cfg = parse_config({
        "model": {"shape": 4, "t": 1.0, "U": 2.0, "ne": 2},
        "functional": {"source": "FILE", "path": str(fpath)},
        "out": str(tmp_path / "run"),
    })
    result, _ = cmd_run_dft(cfg)
    assert result.converged


def test_pure_vqe_free_model_is_exact(tmp_path):
    cfg = parse_config({
        "model": {"shape": 4, "t": 1.0, "U": 0.0, "ne": 2},
        "functional": {"source": "VQE", "depth": 1},
        "optimizer": {"restarts": 1},
        "reference": "ed",
        "out": str(tmp_path / "run"),
    })
    result, report = cmd_pure_vqe(cfg)
    assert report.delta_e < 1e-9
    assert report.delta_n < 1e-6


def test_sweep_produces_matrix_and_survives_failures(tmp_path):
    cfg = parse_config({
        "sweep": {"shapes": [2, 4], "U": [2.0], "depths": [1]},
        "optimizer": {"restarts": 1},
        "out": str(tmp_path / "run"),
    })
    rows = cmd_sweep(cfg)
    assert len(rows) == 2
    name, _, cols, data = read_table(tmp_path / "run" / "error_matrix.tsv")
    assert name == "functional_error_matrix"
    assert cols == ["shape", "U", "depth", "log10_frobenius_error"]
    assert len(data) == 2


def test_empty_sweep_is_success(tmp_path):
    cfg = parse_config({
        "sweep": {"shapes": [], "U": [], "depths": [1]},
        "out": str(tmp_path / "run"),
    })
    assert cmd_sweep(cfg) == []


def test_compare_between_runs(tmp_path):
    data = {
        "model": {"shape": 4, "t": 1.0, "U": 2.0, "ne": 2},
        "potential": {"kind": "impurity", "sites": [1], "strength": 1.5},
        "functional": {"source": "ED", "shape": 4},
        "out": str(tmp_path / "ed_run"),
    }
    cmd_run_dft(parse_config(data))
    data2 = {**data, "functional": {"source": "HF"}, "out": str(tmp_path / "hf_run")}
    cmd_run_dft(parse_config(data2))
    report = cmd_compare(tmp_path / "hf_run", f"file:{tmp_path / 'ed_run'}")
    assert report.delta_n > 0.0
    assert (tmp_path / "hf_run" / "metrics.json").exists()
    report_ed = cmd_compare(tmp_path / "hf_run", "ed")
    assert report_ed.reference_tag == "ED"


def test_import_raw_scan_matches_pipeline(tmp_path):
    model = HubbardModel(lattice=chain(4), t=1.0, u=2.0)
    scan = ed_filling_scan(model)
    raw = tmp_path / "raw.txt"
    lines = ["schema_version 1", "source HARDWARE", "shape 1x4", "t 1.0", "U 2.0",
             "provenance test rig", "columns Ne E_total"]
    lines += [f"{ne} {float(scan.values[ne])!r}" for ne in range(9)]
    raw.write_text("\n".join(lines) + "\n")
    functional, path = cmd_import_functional(raw, tmp_path / "imported")
    reference = functional_from_scan(scan, 4)
    assert np.array_equal(functional.xc_values, reference.xc_values)
    assert np.array_equal(functional.v_left, reference.v_left)
    assert functional.source == "HARDWARE"
    # the canonical file feeds run-dft like any other functional
    cfg = parse_config({
        "model": {"shape": 4, "t": 1.0, "U": 2.0, "ne": 2},
        "functional": {"source": "FILE", "path": str(path)},
        "out": str(tmp_path / "run"),
    })
    result, _ = cmd_run_dft(cfg)
    assert result.converged


# --- CLI ---------------------------------------------------------------


def test_cli_generate_and_run(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "model": {"shape": 4, "t": 1.0, "U": 2.0},
        "functional": {"source": "ED", "shape": 4},
    }))
    assert main(["generate-functional", "--config", str(cfg_path),
                 "--out", str(tmp_path / "gen")]) == 0
    run_cfg = tmp_path / "run.json"
    run_cfg.write_text(json.dumps({
        "model": {"shape": 4, "t": 1.0, "U": 2.0, "ne": 2},
        "potential": {"kind": "impurity", "sites": [0], "strength": 1.0},
    }))
    code = main([
        "run-dft", "--config", str(run_cfg),
        "--functional", str(tmp_path / "gen" / "functional.txt"),
        "--reference", "ed", "--out", str(tmp_path / "run"),
    ])
    assert code == 0
    assert (tmp_path / "run" / "metrics.json").exists()


def test_cli_rejects_bad_config(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"model": {"shape": 1}}))
    assert main(["run-dft", "--config", str(cfg_path), "--out", str(tmp_path)]) == 2
