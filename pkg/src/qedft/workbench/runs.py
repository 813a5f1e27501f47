"""Pipelines behind the CLI: functional generation, DFT runs, pure VQE,
sweeps, comparisons, and hardware-data import.

Every command materializes its outputs as plot-data tables plus a
result.json, then seals the run directory with a manifest.  Identical
configs and seeds reproduce identical bytes (the manifest alone carries
timestamps).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..exact import ed_filling_scan, ed_ground_state, sz_split
from ..functional import (
    FillingCurve,
    FunctionalFileError,
    XcFunctional,
    balda_functional,
    functional_from_scan,
    functional_error_norm,
    hf_functional,
    load_functional,
    pseudo_functional,
    read_functional_document,
    save_functional,
)
from ..hamiltonian import HubbardModel
from ..ksdft import DftResult, scf_solve
from ..lattice import build_lattice
from ..vqe import vqe_filling_scan, vqe_minimize
from .config import RunConfig
from .manifest import write_manifest
from .metrics import MetricsReport, compute_metrics
from .tables import write_table

__all__ = [
    "generate_functional",
    "cmd_generate_functional",
    "cmd_run_dft",
    "cmd_pure_vqe",
    "cmd_sweep",
    "cmd_compare",
    "cmd_import_functional",
]


def _require(condition, message):
    if not condition:
        raise ValueError(message)


def generate_functional(config: RunConfig, u: float | None = None, t: float | None = None) -> XcFunctional:
    """Build the functional requested by ``config.functional``.

    ED/VQE sources run a filling scan on the generating lattice; BALDA, HF,
    and pseudo functionals are constructed directly; FILE/HARDWARE load from
    disk.  ``u``/``t`` default to the model section's couplings.
    """
    spec = config.functional
    _require(spec is not None, "config has no functional section")
    if u is None or t is None:
        _require(config.model is not None,
                 "functional generation needs couplings: add a model section or pass (u, t)")
        u = config.model.u if u is None else u
        t = config.model.t if t is None else t

    if spec.source in ("FILE", "HARDWARE"):
        return load_functional(spec.path)
    if spec.source == "BALDA":
        return balda_functional(u, t, grid_points=spec.grid_points)
    if spec.source in ("PSEUDO_DFT", "PSEUDO_1D"):
        return pseudo_functional(spec.source, u, grid_points=spec.grid_points, t=t)
    if spec.source == "HF":
        L = build_lattice(spec.shape).num_sites if spec.shape is not None else 12
        return hf_functional(u, t, L)

    _require(spec.shape is not None,
             f"functional source {spec.source} needs a generating 'shape'")
    lattice = build_lattice(spec.shape)
    model = HubbardModel(lattice=lattice, t=t, u=u)
    if spec.source == "ED":
        scan = ed_filling_scan(model)
        return functional_from_scan(scan, lattice, provenance="exact diagonalization scan")
    if spec.source == "VQE":
        scan = vqe_filling_scan(model, spec.depth, config=config.optimizer)
        return functional_from_scan(
            scan, lattice, provenance=f"emulated statevector VQE, depth {spec.depth}"
        )
    raise ValueError(f"cannot generate functional for source {spec.source!r}")


def _resolve_reference(config: RunConfig, model: HubbardModel, ne: int):
    """Reference (density, energy, tag) for metrics, or None when unconfigured."""
    ref = config.reference
    if ref is None:
        return None
    if ref == "ed":
        n_up, n_down = sz_split(ne)
        exact = ed_ground_state(model, n_up, n_down)
        return exact.site_densities, exact.energy, "ED"
    if ref == "balda":
        grid_points = config.functional.grid_points if config.functional else 401
        balda = balda_functional(model.u, model.t, grid_points=grid_points)
        result = scf_solve(model, balda, ne, config.scf)
        return result.density, result.energy, "BALDA-DFT"
    if ref.startswith("file:"):
        path = Path(ref[len("file:"):])
        if path.is_dir():
            path = path / "result.json"
        data = json.loads(path.read_text(encoding="utf-8"))
        return np.asarray(data["density"], dtype=float), float(data["energy"]), ref
    raise ValueError(f"unknown reference {ref!r}")


def _prepare_out(config: RunConfig, out_dir) -> Path:
    out = Path(out_dir) if out_dir is not None else (Path(config.out) if config.out else None)
    _require(out is not None, "no output directory: set 'out' in the config or pass --out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_config_snapshot(config: RunConfig, out: Path) -> Path:
    path = out / "config.json"
    path.write_text(json.dumps(config.raw, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _write_density_table(out: Path, model: HubbardModel, density: np.ndarray) -> Path:
    coords = model.lattice.coords
    rows = [
        (s, coords[s][0], coords[s][1], model.potential.values[s], density[s])
        for s in range(model.num_sites)
    ]
    return write_table(
        out / "density.tsv",
        "density_profile",
        ["site", "row", "col", "v_ext", "density"],
        rows,
        metadata={
            "shape": "x".join(str(x) for x in model.lattice.shape),
            "U": model.u,
            "t": model.t,
            "units": "energies in t, density in electrons per site",
        },
    )


def _functional_summary(f: XcFunctional) -> dict:
    return {
        "source": f.source,
        "depth": f.depth,
        "generating_shape": list(f.generating_shape),
        "L": f.L,
        "U": f.u,
        "t": f.t,
        "discontinuity": f.discontinuity(),
    }


def _write_result(out: Path, payload: dict) -> Path:
    path = out / "result.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _maybe_metrics(config, model, ne, density, energy, out: Path, outputs: list):
    reference = _resolve_reference(config, model, ne)
    if reference is None:
        return None
    ref_density, ref_energy, tag = reference
    report = compute_metrics(density, energy, ref_density, ref_energy, tag)
    path = out / "metrics.json"
    path.write_text(json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    outputs.append(path)
    return report


def cmd_generate_functional(config: RunConfig, out_dir=None):
    """Filling scan on the homogeneous model, functional build, file + manifest."""
    _require(config.model is not None, "generate-functional needs a model section")
    model = config.model.build_model()
    _require(model.is_homogeneous, "the generating model must be homogeneous (no potential)")
    functional = generate_functional(config)
    out = _prepare_out(config, out_dir)
    outputs = [_write_config_snapshot(config, out)]

    functional_path = out / "functional.txt"
    save_functional(functional, functional_path)
    outputs.append(functional_path)
    if functional.total_energy is not None:
        outputs.append(write_table(
            out / "filling_scan.tsv",
            "filling_scan",
            ["Ne", "n", "E_total"],
            [(ne, functional.grid[ne], functional.total_energy[ne])
             for ne in range(len(functional.grid))],
            metadata={"source": functional.source, "U": functional.u, "t": functional.t},
        ))
    write_manifest(out, config.raw, outputs, functional_files=[functional_path])
    return functional, functional_path


def cmd_run_dft(config: RunConfig, out_dir=None):
    """Self-consistent run: density profile, traces, metrics, manifest."""
    _require(config.model is not None, "run-dft needs a model section")
    _require(config.model.ne is not None, "run-dft needs model.ne")
    model = config.model.build_model()
    ne = config.model.ne
    functional = generate_functional(config)
    result = scf_solve(model, functional, ne, config.scf)

    out = _prepare_out(config, out_dir)
    outputs = [_write_config_snapshot(config, out)]
    outputs.append(_write_density_table(out, model, result.density))
    trace_rows = [
        (
            k + 1,
            result.energy_trace[k],
            abs(result.energy_trace[k] - result.energy_trace[k - 1]) if k else float("nan"),
            result.density_change_trace[k],
        )
        for k in range(result.iterations)
    ]
    outputs.append(write_table(
        out / "energy_trace.tsv",
        "scf_trace",
        ["iteration", "energy", "abs_energy_change", "density_change"],
        trace_rows,
        metadata={"converged": result.converged, "alpha": config.scf.alpha},
    ))
    payload = {
        "kind": "dft",
        "energy": result.energy,
        "converged": result.converged,
        "iterations": result.iterations,
        "ne": ne,
        "density": result.density.tolist(),
        "clamp_count": result.clamp_count,
        "functional": _functional_summary(functional),
    }
    outputs.append(_write_result(out, payload))
    report = _maybe_metrics(config, model, ne, result.density, result.energy, out, outputs)
    write_manifest(out, config.raw, outputs)
    return result, report


def cmd_pure_vqe(config: RunConfig, out_dir=None):
    """Direct VQE on the (possibly inhomogeneous) model, no DFT loop."""
    _require(config.model is not None, "pure-vqe needs a model section")
    _require(config.model.ne is not None, "pure-vqe needs model.ne")
    _require(config.functional is not None and config.functional.depth is not None,
             "pure-vqe reads the circuit depth from functional.depth")
    model = config.model.build_model()
    ne = config.model.ne
    n_up, n_down = sz_split(ne)
    result = vqe_minimize(model, n_up, n_down, config.functional.depth, config.optimizer)

    out = _prepare_out(config, out_dir)
    outputs = [_write_config_snapshot(config, out)]
    outputs.append(_write_density_table(out, model, result.site_densities))
    outputs.append(write_table(
        out / "optimizer_trace.tsv",
        "vqe_trace",
        ["iteration", "energy", "gradient_norm"],
        [(k + 1, e, g) for k, (e, g) in enumerate(result.trace)],
        metadata={"depth": config.functional.depth, "restarts": config.optimizer.restarts},
    ))
    payload = {
        "kind": "pure_vqe",
        "energy": result.energy,
        "converged": result.converged,
        "gradient_norm": result.gradient_norm,
        "ne": ne,
        "density": result.site_densities.tolist(),
        "depth": config.functional.depth,
    }
    outputs.append(_write_result(out, payload))
    report = _maybe_metrics(config, model, ne, result.site_densities, result.energy,
                            out, outputs)
    write_manifest(out, config.raw, outputs)
    return result, report


def cmd_sweep(config: RunConfig, out_dir=None):
    """Functional-quality sweep over (shape, U, depth): log10 error vs the ED
    functional of the same system.  Per-point failures are recorded and the
    sweep continues."""
    _require(config.sweep is not None, "sweep needs a sweep section")
    sweep = config.sweep
    t = config.model.t if config.model is not None else 1.0
    rows = []
    for shape in sweep.shapes:
        for u in sweep.u_values:
            lattice = build_lattice(shape)
            shape_tag = "x".join(str(x) for x in lattice.shape)
            try:
                model = HubbardModel(lattice=lattice, t=t, u=u)
                ed = functional_from_scan(ed_filling_scan(model), lattice)
            except Exception as err:  # noqa: BLE001 - sweep keeps going
                for depth in sweep.depths:
                    rows.append((shape_tag, u, depth, f"failed({type(err).__name__}: {err})"))
                continue
            for depth in sweep.depths:
                try:
                    scan = vqe_filling_scan(model, depth, config=config.optimizer)
                    vqe = functional_from_scan(scan, lattice)
                    rows.append((shape_tag, u, depth, functional_error_norm(vqe, ed)))
                except Exception as err:  # noqa: BLE001
                    rows.append((shape_tag, u, depth, f"failed({type(err).__name__}: {err})"))

    out = _prepare_out(config, out_dir)
    outputs = [_write_config_snapshot(config, out)]
    outputs.append(write_table(
        out / "error_matrix.tsv",
        "functional_error_matrix",
        ["shape", "U", "depth", "log10_frobenius_error"],
        rows,
        metadata={"reference": "ED functional per (shape, U)", "t": t},
    ))
    write_manifest(out, config.raw, outputs)
    return rows


def cmd_compare(run_dir, reference: str, out_dir=None):
    """Recompute metrics for a finished run against a reference.

    ``reference`` is 'ed', 'balda', or 'file:<run dir or result.json>'.
    """
    run_dir = Path(run_dir)
    from .config import load_config, parse_config

    config = load_config(run_dir / "config.json")
    config = parse_config({**config.raw, "reference": reference})
    result = json.loads((run_dir / "result.json").read_text(encoding="utf-8"))
    _require(config.model is not None, "the stored config has no model section")
    model = config.model.build_model()
    ne = int(result["ne"])
    density = np.asarray(result["density"], dtype=float)
    ref_density, ref_energy, tag = _resolve_reference(config, model, ne)
    report = compute_metrics(density, float(result["energy"]), ref_density, ref_energy, tag)
    out = Path(out_dir) if out_dir is not None else run_dir
    out.mkdir(parents=True, exist_ok=True)
    path = out / "metrics.json"
    path.write_text(json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return report


def cmd_import_functional(input_path, out_dir):
    """Convert an energy-scan or functional file into the canonical format.

    Raw scans (columns ``Ne E_total``, e.g. hardware data) run through the
    standard pipeline: per-site energies, HF subtraction, differencing,
    splining.  Canonical functional files are validated and re-emitted.
    """
    input_path = Path(input_path)
    header, columns, rows = read_functional_document(input_path)
    if columns == ("Ne", "E_total"):
        from ..functional import _parse_common_header

        source, shape, L, t, u, depth = _parse_common_header(header)
        if source not in ("ED", "VQE", "HARDWARE"):
            raise FunctionalFileError(
                f"raw scans must come from ED, VQE, or HARDWARE, got {source}"
            )
        if len(rows) != 2 * L + 1:
            raise FunctionalFileError(
                f"expected {2 * L + 1} scan rows for shape {header['shape']}, got {len(rows)}"
            )
        energies = np.empty(2 * L + 1)
        for k, row in enumerate(rows):
            if len(row) != 2 or int(row[0]) != k:
                raise FunctionalFileError(f"scan row {k}: expected 'Ne E_total' in order")
            energies[k] = float(row[1])
        scan = FillingCurve.on_filling_grid(L=L, values=energies, u=u, t=t,
                                            source=source, depth=depth)
        functional = functional_from_scan(
            scan, shape, provenance=header.get("provenance", f"imported from {input_path.name}")
        )
    else:
        functional = load_functional(input_path)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "functional.txt"
    save_functional(functional, path)
    write_manifest(out, {"imported_from": str(input_path)}, [path],
                   functional_files=[path])
    return functional, path
