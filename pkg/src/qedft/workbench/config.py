"""Run configuration: JSON sections model/potential/functional/scf/optimizer.

Key names and value ranges are documented in docs/config_schema.md.
Validation errors carry the dotted path of the offending key.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..ksdft import KsConfig
from ..lattice import (
    Composite,
    Disorder,
    Impurity,
    NoPotential,
    Quadratic,
    build_lattice,
    build_potential,
)
from ..vqe import OptimizerConfig

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config"]

FUNCTIONAL_SOURCES = ("ED", "VQE", "HARDWARE", "BALDA", "HF", "PSEUDO_DFT", "PSEUDO_1D", "FILE")

_REQUIRED = object()


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending key."""


def _get(section: dict, key: str, types, path: str, default=_REQUIRED, predicate=None, what=""):
    if key not in section:
        if default is _REQUIRED:
            raise ConfigError(f"{path}.{key}: missing required key")
        return default
    value = section[key]
    if types is not None and not isinstance(value, types):
        if not (isinstance(value, int) and not isinstance(value, bool) and float in _as_tuple(types)):
            raise ConfigError(
                f"{path}.{key}: expected {what or _type_names(types)}, got {value!r}"
            )
    if isinstance(value, bool) and bool not in _as_tuple(types or ()):
        raise ConfigError(f"{path}.{key}: expected {what or _type_names(types)}, got {value!r}")
    if predicate is not None and not predicate(value):
        raise ConfigError(f"{path}.{key}: invalid value {value!r} ({what})")
    return value


def _as_tuple(types):
    return types if isinstance(types, tuple) else (types,)


def _type_names(types):
    return " or ".join(t.__name__ for t in _as_tuple(types))


def _unknown_keys(section: dict, allowed, path: str):
    extra = set(section) - set(allowed)
    if extra:
        raise ConfigError(f"{path}: unknown key(s) {sorted(extra)}")


def _parse_shape(value, path: str):
    if isinstance(value, int) and not isinstance(value, bool):
        if value < 2:
            raise ConfigError(f"{path}: chain length must be >= 2, got {value}")
        return value
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
        isinstance(v, int) and not isinstance(v, bool) for v in value
    ):
        return (value[0], value[1])
    raise ConfigError(f"{path}: expected an int or [nrows, ncols] pair, got {value!r}")


def parse_potential(section, path: str = "potential"):
    """Build a potential descriptor from its config mapping."""
    if section is None:
        return NoPotential()
    if not isinstance(section, dict):
        raise ConfigError(f"{path}: expected an object, got {section!r}")
    kind = _get(section, "kind", str, path, what="a descriptor kind")
    if kind == "none":
        _unknown_keys(section, {"kind"}, path)
        return NoPotential()
    if kind == "quadratic":
        _unknown_keys(section, {"kind", "center", "scale"}, path)
        center = _get(section, "center", (int, float, list, tuple), path, what="number or [row, col]")
        scale = float(_get(section, "scale", (int, float), path, what="number"))
        if isinstance(center, (list, tuple)):
            if len(center) != 2:
                raise ConfigError(f"{path}.center: expected two coordinates")
            center = (float(center[0]), float(center[1]))
        else:
            center = float(center)
        return Quadratic(center=center, scale=scale)
    if kind == "impurity":
        _unknown_keys(section, {"kind", "sites", "strength"}, path)
        sites = _get(section, "sites", list, path, what="a list of site indices")
        if not all(isinstance(s, int) and not isinstance(s, bool) and s >= 0 for s in sites):
            raise ConfigError(f"{path}.sites: all sites must be non-negative integers")
        strength = float(_get(section, "strength", (int, float), path, what="number"))
        return Impurity(sites=tuple(sites), strength=strength)
    if kind == "disorder":
        _unknown_keys(section, {"kind", "seed", "amplitude"}, path)
        seed = _get(section, "seed", int, path, what="integer seed")
        amplitude = float(
            _get(section, "amplitude", (int, float), path, predicate=lambda a: a >= 0,
                 what="non-negative amplitude")
        )
        return Disorder(seed=seed, amplitude=amplitude)
    if kind == "composite":
        _unknown_keys(section, {"kind", "parts"}, path)
        parts = _get(section, "parts", list, path, what="a list of descriptors")
        return Composite(parts=tuple(
            parse_potential(p, f"{path}.parts[{k}]") for k, p in enumerate(parts)
        ))
    raise ConfigError(f"{path}.kind: unknown potential kind {kind!r}")


@dataclass(frozen=True)
class ModelSpec:
    shape: int | tuple[int, int]
    t: float
    u: float
    ne: int | None
    potential: object

    def build_lattice(self):
        return build_lattice(self.shape)

    def build_model(self):
        from ..hamiltonian import HubbardModel

        lattice = self.build_lattice()
        return HubbardModel(
            lattice=lattice, t=self.t, u=self.u,
            potential=build_potential(self.potential, lattice),
        )


@dataclass(frozen=True)
class FunctionalSpec:
    source: str
    shape: int | tuple[int, int] | None = None
    depth: int | None = None
    path: str | None = None
    grid_points: int = 401


@dataclass(frozen=True)
class SweepSpec:
    shapes: tuple
    u_values: tuple[float, ...]
    depths: tuple[int, ...]


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    out: str | None = None
    model: ModelSpec | None = None
    functional: FunctionalSpec | None = None
    scf: KsConfig = field(default_factory=KsConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    reference: str | None = None
    sweep: SweepSpec | None = None
    raw: dict = field(default_factory=dict)


def _parse_model(section, path="model") -> ModelSpec:
    _unknown_keys(section, {"shape", "t", "U", "ne"}, path)
    shape = _parse_shape(_get(section, "shape", None, path), f"{path}.shape")
    t = float(_get(section, "t", (int, float), path, default=1.0,
                   predicate=lambda v: v > 0, what="positive hopping"))
    u = float(_get(section, "U", (int, float), path, default=0.0, what="number"))
    ne = _get(section, "ne", int, path, default=None, what="integer electron count")
    return ModelSpec(shape=shape, t=t, u=u, ne=ne, potential=NoPotential())


def _parse_functional(section, path="functional") -> FunctionalSpec:
    _unknown_keys(section, {"source", "shape", "depth", "path", "grid_points"}, path)
    source = _get(section, "source", str, path,
                  predicate=lambda s: s in FUNCTIONAL_SOURCES,
                  what=f"one of {FUNCTIONAL_SOURCES}")
    shape = section.get("shape")
    if shape is not None:
        shape = _parse_shape(shape, f"{path}.shape")
    depth = _get(section, "depth", int, path, default=None,
                 predicate=lambda d: d >= 1, what="depth >= 1")
    file_path = _get(section, "path", str, path, default=None, what="a file path")
    grid_points = _get(section, "grid_points", int, path, default=401,
                       predicate=lambda g: g >= 7 and g % 2 == 1,
                       what="odd point count >= 7")
    if source == "VQE" and depth is None:
        raise ConfigError(f"{path}: VQE source needs a 'depth'")
    if source == "FILE" and file_path is None:
        raise ConfigError(f"{path}: FILE source needs a 'path'")
    if source == "HARDWARE" and file_path is None:
        raise ConfigError(f"{path}: HARDWARE functionals are imported from a 'path'")
    return FunctionalSpec(source=source, shape=shape, depth=depth, path=file_path,
                          grid_points=grid_points)


def _parse_scf(section, path="scf") -> KsConfig:
    _unknown_keys(section, {"alpha", "max_iterations", "tolerance", "init_rule"}, path)
    try:
        return KsConfig(
            alpha=float(_get(section, "alpha", (int, float), path, default=0.95)),
            max_iterations=_get(section, "max_iterations", int, path, default=500,
                                predicate=lambda v: v >= 1, what=">= 1"),
            tolerance=float(_get(section, "tolerance", (int, float), path, default=1e-10)),
            init_rule=_get(section, "init_rule", str, path, default="proportional"),
        )
    except ValueError as err:
        raise ConfigError(f"{path}: {err}") from err


def _parse_optimizer(section, path="optimizer") -> OptimizerConfig:
    _unknown_keys(section, {"gtol", "max_iterations", "restarts", "perturbation", "seed"}, path)
    return OptimizerConfig(
        gtol=float(_get(section, "gtol", (int, float), path, default=1e-8)),
        max_iterations=_get(section, "max_iterations", int, path, default=500,
                            predicate=lambda v: v >= 1, what=">= 1"),
        restarts=_get(section, "restarts", int, path, default=3,
                      predicate=lambda v: v >= 1, what=">= 1"),
        perturbation=float(_get(section, "perturbation", (int, float), path, default=1e-2)),
        seed=_get(section, "seed", int, path, default=0),
    )


def _parse_sweep(section, path="sweep") -> SweepSpec:
    _unknown_keys(section, {"shapes", "U", "depths"}, path)
    shapes = tuple(
        _parse_shape(s, f"{path}.shapes[{k}]")
        for k, s in enumerate(_get(section, "shapes", list, path, what="list of shapes"))
    )
    u_values = tuple(
        float(v) for v in _get(section, "U", list, path, what="list of interaction strengths")
    )
    depths = tuple(_get(section, "depths", list, path, default=[1], what="list of depths"))
    if not all(isinstance(d, int) and d >= 1 for d in depths):
        raise ConfigError(f"{path}.depths: depths must be integers >= 1")
    return SweepSpec(shapes=shapes, u_values=u_values, depths=depths)


def parse_config(data: dict) -> RunConfig:
    """Validate a configuration mapping and build the typed RunConfig."""
    if not isinstance(data, dict):
        raise ConfigError(f"top level: expected an object, got {type(data).__name__}")
    allowed = {"seed", "out", "model", "potential", "functional", "scf", "optimizer",
               "reference", "sweep"}
    _unknown_keys(data, allowed, "top level")
    seed = _get(data, "seed", int, "top level", default=0)
    out = _get(data, "out", str, "top level", default=None)
    reference = _get(data, "reference", str, "top level", default=None)
    if reference is not None and reference not in ("ed", "balda") and not reference.startswith("file:"):
        raise ConfigError("top level.reference: expected 'ed', 'balda', or 'file:<path>'")

    model = None
    if "model" in data:
        model = _parse_model(_get(data, "model", dict, "top level"))
        descriptor = parse_potential(data.get("potential"))
        model = ModelSpec(shape=model.shape, t=model.t, u=model.u, ne=model.ne,
                          potential=descriptor)
    elif "potential" in data:
        raise ConfigError("top level.potential: requires a model section")

    functional = _parse_functional(data["functional"]) if "functional" in data else None
    scf = _parse_scf(data.get("scf", {}))
    optimizer = _parse_optimizer(data.get("optimizer", {}))
    if optimizer.seed == 0 and seed != 0:
        optimizer = OptimizerConfig(
            gtol=optimizer.gtol, max_iterations=optimizer.max_iterations,
            restarts=optimizer.restarts, perturbation=optimizer.perturbation, seed=seed,
        )
    sweep = _parse_sweep(data["sweep"]) if "sweep" in data else None
    return RunConfig(seed=seed, out=out, model=model, functional=functional,
                     scf=scf, optimizer=optimizer, reference=reference, sweep=sweep,
                     raw=data)


def load_config(path) -> RunConfig:
    """Read and validate a JSON config file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: not valid JSON ({err})") from err
    return parse_config(data)
