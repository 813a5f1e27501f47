"""Exchange-correlation functionals on the density grid n = Ne/L in [0, 2].

Pipeline: a filling scan of total energies E(Ne) becomes a per-site energy
curve (E/L), the classical Hartree-Fock reference is subtracted, the result
is differentiated numerically without any stencil crossing n = 1 (so the
derivative discontinuity survives), and both energy and potential are fitted
with natural cubic splines per piece (n <= 1 and n > 1).  Closed-form
functionals (Hartree-Fock zero, pseudo power laws) and the Bethe-ansatz LDA
go through the same piecewise machinery on a dense grid.

Functional files are self-describing text documents; see
docs/functional_file_format.md for the exact schema.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq
from scipy.special import j0, j1, roots_legendre

from .hamiltonian import single_particle_matrix
from .lattice import SiteGraph, build_lattice

__all__ = [
    "FillingCurve",
    "XcPotentialGrid",
    "XcFunctional",
    "FunctionalFileError",
    "SOURCES",
    "qelda_curve",
    "hf_reference_curve",
    "xc_curve",
    "differentiate_xc",
    "build_functional",
    "functional_from_scan",
    "hf_functional",
    "pseudo_functional",
    "balda_functional",
    "balda_beta",
    "balda_homogeneous_energy",
    "lieb_wu_energy",
    "save_functional",
    "load_functional",
    "functional_error_norm",
]

SOURCES = ("ED", "VQE", "HARDWARE", "BALDA", "HF", "PSEUDO_DFT", "PSEUDO_1D")
CURVE_KINDS = ("total_energy", "per_site_energy", "xc_energy")

EXACT_NORM_THRESHOLD = 1e-15


class FunctionalFileError(ValueError):
    """A functional file failed schema or domain validation."""


@dataclass(frozen=True)
class FillingCurve:
    """Values on the density grid n_k = Ne/L, Ne = 0..2L, with provenance."""

    L: int
    grid: np.ndarray
    values: np.ndarray
    u: float
    t: float
    source: str
    kind: str
    depth: int | None = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if self.source not in SOURCES:
            raise ValueError(f"unknown source tag {self.source!r}")
        if self.kind not in CURVE_KINDS:
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if len(grid) != 2 * self.L + 1 or len(values) != len(grid):
            raise ValueError("grid must hold 2L+1 points matching the values")
        if grid[0] != 0.0 or grid[-1] != 2.0 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must increase strictly from 0 to 2")
        if values[0] != 0.0:
            raise ValueError("curve must vanish at n = 0 (empty lattice)")
        if not np.all(np.isfinite(values)):
            raise ValueError("curve contains non-finite values")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def on_filling_grid(cls, L, values, u, t, source, kind="total_energy", depth=None):
        grid = np.arange(2 * L + 1, dtype=float) / L
        grid[-1] = 2.0
        return cls(L=L, grid=grid, values=np.asarray(values, dtype=float),
                   u=u, t=t, source=source, kind=kind, depth=depth)


def qelda_curve(scan: FillingCurve) -> FillingCurve:
    """Per-site homogeneous energies: the raw scan divided by the system size."""
    if scan.kind != "total_energy":
        raise ValueError("qelda_curve expects a total-energy scan")
    return FillingCurve(
        L=scan.L, grid=scan.grid, values=scan.values / scan.L,
        u=scan.u, t=scan.t, source=scan.source, kind="per_site_energy",
        depth=scan.depth,
    )


def hf_reference_curve(lattice: SiteGraph | int, t: float, u: float) -> FillingCurve:
    """Classical reference: eps_HF(n) = T_NI(Ne)/L + U n^2 / 4.

    T_NI fills the lowest one-body orbitals of the open lattice with the
    minimally polarized spin split.
    """
    lattice = build_lattice(lattice)
    L = lattice.num_sites
    eps = np.linalg.eigvalsh(single_particle_matrix(lattice, t))
    cumulative = np.concatenate([[0.0], np.cumsum(eps)])
    values = np.empty(2 * L + 1)
    for ne in range(2 * L + 1):
        n_up, n_down = (ne + 1) // 2, ne // 2
        kinetic = cumulative[n_up] + cumulative[n_down]
        values[ne] = kinetic / L + u * (ne / L) ** 2 / 4.0
    values[0] = 0.0
    return FillingCurve.on_filling_grid(
        L=L, values=values, u=u, t=t, source="HF", kind="per_site_energy"
    )


def xc_curve(qelda: FillingCurve, hf: FillingCurve) -> FillingCurve:
    """Pointwise XC energy: quantum per-site energies minus the HF reference."""
    if qelda.kind != "per_site_energy" or hf.kind != "per_site_energy":
        raise ValueError("xc_curve expects per-site energy curves")
    if qelda.L != hf.L or not np.array_equal(qelda.grid, hf.grid):
        raise ValueError("curves live on different grids")
    if qelda.u != hf.u or qelda.t != hf.t:
        raise ValueError(
            f"curve metadata mismatch: (U, t) = ({qelda.u}, {qelda.t}) vs ({hf.u}, {hf.t})"
        )
    return FillingCurve(
        L=qelda.L, grid=qelda.grid, values=qelda.values - hf.values,
        u=qelda.u, t=qelda.t, source=qelda.source, kind="xc_energy",
        depth=qelda.depth,
    )


@dataclass(frozen=True)
class XcPotentialGrid:
    """Two-sided derivative grid: the node n = 1 carries both limits."""

    grid: np.ndarray
    left: np.ndarray  # on grid[: L+1], last entry is V(1-)
    right: np.ndarray  # on grid[L :], first entry is V(1+)

    @property
    def discontinuity(self) -> float:
        return float(self.right[0] - self.left[-1])


def _one_sided_derivative(f: np.ndarray, h: float) -> np.ndarray:
    """Second-order stencils: central inside, one-sided at the piece ends."""
    if len(f) < 3:
        raise ValueError("need at least 3 grid points per piece")
    d = np.empty_like(f)
    d[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    d[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    return d


def differentiate_xc(xc: FillingCurve) -> XcPotentialGrid:
    """Numerical derivative of the XC energy; no stencil crosses n = 1."""
    if xc.kind != "xc_energy":
        raise ValueError("differentiate_xc expects an XC energy curve")
    L = xc.L
    h = 1.0 / L
    return XcPotentialGrid(
        grid=xc.grid,
        left=_one_sided_derivative(xc.values[: L + 1], h),
        right=_one_sided_derivative(xc.values[L:], h),
    )


class XcFunctional:
    """Piecewise continuous XC energy and potential, split at n = 1.

    Evaluation at n <= 1 uses the left piece, n > 1 the right piece;
    ``discontinuity()`` returns V(1+) - V(1-).  Instances are immutable and
    shareable; closed-form sources (HF, pseudo) bypass the splines.
    """

    def __init__(self, *, source, u, t, L, grid, xc_values, v_left, v_right,
                 depth=None, provenance=None, total_energy=None,
                 energy_fns=None, potential_fns=None, generating_shape=None):
        if source not in SOURCES:
            raise ValueError(f"unknown source tag {source!r}")
        self.source = source
        self.u = float(u)
        self.t = float(t)
        self.L = int(L)
        self.depth = depth
        self.provenance = provenance
        self.generating_shape = tuple(generating_shape) if generating_shape else (1, int(L))
        self.grid = np.asarray(grid, dtype=float)
        self.xc_values = np.asarray(xc_values, dtype=float)
        self.v_left = np.asarray(v_left, dtype=float)
        self.v_right = np.asarray(v_right, dtype=float)
        self.total_energy = None if total_energy is None else np.asarray(total_energy, float)
        split = self.L
        if energy_fns is not None:
            self._e_left, self._e_right = energy_fns
            self._v_left_fn, self._v_right_fn = potential_fns
        else:
            self._e_left = CubicSpline(self.grid[: split + 1], self.xc_values[: split + 1],
                                       bc_type="natural")
            self._e_right = CubicSpline(self.grid[split:], self.xc_values[split:],
                                        bc_type="natural")
            self._v_left_fn = CubicSpline(self.grid[: split + 1], self.v_left, bc_type="natural")
            self._v_right_fn = CubicSpline(self.grid[split:], self.v_right, bc_type="natural")

    def _piecewise(self, fn_left, fn_right, n):
        n = np.clip(np.asarray(n, dtype=float), 0.0, 2.0)
        left = fn_left(np.minimum(n, 1.0))
        right = fn_right(np.maximum(n, 1.0))
        out = np.where(n <= 1.0, left, right)
        return float(out) if out.ndim == 0 else out

    def energy(self, n):
        """Per-site XC energy at density n (n <= 1 from the left piece)."""
        return self._piecewise(self._e_left, self._e_right, n)

    def potential(self, n):
        """XC potential at density n (n <= 1 from the left piece)."""
        return self._piecewise(self._v_left_fn, self._v_right_fn, n)

    def discontinuity(self) -> float:
        return float(self._v_right_fn(1.0) - self._v_left_fn(1.0))

    def describe(self) -> str:
        tag = self.source if self.depth is None else f"{self.source}(depth {self.depth})"
        return f"{tag} functional, L={self.L}, U={self.u}, t={self.t}"

    def __repr__(self):
        return f"XcFunctional({self.describe()})"


def build_functional(
    e_curve: FillingCurve,
    v_curve: XcPotentialGrid,
    provenance: str | None = None,
    total_energy: np.ndarray | None = None,
    generating_shape: tuple[int, int] | None = None,
) -> XcFunctional:
    """Fit natural cubic splines per piece through the XC energy and potential grids.

    An HF-tagged curve short-circuits to the identically zero functional.
    """
    if e_curve.kind != "xc_energy":
        raise ValueError("build_functional expects an XC energy curve")
    if e_curve.source == "HF":
        return hf_functional(e_curve.u, e_curve.t, e_curve.L)
    if not np.array_equal(e_curve.grid, v_curve.grid):
        raise ValueError("energy and potential grids differ")
    return XcFunctional(
        source=e_curve.source, u=e_curve.u, t=e_curve.t, L=e_curve.L,
        grid=e_curve.grid, xc_values=e_curve.values,
        v_left=v_curve.left, v_right=v_curve.right,
        depth=e_curve.depth, provenance=provenance, total_energy=total_energy,
        generating_shape=generating_shape,
    )


def functional_from_scan(
    scan: FillingCurve, lattice: SiteGraph | int, provenance: str | None = None
) -> XcFunctional:
    """Full pipeline from a raw total-energy scan to a queryable functional."""
    lattice = build_lattice(lattice)
    if lattice.num_sites != scan.L:
        raise ValueError("scan was generated on a different lattice size")
    qelda = qelda_curve(scan)
    hf = hf_reference_curve(lattice, scan.t, scan.u)
    xc = xc_curve(qelda, hf)
    return build_functional(xc, differentiate_xc(xc), provenance=provenance,
                            total_energy=scan.values, generating_shape=lattice.shape)


# --- closed-form functionals ------------------------------------------------


def _zero_fn(n):
    return np.zeros_like(np.asarray(n, dtype=float))


def hf_functional(u: float, t: float = 1.0, L: int = 12) -> XcFunctional:
    """The Hartree-Fock choice: XC energy and potential identically zero."""
    grid = np.arange(2 * L + 1, dtype=float) / L
    grid[-1] = 2.0
    zeros = np.zeros(2 * L + 1)
    return XcFunctional(
        source="HF", u=u, t=t, L=L, grid=grid, xc_values=zeros,
        v_left=np.zeros(L + 1), v_right=np.zeros(L + 1),
        energy_fns=(_zero_fn, _zero_fn), potential_fns=(_zero_fn, _zero_fn),
    )


def pseudo_functional(
    kind: Literal["PSEUDO_DFT", "PSEUDO_1D"], u: float, grid_points: int = 401,
    t: float = 1.0,
) -> XcFunctional:
    """Continuum-inspired closed forms with no derivative discontinuity.

    PSEUDO_DFT: E_xc = 2^(-4/3) U n^(4/3);  PSEUDO_1D: E_xc = U n^2 / 4.
    The potential is the analytic derivative.
    """
    if kind == "PSEUDO_DFT":
        c = 2.0 ** (-4.0 / 3.0) * u
        e_fn = lambda n: c * np.asarray(n, dtype=float) ** (4.0 / 3.0)  # noqa: E731
        v_fn = lambda n: (4.0 / 3.0) * c * np.asarray(n, dtype=float) ** (1.0 / 3.0)  # noqa: E731
    elif kind == "PSEUDO_1D":
        e_fn = lambda n: 0.25 * u * np.asarray(n, dtype=float) ** 2  # noqa: E731
        v_fn = lambda n: 0.5 * u * np.asarray(n, dtype=float)  # noqa: E731
    else:
        raise ValueError(f"unknown pseudo functional kind {kind!r}")
    L = _dense_grid_size(grid_points)
    grid = np.arange(2 * L + 1, dtype=float) / L
    grid[-1] = 2.0
    return XcFunctional(
        source=kind, u=u, t=t, L=L, grid=grid, xc_values=e_fn(grid),
        v_left=v_fn(grid[: L + 1]), v_right=v_fn(grid[L:]),
        energy_fns=(e_fn, e_fn), potential_fns=(v_fn, v_fn),
    )


# --- Bethe-ansatz LDA --------------------------------------------------------


def lieb_wu_energy(u: float, t: float = 1.0) -> float:
    """Half-filled ground energy per site of the infinite chain:

        e = -4t * Int_0^inf J0(x) J1(x) / (x (1 + exp(U x / 2t))) dx,

    evaluated by composite Gauss-Legendre panels short enough to resolve the
    Bessel oscillation; the truncated tail is O(1e-9).
    """
    nodes, weights = roots_legendre(12)
    upper, panel = 16000.0, np.pi / 2.0
    edges = np.arange(0.0, upper + panel, panel)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    # J1(x)/x is finite at 0; avoid the 0/0 evaluation explicitly
    ratio = np.where(x > 0, j1(np.where(x > 0, x, 1.0)) / np.where(x > 0, x, 1.0), 0.5)
    with np.errstate(over="ignore"):
        fermi = 1.0 / (1.0 + np.exp(np.minimum(u * x / (2.0 * t), 700.0)))
    integrand = j0(x) * ratio * fermi
    return float(-4.0 * t * np.sum(w * integrand))


def balda_beta(u: float, t: float = 1.0) -> float:
    """Solve -(2 beta / pi) sin(pi / beta) = e_half(U) / t for beta in (1, 2]."""
    if u < 0:
        raise ValueError("BALDA requires U >= 0")
    target = lieb_wu_energy(u, t) / t

    def condition(beta):
        return -(2.0 * beta / np.pi) * np.sin(np.pi / beta) - target

    if condition(2.0) >= 0.0:
        return 2.0  # free limit; quadrature noise would push beta above 2
    try:
        return float(brentq(condition, 1.0 + 1e-12, 2.0, xtol=1e-13, rtol=8.9e-16))
    except ValueError as err:
        raise RuntimeError(f"BALDA beta root find failed for U={u}, t={t}") from err


def balda_homogeneous_energy(n, u: float, t: float = 1.0, beta: float | None = None):
    """Per-site energy e(n) of the Bethe-ansatz LDA parameterization.

    For n <= 1: e = -(2 t beta / pi) sin(pi n / beta); densities above one
    follow from particle-hole symmetry, e(n) = e(2 - n) + U (n - 1).
    """
    if beta is None:
        beta = balda_beta(u, t)
    n = np.asarray(n, dtype=float)
    mirrored = np.where(n <= 1.0, n, 2.0 - n)
    e = -(2.0 * t * beta / np.pi) * np.sin(np.pi * mirrored / beta)
    out = np.where(n <= 1.0, e, e + u * (n - 1.0))
    return float(out) if out.ndim == 0 else out


def _dense_grid_size(grid_points: int) -> int:
    if grid_points < 7 or grid_points % 2 == 0:
        raise ValueError("dense grid needs an odd point count >= 7 (node at n = 1)")
    return (grid_points - 1) // 2


def balda_functional(u: float, t: float = 1.0, grid_points: int = 401) -> XcFunctional:
    """Bethe-ansatz LDA functional on a dense grid, derived through the same
    differencing and splining path as scan-generated functionals.

    The reference subtracted is the thermodynamic-limit one: kinetic energy
    -(4t/pi) sin(pi n / 2) (mirrored above n = 1) plus the Hartree U n^2 / 4.
    """
    beta = balda_beta(u, t)
    L = _dense_grid_size(grid_points)
    grid = np.arange(2 * L + 1, dtype=float) / L
    grid[-1] = 2.0
    e = balda_homogeneous_energy(grid, u, t, beta=beta)
    mirrored = np.where(grid <= 1.0, grid, 2.0 - grid)
    kinetic = -(4.0 * t / np.pi) * np.sin(np.pi * mirrored / 2.0)
    xc_values = e - kinetic - u * grid**2 / 4.0
    xc_values[0] = 0.0
    xc = FillingCurve(L=L, grid=grid, values=xc_values, u=u, t=t,
                      source="BALDA", kind="xc_energy")
    f = build_functional(xc, differentiate_xc(xc),
                         provenance=f"beta(U={u}) = {beta!r}")
    return f


# --- file I/O ----------------------------------------------------------------

_SCHEMA_VERSION = 1
_COLUMNS = ("Ne", "n", "E_total", "epsilon_xc", "v_xc")


def save_functional(functional: XcFunctional, path) -> None:
    """Write the self-describing functional file (see docs/functional_file_format.md).

    The v_xc column records the left limit at n = 1; both limits are
    rebuilt from epsilon_xc on load, so round trips are bit-exact.
    """
    f = functional
    L = f.L
    v_nodes = np.concatenate([f.v_left, f.v_right[1:]])
    shape = "x".join(str(s) for s in f.generating_shape)
    lines = ["# QEDFT exchange-correlation functional"]
    lines.append(f"schema_version {_SCHEMA_VERSION}")
    lines.append(f"source {f.source}")
    lines.append(f"shape {shape}")
    lines.append(f"t {f.t!r}")
    lines.append(f"U {f.u!r}")
    if f.depth is not None:
        lines.append(f"depth {f.depth}")
    if f.provenance:
        lines.append(f"provenance {f.provenance}")
    lines.append("columns " + " ".join(_COLUMNS))
    total = f.total_energy
    for ne in range(2 * L + 1):
        e_tot = float("nan") if total is None else float(total[ne])
        lines.append(
            f"{ne} {float(f.grid[ne])!r} {e_tot!r} {float(f.xc_values[ne])!r} "
            f"{float(v_nodes[ne])!r}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_header_line(line: str, lineno: int):
    parts = line.split(maxsplit=1)
    if len(parts) != 2:
        raise FunctionalFileError(f"line {lineno}: expected 'key value', got {line!r}")
    return parts[0], parts[1]


def read_functional_document(path):
    """Parse the key-value header and data rows of a functional-style file.

    Returns (header dict, column name tuple, rows as string lists); shared by
    the functional loader and the raw-scan import path.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = [ln.rstrip("\n") for ln in fh]
    header: dict[str, str] = {}
    columns: tuple[str, ...] | None = None
    rows: list[list[str]] = []
    for lineno, line in enumerate(raw, start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if columns is not None:
            rows.append(line.split())
            continue
        key, value = _parse_header_line(line, lineno)
        if key == "columns":
            columns = tuple(value.split())
            continue
        header[key] = value
    if columns is None:
        raise FunctionalFileError(f"{path}: missing 'columns' line")
    return header, columns, rows


def _parse_common_header(header: dict[str, str]):
    for required in ("schema_version", "source", "shape", "t", "U"):
        if required not in header:
            raise FunctionalFileError(f"missing header field {required!r}")
    if header["schema_version"] != str(_SCHEMA_VERSION):
        raise FunctionalFileError(
            f"unsupported schema_version {header['schema_version']} (expected {_SCHEMA_VERSION})"
        )
    source = header["source"]
    if source not in SOURCES:
        raise FunctionalFileError(f"unknown source tag {source!r}")
    try:
        shape_parts = tuple(int(p) for p in header["shape"].lower().split("x"))
        if len(shape_parts) == 1:
            shape_parts = (1, shape_parts[0])
        if len(shape_parts) != 2:
            raise ValueError(f"shape {header['shape']!r} is not 1D or 2D")
        L = int(np.prod(shape_parts))
        t = float(header["t"])
        u = float(header["U"])
        depth = int(header["depth"]) if "depth" in header else None
    except ValueError as err:
        raise FunctionalFileError(f"malformed header value: {err}") from err
    return source, shape_parts, L, t, u, depth


def load_functional(path) -> XcFunctional:
    """Read a functional file and rebuild the piecewise splines locally.

    epsilon_xc is the authoritative column; the potential is re-derived with
    the standard differencing so every source (emulated, hardware, BALDA)
    follows the same code path.  Closed-form sources (HF, pseudo) are
    rehydrated from metadata.
    """
    header, columns, rows = read_functional_document(path)
    if columns != _COLUMNS:
        raise FunctionalFileError(f"expected columns {' '.join(_COLUMNS)}")
    source, shape, L, t, u, depth = _parse_common_header(header)
    provenance = header.get("provenance")

    if len(rows) != 2 * L + 1:
        raise FunctionalFileError(
            f"expected {2 * L + 1} grid rows for shape {header['shape']}, got {len(rows)}"
        )
    data = np.empty((len(rows), 4))
    for k, row in enumerate(rows):
        if len(row) not in (4, 5):
            raise FunctionalFileError(f"data row {k}: expected 4 or 5 fields, got {len(row)}")
        if int(row[0]) != k:
            raise FunctionalFileError(f"data row {k}: fillings must be consecutive from 0")
        vals = [float(x) for x in row[1:]]
        if len(vals) == 3:
            vals.append(float("nan"))  # v_xc optional on import
        data[k] = vals
    grid, e_total, eps_xc = data[:, 0], data[:, 1], data[:, 2]
    if grid[0] != 0.0 or abs(grid[-1] - 2.0) > 1e-12 or np.any(np.diff(grid) <= 0):
        raise FunctionalFileError("grid must increase strictly from n = 0 to n = 2")
    grid[-1] = 2.0

    if source == "HF":
        return hf_functional(u, t, L)
    if source in ("PSEUDO_DFT", "PSEUDO_1D"):
        return pseudo_functional(source, u, grid_points=2 * L + 1, t=t)
    xc = FillingCurve(L=L, grid=grid, values=eps_xc, u=u, t=t,
                      source=source, kind="xc_energy", depth=depth)
    total = None if np.all(np.isnan(e_total)) else e_total
    return build_functional(xc, differentiate_xc(xc), provenance=provenance,
                            total_energy=total, generating_shape=shape)


def functional_error_norm(functional: XcFunctional, reference: XcFunctional):
    """log10 Frobenius norm of the potential-grid difference, or "exact".

    The comparison covers the discrete potential values on both pieces,
    including the two one-sided values at n = 1.
    """
    if not np.array_equal(functional.grid, reference.grid):
        raise ValueError("functionals were generated on different grids")
    diff = np.concatenate(
        [functional.v_left - reference.v_left, functional.v_right - reference.v_right]
    )
    norm = float(np.linalg.norm(diff))
    if norm < EXACT_NORM_THRESHOLD:
        return "exact"
    return float(np.log10(norm))
