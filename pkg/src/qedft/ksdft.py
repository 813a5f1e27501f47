"""Self-consistent Kohn-Sham loop for the lattice model.

Each iteration assembles the KS matrix (hopping plus the effective
potential v_ext + U n / 2 + V_xc(n)), diagonalizes it, rebuilds the density
from the occupied orbitals (two electrons per orbital), evaluates the total
energy, and linearly mixes the density for the next iteration:

    n_next = alpha * n_previous + (1 - alpha) * n_candidate.

Convergence is declared when successive energies differ by at most the
configured tolerance; the density-change trace is recorded alongside.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .functional import XcFunctional
from .hamiltonian import HubbardModel, single_particle_matrix
from .lattice import ExternalPotential

__all__ = [
    "KsConfig",
    "DftResult",
    "init_density",
    "build_ks_matrix",
    "density_from_eigenvectors",
    "mix_density",
    "dft_energy",
    "scf_solve",
]

FRONTIER_DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class KsConfig:
    alpha: float = 0.95
    max_iterations: int = 500
    tolerance: float = 1e-10
    init_rule: str = "proportional"

    def __post_init__(self):
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("mixing alpha must lie in [0, 1)")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.init_rule not in ("proportional", "uniform"):
            raise ValueError(f"unknown init rule {self.init_rule!r}")


@dataclass(frozen=True)
class DftResult:
    density: np.ndarray
    energy: float
    converged: bool
    iterations: int
    energy_trace: np.ndarray
    density_change_trace: np.ndarray
    eigenvalues: np.ndarray
    ne: int
    clamp_count: int
    frontier_degenerate_iterations: int
    max_particle_violation: float


def _capped_normalize(weights: np.ndarray, ne: int) -> np.ndarray:
    """Scale non-negative weights to sum Ne without any site exceeding 2."""
    n = np.zeros_like(weights)
    free = weights > 0
    remaining = float(ne)
    for _ in range(len(weights)):
        if remaining <= 0 or not np.any(free):
            break
        scaled = weights * (remaining / weights[free].sum())
        over = free & (scaled >= 2.0)
        if not np.any(over):
            n[free] = scaled[free]
            return n
        n[over] = 2.0
        remaining -= 2.0 * int(np.count_nonzero(over))
        free = free & ~over
        weights = np.where(free, weights, 0.0)
    if remaining > 1e-12 and not np.any(free):
        raise ValueError(f"cannot place {ne} electrons on this lattice")
    return n


def init_density(potential: ExternalPotential | np.ndarray, ne: int, rule: str, L: int | None = None) -> np.ndarray:
    """Starting density: uniform Ne/L, or weighted by max(v) - v + offset so
    high-potential sites start depleted.  A flat potential falls back to uniform.
    """
    v = potential.values if isinstance(potential, ExternalPotential) else np.asarray(potential, float)
    L = len(v) if L is None else L
    if ne % 2 != 0:
        raise ValueError("the spin-unpolarized KS loop requires an even electron count")
    if not 0 <= ne <= 2 * L:
        raise ValueError(f"Ne = {ne} outside 0..2L for L = {L}")
    if rule == "uniform" or np.ptp(v) == 0.0:
        return np.full(L, ne / L)
    if rule != "proportional":
        raise ValueError(f"unknown init rule {rule!r}")
    weights = (v.max() - v) + np.ptp(v) / L
    return _capped_normalize(weights, ne)


def build_ks_matrix(model: HubbardModel, density: np.ndarray, functional: XcFunctional) -> np.ndarray:
    """KS matrix: -t on lattice edges, diagonal v_i + (U/2) n_i + V_xc(n_i)."""
    n = np.asarray(density, dtype=float)
    if len(n) != model.num_sites:
        raise ValueError("density length does not match the lattice")
    n = np.clip(n, 0.0, 2.0)
    h = single_particle_matrix(model.lattice, model.t, model.potential)
    h[np.diag_indices_from(h)] += 0.5 * model.u * n + functional.potential(n)
    return h


def density_from_eigenvectors(eigenvalues: np.ndarray, eigenvectors: np.ndarray, ne: int):
    """n_i = 2 sum_(j occupied) |phi_j(i)|^2, eigenvalues ascending.

    A degenerate frontier orbital is split symmetrically across the
    degenerate pair; returns (density, frontier_was_degenerate).
    """
    if ne % 2 != 0:
        raise ValueError("occupations assume doubly filled orbitals (even Ne)")
    occ = ne // 2
    L = eigenvectors.shape[0]
    if occ == 0:
        return np.zeros(L), False
    degenerate = occ < L and abs(eigenvalues[occ] - eigenvalues[occ - 1]) < FRONTIER_DEGENERACY_TOL
    if degenerate:
        filled = 2.0 * np.sum(np.abs(eigenvectors[:, : occ - 1]) ** 2, axis=1)
        pair = np.abs(eigenvectors[:, occ - 1]) ** 2 + np.abs(eigenvectors[:, occ]) ** 2
        return filled + pair, True
    return 2.0 * np.sum(np.abs(eigenvectors[:, :occ]) ** 2, axis=1), False


def mix_density(previous: np.ndarray, candidate: np.ndarray, alpha: float) -> np.ndarray:
    """Linear mixing alpha * previous + (1 - alpha) * candidate."""
    previous = np.asarray(previous, dtype=float)
    candidate = np.asarray(candidate, dtype=float)
    if previous.shape != candidate.shape:
        raise ValueError("density vectors have different lengths")
    if abs(previous.sum() - candidate.sum()) > 1e-9:
        raise ValueError(
            f"particle sums differ: {previous.sum()!r} vs {candidate.sum()!r}"
        )
    return alpha * previous + (1.0 - alpha) * candidate


def dft_energy(
    eigenvalues: np.ndarray,
    density: np.ndarray,
    functional: XcFunctional,
    model: HubbardModel,
    ne: int | None = None,
) -> float:
    """Total energy: band sum minus double counting,

        E = 2 sum_occ eps - sum_i V_xc(n_i) n_i - (U/4) sum_i n_i^2 + sum_i e_xc(n_i).
    """
    n = np.clip(np.asarray(density, dtype=float), 0.0, 2.0)
    if ne is None:
        ne = int(round(n.sum()))
    occ = ne // 2
    band = 2.0 * float(np.sum(eigenvalues[:occ]))
    vxc = functional.potential(n)
    exc = functional.energy(n)
    return band - float(np.dot(vxc, n)) - 0.25 * model.u * float(np.dot(n, n)) + float(np.sum(exc))


def scf_solve(
    model: HubbardModel,
    functional: XcFunctional,
    ne: int,
    config: KsConfig = KsConfig(),
) -> DftResult:
    """Run the KS loop to self-consistency or the iteration cap.

    The reported density and energy are the KS outputs of the final
    iteration (mixing only stabilizes the walk between iterations).
    Non-convergence is flagged, never raised.
    """
    L = model.num_sites
    if ne % 2 != 0:
        raise ValueError("scf_solve requires an even electron count")
    if not 0 <= ne <= 2 * L:
        raise ValueError(f"Ne = {ne} outside 0..2L")
    n_work = init_density(model.potential, ne, config.init_rule, L)

    energy_trace: list[float] = []
    change_trace: list[float] = []
    clamps = 0
    degenerate_hits = 0
    max_violation = 0.0
    converged = False
    n_cand = n_work.copy()
    eigvals = np.zeros(L)
    energy = 0.0

    for iteration in range(1, config.max_iterations + 1):
        clipped = np.clip(n_work, 0.0, 2.0)
        clamps += int(np.count_nonzero(clipped != n_work))
        h = build_ks_matrix(model, clipped, functional)
        eigvals, eigvecs = np.linalg.eigh(h)
        n_cand, degenerate = density_from_eigenvectors(eigvals, eigvecs, ne)
        degenerate_hits += int(degenerate)
        energy = dft_energy(eigvals, n_cand, functional, model, ne)
        energy_trace.append(energy)

        violation = abs(float(n_cand.sum()) - ne)
        max_violation = max(max_violation, violation)
        if violation > 1e-6:
            raise RuntimeError(
                f"particle conservation broke at iteration {iteration}: sum = {n_cand.sum()!r}"
            )

        mixed = mix_density(n_work, n_cand, config.alpha)
        change_trace.append(float(np.linalg.norm(mixed - n_work)))
        n_work = mixed
        if len(energy_trace) >= 2 and abs(energy_trace[-1] - energy_trace[-2]) <= config.tolerance:
            converged = True
            break

    return DftResult(
        density=n_cand,
        energy=energy,
        converged=converged,
        iterations=len(energy_trace),
        energy_trace=np.array(energy_trace),
        density_change_trace=np.array(change_trace),
        eigenvalues=eigvals,
        ne=ne,
        clamp_count=clamps,
        frontier_degenerate_iterations=degenerate_hits,
        max_particle_violation=max_violation,
    )
