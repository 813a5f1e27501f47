"""Error metrics against a reference solution."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["MetricsReport", "compute_metrics", "mott_plateau_run"]


@dataclass(frozen=True)
class MetricsReport:
    """Frobenius density error, absolute energy error, per-site percent errors.

    delta_n = sqrt(sum_i |n_i - n_i_ref|^2);  delta_e = |E - E_ref|.
    Per-site entries are |n_i - n_ref_i| / n_ref_i, NaN where the reference
    density vanishes (excluded from the aggregates by construction).
    """

    delta_n: float
    delta_e: float
    per_site: np.ndarray
    reference_tag: str
    energy: float
    reference_energy: float

    def as_dict(self) -> dict:
        return {
            "delta_n": self.delta_n,
            "delta_e": self.delta_e,
            "reference": self.reference_tag,
            "energy": self.energy,
            "reference_energy": self.reference_energy,
            "per_site_percent_error": [None if np.isnan(x) else x for x in self.per_site],
        }


def compute_metrics(
    density: np.ndarray,
    energy: float,
    reference_density: np.ndarray,
    reference_energy: float,
    reference_tag: str,
) -> MetricsReport:
    density = np.asarray(density, dtype=float)
    reference_density = np.asarray(reference_density, dtype=float)
    if density.shape != reference_density.shape:
        raise ValueError(
            f"density shapes differ: {density.shape} vs {reference_density.shape}"
        )
    diff = density - reference_density
    delta_n = float(np.sqrt(np.sum(diff**2)))
    delta_e = float(abs(energy - reference_energy))
    with np.errstate(divide="ignore", invalid="ignore"):
        per_site = np.where(
            reference_density > 0.0, np.abs(diff) / reference_density, np.nan
        )
    return MetricsReport(
        delta_n=delta_n,
        delta_e=delta_e,
        per_site=per_site,
        reference_tag=reference_tag,
        energy=float(energy),
        reference_energy=float(reference_energy),
    )


def mott_plateau_run(
    density: np.ndarray, threshold: float = 0.01, central_fraction: float = 0.5
) -> int:
    """Longest contiguous run of central sites with |n_i - 1| < threshold.

    The window is the central ``central_fraction`` of the chain, the testable
    proxy for a visually flat region pinned at unit density.
    """
    n = np.asarray(density, dtype=float)
    L = len(n)
    margin = int(round(L * (1.0 - central_fraction) / 2.0))
    window = n[margin : L - margin] if L - 2 * margin > 0 else n
    flat = np.abs(window - 1.0) < threshold
    best = run = 0
    for hit in flat:
        run = run + 1 if hit else 0
        best = max(best, run)
    return best
