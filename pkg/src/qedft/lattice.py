"""Lattice geometries and external potential fields.

Open-boundary 1D chains and 2D rectangular grids with snake site ordering
(row-major, alternating direction).  All builders are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SiteGraph",
    "ExternalPotential",
    "chain",
    "grid",
    "build_lattice",
    "build_potential",
    "NoPotential",
    "Quadratic",
    "Impurity",
    "Disorder",
    "Composite",
]


@dataclass(frozen=True)
class SiteGraph:
    """An ordered set of lattice sites with a nearest-neighbour edge list.

    Sites are indexed 0..L-1 in snake order.  ``coords[s]`` gives the
    (row, col) grid position of site s; for chains row is always 0.
    Edges are undirected, stored once each as (a, b) with a < b.
    """

    shape: tuple[int, int]
    num_sites: int
    coords: tuple[tuple[int, int], ...]
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.num_sites < 2:
            raise ValueError(f"lattice needs at least 2 sites, got {self.num_sites}")

    @property
    def is_chain(self) -> bool:
        return self.shape[0] == 1 or self.shape[1] == 1


def _snake_index(row: int, col: int, ncols: int) -> int:
    # row-major, odd rows traversed right-to-left
    if row % 2 == 0:
        return row * ncols + col
    return row * ncols + (ncols - 1 - col)


def grid(nrows: int, ncols: int) -> SiteGraph:
    """Open-boundary rectangular lattice with snake site enumeration."""
    if nrows < 1 or ncols < 1 or nrows * ncols < 2:
        raise ValueError(f"invalid grid shape ({nrows}, {ncols})")
    L = nrows * ncols
    coords = [(0, 0)] * L
    for r in range(nrows):
        for c in range(ncols):
            coords[_snake_index(r, c, ncols)] = (r, c)
    edges = set()
    for r in range(nrows):
        for c in range(ncols):
            s = _snake_index(r, c, ncols)
            if c + 1 < ncols:
                s2 = _snake_index(r, c + 1, ncols)
                edges.add((min(s, s2), max(s, s2)))
            if r + 1 < nrows:
                s2 = _snake_index(r + 1, c, ncols)
                edges.add((min(s, s2), max(s, s2)))
    return SiteGraph(
        shape=(nrows, ncols),
        num_sites=L,
        coords=tuple(coords),
        edges=tuple(sorted(edges)),
    )


def chain(length: int) -> SiteGraph:
    """Open 1D chain of the given length."""
    return grid(1, length)


def build_lattice(shape) -> SiteGraph:
    """Build a SiteGraph from an int (chain length) or an (nrows, ncols) pair."""
    if isinstance(shape, SiteGraph):
        return shape
    if isinstance(shape, (int, np.integer)):
        return chain(int(shape))
    nrows, ncols = shape
    return grid(int(nrows), int(ncols))


# --- potential descriptors ------------------------------------------------


@dataclass(frozen=True)
class NoPotential:
    kind: str = field(default="none", init=False)


@dataclass(frozen=True)
class Quadratic:
    """v_s = scale * d(s, center)^2.

    On chains d is the signed site-index offset i - center.  On 2D grids d
    is the Euclidean distance of the (row, col) coordinate from ``center``
    (a (row, col) pair).  Site indices are 0-based.
    """

    center: float | tuple[float, float]
    scale: float
    kind: str = field(default="quadratic", init=False)


@dataclass(frozen=True)
class Impurity:
    sites: tuple[int, ...]
    strength: float
    kind: str = field(default="impurity", init=False)


@dataclass(frozen=True)
class Disorder:
    """Uniform on [-amplitude, +amplitude] per site, from a seeded generator."""

    seed: int
    amplitude: float
    kind: str = field(default="disorder", init=False)


@dataclass(frozen=True)
class Composite:
    parts: tuple
    kind: str = field(default="composite", init=False)


PotentialDescriptor = NoPotential | Quadratic | Impurity | Disorder | Composite


@dataclass(frozen=True)
class ExternalPotential:
    """Per-site potential values (units of t) plus the descriptor that made them."""

    values: np.ndarray
    descriptor: PotentialDescriptor

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("potential contains non-finite entries")
        object.__setattr__(self, "values", v)

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.values == 0.0))


def _descriptor_values(descriptor, lattice: SiteGraph) -> np.ndarray:
    L = lattice.num_sites
    if isinstance(descriptor, NoPotential):
        return np.zeros(L)
    if isinstance(descriptor, Quadratic):
        if not np.all(np.isfinite(np.atleast_1d(descriptor.center))) or not np.isfinite(
            descriptor.scale
        ):
            raise ValueError("quadratic potential parameters must be finite")
        if lattice.is_chain:
            if not np.isscalar(descriptor.center):
                raise ValueError("chain quadratic potential takes a scalar center")
            i = np.arange(L, dtype=float)
            return descriptor.scale * (i - float(descriptor.center)) ** 2
        cr, cc = descriptor.center
        coords = np.asarray(lattice.coords, dtype=float)
        d2 = (coords[:, 0] - cr) ** 2 + (coords[:, 1] - cc) ** 2
        return descriptor.scale * d2
    if isinstance(descriptor, Impurity):
        v = np.zeros(L)
        for s in descriptor.sites:
            if not 0 <= s < L:
                raise ValueError(f"impurity site {s} outside lattice of {L} sites")
            v[s] = descriptor.strength
        return v
    if isinstance(descriptor, Disorder):
        if descriptor.amplitude < 0:
            raise ValueError("disorder amplitude must be non-negative")
        rng = np.random.default_rng(descriptor.seed)
        return rng.uniform(-descriptor.amplitude, descriptor.amplitude, size=L)
    if isinstance(descriptor, Composite):
        v = np.zeros(L)
        for part in descriptor.parts:
            v += _descriptor_values(part, lattice)
        return v
    raise TypeError(f"unknown potential descriptor {descriptor!r}")


def build_potential(descriptor: PotentialDescriptor, lattice: SiteGraph) -> ExternalPotential:
    """Evaluate a potential descriptor on every site of the lattice."""
    return ExternalPotential(values=_descriptor_values(descriptor, lattice), descriptor=descriptor)


def zero_potential(lattice: SiteGraph) -> ExternalPotential:
    return build_potential(NoPotential(), lattice)
