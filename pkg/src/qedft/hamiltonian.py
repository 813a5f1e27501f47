"""Fermi-Hubbard Hamiltonians in fixed (N_up, N_down) sectors.

The Hamiltonian is

    H = -t sum_<ij>,s (c+_is c_js + h.c.) + U sum_i n_iu n_id + sum_i v_i n_i

on an open-boundary SiteGraph.  Number sectors are enumerated as pairs of
occupation bitmasks (bit i = site i occupied), and all solvers work in the
factored representation: a sector state is a (D_up, D_down) array acted on
by per-spin hopping operators on rows/columns plus diagonal terms.  Hopping
matrix elements carry the fermionic sign (-1)^(occupied sites strictly
between i and j), consistent with configurations written as ascending
products of creation operators.

A Jordan-Wigner qubit encoding is provided for cross-checking the sector
spectra on small lattices (spin-orbital order: all up orbitals in snake
order, then all down).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np
import scipy.sparse as sp

from .lattice import ExternalPotential, SiteGraph, zero_potential

__all__ = [
    "HubbardModel",
    "SectorBasis",
    "SectorOperator",
    "PauliHamiltonian",
    "build_sector_basis",
    "assemble_sector_matrix",
    "single_particle_matrix",
    "jordan_wigner_encode",
    "pauli_matrix",
    "dimer_compressed_hamiltonian",
]


@dataclass(frozen=True)
class HubbardModel:
    """Lattice + couplings; the object every solver consumes.  Energies in units of t."""

    lattice: SiteGraph
    t: float = 1.0
    u: float = 0.0
    potential: ExternalPotential | None = None

    def __post_init__(self):
        if not (np.isfinite(self.t) and self.t > 0):
            raise ValueError(f"hopping t must be positive and finite, got {self.t}")
        if not np.isfinite(self.u):
            raise ValueError("interaction U must be finite")
        if self.potential is None:
            object.__setattr__(self, "potential", zero_potential(self.lattice))
        if len(self.potential.values) != self.lattice.num_sites:
            raise ValueError("potential length does not match lattice size")

    @property
    def num_sites(self) -> int:
        return self.lattice.num_sites

    @property
    def is_homogeneous(self) -> bool:
        return self.potential.is_zero

    def homogeneous(self) -> "HubbardModel":
        return HubbardModel(lattice=self.lattice, t=self.t, u=self.u)


def _occupation_sites(configs: np.ndarray, L: int, count: int) -> np.ndarray:
    """(D, count) array of occupied site indices, ascending, per configuration."""
    out = np.empty((len(configs), count), dtype=np.int64)
    for a, c in enumerate(configs):
        out[a] = [i for i in range(L) if (int(c) >> i) & 1]
    return out


@dataclass(frozen=True)
class SectorBasis:
    """All occupation configurations with fixed particle numbers per spin.

    Configurations are bitmask integers sorted ascending; the composite
    sector index of (a, b) is a * dim_down + b (C-order of the
    (D_up, D_down) array).
    """

    L: int
    n_up: int
    n_down: int
    up_configs: np.ndarray
    down_configs: np.ndarray

    @property
    def dim_up(self) -> int:
        return len(self.up_configs)

    @property
    def dim_down(self) -> int:
        return len(self.down_configs)

    @property
    def dimension(self) -> int:
        return self.dim_up * self.dim_down

    def up_sites(self) -> np.ndarray:
        return _occupation_sites(self.up_configs, self.L, self.n_up)

    def down_sites(self) -> np.ndarray:
        return _occupation_sites(self.down_configs, self.L, self.n_down)


def _spin_configs(L: int, n: int) -> np.ndarray:
    masks = []
    for sites in combinations(range(L), n):
        m = 0
        for i in sites:
            m |= 1 << i
        masks.append(m)
    return np.array(sorted(masks), dtype=np.int64)


def build_sector_basis(L: int, n_up: int, n_down: int) -> SectorBasis:
    """Enumerate the (n_up, n_down) sector of an L-site lattice."""
    if not (0 <= n_up <= L and 0 <= n_down <= L):
        raise ValueError(f"particle counts ({n_up}, {n_down}) outside [0, {L}]")
    basis = SectorBasis(
        L=L,
        n_up=n_up,
        n_down=n_down,
        up_configs=_spin_configs(L, n_up),
        down_configs=_spin_configs(L, n_down),
    )
    assert basis.dimension == comb(L, n_up) * comb(L, n_down)
    return basis


def _between_mask(i: int, j: int) -> int:
    lo, hi = (i, j) if i < j else (j, i)
    return ((1 << hi) - 1) ^ ((1 << (lo + 1)) - 1)


def hop_pairs(configs: np.ndarray, i: int, j: int):
    """Index pairs (a, b) with configs[b] = configs[a] with one fermion moved
    between sites i and j, plus the fermionic sign of the move.

    Each unordered pair is returned once (a < b as config values); signs are
    symmetric because the occupations strictly between i and j agree.
    """
    occ_i = (configs >> i) & 1
    occ_j = (configs >> j) & 1
    movable = occ_i != occ_j
    src = np.nonzero(movable & (occ_i == 1))[0]  # particle at i, hole at j
    flip = np.int64((1 << i) | (1 << j))
    partners = configs[src] ^ flip
    dst = np.searchsorted(configs, partners)
    between = np.int64(_between_mask(i, j))
    parity = np.bitwise_count(configs[src] & between).astype(np.int64)
    signs = 1.0 - 2.0 * (parity % 2)
    return src, dst, signs


def spin_hopping_operator(configs: np.ndarray, edges) -> sp.csr_matrix:
    """Sparse matrix of sum_<ij> (c+_i c_j + c+_j c_i) for one spin species."""
    D = len(configs)
    rows, cols, vals = [], [], []
    for (i, j) in edges:
        a, b, s = hop_pairs(configs, i, j)
        rows.extend([a, b])
        cols.extend([b, a])
        vals.extend([s, s])
    if rows:
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
    return sp.csr_matrix((vals, (rows, cols)), shape=(D, D))


def _potential_per_spin(configs: np.ndarray, L: int, v: np.ndarray) -> np.ndarray:
    occ = ((configs[:, None] >> np.arange(L)[None, :]) & 1).astype(float)
    return occ @ v


class SectorOperator:
    """Factored sector Hamiltonian H = -t (K_up x I + I x K_down) + diag(W).

    W[a, b] = U * doubly_occupied(a, b) + v.(occ_up[a] + occ_down[b]); states
    are (dim_up, dim_down) arrays.  Shared, immutable after construction.
    """

    def __init__(self, model: HubbardModel, basis: SectorBasis):
        if basis.L != model.num_sites:
            raise ValueError("sector basis was built for a different lattice size")
        self.model = model
        self.basis = basis
        edges = model.lattice.edges
        self.k_up = spin_hopping_operator(basis.up_configs, edges)
        self.k_down = spin_hopping_operator(basis.down_configs, edges)
        self.double_occ = np.bitwise_count(
            basis.up_configs[:, None] & basis.down_configs[None, :]
        ).astype(np.int8)
        v = model.potential.values
        self.v_up = _potential_per_spin(basis.up_configs, basis.L, v)
        self.v_down = _potential_per_spin(basis.down_configs, basis.L, v)
        self.diag = (
            model.u * self.double_occ + self.v_up[:, None] + self.v_down[None, :]
        )
        # one-hot site occupations, used for density measurements
        self._occ_up = ((basis.up_configs[:, None] >> np.arange(basis.L)[None, :]) & 1).astype(float)
        self._occ_down = ((basis.down_configs[:, None] >> np.arange(basis.L)[None, :]) & 1).astype(float)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @property
    def shape2d(self) -> tuple[int, int]:
        return (self.basis.dim_up, self.basis.dim_down)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """H @ psi for psi of shape (dim_up, dim_down)."""
        t = self.model.t
        out = self.diag * psi
        out -= t * (self.k_up @ psi)
        out -= t * (self.k_down @ psi.T).T
        return out

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.apply(x.reshape(self.shape2d)).ravel()

    def linear_operator(self) -> sp.linalg.LinearOperator:
        D = self.dimension
        return sp.linalg.LinearOperator((D, D), matvec=self.matvec, dtype=float)

    def dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def to_sparse(self) -> sp.csr_matrix:
        du, dd = self.shape2d
        h = sp.kron(-self.model.t * self.k_up, sp.identity(dd, format="csr"), format="csr")
        h += sp.kron(sp.identity(du, format="csr"), -self.model.t * self.k_down, format="csr")
        h += sp.diags(self.diag.ravel())
        return sp.csr_matrix(h)

    def energy(self, psi: np.ndarray) -> float:
        return float(np.real(np.vdot(psi, self.apply(psi))))

    def site_densities(self, psi: np.ndarray) -> np.ndarray:
        """n_i = n_iu + n_id measured in the (normalized) state psi."""
        w = np.abs(psi) ** 2
        n_up = w.sum(axis=1) @ self._occ_up
        n_down = w.sum(axis=0) @ self._occ_down
        return n_up + n_down


def assemble_sector_matrix(model: HubbardModel, basis: SectorBasis) -> sp.csr_matrix:
    """Sparse, real-symmetric sector Hamiltonian matrix."""
    return SectorOperator(model, basis).to_sparse()


def single_particle_matrix(
    lattice: SiteGraph, t: float, potential: ExternalPotential | None = None
) -> np.ndarray:
    """L x L one-body matrix: -t on edges plus the external potential diagonal."""
    L = lattice.num_sites
    h = np.zeros((L, L))
    for (i, j) in lattice.edges:
        h[i, j] = h[j, i] = -t
    if potential is not None:
        h[np.diag_indices(L)] += potential.values
    return h


# --- Jordan-Wigner encoding (verification path, small L) --------------------


@dataclass(frozen=True)
class PauliHamiltonian:
    """Real-weighted Pauli-string operator on M = 2L qubits."""

    num_qubits: int
    terms: tuple[tuple[float, str], ...]

    def __post_init__(self):
        for _, p in self.terms:
            if len(p) != self.num_qubits or any(ch not in "IXYZ" for ch in p):
                raise ValueError(f"malformed Pauli string {p!r}")


class _PauliAccumulator:
    def __init__(self, num_qubits: int):
        self.m = num_qubits
        self.coeffs: dict[str, float] = {}

    def add(self, coeff: float, ops: dict[int, str]):
        s = "".join(ops.get(q, "I") for q in range(self.m))
        self.coeffs[s] = self.coeffs.get(s, 0.0) + coeff

    def build(self) -> PauliHamiltonian:
        terms = tuple(
            (c, s) for s, c in sorted(self.coeffs.items()) if abs(c) > 0.0
        )
        return PauliHamiltonian(num_qubits=self.m, terms=terms)


def jordan_wigner_encode(model: HubbardModel) -> PauliHamiltonian:
    """Map the model onto qubits: hopping -> (XX + YY)/2 with a Z parity
    string, density products -> (I - Z)(I - Z)/4, densities -> (I - Z)/2.

    Spin-orbital q is site q (up spins) or L + site (down spins), sites in
    the lattice's snake order.
    """
    L = model.num_sites
    acc = _PauliAccumulator(2 * L)
    for (i, j) in model.lattice.edges:
        for q_i, q_j in ((i, j), (L + i, L + j)):
            lo, hi = min(q_i, q_j), max(q_i, q_j)
            zstring = {q: "Z" for q in range(lo + 1, hi)}
            acc.add(-model.t * 0.5, {lo: "X", hi: "X", **zstring})
            acc.add(-model.t * 0.5, {lo: "Y", hi: "Y", **zstring})
    for i in range(L):
        a, b = i, L + i
        acc.add(model.u * 0.25, {})
        acc.add(-model.u * 0.25, {a: "Z"})
        acc.add(-model.u * 0.25, {b: "Z"})
        acc.add(model.u * 0.25, {a: "Z", b: "Z"})
    v = model.potential.values
    for i in range(L):
        for q in (i, L + i):
            acc.add(v[i] * 0.5, {})
            acc.add(-v[i] * 0.5, {q: "Z"})
    return acc.build()


_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(h: PauliHamiltonian) -> np.ndarray:
    """Dense 2^M matrix of a Pauli Hamiltonian (qubit 0 = leftmost factor)."""
    dim = 2**h.num_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for coeff, string in h.terms:
        op = np.array([[1.0 + 0j]])
        for ch in string:
            op = np.kron(op, _PAULI_1Q[ch])
        out += coeff * op
    return out


def dimer_compressed_hamiltonian(t: float, u: float) -> np.ndarray:
    """Two-qubit matrix -t (X@I + I@X) + (U/2)(I + Z@Z) for the half-filled dimer.

    Its lowest eigenvalue equals the (1, 1)-sector ground energy of the
    two-site model.
    """
    x = _PAULI_1Q["X"]
    z = _PAULI_1Q["Z"]
    eye = np.eye(2)
    h = -t * (np.kron(x, eye) + np.kron(eye, x))
    h += 0.5 * u * (np.eye(4) + np.kron(z, z))
    return np.real_if_close(h).astype(float)
