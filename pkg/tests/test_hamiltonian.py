import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qedft.exact import ed_ground_state
from qedft.hamiltonian import (
    HubbardModel,
    SectorOperator,
    assemble_sector_matrix,
    build_sector_basis,
    dimer_compressed_hamiltonian,
    jordan_wigner_encode,
    pauli_matrix,
    single_particle_matrix,
)
from qedft.lattice import Disorder, SiteGraph, build_potential, chain, grid


def dimer_ground_energy(t, u):
    return u / 2.0 - np.sqrt((u / 2.0) ** 2 + 4.0 * t**2)


def test_sector_dimensions():
    assert build_sector_basis(2, 1, 1).dimension == 4
    assert build_sector_basis(12, 3, 3).dimension == 48_400
    assert build_sector_basis(12, 6, 6).dimension == 853_776


def test_counts_exceeding_sites_rejected():
    with pytest.raises(ValueError):
        build_sector_basis(4, 5, 0)


def test_dimer_sector_matrix_against_hand_built_oracle():
    # basis over (up, down) bitmask pairs, ascending: (1,1) (1,2) (2,1) (2,2)
    u = 4.0
    oracle = np.array(
        [
            [u, -1.0, -1.0, 0.0],
            [-1.0, 0.0, 0.0, -1.0],
            [-1.0, 0.0, 0.0, -1.0],
            [0.0, -1.0, -1.0, u],
        ]
    )
    model = HubbardModel(lattice=chain(2), t=1.0, u=u)
    h = assemble_sector_matrix(model, build_sector_basis(2, 1, 1)).toarray()
    assert np.array_equal(h, oracle)
    assert np.linalg.eigvalsh(h)[0] == pytest.approx(dimer_ground_energy(1.0, u), abs=1e-12)


def test_dimer_free_ground_energy():
    model = HubbardModel(lattice=chain(2), t=1.0, u=0.0)
    h = assemble_sector_matrix(model, build_sector_basis(2, 1, 1)).toarray()
    assert np.linalg.eigvalsh(h)[0] == pytest.approx(-2.0, abs=1e-12)


@given(
    st.integers(min_value=2, max_value=5),
    st.floats(min_value=0.0, max_value=8.0),
    st.integers(min_value=0, max_value=3),
)
@settings(max_examples=25, deadline=None)
def test_sector_matrix_is_exactly_symmetric(length, u, seed):
    lattice = chain(length)
    pot = build_potential(Disorder(seed=seed, amplitude=0.7), lattice)
    model = HubbardModel(lattice=lattice, t=1.0, u=u, potential=pot)
    n_up = min(2, length)
    h = assemble_sector_matrix(model, build_sector_basis(length, n_up, 1)).toarray()
    assert np.array_equal(h, h.T)


def test_jordan_wigner_hopping_and_interaction_terms():
    model = HubbardModel(lattice=chain(2), t=1.0, u=4.0)
    terms = dict((s, c) for c, s in jordan_wigner_encode(model).terms)
    # hopping: -t/2 on XX and YY for each spin block (no Z string for adjacent sites)
    assert terms["XXII"] == pytest.approx(-0.5)
    assert terms["YYII"] == pytest.approx(-0.5)
    assert terms["IIXX"] == pytest.approx(-0.5)
    assert terms["IIYY"] == pytest.approx(-0.5)
    # density-density: U/4 (I - Z_up)(I - Z_down) per site
    assert terms["ZIZI"] == pytest.approx(1.0)
    assert terms["IZIZ"] == pytest.approx(1.0)
    assert terms["ZIII"] == pytest.approx(-1.0)
    assert terms["IIZI"] == pytest.approx(-1.0)
    assert terms["IIII"] == pytest.approx(2.0)


def test_jordan_wigner_z_string_on_longer_range_orbital_pairs():
    # snake-ordered 2x2 grid has the edge (0, 3); its string crosses orbitals 1, 2
    model = HubbardModel(lattice=grid(2, 2), t=1.0, u=0.0)
    terms = dict((s, c) for c, s in jordan_wigner_encode(model).terms)
    assert terms["XZZXIIII"] == pytest.approx(-0.5)
    assert terms["YZZYIIII"] == pytest.approx(-0.5)


def _sector_indices(num_sites, n_up, n_down):
    m = 2 * num_sites
    idx = []
    for b in range(2**m):
        ups = sum((b >> (m - 1 - q)) & 1 for q in range(num_sites))
        downs = sum((b >> (m - 1 - q)) & 1 for q in range(num_sites, m))
        if ups == n_up and downs == n_down:
            idx.append(b)
    return idx


@pytest.mark.parametrize("length", [2, 3])
def test_jordan_wigner_matches_fermionic_spectra(length):
    lattice = chain(length)
    pot = build_potential(Disorder(seed=7, amplitude=0.5), lattice)
    model = HubbardModel(lattice=lattice, t=1.0, u=4.0, potential=pot)
    hq = pauli_matrix(jordan_wigner_encode(model))
    assert np.allclose(hq, hq.conj().T)
    for n_up in range(length + 1):
        for n_down in range(length + 1):
            basis = build_sector_basis(length, n_up, n_down)
            ferm = np.linalg.eigvalsh(assemble_sector_matrix(model, basis).toarray())
            idx = _sector_indices(length, n_up, n_down)
            qubit = np.linalg.eigvalsh(hq[np.ix_(idx, idx)])
            assert np.max(np.abs(np.sort(ferm) - np.sort(qubit.real))) < 1e-10


def test_compressed_dimer_free_spectrum():
    h = dimer_compressed_hamiltonian(1.0, 0.0)
    assert np.allclose(np.linalg.eigvalsh(h), [-2.0, 0.0, 0.0, 2.0])


def test_compressed_dimer_matches_sector_ground_energy():
    for u in (0.0, 1.0, 4.0, 7.5):
        h = dimer_compressed_hamiltonian(1.0, u)
        assert np.linalg.eigvalsh(h)[0] == pytest.approx(dimer_ground_energy(1.0, u), abs=1e-12)


def test_compressed_dimer_mott_limit():
    lowest = np.linalg.eigvalsh(dimer_compressed_hamiltonian(1.0, 1e7))[0]
    assert -1e-6 < lowest < 0.0


@pytest.mark.parametrize("length", [2, 3, 4])
def test_particle_hole_relation_at_zero_potential(length):
    model = HubbardModel(lattice=chain(length), t=1.0, u=3.0)
    for n_up in range(length + 1):
        for n_down in range(n_up + 1):
            e = ed_ground_state(model, n_up, n_down).energy
            e_mirror = ed_ground_state(model, length - n_up, length - n_down).energy
            ne = n_up + n_down
            assert e == pytest.approx(e_mirror + model.u * (ne - length), abs=1e-9)


def test_extra_hopping_path_never_raises_ground_energy():
    full = chain(6)
    cut_edges = tuple(e for e in full.edges if e != (2, 3))
    cut = SiteGraph(shape=full.shape, num_sites=6, coords=full.coords, edges=cut_edges)
    m_full = HubbardModel(lattice=full, t=1.0, u=4.0)
    m_cut = HubbardModel(lattice=cut, t=1.0, u=4.0)
    e_full = ed_ground_state(m_full, 3, 3).energy
    e_cut = ed_ground_state(m_cut, 3, 3).energy
    assert e_full <= e_cut + 1e-12


def test_single_particle_matrix_layout():
    lattice = chain(4)
    pot = build_potential(Disorder(seed=3, amplitude=1.0), lattice)
    h = single_particle_matrix(lattice, 2.0, pot)
    assert np.array_equal(np.diag(h), pot.values)
    assert h[0, 1] == h[1, 0] == -2.0
    assert h[0, 2] == 0.0


def test_sector_operator_dense_agrees_with_sparse():
    model = HubbardModel(lattice=grid(2, 3), t=1.0, u=2.5)
    basis = build_sector_basis(6, 2, 1)
    op = SectorOperator(model, basis)
    dense = op.dense()
    x = np.random.default_rng(0).standard_normal(basis.dimension)
    assert np.allclose(op.matvec(x), dense @ x, atol=1e-12)
