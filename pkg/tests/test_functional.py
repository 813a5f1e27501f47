import numpy as np
import pytest

from qedft.exact import ed_filling_scan
from qedft.functional import (
    FillingCurve,
    FunctionalFileError,
    balda_beta,
    balda_functional,
    balda_homogeneous_energy,
    build_functional,
    differentiate_xc,
    functional_error_norm,
    functional_from_scan,
    hf_functional,
    hf_reference_curve,
    lieb_wu_energy,
    load_functional,
    pseudo_functional,
    qelda_curve,
    save_functional,
    xc_curve,
)
from qedft.hamiltonian import HubbardModel
from qedft.lattice import chain


@pytest.fixture(scope="module")
def dimer_scan():
    return ed_filling_scan(HubbardModel(lattice=chain(2), t=1.0, u=4.0))


@pytest.fixture(scope="module")
def dimer_functional(dimer_scan):
    return functional_from_scan(dimer_scan, 2)


def synthetic_xc(L, values, u=4.0):
    return FillingCurve.on_filling_grid(L=L, values=values, u=u, t=1.0,
                                        source="ED", kind="xc_energy")


def test_filling_curve_validation():
    with pytest.raises(ValueError):
        FillingCurve.on_filling_grid(L=4, values=np.ones(9), u=1.0, t=1.0, source="ED")
    with pytest.raises(ValueError):
        FillingCurve.on_filling_grid(L=4, values=np.zeros(7), u=1.0, t=1.0, source="ED")
    with pytest.raises(ValueError):
        FillingCurve.on_filling_grid(L=4, values=np.zeros(9), u=1.0, t=1.0, source="BAD")


def test_qelda_divides_by_system_size(dimer_scan):
    per_site = qelda_curve(dimer_scan)
    assert per_site.values[0] == 0.0
    assert per_site.values[2] == pytest.approx((2.0 - np.sqrt(8.0)) / 2.0, abs=1e-12)
    assert per_site.values[4] == pytest.approx(4.0, abs=1e-12)


def test_hf_reference_endpoints_and_half_filling():
    curve = hf_reference_curve(2, 1.0, 4.0)
    assert curve.values[0] == 0.0
    # dimer at n=1: kinetic 2*(-t)/2 plus Hartree U/4
    assert curve.values[2] == pytest.approx(0.0, abs=1e-12)
    assert curve.values[4] == pytest.approx(4.0, abs=1e-12)
    # filled-band kinetic energy of any open chain sums to zero
    curve8 = hf_reference_curve(8, 1.0, 6.0)
    assert curve8.values[16] == pytest.approx(6.0, abs=1e-10)


def test_xc_subtraction(dimer_scan):
    qelda = qelda_curve(dimer_scan)
    hf = hf_reference_curve(2, 1.0, 4.0)
    xc = xc_curve(qelda, hf)
    assert xc.values[0] == 0.0
    assert xc.values[4] == pytest.approx(0.0, abs=1e-12)
    assert xc.values[2] == pytest.approx((2.0 - np.sqrt(8.0)) / 2.0, abs=1e-12)


def test_xc_requires_matching_metadata(dimer_scan):
    qelda = qelda_curve(dimer_scan)
    with pytest.raises(ValueError):
        xc_curve(qelda, hf_reference_curve(2, 1.0, 2.0))
    with pytest.raises(ValueError):
        xc_curve(qelda, hf_reference_curve(4, 1.0, 4.0))


def test_zero_interaction_gives_identically_zero_xc():
    scan = ed_filling_scan(HubbardModel(lattice=chain(4), t=1.0, u=0.0))
    xc = xc_curve(qelda_curve(scan), hf_reference_curve(4, 1.0, 0.0))
    assert np.max(np.abs(xc.values)) <= 1e-8
    f = functional_from_scan(scan, 4)
    ns = np.linspace(0.0, 2.0, 101)
    assert np.max(np.abs(f.energy(ns))) <= 1e-8
    assert np.max(np.abs(f.potential(ns))) <= 1e-8


def test_derivative_exact_on_linear_curve():
    L = 6
    grid = np.arange(2 * L + 1) / L
    c = -0.7
    xc = synthetic_xc(L, c * grid)
    v = differentiate_xc(xc)
    assert v.left == pytest.approx([c] * (L + 1), abs=1e-12)
    assert v.right == pytest.approx([c] * (L + 1), abs=1e-12)


def test_derivative_exact_on_quadratic_curve():
    L, u = 6, 4.0
    grid = np.arange(2 * L + 1) / L
    xc = synthetic_xc(L, 0.25 * u * grid**2, u=u)
    v = differentiate_xc(xc)
    assert v.left == pytest.approx(0.5 * u * grid[: L + 1], abs=1e-10)
    assert v.right == pytest.approx(0.5 * u * grid[L:], abs=1e-10)
    assert v.discontinuity == pytest.approx(0.0, abs=1e-10)


def test_no_stencil_crosses_half_filling():
    # a kink at n = 1 must produce clean one-sided slopes on both pieces
    L = 6
    grid = np.arange(2 * L + 1) / L
    kinked = np.where(grid <= 1.0, -grid, grid - 2.0)
    v = differentiate_xc(synthetic_xc(L, kinked))
    assert v.left == pytest.approx([-1.0] * (L + 1), abs=1e-12)
    assert v.right == pytest.approx([1.0] * (L + 1), abs=1e-12)
    assert v.discontinuity == pytest.approx(2.0, abs=1e-12)


def test_dimer_functional_has_positive_discontinuity(dimer_functional):
    assert dimer_functional.discontinuity() > 0.0


def test_spline_reproduces_grid_nodes(dimer_functional):
    f = dimer_functional
    assert f.energy(f.grid) == pytest.approx(f.xc_values, abs=1e-10)
    L = f.L
    assert f.potential(f.grid[: L + 1]) == pytest.approx(f.v_left, abs=1e-10)
    # right-piece nodes, approached from above half filling
    right_nodes = f.grid[L + 1 :]
    assert f.potential(right_nodes) == pytest.approx(f.v_right[1:], abs=1e-10)


def test_left_piece_is_isolated_from_right_grid_changes(dimer_functional):
    f = dimer_functional
    bumped = f.xc_values.copy()
    bumped[-1] += 0.25
    curve = FillingCurve(L=f.L, grid=f.grid, values=bumped, u=f.u, t=f.t,
                         source="ED", kind="xc_energy")
    g = build_functional(curve, differentiate_xc(curve))
    probe = np.linspace(0.0, 1.0, 23)
    assert np.array_equal(f.energy(probe), g.energy(probe))
    assert np.array_equal(f.potential(probe), g.potential(probe))
    assert f.energy(1.75) != g.energy(1.75)  # off-node query on the right piece


def test_hf_functional_is_identically_zero():
    f = hf_functional(4.0, 1.0, 8)
    ns = np.linspace(0.0, 2.0, 57)
    assert np.all(f.energy(ns) == 0.0)
    assert np.all(f.potential(ns) == 0.0)
    assert f.discontinuity() == 0.0


def test_hf_tagged_curve_builds_zero_functional():
    L = 4
    grid = np.arange(2 * L + 1) / L
    curve = FillingCurve(L=L, grid=grid, values=np.sin(grid) * 0.3, u=2.0, t=1.0,
                         source="HF", kind="xc_energy")
    # sin(0) = 0 so the curve is valid; the HF tag must win over the data
    f = build_functional(curve, differentiate_xc(curve))
    assert np.all(f.energy(grid) == 0.0)
    assert np.all(f.potential(grid) == 0.0)


def test_pseudo_1d_values():
    f = pseudo_functional("PSEUDO_1D", 4.0)
    assert f.energy(1.0) == pytest.approx(1.0, abs=1e-12)
    assert f.potential(1.0) == pytest.approx(2.0, abs=1e-12)
    assert f.discontinuity() == 0.0


def test_pseudo_dft_values():
    f = pseudo_functional("PSEUDO_DFT", 4.0)
    assert f.energy(1.0) == pytest.approx(4.0 * 2.0 ** (-4.0 / 3.0), abs=1e-12)
    assert f.discontinuity() == 0.0


def test_balda_free_limit():
    beta = balda_beta(1e-6)
    assert abs(beta - 2.0) < 1e-4
    for n in (0.25, 0.5, 0.75, 1.0):
        e = balda_homogeneous_energy(n, 1e-6)
        assert abs(e - (-(4.0 / np.pi) * np.sin(np.pi * n / 2.0))) < 1e-6


def test_balda_endpoints_and_symmetry():
    u = 4.0
    assert balda_homogeneous_energy(0.0, u) == 0.0
    assert balda_homogeneous_energy(2.0, u) == pytest.approx(u, abs=1e-12)
    e13 = balda_homogeneous_energy(1.3, u)
    assert e13 == pytest.approx(balda_homogeneous_energy(0.7, u) + u * 0.3, abs=1e-12)


def test_balda_half_filling_matches_lieb_wu():
    u = 4.0
    assert balda_homogeneous_energy(1.0, u) == pytest.approx(lieb_wu_energy(u), abs=1e-9)


def test_balda_discontinuity_positive_at_strong_coupling():
    assert balda_functional(4.0).discontinuity() > 0.0
    assert balda_functional(10.0).discontinuity() > 0.0


def test_balda_zero_interaction_collapses():
    f = balda_functional(0.0)
    ns = np.linspace(0.0, 2.0, 301)
    assert np.max(np.abs(f.energy(ns))) <= 1e-8
    assert np.max(np.abs(f.potential(ns))) <= 1e-8


def test_functional_file_round_trip_is_bit_exact(tmp_path, dimer_functional):
    path = tmp_path / "dimer.txt"
    save_functional(dimer_functional, path)
    loaded = load_functional(path)
    assert np.array_equal(loaded.grid, dimer_functional.grid)
    assert np.array_equal(loaded.xc_values, dimer_functional.xc_values)
    assert np.array_equal(loaded.v_left, dimer_functional.v_left)
    assert np.array_equal(loaded.v_right, dimer_functional.v_right)
    assert np.array_equal(loaded.total_energy, dimer_functional.total_energy)
    assert loaded.source == "ED" and loaded.u == 4.0 and loaded.t == 1.0
    # a second save reproduces the file byte for byte
    path2 = tmp_path / "dimer2.txt"
    save_functional(loaded, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_balda_and_pseudo_round_trip(tmp_path):
    for f in (balda_functional(3.0, grid_points=41), pseudo_functional("PSEUDO_1D", 3.0, 41)):
        path = tmp_path / f"{f.source}.txt"
        save_functional(f, path)
        loaded = load_functional(path)
        ns = np.linspace(0.0, 2.0, 87)
        assert np.array_equal(loaded.energy(ns), f.energy(ns))
        assert np.array_equal(loaded.potential(ns), f.potential(ns))


def test_hardware_tag_round_trips_and_evaluates_like_emulated(tmp_path, dimer_functional):
    path = tmp_path / "hw.txt"
    save_functional(dimer_functional, path)
    text = path.read_text().replace("source ED", "source HARDWARE")
    path.write_text(text)
    hw = load_functional(path)
    assert hw.source == "HARDWARE"
    ns = np.linspace(0.0, 2.0, 33)
    assert np.array_equal(hw.potential(ns), dimer_functional.potential(ns))


def test_load_rejects_domain_violations(tmp_path, dimer_functional):
    path = tmp_path / "f.txt"
    save_functional(dimer_functional, path)
    lines = path.read_text().splitlines()
    truncated = "\n".join(lines[:-1]) + "\n"  # drop the n = 2 row
    bad = tmp_path / "bad.txt"
    bad.write_text(truncated)
    with pytest.raises(FunctionalFileError):
        load_functional(bad)


def test_load_rejects_wrong_schema_version(tmp_path, dimer_functional):
    path = tmp_path / "f.txt"
    save_functional(dimer_functional, path)
    bad = tmp_path / "bad.txt"
    bad.write_text(path.read_text().replace("schema_version 1", "schema_version 99"))
    with pytest.raises(FunctionalFileError):
        load_functional(bad)


def test_error_norm_sentinel_and_grid_check(dimer_functional):
    assert functional_error_norm(dimer_functional, dimer_functional) == "exact"
    with pytest.raises(ValueError):
        functional_error_norm(dimer_functional, hf_functional(4.0, 1.0, 8))


def test_error_norm_value():
    L = 4
    grid = np.arange(2 * L + 1) / L
    base = synthetic_xc(L, 0.25 * 4.0 * grid**2)
    f = build_functional(base, differentiate_xc(base))
    shifted = synthetic_xc(L, 0.25 * 4.0 * grid**2 + np.where(grid > 0, 0.1, 0.0) * grid)
    g = build_functional(shifted, differentiate_xc(shifted))
    err = functional_error_norm(g, f)
    diff = np.concatenate([g.v_left - f.v_left, g.v_right - f.v_right])
    assert err == pytest.approx(np.log10(np.linalg.norm(diff)), abs=1e-12)


def test_discontinuity_grows_with_interaction_on_1x8(ed8_functionals):
    dds = [ed8_functionals(u).discontinuity() for u in (2.0, 4.0, 8.0, 10.0)]
    assert all(dd > 0.0 for dd in dds)
    assert all(b >= a - 1e-12 for a, b in zip(dds, dds[1:]))
