import math

import numpy as np
import pytest
import scipy.sparse.linalg as spla

from hqsim.fci import (
    GAAS,
    CapacityError,
    FciProblem,
    FitError,
    Material,
    PotentialGrid,
    SplittingRow,
    SplittingTable,
    assemble_fci,
    axes_for_box,
    build_determinant_basis,
    confinement_energy,
    diagonalize_fci,
    discretize_h1,
    expected_counts,
    from_electrostatic,
    gaussian_well_for,
    group_levels,
    harmonic_well,
    integral_tables,
    is_strongly_correlated,
    polynomial_well,
    solve_basis,
    splitting_vs_lambda,
    summary,
    symmetry_defect,
    two_electron_integrals,
    wigner_parameter,
)

import oracles

HO_L = 6 * 32.6


@pytest.fixture(scope="module")
def small_well():
    h = axes_for_box(12, 60.0)
    return harmonic_well(12, 12, h, h, 3.0, 4.0)


@pytest.fixture(scope="module")
def small_problem(small_well):
    return FciProblem.build(small_well, n_spatial=3)


# -- grids ------------------------------------------------------------------

def test_axes_for_box():
    h = axes_for_box(9, 50.0)
    assert h == pytest.approx(10.0)
    g = PotentialGrid(9, 9, h, h, np.zeros((9, 9)))
    # outermost points sit one spacing inside the walls
    assert g.x[0] - h == pytest.approx(-50.0)
    assert g.x[-1] + h == pytest.approx(50.0)


def test_grid_validation():
    with pytest.raises(ValueError):
        PotentialGrid(4, 8, 1.0, 1.0, np.zeros((4, 8)))
    with pytest.raises(ValueError):
        PotentialGrid(8, 8, 1.0, 1.0, np.zeros((8, 9)))
    with pytest.raises(ValueError):
        PotentialGrid(8, 8, 0.0, 1.0, np.zeros((8, 8)))
    v = np.zeros((8, 8))
    v[2, 2] = np.nan
    with pytest.raises(ValueError):
        PotentialGrid(8, 8, 1.0, 1.0, v)
    with pytest.raises(ValueError):
        Material(m_star=0.0)


def test_grid_csv_roundtrip(small_well, tmp_path):
    p = tmp_path / "v.csv"
    small_well.to_csv(p)
    back = PotentialGrid.from_csv(p)
    assert (back.nx, back.ny, back.hx, back.hy) == (12, 12, small_well.hx, small_well.hy)
    assert np.array_equal(back.values, small_well.values)


def test_flat_index_is_row_major(small_well):
    c = small_well.coords()
    assert c.shape == (144, 2)
    assert np.array_equal(c[1], [small_well.x[0], small_well.y[1]])
    assert np.array_equal(c[12], [small_well.x[1], small_well.y[0]])


def test_potential_builders():
    h = axes_for_box(16, 80.0)
    phi = np.full((16, 16), 5.0)
    assert np.all(from_electrostatic(16, 16, h, h, phi).values == -5.0)
    poly = polynomial_well(16, 16, h, h, {(2, 0): 0.01, (0, 2): 0.02})
    hw = harmonic_well(16, 16, h, h, 2 * math.sqrt(GAAS.kinetic * 0.01), 2 * math.sqrt(GAAS.kinetic * 0.02))
    assert np.allclose(poly.values, hw.values)
    g = gaussian_well_for(1.0, 2.0, 10.0, 16, 16, h, h)
    assert g.values.min() > -10.0
    assert confinement_energy(g) == pytest.approx((1.0, 2.0), rel=0.02)


# -- single-particle basis -----------------------------------------------

def test_box_levels_match_separable_oracle():
    nx, ny, hx, hy = 10, 12, 3.0, 2.0
    g = PotentialGrid(nx, ny, hx, hy, np.zeros((nx, ny)))
    b = solve_basis(g, 15)
    k = GAAS.kinetic
    ex = oracles.discrete_laplacian_levels(nx, hx, k)
    ey = oracles.discrete_laplacian_levels(ny, hy, k)
    ref = np.sort(np.add.outer(ex, ey).ravel())[:15]
    assert np.allclose(b.energies_mev, ref, rtol=1e-10)


def test_h1_matches_explicit_stencil(small_well):
    ref = oracles.grid_hamiltonian(small_well.values, small_well.hx, small_well.hy, 0.067)
    ours = discretize_h1(small_well).toarray() * oracles.GHZ_PER_MEV
    assert np.allclose(ours, ref, rtol=1e-8, atol=1e-9)


def test_basis_orthonormal_and_gauge(small_well):
    b = solve_basis(small_well, 6)
    assert np.abs(b.overlap() - np.eye(6)).max() < 1e-12
    for psi in b.wavefunctions:
        assert psi[np.argmax(np.abs(psi))] > 0
    assert b.residual < 1e-10


def test_sparse_and_dense_paths_agree():
    h = axes_for_box(44, HO_L)
    g = harmonic_well(44, 44, h, h, 1.0)
    assert g.size > 1600
    b = solve_basis(g, 8)
    ref = np.linalg.eigvalsh(discretize_h1(g).toarray())[:8]
    assert np.allclose(b.energies_mev, ref, rtol=1e-10)


def test_harmonic_levels():
    h = axes_for_box(48, HO_L)
    b = solve_basis(harmonic_well(48, 48, h, h, 1.0), 6)
    assert np.allclose(b.energies_mev, [1, 2, 2, 3, 3, 3], rtol=0.01)


def test_basis_rejects_bad_n(small_well):
    with pytest.raises(ValueError):
        solve_basis(small_well, 0)
    with pytest.raises(ValueError):
        solve_basis(small_well, 145)


# -- integrals -------------------------------------------------------------

def test_two_electron_symmetry(small_problem):
    v = small_problem.tables.two_electron
    assert symmetry_defect(v) < 1e-12
    n = v.shape[0]
    for i in range(n):
        assert v[i, i, i, i] > 0


def test_two_electron_against_quadrature(small_well, small_problem):
    b = small_problem.basis
    a = small_problem.tables.regularization
    w = oracles.grid_coulomb(12, 12, small_well.hx, small_well.hy, 12.9, a)
    phi = b.wavefunctions * math.sqrt(small_well.cell_area)
    ref = np.einsum("ia,ka,ab,jb,lb->ijkl", phi, phi, w, phi, phi)
    assert np.allclose(small_problem.tables.two_electron, ref, rtol=1e-9, atol=1e-9)


def test_spin_orbital_selection(small_problem):
    t = small_problem.tables
    assert t.spin_orbital(0, 1, 0, 1) == t.two_electron[0, 0, 0, 0]
    assert t.spin_orbital(0, 1, 1, 0) == 0.0
    assert np.allclose(t.one_electron[::2, ::2], np.diag(small_problem.basis.energies))
    assert np.all(t.one_electron[::2, 1::2] == 0)


def test_block_size_does_not_change_integrals(small_problem):
    a = two_electron_integrals(small_problem.basis, block=7)
    assert np.allclose(a, small_problem.tables.two_electron, rtol=1e-13, atol=1e-12)


def test_capacity_and_regularization(small_problem):
    with pytest.raises(CapacityError):
        two_electron_integrals(small_problem.basis, memory_cap=100)
    with pytest.raises(ValueError):
        two_electron_integrals(small_problem.basis, a=0.0)
    softer = integral_tables(small_problem.basis, a=20.0)
    assert softer.two_electron[0, 0, 0, 0] < small_problem.tables.two_electron[0, 0, 0, 0]


# -- determinants and FCI ------------------------------------------------

def test_determinant_counts():
    assert build_determinant_basis(2).counts() == (1, 4, 1)
    assert expected_counts(100) == (1, 396, 19503)
    d = build_determinant_basis(20)
    assert d.counts() == expected_counts(20)
    assert len(d) == math.comb(40, 2)
    assert sorted(np.unique(d.sz)) == [-2, 0, 2]
    with pytest.raises(ValueError):
        build_determinant_basis(1)


def test_lambda_zero_is_pair_sums(small_problem):
    res = small_problem.solve(0.0)
    e = small_problem.tables.one_electron.diagonal()
    p, q = np.triu_indices(e.size, 1)
    assert np.allclose(res.eigenvalues, np.sort(e[p] + e[q]), rtol=1e-9)


def test_fci_matches_antisymmetrized_oracle(small_well, small_problem):
    b = small_problem.basis
    a = small_problem.tables.regularization
    hg = oracles.grid_hamiltonian(small_well.values, small_well.hx, small_well.hy, 0.067)
    w = oracles.grid_coulomb(12, 12, small_well.hx, small_well.hy, 12.9, a)
    phi = b.wavefunctions * math.sqrt(small_well.cell_area)
    for lam in (0.3, 1.0):
        ref = oracles.antisymmetrized_two_electron(hg, w, phi, lam)
        ours = small_problem.solve(lam).eigenvalues
        assert np.allclose(ours, ref, rtol=1e-8)


def test_fci_matrix_blocks(small_problem):
    mat = assemble_fci(small_problem.tables, small_problem.dets, 1.0)
    full = mat.toarray()
    assert np.array_equal(full, full.T)
    assert [m for m, _, _ in mat.sectors] == [2, 0, -2]
    with pytest.raises(ValueError):
        assemble_fci(small_problem.tables, small_problem.dets, 1.5)
    with pytest.raises(ValueError):
        assemble_fci(small_problem.tables, build_determinant_basis(4), 1.0)


def test_triplet_degeneracy(small_problem):
    res = small_problem.solve(1.0)
    # the first excited level of two electrons in a well is a triplet
    assert res.degeneracies[0] == 1
    assert res.degeneracies[1] == 3
    assert res.residual < 1e-8
    assert res.splitting_01 > 0


def test_k_lowest_subset(small_problem):
    full = small_problem.solve(1.0)
    part = small_problem.solve(1.0, k_lowest=3)
    assert np.allclose(part.eigenvalues, full.eigenvalues[: part.eigenvalues.size])
    assert part.e1 == pytest.approx(full.e1)


def test_group_levels():
    lv, m = group_levels(np.array([1.0, 1.0 + 1e-9, 2.0, 2.0, 2.0, 3.0]))
    assert lv.tolist() == [1.0, 2.0, 3.0]
    assert m.tolist() == [2, 3, 1]


# -- sweeps and Wigner parameter ---------------------------------------------

def test_wigner_parameter_analytic():
    hw = 1.0
    l0 = math.sqrt(2 * oracles.HBAR2_OVER_2ME / 0.067 / hw)
    ref = oracles.COULOMB_MEV_NM / (12.9 * l0) / hw
    assert wigner_parameter(omega0=hw * oracles.GHZ_PER_MEV) == pytest.approx(ref, rel=1e-8)
    h = axes_for_box(64, HO_L)
    assert wigner_parameter(harmonic_well(64, 64, h, h, hw)) == pytest.approx(ref, rel=1e-3)
    assert wigner_parameter(omega0=100.0, l0=10.0) > 0
    with pytest.raises(ValueError):
        wigner_parameter(omega0=-1.0)
    assert is_strongly_correlated(3.0) and not is_strongly_correlated(1.0)


def test_fit_rejects_edge_minimum():
    h = axes_for_box(16, 80.0)
    g = polynomial_well(16, 16, h, h, {(1, 0): 0.1})
    with pytest.raises(FitError):
        wigner_parameter(g)


def test_splitting_table(small_problem, tmp_path):
    tab = splitting_vs_lambda(small_problem, [0.0, 0.5, 1.0])
    assert tab.lambdas.tolist() == [0.0, 0.5, 1.0]
    assert tab.quench_factor() == pytest.approx(tab.splittings[0] / tab.splittings[-1])
    tab.to_csv(tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "lambda,E0_hghz,E1_hghz,splitting_hghz"
    assert len(lines) == 4
    s = summary(small_problem, tab)
    assert s["determinants"] == {"ground": 1, "single": 8, "double": 6}
    assert s["diagnostics"]["orthonormality_error"] < 1e-12


def test_monotone_flag():
    up = SplittingTable((SplittingRow(0.0, 0.0, 1.0), SplittingRow(1.0, 0.0, 2.0)))
    down = SplittingTable((SplittingRow(0.0, 0.0, 2.0), SplittingRow(1.0, 0.0, 1.0)))
    assert not up.is_monotone()
    assert down.is_monotone()
    assert down.quench_factor() == 2.0


def test_quenching_in_elongated_well():
    hx = axes_for_box(40, 250.0)
    hy = axes_for_box(24, 100.0)
    g = gaussian_well_for(0.2, 1.0, 10.0, 40, 24, hx, hy)
    prob = FciProblem.build(g, n_spatial=10)
    tab = splitting_vs_lambda(prob, [0.0, 0.5, 1.0])
    assert tab.is_monotone()
    assert tab.quench_factor() > 10
    assert wigner_parameter(g) > 2
