import math

import numpy as np
import pytest

from softcoul.aim_utils import exact_case, node_location, row3_beta
from softcoul.eigensolver_utils import (
    RadialGrid,
    TridiagonalMatrix,
    assemble_hamiltonian,
    build_hamiltonian,
    count_nodes,
    eigenvector,
    initial_box,
    lowest_eigenvalues,
    richardson_extrapolate,
    solve_block,
    solve_state,
)
from softcoul.exceptions import InvalidInputError
from softcoul.potential_utils import PotentialParams, StateLabel, parse_state, scale_params


# ============================================================
# 격자 / 행렬
# ============================================================

def test_refined_grid_contains_coarse_points():
    grid = RadialGrid(50.0, 199)
    fine = grid.refined()
    assert fine.spacing == pytest.approx(grid.spacing / 2)
    np.testing.assert_allclose(fine.radii[1::2], grid.radii)


def test_doubled_grid_keeps_spacing():
    grid = RadialGrid(50.0, 199)
    doubled = grid.doubled()
    assert doubled.r_max == pytest.approx(100.0)
    assert doubled.spacing == pytest.approx(grid.spacing)


def test_grid_validation():
    with pytest.raises(InvalidInputError):
        RadialGrid(0.0, 1000)
    with pytest.raises(InvalidInputError):
        RadialGrid(10.0, 10)


def test_tridiagonal_validation_and_dense():
    matrix = TridiagonalMatrix(np.array([2.0, 3.0, 4.0]), np.array([-1.0, -1.0]))
    dense = matrix.to_dense()
    assert dense.shape == (3, 3)
    assert dense[0, 1] == dense[1, 0] == -1.0
    lo, hi = matrix.gershgorin_interval()
    eigenvalues = np.linalg.eigvalsh(dense)
    assert lo <= eigenvalues.min() and eigenvalues.max() <= hi
    with pytest.raises(InvalidInputError):
        TridiagonalMatrix(np.ones(3), np.ones(3))


def test_lowest_eigenvalues_match_dense(rng):
    diagonal = rng.uniform(-2, 2, 60)
    off_diagonal = rng.uniform(-1, 1, 59)
    matrix = TridiagonalMatrix(diagonal, off_diagonal)
    expected = np.linalg.eigvalsh(matrix.to_dense())[:5]
    np.testing.assert_allclose(lowest_eigenvalues(matrix, 5), expected, atol=1e-12)
    with pytest.raises(InvalidInputError):
        lowest_eigenvalues(matrix, 61)


def test_free_stencil_eigenvalues_are_exact():
    n, spacing = 400, 0.05
    radii = spacing * np.arange(1, n + 1)
    matrix = assemble_hamiltonian(radii, spacing, 0, np.zeros(n))
    k = np.arange(1, 4)
    expected = (1.0 - np.cos(math.pi * k / (n + 1))) / spacing**2
    np.testing.assert_allclose(lowest_eigenvalues(matrix, 3), expected, rtol=1e-10)


def test_eigenvector_residual_and_sign():
    grid = RadialGrid(40.0, 2000)
    matrix = build_hamiltonian(PotentialParams(1.0, 0.0), 0, grid)
    value = lowest_eigenvalues(matrix, 2)[-1]
    vector = eigenvector(matrix, value)
    assert np.linalg.norm(vector) == pytest.approx(1.0)
    assert np.linalg.norm(matrix.matvec(vector) - value * vector) < 1e-8
    assert count_nodes(vector) == 1
    assert vector[np.argmax(np.abs(vector) > 1e-9 * np.abs(vector).max())] > 0


def test_ground_and_first_excited_vectors_are_orthogonal(soft_core):
    grid = RadialGrid(60.0, 3000)
    matrix = build_hamiltonian(soft_core, 0, grid)
    first, second = lowest_eigenvalues(matrix, 2)
    overlap = float(np.dot(eigenvector(matrix, first), eigenvector(matrix, second)))
    assert abs(overlap) < 1e-10


@pytest.mark.parametrize("q", [1.0, 2.0, 4.0])
def test_node_theorem_across_sweep(q):
    grid = RadialGrid(400.0, 20000)
    for beta in (0.0, 0.5, 5.0, 20.0):
        for ell in (0, 2):
            matrix = build_hamiltonian(PotentialParams(1.0, beta, q), ell, grid)
            for k, value in enumerate(lowest_eigenvalues(matrix, 5), start=1):
                assert count_nodes(eigenvector(matrix, value)) == k - 1


def test_count_nodes_ignores_tiny_noise():
    vector = np.array([0.0, 1.0, 2.0, 1e-14, -1e-14, 1.0, -1.0, -2.0])
    assert count_nodes(vector, 1e-9) == 1


def test_richardson_recovers_polynomial_error():
    h = np.array([0.1, 0.05, 0.025])
    exact = np.array([-0.5, -0.125])
    ladder = exact + np.outer(3.0 * h**2 + 7.0 * h**4, [1.0, 2.0])
    best, error = richardson_extrapolate(ladder)
    np.testing.assert_allclose(best, exact, atol=1e-13)
    assert np.all(error > 0)


def test_initial_box_policy():
    assert initial_box(PotentialParams(1.0, 0.0), 7) == pytest.approx(980.0)
    assert initial_box(PotentialParams(1.0, 30.0), 1) == pytest.approx(300.0)
    assert initial_box(PotentialParams(4.0, 0.0), 1) == pytest.approx(50.0)


# ============================================================
# 물리 검증
# ============================================================

@pytest.mark.parametrize("ell", range(5))
def test_coulomb_calibration(hydrogen, ell):
    count = 5 - ell
    block = solve_block(hydrogen, ell, count)
    for index, (energy, _) in enumerate(block, start=1):
        nu = ell + index
        assert energy == pytest.approx(-1.0 / (2 * nu**2), rel=1e-7)


def test_solve_state_normalization_and_nodes(soft_core):
    pair = solve_state(soft_core, parse_state("3s"))
    assert pair.node_count == 2
    assert pair.grid.spacing * np.sum(pair.wavefunction**2) == pytest.approx(1.0, rel=1e-10)
    assert pair.radii.shape == pair.wavefunction.shape
    assert pair.error_estimate >= 0


def test_soft_core_is_above_coulomb(soft_core, hydrogen):
    for label in ("1s", "2p", "3d"):
        state = parse_state(label)
        assert solve_state(soft_core, state).energy > solve_state(hydrogen, state).energy


def test_exact_row3_energies_and_node():
    case = exact_case(3, 0, 1.0)
    small, large = case.beta_roots
    assert small == pytest.approx(row3_beta(0, 1.0, -1), rel=1e-12)
    assert small == pytest.approx((9 - 3 * math.sqrt(3)) / 2, rel=1e-12)

    two_s = solve_state(PotentialParams(1.0, small, 1.0), StateLabel(2, 0))
    assert two_s.energy == pytest.approx(-1.0 / 18.0, rel=1e-6)

    psi, radii = two_s.wavefunction, two_s.radii
    i = int(np.flatnonzero(np.sign(psi[:-1]) * np.sign(psi[1:]) < 0)[0])
    node = radii[i] - psi[i] * (radii[i + 1] - radii[i]) / (psi[i + 1] - psi[i])
    assert node == pytest.approx(3 * math.sqrt(3), abs=1e-4)
    assert node == pytest.approx(node_location(0, 1.0), abs=1e-4)

    one_s = solve_state(PotentialParams(1.0, large, 1.0), StateLabel(1, 0))
    assert one_s.energy == pytest.approx(-1.0 / 18.0, rel=1e-6)


@pytest.mark.slow
@pytest.mark.parametrize("row", range(2, 10))
@pytest.mark.parametrize("ell", range(4))
def test_exact_cases_cross_validate(row, ell):
    case = exact_case(row, ell, 1.0)
    for beta, label in zip(case.beta_roots, case.states):
        pair = solve_state(PotentialParams(1.0, beta, 1.0), label)
        assert pair.energy == pytest.approx(case.energy, rel=1e-6)


def _check_scaling_law(rng, count: int) -> None:
    for _ in range(count):
        params = PotentialParams(rng.uniform(0.5, 3.0), rng.uniform(0.0, 5.0), float(rng.choice([1.0, 2.0, 4.0])))
        sigma = rng.uniform(0.5, 2.0)
        label = StateLabel(int(rng.integers(1, 4)), 0)
        label = StateLabel(label.nu, int(rng.integers(0, label.nu)))

        scaled, multiplier = scale_params(params, sigma)
        original = solve_state(params, label)
        transformed = solve_state(scaled, label)
        tolerance = max(original.error_estimate + multiplier * transformed.error_estimate, 1e-9 * abs(original.energy))
        assert abs(original.energy - multiplier * transformed.energy) < 10 * tolerance


def test_scaling_law(rng):
    _check_scaling_law(rng, 10)


@pytest.mark.slow
def test_scaling_law_fifty_cases(rng):
    _check_scaling_law(rng, 50)


def _check_monotonicity(Z_values, beta_values, q_values) -> None:
    states = [parse_state(s) for s in ("1s", "2p", "3d")]
    for label in states:
        energy = np.empty((len(Z_values), len(beta_values), len(q_values)))
        for i, Z in enumerate(Z_values):
            for j, beta in enumerate(beta_values):
                for k, q in enumerate(q_values):
                    energy[i, j, k] = solve_block(PotentialParams(Z, beta, q), label.ell, 1)[0][0]
        assert np.all(np.diff(energy, axis=0) < 0)
        assert np.all(np.diff(energy, axis=1) > 0)
        assert np.all(np.diff(energy, axis=2) < 0)


def test_monotonicity_lattice():
    _check_monotonicity((0.8, 1.0, 1.5), (0.5, 1.0, 3.0), (1.0, 2.0, 4.0))


@pytest.mark.slow
def test_monotonicity_full_lattice():
    _check_monotonicity((0.6, 0.8, 1.0, 1.5, 2.0), (0.25, 0.5, 1.0, 3.0, 6.0), (1.0, 2.0, 3.0, 4.0))
