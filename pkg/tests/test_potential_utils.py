import math

import numpy as np
import pytest

from softcoul.exceptions import InvalidInputError
from softcoul.potential_utils import (
    INFINITY,
    PotentialParams,
    StateLabel,
    enumerate_states,
    eval_potential,
    parse_state,
    parse_states,
    potential_derivative,
    potential_parameter_derivatives,
    scale_params,
)


@pytest.mark.parametrize("q", [1.0, 2.0, 3.5, INFINITY])
def test_origin_value_is_finite_depth(q):
    params = PotentialParams(Z=2.0, beta=0.5, q=q)
    assert eval_potential(params, 0.0) == pytest.approx(-4.0)
    assert params.depth == pytest.approx(-4.0)


def test_coulomb_limit_and_tail():
    coulomb = PotentialParams(1.0, 0.0, 2.0)
    assert eval_potential(coulomb, 2.0) == pytest.approx(-0.5)

    soft = PotentialParams(1.0, 1.0, 2.0)
    assert eval_potential(soft, 1e4) == pytest.approx(-1e-4, rel=1e-8)


def test_known_values():
    assert eval_potential(PotentialParams(1.0, 4.0, 2.0), 3.0) == pytest.approx(-0.2)
    assert eval_potential(PotentialParams(1.0, 1.0, 1.0), 1.0) == pytest.approx(-0.5)

    step = PotentialParams(1.0, 2.0, INFINITY)
    values = eval_potential(step, np.array([0.5, 1.9, 2.0, 4.0]))
    np.testing.assert_allclose(values, [-0.5, -0.5, -0.5, -0.25])


def test_large_q_does_not_overflow():
    params = PotentialParams(1.0, 3.0, 400.0)
    value = eval_potential(params, 5.0)
    assert math.isfinite(value)
    assert value == pytest.approx(-0.2, rel=1e-3)


def test_vectorized_returns_array_and_scalar_returns_float():
    params = PotentialParams(1.0, 1.0, 1.0)
    assert isinstance(eval_potential(params, 1.0), float)
    assert eval_potential(params, np.linspace(0, 1, 5)).shape == (5,)


@pytest.mark.parametrize("q", [1.0, 2.0, 4.0, 7.5])
def test_derivative_matches_finite_difference(q):
    params = PotentialParams(1.3, 0.8, q)
    r = np.linspace(0.1, 6.0, 25)
    h = 1e-6
    numeric = (eval_potential(params, r + h) - eval_potential(params, r - h)) / (2 * h)
    np.testing.assert_allclose(potential_derivative(params, r), numeric, rtol=1e-6, atol=1e-9)


def test_derivative_for_step_potential():
    params = PotentialParams(1.0, 2.0, INFINITY)
    np.testing.assert_allclose(potential_derivative(params, np.array([1.0, 4.0])), [0.0, 1.0 / 16.0])


def test_potential_decreases_with_q():
    r = np.linspace(0.0, 10.0, 50)
    previous = eval_potential(PotentialParams(1.0, 2.0, 1.0), r)
    for q in (2.0, 3.0, 6.0, INFINITY):
        current = eval_potential(PotentialParams(1.0, 2.0, q), r)
        assert np.all(current <= previous + 1e-15)
        previous = current


def test_parameter_derivatives_signs():
    params = PotentialParams(1.5, 2.0, 2.0)
    r = np.linspace(0.1, 5.0, 10)
    dV_dZ, dV_dbeta = potential_parameter_derivatives(params, r)
    np.testing.assert_allclose(dV_dZ, eval_potential(params, r) / params.Z, rtol=1e-6)
    assert np.all(dV_dbeta > 0)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"Z": 0.0, "beta": 1.0},
        {"Z": -1.0, "beta": 1.0},
        {"Z": 1.0, "beta": -0.1},
        {"Z": 1.0, "beta": 1.0, "q": 0.5},
        {"Z": 1.0, "beta": math.nan},
        {"Z": 1.0, "beta": INFINITY},
    ],
)
def test_invalid_params_raise(kwargs):
    with pytest.raises(InvalidInputError):
        PotentialParams(**kwargs)


def test_negative_radius_rejected():
    with pytest.raises(InvalidInputError):
        eval_potential(PotentialParams(1.0, 1.0), -1.0)


def test_scale_params():
    params = PotentialParams(2.0, 3.0, 2.0)
    scaled, multiplier = scale_params(params, 0.5)
    assert scaled == PotentialParams(1.0, 6.0, 2.0)
    assert multiplier == pytest.approx(4.0)
    with pytest.raises(InvalidInputError):
        scale_params(params, 0.0)


def test_scale_params_inverse_is_identity(rng):
    for _ in range(20):
        q = float(rng.choice([1.0, 2.0, 4.5, INFINITY]))
        params = PotentialParams(rng.uniform(0.1, 5.0), rng.uniform(0.0, 10.0), q)
        sigma = rng.uniform(0.1, 10.0)
        scaled, forward = scale_params(params, sigma)
        restored, backward = scale_params(scaled, 1.0 / sigma)
        assert restored.Z == pytest.approx(params.Z, rel=1e-14)
        assert restored.beta == pytest.approx(params.beta, rel=1e-14)
        assert restored.q == params.q
        assert forward * backward == pytest.approx(1.0, rel=1e-14)


# ============================================================
# 상태 라벨
# ============================================================

def test_parse_state_round_trip():
    for text in ("1s", "2p", "3d", "4f", "5g", "6h", "7i"):
        label = parse_state(text)
        assert str(label) == text
    assert parse_state("7i") == StateLabel(7, 6)
    assert parse_state(" 6S ") == StateLabel(6, 0)


def test_label_counts():
    label = StateLabel(7, 3)
    assert label.node_count == 3
    assert label.block_index == 4


@pytest.mark.parametrize("text", ["2d", "s1", "", "3x", "1p"])
def test_parse_state_rejects(text):
    with pytest.raises(InvalidInputError):
        parse_state(text)


def test_parse_states():
    assert parse_states("1s, 2s,2p") == [StateLabel(1, 0), StateLabel(2, 0), StateLabel(2, 1)]
    with pytest.raises(InvalidInputError):
        parse_states(" , ")


def test_enumerate_states_order():
    states = enumerate_states(3)
    assert [str(s) for s in states] == ["1s", "2s", "2p", "3s", "3p", "3d"]
    assert states == sorted(states)
    assert len(enumerate_states(7)) == 28
