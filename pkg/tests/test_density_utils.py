import math
from dataclasses import replace

import pytest

from softcoul.config_utils import DEFAULT_SETTINGS
from softcoul.density_utils import (
    closed_form_beta,
    closed_form_ratio,
    concavity_check,
    critical_ratio,
    cusp_ratio,
    predicted_ratio,
    scaled_density,
)
from softcoul.eigensolver_utils import solve_state
from softcoul.envelope_utils import envelope_bounds
from softcoul.exceptions import DensityFitError, InvalidInputError
from softcoul.potential_utils import PotentialParams, parse_state


def test_coulomb_cusp(hydrogen):
    for label, expected in (("1s", -2.0), ("2p", -1.0)):
        profile = scaled_density(solve_state(hydrogen, parse_state(label)))
        assert cusp_ratio(profile) == pytest.approx(expected, rel=1e-2)
        assert profile.normalization == pytest.approx(1.0, rel=1e-6)


def test_hydrogen_density_at_origin(hydrogen):
    # η(0) = Z³/π 인 1s
    profile = scaled_density(solve_state(hydrogen, parse_state("1s")))
    assert profile.eta0 == pytest.approx(1.0 / math.pi, rel=1e-3)


def test_soft_core_has_flat_origin(soft_core):
    profile = scaled_density(solve_state(soft_core, parse_state("1s")))
    assert abs(cusp_ratio(profile)) < 1e-2
    assert profile.eta2 < 0


def test_concavity_matches_prediction(soft_core):
    result = concavity_check(solve_state(soft_core, parse_state("2p")))
    assert result.concave
    assert result.slack > 0
    assert result.relative_error < 1e-2


@pytest.mark.parametrize("ell", [0, 1])
def test_q1_special_point(ell):
    beta = closed_form_beta(1, ell, 1.0)
    pair = solve_state(PotentialParams(1.0, beta, 1.0), parse_state(f"{ell + 1}{'sp'[ell]}"))
    assert pair.energy == pytest.approx(-1.0 / (2 * (ell + 2) ** 2), rel=1e-6)
    result = concavity_check(pair)
    assert result.measured_ratio == pytest.approx(closed_form_ratio(1, ell, 1.0), rel=1e-2)


def test_q2_special_point_is_exact():
    params = PotentialParams(1.0, closed_form_beta(2, 0, 1.0), 2.0)
    assert params.beta == pytest.approx(4.0)
    label = parse_state("1s")
    energy = solve_state(params, label).energy
    lower, upper = envelope_bounds(params, label)
    assert lower.value <= energy <= upper.value
    assert energy == pytest.approx(-0.125, abs=1e-6)


@pytest.mark.parametrize("Z", [0.5, 2.0])
def test_q2_special_point_scales_with_Z(Z):
    params = PotentialParams(Z, closed_form_beta(2, 0, Z), 2.0)
    energy = solve_state(params, parse_state("1s")).energy
    assert energy == pytest.approx(-Z**2 / 8.0, abs=1e-6 * Z**2)


def test_closed_form_ratios():
    assert closed_form_ratio(1, 0, 1.0) == pytest.approx(-0.5)
    assert closed_form_ratio(2, 0, 1.0) == pytest.approx(-2.0 * (2 * math.sqrt(2) - 1) / 12.0)
    with pytest.raises(InvalidInputError):
        closed_form_ratio(3, 0, 1.0)
    with pytest.raises(InvalidInputError):
        closed_form_beta(3, 0, 1.0)


def test_predicted_and_critical_ratio():
    params = PotentialParams(2.0, 4.0, 1.0)
    assert predicted_ratio(params, 1, -0.25) == pytest.approx(-(4.0 / 5.0) * 0.25)
    assert critical_ratio(params, 1) == pytest.approx(-(4.0 / 5.0) * 0.5)
    with pytest.raises(InvalidInputError):
        predicted_ratio(PotentialParams(1.0, 0.0), 0, -0.5)


def test_concavity_check_rejects_coulomb(hydrogen):
    with pytest.raises(InvalidInputError):
        concavity_check(solve_state(hydrogen, parse_state("1s")))


def test_tiny_window_raises_fit_error():
    settings = replace(DEFAULT_SETTINGS, density_min_points=1)
    pair = solve_state(PotentialParams(1.0, 1e-4, 1.0), parse_state("1s"), settings)
    with pytest.raises(DensityFitError):
        scaled_density(pair, settings)


@pytest.mark.slow
@pytest.mark.parametrize("q", [1.0, 2.0, 3.0, 4.0])
@pytest.mark.parametrize("beta", [1.0, 5.0, 20.0])
def test_concavity_acceptance(q, beta):
    params = PotentialParams(1.0, beta, q)
    for label in ("1s", "2p", "3d"):
        result = concavity_check(solve_state(params, parse_state(label)))
        assert result.measured_ratio <= 0
        assert result.relative_error < 1e-2
