"""
============================================================
원점 근처 밀도 분석 (density_utils.py)
============================================================

스케일된 밀도 η_ℓ(r) = (ψ(r)/r^(ℓ+1))² / (4π)

- β = 0 (쿨롱): 첨점 조건 η'(0)/η(0) = -2Z/(ℓ+1)
- β > 0: η'(0) = 0 이고
      η''(0)/η(0) = -(4/(2ℓ+3)) (E + Z/β) <= 0
  즉 원점 근처 밀도는 오목합니다.

R = ψ/r 로 정의하므로 η_ℓ(0) 은 유한하고
4π ∫ η_ℓ r^(2ℓ+2) dr = ∫ ψ² dr = 1 입니다.

η(0), η'(0), η''(0) 은 원점 근처 창 r <= max(0.1·min(β, 1/a), 30h) 에서
가중 4차 최소제곱 피팅으로 추정합니다.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import trapezoid

from .config_utils import DEFAULT_SETTINGS, SolverSettings
from .eigensolver_utils import Eigenpair
from .exceptions import DensityFitError, InvalidInputError
from .potential_utils import PotentialParams, StateLabel

logger = logging.getLogger(__name__)

FIT_DEGREE = 4

# 피팅 행렬의 조건수 상한
MAX_FIT_CONDITION = 1e12


@dataclass(frozen=True)
class DensityProfile:
    """원점 근처 스케일된 밀도와 그 미분"""

    label: StateLabel
    params: PotentialParams
    energy: float
    radii: np.ndarray
    eta_samples: np.ndarray
    eta0: float
    eta1: float
    eta2: float
    normalization: float


@dataclass(frozen=True)
class ConcavityResult:
    """
    예측값 -(4/(2ℓ+3))(E + Z/β) 과 측정값 η''(0)/η(0)

    slack = E + Z/β (>= 0 이어야 함)
    """

    predicted_ratio: float
    measured_ratio: float
    concave: bool
    slack: float

    @property
    def relative_error(self) -> float:
        return abs(self.measured_ratio - self.predicted_ratio) / abs(self.predicted_ratio)


def _fit_window(pair: Eigenpair, settings: SolverSettings) -> float:
    a = math.sqrt(-2.0 * pair.energy)
    length = 1.0 / a if pair.params.is_coulomb else min(pair.params.beta, 1.0 / a)
    return max(settings.density_window * length, settings.density_min_points * pair.grid.spacing)


def scaled_density(pair: Eigenpair, settings: SolverSettings = DEFAULT_SETTINGS) -> DensityProfile:
    """
    고유 상태에서 η_ℓ 과 η(0), η'(0), η''(0) 추정

    Raises:
        DensityFitError: 창 안의 점이 부족하거나 피팅 조건수가 너무 큼
    """
    ell = pair.label.ell
    radii = pair.radii
    psi = pair.wavefunction
    eta = (psi / radii ** (ell + 1)) ** 2 / (4.0 * math.pi)

    # 경계 ψ(0) = ψ(r_max) = 0 포함
    padded_r = np.concatenate(([0.0], radii, [pair.grid.r_max]))
    padded_psi = np.concatenate(([0.0], psi, [0.0]))
    normalization = float(trapezoid(padded_psi**2, padded_r))

    window = _fit_window(pair, settings)
    mask = radii <= window
    if np.count_nonzero(mask) < FIT_DEGREE + 2:
        raise DensityFitError(
            f"{pair.label}: 원점 피팅 창 r <= {window:.3g} 안의 격자점이 부족합니다 (h={pair.grid.spacing:.3g})"
        )

    r_fit, eta_fit = radii[mask], eta[mask]
    weights = 1.0 - 0.5 * r_fit / window
    fit, (_, rank, singular_values, _) = Polynomial.fit(r_fit, eta_fit, FIT_DEGREE, w=weights, full=True)
    condition = singular_values[0] / singular_values[-1] if singular_values[-1] > 0 else math.inf
    if rank < FIT_DEGREE + 1 or condition > MAX_FIT_CONDITION:
        raise DensityFitError(f"{pair.label}: 원점 피팅 불안정 (rank={rank}, 조건수 {condition:.2e})")

    coefficients = fit.convert().coef
    coefficients = np.pad(coefficients, (0, FIT_DEGREE + 1 - coefficients.size))

    return DensityProfile(
        label=pair.label,
        params=pair.params,
        energy=pair.energy,
        radii=r_fit,
        eta_samples=eta_fit,
        eta0=float(coefficients[0]),
        eta1=float(coefficients[1]),
        eta2=float(2.0 * coefficients[2]),
        normalization=normalization,
    )


def cusp_ratio(profile: DensityProfile) -> float:
    """η'(0)/η(0) (쿨롱이면 -2Z/(ℓ+1), β > 0 이면 0)"""
    return profile.eta1 / profile.eta0


def predicted_ratio(params: PotentialParams, ell: int, energy: float) -> float:
    """η''(0)/η(0) = -(4/(2ℓ+3))(E + Z/β)"""
    if params.is_coulomb:
        raise InvalidInputError("β = 0 에서는 η''(0) 대신 첨점 조건을 사용합니다")
    return -(4.0 / (2 * ell + 3)) * (energy + params.Z / params.beta)


def critical_ratio(params: PotentialParams, ell: int) -> float:
    """E → 0⁻ 극한의 예측 비율 -(4/(2ℓ+3))·Z/β"""
    return predicted_ratio(params, ell, 0.0)


def concavity_check(
    pair: Eigenpair, settings: SolverSettings = DEFAULT_SETTINGS, tolerance: float = 1e-2
) -> ConcavityResult:
    """
    원점 밀도 오목성 확인

    concave = 측정 η''(0)/η(0) <= tolerance·|예측값|

    Raises:
        InvalidInputError: β = 0
    """
    if pair.params.is_coulomb:
        raise InvalidInputError("β = 0 (쿨롱 첨점) 에서는 오목성 검사를 하지 않습니다")

    predicted = predicted_ratio(pair.params, pair.label.ell, pair.energy)
    profile = scaled_density(pair, settings)
    measured = profile.eta2 / profile.eta0
    slack = pair.energy + pair.params.Z / pair.params.beta

    if slack < 0:
        logger.warning("%s: E + Z/β = %.3e < 0 (%s)", pair.label, slack, pair.params)

    return ConcavityResult(
        predicted_ratio=predicted,
        measured_ratio=measured,
        concave=measured <= tolerance * abs(predicted),
        slack=slack,
    )


# ============================================================
# 닫힌 형태 특수점
# ============================================================

def closed_form_beta(q: float, ell: int, Z: float) -> float:
    """
    E = -Z²/(2(ℓ+2)²) 가 되는 β

    q = 1: (ℓ+2)/Z,  q = 2: √(2(ℓ+2)³)/Z
    """
    if q == 1:
        return (ell + 2) / Z
    if q == 2:
        return math.sqrt(2.0 * (ell + 2) ** 3) / Z
    raise InvalidInputError(f"닫힌 형태 특수점은 q = 1, 2 만 있습니다 (입력: {q})")


def closed_form_ratio(q: float, ell: int, Z: float) -> float:
    """
    특수점의 η''(0)/η(0) 닫힌 형태

    q = 1: -2Z²/(ℓ+2)²
    q = 2: -2Z²[√2(ℓ+2) - 1]/((2ℓ+3)(ℓ+2)²)
    """
    if q == 1:
        return -2.0 * Z**2 / (ell + 2) ** 2
    if q == 2:
        return -2.0 * Z**2 * (math.sqrt(2.0) * (ell + 2) - 1.0) / ((2 * ell + 3) * (ell + 2) ** 2)
    raise InvalidInputError(f"닫힌 형태 비율은 q = 1, 2 만 있습니다 (입력: {q})")

