"""
============================================================
퍼텐셜 포락선 에너지 한계 (envelope_utils.py)
============================================================

E ≈ min_{r>0} [ P²/(2r²) + V(r) ]

- p = -1 (수소 기저): P = ν, 모든 q >= 1 에서 하한
- p = 2 (조화 진동자 기저): P = 2ν - ℓ - ½, q <= 2 에서 상한
  q ∈ {3,4,5,6} 는 r̂/β 가 임계값 이상일 때만 상한이 보장됨

최소점은 r³V'(r) = P² 의 유일한 해입니다 (r³V' 는 단조 증가).
골든 섹션으로 찾고 brentq 로 다듬습니다.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .exceptions import ConvergenceError, InvalidInputError
from .potential_utils import PotentialParams, StateLabel, eval_potential, potential_derivative

logger = logging.getLogger(__name__)

# q > 2 에서 p = 2 상한이 유효하려면 r̂/β 가 이 값 이상이어야 함
VALIDITY_THRESHOLDS = {3: 0.958, 4: 1.233, 5: 1.356, 6: 1.417}

SUPPORTED_POWERS = (-1, 2)

ShapeFunction = Callable[[np.ndarray], np.ndarray]


class BoundKind(str, Enum):
    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class EnvelopeBound:
    """포락선 에너지 한계 하나"""

    kind: BoundKind
    basis_power: int
    value: float
    r_hat: float
    valid: bool


def p_coefficient(label: StateLabel, p: int) -> float:
    """P_νℓ(-1) = ν,  P_νℓ(2) = 2ν - ℓ - ½"""
    if p == -1:
        return float(label.nu)
    if p == 2:
        return 2.0 * label.nu - label.ell - 0.5
    raise InvalidInputError(f"지원하지 않는 기저 거듭제곱 p={p} (가능: -1, 2)")


def validity_threshold(q: float) -> Optional[float]:
    """정수 q ∈ {3..6} 의 r̂/β 임계값, 나머지는 None"""
    if math.isfinite(q) and float(q).is_integer():
        return VALIDITY_THRESHOLDS.get(int(q))
    return None


def _minimize_envelope(params: PotentialParams, P: float) -> Tuple[float, float]:
    """
    min_r [P²/(2r²) + V(r)] 과 최소점 r̂

    Returns:
        (value, r_hat)
    """
    Z, beta = params.Z, params.beta
    P2 = P * P

    def envelope(r: float) -> float:
        return P2 / (2 * r * r) + eval_potential(params, r)

    if params.is_coulomb:
        r_hat = P2 / Z
        return -Z**2 / (2 * P2), r_hat

    if params.is_infinite:
        # r < β 구간은 단조 감소하므로 최소점은 r = β 또는 수소형 최소점
        r_hat = max(beta, P2 / Z)
        return envelope(r_hat), r_hat

    scale = max(beta, P2 / Z)
    lo, hi = 1e-3 * scale, 1e3 * scale

    def stationarity(r: float) -> float:
        return r**3 * potential_derivative(params, r) - P2

    try:
        coarse = minimize_scalar(envelope, bracket=(lo, scale), method="golden", tol=1e-10)
        guess = float(coarse.x) if coarse.success and lo < coarse.x < hi else scale
    except (ValueError, RuntimeError):
        guess = scale

    left, right = guess / 2, guess * 2
    if stationarity(left) * stationarity(right) > 0:
        left, right = lo, hi
    if stationarity(left) * stationarity(right) > 0:
        raise ConvergenceError(f"포락선 최소점을 찾지 못했습니다 ({params}, P={P})")

    r_hat = brentq(stationarity, left, right, xtol=1e-14, rtol=1e-12)
    return envelope(r_hat), r_hat


def envelope_bound(params: PotentialParams, label: StateLabel, p: int) -> EnvelopeBound:
    """
    포락선 에너지 한계

    Args:
        params: 퍼텐셜 파라미터
        label: 상태 라벨
        p: -1 (하한) 또는 2 (상한)

    Returns:
        EnvelopeBound: p = 2, q > 2 에서 valid 는 r̂/β 임계값 조건
        (q > 6 이나 비정수 q 는 임계값이 없으므로 False, 값은 그대로 반환)
    """
    P = p_coefficient(label, p)
    value, r_hat = _minimize_envelope(params, P)

    if p == -1:
        return EnvelopeBound(BoundKind.LOWER, p, value, r_hat, True)

    if params.is_coulomb or params.q <= 2:
        valid = True
    else:
        threshold = validity_threshold(params.q)
        valid = threshold is not None and r_hat / params.beta >= threshold
    return EnvelopeBound(BoundKind.UPPER, p, value, r_hat, valid)


def envelope_bounds(params: PotentialParams, label: StateLabel) -> Tuple[EnvelopeBound, EnvelopeBound]:
    """(하한, 상한) 쌍"""
    return envelope_bound(params, label, -1), envelope_bound(params, label, 2)


def basic_lower_bound(params: PotentialParams) -> float:
    """모든 고유값의 하한 min_r [1/(8r²) + V(r)]"""
    value, _ = _minimize_envelope(params, 0.5)
    return value


# ============================================================
# 에너지 한계 곡선 (Z, E)
# ============================================================

def soft_core_shape(beta: float, q: float) -> Tuple[ShapeFunction, ShapeFunction]:
    """V = Z·f(r) 인 모양 함수 f 와 f'"""
    shape = PotentialParams(1.0, beta, q)
    return (
        lambda r: np.asarray(eval_potential(shape, r)),
        lambda r: np.asarray(potential_derivative(shape, r)),
    )


def parametric_curve(
    f: ShapeFunction, f_prime: ShapeFunction, P: float, r_samples: Sequence[float]
) -> List[Tuple[float, float]]:
    """
    한계 곡선의 매개변수 표현

    Z(r) = P²/(r³f'(r)),  E(r) = P²[1/(2r²) + f(r)/(r³f'(r))]

    Raises:
        InvalidInputError: P <= 0 또는 어떤 표본에서 f'(r) = 0
    """
    if not P > 0:
        raise InvalidInputError(f"P 는 양수여야 합니다 (입력: {P})")
    radii = np.asarray(r_samples, dtype=float)
    values = np.asarray(f(radii), dtype=float)
    slopes = np.asarray(f_prime(radii), dtype=float)
    if np.any(slopes == 0):
        raise InvalidInputError("f'(r) = 0 인 표본이 있습니다")

    denominator = radii**3 * slopes
    Z = P**2 / denominator
    E = P**2 * (1.0 / (2.0 * radii**2) + values / denominator)
    return [(float(z), float(e)) for z, e in zip(Z, E)]
