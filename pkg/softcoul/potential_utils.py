"""
============================================================
소프트코어 쿨롱 퍼텐셜 모듈 (potential_utils.py)
============================================================

퍼텐셜 족 V_q(r) = -Z / (r^q + β^q)^(1/q) 과 상태 라벨을 정의합니다.
다른 모든 모듈이 공유하는 기본 타입입니다.

주요 기능:
1. PotentialParams: (Z, β, q) 검증 및 q = INFINITY 극한
2. eval_potential / potential_derivative: 벡터화된 V(r), dV/dr
3. scale_params: 스케일링 법칙 E(Z,β,q) = σ⁻² E(σZ, β/σ, q)
4. StateLabel / parse_state: (ν, ℓ) 라벨과 분광학 표기 ("6s", "7i")

사용 방법:
    from softcoul.potential_utils import PotentialParams, eval_potential, parse_state

    params = PotentialParams(Z=1.0, beta=1.0, q=2.0)
    eval_potential(params, 1.0)      # -0.7071...
    parse_state("7i")                # StateLabel(nu=7, ell=6)

단위는 모두 하트리 원자 단위(m = ħ = e = 1)입니다.
"""

import math
import re
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np

from .exceptions import InvalidInputError

ArrayLike = Union[float, np.ndarray]

# q → ∞ 극한 (사각 우물 + 쿨롱 꼬리)
INFINITY = math.inf

# 분광학 문자 → ℓ
SPECTROSCOPIC_LETTERS = "spdfghi"

_LABEL_PATTERN = re.compile(r"^\s*(\d+)\s*([a-zA-Z])\s*$")


# ============================================================
# 퍼텐셜 파라미터
# ============================================================

@dataclass(frozen=True)
class PotentialParams:
    """
    퍼텐셜 족의 한 원소 (Z, β, q)

    - Z > 0: 결합 세기
    - β >= 0: 절단 길이 (β = 0 이면 순수 쿨롱)
    - q >= 1 또는 INFINITY
    """

    Z: float
    beta: float
    q: float = 1.0

    def __post_init__(self):
        is_valid, message = self.validate()
        if not is_valid:
            raise InvalidInputError(f"퍼텐셜 파라미터 검증 실패: {message}")
        object.__setattr__(self, "Z", float(self.Z))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "q", float(self.q))

    def validate(self) -> Tuple[bool, str]:
        """
        파라미터 검증

        Returns:
            (is_valid, message)
        """
        try:
            Z, beta, q = float(self.Z), float(self.beta), float(self.q)
        except (TypeError, ValueError):
            return False, f"숫자가 아닌 값이 있습니다 (Z={self.Z!r}, beta={self.beta!r}, q={self.q!r})"

        if not math.isfinite(Z) or Z <= 0:
            return False, f"Z 는 양의 유한값이어야 합니다 (입력: {self.Z})"
        if not math.isfinite(beta) or beta < 0:
            return False, f"beta 는 0 이상의 유한값이어야 합니다 (입력: {self.beta})"
        if math.isnan(q) or q < 1:
            return False, f"q 는 1 이상이거나 INFINITY 여야 합니다 (입력: {self.q})"
        return True, "OK"

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.q)

    @property
    def is_coulomb(self) -> bool:
        """β = 0 (모든 q 에 대해 -Z/r)"""
        return self.beta == 0.0

    @property
    def depth(self) -> float:
        """V(0) = -Z/β (β = 0 이면 -inf)"""
        return -math.inf if self.is_coulomb else -self.Z / self.beta

    def with_beta(self, beta: float) -> "PotentialParams":
        return PotentialParams(self.Z, beta, self.q)

    def with_q(self, q: float) -> "PotentialParams":
        return PotentialParams(self.Z, self.beta, q)


def _as_radii(r: ArrayLike) -> np.ndarray:
    radii = np.asarray(r, dtype=float)
    if np.any(radii < 0) or np.any(np.isnan(radii)):
        raise InvalidInputError("반지름은 0 이상이어야 합니다")
    return radii


def _scalar_or_array(values: np.ndarray) -> ArrayLike:
    return float(values) if values.ndim == 0 else values


def eval_potential(params: PotentialParams, r: ArrayLike) -> ArrayLike:
    """
    퍼텐셜 값 V_q(r) 계산 (벡터화)

    Args:
        params: 퍼텐셜 파라미터
        r: 반지름 (스칼라 또는 배열, r >= 0)

    Returns:
        V(r) (하트리). β > 0 이면 V(0) = -Z/β, q = INFINITY 이면
        r < β 에서 -Z/β, r >= β 에서 -Z/r
    """
    radii = _as_radii(r)
    Z, beta, q = params.Z, params.beta, params.q

    if params.is_coulomb:
        with np.errstate(divide="ignore"):
            return _scalar_or_array(-Z / radii)

    if params.is_infinite:
        return _scalar_or_array(-Z / np.maximum(radii, beta))

    # 큰 q 에서 r^q 오버플로 방지: m = max(r, β) 로 정규화
    m = np.maximum(radii, beta)
    scaled = (radii / m) ** q + (beta / m) ** q
    return _scalar_or_array(-Z / (m * scaled ** (1.0 / q)))


def potential_derivative(params: PotentialParams, r: ArrayLike) -> ArrayLike:
    """
    dV/dr = Z r^(q-1) (r^q + β^q)^(-1/q-1)

    q = INFINITY 이면 r < β 에서 0, r > β 에서 Z/r².
    """
    radii = _as_radii(r)
    Z, beta, q = params.Z, params.beta, params.q

    if params.is_coulomb:
        with np.errstate(divide="ignore"):
            return _scalar_or_array(Z / radii**2)

    if params.is_infinite:
        return _scalar_or_array(np.where(radii < beta, 0.0, Z / np.maximum(radii, beta) ** 2))

    m = np.maximum(radii, beta)
    scaled = (radii / m) ** q + (beta / m) ** q
    return _scalar_or_array(Z * (radii / m) ** (q - 1.0) / (m**2 * scaled ** (1.0 + 1.0 / q)))


def potential_parameter_derivatives(
    params: PotentialParams, r: ArrayLike, step: float = 1e-6
) -> Tuple[ArrayLike, ArrayLike]:
    """
    중심 차분으로 (∂V/∂Z, ∂V/∂β) 추정

    β 가 step 보다 작으면 β 방향은 전진 차분을 사용합니다.

    Returns:
        (dV_dZ, dV_dbeta)
    """
    dZ = step * params.Z
    upper_Z = eval_potential(PotentialParams(params.Z + dZ, params.beta, params.q), r)
    lower_Z = eval_potential(PotentialParams(params.Z - dZ, params.beta, params.q), r)
    dV_dZ = (np.asarray(upper_Z) - np.asarray(lower_Z)) / (2 * dZ)

    dbeta = step * max(params.beta, 1.0)
    upper_beta = np.asarray(eval_potential(params.with_beta(params.beta + dbeta), r))
    if params.beta > dbeta:
        lower_beta = np.asarray(eval_potential(params.with_beta(params.beta - dbeta), r))
        dV_dbeta = (upper_beta - lower_beta) / (2 * dbeta)
    else:
        dV_dbeta = (upper_beta - np.asarray(eval_potential(params, r))) / dbeta

    return _scalar_or_array(dV_dZ), _scalar_or_array(dV_dbeta)


def scale_params(params: PotentialParams, sigma: float) -> Tuple[PotentialParams, float]:
    """
    스케일링 변환

    E(Z, β, q) = multiplier · E(σZ, β/σ, q), multiplier = 1/σ²

    Args:
        params: 원래 파라미터
        sigma: 양의 스케일 인자 (σ = 1/Z 이면 E = Z² E(1, Zβ, q))

    Returns:
        (스케일된 파라미터, 에너지 배율)
    """
    if not sigma > 0 or not math.isfinite(sigma):
        raise InvalidInputError(f"스케일 인자는 양의 유한값이어야 합니다 (입력: {sigma})")
    scaled = PotentialParams(params.Z * sigma, params.beta / sigma, params.q)
    return scaled, 1.0 / sigma**2


# ============================================================
# 상태 라벨
# ============================================================

@dataclass(frozen=True, order=True)
class StateLabel:
    """
    상태 라벨 (ν, ℓ)

    ν = n + ℓ, n = (방사 노드 수) + 1 이므로 노드 수는 ν - ℓ - 1 입니다.
    정렬 순서는 (ν, ℓ) 입니다.
    """

    nu: int
    ell: int

    def __post_init__(self):
        if isinstance(self.nu, bool) or isinstance(self.ell, bool):
            raise InvalidInputError("ν, ℓ 은 정수여야 합니다")
        if int(self.nu) != self.nu or int(self.ell) != self.ell:
            raise InvalidInputError(f"ν, ℓ 은 정수여야 합니다 (입력: ν={self.nu}, ℓ={self.ell})")
        object.__setattr__(self, "nu", int(self.nu))
        object.__setattr__(self, "ell", int(self.ell))
        if self.ell < 0:
            raise InvalidInputError(f"ℓ 은 0 이상이어야 합니다 (입력: {self.ell})")
        if self.nu < self.ell + 1:
            raise InvalidInputError(f"ν 는 ℓ+1 = {self.ell + 1} 이상이어야 합니다 (입력: ν={self.nu})")

    @property
    def node_count(self) -> int:
        return self.nu - self.ell - 1

    @property
    def block_index(self) -> int:
        """ℓ 블록 안에서의 순번 (1 = 최저 상태)"""
        return self.nu - self.ell

    @property
    def spectroscopic(self) -> str:
        if self.ell < len(SPECTROSCOPIC_LETTERS):
            return f"{self.nu}{SPECTROSCOPIC_LETTERS[self.ell]}"
        return f"{self.nu}[l={self.ell}]"

    def __str__(self) -> str:
        return self.spectroscopic


def parse_state(label: str) -> StateLabel:
    """
    분광학 표기 문자열을 StateLabel 로 변환

    Args:
        label: "6s", "7i" 등 (정수 + s,p,d,f,g,h,i)

    Returns:
        StateLabel

    Raises:
        InvalidInputError: 형식 오류 또는 ν < ℓ+1 (예: "2d")
    """
    match = _LABEL_PATTERN.match(str(label))
    if not match:
        raise InvalidInputError(f"상태 라벨 형식 오류: {label!r} (예: 1s, 2p, 7i)")

    letter = match.group(2).lower()
    if letter not in SPECTROSCOPIC_LETTERS:
        raise InvalidInputError(f"알 수 없는 궤도 문자: {letter!r} (가능: {SPECTROSCOPIC_LETTERS})")

    return StateLabel(nu=int(match.group(1)), ell=SPECTROSCOPIC_LETTERS.index(letter))


def parse_states(text: str) -> List[StateLabel]:
    """쉼표로 구분된 라벨 목록 파싱 ("1s,2s,2p")"""
    labels = [parse_state(token) for token in text.split(",") if token.strip()]
    if not labels:
        raise InvalidInputError("상태 라벨이 비어 있습니다")
    return labels


def enumerate_states(nu_max: int) -> List[StateLabel]:
    """ν <= nu_max 인 모든 라벨, (ν, ℓ) 순서"""
    if nu_max < 1:
        raise InvalidInputError(f"nu_max 는 1 이상이어야 합니다 (입력: {nu_max})")
    return [StateLabel(nu, ell) for nu in range(1, nu_max + 1) for ell in range(nu)]
