"""
============================================================
점근 반복법(AIM) 모듈 (aim_utils.py)
============================================================

ψ(r) = r^(ℓ+1) e^(-ar) f(r),  a = √(-2E) 로 분해하면
f'' = λ₀ f' + s₀ f,
    λ₀ = 2(a - (ℓ+1)/r)
    s₀ = 2(ℓ+1)a/r + 2V(r)      (q = 1 이면 2V = -2Z/(r+β))

재귀식:
    λ_n = λ'_{n-1} + s_{n-1} + λ₀ λ_{n-1}
    s_n = s'_{n-1} + s₀ λ_{n-1}
    δ_n = λ_n s_{n-1} - λ_{n-1} s_n

δ_n(E) = 0 이 전개 중심에 무관하게 성립하는 E 가 고유값입니다.

β > 0 인 q = 1 퍼텐셜의 수치 탐색은 압축 좌표 x = r/(r+β) 에서 합니다.
r 좌표의 급수는 r = -β 의 로그 특이점에 끌려가 e^(-2aβ) 수준에서 멈추지만,
x 좌표에서는 그 특이점이 x = ∞ 로 밀려납니다.

주요 기능:
1. aim_step / aim_deltas / aim_delta: jet 기반 재귀 계산
2. compact_jets / compact_center: 압축 좌표의 λ₀, s₀ 와 전개 중심
3. aim_solve: 신뢰할 수 있는 δ_n 부호 변화 + brentq, n 과 n+1 의 근 안정화, 중심 무관성 확인
4. exact_case: q = 1 정확해 조건 다항식 (k = 2..9) 과 양의 β 근 (Sturm 분리)
5. polynomial_factor / exact_wavefunction: 다항식 인자 f(r) 과 노드 위치
6. node_location / row3_beta: k = 3 경우의 닫힌 형태

사용 방법:
    from softcoul.aim_utils import exact_case, aim_solve

    case = exact_case(3, ell=0, Z=1.0)   # β = (9 ± 3√3)/2, E = -1/18
    roots = aim_solve(PotentialParams(1.0, 2.0), ell=0, e_bracket=(-0.3, -0.05))
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from .config_utils import DEFAULT_SETTINGS, SolverSettings
from .envelope_utils import envelope_bounds
from .exceptions import ConvergenceError, InvalidInputError
from .jet_utils import TaylorJet
from .potential_utils import PotentialParams, StateLabel

logger = logging.getLogger(__name__)

# 정확해 조건이 알려진 k 범위와 닫힌 형태 파동함수가 주어진 k
EXACT_ROWS = tuple(range(2, 10))
FACTORIZED_ROWS = (2, 3, 4)

# 압축 좌표 전개 중심의 허용 범위 (x₀ < 1/2 이어야 x = 0 쪽 급수가 수렴)
COMPACT_CENTER_RANGE = (0.3, 0.49)
COMPACT_CENTER_LIMIT = 0.5

ROOT_XTOL = 1e-13
EXACT_ROOT_XTOL = 1e-14


# ============================================================
# AIM 상태와 재귀
# ============================================================

@dataclass(frozen=True)
class AimState:
    """
    n 번째 반복의 (λ_n, s_n) 과 재귀에 필요한 (λ₀, s₀)

    a = √(-2E) > 0
    """

    lam: TaylorJet
    s: TaylorJet
    iteration: int
    a: float
    lam0: TaylorJet
    s0: TaylorJet

    @property
    def energy(self) -> float:
        return -0.5 * self.a**2


@dataclass(frozen=True)
class AimRoot:
    """안정화된 AIM 고유값과 안정화가 확인된 반복 횟수"""

    energy: float
    iteration: int

    def __float__(self) -> float:
        return self.energy


def default_center(ell: int, energy: float) -> float:
    """r^(ℓ+1) e^(-ar) 의 최댓값 위치 (ℓ+1)/a"""
    return (ell + 1) / math.sqrt(-2.0 * energy)


def compact_center(params: PotentialParams, ell: int, energy: float, n_max: int) -> float:
    """
    압축 좌표의 기본 전개 중심

    x₀ = 1/(1 + exp(4√(aβ/N))) 에서 x = 0 쪽 오차 (x₀/(1-x₀))^N 과
    x = 1 쪽 오차 exp(-2√(2aβN/(1-x₀))) 가 비슷해집니다.
    """
    a = math.sqrt(-2.0 * energy)
    x0 = 1.0 / (1.0 + math.exp(4.0 * math.sqrt(a * params.beta / n_max)))
    lo, hi = COMPACT_CENTER_RANGE
    return min(max(x0, lo), hi)


def _check_trial(params: PotentialParams, ell: int, energy: float) -> float:
    """시험 에너지 검증 후 a = √(-2E)"""
    if not energy < 0:
        raise InvalidInputError(f"AIM 시험 에너지는 음수여야 합니다 (입력: {energy})")
    if params.is_infinite:
        raise InvalidInputError("q = INFINITY 는 AIM 으로 다룰 수 없습니다 (불연속 퍼텐셜)")
    if ell < 0:
        raise InvalidInputError(f"ℓ 은 0 이상이어야 합니다 (입력: {ell})")
    return math.sqrt(-2.0 * energy)


def _potential_jet(params: PotentialParams, r: TaylorJet) -> TaylorJet:
    if params.is_coulomb:
        return -params.Z * r.reciprocal()
    if params.q == 1.0:
        return -params.Z * (r + params.beta).reciprocal()
    # 일반 q: (r^q + β^q)^(-1/q)
    return -params.Z * (r.power(params.q) + params.beta**params.q).power(-1.0 / params.q)


def initial_jets(
    params: PotentialParams,
    ell: int,
    energy: float,
    center: Optional[float] = None,
    order: int = DEFAULT_SETTINGS.aim_n_max + DEFAULT_SETTINGS.jet_headroom,
) -> AimState:
    """
    r 좌표의 λ₀, s₀ jet 생성

    Args:
        params: 퍼텐셜 (유한 q)
        ell: 각운동량
        energy: 시험 에너지 (E < 0)
        center: 전개 중심 (None 이면 (ℓ+1)/a)
        order: jet 차수 M

    Raises:
        InvalidInputError: E >= 0, q = INFINITY, center <= 0
    """
    a = _check_trial(params, ell, energy)
    r0 = default_center(ell, energy) if center is None else float(center)
    if not r0 > 0:
        raise InvalidInputError(f"jet 중심은 양수여야 합니다 (입력: {r0})")

    r = TaylorJet.variable(r0, order)
    inverse_r = r.reciprocal()
    lam0 = 2.0 * (a - (ell + 1) * inverse_r)
    s0 = 2.0 * (ell + 1) * a * inverse_r + 2.0 * _potential_jet(params, r)
    return AimState(lam=lam0, s=s0, iteration=0, a=a, lam0=lam0, s0=s0)


def compact_jets(
    params: PotentialParams,
    ell: int,
    energy: float,
    center: Optional[float] = None,
    order: int = DEFAULT_SETTINGS.aim_n_max + DEFAULT_SETTINGS.jet_headroom,
) -> AimState:
    """
    압축 좌표 x = r/(r+β) 의 λ₀, s₀ jet 생성 (q = 1, β > 0)

    r = βx/(1-x) 를 대입하면 f_xx = Λ₀ f_x + S₀ f,
        Λ₀ = 2aβ/(1-x)² - 2(ℓ+1)/(x(1-x)) + 2/(1-x)
        S₀ = 2β[(ℓ+1)a/x - Z]/(1-x)³

    Raises:
        InvalidInputError: q ≠ 1, β = 0, center ∉ (0, 1)
    """
    a = _check_trial(params, ell, energy)
    if params.is_coulomb or params.q != 1.0:
        raise InvalidInputError(f"압축 좌표는 q = 1, β > 0 에서만 정의됩니다 ({params})")
    if center is None:
        center = compact_center(params, ell, energy, max(order - DEFAULT_SETTINGS.jet_headroom, 1))
    x0 = float(center)
    if not 0 < x0 < 1:
        raise InvalidInputError(f"압축 좌표 중심은 0 과 1 사이여야 합니다 (입력: {x0})")

    x = TaylorJet.variable(x0, order)
    inverse_x = x.reciprocal()
    inverse_gap = (1.0 - x).reciprocal()
    beta = params.beta
    lam0 = (
        2.0 * a * beta * inverse_gap * inverse_gap
        - 2.0 * (ell + 1) * inverse_x * inverse_gap
        + 2.0 * inverse_gap
    )
    s0 = 2.0 * beta * ((ell + 1) * a * inverse_x - params.Z) * inverse_gap * inverse_gap * inverse_gap
    return AimState(lam=lam0, s=s0, iteration=0, a=a, lam0=lam0, s0=s0)


def to_compact(params: PotentialParams, r: float) -> float:
    """r → x = r/(r+β)"""
    return r / (r + params.beta)


def from_compact(params: PotentialParams, x: float) -> float:
    """x → r = βx/(1-x)"""
    return params.beta * x / (1.0 - x)


def aim_step(state: AimState) -> AimState:
    """
    재귀 한 단계: (λ_n, s_n) → (λ_{n+1}, s_{n+1})

    미분 때문에 jet 차수가 하나 줄어듭니다.

    Raises:
        ConvergenceError: jet 차수 소진
    """
    if state.lam.order < 1 or state.s.order < 1:
        raise ConvergenceError(f"jet 차수 소진: 반복 {state.iteration} 에서 더 진행할 수 없습니다")
    lam = state.lam.derivative() + state.s + state.lam0 * state.lam
    s = state.s.derivative() + state.s0 * state.lam
    return AimState(lam=lam, s=s, iteration=state.iteration + 1, a=state.a, lam0=state.lam0, s0=state.s0)


def _delta(previous: AimState, current: AimState) -> Tuple[float, float]:
    """중심에서의 δ_n 과 규모 |λ_n s_{n-1}| + |λ_{n-1} s_n|"""
    left = current.lam.value * previous.s.value
    right = previous.lam.value * current.s.value
    return left - right, abs(left) + abs(right)


def _normalized(state: AimState) -> AimState:
    # 양의 상수로 나눔: δ 의 부호와 근은 그대로, 오버플로만 막는다
    norm = math.sqrt(float(np.sum(state.lam.coeffs**2) + np.sum(state.s.coeffs**2)))
    if norm == 0 or not math.isfinite(norm):
        return state
    return AimState(
        lam=state.lam.scaled(1.0 / norm),
        s=state.s.scaled(1.0 / norm),
        iteration=state.iteration,
        a=state.a,
        lam0=state.lam0,
        s0=state.s0,
    )


def _delta_sequence(
    params: PotentialParams,
    ell: int,
    energy: float,
    n_max: int,
    center: Optional[float],
    order: int,
    compact: bool = False,
) -> Tuple[np.ndarray, np.ndarray]:
    if n_max < 1:
        raise InvalidInputError(f"반복 횟수는 1 이상이어야 합니다 (입력: {n_max})")
    if order < n_max:
        raise ConvergenceError(f"jet 차수 {order} 로는 {n_max} 회 반복할 수 없습니다")

    start = compact_jets if compact else initial_jets
    state = _normalized(start(params, ell, energy, center, order))
    deltas = np.empty(n_max)
    scales = np.empty(n_max)
    for n in range(n_max):
        following = aim_step(state)
        deltas[n], scales[n] = _delta(state, following)
        state = _normalized(following)
    return deltas, scales


def aim_deltas(
    params: PotentialParams,
    ell: int,
    energy: float,
    n_max: int,
    center: Optional[float] = None,
    order: Optional[int] = None,
    compact: bool = False,
) -> np.ndarray:
    """
    δ_1 .. δ_{n_max} 을 한 번의 재귀로 계산

    매 단계 jet 쌍을 양의 인자로 정규화하므로 값의 크기는 임의적이고
    부호와 영점만 의미가 있습니다. compact=True 이면 center 는 x₀ 입니다.
    """
    order = n_max + DEFAULT_SETTINGS.jet_headroom if order is None else order
    deltas, _ = _delta_sequence(params, ell, energy, n_max, center, order, compact)
    return deltas


def relative_delta(
    params: PotentialParams,
    ell: int,
    energy: float,
    n: int,
    center: Optional[float] = None,
    compact: bool = False,
) -> float:
    """|δ_n| / (|λ_n s_{n-1}| + |λ_{n-1} s_n|): 상쇄 정도 (0 이면 정확한 종료)"""
    deltas, scales = _delta_sequence(
        params, ell, energy, n, center, n + DEFAULT_SETTINGS.jet_headroom, compact
    )
    if scales[-1] == 0:
        return 0.0
    return abs(deltas[-1]) / scales[-1]


def aim_delta(
    params: PotentialParams, ell: int, energy: float, n: int, center: Optional[float] = None
) -> float:
    """n 번째 반복의 δ_n (r 좌표 중심 r0 에서)"""
    return float(aim_deltas(params, ell, energy, n, center)[-1])


# ============================================================
# 수치 고유값 (δ_n 근 안정화)
# ============================================================

def default_bracket(params: PotentialParams, ell: int) -> Tuple[float, float]:
    """
    ℓ 블록 바닥 상태의 포락선 한계에 여유를 둔 에너지 구간

    하한은 하한 경계보다 10% 아래에서 V(0) = -Z/β 위로 자르고,
    상한은 상한 경계의 절반이되 하한의 2% 보다 0 에 가깝지 않게 둡니다.
    """
    lower, upper = envelope_bounds(params, StateLabel(ell + 1, ell))
    lo = lower.value - 0.1 * abs(lower.value)
    if not params.is_coulomb:
        lo = max(lo, params.depth * (1.0 - 1e-9))
    hi = min(0.5 * upper.value, 0.02 * lo)
    return lo, hi


def _sign_change_brackets(
    energies: np.ndarray, values: np.ndarray, trusted: np.ndarray
) -> List[Tuple[float, float]]:
    """
    신뢰할 수 있는 이웃 격자점 사이의 엄격한 부호 변화

    잡음 바닥 아래의 값은 부호가 의미 없으므로 건너뜁니다.
    """
    indices = np.flatnonzero(trusted & np.isfinite(values))
    brackets = []
    for i, j in zip(indices[:-1], indices[1:]):
        if values[i] * values[j] < 0:
            brackets.append((float(energies[i]), float(energies[j])))
    return brackets


def _refine_roots(
    function: Callable[[float], float], brackets: Sequence[Tuple[float, float]]
) -> List[float]:
    """brentq 정밀화, 구간 끝점에 붙은 근은 버림"""
    roots = []
    for lo, hi in brackets:
        try:
            root = brentq(function, lo, hi, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps)
        except ValueError:
            logger.debug("brentq 구간 [%g, %g] 실패", lo, hi)
            continue
        if min(root - lo, hi - root) <= 2 * ROOT_XTOL:
            logger.debug("구간 끝점 근 E=%.12g 버림 ([%g, %g])", root, lo, hi)
            continue
        roots.append(root)
    return roots


def _alternate_centers(params: PotentialParams, center: float, compact: bool) -> List[float]:
    """중심 무관성 확인용 다른 전개 중심 (r 기준 0.5·r₀, 0.9·r₀, 2·r₀)"""
    if not compact:
        return [0.5 * center, 2.0 * center]
    r0 = from_compact(params, center)
    images = [to_compact(params, factor * r0) for factor in (0.5, 0.9, 2.0)]
    return [x for x in images if x < COMPACT_CENTER_LIMIT]


def _polished(
    params: PotentialParams,
    ell: int,
    root: AimRoot,
    n: int,
    center: float,
    compact: bool,
    settings: SolverSettings,
) -> AimRoot:
    """안정화된 근을 더 높은 반복 n 의 δ_n 으로 E* ± w 안에서 다시 정밀화"""
    width = settings.aim_center_window * abs(root.energy)

    def delta(e: float) -> float:
        return float(_delta_sequence(params, ell, e, n, center, n + 2, compact)[0][-1])

    roots = _refine_roots(delta, [(root.energy - width, root.energy + width)])
    if len(roots) != 1:
        return root
    return AimRoot(energy=roots[0], iteration=root.iteration)


def _center_independent(
    params: PotentialParams,
    ell: int,
    root: AimRoot,
    center: float,
    compact: bool,
    settings: SolverSettings,
) -> bool:
    """
    다른 중심들에서 E* ± w 사이의 δ_n 부호 변화 확인

    잡음 바닥 아래 값은 판정 보류로 보고, 하나라도 반대 결론이면 기각합니다.
    """
    n = root.iteration + 1
    width = settings.aim_center_window * abs(root.energy)
    conclusive = 0
    for alternate in _alternate_centers(params, center, compact):
        signs = []
        for energy in (root.energy - width, root.energy + width):
            deltas, scales = _delta_sequence(params, ell, energy, n, alternate, n + 2, compact)
            if abs(deltas[-1]) > settings.aim_noise_floor * scales[-1]:
                signs.append(math.copysign(1.0, deltas[-1]))
        if len(signs) < 2:
            continue
        if signs[0] == signs[1]:
            logger.warning("AIM 근 E=%.10g 가 중심 %.6g 에서 재현되지 않음 (%s, ℓ=%d)",
                           root.energy, alternate, params, ell)
            return False
        conclusive += 1
    return conclusive > 0


def aim_solve(
    params: PotentialParams,
    ell: int,
    e_bracket: Tuple[float, float],
    n_max: int = DEFAULT_SETTINGS.aim_n_max,
    settings: SolverSettings = DEFAULT_SETTINGS,
    center: Optional[float] = None,
) -> List[AimRoot]:
    """
    에너지 구간 안의 안정화된 AIM 고유값

    1. 구간을 aim_grid_points 개로 나눠 δ_n(E) 를 모든 n 에 대해 한 번에 계산
    2. |δ_n| 이 잡음 바닥(aim_noise_floor × 규모) 위인 점 사이의 엄격한 부호 변화만 brentq 로 정밀화
    3. n = n_min, n_min + aim_n_stride, ... 에서 n 과 n+1 의 근이 aim_tolerance 이내면 채택
    4. 채택한 근은 다른 전개 중심에서도 부호 변화가 재현되어야 반환
    5. 반환값은 n + aim_n_stride 반복에서 E* ± w 안으로 다시 정밀화한 근

    β > 0 이면 압축 좌표 x = r/(r+β) 에서, β = 0 이면 r 좌표에서 계산합니다.

    Args:
        params: 퍼텐셜 (q = 1, 또는 β = 0)
        ell: 각운동량
        e_bracket: (E_lo, E_hi), -Z/β < E_lo < E_hi < 0
        n_max: 최대 반복 횟수 (>= 10)
        settings: aim_n_min, aim_n_stride, aim_grid_points, aim_tolerance, aim_noise_floor, aim_center_window
        center: 전개 중심 (압축 좌표면 x₀, 아니면 r₀; None 이면 구간 중앙 에너지로 정함)

    Returns:
        List[AimRoot]: 에너지 오름차순

    Raises:
        InvalidInputError: 구간/반복 횟수 오류, q ≠ 1
        ConvergenceError: 안정화되고 중심 무관성이 확인된 근이 하나도 없음
    """
    lo, hi = (float(e) for e in e_bracket)
    if not lo < hi < 0:
        raise InvalidInputError(f"에너지 구간은 E_lo < E_hi < 0 이어야 합니다 (입력: {e_bracket})")
    if params.is_infinite or (not params.is_coulomb and params.q != 1.0):
        raise InvalidInputError(f"AIM 고유값 탐색은 q = 1 (또는 β = 0) 만 지원합니다 (입력: q={params.q})")
    if not params.is_coulomb and lo <= params.depth:
        raise InvalidInputError(f"에너지 구간 하한이 V(0) = {params.depth:.6g} 이하입니다")
    if n_max < 10:
        raise InvalidInputError(f"n_max 는 10 이상이어야 합니다 (입력: {n_max})")

    compact = not params.is_coulomb
    n_min = min(settings.aim_n_min, n_max - 1)
    # 중심은 E 와 무관하게 고정해야 δ(E) 가 연속이다
    reference = 0.5 * (lo + hi)
    if center is None:
        center = compact_center(params, ell, reference, n_max) if compact else default_center(ell, reference)
    order = n_max + settings.jet_headroom

    grid = np.linspace(lo, hi, settings.aim_grid_points)
    sequences = [_delta_sequence(params, ell, e, n_max, center, order, compact) for e in grid]
    table = np.array([deltas for deltas, _ in sequences])
    scales = np.array([scale for _, scale in sequences])
    trusted = np.abs(table) > settings.aim_noise_floor * scales

    def roots_at(n: int) -> List[float]:
        def delta(e: float) -> float:
            return float(_delta_sequence(params, ell, e, n, center, n + 2, compact)[0][-1])

        return _refine_roots(delta, _sign_change_brackets(grid, table[:, n - 1], trusted[:, n - 1]))

    levels = list(range(n_min, n_max, settings.aim_n_stride))
    if levels[-1] != n_max - 1:
        levels.append(n_max - 1)

    accepted: List[AimRoot] = []
    unresolved: List[float] = []
    for n in levels:
        roots, following = roots_at(n), roots_at(n + 1)
        unresolved = []
        for root in roots:
            partner = min(following, key=lambda x: abs(x - root), default=None)
            if partner is not None and abs(partner - root) < settings.aim_tolerance:
                window = settings.aim_center_window * abs(partner)
                if not any(abs(partner - known.energy) < window for known in accepted):
                    accepted.append(AimRoot(energy=partner, iteration=n))
            else:
                unresolved.append(root)
        if roots and not unresolved:
            break

    for root in unresolved:
        logger.warning(
            "AIM 근 E≈%.10g 가 n_max=%d 까지 안정화되지 않음 (%s, ℓ=%d)", root, n_max, params, ell
        )

    confirmed = [
        _polished(
            params, ell, root, min(n_max, root.iteration + settings.aim_n_stride), center, compact, settings
        )
        for root in accepted
        if _center_independent(params, ell, root, center, compact, settings)
    ]
    if not confirmed:
        raise ConvergenceError(
            f"not converged: AIM 근이 n_max={n_max} 까지 안정화되지 않음 "
            f"({params}, ℓ={ell}, 구간 {e_bracket})"
        )
    return sorted(confirmed, key=lambda root: root.energy)


# ============================================================
# q = 1 정확해 조건 (k = 2..9)
# ============================================================

def _row2(l: float, Z: float) -> List[float]:
    return [-Z, l + 2]


def _row3(l: float, Z: float) -> List[float]:
    return [
        Z**2 * (l + 2),
        -3 * Z * (l + 2) * (l + 3),
        (2 * l + 3) * (l + 3) ** 2,
    ]


def _row4(l: float, Z: float) -> List[float]:
    return [
        -Z**3 * (l + 3) * (l + 2),
        6 * Z**2 * (l + 4) * (l + 3) * (l + 2),
        -Z * (11 * l**2 + 50 * l + 54) * (l + 4) ** 2,
        3 * (l + 2) * (2 * l + 3) * (l + 4) ** 3,
    ]


def _row5(l: float, Z: float) -> List[float]:
    return [
        Z**4 * (l + 4) * (l + 3) * (l + 2),
        -10 * Z**3 * (l + 5) * (l + 4) * (l + 3) * (l + 2),
        Z**2 * (35 * l**3 + 300 * l**2 + 823 * l + 720) * (l + 5) ** 2,
        -Z * (50 * l**3 + 381 * l**2 + 925 * l + 720) * (l + 5) ** 3,
        6 * (2 * l + 5) * (2 * l + 3) * (l + 2) * (l + 5) ** 4,
    ]


def _row6(l: float, Z: float) -> List[float]:
    return [
        -Z**5 * (l + 5) * (l + 4) * (l + 3) * (l + 2),
        15 * Z**4 * (l + 6) * (l + 5) * (l + 4) * (l + 3) * (l + 2),
        -Z**3 * (85 * l**4 + 1155 * l**3 + 5678 * l**2 + 11928 * l + 9000) * (l + 6) ** 2,
        3 * Z**2 * (75 * l**4 + 952 * l**3 + 4359 * l**2 + 8522 * l + 6000) * (l + 6) ** 3,
        -Z * (274 * l**4 + 3073 * l**3 + 12411 * l**2 + 21492 * l + 13500) * (l + 6) ** 4,
        30 * (2 * l + 5) * (2 * l + 3) * (l + 3) * (l + 2) * (l + 6) ** 5,
    ]


def _row7(l: float, Z: float) -> List[float]:
    return [
        Z**6 * (l + 6) * (l + 5) * (l + 4) * (l + 3) * (l + 2),
        -21 * Z**5 * (l + 7) * (l + 6) * (l + 5) * (l + 4) * (l + 3) * (l + 2),
        Z**4
        * (175 * l**5 + 3430 * l**4 + 26033 * l**3 + 95354 * l**2 + 167976 * l + 113400)
        * (l + 7) ** 2,
        -3 * Z**3
        * (245 * l**5 + 4592 * l**4 + 33271 * l**3 + 116224 * l**2 + 195300 * l + 126000)
        * (l + 7) ** 3,
        Z**2
        * (1624 * l**5 + 28182 * l**4 + 188607 * l**3 + 608332 * l**2 + 945783 * l + 567000)
        * (l + 7) ** 4,
        -9 * Z
        * (196 * l**5 + 3004 * l**4 + 17753 * l**3 + 50746 * l**2 + 70301 * l + 37800)
        * (l + 7) ** 5,
        90 * (2 * l + 7) * (2 * l + 5) * (2 * l + 3) * (l + 3) * (l + 2) * (l + 7) ** 6,
    ]


def _row8(l: float, Z: float) -> List[float]:
    return [
        -Z**7 * (l + 7) * (l + 6) * (l + 5) * (l + 4) * (l + 3) * (l + 2),
        28 * Z**6 * (l + 8) * (l + 7) * (l + 6) * (l + 5) * (l + 4) * (l + 3) * (l + 2),
        -2 * Z**5
        * (161 * l**6 + 4284 * l**5 + 46109 * l**4 + 256284 * l**3 + 773558 * l**2 + 1198080 * l + 740880)
        * (l + 8) ** 2,
        2 * Z**4
        * (980 * l**6 + 25263 * l**5 + 263144 * l**4 + 1414449 * l**3 + 4127804 * l**2 + 6184116 * l + 3704400)
        * (l + 8) ** 3,
        -Z**3
        * (6769 * l**6 + 165501 * l**5 + 1632238 * l**4 + 8299620 * l**3 + 22916602 * l**2 + 32533488 * l + 18522000)
        * (l + 8) ** 4,
        2 * Z**2
        * (6566 * l**6 + 148023 * l**5 + 1343681 * l**4 + 6287868 * l**3 + 16004408 * l**2 + 21011364 * l + 11113200)
        * (l + 8) ** 5,
        -9 * Z
        * (1452 * l**6 + 28968 * l**5 + 232875 * l**4 + 968195 * l**3 + 2199048 * l**2 + 2589112 * l + 1234800)
        * (l + 8) ** 6,
        630 * (2 * l + 7) * (2 * l + 5) * (2 * l + 3) * (l + 4) * (l + 3) * (l + 2) * (l + 8) ** 7,
    ]


def _row9(l: float, Z: float) -> List[float]:
    return [
        Z**8 * (l + 8) * (l + 7) * (l + 6) * (l + 5) * (l + 4) * (l + 3) * (l + 2),
        -36 * Z**7 * (l + 9) * (l + 8) * (l + 7) * (l + 6) * (l + 5) * (l + 4) * (l + 3) * (l + 2),
        6 * Z**6
        * (91 * l**7 + 3150 * l**6 + 45472 * l**5 + 354060 * l**4 + 1601869 * l**3
           + 4198770 * l**2 + 5883828 * l + 3386880)
        * (l + 9) ** 2,
        -18 * Z**5
        * (252 * l**7 + 8519 * l**6 + 120015 * l**5 + 911495 * l**4 + 4021353 * l**3
           + 10279346 * l**2 + 14054940 * l + 7902720)
        * (l + 9) ** 3,
        3 * Z**4
        * (7483 * l**7 + 243355 * l**6 + 3294188 * l**5 + 24020450 * l**4 + 101717325 * l**3
           + 249667695 * l**2 + 328201704 * l + 177811200)
        * (l + 9) ** 4,
        -18 * Z**3
        * (3738 * l**7 + 114755 * l**6 + 1464128 * l**5 + 10054742 * l**4 + 40105738 * l**3
           + 92835203 * l**2 + 115350696 * l + 59270400)
        * (l + 9) ** 5,
        Z**2
        * (118124 * l**7 + 3338080 * l**6 + 39154679 * l**5 + 247223313 * l**4 + 907897077 * l**3
           + 1939695507 * l**2 + 2232161820 * l + 1066867200)
        * (l + 9) ** 6,
        -18 * Z
        * (6088 * l**7 + 152716 * l**6 + 1592078 * l**5 + 8960617 * l**4 + 29441156 * l**3
           + 56502567 * l**2 + 58655178 * l + 25401600)
        * (l + 9) ** 7,
        2520 * (2 * l + 9) * (2 * l + 7) * (2 * l + 5) * (2 * l + 3) * (l + 4) * (l + 3) * (l + 2) * (l + 9) ** 8,
    ]


# β 의 내림차순 계수
_TABLE_ROWS: Dict[int, Callable[[float, float], List[float]]] = {
    2: _row2, 3: _row3, 4: _row4, 5: _row5, 6: _row6, 7: _row7, 8: _row8, 9: _row9,
}


def _validate_case(row: int, ell: int, Z: float) -> None:
    if row not in EXACT_ROWS:
        raise InvalidInputError(f"정확해 조건은 k = 2..9 만 있습니다 (입력: {row})")
    if ell < 0 or int(ell) != ell:
        raise InvalidInputError(f"ℓ 은 0 이상의 정수여야 합니다 (입력: {ell})")
    if not Z > 0:
        raise InvalidInputError(f"Z 는 양수여야 합니다 (입력: {Z})")


def table_polynomial(row: int, ell: int, Z: float) -> np.ndarray:
    """
    k 번째 정확해 조건을 β 의 다항식으로 (오름차순 계수)

    k = 2: -Zβ + ℓ + 2,  k = 3: Z²(ℓ+2)β² - 3Z(ℓ+2)(ℓ+3)β + (2ℓ+3)(ℓ+3)², ...
    """
    _validate_case(row, ell, Z)
    return np.array(_TABLE_ROWS[row](float(ell), float(Z))[::-1], dtype=float)


def _factor_coefficients(row: int, ell: int, Z: float, beta: float, count: int) -> np.ndarray:
    """
    q = 1 분해 방정식의 급수해 f = Σ c_j r^j (c_0 = 1), a = Z/(ℓ+k)

    β(j+1)(j+2ℓ+2) c_{j+1} = [2aβ(j+ℓ+1) - j(j+2ℓ+1)] c_j + 2[a(j+ℓ) - Z] c_{j-1}
    """
    a = Z / (ell + row)
    c = np.zeros(count)
    c[0] = 1.0
    for j in range(count - 1):
        previous = c[j - 1] if j >= 1 else 0.0
        c[j + 1] = (
            (2 * a * beta * (j + ell + 1) - j * (j + 2 * ell + 1)) * c[j]
            + 2 * (a * (j + ell) - Z) * previous
        ) / (beta * (j + 1) * (j + 2 * ell + 2))
    return c


def polynomial_factor(row: int, ell: int, Z: float, beta: float) -> Polynomial:
    """
    ψ = r^(ℓ+1) e^(-ar) f(r) 의 다항식 인자 f (차수 k-1)

    β 가 k 번째 조건의 근일 때 급수가 k-1 차에서 끊깁니다.
    """
    _validate_case(row, ell, Z)
    if not beta > 0:
        raise InvalidInputError(f"β 는 양수여야 합니다 (입력: {beta})")
    return Polynomial(_factor_coefficients(row, ell, Z, beta, row))


def termination_residual(row: int, ell: int, Z: float, beta: float) -> float:
    """급수의 k 차 계수 c_k (정확해 조건의 근에서 0)"""
    _validate_case(row, ell, Z)
    return float(_factor_coefficients(row, ell, Z, beta, row + 1)[-1])


def _unit(poly: Polynomial) -> Polynomial:
    scale = float(np.max(np.abs(poly.coef)))
    return poly if scale == 0 else poly / scale


def sturm_sequence(poly: Polynomial) -> List[Polynomial]:
    """
    Sturm 열 p, p', -rem(p, p'), ...

    각 항은 최대 계수 1 로 정규화합니다. 나머지가 0 이 되면 (중근) 거기서 끝납니다.
    """
    chain = [_unit(poly), _unit(poly.deriv())]
    while chain[-1].degree() > 0:
        remainder = (-(chain[-2] % chain[-1])).trim(tol=1e-13)
        if remainder.degree() == 0 and remainder.coef[0] == 0:
            break
        chain.append(_unit(remainder))
    return chain


def sign_variations(chain: Sequence[Polynomial], x: float) -> int:
    """x 에서 Sturm 열의 부호 바뀜 횟수 (0 은 건너뜀)"""
    signs = [math.copysign(1.0, value) for value in (float(p(x)) for p in chain) if value != 0]
    return sum(1 for first, second in zip(signs[:-1], signs[1:]) if first != second)


def _variable_scale(poly: Polynomial) -> float:
    """근의 기하 평균 크기 |c₀/c_n|^(1/n)"""
    coef = poly.coef
    return float(abs(coef[0] / coef[-1]) ** (1.0 / (len(coef) - 1)))


def positive_roots(poly: Polynomial, xtol: float = EXACT_ROOT_XTOL, max_bisections: int = 200) -> List[float]:
    """
    다항식의 양의 실근 (오름차순)

    변수를 근의 크기로 재조정한 뒤 Sturm 열 개수로 근 하나씩 분리하고
    brentq 로 정밀화합니다.
    """
    poly = poly.trim()
    while poly.degree() > 0 and poly.coef[0] == 0:
        # x = 0 근 제거
        poly = Polynomial(poly.coef[1:])
    if poly.degree() < 1:
        return []

    scale = _variable_scale(poly)
    scaled = _unit(Polynomial(poly.coef * scale ** np.arange(len(poly.coef))))
    chain = sturm_sequence(scaled)
    # Cauchy 상한
    bound = 1.0 + float(np.max(np.abs(scaled.coef[:-1])) / abs(scaled.coef[-1]))

    pending = [(0.0, bound, sign_variations(chain, 0.0), sign_variations(chain, bound), 0)]
    intervals: List[Tuple[float, float]] = []
    while pending:
        lo, hi, v_lo, v_hi, depth = pending.pop()
        count = v_lo - v_hi
        if count <= 0:
            continue
        if count == 1 and scaled(hi) == 0:
            intervals.append((hi, hi))
            continue
        if count == 1 and scaled(lo) * scaled(hi) < 0:
            intervals.append((lo, hi))
            continue
        mid = 0.5 * (lo + hi)
        if depth >= max_bisections:
            logger.warning("근 분리 실패: [%g, %g] 에 근 %d 개 (중근 가능성)", scale * lo, scale * hi, count)
            intervals.append((mid, mid))
            continue
        v_mid = sign_variations(chain, mid)
        pending.append((lo, mid, v_lo, v_mid, depth + 1))
        pending.append((mid, hi, v_mid, v_hi, depth + 1))

    roots = []
    for lo, hi in intervals:
        if lo == hi:
            roots.append(scale * lo)
        else:
            t = brentq(scaled, lo, hi, xtol=xtol / scale, rtol=4 * np.finfo(float).eps)
            roots.append(scale * t)
    return sorted(roots)


@dataclass(frozen=True)
class ExactCase:
    """
    k 번째 정확해 조건의 인스턴스

    모든 양의 근 β 에서 에너지는 -Z²/(2(ℓ+k)²) 로 같습니다.
    node_counts[i] 는 beta_roots[i] 에서 f(r) 의 양의 실근 개수입니다.
    """

    row: int
    ell: int
    Z: float
    beta_polynomial: np.ndarray
    beta_roots: Tuple[float, ...]
    energy: float
    node_counts: Tuple[int, ...]

    @property
    def a(self) -> float:
        return self.Z / (self.ell + self.row)

    @property
    def states(self) -> Tuple[StateLabel, ...]:
        """각 근이 실현하는 상태 (ν = ℓ + 1 + 노드 수)"""
        return tuple(StateLabel(self.ell + 1 + nodes, self.ell) for nodes in self.node_counts)

    def residual(self, beta: float) -> float:
        """최대 항 크기 max|c_i β^i| 대비 조건 다항식 값"""
        terms = np.abs(self.beta_polynomial) * abs(beta) ** np.arange(len(self.beta_polynomial))
        return abs(float(Polynomial(self.beta_polynomial)(beta))) / float(np.max(terms))


def factor_nodes(row: int, ell: int, Z: float, beta: float) -> List[float]:
    """f(r) 의 양의 실근 (파동함수 노드)"""
    factor = polynomial_factor(row, ell, Z, beta)
    return positive_roots(factor)


def exact_case(row: int, ell: int, Z: float) -> ExactCase:
    """
    k 번째 정확해 조건의 양의 β 근과 공통 에너지

    Args:
        row: k ∈ {2..9} (a = Z/(ℓ+k))
        ell: 각운동량
        Z: 결합 세기

    Returns:
        ExactCase: 오름차순 β 근, E = -Z²/(2(ℓ+k)²), 근별 노드 수

    Raises:
        ConvergenceError: 양의 실근을 찾지 못함
    """
    coefficients = table_polynomial(row, ell, Z)
    roots = tuple(positive_roots(Polynomial(coefficients)))
    if not roots:
        raise ConvergenceError(f"no admissible β: k={row}, ℓ={ell}, Z={Z}")

    node_counts = tuple(len(factor_nodes(row, ell, Z, beta)) for beta in roots)
    case = ExactCase(
        row=row,
        ell=int(ell),
        Z=float(Z),
        beta_polynomial=coefficients,
        beta_roots=roots,
        energy=-Z**2 / (2.0 * (ell + row) ** 2),
        node_counts=node_counts,
    )
    for beta in roots:
        if case.residual(beta) > 1e-10:
            logger.warning("k=%d, ℓ=%d: β=%.12g 에서 조건 잔차 %.2e", row, ell, beta, case.residual(beta))
    return case


# ============================================================
# 닫힌 형태 파동함수
# ============================================================

@dataclass(frozen=True)
class ExactWavefunction:
    """ψ(r) = r^(ℓ+1) e^(-ar) f(r)"""

    case: ExactCase
    beta: float
    factor: Polynomial
    nodes: Tuple[float, ...]

    def __call__(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return r ** (self.case.ell + 1) * np.exp(-self.case.a * r) * self.factor(r)


def exact_wavefunction(case: ExactCase, beta_root: float) -> ExactWavefunction:
    """
    정확해의 다항식 인자와 노드 위치

    Raises:
        InvalidInputError: k ∉ {2, 3, 4} 또는 β 가 case 의 근이 아님
    """
    if case.row not in FACTORIZED_ROWS:
        raise InvalidInputError(f"닫힌 형태 파동함수는 k = 2, 3, 4 만 지원합니다 (입력: {case.row})")
    if not any(math.isclose(beta_root, root, rel_tol=1e-9) for root in case.beta_roots):
        raise InvalidInputError(f"β={beta_root} 는 k={case.row} 조건의 근이 아닙니다 {case.beta_roots}")

    factor = polynomial_factor(case.row, case.ell, case.Z, beta_root)
    nodes = tuple(factor_nodes(case.row, case.ell, case.Z, beta_root))
    return ExactWavefunction(case=case, beta=float(beta_root), factor=factor, nodes=nodes)


def exact_residual(case: ExactCase, beta: float, radii: np.ndarray) -> float:
    """
    닫힌 형태 ψ 를 방사 방정식에 대입한 잔차 max|Hψ - Eψ| / max|ψ|

    ψ'' = g(f'' + 2u f' + (u² + u') f),  g = r^(ℓ+1) e^(-ar),  u = (ℓ+1)/r - a
    """
    radii = np.asarray(radii, dtype=float)
    ell, a, Z = case.ell, case.a, case.Z
    factor = polynomial_factor(case.row, ell, Z, beta)
    f, f1, f2 = factor(radii), factor.deriv(1)(radii), factor.deriv(2)(radii)

    g = radii ** (ell + 1) * np.exp(-a * radii)
    u = (ell + 1) / radii - a
    du = -(ell + 1) / radii**2
    psi = g * f
    psi2 = g * (f2 + 2 * u * f1 + (u**2 + du) * f)

    potential = -Z / (radii + beta)
    h_psi = -0.5 * psi2 + (ell * (ell + 1) / (2 * radii**2) + potential) * psi
    return float(np.max(np.abs(h_psi - case.energy * psi)) / np.max(np.abs(psi)))


def row3_beta(ell: int, Z: float, sign: int) -> float:
    """
    k = 3 조건의 두 근 닫힌 형태

    β = (ℓ+3)[3(ℓ+2) ± √((ℓ+2)(ℓ+6))] / (2(ℓ+2)Z)
    sign = +1 → 큰 근 (노드 없음), -1 → 작은 근 (노드 1개)
    """
    if sign not in (1, -1):
        raise InvalidInputError(f"sign 은 +1 또는 -1 이어야 합니다 (입력: {sign})")
    root = math.sqrt((ell + 2) * (ell + 6))
    return (ell + 3) * (3 * (ell + 2) + sign * root) / (2 * (ell + 2) * Z)


def node_location(ell: int, Z: float) -> float:
    """k = 3 작은 β 근에서 파동함수의 유일한 노드 위치"""
    root = math.sqrt((ell + 2) * (ell + 6))
    prefactor = -0.5 * (ell + 3) * (2 * ell + 3) / ((ell + 2) * (ell - root))
    bracket = 3 * (ell + 2) - root + math.sqrt(2 * (ell + 2) * (ell + 4 + root))
    return prefactor * bracket / Z
