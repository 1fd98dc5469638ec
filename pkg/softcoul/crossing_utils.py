"""
============================================================
준위 교차 탐색 모듈 (crossing_utils.py)
============================================================

E_νℓ(β) 곡선들을 훑어 두 상태의 에너지 차 ΔE(β) 의 부호 변화를 찾고
brentq 로 교차점 β* 를 정밀화합니다.

주요 기능:
1. scan_levels: β 격자 위 에너지 표 (ℓ 블록 단위 계산, 프로세스 병렬)
2. scan_pair / find_crossing: 한 쌍의 교차점과 근접 축퇴
3. audit_conjecture: ν' >= ν+1 이고 ℓ' >= ℓ+3 인 쌍만 교차한다는 규칙 점검
4. q_sweep: β 고정, q 를 바꿀 때 교차가 없는지 확인

사용 방법:
    from softcoul.crossing_utils import find_crossing
    from softcoul.potential_utils import parse_state

    records = find_crossing(1.0, 1.0, (parse_state("6s"), parse_state("7f")), (0.0, 100.0))

상태는 ℓ 블록 안의 순번으로 추적하므로 교차점을 지나도 곡선이 섞이지 않습니다.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import brentq, minimize_scalar

from .config_utils import DEFAULT_SETTINGS, SolverSettings, resolve_workers
from .eigensolver_utils import solve_block
from .exceptions import ConvergenceError, InvalidInputError, UnboundStateError
from .logging_utils import log_banner, progress
from .potential_utils import PotentialParams, StateLabel, enumerate_states

logger = logging.getLogger(__name__)

CROSSING_COLUMNS = ["state_a", "state_b", "beta_star", "beta_lo", "beta_hi", "residual", "rule_compliant"]

# 근접 축퇴 후보로 볼 격자점 |ΔE| 상한
NEAR_DEGENERACY_SCREEN = 1e-4


# ============================================================
# 결과 타입
# ============================================================

@dataclass(frozen=True)
class CrossingRecord:
    """
    교차 하나: state_b 가 더 높은 ν (같으면 더 높은 ℓ)

    rule_compliant = (ν_b >= ν_a + 1 and ℓ_b >= ℓ_a + 3)
    """

    state_a: StateLabel
    state_b: StateLabel
    beta_star: float
    bracket: Tuple[float, float]
    residual: float
    rule_compliant: bool

    def as_row(self) -> Dict[str, object]:
        return {
            "state_a": str(self.state_a),
            "state_b": str(self.state_b),
            "beta_star": self.beta_star,
            "beta_lo": self.bracket[0],
            "beta_hi": self.bracket[1],
            "residual": self.residual,
            "rule_compliant": self.rule_compliant,
        }


@dataclass(frozen=True)
class NearDegeneracy:
    """부호 변화 없이 ΔE 가 0 에 닿는 지점"""

    state_a: StateLabel
    state_b: StateLabel
    beta: float
    gap: float


@dataclass
class PairScan:
    state_a: StateLabel
    state_b: StateLabel
    crossings: List[CrossingRecord] = field(default_factory=list)
    near_degeneracies: List[NearDegeneracy] = field(default_factory=list)
    complete: bool = True


@dataclass
class AuditReport:
    """교차 규칙 점검 결과"""

    crossed: List[Tuple[StateLabel, StateLabel]] = field(default_factory=list)
    not_crossed: List[Tuple[StateLabel, StateLabel]] = field(default_factory=list)
    counterexamples: List[CrossingRecord] = field(default_factory=list)
    shielding_violations: List[Tuple[CrossingRecord, StateLabel]] = field(default_factory=list)
    incomplete: List[Tuple[StateLabel, StateLabel]] = field(default_factory=list)
    near_degeneracies: List[NearDegeneracy] = field(default_factory=list)
    records: List[CrossingRecord] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        """모든 교차 기록 (CSV 출력용)"""
        return crossings_frame(self.records)


def crossings_frame(records: Iterable[CrossingRecord]) -> pd.DataFrame:
    ordered = sorted(records, key=lambda rec: (rec.state_a, rec.state_b, rec.beta_star))
    return pd.DataFrame([rec.as_row() for rec in ordered], columns=CROSSING_COLUMNS)


def rule_compliant(state_a: StateLabel, state_b: StateLabel) -> bool:
    lower, upper = order_pair(state_a, state_b)
    return upper.nu >= lower.nu + 1 and upper.ell >= lower.ell + 3


def order_pair(state_a: StateLabel, state_b: StateLabel) -> Tuple[StateLabel, StateLabel]:
    """(ν, ℓ) 가 작은 쪽을 앞으로"""
    if state_a == state_b:
        raise InvalidInputError(f"같은 상태끼리는 교차를 찾을 수 없습니다: {state_a}")
    return (state_a, state_b) if state_a < state_b else (state_b, state_a)


# ============================================================
# 에너지 표 (병렬)
# ============================================================

def block_energies(params: PotentialParams, ell: int, count: int, settings: SolverSettings) -> np.ndarray:
    """
    ℓ 블록 최저 count 개 에너지

    속박되지 않은 상태는 +inf, 수치 실패는 NaN 으로 기록합니다.
    """
    energies = np.full(count, np.nan)
    k = count
    while k >= 1:
        try:
            energies[:k] = [energy for energy, _ in solve_block(params, ell, k, settings)]
            return energies
        except UnboundStateError:
            energies[k - 1] = math.inf
            k -= 1
        except ConvergenceError as error:
            logger.warning("%s ℓ=%d 블록 계산 실패: %s", params, ell, error)
            return energies
    return energies


def _block_task(task: Tuple[float, float, float, int, int, SolverSettings]) -> np.ndarray:
    Z, beta, q, ell, count, settings = task
    return block_energies(PotentialParams(Z, beta, q), ell, count, settings)


def energy_table(
    params_list: Sequence[PotentialParams],
    labels: Sequence[StateLabel],
    settings: SolverSettings = DEFAULT_SETTINGS,
    workers: Optional[int] = 1,
    desc: str = "solve",
) -> np.ndarray:
    """
    파라미터 목록 × 라벨의 에너지 표

    같은 ℓ 라벨은 블록 한 번으로 계산합니다.

    Returns:
        shape (len(params_list), len(labels)), 속박 안 됨 = inf, 실패 = NaN
    """
    counts: Dict[int, int] = {}
    for label in labels:
        counts[label.ell] = max(counts.get(label.ell, 0), label.block_index)
    blocks = sorted(counts.items())

    tasks = [
        (params.Z, params.beta, params.q, ell, count, settings)
        for params in params_list
        for ell, count in blocks
    ]

    n_workers = resolve_workers(workers)
    if n_workers == 1 or len(tasks) == 1:
        results = [_block_task(task) for task in progress(tasks, desc)]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as executor:
            chunksize = max(1, len(tasks) // (4 * n_workers))
            results = list(progress(executor.map(_block_task, tasks, chunksize=chunksize), desc, len(tasks)))

    table = np.full((len(params_list), len(labels)), np.nan)
    block_position = {ell: position for position, (ell, _) in enumerate(blocks)}
    for row in range(len(params_list)):
        for column, label in enumerate(labels):
            energies = results[row * len(blocks) + block_position[label.ell]]
            table[row, column] = energies[label.block_index - 1]
    return table


def beta_grid(beta_range: Tuple[float, float], step: float) -> np.ndarray:
    """[lo, hi] 를 step 간격으로 (끝점 포함)"""
    lo, hi = float(beta_range[0]), float(beta_range[1])
    if lo < 0 or hi < lo:
        raise InvalidInputError(f"β 범위가 잘못되었습니다: {beta_range}")
    if not step > 0:
        raise InvalidInputError(f"β 간격은 양수여야 합니다 (입력: {step})")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    grid = lo + step * np.arange(count)
    if grid[-1] < hi - 1e-12 * max(1.0, hi):
        grid = np.append(grid, hi)
    return grid


def scan_levels(
    Z: float,
    q: float,
    labels: Sequence[StateLabel],
    betas: Sequence[float],
    settings: SolverSettings = DEFAULT_SETTINGS,
    workers: Optional[int] = 1,
) -> pd.DataFrame:
    """
    β 격자 위 E(β) 표

    Returns:
        DataFrame: index = beta, columns = 라벨 문자열 (입력 순서),
        속박되지 않거나 계산 실패한 칸은 NaN
    """
    if not labels:
        raise InvalidInputError("스캔할 상태가 없습니다")
    betas = np.asarray(betas, dtype=float)
    table = energy_table([PotentialParams(Z, beta, q) for beta in betas], labels, settings, workers, "scan")

    for column, label in enumerate(labels):
        curve = table[:, column]
        finite = np.isfinite(curve)
        if np.any(np.diff(curve[finite]) <= 0):
            logger.warning("%s: E(β) 가 단조 증가하지 않습니다 (Z=%g, q=%g)", label, Z, q)

    frame = pd.DataFrame(
        np.where(np.isfinite(table), table, np.nan),
        index=pd.Index(betas, name="beta"),
        columns=[str(label) for label in labels],
    )
    return frame


# ============================================================
# 한 쌍의 교차
# ============================================================

def _pair_energies(
    Z: float, q: float, beta: float, labels: Sequence[StateLabel], settings: SolverSettings
) -> np.ndarray:
    return energy_table([PotentialParams(Z, beta, q)], labels, settings, workers=1)[0]


def _needs_refinement(betas: np.ndarray, table: np.ndarray, settings: SolverSettings, min_width: float) -> np.ndarray:
    """gap(NaN) 이나 약한 속박 (E > -weak_binding) 이 끝점에 있는 구간의 중점"""
    midpoints = []
    for i in range(len(betas) - 1):
        if betas[i + 1] - betas[i] <= min_width:
            continue
        ends = table[i : i + 2]
        has_gap = np.any(np.isnan(ends))
        weak = np.any(np.isfinite(ends) & (ends > -settings.weak_binding))
        if has_gap or weak:
            midpoints.append(0.5 * (betas[i] + betas[i + 1]))
    return np.asarray(midpoints)


def _refine_grid(
    Z: float, q: float, labels: Sequence[StateLabel], betas: np.ndarray, table: np.ndarray,
    step: float, settings: SolverSettings, workers: Optional[int],
) -> Tuple[np.ndarray, np.ndarray]:
    min_width = step / 2**settings.gap_refinements
    for _ in range(settings.gap_refinements):
        midpoints = _needs_refinement(betas, table, settings, min_width)
        if midpoints.size == 0:
            break
        logger.debug("%d 개 구간 간격 절반 분할", midpoints.size)
        extra = energy_table([PotentialParams(Z, b, q) for b in midpoints], labels, settings, workers, "refine")
        betas = np.concatenate((betas, midpoints))
        table = np.vstack((table, extra))
        order = np.argsort(betas)
        betas, table = betas[order], table[order]
    return betas, table


def _near_degeneracy(
    gap, lo: float, hi: float, state_a: StateLabel, state_b: StateLabel, settings: SolverSettings
) -> Optional[NearDegeneracy]:
    result = minimize_scalar(lambda b: abs(gap(b)), bounds=(lo, hi), method="bounded", options={"xatol": 1e-8})
    if result.success and result.fun < settings.near_degeneracy_gap:
        return NearDegeneracy(state_a, state_b, float(result.x), float(result.fun))
    return None


def scan_pair(
    Z: float,
    q: float,
    pair: Tuple[StateLabel, StateLabel],
    beta_range: Tuple[float, float],
    step: float = 1.0,
    settings: SolverSettings = DEFAULT_SETTINGS,
    workers: Optional[int] = 1,
    betas: Optional[np.ndarray] = None,
    table: Optional[np.ndarray] = None,
) -> PairScan:
    """
    한 쌍의 교차점과 근접 축퇴

    Args:
        Z, q: 퍼텐셜 족 (β 가 변수)
        pair: 두 상태
        beta_range: (β_lo, β_hi)
        step: 성긴 스캔 간격
        betas, table: 미리 계산한 격자와 에너지 표 (audit 에서 공유, 이 경우 격자 세분화 생략)

    Returns:
        PairScan
    """
    state_a, state_b = order_pair(*pair)
    labels = [state_a, state_b]

    if table is None:
        betas = beta_grid(beta_range, step)
        table = energy_table([PotentialParams(Z, b, q) for b in betas], labels, settings, workers, "scan")
        betas, table = _refine_grid(Z, q, labels, betas, table, step, settings, workers)

    scan = PairScan(state_a, state_b)
    scan.complete = not np.any(np.isnan(table))
    if not scan.complete:
        logger.warning("%s-%s: β 격자에 계산 실패 지점이 남아 있습니다", state_a, state_b)

    def gap(beta: float) -> float:
        energies = _pair_energies(Z, q, beta, labels, settings)
        if not np.all(np.isfinite(energies)):
            raise ConvergenceError(f"β={beta:.6g} 에서 {state_a}/{state_b} 에너지 계산 실패")
        return float(energies[0] - energies[1])

    valid = np.flatnonzero(np.all(np.isfinite(table), axis=1))
    deltas = table[valid, 0] - table[valid, 1]

    for position in range(len(valid) - 1):
        lo, hi = float(betas[valid[position]]), float(betas[valid[position + 1]])
        if deltas[position] * deltas[position + 1] >= 0:
            continue
        try:
            gap_lo, gap_hi = gap(lo), gap(hi)
            if gap_lo * gap_hi >= 0:
                logger.warning("%s-%s: [%g, %g] 부호 변화가 재계산에서 사라짐", state_a, state_b, lo, hi)
                scan.near_degeneracies.append(NearDegeneracy(state_a, state_b, lo, min(abs(gap_lo), abs(gap_hi))))
                continue
            beta_star = brentq(gap, lo, hi, xtol=settings.crossing_xtol)
            residual = abs(gap(beta_star))
        except ConvergenceError as error:
            logger.warning("%s-%s 교차 정밀화 실패: %s", state_a, state_b, error)
            scan.complete = False
            continue

        if residual >= settings.crossing_residual:
            logger.warning("%s-%s: β*=%.10g 잔차 %.2e", state_a, state_b, beta_star, residual)
        scan.crossings.append(
            CrossingRecord(
                state_a=state_a,
                state_b=state_b,
                beta_star=float(beta_star),
                bracket=(lo, hi),
                residual=float(residual),
                rule_compliant=rule_compliant(state_a, state_b),
            )
        )

    # 부호 변화 없는 |ΔE| 극소점
    for position in range(1, len(valid) - 1):
        here = abs(deltas[position])
        if here >= NEAR_DEGENERACY_SCREEN:
            continue
        if here < abs(deltas[position - 1]) and here < abs(deltas[position + 1]):
            if deltas[position - 1] * deltas[position] < 0 or deltas[position] * deltas[position + 1] < 0:
                continue
            try:
                event = _near_degeneracy(
                    gap, float(betas[valid[position - 1]]), float(betas[valid[position + 1]]),
                    state_a, state_b, settings,
                )
            except ConvergenceError:
                continue
            if event is not None:
                scan.near_degeneracies.append(event)

    return scan


def find_crossing(
    Z: float,
    q: float,
    pair: Tuple[StateLabel, StateLabel],
    beta_range: Tuple[float, float],
    step: float = 1.0,
    settings: SolverSettings = DEFAULT_SETTINGS,
    workers: Optional[int] = 1,
) -> List[CrossingRecord]:
    """한 쌍의 모든 교차 (부호 변화 없으면 빈 목록)"""
    return scan_pair(Z, q, pair, beta_range, step, settings, workers).crossings


# ============================================================
# 교차 규칙 점검
# ============================================================

def _shielding_violations(
    Z: float, q: float, record: CrossingRecord, settings: SolverSettings
) -> List[StateLabel]:
    """
    (ν,ℓ)-(ν+1,ℓ+3) 교차점에서 ℓ'' > ℓ+3 인 (ν+1, ℓ'') 상태가
    이미 (ν,ℓ) 아래에 있는지 확인
    """
    lower, upper = record.state_a, record.state_b
    if upper.nu != lower.nu + 1 or upper.ell != lower.ell + 3:
        return []
    shielding = [StateLabel(upper.nu, ell) for ell in range(upper.ell + 1, upper.nu)]
    if not shielding:
        return []
    energies = _pair_energies(Z, q, record.beta_star, [lower] + shielding, settings)
    return [
        label for label, energy in zip(shielding, energies[1:])
        if np.isfinite(energy) and energy >= energies[0]
    ]


def audit_conjecture(
    Z: float,
    q: float,
    nu_max: int,
    beta_range: Tuple[float, float],
    step: float = 1.0,
    settings: SolverSettings = DEFAULT_SETTINGS,
    workers: Optional[int] = 1,
) -> AuditReport:
    """
    ν' > ν 인 모든 쌍 (ν' <= nu_max) 의 교차를 찾아 규칙 위반을 보고

    - counterexamples: ℓ' < ℓ+3 또는 ν' < ν+1 인데 교차한 경우
    - shielding_violations: (ν+1, ℓ'' > ℓ+3) 가 교차점에서 아직 위에 있는 경우
    """
    if not 1 <= nu_max <= 8:
        raise InvalidInputError(f"nu_max 는 1..8 이어야 합니다 (입력: {nu_max})")

    labels = enumerate_states(nu_max)
    betas = beta_grid(beta_range, step)

    log_banner(logger, f"교차 규칙 점검: Z={Z:g}, q={q:g}, ν<={nu_max}, β∈[{betas[0]:g}, {betas[-1]:g}]")
    table = energy_table([PotentialParams(Z, b, q) for b in betas], labels, settings, workers, "audit")

    report = AuditReport()
    pairs = [(a, b) for a, b in combinations(labels, 2) if b.nu > a.nu]
    for state_a, state_b in progress(pairs, "pairs"):
        columns = [labels.index(state_a), labels.index(state_b)]
        scan = scan_pair(Z, q, (state_a, state_b), beta_range, step, settings, workers, betas, table[:, columns])

        key = (state_a, state_b)
        (report.crossed if scan.crossings else report.not_crossed).append(key)
        if not scan.complete:
            report.incomplete.append(key)
        report.near_degeneracies.extend(scan.near_degeneracies)
        report.records.extend(scan.crossings)

        for record in scan.crossings:
            if not record.rule_compliant:
                logger.warning("규칙 위반 교차: %s-%s at β*=%.8g", record.state_a, record.state_b, record.beta_star)
                report.counterexamples.append(record)
            for label in _shielding_violations(Z, q, record, settings):
                report.shielding_violations.append((record, label))

    logger.info(
        "교차 %d 건 (쌍 %d/%d), 위반 %d, 미완료 %d",
        len(report.records), len(report.crossed), len(pairs), len(report.counterexamples), len(report.incomplete),
    )
    return report


def q_sweep(
    Z: float,
    beta: float,
    labels: Sequence[StateLabel],
    q_values: Sequence[float],
    settings: SolverSettings = DEFAULT_SETTINGS,
    workers: Optional[int] = 1,
) -> List[Tuple[StateLabel, StateLabel, float, float]]:
    """
    β 고정, q 격자 위 E(q) 곡선들의 부호 변화

    Returns:
        (state_a, state_b, q_lo, q_hi) 목록 (교차가 없으면 빈 목록)
    """
    if len(labels) < 2:
        raise InvalidInputError("q 스윕에는 상태가 두 개 이상 필요합니다")
    q_values = np.asarray(sorted(q_values), dtype=float)
    table = energy_table([PotentialParams(Z, beta, q) for q in q_values], labels, settings, workers, "qsweep")

    for column, label in enumerate(labels):
        curve = table[:, column]
        finite = np.isfinite(curve)
        if np.any(np.diff(curve[finite]) >= 0):
            logger.warning("%s: E(q) 가 단조 감소하지 않습니다 (Z=%g, β=%g)", label, Z, beta)

    events = []
    for i, j in combinations(range(len(labels)), 2):
        state_a, state_b = order_pair(labels[i], labels[j])
        sign = 1.0 if labels[i] == state_a else -1.0
        delta = sign * (table[:, i] - table[:, j])
        for k in range(len(q_values) - 1):
            if np.isfinite(delta[k]) and np.isfinite(delta[k + 1]) and delta[k] * delta[k + 1] < 0:
                events.append((state_a, state_b, float(q_values[k]), float(q_values[k + 1])))
    return sorted(events, key=lambda event: (event[0], event[1], event[2]))
