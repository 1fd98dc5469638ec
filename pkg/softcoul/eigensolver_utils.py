"""
============================================================
방사 슈뢰딩거 방정식 고유값 솔버 (eigensolver_utils.py)
============================================================

-½ψ'' + [ℓ(ℓ+1)/(2r²) + V(r)]ψ = Eψ,  ψ(0) = ψ(r_max) = 0

균일 격자 2차 중심 차분으로 대칭 삼중대각 행렬을 만들고,
Sturm 수열 이분법(LAPACK stebz)으로 고유값을, 역반복으로 고유벡터를 구합니다.

처리 파이프라인 (solve_state):
1. r_max = max(20ν²/Z, 10β, 50) 에서 시작
2. 격자 h, h/2, h/4 에서 고유값 계산 → Richardson 외삽 + 오차 추정
3. 외삽 에너지가 박스 확장에 대해 수렴할 때까지 r_max 두 배 (h 고정)
4. 고유벡터 노드 수 = ν - ℓ - 1 확인

상태는 에너지 전체 정렬이 아니라 ℓ 블록 안의 순번으로 선택하므로
β 를 훑어도 (ν, ℓ) 라벨이 교차점을 지나 연속적으로 유지됩니다.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal, solve_banded

from .config_utils import DEFAULT_SETTINGS, SolverSettings
from .exceptions import ConvergenceError, InvalidInputError, NodeMismatchError, UnboundStateError
from .potential_utils import PotentialParams, StateLabel, eval_potential

logger = logging.getLogger(__name__)

# 역반복 시작 벡터 시드 (재현성)
INVERSE_ITERATION_SEED = 20240611


# ============================================================
# 격자 / 행렬 타입
# ============================================================

@dataclass(frozen=True)
class RadialGrid:
    """
    균일 내부 격자 r_i = i·h (i = 1..n_points), h = r_max/(n_points+1)
    """

    r_max: float
    n_points: int

    def __post_init__(self):
        if not self.r_max > 0 or not math.isfinite(self.r_max):
            raise InvalidInputError(f"r_max 는 양의 유한값이어야 합니다 (입력: {self.r_max})")
        if self.n_points < 100:
            raise InvalidInputError(f"n_points 는 100 이상이어야 합니다 (입력: {self.n_points})")

    @property
    def spacing(self) -> float:
        return self.r_max / (self.n_points + 1)

    @property
    def radii(self) -> np.ndarray:
        return self.spacing * np.arange(1, self.n_points + 1)

    def refined(self) -> "RadialGrid":
        """간격을 절반으로 (기존 점은 새 격자의 홀수 번째 점)"""
        return RadialGrid(self.r_max, 2 * (self.n_points + 1) - 1)

    def doubled(self) -> "RadialGrid":
        """간격 h 를 유지한 채 r_max 두 배"""
        return RadialGrid(2 * self.r_max, 2 * (self.n_points + 1) - 1)


@dataclass(frozen=True)
class TridiagonalMatrix:
    """대칭 삼중대각 행렬 (대각, 부대각)"""

    diagonal: np.ndarray
    off_diagonal: np.ndarray

    def __post_init__(self):
        diagonal = np.asarray(self.diagonal, dtype=float)
        off_diagonal = np.asarray(self.off_diagonal, dtype=float)
        if diagonal.ndim != 1 or diagonal.size == 0:
            raise InvalidInputError("대각 성분은 비어 있지 않은 1차원 배열이어야 합니다")
        if off_diagonal.shape != (diagonal.size - 1,):
            raise InvalidInputError(
                f"부대각 길이는 {diagonal.size - 1} 이어야 합니다 (입력: {off_diagonal.size})"
            )
        object.__setattr__(self, "diagonal", diagonal)
        object.__setattr__(self, "off_diagonal", off_diagonal)

    @property
    def dimension(self) -> int:
        return self.diagonal.size

    def to_dense(self) -> np.ndarray:
        return (
            np.diag(self.diagonal)
            + np.diag(self.off_diagonal, 1)
            + np.diag(self.off_diagonal, -1)
        )

    def gershgorin_interval(self) -> Tuple[float, float]:
        """모든 고유값을 포함하는 Gershgorin 구간"""
        radius = np.zeros(self.dimension)
        radius[:-1] += np.abs(self.off_diagonal)
        radius[1:] += np.abs(self.off_diagonal)
        return float(np.min(self.diagonal - radius)), float(np.max(self.diagonal + radius))

    def matvec(self, vector: np.ndarray) -> np.ndarray:
        result = self.diagonal * vector
        result[:-1] += self.off_diagonal * vector[1:]
        result[1:] += self.off_diagonal * vector[:-1]
        return result


@dataclass(frozen=True)
class Eigenpair:
    """
    수렴한 고유 상태

    wavefunction 은 grid (가장 성긴 격자) 위의 ψ(r_i) 이며,
    사다리꼴 규칙으로 ∫ψ² dr = 1 로 정규화되어 있습니다.
    """

    label: StateLabel
    energy: float
    wavefunction: np.ndarray
    node_count: int
    error_estimate: float
    params: PotentialParams
    grid: RadialGrid

    @property
    def radii(self) -> np.ndarray:
        return self.grid.radii


# ============================================================
# 해밀토니안 조립
# ============================================================

def assemble_hamiltonian(
    radii: np.ndarray, spacing: float, ell: int, potential_values: np.ndarray
) -> TridiagonalMatrix:
    """
    중심 차분 스텐실

    d_i = 1/h² + ℓ(ℓ+1)/(2r_i²) + V(r_i),  e_i = -1/(2h²)

    Args:
        radii: 내부 격자점
        spacing: 격자 간격 h
        ell: 각운동량
        potential_values: 각 격자점의 V(r_i)
    """
    radii = np.asarray(radii, dtype=float)
    potential_values = np.asarray(potential_values, dtype=float)
    centrifugal = ell * (ell + 1) / (2.0 * radii**2) if ell else np.zeros_like(radii)
    diagonal = 1.0 / spacing**2 + centrifugal + potential_values
    off_diagonal = np.full(radii.size - 1, -0.5 / spacing**2)
    return TridiagonalMatrix(diagonal, off_diagonal)


def build_hamiltonian(params: PotentialParams, ell: int, grid: RadialGrid) -> TridiagonalMatrix:
    """파라미터와 격자로부터 ℓ 블록 해밀토니안 생성"""
    if ell < 0:
        raise InvalidInputError(f"ℓ 은 0 이상이어야 합니다 (입력: {ell})")
    radii = grid.radii
    return assemble_hamiltonian(radii, grid.spacing, ell, eval_potential(params, radii))


# ============================================================
# 고유값 / 고유벡터
# ============================================================

def lowest_eigenvalues(matrix: TridiagonalMatrix, k: int, tolerance: float = 0.0) -> np.ndarray:
    """
    가장 낮은 k 개의 고유값 (오름차순)

    Sturm 수열 계수 + 이분법 (LAPACK stebz).
    tolerance = 0 이면 LAPACK 기본값 eps·‖T‖ 를 사용합니다.

    Raises:
        InvalidInputError: k < 1 또는 k > 행렬 차원
    """
    if k < 1 or k > matrix.dimension:
        raise InvalidInputError(f"k 는 1 이상 {matrix.dimension} 이하여야 합니다 (입력: {k})")

    if matrix.dimension == 1:
        return matrix.diagonal.copy()

    return eigh_tridiagonal(
        matrix.diagonal,
        matrix.off_diagonal,
        eigvals_only=True,
        select="i",
        select_range=(0, k - 1),
        lapack_driver="stebz",
        tol=tolerance,
    )


def _first_significant(vector: np.ndarray, floor: float) -> float:
    threshold = floor * np.max(np.abs(vector))
    significant = vector[np.abs(vector) > threshold]
    return significant[0] if significant.size else 1.0


def eigenvector(
    matrix: TridiagonalMatrix,
    eigenvalue: float,
    sweeps: int = DEFAULT_SETTINGS.inverse_iteration_sweeps,
    floor: float = DEFAULT_SETTINGS.node_floor,
) -> np.ndarray:
    """
    역반복으로 고유벡터 계산

    고정 시드 난수 벡터에서 시작해 (T - λI) v_new = v 를 sweeps 번 풉니다.
    결과는 유클리드 노름 1, 원점 쪽 첫 유효 성분이 양수가 되도록 부호를 맞춥니다.

    Raises:
        ConvergenceError: 잔차가 줄지 않음 (고유값이 고립되어 있지 않음)
    """
    n = matrix.dimension
    lo, hi = matrix.gershgorin_interval()
    scale = max(abs(lo), abs(hi), 1.0)

    # 정확한 고유값에서는 특이행렬이 되므로 이동을 조금 준다
    shift = eigenvalue - 64 * np.finfo(float).eps * scale

    banded = np.zeros((3, n))
    banded[0, 1:] = matrix.off_diagonal
    banded[2, :-1] = matrix.off_diagonal

    rng = np.random.default_rng(INVERSE_ITERATION_SEED)
    vector = rng.uniform(0.5, 1.5, size=n)
    vector /= np.linalg.norm(vector)

    for attempt in range(3):
        banded[1] = matrix.diagonal - shift
        try:
            for _ in range(sweeps):
                vector = solve_banded((1, 1), banded, vector)
                vector /= np.linalg.norm(vector)
            break
        except (LinAlgError, ValueError):
            logger.debug("역반복 특이행렬, 이동량 확대 (시도 %d)", attempt + 1)
            shift -= 1e3 * np.finfo(float).eps * scale * 10**attempt
            vector = rng.uniform(0.5, 1.5, size=n)
            vector /= np.linalg.norm(vector)
    else:
        raise ConvergenceError(f"역반복 실패: λ={eigenvalue:.12g} 에서 선형계를 풀 수 없습니다")

    residual = np.linalg.norm(matrix.matvec(vector) - eigenvalue * vector)
    if not np.isfinite(residual) or residual > 1e-6 * scale:
        raise ConvergenceError(
            f"역반복 비수렴: λ={eigenvalue:.12g}, 잔차 {residual:.3e} (고유값이 고립되어 있지 않음)"
        )

    if _first_significant(vector, floor) < 0:
        vector = -vector
    return vector


def count_nodes(vector: np.ndarray, floor: float = DEFAULT_SETTINGS.node_floor) -> int:
    """
    부호 변화 횟수 (|v| <= floor·max|v| 인 성분은 무시)

    Args:
        vector: 격자 위 파동함수 (양 끝 경계점 제외)
        floor: 상대 크기 하한
    """
    vector = np.asarray(vector, dtype=float)
    threshold = floor * np.max(np.abs(vector))
    signs = np.sign(vector[np.abs(vector) > threshold])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


# ============================================================
# Richardson 외삽 + 박스 수렴
# ============================================================

def initial_box(params: PotentialParams, nu: int) -> float:
    """r_max 시작값 max(20ν²/Z, 10β, 50)"""
    return max(20.0 * nu**2 / params.Z, 10.0 * params.beta, 50.0)


def richardson_extrapolate(ladder: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    h, h/2, h/4, ... 사다리의 Romberg 외삽 (오차 전개 h², h⁴, ...)

    Args:
        ladder: shape (levels, k) 각 격자 단계의 고유값

    Returns:
        (외삽값, 오차 추정) 각각 shape (k,)
    """
    table = [np.asarray(ladder, dtype=float)]
    while table[-1].shape[0] > 1:
        previous = table[-1]
        factor = 4.0 ** len(table)
        table.append((factor * previous[1:] - previous[:-1]) / (factor - 1.0))

    best = table[-1][0]
    if len(table) == 1:
        return best, np.full_like(best, np.nan)
    # 한 단계 덜 외삽한 값 중 가장 정밀한 것과의 차이
    return best, np.abs(best - table[-2][-1])


def _ladder(
    params: PotentialParams, ell: int, count: int, grid: RadialGrid, settings: SolverSettings
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """한 박스에서 Richardson 사다리 계산 → (외삽값, 오차, 최저 단계 고유값)"""
    levels = []
    level_grid = grid
    for _ in range(settings.richardson_levels):
        matrix = build_hamiltonian(params, ell, level_grid)
        levels.append(lowest_eigenvalues(matrix, count, settings.eigen_tolerance))
        level_grid = level_grid.refined()
    ladder = np.vstack(levels)
    energies, errors = richardson_extrapolate(ladder)
    return energies, errors, ladder[0]


def _noise_floor(grid: RadialGrid, settings: SolverSettings) -> float:
    """가장 조밀한 격자의 고유값 반올림 잡음 ~ eps·‖T‖ ≈ 2·eps/h² 보다 큰 하한"""
    finest = grid.spacing / 2 ** (settings.richardson_levels - 1)
    return max(settings.box_floor, 32.0 * np.finfo(float).eps / finest**2)


def _converged_block(
    params: PotentialParams, ell: int, count: int, settings: SolverSettings
) -> Tuple[RadialGrid, np.ndarray, np.ndarray]:
    """
    ℓ 블록 최저 count 개 에너지를 박스 크기에 대해 수렴시킴

    Returns:
        (최종 성긴 격자, 외삽 에너지, 오차 추정)

    Raises:
        UnboundStateError: 박스를 최대로 키워도 최고 상태가 E >= 0
        ConvergenceError: 박스 확장에 대해 에너지가 수렴하지 않음
    """
    if ell < 0 or count < 1:
        raise InvalidInputError(f"잘못된 블록 요청 (ℓ={ell}, count={count})")

    grid = RadialGrid(initial_box(params, ell + count), settings.n_points)
    previous: Optional[np.ndarray] = None
    shift = math.inf

    for doubling in range(settings.max_box_doublings + 1):
        energies, errors, coarse = _ladder(params, ell, count, grid, settings)

        if coarse[-1] < 0:
            if previous is not None:
                shift = float(np.max(np.abs(energies - previous)))
                finite = errors[np.isfinite(errors)]
                worst = float(np.max(finite)) if finite.size else 0.0
                if shift < max(settings.box_shift_factor * worst, _noise_floor(grid, settings)):
                    return grid, energies, np.maximum(np.nan_to_num(errors), shift)
            previous = energies
        else:
            # 작은 박스는 약하게 속박된 상태를 E >= 0 으로 밀어 올린다
            logger.debug("ℓ=%d 최고 상태 E=%.3e >= 0 (r_max=%.1f), 박스 확장", ell, coarse[-1], grid.r_max)
            previous = None

        if doubling < settings.max_box_doublings:
            grid = grid.doubled()

    if previous is None:
        raise UnboundStateError(
            f"unbound state: ℓ={ell} 블록 {count}번째 상태가 r_max={grid.r_max:.1f} 에서도 E >= 0 "
            f"({params})"
        )
    raise ConvergenceError(
        f"박스 확장 비수렴: ℓ={ell}, r_max={grid.r_max:.1f}, 마지막 변화 {shift:.3e} ({params})"
    )


def solve_block(
    params: PotentialParams, ell: int, count: int, settings: SolverSettings = DEFAULT_SETTINGS
) -> List[Tuple[float, float]]:
    """
    ℓ 블록의 최저 count 개 (에너지, 오차 추정), 고유벡터는 계산하지 않음

    스캔처럼 같은 ℓ 의 여러 상태가 필요할 때 사용합니다.
    """
    _, energies, errors = _converged_block(params, ell, count, settings)
    return [(float(e), float(err)) for e, err in zip(energies, errors)]


def _normalized_state(
    matrix: TridiagonalMatrix, eigenvalue: float, spacing: float, settings: SolverSettings
) -> np.ndarray:
    vector = eigenvector(matrix, eigenvalue, settings.inverse_iteration_sweeps, settings.node_floor)
    # 경계 ψ(0) = ψ(r_max) = 0 이므로 사다리꼴 규칙은 h·Σψ²
    return vector / math.sqrt(spacing * np.sum(vector**2))


def solve_state(
    params: PotentialParams, label: StateLabel, settings: SolverSettings = DEFAULT_SETTINGS
) -> Eigenpair:
    """
    (ν, ℓ) 상태의 에너지와 파동함수

    Args:
        params: 퍼텐셜 파라미터
        label: 상태 라벨 (ℓ 블록의 ν-ℓ 번째 고유값)
        settings: 수치 설정

    Returns:
        Eigenpair: Richardson 외삽 에너지, 오차 추정, 성긴 격자 위 파동함수

    Raises:
        UnboundStateError: 상태가 속박되지 않음
        NodeMismatchError: 노드 수 ≠ ν - ℓ - 1 (격자가 너무 성김)
    """
    index = label.block_index
    grid, energies, errors = _converged_block(params, label.ell, index, settings)
    energy, error = float(energies[-1]), float(errors[-1])

    if energy >= 0:
        raise UnboundStateError(f"unbound state: {label} 에너지 {energy:.3e} >= 0 ({params})")

    # 파동함수: (4ψ_{h/2} - ψ_h)/3 을 성긴 격자에서
    coarse_matrix = build_hamiltonian(params, label.ell, grid)
    coarse_values = lowest_eigenvalues(coarse_matrix, index, settings.eigen_tolerance)
    psi_coarse = _normalized_state(coarse_matrix, coarse_values[-1], grid.spacing, settings)

    nodes = count_nodes(psi_coarse, settings.node_floor)
    if nodes != label.node_count:
        raise NodeMismatchError(
            f"node mismatch: {label} 노드 {nodes}개 (기대값 {label.node_count}), "
            f"n_points={grid.n_points}, r_max={grid.r_max:.1f}"
        )

    wavefunction = psi_coarse
    if settings.richardson_levels > 1:
        fine_grid = grid.refined()
        fine_matrix = build_hamiltonian(params, label.ell, fine_grid)
        fine_values = lowest_eigenvalues(fine_matrix, index, settings.eigen_tolerance)
        psi_fine = _normalized_state(fine_matrix, fine_values[-1], fine_grid.spacing, settings)
        wavefunction = (4.0 * psi_fine[1::2] - psi_coarse) / 3.0
        wavefunction /= math.sqrt(grid.spacing * np.sum(wavefunction**2))

    logger.debug("%s: E=%.12g ± %.2e (r_max=%.1f, n=%d)", label, energy, error, grid.r_max, grid.n_points)

    return Eigenpair(
        label=label,
        energy=energy,
        wavefunction=wavefunction,
        node_count=nodes,
        error_estimate=error,
        params=params,
        grid=grid,
    )

