"""
softcoul: soft-core 쿨롱 퍼텐셜 V(r) = -Z/(r^q + β^q)^(1/q) 의 속박 상태 스펙트럼

주요 모듈:
- potential_utils: 퍼텐셜 파라미터와 상태 라벨
- eigensolver_utils: 유한차분 + Richardson 고유값 솔버
- jet_utils / aim_utils: 점근 반복법과 q = 1 정확해
- envelope_utils: 포락선 에너지 한계
- density_utils: 원점 밀도 오목성
- crossing_utils: 준위 교차 탐색과 규칙 점검
- cli: 명령행 인터페이스 (python -m softcoul)
"""

from .eigensolver_utils import Eigenpair, solve_block, solve_state
from .exceptions import (
    ConvergenceError,
    DensityFitError,
    InvalidInputError,
    NodeMismatchError,
    SoftCoulombError,
    UnboundStateError,
)
from .potential_utils import INFINITY, PotentialParams, StateLabel, eval_potential, parse_state

__version__ = "1.0.0"

__all__ = [
    "ConvergenceError",
    "DensityFitError",
    "Eigenpair",
    "INFINITY",
    "InvalidInputError",
    "NodeMismatchError",
    "PotentialParams",
    "SoftCoulombError",
    "StateLabel",
    "UnboundStateError",
    "eval_potential",
    "parse_state",
    "solve_block",
    "solve_state",
]
