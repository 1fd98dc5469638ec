"""
============================================================
예외 정의 모듈 (exceptions.py)
============================================================

softcoul 전체에서 공통으로 사용하는 예외 계층입니다.

- InvalidInputError: 잘못된 파라미터, 상태 라벨, 설정 값 (CLI 종료 코드 2)
- ConvergenceError: 수치 계산이 수렴하지 않은 경우 (CLI 종료 코드 3)

ValueError / RuntimeError 를 함께 상속하므로 기존 except 절과도 호환됩니다.
"""


class SoftCoulombError(Exception):
    """softcoul 예외의 최상위 클래스"""


class InvalidInputError(SoftCoulombError, ValueError):
    """입력 검증 실패 (파라미터, 라벨, 설정 파일 등)"""


class ConvergenceError(SoftCoulombError, RuntimeError):
    """수치적 비수렴 (박스 확장, 역반복, AIM 안정화 등)"""


class UnboundStateError(ConvergenceError):
    """요청한 상태가 E >= 0 에 위치 (속박되지 않음)"""


class NodeMismatchError(ConvergenceError):
    """고유벡터의 노드 수가 라벨과 일치하지 않음 (격자 해상도 부족)"""


class DensityFitError(ConvergenceError):
    """원점 근처 밀도 다항식 피팅이 불안정함"""
