"""
============================================================
설정 모듈 (config_utils.py)
============================================================

수치 계산 설정(SolverSettings)과 CLI 실행 설정(RunConfig)을 정의합니다.

주요 기능:
1. SolverSettings: 격자 크기, Richardson 단계, 박스 확장 정책 등 수치 파라미터
2. RunConfig: CLI 명령 하나를 완전히 기술하는 설정
3. key = value 형식 설정 파일 읽기/쓰기 (무손실 왕복)
4. SOFTCOUL_THREADS 환경 변수로 워커 수 제한

설정 파일 예:
    # 6s-7f 교차 탐색
    command = cross
    Z = 1.0
    q = 1.0
    pair = 6s,7f
    beta_range = 0.0:100.0:1.0

우선순위: CLI 플래그 > 설정 파일 > 기본값
"""

import math
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple

from .exceptions import InvalidInputError

# ============================================================
# 설정 상수
# ============================================================

COMMANDS = ("spectrum", "scan", "cross", "audit", "bounds", "aim", "exact", "density", "qsweep")
OUTPUT_FORMATS = ("csv", "json")

# 워커 수 제한 환경 변수
THREADS_ENV = "SOFTCOUL_THREADS"


@dataclass(frozen=True)
class SolverSettings:
    """
    수치 계산 파라미터 모음

    기본값은 모든 재현 테스트를 통과하는 수준으로 맞춰져 있습니다.
    """

    # 고유값 솔버
    n_points: int = 20000
    richardson_levels: int = 3
    box_shift_factor: float = 0.1
    box_floor: float = 1e-9
    max_box_doublings: int = 6
    node_floor: float = 1e-9
    inverse_iteration_sweeps: int = 4
    eigen_tolerance: float = 0.0

    # 밀도 분석
    density_window: float = 0.1
    density_min_points: int = 30

    # AIM
    aim_n_max: int = 200
    aim_n_min: int = 10
    aim_n_stride: int = 10
    aim_grid_points: int = 40
    aim_tolerance: float = 1e-8
    aim_noise_floor: float = 1e-11
    aim_center_window: float = 1e-4
    jet_headroom: int = 6

    # 준위 교차
    crossing_xtol: float = 1e-10
    crossing_residual: float = 1e-8
    near_degeneracy_gap: float = 1e-6
    gap_refinements: int = 3
    weak_binding: float = 1e-3

    def validate(self) -> Tuple[bool, str]:
        """
        설정값 검증

        Returns:
            (is_valid, message)
        """
        if self.n_points < 100:
            return False, f"n_points 는 100 이상이어야 합니다 (입력: {self.n_points})"
        if self.richardson_levels < 1:
            return False, f"richardson_levels 는 1 이상이어야 합니다 (입력: {self.richardson_levels})"
        if self.inverse_iteration_sweeps < 1:
            return False, "inverse_iteration_sweeps 는 1 이상이어야 합니다"
        if self.aim_n_min < 1 or self.aim_n_max <= self.aim_n_min:
            return False, f"AIM 반복 범위가 잘못되었습니다 ({self.aim_n_min}..{self.aim_n_max})"
        if self.aim_n_stride < 1 or self.aim_grid_points < 3:
            return False, f"AIM 격자 설정이 잘못되었습니다 (stride={self.aim_n_stride}, grid={self.aim_grid_points})"
        if not 0 < self.aim_center_window < 1:
            return False, f"aim_center_window 는 0 과 1 사이여야 합니다 (입력: {self.aim_center_window})"
        if self.eigen_tolerance < 0:
            return False, "eigen_tolerance 는 음수일 수 없습니다"
        return True, "OK"

    def __post_init__(self):
        is_valid, message = self.validate()
        if not is_valid:
            raise InvalidInputError(f"솔버 설정 검증 실패: {message}")


DEFAULT_SETTINGS = SolverSettings()


# ============================================================
# 값 인코딩 / 디코딩 (key = value 형식)
# ============================================================

def format_float(value: float) -> str:
    """float 을 왕복 가능한 최단 문자열로 (inf 포함)"""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(float(value))


def parse_float(text: str) -> float:
    """'inf' / 'infinity' 를 포함한 float 파싱"""
    token = text.strip().lower()
    if token in ("inf", "infinity", "+inf"):
        return math.inf
    try:
        return float(token)
    except ValueError:
        raise InvalidInputError(f"숫자로 해석할 수 없습니다: {text!r}")


def parse_int(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise InvalidInputError(f"정수로 해석할 수 없습니다: {text!r}")


def parse_range(text: str, parts: int = 3) -> Tuple[float, ...]:
    """
    'start:end:step' (또는 'lo:hi') 형식 파싱

    Args:
        text: 범위 문자열
        parts: 구성 요소 개수 (3 = start:end:step, 2 = lo:hi)
    """
    tokens = text.strip().split(":")
    if len(tokens) != parts:
        raise InvalidInputError(f"범위 형식 오류 ({parts}개 값 필요): {text!r}")
    values = tuple(parse_float(t) for t in tokens)
    if values[0] > values[1]:
        raise InvalidInputError(f"범위의 시작이 끝보다 큽니다: {text!r}")
    if parts == 3 and values[2] <= 0:
        raise InvalidInputError(f"범위 간격은 양수여야 합니다: {text!r}")
    return values


def _encode_optional(encoder: Callable[[Any], str]) -> Callable[[Any], str]:
    return lambda value: "" if value is None else encoder(value)


def _decode_optional(decoder: Callable[[str], Any]) -> Callable[[str], Any]:
    return lambda text: None if text.strip() == "" else decoder(text)


def _encode_tuple(values: Tuple) -> str:
    return ",".join(values)


def _decode_tuple(text: str) -> Tuple[str, ...]:
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _encode_range(values: Tuple[float, ...]) -> str:
    return ":".join(format_float(v) for v in values)


# ============================================================
# CLI 실행 설정
# ============================================================

@dataclass
class RunConfig:
    """
    CLI 명령 하나의 완전한 설정

    모든 필드는 key = value 설정 파일로 손실 없이 왕복됩니다.
    """

    command: str = "spectrum"
    Z: float = 1.0
    beta: float = 0.0
    q: float = 1.0
    states: Tuple[str, ...] = ()
    pair: Tuple[str, ...] = ()
    beta_range: Optional[Tuple[float, float, float]] = None
    q_range: Optional[Tuple[float, float, float]] = None
    ell: int = 0
    row: Optional[int] = None
    nu_max: int = 7
    n_max: int = DEFAULT_SETTINGS.aim_n_max
    bracket: Optional[Tuple[float, float]] = None
    n_points: int = DEFAULT_SETTINGS.n_points
    output_format: str = "csv"
    output_path: Optional[str] = None
    workers: Optional[int] = None

    def validate(self) -> Tuple[bool, str]:
        if self.command not in COMMANDS:
            return False, f"알 수 없는 명령: {self.command!r} (가능: {', '.join(COMMANDS)})"
        if self.output_format not in OUTPUT_FORMATS:
            return False, f"출력 형식은 csv 또는 json 이어야 합니다 (입력: {self.output_format!r})"
        if self.workers is not None and self.workers < 1:
            return False, f"workers 는 1 이상이어야 합니다 (입력: {self.workers})"
        if self.nu_max < 1:
            return False, f"nu_max 는 1 이상이어야 합니다 (입력: {self.nu_max})"
        if self.n_points < 100:
            return False, f"n_points 는 100 이상이어야 합니다 (입력: {self.n_points})"
        return True, "OK"

    def solver_settings(self) -> SolverSettings:
        """RunConfig 의 오버라이드를 반영한 SolverSettings"""
        return replace(DEFAULT_SETTINGS, n_points=self.n_points, aim_n_max=self.n_max)

    def to_text(self) -> str:
        """key = value 형식 문자열로 직렬화"""
        lines = []
        for f in fields(self):
            encoder, _ = _CODECS[f.name]
            lines.append(f"{f.name} = {encoder(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> Dict[str, Any]:
        """JSON 출력에 포함할 설정 (문자열 값)"""
        return {f.name: _CODECS[f.name][0](getattr(self, f.name)) for f in fields(self)}

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        """
        key = value 형식 문자열에서 RunConfig 생성

        '#' 이후는 주석, 빈 줄은 무시합니다.

        Raises:
            InvalidInputError: 형식 오류, 알 수 없는 키, 잘못된 값
        """
        values: Dict[str, Any] = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInputError(f"설정 파일 {number}번째 줄에 '=' 가 없습니다: {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CODECS:
                raise InvalidInputError(f"설정 파일 {number}번째 줄: 알 수 없는 키 {key!r}")
            values[key] = _CODECS[key][1](value)

        config = cls(**values)
        is_valid, message = config.validate()
        if not is_valid:
            raise InvalidInputError(f"설정 검증 실패: {message}")
        return config


_CODECS: Dict[str, Tuple[Callable[[Any], str], Callable[[str], Any]]] = {
    "command": (str, str.strip),
    "Z": (format_float, parse_float),
    "beta": (format_float, parse_float),
    "q": (format_float, parse_float),
    "states": (_encode_tuple, _decode_tuple),
    "pair": (_encode_tuple, _decode_tuple),
    "beta_range": (_encode_optional(_encode_range), _decode_optional(lambda t: parse_range(t, 3))),
    "q_range": (_encode_optional(_encode_range), _decode_optional(lambda t: parse_range(t, 3))),
    "ell": (str, parse_int),
    "row": (_encode_optional(str), _decode_optional(parse_int)),
    "nu_max": (str, parse_int),
    "n_max": (str, parse_int),
    "bracket": (_encode_optional(_encode_range), _decode_optional(lambda t: parse_range(t, 2))),
    "n_points": (str, parse_int),
    "output_format": (str, lambda t: t.strip().lower()),
    "output_path": (_encode_optional(str), _decode_optional(str.strip)),
    "workers": (_encode_optional(str), _decode_optional(parse_int)),
}


def load_config(path: str) -> RunConfig:
    """설정 파일 로드"""
    config_path = Path(path)
    if not config_path.is_file():
        raise InvalidInputError(f"설정 파일을 찾을 수 없습니다: {path}")
    return RunConfig.from_text(config_path.read_text(encoding="utf-8"))


def resolve_workers(requested: Optional[int] = None) -> int:
    """
    실제 사용할 워커 수 결정

    SOFTCOUL_THREADS 가 설정되어 있으면 그 값이 상한이 됩니다.

    Args:
        requested: 명시적으로 요청한 워커 수 (None 이면 CPU 개수)

    Returns:
        int: 1 이상의 워커 수
    """
    workers = requested if requested is not None else (os.cpu_count() or 1)

    raw_cap = os.environ.get(THREADS_ENV)
    if raw_cap:
        try:
            cap = int(raw_cap)
        except ValueError:
            raise InvalidInputError(f"{THREADS_ENV} 값이 정수가 아닙니다: {raw_cap!r}")
        if cap < 1:
            raise InvalidInputError(f"{THREADS_ENV} 는 1 이상이어야 합니다: {raw_cap!r}")
        workers = min(workers, cap)

    return max(1, workers)
