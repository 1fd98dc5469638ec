"""
============================================================
softcoul 명령행 인터페이스 (cli.py)
============================================================

주요 명령:
    spectrum  상태별 에너지 (β 단일값 또는 start:end:step)
    scan      β 격자 위 E(β) 표 (long 형식)
    cross     두 상태의 교차점 β*
    audit     ν <= nu_max 전체 쌍의 교차 규칙 점검
    bounds    포락선 하한/상한
    aim       AIM 고유값 (q = 1)
    exact     q = 1 정확해 조건의 β 근
    density   원점 밀도 η(0), η'(0), η''(0) 과 오목성
    qsweep    β 고정, q 를 바꿀 때의 교차 확인

사용 예:
    python -m softcoul spectrum --Z 1 --beta 0 --q 1 --states 1s,2s,2p
    python -m softcoul exact --q 1 --row 3 --ell 0 --Z 1
    python -m softcoul cross --Z 1 --q 1 --pair 6s,7f --beta 0:100:1 --format json

종료 코드: 0 성공, 2 잘못된 입력, 3 수치 비수렴
산출물은 stdout (또는 --output), 진단 메시지는 stderr 로 나갑니다.
"""

import argparse
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .aim_utils import aim_solve, default_bracket, exact_case, factor_nodes
from .config_utils import COMMANDS, OUTPUT_FORMATS, RunConfig, load_config, parse_float, parse_int, parse_range
from .crossing_utils import audit_conjecture, beta_grid, crossings_frame, find_crossing, q_sweep, scan_levels
from .density_utils import predicted_ratio, scaled_density
from .eigensolver_utils import solve_state
from .envelope_utils import envelope_bounds
from .exceptions import ConvergenceError, InvalidInputError
from .logging_utils import log_banner, setup_logging
from .potential_utils import PotentialParams, StateLabel, parse_state

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3

FLOAT_FORMAT = "%.12g"

DEFAULT_BETA_RANGE = (0.0, 100.0, 1.0)
RANGE_COMMANDS = ("scan", "cross", "audit")
DEFAULT_Q_RANGE = (1.0, 6.0, 0.25)

SPECTRUM_COLUMNS = ["Z", "beta", "q", "state", "nu", "ell", "energy", "error_estimate", "nodes"]
SCAN_COLUMNS = ["beta", "state", "energy"]
BOUNDS_COLUMNS = ["state", "lower", "upper", "upper_valid", "r_hat"]
AIM_COLUMNS = ["Z", "beta", "q", "ell", "energy", "iteration"]
EXACT_COLUMNS = ["row", "ell", "Z", "beta", "energy", "nodes", "node_locations"]
DENSITY_COLUMNS = ["state", "eta0", "eta1", "eta2", "predicted_ratio", "concave"]
QSWEEP_COLUMNS = ["beta", "state_a", "state_b", "q_lo", "q_hi"]

COMMAND_HELP = {
    "spectrum": "상태별 에너지와 오차 추정",
    "scan": "β 격자 위 E(β) 표",
    "cross": "두 상태의 교차점 β*",
    "audit": "ν <= nu_max 쌍 전체의 교차 규칙 점검",
    "bounds": "포락선 에너지 하한/상한",
    "aim": "AIM 고유값",
    "exact": "q = 1 정확해 조건의 β 근",
    "density": "원점 밀도와 오목성",
    "qsweep": "β 고정 q 스윕 교차 확인",
}


# ============================================================
# 설정 해석
# ============================================================

def _labels(config: RunConfig, field_name: str = "states") -> List[StateLabel]:
    labels = [parse_state(text) for text in getattr(config, field_name)]
    if not labels:
        raise InvalidInputError(f"{config.command}: --{field_name.replace('_', '-')} 로 상태를 지정해야 합니다")
    return labels


def _params(config: RunConfig, beta: Optional[float] = None) -> PotentialParams:
    return PotentialParams(config.Z, config.beta if beta is None else beta, config.q)


def _single_beta(config: RunConfig) -> None:
    if config.beta_range is not None:
        raise InvalidInputError(f"{config.command} 명령은 단일 β 값만 받습니다 (--beta 값)")


def _beta_range(config: RunConfig):
    """β 범위 (없으면 기본 범위). 범위 명령에 단일 β 를 주면 입력 오류"""
    if config.beta_range is not None:
        return config.beta_range
    if config.beta != RunConfig.beta:
        raise InvalidInputError(
            f"{config.command} 명령은 β 범위가 필요합니다 (--beta start:end:step, 입력: β={config.beta:g})"
        )
    return DEFAULT_BETA_RANGE


# ============================================================
# 명령별 표 생성
# ============================================================

def _spectrum(config: RunConfig) -> pd.DataFrame:
    labels = _labels(config)
    settings = config.solver_settings()
    if config.beta_range is None:
        betas = [config.beta]
    else:
        betas = beta_grid(config.beta_range[:2], config.beta_range[2])

    rows = []
    for beta in betas:
        params = _params(config, float(beta))
        for label in labels:
            pair = solve_state(params, label, settings)
            rows.append({
                "Z": params.Z, "beta": params.beta, "q": params.q, "state": str(label),
                "nu": label.nu, "ell": label.ell, "energy": pair.energy,
                "error_estimate": pair.error_estimate, "nodes": pair.node_count,
            })
    return pd.DataFrame(rows, columns=SPECTRUM_COLUMNS)


def _scan(config: RunConfig) -> pd.DataFrame:
    labels = _labels(config)
    lo, hi, step = _beta_range(config)
    wide = scan_levels(config.Z, config.q, labels, beta_grid((lo, hi), step), config.solver_settings(), config.workers)
    long = wide.reset_index().melt(id_vars="beta", var_name="state", value_name="energy")
    return long.sort_values("beta", kind="mergesort").reset_index(drop=True)[SCAN_COLUMNS]


def _cross(config: RunConfig) -> pd.DataFrame:
    pair = _labels(config, "pair")
    if len(pair) != 2:
        raise InvalidInputError(f"--pair 는 상태 두 개여야 합니다 (입력: {','.join(config.pair)})")
    lo, hi, step = _beta_range(config)
    records = find_crossing(config.Z, config.q, (pair[0], pair[1]), (lo, hi), step,
                            config.solver_settings(), config.workers)
    if not records:
        logger.info("%s-%s: β ∈ [%g, %g] 에서 교차 없음", pair[0], pair[1], lo, hi)
    return crossings_frame(records)


def _audit(config: RunConfig) -> pd.DataFrame:
    lo, hi, step = _beta_range(config)
    report = audit_conjecture(config.Z, config.q, config.nu_max, (lo, hi), step,
                              config.solver_settings(), config.workers)
    for record, label in report.shielding_violations:
        logger.warning("차폐 위반: %s-%s 교차점 β*=%.8g 에서 %s 가 아직 위에 있음",
                       record.state_a, record.state_b, record.beta_star, label)
    for event in report.near_degeneracies:
        logger.info("근접 축퇴: %s-%s β=%.8g |ΔE|=%.2e", event.state_a, event.state_b, event.beta, event.gap)
    return report.to_frame()


def _bounds(config: RunConfig) -> pd.DataFrame:
    _single_beta(config)
    params = _params(config)
    rows = []
    for label in _labels(config):
        lower, upper = envelope_bounds(params, label)
        rows.append({
            "state": str(label), "lower": lower.value, "upper": upper.value,
            "upper_valid": upper.valid, "r_hat": upper.r_hat,
        })
    return pd.DataFrame(rows, columns=BOUNDS_COLUMNS)


def _aim(config: RunConfig) -> pd.DataFrame:
    _single_beta(config)
    params = _params(config)
    bracket = config.bracket if config.bracket is not None else default_bracket(params, config.ell)
    roots = aim_solve(params, config.ell, bracket, config.n_max, config.solver_settings())
    rows = [
        {"Z": params.Z, "beta": params.beta, "q": params.q, "ell": config.ell,
         "energy": root.energy, "iteration": root.iteration}
        for root in roots
    ]
    return pd.DataFrame(rows, columns=AIM_COLUMNS)


def _exact(config: RunConfig) -> pd.DataFrame:
    if config.q != 1:
        raise InvalidInputError(f"정확해 조건은 q = 1 에서만 정의됩니다 (입력: q={config.q})")
    if config.row is None:
        raise InvalidInputError("exact 명령은 --row (또는 --table-row) 가 필요합니다")
    case = exact_case(config.row, config.ell, config.Z)
    rows = []
    for beta, nodes in sorted(zip(case.beta_roots, case.node_counts)):
        locations = factor_nodes(case.row, case.ell, case.Z, beta)
        rows.append({
            "row": case.row, "ell": case.ell, "Z": case.Z, "beta": beta, "energy": case.energy,
            "nodes": nodes, "node_locations": ";".join(FLOAT_FORMAT % r for r in sorted(locations)),
        })
    return pd.DataFrame(rows, columns=EXACT_COLUMNS)


def _density(config: RunConfig) -> pd.DataFrame:
    _single_beta(config)
    params = _params(config)
    settings = config.solver_settings()
    rows = []
    for label in _labels(config):
        pair = solve_state(params, label, settings)
        profile = scaled_density(pair, settings)
        predicted = math.nan if params.is_coulomb else predicted_ratio(params, label.ell, pair.energy)
        measured = profile.eta2 / profile.eta0
        concave = measured <= 0 if params.is_coulomb else measured <= 1e-2 * abs(predicted)
        rows.append({
            "state": str(label), "eta0": profile.eta0, "eta1": profile.eta1, "eta2": profile.eta2,
            "predicted_ratio": predicted, "concave": bool(concave),
        })
    return pd.DataFrame(rows, columns=DENSITY_COLUMNS)


def _qsweep(config: RunConfig) -> pd.DataFrame:
    _single_beta(config)
    labels = _labels(config)
    lo, hi, step = config.q_range if config.q_range is not None else DEFAULT_Q_RANGE
    if lo < 1:
        raise InvalidInputError(f"q 범위는 1 이상이어야 합니다 (입력: {lo})")
    events = q_sweep(config.Z, config.beta, labels, beta_grid((lo, hi), step),
                     config.solver_settings(), config.workers)
    rows = [
        {"beta": config.beta, "state_a": str(a), "state_b": str(b), "q_lo": q_lo, "q_hi": q_hi}
        for a, b, q_lo, q_hi in events
    ]
    return pd.DataFrame(rows, columns=QSWEEP_COLUMNS)


_BUILDERS: Dict[str, Callable[[RunConfig], pd.DataFrame]] = {
    "spectrum": _spectrum,
    "scan": _scan,
    "cross": _cross,
    "audit": _audit,
    "bounds": _bounds,
    "aim": _aim,
    "exact": _exact,
    "density": _density,
    "qsweep": _qsweep,
}


def build_table(config: RunConfig) -> pd.DataFrame:
    """설정 하나에 해당하는 결과 표"""
    is_valid, message = config.validate()
    if not is_valid:
        raise InvalidInputError(f"설정 검증 실패: {message}")
    return _BUILDERS[config.command](config)


# ============================================================
# 출력
# ============================================================

def _json_value(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return float(FLOAT_FORMAT % value)
    return value


def render(frame: pd.DataFrame, config: RunConfig) -> str:
    """
    결과 표를 CSV 또는 JSON 문자열로

    같은 설정이면 바이트 단위로 같은 출력이 나옵니다.
    """
    if config.output_format == "csv":
        return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")

    rows = [{key: _json_value(value) for key, value in record.items()} for record in frame.to_dict("records")]
    document = {"config": config.to_dict(), "rows": rows}
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def run(config: RunConfig) -> int:
    """
    설정 하나를 실행하고 산출물을 기록

    Returns:
        int: 종료 코드 (0, 2, 3)
    """
    try:
        log_banner(logger, f"softcoul {config.command}: Z={config.Z:g}, q={config.q:g}")
        text = render(build_table(config), config)
    except InvalidInputError as error:
        logger.error("잘못된 입력: %s", error)
        return EXIT_INVALID
    except ConvergenceError as error:
        logger.error("수치 비수렴: %s", error)
        return EXIT_NOT_CONVERGED

    if config.output_path:
        Path(config.output_path).write_text(text, encoding="utf-8")
        logger.info("결과 저장: %s", config.output_path)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
    return EXIT_OK


# ============================================================
# 인자 파싱
# ============================================================

def _state_list(text: str) -> tuple:
    return tuple(token.strip() for token in text.split(",") if token.strip())


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value 설정 파일 (플래그가 우선)")
    common.add_argument("--Z", type=parse_float, help="결합 세기 Z > 0")
    common.add_argument("--beta", help="β 값 또는 start:end:step")
    common.add_argument("--q", type=parse_float, help="모양 지수 q >= 1 (inf 가능)")
    common.add_argument("--states", type=_state_list, help="쉼표로 구분한 상태 (예: 1s,2p)")
    common.add_argument("--pair", type=_state_list, help="교차를 찾을 두 상태 (예: 6s,7f)")
    common.add_argument("--ell", type=parse_int, help="각운동량 ℓ")
    rows = common.add_mutually_exclusive_group()
    rows.add_argument("--row", type=parse_int, help="정확해 조건 k = 2..9 (a = Z/(ℓ+k), E = -Z²/(2(ℓ+k)²))")
    rows.add_argument("--table-row", type=parse_int, help="정확해 표의 행 번호 T = 1..8 (k = T + 1, 즉 --row T+1 과 같음)")
    common.add_argument("--nu-max", type=parse_int, help="audit 대상 최대 ν")
    common.add_argument("--n-max", type=parse_int, help="AIM 최대 반복 횟수")
    common.add_argument("--bracket", type=lambda t: parse_range(t, 2), help="AIM 에너지 구간 lo:hi")
    common.add_argument("--q-range", type=lambda t: parse_range(t, 3), help="qsweep q 범위 start:end:step")
    common.add_argument("--n-points", type=parse_int, help="성긴 격자 점 수")
    common.add_argument("--format", dest="output_format", choices=OUTPUT_FORMATS, help="출력 형식")
    common.add_argument("--output", dest="output_path", help="출력 파일 (기본: stdout)")
    common.add_argument("--workers", type=parse_int, help="병렬 워커 수 (SOFTCOUL_THREADS 로 상한)")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="DEBUG 로그")
    verbosity.add_argument("--quiet", action="store_true", help="WARNING 이상만 로그")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="softcoul",
        description="soft-core 쿨롱 퍼텐셜 -Z/(r^q+β^q)^(1/q) 의 속박 상태 스펙트럼 도구",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common], help=COMMAND_HELP[command])
    return parser


_FLAG_FIELDS = (
    "Z", "q", "states", "pair", "ell", "nu_max", "n_max", "bracket", "q_range",
    "n_points", "output_format", "output_path", "workers",
)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """
    플래그 > 설정 파일 > 기본값 순으로 RunConfig 구성

    Raises:
        InvalidInputError: 설정 파일/값 오류
    """
    base = load_config(args.config) if args.config else RunConfig()
    overrides: Dict[str, Any] = {"command": args.command}
    for name in _FLAG_FIELDS:
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value

    if args.beta is not None:
        if ":" in args.beta:
            overrides["beta_range"] = parse_range(args.beta, 3)
            overrides["beta"] = overrides["beta_range"][0]
        elif args.command in RANGE_COMMANDS:
            raise InvalidInputError(f"{args.command} 명령은 β 범위가 필요합니다 (--beta start:end:step, 입력: {args.beta})")
        else:
            overrides["beta"] = parse_float(args.beta)
            overrides["beta_range"] = None
    if args.row is not None:
        overrides["row"] = args.row
    elif args.table_row is not None:
        overrides["row"] = args.table_row + 1

    config = replace(base, **overrides)
    is_valid, message = config.validate()
    if not is_valid:
        raise InvalidInputError(f"설정 검증 실패: {message}")
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_request:
        return int(exit_request.code or 0)

    if args.verbose:
        setup_logging(logging.DEBUG)
    elif args.quiet:
        setup_logging(logging.WARNING)
    else:
        setup_logging(logging.INFO)

    try:
        config = resolve_config(args)
    except InvalidInputError as error:
        logger.error("잘못된 입력: %s", error)
        return EXIT_INVALID
    return run(config)
