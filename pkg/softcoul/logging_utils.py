"""
로깅 / 진행 표시 유틸리티

라이브러리 코드는 print 하지 않고 logger 만 사용합니다.
CLI 에서 setup_logging() 으로 stderr 핸들러를 한 번 설치합니다.
"""

import logging
import sys
from typing import Iterable, Optional, TypeVar

from tqdm import tqdm

T = TypeVar("T")

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
BANNER_WIDTH = 60


def setup_logging(level: int = logging.INFO) -> None:
    """
    softcoul 로거에 stderr 핸들러 설치

    여러 번 호출해도 핸들러가 중복되지 않습니다.

    Args:
        level: 로그 레벨 (-v 이면 DEBUG, --quiet 이면 WARNING)
    """
    root = logging.getLogger("softcoul")
    root.setLevel(level)
    for handler in list(root.handlers):
        if getattr(handler, "_softcoul", False):
            root.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._softcoul = True
    root.addHandler(handler)


def log_banner(logger: logging.Logger, title: str) -> None:
    """긴 작업 단계의 시작을 ==== 배너로 표시"""
    logger.info("=" * BANNER_WIDTH)
    logger.info(title)
    logger.info("=" * BANNER_WIDTH)


def progress(iterable: Iterable[T], desc: str, total: Optional[int] = None) -> Iterable[T]:
    """
    tqdm 진행 표시줄 (stderr, TTY 가 아니면 자동 비활성화)

    Args:
        iterable: 반복 대상
        desc: 진행 표시줄 라벨
        total: 전체 개수 (len() 불가능한 iterable 용)
    """
    return tqdm(
        iterable,
        desc=desc,
        total=total,
        file=sys.stderr,
        disable=not sys.stderr.isatty(),
        leave=False,
    )
