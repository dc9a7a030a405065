"""Loguru sinks for chemostat-qsd invocations.

Every record carries a ``run`` extra: ``<subcommand> seed=<seed>`` while a
subcommand runs, ``-`` otherwise.
"""

import sys
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

from loguru import logger

NO_RUN = "-"

CONSOLE_FORMAT = (
    "<green>{time:HH:mm:ss.SSS}</green> | "
    "<level>{level: <8}</level> | "
    "<magenta>{extra[run]}</magenta> | "
    "<cyan>{name}</cyan>:<cyan>{line}</cyan> | "
    "<level>{message}</level>"
)
FILE_FORMAT = (
    "{time:YYYY-MM-DDTHH:mm:ss.SSSZZ} | {level: <8} | {extra[run]} | "
    "{name}:{function}:{line} | {message}"
)


def setup_logging(log_level: str = "INFO", log_file: Path | None = None) -> None:
    """Replace loguru's sinks with a stderr sink and an optional file sink.

    stdout carries only the one-line run summaries. The file sink appends, so
    several invocations can share one ``--log-file``.

    Args:
        log_level: Level for both sinks (DEBUG with ``--verbose``)
        log_file: Optional path from ``--log-file``; parents are created
    """
    logger.remove()
    logger.configure(extra={"run": NO_RUN})
    logger.add(sys.stderr, level=log_level, format=CONSOLE_FORMAT)

    if log_file:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        logger.add(
            log_file, level=log_level, format=FILE_FORMAT, mode="a", encoding="utf-8"
        )
        logger.debug(f"Appending {log_level} records to {log_file}")


def run_label(subcommand: str, seed: int | None) -> str:
    return subcommand if seed is None else f"{subcommand} seed={seed}"


@contextmanager
def run_context(subcommand: str, seed: int | None = None) -> Iterator[str]:
    """Tag the records emitted inside the block with the running subcommand."""
    label = run_label(subcommand, seed)
    with logger.contextualize(run=label):
        yield label
