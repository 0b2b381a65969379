import sys
from pathlib import Path
from typing import TextIO

from loguru import logger

from netgof.core.context import run_id_ctx
from netgof.core.env_config import config


def run_id_filter(record):
    """
    Inject the current run ID into every log record.

    Loguru allows adding dynamic fields via the record["extra"] dictionary.
    """
    record["extra"]["run_id"] = run_id_ctx.get()
    return True


def setup_logging(sink: TextIO = sys.stdout, log_to_file: bool = True) -> None:
    """
    Configure Loguru to write logs to a console sink and a rotating log file.

    - The HTTP service logs to stdout; the CLI passes stderr so stdout only carries data
    - LOG_DIR/netgof.log rotates when size > 10 MB, keeps 10 compressed backups
    """
    logger.remove()

    logger.add(
        sink,
        level=config.LOG_LEVEL,
        format=(
            "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
            "<cyan>{extra[run_id]}</cyan> | "
            "<level>{level}</level> | "
            "{message}"
        ),
        filter=run_id_filter,
    )

    if not log_to_file:
        return

    log_dir = Path(config.LOG_DIR)
    log_dir.mkdir(parents=True, exist_ok=True)
    logger.add(
        log_dir / "netgof.log",
        rotation="10 MB",
        retention=10,
        compression="zip",
        level="DEBUG",
        format=(
            "{time:YYYY-MM-DD HH:mm:ss} | "
            "{extra[run_id]} | "
            "{level} | "
            "{name}:{function}:{line} - "
            "{message}"
        ),
        filter=run_id_filter,
        enqueue=True,
        backtrace=True,
        diagnose=False,
    )
