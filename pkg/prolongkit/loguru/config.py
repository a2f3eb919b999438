"""Logging configuration and init function."""

import logging
import sys

from loguru import logger
from pydantic.v1 import BaseModel, validator

from .formatters import format_record
from .handlers import InterceptHandler


class LoggingConfig(BaseModel):
    """Contain all necessary logging config."""

    log_lvl: str = "INFO"

    json_logs: bool = False

    loguru_format: str = "".join(
        [
            "<green>{time:HH:mm:ss.SSS}</green> | ",
            "<level>{level: <7}</level> | ",
            "<cyan>{name}</cyan> - ",
            "<level>{message}</level>",
        ],
    )

    @validator("log_lvl", pre=True)
    def assemble_log_lvl(cls, log_lvl: str) -> str:
        """
        Format and validate log lvl str.

        Raises:
            ValueError: if input string is not a standard level name
        """
        upper_str = str(log_lvl).upper()
        if isinstance(logging.getLevelName(upper_str), str):
            raise ValueError(f"Incorrect log lvl variable {log_lvl}")

        return upper_str


def init_logging(log_conf: LoggingConfig | None = None) -> None:
    """
    Route standard logging and Python warnings into loguru.

    Reports are written on stdout, so the single sink goes to stderr.
    Numerical warnings raised by numpy or scipy end up in the same stream.
    """
    log_conf = log_conf or LoggingConfig()

    logging.root.handlers = [InterceptHandler()]
    logging.root.setLevel(log_conf.log_lvl)
    logging.captureWarnings(True)

    for name in logging.root.manager.loggerDict.keys():
        logging.getLogger(name).handlers = []
        logging.getLogger(name).propagate = True

    logger.configure(
        handlers=[
            {
                "sink": sys.stderr,
                "level": log_conf.log_lvl,
                "serialize": log_conf.json_logs,
                "format": lambda values: format_record(
                    values,
                    log_conf.loguru_format,
                ),
            },
        ],
    )
