"""Set of formatter functions."""

from pprint import pformat
from typing import Any

import numpy as np


def _printable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return np.array2string(value, precision=6, suppress_small=True)
    if isinstance(value, dict):
        return {key: _printable(item) for key, item in value.items()}
    if isinstance(value, list | tuple):
        return type(value)(_printable(item) for item in value)
    return value


def format_record(record: dict[Any, Any], loguru_format: str) -> str:
    """
    Format loguru_format based on record.

    A bound ``payload`` is rendered below the message; numpy arrays are
    printed with six significant digits.
    >>> logger.bind(payload={"singular_values": values}).debug("kernel of G")
    """
    format_str = loguru_format
    if record["extra"].get("payload") is not None:
        record["extra"]["payload"] = pformat(
            _printable(record["extra"]["payload"]),
            indent=4,
            compact=True,
            sort_dicts=True,
        )
        format_str = "".join([loguru_format, "\n<level>{extra[payload]}</level>"])

    return "".join([format_str, "{exception}\n"])
