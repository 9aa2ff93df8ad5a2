"""
File utilities for reading and writing JSON summaries and CSV tables.
"""
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence, TextIO, Union

import pandas as pd

from .errors import InputError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

CSV_FLOAT_FORMAT = "%.12g"


def read_json(path: PathLike) -> Any:
    """
    Load a JSON document.

    Args:
        path: File to read

    Returns:
        Parsed document

    Raises:
        InputError: If the file is missing or is not valid JSON
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise InputError(f"file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: malformed JSON ({e.msg} at line {e.lineno})") from e
    except OSError as e:
        raise InputError(f"{path}: {e}") from e


def dumps_json(data: Any) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False)


def write_json(data: Any, path: Optional[PathLike] = None) -> None:
    """Write data as indented JSON to path, or to stdout when path is None."""
    text = dumps_json(data) + "\n"
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
    logger.debug("wrote %s", path)


def write_csv(frame: pd.DataFrame, path: Optional[PathLike] = None) -> None:
    """Write a table with 12 significant digits, to stdout when path is None."""
    if path is None:
        frame.to_csv(sys.stdout, index=False, float_format=CSV_FLOAT_FORMAT)
        sys.stdout.flush()
        return
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, encoding="utf-8")
    logger.debug("wrote %s (%d rows)", path, len(frame))


def read_csv(path: PathLike) -> pd.DataFrame:
    try:
        return pd.read_csv(path, encoding="utf-8")
    except FileNotFoundError:
        raise InputError(f"file not found: {path}") from None
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise InputError(f"{path}: malformed CSV ({e})") from e


class CsvStream:
    """
    Append rows to a CSV table as they arrive, to a file or to stdout.

    The header is written on open and every append is flushed, so an
    interrupted run keeps the rows written so far.
    """

    def __init__(self, columns: Sequence[str], path: Optional[PathLike] = None):
        self.columns = list(columns)
        self.path = path
        self.rows = 0
        self._handle: TextIO = (
            sys.stdout if path is None else open(path, "w", encoding="utf-8", newline="")
        )
        pd.DataFrame(columns=self.columns).to_csv(self._handle, index=False)
        self._handle.flush()

    def append(self, frame: pd.DataFrame) -> None:
        frame[self.columns].to_csv(
            self._handle, index=False, header=False, float_format=CSV_FLOAT_FORMAT
        )
        self._handle.flush()
        self.rows += len(frame)

    def close(self) -> None:
        if self.path is not None and not self._handle.closed:
            self._handle.close()
            logger.debug("streamed %d rows to %s", self.rows, self.path)

    def __enter__(self) -> "CsvStream":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
