from pathlib import Path

import numpy as np
import polars as pl
from loguru import logger
from pydantic import BaseModel

from netgof.core.exceptions import NetworkValidationError


def write_frame_with_header(
        frame: pl.DataFrame,
        path: str | Path,
        header: list[str],
        separator: str = ",",
) -> None:
    """
    Write comment/header lines followed by the frame's rows (no column header).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        for line in header:
            fh.write(f"{line}\n".encode())
        frame.write_csv(fh, include_header=False, separator=separator)


def save_frame(frame: pl.DataFrame, path: str | Path) -> None:
    """Save a frame as CSV with a header row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.write_csv(path)
    logger.info("Saved {} rows to {}", frame.height, path)


def save_model_json(model: BaseModel, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2))
    logger.info("Saved {} to {}", type(model).__name__, path)


def write_dense_matrix(matrix: np.ndarray, path: str | Path) -> None:
    """Row-major CSV with a first line "n=<N>"."""
    matrix = np.asarray(matrix, dtype=np.float64)
    frame = pl.DataFrame(matrix, schema=[f"c{j}" for j in range(matrix.shape[1])], orient="row")
    write_frame_with_header(frame, path, header=[f"n={matrix.shape[0]}"])


def read_dense_matrix(path: str | Path) -> np.ndarray:
    """Read a matrix written by `write_dense_matrix`; validates the declared size."""
    path = Path(path)
    with path.open() as fh:
        first = fh.readline().strip()
    key, _, value = first.partition("=")
    if key != "n" or not value.isdigit():
        raise NetworkValidationError(f"{path}: first line must be 'n=<N>', got {first!r}")
    n = int(value)

    frame = pl.read_csv(path, skip_rows=1, has_header=False, infer_schema_length=0)
    matrix = frame.cast(pl.Float64).to_numpy()
    if matrix.shape != (n, n):
        raise NetworkValidationError(f"{path}: declared n={n} but read a {matrix.shape} matrix")
    return matrix
