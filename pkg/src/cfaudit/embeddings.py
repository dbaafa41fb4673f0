"""Binary embedding matrices: codec, normalization, and id-based slicing.

File format (little-endian): magic ``EMB1`` | u32 row count | u32 dimension |
row-major float32 payload. Row identities live in a sidecar JSON file named
``<file>.ids.json`` holding an array of strings, one per row.

Rows are stored as float32; every metric in this package promotes to float64
before accumulating.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmbeddingIOError

MAGIC = b"EMB1"
_HEADER = struct.Struct("<4sII")


@dataclass
class EmbeddingMatrix:
    """An n x d float32 matrix with one string id per row."""

    ids: list[str]
    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=np.float32)
        if rows.ndim != 2:
            raise EmbeddingIOError(f"rows must be 2-dimensional, got shape {rows.shape}")
        if rows.shape[1] < 1:
            raise EmbeddingIOError("dimension must be positive")
        if len(self.ids) != rows.shape[0]:
            raise EmbeddingIOError(
                f"{len(self.ids)} ids for {rows.shape[0]} rows"
            )
        seen: set[str] = set()
        for id_ in self.ids:
            if id_ in seen:
                raise EmbeddingIOError(f"duplicate id {id_!r}")
            seen.add(id_)
        bad = ~np.isfinite(rows)
        if bad.any():
            row = int(np.argwhere(bad)[0][0])
            raise EmbeddingIOError(f"non-finite value in row {row}")
        self.rows = rows

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def row_by_id(self, id_: str) -> np.ndarray:
        try:
            return self.rows[self.ids.index(id_)]
        except ValueError:
            raise EmbeddingIOError(f"{id_!r} not found") from None


def _ids_path(path: Path) -> Path:
    return path.with_name(path.name + ".ids.json")


def read_embeddings(path: str | Path) -> EmbeddingMatrix:
    """Load a matrix and its id sidecar, verifying header arithmetic."""
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise EmbeddingIOError(f"cannot read {path}: {exc}") from exc
    if len(blob) < _HEADER.size:
        raise EmbeddingIOError(f"{path}: file shorter than header")
    magic, n, d = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise EmbeddingIOError(f"{path}: bad magic {magic!r}")
    if d < 1:
        raise EmbeddingIOError(f"{path}: dimension must be positive, got {d}")
    payload = blob[_HEADER.size:]
    expected = n * d * 4
    if len(payload) != expected:
        raise EmbeddingIOError(
            f"{path}: header declares {n}x{d} ({expected} payload bytes), "
            f"found {len(payload)}"
        )
    rows = np.frombuffer(payload, dtype="<f4").reshape(n, d).astype(np.float32)

    ids_file = _ids_path(path)
    try:
        ids = json.loads(ids_file.read_text(encoding="utf-8"))
    except OSError as exc:
        raise EmbeddingIOError(f"cannot read id sidecar {ids_file}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise EmbeddingIOError(f"{ids_file}: invalid JSON: {exc}") from exc
    if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
        raise EmbeddingIOError(f"{ids_file}: expected a JSON array of strings")
    if len(ids) != n:
        raise EmbeddingIOError(
            f"{ids_file}: {len(ids)} ids for {n} rows declared in header"
        )
    return EmbeddingMatrix(ids=ids, rows=rows)


def write_embeddings(matrix: EmbeddingMatrix, path: str | Path) -> None:
    """Write matrix + id sidecar. Identical inputs yield identical bytes."""
    path = Path(path)
    header = _HEADER.pack(MAGIC, matrix.n, matrix.dim)
    payload = np.ascontiguousarray(matrix.rows, dtype="<f4").tobytes()
    path.write_bytes(header + payload)
    _ids_path(path).write_text(
        json.dumps(matrix.ids, ensure_ascii=False, separators=(",", ":")),
        encoding="utf-8",
    )


def l2_normalize(matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    """Scale every row to unit Euclidean norm.

    Norms are computed in float64 and the result stored back as float32,
    so re-normalizing is a no-op to within float32 rounding.
    """
    rows64 = matrix.rows.astype(np.float64)
    norms = np.linalg.norm(rows64, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise EmbeddingIOError(f"zero-norm row {int(zero[0])}")
    return EmbeddingMatrix(
        ids=list(matrix.ids),
        rows=(rows64 / norms[:, None]).astype(np.float32),
    )


def slice_by_ids(matrix: EmbeddingMatrix, ids: list[str]) -> EmbeddingMatrix:
    """Select rows by id, in the requested order, content untouched."""
    index = {id_: k for k, id_ in enumerate(matrix.ids)}
    take = []
    for id_ in ids:
        if id_ not in index:
            raise EmbeddingIOError(f"{id_!r} not found")
        take.append(index[id_])
    return EmbeddingMatrix(ids=list(ids), rows=matrix.rows[take].copy())
