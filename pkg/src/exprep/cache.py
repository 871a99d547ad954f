"""Dense float32 feature cache with a jsonl sidecar index.

File layout (little-endian throughout):

    header: magic "EXPF" | version u32 | dim u32 | rows u64   (20 bytes)
    body:   rows * dim float32, row-major

The sidecar ``<path>.index.jsonl`` maps ``(instance_id, text_hash)`` to a row
number, one JSON object per line. A row is committed only once its index line
is on disk; the matrix bytes are always written first, so a crash mid-append
leaves at worst an orphan row that the next append overwrites. On open, the
index is the source of truth and dangling entries beyond the physical file
are dropped.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import CacheError

MAGIC = b"EXPF"
VERSION = 1
_HEADER = struct.Struct("<4sIIQ")
HEADER_SIZE = _HEADER.size  # 20


def index_path(path: str | Path) -> Path:
    return Path(str(path) + ".index.jsonl")


class FeatureCache:
    """Single-writer, multi-reader store of fixed-width float32 rows."""

    def __init__(self, path: str | Path, dim: int, mode: str = "r"):
        if dim < 1:
            raise CacheError(f"cache dim must be >= 1, got {dim}")
        if mode not in ("r", "a"):
            raise CacheError(f"cache mode must be 'r' or 'a', got {mode!r}")
        self.path = Path(path)
        self.dim = dim
        self.mode = mode
        self._row_bytes = 4 * dim
        self._index: dict[tuple[str, str], int] = {}
        self._mm: np.memmap | None = None

        exists = self.path.exists()
        if mode == "r" and not exists:
            raise CacheError(f"missing cache file: {self.path}")
        if exists:
            self._load_existing()
        else:
            self._fh = self.path.open("w+b")
            self._write_header(0)
            self._ifh = index_path(self.path).open("a", encoding="utf-8")
            return
        if mode == "a":
            self._fh = self.path.open("r+b")
            self._ifh = index_path(self.path).open("a", encoding="utf-8")
        else:
            self._fh = None
            self._ifh = None

    def _write_header(self, rows: int) -> None:
        self._fh.seek(0)
        self._fh.write(_HEADER.pack(MAGIC, VERSION, self.dim, rows))

    def _load_existing(self) -> None:
        raw = self.path.read_bytes()[:HEADER_SIZE]
        if len(raw) < HEADER_SIZE:
            raise CacheError(f"{self.path}: truncated header")
        magic, version, dim, _rows = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise CacheError(f"{self.path}: bad magic {magic!r}")
        if version != VERSION:
            raise CacheError(f"{self.path}: unsupported version {version}")
        if dim != self.dim:
            raise CacheError(f"{self.path}: cache dim {dim} does not match expected {self.dim}")
        file_rows = (self.path.stat().st_size - HEADER_SIZE) // self._row_bytes
        ipath = index_path(self.path)
        if ipath.exists():
            lines = ipath.read_text(encoding="utf-8").splitlines()
            for line_no, line in enumerate(lines, start=1):
                if not line.strip():
                    continue
                try:
                    entry = json.loads(line)
                    key = (entry["instance_id"], entry["text_hash"])
                    row = int(entry["row"])
                except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                    # A torn final line is an uncommitted row from a crash
                    # mid-write; anything earlier is real corruption.
                    if line_no == len(lines):
                        break
                    raise CacheError(f"{ipath}:{line_no}: malformed index entry") from None
                if row < file_rows:
                    self._index[key] = row

    @property
    def rows(self) -> int:
        return len(self._index)

    def keys(self) -> set[tuple[str, str]]:
        return set(self._index)

    def __contains__(self, key: tuple[str, str]) -> bool:
        return key in self._index

    def put(self, instance_id: str, text_hash: str, vector: np.ndarray) -> int:
        """Append (or overwrite in place) one row; returns its row number."""
        if self.mode != "a":
            raise CacheError("cache opened read-only")
        vec = np.asarray(vector, dtype="<f4").reshape(-1)
        if vec.shape[0] != self.dim:
            raise CacheError(f"vector has dim {vec.shape[0]}, cache expects {self.dim}")
        key = (instance_id, text_hash)
        if key in self._index:
            row = self._index[key]
            self._fh.seek(HEADER_SIZE + row * self._row_bytes)
            self._fh.write(vec.tobytes())
            return row
        row = len(self._index)
        self._fh.seek(HEADER_SIZE + row * self._row_bytes)
        self._fh.write(vec.tobytes())
        self._fh.flush()
        self._ifh.write(json.dumps(
            {"instance_id": instance_id, "text_hash": text_hash, "row": row}) + "\n")
        self._index[key] = row
        self._mm = None
        return row

    def get(self, instance_id: str, text_hash: str) -> np.ndarray:
        row = self._index.get((instance_id, text_hash))
        if row is None:
            raise CacheError(f"{self.path}: no cached row for ({instance_id}, {text_hash})")
        return np.array(self._matrix()[row])

    def get_rows(self, keys: list[tuple[str, str]]) -> np.ndarray:
        """Gather many rows at once; raises on the first missing key."""
        idx = np.empty(len(keys), dtype=np.int64)
        for i, (instance_id, text_hash) in enumerate(keys):
            row = self._index.get((instance_id, text_hash))
            if row is None:
                raise CacheError(f"{self.path}: no cached row for ({instance_id}, {text_hash})")
            idx[i] = row
        return np.array(self._matrix()[idx])

    def _matrix(self) -> np.ndarray:
        if self._fh is not None:
            self._fh.flush()
        if not self._index:
            return np.empty((0, self.dim), dtype="<f4")
        if self._mm is None or len(self._mm) < len(self._index):
            self._mm = np.memmap(self.path, dtype="<f4", mode="r",
                                 offset=HEADER_SIZE, shape=(len(self._index), self.dim))
        return self._mm

    def flush(self) -> None:
        if self.mode == "a":
            self._write_header(len(self._index))
            self._fh.flush()
            self._ifh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self.flush()
            self._fh.close()
            self._fh = None
        if self._ifh is not None:
            self._ifh.close()
            self._ifh = None
        self._mm = None

    def __enter__(self) -> FeatureCache:
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_matrix(path: str | Path, matrix: np.ndarray) -> None:
    """Write a bare 2-D float32 matrix in the cache binary layout, no index.

    Used for checkpoint tensors; the header's row count is authoritative
    since there is no sidecar.
    """
    arr = np.ascontiguousarray(matrix, dtype="<f4")
    if arr.ndim != 2:
        raise CacheError(f"expected a 2-D matrix, got shape {arr.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, arr.shape[1], arr.shape[0]))
        fh.write(arr.tobytes())


def read_matrix(path: str | Path) -> np.ndarray:
    """Read back a matrix written by write_matrix."""
    with open(path, "rb") as fh:
        raw = fh.read(HEADER_SIZE)
        if len(raw) != HEADER_SIZE:
            raise CacheError(f"{path}: truncated header")
        magic, version, dim, rows = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise CacheError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise CacheError(f"{path}: unsupported version {version}")
        body = fh.read(rows * dim * 4)
    if len(body) != rows * dim * 4:
        raise CacheError(f"{path}: expected {rows} rows of dim {dim}, file is short")
    return np.frombuffer(body, dtype="<f4").reshape(rows, dim).copy()
