"""Dense embedding store with exact maximum-inner-product top-k queries.

The scan is brute force by design: at the corpus sizes this engine
targets it is affordable, and it doubles as its own correctness oracle.
Scores are raw inner products; no normalization is applied.
"""

import numpy as np

from .errors import ConfigError, DimensionError, DuplicateIdError, FormatError
from .fileio import atomic_write_text, format_float
from .kernels import mips_scores
from .lexical import ScoredFact


class DenseIndex:
    """Immutable (fact_id, embedding) table over a fixed dimension."""

    def __init__(self, dim: int, ids, matrix):
        self.dim = int(dim)
        self.ids: list[str] = list(ids)
        self.matrix = np.ascontiguousarray(matrix, dtype=np.float64).reshape(len(self.ids), self.dim)
        if not np.all(np.isfinite(self.matrix)):
            raise ConfigError("embeddings must be finite")
        self._ids_arr = np.array(self.ids, dtype=np.str_) if self.ids else np.empty(0, dtype=np.str_)
        self._ordinal_of: dict[str, int] = {}
        for i, entry_id in enumerate(self.ids):
            if entry_id in self._ordinal_of:
                raise DuplicateIdError(f"duplicate embedding id {entry_id!r}")
            self._ordinal_of[entry_id] = i

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, entry_id: str) -> bool:
        return entry_id in self._ordinal_of

    def embedding_of(self, entry_id: str) -> np.ndarray:
        return self.matrix[self._ordinal_of[entry_id]]


def mips_top_k(index: DenseIndex, query, k: int, exclude=frozenset()) -> list[ScoredFact]:
    """Exact top-k by inner product, descending; ties by ascending fact id."""
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    query = np.ascontiguousarray(query, dtype=np.float64)
    if query.shape != (index.dim,):
        raise DimensionError(f"query has shape {query.shape}, index dim is {index.dim}")
    if len(index) == 0:
        return []
    scores = mips_scores(index.matrix, query)
    if exclude:
        keep = np.array([i for i, fid in enumerate(index.ids) if fid not in exclude], dtype=np.int64)
    else:
        keep = np.arange(len(index), dtype=np.int64)
    if len(keep) == 0:
        return []
    order = np.lexsort((index._ids_arr[keep], -scores[keep]))
    chosen = keep[order[:k]]
    return [ScoredFact(index.ids[int(i)], float(scores[int(i)])) for i in chosen]


def load_embeddings(path) -> DenseIndex:
    """Parse the embeddings format: `#dim=<d>` header, then one
    `<id>\\t<v1> <v2> ... <vd>` record per line."""
    ids: list[str] = []
    rows: list[np.ndarray] = []
    dim: int | None = None
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as handle:
        for number, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if number == 1:
                if not line.startswith("#dim="):
                    raise FormatError(f"unknown header {line!r}, expected '#dim=<d>'", line=1)
                try:
                    dim = int(line[len("#dim="):])
                except ValueError as exc:
                    raise FormatError(f"bad dimension in header {line!r}", line=1) from exc
                if dim < 1:
                    raise FormatError(f"dimension must be >= 1, got {dim}", line=1)
                continue
            if not line.strip() or line.startswith("#"):
                continue
            entry_id, sep, values_part = line.partition("\t")
            if not sep:
                raise FormatError("expected '<id><TAB><values>'", line=number)
            if entry_id in seen:
                raise DuplicateIdError(
                    f"duplicate embedding id {entry_id!r} (first seen on line {seen[entry_id]})",
                    line=number,
                )
            seen[entry_id] = number
            parts = values_part.split()
            if len(parts) != dim:
                raise FormatError(f"expected {dim} values, got {len(parts)}", line=number)
            try:
                row = np.array([float(p) for p in parts], dtype=np.float64)
            except ValueError as exc:
                raise FormatError(f"non-numeric embedding value: {exc}", line=number) from exc
            ids.append(entry_id)
            rows.append(row)
    matrix = np.vstack(rows) if rows else np.empty((0, dim), dtype=np.float64)
    return DenseIndex(dim=dim, ids=ids, matrix=matrix)


def save_embeddings(path, index: DenseIndex, comment: str | None = None) -> None:
    """Write the embeddings format with full-precision decimal floats."""
    lines = [f"#dim={index.dim}"]
    if comment:
        lines.append(f"# {comment}")
    for entry_id, row in zip(index.ids, index.matrix):
        lines.append(entry_id + "\t" + " ".join(format_float(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")
