"""Hot numeric kernels: BM25 score accumulation and dense inner-product scans.

Both kernels ship in two equivalent implementations: a numba ``@njit``
version (default) and a pure-numpy fallback. Selection:

    HOPCHAIN_BACKEND=numba   use the JIT kernels (default when numba imports)
    HOPCHAIN_BACKEND=numpy   force the numpy fallback

The two paths accumulate in the same term/element order, so results agree
to the last ulp for BM25 and within ~1e-12 relative for the dot products
(BLAS may reorder the reduction). ``benchmarks/bench_kernels.py`` compares
their throughput.
"""

import os

import numpy as np

_BACKEND_ENV = "HOPCHAIN_BACKEND"


def bm25_accumulate_numpy(ordinals, tfs, offsets, idfs, doc_lengths, avgdl, k1, b, doc_count):
    """Sum Okapi BM25 contributions per document over the query's postings.

    ordinals/tfs hold the postings of each query term, concatenated;
    offsets[t]..offsets[t+1] delimits term t's slice. Returns a dense
    float64 score vector over all doc_count documents.
    """
    scores = np.zeros(doc_count, dtype=np.float64)
    for t in range(len(idfs)):
        lo, hi = offsets[t], offsets[t + 1]
        ords = ordinals[lo:hi]
        tf = tfs[lo:hi]
        denom = tf + k1 * (1.0 - b + b * doc_lengths[ords] / avgdl)
        scores[ords] += idfs[t] * (tf * (k1 + 1.0)) / denom
    return scores


def mips_scores_numpy(matrix, query):
    """Inner product of every row of matrix with query."""
    return matrix @ query


try:
    from numba import njit

    @njit(cache=True, nogil=True)
    def bm25_accumulate_numba(ordinals, tfs, offsets, idfs, doc_lengths, avgdl, k1, b, doc_count):
        scores = np.zeros(doc_count, dtype=np.float64)
        for t in range(len(idfs)):
            for p in range(offsets[t], offsets[t + 1]):
                o = ordinals[p]
                tf = tfs[p]
                denom = tf + k1 * (1.0 - b + b * doc_lengths[o] / avgdl)
                scores[o] += idfs[t] * (tf * (k1 + 1.0)) / denom
        return scores

    @njit(cache=True, nogil=True)
    def mips_scores_numba(matrix, query):
        n, dim = matrix.shape
        scores = np.empty(n, dtype=np.float64)
        for i in range(n):
            acc = 0.0
            for j in range(dim):
                acc += matrix[i, j] * query[j]
            scores[i] = acc
        return scores

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAS_NUMBA = False
    bm25_accumulate_numba = None
    mips_scores_numba = None


def active_backend() -> str:
    """Resolve the backend name from the environment (checked per call)."""
    choice = os.environ.get(_BACKEND_ENV, "numba").strip().lower()
    if choice not in ("numba", "numpy"):
        raise ValueError(f"{_BACKEND_ENV} must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numba" and not HAS_NUMBA:
        return "numpy"
    return choice


def bm25_accumulate(ordinals, tfs, offsets, idfs, doc_lengths, avgdl, k1, b, doc_count):
    if active_backend() == "numba":
        return bm25_accumulate_numba(ordinals, tfs, offsets, idfs, doc_lengths, avgdl, k1, b, doc_count)
    return bm25_accumulate_numpy(ordinals, tfs, offsets, idfs, doc_lengths, avgdl, k1, b, doc_count)


def mips_scores(matrix, query):
    if active_backend() == "numba":
        return mips_scores_numba(matrix, query)
    return mips_scores_numpy(matrix, query)


def warmup() -> None:
    """Trigger JIT compilation so timed sections never pay compile cost."""
    if not HAS_NUMBA:
        return
    ords = np.array([0, 1], dtype=np.int64)
    tfs = np.array([1.0, 2.0])
    offsets = np.array([0, 2], dtype=np.int64)
    idfs = np.array([0.5])
    lengths = np.array([2.0, 3.0])
    bm25_accumulate_numba(ords, tfs, offsets, idfs, lengths, 2.5, 1.2, 0.75, 2)
    mips_scores_numba(np.ones((2, 3)), np.ones(3))
