"""Backend selection and the enumeration driver shared by ``norms`` and ``berlekamp``.

The compiled extension is used when it imports and ``KSZ_PURE_PYTHON`` is unset.
``KSZ_THREADS`` is a worker-count hint; it changes wall time, never results.
"""
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _fallback

try:
    if os.environ.get("KSZ_PURE_PYTHON"):
        raise ImportError("pure python forced")
    from . import _kernels
except ImportError:
    _kernels = None

BACKEND = "cython" if _kernels is not None else "python"


def available_backends():
    return ["cython", "python"] if _kernels is not None else ["python"]


def _resolve(backend):
    backend = backend or BACKEND
    if backend == "cython" and _kernels is None:
        raise RuntimeError("compiled kernels are not built")
    if backend not in ("cython", "python"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend


def default_workers():
    try:
        return max(1, int(os.environ.get("KSZ_THREADS", "1")))
    except ValueError:
        return 1


def rows_orthogonal(packed, order, backend=None):
    packed = np.ascontiguousarray(packed, dtype=np.uint64)
    if _resolve(backend) == "cython":
        return bool(_kernels.rows_orthogonal(packed, order))
    return _fallback.rows_orthogonal(packed, order)


def _position_table(axis_dims):
    """Flat row indices touched by flipping each concatenated sign position."""
    ptr = [0]
    idx = []
    grid = np.arange(int(np.prod(axis_dims, dtype=np.int64))).reshape(axis_dims)
    for k, n in enumerate(axis_dims):
        for i in range(n):
            rows = np.take(grid, i, axis=k).ravel()
            idx.append(rows)
            ptr.append(ptr[-1] + rows.size)
    return np.asarray(ptr, dtype=np.int64), np.concatenate(idx).astype(np.int64)


def _cython_chunk(a, axis_dims, table, nbits, low_bits, base_code):
    signs = _fallback.sign_table([base_code], nbits)
    v = _fallback.outer_signs(signs, axis_dims)[0]
    s = (v @ a.astype(np.int64)).astype(np.int64)
    v8 = np.ascontiguousarray(v, dtype=np.int8)
    return _kernels.gray_chunk(a, table[0], table[1], v8, np.ascontiguousarray(s),
                               nbits, low_bits, np.uint64(base_code))


def enumeration_count(axis_dims):
    nbits = int(sum(axis_dims))
    return 1 if nbits == 0 else 1 << (nbits - 1)


def max_abs_partial(a, axis_dims, workers=None, backend=None):
    """Maximise ``sum_j |sum_r v_r a[r, j]|`` over sign products ``v``.

    ``a`` has one row per flat index of the enumerated axes (shape ``axis_dims``)
    and one column per coordinate of the eliminated last axis.  The first sign of
    the first axis is pinned to +1, halving the search.  Returns ``(value, code)``
    where bit ``B-1-p`` of ``code`` set means position ``p`` is -1.
    """
    a = np.ascontiguousarray(a, dtype=np.int8)
    axis_dims = tuple(int(n) for n in axis_dims)
    nbits = sum(axis_dims)
    if nbits == 0:
        return int(np.abs(a.astype(np.int64)).sum()), 0
    if nbits > 63:
        raise OverflowError("more than 63 enumerated signs")
    backend = _resolve(backend)
    free = nbits - 1
    workers = workers or default_workers()
    split = 0
    if workers > 1 and free > 8:
        split = min(free - 4, max(1, (workers - 1).bit_length() + 2))
    low = free - split
    bases = [prefix << low for prefix in range(1 << split)]

    if backend == "cython":
        table = _position_table(axis_dims)

        def run(base):
            return _cython_chunk(a, axis_dims, table, nbits, low, base)
    else:

        def run(base):
            return _fallback.scan_codes(a, axis_dims, nbits, low, base)

    if workers > 1 and len(bases) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, bases))
    else:
        results = [run(b) for b in bases]
    value, code = max(results, key=lambda vc: (vc[0], -vc[1]))
    return int(value), int(code)


def decode(code, axis_dims):
    """Per-axis sign vectors for an enumeration code."""
    nbits = sum(axis_dims)
    signs = _fallback.sign_table([code], nbits)[0].astype(np.int8) if nbits else np.zeros(0, np.int8)
    out = []
    off = 0
    for n in axis_dims:
        out.append(signs[off:off + n].copy())
        off += n
    return out
