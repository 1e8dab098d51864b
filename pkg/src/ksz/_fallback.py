"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

The enumeration here is block-vectorised over codes in increasing order rather
than Gray-ordered, so it doubles as an independent check of the compiled path.
"""
import numpy as np

_BLOCK = 4096


def rows_orthogonal(rows, order):
    rows = np.asarray(rows, dtype=np.uint64)
    for i in range(rows.shape[0] - 1):
        pops = np.bitwise_count(rows[i + 1:] ^ rows[i]).sum(axis=1, dtype=np.int64)
        if np.any(2 * pops != order):
            return False
    return True


def sign_table(codes, nbits):
    """Rows of +-1 signs for each code; position p reads bit ``nbits-1-p``."""
    shifts = np.arange(nbits - 1, -1, -1, dtype=np.uint64)
    bits = (np.asarray(codes, dtype=np.uint64)[:, None] >> shifts[None, :]) & np.uint64(1)
    return 1 - 2 * bits.astype(np.int64)


def outer_signs(signs, axis_dims):
    """Row-major tensor product of the per-axis sign blocks, one row per code."""
    k = signs.shape[0]
    out = np.ones((k, 1), dtype=np.int64)
    off = 0
    for n in axis_dims:
        out = (out[:, :, None] * signs[:, None, off:off + n]).reshape(k, -1)
        off += n
    return out


def scan_codes(a, axis_dims, nbits, low_bits, base_code):
    a64 = np.asarray(a, dtype=np.int64)
    total = 1 << low_bits
    best, best_code = -1, base_code
    for start in range(0, total, _BLOCK):
        stop = min(total, start + _BLOCK)
        codes = np.uint64(base_code) + np.arange(start, stop, dtype=np.uint64)
        v = outer_signs(sign_table(codes, nbits), axis_dims)
        obj = np.abs(v @ a64).sum(axis=1)
        i = int(np.argmax(obj))
        if obj[i] > best:
            best, best_code = int(obj[i]), int(codes[i])
    return best, best_code
