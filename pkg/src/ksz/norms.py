"""Norm certificates for +-1 multilinear forms.

On real l_inf balls the supremum of |A| is attained at sign vectors, and the
supremum over the last argument is sum_j |partial sum_j|, so the exact norm
needs only the other m-1 sign vectors.  Everything else here is a closed-form
bound evaluated in floating point, with infinite exponents handled symbolically.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from . import _engine
from .errors import BudgetExceededError, ConvergenceError, InvariantError
from .special import EULER_GAMMA, digamma, log_gamma

INF = math.inf
DEFAULT_BUDGET = 1 << 25


class CertKind(str, enum.Enum):
    EXACT = "ExactReal"
    UPPER = "Upper"
    LOWER = "Lower"


@dataclass(frozen=True)
class NormCertificate:
    kind: CertKind
    value: float
    method: str
    witness: tuple = ()
    formula: Optional[str] = None
    inputs: dict = field(default_factory=dict)

    def restricted(self) -> "NormCertificate":
        """Certificate inherited by a truncation: restriction cannot raise the norm."""
        if self.kind is CertKind.LOWER:
            raise ValueError("a lower bound does not survive restriction")
        return NormCertificate(CertKind.UPPER, self.value, self.method, (),
                               self.formula or "restriction", dict(self.inputs, restricted_from=self.kind.value))

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind.value, "value": _plain(self.value), "method": self.method}
        if self.kind is CertKind.UPPER:
            out["formula"] = self.formula
            out["inputs"] = {k: _plain(v) for k, v in self.inputs.items()}
        else:
            out["witness"] = [sign_string(w) if isinstance(w, np.ndarray) else _plain(w) for w in self.witness]
        return out

    def to_text(self) -> str:
        d = self.to_dict()
        lines = [f"kind: {d['kind']}", f"value: {_fmt(self.value)}", f"method: {d['method']}"]
        if "formula" in d:
            lines.append(f"formula: {d['formula']}")
            for k, v in d["inputs"].items():
                lines.append(f"input.{k}: {v}")
        else:
            for k, w in enumerate(d["witness"]):
                lines.append(f"witness.{k}: {w}")
        return "\n".join(lines)


def _plain(v):
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "inf" if math.isinf(v) else v
    return v


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf"
    return repr(x)


def sign_string(v) -> str:
    return "".join("+" if s > 0 else "-" for s in np.asarray(v).ravel())


def upper(value, formula, **inputs) -> NormCertificate:
    return NormCertificate(CertKind.UPPER, float(value), "formula", (), formula, inputs)


# --------------------------------------------------------------------------
# tensors and evaluation


def coefficient_tensor(form) -> np.ndarray:
    """Dense int8 coefficient tensor of a form-like object."""
    if hasattr(form, "materialize"):
        return form.materialize()
    if hasattr(form, "lights"):
        return np.asarray(form.lights, dtype=np.int8)
    if hasattr(form, "entries"):
        return np.asarray(form.entries, dtype=np.int8)
    return np.asarray(form)


def evaluate(a, vectors) -> int:
    """A(x1, ..., xm) in exact integer arithmetic for sign (or integer) vectors."""
    r = np.asarray(a, dtype=np.int64)
    for v in vectors:
        r = np.tensordot(np.asarray(v, dtype=np.int64), r, axes=([0], [0]))
    return int(r)


def partial_vector(a, vectors, k) -> np.ndarray:
    """Contract every axis except ``k`` against its vector."""
    r = np.asarray(a, dtype=np.int64)
    for j in reversed(range(r.ndim)):
        if j != k:
            r = np.tensordot(r, np.asarray(vectors[j], dtype=np.int64), axes=([j], [0]))
    return r


def _signs(x):
    return np.where(np.asarray(x) >= 0, 1, -1).astype(np.int8)


def max_abs_form(a, budget=DEFAULT_BUDGET, workers=None, backend=None):
    """Exact ``max |A(x)|`` over sign vectors; returns ``(value, witness)``.

    The largest axis is eliminated analytically.  Ties go to the
    lexicographically smallest sign sequence of the enumerated axes (+ before -),
    taken in their original order.
    """
    a = np.asarray(a, dtype=np.int8)
    m = a.ndim
    if m == 0:
        raise ValueError("need at least one axis")
    last = m - 1 - int(np.argmax(a.shape[::-1]))
    order = [k for k in range(m) if k != last] + [last]
    t = np.ascontiguousarray(np.transpose(a, order))
    axis_dims = t.shape[:-1]
    count = _engine.enumeration_count(axis_dims)
    if count > budget:
        raise BudgetExceededError(
            f"exact evaluation needs {count} sign patterns, budget is {budget}; "
            "use the heuristic for a lower bound"
        )
    value, code = _engine.max_abs_partial(t.reshape(-1, t.shape[-1]), axis_dims, workers, backend)
    vecs = _engine.decode(code, axis_dims)
    last_vec = _signs(partial_vector(t, vecs + [None], m - 1))
    witness: list = [None] * m
    for k, ax in enumerate(order[:-1]):
        witness[ax] = vecs[k]
    witness[last] = last_vec
    if abs(evaluate(a, witness)) != value:
        raise InvariantError("exact witness does not replay to the reported value")
    return value, tuple(witness)


def linf_exact(form, budget=DEFAULT_BUDGET, workers=None, backend=None) -> NormCertificate:
    value, witness = max_abs_form(coefficient_tensor(form), budget, workers, backend)
    return NormCertificate(CertKind.EXACT, value, "enumeration", witness)


def ascend(a, xs):
    """Alternating sign ascent from ``xs`` (modified in place); returns the value."""
    cur = evaluate(a, xs)
    if cur < 0:
        xs[0] = -xs[0]
        cur = -cur
    improved = True
    while improved:
        improved = False
        for k in range(a.ndim):
            g = partial_vector(a, xs, k)
            val = int(np.abs(g).sum())
            if val > cur:
                xs[k] = _signs(g)
                cur = val
                improved = True
    return cur


def best_ascent(a, restarts=64, seed=0):
    a = np.asarray(a, dtype=np.int64)
    rng = np.random.default_rng(seed)
    best_val, best_xs = -1, None
    for _ in range(max(1, restarts)):
        xs = [rng.choice(np.array([-1, 1], dtype=np.int8), size=n) for n in a.shape]
        val = ascend(a, xs)
        if val > best_val:
            best_val, best_xs = val, [x.copy() for x in xs]
    if abs(evaluate(a, best_xs)) != best_val:
        raise InvariantError("heuristic witness does not replay")
    return best_val, tuple(best_xs)


def linf_heuristic(form, restarts=64, seed=0) -> NormCertificate:
    value, witness = best_ascent(coefficient_tensor(form), restarts, seed)
    return NormCertificate(CertKind.LOWER, value, "heuristic", witness)


def l2_spectral(matrix, tol=1e-12, max_iters=10000) -> NormCertificate:
    """Largest singular value by power iteration on A^T A.

    The reported value is the converged estimate inflated by ``tol`` so it
    upper-bounds sigma_max whenever the iteration has converged to it.
    """
    a = np.asarray(coefficient_tensor(matrix), dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("spectral norm needs a matrix")
    if tol <= 0:
        raise ValueError("tol must be positive")
    p, q = a.shape
    floor = float(np.linalg.norm(a)) / math.sqrt(min(p, q))

    def run(v):
        v = v / np.linalg.norm(v)
        lam_prev = -1.0
        for it in range(1, max_iters + 1):
            w = a.T @ (a @ v)
            lam = float(v @ w)
            nw = float(np.linalg.norm(w))
            if nw == 0.0:
                return 0.0, v, it
            if abs(lam - lam_prev) <= tol * lam:
                return lam, v, it
            v, lam_prev = w / nw, lam
        raise ConvergenceError(f"power iteration did not converge in {max_iters} steps", v)

    lam, v, iters = run(np.ones(q))
    if math.sqrt(max(lam, 0.0)) < floor * (1 - 1e-9) and q > 1:
        start = np.zeros(q)
        start[0], start[1] = 1.0, 2.0
        lam, v, more = run(start)
        iters += more
    sigma = math.sqrt(max(lam, 0.0))
    if sigma < floor * (1 - 1e-9):
        raise ConvergenceError("power iteration stalled below the Frobenius floor", v)
    return NormCertificate(CertKind.UPPER, sigma * (1 + tol), "spectral", (), "power-iteration",
                           {"estimate": sigma, "tol": tol, "iterations": iters})


# --------------------------------------------------------------------------
# exponent arithmetic


def recip(p) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


def conjugate(p) -> float:
    """p* with 1* = inf and inf* = 1."""
    if p < 1:
        raise ValueError(f"exponent must be >= 1, got {p}")
    if p == 1:
        return INF
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _pnorm(x, r) -> float:
    x = np.abs(np.asarray(x, dtype=np.float64))
    if math.isinf(r):
        return float(x.max())
    if r == 1:
        return float(x.sum())
    return float((x ** r).sum() ** (1.0 / r))


def basis_lower_bound(form, exponents) -> NormCertificate:
    """Best of the functionals ``x -> A(e_i, x)`` and ``y -> A(y, e_j)``.

    For a square +-1 matrix this is ``n ** (1 / p*)`` with ``p = max(p1, p2)``.
    """
    a = coefficient_tensor(form)
    if a.ndim != 2:
        raise ValueError("basis lower bound is implemented for bilinear forms")
    p1, p2 = exponents
    r2, r1 = conjugate(p2), conjugate(p1)
    rows = [_pnorm(a[i], r2) for i in range(a.shape[0])]
    cols = [_pnorm(a[:, j], r1) for j in range(a.shape[1])]
    i, j = int(np.argmax(rows)), int(np.argmax(cols))
    if rows[i] >= cols[j]:
        return NormCertificate(CertKind.LOWER, rows[i], "basis", (("row", i),))
    return NormCertificate(CertKind.LOWER, cols[j], "basis", (("col", j),))


# --------------------------------------------------------------------------
# closed-form right-hand sides (dimension factors, constants excluded)


def _spread_exponent(exponents) -> float:
    d = min(max(2.0, conjugate(p)) for p in exponents)
    return recip(d)


def _gain(n, p) -> float:
    e = max(0.5 - recip(p), 0.0)
    return 1.0 if e == 0.0 else n ** e


def rhs_ksz_mixed(dims: Sequence[int], exponents: Sequence[float]) -> float:
    """max_k n_k^(1/min_k max(2, p_k*)) * prod_k n_k^max(1/2 - 1/p_k, 0)."""
    if len(dims) != len(exponents):
        raise ValueError("dims and exponents differ in length")
    e = _spread_exponent(exponents)
    head = 1.0 if e == 0.0 else max(dims) ** e
    return head * math.prod(_gain(n, p) for n, p in zip(dims, exponents))


def rhs_ksz_equal(m: int, n: int, exponents: Sequence[float]) -> float:
    """Equal-dimension form: n^(1/min max(2, p_k*) + sum max(1/2 - 1/p_k, 0))."""
    if len(exponents) != m:
        raise ValueError("need one exponent per argument")
    e = _spread_exponent(exponents) + sum(max(0.5 - recip(p), 0.0) for p in exponents)
    return float(n) ** e


def rhs_ksz_sum(dims: Sequence[int], exponents: Sequence[float]) -> float:
    """(sum_k n_k)^(1/min max(2, p_k*)) * prod_k n_k^max(1/2 - 1/p_k, 0)."""
    e = _spread_exponent(exponents)
    head = 1.0 if e == 0.0 else float(sum(dims)) ** e
    return head * math.prod(_gain(n, p) for n, p in zip(dims, exponents))


def rhs_bennett(n1, n2, p1, p2) -> float:
    a = n2 ** recip(conjugate(p2)) * _gain(n1, p1)
    b = n1 ** recip(conjugate(p1)) * _gain(n2, p2)
    return max(a, b)


def riesz_thorin(m0, m1, p) -> float:
    """Interpolate between an l_1 bound ``m0`` and an l_2 bound ``m1`` at ``p``."""
    if not 1 <= p <= 2:
        raise ValueError(f"interpolation exponent must lie in [1, 2], got {p}")
    if m0 <= 0 or m1 <= 0:
        raise ValueError("endpoint bounds must be positive")
    theta = 2.0 * (1.0 - 1.0 / p)
    return m0 ** (1.0 - theta) * m1 ** theta


def chained_hadamard_bound(dims: Sequence[int]) -> float:
    """n_m^(1/2) prod_j n_j^(1/2) for ascending dims carrying Hadamard factors."""
    dims = list(dims)
    if dims != sorted(dims):
        raise ValueError("dims must be sorted ascending")
    return dims[-1] ** 0.5 * math.prod(n ** 0.5 for n in dims)


def lp_scaling_bound(dims, exponents, f_values) -> float:
    """max_k f(n_k) * prod_k n_k^(1/2 - 1/p_k) for exponents in [2, inf]."""
    for p in exponents:
        if p < 2:
            raise ValueError(f"rescaling from l_2 needs every exponent >= 2, got {p}")
    return max(f_values) * math.prod(_gain(n, p) for n, p in zip(dims, exponents))


# --------------------------------------------------------------------------
# constants


def classical_constant(m: int) -> float:
    return math.sqrt(32 * m * math.log(6 * m)) * math.sqrt(math.factorial(m))


def improved_complex_constant(m: int) -> float:
    return 2 ** (m + 1) * math.sqrt((2 * m + 1) * math.log(1 + 4 * m))


def improved_real_constant(m: int) -> float:
    return 2 * math.sqrt((2 * m + 1) * math.log(1 + 4 * m))


def lower_asymptotic_constant(m: int) -> float:
    """Asymptotic lower bound for min-over-configurations imbalance / n^((m+1)/2)."""
    log_val = -0.5 * (digamma(m) + EULER_GAMMA) * math.log(2.0)
    lg32 = log_gamma(1.5)
    for k in range(2, m + 1):
        log_val += k / (2 * k - 2) * (log_gamma((3 * k - 2) / (2 * k)) - lg32)
    return math.exp(log_val)


@dataclass(frozen=True)
class ConstantsRow:
    m: int
    classical: float
    improved_complex: float
    improved_real: float
    lower_asymptotic: float


def constants_table(m_max: int) -> list[ConstantsRow]:
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    return [
        ConstantsRow(m, classical_constant(m), improved_complex_constant(m),
                     improved_real_constant(m), lower_asymptotic_constant(m))
        for m in range(1, m_max + 1)
    ]
