"""Chained Hadamard multilinear forms and the construction pipeline.

A chained form has coefficients ``c(i_1, ..., i_m) = prod_k H_k[i_(k-1), i_k]``
for Hadamard factors ``H_2 .. H_m``.  Forms are stored implicitly (factors plus
a truncation box) and only materialised on request.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import hadamard as hd
from . import norms
from .errors import UnsupportedPatternError
from .norms import INF, NormCertificate, conjugate, recip


# --------------------------------------------------------------------------
# exponents


def parse_exponent(p) -> float:
    if isinstance(p, str):
        s = p.strip().lower()
        p = INF if s in ("inf", "infinity", "oo") else float(s)
    p = float(p)
    if math.isnan(p) or p < 1:
        raise ValueError(f"exponent must lie in [1, inf], got {p}")
    return p


@dataclass(frozen=True)
class FormSpec:
    dims: tuple
    exponents: tuple

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        exps = tuple(parse_exponent(p) for p in self.exponents)
        if not dims:
            raise ValueError("need at least one dimension")
        if any(n < 1 for n in dims):
            raise ValueError(f"dimensions must be positive, got {dims}")
        if len(exps) != len(dims):
            raise ValueError("dims and exponents must have the same length")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "exponents", exps)

    @property
    def m(self) -> int:
        return len(self.dims)

    @property
    def conjugates(self) -> tuple:
        return tuple(conjugate(p) for p in self.exponents)


# --------------------------------------------------------------------------
# chained forms


@dataclass(frozen=True, eq=False)
class ChainedForm:
    """Implicit +-1 tensor over the box ``dims`` (user axis order).

    Chain position ``k`` holds user axis ``axis_order[k]``; ``sources[k-1]`` is
    the factor linking positions ``k-1`` and ``k`` (a SignMatrix or a recipe,
    realised lazily).  ``t_orders`` are the lifted orders in chain order.
    """

    dims: tuple
    axis_order: tuple
    sources: tuple
    t_orders: tuple

    def __post_init__(self):
        m = len(self.dims)
        if sorted(self.axis_order) != list(range(m)):
            raise ValueError("axis_order must be a permutation of the axes")
        if len(self.sources) != m - 1:
            raise ValueError(f"an {m}-linear chain needs {m - 1} factors")
        cd = self.chain_dims
        for k, src in enumerate(self.sources, start=1):
            t = src.order
            if cd[k - 1] > t or cd[k] > t:
                raise ValueError(f"factor {k} of order {t} cannot index a {cd[k - 1]}x{cd[k]} block")
        if any(n < 1 for n in self.dims):
            raise ValueError("dimensions must be positive")

    @classmethod
    def from_factors(cls, factors: Sequence[hd.SignMatrix], dims, axis_order=None):
        dims = tuple(int(n) for n in dims)
        axis_order = tuple(axis_order) if axis_order is not None else tuple(range(len(dims)))
        for h in factors:
            if not (h.hadamard_certified or h.order == 1):
                raise hd.NotHadamardError("chain factors must be certified Hadamard matrices")
        first = dims[axis_order[0]]
        return cls(dims, axis_order, tuple(factors), (first,) + tuple(h.order for h in factors))

    @property
    def m(self) -> int:
        return len(self.dims)

    @property
    def chain_dims(self) -> tuple:
        return tuple(self.dims[a] for a in self.axis_order)

    @cached_property
    def factors(self) -> tuple:
        return tuple(s if isinstance(s, hd.SignMatrix) else hd.realize(s) for s in self.sources)

    @property
    def factor_orders(self) -> tuple:
        return tuple(s.order for s in self.sources)

    def coefficient_at(self, index) -> int:
        index = tuple(int(i) for i in index)
        if len(index) != self.m:
            raise ValueError(f"need {self.m} indices, got {len(index)}")
        for i, n in zip(index, self.dims):
            if not 0 <= i < n:
                raise IndexError(f"index {index} outside the box {self.dims}")
        c = [index[a] for a in self.axis_order]
        sign = 1
        for k, h in enumerate(self.factors, start=1):
            sign *= int(h.entries[c[k - 1], c[k]])
        return sign

    def materialize(self) -> np.ndarray:
        cd = self.chain_dims
        t = np.ones(cd[:1], dtype=np.int8)
        for k, h in enumerate(self.factors, start=1):
            block = h.entries[: cd[k - 1], : cd[k]]
            t = t[..., None] * block.reshape((1,) * (k - 1) + block.shape)
        inv = [0] * self.m
        for k, a in enumerate(self.axis_order):
            inv[a] = k
        out = np.ascontiguousarray(np.transpose(t, inv))
        out.setflags(write=False)
        return out

    def truncate(self, dims) -> "ChainedForm":
        dims = tuple(int(n) for n in dims)
        if len(dims) != self.m:
            raise ValueError("truncation must keep the arity")
        if any(not 1 <= n <= d for n, d in zip(dims, self.dims)):
            raise ValueError(f"cannot restrict box {self.dims} to {dims}")
        return ChainedForm(dims, self.axis_order, self.sources, self.t_orders)

    def chain_bound(self, exponents=None) -> float:
        """Orthogonality bound ||y_first||_2 ||y_last||_2 prod_k t_k^(1/2).

        Valid for every exponent pattern: interior balls sit inside l_inf and the
        endpoint l_2 norms are at most n^max(1/2 - 1/p, 0).
        """
        cd = self.chain_dims
        if exponents is None:
            exponents = (INF,) * self.m
        pe = [exponents[a] for a in self.axis_order]
        if self.m == 1:
            return cd[0] ** recip(conjugate(pe[0]))
        return (norms._gain(cd[0], pe[0]) * norms._gain(cd[-1], pe[-1])
                * math.prod(t ** 0.5 for t in self.factor_orders))

    def lifted_bound(self) -> float:
        """Bound of the untruncated chain on the lifted box ``t_orders``."""
        return norms.chained_hadamard_bound(self.t_orders)


def chained_form(dims, registry: Optional[hd.OrderRegistry] = None) -> ChainedForm:
    """Chain over the nearest registered orders, dims sorted internally."""
    dims = tuple(int(n) for n in dims)
    if not dims or any(n < 1 for n in dims):
        raise ValueError("dimensions must be positive")
    registry = registry or hd.registry_orders(hd.Mode.STRICT412)
    axis_order = tuple(sorted(range(len(dims)), key=lambda a: dims[a]))
    return _chain_in_order(dims, axis_order, registry)


def _chain_in_order(dims, axis_order, registry):
    picks = [hd.nearest_order(registry, dims[a]) for a in axis_order]
    sources = []
    for c in picks[1:]:
        if c.recipe is None:
            raise hd.RegistryExhaustedError(f"order {c.order} has no known construction")
        sources.append(c.recipe)
    return ChainedForm(dims, axis_order, tuple(sources), tuple(c.order for c in picks))


def truncate_embed(form, dims) -> ChainedForm:
    """Restrict a chain (or a bilinear Hadamard matrix) to a smaller box."""
    if isinstance(form, hd.SignMatrix):
        form = ChainedForm.from_factors([form], (form.order, form.order))
    return form.truncate(dims)


def coefficient_at(form: ChainedForm, index) -> int:
    return form.coefficient_at(index)


@dataclass(frozen=True)
class ScaledWitness:
    """Same coefficients, read on l_p domains with p >= 2, with a rescaled bound."""

    base: object
    dims: tuple
    exponents: tuple
    f_values: tuple
    factor: float
    bound: float

    @property
    def certificate(self) -> NormCertificate:
        return norms.upper(self.bound, "lp-rescaling", dims=list(self.dims),
                           exponents=list(self.exponents), f_values=list(self.f_values))


def lp_scale_witness(form, exponents, f_values) -> ScaledWitness:
    dims = tuple(form.dims) if hasattr(form, "dims") else tuple(norms.coefficient_tensor(form).shape)
    exponents = tuple(parse_exponent(p) for p in exponents)
    f_values = tuple(float(f) for f in f_values)
    if len(exponents) != len(dims) or len(f_values) != len(dims):
        raise ValueError("need one exponent and one f-value per argument")
    bound = norms.lp_scaling_bound(dims, exponents, f_values)
    factor = math.prod(norms._gain(n, p) for n, p in zip(dims, exponents))
    return ScaledWitness(form, dims, exponents, f_values, factor, bound)


# --------------------------------------------------------------------------
# the construction pipeline


@dataclass
class BoundReport:
    route: str
    dims: tuple
    exponents: tuple
    axis_order: tuple
    t_orders: tuple
    deltas: tuple
    delta_realized: float
    certificate: float
    target_rhs: float
    ratio: float
    ceiling_exponent: float
    relaxed_n: int
    extra_uppers: dict = field(default_factory=dict)

    @property
    def ratio_ceiling(self) -> float:
        return (1.0 + self.delta_realized) ** self.ceiling_exponent

    def to_dict(self) -> dict:
        return {
            "route": self.route,
            "dims": list(self.dims),
            "exponents": [norms._plain(p) for p in self.exponents],
            "axis_order": list(self.axis_order),
            "t_orders": list(self.t_orders),
            "deltas": list(self.deltas),
            "delta_realized": self.delta_realized,
            "certificate": self.certificate,
            "rhs": self.target_rhs,
            "ratio": self.ratio,
            "ratio_ceiling": self.ratio_ceiling,
            "relaxed_n": self.relaxed_n,
            "extra_uppers": dict(self.extra_uppers),
        }

    def to_text(self) -> str:
        lines = []
        for k, v in self.to_dict().items():
            if isinstance(v, dict):
                for kk, vv in v.items():
                    lines.append(f"{k}.{kk}: {norms._fmt(vv)}")
            elif isinstance(v, list):
                lines.append(f"{k}: " + ",".join(str(x) for x in v))
            else:
                lines.append(f"{k}: {norms._fmt(v) if not isinstance(v, str) else v}")
        return "\n".join(lines)


def _relaxed_n(dims):
    if len(dims) < 2:
        return dims[0]
    return max(min(n for j, n in enumerate(dims) if j != i) for i in range(len(dims)))


def _report(route, spec, form, used_axes, cert, rhs, ceiling_exp, extra=None):
    chain_t = dict(zip(form.axis_order, form.t_orders))
    deltas = tuple(chain_t[a] / spec.dims[a] - 1.0 for a in range(spec.m))
    delta = max((deltas[a] for a in used_axes), default=0.0)
    return BoundReport(
        route=route, dims=spec.dims, exponents=spec.exponents, axis_order=form.axis_order,
        t_orders=form.t_orders, deltas=deltas, delta_realized=delta, certificate=cert,
        target_rhs=rhs, ratio=cert / rhs, ceiling_exponent=ceiling_exp,
        relaxed_n=_relaxed_n(spec.dims), extra_uppers=dict(extra or {}),
    )


def construct_ksz(dims, exponents=None, registry: Optional[hd.OrderRegistry] = None):
    """Build a +-1 form over ``dims`` with an upper norm certificate.

    Returns ``(form, certificate, report)``.  Covered exponent patterns: all
    infinite; bilinear with both exponents >= 2; bilinear below 2 through
    interpolation (only where the smaller domain carries the smaller exponent);
    and m >= 3 with finite outer exponents >= 2, interior ones infinite, the
    first axis smallest and the last largest.
    """
    if exponents is None:
        exponents = (INF,) * len(dims)
    spec = FormSpec(tuple(dims), tuple(exponents))
    registry = registry or hd.registry_orders(hd.Mode.STRICT412)
    m, n, p = spec.m, spec.dims, spec.exponents

    if m == 1:
        form = chained_form(n, registry)
        val = n[0] ** recip(conjugate(p[0]))
        cert = norms.upper(val, "linear-functional", n=n[0], p=p[0])
        return form, cert, _report("linear", spec, form, (), val, norms.rhs_ksz_mixed(n, p), 0.0)

    if all(math.isinf(x) for x in p):
        form = chained_form(n, registry)
        cert_val = form.lifted_bound()
        cert = norms.upper(cert_val, "chained-hadamard-lift", t_orders=list(form.t_orders))
        rhs = norms.rhs_ksz_mixed(form.chain_dims, (INF,) * m)
        extra = {"chain_bound": form.chain_bound()}
        rep = _report("linf-chain", spec, form, range(m), cert_val, rhs, (m + 1) / 2, extra)
        return form, cert, rep

    if m == 2:
        return _bilinear(spec, registry)

    inner = p[1:-1]
    if all(math.isinf(x) for x in inner) and p[0] >= 2 and p[-1] >= 2:
        if n[0] != min(n) or n[-1] != max(n):
            raise UnsupportedPatternError(
                "outer-exponent route needs the first dimension smallest and the last largest; "
                "reorder the axes or use all-infinite exponents (route linf-chain)"
            )
        interior = sorted(range(1, m - 1), key=lambda a: n[a])
        form = _chain_in_order(n, (0, *interior, m - 1), registry)
        t = form.t_orders
        cert_val = (norms._gain(t[0], p[0]) * norms._gain(t[-1], p[-1])
                    * math.prod(x ** 0.5 for x in t[1:]))
        cert = norms.upper(cert_val, "chained-hadamard-outer", t_orders=list(t),
                           exponents=[p[0], p[-1]])
        rhs = n[-1] ** 0.5 * math.prod(norms._gain(a, b) for a, b in zip(n, p))
        extra = {"chain_bound": form.chain_bound(p)}
        return form, cert, _report("outer-exponents", spec, form, range(m), cert_val, rhs, (m + 1) / 2, extra)

    raise UnsupportedPatternError(
        f"no construction for exponents {tuple(norms._plain(x) for x in p)} with m={m}; "
        "nearest supported: all infinite (route linf-chain) or outer exponents >= 2 with "
        "infinite interior (route outer-exponents)"
    )


def _bilinear(spec, registry):
    (n1, n2), (p1, p2) = spec.dims, spec.exponents
    form = chained_form(spec.dims, registry)
    big = max(range(2), key=lambda a: (spec.dims[a], a))
    t = form.factor_orders[0]
    l2 = t ** 0.5
    rhs = norms.rhs_bennett(n1, n2, p1, p2)
    extra = {"chain_bound": form.chain_bound(spec.exponents), "l2_bound": l2}

    if p1 >= 2 and p2 >= 2:
        f_values = [hd.nearest_order(registry, k).order ** 0.5 for k in spec.dims]
        sw = lp_scale_witness(form, spec.exponents, f_values)
        return form, sw.certificate, _report("bilinear-rescaled", spec, form, (big,), sw.bound, rhs, 0.5, extra)

    if p1 == p2:
        val = norms.riesz_thorin(1.0, l2, p1)
        cert = norms.upper(val, "riesz-thorin", m0=1.0, m1=l2, p=p1)
        return form, cert, _report("bilinear-interpolated", spec, form, (big,), val, rhs, 1 - 1 / p1, extra)

    if p1 < 2 <= p2 or p2 < 2 <= p1:
        small, large_p = (0, p2) if p1 < 2 else (1, p1)
        if spec.dims[small] <= spec.dims[1 - small]:
            val = l2 * norms._gain(spec.dims[1 - small], large_p)
            cert = norms.upper(val, "l2-domain-inclusion", l2_bound=l2, n=spec.dims[1 - small], p=large_p)
            return form, cert, _report("bilinear-mixed", spec, form, (big,), val, rhs, 0.5, extra)
    else:
        lo, hi = (0, 1) if p1 <= p2 else (1, 0)
        if spec.dims[lo] <= spec.dims[hi]:
            q = spec.exponents[hi]
            val = norms.riesz_thorin(1.0, l2, q)
            cert = norms.upper(val, "riesz-thorin-inclusion", m0=1.0, m1=l2, p=q)
            return form, cert, _report("bilinear-small-p", spec, form, (big,), val, rhs, 1 - 1 / q, extra)

    raise UnsupportedPatternError(
        f"bilinear exponents ({norms._fmt(p1)}, {norms._fmt(p2)}) with dims ({n1}, {n2}) are an open case: "
        "the axis with the smaller exponent below 2 must not be the longer one; "
        "nearest supported: equal exponents (route bilinear-interpolated)"
    )


# --------------------------------------------------------------------------
# .pmt tensor format


def format_pmt(tensor) -> str:
    a = np.asarray(norms.coefficient_tensor(tensor))
    header = " ".join(str(x) for x in (a.ndim, *a.shape))
    body = "".join("+" if v > 0 else "-" for v in a.ravel())
    width = a.shape[-1] if a.ndim else 1
    rows = [body[i:i + width] for i in range(0, len(body), width)]
    return header + "\n" + "\n".join(rows) + "\n"


def parse_pmt(text: str) -> np.ndarray:
    head, _, body = text.lstrip().partition("\n")
    try:
        nums = [int(x) for x in head.split()]
    except ValueError:
        raise ValueError(f"bad .pmt header {head!r}") from None
    if not nums or nums[0] < 1 or len(nums) != nums[0] + 1:
        raise ValueError(f".pmt header must read 'm n_1 ... n_m', got {head!r}")
    shape = tuple(nums[1:])
    if any(n < 1 for n in shape):
        raise ValueError("dimensions must be positive")
    chars = "".join(body.split())
    if len(chars) != math.prod(shape):
        raise ValueError(f".pmt body has {len(chars)} signs, expected {math.prod(shape)}")
    if set(chars) - {"+", "-"}:
        raise ValueError(".pmt body may contain only '+' and '-'")
    flat = np.where(np.frombuffer(chars.encode(), dtype=np.uint8) == ord("+"), 1, -1).astype(np.int8)
    return flat.reshape(shape)


def write_pmt(path, tensor):
    Path(path).write_text(format_pmt(tensor))


def read_pmt(path) -> np.ndarray:
    return parse_pmt(Path(path).read_text())
