"""Hadamard matrices: constructions, exact verification and the order registry.

Matrices are stored bit-packed by row (+1 is bit 1) so that the inner product
of two rows of order ``t`` is ``t - 2 * popcount(row_i ^ row_j)``.
"""
from __future__ import annotations

import bisect
import enum
import heapq
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import _engine
from .errors import NotHadamardError, RegistryExhaustedError


# --------------------------------------------------------------------------
# construction recipes


@dataclass(frozen=True)
class Base1:
    @property
    def order(self):
        return 1

    def __str__(self):
        return "1"


@dataclass(frozen=True)
class Base2:
    @property
    def order(self):
        return 2

    def __str__(self):
        return "2"


@dataclass(frozen=True)
class PaleyI:
    q: int

    @property
    def order(self):
        return self.q + 1

    def __str__(self):
        return f"P({self.q})"


@dataclass(frozen=True)
class SylvesterDouble:
    child: "Recipe"

    @property
    def order(self):
        return 2 * self.child.order

    def __str__(self):
        return f"S({self.child})"


@dataclass(frozen=True)
class Kronecker:
    left: "Recipe"
    right: "Recipe"

    @property
    def order(self):
        return self.left.order * self.right.order

    def __str__(self):
        return f"K({self.left},{self.right})"


Recipe = Union[Base1, Base2, PaleyI, SylvesterDouble, Kronecker]


# --------------------------------------------------------------------------
# the matrix type


def _pack_rows(entries):
    bits = np.packbits(entries > 0, axis=1, bitorder="little")
    pad = (-bits.shape[1]) % 8
    if pad:
        bits = np.pad(bits, ((0, 0), (0, pad)))
    return np.ascontiguousarray(bits).view(np.uint64)


@dataclass(frozen=True, eq=False)
class SignMatrix:
    """Square +-1 matrix with an optional Hadamard certificate.

    ``entries`` is a read-only int8 array; ``packed`` holds the same rows as
    64-bit words.  ``hadamard_certified`` is only ever set by a construction
    that guarantees H H^T = t I or by :func:`verify_hadamard`.
    """

    entries: np.ndarray
    recipe: Optional[Recipe] = None
    hadamard_certified: bool = False
    packed: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        e = np.array(self.entries, dtype=np.int8, copy=True)
        if e.ndim != 2 or e.shape[0] != e.shape[1] or e.shape[0] == 0:
            raise ValueError(f"sign matrix must be square and non-empty, got shape {e.shape}")
        if not np.all((e == 1) | (e == -1)):
            raise ValueError("entries must be exactly -1 or +1")
        e.setflags(write=False)
        packed = _pack_rows(e)
        packed.setflags(write=False)
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "packed", packed)

    @classmethod
    def _trusted(cls, entries, recipe=None, certified=False):
        # entries derived from validated sign matrices; skip the copy and checks
        self = object.__new__(cls)
        e = np.ascontiguousarray(entries, dtype=np.int8)
        e.setflags(write=False)
        packed = _pack_rows(e)
        packed.setflags(write=False)
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "recipe", recipe)
        object.__setattr__(self, "hadamard_certified", certified)
        object.__setattr__(self, "packed", packed)
        return self

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    @property
    def is_normalized(self) -> bool:
        return bool(np.all(self.entries[0] == 1) and np.all(self.entries[:, 0] == 1))

    def __eq__(self, other):
        if not isinstance(other, SignMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.packed.tobytes())

    def __repr__(self):
        return f"SignMatrix(order={self.order}, recipe={self.recipe}, certified={self.hadamard_certified})"


def normalize(h: SignMatrix) -> SignMatrix:
    """Negate rows, then columns, so the first row and column are all +1."""
    if h.is_normalized:
        return h
    e = h.entries * h.entries[:, :1]
    e = e * e[:1, :]
    return SignMatrix._trusted(e, h.recipe, h.hadamard_certified)


def verify_hadamard(h: SignMatrix, backend=None) -> bool:
    """Exact H H^T = t I check via popcount of XOR-ed packed rows."""
    t = h.order
    if t == 1:
        return True
    if t != 2 and t % 4:
        return False
    return _engine.rows_orthogonal(h.packed, t, backend=backend)


def certify(h: SignMatrix) -> SignMatrix:
    """Return ``h`` flagged as certified, or raise if verification fails."""
    if not verify_hadamard(h):
        raise NotHadamardError(f"matrix of order {h.order} fails H H^T = t I")
    return SignMatrix._trusted(h.entries, h.recipe, True)


def _require_certified(h: SignMatrix, op: str):
    if not (h.hadamard_certified or h.order == 1):
        raise NotHadamardError(
            f"{op} needs a certified Hadamard input; got uncertified order {h.order} "
            "(run verify_hadamard/certify first)"
        )


def base_matrix(order: int) -> SignMatrix:
    if order == 1:
        return SignMatrix(np.ones((1, 1)), Base1(), True)
    if order == 2:
        return SignMatrix(np.array([[1, 1], [1, -1]]), Base2(), True)
    raise ValueError("base matrices exist for orders 1 and 2 only")


def sylvester_double(h: SignMatrix) -> SignMatrix:
    """[[H, H], [H, -H]]."""
    _require_certified(h, "sylvester_double")
    e = h.entries
    t = h.order
    out = np.empty((2 * t, 2 * t), dtype=np.int8)
    out[:t, :t] = e
    out[:t, t:] = e
    out[t:, :t] = e
    np.negative(e, out=out[t:, t:])
    recipe = SylvesterDouble(h.recipe) if h.recipe is not None else None
    return normalize(SignMatrix._trusted(out, recipe, True))


def kronecker(a: SignMatrix, b: SignMatrix) -> SignMatrix:
    _require_certified(a, "kronecker")
    _require_certified(b, "kronecker")
    out = np.kron(a.entries, b.entries)
    recipe = None
    if a.recipe is not None and b.recipe is not None:
        recipe = Kronecker(a.recipe, b.recipe)
    return normalize(SignMatrix._trusted(out, recipe, True))


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


def primes_upto(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.flatnonzero(sieve)


def paley_one(q: int) -> SignMatrix:
    """Order q+1 matrix I + S from the quadratic-residue core, q prime, q = 3 mod 4."""
    if not is_prime(q):
        raise NotHadamardError(f"paley_one needs a prime, got {q}")
    if q % 4 != 3:
        raise NotHadamardError(f"paley_one needs q = 3 (mod 4), got q = {q} = {q % 4} (mod 4)")
    chi = -np.ones(q, dtype=np.int8)
    chi[0] = 0
    chi[(np.arange(1, q, dtype=np.int64) ** 2) % q] = 1
    # row i of the core is chi shifted right by i
    windows = np.lib.stride_tricks.sliding_window_view(np.concatenate([chi, chi]), q)
    jac = windows[q:0:-1]
    s = np.zeros((q + 1, q + 1), dtype=np.int8)
    s[0, 1:] = 1
    s[1:, 0] = -1
    s[1:, 1:] = jac
    np.fill_diagonal(s, 1)
    h = SignMatrix._trusted(s, PaleyI(q))
    return normalize(certify(h))


@lru_cache(maxsize=256)
def realize(recipe: Recipe) -> SignMatrix:
    """Build the matrix a recipe describes (memoised)."""
    if isinstance(recipe, Base1):
        return base_matrix(1)
    if isinstance(recipe, Base2):
        return base_matrix(2)
    if isinstance(recipe, PaleyI):
        return paley_one(recipe.q)
    if isinstance(recipe, SylvesterDouble):
        return sylvester_double(realize(recipe.child))
    if isinstance(recipe, Kronecker):
        return kronecker(realize(recipe.left), realize(recipe.right))
    raise TypeError(f"not a recipe: {recipe!r}")


# --------------------------------------------------------------------------
# .pm1 text format


def format_pm1(h: SignMatrix) -> str:
    rows = ["".join("+" if x > 0 else "-" for x in row) for row in h.entries]
    return f"{h.order}\n" + "\n".join(rows) + "\n"


def parse_pm1(text: str, verify: bool = True) -> SignMatrix:
    head, _, body = text.lstrip().partition("\n")
    try:
        t = int(head.strip())
    except ValueError:
        raise ValueError(f"bad .pm1 header {head!r}") from None
    if t < 1:
        raise ValueError("order must be positive")
    chars = "".join(body.split())
    if len(chars) != t * t:
        raise ValueError(f".pm1 body has {len(chars)} signs, expected {t * t}")
    if set(chars) - {"+", "-"}:
        raise ValueError(".pm1 body may contain only '+' and '-'")
    e = np.where(np.frombuffer(chars.encode(), dtype=np.uint8) == ord("+"), 1, -1)
    h = SignMatrix(e.reshape(t, t))
    if verify and verify_hadamard(h):
        h = SignMatrix(h.entries, None, True)
    return h


def write_pm1(path, h: SignMatrix):
    Path(path).write_text(format_pm1(h))


def read_pm1(path, verify: bool = True) -> SignMatrix:
    return parse_pm1(Path(path).read_text(), verify=verify)


# --------------------------------------------------------------------------
# order registry


class Mode(str, enum.Enum):
    STRICT412 = "strict412"
    EXTENDED = "extended"
    CONJECTURE = "conjecture"


@dataclass(frozen=True)
class OrderRegistry:
    """Achievable orders up to ``limit``, ascending, each with a recipe.

    ``CONJECTURE`` lists 1, 2 and every multiple of 4 (the orders Hadamard's
    conjecture promises); orders outside the Extended closure carry no recipe
    and cannot be realised.
    """

    mode: Mode
    limit: int
    orders: tuple
    recipes: tuple

    def __len__(self):
        return len(self.orders)

    def __contains__(self, t):
        i = bisect.bisect_left(self.orders, t)
        return i < len(self.orders) and self.orders[i] == t

    def recipe_for(self, t: int) -> Optional[Recipe]:
        i = bisect.bisect_left(self.orders, t)
        if i == len(self.orders) or self.orders[i] != t:
            raise KeyError(f"order {t} is not in the {self.mode.value} registry")
        return self.recipes[i]

    def realize(self, t: int) -> SignMatrix:
        recipe = self.recipe_for(t)
        if recipe is None:
            raise RegistryExhaustedError(f"order {t} is conjectural; no construction is known here")
        return realize(recipe)


def _strict_recipe(i: int, j: int) -> Recipe:
    r: Recipe = Base1()
    for _ in range(j):
        r = PaleyI(11) if isinstance(r, Base1) else Kronecker(PaleyI(11), r)
    for _ in range(2 * i):
        r = SylvesterDouble(r)
    return r


def _strict_orders(limit):
    found = {}
    a, i = 1, 0
    while a <= limit:
        b, j = a, 0
        while b <= limit:
            found[b] = _strict_recipe(i, j)
            b *= 12
            j += 1
        a *= 4
        i += 1
    return found


def _extended_orders(limit):
    gens = [int(q) + 1 for q in primes_upto(limit - 1) if q % 4 == 3]
    found: dict = {1: Base1()}
    if limit >= 2:
        found[2] = Base2()
    heap = list(found)
    while heap:
        x = heapq.heappop(heap)
        for g in [2] + gens:
            y = x * g
            if y > limit:
                break
            if y not in found:
                found[y] = None
                heapq.heappush(heap, y)
    for y in sorted(found):
        if found[y] is not None:
            continue
        if y % 2 == 0 and y // 2 in found:
            found[y] = SylvesterDouble(found[y // 2])
        elif is_prime(y - 1) and (y - 1) % 4 == 3:
            found[y] = PaleyI(y - 1)
        else:
            for g in gens:
                if y % g == 0 and y // g in found:
                    found[y] = Kronecker(PaleyI(g - 1), found[y // g])
                    break
    return found


@lru_cache(maxsize=32)
def registry_orders(mode: Union[Mode, str] = Mode.STRICT412, limit: int = 1 << 16) -> OrderRegistry:
    mode = Mode(mode)
    if limit < 1:
        raise ValueError("limit must be >= 1")
    if mode is Mode.STRICT412:
        found = _strict_orders(limit)
    else:
        found = _extended_orders(limit)
        if mode is Mode.CONJECTURE:
            for t in [2] + list(range(4, limit + 1, 4)):
                if t <= limit:
                    found.setdefault(t, None)
    orders = tuple(sorted(found))
    return OrderRegistry(mode, limit, orders, tuple(found[t] for t in orders))


@dataclass(frozen=True)
class OrderChoice:
    n: int
    order: int
    recipe: Optional[Recipe]

    @property
    def delta(self) -> float:
        return self.order / self.n - 1.0


def nearest_order(reg: OrderRegistry, n: int) -> OrderChoice:
    """Smallest registered order t >= n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    i = bisect.bisect_left(reg.orders, n)
    if i == len(reg.orders):
        raise RegistryExhaustedError(
            f"no {reg.mode.value} order >= {n} below limit {reg.limit}; rebuild with a larger limit"
        )
    return OrderChoice(n, reg.orders[i], reg.recipes[i])


def consecutive_ratios(reg: OrderRegistry):
    """``[(x, x_next / x), ...]`` over consecutive registered orders."""
    if len(reg.orders) < 2:
        raise ValueError("need at least two orders")
    o = reg.orders
    return [(o[k], o[k + 1] / o[k]) for k in range(len(o) - 1)]
