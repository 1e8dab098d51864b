"""Gale-Berlekamp switching game in m dimensions.

A board of +-1 lights (+1 = on) is acted on by one switch per slice along each
axis.  The imbalance ``G`` of a board is ``max |sum a x1 ... xm|`` over switch
settings, and the fewest on-lights reachable is ``(total - G) / 2``.  The exact
solver is the same enumeration engine as the l_inf norm evaluator.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import forms
from . import hadamard as hd
from . import norms
from .errors import InvariantError


@dataclass(frozen=True, eq=False)
class GameConfig:
    lights: np.ndarray

    def __post_init__(self):
        a = np.array(norms.coefficient_tensor(self.lights), dtype=np.int8)
        if a.ndim < 2:
            raise ValueError("a game board needs at least two axes")
        if a.size == 0 or not np.all(np.abs(a) == 1):
            raise ValueError("every light must be +1 (on) or -1 (off)")
        a.setflags(write=False)
        object.__setattr__(self, "lights", a)

    @classmethod
    def from_form(cls, form) -> "GameConfig":
        return cls(norms.coefficient_tensor(form))

    @property
    def m(self) -> int:
        return self.lights.ndim

    @property
    def dims(self) -> tuple:
        return self.lights.shape

    @property
    def total(self) -> int:
        return int(self.lights.size)

    @property
    def packed(self) -> np.ndarray:
        """On-bits packed along the last axis (numpy bit order)."""
        return np.packbits(self.lights > 0, axis=-1)

    @property
    def lit(self) -> int:
        return int((self.lights > 0).sum())


@dataclass(frozen=True)
class SwitchAssignment:
    vectors: tuple

    def __post_init__(self):
        vs = tuple(np.asarray(v, dtype=np.int8) for v in self.vectors)
        for v in vs:
            if v.ndim != 1 or not np.all(np.abs(v) == 1):
                raise ValueError("switch settings must be +-1 vectors")
        object.__setattr__(self, "vectors", vs)

    def signs(self) -> list[str]:
        return [norms.sign_string(v) for v in self.vectors]

    def apply(self, config: GameConfig) -> np.ndarray:
        """Board after throwing the switches (entry times every switch sign)."""
        a = config.lights.astype(np.int8)
        for k, v in enumerate(self.vectors):
            shape = [1] * config.m
            shape[k] = len(v)
            a = a * v.reshape(shape)
        return a


@dataclass(frozen=True)
class GameResult:
    imbalance: int
    on_lights: int
    witness: SwitchAssignment
    exact: bool

    def to_dict(self) -> dict:
        return {"G": self.imbalance, "on_lights": self.on_lights, "exact": self.exact,
                "witness": self.witness.signs()}


def on_lights(total: int, g: int) -> int:
    total, g = int(total), int(g)
    if not 0 <= g <= total:
        raise ValueError(f"imbalance {g} outside [0, {total}]")
    if (total - g) % 2:
        raise InvariantError(f"imbalance {g} and light count {total} differ in parity")
    return (total - g) // 2


def r_from_g(n: int, g: int) -> int:
    """Lower bound on the worst-case on-light count of an n x n board given an upper bound on G."""
    return on_lights(n * n, g)


def _result(config: GameConfig, value: int, witness, exact: bool) -> GameResult:
    w = SwitchAssignment(witness)
    # the reported sign convention: switches turn the majority on
    if norms.evaluate(config.lights, w.vectors) < 0:
        w = SwitchAssignment((-w.vectors[0],) + w.vectors[1:])
    if norms.evaluate(config.lights, w.vectors) != value:
        raise InvariantError("witness does not replay to the reported imbalance")
    return GameResult(int(value), on_lights(config.total, value), w, exact)


def _as_config(config) -> GameConfig:
    return config if isinstance(config, GameConfig) else GameConfig(config)


def imbalance_exact(config, budget: int = norms.DEFAULT_BUDGET, workers=None, backend=None) -> GameResult:
    config = _as_config(config)
    value, witness = norms.max_abs_form(config.lights, budget, workers, backend)
    return _result(config, value, witness, True)


def imbalance_heuristic(config, restarts: int = 64, seed: int = 0) -> GameResult:
    config = _as_config(config)
    value, witness = norms.best_ascent(config.lights, restarts, seed)
    return _result(config, value, witness, False)


BRUTE_MAX_DIM = 4
BRUTE_MAX_M = 3


def brute_oracle(config) -> GameResult:
    """Try every switch setting on every axis; small boards only."""
    config = _as_config(config)
    if config.m > BRUTE_MAX_M or max(config.dims) > BRUTE_MAX_DIM:
        raise ValueError(f"brute force is limited to m <= {BRUTE_MAX_M} and dims <= {BRUTE_MAX_DIM}")
    a = config.lights.astype(np.int64)
    best, best_w = -1, None
    choices = [list(itertools.product((1, -1), repeat=n)) for n in config.dims]
    for combo in itertools.product(*choices):
        val = abs(norms.evaluate(a, combo))
        if val > best:
            best, best_w = val, combo
    return _result(config, best, best_w, True)


# --------------------------------------------------------------------------
# worst boards by exhaustion


@dataclass(frozen=True)
class WorstCase:
    dims: tuple
    s_value: int
    r_value: int
    board: GameConfig
    boards_checked: int


WORST_CASE_MAX_LIGHTS = 16


def worst_case(dims, workers=None, backend=None) -> WorstCase:
    """Minimum imbalance over all boards of the given shape.

    Negating a slice does not change G, so it suffices to scan boards whose
    lines through the origin are all on.
    """
    dims = tuple(int(n) for n in dims)
    total = math.prod(dims)
    if len(dims) < 2 or total > WORST_CASE_MAX_LIGHTS:
        raise ValueError(f"exhaustive search needs m >= 2 and at most {WORST_CASE_MAX_LIGHTS} lights")
    idx = np.indices(dims).reshape(len(dims), -1)
    fixed = (idx != 0).sum(axis=0) <= 1
    free = np.flatnonzero(~fixed)
    best: Optional[tuple] = None
    count = 0
    for bits in range(1 << len(free)):
        flat = np.ones(total, dtype=np.int8)
        for j, pos in enumerate(free):
            if bits >> j & 1:
                flat[pos] = -1
        g, _ = norms.max_abs_form(flat.reshape(dims), workers=workers, backend=backend)
        count += 1
        if best is None or g < best[0]:
            best = (g, flat.reshape(dims))
    g, board = best
    return WorstCase(dims, g, on_lights(total, g), GameConfig(board), count)


# --------------------------------------------------------------------------
# Hadamard boards


@dataclass
class GameReport:
    dims: tuple
    total: int
    result: GameResult
    g_upper: float
    g_upper_source: str
    on_lights_bound: int
    lines: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "total": self.total,
            "G": self.result.imbalance,
            "G_exact": self.result.exact,
            "G_upper": self.g_upper,
            "G_upper_source": self.g_upper_source,
            "on_lights_bound": self.on_lights_bound,
            "witness": self.result.witness.signs(),
            "certificates": {n: {"value": v, "tag": t} for n, v, t in self.lines},
        }

    def to_text(self) -> str:
        out = [
            f"dims: {','.join(map(str, self.dims))}",
            f"total: {self.total}",
            f"G: {self.result.imbalance} [{'exact' if self.result.exact else 'heuristic'}]",
            f"G_upper: {norms._fmt(self.g_upper)} [{self.g_upper_source}]",
            f"on_lights_bound: {self.on_lights_bound}",
        ]
        out += [f"witness.{k}: {s}" for k, s in enumerate(self.result.witness.signs())]
        out += [f"{n}: {norms._fmt(v)} [{t}]" for n, v, t in self.lines]
        return "\n".join(out)


def hadamard_game_report(dims, m: int = 2, registry: Optional[hd.OrderRegistry] = None,
                         budget: int = norms.DEFAULT_BUDGET, restarts: int = 64, seed: int = 0,
                         workers=None, backend=None) -> GameReport:
    """Play the chained Hadamard board on ``dims`` (an int means ``(n,) * m``)."""
    if isinstance(dims, (int, np.integer)):
        dims = (int(dims),) * m
    dims = tuple(int(n) for n in dims)
    if len(dims) < 2:
        raise ValueError("a game board needs at least two axes")
    form, cert, rep = forms.construct_ksz(dims, None, registry)
    config = GameConfig.from_form(form)
    total = config.total
    try:
        res = imbalance_exact(config, budget, workers, backend)
        g_upper, source = res.imbalance, "exact"
    except norms.BudgetExceededError:
        res = imbalance_heuristic(config, restarts, seed)
        g_upper, source = min(rep.certificate, form.chain_bound()), "formula"
    g_int = min(total, math.floor(g_upper + 1e-9))
    if (total - g_int) % 2:
        g_int -= 1
    bound = on_lights(total, g_int)

    mm = len(dims)
    rhs = norms.rhs_ksz_mixed(sorted(dims), (norms.INF,) * mm)
    lines = [
        ("chained_certificate", cert.value, "formula"),
        ("ksz_rate", rhs, "formula"),
        ("classical_certificate", norms.classical_constant(mm) * rhs, "formula"),
    ]
    if len(set(dims)) == 1:
        lines.append(("asymptotic_lower", norms.lower_asymptotic_constant(mm) * rhs, "formula"))
    return GameReport(dims, total, res, g_upper, source, bound, lines)
