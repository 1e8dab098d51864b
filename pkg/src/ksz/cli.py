"""Command-line front end: ``ksz <subcommand> [flags]``.

Every subcommand builds a result document and renders it as text, csv or json.
Errors print a single ``error <name>: <message>`` line on stderr and map to a
distinct exit code.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import berlekamp as gb
from . import forms
from . import hadamard as hd
from . import norms
from .errors import (BudgetExceededError, ConvergenceError, InvariantError, NotHadamardError,
                     RegistryExhaustedError, UnsupportedPatternError)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_REGISTRY = 4
EXIT_INVARIANT = 5
EXIT_UNSUPPORTED = 6
EXIT_CONVERGENCE = 7
EXIT_NOT_HADAMARD = 8

# order matters: subclasses before their ValueError/AssertionError bases
EXIT_CODES = [
    (BudgetExceededError, EXIT_BUDGET, "budget"),
    (RegistryExhaustedError, EXIT_REGISTRY, "registry"),
    (InvariantError, EXIT_INVARIANT, "invariant"),
    (UnsupportedPatternError, EXIT_UNSUPPORTED, "unsupported"),
    (ConvergenceError, EXIT_CONVERGENCE, "convergence"),
    (NotHadamardError, EXIT_NOT_HADAMARD, "not-hadamard"),
    (ValueError, EXIT_USAGE, "usage"),
    (OSError, EXIT_FAILURE, "io"),
]

SUBCOMMANDS = ("gen-hadamard", "registry", "nearest-order", "ratios", "build-form", "norm",
               "bounds", "constants", "berlekamp", "report")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _dims(text: str) -> tuple:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed dims list {text!r}") from None
    if not dims or any(n < 1 for n in dims):
        raise argparse.ArgumentTypeError(f"dims must be positive integers, got {text!r}")
    return dims


def _exponents(text: str) -> tuple:
    try:
        return tuple(forms.parse_exponent(x) for x in text.split(","))
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "csv", "json"), default="text")
    common.add_argument("--output", "-o", help="write the rendered result here instead of stdout")
    reg = _Parser(add_help=False)
    reg.add_argument("--mode", choices=[m.value for m in hd.Mode], default=hd.Mode.STRICT412.value)
    reg.add_argument("--limit", type=_positive, default=1 << 16, help="largest order in the registry")
    solve = _Parser(add_help=False)
    solve.add_argument("--budget", type=_positive, default=norms.DEFAULT_BUDGET)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--restarts", type=_positive, default=64)
    solve.add_argument("--workers", type=_positive, default=None)

    p = _Parser(prog="ksz", description="Hadamard constructions, unimodular forms and their norms.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("gen-hadamard", parents=[common, reg], help="emit a Hadamard matrix")
    s.add_argument("--order", type=_positive, required=True)
    s.add_argument("--out", help=".pm1 file to write")

    sub.add_parser("registry", parents=[common, reg], help="list constructible orders")

    s = sub.add_parser("nearest-order", parents=[common, reg], help="smallest order >= n")
    s.add_argument("--n", type=_positive, required=True, nargs="+")

    s = sub.add_parser("ratios", parents=[common, reg], help="consecutive order ratios")
    s.add_argument("--min", type=_positive, default=1, dest="lo")
    s.add_argument("--max", type=_positive, default=None, dest="hi")

    s = sub.add_parser("build-form", parents=[common, reg], help="construct a form with its certificate")
    s.add_argument("--dims", type=_dims, required=True)
    s.add_argument("--p", type=_exponents, default=None)
    s.add_argument("--out", help=".pmt file for the coefficient tensor")

    s = sub.add_parser("norm", parents=[common, reg, solve], help="norm certificate of a form")
    s.add_argument("--form", choices=("chained", "ones", "file"), default="chained")
    s.add_argument("--dims", type=_dims)
    s.add_argument("--input", help=".pmt or .pm1 file (with --form file)")
    s.add_argument("--method", choices=("exact", "heuristic", "spectral", "basis"), default="exact")
    s.add_argument("--p", type=_exponents, default=None)

    s = sub.add_parser("bounds", parents=[common, reg], help="closed-form bounds for dims and exponents")
    s.add_argument("--dims", type=_dims, required=True)
    s.add_argument("--p", type=_exponents, default=None)

    s = sub.add_parser("constants", parents=[common], help="constants table")
    s.add_argument("--m-max", type=_positive, default=5)

    s = sub.add_parser("berlekamp", parents=[common, reg, solve], help="switching-game solver")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--hadamard", type=_positive, help="side length of a chained Hadamard board")
    g.add_argument("--input", help=".pmt board file")
    g.add_argument("--worst-case", type=_dims, help="exhaustive worst board of this shape")
    s.add_argument("--m", type=_positive, default=2)
    s.add_argument("--method", choices=("auto", "exact", "heuristic", "brute"), default="auto")

    sub.add_parser("report", parents=[common, solve], help="reproduction summary")
    return p


@dataclass
class CommandPlan:
    command: str
    options: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.options[name]
        except KeyError:
            raise AttributeError(name) from None


def parse(argv) -> CommandPlan:
    ns = build_parser().parse_args(list(argv))
    plan = CommandPlan(ns.command, {k: v for k, v in vars(ns).items() if k != "command"})
    _validate(plan)
    return plan


def _validate(plan: CommandPlan):
    o = plan.options
    if o.get("p") is not None and o.get("dims") is not None and len(o["p"]) != len(o["dims"]):
        raise UsageError("argument --p: needs one exponent per entry of --dims")
    if plan.command == "norm":
        if o["form"] == "file" and not o.get("input"):
            raise UsageError("argument --input: required with --form file")
        if o["form"] != "file" and o.get("dims") is None:
            raise UsageError("argument --dims: required with --form chained/ones")
        if o["method"] == "basis" and o.get("p") is None:
            raise UsageError("argument --p: required with --method basis")
    if plan.command == "berlekamp" and o.get("hadamard") is not None and o["m"] < 2:
        raise UsageError("argument --m: a board needs at least two axes")
    if plan.command == "ratios" and o.get("hi") is not None and o["hi"] < o["lo"]:
        raise UsageError("argument --max: must not be below --min")


# --------------------------------------------------------------------------
# result documents


@dataclass
class Document:
    data: dict
    header: Optional[list] = None
    rows: Optional[list] = None


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "inf" if math.isinf(v) else v
    return v if v is None or isinstance(v, str) else str(v)


def _cell(v) -> str:
    v = _clean(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return ",".join(_cell(x) for x in v)
    return "" if v is None else str(v)


def _flatten(data, prefix=""):
    for k, v in data.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        else:
            yield key, v


def render(doc: Document, fmt: str) -> str:
    if fmt == "json":
        body = dict(doc.data)
        if doc.rows is not None:
            body["rows"] = [dict(zip(doc.header, r)) for r in doc.rows]
        return json.dumps(_clean(body), indent=2, allow_nan=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if doc.rows is not None:
            w.writerow(doc.header)
            w.writerows([_cell(c) for c in r] for r in doc.rows)
        else:
            w.writerow(["key", "value"])
            w.writerows([k, _cell(v)] for k, v in _flatten(doc.data))
        return buf.getvalue()
    lines = [f"{k}: {_cell(v)}" for k, v in _flatten(doc.data)]
    if doc.rows is not None:
        lines.append(" ".join(doc.header))
        lines += [" ".join(_cell(c) for c in r) for r in doc.rows]
    return "\n".join(lines) + "\n"


def _registry(o):
    return hd.registry_orders(hd.Mode(o["mode"]), o["limit"])


def _cert_dict(c: norms.NormCertificate) -> dict:
    return c.to_dict()


# --------------------------------------------------------------------------
# handlers


def cmd_gen_hadamard(o) -> Document:
    reg = _registry(o)
    if o["order"] not in reg:
        raise RegistryExhaustedError(f"order {o['order']} is not constructible in the {o['mode']} registry")
    h = reg.realize(o["order"])
    if o.get("out"):
        hd.write_pm1(o["out"], h)
    data = {"order": h.order, "recipe": str(h.recipe), "certified": h.hadamard_certified,
            "normalized": h.is_normalized}
    if o.get("out"):
        data["written"] = o["out"]
        return Document(data)
    return Document(data, ["row"], [[norms.sign_string(r)] for r in h.entries])


def cmd_registry(o) -> Document:
    reg = _registry(o)
    rows = [[t, str(r) if r is not None else "conjectural"] for t, r in zip(reg.orders, reg.recipes)]
    return Document({"mode": reg.mode.value, "limit": reg.limit, "count": len(reg)}, ["order", "recipe"], rows)


def cmd_nearest_order(o) -> Document:
    reg = _registry(o)
    rows = []
    for n in o["n"]:
        c = hd.nearest_order(reg, n)
        rows.append([n, c.order, c.delta, str(c.recipe) if c.recipe is not None else "conjectural"])
    return Document({"mode": reg.mode.value}, ["n", "order", "delta", "recipe"], rows)


def cmd_ratios(o) -> Document:
    reg = _registry(o)
    hi = o["hi"] if o["hi"] is not None else reg.limit
    pairs = [(x, r) for x, r in hd.consecutive_ratios(reg) if o["lo"] <= x <= hi]
    rows = [[k, x, r] for k, (x, r) in enumerate(pairs, start=1)]
    data = {"mode": reg.mode.value, "min": o["lo"], "max": hi,
            "max_ratio": max((r for _, r in pairs), default=None)}
    return Document(data, ["index", "order", "ratio"], rows)


def cmd_build_form(o) -> Document:
    form, cert, rep = forms.construct_ksz(o["dims"], o["p"], _registry(o))
    data = {"report": rep.to_dict(), "certificate": _cert_dict(cert)}
    if o.get("out"):
        forms.write_pmt(o["out"], form.materialize())
        data["written"] = o["out"]
    return Document(data)


def _load_form(o):
    if o["form"] == "file":
        path = Path(o["input"])
        text = path.read_text()
        if path.suffix == ".pm1":
            return hd.parse_pm1(text, verify=False).entries
        return forms.parse_pmt(text)
    if o["form"] == "ones":
        return np.ones(o["dims"], dtype=np.int8)
    return forms.chained_form(o["dims"], _registry(o)).materialize()


def cmd_norm(o) -> Document:
    a = _load_form(o)
    method = o["method"]
    if method == "exact":
        cert = norms.linf_exact(a, o["budget"], o["workers"])
    elif method == "heuristic":
        cert = norms.linf_heuristic(a, o["restarts"], o["seed"])
    elif method == "spectral":
        if a.ndim != 2:
            raise ValueError("spectral norm needs a bilinear form")
        cert = norms.l2_spectral(a)
    else:
        cert = norms.basis_lower_bound(a, o["p"])
    return Document({"shape": list(a.shape), "certificate": _cert_dict(cert)})


def cmd_bounds(o) -> Document:
    dims = o["dims"]
    p = o["p"] if o["p"] is not None else (norms.INF,) * len(dims)
    rows = [["rhs_mixed", norms.rhs_ksz_mixed(dims, p)], ["rhs_sum", norms.rhs_ksz_sum(dims, p)]]
    if len(dims) == 2:
        rows.append(["rhs_bilinear", norms.rhs_bennett(dims[0], dims[1], p[0], p[1])])
    if len(set(dims)) == 1:
        rows.append(["rhs_equal", norms.rhs_ksz_equal(len(dims), dims[0], p)])
    data = {"dims": list(dims), "exponents": list(p)}
    try:
        form, cert, rep = forms.construct_ksz(dims, p, _registry(o))
    except UnsupportedPatternError as e:
        data["construction"] = f"unsupported: {e}"
    else:
        data["construction"] = rep.route
        rows += [["certificate", cert.value], ["chain_bound", form.chain_bound(p)],
                 ["ratio", rep.ratio], ["ratio_ceiling", rep.ratio_ceiling]]
    return Document(data, ["bound", "value"], rows)


def cmd_constants(o) -> Document:
    table = norms.constants_table(o["m_max"])
    header = ["m", "classical", "improved_complex", "improved_real", "lower_asymptotic"]
    rows = [[r.m, r.classical, r.improved_complex, r.improved_real, r.lower_asymptotic] for r in table]
    return Document({"m_max": o["m_max"]}, header, rows)


def cmd_berlekamp(o) -> Document:
    if o.get("worst_case"):
        w = gb.worst_case(o["worst_case"], o["workers"])
        return Document({"dims": list(w.dims), "S": w.s_value, "R": w.r_value,
                         "boards_checked": w.boards_checked,
                         "board": [norms.sign_string(r) for r in w.board.lights.reshape(-1, w.dims[-1])]})
    if o.get("hadamard"):
        if o["method"] not in ("auto", "exact"):
            raise ValueError("--hadamard boards are solved with --method auto or exact")
        rep = gb.hadamard_game_report(o["hadamard"], o["m"], _registry(o), o["budget"],
                                      o["restarts"], o["seed"], o["workers"])
        if o["method"] == "exact" and not rep.result.exact:
            raise BudgetExceededError("exact imbalance is over budget; use --method auto")
        return Document(rep.to_dict())
    config = gb.GameConfig(forms.read_pmt(o["input"]))
    method = o["method"]
    if method == "brute":
        res = gb.brute_oracle(config)
    elif method == "heuristic":
        res = gb.imbalance_heuristic(config, o["restarts"], o["seed"])
    else:
        try:
            res = gb.imbalance_exact(config, o["budget"], o["workers"])
        except BudgetExceededError:
            if method == "exact":
                raise
            res = gb.imbalance_heuristic(config, o["restarts"], o["seed"])
    return Document({"dims": list(config.dims), "total": config.total, **res.to_dict()})


def cmd_report(o) -> Document:
    g16 = gb.hadamard_game_report(16, 2, budget=o["budget"], workers=o["workers"])
    data = {"G16": g16.result.imbalance, "R16_bound": g16.on_lights_bound}
    for n in (4, 16, 64):
        form, cert, rep = forms.construct_ksz((n, n))
        try:
            val = norms.linf_exact(form, o["budget"], o["workers"]).value
            data[f"linf_ratio_{n}"] = val / n ** 1.5
            data[f"linf_ratio_{n}_source"] = "exact"
        except BudgetExceededError:
            data[f"linf_ratio_{n}"] = cert.value / n ** 1.5
            data[f"linf_ratio_{n}_source"] = "upper"
    m3 = gb.hadamard_game_report(4, 3, budget=o["budget"], workers=o["workers"])
    data["G_4x4x4"] = m3.result.imbalance
    for r in norms.constants_table(3)[1:]:
        data[f"lower_asymptotic_{r.m}"] = r.lower_asymptotic
    strict = hd.registry_orders(hd.Mode.STRICT412, 10 ** 6)
    ratios = hd.consecutive_ratios(strict)
    data["max_ratio_1_100"] = max(r for x, r in ratios if x <= 100)
    data["max_ratio_1e4_1e6"] = max(r for x, r in ratios if 10 ** 4 <= x <= 10 ** 6)
    return Document(data)


HANDLERS = {
    "gen-hadamard": cmd_gen_hadamard,
    "registry": cmd_registry,
    "nearest-order": cmd_nearest_order,
    "ratios": cmd_ratios,
    "build-form": cmd_build_form,
    "norm": cmd_norm,
    "bounds": cmd_bounds,
    "constants": cmd_constants,
    "berlekamp": cmd_berlekamp,
    "report": cmd_report,
}


def execute(plan: CommandPlan, stdout=None) -> int:
    stdout = stdout or sys.stdout
    doc = HANDLERS[plan.command](plan.options)
    text = render(doc, plan.options["format"])
    if plan.options.get("output"):
        Path(plan.options["output"]).write_text(text)
    else:
        stdout.write(text)
    return EXIT_OK


def exit_code_for(exc: BaseException) -> tuple:
    for cls, code, name in EXIT_CODES:
        if isinstance(exc, cls):
            return code, name
    return EXIT_FAILURE, "error"


def main(argv=None, stdout=None, stderr=None) -> int:
    stderr = stderr or sys.stderr
    argv = sys.argv[1:] if argv is None else argv
    if list(argv) in ([], ["-h"], ["--help"]):
        (stdout or sys.stdout).write(build_parser().format_help())
        return EXIT_OK if argv else EXIT_USAGE
    try:
        plan = parse(argv)
    except UsageError as e:
        stderr.write(f"error usage: {e}\n")
        return EXIT_USAGE
    except SystemExit as e:  # --help inside a subcommand
        return int(e.code or 0)
    try:
        return execute(plan, stdout)
    except Exception as e:
        code, name = exit_code_for(e)
        if code == EXIT_FAILURE and not isinstance(e, OSError):
            raise
        stderr.write(f"error {name}: {' '.join(str(e).split())}\n")
        return code


if __name__ == "__main__":
    sys.exit(main())
