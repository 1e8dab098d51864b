"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run under pytest (lines are repeated in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""
import io
import itertools
import math
import time

import numpy as np

from ksz import berlekamp as gb
from ksz import cli, forms, norms, special
from ksz import hadamard as hd
from ksz.norms import INF

# pinned tolerances
SPECTRAL_TOL = 1e-9
CONSTANT_TOL = 1e-3
SPECIAL_TOL = 1e-10
RATIO_SLACK = 1e-12      # relative float slack on "ratio <= ceiling"
HADAMARD_SECONDS = 10.0
G16_SECONDS = 1.0


def strict_orders_oracle(limit):
    return sorted({4 ** i * 12 ** j for i in range(20) for j in range(20) if 4 ** i * 12 ** j <= limit})


def criterion_1(record):
    hd.registry_orders.cache_clear()
    hd.realize.cache_clear()
    start = time.perf_counter()
    bad, count = [], 0
    for mode in (hd.Mode.STRICT412, hd.Mode.EXTENDED):
        reg = hd.registry_orders(mode, 2048)
        for t in reg.orders:
            h = reg.realize(t)
            count += 1
            if h.order != t or not hd.verify_hadamard(h):
                bad.append((mode.value, t))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < HADAMARD_SECONDS
    return record("C1 Hadamard soundness (all registry orders <= 2048, both modes)", ok,
                  f"{count} matrices verified, failures={bad}, {elapsed:.2f}s < {HADAMARD_SECONDS}s")


def criterion_2(record):
    worst = 0.0
    for t in (2, 4, 8, 12, 16, 64):
        h = hd.registry_orders(hd.Mode.EXTENDED, 64).realize(t)
        worst = max(worst, abs(norms.l2_spectral(h).value - math.sqrt(t)))
    return record("C2 spectral law l2(H) = sqrt(t)", worst <= SPECTRAL_TOL,
                  f"max |l2 - sqrt(t)| = {worst:.3e} <= {SPECTRAL_TOL}")


def criterion_3(record):
    h16 = hd.registry_orders().realize(16)
    start = time.perf_counter()
    res = gb.imbalance_exact(h16)
    elapsed = time.perf_counter() - start
    bound = gb.on_lights(256, res.imbalance)
    ok = res.imbalance <= 64 and bound >= 96 and res.imbalance == 64 and elapsed < G16_SECONDS
    return record("C3 G16 <= 64 and on-lights bound >= 96", ok,
                  f"G16={res.imbalance}, bound={bound}, {elapsed * 1000:.1f} ms < {G16_SECONDS}s")


def criterion_4(record):
    parts, ok = [], True
    for n in (4, 16):
        form, _, _ = forms.construct_ksz((n, n))
        r = norms.linf_exact(form).value / n ** 1.5
        ok &= r == 1.0
        parts.append(f"n={n}: exact ratio {r!r}")
    form, cert, _ = forms.construct_ksz((64, 64))
    r64 = cert.value / 64 ** 1.5
    ok &= r64 <= 1.0
    parts.append(f"n=64: upper ratio {r64!r}")
    return record("C4 chained bilinear ratio to n^(3/2)", ok, "; ".join(parts))


def criterion_5(record):
    orders = strict_orders_oracle(1 << 16)
    rng = np.random.default_rng(20261019)
    fails, worst = [], 0.0
    for _ in range(100):
        m = int(rng.integers(2, 4))
        dims = tuple(int(x) for x in rng.integers(2, 5001, m))
        _, cert, rep = forms.construct_ksz(dims)
        scan = max(next(t for t in orders if t >= n) / n - 1 for n in dims)
        ceiling = (1 + rep.delta_realized) ** ((m + 1) / 2)
        worst = max(worst, rep.ratio / ceiling)
        if rep.ratio > ceiling * (1 + RATIO_SLACK) or rep.delta_realized != scan:
            fails.append(dims)
    hits = [(4, 4), (16, 16), (12, 48), (1, 4, 16), (144, 12, 768), (1024, 1728), (4, 4, 4), (256, 64, 3 * 4 ** 5)]
    hit_ratios = [forms.construct_ksz(d)[2].ratio for d in hits]
    ok = not fails and all(r == 1.0 for r in hit_ratios)
    return record("C5 construction ratio <= (1+delta)^((m+1)/2), delta matches scan, hits give 1", ok,
                  f"100 tuples, failures={fails}, max ratio/ceiling={worst:.6f}, hit ratios={set(hit_ratios)}")


def criterion_6(record):
    l2, l3 = norms.lower_asymptotic_constant(2), norms.lower_asymptotic_constant(3)
    rec = max(abs(special.digamma(x + 1) - special.digamma(x) - 1 / x) for x in np.linspace(0.01, 200, 2000))
    fact = max(abs(math.exp(special.log_gamma(n + 1)) - math.factorial(n)) / math.factorial(n) for n in range(16))
    ok = (abs(l2 - 0.797) <= CONSTANT_TOL and abs(l3 - 0.694) <= CONSTANT_TOL
          and rec <= SPECIAL_TOL and fact <= SPECIAL_TOL)
    return record("C6 constants and special-function identities", ok,
                  f"lower(2)={l2:.6f}, lower(3)={l3:.6f}, recurrence err={rec:.1e}, factorial rel err={fact:.1e}")


def criterion_7(record):
    rng = np.random.default_rng(7)
    boards = [np.array(b, dtype=np.int8).reshape(2, 2) for b in itertools.product((1, -1), repeat=4)]
    boards += [rng.choice(np.array([-1, 1], dtype=np.int8), size=(3, 3)) for _ in range(50)]
    boards += [rng.choice(np.array([-1, 1], dtype=np.int8), size=(4, 4)) for _ in range(50)]
    boards += [rng.choice(np.array([-1, 1], dtype=np.int8), size=(2, 2, 2)) for _ in range(20)]
    mismatches = sum(gb.imbalance_exact(b).imbalance != gb.brute_oracle(b).imbalance for b in boards)
    g3 = gb.imbalance_exact(forms.ChainedForm.from_factors([hd.sylvester_double(hd.base_matrix(2))] * 2,
                                                            (4, 4, 4))).imbalance
    ok = mismatches == 0 and g3 == 16
    return record("C7 exact solver equals brute-force oracle", ok,
                  f"{len(boards)} boards, mismatches={mismatches}, chained H4 x H4 G={g3}")


def _ordering_forms(rng, count):
    made = 0
    while made < count:
        m = int(rng.integers(1, 4))
        limit = {1: 12, 2: 9, 3: 4}[m]
        dims = tuple(int(x) for x in rng.integers(1, limit + 1, m))
        yield dims
        made += 1


def criterion_8(record):
    rng = np.random.default_rng(8)
    violations, n_forms = [], 0
    for dims in _ordering_forms(rng, 220):
        form, cert, rep = forms.construct_ksz(dims)
        a = form.materialize()
        exact = norms.linf_exact(a).value
        lower = norms.linf_heuristic(a, restarts=4, seed=n_forms).value
        m = len(dims)
        rhs = norms.rhs_ksz_mixed(dims, (INF,) * m)
        uppers = {
            "chained": cert.value,
            "chain": form.chain_bound(),
            "lifted": form.lifted_bound(),
            "classical*rhs": norms.classical_constant(m) * rhs,
            "improved_real*rhs": norms.improved_real_constant(m) * rhs,
        }
        if m == 2:
            uppers["bilinear_classical"] = norms.classical_constant(2) * norms.rhs_bennett(*dims, INF, INF)
            sw = forms.lp_scale_witness(form, (INF, INF), [hd.nearest_order(hd.registry_orders(), max(dims)).order ** 0.5] * 2)
            uppers["rescaled"] = sw.bound
        if lower > exact or any(exact > u * (1 + RATIO_SLACK) for u in uppers.values()):
            violations.append((dims, lower, exact, uppers))
        n_forms += 1
    basis_viol, basis_checked = [], 0
    for _ in range(120):
        dims = tuple(int(x) for x in rng.integers(1, 40, 2))
        ps = tuple(float(x) for x in rng.choice([1.0, 1.25, 1.5, 1.75, 2.0], 2))
        try:
            form, cert, rep = forms.construct_ksz(dims, ps)
        except forms.UnsupportedPatternError:
            continue
        low = norms.basis_lower_bound(form.materialize(), ps).value
        ups = [cert.value, form.chain_bound(ps), *rep.extra_uppers.values()]
        ups.append(norms.riesz_thorin(1.0, rep.extra_uppers["l2_bound"], max(ps)))
        basis_checked += 1
        if any(low > u * (1 + RATIO_SLACK) for u in ups):
            basis_viol.append((dims, ps))
    ok = not violations and not basis_viol and n_forms >= 200
    return record("C8 Lower <= Exact <= Upper, basis bound <= Upper for p in [1,2]", ok,
                  f"{n_forms} forms, violations={len(violations)}; {basis_checked} small-p forms, "
                  f"basis violations={len(basis_viol)}")


def criterion_9(record):
    reg = hd.registry_orders(hd.Mode.STRICT412, 10 ** 6)
    ratios = hd.consecutive_ratios(reg)
    low = max(r for x, r in ratios if 1 <= x <= 100)
    high = max(r for x, r in ratios if 10 ** 4 <= x <= 10 ** 6)

    def emit():
        out = io.StringIO()
        code = cli.main(["ratios", "--limit", str(10 ** 6), "--format", "csv"], stdout=out)
        return code, out.getvalue()

    (c1, a), (c2, b) = emit(), emit()
    expected = "index,order,ratio\n" + "".join(f"{k},{x},{r!r}\n" for k, (x, r) in enumerate(ratios, start=1))
    ok = high < low and c1 == c2 == 0 and a == b == expected
    return record("C9 order-ratio trend and reproducible csv", ok,
                  f"max ratio [1,1e2]={low}, [1e4,1e6]={high}, csv identical={a == b}, matches sequence={a == expected}")


def criterion_10(record):
    # asymptotic claims are covered by the ratio certificates of criteria 4 and 5
    ok = criterion_4(lambda *a, **k: a[1]) and criterion_5(lambda *a, **k: a[1])
    return record("C10 asymptotic statements covered by ratio certificates (C4, C5)", ok,
                  "limits are not single numbers; property checks in C4/C5 stand in")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def test_c01_hadamard_soundness(record):
    assert criterion_1(record)


def test_c02_spectral_law(record):
    assert criterion_2(record)


def test_c03_g16_reproduction(record):
    assert criterion_3(record)


def test_c04_chained_bilinear_ratio(record):
    assert criterion_4(record)


def test_c05_construction_pipeline(record):
    assert criterion_5(record)


def test_c06_constants(record):
    assert criterion_6(record)


def test_c07_oracle_equivalence(record):
    assert criterion_7(record)


def test_c08_certificate_ordering(record):
    assert criterion_8(record)


def test_c09_ratio_trend(record):
    assert criterion_9(record)


def test_c10_asymptotic_substitute(record):
    assert criterion_10(record)


if __name__ == "__main__":
    import sys

    def plain(label, ok, detail=""):
        print(f"[{'PASS' if ok else 'FAIL'}] {label}" + (f" :: {detail}" if detail else ""))
        return ok

    results = [c(plain) for c in CRITERIA]
    sys.exit(0 if all(results) else 1)
