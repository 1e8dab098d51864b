"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_engine.py [--repeat 3] [--workers 1]

Each case runs on every available backend; results must agree exactly.
"""
import argparse
import time

import numpy as np

from ksz import _engine, forms
from ksz import hadamard as hd
from ksz.norms import max_abs_form


def timed(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases(workers):
    h16 = hd.registry_orders().realize(16).entries
    h20 = hd.registry_orders(hd.Mode.EXTENDED, 64).realize(20).entries
    cube = forms.ChainedForm.from_factors([hd.sylvester_double(hd.base_matrix(2))] * 2, (4, 4, 4)).materialize()
    rng = np.random.default_rng(0)
    rand = rng.choice(np.array([-1, 1], dtype=np.int8), size=(5, 4, 24))
    yield "linf H16 (2^15 patterns)", lambda b: max_abs_form(h16, workers=workers, backend=b)[0]
    yield "linf H20 (2^19 patterns)", lambda b: max_abs_form(h20, workers=workers, backend=b)[0]
    yield "linf chained 4x4x4 (2^7)", lambda b: max_abs_form(cube, workers=workers, backend=b)[0]
    yield "linf random 5x4x24 (2^8)", lambda b: max_abs_form(rand, workers=workers, backend=b)[0]
    for t in (1024, 2048):
        h = hd.registry_orders(hd.Mode.EXTENDED, 2048).realize(t)
        yield f"verify order {t}", lambda b, h=h: hd.verify_hadamard(h, backend=b)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    backends = _engine.available_backends()
    print(f"backends: {', '.join(backends)}; workers={args.workers}; best of {args.repeat}")
    print(f"{'case':30s}" + "".join(f"{b:>12s}" for b in backends) + ("   speedup" if len(backends) > 1 else ""))
    for name, fn in cases(args.workers):
        times, outs = [], []
        for b in backends:
            dt, out = timed(lambda: fn(b), args.repeat)
            times.append(dt)
            outs.append(out)
        if len(set(outs)) != 1:
            raise SystemExit(f"backends disagree on {name}: {outs}")
        row = f"{name:30s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(times) > 1:
            row += f"{times[1] / times[0]:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
