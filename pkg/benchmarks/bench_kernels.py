"""Compare the compiled pair kernel with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 1024 4096] [--repeat 3]

Prints ns per admitted pair for both backends and checks they agree.
"""
import argparse
import math
import time

import numpy as np

from nonlocal_lab import DiagonalPolicy, FieldSpec, ManifoldSpec, build_manifold, sample_scalar_field
from nonlocal_lab._kernels import BACKEND, get_backend
from nonlocal_lab.estimators import pair_row_sums


def _case(kind, size):
    if kind == "torus1":
        spec = ManifoldSpec("FlatTorus", dimension=1, resolution=size)
        fspec = FieldSpec("TorusTrig", terms=((1.0, "sin", (1,)),))
    elif kind == "torus2":
        m = int(round(math.sqrt(size)))
        spec = ManifoldSpec("FlatTorus", dimension=2, resolution=m)
        fspec = FieldSpec("TorusTrig", terms=((1.0, "sin", (1, 0)),))
    else:
        spec = ManifoldSpec("Sphere2", resolution=size)
        fspec = FieldSpec("SphereCoord", coefficients=(0.0, 0.0, 1.0))
    s = build_manifold(spec)
    return s, sample_scalar_field(s, fspec)


def _time(fn, repeat):
    best = math.inf
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[1024, 4096])
    ap.add_argument("--cases", nargs="+", default=["torus1", "torus2", "sphere"])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    backends = ["numpy"] + (["compiled"] if BACKEND == "compiled" else [])
    print(f"default backend: {BACKEND}")
    print(f"{'case':8s} {'N':>6s} {'backend':>9s} {'seconds':>9s} {'ns/pair':>8s} {'value':>22s}")
    for kind in args.cases:
        for size in args.sizes:
            s, f = _case(kind, size)
            rows = np.arange(s.size, dtype=np.int64)
            cutoff = DiagonalPolicy().cutoff(s)
            pairs = s.size * (s.size - 1) / 2
            results = {}
            for b in backends:
                def run():
                    sums, _ = pair_row_sums(s, f.values, rows, 2.0, 1.0, s.dim + 1.8, math.inf, cutoff,
                                            upper=True, threads=args.threads, backend=b)
                    return math.fsum(s.weights * sums)
                sec, val = _time(run, args.repeat)
                results[b] = val
                print(f"{kind:8s} {s.size:6d} {b:>9s} {sec:9.4f} {1e9 * sec / pairs:8.1f} {val:22.15g}")
            if len(results) == 2:
                a, c = results["numpy"], results["compiled"]
                print(f"{'':8s} {'':6s} {'rel diff':>9s} {abs(a - c) / abs(c):9.2e}")


if __name__ == "__main__":
    main()
