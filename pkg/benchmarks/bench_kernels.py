"""Compare the compiled and numpy tape evaluators.

    python3 benchmarks/bench_kernels.py [--points N] [--order K] [--repeat R]
"""

import argparse
import timeit

import numpy as np

from affine_lab import kernels
from affine_lab.expr import parse_expr
from affine_lab.jets import eval_series

EXPRS = {
    "polynomial": "z + z^2/2",
    "trig": "cos(z) - (3/5)*i*sin(z) + (1/5)*i*sin(3*z)",
    "rational": "exp(z)/(z - 3) + cosh(z)^2",
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=4096)
    ap.add_argument("--order", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    z = rng.uniform(-1, 1, args.points) + 1j * rng.uniform(-1, 1, args.points)
    print(f"backends: {', '.join(kernels.BACKENDS)} (default {kernels.BACKEND})")
    print(f"{'expression':<12} {'backend':<8} {'ms/call':>10}")
    for label, text in EXPRS.items():
        e = parse_expr(text)
        ref = None
        for name in kernels.BACKENDS:
            out = eval_series(e, z, args.order, backend=name)
            if ref is None:
                ref = out
            else:
                assert np.allclose(out, ref, rtol=1e-12, atol=1e-12)
            t = min(timeit.repeat(lambda: eval_series(e, z, args.order, backend=name),
                                  number=1, repeat=args.repeat))
            print(f"{label:<12} {name:<8} {1e3 * t:>10.3f}")


if __name__ == "__main__":
    main()
