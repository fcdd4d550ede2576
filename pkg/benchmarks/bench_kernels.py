"""Timing comparison of the compiled Legendre kernels against the NumPy
fallback, plus a bit-identity check on the same inputs.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

The numbers that matter in practice are pce_eval on wide point sets
(the Monte Carlo sweep applies the surrogate to 10^7 points in 65,536
point chunks) and legendre_table on buffer-zone grids.
"""
import time

import numpy as np

from glhs._kernels import _fallback

try:
    from glhs._kernels import _legendre
except ImportError:
    _legendre = None

from glhs.basis import index_set


def timeit(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench(label, fallback_fn, compiled_fn):
    t_py = timeit(fallback_fn)
    if compiled_fn is None:
        print(f"{label:<44} python {t_py * 1e3:8.2f} ms   compiled: unavailable")
        return
    t_c = timeit(compiled_fn)
    print(f"{label:<44} python {t_py * 1e3:8.2f} ms   "
          f"compiled {t_c * 1e3:8.2f} ms   speedup {t_py / t_c:5.1f}x")


def main():
    rng = np.random.default_rng(0)

    print(f"numpy {np.__version__}, compiled kernel "
          f"{'present' if _legendre else 'absent'}\n")

    for m, nmax in ((65_536, 4), (1_000_000, 8)):
        x = rng.uniform(-1, 1, m)
        bench(
            f"legendre_table  m={m:>9,} nmax={nmax}",
            lambda x=x, nmax=nmax: _fallback.legendre_table(x, nmax),
            (lambda x=x, nmax=nmax: _legendre.legendre_table(x, nmax))
            if _legendre else None,
        )
        if _legendre is not None:
            a = _fallback.legendre_table(x, nmax)
            b = _legendre.legendre_table(x, nmax)
            assert np.array_equal(a, b), "implementations drifted apart"

    for d, n, m in ((1, 3, 65_536), (2, 4, 65_536), (2, 4, 1_000_000),
                    (4, 3, 65_536)):
        indices = index_set(d, n)
        coef = rng.normal(size=indices.shape[0])
        pts = rng.uniform(-1, 1, (m, d))
        bench(
            f"pce_eval        m={m:>9,} d={d} n={n} N={indices.shape[0]}",
            lambda p=pts, i=indices, c=coef: _fallback.pce_eval(p, i, c),
            (lambda p=pts, i=indices, c=coef: _legendre.pce_eval(p, i, c))
            if _legendre else None,
        )
        if _legendre is not None:
            assert np.array_equal(_fallback.pce_eval(pts, indices, coef),
                                  _legendre.pce_eval(pts, indices, coef)), \
                "implementations drifted apart"

    if _legendre is not None:
        print("\nbit-identity between the implementations: verified")


if __name__ == "__main__":
    main()
