"""Compare the compiled GF(p) elimination kernel against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 50 100 200] [--repeat 3]

Also times one end-to-end computation under each kernel by re-running
itself with ``HTBGG_PURE=1``.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

P = 32003


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def bench_rref(sizes, repeat):
    from htbgg import _kernels_py
    try:
        from htbgg import _kernels
    except ImportError:
        _kernels = None
    rng = np.random.default_rng(0)
    rows = []
    for n in sizes:
        A = rng.integers(0, P, size=(n, n + n // 2), dtype=np.int64)
        t_py = _time(lambda: _kernels_py.rref_modp(A.copy(), P), repeat)
        row = {"size": f"{n}x{A.shape[1]}", "pure_s": round(t_py, 5)}
        if _kernels is not None:
            B, C = A.copy(), A.copy()
            assert list(_kernels.rref_modp(B, P)) == _kernels_py.rref_modp(C, P)
            assert np.array_equal(B, C)
            t_c = _time(lambda: _kernels.rref_modp(A.copy(), P), repeat)
            row.update(compiled_s=round(t_c, 5), speedup=round(t_py / t_c, 1))
        rows.append(row)
    return rows


def end_to_end():
    from htbgg import GF, HAVE_EXTENSION
    from htbgg.gallery import build_example, monad_report

    t = time.perf_counter()
    rep = monad_report(build_example("tango_vetter", n=5, field=GF(7)))
    return {"compiled": HAVE_EXTENSION, "seconds": round(time.perf_counter() - t, 3),
            "is_monad": rep["is_monad"]}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    a = ap.parse_args()
    if a.child:
        print(json.dumps(end_to_end()))
        return
    print("rref mod", P)
    for row in bench_rref(a.sizes, a.repeat):
        print(" ", row)
    print("tango_vetter n=5 over GF(7), exhaustive monad report")
    for pure in ("", "1"):
        env = dict(os.environ, HTBGG_PURE=pure)
        out = subprocess.run([sys.executable, __file__, "--child"], env=env, capture_output=True,
                             text=True, check=True)
        print(" ", out.stdout.strip())


if __name__ == "__main__":
    main()
