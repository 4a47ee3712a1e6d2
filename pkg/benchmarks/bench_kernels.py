"""Time the compiled hash-join kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--rows 200000] [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from joinshare.relational import _kernels_py

try:
    from joinshare.relational import _hashjoin
except ImportError:
    _hashjoin = None


def make_rows(n: int, keys: int, seed: int) -> tuple[list, list]:
    rng = np.random.default_rng(seed)
    build = [(int(k), int(v)) for k, v in zip(rng.integers(0, keys, n // 10), rng.integers(0, 1000, n // 10))]
    probe = [(int(k), int(v), int(w)) for k, v, w in
             zip(rng.integers(0, keys, n), rng.integers(0, 1000, n), rng.integers(0, 1000, n))]
    return build, probe


def bench(impl, build, probe, repeat: int) -> dict:
    table = impl.build_table(build, (0,))
    pad = (None, None)
    cases = {
        "build": lambda: impl.build_table(build, (0,)),
        "probe": lambda: impl.probe_table(probe, (0,), table, False, pad, None),
        "probe_outer": lambda: impl.probe_table(probe, (0,), table, True, pad, None),
        "take": lambda: impl.take(probe, (2, 0)),
    }
    return {name: min(timeit.repeat(fn, number=1, repeat=repeat)) for name, fn in cases.items()}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=200_000)
    ap.add_argument("--keys", type=int, default=5_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    build, probe = make_rows(args.rows, args.keys, args.seed)
    py = bench(_kernels_py, build, probe, args.repeat)
    cy = bench(_hashjoin, build, probe, args.repeat) if _hashjoin else None

    # both implementations must agree before timings mean anything
    if _hashjoin:
        t = _kernels_py.build_table(build, (0,))
        assert _hashjoin.probe_table(probe, (0,), t, True, (None, None), None) == \
            _kernels_py.probe_table(probe, (0,), t, True, (None, None), None)

    print(f"rows={args.rows} build_rows={len(build)} keys={args.keys} best of {args.repeat}")
    print(f"{'kernel':<12} {'python_ms':>10} {'cython_ms':>10} {'speedup':>8}")
    for name, t_py in py.items():
        if cy:
            t_cy = cy[name]
            print(f"{name:<12} {t_py * 1e3:>10.1f} {t_cy * 1e3:>10.1f} {t_py / t_cy:>7.2f}x")
        else:
            print(f"{name:<12} {t_py * 1e3:>10.1f} {'n/a':>10} {'':>8}")
    if not cy:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`")


if __name__ == "__main__":
    main()
