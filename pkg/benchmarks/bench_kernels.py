"""Compare the numba and numpy kernel backends.

Both implementations live in ``erange.kernels`` regardless of the
``ERANGE_DISABLE_NUMBA`` flag, so a single process can time them side by side.
The end-to-end section times a phase-shift curve with whichever backend the
flag selected.

    python3 benchmarks/bench_kernels.py --sizes 1000,10000,100000
    ERANGE_DISABLE_NUMBA=1 python3 benchmarks/bench_kernels.py --end-to-end
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from erange import kernels
from erange._accel import HAVE_NUMBA, backend


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def make_inputs(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    h = rng.uniform(1e-3, 5e-2, n)
    U = rng.uniform(-4.0, 4.0, (n, 3))
    return h, U


def bench_kernels(sizes, repeat: int) -> None:
    print(f"{'kernel':<22}{'n':>9}{'numpy [ms]':>13}{'numba [ms]':>13}{'speedup':>10}{'max |diff|':>13}")
    for n in sizes:
        h, U = make_inputs(n)
        pairs = []
        E_np, q_np = kernels.magnus_propagators_numpy(h, U)
        pairs.append(("magnus_propagators", lambda: kernels.magnus_propagators_numpy(h, U),
                      lambda: kernels.magnus_propagators_numba(h, U),
                      lambda a, b: np.max(np.abs(a[0] - b[0]))))
        y0 = np.array([1e-8, 1.0])
        pairs.append(("sweep", lambda: kernels.sweep_numpy(E_np, q_np, y0, False),
                      lambda: kernels.sweep_numba(E_np, q_np, y0, False),
                      lambda a, b: np.max(np.abs(a[1] - b[1]))))
        tot = np.sin(np.arange(n, dtype=float))
        ratio = np.exp(-np.abs(np.cos(np.arange(n, dtype=float))) * 1e-3)
        pairs.append(("rescaled_cumsum", lambda: kernels.rescaled_cumsum_numpy(tot, ratio),
                      lambda: kernels.rescaled_cumsum_numba(tot, ratio),
                      lambda a, b: np.max(np.abs(a - b))))
        for name, f_np, f_nb, diff in pairs:
            t_np = best_of(f_np, repeat)
            if HAVE_NUMBA:
                f_nb()  # compile outside the timed region
                t_nb = best_of(f_nb, repeat)
                d = diff(f_np(), f_nb())
                print(f"{name:<22}{n:>9}{1e3 * t_np:>13.3f}{1e3 * t_nb:>13.3f}{t_np / t_nb:>10.1f}{d:>13.2e}")
            else:
                print(f"{name:<22}{n:>9}{1e3 * t_np:>13.3f}{'n/a':>13}{'':>10}{'':>13}")


def bench_end_to_end(repeat: int) -> None:
    from erange import SquareBarrier, phase_shift_curve

    pot = SquareBarrier(4.0, 1.0)
    k = np.geomspace(0.01, 10.0, 30)
    phase_shift_curve(pot, 0, k, "matching", workers=1)
    t = best_of(lambda: phase_shift_curve(pot, 0, k, "matching", workers=1), repeat)
    print(f"phase_shift_curve (30 k, backend={backend()}): {1e3 * t:.1f} ms")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--sizes", default="1000,10000,100000")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    print(f"numba available: {HAVE_NUMBA}")
    bench_kernels(sizes, args.repeat)
    if args.end_to_end:
        bench_end_to_end(args.repeat)


if __name__ == "__main__":
    main()
