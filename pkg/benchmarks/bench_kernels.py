"""Compare the numba and pure-numpy variants of the hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Both variants are importable regardless of TSDISTILL_NO_NUMBA; the flag
only decides which one the library calls. Compile time is excluded by a
warm-up call.
"""

import argparse
import time

import numpy as np

from tsdistill import _kernels as K


def best_of(fn, repeat):
    fn()  # warm-up, triggers jit compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    rng = np.random.default_rng(0)

    cases = []
    # FFT core as used inside the spectral loss: B*C rows of length 256 (S=96 via chirp-z)
    for rows, n in ((96, 256), (96, 1024), (8, 4096)):
        x = rng.standard_normal((rows, n)) + 0j
        cases.append((f"fft_pow2 {rows}x{n}", lambda x=x: K.fft_pow2_numpy(x), lambda x=x: K.fft_pow2_numba(x)))
    # decomposition moving average over [B, C, T]
    for T in (192, 720):
        x = rng.standard_normal((32, 7, T))
        cases.append(
            (f"moving_average 32x7x{T} k=25", lambda x=x: K.moving_average_numpy(x, 25), lambda x=x: K.moving_average_numba(x, 25))
        )

    print(f"active backend: {K.BACKEND}")
    print(f"{'kernel':34s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name, f_np, f_nb in cases:
        a, b = f_np(), f_nb()
        assert np.allclose(a, b, atol=1e-9), name
        t_np, t_nb = best_of(f_np, args.repeat), best_of(f_nb, args.repeat)
        print(f"{name:34s} {t_np * 1e3:10.3f} {t_nb * 1e3:10.3f} {t_np / t_nb:8.2f}")


if __name__ == "__main__":
    main()
