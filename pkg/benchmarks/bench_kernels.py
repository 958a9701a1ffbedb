"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 100000] [--steps 20000] [--repeat 5]

Both paths are imported side by side, so the ``KOBDYN_NUMBA`` flag does not
matter here.  The first numba call (compilation or cache load) is excluded.
"""

import argparse
import timeit

import numpy as np

from kobdyn import ball
from kobdyn._accel import numba_kernels, numpy_kernels


def ball_points(rng, n, q):
    Z = rng.normal(size=(n, q)) + 1j * rng.normal(size=(n, q))
    return 0.99 * Z / np.linalg.norm(Z, axis=1)[:, None] * rng.uniform(size=(n, 1))


def cases(n, steps, rng):
    Z, W = ball_points(rng, n, 3), ball_points(rng, n, 3)
    P, Q = ball.cayley(Z), ball.cayley(W)
    # a rotation of B^2 never leaves the ball or reaches the horizon
    rot = np.diag([np.exp(0.1j), np.exp(0.2j), 1.0])
    return {
        f"ball_distance_pairs n={n}": ("ball_distance_pairs", (Z, W)),
        f"siegel_distance_pairs n={n}": ("siegel_distance_pairs", (P, Q)),
        f"lft_orbit steps={steps}": ("lft_orbit", (rot, np.array([0.3, 0.4j]), steps, 1e100, True)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--steps", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if numba_kernels is None:
        raise SystemExit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':34s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speed-up':>9s} {'max diff':>10s}")
    for label, (name, call_args) in cases(args.n, args.steps, rng).items():
        fast, slow = getattr(numba_kernels, name), getattr(numpy_kernels, name)
        a, b = fast(*call_args), slow(*call_args)
        diff = float(np.max(np.abs(a - b)))
        t_np = min(timeit.repeat(lambda: slow(*call_args), number=1, repeat=args.repeat))
        t_nb = min(timeit.repeat(lambda: fast(*call_args), number=1, repeat=args.repeat))
        print(f"{label:34s} {1e3 * t_np:11.2f} {1e3 * t_nb:11.2f} {t_np / t_nb:8.1f}x {diff:10.2e}")


if __name__ == "__main__":
    main()
