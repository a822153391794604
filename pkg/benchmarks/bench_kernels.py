#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Usage: python benchmarks/bench_kernels.py [--frames N]
"""

import argparse
import time

from examgrid.gesture import TemplateParams, render_synthetic
from examgrid.gesture import _kernels_py
from examgrid.gesture import fitting
from examgrid.gesture.model import EnergyConfig

try:
    from examgrid.gesture import _kernels as _compiled
except ImportError:
    _compiled = None


def time_call(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_backend(name, impl, frame, cfg, n_fits):
    img = frame.intensities
    t_fields = time_call(impl.gaussian_fields, img, cfg.sigma)
    valley, edge = impl.gaussian_fields(img, cfg.sigma)
    t_energy = time_call(
        impl.energy_eval, valley, edge, 80.0, 60.0, 30.0, 0.05, 0.5, 0.6,
        cfg.w1, cfg.w2, cfg.w3, cfg.w4, cfg.w5, cfg.e0, cfg.m0, cfg.n_ell,
        repeat=50)

    fitting.kernels = impl
    t0 = time.perf_counter()
    for i in range(n_fits):
        fitting.fit(frame, cfg)
    t_fit = (time.perf_counter() - t0) / n_fits

    print(f"{name:10s}  fields {t_fields * 1e3:8.2f} ms   "
          f"energy {t_energy * 1e6:8.1f} us   full fit {t_fit * 1e3:8.1f} ms")
    return t_fit


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--fits", type=int, default=10, help="fits per backend")
    args = parser.parse_args()

    cfg = EnergyConfig()
    truth = TemplateParams(cx=80.0, cy=60.0, s=30.0, phi=0.05, e=0.5, m=0.6)
    frame = render_synthetic(truth, 160, 120, noise_sigma=0.02, seed=0)

    print(f"frame 160x120, sigma={cfg.sigma}, n_ell={cfg.n_ell}, {args.fits} fits per backend\n")
    t_pure = bench_backend("pure", _kernels_py, frame, cfg, args.fits)
    if _compiled is None:
        print("compiled   (not built; pip install -e . to build the extension)")
        return
    t_comp = bench_backend("compiled", _compiled, frame, cfg, args.fits)
    print(f"\nspeedup (full fit): {t_pure / t_comp:.1f}x")


if __name__ == "__main__":
    main()
