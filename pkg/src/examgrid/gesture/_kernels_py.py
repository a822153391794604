"""Pure-Python (numpy) implementations of the hot kernels.

Mirrors _kernels.pyx: same Gaussian radius, same clamp-to-edge borders,
same accumulation order in the separable passes, so the two backends
produce matching fields. Energy sums are vectorized here and sequential
in the compiled path; they agree to float rounding.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "pure"

_circle_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _kernel_1d(sigma: float) -> tuple[np.ndarray, float]:
    """Unnormalized Gaussian taps and their sum. Normalizing by a single
    divide at the end of each pass keeps constant images bit-exact
    (the accumulator of a constant-1 row reproduces the sum itself)."""
    radius = max(1, math.ceil(3.0 * sigma))
    ks = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(ks * ks) / (2.0 * sigma * sigma))
    total = 0.0
    for v in w:
        total += float(v)
    return w, total


def _smooth_axis(img: np.ndarray, weights: np.ndarray, total: float, axis: int) -> np.ndarray:
    """One separable pass with clamp-to-edge, accumulating k = -r..r in order."""
    radius = (len(weights) - 1) // 2
    n = img.shape[axis]
    idx = np.arange(n)
    out = np.zeros_like(img)
    for j, k in enumerate(range(-radius, radius + 1)):
        src = np.clip(idx + k, 0, n - 1)
        out += weights[j] * np.take(img, src, axis=axis)
    out /= total
    return out


def gaussian_fields(img: np.ndarray, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """Valley and edge potentials from one intensity grid.

    valley = G_sigma * (1 - I) which, with a normalized kernel and
    clamp-to-edge borders, equals 1 - G_sigma * I; edge = |grad(G_sigma * I)|
    by central differences with clamped borders.
    """
    weights, total = _kernel_1d(sigma)
    smooth = _smooth_axis(
        _smooth_axis(np.ascontiguousarray(img, dtype=np.float64), weights, total, 1),
        weights, total, 0)
    valley = 1.0 - smooth
    h, w = smooth.shape
    xs = np.arange(w)
    ys = np.arange(h)
    gx = (smooth[:, np.clip(xs + 1, 0, w - 1)] - smooth[:, np.clip(xs - 1, 0, w - 1)]) * 0.5
    gy = (smooth[np.clip(ys + 1, 0, h - 1), :] - smooth[np.clip(ys - 1, 0, h - 1), :]) * 0.5
    edge = np.sqrt(gx * gx + gy * gy)
    return valley, edge


def _bilinear(field: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinear samples; any corner outside the grid contributes 0."""
    h, w = field.shape
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    fx = xs - x0
    fy = ys - y0
    total = np.zeros_like(xs)
    for dx, dy, wgt in (
        (0, 0, (1.0 - fx) * (1.0 - fy)),
        (1, 0, fx * (1.0 - fy)),
        (0, 1, (1.0 - fx) * fy),
        (1, 1, fx * fy),
    ):
        cx = x0 + dx
        cy = y0 + dy
        inside = (cx >= 0) & (cx < w) & (cy >= 0) & (cy < h)
        vals = np.zeros_like(xs)
        vals[inside] = field[cy[inside], cx[inside]]
        total += wgt * vals
    return total


def _unit_circle(n: int) -> tuple[np.ndarray, np.ndarray]:
    cached = _circle_cache.get(n)
    if cached is None:
        t = 2.0 * math.pi * np.arange(n) / n
        cached = (np.cos(t), np.sin(t))
        _circle_cache[n] = cached
    return cached


def energy_eval(
    valley: np.ndarray, edge: np.ndarray,
    cx: float, cy: float, s: float, phi: float, e: float, m: float,
    w1: float, w2: float, w3: float, w4: float, w5: float,
    e0: float, m0: float, n_ell: int,
) -> float:
    cphi = math.cos(phi)
    sphi = math.sin(phi)

    # ring samples the valley field: the drawn boundary is a dark line whose
    # valley ridge lies on the boundary itself (see _kernels.pyx note)
    cos_t, sin_t = _unit_circle(n_ell)
    ex_l = 0.7 * s * cos_t
    ey_l = s * sin_t
    ring = _bilinear(valley, cx + ex_l * cphi - ey_l * sphi, cy + ex_l * sphi + ey_l * cphi)

    eye_lx = np.array([-e * s, e * s])
    eye_ly = np.array([-0.35 * s, -0.35 * s])
    eyes = _bilinear(valley, cx + eye_lx * cphi - eye_ly * sphi, cy + eye_lx * sphi + eye_ly * cphi)

    mx_l = np.linspace(-0.3 * s, 0.3 * s, 9)
    my_l = np.full(9, m * s)
    mouth = _bilinear(valley, cx + mx_l * cphi - my_l * sphi, cy + mx_l * sphi + my_l * cphi)

    return float(
        -w1 * ring.mean()
        - w2 * eyes.mean()
        - w3 * mouth.mean()
        + w4 * ((e - e0) ** 2 + (m - m0) ** 2)
        + w5 * phi * phi
    )
