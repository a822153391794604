"""Synthetic face renderer: the pipeline's ground-truth oracle.

Rasterizes the template landmarks (boundary ring, eye disks, mouth bar)
as dark marks on a white frame, optionally with additive Gaussian pixel
noise. Deterministic for a given seed, which lets tests compare fitted
parameters against the exact pose that produced the image.
"""

from __future__ import annotations

import math

import numpy as np

from .model import (ELLIPSE_ASPECT, EYE_HEIGHT, EYE_RADIUS, MOUTH_HALF_WIDTH,
                    Frame, TemplateParams)

DARK = 0.1
RING_HALF_WIDTH = 1.0   # px, so the boundary ring is ~2 px wide
MOUTH_HALF_HEIGHT = 1.5  # px


class OutOfFrame(ValueError):
    pass


def landmark_mask(params: TemplateParams, width: int, height: int) -> np.ndarray:
    """Boolean grid of the analytic landmark set (no noise)."""
    ys, xs = np.mgrid[0:height, 0:width]
    dx = xs - params.cx
    dy = ys - params.cy
    cphi = math.cos(params.phi)
    sphi = math.sin(params.phi)
    # inverse rotation into template coordinates
    u = dx * cphi + dy * sphi
    v = -dx * sphi + dy * cphi

    a = ELLIPSE_ASPECT * params.s
    b = params.s
    rho = np.sqrt((u / a) ** 2 + (v / b) ** 2)
    ring = np.abs(rho - 1.0) * min(a, b) <= RING_HALF_WIDTH

    r_eye = EYE_RADIUS * params.s
    ey = EYE_HEIGHT * params.s
    eyes = np.zeros_like(ring)
    for ex in (-params.e * params.s, params.e * params.s):
        eyes |= (u - ex) ** 2 + (v - ey) ** 2 <= r_eye * r_eye

    mouth = (np.abs(u) <= MOUTH_HALF_WIDTH * params.s) & (
        np.abs(v - params.m * params.s) <= MOUTH_HALF_HEIGHT)
    return ring | eyes | mouth


def render_synthetic(params: TemplateParams, width: int, height: int,
                     noise_sigma: float = 0.0, t_ms: int = 0, seed: int = 0) -> Frame:
    """Render the template into a Frame; raises OutOfFrame unless the whole
    face fits with a 5 px margin."""
    reach = params.s + RING_HALF_WIDTH + 1.0
    if (params.cx - reach < 5 or params.cx + reach > width - 6
            or params.cy - reach < 5 or params.cy + reach > height - 6):
        raise OutOfFrame(f"template at ({params.cx:.0f},{params.cy:.0f}) s={params.s:.0f} "
                         f"does not fit a {width}x{height} frame with 5 px margin")
    img = np.ones((height, width), dtype=np.float64)
    img[landmark_mask(params, width, height)] = DARK
    if noise_sigma > 0:
        rng = np.random.RandomState(seed)
        img = np.clip(img + rng.normal(0.0, noise_sigma, img.shape), 0.0, 1.0)
    return Frame(width=width, height=height, intensities=img, t_ms=t_ms)


def blank_frame(width: int, height: int, noise_sigma: float = 0.0,
                t_ms: int = 0, seed: int = 0) -> Frame:
    img = np.ones((height, width), dtype=np.float64)
    if noise_sigma > 0:
        rng = np.random.RandomState(seed)
        img = np.clip(img + rng.normal(0.0, noise_sigma, img.shape), 0.0, 1.0)
    return Frame(width=width, height=height, intensities=img, t_ms=t_ms)
