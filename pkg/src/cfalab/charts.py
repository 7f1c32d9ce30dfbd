"""Synthetic test charts, all grayscale encoded-sRGB replicated to RGB."""

from __future__ import annotations

import math

import numpy as np

from .color import Domain, PlanarImage

CHART_KINDS = ("czp", "siemens", "gray_ramp", "text_proxy", "gray")
MIN_SIZE = 64


def czp_alpha(size: int) -> float:
    """Chirp rate putting the local frequency 2*alpha*r at pi at the farthest corner."""
    c = size // 2
    return math.pi / (2.0 * math.hypot(c, c))


def _grid(size):
    c = size // 2
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    return x - c, y - c


def czp(size: int, alpha: float | None = None) -> np.ndarray:
    x, y = _grid(size)
    a = czp_alpha(size) if alpha is None else alpha
    return 0.5 + 0.5 * np.cos(a * (x * x + y * y))


def siemens(size: int, spokes: int = 36) -> np.ndarray:
    x, y = _grid(size)
    return 0.5 + 0.5 * np.cos(spokes * np.arctan2(y, x))


def gray_ramp(size: int, lo: float = 0.05, hi: float = 0.95) -> np.ndarray:
    return np.broadcast_to(np.linspace(lo, hi, size)[None, :], (size, size)).copy()


def text_proxy(size: int, seed: int = 0, density: float = 0.35, stroke: int = 1) -> np.ndarray:
    """Dark glyph-like strokes on paper white: short random horizontal and
    vertical bars laid out on text lines, roughly the texture of newsprint."""
    rng = np.random.default_rng(seed)
    img = np.full((size, size), 0.95)
    line_h, glyph_w = 9, 6
    for top in range(2, size - line_h, line_h + 3):
        for left in range(2, size - glyph_w, glyph_w + 1):
            if rng.random() > 0.85:  # word gap
                continue
            cell = img[top : top + line_h, left : left + glyph_w]
            for _ in range(rng.integers(2, 5)):
                if rng.random() < 0.5:
                    r = rng.integers(0, line_h - stroke + 1)
                    c0, c1 = sorted(rng.integers(0, glyph_w + 1, 2))
                    cell[r : r + stroke, c0 : max(c1, c0 + 2)] = 0.08
                else:
                    c = rng.integers(0, glyph_w - stroke + 1)
                    r0, r1 = sorted(rng.integers(0, line_h + 1, 2))
                    cell[r0 : max(r1, r0 + 3), c : c + stroke] = 0.08
            if rng.random() < density * 0.2:
                cell[:] = np.where(rng.random(cell.shape) < 0.5, cell, 0.08)
    return img


def generate_chart(kind: str, size: int = 512, **params) -> PlanarImage:
    """Chart ``kind`` as a size x size encoded-sRGB image with R = G = B."""
    if not isinstance(size, (int, np.integer)) or size < MIN_SIZE:
        raise ValueError(f"chart size must be an integer >= {MIN_SIZE}, got {size!r}")
    if kind == "czp":
        g = czp(size, params.get("alpha"))
    elif kind == "siemens":
        g = siemens(size, params.get("spokes", 36))
    elif kind == "gray_ramp":
        g = gray_ramp(size, params.get("lo", 0.05), params.get("hi", 0.95))
    elif kind == "text_proxy":
        g = text_proxy(size, params.get("seed", 0), params.get("density", 0.35))
    elif kind == "gray":
        g = np.full((size, size), params.get("level", 0.5))
    else:
        raise ValueError(f"unknown chart {kind!r}; choose from {', '.join(CHART_KINDS)}")
    g = np.clip(g, 0.0, 1.0)
    return PlanarImage(np.repeat(g[None], 3, axis=0), Domain.ENCODED_SRGB)
