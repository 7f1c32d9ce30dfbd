"""Post-demosaic clean-up: false-color suppression and chroma denoising.

Both steps only touch chrominance.  False-color suppression median-filters the
chroma planes of the (l, c1, ...) basis; chroma denoising low-passes color
differences against a guide plane (W for RGBW systems, luminance otherwise).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .color import ColorSystem, PlanarImage


@dataclass(frozen=True)
class PostprocessConfig:
    false_color: bool = True
    median_size: int = 5
    denoise: bool = True
    sigma: float = 2.0
    # None: denoise first only for binned RGBW (W guide is cleanest before upsampling)
    denoise_first: bool | None = None

    def __post_init__(self):
        if self.median_size < 1 or self.median_size % 2 == 0:
            raise ValueError("median_size must be odd and >= 1")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    @classmethod
    def off(cls) -> "PostprocessConfig":
        return cls(false_color=False, denoise=False)


def _to_basis(img: PlanarImage, cs: ColorSystem) -> np.ndarray:
    if img.channels != cs.n_channels:
        raise ValueError(f"{cs.name} image needs {cs.n_channels} channels, got {img.channels}")
    return np.tensordot(cs.basis_matrix, img.samples.astype(np.float64), axes=(1, 0))


def _from_basis(coords: np.ndarray, cs: ColorSystem) -> np.ndarray:
    return np.tensordot(cs.basis_inverse, coords, axes=(1, 0))


def suppress_false_color(img: PlanarImage, cs: ColorSystem, cfg: PostprocessConfig = PostprocessConfig()) -> PlanarImage:
    """Median-filter the chroma planes; the luminance plane is left as is."""
    coords = _to_basis(img, cs)
    filtered = coords.copy()
    for i in range(1, cs.n_channels):
        filtered[i] = ndimage.median_filter(coords[i], cfg.median_size, mode="mirror")
    if np.array_equal(filtered, coords):
        return img
    return img.with_samples(_from_basis(filtered, cs))


def denoise_chroma(img: PlanarImage, cs: ColorSystem, guide: np.ndarray | None = None,
                   cfg: PostprocessConfig = PostprocessConfig()) -> PlanarImage:
    """Gaussian low-pass of color differences relative to a guide plane.

    RGBW: the differences R-W, G-W, B-W are smoothed and W is added back, so
    the W plane passes through untouched (``guide`` overrides W as the
    reference).  Other systems smooth the chroma basis planes and keep l.
    """
    s = img.samples.astype(np.float64)
    if cfg.sigma == 0:
        return img
    if "W" in cs.channel_names:
        wi = cs.index("W")
        g = s[wi] if guide is None else np.asarray(guide, dtype=np.float64)
        out = s.copy()
        for c in range(cs.n_channels):
            if c != wi:
                out[c] = ndimage.gaussian_filter(s[c] - g, cfg.sigma, mode="mirror") + g
        return img.with_samples(out)
    coords = _to_basis(img, cs)
    for i in range(1, cs.n_channels):
        coords[i] = ndimage.gaussian_filter(coords[i], cfg.sigma, mode="mirror")
    return img.with_samples(_from_basis(coords, cs))


def postprocess(img: PlanarImage, cs: ColorSystem, cfg: PostprocessConfig = PostprocessConfig(),
                binned_w: bool = False) -> PlanarImage:
    first = cfg.denoise_first if cfg.denoise_first is not None else binned_w
    steps = []
    if cfg.false_color:
        steps.append(lambda x: suppress_false_color(x, cs, cfg))
    if cfg.denoise:
        steps.insert(0 if first else len(steps), lambda x: denoise_chroma(x, cs, cfg=cfg))
    for step in steps:
        img = step(img)
    return img
