"""cfalab: spectral analysis, binning simulation and demosaicking for binnable color filter arrays."""

from .color import (
    COLOR_SYSTEMS,
    LMS,
    RGB,
    RGBW,
    ColorMatrix,
    ColorSystem,
    Domain,
    PlanarImage,
    basis_to_channels,
    channels_to_basis,
    psnr,
    srgb_decode,
    srgb_encode,
)
from .cfa import CATALOG, DIGITAL, FD, BinMode, BinStage, CfaSpec, CfaTile, make_cfa, quadify, tile_after_binning
from .spectrum import analyze_tile, check_degeneracy
from .sensor import OpticsConfig, RawFrame, SensorConfig, expose_and_read
from .demosaic import FilterBankConfig, build_plan, demosaic
from .snr import advantage_table, readout_cost

__version__ = "0.1.0"
