"""CFA patterns, quadification, mosaicking and binning topology.

A pattern is a periodic :class:`CfaTile` plus an ordered chain of
:class:`BinStage` values.  Each stage either merges n x n same-colored blocks
into one value, or merges the two diagonals of every 2x2 block into two
co-sited output planes (plane 0 = main diagonal, plane 1 = anti-diagonal).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .color import LMS, RGB, RGBW, COLOR_SYSTEMS, ColorSystem, Domain, PlanarImage


class CfaError(ValueError):
    pass


class BinMode(str, enum.Enum):
    FLOATING_DIFFUSION = "floating-diffusion"
    DIGITAL = "digital"


FD = BinMode.FLOATING_DIFFUSION
DIGITAL = BinMode.DIGITAL


@dataclass(frozen=True, eq=False)
class CfaTile:
    """One period of a color filter array.

    ``grid[y, x]`` holds the channel index (into ``color_system``) of the
    filter at that position.  Binned planes reuse the parent color system even
    when they contain only a subset of its channels.
    """

    grid: np.ndarray
    color_system: ColorSystem

    def __post_init__(self):
        g = np.array(self.grid, dtype=np.int64)
        if g.ndim != 2 or g.size == 0:
            raise CfaError(f"tile grid must be a non-empty 2D array, got shape {g.shape}")
        if g.min() < 0 or g.max() >= self.color_system.n_channels:
            raise CfaError("tile grid holds a channel index outside the color system")
        g.setflags(write=False)
        object.__setattr__(self, "grid", g)

    @classmethod
    def from_names(cls, rows, cs: ColorSystem) -> "CfaTile":
        if isinstance(rows, str):
            rows = rows.split("/")
        names = [r.split() if isinstance(r, str) else list(r) for r in rows]
        try:
            return cls(np.array([[cs.index(c) for c in r] for r in names]), cs)
        except ValueError as e:
            raise CfaError(f"unknown channel in {rows!r} for {cs.name}") from e

    @property
    def period_y(self) -> int:
        return self.grid.shape[0]

    @property
    def period_x(self) -> int:
        return self.grid.shape[1]

    @property
    def names(self) -> list[list[str]]:
        ch = self.color_system.channel_names
        return [[ch[i] for i in row] for row in self.grid]

    def density(self) -> np.ndarray:
        """Fraction of tile pixels carrying each channel."""
        return np.bincount(self.grid.ravel(), minlength=self.color_system.n_channels) / self.grid.size

    def channels_present(self) -> set[int]:
        return set(int(i) for i in np.unique(self.grid))

    def is_uniform(self) -> bool:
        return len(self.channels_present()) == 1

    def __eq__(self, other):
        if not isinstance(other, CfaTile):
            return NotImplemented
        return self.color_system == other.color_system and np.array_equal(self.grid, other.grid)

    def __hash__(self):
        return hash((self.grid.tobytes(), self.grid.shape, self.color_system.name))

    def __repr__(self):
        return f"CfaTile({' / '.join(' '.join(r) for r in self.names)})"


@dataclass(frozen=True, eq=False)
class BinStage:
    """One binning round applied to ``input_tile``.

    ``groups`` partitions the tile coordinates; ``output_positions[i]`` is the
    (plane, y, x) slot on the decimated grid where group i lands.
    """

    kind: str  # "block" or "diagonal"
    n: int
    mode: BinMode
    input_tile: CfaTile
    groups: tuple
    output_positions: tuple
    output_tiles: tuple

    @classmethod
    def block(cls, tile: CfaTile, n: int, mode: BinMode) -> "BinStage":
        mode = BinMode(mode)
        if n < 2:
            raise CfaError("block binning needs n >= 2")
        if mode is FD and n > 3:
            raise CfaError(f"{n * n}:1 floating-diffusion binning exceeds one shared readout")
        if tile.period_y % n or tile.period_x % n:
            raise CfaError(f"tile period {tile.grid.shape} not divisible by block size {n}")
        groups, outs = [], []
        for by in range(tile.period_y // n):
            for bx in range(tile.period_x // n):
                groups.append(
                    tuple((by * n + dy, bx * n + dx) for dy in range(n) for dx in range(n))
                )
                outs.append((0, by, bx))
        out = CfaTile(tile.grid[::n, ::n], tile.color_system)
        stage = cls("block", n, mode, tile, tuple(groups), tuple(outs), (out,))
        stage._check_monochrome()
        return stage

    @classmethod
    def diagonal(cls, tile: CfaTile, mode: BinMode) -> "BinStage":
        mode = BinMode(mode)
        if tile.period_y % 2 or tile.period_x % 2:
            raise CfaError("diagonal binning needs even tile periods")
        groups, outs = [], []
        for by in range(tile.period_y // 2):
            for bx in range(tile.period_x // 2):
                y, x = 2 * by, 2 * bx
                groups.append(((y, x), (y + 1, x + 1)))
                outs.append((0, by, bx))
                groups.append(((y, x + 1), (y + 1, x)))
                outs.append((1, by, bx))
        cs = tile.color_system
        outs_t = (CfaTile(tile.grid[0::2, 0::2], cs), CfaTile(tile.grid[0::2, 1::2], cs))
        stage = cls("diagonal", 2, mode, tile, tuple(groups), tuple(outs), outs_t)
        stage._check_monochrome()
        return stage

    def _check_monochrome(self):
        g = self.input_tile.grid
        for grp in self.groups:
            if len({int(g[y, x]) for y, x in grp}) != 1:
                raise CfaError(f"bin group {grp} mixes colors in tile {self.input_tile!r}")

    @property
    def fan_in(self) -> int:
        return self.n * self.n if self.kind == "block" else 2

    @property
    def decimation(self) -> int:
        """Linear downscale factor of the output planes."""
        return self.n if self.kind == "block" else 2

    @property
    def n_planes(self) -> int:
        return len(self.output_tiles)

    @property
    def group_shape(self):
        return [self.n, self.n] if self.kind == "block" else "diagonal-pair"

    def with_mode(self, mode: BinMode) -> "BinStage":
        return replace(self, mode=BinMode(mode))

    def to_json(self) -> dict:
        return {
            "mode": self.mode.value,
            "kind": self.kind,
            "group_shape": self.group_shape,
            "fan_in": self.fan_in,
        }


@dataclass(frozen=True, eq=False)
class CfaSpec:
    name: str
    tile: CfaTile
    bin_chain: tuple = ()

    def __post_init__(self):
        cs = self.tile.color_system
        missing = set(range(cs.n_channels)) - self.tile.channels_present()
        if missing:
            raise CfaError(
                f"{self.name}: channels {[cs.channel_names[i] for i in missing]} absent from tile"
            )
        object.__setattr__(self, "bin_chain", tuple(self.bin_chain))
        current = (self.tile,)
        for i, stage in enumerate(self.bin_chain):
            if len(current) != 1 or stage.input_tile != current[0]:
                raise CfaError(f"{self.name}: stage {i} input does not match previous output")
            current = stage.output_tiles

    @property
    def color_system(self) -> ColorSystem:
        return self.tile.color_system

    @property
    def max_rounds(self) -> int:
        return len(self.bin_chain)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "period": [self.tile.period_y, self.tile.period_x],
            "grid": self.tile.names,
            "channels": list(self.color_system.channel_names),
            "color_system": self.color_system.name,
            "bin_chain": [s.to_json() for s in self.bin_chain],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "CfaSpec":
        cs = COLOR_SYSTEMS[doc["color_system"]]
        tile = CfaTile.from_names(doc["grid"], cs)
        stages = []
        current = tile
        for s in doc.get("bin_chain", []):
            if s["kind"] == "block":
                st = BinStage.block(current, int(s["group_shape"][0]), s["mode"])
            else:
                st = BinStage.diagonal(current, s["mode"])
            stages.append(st)
            current = st.output_tiles[0]
        return cls(doc["name"], tile, tuple(stages))

    def __eq__(self, other):
        if not isinstance(other, CfaSpec):
            return NotImplemented
        return self.name == other.name and self.to_json() == other.to_json()

    def __hash__(self):
        return hash(self.name)


def _rebuild_chain(tile: CfaTile, stages, demote: bool) -> list[BinStage]:
    out = []
    current = tile
    for s in stages:
        mode = DIGITAL if demote else s.mode
        if s.kind == "block":
            st = BinStage.block(current, s.n, mode)
        else:
            st = BinStage.diagonal(current, mode)
        out.append(st)
        current = st.output_tiles[0]
    return out


def quadify(spec: CfaSpec, n: int, name: str | None = None) -> CfaSpec:
    """Replace every pixel by an n x n block of the same filter.

    A leading n^2:1 stage is prepended (floating diffusion for n = 2 and 3,
    digital otherwise).  The original stages follow in digital mode, since
    after charge binning their inputs no longer share a floating diffusion.
    """
    if n < 2:
        raise CfaError("quadify needs n >= 2")
    grid = np.kron(spec.tile.grid, np.ones((n, n), dtype=np.int64))
    tile = CfaTile(grid, spec.color_system)
    first = BinStage.block(tile, n, FD if n in (2, 3) else DIGITAL)
    rest = _rebuild_chain(first.output_tiles[0], spec.bin_chain, demote=True)
    return CfaSpec(name or f"quad{n}_{spec.name}", tile, (first, *rest))


def _rgbw_ia_grid(rows=("G R G B", "G B G R")) -> list[list[str]]:
    # every 2x2 tile is [[W, C], [C, W]], so W stays an exact checkerboard
    colors = [r.split() for r in rows]
    ty, tx = len(colors), len(colors[0])
    grid = [["W"] * (2 * tx) for _ in range(2 * ty)]
    for j in range(ty):
        for i in range(tx):
            c = colors[j][i]
            grid[2 * j][2 * i + 1] = c
            grid[2 * j + 1][2 * i] = c
    return grid


def _lms_grid(blocks=(("L", "M"), ("M", "L"), ("L", "M"), ("M", "S"))) -> list[list[str]]:
    # 2x2 arrangement of blocks; each block is (main-diagonal, anti-diagonal)
    grid = [[None] * 4 for _ in range(4)]
    for k, (main, anti) in enumerate(blocks):
        y, x = 2 * (k // 2), 2 * (k % 2)
        grid[y][x] = grid[y + 1][x + 1] = main
        grid[y][x + 1] = grid[y + 1][x] = anti
    return grid


#: Editable base layouts; only the figure-derived RGBW-IA and LMS grids are
#: uncertain, and changing them here changes nothing else.
DEFAULT_GRIDS = {
    "bayer": (RGB, ["G R", "B G"]),
    "rgbw_kodak": (RGBW, ["W B W G", "B W G W", "W G W R", "G W R W"]),
    "rgbw_ia": (RGBW, _rgbw_ia_grid()),
    "lms_single": (LMS, _lms_grid()),
}

CATALOG = (
    "bayer",
    "quad_bayer",
    "nona_bayer",
    "hexadeca_bayer",
    "rgbw_kodak",
    "rgbw_ia",
    "quad_rgbw",
    "lms_single",
    "quad_lms",
)


def _base(name: str, grids) -> CfaSpec:
    cs, rows = grids[name]
    tile = CfaTile.from_names(rows, cs)
    chain = () if name == "bayer" else (BinStage.diagonal(tile, FD),)
    return CfaSpec(name, tile, chain)


def make_cfa(name: str, grids: dict | None = None) -> CfaSpec:
    """Build a catalog pattern by name (see :data:`CATALOG`)."""
    g = dict(DEFAULT_GRIDS)
    if grids:
        g.update(grids)
    if name in g:
        return _base(name, g)
    derived = {
        "quad_bayer": lambda: quadify(_base("bayer", g), 2, "quad_bayer"),
        "nona_bayer": lambda: quadify(_base("bayer", g), 3, "nona_bayer"),
        "hexadeca_bayer": lambda: quadify(make_cfa("quad_bayer", grids), 2, "hexadeca_bayer"),
        "quad_rgbw": lambda: quadify(_base("rgbw_ia", g), 2, "quad_rgbw"),
        "quad_lms": lambda: quadify(_base("lms_single", g), 2, "quad_lms"),
    }
    if name not in derived:
        raise CfaError(f"unknown CFA {name!r}; choose from {', '.join(CATALOG)}")
    return derived[name]()


def tile_after_binning(spec: CfaSpec, rounds: int) -> tuple[CfaTile, ...]:
    """Pattern of each output plane after ``rounds`` bin stages."""
    if not 0 <= rounds <= spec.max_rounds:
        raise CfaError(f"{spec.name} supports 0..{spec.max_rounds} bin rounds, got {rounds}")
    return (spec.tile,) if rounds == 0 else spec.bin_chain[rounds - 1].output_tiles


def total_fan_in(spec: CfaSpec, rounds: int) -> int:
    f = 1
    for s in spec.bin_chain[:rounds]:
        f *= s.fan_in
    return f


def total_decimation(spec: CfaSpec, rounds: int) -> int:
    f = 1
    for s in spec.bin_chain[:rounds]:
        f *= s.decimation
    return f


def channel_index_map(tile: CfaTile, height: int, width: int) -> np.ndarray:
    reps = (-(-height // tile.period_y), -(-width // tile.period_x))
    return np.tile(tile.grid, reps)[:height, :width]


def mosaic_apply(img: PlanarImage, tile: CfaTile) -> PlanarImage:
    """Sample each pixel's own filter channel into a one-channel raw plane."""
    if img.channels != tile.color_system.n_channels:
        raise CfaError(
            f"image has {img.channels} channels, {tile.color_system.name} needs "
            f"{tile.color_system.n_channels}"
        )
    idx = channel_index_map(tile, img.height, img.width)
    raw = np.take_along_axis(img.samples, idx[None], axis=0)
    return PlanarImage(raw, img.domain)


def bin_samples(a: np.ndarray, stage: BinStage) -> list[np.ndarray]:
    """Noiseless binning of a (y, x) array; returns one array per output plane."""
    h, w = a.shape
    d = stage.decimation
    if h % d or w % d:
        raise CfaError(f"mosaic {h}x{w} not divisible by bin stage size {d}")
    a = a.astype(np.float64)
    if stage.kind == "block":
        n = stage.n
        return [a.reshape(h // n, n, w // n, n).sum(axis=(1, 3))]
    return [a[0::2, 0::2] + a[1::2, 1::2], a[0::2, 1::2] + a[1::2, 0::2]]


def bin_apply(mosaic: PlanarImage, stage: BinStage) -> tuple[PlanarImage, ...]:
    """Sum every bin group; emits one plane per stage output (1 or 2)."""
    if mosaic.channels != 1:
        raise CfaError("bin_apply expects a single-plane mosaic")
    return tuple(PlanarImage(p, mosaic.domain) for p in bin_samples(mosaic.samples[0], stage))


def bin_chain_apply(mosaic: PlanarImage, spec: CfaSpec, rounds: int) -> tuple[PlanarImage, ...]:
    planes = (mosaic,)
    tile_after_binning(spec, rounds)
    for stage in spec.bin_chain[:rounds]:
        if len(planes) != 1:
            raise CfaError("cannot bin a multi-plane frame further")
        planes = bin_apply(planes[0], stage)
    return planes


__all__ = [
    "BinMode",
    "BinStage",
    "CATALOG",
    "CfaError",
    "CfaSpec",
    "CfaTile",
    "DEFAULT_GRIDS",
    "DIGITAL",
    "Domain",
    "FD",
    "bin_apply",
    "bin_chain_apply",
    "bin_samples",
    "channel_index_map",
    "make_cfa",
    "mosaic_apply",
    "quadify",
    "tile_after_binning",
    "total_decimation",
    "total_fan_in",
]
