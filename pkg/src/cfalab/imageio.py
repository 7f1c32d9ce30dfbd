"""Image file I/O: PNG (8/16-bit), binary netpbm (PGM/PPM) and raw float dumps.

Loaded images are tagged encoded-sRGB unless a ``<file>.json`` sidecar names
another domain.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import png

from .color import Domain, PlanarImage


class ImageIOError(OSError):
    pass


def _sidecar_domain(path: Path) -> Domain:
    side = path.with_name(path.name + ".json")
    if side.exists():
        doc = json.loads(side.read_text())
        if "domain" in doc:
            return Domain(doc["domain"])
    return Domain.ENCODED_SRGB


def _read_netpbm(path: Path) -> tuple[np.ndarray, int]:
    data = path.read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while data[pos : pos + 1] not in (b"\n", b""):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1
    magic, w, h, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic not in (b"P5", b"P6"):
        raise ImageIOError(f"{path}: only binary P5/P6 netpbm is supported")
    ch = 1 if magic == b"P5" else 3
    dtype = ">u1" if maxval < 256 else ">u2"
    arr = np.frombuffer(data, dtype=dtype, count=w * h * ch, offset=pos)
    return arr.reshape(h, w, ch).transpose(2, 0, 1), maxval


def _read_png(path: Path) -> tuple[np.ndarray, int]:
    w, h, rows, info = png.Reader(filename=str(path)).asDirect()
    planes = info["planes"]
    arr = np.vstack([np.asarray(r, dtype=np.uint16) for r in rows]).reshape(h, w, planes)
    if info.get("alpha"):
        arr = arr[..., :-1]
    return arr.transpose(2, 0, 1), (1 << info["bitdepth"]) - 1


def read_image_codes(path) -> tuple[np.ndarray, int]:
    """Integer codes as (channel, y, x) plus the format's peak code value."""
    path = Path(path)
    if not path.exists():
        raise ImageIOError(f"no such image: {path}")
    suffix = path.suffix.lower()
    if suffix == ".png":
        return _read_png(path)
    if suffix in (".ppm", ".pgm", ".pnm"):
        return _read_netpbm(path)
    raise ImageIOError(f"unsupported image format: {path.suffix}")


def read_image(path) -> PlanarImage:
    codes, peak = read_image_codes(path)
    return PlanarImage(codes.astype(np.float64) / peak, _sidecar_domain(Path(path)))


def _to_codes(samples: np.ndarray, bits: int) -> np.ndarray:
    peak = (1 << bits) - 1
    return np.round(np.clip(samples, 0.0, 1.0) * peak).astype(np.uint16 if bits > 8 else np.uint8)


def write_codes(path, codes: np.ndarray, bits: int) -> Path:
    """Write integer codes shaped (channel, y, x) with 1 or 3 channels."""
    path = Path(path)
    codes = np.asarray(codes)
    ch, h, w = codes.shape
    if ch not in (1, 3):
        raise ImageIOError(f"can only write 1 or 3 channels, got {ch}")
    if codes.max(initial=0) >= (1 << bits):
        raise ImageIOError(f"code values exceed {bits}-bit range")
    hwc = codes.transpose(1, 2, 0)
    suffix = path.suffix.lower()
    if suffix == ".png":
        writer = png.Writer(w, h, greyscale=(ch == 1), bitdepth=bits)
        with open(path, "wb") as f:
            writer.write(f, hwc.reshape(h, w * ch).astype(np.uint16 if bits > 8 else np.uint8))
    elif suffix in (".ppm", ".pgm", ".pnm"):
        magic = "P5" if ch == 1 else "P6"
        dtype = ">u2" if bits > 8 else "u1"
        header = f"{magic}\n{w} {h}\n{(1 << bits) - 1}\n".encode()
        path.write_bytes(header + hwc.astype(dtype).tobytes())
    else:
        raise ImageIOError(f"unsupported image format: {path.suffix}")
    return path


def write_image(path, img: PlanarImage, bits: int = 8) -> Path:
    """Write a [0, 1] image as 8- or 16-bit PNG/PPM/PGM."""
    if bits not in (8, 16):
        raise ImageIOError("bits must be 8 or 16")
    path = write_codes(path, _to_codes(img.samples, bits), bits)
    if img.domain is not Domain.ENCODED_SRGB:
        path.with_name(path.name + ".json").write_text(json.dumps({"domain": img.domain.value}))
    return path


def write_raw(path, img: PlanarImage) -> Path:
    """Little-endian float32 dump with a JSON sidecar holding shape and domain."""
    path = Path(path)
    path.write_bytes(img.samples.astype("<f4").tobytes())
    meta = {"shape": list(img.shape), "dtype": "float32-le", "domain": img.domain.value}
    path.with_name(path.name + ".json").write_text(json.dumps(meta))
    return path


def read_raw(path) -> PlanarImage:
    path = Path(path)
    meta = json.loads(path.with_name(path.name + ".json").read_text())
    arr = np.frombuffer(path.read_bytes(), dtype="<f4").reshape(meta["shape"])
    return PlanarImage(arr, Domain(meta["domain"]))
