"""
Where a CFA puts its chrominance
================================

A color filter array is a periodic pattern, so its per-channel indicator
functions have a finite Fourier series.  Writing those coefficients in a
luminance / chrominance basis shows which chroma combination rides on which
spatial frequency (a "carrier").  Carriers that sit close to DC compete with
image luminance for the same band, which is where false color comes from.
"""

import math

import numpy as np

from cfalab import CATALOG, analyze_tile, check_degeneracy, make_cfa

PI = math.pi

# Start with Bayer.  Its 2x2 tile has four Fourier bins; each one carries a
# single basis direction with weight 1/4.
bayer = analyze_tile(make_cfa("bayer").tile)
names = bayer.tile.color_system.basis_names
print("Bayer tile:", bayer.tile)
for c in bayer.carriers:
    coords = ", ".join(f"{n}={v.real:+.3f}" for n, v in zip(names, c.basis_coords) if abs(v) > 1e-12)
    print(f"  ({c.freq[0] / PI:+.2f}pi, {c.freq[1] / PI:+.2f}pi): {coords}")

# Quadification (every filter becomes a 2x2 block) compresses the spectrum by
# two: nothing is left at the Nyquist corners, and the chroma copies move to
# half-Nyquist where they are much closer to luminance.
quad = analyze_tile(make_cfa("quad_bayer").tile)
print("\nQuad Bayer carriers (|coefficient| per direction):")
for c in quad.carriers:
    mags = np.abs(c.basis_coords)
    print(f"  ({c.freq[0] / PI:+.2f}pi, {c.freq[1] / PI:+.2f}pi): " +
          "  ".join(f"{n}={m:.3f}" for n, m in zip(names, mags)))


# A tiny text rendering of the carrier layout: L = luminance (DC), digits =
# dominant chroma direction.
def layout(report, cells=9):
    grid = [["." for _ in range(cells)] for _ in range(cells)]
    for c in report.carriers:
        x = int(round((c.freq[0] / PI + 1) / 2 * (cells - 1)))
        y = int(round((c.freq[1] / PI + 1) / 2 * (cells - 1)))
        grid[cells - 1 - y][x] = "L" if c.is_dc else str(c.dominant_direction())
    return "\n".join("   " + " ".join(r) for r in grid)


print("\nBayer layout (wx to the right, wy up, -pi..pi):")
print(layout(bayer))
print("Quad Bayer layout:")
print(layout(quad))

# The degeneracy check asks, for every chroma direction, whether some strong
# copy lies far from DC and clear of the other directions' carriers, and
# whether there is either one copy at the band edge or several to choose from.
print("\nDegeneracy verdicts")
for name in CATALOG:
    v = check_degeneracy(analyze_tile(make_cfa(name).tile))
    detail = ", ".join(f"{d.direction}:{'ok' if d.passed else 'FAIL'}({d.copies})" for d in v.directions)
    print(f"  {name:15s} {'PASS' if v.passed else 'FAIL'}   {detail}")

# Quad Bayer's c2 has no copy far enough from DC.  RGBW-Kodak carries c1 at a
# single frequency, so once luminance leaks there nothing is left to fall back on.
