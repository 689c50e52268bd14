"""Independent reference for the grid orientation descriptor.

Writes golden descriptor values for a few committed images so the Rust
implementation can be checked against a second implementation that bins
orientations with atan2 rather than comparisons.

    python3 corpus/tools/descriptor_oracle.py > crates/core/tests/fixtures/descriptor_golden.json
"""

import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from PIL import Image

SIDE, CELL, BINS = 64, 16, 8
ROOT = Path(__file__).resolve().parent.parent
FIXTURES = [
    "media/ingredients/bacon.png",
    "queries/bacon_shifted.png",
    "media/dish/hummus.png",
]


def luma(path):
    img = Image.open(path).convert("RGB")
    w, h = img.size
    px = img.load()
    plane = [0.299 * px[x, y][0] + 0.587 * px[x, y][1] + 0.114 * px[x, y][2] for y in range(h) for x in range(w)]
    return w, h, plane


def coords(dst, length):
    s = (dst + 0.5) * length / SIDE - 0.5
    s = min(max(s, 0.0), length - 1)
    i0 = math.floor(s)
    return i0, min(i0 + 1, length - 1), s - i0


def lerp(a, b, t):
    return a + (b - a) * t


def resample(w, h, src):
    out = [0.0] * (SIDE * SIDE)
    for y in range(SIDE):
        y0, y1, fy = coords(y, h)
        for x in range(SIDE):
            x0, x1, fx = coords(x, w)
            top = lerp(src[y0 * w + x0], src[y0 * w + x1], fx)
            bottom = lerp(src[y1 * w + x0], src[y1 * w + x1], fx)
            out[y * SIDE + x] = lerp(top, bottom, fy)
    return out


def orientation_bin(gx, gy):
    theta = math.degrees(math.atan2(gy, gx)) % 360.0
    b = min(int(theta // 45.0), BINS - 1)
    edge = round(theta / 45.0)
    if abs(theta - 45.0 * edge) < 1e-6 and edge % 2 == 1:
        # atan2 can round an angle a hair off a diagonal onto it; settle the
        # side exactly: the angle is past the diagonal iff |gy| >= |gx| in
        # quadrants 0 and 2, |gx| >= |gy| in quadrants 1 and 3.
        quadrant = (edge // 2) % 4
        ax, ay = abs(Fraction(gx)), abs(Fraction(gy))
        past = ay >= ax if quadrant in (0, 2) else ax >= ay
        b = 2 * quadrant + (1 if past else 0)
    return b


def describe(path):
    w, h, plane = luma(path)
    px = resample(w, h, plane)
    at = lambda x, y: px[y * SIDE + x]
    hist = [0.0] * (16 * BINS)
    for y in range(SIDE):
        for x in range(SIDE):
            gx = at(min(x + 1, SIDE - 1), y) - at(max(x - 1, 0), y)
            gy = at(x, min(y + 1, SIDE - 1)) - at(x, max(y - 1, 0))
            if gx == 0.0 and gy == 0.0:
                continue
            b = orientation_bin(gx, gy)
            cell = (y // CELL) * (SIDE // CELL) + x // CELL
            hist[cell * BINS + b] += math.sqrt(gx * gx + gy * gy)
    norm = math.sqrt(sum(v * v for v in hist))
    return [v / norm for v in hist] if norm > 0 else hist


def main():
    golden = {rel: describe(ROOT / rel) for rel in FIXTURES}
    json.dump(golden, sys.stdout, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
