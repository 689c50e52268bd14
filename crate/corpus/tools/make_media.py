"""Regenerates the synthetic photos under corpus/media and corpus/queries.

Each image is drawn from a seeded random layout so that reruns are
byte-for-byte stable. Requires Pillow.
"""
import math
import random
from pathlib import Path

from PIL import Image, ImageDraw

ROOT = Path(__file__).resolve().parent.parent
SIZE = 128

DISHES = [
    "egg-drop-soup", "bacon-pancakes", "spaghetti-carbonara", "club-sandwich",
    "caprese-salad", "guacamole", "corn-tortillas", "creamy-polenta",
    "peanut-noodles", "teriyaki-salmon", "hummus", "shrimp-tacos",
]


def bacon(shift=0):
    img = Image.new("RGB", (SIZE, SIZE), (250, 235, 215))
    px = img.load()
    for y in range(SIZE):
        for x in range(SIZE):
            xs = x + shift
            wave = 6 * math.sin(xs / 9.0)
            band = int((y + wave) // 11) % 3
            if band == 0:
                px[x, y] = (178, 34, 34)
            elif band == 1:
                px[x, y] = (240, 200, 180)
    return img


def scene(name, slot, slots):
    rng = random.Random(name)
    bg = tuple(rng.randrange(40, 220) for _ in range(3))
    img = Image.new("RGB", (SIZE, SIZE), bg)
    draw = ImageDraw.Draw(img)
    # spread the dominant stripe orientation evenly over the set
    angle = math.pi * (slot + rng.uniform(0.2, 0.8)) / slots
    period = rng.randrange(7, 19)
    stripe = tuple(rng.randrange(0, 256) for _ in range(3))
    dx, dy = math.cos(angle), math.sin(angle)
    for k in range(-SIZE * 2, SIZE * 2, period):
        cx, cy = SIZE / 2 + k * dy, SIZE / 2 - k * dx
        draw.line([(cx - dx * SIZE * 2, cy - dy * SIZE * 2), (cx + dx * SIZE * 2, cy + dy * SIZE * 2)],
                  fill=stripe, width=max(2, period // 3))
    if rng.random() < 0.5:
        # second, crossing stripe family
        angle2 = angle + rng.uniform(math.pi / 4, 3 * math.pi / 4)
        ex, ey = math.cos(angle2), math.sin(angle2)
        period2 = rng.randrange(9, 25)
        colour2 = tuple(rng.randrange(0, 256) for _ in range(3))
        for k in range(-SIZE * 2, SIZE * 2, period2):
            cx, cy = SIZE / 2 + k * ey, SIZE / 2 - k * ex
            draw.line([(cx - ex * SIZE * 2, cy - ey * SIZE * 2), (cx + ex * SIZE * 2, cy + ey * SIZE * 2)],
                      fill=colour2, width=2)
    for _ in range(rng.randrange(2, 6)):
        x0, y0 = rng.randrange(0, SIZE - 30), rng.randrange(0, SIZE - 30)
        w, h = rng.randrange(15, 60), rng.randrange(15, 60)
        colour = tuple(rng.randrange(0, 256) for _ in range(3))
        if rng.random() < 0.5:
            draw.ellipse([x0, y0, x0 + w, y0 + h], fill=colour)
        else:
            draw.rectangle([x0, y0, x0 + w, y0 + h], fill=colour)
    return img


def main():
    media = ROOT / "media"
    (media / "dish").mkdir(parents=True, exist_ok=True)
    (media / "ingredients").mkdir(parents=True, exist_ok=True)
    (ROOT / "queries").mkdir(exist_ok=True)
    names = ["dish:" + d for d in DISHES] + ["ingredient:avocado", "ingredient:salmon"]
    slots = len(names) + 1
    for slot, dish in enumerate(DISHES):
        scene("dish:" + dish, slot, slots).save(media / "dish" / f"{dish}.png", optimize=False)
    bacon().save(media / "ingredients" / "bacon.png", optimize=False)
    for slot, name in enumerate(["avocado", "salmon"], start=len(DISHES)):
        scene("ingredient:" + name, slot, slots).save(media / "ingredients" / f"{name}.png", optimize=False)
    bacon(shift=1).save(ROOT / "queries" / "bacon_shifted.png", optimize=False)


if __name__ == "__main__":
    main()
