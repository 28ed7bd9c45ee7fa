"""Regenerate data/coffee.pgm from the scikit-image coffee sample."""

import argparse

import numpy as np
from skimage import data, transform


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/coffee.pgm")
    parser.add_argument("--offset", type=int, default=0, help="left edge of the 400-column crop")
    args = parser.parse_args()

    rgb = data.coffee().astype(np.float64)
    gray = rgb @ np.array([0.2125, 0.7154, 0.0721])
    crop = gray[:, args.offset : args.offset + 400]
    resized = transform.resize(crop, (512, 512), anti_aliasing=True, preserve_range=True)
    pixels = np.clip(np.round(resized), 0, 255).astype(np.uint8)
    with open(args.out, "wb") as f:
        f.write(b"P5\n512 512\n255\n")
        f.write(pixels.tobytes())


if __name__ == "__main__":
    main()
