"""Generate the bundled sample images under data/.

data/low/*.png    dark training images
data/ref/*.png    the same scenes at normal exposure (for eval / ablate)
data/probe.png    an unseen dark image for the brightness check
"""
import argparse
import pathlib

import numpy as np
from PIL import Image

SIZE = 96


def scene(rng: np.random.Generator) -> np.ndarray:
    y, x = np.mgrid[0:SIZE, 0:SIZE] / (SIZE - 1)
    base = rng.uniform(0.25, 0.75, 3)
    tilt = rng.uniform(-0.3, 0.3, (3, 2))
    img = base[:, None, None] + tilt[:, 0, None, None] * x + tilt[:, 1, None, None] * y
    for _ in range(rng.integers(4, 8)):
        cx, cy = rng.uniform(0, 1, 2)
        r = rng.uniform(0.08, 0.3)
        colour = rng.uniform(0.05, 1.0, 3)
        if rng.random() < 0.5:
            mask = (x - cx) ** 2 + (y - cy) ** 2 < r * r
        else:
            mask = (abs(x - cx) < r) & (abs(y - cy) < r * rng.uniform(0.3, 1.0))
        img[:, mask] = colour[:, None]
    freq = rng.uniform(8, 20)
    img += 0.05 * np.sin(2 * np.pi * freq * (x + 0.5 * y))[None]
    return np.clip(img, 0, 1)


def darken(img: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    gain = rng.uniform(0.08, 0.18)
    dark = gain * img ** 1.2 + rng.normal(0, 0.006, img.shape)
    return np.clip(dark, 0, 1)


def save(path: pathlib.Path, img: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    arr = np.floor(img.transpose(1, 2, 0) * 255 + 0.5).astype(np.uint8)
    Image.fromarray(arr, "RGB").save(path)


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    parser.add_argument("--seed", type=int, default=2024)
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    rng = np.random.default_rng(args.seed)
    for i in range(4):
        ref = scene(rng)
        save(out / "ref" / f"scene{i}.png", ref)
        save(out / "low" / f"scene{i}.png", darken(ref, rng))
    save(out / "probe.png", darken(scene(rng), rng))


if __name__ == "__main__":
    main()
