"""Shared test utilities: synthetic stroke images with known properties."""

import numpy as np


def digit_like(rng, size=28):
    """A gray stroke drawing that behaves like a digit scan.

    Guarantees the tests rely on: ink values are in [0.6, 1.0] (safely above
    the 0.5 threshold), background is exactly 0.0 (so padding with
    background never changes the binarization), and at least one ink pixel
    exists.  Deterministic for a given generator state.
    """
    img = np.zeros((size, size))
    for _ in range(int(rng.integers(2, 5))):
        y, x = (float(v) for v in rng.integers(4, size - 4, size=2))
        angle = float(rng.uniform(0.0, 2.0 * np.pi))
        for _ in range(int(rng.integers(size // 2, size))):
            yy, xx = int(round(y)), int(round(x))
            if 1 <= yy < size - 1 and 1 <= xx < size - 1:
                patch = img[yy : yy + 2, xx : xx + 2]
                np.maximum(patch, rng.uniform(0.6, 1.0), out=patch)
            angle += float(rng.normal(0.0, 0.3))
            y += np.sin(angle)
            x += np.cos(angle)
            if not 2.0 <= y < size - 2.0:
                angle = -angle
                y = float(np.clip(y, 2.0, size - 2.0))
            if not 2.0 <= x < size - 2.0:
                angle = np.pi - angle
                x = float(np.clip(x, 2.0, size - 2.0))
    if not (img > 0).any():  # pragma: no cover - the walk always stamps
        img[size // 2, size // 2] = 0.8
    return img


def distinct_glyphs(n=10, size=24):
    """Images whose feature vectors are pairwise distinct under the default
    pipeline: one horizontal bar whose row position and one vertical bar
    whose column position both vary with the index."""
    rng = np.random.default_rng(7)
    images = []
    for i in range(n):
        img = np.zeros((size, size))
        img[2 + i, 2 : size - 2] = 0.9
        img[2 : size - 2, 2 + i] = 0.7
        img[size - 3, 2 : 2 + 2 * i + 1] = 0.8
        images.append(img)
        rng.random()  # keep signature stable if noise is ever added
    return images
