"""Export a ready-to-use PGM digit corpus from scikit-learn's bundled digits.

The bundled corpus ships 1797 labeled 8x8 gray glyphs.  Export upscales each
one bilinearly by ``scale`` (default 8, giving 64x64), writes it as an 8-bit
binary PGM with bright ink on dark ground (so the pipeline default
``polarity="light"`` applies), and writes an index file next to the images.
The export is fully deterministic: no randomness, byte-identical on every
run.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .model_io import write_index
from .raster import write_pgm

SOURCE_MAXVAL = 16  # the bundled 8x8 glyphs use integer levels 0..16


def export_digits_corpus(dest_dir, scale: int = 8) -> Path:
    """Write the corpus under ``dest_dir`` and return the index file path.

    Layout: ``images/<label>/<ordinal>.pgm`` plus ``index.txt``.
    """
    from scipy.ndimage import zoom
    from sklearn.datasets import load_digits

    if scale < 1:
        raise ValueError(f"scale must be >= 1, got {scale}")
    dest = Path(dest_dir)
    digits = load_digits()
    entries = []
    for ordinal, (glyph, label) in enumerate(zip(digits.images, digits.target)):
        gray = glyph / SOURCE_MAXVAL
        if scale > 1:
            gray = np.clip(zoom(gray, scale, order=1), 0.0, 1.0)
        path = dest / "images" / str(int(label)) / f"{ordinal:04d}.pgm"
        path.parent.mkdir(parents=True, exist_ok=True)
        write_pgm(path, gray, maxval=255)
        entries.append((path, int(label)))
    index_path = dest / "index.txt"
    write_index(index_path, entries)
    return index_path
