"""Grayscale image I/O and binary raster operations.

Images move through the pipeline in two representations:

* gray image: 2-D float64 array with values in [0, 1], where 1.0 is the
  brightest sample the source format could express;
* bit image: 2-D bool array, True marking ink (foreground) pixels.

The module reads and writes PGM (both the ASCII ``P2`` and binary ``P5``
variants), converts gray images to bit images, and thins bit images to
one-pixel-wide skeletons.
"""

from __future__ import annotations

import numpy as np

_WHITESPACE = b" \t\n\r\x0b\x0c"

POLARITIES = ("dark", "light")


class PgmError(ValueError):
    """Malformed PGM payload.  ``offset`` is the byte position of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte {offset})")
        self.offset = offset


def check_gray_image(img) -> np.ndarray:
    """Validate and return ``img`` as a 2-D float64 array with values in [0, 1]."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"gray image must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("gray image must not be empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("gray image contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("gray image values must lie in [0, 1]")
    return arr


def check_bit_image(bits) -> np.ndarray:
    """Validate and return ``bits`` as a 2-D bool array."""
    arr = np.asarray(bits)
    if arr.dtype != np.bool_:
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("bit image values must be boolean or 0/1")
        arr = arr.astype(bool)
    if arr.ndim != 2:
        raise ValueError(f"bit image must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("bit image must not be empty")
    return arr


class _Cursor:
    """Byte-offset-tracking tokenizer for PGM headers and ASCII rasters."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _skip_separators(self) -> None:
        data = self.data
        n = len(data)
        while self.pos < n:
            b = data[self.pos]
            if b in _WHITESPACE:
                self.pos += 1
            elif b == 0x23:  # '#' comment runs to end of line
                nl = data.find(b"\n", self.pos)
                self.pos = n if nl < 0 else nl + 1
            else:
                return

    def token(self, what: str) -> tuple[bytes, int]:
        """Return the next token and its start offset."""
        self._skip_separators()
        if self.pos >= len(self.data):
            raise PgmError(f"unexpected end of data, expected {what}", len(self.data))
        start = self.pos
        data = self.data
        n = len(data)
        while self.pos < n and data[self.pos] not in _WHITESPACE and data[self.pos] != 0x23:
            self.pos += 1
        return data[start:self.pos], start

    def int_token(self, what: str) -> tuple[int, int]:
        tok, start = self.token(what)
        if not tok.isdigit():
            raise PgmError(f"expected {what}, got {tok!r}", start)
        return int(tok), start


def decode_pgm(data: bytes) -> np.ndarray:
    """Decode a PGM byte sequence into a gray image.

    Supports ``P2`` (ASCII) and ``P5`` (binary) with maxval up to 65535;
    two-byte ``P5`` samples are big-endian.  Samples are scaled by the
    declared maxval, so the result always lies in [0, 1].

    Raises
    ------
    PgmError
        On malformed magic, non-positive dimensions, a bad maxval, an
        out-of-range sample, or a truncated raster.  The error carries the
        byte offset of the fault.
    """
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise TypeError("decode_pgm expects a byte sequence")
    data = bytes(data)
    cur = _Cursor(data)
    magic, start = cur.token("magic number")
    if magic not in (b"P2", b"P5"):
        raise PgmError(f"not a PGM payload, magic {magic!r}", start)
    width, off = cur.int_token("width")
    if width < 1:
        raise PgmError("width must be positive", off)
    height, off = cur.int_token("height")
    if height < 1:
        raise PgmError("height must be positive", off)
    maxval, off = cur.int_token("maxval")
    if not 1 <= maxval <= 65535:
        raise PgmError(f"maxval {maxval} outside [1, 65535]", off)

    count = width * height
    if magic == b"P5":
        # Exactly one whitespace byte separates the maxval from the raster.
        if cur.pos >= len(data) or data[cur.pos] not in _WHITESPACE:
            raise PgmError("expected single whitespace before raster", cur.pos)
        cur.pos += 1
        itemsize = 1 if maxval < 256 else 2
        need = count * itemsize
        if len(data) - cur.pos < need:
            raise PgmError(
                f"truncated raster, need {need} bytes, have {len(data) - cur.pos}",
                len(data),
            )
        dtype = np.uint8 if itemsize == 1 else np.dtype(">u2")
        samples = np.frombuffer(data, dtype=dtype, count=count, offset=cur.pos)
        if samples.max(initial=0) > maxval:
            bad = int(np.argmax(samples > maxval))
            raise PgmError(
                f"sample {int(samples[bad])} exceeds maxval {maxval}",
                cur.pos + bad * itemsize,
            )
        samples = samples.astype(np.float64)
    else:
        samples = np.empty(count, dtype=np.float64)
        for i in range(count):
            value, off = cur.int_token("sample")
            if value > maxval:
                raise PgmError(f"sample {value} exceeds maxval {maxval}", off)
            samples[i] = value
    return samples.reshape(height, width) / float(maxval)


def encode_pgm(img, maxval: int = 255, raw: bool = True) -> bytes:
    """Encode a gray or bit image as PGM bytes (``P5`` if raw, else ``P2``)."""
    if not 1 <= maxval <= 65535:
        raise ValueError(f"maxval {maxval} outside [1, 65535]")
    arr = np.asarray(img)
    if arr.dtype == np.bool_:
        samples = arr.astype(np.uint32) * maxval
    else:
        arr = check_gray_image(arr)
        samples = np.rint(arr * maxval).astype(np.uint32)
    height, width = samples.shape
    header = f"{'P5' if raw else 'P2'}\n{width} {height}\n{maxval}\n".encode("ascii")
    if raw:
        dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
        return header + samples.astype(dtype).tobytes()
    body = "\n".join(" ".join(str(v) for v in row) for row in samples)
    return header + body.encode("ascii") + b"\n"


def read_pgm(path) -> np.ndarray:
    """Read and decode the PGM file at ``path``."""
    with open(path, "rb") as fh:
        return decode_pgm(fh.read())


def write_pgm(path, img, maxval: int = 255, raw: bool = True) -> None:
    """Encode ``img`` and write it to ``path``."""
    with open(path, "wb") as fh:
        fh.write(encode_pgm(img, maxval=maxval, raw=raw))


def binarize(img, threshold: float = 0.5, polarity: str = "light") -> np.ndarray:
    """Mark ink pixels of a gray image.

    With ``polarity="light"`` ink is strictly brighter than ``threshold``;
    with ``"dark"`` it is strictly darker.  Values equal to the threshold are
    background under either polarity.
    """
    arr = check_gray_image(img)
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie strictly inside (0, 1), got {threshold}")
    if polarity not in POLARITIES:
        raise ValueError(f"polarity must be one of {POLARITIES}, got {polarity!r}")
    return arr > threshold if polarity == "light" else arr < threshold


def thin(bits) -> np.ndarray:
    """Thin a bit image to a one-pixel-wide skeleton.

    Two-subiteration parallel thinning (Zhang & Suen, 1984) run to a fixed
    point: each pass flags every deletable contour pixel against a snapshot
    of the image, then deletes them all at once.  Pixels outside the image
    border count as background.  The result is a subset of the input, and
    thinning it again changes nothing.
    """
    img = check_bit_image(bits).copy()
    while True:
        changed = False
        for sub in (0, 1):
            padded = np.pad(img, 1, constant_values=False).astype(np.uint8)
            # Eight neighbors clockwise from north: P2..P9.
            p2 = padded[:-2, 1:-1]
            p3 = padded[:-2, 2:]
            p4 = padded[1:-1, 2:]
            p5 = padded[2:, 2:]
            p6 = padded[2:, 1:-1]
            p7 = padded[2:, :-2]
            p8 = padded[1:-1, :-2]
            p9 = padded[:-2, :-2]
            ring = (p2, p3, p4, p5, p6, p7, p8, p9)
            count = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9
            transitions = np.zeros_like(count)
            for i in range(8):
                transitions += (ring[i] == 0) & (ring[(i + 1) % 8] == 1)
            if sub == 0:
                edge = (p2 * p4 * p6 == 0) & (p4 * p6 * p8 == 0)
            else:
                edge = (p2 * p4 * p8 == 0) & (p2 * p6 * p8 == 0)
            doomed = img & (count >= 2) & (count <= 6) & (transitions == 1) & edge
            if doomed.any():
                img &= ~doomed
                changed = True
        if not changed:
            return img
