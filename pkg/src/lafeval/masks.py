"""Binary masks, exact set-intersection counting, and mask file I/O.

A mask is a rectangular grid of positive/negative pixels indexed in
row-major order with the origin at the top left.  Pixels are stored as a
packed bitset (8 pixels per byte, most significant bit first) and all
counting runs over fixed-size tiles of that buffer, so very large masks
never need an unpacked full-image copy.  Counts are exact integers.

Two interchange formats are supported:

* image -- 8-bit single-channel grayscale PNG; a pixel is positive when
  its stored value is >= the decode threshold (default 128).
* rle   -- text run-length encoding.  Line 1 is ``LAFMASK1 <width>
  <height>``; line 2 holds space-separated decimal run lengths
  alternating negative, positive, negative, ... (a leading ``0`` lets a
  mask start positive); runs sum to width*height; single trailing
  newline.  Encoding is canonical: a given mask always produces
  identical bytes.
"""

from __future__ import annotations

import io
import struct
import zlib
from typing import Iterable

import numpy as np

__all__ = [
    "BinaryMask",
    "MaskError",
    "MaskFormatError",
    "DimensionMismatchError",
    "decode_mask",
    "encode_mask",
    "intersect_positive_count",
    "intersect_pos_neg_count",
]

_TILE_BYTES = 1 << 16

# pixels set per byte value, for tile-wise popcounts
_POPCOUNT = np.unpackbits(np.arange(256, dtype=np.uint8)[:, None], axis=1).sum(
    axis=1, dtype=np.uint16
)

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_RLE_MAGIC = b"LAFMASK1"


class MaskError(ValueError):
    """Base class for mask construction and I/O errors."""


class MaskFormatError(MaskError):
    """Malformed mask file; ``offset`` is the failing byte position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class DimensionMismatchError(MaskError):
    """Two masks that must share dimensions do not."""

    def __init__(self, a: "BinaryMask", b: "BinaryMask"):
        super().__init__(
            f"mask dimensions differ: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


class BinaryMask:
    """Immutable rectangular binary mask.

    Construct via :meth:`from_indices`, :meth:`from_array`, :meth:`empty`
    or :meth:`full`.  Instances are safe for concurrent shared reads.
    """

    __slots__ = ("width", "height", "_bits", "_positive_count")

    def __init__(self, width: int, height: int, packed: np.ndarray):
        if width <= 0 or height <= 0:
            raise MaskError(f"mask dimensions must be positive, got {width}x{height}")
        self.width = width
        self.height = height
        expected = (width * height + 7) // 8
        if packed.dtype != np.uint8 or packed.shape != (expected,):
            raise MaskError("packed buffer does not match mask dimensions")
        packed = packed.copy()
        # keep padding bits of the final byte zero so complements and
        # popcounts stay exact
        pad = expected * 8 - width * height
        if pad:
            packed[-1] &= np.uint8(0xFF << pad)
        packed.flags.writeable = False
        self._bits = packed
        self._positive_count: int | None = None

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_array(cls, array: np.ndarray) -> "BinaryMask":
        """Build a mask from a 2D truthy array (row-major)."""
        arr = np.asarray(array)
        if arr.ndim != 2:
            raise MaskError(f"expected a 2D array, got shape {arr.shape}")
        height, width = arr.shape
        packed = np.packbits(arr.astype(bool).ravel())
        return cls(width, height, packed)

    @classmethod
    def from_indices(
        cls, width: int, height: int, positives: Iterable[int]
    ) -> "BinaryMask":
        """Build a mask from row-major indices of positive pixels."""
        flat = np.zeros(width * height, dtype=bool)
        idx = np.fromiter(positives, dtype=np.int64)
        if idx.size:
            if idx.min() < 0 or idx.max() >= width * height:
                raise MaskError(
                    f"positive index out of range for {width}x{height} mask"
                )
            flat[idx] = True
        return cls(width, height, np.packbits(flat))

    @classmethod
    def empty(cls, width: int, height: int) -> "BinaryMask":
        return cls.from_indices(width, height, ())

    @classmethod
    def full(cls, width: int, height: int) -> "BinaryMask":
        flat = np.ones(width * height, dtype=bool)
        return cls(width, height, np.packbits(flat))

    # -- views ------------------------------------------------------------

    @property
    def area(self) -> int:
        return self.width * self.height

    @property
    def packed(self) -> np.ndarray:
        """Read-only packed bit buffer (MSB-first, row-major)."""
        return self._bits

    @property
    def positive_count(self) -> int:
        if self._positive_count is None:
            self._positive_count = _popcount_tiled(self._bits)
        return self._positive_count

    @property
    def negative_count(self) -> int:
        return self.area - self.positive_count

    def to_array(self) -> np.ndarray:
        """Unpack to a 2D bool array (height x width)."""
        flat = np.unpackbits(self._bits)[: self.area].astype(bool)
        return flat.reshape(self.height, self.width)

    def positives(self) -> frozenset[int]:
        """Row-major indices of positive pixels."""
        flat = np.unpackbits(self._bits)[: self.area]
        return frozenset(np.flatnonzero(flat).tolist())

    def complement(self) -> "BinaryMask":
        return BinaryMask(self.width, self.height, np.invert(self._bits))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and bool(np.array_equal(self._bits, other._bits))
        )

    def __hash__(self) -> int:
        return hash((self.width, self.height, self._bits.tobytes()))

    def __repr__(self) -> str:
        return (
            f"BinaryMask({self.width}x{self.height}, "
            f"{self.positive_count} positive)"
        )


def _popcount_tiled(buf: np.ndarray) -> int:
    total = 0
    for start in range(0, buf.size, _TILE_BYTES):
        tile = buf[start : start + _TILE_BYTES]
        total += int(_POPCOUNT[tile].sum(dtype=np.int64))
    return total


def _require_same_size(a: BinaryMask, b: BinaryMask) -> None:
    if a.width != b.width or a.height != b.height:
        raise DimensionMismatchError(a, b)


def intersect_positive_count(a: BinaryMask, b: BinaryMask) -> int:
    """|positives(a) intersect positives(b)|, computed tile by tile."""
    _require_same_size(a, b)
    total = 0
    for start in range(0, a.packed.size, _TILE_BYTES):
        tile = a.packed[start : start + _TILE_BYTES] & b.packed[start : start + _TILE_BYTES]
        total += int(_POPCOUNT[tile].sum(dtype=np.int64))
    return total


def intersect_pos_neg_count(a: BinaryMask, b: BinaryMask) -> int:
    """|positives(a) intersect negatives(b)|.

    The padding bits flipped by negating ``b`` are killed by ``a``'s
    zeroed padding, so the count stays exact without an explicit mask.
    """
    _require_same_size(a, b)
    total = 0
    for start in range(0, a.packed.size, _TILE_BYTES):
        tile = a.packed[start : start + _TILE_BYTES] & ~b.packed[start : start + _TILE_BYTES]
        total += int(_POPCOUNT[tile].sum(dtype=np.int64))
    return total


# -- decoding -------------------------------------------------------------


def decode_mask(data: bytes, threshold: int = 128) -> BinaryMask:
    """Decode a mask file (PNG or RLE text, sniffed from the header).

    ``threshold`` applies to the image format only: a pixel is positive
    when its 8-bit value is >= threshold.
    """
    if not 0 <= threshold <= 255:
        raise MaskError(f"threshold must be in [0, 255], got {threshold}")
    if data.startswith(_PNG_SIGNATURE):
        return _decode_png(data, threshold)
    if data.startswith(_RLE_MAGIC):
        return _decode_rle(data)
    offset = 0
    for probe in (_PNG_SIGNATURE, _RLE_MAGIC):
        common = 0
        while common < min(len(probe), len(data)) and data[common] == probe[common]:
            common += 1
        offset = max(offset, common)
    raise MaskFormatError("unrecognized mask format: expected PNG or LAFMASK1", offset)


def _decode_png(data: bytes, threshold: int) -> BinaryMask:
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(io.BytesIO(data)) as img:
            img.load()
            mode = img.mode
            width, height = img.size
            if mode != "L":
                raise MaskFormatError(
                    f"expected 8-bit single-channel grayscale PNG, got mode {mode}",
                    offset=8,
                )
            if width == 0 or height == 0:
                # IHDR width field starts at byte 16
                raise MaskFormatError("zero width/height", offset=16)
            values = np.asarray(img, dtype=np.uint8)
    except MaskFormatError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        message = str(exc)
        if "truncated" in message.lower() or "broken" in message.lower():
            raise MaskFormatError(f"truncated PNG payload: {message}", len(data)) from exc
        raise MaskFormatError(f"malformed PNG: {message}", offset=8) from exc
    return BinaryMask.from_array(values >= threshold)


def _read_uint(data: bytes, pos: int, what: str) -> tuple[int, int, int]:
    """Read a decimal integer; returns (value, token start, next position)."""
    start = pos
    while pos < len(data) and data[pos : pos + 1].isdigit():
        pos += 1
    if pos == start:
        raise MaskFormatError(f"malformed header: expected decimal {what}", start)
    return int(data[start:pos]), start, pos


def _expect_byte(data: bytes, pos: int, expected: bytes, what: str) -> int:
    if data[pos : pos + 1] != expected:
        raise MaskFormatError(f"malformed header: expected {what}", pos)
    return pos + 1


def _decode_rle(data: bytes) -> BinaryMask:
    pos = len(_RLE_MAGIC)
    pos = _expect_byte(data, pos, b" ", "space after magic")
    width, wstart, pos = _read_uint(data, pos, "width")
    pos = _expect_byte(data, pos, b" ", "space before height")
    height, hstart, pos = _read_uint(data, pos, "height")
    pos = _expect_byte(data, pos, b"\n", "newline after header")
    if width == 0:
        raise MaskFormatError("zero width/height", wstart)
    if height == 0:
        raise MaskFormatError("zero width/height", hstart)

    area = width * height
    flat = np.zeros(area, dtype=bool)
    covered = 0
    run_index = 0
    while True:
        if pos >= len(data):
            raise MaskFormatError(
                f"truncated payload: runs cover {covered} of {area} pixels", len(data)
            )
        run, rstart, pos = _read_uint(data, pos, "run length")
        if run == 0 and run_index != 0:
            raise MaskFormatError("zero-length run", rstart)
        if covered + run > area:
            raise MaskFormatError(
                f"runs exceed mask area ({covered + run} > {area})", rstart
            )
        if run_index % 2 == 1:
            flat[covered : covered + run] = True
        covered += run
        run_index += 1
        nxt = data[pos : pos + 1]
        if nxt == b" ":
            pos += 1
            continue
        if nxt == b"\n":
            pos += 1
            break
        raise MaskFormatError("expected space or newline after run length", pos)
    if covered < area:
        raise MaskFormatError(
            f"truncated payload: runs cover {covered} of {area} pixels", len(data)
        )
    if pos != len(data):
        raise MaskFormatError("trailing bytes after payload", pos)
    return BinaryMask.from_array(flat.reshape(height, width))


# -- encoding -------------------------------------------------------------


def encode_mask(mask: BinaryMask, format: str = "rle") -> bytes:
    """Encode a mask to canonical bytes in the named format."""
    if format == "rle":
        return _encode_rle(mask)
    if format == "image":
        return _encode_png(mask)
    raise MaskError(f"unknown mask format {format!r}; expected 'rle' or 'image'")


def _encode_rle(mask: BinaryMask) -> bytes:
    flat = np.unpackbits(mask.packed)[: mask.area]
    boundaries = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [mask.area]))
    runs = (ends - starts).tolist()
    if flat[0]:
        runs.insert(0, 0)
    header = f"{_RLE_MAGIC.decode('ascii')} {mask.width} {mask.height}\n"
    return (header + " ".join(str(r) for r in runs) + "\n").encode("ascii")


def _png_chunk(tag: bytes, payload: bytes) -> bytes:
    crc = zlib.crc32(tag + payload) & 0xFFFFFFFF
    return struct.pack(">I", len(payload)) + tag + payload + struct.pack(">I", crc)


def _encode_png(mask: BinaryMask) -> bytes:
    """Minimal grayscale PNG writer: filter 0, fixed zlib level, no
    ancillary chunks, so output bytes are canonical."""
    values = np.where(mask.to_array(), np.uint8(255), np.uint8(0))
    raw = bytearray()
    for row in values:
        raw.append(0)
        raw.extend(row.tobytes())
    ihdr = struct.pack(">2I5B", mask.width, mask.height, 8, 0, 0, 0, 0)
    return (
        _PNG_SIGNATURE
        + _png_chunk(b"IHDR", ihdr)
        + _png_chunk(b"IDAT", zlib.compress(bytes(raw), 9))
        + _png_chunk(b"IEND", b"")
    )
