"""FRS frameset recording format and frame sources.

FRS layout (little-endian): magic "FRS1" | frame_count u32 | per frame:
t_ms u64 | width u16 | height u16 | width*height intensity bytes (0-255).

A directory of binary PGM (P5) files with a manifest.txt of
"<t_ms> <filename>" lines is accepted as an alternative frame source.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .model import Frame

FRS_MAGIC = b"FRS1"


class FrsError(Exception):
    pass


def write_frs(frames: Iterable[Frame]) -> bytes:
    chunks = []
    count = 0
    for f in frames:
        data = np.rint(f.intensities * 255.0).astype(np.uint8)
        chunks.append(struct.pack("<QHH", f.t_ms, f.width, f.height) + data.tobytes())
        count += 1
    return FRS_MAGIC + struct.pack("<I", count) + b"".join(chunks)


def read_frs(blob: bytes) -> list[Frame]:
    if blob[:4] != FRS_MAGIC:
        raise FrsError("not an FRS1 frameset")
    if len(blob) < 8:
        raise FrsError("frameset header truncated")
    (count,) = struct.unpack_from("<I", blob, 4)
    pos = 8
    frames = []
    for _ in range(count):
        if pos + 12 > len(blob):
            raise FrsError("frame header truncated")
        t_ms, width, height = struct.unpack_from("<QHH", blob, pos)
        pos += 12
        n = width * height
        if pos + n > len(blob):
            raise FrsError("frame pixels truncated")
        pixels = np.frombuffer(blob, dtype=np.uint8, count=n, offset=pos)
        pos += n
        img = pixels.reshape(height, width).astype(np.float64) / 255.0
        frames.append(Frame(width=width, height=height, intensities=img, t_ms=t_ms))
    if pos != len(blob):
        raise FrsError("trailing bytes after last frame")
    return frames


def write_pgm(path: Path, img: np.ndarray) -> None:
    h, w = img.shape
    data = np.rint(img * 255.0).astype(np.uint8)
    path.write_bytes(b"P5\n%d %d\n255\n" % (w, h) + data.tobytes())


def read_pgm(path: Path) -> np.ndarray:
    blob = path.read_bytes()
    if not blob.startswith(b"P5"):
        raise FrsError(f"{path.name}: only binary PGM (P5) is supported")
    # header: magic, width, height, maxval as whitespace-separated tokens
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(blob) and blob[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(blob) and not blob[pos:pos + 1].isspace():
            pos += 1
        tokens.append(blob[start:pos])
    pos += 1  # single whitespace after maxval
    width, height, maxval = (int(t) for t in tokens)
    if maxval != 255:
        raise FrsError(f"{path.name}: maxval must be 255")
    pixels = np.frombuffer(blob, dtype=np.uint8, count=width * height, offset=pos)
    return pixels.reshape(height, width).astype(np.float64) / 255.0


def frames_from_dir(directory: Path) -> Iterator[Frame]:
    """Yield frames listed by <dir>/manifest.txt in manifest order."""
    directory = Path(directory)
    manifest = directory / "manifest.txt"
    if not manifest.exists():
        raise FrsError(f"{directory} has no manifest.txt")
    for line in manifest.read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        t_str, _, name = line.partition(" ")
        img = read_pgm(directory / name)
        h, w = img.shape
        yield Frame(width=w, height=h, intensities=img, t_ms=int(t_str))
