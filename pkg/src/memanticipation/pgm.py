"""Netpbm graymap (PGM) files and frame-sequence manifests."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .signals import FrameSequence


class PGMError(ValueError):
    pass


def _tokens(data: bytes, count: int, pos: int):
    """Read ``count`` whitespace separated header tokens, skipping comments."""
    out = []
    while len(out) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise PGMError("truncated header")
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        out.append(data[start:pos])
    return out, pos


def read_pgm(path) -> np.ndarray:
    """Gray values in [0, 1], shape ``(height, width)``."""
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise PGMError(f"{path}: not a PGM file (magic {magic!r})")
    (w, h, maxval), pos = _tokens(data, 3, 2)
    width, height, maxval = int(w), int(h), int(maxval)
    if not 0 < maxval < 65536:
        raise PGMError(f"bad maxval {maxval}")
    n = width * height
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        if len(data) - pos < n * dtype.itemsize:
            raise PGMError("truncated pixel data")
        raw = np.frombuffer(data, dtype=dtype, count=n, offset=pos)
    else:
        values, _ = _tokens(data, n, pos)
        raw = np.array([int(v) for v in values])
    if raw.size != n:
        raise PGMError("truncated pixel data")
    return raw.reshape(height, width).astype(float) / maxval


def write_pgm(path, image, binary: bool = True, maxval: int = 255) -> None:
    img = np.clip(np.asarray(image, dtype=float), 0.0, 1.0)
    if img.ndim != 2:
        raise PGMError("image must be 2-D")
    height, width = img.shape
    q = np.rint(img * maxval).astype(int)
    if binary:
        header = f"P5\n{width} {height}\n{maxval}\n".encode()
        dtype = ">u2" if maxval > 255 else "u1"
        body = q.astype(dtype).tobytes()
    else:
        header = f"P2\n{width} {height}\n{maxval}\n".encode()
        body = "".join(" ".join(str(v) for v in row) + "\n" for row in q).encode()
    Path(path).write_bytes(header + body)


def read_manifest(path) -> FrameSequence:
    """Lines ``slot_time_s, pgm_path``; paths are relative to the manifest."""
    base = Path(path).parent
    times, frames = [], []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",", 1)]
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'slot_time_s, pgm_path'")
        times.append(float(parts[0]))
        frames.append(read_pgm(base / parts[1]))
    if not frames:
        raise ValueError(f"{path}: empty manifest")
    shapes = {f.shape for f in frames}
    if len(shapes) != 1:
        raise ValueError(f"{path}: frames differ in size {sorted(shapes)}")
    return FrameSequence(np.stack(frames), tuple(times))


def write_manifest(path, frames: FrameSequence, prefix: str = "frame") -> list[Path]:
    """Write every frame as PGM next to the manifest and list them."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    written = []
    lines = []
    for k, (t, img) in enumerate(zip(frames.slot_times, frames.frames)):
        name = f"{prefix}_{k:03d}.pgm"
        write_pgm(path.parent / name, img)
        written.append(path.parent / name)
        lines.append(f"{t!r}, {name}")
    path.write_text("\n".join(lines) + "\n")
    return written
