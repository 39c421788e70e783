"""Frames, quaternion encoding, observation masks and binary tensor files.

Binary layouts (all little-endian):

``QT3``: ``b"QT3\\0"``, u32 version (1), u64 n1, n2, n3, then float64
``(w, x, y, z)`` per entry in linear order ``(k*n2 + j)*n1 + i``.

``QM3``: ``b"QM3\\0"``, u32 version (1), u64 n1, n2, n3, a 16-byte ASCII
generator name (NUL padded), u64 seed, then one u8 (0/1) per entry in the
same linear order.  Masks are drawn with ``numpy.random.Philox`` seeded by
``seed``; the name field records that choice.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .completion import ObservationMask
from .errors import ImpureTensor, InconsistentFrameSizes, Malformed

QT3_MAGIC = b"QT3\0"
QM3_MAGIC = b"QM3\0"
VERSION = 1
PRNG_NAME = "philox4x64"
_HEADER = struct.Struct("<4sIQQQ")
_MASK_EXTRA = struct.Struct("<16sQ")
_FRAME_RE = re.compile(r"^frame_(\d+)\.png$")


@dataclass
class VideoTensor:
    """RGB video with samples in [0, 1], shape ``(height, width, frames, 3)``."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 4 or self.data.shape[-1] != 3:
            raise ValueError(f"video data must have shape (n1, n2, n3, 3), got {self.data.shape}")

    @property
    def shape(self):
        return self.data.shape[:3]


def encode_quaternion(video):
    """R, G, B become the i, j, k parts of a pure quaternion tensor."""
    d = video.data if isinstance(video, VideoTensor) else np.asarray(video, dtype=float)
    out = np.zeros(d.shape[:3] + (4,))
    out[..., 1:] = d
    return out


def decode_quaternion(T, tol=1e-9):
    """Inverse of :func:`encode_quaternion`.

    Returns ``(video, clamped)`` where ``clamped`` counts samples pulled back
    into [0, 1].  Raises ImpureTensor if the real part exceeds ``tol``.
    """
    T = np.asarray(T, dtype=float)
    if T.ndim != 4 or T.shape[-1] != 4:
        raise ValueError(f"expected a quaternion tensor, got shape {T.shape}")
    worst = float(np.abs(T[..., 0]).max()) if T.size else 0.0
    if worst > tol:
        raise ImpureTensor(f"real part reaches {worst:.3g}")
    rgb = T[..., 1:]
    clamped = int(np.count_nonzero((rgb < 0.0) | (rgb > 1.0)))
    return VideoTensor(np.clip(rgb, 0.0, 1.0)), clamped


def sample_mask(n1, n2, n3, rho, seed):
    """Observe exactly ``floor(rho*N + 1/2)`` pixels, uniformly without replacement."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    N = n1 * n2 * n3
    m = int(np.floor(rho * N + 0.5))
    rng = np.random.Generator(np.random.Philox(int(seed)))
    flat = np.zeros(N, dtype=bool)
    flat[rng.choice(N, size=m, replace=False)] = True
    # linear order matches the file format: i fastest
    return ObservationMask(flat.reshape((n3, n2, n1)).transpose(2, 1, 0))


# ------------------------------------------------------------ binary formats

def _to_linear(T):
    return np.ascontiguousarray(np.transpose(T, (2, 1, 0) + tuple(range(3, T.ndim))))


def _from_linear(buf, n1, n2, n3, tail=()):
    return np.transpose(buf.reshape((n3, n2, n1) + tail), (2, 1, 0) + tuple(range(3, 3 + len(tail))))


def write_qt3(T, path):
    T = np.asarray(T, dtype=float)
    if T.ndim != 4 or T.shape[-1] != 4:
        raise ValueError(f"expected a quaternion tensor, got shape {T.shape}")
    n1, n2, n3 = T.shape[:3]
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(QT3_MAGIC, VERSION, n1, n2, n3))
        fh.write(_to_linear(T).astype("<f8").tobytes())


def _read_header(raw, magic, path):
    if len(raw) < _HEADER.size:
        raise Malformed(f"{path}: file too short for a header")
    got, version, n1, n2, n3 = _HEADER.unpack_from(raw)
    if got != magic:
        raise Malformed(f"{path}: bad magic {got!r}")
    if version != VERSION:
        raise Malformed(f"{path}: unsupported version {version}")
    return n1, n2, n3


def read_qt3(path):
    raw = Path(path).read_bytes()
    n1, n2, n3 = _read_header(raw, QT3_MAGIC, path)
    need = n1 * n2 * n3 * 4 * 8
    body = raw[_HEADER.size:]
    if len(body) != need:
        raise Malformed(f"{path}: expected {need} payload bytes, found {len(body)}")
    data = np.frombuffer(body, dtype="<f8").astype(float)
    return np.ascontiguousarray(_from_linear(data, n1, n2, n3, (4,)))


def write_mask(mask, path, seed=0, prng=PRNG_NAME):
    a = mask.observed if isinstance(mask, ObservationMask) else np.asarray(mask, dtype=bool)
    n1, n2, n3 = a.shape
    name = prng.encode("ascii")[:16].ljust(16, b"\0")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(QM3_MAGIC, VERSION, n1, n2, n3))
        fh.write(_MASK_EXTRA.pack(name, int(seed)))
        fh.write(_to_linear(a).astype(np.uint8).tobytes())


def read_mask_file(path):
    """Return ``(mask, prng_name, seed)``."""
    raw = Path(path).read_bytes()
    n1, n2, n3 = _read_header(raw, QM3_MAGIC, path)
    off = _HEADER.size
    if len(raw) < off + _MASK_EXTRA.size:
        raise Malformed(f"{path}: truncated mask header")
    name, seed = _MASK_EXTRA.unpack_from(raw, off)
    body = raw[off + _MASK_EXTRA.size:]
    if len(body) != n1 * n2 * n3:
        raise Malformed(f"{path}: expected {n1 * n2 * n3} mask bytes, found {len(body)}")
    vals = np.frombuffer(body, dtype=np.uint8)
    if np.any(vals > 1):
        raise Malformed(f"{path}: mask bytes must be 0 or 1")
    mask = ObservationMask(_from_linear(vals.astype(bool), n1, n2, n3))
    return mask, name.rstrip(b"\0").decode("ascii", "replace"), seed


def read_mask(path):
    return read_mask_file(path)[0]


# ------------------------------------------------------------ frames

def _frame_files(directory):
    d = Path(directory)
    found = []
    for p in d.iterdir():
        m = _FRAME_RE.match(p.name)
        if m:
            found.append((int(m.group(1)), p))
    return [p for _, p in sorted(found)]


def load_frames(directory):
    """Read ``frame_NNNN.png`` files in numeric order into a VideoTensor."""
    files = _frame_files(directory)
    if not files:
        raise FileNotFoundError(f"no frame_*.png files in {directory}")
    frames = []
    for p in files:
        with Image.open(p) as im:
            frames.append(np.asarray(im.convert("RGB"), dtype=np.uint8))
    sizes = {f.shape for f in frames}
    if len(sizes) != 1:
        raise InconsistentFrameSizes(f"frames in {directory} have sizes {sorted(sizes)}")
    data = np.stack(frames, axis=2).astype(float) / 255.0
    return VideoTensor(data)


def save_frames(video, directory):
    """Write 8-bit RGB PNGs ``frame_0001.png`` onward."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    data = video.data if isinstance(video, VideoTensor) else np.asarray(video, dtype=float)
    u8 = np.round(np.clip(data, 0.0, 1.0) * 255.0).astype(np.uint8)
    for k in range(u8.shape[2]):
        Image.fromarray(np.ascontiguousarray(u8[:, :, k, :])).save(d / f"frame_{k + 1:04d}.png")
