"""Recovery quality: RSE, PSNR and SSIM for pure-quaternion videos.

Video tensors hold RGB in the i, j, k parts with samples in [0, 1]; PSNR and
SSIM rescale to the 8-bit range before evaluation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import DimensionMismatch, FrameTooSmall, ZeroReference

WINDOW = 11
SIGMA = 1.5


def _same_shape(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    return a, b


def _channels(T):
    """RGB samples ``(n1, n2, n3, 3)`` from a quaternion tensor or an RGB array."""
    if T.shape[-1] == 4:
        return T[..., 1:]
    if T.shape[-1] == 3:
        return T
    raise DimensionMismatch(f"expected trailing axis 3 or 4, got {T.shape}")


def rse(C_true, C_hat):
    """``10 log10(||C - C_hat|| / ||C||)``; ``-inf`` for an exact match."""
    a, b = _same_shape(C_true, C_hat)
    ref = float(np.linalg.norm(a.ravel()))
    if ref == 0.0:
        raise ZeroReference("reference tensor is zero")
    err = float(np.linalg.norm((a - b).ravel()))
    if err == 0.0:
        return -math.inf
    return 10.0 * math.log10(err / ref)


def psnr(C_true, C_hat, peakval=255.0, data_scale=255.0):
    """Peak signal-to-noise ratio over all channel samples; ``+inf`` for an exact match."""
    a, b = _same_shape(C_true, C_hat)
    a = _channels(a) * data_scale
    b = _channels(b) * data_scale
    sq = float(np.sum((a - b) ** 2))
    if sq == 0.0:
        return math.inf
    return 10.0 * math.log10(a.size * peakval ** 2 / sq)


def gaussian_window(size=WINDOW, sigma=SIGMA):
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-x * x / (2.0 * sigma * sigma))
    return g / g.sum()


def _filter_valid(img, g):
    out = correlate1d(img, g, axis=0, mode="constant")
    out = correlate1d(out, g, axis=1, mode="constant")
    h = len(g) // 2
    return out[h:img.shape[0] - h, h:img.shape[1] - h]


def ssim_image(x, y, L=255.0, window=WINDOW, sigma=SIGMA):
    """Mean SSIM of two 2-D images with a Gaussian window, valid region only."""
    x, y = _same_shape(x, y)
    if min(x.shape) < window:
        raise FrameTooSmall(f"image {x.shape} is smaller than the {window}x{window} window")
    g = gaussian_window(window, sigma)
    C1 = (0.01 * L) ** 2
    C2 = (0.03 * L) ** 2
    mx = _filter_valid(x, g)
    my = _filter_valid(y, g)
    sxx = _filter_valid(x * x, g) - mx * mx
    syy = _filter_valid(y * y, g) - my * my
    sxy = _filter_valid(x * y, g) - mx * my
    num = (2 * mx * my + C1) * (2 * sxy + C2)
    den = (mx * mx + my * my + C1) * (sxx + syy + C2)
    return float(np.mean(num / den))


def ssim(C_true, C_hat, peakval=255.0, data_scale=255.0):
    """SSIM averaged over frames and colour channels."""
    a, b = _same_shape(C_true, C_hat)
    a = _channels(a) * data_scale
    b = _channels(b) * data_scale
    n1, n2, n3, nc = a.shape
    if min(n1, n2) < WINDOW:
        raise FrameTooSmall(f"frames of size {n1}x{n2} are smaller than the {WINDOW}x{WINDOW} window")
    vals = [ssim_image(a[:, :, k, c], b[:, :, k, c], L=peakval)
            for k in range(n3) for c in range(nc)]
    return float(np.mean(vals))


def _enc(v):
    if v is None:
        return None
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _dec(v):
    return None if v is None else float(v)


@dataclass
class MetricReport:
    rse_db: float
    psnr_db: float
    ssim: float | None = None

    def to_json(self):
        """Single-line JSON; infinities are written as the strings "inf"/"-inf"."""
        return json.dumps({"rse_db": _enc(self.rse_db), "psnr_db": _enc(self.psnr_db),
                           "ssim": _enc(self.ssim)})

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(_dec(d["rse_db"]), _dec(d["psnr_db"]), _dec(d.get("ssim")))

    def table(self):
        rows = [("RSE (dB)", self.rse_db), ("PSNR (dB)", self.psnr_db), ("SSIM", self.ssim)]
        lines = [f"{'metric':<10} {'value':>14}"]
        for name, v in rows:
            lines.append(f"{name:<10} {'n/a' if v is None else format(v, '14.6f'):>14}")
        return "\n".join(lines)


def evaluate(C_true, C_hat, peakval=255.0, data_scale=255.0):
    """All metrics; SSIM is omitted (None) when frames are smaller than the window."""
    a, b = _same_shape(C_true, C_hat)
    try:
        s = ssim(a, b, peakval, data_scale)
    except FrameTooSmall:
        s = None
    return MetricReport(rse(a, b), psnr(a, b, peakval, data_scale), s)
