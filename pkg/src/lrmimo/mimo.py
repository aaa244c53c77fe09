"""Transmit/receive chain: Gray-coded square QAM, Rayleigh channel, ZF and LR-aided ZF.

Symbol vectors are handled column-wise: a batch of ``K`` transmit vectors is
an ``(N_t, K)`` complex array, its real embedding ``(2 N_t, K)``.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .lattice import unimodular_inverse
from .linalg import embed_channel, embed_vector, qr_decompose, unembed_vector, zf_equalize

__all__ = [
    "Constellation",
    "ChannelRealization",
    "LengthMismatch",
    "qam_modulate",
    "qam_demodulate",
    "qam_slice",
    "slice_real",
    "draw_channel",
    "draw_noise",
    "noise_variance",
    "zf_detect",
    "lr_zf_detect",
    "LrZfDetector",
    "count_bit_errors",
]


class LengthMismatch(ValueError):
    pass


def _nearest_int(v):
    # ties go toward -inf, i.e. toward the smaller level
    return np.ceil(v - 0.5)


@dataclass(frozen=True)
class Constellation:
    """Square M-QAM with per-axis Gray labelling and unit average energy.

    Axis level index ``i`` (``0`` is the most negative level) carries the
    bit label ``gray(i) = i ^ (i >> 1)``, MSB first. The first half of a
    symbol's bits label the in-phase axis, the second half the quadrature
    axis. For 16-QAM the per-axis table is::

        bits  00  01  11  10
        level -3  -1  +1  +3     (times 1/sqrt(10))
    """

    m_s: int = 16

    def __post_init__(self):
        bits = int(self.m_s).bit_length() - 1
        if self.m_s < 4 or 1 << bits != self.m_s or bits % 2:
            raise ValueError(f"square QAM needs an even power of two >= 4, got {self.m_s}")

    @property
    def bits_per_symbol(self):
        return int(np.log2(self.m_s))

    @property
    def levels_per_axis(self):
        return int(round(np.sqrt(self.m_s)))

    @property
    def scale(self):
        """Normalization factor applied to the odd-integer grid."""
        return 1.0 / np.sqrt(2.0 * (self.m_s - 1) / 3.0)

    @property
    def grid_step(self):
        return 2.0 * self.scale

    @property
    def levels(self):
        L = self.levels_per_axis
        return self.scale * np.arange(1 - L, L, 2, dtype=np.float64)

    @cached_property
    def points(self):
        """All symbols, indexed by their integer bit label."""
        labels = np.arange(self.m_s)
        bits = (labels[:, None] >> np.arange(self.bits_per_symbol)[::-1]) & 1
        return qam_modulate(bits.ravel(), self)


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray

    @cached_property
    def h_real(self):
        return embed_channel(self.h)

    @property
    def n_r(self):
        return self.h.shape[0]

    @property
    def n_t(self):
        return self.h.shape[1]

    @cached_property
    def qr(self):
        return qr_decompose(self.h_real)


def _gray_to_index(labels):
    idx = labels.copy()
    shift = labels >> 1
    while np.any(shift):
        idx ^= shift
        shift >>= 1
    return idx


def qam_modulate(bits, constellation):
    """Map a flat bit array to complex symbols (array shape ``(len(bits) // bits_per_symbol,)``)."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    bps = constellation.bits_per_symbol
    if bits.size % bps:
        raise LengthMismatch(f"{bits.size} bits is not a multiple of {bps} bits per symbol")
    half = bps // 2
    weights = 1 << np.arange(half)[::-1]
    groups = bits.reshape(-1, 2, half)
    gray = groups @ weights
    idx = _gray_to_index(gray)
    L = constellation.levels_per_axis
    amp = (2 * idx - (L - 1)).astype(np.float64) * constellation.scale
    return amp[:, 0] + 1j * amp[:, 1]


def _axis_index(values, constellation):
    L = constellation.levels_per_axis
    u = (np.asarray(values, dtype=np.float64) / constellation.scale + (L - 1)) / 2.0
    return np.clip(_nearest_int(u), 0, L - 1).astype(np.int64)


def qam_demodulate(symbols, constellation):
    """Hard-decision bits of (sliced) symbols; inverse of :func:`qam_modulate`."""
    symbols = np.asarray(symbols, dtype=np.complex128).ravel()
    half = constellation.bits_per_symbol // 2
    idx = np.stack([_axis_index(symbols.real, constellation), _axis_index(symbols.imag, constellation)], axis=1)
    gray = idx ^ (idx >> 1)
    bits = (gray[..., None] >> np.arange(half)[::-1]) & 1
    return bits.reshape(-1).astype(np.int8)


def slice_real(v, constellation):
    """Per-coordinate nearest axis level of a real vector; ties go to the smaller level."""
    L = constellation.levels_per_axis
    return (2 * _axis_index(v, constellation) - (L - 1)) * constellation.scale


def qam_slice(y, constellation):
    y = np.asarray(y, dtype=np.complex128)
    return slice_real(y.real, constellation) + 1j * slice_real(y.imag, constellation)


def draw_channel(n_r, n_t, rng):
    """I.i.d. unit-variance circular complex Gaussian (Rayleigh) channel."""
    if not n_r >= n_t >= 1:
        raise ValueError(f"need n_r >= n_t >= 1, got n_r={n_r}, n_t={n_t}")
    g = rng.standard_normal((2, n_r, n_t))
    return ChannelRealization((g[0] + 1j * g[1]) / np.sqrt(2.0))


def noise_variance(snr_db, n_t):
    """Per-receive-antenna noise variance for SNR = 10 log10(N_t E_s / sigma_n^2), E_s = 1."""
    return n_t / 10.0 ** (snr_db / 10.0)


def draw_noise(shape, sigma_n_sq, rng):
    if sigma_n_sq < 0:
        raise ValueError("noise variance must be non-negative")
    g = rng.standard_normal((2,) + tuple(shape))
    return np.sqrt(sigma_n_sq / 2.0) * (g[0] + 1j * g[1])


def zf_detect(channel, x, constellation):
    """Plain zero-forcing followed by per-axis slicing. ``x`` is complex, ``(N_r,)`` or ``(N_r, K)``."""
    q, r = channel.qr
    s_est = zf_equalize(q, r, embed_vector(x))
    return qam_slice(unembed_vector(s_est), constellation)


class LrZfDetector:
    """Lattice-reduction-aided ZF for one channel and one reduction.

    The transmit vector is written ``s = g (w + u/2)`` with ``w`` integer,
    ``g`` the grid step and ``u`` all ones. In the reduced basis the estimate
    ``z = T^-1 s`` is quantized to ``g T^-1 w + (g/2) T^-1 u`` and mapped back
    through ``T`` before clipping to the constellation.
    """

    def __init__(self, reduction, constellation):
        self.reduction = reduction
        self.constellation = constellation
        t = np.asarray(reduction.t)
        self.t = t
        self.offset = 0.5 * constellation.grid_step * (unimodular_inverse(t) @ np.ones(t.shape[0]))

    def estimate(self, x_real):
        red = self.reduction
        return zf_equalize(red.q_tilde, red.r_tilde, x_real)

    def detect_real(self, x_real):
        x_real = np.asarray(x_real, dtype=np.float64)
        offset = self.offset if x_real.ndim == 1 else self.offset[:, None]
        g = self.constellation.grid_step
        z = self.estimate(x_real)
        w = _nearest_int((z - offset) / g)
        s = self.t @ (g * w) + 0.5 * g
        return slice_real(s, self.constellation)

    def __call__(self, x):
        return unembed_vector(self.detect_real(embed_vector(x)))


def lr_zf_detect(reduction, x, constellation):
    """One-shot LR-aided ZF on a complex receive vector (or ``(N_r, K)`` batch)."""
    return LrZfDetector(reduction, constellation)(x)


def count_bit_errors(tx_bits, rx_bits):
    tx = np.asarray(tx_bits).ravel()
    rx = np.asarray(rx_bits).ravel()
    if tx.shape != rx.shape:
        raise LengthMismatch(f"bit streams differ in length: {tx.size} vs {rx.size}")
    return int(np.count_nonzero(tx != rx)), int(tx.size)
