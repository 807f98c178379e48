"""Core numerics: radix-2 FFT, seeded random streams and statistical helpers.

The FFT is an iterative radix-2 decimation-in-time transform with an explicit
bit-reversal pass, restricted to power-of-two lengths.  Forward transform is
unnormalized, the inverse carries the 1/N factor.  Both accept batched input
(transform along the last axis).

Random numbers come from a counter-based Philox generator keyed by
(master_seed, stream_id), so independent streams are cheap to derive and
bit-exact reproducible.  Gaussian variates use Box-Muller on the uniform
stream, which keeps the uniform consumption rate fixed.
"""

import math

import numpy as np
from scipy.special import erfc

from .errors import ConfigurationError

__all__ = [
    "fft",
    "ifft",
    "RngStream",
    "q_function",
    "binomial_ci",
]


def _check_length(n):
    if n < 2 or (n & (n - 1)) != 0:
        raise ConfigurationError(f"FFT length must be a power of two >= 2, got {n}")


def _bit_reverse_indices(n):
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def fft(x):
    """Forward DFT, X[k] = sum_n x[n] exp(-2j pi k n / N), along the last axis."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[-1]
    _check_length(n)
    out = x[..., _bit_reverse_indices(n)].copy()
    m = 1
    while m < n:
        half = m
        m *= 2
        tw = np.exp(-2j * np.pi * np.arange(half) / m)
        view = out.reshape(x.shape[:-1] + (n // m, m))
        even = view[..., :half].copy()
        odd = view[..., half:] * tw
        view[..., :half] = even + odd
        view[..., half:] = even - odd
    return out


def ifft(x):
    """Inverse DFT with the 1/N factor, along the last axis."""
    x = np.asarray(x, dtype=np.complex128)
    return np.conj(fft(np.conj(x))) / x.shape[-1]


class RngStream:
    """One reproducible random stream of a seeded family.

    Identical (master_seed, stream_id) pairs give bit-identical sequences;
    distinct stream ids give statistically independent streams.  A stream is
    single-owner mutable state: never share one between workers.
    """

    def __init__(self, master_seed, stream_id=0):
        if stream_id < 0:
            raise ConfigurationError(f"stream_id must be >= 0, got {stream_id}")
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        key = (self.master_seed & 0xFFFFFFFFFFFFFFFF) | (self.stream_id << 64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def uniform(self, size=None):
        """Uniform variates in [0, 1)."""
        return self._gen.random(size)

    def bits(self, n):
        """n equiprobable 0/1 bits."""
        return self._gen.integers(0, 2, size=n, dtype=np.uint8)

    def gaussian_pair(self):
        """Two independent standard normals (Box-Muller)."""
        u1, u2 = self._gen.random(2)
        r = math.sqrt(-2.0 * math.log(1.0 - u1))
        theta = 2.0 * math.pi * u2
        return r * math.cos(theta), r * math.sin(theta)

    def normal(self, n):
        """n independent standard normals (vectorized Box-Muller)."""
        half = (n + 1) // 2
        u = self._gen.random((2, half))
        r = np.sqrt(-2.0 * np.log1p(-u[0]))
        theta = 2.0 * np.pi * u[1]
        out = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
        return out[:n]

    def complex_normal(self, n):
        """n circular complex Gaussians with unit total variance."""
        z = self.normal(2 * n)
        return (z[:n] + 1j * z[n:]) / math.sqrt(2.0)


def q_function(x):
    """Gaussian tail probability Q(x) = 0.5 erfc(x / sqrt(2))."""
    return 0.5 * erfc(np.asarray(x, dtype=np.float64) / math.sqrt(2.0))


def binomial_ci(errors, trials, sigmas):
    """Normal-approximation confidence interval for an error-rate estimate.

    Returns (low, high) = p +- sigmas * sqrt(p (1 - p) / trials), clamped
    to [0, 1].
    """
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")
    if not 0 <= errors <= trials:
        raise ConfigurationError(f"errors must be in [0, {trials}], got {errors}")
    p = errors / trials
    half = sigmas * math.sqrt(p * (1.0 - p) / trials)
    return max(0.0, p - half), min(1.0, p + half)
