"""Rayleigh block-fading channel model for the Alice -> Relay -> Bob link with Eve.

Every link SNR is exponentially distributed per slot and independent across
slots and links. Transmit powers, noise variances and fading variances are
folded into one linear mean per link::

    mean_snr = P_tx / noise_var * E|h|^2

so a user holding raw powers builds ``ChannelParams`` from those products.

Random streams are numpy ``Generator`` objects backed by PCG64. Replication
streams are spawned from a master seed through ``SeedSequence``, which makes
the mapping (seed, replication index) -> draws portable and reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChannelParams",
    "SnrDraw",
    "mean_snr_from_db",
    "make_rng",
    "spawn_rngs",
    "sample_slot",
    "sample_block",
    "exponential_draws",
]


def mean_snr_from_db(db: float) -> float:
    """Convert a gain in dB to a linear mean SNR."""
    if not math.isfinite(db):
        raise ValueError(f"dB value must be finite, got {db!r}")
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class ChannelParams:
    """Linear mean SNRs of the four links (ar, rb, ae, re)."""

    gamma_bar_ar: float
    gamma_bar_rb: float
    gamma_bar_ae: float
    gamma_bar_re: float

    def __post_init__(self):
        for name in ("gamma_bar_ar", "gamma_bar_rb", "gamma_bar_ae", "gamma_bar_re"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")

    @classmethod
    def from_db(cls, ar_db: float, rb_db: float, ae_db: float, re_db: float) -> "ChannelParams":
        return cls(
            mean_snr_from_db(ar_db),
            mean_snr_from_db(rb_db),
            mean_snr_from_db(ae_db),
            mean_snr_from_db(re_db),
        )

    def means(self) -> np.ndarray:
        return np.array([self.gamma_bar_ar, self.gamma_bar_rb, self.gamma_bar_ae, self.gamma_bar_re])

    def swapped(self) -> "ChannelParams":
        """Exchange the roles of the two hops (ar <-> rb, ae <-> re)."""
        return ChannelParams(self.gamma_bar_rb, self.gamma_bar_ar, self.gamma_bar_re, self.gamma_bar_ae)


# Default operating point used throughout the numerical study: 5, 10, 0, 2 dB.
DEFAULT_GAINS_DB = (5.0, 10.0, 0.0, 2.0)


@dataclass(frozen=True)
class SnrDraw:
    """Instantaneous SNRs of one slot. Arrays are allowed for block draws."""

    g_ar: float | np.ndarray
    g_rb: float | np.ndarray
    g_ae: float | np.ndarray
    g_re: float | np.ndarray


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator from an explicit 64-bit seed."""
    if not 0 <= int(seed) < 2**64:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """Independent streams for replications 0..n-1 of a master seed."""
    children = np.random.SeedSequence(int(seed)).spawn(n)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def exponential_draws(rng: np.random.Generator, mean: float, size=None):
    # inverse CDF with U in (0, 1]; U = 0 would map to +inf
    u = 1.0 - rng.random(size)
    return -mean * np.log(u)


def sample_block(params: ChannelParams, rng: np.random.Generator, n: int) -> SnrDraw:
    """Draw ``n`` consecutive slots at once.

    Slots are laid out slot-major (4 uniforms per slot, in ar, rb, ae, re
    order), so ``sample_block(p, rng, n)`` yields the same values as ``n``
    successive calls to :func:`sample_slot` on an identically seeded stream.
    """
    u = 1.0 - rng.random((n, 4))
    g = -np.log(u) * params.means()
    return SnrDraw(g[:, 0], g[:, 1], g[:, 2], g[:, 3])


def sample_slot(params: ChannelParams, rng: np.random.Generator) -> SnrDraw:
    d = sample_block(params, rng, 1)
    return SnrDraw(float(d.g_ar[0]), float(d.g_rb[0]), float(d.g_ae[0]), float(d.g_re[0]))
