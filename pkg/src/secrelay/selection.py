"""Per-slot link selection.

Decisions: ``0`` Alice -> Relay, ``1`` Relay -> Bob, ``-1`` idle.

Only the two legitimate SNRs reach these functions; the eavesdropper's
channel is never visible to the policy.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Mode",
    "PolicyParams",
    "ALICE",
    "RELAY",
    "IDLE",
    "select_with_feedback",
    "select_without_feedback",
    "select",
    "select_array",
]

ALICE = 0
RELAY = 1
IDLE = -1


class Mode(str, enum.Enum):
    ADAPTIVE = "adaptive"
    FIXED = "fixed"


@dataclass(frozen=True)
class PolicyParams:
    """Thresholds, secrecy rate and (fixed mode only) codeword rate.

    ``alpha`` and ``beta`` are linear SNR thresholds; ``r_s`` and ``r_a``
    are in bits per channel use.
    """

    alpha: float
    beta: float
    r_s: float
    r_a: float | None = None
    mode: Mode = Mode.ADAPTIVE

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        for name in ("alpha", "beta", "r_s"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be a finite non-negative number, got {v!r}")
        if self.alpha == 0 or self.beta == 0:
            raise ValueError("thresholds must be > 0 (the policy compares g/alpha with g/beta)")
        floor = self.rate_floor
        if self.alpha < floor or self.beta < floor:
            raise ValueError(
                f"thresholds must satisfy min(alpha, beta) >= 2**r_s - 1 = {floor:.6g}, "
                f"got alpha={self.alpha}, beta={self.beta}"
            )
        if self.mode is Mode.FIXED:
            if self.r_a is None:
                raise ValueError("fixed mode requires r_a")
            if not 0 < self.r_s < self.r_a:
                raise ValueError(f"fixed mode requires 0 < r_s < r_a, got r_s={self.r_s}, r_a={self.r_a}")

    @property
    def rate_floor(self) -> float:
        """2**r_s - 1, the smallest SNR whose capacity covers ``r_s``."""
        return 2.0**self.r_s - 1.0

    @property
    def codeword_floor(self) -> float:
        """2**r_a - 1 in fixed mode; 0 in adaptive mode."""
        if self.mode is Mode.FIXED:
            return 2.0**self.r_a - 1.0
        return 0.0


def _check_snr(g_ar, g_rb):
    if not (math.isfinite(g_ar) and math.isfinite(g_rb)):
        raise ValueError(f"SNRs must be finite, got g_ar={g_ar!r}, g_rb={g_rb!r}")


def select_with_feedback(g_ar: float, g_rb: float, p: PolicyParams) -> int:
    """Adaptive-rate policy (Alice learns the Alice->Relay CSI).

    Ties ``g_ar/alpha == g_rb/beta`` go to Alice.
    """
    _check_snr(g_ar, g_rb)
    a, b = g_ar / p.alpha, g_rb / p.beta
    if g_ar >= p.alpha and a >= b:
        return ALICE
    if g_rb >= p.beta and b > a:
        return RELAY
    return IDLE


def select_without_feedback(g_ar: float, g_rb: float, p: PolicyParams) -> int:
    """Fixed-rate policy: Alice is only scheduled when ``g_ar`` supports ``r_a``."""
    _check_snr(g_ar, g_rb)
    if p.r_a is None:
        raise ValueError("fixed-rate selection requires r_a")
    floor = max(p.alpha, 2.0**p.r_a - 1.0)
    if g_ar >= floor:
        return ALICE if g_ar / p.alpha >= g_rb / p.beta else RELAY
    if g_rb >= p.beta:
        return RELAY
    return IDLE


def select(g_ar: float, g_rb: float, p: PolicyParams) -> int:
    if p.mode is Mode.FIXED:
        return select_without_feedback(g_ar, g_rb, p)
    return select_with_feedback(g_ar, g_rb, p)


def select_array(g_ar: np.ndarray, g_rb: np.ndarray, p: PolicyParams) -> np.ndarray:
    """Vectorized :func:`select`; returns an int8 array of decisions."""
    g_ar = np.asarray(g_ar, dtype=float)
    g_rb = np.asarray(g_rb, dtype=float)
    if not (np.all(np.isfinite(g_ar)) and np.all(np.isfinite(g_rb))):
        raise ValueError("SNRs must be finite")
    ratio_alice = g_ar / p.alpha >= g_rb / p.beta
    floor = max(p.alpha, p.codeword_floor)
    alice_ok = g_ar >= floor
    out = np.full(g_ar.shape, IDLE, dtype=np.int8)
    if p.mode is Mode.FIXED:
        out[~alice_ok & (g_rb >= p.beta)] = RELAY
        out[alice_ok & ~ratio_alice] = RELAY
        out[alice_ok & ratio_alice] = ALICE
    else:
        out[(g_rb >= p.beta) & ~ratio_alice] = RELAY
        out[alice_ok & ratio_alice] = ALICE
    return out
