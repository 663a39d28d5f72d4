"""Closed-form link-selection and secrecy metrics.

Notation inside this module: ``a, b, e, r`` are the mean SNRs of the
Alice->Relay, Relay->Bob, Alice->Eve and Relay->Eve links, ``s = 2**r_s``
and ``m`` is the smallest ``g_ar`` for which Alice may be scheduled
(``alpha`` in adaptive mode, ``max(alpha, 2**r_a - 1)`` in fixed mode).

The fixed-rate forms are written once in terms of ``m``. For
``alpha >= 2**r_a - 1`` they collapse onto the adaptive expressions, which
makes the branch seam continuous by construction.

Given ``g_ar = x`` on an Alice slot, adaptive-rate hop-1 outage happens
with probability ``exp(-(x + 1 - s) / (s e))``; hop 2 is the mirror image.
All hop-level outage probabilities below are conditional on the hop being
scheduled. Exponents are grouped so that no intermediate quantity overflows
for large threshold-to-mean ratios.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .channel import ChannelParams
from .selection import Mode, PolicyParams

__all__ = [
    "MetricSet",
    "METRIC_COLUMNS",
    "adaptive_rho_a",
    "adaptive_rho_r",
    "adaptive_rho_id",
    "adaptive_sop_hop1",
    "adaptive_sop_hop2",
    "adaptive_tau_ar",
    "adaptive_tau_rb",
    "appendix_u",
    "appendix_v",
    "sop_e2e",
    "fixed_rho_a",
    "fixed_rho_r",
    "fixed_rho_id",
    "fixed_sop_hop1",
    "fixed_sop_hop2",
    "fixed_tau_ar",
    "fixed_tau_rb",
    "adaptive_metrics",
    "fixed_metrics",
    "evaluate",
]

METRIC_COLUMNS = ("rho_a", "rho_r", "rho_id", "sop1", "sop2", "sop_e2e", "tau_ar", "tau_rb", "soct")


@dataclass(frozen=True)
class MetricSet:
    rho_a: float
    rho_r: float
    rho_id: float
    sop1: float
    sop2: float
    sop_e2e: float
    tau_ar: float
    tau_rb: float
    soct: float

    def as_dict(self) -> dict:
        return asdict(self)

    def check(self, tol: float = 1e-9) -> None:
        """Raise ``ValueError`` if a probability leaves [0, 1] or the partition breaks."""
        for name in ("rho_a", "rho_r", "rho_id", "sop1", "sop2", "sop_e2e"):
            v = getattr(self, name)
            if not (-tol <= v <= 1 + tol):
                raise ValueError(f"{name}={v} outside [0, 1]")
        total = self.rho_a + self.rho_r + self.rho_id
        if abs(total - 1.0) > tol:
            raise ValueError(f"rho_a + rho_r + rho_id = {total}, expected 1")


def _positive(**kw):
    for k, v in kw.items():
        if np.any(np.asarray(v) <= 0):
            raise ValueError(f"{k} must be > 0, got {v}")


def _rate_floor_check(alpha, beta, r_s):
    if np.any(np.asarray(r_s) < 0):
        raise ValueError(f"r_s must be >= 0, got {r_s}")
    floor = 2.0 ** np.asarray(r_s) - 1.0
    if np.any(np.minimum(alpha, beta) < floor - 1e-12):
        raise ValueError(
            f"min(alpha, beta) must be >= 2**r_s - 1 = {floor}, got alpha={alpha}, beta={beta}"
        )


def _fixed_pre(alpha, beta, r_a, r_s=None):
    _positive(alpha=alpha, beta=beta, r_a=r_a)
    if r_s is not None:
        if np.any(np.asarray(r_s) <= 0) or np.any(np.asarray(r_s) >= r_a):
            raise ValueError(f"fixed mode requires 0 < r_s < r_a, got r_s={r_s}, r_a={r_a}")
        _rate_floor_check(alpha, beta, r_s)


# --------------------------------------------------------------------------
# selection probabilities, written for a general Alice floor m >= alpha


def _rho_a(a, b, alpha, beta, m):
    # Pr[g_ar >= max(m, alpha g_rb / beta)]
    share = alpha * b / (alpha * b + beta * a)
    return np.exp(-m / a) * (1.0 - share * np.exp(-beta * m / (alpha * b)))


def _rho_id(a, b, beta, m):
    return np.expm1(-m / a) * np.expm1(-beta / b)


def _rho_r_scaled(a, b, alpha, beta, m):
    # rho_r * exp(beta / b)
    share = alpha * b / (alpha * b + beta * a)
    return -np.expm1(-m / a) + share * np.exp(-m / a - beta * (m / alpha - 1.0) / b)


def _rho_r(a, b, alpha, beta, m):
    return np.exp(-beta / b) * _rho_r_scaled(a, b, alpha, beta, m)


def adaptive_rho_a(ch: ChannelParams, alpha, beta):
    _positive(alpha=alpha, beta=beta)
    return _rho_a(ch.gamma_bar_ar, ch.gamma_bar_rb, alpha, beta, alpha)


def adaptive_rho_r(ch: ChannelParams, alpha, beta):
    _positive(alpha=alpha, beta=beta)
    return _rho_a(ch.gamma_bar_rb, ch.gamma_bar_ar, beta, alpha, beta)


def adaptive_rho_id(ch: ChannelParams, alpha, beta):
    if np.any(np.asarray(alpha) < 0) or np.any(np.asarray(beta) < 0):
        raise ValueError("thresholds must be >= 0")
    return _rho_id(ch.gamma_bar_ar, ch.gamma_bar_rb, beta, alpha)


# --------------------------------------------------------------------------
# adaptive-rate secrecy outage


def _hop1_outage_given_alice(a, b, e, alpha, beta, s):
    """Pr[hop-1 secrecy outage | Alice scheduled], adaptive rate."""
    w = s * e / (s * e + a)
    c = (b / a + b / (s * e)) / (beta / alpha + b / a + b / (s * e))
    share = alpha * b / (alpha * b + beta * a)
    tail = np.exp(-beta / b)
    return w * np.exp(-(alpha + 1.0 - s) / (s * e)) * (1.0 - c * tail) / (1.0 - share * tail)


def adaptive_sop_hop1(ch: ChannelParams, alpha, beta, r_s):
    """Hop-1 secrecy outage probability given that Alice transmits."""
    _positive(alpha=alpha, beta=beta)
    _rate_floor_check(alpha, beta, r_s)
    return _hop1_outage_given_alice(
        ch.gamma_bar_ar, ch.gamma_bar_rb, ch.gamma_bar_ae, alpha, beta, 2.0**r_s
    )


def adaptive_sop_hop2(ch: ChannelParams, alpha, beta, r_s):
    """Hop-2 secrecy outage probability given that Relay transmits."""
    _positive(alpha=alpha, beta=beta)
    _rate_floor_check(alpha, beta, r_s)
    return _hop1_outage_given_alice(
        ch.gamma_bar_rb, ch.gamma_bar_ar, ch.gamma_bar_re, beta, alpha, 2.0**r_s
    )


def sop_e2e(p1, p2):
    """End-to-end secrecy outage probability from the two hop-level ones."""
    p1a, p2a = np.asarray(p1), np.asarray(p2)
    if np.any((p1a < 0) | (p1a > 1) | (p2a < 0) | (p2a > 1)):
        raise ValueError(f"hop probabilities must lie in [0, 1], got {p1}, {p2}")
    return 1.0 - (1.0 - p1) * (1.0 - p2)


def adaptive_tau_ar(ch: ChannelParams, alpha, beta, r_s):
    """Average rate of secure arrivals into the relay buffer (bits/slot)."""
    rho = adaptive_rho_a(ch, alpha, beta)
    return r_s * rho * (1.0 - adaptive_sop_hop1(ch, alpha, beta, r_s))


def adaptive_tau_rb(ch: ChannelParams, alpha, beta, r_s):
    """Exact secrecy throughput to Bob, assuming the buffer never underflows."""
    rho = adaptive_rho_r(ch, alpha, beta)
    return r_s * rho * (1.0 - adaptive_sop_hop2(ch, alpha, beta, r_s))


def appendix_u(ch: ChannelParams, alpha, beta, r_s):
    """Secure-arrival mass from slots with ``g_rb < beta``."""
    a, b, e = ch.gamma_bar_ar, ch.gamma_bar_rb, ch.gamma_bar_ae
    s = 2.0**r_s
    w = s * e / (a + s * e)
    return np.exp(-alpha / a) * -np.expm1(-beta / b) * (1.0 - w * np.exp((s - alpha - 1.0) / (e * s)))


def appendix_v(ch: ChannelParams, alpha, beta, r_s):
    """Secure-arrival mass from slots with ``g_rb >= beta`` won by Alice."""
    a, b, e = ch.gamma_bar_ar, ch.gamma_bar_rb, ch.gamma_bar_ae
    s = 2.0**r_s
    both = np.exp(-(alpha / a + beta / b))
    won = beta * a / (beta * a + alpha * b) * both
    leaked = (
        e * s / (e * s + a)
        * both * np.exp(-(alpha + 1.0 - s) / (e * s))
        / (1.0 + alpha * b / (beta * a) + alpha * b / (beta * s * e))
    )
    return won - leaked


# --------------------------------------------------------------------------
# fixed-rate mechanism


def _alice_floor(alpha, r_a):
    return np.maximum(alpha, 2.0**r_a - 1.0)


def fixed_rho_a(ch: ChannelParams, alpha, beta, r_a):
    _fixed_pre(alpha, beta, r_a)
    return _rho_a(ch.gamma_bar_ar, ch.gamma_bar_rb, alpha, beta, _alice_floor(alpha, r_a))


def fixed_rho_r(ch: ChannelParams, alpha, beta, r_a):
    _fixed_pre(alpha, beta, r_a)
    return _rho_r(ch.gamma_bar_ar, ch.gamma_bar_rb, alpha, beta, _alice_floor(alpha, r_a))


def fixed_rho_id(ch: ChannelParams, alpha, beta, r_a):
    if np.any(np.asarray(alpha) <= 0) or np.any(np.asarray(beta) < 0) or np.any(np.asarray(r_a) <= 0):
        raise ValueError("fixed_rho_id requires alpha > 0, beta >= 0, r_a > 0")
    return _rho_id(ch.gamma_bar_ar, ch.gamma_bar_rb, beta, _alice_floor(alpha, r_a))


def fixed_sop_hop1(gamma_bar_ae, r_a, r_s):
    """Hop-1 outage at codeword rate ``r_a``; depends on Eve's mean only."""
    if not 0 < r_s < r_a:
        raise ValueError(f"fixed mode requires 0 < r_s < r_a, got r_s={r_s}, r_a={r_a}")
    _positive(gamma_bar_ae=gamma_bar_ae)
    return np.exp(-np.expm1((r_a - r_s) * np.log(2.0)) / gamma_bar_ae)


def _fixed_hop2_scaled_outage(a, b, r, alpha, beta, s, m):
    # joint mass of {Relay scheduled, hop-2 outage} times exp(beta / b)
    w = s * r / (s * r + b)
    k = 1.0 / (1.0 + beta * a / (alpha * b) + beta * a / (alpha * s * r))
    low = -np.expm1(-m / a) * np.exp(-(beta + 1.0 - s) / (s * r))
    high = k * np.exp(-m / a - beta * (m / alpha - 1.0) / b - (beta * m / alpha + 1.0 - s) / (s * r))
    return w * (low + high)


def fixed_sop_hop2(ch: ChannelParams, alpha, beta, r_a, r_s):
    """Hop-2 outage given Relay transmits, including the extra relay slots
    created when ``alpha < 2**r_a - 1``."""
    _fixed_pre(alpha, beta, r_a, r_s)
    a, b, r = ch.gamma_bar_ar, ch.gamma_bar_rb, ch.gamma_bar_re
    m = _alice_floor(alpha, r_a)
    s = 2.0**r_s
    return _fixed_hop2_scaled_outage(a, b, r, alpha, beta, s, m) / _rho_r_scaled(a, b, alpha, beta, m)


def fixed_tau_ar(ch: ChannelParams, alpha, beta, r_a, r_s):
    _fixed_pre(alpha, beta, r_a, r_s)
    return fixed_rho_a(ch, alpha, beta, r_a) * (1.0 - fixed_sop_hop1(ch.gamma_bar_ae, r_a, r_s)) * r_s


def fixed_tau_rb(ch: ChannelParams, alpha, beta, r_a, r_s):
    return r_s * fixed_rho_r(ch, alpha, beta, r_a) * (1.0 - fixed_sop_hop2(ch, alpha, beta, r_a, r_s))


# --------------------------------------------------------------------------
# bundles


def _bundle(rho_a, rho_r, rho_id, p1, p2, r_s) -> MetricSet:
    rho_a, rho_r, rho_id, p1, p2 = (float(v) for v in (rho_a, rho_r, rho_id, p1, p2))
    return MetricSet(
        rho_a=rho_a,
        rho_r=rho_r,
        rho_id=rho_id,
        sop1=p1,
        sop2=p2,
        sop_e2e=1.0 - (1.0 - p1) * (1.0 - p2),
        tau_ar=r_s * rho_a * (1.0 - p1),
        tau_rb=r_s * rho_r * (1.0 - p2),
        soct=r_s * rho_r,
    )


def adaptive_metrics(ch: ChannelParams, alpha: float, beta: float, r_s: float, check: bool = True) -> MetricSet:
    """All adaptive-rate metrics at one operating point.

    ``check=False`` skips domain validation; the optimizer uses it for
    finite-difference probes that may land a hair outside the domain.
    """
    if check:
        _positive(alpha=alpha, beta=beta)
        _rate_floor_check(alpha, beta, r_s)
    a, b, e, r = ch.gamma_bar_ar, ch.gamma_bar_rb, ch.gamma_bar_ae, ch.gamma_bar_re
    s = 2.0**r_s
    return _bundle(
        _rho_a(a, b, alpha, beta, alpha),
        _rho_a(b, a, beta, alpha, beta),
        _rho_id(a, b, beta, alpha),
        _hop1_outage_given_alice(a, b, e, alpha, beta, s),
        _hop1_outage_given_alice(b, a, r, beta, alpha, s),
        r_s,
    )


def fixed_metrics(
    ch: ChannelParams, alpha: float, beta: float, r_a: float, r_s: float, check: bool = True
) -> MetricSet:
    """All fixed-rate metrics at one operating point."""
    if check:
        _fixed_pre(alpha, beta, r_a, r_s)
    a, b, e, r = ch.gamma_bar_ar, ch.gamma_bar_rb, ch.gamma_bar_ae, ch.gamma_bar_re
    m = max(alpha, 2.0**r_a - 1.0)
    s = 2.0**r_s
    return _bundle(
        _rho_a(a, b, alpha, beta, m),
        _rho_r(a, b, alpha, beta, m),
        _rho_id(a, b, beta, m),
        np.exp(-np.expm1((r_a - r_s) * np.log(2.0)) / e),
        _fixed_hop2_scaled_outage(a, b, r, alpha, beta, s, m) / _rho_r_scaled(a, b, alpha, beta, m),
        r_s,
    )


def evaluate(ch: ChannelParams, policy: PolicyParams) -> MetricSet:
    if policy.mode is Mode.FIXED:
        return fixed_metrics(ch, policy.alpha, policy.beta, policy.r_a, policy.r_s)
    return adaptive_metrics(ch, policy.alpha, policy.beta, policy.r_s)
