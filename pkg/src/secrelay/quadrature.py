"""Numerical-integration oracle for the selection and outage events.

Each event is integrated directly from its definition against the
exponential SNR densities, independently of the closed forms in
:mod:`secrelay.analytic`. Outer dimensions use adaptive Gauss-Kronrod
(``scipy.integrate.quad``) after the substitution ``x = lo - m log(1 - t)``,
which maps an exponential law on ``[lo, inf)`` onto a uniform law on
``[0, 1)``. The innermost dimension is always an exponential interval
probability and is evaluated exactly.
"""

from __future__ import annotations

import math
import warnings

from scipy import integrate

from .analytic import MetricSet
from .channel import ChannelParams
from .selection import Mode, PolicyParams

__all__ = ["EVENTS", "QuadratureError", "quadrature_oracle", "oracle_metrics"]

EVENTS = (
    "alice",
    "relay",
    "idle",
    "alice_outage",
    "alice_secure",
    "relay_outage",
    "relay_secure",
    "ar_pass_rb_fail",
)

TOL = 1e-7


class QuadratureError(RuntimeError):
    def __init__(self, msg, achieved):
        super().__init__(f"{msg} (achieved abs error {achieved:.3g})")
        self.achieved = achieved


def _interval(mean, lo, hi=math.inf):
    """Pr[lo <= X < hi] for X ~ Exp(mean)."""
    lo = max(lo, 0.0)
    if hi <= lo:
        return 0.0
    if math.isinf(hi):
        return math.exp(-lo / mean)
    return math.exp(-lo / mean) * -math.expm1(-(hi - lo) / mean)


class _Integrator:
    def __init__(self, tol):
        self.tol = tol
        self.err = 0.0

    def __call__(self, f, mean, lo, hi=math.inf):
        """Integral of ``f(x)`` against the Exp(mean) density on ``[lo, hi)``."""
        lo = max(lo, 0.0)
        if hi <= lo:
            return 0.0
        top = 1.0 if math.isinf(hi) else -math.expm1(-(hi - lo) / mean)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(
                lambda t: f(lo - mean * math.log1p(-t)),
                0.0,
                top,
                epsabs=self.tol * 1e-3,
                epsrel=1e-11,
                limit=200,
            )
        scale = math.exp(-lo / mean)
        self.err += scale * err
        return scale * val


def _outage_floor(hop, mode, g, s, r_a, r_s):
    """Smallest eavesdropper SNR that causes outage on an active hop."""
    if hop == 1 and mode is Mode.FIXED:
        return 2.0 ** (r_a - r_s) - 1.0
    # log2(1 + g) - log2(1 + g_e) < r_s  <=>  g_e > (1 + g) / s - 1
    return (1.0 + g) / s - 1.0


def quadrature_oracle(event: str, ch: ChannelParams, policy: PolicyParams, tol: float = TOL) -> float:
    """Probability of ``event`` by nested quadrature.

    Events ending in ``_outage``/``_secure`` are joint probabilities of the
    hop being scheduled and the secrecy outage occurring (or not).
    ``ar_pass_rb_fail`` is the plain event ``g_ar >= alpha, g_rb < beta``.
    """
    if event not in EVENTS:
        raise ValueError(f"unknown event {event!r}; expected one of {EVENTS}")
    a, b, e, r = ch.gamma_bar_ar, ch.gamma_bar_rb, ch.gamma_bar_ae, ch.gamma_bar_re
    alpha, beta, r_s = policy.alpha, policy.beta, policy.r_s
    mode, r_a = policy.mode, policy.r_a
    s = 2.0**r_s
    m = max(alpha, 2.0**r_a - 1.0) if mode is Mode.FIXED else alpha
    quad = _Integrator(tol)

    if event == "ar_pass_rb_fail":
        val = quad(lambda y: _interval(a, alpha), b, 0.0, beta)
    elif event == "idle":
        val = quad(lambda x: _interval(b, 0.0, beta), a, 0.0, m)
    elif event.startswith("alice"):
        # Alice wins iff g_ar >= m and g_ar >= alpha g_rb / beta; outer variable g_rb
        if event == "alice":
            inner = lambda lo: _interval(a, lo)
        else:
            want_outage = event == "alice_outage"

            def eve(x):
                p = _interval(e, _outage_floor(1, mode, x, s, r_a, r_s))
                return p if want_outage else 1.0 - p

            inner = lambda lo: quad(eve, a, lo)
        knee = beta * m / alpha
        val = quad(lambda y: inner(m), b, 0.0, knee) + quad(lambda y: inner(alpha * y / beta), b, knee)
    else:
        # Relay transmits iff (g_ar < m and g_rb >= beta) or (g_ar >= m and g_rb > beta g_ar / alpha)
        if event == "relay":
            inner = lambda lo: _interval(b, lo)
        else:
            want_outage = event == "relay_outage"

            def eve(y):
                p = _interval(r, _outage_floor(2, mode, y, s, r_a, r_s))
                return p if want_outage else 1.0 - p

            inner = lambda lo: quad(eve, b, lo)
        val = quad(lambda x: inner(beta), a, 0.0, m) + quad(lambda x: inner(beta * x / alpha), a, m)

    if quad.err > tol:
        raise QuadratureError(f"quadrature for {event!r} did not reach tolerance {tol:g}", quad.err)
    return float(val)


def oracle_metrics(ch: ChannelParams, policy: PolicyParams, tol: float = TOL) -> MetricSet:
    """Full metric set assembled from oracle event probabilities."""
    q = lambda ev: quadrature_oracle(ev, ch, policy, tol)
    rho_a, rho_r, rho_id = q("alice"), q("relay"), q("idle")
    out1, sec1 = q("alice_outage"), q("alice_secure")
    out2, sec2 = q("relay_outage"), q("relay_secure")
    p1 = out1 / rho_a if rho_a > 0 else 0.0
    p2 = out2 / rho_r if rho_r > 0 else 0.0
    return MetricSet(
        rho_a=rho_a,
        rho_r=rho_r,
        rho_id=rho_id,
        sop1=p1,
        sop2=p2,
        sop_e2e=1.0 - (1.0 - p1) * (1.0 - p2),
        tau_ar=policy.r_s * sec1,
        tau_rb=policy.r_s * sec2,
        soct=policy.r_s * rho_r,
    )
