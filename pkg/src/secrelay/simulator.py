"""Time-slotted Monte Carlo of the buffer-aided relay link.

Each slot: draw the four SNRs, let the policy pick a link from the two
legitimate SNRs, record whether the eavesdropper defeats the Wyner code
on the active hop, and update the relay queue.

The queue moves in whole multiples of ``r_s``, so it is tracked as an
integer count of packets. A block of slots is resolved at once with the
Lindley recursion ``Q_k = max(Q_{k-1} + inc_k, 0)``, which for +-1
increments equals ``S_k - min(0, min_{j<=k} S_j)`` on the running sum
``S``. :func:`iter_slots` is the plain per-slot loop kept as a reference.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .analytic import METRIC_COLUMNS
from .channel import ChannelParams, SnrDraw, make_rng, sample_block, sample_slot, spawn_rngs
from .selection import ALICE, IDLE, RELAY, Mode, PolicyParams, select, select_array

__all__ = [
    "SimConfig",
    "SlotOutcome",
    "ReplicationResult",
    "SimEstimates",
    "evolve_queue",
    "secrecy_outage_hop1",
    "secrecy_outage_hop2",
    "iter_slots",
    "simulate_replication",
    "run",
]

CHUNK = 1 << 18


@dataclass(frozen=True)
class SimConfig:
    channel: ChannelParams
    policy: PolicyParams
    n_slots: int = 1_000_000
    seed: int = 1
    replications: int = 8

    def __post_init__(self):
        if int(self.n_slots) < 1:
            raise ValueError(f"n_slots must be >= 1, got {self.n_slots}")
        if int(self.replications) < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")


@dataclass(frozen=True)
class SlotOutcome:
    draw: SnrDraw
    decision: int
    rate_codeword: float | None
    gamma_outage_1: int | None
    gamma_outage_2: int | None
    queue_after: float
    delivered: float = 0.0


def evolve_queue(q_prev: float, decision: int, r_s: float) -> float:
    if q_prev < 0:
        raise ValueError(f"queue must be >= 0, got {q_prev}")
    if decision == ALICE:
        return q_prev + r_s
    if decision == RELAY:
        return max(q_prev - r_s, 0.0)
    return q_prev


def secrecy_outage_hop1(g_ar: float, g_ae: float, r_s: float, rate_codeword: float | None = None) -> int:
    """1 if Eve's capacity exceeds the rate redundancy on an Alice slot.

    ``rate_codeword`` defaults to the adaptive rate ``log2(1 + g_ar)``;
    pass ``r_a`` for fixed-rate transmission.
    """
    if rate_codeword is None:
        rate_codeword = math.log2(1.0 + g_ar)
    return int(r_s > rate_codeword - math.log2(1.0 + g_ae))


def secrecy_outage_hop2(g_rb: float, g_re: float, r_s: float) -> int:
    return int(r_s > math.log2(1.0 + g_rb) - math.log2(1.0 + g_re))


def iter_slots(channel: ChannelParams, policy: PolicyParams, n_slots: int, rng: np.random.Generator):
    """Yield one :class:`SlotOutcome` per slot (slow reference path)."""
    q = 0.0
    for _ in range(n_slots):
        d = sample_slot(channel, rng)
        i_k = select(d.g_ar, d.g_rb, policy)
        rate = out1 = out2 = None
        delivered = 0.0
        if i_k == ALICE:
            rate = policy.r_a if policy.mode is Mode.FIXED else math.log2(1.0 + d.g_ar)
            out1 = secrecy_outage_hop1(d.g_ar, d.g_ae, policy.r_s, rate)
        elif i_k == RELAY:
            rate = math.log2(1.0 + d.g_rb)
            out2 = secrecy_outage_hop2(d.g_rb, d.g_re, policy.r_s)
            delivered = min(policy.r_s, q)
        q = evolve_queue(q, i_k, policy.r_s)
        yield SlotOutcome(d, i_k, rate, out1, out2, q, delivered)


@dataclass
class ReplicationResult:
    """Raw counters of one independent replication."""

    n_slots: int
    n_alice: int = 0
    n_relay: int = 0
    n_idle: int = 0
    n_out1: int = 0
    n_out2: int = 0
    # packets of size r_s
    secure_arrivals: int = 0
    secure_deliveries: int = 0
    admitted: int = 0
    delivered: int = 0
    final_queue: int = 0
    underflow_slots: int = 0

    def check_accounting(self):
        if self.n_alice + self.n_relay + self.n_idle != self.n_slots:
            raise RuntimeError("decision counts do not partition the slots")
        if self.admitted - self.delivered != self.final_queue:
            raise RuntimeError(
                f"flow conservation broken: admitted {self.admitted} - delivered "
                f"{self.delivered} != final queue {self.final_queue}"
            )


def _check_rate_guarantee(draw, dec, policy):
    floor = policy.rate_floor
    if np.any(draw.g_ar[dec == ALICE] < floor) or np.any(draw.g_rb[dec == RELAY] < floor):
        raise RuntimeError("a scheduled link cannot carry r_s")
    if policy.mode is Mode.FIXED and np.any(draw.g_ar[dec == ALICE] < policy.codeword_floor):
        raise RuntimeError("fixed-rate Alice slot in channel outage")


def simulate_replication(
    channel: ChannelParams, policy: PolicyParams, n_slots: int, rng: np.random.Generator, chunk: int = CHUNK
) -> ReplicationResult:
    res = ReplicationResult(n_slots=n_slots)
    q = 0
    r_s = policy.r_s
    done = 0
    while done < n_slots:
        n = min(chunk, n_slots - done)
        draw = sample_block(channel, rng, n)
        dec = select_array(draw.g_ar, draw.g_rb, policy)
        _check_rate_guarantee(draw, dec, policy)
        alice = dec == ALICE
        relay = dec == RELAY

        if policy.mode is Mode.FIXED:
            redundancy1 = policy.r_a - np.log2(1.0 + draw.g_ae[alice])
        else:
            redundancy1 = np.log2(1.0 + draw.g_ar[alice]) - np.log2(1.0 + draw.g_ae[alice])
        out1 = r_s > redundancy1
        out2 = r_s > np.log2(1.0 + draw.g_rb[relay]) - np.log2(1.0 + draw.g_re[relay])

        inc = alice.astype(np.int64) - relay.astype(np.int64)
        walk = q + np.cumsum(inc)
        queue = walk - np.minimum(np.minimum.accumulate(walk), 0)
        prev = np.concatenate(([q], queue[:-1]))
        dropped = prev - queue  # on relay slots: 1 if a packet left, 0 on underflow

        res.n_alice += int(alice.sum())
        res.n_relay += int(relay.sum())
        res.n_idle += int((dec == IDLE).sum())
        res.n_out1 += int(out1.sum())
        res.n_out2 += int(out2.sum())
        res.secure_arrivals += int((~out1).sum())
        res.secure_deliveries += int(dropped[relay][~out2].sum())
        res.admitted += int(alice.sum())
        res.delivered += int(dropped[relay].sum())
        res.underflow_slots += int((relay & (prev == 0)).sum())
        q = int(queue[-1])
        done += n
    res.final_queue = q
    res.check_accounting()
    return res


def _t_halfwidth(samples, level=0.95):
    samples = np.asarray(samples, dtype=float)
    n = len(samples)
    if n < 2:
        return math.nan
    return float(stats.t.ppf(0.5 + level / 2, n - 1) * samples.std(ddof=1) / math.sqrt(n))


@dataclass(frozen=True)
class SimEstimates:
    """Point estimates plus 95% Student-t half-widths across replications."""

    values: dict
    ci: dict
    replications: list = field(repr=False)
    r_s: float = 1.0

    def __getattr__(self, name):
        values = self.__dict__.get("values", {})
        if name in values:
            return values[name]
        raise AttributeError(name)

    @property
    def n_slots(self) -> int:
        return sum(r.n_slots for r in self.replications)

    def _pooled(self, attr):
        return sum(getattr(r, attr) for r in self.replications)

    def sigma_sop(self, hop: int) -> float:
        """Binomial standard error of a pooled hop-level SOP estimate."""
        n = self._pooled("n_alice" if hop == 1 else "n_relay")
        p = self.values["sop1" if hop == 1 else "sop2"]
        return math.sqrt(p * (1 - p) / n) if n else math.nan

    def sigma_sop_e2e(self) -> float:
        """Delta-method binomial standard error of the end-to-end SOP."""
        p1, p2 = self.values["sop1"], self.values["sop2"]
        s1, s2 = self.sigma_sop(1), self.sigma_sop(2)
        return math.sqrt(((1 - p2) * s1) ** 2 + ((1 - p1) * s2) ** 2)

    def sigma_mean(self, name: str) -> float:
        """Standard error of a per-slot time average (tau_ar, tau_rb, soct, rho_*)."""
        n = self.n_slots
        if name in ("rho_a", "rho_r", "rho_id"):
            p = self.values[name]
            return math.sqrt(p * (1 - p) / n)
        # per-slot reward is r_s * Bernoulli(p) up to underflow slots
        p = min(max(self.values[name] / self.r_s, 0.0), 1.0)
        return self.r_s * math.sqrt(p * (1 - p) / n)

    @property
    def underflow_fraction(self) -> float:
        return self._pooled("underflow_slots") / self.n_slots

    @property
    def edge_of_non_absorbing(self) -> bool:
        """True when the replication CI of tau_ar - tau_rb covers zero."""
        diffs = [(r.secure_arrivals - r.secure_deliveries) * self.r_s / r.n_slots for r in self.replications]
        hw = _t_halfwidth(diffs)
        mean = float(np.mean(diffs))
        return not math.isnan(hw) and abs(mean) <= hw

    def row(self) -> dict:
        out = {}
        for k in METRIC_COLUMNS:
            out[k] = self.values[k]
            out[k + "_ci"] = self.ci[k]
        return out


def _summarize(reps: list[ReplicationResult], r_s: float) -> SimEstimates:
    def ratio(num, den):
        return num / den if den else 0.0

    per = {k: [] for k in METRIC_COLUMNS}
    for r in reps:
        n = r.n_slots
        p1 = ratio(r.n_out1, r.n_alice)
        p2 = ratio(r.n_out2, r.n_relay)
        per["rho_a"].append(r.n_alice / n)
        per["rho_r"].append(r.n_relay / n)
        per["rho_id"].append(r.n_idle / n)
        per["sop1"].append(p1)
        per["sop2"].append(p2)
        per["sop_e2e"].append(1 - (1 - p1) * (1 - p2))
        per["tau_ar"].append(r_s * r.secure_arrivals / n)
        per["tau_rb"].append(r_s * r.secure_deliveries / n)
        per["soct"].append(r_s * r.n_relay / n)

    tot = lambda a: sum(getattr(r, a) for r in reps)
    n = tot("n_slots")
    p1 = ratio(tot("n_out1"), tot("n_alice"))
    p2 = ratio(tot("n_out2"), tot("n_relay"))
    values = {
        "rho_a": tot("n_alice") / n,
        "rho_r": tot("n_relay") / n,
        "rho_id": tot("n_idle") / n,
        "sop1": p1,
        "sop2": p2,
        "sop_e2e": 1 - (1 - p1) * (1 - p2),
        "tau_ar": r_s * tot("secure_arrivals") / n,
        "tau_rb": r_s * tot("secure_deliveries") / n,
        "soct": r_s * tot("n_relay") / n,
    }
    ci = {k: _t_halfwidth(v) for k, v in per.items()}
    return SimEstimates(values=values, ci=ci, replications=reps, r_s=r_s)


def run(config: SimConfig, workers: int = 1) -> SimEstimates:
    """Run ``config.replications`` independent replications and pool them.

    Each replication gets ``n_slots // replications`` slots (the remainder
    goes to the first ones), so ``n_slots`` is the total budget.
    """
    R = int(config.replications)
    base, extra = divmod(int(config.n_slots), R)
    sizes = [base + (i < extra) for i in range(R)]
    if min(sizes) < 1:
        raise ValueError("n_slots must be >= replications")
    rngs = spawn_rngs(config.seed, R)

    def one(i):
        return simulate_replication(config.channel, config.policy, sizes[i], rngs[i])

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            reps = list(pool.map(one, range(R)))
    else:
        reps = [one(i) for i in range(R)]
    return _summarize(reps, config.policy.r_s)


def single_stream(config: SimConfig):
    """Reference per-slot run over one stream seeded with ``config.seed``."""
    return list(iter_slots(config.channel, config.policy, config.n_slots, make_rng(config.seed)))
