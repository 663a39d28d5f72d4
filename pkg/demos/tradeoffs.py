"""How the best secrecy outage capacity responds to its two caps.

PA1 (adaptive) and PF1 (fixed, r_a = 3) maximize r_s * rho_r subject to an
end-to-end SOP cap mu and an idle cap nu. Loosening either cap can only
help, and the adaptive mechanism should never lose to the fixed one.

    python3 demos/tradeoffs.py
"""

from secrelay.channel import DEFAULT_GAINS_DB, ChannelParams
from secrelay.optimizer import Constants, sweep

NU = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5)
MU = (0.05, 0.1, 0.2, 0.3, 0.5)


def fmt(sol):
    return "infeasible" if sol is None else f"{sol.objective:.4f}"


def table(ch, axis, values, base):
    ad = sweep("PA1", ch, axis, values, base)
    fx = sweep("PF1", ch, axis, values, base)
    print(f"\n{axis:>5}  {'adaptive':>10}  {'fixed':>10}  adaptive optimum (alpha, beta, r_s)")
    for v, a, f in zip(values, ad, fx):
        where = "" if a is None else f"({a.alpha:.3g}, {a.beta:.3g}, {a.r_s:.3f})"
        print(f"{v:5.2f}  {fmt(a):>10}  {fmt(f):>10}  {where}")


def main():
    ch = ChannelParams.from_db(*DEFAULT_GAINS_DB)
    print("SOC against the idle cap nu, SOP cap mu = 0.1")
    table(ch, "nu", NU, Constants(mu=0.1))
    print("\nSOC against the SOP cap mu, idle cap nu = 0.2")
    table(ch, "mu", MU, Constants(nu=0.2))
    # At tight caps the fixed problem runs out of room first: its hop-1 SOP
    # does not depend on the thresholds, so only r_s can buy it back.


if __name__ == "__main__":
    main()
