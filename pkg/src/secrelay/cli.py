"""Command-line front end: ``simulate``, ``analytic``, ``optimize``, ``sweep``, ``validate``.

Settings come from a flat ``key=value`` config file (``--config``) and/or
per-key flags; flags win. Every key has a default matching the reference
operating point (gains 5/10/0/2 dB, alpha=7, beta=8, r_s=1), so an empty
config is valid. Output is CSV in the dialect of :mod:`secrelay.csvio`,
preceded by ``#`` provenance lines that echo the effective config. Rows are
computed in full before anything is written, so a failure never leaves a
partial file behind.

Errors go to stderr as one machine-readable line::

    error code=<code> key=<key> line=<n> message=<text>

and the process exits with status 2. ``validate`` exits with status 1 when
any point fails its 3-sigma check.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analytic import evaluate
from .channel import ChannelParams
from .csvio import (
    METRIC_CI_COLUMNS,
    PARAM_COLUMNS,
    SOLUTION_COLUMNS,
    check_metric_row,
    read_table,
    write_table,
)
from .optimizer.problems import KINDS, Constants, Solution, solve_problem, sweep
from .selection import Mode, PolicyParams
from .simulator import SimConfig, run

__all__ = ["ExperimentConfig", "ConfigError", "parse_config", "run_experiment", "main"]

COMMANDS = ("simulate", "analytic", "optimize", "sweep", "validate")
SEED_ENV = "SECRELAY_SEED"
OPT_AXES = ("mu", "nu", "theta")
PARAM_AXES = ("alpha", "beta", "r_s", "r_a", "gamma_ar_db", "gamma_rb_db", "gamma_ae_db", "gamma_re_db")


class ConfigError(ValueError):
    def __init__(self, message, key=None, line=None, code="bad_config"):
        super().__init__(message)
        self.key, self.line, self.code = key, line, code

    def machine_line(self) -> str:
        msg = str(self).replace("\n", " ")
        return f"error code={self.code} key={self.key or '-'} line={self.line or '-'} message={msg}"


def _float(s):
    v = float(s)
    if not np.isfinite(v):
        raise ValueError(f"{s!r} is not finite")
    return v


def _uint64(s):
    v = int(s)
    if not 0 <= v < 2**64:
        raise ValueError(f"{s!r} is outside 0..2**64-1")
    return v


def _posint(s):
    v = int(s)
    if v < 1:
        raise ValueError(f"{s!r} must be >= 1")
    return v


def _choice(*options):
    def parse(s):
        if s not in options:
            raise ValueError(f"{s!r} is not one of {'|'.join(options)}")
        return s

    return parse


def _float_list(s):
    vals = tuple(_float(p) for p in s.split(",") if p.strip())
    if not vals:
        raise ValueError("empty list")
    return vals


# key -> (parser, default, help)
FIELDS = {
    "mode": (_choice("adaptive", "fixed"), "adaptive", "transmission mechanism"),
    "gamma_ar_db": (_float, 5.0, "mean SNR Alice->relay, dB"),
    "gamma_rb_db": (_float, 10.0, "mean SNR relay->Bob, dB"),
    "gamma_ae_db": (_float, 0.0, "mean SNR Alice->Eve, dB"),
    "gamma_re_db": (_float, 2.0, "mean SNR relay->Eve, dB"),
    "alpha": (_float, 7.0, "Alice->relay selection threshold (linear)"),
    "beta": (_float, 8.0, "relay->Bob selection threshold (linear)"),
    "r_s": (_float, 1.0, "secrecy rate, bits/s/Hz"),
    "r_a": (_float, 3.0, "fixed codeword rate on hop 1 (fixed mode)"),
    "slots": (_posint, 1_000_000, "total simulated slots per point"),
    "reps": (_posint, 8, "independent replications per point"),
    "seed": (_uint64, 1, f"root seed (default from ${SEED_ENV} if set)"),
    "workers": (_posint, 1, "threads for replications"),
    "out": (str, "-", "output CSV path, - for stdout"),
    "input": (str, "", "parameter CSV for batch analytic evaluation"),
    "problem": (_choice(*KINDS), "PA1", "optimization problem"),
    "mu": (_float, 0.1, "end-to-end SOP cap"),
    "nu": (_float, 0.2, "idle probability cap"),
    "theta": (_float, 0.1, "secrecy outage capacity floor"),
    "sweep_param": (_choice(*OPT_AXES, *PARAM_AXES), "nu", "swept key"),
    "sweep_start": (_float, 0.05, "first sweep value"),
    "sweep_stop": (_float, 0.5, "last sweep value"),
    "sweep_steps": (_posint, 10, "number of sweep values (>= 2)"),
    "engine": (_choice("analytic", "simulate"), "analytic", "evaluator for parameter sweeps"),
    "validate_rs": (_float_list, (0.5, 1.0, 1.5, 2.0, 2.5), "comma separated r_s values for validate"),
}

# keys left out of provenance so the same run to two paths is byte-identical
_NO_ECHO = ("out", "input", "workers")


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "adaptive"
    gamma_ar_db: float = 5.0
    gamma_rb_db: float = 10.0
    gamma_ae_db: float = 0.0
    gamma_re_db: float = 2.0
    alpha: float = 7.0
    beta: float = 8.0
    r_s: float = 1.0
    r_a: float = 3.0
    slots: int = 1_000_000
    reps: int = 8
    seed: int = 1
    workers: int = 1
    out: str = "-"
    input: str = ""
    problem: str = "PA1"
    mu: float = 0.1
    nu: float = 0.2
    theta: float = 0.1
    sweep_param: str = "nu"
    sweep_start: float = 0.05
    sweep_stop: float = 0.5
    sweep_steps: int = 10
    engine: str = "analytic"
    validate_rs: tuple = (0.5, 1.0, 1.5, 2.0, 2.5)
    command: str = field(default="simulate", compare=False)

    def channel(self) -> ChannelParams:
        return ChannelParams.from_db(self.gamma_ar_db, self.gamma_rb_db, self.gamma_ae_db, self.gamma_re_db)

    def policy(self, **override) -> PolicyParams:
        p = {"alpha": self.alpha, "beta": self.beta, "r_s": self.r_s, "r_a": self.r_a, **override}
        fixed = self.mode == "fixed"
        return PolicyParams(p["alpha"], p["beta"], p["r_s"], p["r_a"] if fixed else None, Mode(self.mode))

    def constants(self) -> Constants:
        return Constants(mu=self.mu, nu=self.nu, theta=self.theta, r_a=self.r_a)

    def sweep_values(self) -> np.ndarray:
        return np.linspace(self.sweep_start, self.sweep_stop, self.sweep_steps)

    def provenance(self) -> list[str]:
        pairs = []
        for k in FIELDS:
            if k in _NO_ECHO:
                continue
            v = getattr(self, k)
            v = ",".join(repr(x) for x in v) if isinstance(v, tuple) else v
            pairs.append(f"{k}={v}")
        return [f"secrelay {__version__} command={self.command}", "config " + " ".join(pairs)]

    def validate(self) -> "ExperimentConfig":
        if self.command == "sweep" and self.sweep_steps < 2:
            raise ConfigError("sweep needs sweep_steps >= 2", key="sweep_steps")
        try:
            self.channel()
            self.constants()
            if self.command not in ("optimize", "validate") and not (self.command == "sweep" and self.sweep_param in PARAM_AXES):
                self.policy()
        except ValueError as exc:
            raise ConfigError(str(exc), key=_blame(str(exc)), code="bad_value") from exc
        if self.out != "-":
            parent = os.path.dirname(os.path.abspath(self.out))
            if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
                raise ConfigError(f"output directory {parent} is not writable", key="out", code="io")
        return self


def _blame(message: str) -> str | None:
    """Config key named by a validation message such as ``alpha must be ...``."""
    word = message.split(" ", 1)[0].rstrip(":,")
    if word.startswith("gamma_bar_"):
        word = f"gamma_{word[len('gamma_bar_'):]}_db"
    return word if word in FIELDS else None


def _coerce(key, raw, line=None):
    if key not in FIELDS:
        raise ConfigError(f"unknown key {key!r}", key=key, line=line, code="unknown_key")
    try:
        return FIELDS[key][0](raw.strip())
    except ValueError as exc:
        raise ConfigError(f"invalid value for {key}: {exc}", key=key, line=line, code="bad_value") from None


def parse_config(text: str) -> dict:
    """Parse ``key=value`` lines into a dict of typed overrides.

    Blank lines and ``#`` comments (whole-line or trailing) are ignored.
    Unknown keys, malformed lines, bad values and repeated keys raise
    :class:`ConfigError` naming the key and 1-based line number. Missing
    keys are simply absent; :func:`build_config` fills in defaults.
    """
    out = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {raw.strip()!r}", line=n, code="syntax")
        key, value = (p.strip() for p in line.split("=", 1))
        if key in out:
            raise ConfigError(f"key {key!r} given twice", key=key, line=n, code="duplicate_key")
        out[key] = _coerce(key, value, n)
    return out


def build_config(command: str, file_values: dict, flag_values: dict) -> ExperimentConfig:
    values = {}
    env_seed = os.environ.get(SEED_ENV)
    if env_seed:
        values["seed"] = _coerce("seed", env_seed)
    values.update(file_values)
    values.update(flag_values)
    return ExperimentConfig(command=command, **values).validate()


# --- commands ---------------------------------------------------------------


def _point_seed(root: int, index: int) -> int:
    return int(np.random.SeedSequence((root, index)).generate_state(1, np.uint64)[0])


def _param_row(cfg: ExperimentConfig, **override) -> dict:
    row = {k: getattr(cfg, k) for k in PARAM_COLUMNS}
    row.update(override)
    if row["mode"] != "fixed":
        row["r_a"] = None
    return row


def _analytic_row(cfg: ExperimentConfig, **override) -> dict:
    c = dataclasses.replace(cfg, **override)
    m = evaluate(c.channel(), c.policy())
    row = _param_row(c)
    for k, v in m.as_dict().items():
        row[k], row[k + "_ci"] = float(v), 0.0
    return row


def _sim_row(cfg: ExperimentConfig, index: int = 0, **override) -> tuple[dict, object]:
    c = dataclasses.replace(cfg, **override)
    seed = cfg.seed if index == 0 else _point_seed(cfg.seed, index)
    est = run(SimConfig(c.channel(), c.policy(), n_slots=c.slots, seed=seed, replications=c.reps), workers=c.workers)
    row = _param_row(c)
    row.update({"slots": c.slots, "reps": c.reps, "seed": seed})
    row.update({k: float(v) for k, v in est.row().items()})
    return row, est


def _sim_columns():
    return PARAM_COLUMNS + ("slots", "reps", "seed") + METRIC_CI_COLUMNS


def cmd_simulate(cfg):
    row, _ = _sim_row(cfg)
    check_metric_row(row)
    return _sim_columns(), [row]


def cmd_analytic(cfg):
    if not cfg.input:
        row = _analytic_row(cfg)
        check_metric_row(row)
        return PARAM_COLUMNS + METRIC_CI_COLUMNS, [row]
    try:
        with open(cfg.input) as fh:
            header, rows = read_table(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read {cfg.input}: {exc.strerror}", key="input", code="io") from None
    except ValueError as exc:
        raise ConfigError(f"{cfg.input}: {exc}", key="input", code="bad_input") from None
    for h in header:
        if h in METRIC_CI_COLUMNS:
            raise ConfigError(f"input already has metric column {h!r}", key="input", code="bad_input")
        if h not in PARAM_COLUMNS:
            raise ConfigError(f"unknown input column {h!r}", key="input", code="bad_input")
    out = []
    for n, rec in enumerate(rows, start=1):
        try:
            over = {k: _coerce(k, v) for k, v in rec.items() if v != ""}
            if "mode" in over or "r_a" in over:
                over.setdefault("mode", cfg.mode)
            row = _analytic_row(cfg, **over)
        except (ConfigError, ValueError) as exc:
            raise ConfigError(f"{cfg.input} data row {n}: {exc}", key="input", line=n, code="bad_input") from None
        check_metric_row(row)
        merged = dict(rec)
        merged.update({k: row[k] for k in METRIC_CI_COLUMNS})
        out.append(merged)
    return tuple(header) + METRIC_CI_COLUMNS, out


def _solution_row(kind: str, c: Constants, sol: Solution | None) -> dict:
    row = {"kind": kind, "mu": c.mu, "nu": c.nu, "theta": c.theta, "r_a": c.r_a if kind.startswith("PF") else None}
    if sol is None:
        row.update({"feasible": False, "status": "infeasible"})
        return row
    m = sol.metrics
    row.update(
        {
            "branch": sol.branch or "",
            "feasible": True,
            "alpha": sol.alpha,
            "beta": sol.beta,
            "r_s": sol.r_s,
            "objective": sol.objective,
            "grid_best": float(sol.grid_best),
            "residual_min": float(min(sol.residuals.values())),
            "residuals": ";".join(f"{k}:{float(v)!r}" for k, v in sol.residuals.items()),
            "iterations": sol.iterations,
            "status": sol.status,
            "soct": m.soct,
            "sop_e2e": m.sop_e2e,
            "rho_id": m.rho_id,
            "tau_ar": m.tau_ar,
            "tau_rb": m.tau_rb,
        }
    )
    return row


def cmd_optimize(cfg):
    c = cfg.constants()
    sol = solve_problem(cfg.problem, cfg.channel(), c)
    return SOLUTION_COLUMNS, [_solution_row(cfg.problem, c, sol)]


def cmd_sweep(cfg):
    values = cfg.sweep_values()
    if cfg.sweep_param in OPT_AXES:
        base = cfg.constants()
        try:
            sols = sweep(cfg.problem, cfg.channel(), cfg.sweep_param, values, base)
        except ValueError as exc:
            raise ConfigError(str(exc), key=cfg.sweep_param, code="bad_value") from None
        rows = [
            _solution_row(cfg.problem, dataclasses.replace(base, **{cfg.sweep_param: float(v)}), s)
            for v, s in zip(values, sols)
        ]
        return SOLUTION_COLUMNS, rows

    rows = []
    for i, v in enumerate(values):
        over = {cfg.sweep_param: float(v)}
        try:
            if cfg.engine == "simulate":
                row, _ = _sim_row(cfg, i, **over)
            else:
                row = _analytic_row(cfg, **over)
        except ValueError as exc:
            raise ConfigError(f"sweep point {cfg.sweep_param}={v!r}: {exc}", key=cfg.sweep_param, code="bad_value") from None
        check_metric_row(row)
        rows.append(row)
    cols = _sim_columns() if cfg.engine == "simulate" else PARAM_COLUMNS + METRIC_CI_COLUMNS
    return cols, rows


VALIDATE_COLUMNS = PARAM_COLUMNS + ("slots", "reps", "seed", "sim_sop_e2e", "analytic_sop_e2e", "abs_diff", "bound_3sigma", "status")


def cmd_validate(cfg):
    rows = []
    for i, r_s in enumerate(cfg.validate_rs):
        try:
            sim, est = _sim_row(cfg, i, r_s=r_s)
            ana = _analytic_row(cfg, r_s=r_s)
        except ValueError as exc:
            raise ConfigError(f"validate point r_s={r_s!r}: {exc}", key="validate_rs", code="bad_value") from None
        check_metric_row(sim)
        diff = abs(sim["sop_e2e"] - ana["sop_e2e"])
        bound = 3.0 * est.sigma_sop_e2e()
        row = {k: sim[k] for k in PARAM_COLUMNS + ("slots", "reps", "seed")}
        row.update(
            sim_sop_e2e=sim["sop_e2e"],
            analytic_sop_e2e=ana["sop_e2e"],
            abs_diff=diff,
            bound_3sigma=bound,
            status="PASS" if diff <= bound else "FAIL",
        )
        rows.append(row)
    return VALIDATE_COLUMNS, rows


HANDLERS = {
    "simulate": cmd_simulate,
    "analytic": cmd_analytic,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
}


def run_experiment(cfg: ExperimentConfig, stream=None) -> int:
    """Compute every row, then write the CSV to ``cfg.out`` (or ``stream``)."""
    columns, rows = HANDLERS[cfg.command](cfg)
    if stream is not None:
        write_table(stream, columns, rows, cfg.provenance())
    elif cfg.out == "-":
        write_table(sys.stdout, columns, rows, cfg.provenance())
    else:
        with open(cfg.out, "w", newline="") as fh:
            write_table(fh, columns, rows, cfg.provenance())
    if cfg.command == "validate" and any(r["status"] == "FAIL" for r in rows):
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="secrelay", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"secrelay {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", metavar="PATH", help="key=value config file")
        for key, (_, default, help_) in FIELDS.items():
            flags = ["--" + key.replace("_", "-")]
            if "_" in key:
                flags.append("--" + key)
            if key == "input":
                flags.append("--in")
            shown = ",".join(map(str, default)) if isinstance(default, tuple) else default
            sp.add_argument(*flags, dest=key, metavar=key.upper(), default=None, help=f"{help_} [{shown}]")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        file_values = {}
        if args.config:
            try:
                with open(args.config) as fh:
                    file_values = parse_config(fh.read())
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc.strerror}", key="config", code="io") from None
        flags = {k: _coerce(k, v) for k, v in vars(args).items() if k in FIELDS and v is not None}
        cfg = build_config(args.command, file_values, flags)
        return run_experiment(cfg)
    except ConfigError as exc:
        print(exc.machine_line(), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
