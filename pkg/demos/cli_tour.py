"""A short tour of the ``secrelay`` command line.

Each step runs the CLI in-process and prints the CSV it wrote. The same
commands work from a shell, e.g. ``secrelay validate --seed 7``.

    python3 demos/cli_tour.py
"""

import io
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

from secrelay.cli import main

STEPS = [
    ["analytic", "--alpha", "7", "--beta", "8", "--r-s", "1.5"],
    ["simulate", "--alpha", "7", "--beta", "8", "--r-s", "1.5", "--slots", "200000", "--seed", "5"],
    ["validate", "--mode", "fixed", "--r-a", "4", "--slots", "200000"],
    ["optimize", "--problem", "PA1", "--mu", "0.1", "--nu", "0.2"],
]


def run(argv):
    buf = io.StringIO()
    with redirect_stdout(buf), redirect_stderr(buf):
        code = main(argv)
    print("$ secrelay " + " ".join(argv) + f"    (exit {code})")
    print(buf.getvalue())


def main_tour():
    for argv in STEPS:
        run(argv)

    # config files are key=value; command-line flags override them
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "sweep.cfg"
        cfg.write_text("sweep_param = r_s\nsweep_start = 0.5\nsweep_stop = 2.5\nsweep_steps = 5\nengine = analytic\n")
        run(["sweep", "--config", str(cfg), "--mode", "fixed", "--r-a", "3"])

    # a bad key is reported on one machine-readable line, exit code 2
    run(["analytic", "--alpha", "-1"])


if __name__ == "__main__":
    main_tour()
