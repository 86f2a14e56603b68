"""Final fidelity after 4000 logical Hadamards, one- vs four-qubit ancilla.

Prints a rate x period grid and writes the full series as CSV.

    python scripts/reproduce_table2.py --trials 2000 --out table2.csv
"""

import argparse
import sys

from qecsim.cli import emit_csv, expand_preset
from qecsim.experiment import run_experiment

REFERENCE = {
    ("one", 1e-5): (0.5840, 0.9836, 0.9920, 0.9942, 0.9925),
    ("four", 1e-5): (0.5750, 0.9808, 0.9886, 0.9955, 0.9922),
    ("one", 1e-4): (0.4970, 0.8290, 0.8910, 0.8940, 0.7110),
    ("four", 1e-4): (0.5020, 0.8010, 0.8558, 0.8705, 0.7164),
    ("one", 1e-3): (0.4890, 0.5070, 0.4780, 0.5220, 0.5070),
    ("four", 1e-3): (0.4900, 0.5082, 0.5075, 0.4928, 0.5034),
}
PERIODS = (1, 50, 100, 200, 2000)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    ap.add_argument("--skip-period-one", action="store_true", help="drop the slow y=1 column")
    args = ap.parse_args(argv)

    preset = expand_preset("table2", trials=args.trials, seed=args.seed)
    configs = [c for c in preset.configs if not (args.skip_period_one and c.qec_period == 1)]
    series = []
    for c in configs:
        s = run_experiment(c)
        series.append(s)
        ref = REFERENCE[(c.ancilla_mode, c.p)][PERIODS.index(c.qec_period)]
        print(f"{c.ancilla_mode:>4} p={c.p:<6g} y={c.qec_period:<5} F={s.final:.4f} +- {s.final_se:.4f}"
              f"  reference {ref:.4f}", flush=True)
    if args.out:
        emit_csv(series, False, args.out)


if __name__ == "__main__":
    sys.exit(main())
