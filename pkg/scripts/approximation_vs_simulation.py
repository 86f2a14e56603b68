"""Monte Carlo fidelity against the first-order closed forms.

Runs the seven-qubit code with QEC every y gates and prints, at each unit
boundary (every 2y gates), the simulated fidelity next to the periodic-QEC
formula evaluated with the measured (C, L). A second column squares the
unit survival term, i.e. counts each degrading fault as a sign flip of the
logical Bloch component, which is how the physical and encoded forms treat
a unit.

    python scripts/approximation_vs_simulation.py --p 1e-5 --y 50 --gates 2000
"""

import argparse

import numpy as np

from qecsim import analysis
from qecsim.cli import measured_constants
from qecsim.experiment import ExperimentConfig, run_experiment


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--p", type=float, default=1e-5)
    ap.add_argument("--y", type=int, default=50)
    ap.add_argument("--gates", type=int, default=2000)
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--ancilla", choices=("one", "four"), default="one")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    c, loc = measured_constants(args.ancilla, args.y)
    print(f"measured C={c} L={loc} (defaults would be C=272 L={analysis.default_locations(args.y)})")
    s = run_experiment(ExperimentConfig(code="seven", ancilla_mode=args.ancilla, p=args.p, qec_period=args.y,
                                        n_gates=args.gates, trials=args.trials, master_seed=args.seed))
    print(f"{'k':>6} {'MC':>9} {'SE':>8} {'formula':>9} {'sign-flip':>9}")
    for k in range(2 * args.y, args.gates + 1, 2 * args.y):
        m, se = s.at(k)
        params = analysis.ApproxParams(args.p, k, args.y, c, loc)
        flip = (1 + (1 - 2 * params.unit_failure) ** params.units) / 2
        print(f"{k:>6} {m:9.5f} {se:8.5f} {analysis.qec_period_fidelity(params):9.5f} {flip:9.5f}")
    phys = [analysis.physical_fidelity(args.p, int(k)) for k in s.gate_index]
    print(f"physical closed form at k={args.gates}: {phys[-1]:.5f}; encoded no-QEC form: "
          f"{analysis.encoded_noqec_fidelity(args.p, args.gates):.5f}; final MC {np.round(s.final, 5)}")


if __name__ == "__main__":
    main()
