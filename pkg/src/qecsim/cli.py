"""Command-line front end: single runs, figure/table presets, CSV output.

Exit codes: 0 success, 2 usage error, 3 runtime or numerical failure.
The worker count for trial chunks comes from the QECSIM_WORKERS variable.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, replace
from functools import lru_cache

from . import analysis
from .circuit import RetryBudgetExceeded
from .codes import build_code
from .experiment import (
    ExperimentConfig,
    FidelitySeries,
    count_degrading_errors,
    qec_unit,
    run_experiment,
    two_hadamard_unit,
)
from .statevector import NumericalError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3

RATES = (1e-5, 1e-4, 1e-3)
PERIODS = (1, 50, 100, 200, 2000)
SIGMAS = (1e-3, 1e-2)
DEFAULT_GATES = 4000
DEFAULT_TRIALS = 10_000


@dataclass(frozen=True)
class Preset:
    name: str
    configs: tuple[ExperimentConfig, ...]
    analytic: bool = False


def _physical(p, sigma=0.0):
    return ExperimentConfig(code="physical", p=p, sigma=sigma)


def _periodic(code, p, sigma=0.0, mode="one"):
    return [ExperimentConfig(code=code, ancilla_mode=mode, p=p, sigma=sigma, qec_period=y)
            for y in PERIODS]


def _preset_configs(name: str) -> list[ExperimentConfig] | None:
    if name == "table2":
        return [c for mode in ("one", "four") for p in RATES for c in _periodic("seven", p, mode=mode)]
    if name == "fig-seven-decoherence":
        return [c for p in RATES for c in [_physical(p)] + _periodic("seven", p)]
    if name == "fig-five-decoherence":
        return [c for p in RATES for c in [_physical(p)] + _periodic("five", p)]
    if name == "fig-operational":
        return [c for s in SIGMAS for c in [_physical(0.0, s)] + _periodic("seven", 0.0, s)]
    if name == "fig-combined":
        # the physical reference carries decoherence only
        return [c for p in RATES[:2]
                for c in [_physical(p)] + [x for s in SIGMAS for x in _periodic("seven", p, s)]]
    if name == "fig-code-comparison":
        return [c for p in RATES for c in
                [_physical(p), ExperimentConfig(code="nine", p=p)]
                + _periodic("seven", p) + _periodic("five", p)]
    if name == "oracle-counts":
        return []
    return None


PRESET_NAMES = ("table2", "fig-seven-decoherence", "fig-five-decoherence", "fig-operational",
                "fig-combined", "fig-code-comparison", "oracle-counts")


def expand_preset(name: str, trials: int = DEFAULT_TRIALS, seed: int = 0,
                  gates: int = DEFAULT_GATES, analytic: bool = False) -> Preset:
    configs = _preset_configs(name)
    if configs is None:
        raise ValueError(f"unknown preset {name!r}")
    configs = [replace(c, trials=trials, master_seed=seed, n_gates=gates) for c in configs]
    return Preset(name, tuple(configs), analytic)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _period(text: str):
    if text == "never":
        return None
    try:
        y = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a positive integer or 'never'") from None
    if y < 1:
        raise argparse.ArgumentTypeError("the QEC period must be at least 1")
    return y


@dataclass(frozen=True)
class Invocation:
    target: Preset | ExperimentConfig
    out: str | None
    analytic: bool


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qecsim", description="Noisy QEC fidelity experiments.")
    ap.add_argument("--code", choices=("physical", "five", "seven", "nine"))
    ap.add_argument("--p", type=float)
    ap.add_argument("--sigma", type=float)
    ap.add_argument("--qec-every", type=_period, metavar="{INT,never}")
    ap.add_argument("--gates", type=int)
    ap.add_argument("--trials", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--ancilla", choices=("one", "four"))
    ap.add_argument("--preset", choices=PRESET_NAMES)
    ap.add_argument("--out")
    ap.add_argument("--analytic", action="store_true", help="add closed-form values as a column")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


_SINGLE_ONLY = ("code", "p", "sigma", "qec_every", "ancilla")


def parse_args(argv=None) -> Invocation:
    ap = build_parser()
    ns = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING)
    trials = DEFAULT_TRIALS if ns.trials is None else ns.trials
    seed = 0 if ns.seed is None else ns.seed
    gates = DEFAULT_GATES if ns.gates is None else ns.gates
    try:
        if ns.preset is not None:
            clash = [f"--{k.replace('_', '-')}" for k in _SINGLE_ONLY if getattr(ns, k) is not None]
            if clash:
                ap.error(f"--preset cannot be combined with {', '.join(clash)}")
            target = expand_preset(ns.preset, trials, seed, gates, ns.analytic)
        elif ns.code is None:
            ap.error("give either --code or --preset")
        else:
            target = ExperimentConfig(
                code=ns.code,
                ancilla_mode=ns.ancilla or "one",
                p=0.0 if ns.p is None else ns.p,
                sigma=0.0 if ns.sigma is None else ns.sigma,
                qec_period=ns.qec_every,
                n_gates=gates,
                trials=trials,
                master_seed=seed,
            )
    except ValueError as exc:
        ap.error(str(exc))
    return Invocation(target, ns.out, ns.analytic)


# ---------------------------------------------------------------------------
# analytic overlays
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def measured_constants(ancilla_mode: str, y: int) -> tuple[int, int]:
    """(C, L) of the seven-qubit unit for period y.

    The count is measured on a unit of the same parity as y (y = 1 or 2)
    because the logical state seen by the QEC round only depends on that
    parity; L is then the location count of the period-y unit.
    """
    spec = build_code("seven", ancilla_mode)
    small = 1 if y % 2 else 2
    res = count_degrading_errors(spec, qec_unit(spec, small))
    per_round = res.slots // 2 - small
    return res.count, (2 * per_round + 2 * y) * spec.n_total


def analytic_value(config: ExperimentConfig, k: int) -> float | None:
    if config.sigma > 0.0:
        return None
    if config.code == "physical":
        return analysis.physical_fidelity(config.p, k)
    if config.code != "seven":
        return None
    y = config.qec_period
    if y is None or y >= config.n_gates:
        return analysis.encoded_noqec_fidelity(config.p, k) if config.p <= 0.25 else None
    c, loc = measured_constants(config.ancilla_mode, y)
    return analysis.qec_period_fidelity(analysis.ApproxParams(config.p, k, y, c, loc))


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def config_id(config: ExperimentConfig) -> str:
    if config.code == "physical":
        return f"physical-p{config.p:g}-s{config.sigma:g}"
    y = "never" if config.qec_period is None else config.qec_period
    return f"{config.code}-{config.ancilla_mode}-p{config.p:g}-s{config.sigma:g}-y{y}"


def _num(x: float) -> str:
    return f"{x:.12g}"


def emit_csv(series: list[FidelitySeries], analytic: bool, path=None, stream=None) -> str:
    """Write series as CSV (to ``path`` or ``stream``) and return the text."""
    buf = io.StringIO()
    for s in series:
        meta = json.dumps(asdict(s.config), sort_keys=True)
        buf.write(f"# {config_id(s.config)} {meta}\n")
    header = "config_id,gate_index,mean_fidelity,std_error"
    buf.write(header + (",analytic\n" if analytic else "\n"))
    for s in series:
        cid = config_id(s.config)
        for k, m, e in zip(s.gate_index, s.mean_fidelity, s.std_error):
            row = f"{cid},{int(k)},{_num(m)},{_num(e)}"
            if analytic:
                a = analytic_value(s.config, int(k))
                row += "," + ("" if a is None else _num(a))
            buf.write(row + "\n")
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    elif stream is not None:
        stream.write(text)
    return text


def oracle_counts_csv() -> str:
    lines = ["unit,ancilla,y,count,locations"]
    seven = build_code("seven", "one")
    two = count_degrading_errors(seven, two_hadamard_unit(seven))
    lines.append(f"two-hadamard,none,,{two.count},{two.locations}")
    for mode in ("one", "four"):
        spec = build_code("seven", mode)
        for y in (1, 2, 5):
            r = count_degrading_errors(spec, qec_unit(spec, y))
            lines.append(f"qec,{mode},{y},{r.count},{r.locations}")
    return "\n".join(lines) + "\n"


def run(inv: Invocation) -> None:
    target = inv.target
    if isinstance(target, Preset) and target.name == "oracle-counts":
        text = oracle_counts_csv()
        if inv.out:
            with open(inv.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return
    configs = target.configs if isinstance(target, Preset) else (target,)
    series = [run_experiment(c) for c in configs]
    emit_csv(series, inv.analytic, inv.out, None if inv.out else sys.stdout)


def main(argv=None) -> int:
    try:
        inv = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        run(inv)
    except (NumericalError, RetryBudgetExceeded, OSError, RuntimeError, ValueError) as exc:
        print(f"qecsim: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
