"""Command-line entry point.

Subcommands: ``bound``, ``montecarlo``, ``optimize``, ``fig2`` .. ``fig9``,
and ``dnc-compare``.  Exit codes: 0 on success, 2 on configuration
validation failure, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import load_config, parse_config
from .defaults import DESK_CONFIG, FULL_SCALE_CONFIG
from .errors import ConfigurationError, DomainError, NumericalError
from .harness import EXPERIMENT_NAMES, ExperimentSpec, optimize_report, run

_FULL_SCALE_OVERRIDES = {
    key: FULL_SCALE_CONFIG[key]
    for key in ("num_rrh", "num_ue", "training_length", "trials")
}


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        lo, hi, count = text.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        raise ConfigurationError([f"--d0-grid must look like lo:hi:n, got {text!r}"])
    if count < 1 or hi < lo:
        raise ConfigurationError([f"--d0-grid bounds are inconsistent: {text!r}"])
    return tuple(float(x) for x in np.linspace(lo, hi, count))


def _sweep_for(name: str, raw: dict) -> tuple[str, tuple] | None:
    """Default sweep of each figure experiment.

    Power sweeps are anchored to the base config so they stay meaningful
    for any normalization: the pilot sweep spans 7 dB up to the configured
    level and the data sweep doubles the power three times.
    """
    data_dbm = float(raw["data_power_dbm"]) if not isinstance(raw["data_power_dbm"], list) else 0.0
    pilot_dbm = float(raw["pilot_power_dbm"])
    num_ue = int(raw["num_ue"])
    if name == "fig2":
        base = int(raw["num_rrh"])
        return ("num_rrh", (max(1, int(0.8 * base)), max(1, int(0.85 * base)), base))
    if name == "fig3":
        return ("pathloss_exponent", (3.0, 3.4, float(raw["pathloss_exponent"])))
    if name == "fig4":
        return ("pdf", ("disc_approx", "iut1", "ppp"))
    if name == "fig7":
        return ("data_power_dbm", tuple(round(data_dbm + 10 * np.log10(s), 4) for s in (1, 2, 4, 8)))
    if name in ("fig8", "fig5", "fig6", "dnc-compare"):
        return ("pilot_power_dbm", (pilot_dbm - 7.0, pilot_dbm - 4.0, pilot_dbm))
    if name == "fig9":
        taus = sorted({int(round(f * num_ue)) for f in (0.95, 0.975, 0.9875)})
        return ("training_length", tuple(t for t in taus if t < num_ue))
    return None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cranspar",
        description=(
            "Fidelity analysis and distance-threshold optimization for "
            "channel-matrix sparsification under imperfect channel knowledge"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENT_NAMES:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=Path, default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="override the seed")
        p.add_argument("--trials", type=int, default=None, help="override the trial count")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument(
            "--d0-grid",
            type=str,
            default=None,
            help="threshold grid as lo:hi:n (meters)",
        )
        p.add_argument(
            "--full-scale",
            action="store_true",
            help="use the full-scale scenario size (slow for Monte Carlo)",
        )
    return parser


def _base_raw(args) -> dict:
    if args.config is not None:
        load_config(args.config)  # full validation with file context
        raw = json.loads(Path(args.config).read_text())
    else:
        raw = dict(DESK_CONFIG)
    if args.full_scale:
        raw.update(_FULL_SCALE_OVERRIDES)
    if args.command == "fig9":
        # The training-length sweep only makes sense with contaminated pilots.
        raw["pilot_kind"] = "nonorthogonal"
    return raw


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = _base_raw(args)
        if args.command == "optimize":
            rc = parse_config(raw).with_overrides(seed=args.seed, trials=args.trials)
            trace, path = optimize_report(rc, args.out)
            print(f"final_d0_m: {trace.final_d0!r}")
            print(f"final_q: {trace.final_q!r}")
            print(f"iterations: {len(trace.iterations)}")
            print(f"termination: {trace.termination.value}")
            print(f"trace: {path}")
            return 0
        spec = ExperimentSpec(
            name=args.command,
            base_raw=raw,
            out_dir=args.out,
            d0_grid=_parse_grid(args.d0_grid) if args.d0_grid else (),
            sweep=_sweep_for(args.command, raw),
            trials=args.trials,
            seed=args.seed,
        )
        outputs = run(spec)
        for path in outputs:
            print(path)
        return 0
    except ConfigurationError as exc:
        for violation in exc.violations:
            print(f"config error: {violation}", file=sys.stderr)
        return 2
    except (DomainError, NumericalError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
