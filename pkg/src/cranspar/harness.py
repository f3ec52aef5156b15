"""Experiment runner: curve reproduction, optimization reports, CSV/JSON output.

An experiment is a base configuration, an optional one-parameter sweep,
and a threshold grid.  Curve experiments emit one CSV per sweep value
with the closed-form bound and (when trials > 0) the Monte Carlo
fidelity; threshold-comparison experiments emit a single CSV contrasting
the iterative optimum with the closed-form baseline threshold.  Every run
writes a JSON manifest with the fully resolved configuration, the seed,
a content hash of the inputs, and the wall time.

Monte Carlo trials fan out over a process pool (size from the
CRANSPAR_THREADS environment variable, default 1); per-trial seeds depend
only on (seed, trial index) and results are reduced in trial order, so
output bytes do not depend on the worker count.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass
from multiprocessing import Pool
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import analysis, detection
from .channel import PilotScheme, build_channel, estimate, sparsify
from .config import RunConfig, parse_config, _KNOWN_KEYS
from .detection import FidelityEstimate, _combine_trials, trial_seed
from .errors import ConfigurationError
from .geometry import sample_layout
from .optimizer import DinkelbachTrace, dinkelbach

__all__ = [
    "ExperimentSpec",
    "CURVE_EXPERIMENTS",
    "THRESHOLD_EXPERIMENTS",
    "EXPERIMENT_NAMES",
    "default_d0_grid",
    "montecarlo_curve",
    "run",
    "optimize_report",
    "worker_count",
]

CURVE_EXPERIMENTS = (
    "bound",
    "montecarlo",
    "fig2",
    "fig3",
    "fig4",
    "fig7",
    "fig8",
    "fig9",
)
THRESHOLD_EXPERIMENTS = ("fig5", "fig6", "dnc-compare")
EXPERIMENT_NAMES = CURVE_EXPERIMENTS + THRESHOLD_EXPERIMENTS + ("optimize",)

_CSV_HEADER = (
    "d0_m",
    "rho_bound",
    "rho_empirical",
    "rho_stderr",
    "n1_mw",
    "n2_mw",
    "mubar_over_mu",
)
_THRESHOLD_HEADER = (
    "sweep_param",
    "sweep_value",
    "dinkelbach_threshold_m",
    "dnc_threshold_m",
    "rho_bound_dinkelbach",
    "rho_bound_dnc",
    "dnc_clamped",
    "iterations",
    "termination",
)


@dataclass(frozen=True)
class ExperimentSpec:
    """A named experiment over a raw config mapping.

    ``sweep`` is ``(config_key, (value, ...))`` or None.  ``trials``/
    ``seed`` of None defer to the config file.
    """

    name: str
    base_raw: dict
    out_dir: Path
    d0_grid: tuple[float, ...] = ()
    sweep: tuple[str, tuple] | None = None
    trials: int | None = None
    seed: int | None = None

    def validate(self) -> RunConfig:
        violations = []
        if self.name not in CURVE_EXPERIMENTS + THRESHOLD_EXPERIMENTS:
            violations.append(f"not a file-emitting experiment: {self.name}")
        if self.sweep is not None and self.sweep[0] not in _KNOWN_KEYS:
            violations.append(f"sweep parameter not in config namespace: {self.sweep[0]}")
        try:
            base = parse_config(self.base_raw)
        except ConfigurationError as exc:
            raise ConfigurationError(violations + exc.violations) from None
        net = base.network
        for d0 in self.d0_grid:
            if not (net.min_dist_m <= d0 <= net.radius_m):
                violations.append(
                    f"d0 grid value {d0} outside [{net.min_dist_m}, {net.radius_m}]"
                )
        trials = base.trials if self.trials is None else self.trials
        if trials < 0 or trials == 1:
            violations.append("trials must be 0 (analysis only) or at least 2")
        if violations:
            raise ConfigurationError(violations)
        return base


def worker_count() -> int:
    raw = os.environ.get("CRANSPAR_THREADS", "1")
    try:
        count = int(raw)
    except ValueError:
        raise ConfigurationError([f"CRANSPAR_THREADS must be an integer, got {raw!r}"])
    return max(1, count)


def default_d0_grid(rc: RunConfig, points: int, span: float = 0.25) -> tuple[float, ...]:
    """Evenly spaced thresholds from span*radius to the radius.

    Small thresholds leave most users with an empty observed column at
    desk scale, so curve experiments start where the mask is populated.
    """
    net = rc.network
    lo = max(net.min_dist_m, span * net.radius_m)
    return tuple(float(x) for x in np.linspace(lo, net.radius_m, points))


def _limit_worker_blas() -> None:
    threadpool_limits(limits=1)


def _curve_trial(task) -> tuple[list[float], list[float]]:
    """One Monte Carlo trial evaluated on the whole threshold grid."""
    cfg, pdf, estimator, pilot_kind, d0_grid, floors, seed, trial = task
    tseed = trial_seed(seed, trial)
    layout = sample_layout(cfg, tseed)
    chan = build_channel(layout, cfg.alpha, tseed)
    pilots = PilotScheme(pilot_kind, cfg.training_len, cfg.pilot_power_total)
    mu = analysis.mean_gain(pdf, cfg)
    error = estimate(
        chan,
        pilots,
        estimator,
        cfg.noise_power,
        tseed,
        mean_gain=mu,
        error_variance=cfg.est_error_variance,
    )
    sparse_means, full_means = [], []
    for (d0, (floor1, floor2)) in zip(d0_grid, floors):
        est = sparsify(chan, error, d0, estimator)
        bundle = detection.build_detectors(chan, est, cfg, floor1, floor2)
        sparse_means.append(float(np.mean(detection._sinr_sparse_all(chan, est, bundle, cfg))))
        full_means.append(float(np.mean(detection._sinr_full_all(chan, bundle, cfg))))
    return sparse_means, full_means


def montecarlo_curve(
    rc: RunConfig, d0_grid, trials: int, seed: int, workers: int | None = None
) -> list[FidelityEstimate]:
    """Monte Carlo fidelity on a threshold grid, trial-parallel.

    All grid points share each trial's layout, fading, and error draw, so
    the resulting estimates match per-threshold calls of
    ``detection.fidelity_empirical`` with the same seed exactly.
    """
    workers = worker_count() if workers is None else max(1, workers)
    inputs = analysis.BoundInputs(rc.network, rc.pdf, rc.estimator, rc.pilot_kind)
    floors = tuple(
        (float(analysis.n1(inputs, d0)), float(analysis.n2(inputs, d0))) for d0 in d0_grid
    )
    tasks = [
        (rc.network, rc.pdf, rc.estimator, rc.pilot_kind, tuple(d0_grid), floors, seed, t)
        for t in range(trials)
    ]
    # Trials are the parallelism unit; BLAS threading inside a trial only
    # causes oversubscription jitter at these matrix sizes.
    if workers == 1:
        with threadpool_limits(limits=1):
            results = [_curve_trial(task) for task in tasks]
    else:
        chunk = max(1, trials // (4 * workers))
        with Pool(processes=workers, initializer=_limit_worker_blas) as pool:
            results = pool.map(_curve_trial, tasks, chunksize=chunk)
    sparse = np.array([r[0] for r in results])
    full = np.array([r[1] for r in results])
    return [
        _combine_trials(d0, sparse[:, i], full[:, i]) for i, d0 in enumerate(d0_grid)
    ]


def _fmt(value) -> str:
    """Shortest round-trip decimal text for a float."""
    return repr(float(value))


def _content_hash(payload: dict) -> str:
    """Hash of the canonical JSON of the resolved inputs, git blob style."""
    body = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    blob = b"blob %d\x00%b" % (len(body), body)
    return hashlib.sha1(blob).hexdigest()


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _apply_sweep(base_raw: dict, param: str | None, value) -> dict:
    raw = dict(base_raw)
    if param is not None:
        raw[param] = value
    return raw


def _sweep_values(spec: ExperimentSpec):
    if spec.sweep is None:
        return [(None, None)]
    param, values = spec.sweep
    return [(param, v) for v in values]


def _curve_rows(rc: RunConfig, d0_grid, estimates) -> list[tuple[str, ...]]:
    inputs = analysis.BoundInputs(rc.network, rc.pdf, rc.estimator, rc.pilot_kind)
    mu = analysis.mean_gain(rc.pdf, rc.network)
    rows = []
    for i, d0 in enumerate(d0_grid):
        bound = float(analysis.fidelity_lower_bound(inputs, d0))
        n1_val = float(analysis.n1(inputs, d0))
        n2_val = float(analysis.n2(inputs, d0))
        ratio = float(analysis.retained_gain(inputs, d0)) / mu
        if estimates is None:
            emp, err = "", ""
        else:
            emp, err = _fmt(estimates[i].fidelity), _fmt(estimates[i].stderr)
        rows.append(
            (_fmt(d0), _fmt(bound), emp, err, _fmt(n1_val), _fmt(n2_val), _fmt(ratio))
        )
    return rows


def _file_tag(param: str | None, value) -> str:
    if param is None:
        return ""
    return f"__{param}={value}"


def run(spec: ExperimentSpec) -> list[Path]:
    """Execute an experiment and return the written file paths."""
    base = spec.validate()
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    seed = base.seed if spec.seed is None else spec.seed
    trials = base.trials if spec.trials is None else spec.trials
    if spec.name == "bound":
        trials = 0

    outputs: list[Path] = []
    manifest_runs = []
    threshold_rows = []

    for param, value in _sweep_values(spec):
        raw = _apply_sweep(spec.base_raw, param, value)
        rc = parse_config(raw).with_overrides(seed=seed, trials=trials)
        d0_grid = spec.d0_grid or default_d0_grid(
            rc, 10 if trials else 100, span=0.25 if trials else 0.0
        )
        if spec.name in THRESHOLD_EXPERIMENTS:
            threshold_rows.append(_threshold_row(rc, param, value))
            manifest_runs.append(
                {"sweep_param": param, "sweep_value": value, "config": rc.as_dict()}
            )
            continue
        estimates = None
        if trials:
            estimates = montecarlo_curve(rc, d0_grid, trials, seed)
        path = spec.out_dir / f"{spec.name}{_file_tag(param, value)}.csv"
        _write_csv(path, _CSV_HEADER, _curve_rows(rc, d0_grid, estimates))
        outputs.append(path)
        manifest_runs.append(
            {
                "sweep_param": param,
                "sweep_value": value,
                "config": rc.as_dict(),
                "d0_grid": list(d0_grid),
                "file": path.name,
            }
        )

    if spec.name in THRESHOLD_EXPERIMENTS:
        path = spec.out_dir / f"{spec.name}.csv"
        _write_csv(path, _THRESHOLD_HEADER, threshold_rows)
        outputs.append(path)

    manifest = {
        "experiment": spec.name,
        "seed": seed,
        "trials": trials,
        "sweep": None if spec.sweep is None else [spec.sweep[0], list(spec.sweep[1])],
        "runs": manifest_runs,
        "content_hash": _content_hash(
            {"base": spec.base_raw, "name": spec.name, "seed": seed, "trials": trials}
        ),
        "workers": worker_count(),
        "wall_time_s": time.monotonic() - started,
    }
    manifest_path = spec.out_dir / f"{spec.name}_manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    outputs.append(manifest_path)
    return outputs


def _threshold_row(rc: RunConfig, param, value) -> tuple[str, ...]:
    """Compare the iterative optimum with the closed-form baseline."""
    inputs = analysis.BoundInputs(rc.network, rc.pdf, rc.estimator, rc.pilot_kind)
    trace = dinkelbach(inputs, rc.solver)
    bound_at_opt = float(analysis.fidelity_lower_bound(inputs, trace.final_d0))
    baseline = analysis.dnc_threshold(rc.network, bound_at_opt)
    bound_at_dnc = float(analysis.fidelity_lower_bound(inputs, baseline.threshold))
    return (
        str(param or ""),
        str(value if value is not None else ""),
        _fmt(trace.final_d0),
        _fmt(baseline.threshold),
        _fmt(bound_at_opt),
        _fmt(bound_at_dnc),
        str(baseline.clamped).lower(),
        str(len(trace.iterations)),
        trace.termination.value,
    )


def trace_as_dict(trace: DinkelbachTrace) -> dict:
    return {
        "iterations": [
            {"index": it.index, "q": it.q, "d0": it.d0, "f_of_q": it.f_of_q}
            for it in trace.iterations
        ],
        "converged": trace.converged,
        "final_d0": trace.final_d0,
        "final_q": trace.final_q,
        "termination": trace.termination.value,
    }


def optimize_report(rc: RunConfig, out_dir: Path) -> tuple[DinkelbachTrace, Path]:
    """Run the threshold optimization and persist its trace as JSON.

    The JSON is byte-stable: repeated invocations with the same config
    produce identical files.
    """
    inputs = analysis.BoundInputs(rc.network, rc.pdf, rc.estimator, rc.pilot_kind)
    trace = dinkelbach(inputs, rc.solver)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "optimize_trace.json"
    path.write_text(json.dumps(trace_as_dict(trace), indent=2, sort_keys=True) + "\n")
    return trace, path
