"""JSON configuration ingestion.

Configs carry powers in dBm (keys suffixed ``_dbm``); they are converted
to linear milliwatts once, here, and never again.  Unknown keys are
rejected and every violation is reported in one pass.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

from .channel import Estimator, PilotKind
from .errors import ConfigurationError
from .geometry import DistancePdf, NetworkConfig, PdfKind
from .optimizer import SolverSettings

__all__ = ["RunConfig", "load_config", "parse_config", "dbm_to_mw", "mw_to_dbm"]

_KNOWN_KEYS = {
    "radius_m",
    "min_distance_m",
    "pathloss_exponent",
    "num_rrh",
    "num_ue",
    "data_power_dbm",
    "pilot_power_dbm",
    "noise_power_dbm",
    "training_length",
    "estimator",
    "pilot_kind",
    "pdf",
    "ppp_density",
    "delta",
    "n_max",
    "trials",
    "seed",
    "estimation_error_variance",
}

_REQUIRED_KEYS = {
    "radius_m",
    "min_distance_m",
    "pathloss_exponent",
    "num_rrh",
    "num_ue",
    "data_power_dbm",
    "pilot_power_dbm",
    "noise_power_dbm",
    "training_length",
}

_DEFAULTS = {
    "estimator": "ls",
    "pilot_kind": "orthogonal",
    "pdf": "disc_approx",
    "delta": 1e-4,
    "n_max": 20,
    "trials": 500,
    "seed": 0,
}


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    return 10.0 * math.log10(mw)


@dataclass(frozen=True)
class RunConfig:
    """A fully resolved run: scenario, distance law, estimator, solver."""

    network: NetworkConfig
    pdf: DistancePdf
    estimator: Estimator
    pilot_kind: PilotKind
    solver: SolverSettings
    trials: int
    seed: int

    def as_dict(self) -> dict:
        """JSON-able resolved view (linear powers included) for manifests."""
        net = self.network
        return {
            "radius_m": net.radius_m,
            "min_distance_m": net.min_dist_m,
            "pathloss_exponent": net.alpha,
            "num_rrh": net.num_rrh,
            "num_ue": net.num_ue,
            "data_power_mw": list(net.data_power),
            "pilot_power_mw": net.pilot_power_total,
            "noise_power_mw": net.noise_power,
            "training_length": net.training_len,
            "estimation_error_variance": net.est_error_variance,
            "estimator": self.estimator.value,
            "pilot_kind": self.pilot_kind.value,
            "pdf": self.pdf.kind.value,
            "ppp_density": self.pdf.ppp_density,
            "delta": self.solver.delta,
            "n_max": self.solver.n_max,
            "trials": self.trials,
            "seed": self.seed,
        }

    def with_overrides(self, **kwargs) -> "RunConfig":
        """Copy with selected fields replaced (used by CLI flags)."""
        out = self
        if "trials" in kwargs and kwargs["trials"] is not None:
            out = replace(out, trials=int(kwargs["trials"]))
        if "seed" in kwargs and kwargs["seed"] is not None:
            out = replace(out, seed=int(kwargs["seed"]))
        return out


def parse_config(raw: dict) -> RunConfig:
    """Validate a config mapping and resolve it to linear units."""
    violations = []
    if not isinstance(raw, dict):
        raise ConfigurationError(["config root must be a JSON object"])
    unknown = sorted(set(raw) - _KNOWN_KEYS)
    for key in unknown:
        violations.append(f"unknown key: {key}")
    missing = sorted(_REQUIRED_KEYS - set(raw))
    for key in missing:
        violations.append(f"missing required key: {key}")

    merged = dict(_DEFAULTS)
    merged.update({k: v for k, v in raw.items() if k in _KNOWN_KEYS})

    def number(key, caster=float):
        value = merged.get(key)
        try:
            return caster(value)
        except (TypeError, ValueError):
            violations.append(f"{key} must be a number, got {value!r}")
            return None

    estimator = None
    try:
        estimator = Estimator(str(merged["estimator"]).lower())
    except ValueError:
        violations.append(f"estimator must be one of ls|mmse, got {merged['estimator']!r}")
    pilot_kind = None
    try:
        pilot_kind = PilotKind(str(merged["pilot_kind"]).lower())
    except ValueError:
        violations.append(
            f"pilot_kind must be orthogonal|nonorthogonal, got {merged['pilot_kind']!r}"
        )
    pdf_kind = None
    try:
        pdf_kind = PdfKind(str(merged["pdf"]).lower())
    except ValueError:
        violations.append(f"pdf must be disc_approx|iut1|ppp, got {merged['pdf']!r}")

    if missing:
        raise ConfigurationError(violations)

    radius = number("radius_m")
    min_dist = number("min_distance_m")
    alpha = number("pathloss_exponent")
    num_rrh = number("num_rrh", int)
    num_ue = number("num_ue", int)
    pilot_dbm = number("pilot_power_dbm")
    noise_dbm = number("noise_power_dbm")
    training_len = number("training_length", int)
    delta = number("delta")
    n_max = number("n_max", int)
    trials = number("trials", int)
    seed = number("seed", int)

    data_dbm = merged["data_power_dbm"]
    if isinstance(data_dbm, (int, float)):
        data_power = dbm_to_mw(float(data_dbm))
    elif isinstance(data_dbm, list) and all(isinstance(p, (int, float)) for p in data_dbm):
        data_power = tuple(dbm_to_mw(float(p)) for p in data_dbm)
    else:
        violations.append("data_power_dbm must be a number or a list of numbers")
        data_power = 0.0

    est_var = merged.get("estimation_error_variance")
    if est_var is not None:
        est_var = number("estimation_error_variance")

    ppp_density = merged.get("ppp_density")
    if pdf_kind is PdfKind.POISSON_PP and ppp_density is None and radius:
        # Default intensity: one point per disc area on average.
        ppp_density = 1.0 / (math.pi * radius**2)

    if violations:
        raise ConfigurationError(violations)

    try:
        network = NetworkConfig(
            radius_m=radius,
            min_dist_m=min_dist,
            alpha=alpha,
            num_rrh=num_rrh,
            num_ue=num_ue,
            data_power=data_power,
            pilot_power_total=dbm_to_mw(pilot_dbm),
            noise_power=dbm_to_mw(noise_dbm),
            training_len=training_len,
            est_error_variance=est_var,
        )
        pdf = (
            DistancePdf(pdf_kind, ppp_density=float(ppp_density))
            if pdf_kind is PdfKind.POISSON_PP
            else DistancePdf(pdf_kind)
        )
        solver = SolverSettings(delta=delta, n_max=n_max)
        if trials < 0:
            raise ConfigurationError(["trials must be nonnegative"])
    except ConfigurationError as exc:
        raise ConfigurationError(violations + exc.violations) from None
    except ValueError as exc:
        raise ConfigurationError(violations + [str(exc)]) from None

    return RunConfig(
        network=network,
        pdf=pdf,
        estimator=estimator,
        pilot_kind=pilot_kind,
        solver=solver,
        trials=trials,
        seed=seed,
    )


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a JSON config file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigurationError([f"cannot read config {path}: {exc}"]) from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError([f"config {path} is not valid JSON: {exc}"]) from None
    return parse_config(raw)
