"""Shared helpers: randomized scenario generation for the property suites."""

from __future__ import annotations

import numpy as np

from cranspar.defaults import FULL_SCALE_CONFIG


def randomized_raw_configs(count: int, seed: int = 42) -> list[dict]:
    """Valid scenario variations: exponent in [2.5, 4.5], radius in [1, 10] km.

    Everything else stays at the full-scale canonical values.
    """
    rng = np.random.default_rng(seed)
    configs = []
    for _ in range(count):
        raw = dict(FULL_SCALE_CONFIG)
        raw["pathloss_exponent"] = float(rng.uniform(2.5, 4.5))
        raw["radius_m"] = float(rng.uniform(1_000.0, 10_000.0))
        configs.append(raw)
    return configs
