"""Fidelity analysis and threshold optimization for sparsified channel matrices.

The package answers one question at several levels of rigor: how much
detection SINR does a large centralized radio network lose when the
baseband pool zeroes every channel-matrix entry whose link is longer
than a distance threshold, given that the retained entries are only
imperfectly estimated?

* :mod:`cranspar.geometry` -- random disc layouts and link-distance laws.
* :mod:`cranspar.channel` -- channel synthesis, estimation-error
  surrogates, sparsification.
* :mod:`cranspar.detection` -- MMSE receivers and Monte Carlo fidelity.
* :mod:`cranspar.analysis` -- closed-form fidelity lower bound and its
  ingredients.
* :mod:`cranspar.optimizer` -- Dinkelbach iteration for the optimal
  threshold, plus a grid-search oracle.
* :mod:`cranspar.harness` -- experiment runner with CSV/JSON outputs.
"""

from .analysis import (
    BoundInputs,
    DncThreshold,
    StationarityCoefficients,
    dnc_threshold,
    fidelity_lower_bound,
    n1,
    n2,
    objective_parts,
    stationarity_value,
)
from .channel import (
    ChannelRealization,
    EstimatedChannel,
    Estimator,
    PilotKind,
    PilotScheme,
    build_channel,
    estimate,
    sparsify,
)
from .config import RunConfig, load_config, parse_config
from .detection import (
    DetectorBundle,
    FidelityEstimate,
    build_detectors,
    fidelity_empirical,
    sinr_full,
    sinr_sparse,
)
from .errors import ConfigurationError, CranSparError, DomainError, NumericalError
from .geometry import (
    DistancePdf,
    Layout,
    NetworkConfig,
    PdfKind,
    expected_gain,
    pdf_density,
    sample_layout,
    sparsification_mass,
)
from .optimizer import (
    DinkelbachTrace,
    SolverSettings,
    Termination,
    dinkelbach,
    grid_oracle,
    solve_subproblem,
)

__version__ = "0.1.0"
