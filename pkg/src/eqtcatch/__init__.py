"""Entangled microwave-optical photon pairs and their capture by a tunable cavity."""
from .analytic import (
    ExpDecayPhoton,
    PiecewiseExpPhoton,
    balance_time,
    fixed_coupling_efficiency,
    ideal_efficiency,
    ideal_schedule,
    peak_time,
    tunable_efficiency,
    tunable_efficiency_limit,
    tunable_schedule,
)
from .catcher import (
    CaptureRun,
    CouplingSchedule,
    InputPhoton,
    capture_report,
    catch,
    has_dip,
    simulate_capture,
    synthesize_schedule,
)
from .config import ConfigError, RunConfig
from .dynamics import BiphotonKernel, ModeModel, biphoton_kernel, evolve_equal_time_moments
from .errors import DivergenceError, EqtCatchError, InstabilityError, NoBalanceError
from .fock import fock_correlator_oracle, fock_equal_time
from .model import (
    TWO_PI,
    GaussianPump,
    PiecewiseExpPump,
    SystemParams,
    TabulatedPump,
    TimeGrid,
    ZeroPump,
    parse_quantity,
    stability_check,
    reference_params,
)
from .schmidt import SchmidtDecomposition, entanglement_entropy, schmidt_decompose, zero_mode_profile

__version__ = "0.1.0"
