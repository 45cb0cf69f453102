"""Remote preparation of qudits on groups of qubits sharing EPR pairs."""

from .channel import (
    BranchTable,
    EprChannel,
    ProtocolTranscript,
    RoundPlan,
    build_channel,
    enumerate_branches,
    execute,
    sample_many,
    teleport_cost,
)
from .equatorial import run_equatorial
from .errors import ConfigError, InvariantViolation, NotPreparableError, RSPError
from .experiment import ExperimentConfig, emit_report, run_experiment
from .realspace import catalog, run_realspace
from .separable import GroupingSpec, UsCatalog, run_separable, separability_measure
from .states import QuditSpec, embed, equivalent, qubit_bounds

__version__ = "0.1.0"
