"""GHZ-state decoherence simulator and analysis toolkit.

Builds GHZ preparation circuits on directed coupling maps, evolves them as
exact density matrices under configurable noise, measures parity
oscillations, and extracts coherence times and their scaling with qubit
number.
"""

__version__ = "0.1.0"

from .analysis import (
    DecayFit,
    FitError,
    LinearFit,
    ScalingFit,
    SinusoidFit,
    fit_decay,
    fit_initial_coherence,
    fit_parity,
    fit_scaling,
    fit_sweep_decay,
    predict_t2n_from_calibration,
    propagate_ratios,
)
from .circuit import (
    Circuit,
    Gate,
    GateDurations,
    analysis_rotation,
    append_analysis_and_measure,
    append_delay,
    build_ghz,
    u3_matrix,
)
from .protocol import (
    ExperimentPlan,
    ParityDataset,
    ParityPoint,
    parity_of_counts,
    run_delay_sweep,
    run_parity_scan,
)
from .qasm import QasmError, emit_qasm, parse_qasm
from .simulator import (
    Counts,
    DensityMatrix,
    NoiseModel,
    StateError,
    apply_collective_dephasing,
    apply_gate,
    apply_idle_noise,
    coherence_of,
    evolve,
    parity_expectation,
    sample_counts,
)
from .topology import (
    ChainError,
    CouplingGraph,
    GraphFormatError,
    NoChainError,
    QubitChain,
    bundled_graph,
    find_chain,
    load_graph,
)

__all__ = [name for name in dir() if not name.startswith("_")]
