"""Simulator of dipolar-coupled spin-1/2 clusters under dynamical decoupling.

Builds pulse sequences (CPMG/CPMGp, UDD/UDDp, RUDD/RUDDp, the 8-pulse
two-quantum cycle), propagates density matrices through them under classical
dephasing noise, runs the multiple-quantum spin-counting protocol, and
cross-checks Monte-Carlo decay against analytic filter-function predictions.
"""

__version__ = "0.1.0"

from .experiment import MQCConfig, MQCResult, dd_on_mqc_scan, purge, run_mqc
from .filters import FilterResult, chi, filter_function
from .hamiltonian import (AverageHamiltonianReport, dipolar, magnus0, phase_shifted,
                          two_quantum_target, zeeman)
from .noise import NoiseModel, NoiseTrajectory, sample_trajectory, spectral_density
from .propagate import PropagationConfig, propagate, sqc_dd_experiment
from .sequence import (DDScheme, NegativeDelayError, PulseSequence, SequenceEvent,
                       UnrealizableError, gen_cpmg, gen_mqc_cycle, gen_rudd, gen_udd,
                       generate, rudd_theta, udd_instants)
from .system import (CoherenceSpectrum, Operator, SpinSystem, State, coherence_decompose,
                     collective_rotation, single_spin_op, thermal_state, total_spin_op)

__all__ = [
    "AverageHamiltonianReport", "CoherenceSpectrum", "DDScheme", "FilterResult",
    "MQCConfig", "MQCResult", "NegativeDelayError", "NoiseModel", "NoiseTrajectory",
    "Operator", "PropagationConfig", "PulseSequence", "SequenceEvent", "SpinSystem",
    "State", "UnrealizableError", "chi", "coherence_decompose", "collective_rotation",
    "dd_on_mqc_scan", "dipolar", "filter_function", "gen_cpmg", "gen_mqc_cycle",
    "gen_rudd", "gen_udd", "generate", "magnus0", "phase_shifted", "propagate",
    "purge", "run_mqc", "rudd_theta", "sample_trajectory", "single_spin_op",
    "spectral_density", "sqc_dd_experiment", "thermal_state", "total_spin_op",
    "two_quantum_target", "udd_instants", "zeeman",
]
