"""rabichirp: analytic chirped-pulse design for Rabi-like population
transfer in discrete-level systems, verified by direct integration of the
time-dependent Schrodinger equation.
"""

from .analysis import (ComparisonReport, TransferMetrics, compare_runs,
                       leakage_vs_bound, loss_envelope_check, transfer_metrics)
from .backend import backend_name
from .dynamics import (IntegratorOptions, IntegratorStats, StateVector, Trajectory,
                       integrate, integrate_schrodinger_picture, interaction_matrix,
                       populations, trajectory_to_csv)
from .errors import (ConfigError, DegeneracyError, DivergenceError, IntegrationError,
                     RabichirpError, SystemLoadError)
from .optimizer import (ChirpProfile, DesignReport, PerturberStrength, design_report,
                        first_order_chirp, leakage_bound, max_drive, perturber_strength,
                        perturber_strengths, recurrent_chirp, sigma_tot_sq)
from .pulse import (Envelope, ChirpedCarrier, FixedCarrier, PulseSpec, envelope_area,
                    envelope_mean_square, envelope_value, field_value, load_envelope_csv,
                    make_pulse, pi_pulse_duration, t_of_tau, tau_max, tau_of_t, x_of_tau)
from .qsystem import (Level, LevelSystem, TransitionPair, coupling_ratio, load_system,
                      load_system_file, perturber_sets, transition_sign_and_freq,
                      validate_pair)

__version__ = "0.1.0"

__all__ = [
    "ComparisonReport", "TransferMetrics", "compare_runs", "leakage_vs_bound",
    "loss_envelope_check", "transfer_metrics",
    "backend_name",
    "IntegratorOptions", "IntegratorStats", "StateVector", "Trajectory",
    "integrate", "integrate_schrodinger_picture", "interaction_matrix",
    "populations", "trajectory_to_csv",
    "ConfigError", "DegeneracyError", "DivergenceError", "IntegrationError",
    "RabichirpError", "SystemLoadError",
    "ChirpProfile", "DesignReport", "PerturberStrength", "design_report",
    "first_order_chirp", "leakage_bound", "max_drive", "perturber_strength",
    "perturber_strengths", "recurrent_chirp", "sigma_tot_sq",
    "Envelope", "ChirpedCarrier", "FixedCarrier", "PulseSpec", "envelope_area",
    "envelope_mean_square", "envelope_value", "field_value", "load_envelope_csv",
    "make_pulse", "pi_pulse_duration", "t_of_tau", "tau_max", "tau_of_t", "x_of_tau",
    "Level", "LevelSystem", "TransitionPair", "coupling_ratio", "load_system",
    "load_system_file", "perturber_sets", "transition_sign_and_freq", "validate_pair",
    "__version__",
]
