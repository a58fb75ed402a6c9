"""Coherent control of bound-state decay into a discretized continuum.

A two-level story: closed-form survival probabilities for pulse-kicked,
randomly kicked, decoupled, and repeatedly measured evolution (all to
second order in the coupling), plus an exact propagator on the truncated
mode basis to check every one of them.  The hot Monte Carlo kernel has a
compiled backend with a pure numpy fallback; `kickctl.BACKEND` reports
which one loaded.
"""
from ._kernels import BACKEND
from .analytic import (DEFAULT_GUARD, GuardBehavior, KickedTerms,
                       ResonanceGuard, ZenoForm, averaged_survival,
                       avg_decay_rate, beta_periodic, beta_stochastic,
                       cumulative_coefficients, dd_survival,
                       ensemble_mean_survival, geometric_sum,
                       kicked_amplitude, kicked_survival, kicked_terms,
                       spontaneous_survival, stochastic_survival,
                       survival_curve_from_coefficients,
                       survival_curve_from_kicks, zeno_decay_rate,
                       zeno_survival)
from .ensemble import (EnsembleReport, EnsembleSpec, Evaluator,
                       convergence_study, realization_seed, report_sidecar,
                       report_to_csv, run_ensemble)
from .errors import (AlignmentError, InvalidParameterError, KickctlError,
                     PerturbativeBreakdownError, ResonanceError)
from .model import (ContinuumModel, Mode, QuantumState, build_custom,
                    build_flat_band, golden_rule_rate, initial_state,
                    memory_kernel, model_from_json, model_to_json)
from .propagator import (EXACT, PERTURBATIVE, PropagatorChoice,
                         PropagatorKind, SurvivalCurve,
                         batched_kick_survival, curve_to_csv, evolve_exact,
                         run_pulsed, step_perturbative)
from .pulses import (PulseKind, PulseSequence, SignSequence,
                     apply_phase_kick, apply_projection, dd_sign_sequence,
                     kick_sequence_from_signs, periodic_sequence,
                     sequence_from_json, sequence_to_json,
                     stochastic_sequence)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "__version__",
    # model
    "Mode", "ContinuumModel", "QuantumState", "initial_state",
    "build_flat_band", "build_custom", "memory_kernel", "golden_rule_rate",
    "model_to_json", "model_from_json",
    # pulses
    "PulseKind", "PulseSequence", "SignSequence", "apply_phase_kick",
    "apply_projection", "periodic_sequence", "stochastic_sequence",
    "kick_sequence_from_signs", "dd_sign_sequence", "sequence_to_json",
    "sequence_from_json",
    # analytic
    "ResonanceGuard", "GuardBehavior", "DEFAULT_GUARD", "ZenoForm",
    "KickedTerms", "spontaneous_survival", "avg_decay_rate",
    "zeno_decay_rate", "averaged_survival", "zeno_survival",
    "kicked_survival", "kicked_terms", "kicked_amplitude", "beta_periodic",
    "beta_stochastic", "geometric_sum", "stochastic_survival", "dd_survival",
    "ensemble_mean_survival", "cumulative_coefficients",
    "survival_curve_from_coefficients", "survival_curve_from_kicks",
    # propagator
    "PropagatorKind", "PropagatorChoice", "EXACT", "PERTURBATIVE",
    "SurvivalCurve", "evolve_exact", "step_perturbative", "run_pulsed",
    "batched_kick_survival", "curve_to_csv",
    # ensemble
    "Evaluator", "EnsembleSpec", "EnsembleReport", "realization_seed",
    "run_ensemble", "convergence_study", "report_to_csv", "report_sidecar",
    # errors
    "KickctlError", "InvalidParameterError", "AlignmentError",
    "ResonanceError", "PerturbativeBreakdownError",
]
