"""Monte Carlo averaging over stochastic pulse realizations.

Verifies, by sampling, that the cross terms of the per-realization
survival really average to zero: the empirical mean curve is compared
against the closed-form ensemble mean and summarized by a z-score at
the final time.  Realization r draws its kick signs from a generator
seeded only by (master seed, r), so realizations are independent work
items that can be evaluated in any order (aggregation always runs in
realization-index order, making reports bit-identical across runs).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import analytic, propagator
from .errors import InvalidParameterError, PerturbativeBreakdownError
from .model import ContinuumModel
from .propagator import SurvivalCurve


class Evaluator(Enum):
    ANALYTIC = "analytic"
    EXACT = "exact"


@dataclass(frozen=True)
class EnsembleSpec:
    n_realizations: int       # >= 2, standard error needs variance
    dt: float                 # segment length
    n_steps: int              # 2n, must be even
    p_kick: float             # per-step kick probability
    seed: int                 # master seed, unsigned 64-bit
    evaluator: Evaluator = Evaluator.ANALYTIC

    def __post_init__(self):
        if not isinstance(self.n_realizations, int) or self.n_realizations < 2:
            raise InvalidParameterError(
                f"n_realizations must be an integer >= 2, got {self.n_realizations!r}")
        object.__setattr__(self, "dt", float(self.dt))
        if not math.isfinite(self.dt) or self.dt <= 0:
            raise InvalidParameterError(f"dt must be positive, got {self.dt}")
        if not isinstance(self.n_steps, int) or self.n_steps < 2 or self.n_steps % 2:
            raise InvalidParameterError(
                f"n_steps must be a positive even integer, got {self.n_steps!r}")
        object.__setattr__(self, "p_kick", float(self.p_kick))
        if not 0.0 <= self.p_kick <= 1.0:
            raise InvalidParameterError(f"p_kick must lie in [0, 1], got {self.p_kick}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) \
                or not 0 <= self.seed < 2 ** 64:
            raise InvalidParameterError(
                f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not isinstance(self.evaluator, Evaluator):
            raise InvalidParameterError(
                f"evaluator must be an Evaluator, got {self.evaluator!r}")


@dataclass(frozen=True)
class EnsembleReport:
    curve: SurvivalCurve     # mean curve with per-time standard errors
    analytic_mean: float     # closed-form mean survival at the final time
    z_score: float           # (empirical mean - analytic mean) / stderr, final time

    def __post_init__(self):
        if self.curve.stderr is None:
            raise InvalidParameterError("report curve must carry standard errors")
        if not math.isfinite(self.z_score):
            raise InvalidParameterError(f"z_score must be finite, got {self.z_score}")


def realization_seed(master_seed: int, r: int) -> int:
    """Per-realization seed, reproducible from (master seed, index) alone."""
    ss = np.random.SeedSequence((master_seed, r))
    return int(ss.generate_state(1, np.uint64)[0])


def _draw_sign_matrix(spec: EnsembleSpec) -> np.ndarray:
    """Kick indicators per realization; row r matches stochastic_sequence
    run with realization_seed(spec.seed, r) draw for draw."""
    out = np.empty((spec.n_realizations, spec.n_steps), dtype=np.float64)
    for r in range(spec.n_realizations):
        rng = np.random.Generator(np.random.Philox(key=realization_seed(spec.seed, r)))
        kicks = rng.random(spec.n_steps) < spec.p_kick
        out[r] = np.where(kicks, -1.0, 1.0)
    return out


def run_ensemble(model: ContinuumModel, spec: EnsembleSpec) -> EnsembleReport:
    """Sample spec.n_realizations sign sequences and average their survival.

    The per-time standard error is the sample standard deviation over
    realizations divided by sqrt(N).  z_score compares the final-time
    empirical mean against the closed-form mean; a degenerate ensemble
    (p_kick 0 or 1, stderr exactly 0) reports z_score = 0 since the
    empirical and analytic values coincide identically there.  A
    realization whose first-order curve goes negative aborts the run,
    naming the realization index and seed needed to reproduce it.
    """
    signs = _draw_sign_matrix(spec)
    if spec.evaluator is Evaluator.ANALYTIC:
        curves = analytic.survival_curves_from_kick_matrix(model, spec.dt, signs)
        if curves.min() < 0.0:
            bad = int(np.argwhere((curves < 0.0).any(axis=1))[0][0])
            raise PerturbativeBreakdownError(
                f"realization {bad} (seed {realization_seed(spec.seed, bad)}) "
                f"hit negative first-order survival "
                f"({float(curves[bad].min())!r}); the ensemble regime is too "
                f"strongly coupled for the weak-coupling evaluator",
                value=float(curves[bad].min()), realization=bad,
                seed=realization_seed(spec.seed, bad))
    else:
        curves = propagator.batched_kick_survival(model, spec.dt, signs)
    mean = curves.mean(axis=0)
    stderr = curves.std(axis=0, ddof=1) / math.sqrt(spec.n_realizations)
    # columns where every realization is bit-identical have zero spread by
    # definition; np.mean's pairwise summation can sit an ulp off the common
    # value there, which would otherwise leak artificial variance into std
    degenerate = np.ptp(curves, axis=0) == 0.0
    mean[degenerate] = curves[0, degenerate]
    stderr[degenerate] = 0.0
    analytic_mean = analytic.ensemble_mean_survival(
        model, spec.dt, spec.n_steps, spec.p_kick)
    final_err = float(stderr[-1])
    if final_err == 0.0:
        z = 0.0
    else:
        z = (float(mean[-1]) - analytic_mean) / final_err
    times = tuple(j * spec.dt for j in range(spec.n_steps + 1))
    meta = {"evaluator": spec.evaluator.value, "p_kick": spec.p_kick,
            "seed": spec.seed, "n_realizations": spec.n_realizations,
            "dt": spec.dt, "n_steps": spec.n_steps}
    curve = SurvivalCurve(times, tuple(mean.tolist()), tuple(stderr.tolist()), meta)
    return EnsembleReport(curve=curve, analytic_mean=analytic_mean, z_score=z)


def convergence_study(model: ContinuumModel, spec: EnsembleSpec, ladder):
    """Monte Carlo error vs realization count.

    Each ladder entry runs a fresh ensemble on a sub-seed derived from
    (spec.seed, rung index), so rungs are statistically independent.
    Returns one (count, |mean - analytic_mean|, stderr) row per entry,
    all evaluated at the final time.
    """
    counts = list(ladder)
    if not counts:
        raise InvalidParameterError("ladder must be nonempty")
    if any(not isinstance(c, int) or c < 2 for c in counts):
        raise InvalidParameterError(f"ladder entries must be integers >= 2: {counts!r}")
    if any(b <= a for a, b in zip(counts, counts[1:])):
        raise InvalidParameterError(f"ladder must be strictly ascending: {counts!r}")
    rows = []
    for i, count in enumerate(counts):
        sub = int(np.random.SeedSequence((spec.seed, 0x636F6E76, i))
                  .generate_state(1, np.uint64)[0])
        report = run_ensemble(model, replace(spec, n_realizations=count, seed=sub))
        gap = abs(report.curve.p_s[-1] - report.analytic_mean)
        rows.append((count, gap, report.curve.stderr[-1]))
    return rows


def report_to_csv(report: EnsembleReport, path) -> None:
    """Write `t,mean_p_s,stderr` rows at full double precision, LF endings."""
    curve = report.curve
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,mean_p_s,stderr\n")
        for t, p, s in zip(curve.times, curve.p_s, curve.stderr):
            fh.write(f"{t:.17g},{p:.17g},{s:.17g}\n")


def report_sidecar(report: EnsembleReport) -> dict:
    """The JSON-sidecar payload: analytic mean, z-score, count, seed."""
    meta = report.curve.meta
    return {
        "analytic_mean": report.analytic_mean,
        "z_score": report.z_score,
        "n_realizations": meta.get("n_realizations"),
        "seed": meta.get("seed"),
    }
