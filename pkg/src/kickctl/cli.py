"""Command-line front end: named experiments to plot-ready CSV/JSON.

Every experiment writes <prefix>.csv plus a <prefix>.json sidecar that
echoes the effective configuration, prints a one-line summary, and
returns a structured nonzero exit on validation or physics errors
(exit 2: bad configuration; 3: resonance; 4: perturbative breakdown).
Outputs contain no timestamps or environment data, so identical
configurations produce byte-identical files; ensemble determinism rides
on the per-realization seed contract.  KICKCTL_THREADS caps the sweep
worker pool (0 or unset = auto).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import analytic, ensemble as ens, model as mod, propagator, pulses
from .errors import (InvalidParameterError, KickctlError,
                     PerturbativeBreakdownError, ResonanceError)

EXPERIMENTS = ("spontaneous", "kicked", "stochastic", "ensemble", "zeno",
               "dd", "validate", "sweep")
SWEEP_AXES = ("dt", "n", "coupling", "p_kick")
SWEEP_EXPERIMENTS = ("spontaneous", "kicked", "stochastic", "zeno", "dd")


@dataclass
class RunConfig:
    """Effective, fully merged settings for one invocation."""

    experiment: str
    model_file: str = None
    flat: tuple = None            # (n_modes, bandwidth, coupling)
    omega_s: float = None
    dt: float = None
    n: int = None
    p_kick: float = 0.5
    seed: int = 0
    realizations: int = 1000
    evaluator: str = "analytic"
    output: str = None
    axis: str = None
    values: tuple = None
    sweep_experiment: str = "kicked"
    t_total: float = None

    def effective(self) -> dict:
        """Sidecar echo of the configuration; unset fields omitted.

        The output prefix is excluded: it names the sidecar's own
        location, and identical runs into different directories should
        produce identical bytes.
        """
        out = {}
        for key, value in asdict(self).items():
            if value is None or key == "output":
                continue
            if isinstance(value, tuple):
                value = list(value)
            out[key] = value
        return out


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _require(config, *names):
    for name in names:
        if getattr(config, name) is None:
            raise InvalidParameterError(
                f"experiment '{config.experiment}' requires --{name.replace('_', '-')}")


def _build_model(config: RunConfig) -> mod.ContinuumModel:
    if config.model_file and config.flat:
        raise InvalidParameterError("give either --model or --flat, not both")
    if config.model_file:
        if config.omega_s is not None:
            raise InvalidParameterError(
                "--omega-s only applies to --flat; the model file fixes omega_s")
        try:
            with open(config.model_file, "r", encoding="utf-8") as fh:
                return mod.model_from_json(fh.read())
        except OSError as exc:
            raise InvalidParameterError(
                f"cannot read model file {config.model_file}: {exc}") from exc
    if config.flat:
        n_modes, bandwidth, coupling = config.flat
        return mod.build_flat_band(int(n_modes), bandwidth, coupling,
                                   config.omega_s or 0.0)
    raise InvalidParameterError("a model is required: pass --model FILE or --flat N W V")


def _thread_cap() -> int:
    raw = os.environ.get("KICKCTL_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError:
        raise InvalidParameterError(f"KICKCTL_THREADS must be an integer, got {raw!r}")
    if cap < 0:
        raise InvalidParameterError(f"KICKCTL_THREADS must be >= 0, got {cap}")
    if cap == 0:
        return min(8, os.cpu_count() or 1)
    return cap


# ---------------------------------------------------------------------------
# experiment engines: (times, named columns, sidecar extras)


def _exact_curve(model, dt, events, label):
    seq = pulses.PulseSequence(dt, events, label)
    curve = propagator.run_pulsed(model, mod.initial_state(model), seq,
                                  propagator.EXACT)
    return np.array(curve.p_s)


def _columns_spontaneous(model, dt, n, p_kick, seed):
    m = 2 * n
    times = np.arange(m + 1) * dt
    p_ana = np.array([analytic.spontaneous_survival(model, t) for t in times])
    p_ex = _exact_curve(model, dt, (pulses.PulseKind.IDENTITY,) * m, "free-decay")
    return times, [("p_analytic", p_ana), ("p_exact", p_ex)], {}


def _columns_kicked(model, dt, n, p_kick, seed):
    m = 2 * n
    times = np.arange(m + 1) * dt
    final = analytic.kicked_survival(model, dt, n)  # also triggers the guard
    lam = pulses.dd_sign_sequence(m).as_array()
    p_ana = analytic.survival_curve_from_coefficients(model, dt, lam)
    p_ex = _exact_curve(model, dt, (pulses.PulseKind.PHASE_KICK,) * m,
                        "periodic-kicks")
    terms = analytic.kicked_terms(model, dt, n)
    extras = {"final_p_closed_form": final, "term_a": terms.term_a,
              "term_b": terms.term_b, "term_c": terms.term_c}
    return times, [("p_analytic", p_ana), ("p_exact", p_ex)], extras


def _columns_stochastic(model, dt, n, p_kick, seed):
    m = 2 * n
    times = np.arange(m + 1) * dt
    seq, signs = pulses.stochastic_sequence(dt, m, p_kick, seed)
    final = analytic.stochastic_survival(model, dt, n, signs)
    p_ana = analytic.survival_curve_from_kicks(model, dt, signs)
    curve = propagator.run_pulsed(model, mod.initial_state(model), seq,
                                  propagator.EXACT)
    extras = {"events": "".join(e.value for e in seq.events),
              "final_p_analytic": final}
    return times, [("p_analytic", p_ana), ("p_exact", np.array(curve.p_s))], extras


def _columns_zeno(model, dt, n, p_kick, seed):
    m = 2 * n
    times = np.arange(m + 1) * dt
    gamma = analytic.zeno_decay_rate(model, dt)
    steps = np.arange(m + 1)
    p_lin = 1.0 - steps * dt * gamma
    factor = 1.0 - dt * gamma
    if factor < 0.0:
        raise PerturbativeBreakdownError(
            f"per-interval survival factor is negative ({factor!r}) at dt={dt!r}",
            value=factor)
    p_prod = factor ** steps
    p_ex = _exact_curve(model, dt, (pulses.PulseKind.PROJECTION,) * m,
                        "periodic-measurements")
    extras = {"gamma_zeno": gamma, "gamma_avg": analytic.avg_decay_rate(model, dt)}
    return times, [("p_linearized", p_lin), ("p_product", p_prod),
                   ("p_exact", p_ex)], extras


def _columns_dd(model, dt, n, p_kick, seed):
    m = 2 * n
    times = np.arange(m + 1) * dt
    lam = pulses.dd_sign_sequence(m)
    final = analytic.dd_survival(model, dt, n, lam)
    p_ana = analytic.survival_curve_from_coefficients(model, dt, lam.as_array())
    # alternating coefficients are realized by kicking after every segment
    p_ex = _exact_curve(model, dt, (pulses.PulseKind.PHASE_KICK,) * m,
                        "decoupling-kicks")
    extras = {"final_p_analytic": final,
              "kicked_closed_form": analytic.kicked_survival(model, dt, n)}
    return times, [("p_analytic", p_ana), ("p_exact", p_ex)], extras


_ENGINES = {
    "spontaneous": _columns_spontaneous,
    "kicked": _columns_kicked,
    "stochastic": _columns_stochastic,
    "zeno": _columns_zeno,
    "dd": _columns_dd,
}


def _write_sidecar(path, payload):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _run_single(config: RunConfig) -> int:
    _require(config, "dt", "n", "output")
    model = _build_model(config)
    times, columns, extras = _ENGINES[config.experiment](
        model, config.dt, config.n, config.p_kick, config.seed)
    csv_path = config.output + ".csv"
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t," + ",".join(name for name, _ in columns) + "\n")
        for i, t in enumerate(times):
            row = ",".join(_fmt(vals[i]) for _, vals in columns)
            fh.write(f"{_fmt(t)},{row}\n")
    summary = {name: float(vals[-1]) for name, vals in columns}
    gap = float(np.max(np.abs(columns[0][1] - columns[-1][1])))
    sidecar = {"config": config.effective(),
               "final": summary,
               "max_abs_gap": gap}
    for key, value in extras.items():
        sidecar[key] = value
    _write_sidecar(config.output + ".json", sidecar)
    finals = ", ".join(f"{name}={value:.6g}" for name, value in summary.items())
    print(f"{config.experiment}: dt={config.dt:g} steps={2 * config.n} {finals} "
          f"-> {csv_path}")
    return 0


def _run_ensemble(config: RunConfig) -> int:
    _require(config, "dt", "n", "output")
    model = _build_model(config)
    spec = ens.EnsembleSpec(
        n_realizations=config.realizations, dt=config.dt, n_steps=2 * config.n,
        p_kick=config.p_kick, seed=config.seed,
        evaluator=ens.Evaluator(config.evaluator))
    report = ens.run_ensemble(model, spec)
    ens.report_to_csv(report, config.output + ".csv")
    sidecar = ens.report_sidecar(report)
    sidecar["config"] = config.effective()
    sidecar["mean_final"] = report.curve.p_s[-1]
    _write_sidecar(config.output + ".json", sidecar)
    print(f"ensemble: N={config.realizations} p_kick={config.p_kick:g} "
          f"mean_final={report.curve.p_s[-1]:.6g} "
          f"analytic={report.analytic_mean:.6g} z={report.z_score:+.3f} "
          f"-> {config.output}.csv")
    return 0


# ---------------------------------------------------------------------------
# identity suite


def _random_offresonant_model(rng):
    """Small random model keeping every mode off the kick resonance."""
    n_modes = int(rng.integers(1, 7))
    while True:
        omega_s = float(rng.uniform(-1.0, 1.0))
        omegas = rng.uniform(-4.0, 4.0, n_modes)
        mags = rng.uniform(0.002, 0.03, n_modes)
        phases = rng.uniform(0.0, 2.0 * math.pi, n_modes)
        dt = float(rng.uniform(0.05, 2.5))
        theta = (omegas - omega_s) * dt
        if np.min(np.abs(np.mod(theta, 2 * math.pi) - math.pi)) > 1e-2:
            couplings = mags * np.exp(1j * phases)
            pairs = list(zip(omegas.tolist(), couplings.tolist()))
            return mod.build_custom(omega_s, pairs), dt


def _identity_cancellation(rng):
    worst = 0.0
    for _ in range(60):
        model, dt = _random_offresonant_model(rng)
        n = int(rng.integers(1, 30))
        terms = analytic.kicked_terms(model, dt, n)
        rel = abs(terms.term_a + terms.term_c) / max(abs(terms.term_a), 1e-300)
        worst = max(worst, rel)
    return worst, 1e-12


def _identity_free_decay(rng):
    worst = 0.0
    for _ in range(50):
        model, dt = _random_offresonant_model(rng)
        n = int(rng.integers(1, 26))
        signs = pulses.SignSequence((1,) * (2 * n))
        p_stoch = analytic.stochastic_survival(model, dt, n, signs)
        p_free = analytic.spontaneous_survival(model, 2 * n * dt)
        worst = max(worst, abs(p_stoch - p_free))
    return worst, 1e-12


def _identity_decoupling(rng):
    worst = 0.0
    for _ in range(50):
        model, dt = _random_offresonant_model(rng)
        n = int(rng.integers(1, 26))
        lam = pulses.dd_sign_sequence(2 * n)
        worst = max(worst, abs(analytic.dd_survival(model, dt, n, lam)
                               - analytic.kicked_survival(model, dt, n)))
    return worst, 1e-12


def _identity_zeno_rate(rng):
    worst = 0.0
    for _ in range(100):
        model, dt = _random_offresonant_model(rng)
        g_avg = analytic.avg_decay_rate(model, dt)
        g_zeno = analytic.zeno_decay_rate(model, dt)
        worst = max(worst, abs(g_zeno - g_avg) / max(abs(g_avg), 1e-300))
    return worst, 1e-14


_IDENTITIES = [
    ("term-cancellation", _identity_cancellation),
    ("free-decay-reduction", _identity_free_decay),
    ("decoupling-equivalence", _identity_decoupling),
    ("measurement-rate-coincidence", _identity_zeno_rate),
]


def _run_validate(config: RunConfig) -> int:
    failures = 0
    for name, check in _IDENTITIES:
        rng = np.random.default_rng(config.seed or 20260815)
        worst, tol = check(rng)
        status = "PASS" if worst <= tol else "FAIL"
        if status == "FAIL":
            failures += 1
        print(f"{status} {name}: max deviation {worst:.3e} (tolerance {tol:.0e})")
    if failures:
        print(f"validate: {failures} identit{'y' if failures == 1 else 'ies'} failed")
        return 1
    print("validate: all identities hold")
    return 0


# ---------------------------------------------------------------------------
# sweeps


def _sweep_point_config(config: RunConfig, value):
    """Per-point (model, dt, n, p_kick) for the sweep axis."""
    dt, n, p_kick = config.dt, config.n, config.p_kick
    flat = config.flat
    if config.axis == "dt":
        dt = float(value)
        if dt <= 0 or not math.isfinite(dt):
            raise InvalidParameterError(f"dt values must be positive, got {value!r}")
        if config.t_total is not None:
            steps = config.t_total / dt
            n_point = round(steps / 2.0)
            if n_point < 1 or abs(steps - 2 * n_point) > 1e-9 * max(1.0, steps):
                raise InvalidParameterError(
                    f"--t-total {config.t_total} is not an even multiple of "
                    f"dt={value}; pick values with t_total/(2 dt) integral")
            n = n_point
    elif config.axis == "n":
        n_f = float(value)
        n = int(round(n_f))
        if n < 1 or n != n_f:
            raise InvalidParameterError(f"n values must be positive integers, got {value!r}")
    elif config.axis == "coupling":
        if flat is None:
            raise InvalidParameterError("a coupling sweep needs --flat model parameters")
        flat = (flat[0], flat[1], float(value))
    elif config.axis == "p_kick":
        p_kick = float(value)
        if not 0.0 <= p_kick <= 1.0:
            raise InvalidParameterError(f"p_kick values must lie in [0,1], got {value!r}")
    point = RunConfig(experiment=config.sweep_experiment,
                      model_file=config.model_file, flat=flat,
                      omega_s=config.omega_s, dt=dt, n=n, p_kick=p_kick,
                      seed=config.seed)
    return point


def _sweep_point_rows(config: RunConfig, value):
    """CSV rows and error records for one sweep grid point."""
    point = _sweep_point_config(config, value)
    if point.dt is None or point.n is None:
        raise InvalidParameterError("sweep needs --dt and --n (or --t-total on a dt axis)")
    rows, errors = [], []
    axis_txt = _fmt(value)
    try:
        model = _build_model(point)
        times, columns, _ = _ENGINES[point.experiment](
            model, point.dt, point.n, point.p_kick, point.seed)
    except ResonanceError as exc:
        rows.append(f"{axis_txt},,,{point.experiment},resonance")
        errors.append({"axis_value": float(value), "kind": "resonance",
                       "message": str(exc)})
        return rows, errors
    except PerturbativeBreakdownError as exc:
        rows.append(f"{axis_txt},,,{point.experiment},breakdown")
        errors.append({"axis_value": float(value), "kind": "breakdown",
                       "message": str(exc)})
        return rows, errors
    for name, vals in columns:
        method = name.removeprefix("p_")
        for t, p in zip(times, vals):
            rows.append(f"{axis_txt},{_fmt(t)},{_fmt(p)},{method},")
    return rows, errors


def _run_sweep(config: RunConfig) -> int:
    _require(config, "axis", "values", "output")
    if config.axis not in SWEEP_AXES:
        raise InvalidParameterError(
            f"axis must be one of {SWEEP_AXES}, got {config.axis!r}")
    if config.sweep_experiment not in SWEEP_EXPERIMENTS:
        raise InvalidParameterError(
            f"sweep experiment must be one of {SWEEP_EXPERIMENTS}, "
            f"got {config.sweep_experiment!r}")
    if not config.values:
        raise InvalidParameterError("sweep needs a nonempty --values list")
    if config.axis == "p_kick" and config.sweep_experiment != "stochastic":
        raise InvalidParameterError("a p_kick sweep only applies to --experiment stochastic")
    workers = min(_thread_cap(), len(config.values))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda v: _sweep_point_rows(config, v),
                                    config.values))
    else:
        results = [_sweep_point_rows(config, v) for v in config.values]
    csv_path = config.output + ".csv"
    all_errors = []
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("axis_value,t,p_s,method,error\n")
        for rows, errors in results:
            for row in rows:
                fh.write(row + "\n")
            all_errors.extend(errors)
    sidecar = {"config": config.effective(), "errors": all_errors,
               "n_points": len(config.values)}
    _write_sidecar(config.output + ".json", sidecar)
    note = f", {len(all_errors)} point(s) flagged" if all_errors else ""
    print(f"sweep: axis={config.axis} points={len(config.values)} "
          f"experiment={config.sweep_experiment}{note} -> {csv_path}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def run(config: RunConfig) -> int:
    """Execute one validated configuration; returns the exit status."""
    if config.experiment == "validate":
        return _run_validate(config)
    if config.experiment == "ensemble":
        return _run_ensemble(config)
    if config.experiment == "sweep":
        return _run_sweep(config)
    if config.experiment in _ENGINES:
        return _run_single(config)
    raise InvalidParameterError(f"unknown experiment {config.experiment!r}")


def _add_common(parser):
    parser.add_argument("--model", dest="model_file", metavar="FILE",
                        help="model JSON file")
    parser.add_argument("--flat", nargs=3, type=float,
                        metavar=("N_MODES", "BANDWIDTH", "COUPLING"),
                        help="flat-band model parameters")
    parser.add_argument("--omega-s", dest="omega_s", type=float,
                        help="bound-state frequency for --flat (default 0)")
    parser.add_argument("--config", metavar="FILE",
                        help="JSON file with default option values")
    parser.add_argument("-o", "--output", metavar="PREFIX",
                        help="output path prefix for .csv/.json")
    parser.add_argument("--dt", type=float, help="segment length")
    parser.add_argument("--n", type=int, help="number of segment pairs (2n steps)")
    parser.add_argument("--p-kick", dest="p_kick", type=float,
                        help="per-step kick probability (default 0.5)")
    parser.add_argument("--seed", type=int, help="unsigned 64-bit seed (default 0)")
    parser.add_argument("--realizations", type=int,
                        help="ensemble realization count (default 1000)")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="kickctl",
        description="Pulse-controlled decay of a bound state into a discretized "
                    "continuum: closed forms cross-validated against an exact "
                    "propagator.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in ("spontaneous", "kicked", "stochastic", "zeno", "dd"):
        p = sub.add_parser(name, help=f"run the {name} experiment")
        _add_common(p)
    p = sub.add_parser("ensemble", help="Monte Carlo average over realizations")
    _add_common(p)
    p.add_argument("--evaluator", choices=("analytic", "exact"),
                   help="per-realization evaluator (default analytic)")
    p = sub.add_parser("validate", help="run the built-in identity suite")
    _add_common(p)
    p = sub.add_parser("sweep", help="scan a parameter axis, long-format CSV")
    _add_common(p)
    p.add_argument("--axis", choices=SWEEP_AXES, help="parameter to scan")
    p.add_argument("--values", nargs="+", type=float, help="axis grid values")
    p.add_argument("--experiment", dest="sweep_experiment",
                   choices=SWEEP_EXPERIMENTS,
                   help="experiment to run per point (default kicked)")
    p.add_argument("--t-total", dest="t_total", type=float,
                   help="fix total time on a dt axis; n = t_total/(2 dt) per point")
    return parser


_CONFIG_KEYS = ("model_file", "flat", "omega_s", "dt", "n", "p_kick", "seed",
                "realizations", "evaluator", "output", "axis", "values",
                "sweep_experiment", "t_total")

_DEFAULTS = {"p_kick": 0.5, "seed": 0, "realizations": 1000,
             "evaluator": "analytic", "sweep_experiment": "kicked"}


def _merge_config(args) -> RunConfig:
    """Command line wins over config file, which wins over defaults."""
    file_values = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidParameterError(f"cannot read config file: {exc}") from exc
        if not isinstance(raw, dict):
            raise InvalidParameterError("config file must hold a JSON object")
        for key, value in raw.items():
            key = key.replace("-", "_")
            if key == "model":
                key = "model_file"
            if key == "experiment":
                key = "sweep_experiment"
            if key not in _CONFIG_KEYS:
                raise InvalidParameterError(f"unknown config key {key!r}")
            file_values[key] = value
    merged = {"experiment": args.experiment}
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is None:
            value = file_values.get(key)
        if value is None:
            value = _DEFAULTS.get(key)
        merged[key] = value
    if merged["flat"] is not None:
        flat = tuple(float(x) for x in merged["flat"])
        if len(flat) != 3 or flat[0] != int(flat[0]):
            raise InvalidParameterError(
                f"--flat needs N_MODES BANDWIDTH COUPLING, got {merged['flat']!r}")
        merged["flat"] = flat
    if merged["values"] is not None:
        merged["values"] = tuple(float(v) for v in merged["values"])
    if merged["seed"] is not None:
        merged["seed"] = int(merged["seed"])
    if merged["n"] is not None:
        merged["n"] = int(merged["n"])
    if merged["realizations"] is not None:
        merged["realizations"] = int(merged["realizations"])
    return RunConfig(**merged)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _merge_config(args)
        return run(config)
    except ResonanceError as exc:
        print(f"error: resonance: {exc}", file=sys.stderr)
        return 3
    except PerturbativeBreakdownError as exc:
        print(f"error: perturbative breakdown: {exc}", file=sys.stderr)
        return 4
    except KickctlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: file I/O: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
