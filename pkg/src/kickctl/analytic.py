"""Closed-form survival probabilities and amplitudes, first order in |v|^2.

Everything here comes from the same short-time expansion: over one free
segment of length dt the bound amplitude loses
sum_k |v_ks|^2 * integral of the continuum correlation, and each mode k
accumulates a phase factor z_k = e^{i(omega_k - omega_s) dt} per
segment.  Writing theta_k = (omega_k - omega_s) * dt and u_k = theta_k/2,
the per-mode loss weight over a segment is

    w_k = |v_ks|^2 * dt^2 * sinc^2(u_k),

and a pulse pattern enters only through segment coefficients
lambda_0..lambda_{m-1} in {+1, -1} (the running product of kick signs).
The survival probability after m segments is

    P(m dt) = 1 - sum_k w_k |sum_{l<m} lambda_l z_k^l|^2,

which the kernel subpackage evaluates through the equivalent pairwise
correlation sum.  Alternating coefficients resum into the tan^2 kicked
closed form; all-ones coefficients telescope back to free decay.  Those
two reductions, the A/C term cancellation and the Zeno-rate coincidence
are exact identities of the expansion and are enforced by tests at
near-machine tolerance.

The tan((omega_k - omega_s) dt / 2) factors of the kicked forms diverge
where the detuning-interval product hits pi (mod 2*pi); such points
raise ResonanceError.  Removable 0/0 points (sinc- and tanc-type) are
evaluated by series instead and never raise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from ._numerics import cos_moment_fg as _fg
from ._numerics import sinc as _sinc
from ._numerics import tanc as _tanc
from .errors import InvalidParameterError, PerturbativeBreakdownError, ResonanceError
from .model import ContinuumModel
from .pulses import SignSequence

_TWO_PI = 2.0 * math.pi


class GuardBehavior(Enum):
    ERROR = "error"
    LIMIT = "limit"


@dataclass(frozen=True)
class ResonanceGuard:
    """Policy for singular points of the closed forms.

    threshold is the distance (in theta = detuning * dt, radians) below
    which a point counts as resonant.  The behavior field selects how
    guarded points are treated where a choice exists: removable 0/0
    points always take the series limit, while the tan divergence has no
    finite limit, so it raises ResonanceError under either setting.
    """

    threshold: float = 1e-8
    behavior: GuardBehavior = GuardBehavior.ERROR

    def __post_init__(self):
        object.__setattr__(self, "threshold", float(self.threshold))
        if not (math.isfinite(self.threshold) and self.threshold > 0):
            raise InvalidParameterError(
                f"guard threshold must be positive, got {self.threshold}")
        if not isinstance(self.behavior, GuardBehavior):
            raise InvalidParameterError(
                f"behavior must be a GuardBehavior, got {self.behavior!r}")


DEFAULT_GUARD = ResonanceGuard()


class ZenoForm(Enum):
    LINEARIZED = "linearized"
    PRODUCT = "product"


@dataclass(frozen=True)
class KickedTerms:
    """A/B/C decomposition of the kicked survival probability.

    term_a is the plain depletion 2n*dt*gamma_zeno, term_b the
    tan^2-weighted interference loss, term_c the cross term.  The theory
    requires term_a + term_c = 0 identically; both are computed through
    different floating-point routes so the cancellation is a real check.
    """

    term_a: float
    term_b: float
    term_c: float


# ---------------------------------------------------------------------------
# validation helpers


def _check_time(name, value, positive=False):
    value = float(value)
    if not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be finite, got {value}")
    if positive and value <= 0:
        raise InvalidParameterError(f"{name} must be positive, got {value}")
    if not positive and value < 0:
        raise InvalidParameterError(f"{name} must be nonnegative, got {value}")
    return value


def _check_count(name, value, minimum=1):
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise InvalidParameterError(
            f"{name} must be an integer >= {minimum}, got {value!r}")
    return value


def _tan_resonance_check(model, dt, guard, mode_indices=None):
    """Raise if any (omega_k - omega_s)*dt sits within guard of pi (mod 2pi)."""
    theta = model.detunings * dt
    if mode_indices is not None:
        theta = theta[mode_indices]
    dist = np.abs(np.mod(theta, _TWO_PI) - math.pi)
    worst = int(np.argmin(dist))
    if dist[worst] < guard.threshold:
        idx = worst if mode_indices is None else int(np.atleast_1d(mode_indices)[worst])
        delta = float(model.detunings[idx])
        base = math.pi / abs(delta)
        # singular dt nearest the requested one (odd multiple of base)
        q = max(0, round((dt / base - 1.0) / 2.0))
        nearest = (2 * q + 1) * base
        raise ResonanceError(
            f"dt={dt!r} is resonant with mode {idx} (omega_k="
            f"{float(model.omegas[idx])!r}): |omega_k-omega_s|*dt is within "
            f"{dist[worst]:.3e} of pi (mod 2pi). The first-order kicked "
            f"forms diverge at dt = pi/|omega_s-omega_k| ~= {base!r} "
            f"(nearest singular dt {nearest!r}); there is no finite limit. "
            f"Choose dt away from odd multiples of {base!r}.",
            mode_index=idx, omega_k=float(model.omegas[idx]), dt=dt,
            resonant_dt=nearest)


# ---------------------------------------------------------------------------
# segment tables shared by the pattern evaluators


def _loss_weights(model, interval):
    """w_k = |v_ks|^2 * interval^2 * sinc^2(detuning * interval / 2)."""
    u = 0.5 * model.detunings * interval
    s = _sinc(u)
    return model.weights * (interval * interval) * s * s


def _cos_table(model, dt, m):
    """C_d = sum_k w_k cos(d * theta_k) for d = 0..m-1, blocked for memory."""
    theta = model.detunings * dt
    w = _loss_weights(model, dt)
    out = np.empty(m, dtype=np.float64)
    block = 512
    for start in range(0, m, block):
        stop = min(start + block, m)
        d = np.arange(start, stop, dtype=np.float64)
        out[start:stop] = np.cos(np.outer(d, theta)) @ w
    return out


def survival_curve_from_coefficients(model: ContinuumModel, dt: float, lambdas,
                                     check: bool = True) -> np.ndarray:
    """Survival at steps 0..m for one row of segment coefficients.

    lambdas may be a SignSequence or a plain +-1 array of length m.  With
    check=True a negative value anywhere on the curve raises
    PerturbativeBreakdownError carrying the raw minimum.
    """
    dt = _check_time("dt", dt, positive=True)
    if isinstance(lambdas, SignSequence):
        lam = lambdas.as_array()
    else:
        lam = np.asarray(lambdas, dtype=np.float64)
    if lam.ndim != 1 or lam.size == 0:
        raise InvalidParameterError("lambdas must be a nonempty 1-D sign list")
    table = _cos_table(model, dt, lam.size)
    curve = _kernels.sign_survival_curves(table, lam[None, :])[0]
    if check and curve.min() < 0.0:
        j = int(curve.argmin())
        raise PerturbativeBreakdownError(
            f"first-order survival went negative ({curve[j]!r} at step {j}, "
            f"dt={dt!r}); the weak-coupling expansion is not valid this deep",
            value=float(curve[j]))
    return curve


def cumulative_coefficients(signs) -> np.ndarray:
    """Segment coefficients from per-step kick indicators.

    Entry j-1 of signs is the sign applied after segment j; segment j's
    coefficient is the running product of all earlier entries, so the
    final entry never affects the last recorded survival value.
    """
    if isinstance(signs, SignSequence):
        s = signs.as_array()
    else:
        s = np.asarray(signs, dtype=np.float64)
    lam = np.empty(s.size, dtype=np.float64)
    if s.size:
        lam[0] = 1.0
        np.cumprod(s[:-1], out=lam[1:])
    return lam


def survival_curve_from_kicks(model: ContinuumModel, dt: float, signs,
                              check: bool = True) -> np.ndarray:
    """Survival curve for one realization of per-step kick indicators."""
    return survival_curve_from_coefficients(
        model, dt, cumulative_coefficients(signs), check=check)


def survival_curves_from_kick_matrix(model: ContinuumModel, dt: float,
                                     signs: np.ndarray) -> np.ndarray:
    """First-order survival curves for many kick-indicator rows at once.

    signs is (n_realizations, n_steps) with entries +-1; rows are
    converted to running-product segment coefficients and fed through
    the shared kernel.  Returns (n_realizations, n_steps + 1); no
    breakdown check (batch callers locate offending rows themselves).
    """
    dt = _check_time("dt", dt, positive=True)
    s = np.asarray(signs, dtype=np.float64)
    if s.ndim != 2 or s.shape[1] == 0:
        raise InvalidParameterError(f"signs must be (n, m) with m >= 1, got {s.shape}")
    lam = np.empty_like(s)
    lam[:, 0] = 1.0
    np.cumprod(s[:, :-1], axis=1, out=lam[:, 1:])
    table = _cos_table(model, dt, s.shape[1])
    return _kernels.sign_survival_curves(table, lam)


# ---------------------------------------------------------------------------
# free decay and decay rates


def spontaneous_survival(model: ContinuumModel, t: float) -> float:
    """Free-decay survival 1 - sum_k |v_ks|^2 t^2 sinc^2((omega_k-omega_s)t/2).

    First order in |v|^2; a negative result means the expansion broke
    down and raises PerturbativeBreakdownError with the raw value.
    """
    t = _check_time("t", t)
    p = 1.0 - float(np.sum(_loss_weights(model, t)))
    if p < 0.0:
        raise PerturbativeBreakdownError(
            f"first-order free-decay survival is negative ({p!r}) at t={t!r}",
            value=p)
    return p


def avg_decay_rate(model: ContinuumModel, dt: float) -> float:
    """Ensemble-averaged per-step decay rate gamma_avg.

    gamma = dt * sum_k |v_ks|^2 sinc^2((omega_k - omega_s) dt / 2); the
    resonant-mode limit sinc -> 1 is taken by series.  This is the decay
    rate seen by unbiased random kicking, and it coincides with the
    projective-measurement rate below.
    """
    dt = _check_time("dt", dt, positive=True)
    s = _sinc(0.5 * model.detunings * dt)
    return dt * float(np.sum(model.weights * s * s))


def zeno_decay_rate(model: ContinuumModel, dt: float) -> float:
    """Per-step decay rate under repeated projective measurement.

    Computed from the real part of the triangular kernel moment,
    gamma_zeno = 2*dt*sum_k |v_ks|^2 f(theta_k), a deliberately
    different floating-point route from avg_decay_rate; the two agree
    identically in exact arithmetic.
    """
    dt = _check_time("dt", dt, positive=True)
    f, _ = _fg(model.detunings * dt)
    return 2.0 * dt * float(np.sum(model.weights * f))


def averaged_survival(model: ContinuumModel, dt: float, n: int) -> float:
    """Mean survival after 2n segments of unbiased random kicking.

    The cross terms average to zero for independent zero-mean signs, so
    the mean needs no sampling: P = 1 - 2n*dt*gamma_avg.
    """
    dt = _check_time("dt", dt, positive=True)
    n = _check_count("n", n, minimum=0)
    p = 1.0 - 2 * n * dt * avg_decay_rate(model, dt)
    if p < 0.0:
        raise PerturbativeBreakdownError(
            f"averaged survival is negative ({p!r}) at dt={dt!r}, n={n}", value=p)
    return p


def zeno_survival(model: ContinuumModel, dt: float, n: int,
                  form: ZenoForm = ZenoForm.LINEARIZED) -> float:
    """Survival under 2n projective measurements spaced dt apart.

    LINEARIZED expands the product to first order, 1 - 2n*dt*gamma_zeno;
    PRODUCT keeps the per-interval factor (1 - dt*gamma_zeno)^(2n).  The
    two differ at O((gamma t)^2).
    """
    dt = _check_time("dt", dt, positive=True)
    n = _check_count("n", n, minimum=0)
    if not isinstance(form, ZenoForm):
        raise InvalidParameterError(f"form must be a ZenoForm, got {form!r}")
    gamma = zeno_decay_rate(model, dt)
    if form is ZenoForm.LINEARIZED:
        p = 1.0 - 2 * n * dt * gamma
        if p < 0.0:
            raise PerturbativeBreakdownError(
                f"linearized measurement survival is negative ({p!r}) at "
                f"dt={dt!r}, n={n}", value=p)
        return p
    factor = 1.0 - dt * gamma
    if factor < 0.0:
        raise PerturbativeBreakdownError(
            f"per-interval survival factor is negative ({factor!r}) at dt={dt!r}",
            value=factor)
    return factor ** (2 * n)


# ---------------------------------------------------------------------------
# periodic kicking: closed forms


def kicked_survival(model: ContinuumModel, dt: float, n: int,
                    guard: ResonanceGuard = DEFAULT_GUARD) -> float:
    """Survival after 2n segments with a phase kick after every one.

    P = 1 - sum_k |v_ks|^2 dt^2 tanc^2(u_k) sin^2(n theta_k).  Short dt
    pushes every tanc toward 1 and suppresses decay (Zeno side); dt with
    tan^2(u) > 1 beats free decay (anti-Zeno side).  Raises
    ResonanceError at the tan poles and PerturbativeBreakdownError on a
    negative result.
    """
    dt = _check_time("dt", dt, positive=True)
    n = _check_count("n", n)
    _tan_resonance_check(model, dt, guard)
    theta = model.detunings * dt
    tc = _tanc(0.5 * theta)
    loss = float(np.sum(model.weights * (dt * dt) * tc * tc
                        * np.sin(n * theta) ** 2))
    p = 1.0 - loss
    if p < 0.0:
        raise PerturbativeBreakdownError(
            f"kicked survival is negative ({p!r}) at dt={dt!r}, n={n}", value=p)
    return p


def kicked_terms(model: ContinuumModel, dt: float, n: int,
                 guard: ResonanceGuard = DEFAULT_GUARD) -> KickedTerms:
    """A/B/C decomposition of 1 - P for 2n periodic kicks.

    term_a: 2n*dt*gamma_zeno via the kernel-moment route.
    term_b: twice the real part of the alternating-sum interference term.
    term_c: twice the real part of the cross term; equals -term_a
            identically, computed through sinc*tanc*cos(u) so the
            cancellation is a genuine cross-route check.
    """
    dt = _check_time("dt", dt, positive=True)
    n = _check_count("n", n)
    _tan_resonance_check(model, dt, guard)
    m2 = 2 * n
    theta = model.detunings * dt
    u = 0.5 * theta
    term_a = m2 * dt * zeno_decay_rate(model, dt)
    tc = _tanc(u)
    p1 = -model.weights * (dt * dt / 4.0) * tc * tc
    term_b = float(2.0 * np.sum((p1 * (np.exp(-2j * n * theta) - 1.0)).real))
    p2 = (-m2 * model.weights * (dt * dt / 2.0)
          * _sinc(u) * tc * np.exp(-1j * u))
    term_c = float(2.0 * np.sum(p2.real))
    return KickedTerms(term_a=float(term_a), term_b=term_b, term_c=term_c)


def kicked_amplitude(model: ContinuumModel, dt: float, n: int,
                     guard: ResonanceGuard = DEFAULT_GUARD) -> complex:
    """Bound-state amplitude alpha_s(2n dt) under periodic kicking.

    Complex first-order amplitude after an even number of kicks: the
    triangular kernel depletion (including its imaginary level-shift
    part) plus the resummed interference and cross terms.
    """
    dt = _check_time("dt", dt, positive=True)
    n = _check_count("n", n)
    _tan_resonance_check(model, dt, guard)
    m2 = 2 * n
    theta = model.detunings * dt
    u = 0.5 * theta
    f, g = _fg(-theta)
    kernel_moment = complex(np.sum(model.weights * dt * (f + 1j * g)))
    tc = _tanc(u)
    p1 = -model.weights * (dt * dt / 4.0) * tc * tc
    interference = complex(np.sum(p1 * (np.exp(-2j * n * theta) - 1.0)))
    p2 = (-m2 * model.weights * (dt * dt / 2.0)
          * _sinc(u) * tc * np.exp(-1j * u))
    cross = complex(np.sum(p2))
    return 1.0 - m2 * dt * kernel_moment - interference - cross


# ---------------------------------------------------------------------------
# continuum amplitudes


def _check_mode_index(model, mode_index):
    if not isinstance(mode_index, int) or isinstance(mode_index, bool):
        raise InvalidParameterError(f"mode_index must be an integer, got {mode_index!r}")
    if not 0 <= mode_index < model.n_modes:
        raise InvalidParameterError(
            f"mode_index {mode_index} out of range for {model.n_modes} modes")
    return mode_index


def beta_periodic(model: ContinuumModel, mode_index: int, dt: float, j: int,
                  guard: ResonanceGuard = DEFAULT_GUARD) -> complex:
    """Mode amplitude beta_k(j dt) under kick-every-segment driving.

    Resummed alternating series:
    beta = i v_ks (dt/2) tanc(u_k) ((-1)^j e^{i j theta_k} - 1).
    Guarded against the tanc pole for the requested mode.
    """
    mode_index = _check_mode_index(model, mode_index)
    dt = _check_time("dt", dt, positive=True)
    j = _check_count("j", j)
    _tan_resonance_check(model, dt, guard, mode_indices=np.array([mode_index]))
    delta = float(model.detunings[mode_index])
    theta = delta * dt
    u = 0.5 * theta
    v = complex(model.couplings[mode_index])
    sign = -1.0 if j % 2 else 1.0
    return (1j * v * (dt / 2.0) * float(_tanc(u))
            * (sign * np.exp(1j * j * theta) - 1.0))


def beta_stochastic(model: ContinuumModel, mode_index: int, dt: float, l: int,
                    signs: SignSequence) -> complex:
    """Mode amplitude beta_k(l dt) for one realization of kick indicators.

    beta = -i v_ks dt sinc(u_k) e^{i u_k} sum_{m=0}^{l-1} c_m e^{i m theta_k}
    with c_m the running sign products (c_0 = 1): each segment
    contributes one phase-advanced slice whose sign records the kicks
    accumulated before it.  Needs at least l-1 sign entries; with every
    entry -1 the accumulation alternates and matches beta_periodic.
    """
    mode_index = _check_mode_index(model, mode_index)
    dt = _check_time("dt", dt, positive=True)
    l = _check_count("l", l)
    if len(signs) < l - 1:
        raise InvalidParameterError(
            f"need at least {l - 1} signs for l={l}, got {len(signs)}")
    delta = float(model.detunings[mode_index])
    theta = delta * dt
    u = 0.5 * theta
    v = complex(model.couplings[mode_index])
    coeff = np.empty(l, dtype=np.float64)
    coeff[0] = 1.0
    if l > 1:
        np.cumprod(np.asarray(signs.signs[:l - 1], dtype=np.float64), out=coeff[1:])
    slice_sum = complex(np.sum(coeff * np.exp(1j * theta * np.arange(l))))
    return -1j * v * dt * float(_sinc(u)) * np.exp(1j * u) * slice_sum


def geometric_sum(r: complex, m: int, threshold: float = 1e-8) -> complex:
    """sum_{j=1}^{m} r^j in closed form, with a series branch near r = 1.

    The closed form r(1-r^m)/(1-r) is used away from r = 1; within
    threshold of 1 the truncated expansion around r = 1 (exact at r = 1,
    where the sum is m) avoids the 0/0.
    """
    m = _check_count("m", m)
    r = complex(r)
    e = r - 1.0
    if abs(e) <= threshold:
        return m + e * (m * (m + 1) / 2.0) + e * e * (m * (m * m - 1) / 6.0)
    return r * (1.0 - r ** m) / (1.0 - r)


# ---------------------------------------------------------------------------
# sign-pattern survival probabilities


def stochastic_survival(model: ContinuumModel, dt: float, n: int,
                        signs: SignSequence) -> float:
    """Survival after 2n segments for one realization of kick indicators.

    signs holds the per-step kick draws (entry j-1 applies after segment
    j; -1 kicks, +1 idles).  Internally the running products become the
    segment coefficients of the pairwise correlation sum; the |v|^4
    square of the depletion term is dropped, consistent with first
    order.  All-ones signs reduce exactly to free decay, all-kicks to
    the periodic closed form.
    """
    dt = _check_time("dt", dt, positive=True)
    n = _check_count("n", n)
    if not isinstance(signs, SignSequence):
        raise InvalidParameterError(f"signs must be a SignSequence, got {signs!r}")
    if len(signs) != 2 * n:
        raise InvalidParameterError(
            f"need exactly 2n={2 * n} signs, got {len(signs)}")
    curve = survival_curve_from_kicks(model, dt, signs, check=False)
    p = float(curve[-1])
    if p < 0.0:
        raise PerturbativeBreakdownError(
            f"stochastic survival is negative ({p!r}) at dt={dt!r}, n={n}", value=p)
    return p


def dd_survival(model: ContinuumModel, dt: float, n: int,
                lambdas: SignSequence) -> float:
    """Survival after 2n segments with explicit segment coefficients.

    lambdas are used directly (not accumulated), so arbitrary
    deterministic or random decoupling patterns are computable.  The
    alternating pattern reproduces kicked_survival; all-ones reproduces
    free decay.
    """
    dt = _check_time("dt", dt, positive=True)
    n = _check_count("n", n)
    if not isinstance(lambdas, SignSequence):
        raise InvalidParameterError(f"lambdas must be a SignSequence, got {lambdas!r}")
    if len(lambdas) != 2 * n:
        raise InvalidParameterError(
            f"need exactly 2n={2 * n} coefficients, got {len(lambdas)}")
    curve = survival_curve_from_coefficients(model, dt, lambdas, check=False)
    p = float(curve[-1])
    if p < 0.0:
        raise PerturbativeBreakdownError(
            f"decoupling survival is negative ({p!r}) at dt={dt!r}, n={n}", value=p)
    return p


def ensemble_mean_survival(model: ContinuumModel, dt: float, n_steps: int,
                           p_kick: float) -> float:
    """Exact mean of the per-realization survival over i.i.d. kick draws.

    With q = 1 - 2*p_kick the expected pair correlation at lag d is q^d,
    so E[P(m dt)] = 1 - m C_0 - 2 sum_{d=1}^{m-1} (m-d) q^d C_d.  At
    p = 1/2 every cross term vanishes and this is the averaged-survival
    line 1 - m*dt*gamma_avg; p = 0 and p = 1 recover free decay and the
    periodic closed form.
    """
    dt = _check_time("dt", dt, positive=True)
    n_steps = _check_count("n_steps", n_steps)
    p_kick = float(p_kick)
    if not 0.0 <= p_kick <= 1.0:
        raise InvalidParameterError(f"p_kick must lie in [0, 1], got {p_kick}")
    m = n_steps
    table = _cos_table(model, dt, m)
    q = 1.0 - 2.0 * p_kick
    total = m * table[0]
    if m > 1 and q != 0.0:
        d = np.arange(1, m, dtype=np.float64)
        total += 2.0 * float(np.sum((m - d) * np.power(q, d) * table[1:]))
    p = 1.0 - total
    if p < 0.0:
        raise PerturbativeBreakdownError(
            f"mean survival is negative ({p!r}) at dt={dt!r}, n_steps={m}", value=p)
    return p
