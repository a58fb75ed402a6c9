"""Closed-form evaluators: hand values, cross-route identities, oracles."""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kickctl import analytic
from kickctl.analytic import (DEFAULT_GUARD, GuardBehavior, ResonanceGuard,
                              ZenoForm, averaged_survival, avg_decay_rate,
                              beta_periodic, beta_stochastic,
                              cumulative_coefficients, dd_survival,
                              ensemble_mean_survival, geometric_sum,
                              kicked_amplitude, kicked_survival, kicked_terms,
                              spontaneous_survival, stochastic_survival,
                              survival_curve_from_coefficients,
                              survival_curve_from_kicks,
                              survival_curves_from_kick_matrix,
                              zeno_decay_rate, zeno_survival)
from kickctl.errors import (InvalidParameterError,
                            PerturbativeBreakdownError, ResonanceError)
from kickctl.model import build_custom
from kickctl.pulses import SignSequence, dd_sign_sequence

from _oracles import random_offresonant_model, survival_direct


# ---------------------------------------------------------------------------
# hand-evaluated spot values on the single-mode workhorse


def test_spontaneous_hand_value(single_mode):
    # 1 - 0.01 * pi^2 * sinc^2(pi/2) = 1 - 0.04 exactly
    assert spontaneous_survival(single_mode, math.pi) == pytest.approx(0.96, abs=1e-12)


def test_spontaneous_at_zero(single_mode):
    assert spontaneous_survival(single_mode, 0.0) == 1.0


def test_avg_rate_hand_value(single_mode):
    assert avg_decay_rate(single_mode, math.pi) == pytest.approx(0.04 / math.pi,
                                                                 abs=1e-14)


def test_zeno_rate_hand_value(single_mode):
    assert zeno_decay_rate(single_mode, math.pi) == pytest.approx(0.04 / math.pi,
                                                                  abs=1e-14)


def test_averaged_hand_value(single_mode):
    assert averaged_survival(single_mode, math.pi, 1) == pytest.approx(0.92,
                                                                       abs=1e-12)


def test_zeno_hand_values(single_mode):
    lin = zeno_survival(single_mode, math.pi, 1, ZenoForm.LINEARIZED)
    prod = zeno_survival(single_mode, math.pi, 1, ZenoForm.PRODUCT)
    assert lin == pytest.approx(0.92, abs=1e-12)
    assert prod == pytest.approx(0.9216, abs=1e-12)


def test_kicked_hand_value(single_mode):
    # theta = pi/2: tanc(pi/4) = 4/pi, so the loss is exactly 0.04
    assert kicked_survival(single_mode, math.pi / 2, 1) == pytest.approx(0.96,
                                                                         abs=1e-12)


def test_term_b_hand_value(single_mode):
    terms = kicked_terms(single_mode, math.pi / 2, 1)
    assert terms.term_b == pytest.approx(0.04, abs=1e-12)


def test_geometric_sum_values():
    assert geometric_sum(1.0, 5) == 5
    assert geometric_sum(0.5, 3) == pytest.approx(0.875, abs=1e-15)
    r = 0.3 + 0.4j
    direct = sum(r ** j for j in range(1, 8))
    assert geometric_sum(r, 7) == pytest.approx(direct, rel=1e-14)


def test_geometric_sum_series_branch_is_continuous():
    for eps in (1e-9, 1e-8, -1e-9):
        r = 1.0 + eps
        direct = sum(r ** j for j in range(1, 13))
        assert geometric_sum(r, 12) == pytest.approx(direct, rel=1e-12)


# ---------------------------------------------------------------------------
# dt -> 0 and small-argument behavior


def test_avg_rate_small_dt_is_linear(single_mode):
    dt = 1e-6
    assert avg_decay_rate(single_mode, dt) == pytest.approx(dt * 0.01, rel=1e-9)


def test_kicked_survival_approaches_one_as_dt_shrinks(flat_band):
    # fixed total time, shrinking dt: the kick freeze-out
    t = 0.5
    losses = []
    for halvings in range(1, 7):
        steps = 2 ** halvings
        dt = t / steps
        losses.append(1.0 - kicked_survival(flat_band, dt, steps // 2))
    assert all(a > b for a, b in zip(losses, losses[1:]))
    assert losses[-1] < losses[0]


# ---------------------------------------------------------------------------
# cross-route identities


@pytest.mark.parametrize("case", range(25))
def test_terms_cancel_and_compose(case):
    rng = np.random.default_rng(1000 + case)
    model, dt = random_offresonant_model(rng)
    n = int(rng.integers(1, 30))
    terms = kicked_terms(model, dt, n)
    assert abs(terms.term_a + terms.term_c) <= 1e-12 * max(abs(terms.term_a), 1e-300)
    # with a + c = 0 the survival is carried entirely by the b term
    assert kicked_survival(model, dt, n) == pytest.approx(1.0 - terms.term_b,
                                                          abs=1e-12)


@pytest.mark.parametrize("case", range(10))
def test_amplitude_consistent_with_survival(case):
    rng = np.random.default_rng(2000 + case)
    model, dt = random_offresonant_model(rng)
    n = int(rng.integers(1, 20))
    amp = kicked_amplitude(model, dt, n)
    # first-order survival keeps only the linear part of |amp|^2
    p = kicked_survival(model, dt, n)
    assert 2.0 * amp.real - 1.0 == pytest.approx(p, abs=1e-12)
    # and |amp|^2 exceeds it by exactly the dropped quadratic |amp - 1|^2
    assert abs(amp) ** 2 - p == pytest.approx(abs(amp - 1.0) ** 2, abs=1e-13)


def test_zeno_rate_equals_avg_rate_random():
    rng = np.random.default_rng(42)
    for _ in range(50):
        model, dt = random_offresonant_model(rng)
        g1 = avg_decay_rate(model, dt)
        g2 = zeno_decay_rate(model, dt)
        assert abs(g2 - g1) <= 1e-14 * max(abs(g1), 1e-300)


def test_all_ones_signs_reduce_to_free_decay(two_mode):
    n = 7
    signs = SignSequence((1,) * (2 * n))
    p = stochastic_survival(two_mode, 0.4, n, signs)
    assert p == pytest.approx(spontaneous_survival(two_mode, 2 * n * 0.4),
                              abs=1e-12)


def test_all_kicks_reduce_to_periodic(two_mode):
    n = 6
    signs = SignSequence((-1,) * (2 * n))
    p = stochastic_survival(two_mode, 0.7, n, signs)
    assert p == pytest.approx(kicked_survival(two_mode, 0.7, n), abs=1e-12)


def test_dd_alternating_equals_kicked(two_mode):
    n = 9
    lam = dd_sign_sequence(2 * n)
    assert dd_survival(two_mode, 0.55, n, lam) == pytest.approx(
        kicked_survival(two_mode, 0.55, n), abs=1e-12)


def test_dd_all_ones_equals_free_decay(two_mode):
    n = 5
    lam = SignSequence((1,) * (2 * n))
    assert dd_survival(two_mode, 0.3, n, lam) == pytest.approx(
        spontaneous_survival(two_mode, 2 * n * 0.3), abs=1e-12)


# ---------------------------------------------------------------------------
# curves against the antiderivative oracle


@pytest.mark.parametrize("case", range(8))
def test_sign_curves_match_amplitude_oracle(case):
    rng = np.random.default_rng(3000 + case)
    model, dt = random_offresonant_model(rng, max_modes=4)
    m = int(rng.integers(1, 25))
    lam = rng.choice([-1.0, 1.0], size=m)
    got = survival_curve_from_coefficients(model, dt, lam, check=False)
    expected = survival_direct(model, dt, lam)
    np.testing.assert_allclose(got, expected, rtol=0, atol=1e-12)


def test_curve_from_kicks_accumulates_signs(two_mode):
    signs = SignSequence((1, -1, 1, 1, -1, -1))
    lam = cumulative_coefficients(signs)
    np.testing.assert_array_equal(lam, [1, 1, -1, -1, -1, 1])
    a = survival_curve_from_kicks(two_mode, 0.3, signs)
    b = survival_curve_from_coefficients(two_mode, 0.3, lam)
    np.testing.assert_array_equal(a, b)


def test_kick_matrix_batch_matches_single_rows(two_mode, rng):
    signs = rng.choice([-1.0, 1.0], size=(5, 12))
    batch = survival_curves_from_kick_matrix(two_mode, 0.45, signs)
    for r in range(5):
        row = survival_curve_from_kicks(two_mode, 0.45, signs[r], check=False)
        np.testing.assert_allclose(batch[r], row, rtol=0, atol=1e-14)


def test_final_curve_point_matches_closed_form(single_mode):
    n = 4
    lam = dd_sign_sequence(2 * n).as_array()
    curve = survival_curve_from_coefficients(single_mode, 0.6, lam)
    assert curve[-1] == pytest.approx(kicked_survival(single_mode, 0.6, n),
                                      abs=1e-13)
    assert curve.shape == (2 * n + 1,)
    assert curve[0] == 1.0


# ---------------------------------------------------------------------------
# continuum amplitudes


@pytest.mark.parametrize("j", [1, 2, 3, 8])
def test_beta_periodic_matches_stochastic_all_kicks(two_mode, j):
    signs = SignSequence((-1,) * max(1, j - 1))
    for k in range(two_mode.n_modes):
        resummed = beta_periodic(two_mode, k, 0.8, j)
        summed = beta_stochastic(two_mode, k, 0.8, j, signs)
        assert resummed == pytest.approx(summed, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("case", range(6))
def test_beta_stochastic_matches_slice_oracle(case):
    from _oracles import slice_integral
    rng = np.random.default_rng(4000 + case)
    model, dt = random_offresonant_model(rng, max_modes=3)
    l = int(rng.integers(1, 12))
    steps = rng.choice([-1, 1], size=max(0, l - 1))
    signs = SignSequence(tuple(int(s) for s in steps)) if l > 1 \
        else SignSequence((1,))
    coeff = np.concatenate([[1.0], np.cumprod(steps)])[:l]
    for k in range(model.n_modes):
        delta = float(model.detunings[k])
        brute = sum(-1j * complex(model.couplings[k]) * coeff[m]
                    * slice_integral(delta, m * dt, (m + 1) * dt)
                    for m in range(l))
        got = beta_stochastic(model, k, dt, l, signs)
        assert got == pytest.approx(brute, rel=1e-12, abs=1e-300)


def test_beta_population_adds_up_to_survival(two_mode):
    # 1 - sum_k |beta_k|^2 from the resummed betas equals the kicked curve
    dt, j = 0.8, 6
    loss = sum(abs(beta_periodic(two_mode, k, dt, j)) ** 2
               for k in range(two_mode.n_modes))
    assert 1.0 - loss == pytest.approx(
        kicked_survival(two_mode, dt, j // 2), abs=1e-13)


def test_beta_needs_enough_signs(two_mode):
    with pytest.raises(InvalidParameterError):
        beta_stochastic(two_mode, 0, 0.5, 5, SignSequence((1, -1)))


# ---------------------------------------------------------------------------
# ensemble mean closed form


def test_ensemble_mean_at_half_is_averaged_line(two_mode):
    got = ensemble_mean_survival(two_mode, 0.4, 12, 0.5)
    assert got == pytest.approx(averaged_survival(two_mode, 0.4, 6), abs=1e-13)


def test_ensemble_mean_p0_is_free_decay(two_mode):
    got = ensemble_mean_survival(two_mode, 0.4, 10, 0.0)
    assert got == pytest.approx(spontaneous_survival(two_mode, 4.0), abs=1e-12)


def test_ensemble_mean_p1_is_periodic(two_mode):
    got = ensemble_mean_survival(two_mode, 0.4, 10, 1.0)
    assert got == pytest.approx(kicked_survival(two_mode, 0.4, 5), abs=1e-12)


@pytest.mark.parametrize("p_kick", [0.2, 0.5, 0.8])
def test_ensemble_mean_is_brute_force_expectation(two_mode, p_kick):
    # small enough step count to enumerate every sign pattern exactly
    m, dt = 6, 0.5
    total = 0.0
    for bits in range(2 ** m):
        signs = [(-1 if bits >> j & 1 else 1) for j in range(m)]
        prob = math.prod(p_kick if s == -1 else 1 - p_kick for s in signs)
        curve = survival_curve_from_kicks(two_mode, dt, np.array(signs, float),
                                          check=False)
        total += prob * curve[-1]
    got = ensemble_mean_survival(two_mode, dt, m, p_kick)
    assert got == pytest.approx(total, abs=1e-13)


# ---------------------------------------------------------------------------
# guards and errors


def test_resonance_raises_with_diagnostics(single_mode):
    with pytest.raises(ResonanceError) as err:
        kicked_survival(single_mode, math.pi, 3)
    assert err.value.mode_index == 0
    assert err.value.omega_k == 1.0
    assert err.value.resonant_dt == pytest.approx(math.pi)
    assert "pi" in str(err.value)


def test_resonance_odd_multiples_raise(single_mode):
    with pytest.raises(ResonanceError):
        kicked_survival(single_mode, 3 * math.pi, 2)
    # even multiple of pi is a zero of tan, not a pole
    assert kicked_survival(single_mode, 2 * math.pi, 2) == pytest.approx(1.0)


def test_wider_guard_threshold_rejects_more(single_mode):
    dt = math.pi - 0.05
    assert kicked_survival(single_mode, dt, 1) < 1.0
    wide = ResonanceGuard(threshold=0.1)
    with pytest.raises(ResonanceError):
        kicked_survival(single_mode, dt, 1, guard=wide)


def test_guard_validation():
    with pytest.raises(InvalidParameterError):
        ResonanceGuard(threshold=0.0)
    with pytest.raises(InvalidParameterError):
        ResonanceGuard(threshold=1e-8, behavior="limit")
    assert ResonanceGuard(1e-6, GuardBehavior.LIMIT).behavior is GuardBehavior.LIMIT
    assert DEFAULT_GUARD.threshold == 1e-8


def test_breakdown_on_absurd_coupling():
    strong = build_custom(0.0, [(0.1, 2.0)])
    with pytest.raises(PerturbativeBreakdownError) as err:
        spontaneous_survival(strong, 10.0)
    assert err.value.value < 0


def test_breakdown_in_curve_names_step():
    strong = build_custom(0.0, [(0.1, 0.5)])
    with pytest.raises(PerturbativeBreakdownError):
        survival_curve_from_coefficients(strong, 1.0, np.ones(40))


@pytest.mark.parametrize("bad_call", [
    lambda m: spontaneous_survival(m, -1.0),
    lambda m: avg_decay_rate(m, 0.0),
    lambda m: kicked_survival(m, 0.5, 0),
    lambda m: kicked_survival(m, 0.5, 2.5),
    lambda m: stochastic_survival(m, 0.5, 2, SignSequence((1, 1))),
    lambda m: dd_survival(m, 0.5, 1, SignSequence((1, 1, 1))),
    lambda m: ensemble_mean_survival(m, 0.5, 4, 1.5),
    lambda m: zeno_survival(m, 0.5, 1, form="linearized"),
])
def test_input_validation(single_mode, bad_call):
    with pytest.raises(InvalidParameterError):
        bad_call(single_mode)


# ---------------------------------------------------------------------------
# property-based checks


@given(st.integers(min_value=1, max_value=40),
       st.floats(min_value=0.05, max_value=2.0,
                 allow_nan=False, allow_infinity=False))
@settings(max_examples=40, deadline=None)
def test_curves_never_exceed_one(m, dt):
    model = build_custom(0.0, [(1.3, 0.02), (-0.4, 0.01j)])
    rng = np.random.default_rng(m * 1000 + int(dt * 100))
    lam = rng.choice([-1.0, 1.0], size=m)
    curve = survival_curve_from_coefficients(model, dt, lam, check=False)
    # first-order loss is a sum of |amplitude|^2 terms, so P <= 1 always
    assert np.all(curve <= 1.0 + 1e-12)


@given(st.floats(min_value=-0.49, max_value=0.49,
                 allow_nan=False, allow_infinity=False),
       st.integers(min_value=1, max_value=30))
@settings(max_examples=60, deadline=None)
def test_geometric_sum_matches_horner(x, m):
    r = 1.0 + x
    direct = complex(sum(r ** j for j in range(1, m + 1)))
    assert geometric_sum(r, m) == pytest.approx(direct, rel=1e-10, abs=1e-12)
