import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kickctl.errors import InvalidParameterError
from kickctl.model import (ContinuumModel, Mode, QuantumState, build_custom,
                           build_flat_band, golden_rule_rate, initial_state,
                           memory_kernel, model_from_json, model_to_json)

finite = st.floats(allow_nan=False, allow_infinity=False,
                   min_value=-1e6, max_value=1e6)


def test_mode_coerces_and_validates():
    m = Mode(1, 2)
    assert isinstance(m.omega_k, float) and isinstance(m.v_ks, complex)
    with pytest.raises(InvalidParameterError):
        Mode(float("nan"), 0.1)
    with pytest.raises(InvalidParameterError):
        Mode(1.0, complex(float("inf"), 0))


def test_model_sorts_modes_and_is_hashable():
    m = build_custom(0.0, [(2.0, 0.1), (-1.0, 0.2), (0.5, 0.3)])
    assert list(m.omegas) == [-1.0, 0.5, 2.0]
    # frozen value object: usable as a dict key / cache key
    assert {m: 1}[m] == 1
    same = build_custom(0.0, [(-1.0, 0.2), (0.5, 0.3), (2.0, 0.1)])
    assert m == same


def test_model_sort_is_stable_for_ties():
    m = build_custom(0.0, [(1.0, 0.1), (1.0, 0.2)])
    assert m.modes[0].v_ks == 0.1 + 0j
    assert m.modes[1].v_ks == 0.2 + 0j


def test_model_rejects_empty_and_nonmode():
    with pytest.raises(InvalidParameterError):
        ContinuumModel(0.0, ())
    with pytest.raises(InvalidParameterError):
        ContinuumModel(0.0, ("not a mode",))
    with pytest.raises(InvalidParameterError):
        build_custom(0.0, [])


def test_model_arrays_are_readonly(single_mode):
    for arr in (single_mode.omegas, single_mode.couplings,
                single_mode.weights, single_mode.detunings):
        with pytest.raises(ValueError):
            arr[0] = 0


def test_detunings_and_weights(two_mode):
    assert np.allclose(two_mode.detunings, two_mode.omegas - 0.3)
    assert np.allclose(two_mode.weights, np.abs(two_mode.couplings) ** 2)


def test_flat_band_geometry():
    band = build_flat_band(4, 8.0, 0.1, omega_s=2.0)
    # cell midpoints: 2 - 4 + (j + .5) * 2
    assert np.allclose(band.omegas, [-1.0, 1.0, 3.0, 5.0])
    assert np.allclose(band.weights, 0.01)
    assert math.isclose(float(band.omegas.mean()), 2.0)


def test_flat_band_validation():
    with pytest.raises(InvalidParameterError):
        build_flat_band(0, 1.0, 0.1)
    with pytest.raises(InvalidParameterError):
        build_flat_band(3, -1.0, 0.1)


def test_initial_state(single_mode):
    s = initial_state(single_mode)
    assert s.survival() == 1.0
    assert s.norm_sq() == 1.0
    assert s.time == 0.0
    assert len(s.beta) == 1


def test_state_validation():
    with pytest.raises(InvalidParameterError):
        QuantumState(float("nan"), ())
    with pytest.raises(InvalidParameterError):
        QuantumState(1.0, (complex(float("inf"), 0),))


def test_state_norm_and_survival():
    s = QuantumState(0.6, (0.8j,), 1.5)
    assert math.isclose(s.norm_sq(), 1.0)
    assert math.isclose(s.survival(), 0.36)


def test_memory_kernel_spot_values(single_mode):
    # K(0) = sum |v|^2 and K(pi) picks up e^{-i pi} for detuning 1
    assert memory_kernel(single_mode, 0.0) == pytest.approx(0.01 + 0j)
    assert memory_kernel(single_mode, math.pi) == pytest.approx(-0.01 + 0j, abs=1e-15)


@given(t=finite)
def test_memory_kernel_hermitian(t):
    model = build_custom(0.3, [(1.1, 0.02 + 0.01j), (-0.7, 0.015j)])
    assert memory_kernel(model, -t) == pytest.approx(
        memory_kernel(model, t).conjugate(), rel=1e-12, abs=1e-300)


def test_golden_rule_rate_flat_band(flat_band):
    # 2 pi |v|^2 / spacing with spacing = bandwidth / n_modes on the midpoint grid
    expected = 2 * math.pi * 4e-4 * 201 / 20
    assert golden_rule_rate(flat_band) == pytest.approx(expected, rel=1e-12)


def test_golden_rule_rate_single_mode(single_mode):
    assert golden_rule_rate(single_mode) == 0.0


def test_json_round_trip(two_mode):
    text = model_to_json(two_mode)
    payload = json.loads(text)
    assert set(payload) == {"omega_s", "modes"}
    assert model_from_json(text) == two_mode


@given(omega_s=finite,
       raw=st.lists(st.tuples(finite, finite, finite), min_size=1, max_size=5))
def test_json_round_trip_lossless(omega_s, raw):
    model = build_custom(omega_s, [(w, complex(re, im)) for w, re, im in raw])
    assert model_from_json(model_to_json(model)) == model


@pytest.mark.parametrize("text", [
    "not json", "[]", '{"omega_s": 0.0}',
    '{"omega_s": 0.0, "modes": [[1.0, 0.1]]}',
    '{"omega_s": 0.0, "modes": "nope"}',
])
def test_model_from_json_rejects_malformed(text):
    with pytest.raises(InvalidParameterError):
        model_from_json(text)
