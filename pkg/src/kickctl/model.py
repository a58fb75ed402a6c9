"""Bound state coupled to a discretized continuum.

Conventions used throughout the package: hbar = 1, so frequencies and
energies share units and time is their inverse.  A single bound level
|s> at frequency omega_s couples to a set of continuum modes |k> at
omega_k with complex amplitude v_ks = <k|H|s> (the reverse matrix
element is its conjugate).  Quantum states are stored as
interaction-picture amplitudes: the free phases e^{-i omega t} are
factored out, so a decoupled system has constant amplitudes.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidParameterError


def _require_finite(name, value):
    if isinstance(value, complex):
        ok = cmath.isfinite(value)
    else:
        ok = math.isfinite(value)
    if not ok:
        raise InvalidParameterError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class Mode:
    omega_k: float  # mode angular frequency (rad / time)
    v_ks: complex   # coupling <k|H|s>; <s|H|k> is conj(v_ks)

    def __post_init__(self):
        object.__setattr__(self, "omega_k", float(self.omega_k))
        object.__setattr__(self, "v_ks", complex(self.v_ks))
        _require_finite("omega_k", self.omega_k)
        _require_finite("v_ks", self.v_ks)


@dataclass(frozen=True)
class ContinuumModel:
    """One bound level plus an ordered, nonempty set of continuum modes.

    Modes are kept sorted by omega_k (stable for ties) so every
    downstream sum runs in a fixed, reproducible order.  Instances are
    immutable value objects and safe to share across workers.
    """

    omega_s: float        # bound-state angular frequency
    modes: tuple          # tuple of Mode, sorted by omega_k ascending

    def __post_init__(self):
        object.__setattr__(self, "omega_s", float(self.omega_s))
        _require_finite("omega_s", self.omega_s)
        modes = tuple(self.modes)
        if not modes:
            raise InvalidParameterError("a model needs at least one mode")
        for m in modes:
            if not isinstance(m, Mode):
                raise InvalidParameterError(f"expected Mode, got {type(m).__name__}")
        # sorted() is stable, so equal frequencies keep their input order
        object.__setattr__(self, "modes", tuple(sorted(modes, key=lambda m: m.omega_k)))

    @property
    def n_modes(self):
        return len(self.modes)

    @cached_property
    def omegas(self):
        """Mode frequencies as a read-only float array."""
        arr = np.array([m.omega_k for m in self.modes], dtype=np.float64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def couplings(self):
        """Couplings v_ks as a read-only complex array."""
        arr = np.array([m.v_ks for m in self.modes], dtype=np.complex128)
        arr.setflags(write=False)
        return arr

    @cached_property
    def weights(self):
        """|v_ks|^2 per mode."""
        arr = np.abs(self.couplings) ** 2
        arr.setflags(write=False)
        return arr

    @cached_property
    def detunings(self):
        """omega_k - omega_s per mode."""
        arr = self.omegas - self.omega_s
        arr.setflags(write=False)
        return arr


@dataclass(frozen=True)
class QuantumState:
    """Interaction-picture amplitudes at one instant.

    alpha_s is the bound-state amplitude, beta holds one continuum
    amplitude per mode, index-aligned with ContinuumModel.modes.  For a
    unitary history |alpha_s|^2 + sum |beta_k|^2 stays at its initial
    value (1 for a normalized start); the first-order stepper in the
    propagator module may overshoot that by O(|v|^4), so the norm is
    asserted at the exact-propagation boundary rather than here.
    """

    alpha_s: complex          # bound-state amplitude
    beta: tuple               # continuum amplitudes, one per mode
    time: float = 0.0         # timestamp the amplitudes refer to

    def __post_init__(self):
        object.__setattr__(self, "alpha_s", complex(self.alpha_s))
        object.__setattr__(self, "beta", tuple(complex(b) for b in self.beta))
        object.__setattr__(self, "time", float(self.time))
        _require_finite("alpha_s", self.alpha_s)
        for b in self.beta:
            _require_finite("beta entry", b)
        _require_finite("time", self.time)

    def beta_array(self):
        return np.array(self.beta, dtype=np.complex128)

    def norm_sq(self):
        """|alpha_s|^2 + sum_k |beta_k|^2."""
        a = abs(self.alpha_s) ** 2
        return a + sum(abs(b) ** 2 for b in self.beta)

    def survival(self):
        """P_s = |alpha_s|^2, the population left in the bound state."""
        return abs(self.alpha_s) ** 2


def initial_state(model: ContinuumModel, time: float = 0.0) -> QuantumState:
    """All population in the bound state, empty continuum."""
    return QuantumState(1.0 + 0.0j, (0.0 + 0.0j,) * model.n_modes, time)


def build_flat_band(n_modes: int, bandwidth: float, coupling: complex,
                    omega_s: float = 0.0) -> ContinuumModel:
    """Uniform grid of modes centered on omega_s with constant coupling.

    Mode j sits at omega_s - bandwidth/2 + (j + 1/2) * bandwidth / n_modes,
    i.e. at the midpoints of n_modes equal cells spanning the band.  This
    is the default desk discretization: constant mode density n/bandwidth
    and constant |v| make golden-rule behavior emerge while keeping every
    sum exact.
    """
    if not isinstance(n_modes, int) or n_modes < 1:
        raise InvalidParameterError(f"n_modes must be a positive integer, got {n_modes!r}")
    bandwidth = float(bandwidth)
    _require_finite("bandwidth", bandwidth)
    if bandwidth <= 0:
        raise InvalidParameterError(f"bandwidth must be positive, got {bandwidth}")
    coupling = complex(coupling)
    _require_finite("coupling", coupling)
    omega_s = float(omega_s)
    _require_finite("omega_s", omega_s)
    step = bandwidth / n_modes
    modes = tuple(Mode(omega_s - bandwidth / 2 + (j + 0.5) * step, coupling)
                  for j in range(n_modes))
    return ContinuumModel(omega_s, modes)


def build_custom(omega_s: float, modes) -> ContinuumModel:
    """Model from an explicit list of (frequency, coupling) pairs."""
    entries = list(modes)
    if not entries:
        raise InvalidParameterError("mode list must be nonempty")
    return ContinuumModel(float(omega_s), tuple(Mode(w, v) for w, v in entries))


def memory_kernel(model: ContinuumModel, t: float) -> complex:
    """Continuum correlation function K(t) = sum_k |v_ks|^2 e^{i(omega_s-omega_k)t}.

    This is the kernel that drives bound-state depletion; K(0) is the
    total coupling strength and K(-t) = conj(K(t)) by Hermiticity.
    """
    t = float(t)
    _require_finite("t", t)
    return complex(np.sum(model.weights * np.exp(-1j * model.detunings * t)))


def golden_rule_rate(model: ContinuumModel) -> float:
    """Golden-rule decay rate Gamma = 2*pi*|v(omega_s)|^2 * rho(omega_s).

    Diagnostic used to size weak-coupling regimes.  The local density of
    modes rho is estimated as 1/spacing from the model's frequency span;
    the coupling is taken from the mode nearest omega_s.  A single-mode
    model (no spacing to estimate) returns 0 by convention.
    """
    if model.n_modes < 2:
        return 0.0
    span = model.omegas[-1] - model.omegas[0]
    if span <= 0:
        return 0.0
    spacing = span / (model.n_modes - 1)
    nearest = int(np.argmin(np.abs(model.detunings)))
    return 2.0 * math.pi * float(model.weights[nearest]) / spacing


def model_to_json(model: ContinuumModel) -> str:
    """Serialize to {"omega_s": ..., "modes": [[omega_k, re_v, im_v], ...]}.

    repr-based float formatting keeps the round trip lossless at full
    double precision.
    """
    payload = {
        "omega_s": model.omega_s,
        "modes": [[m.omega_k, m.v_ks.real, m.v_ks.imag] for m in model.modes],
    }
    return json.dumps(payload, sort_keys=True)


def model_from_json(text: str) -> ContinuumModel:
    try:
        payload = json.loads(text)
        omega_s = payload["omega_s"]
        raw = payload["modes"]
        modes = tuple(Mode(w, complex(re, im)) for w, re, im in raw)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParameterError(f"malformed model JSON: {exc}") from exc
    return ContinuumModel(float(omega_s), modes)
