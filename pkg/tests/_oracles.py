"""Independent reference implementations used only by the tests.

Everything here recomputes package quantities through a different route
(antiderivatives instead of sinc tables, Pade expm instead of eigh,
literal double loops instead of incremental pair sums) so agreement is
evidence, not tautology.
"""
import math

import numpy as np
import scipy.linalg

from kickctl.model import ContinuumModel, QuantumState


def slice_integral(delta, t0, t1):
    """integral of e^{i delta t} dt over [t0, t1] via the antiderivative."""
    if delta == 0.0:
        return complex(t1 - t0)
    return (np.exp(1j * delta * t1) - np.exp(1j * delta * t0)) / (1j * delta)


def survival_direct(model, dt, lambdas):
    """First-order survival curve from explicit mode amplitudes.

    beta_k after j segments is -i v_k sum_{l<j} lambda_l * (slice l
    integral); P(j dt) = 1 - sum_k |beta_k|^2.  O(m^2 n_modes) and slow,
    which is fine for an oracle.
    """
    lam = np.asarray(lambdas, dtype=float)
    m = lam.size
    out = np.empty(m + 1)
    out[0] = 1.0
    beta = np.zeros(model.n_modes, dtype=complex)
    for j in range(m):
        for k in range(model.n_modes):
            delta = model.omegas[k] - model.omega_s
            beta[k] += (-1j * model.couplings[k] * lam[j]
                        * slice_integral(delta, j * dt, (j + 1) * dt))
        out[j + 1] = 1.0 - float(np.sum(np.abs(beta) ** 2))
    return out


def pairwise_direct(cos_table, lam):
    """Literal evaluation of P(j) = 1 - j*C0 - 2 sum_d A_d(j) C_d."""
    m = lam.size
    out = np.empty(m + 1)
    out[0] = 1.0
    for j in range(1, m + 1):
        total = j * cos_table[0]
        for d in range(1, j):
            a_d = sum(lam[l] * lam[l - d] for l in range(d, j))
            total += 2.0 * a_d * cos_table[d]
        out[j] = 1.0 - total
    return out


def hamiltonian(model):
    """Dense Hamiltonian, bound state first, modes in stored order."""
    n = model.n_modes
    h = np.zeros((n + 1, n + 1), dtype=complex)
    h[0, 0] = model.omega_s
    h[1:, 0] = model.couplings
    h[0, 1:] = np.conj(model.couplings)
    h[np.arange(1, n + 1), np.arange(1, n + 1)] = model.omegas
    return h


def expm_evolve(model, state, duration):
    """Evolve a state with scipy's Pade expm instead of eigh."""
    h = hamiltonian(model)
    t0 = state.time
    c = np.empty(model.n_modes + 1, dtype=complex)
    c[0] = state.alpha_s * np.exp(-1j * model.omega_s * t0)
    c[1:] = state.beta_array() * np.exp(-1j * model.omegas * t0)
    c = scipy.linalg.expm(-1j * h * duration) @ c
    t1 = t0 + duration
    alpha = complex(c[0] * np.exp(1j * model.omega_s * t1))
    beta = c[1:] * np.exp(1j * model.omegas * t1)
    return QuantumState(alpha, tuple(beta.tolist()), t1)


def rabi_survival(delta, v_abs, t):
    """Two-level closed form: P = 1 - (V^2/W^2) sin^2(W t), W^2 = (d/2)^2 + V^2."""
    w = math.sqrt((delta / 2.0) ** 2 + v_abs ** 2)
    return 1.0 - (v_abs ** 2 / w ** 2) * math.sin(w * t) ** 2


def random_offresonant_model(rng, max_modes=6, margin=1e-2):
    """Random weak model plus a dt keeping every theta away from pi (mod 2pi)."""
    from kickctl.model import build_custom
    n_modes = int(rng.integers(1, max_modes + 1))
    while True:
        omega_s = float(rng.uniform(-1.0, 1.0))
        omegas = rng.uniform(-4.0, 4.0, n_modes)
        mags = rng.uniform(0.002, 0.03, n_modes)
        phases = rng.uniform(0.0, 2.0 * math.pi, n_modes)
        dt = float(rng.uniform(0.05, 2.5))
        theta = (omegas - omega_s) * dt
        if np.min(np.abs(np.mod(theta, 2 * math.pi) - math.pi)) > margin:
            couplings = mags * np.exp(1j * phases)
            return build_custom(omega_s, list(zip(omegas.tolist(),
                                                  couplings.tolist()))), dt
