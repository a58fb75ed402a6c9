"""Instantaneous pulse operators and sequence generators.

Two idealized pulses act on the bound state: a 2*pi phase kick that
flips the sign of alpha_s while leaving every continuum amplitude
untouched, and a projective population measurement that keeps the
(unnormalized) surviving branch, i.e. zeroes the continuum amplitudes.
Sequences place one pulse slot every dt; the event at list index j fires
at time (j+1)*dt, immediately after the j-th free-evolution segment.

Sign sequences appear in two roles and both use values in {+1, -1}:

* per-step kick indicators xi_j (entry j-1 holds xi_j): -1 means "kick
  at the end of segment j", +1 means "do nothing".  The amplitude
  coefficient of segment j is then the running product xi_1*...*xi_j.
* direct segment coefficients lambda_j for deterministic decoupling
  schemes, where lambda_j = (-1)^j encodes a kick after every segment.

Stochastic draws are reproducible by construction: a counter-based
generator keyed by the seed makes any prefix of the draw stream stable
under changes of the requested count.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidParameterError
from .model import QuantumState


class PulseKind(Enum):
    PHASE_KICK = "K"
    PROJECTION = "P"
    IDENTITY = "I"


@dataclass(frozen=True)
class PulseSequence:
    dt: float        # interval between consecutive pulse slots
    events: tuple    # PulseKind per slot; slot j fires at (j+1)*dt
    label: str = ""  # free-form description for output metadata

    def __post_init__(self):
        object.__setattr__(self, "dt", float(self.dt))
        if not math.isfinite(self.dt) or self.dt <= 0:
            raise InvalidParameterError(f"dt must be positive and finite, got {self.dt}")
        events = tuple(self.events)
        for e in events:
            if not isinstance(e, PulseKind):
                raise InvalidParameterError(f"expected PulseKind, got {e!r}")
        object.__setattr__(self, "events", events)

    def __len__(self):
        return len(self.events)


@dataclass(frozen=True)
class SignSequence:
    signs: tuple  # entries are +1 or -1

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        for s in signs:
            if s not in (-1, 1):
                raise InvalidParameterError(f"signs must be +1 or -1, got {s}")
        object.__setattr__(self, "signs", signs)

    def __len__(self):
        return len(self.signs)

    def as_array(self):
        return np.array(self.signs, dtype=np.float64)


def apply_phase_kick(state: QuantumState) -> QuantumState:
    """2*pi pulse on the bound state: alpha_s -> -alpha_s, beta untouched.

    Exact involution; negation is lossless, so applying it twice gives
    back the original state bit for bit.
    """
    return QuantumState(-state.alpha_s, state.beta, state.time)


def apply_projection(state: QuantumState) -> QuantumState:
    """Ideal population measurement, keeping the surviving branch.

    alpha_s is kept as-is and all continuum amplitudes are dropped
    (unnormalized-branch convention: the retained amplitude directly
    encodes the accumulated survival probability, so repeated
    measurements multiply per-interval survival factors without any
    bookkeeping of normalization).
    """
    return QuantumState(state.alpha_s, (0.0 + 0.0j,) * len(state.beta), state.time)


def periodic_sequence(dt: float, count: int, kind: PulseKind) -> PulseSequence:
    """The same pulse at every slot: kind at t = dt, 2*dt, ..., count*dt."""
    if not isinstance(count, int) or count < 1:
        raise InvalidParameterError(f"count must be a positive integer, got {count!r}")
    if not isinstance(kind, PulseKind):
        raise InvalidParameterError(f"kind must be a PulseKind, got {kind!r}")
    return PulseSequence(dt, (kind,) * count, f"periodic-{kind.value}x{count}")


def _check_seed(seed):
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2 ** 64:
        raise InvalidParameterError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return seed


def stochastic_sequence(dt: float, count: int, p_kick: float, seed: int):
    """Random kick-or-identity sequence; returns (PulseSequence, SignSequence).

    Slot j is a phase kick (sign -1) with probability p_kick, identity
    (sign +1) otherwise.  Draws come from a Philox counter-based
    generator keyed by the seed: the j-th draw depends only on (seed, j),
    so prefixes are stable and realizations can be generated in any
    order or in parallel.
    """
    if not isinstance(count, int) or count < 1:
        raise InvalidParameterError(f"count must be a positive integer, got {count!r}")
    p_kick = float(p_kick)
    if not 0.0 <= p_kick <= 1.0:
        raise InvalidParameterError(f"p_kick must lie in [0, 1], got {p_kick}")
    _check_seed(seed)
    rng = np.random.Generator(np.random.Philox(key=seed))
    kicks = rng.random(count) < p_kick
    events = tuple(PulseKind.PHASE_KICK if k else PulseKind.IDENTITY for k in kicks)
    signs = SignSequence(tuple(-1 if k else 1 for k in kicks))
    seq = PulseSequence(dt, events, f"stochastic-p{p_kick}-seed{seed}")
    return seq, signs


def kick_sequence_from_signs(dt: float, signs: SignSequence, label: str = "") -> PulseSequence:
    """Pulse sequence realizing per-step kick indicators: kick where sign = -1."""
    events = tuple(PulseKind.PHASE_KICK if s == -1 else PulseKind.IDENTITY
                   for s in signs.signs)
    return PulseSequence(dt, events, label or "from-signs")


def dd_sign_sequence(count: int) -> SignSequence:
    """Alternating segment coefficients lambda_j = (-1)^j, j = 0..count-1.

    This is the decoupling pattern produced by kicking after every
    segment; consecutive entries always multiply to -1.
    """
    if not isinstance(count, int) or count < 1:
        raise InvalidParameterError(f"count must be a positive integer, got {count!r}")
    return SignSequence(tuple(1 if j % 2 == 0 else -1 for j in range(count)))


def sequence_to_json(seq: PulseSequence) -> str:
    """Serialize to {"dt": ..., "events": ["K"|"P"|"I", ...], "label": ...}."""
    payload = {"dt": seq.dt, "events": [e.value for e in seq.events], "label": seq.label}
    return json.dumps(payload, sort_keys=True)


def sequence_from_json(text: str) -> PulseSequence:
    try:
        payload = json.loads(text)
        events = tuple(PulseKind(v) for v in payload["events"])
        return PulseSequence(float(payload["dt"]), events, str(payload.get("label", "")))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParameterError(f"malformed sequence JSON: {exc}") from exc
