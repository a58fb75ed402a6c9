"""Exception types shared across the package."""


class KickctlError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(KickctlError, ValueError):
    """An argument is outside its documented domain (non-finite, wrong sign, ...)."""


class AlignmentError(KickctlError, ValueError):
    """A state's continuum amplitudes do not line up with the model's mode list."""


class ResonanceError(KickctlError):
    """A closed form was requested at (or too close to) a tan singularity.

    The first-order kicked formulas contain tan((omega_s - omega_k)*dt/2)
    factors that diverge when the detuning-interval product hits pi
    (mod 2*pi).  There is no finite limit to fall back on; the divergence
    is physical within the perturbative treatment, so it is reported
    rather than masked.
    """

    def __init__(self, message, *, mode_index=None, omega_k=None, dt=None,
                 resonant_dt=None):
        super().__init__(message)
        self.mode_index = mode_index
        self.omega_k = omega_k
        self.dt = dt
        self.resonant_dt = resonant_dt


class PerturbativeBreakdownError(KickctlError):
    """A first-order survival formula produced a negative value.

    Carries the raw value so callers (and tests) can inspect how far the
    expansion overshot.  Ensemble runs attach the realization index and
    seed needed to reproduce the offending draw.
    """

    def __init__(self, message, *, value=None, realization=None, seed=None):
        super().__init__(message)
        self.value = value
        self.realization = realization
        self.seed = seed
