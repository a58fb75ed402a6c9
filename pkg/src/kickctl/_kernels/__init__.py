"""Hot-loop survival kernels with a compiled fast path.

The compiled Cython extension is preferred; a pure-numpy implementation
with the identical contract is selected automatically when the
extension was not built (e.g. KICKCTL_NO_EXT installs).  BACKEND names
which one is active.  Both backends are importable individually for
benchmarking and parity tests.
"""
import numpy as np

from . import _pykernels

try:
    from . import _ckernels
    _impl = _ckernels
    BACKEND = "cython"
except ImportError:  # extension not built; fall back to numpy
    _ckernels = None
    _impl = _pykernels
    BACKEND = "numpy"


def sign_survival_curves(cos_table, lambdas):
    """Survival curves from segment-coefficient rows; see _pykernels docs.

    cos_table: float array of length m (C_0..C_{m-1}).
    lambdas:   (n_realizations, m) array of +-1 segment coefficients.
    Returns an (n_realizations, m+1) array of P values at steps 0..m.
    """
    cos_table = np.ascontiguousarray(cos_table, dtype=np.float64)
    lambdas = np.ascontiguousarray(lambdas, dtype=np.float64)
    if lambdas.ndim != 2:
        raise ValueError(f"lambdas must be 2-D, got shape {lambdas.shape}")
    if cos_table.ndim != 1 or cos_table.shape[0] != lambdas.shape[1]:
        raise ValueError(
            f"cos_table length {cos_table.shape} does not match "
            f"lambdas shape {lambdas.shape}")
    return _impl.sign_survival_curves(cos_table, lambdas)
