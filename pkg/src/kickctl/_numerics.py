"""Series-stabilized elementary kernels shared by the closed forms.

Each function keeps full relative accuracy through its removable 0/0
point by switching to a short Taylor series below a fixed cutoff; the
truncation error at the cutoff sits below double-precision roundoff.
"""
import numpy as np


def sinc(x):
    """sin(x)/x with a series branch at small argument."""
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    return np.where(small, 1.0 - x * x / 6.0, np.sin(safe) / safe)


def tanc(x):
    """tan(x)/x with a series branch at small argument.

    Callers guard the poles at x = pi/2 (mod pi) themselves.
    """
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    x2 = x * x
    return np.where(small, 1.0 + x2 / 3.0 + 2.0 * x2 * x2 / 15.0,
                    np.tan(safe) / safe)


def cos_moment_fg(x):
    """f = (1 - cos x)/x^2 and g = (x - sin x)/x^2, series-stabilized.

    f + i*g is the triangular kernel moment integral_0^1 (1-s) e^{i x s} ds;
    f carries the decay, g the level shift.  The subtraction in g loses
    three leading orders of x, so the series branch extends to |x| < 0.5
    with enough terms that truncation stays below roundoff there.
    """
    x = np.asarray(x, dtype=np.float64)
    small = np.abs(x) < 0.5
    safe = np.where(small, 1.0, x)
    x2 = x * x
    # alternating factorial series, Horner form; 7-8 terms keep the
    # truncation at the cutoff below 1e-16 relative
    f_series = 0.5 + x2 * (-1.0 / 24.0 + x2 * (1.0 / 720.0 + x2 * (
        -1.0 / 40320.0 + x2 * (1.0 / 3628800.0 + x2 * (
            -1.0 / 479001600.0 + x2 / 87178291200.0)))))
    g_series = x * (1.0 / 6.0 + x2 * (-1.0 / 120.0 + x2 * (
        1.0 / 5040.0 + x2 * (-1.0 / 362880.0 + x2 * (
            1.0 / 39916800.0 + x2 * (-1.0 / 6227020800.0
                                     + x2 / 1307674368000.0))))))
    f_direct = 2.0 * np.sin(0.5 * safe) ** 2 / (safe * safe)
    g_direct = (safe - np.sin(safe)) / (safe * safe)
    return np.where(small, f_series, f_direct), np.where(small, g_series, g_direct)
