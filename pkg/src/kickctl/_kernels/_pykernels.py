"""Pure-numpy survival kernels; fallback when the extension is absent.

Same contract as the compiled module: given the cosine-weighted mode
table C_d = sum_k w_k cos(d * (omega_k - omega_s) * dt) for d = 0..m-1
and one row of segment coefficients lambda_0..lambda_{m-1} per
realization, produce survival curves

    P[r, j] = 1 - j*C_0 - 2 * sum_{d=1}^{j-1} A_d C_d,
    A_d = sum_{l=d}^{j-1} lambda[r, l] * lambda[r, l-d],

for j = 0..m.  The pair sums are built incrementally: extending a curve
by one segment only adds the correlations of the new coefficient with
every earlier one.
"""
import numpy as np


def sign_survival_curves(cos_table, lambdas):
    n_r, m = lambdas.shape
    out = np.empty((n_r, m + 1), dtype=np.float64)
    out[:, 0] = 1.0
    running = np.zeros(n_r, dtype=np.float64)
    c0 = cos_table[0]
    for j in range(1, m + 1):
        last = j - 1
        if last >= 1:
            # correlations of lambda_{j-1} with lambda_{j-1-d}, d = 1..j-1
            acc = lambdas[:, last - 1::-1] @ cos_table[1:last + 1]
            running += lambdas[:, last] * acc
        out[:, j] = 1.0 - j * c0 - 2.0 * running
    return out
