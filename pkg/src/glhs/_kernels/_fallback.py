"""Pure NumPy implementations of the hot kernels.

Must stay bit-identical to the compiled versions in _legendre.pyx: the
recurrence, the normalization step, and the accumulation order are all
fixed, and test_kernels.py compares the two element for element.
"""
import numpy as np


def legendre_table(x, nmax):
    """Orthonormal Legendre values phi_0..phi_nmax at x, shape (len(x), nmax+1).

    phi_k = sqrt(2k+1) * P_k with P_k from the three-term recurrence,
    normalized so that the L2([-1,1], dx/2) norm of each phi_k is 1.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty((x.shape[0], nmax + 1))
    out[:, 0] = 1.0
    if nmax >= 1:
        out[:, 1] = x
    for k in range(1, nmax):
        out[:, k + 1] = ((2 * k + 1) * x * out[:, k] - k * out[:, k - 1]) / (k + 1)
    out *= np.sqrt(2.0 * np.arange(nmax + 1) + 1.0)
    return out


def pce_eval(points, indices, coef):
    """Evaluate sum_j coef[j] * prod_k phi_{indices[j,k]}(points[:,k]).

    points: (m, d) float64, indices: (N, d) int64, coef: (N,) float64.
    Avoids materializing the (m, N) basis matrix.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    m, d = points.shape
    nmax = int(indices.max()) if indices.size else 0
    tables = [legendre_table(points[:, k], nmax) for k in range(d)]
    acc = np.zeros(m)
    for j in range(indices.shape[0]):
        term = np.full(m, coef[j])
        for k in range(d):
            deg = indices[j, k]
            if deg > 0:
                term *= tables[k][:, deg]
        acc += term
    return acc
