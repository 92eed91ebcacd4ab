"""Pure-Python Crank-Nicolson stepping backend (scipy banded solves)."""

import numpy as np
from scipy.linalg import solve_banded

BACKEND_NAME = "python"


def run(psi, x, m_half, f_half, dt, dx):
    """March psi in place through len(m_half) Crank-Nicolson steps.

    (1 + i dt/2 H) psi_new = (1 - i dt/2 H) psi, H evaluated at the half
    step (m_half[k], f_half[k]); Dirichlet zero boundaries.
    """
    n = psi.shape[0]
    xi = x[1:-1]
    ab = np.empty((3, n - 2), dtype=np.complex128)
    psi[0] = 0.0
    psi[-1] = 0.0
    for k in range(m_half.shape[0]):
        inv = 1.0 / (2.0 * m_half[k] * dx * dx)
        hdiag = 2.0 * inv + 1j * f_half[k] * xi
        a_off = 0.5j * dt * (-inv)
        ab[0, 1:] = a_off
        ab[2, :-1] = a_off
        ab[1] = 1.0 + 0.5j * dt * hdiag
        rhs = (1.0 - 0.5j * dt * hdiag) * psi[1:-1] - a_off * (psi[:-2] + psi[2:])
        psi[1:-1] = solve_banded((1, 1), ab, rhs)
