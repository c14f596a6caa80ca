"""Coherence quantification in the fixed computational basis.

The l1 measure sums the moduli of all off-diagonal density matrix entries.
The classifiers below are tolerance-based so they stay robust as test
oracles under floating-point rounding; the measure itself is exact
arithmetic on the entries.
"""

from __future__ import annotations

import numpy as np

from .linalg import as_complex_matrix
from .states import DensityMatrix

DEFAULT_CLASSIFICATION_ATOL = 1e-9


def _matrix_of(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else as_complex_matrix(rho)


def l1_coherence(rho) -> float:
    """Sum of off-diagonal entry moduli; zero exactly for diagonal states."""
    m = _matrix_of(rho)
    a = np.abs(m)
    return float(a.sum() - np.trace(a))


def is_incoherent(rho, tol: float = DEFAULT_CLASSIFICATION_ATOL) -> bool:
    """True when every off-diagonal modulus stays below tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = _matrix_of(rho)
    off = np.abs(m - np.diag(np.diag(m)))
    return float(off.max(initial=0.0)) < tol


def is_incoherent_quantum(
    rho_ab, dim_a: int, dim_b: int, tol: float = DEFAULT_CLASSIFICATION_ATOL
) -> bool:
    """True when the joint state is block-diagonal in A's computational basis.

    Checks every off-diagonal A-block <i| rho |k> (i != k) against tol; these
    are exactly the states of the form sum_i q_i |i><i| (x) rho_i, which can
    never hand coherence to A through an operation on B.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = _matrix_of(rho_ab)
    side = dim_a * dim_b
    if m.shape != (side, side):
        raise ValueError(f"operator side {m.shape} does not match dim_a*dim_b = {side}")
    r4 = m.reshape(dim_a, dim_b, dim_a, dim_b)
    worst = 0.0
    for i in range(dim_a):
        for k in range(dim_a):
            if i == k:
                continue
            worst = max(worst, float(np.abs(r4[i, :, k, :]).max(initial=0.0)))
    return worst < tol
