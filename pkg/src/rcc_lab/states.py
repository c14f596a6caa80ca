"""Bipartite pure and mixed quantum states.

Subsystem A's reference basis is the computational basis everywhere in this
package. Schmidt machinery inherits the deterministic ordering and phase
gauge of :mod:`rcc_lab.linalg`, so repeated decompositions of the same state
agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadTrace, NotHermitian, NotPositive
from .linalg import VALIDITY_ATOL, as_complex_matrix, partial_trace, svd

# Schmidt weights below this are treated as exact zeros and dropped, so the
# normalized B-side vectors never divide by a vanishing weight.
SCHMIDT_WEIGHT_CUTOFF = 1e-12


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator."""

    __slots__ = ("dim", "matrix")

    def __init__(self, matrix, *, validate: bool = True):
        m = as_complex_matrix(matrix)
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        if validate:
            herm = float(np.max(np.abs(m - m.conj().T)))
            if herm > VALIDITY_ATOL:
                raise NotHermitian(
                    f"max |m - m^dagger| = {herm:.3e} exceeds tolerance {VALIDITY_ATOL}"
                )
            tr = complex(np.trace(m))
            if abs(tr - 1.0) > VALIDITY_ATOL:
                raise BadTrace(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
            low = float(np.min(np.linalg.eigvalsh((m + m.conj().T) / 2)))
            if low < -VALIDITY_ATOL:
                raise NotPositive(f"minimum eigenvalue {low:.3e} is below -{VALIDITY_ATOL}")
            m = m / np.trace(m).real
        else:
            m = m.copy()
        m.setflags(write=False)
        self.dim = int(m.shape[0])
        self.matrix = m

    def __repr__(self) -> str:
        return f"DensityMatrix(dim={self.dim})"


def validate_density(m) -> DensityMatrix:
    """Check Hermiticity, positivity and trace, returning the typed state.

    The trace is renormalized exactly when within 1e-9 of one; anything
    worse raises BadTrace. The other violations raise NotHermitian or
    NotPositive with the measured deviation.
    """
    return DensityMatrix(m)


class BipartitePureState:
    """Pure state on H_A (x) H_B stored over the computational product basis.

    Amplitude index i * dim_b + j holds the coefficient of |i>|j>. Vectors
    within 1e-9 of unit norm are renormalized exactly; anything worse is
    rejected. The Schmidt form is computed lazily and cached.
    """

    __slots__ = ("dim_a", "dim_b", "amplitudes", "_schmidt", "_marginal_offdiag")

    def __init__(self, dim_a: int, dim_b: int, amplitudes):
        if dim_a < 1 or dim_b < 1:
            raise ValueError(f"dimensions must be positive, got ({dim_a}, {dim_b})")
        amp = np.asarray(amplitudes, dtype=np.complex128).reshape(-1).copy()
        if amp.size != dim_a * dim_b:
            raise ValueError(
                f"amplitudes must have dim_a*dim_b = {dim_a * dim_b} entries, got {amp.size}"
            )
        if not np.all(np.isfinite(amp)):
            raise ValueError("amplitudes contain non-finite entries")
        norm = float(np.linalg.norm(amp))
        if abs(norm - 1.0) > VALIDITY_ATOL:
            raise ValueError(f"amplitude norm {norm:.12g} deviates from 1 beyond {VALIDITY_ATOL}")
        amp /= norm
        amp.setflags(write=False)
        self.dim_a = int(dim_a)
        self.dim_b = int(dim_b)
        self.amplitudes = amp
        self._schmidt = None
        self._marginal_offdiag = None

    def marginal_offdiag(self) -> float:
        """Largest off-diagonal modulus of A's marginal (cached)."""
        if self._marginal_offdiag is None:
            w = self.coefficient_matrix
            marginal = w @ w.conj().T
            np.fill_diagonal(marginal, 0.0)
            self._marginal_offdiag = float(np.abs(marginal).max(initial=0.0))
        return self._marginal_offdiag

    @property
    def coefficient_matrix(self) -> np.ndarray:
        """Amplitudes reshaped to the dim_a x dim_b coefficient matrix."""
        return self.amplitudes.reshape(self.dim_a, self.dim_b)

    def density(self) -> DensityMatrix:
        """Rank-1 density matrix |psi><psi| on the joint system."""
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), validate=False)

    @classmethod
    def from_schmidt(cls, weights, basis_b) -> "BipartitePureState":
        """Build sum_i sqrt(w_i) |i>|beta_i> with the computational A-basis.

        weights are normalized to unit sum; basis_b supplies one orthonormal
        column per weight (extra columns are ignored).
        """
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.size < 1 or np.any(w < 0):
            raise ValueError("weights must be non-negative and non-empty")
        total = float(w.sum())
        if total <= 0:
            raise ValueError("weights must have positive sum")
        w = w / total
        basis = as_complex_matrix(basis_b)
        if basis.shape[1] < w.size:
            raise ValueError(f"need {w.size} basis columns, got {basis.shape[1]}")
        cols = basis[:, : w.size]
        gram_dev = float(np.max(np.abs(cols.conj().T @ cols - np.eye(w.size))))
        if gram_dev > VALIDITY_ATOL:
            raise ValueError(f"basis columns deviate from orthonormal by {gram_dev:.3e}")
        coeff = np.sqrt(w)[:, None] * cols.T
        return cls(w.size, basis.shape[0], coeff.reshape(-1))


@dataclass(frozen=True)
class SchmidtForm:
    """Schmidt data of a bipartite pure state.

    weights sum to one and come sorted descending; basis_a / basis_b hold the
    paired local vectors as columns, one per retained weight.
    """

    weights: np.ndarray
    basis_a: np.ndarray
    basis_b: np.ndarray
    rank: int


def schmidt_decompose(psi: BipartitePureState) -> SchmidtForm:
    """Schmidt decomposition with zero weights dropped.

    Weights are the squared singular values of the coefficient matrix;
    values below SCHMIDT_WEIGHT_CUTOFF are discarded. When A's marginal is
    diagonal the A-side vectors are computational basis vectors (up to the
    fixed gauge and descending-weight order); in general they are whatever
    the SVD returns and callers needing the diagonal-marginal premise must
    check it themselves. The result is cached on the state.
    """
    if psi._schmidt is None:
        u, s, v = svd(psi.coefficient_matrix)
        weights = s.astype(float) ** 2
        keep = weights > SCHMIDT_WEIGHT_CUTOFF
        w = weights[keep]
        basis_a = u[:, keep].copy()
        basis_b = v.conj()[:, keep].copy()
        for arr in (w, basis_a, basis_b):
            arr.setflags(write=False)
        psi._schmidt = SchmidtForm(w, basis_a, basis_b, int(keep.sum()))
    return psi._schmidt


def concurrence(psi: BipartitePureState) -> float:
    """Pure-state concurrence sqrt(2 (1 - tr(rho_A^2)))."""
    w = psi.coefficient_matrix
    rho_a = w @ w.conj().T
    purity = float(np.trace(rho_a @ rho_a).real)
    return float(np.sqrt(max(0.0, 2.0 * (1.0 - purity))))


def reduced_a(state, dim_a: int | None = None, dim_b: int | None = None) -> DensityMatrix:
    """Marginal state of subsystem A.

    Pure states carry their own dimensions; density-matrix input needs
    explicit (dim_a, dim_b).
    """
    if isinstance(state, BipartitePureState):
        w = state.coefficient_matrix
        return DensityMatrix(w @ w.conj().T, validate=False)
    raw = state.matrix if isinstance(state, DensityMatrix) else as_complex_matrix(state)
    if dim_a is None or dim_b is None:
        raise ValueError("dim_a and dim_b are required for density-matrix input")
    if raw.shape[0] != dim_a * dim_b:
        raise ValueError(f"operator side {raw.shape[0]} does not match dim_a*dim_b = {dim_a * dim_b}")
    marg = partial_trace(raw, dim_a, dim_b, "A")
    return DensityMatrix(marg, validate=not isinstance(state, DensityMatrix))


def state_to_json(psi: BipartitePureState) -> dict:
    """JSON-ready dict {"dim_a", "dim_b", "amplitudes"} with [re, im] pairs."""
    return {
        "dim_a": psi.dim_a,
        "dim_b": psi.dim_b,
        "amplitudes": [[float(z.real), float(z.imag)] for z in psi.amplitudes],
    }


def state_from_json(obj) -> BipartitePureState:
    """Inverse of state_to_json; ValueError messages name the offending field."""
    if not isinstance(obj, dict):
        raise ValueError("state value must be a JSON object")
    for key in ("dim_a", "dim_b", "amplitudes"):
        if key not in obj:
            raise ValueError(f"state object is missing field '{key}'")
    dim_a, dim_b = obj["dim_a"], obj["dim_b"]
    if not isinstance(dim_a, int) or dim_a < 1:
        raise ValueError(f"field 'dim_a' must be a positive integer, got {dim_a!r}")
    if not isinstance(dim_b, int) or dim_b < 1:
        raise ValueError(f"field 'dim_b' must be a positive integer, got {dim_b!r}")
    pairs = obj["amplitudes"]
    if not isinstance(pairs, list) or len(pairs) != dim_a * dim_b:
        raise ValueError(f"field 'amplitudes' must list dim_a*dim_b = {dim_a * dim_b} pairs")
    amp = np.empty(dim_a * dim_b, dtype=np.complex128)
    for k, pair in enumerate(pairs):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ValueError(f"amplitude {k} must be a [re, im] pair")
        re, im = pair
        if not isinstance(re, (int, float)) or not isinstance(im, (int, float)):
            raise ValueError(f"amplitude {k} must hold two numbers")
        amp[k] = complex(re, im)
    return BipartitePureState(dim_a, dim_b, amp)
