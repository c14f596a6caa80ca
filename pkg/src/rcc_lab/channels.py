"""Kraus operations on subsystem B and the coherence-creation criterion.

An operation $(rho) = sum_n F_n rho F_n^dagger is summarized, for everything
this package computes about subsystem A, by the single Hermitian operator
N = sum_n F_n^dagger F_n. Operations may be sub-normalized (post-selected
branches); a ChannelEnsemble groups such branches into a whole that is trace
preserving.
"""

from __future__ import annotations

import numpy as np

from .coherence import is_incoherent, l1_coherence
from .errors import NotTracePreserving, PremiseViolated
from .linalg import (
    VALIDITY_ATOL,
    as_complex_matrix,
    complete_orthonormal_basis,
    hermitian_eig,
)
from .states import BipartitePureState, reduced_a, schmidt_decompose

_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


class KrausOperation:
    """Quantum operation on B given by a list of Kraus operators.

    Validity only requires 0 <= N <= I for the summary operator
    N = sum_n F_n^dagger F_n, so trace-decreasing (post-selected) operations
    are first-class values here.
    """

    __slots__ = ("dim_b", "kraus", "label", "_n", "_branch_stack", "_identity_dev")

    def __init__(self, kraus, label: str = ""):
        mats = tuple(as_complex_matrix(f).copy() for f in kraus)
        if not mats:
            raise ValueError("at least one Kraus operator is required")
        d = mats[0].shape[0]
        for f in mats:
            if f.shape != (d, d):
                raise ValueError(
                    f"Kraus operators must all be {d}x{d}, got shape {f.shape}"
                )
        n = np.zeros((d, d), dtype=np.complex128)
        for f in mats:
            n += f.conj().T @ f
        n = (n + n.conj().T) / 2
        evals = np.linalg.eigvalsh(n)
        if float(evals.min()) < -VALIDITY_ATOL or float(evals.max()) > 1.0 + VALIDITY_ATOL:
            raise ValueError(
                "summary operator must satisfy 0 <= N <= I; "
                f"spectrum spans [{evals.min():.3e}, {evals.max():.6f}]"
            )
        for f in mats:
            f.setflags(write=False)
        n.setflags(write=False)
        self.dim_b = int(d)
        self.kraus = mats
        self.label = label
        self._n = n
        self._branch_stack = None
        self._identity_dev = None

    def n_operator(self) -> np.ndarray:
        """Summary operator N = sum_n F_n^dagger F_n (read-only)."""
        return self._n

    def identity_deviation(self) -> float:
        """Max-entry deviation of N from the identity (cached)."""
        if self._identity_dev is None:
            self._identity_dev = float(
                np.max(np.abs(self._n - np.eye(self.dim_b)))
            )
        return self._identity_dev

    def branch_n_stack(self) -> np.ndarray:
        """Stack of per-Kraus summaries F_n^dagger F_n, shape (n, d, d)."""
        if self._branch_stack is None:
            stack = np.stack([f.conj().T @ f for f in self.kraus])
            stack.setflags(write=False)
            self._branch_stack = stack
        return self._branch_stack

    def __repr__(self) -> str:
        tag = f" {self.label!r}" if self.label else ""
        return f"KrausOperation(dim_b={self.dim_b}, n_kraus={len(self.kraus)}{tag})"


class ChannelEnsemble:
    """Sub-normalized operations that together form a trace-preserving whole.

    Each member fires with its own probability on a given state; the members'
    summary operators must add to the identity.
    """

    __slots__ = ("dim_b", "operations", "_branch_stack")

    def __init__(self, operations):
        ops = tuple(operations)
        if not ops:
            raise ValueError("ensemble needs at least one operation")
        d = ops[0].dim_b
        for op in ops:
            if not isinstance(op, KrausOperation):
                raise TypeError("ensemble members must be KrausOperation values")
            if op.dim_b != d:
                raise ValueError("ensemble members must share one B dimension")
        total = np.zeros((d, d), dtype=np.complex128)
        for op in ops:
            total += op.n_operator()
        dev = float(np.max(np.abs(total - np.eye(d))))
        if dev > VALIDITY_ATOL:
            raise NotTracePreserving(
                f"member summary operators deviate from the identity by {dev:.3e}"
            )
        self.dim_b = int(d)
        self.operations = ops
        self._branch_stack = None

    def branch_n_stack(self) -> np.ndarray:
        """Stack of member summary operators, shape (k, d, d)."""
        if self._branch_stack is None:
            stack = np.stack([op.n_operator() for op in self.operations])
            stack.setflags(write=False)
            self._branch_stack = stack
        return self._branch_stack

    def __repr__(self) -> str:
        return f"ChannelEnsemble(dim_b={self.dim_b}, members={len(self.operations)})"


def n_operator(op: KrausOperation) -> np.ndarray:
    """Summary operator N = sum_n F_n^dagger F_n of an operation."""
    return op.n_operator()


def is_trace_preserving(op: KrausOperation, tol: float = VALIDITY_ATOL) -> bool:
    """True when the summary operator equals the identity within tol."""
    return op.identity_deviation() < tol


def _check_unit_interval(name: str, value: float) -> float:
    v = float(value)
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return v


def phase_damping(r) -> KrausOperation:
    """Qubit phase damping {diag(1, sqrt(1-r)), diag(0, sqrt(r))}."""
    r = _check_unit_interval("r", r)
    f1 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - r)]], dtype=np.complex128)
    f2 = np.array([[0.0, 0.0], [0.0, np.sqrt(r)]], dtype=np.complex128)
    return KrausOperation([f1, f2], label=f"phase_damping({r})")


def depolarizing(p) -> KrausOperation:
    """Qubit depolarizing channel, rho -> (1-p) rho + p I/2."""
    p = _check_unit_interval("p", p)
    k0 = np.sqrt(max(0.0, 1.0 - 3.0 * p / 4.0)) * np.eye(2, dtype=np.complex128)
    kp = np.sqrt(p / 4.0)
    return KrausOperation(
        [k0, kp * _X, kp * _Y, kp * _Z], label=f"depolarizing({p})"
    )


def bit_flip(p) -> KrausOperation:
    """Qubit bit flip {sqrt(1-p) I, sqrt(p) X}."""
    p = _check_unit_interval("p", p)
    return KrausOperation(
        [np.sqrt(1.0 - p) * np.eye(2, dtype=np.complex128), np.sqrt(p) * _X],
        label=f"bit_flip({p})",
    )


def phase_flip(p) -> KrausOperation:
    """Qubit phase flip {sqrt(1-p) I, sqrt(p) Z}."""
    p = _check_unit_interval("p", p)
    return KrausOperation(
        [np.sqrt(1.0 - p) * np.eye(2, dtype=np.complex128), np.sqrt(p) * _Z],
        label=f"phase_flip({p})",
    )


def bit_phase_flip(p) -> KrausOperation:
    """Qubit bit-phase flip {sqrt(1-p) I, sqrt(p) Y}."""
    p = _check_unit_interval("p", p)
    return KrausOperation(
        [np.sqrt(1.0 - p) * np.eye(2, dtype=np.complex128), np.sqrt(p) * _Y],
        label=f"bit_phase_flip({p})",
    )


def projective_measurement(basis) -> ChannelEnsemble:
    """Ensemble of rank-1 projectors onto the given orthonormal basis columns."""
    b = as_complex_matrix(basis)
    if b.shape[0] != b.shape[1]:
        raise ValueError(f"basis must be square, got shape {b.shape}")
    dev = float(np.max(np.abs(b.conj().T @ b - np.eye(b.shape[0]))))
    if dev > VALIDITY_ATOL:
        raise ValueError(f"basis columns deviate from orthonormal by {dev:.3e}")
    ops = [
        KrausOperation([np.outer(b[:, k], b[:, k].conj())], label=f"project[{k}]")
        for k in range(b.shape[1])
    ]
    return ChannelEnsemble(ops)


def creates_coherence(
    psi: BipartitePureState, op: KrausOperation, tol: float = 1e-9
) -> tuple[bool, int | None]:
    """Decide whether op can hand subsystem A nonzero coherence.

    Requires A's marginal to start incoherent (PremiseViolated otherwise).
    The test commutes N against each unnormalized B-side block
    (<i| (x) I)|psi><psi|(|i> (x) I); the operation creates coherence exactly
    when some block fails to commute. Returns (creates, witness) with witness
    the smallest failing computational index, or None when inert.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if op.dim_b != psi.dim_b:
        raise ValueError(f"operation dimension {op.dim_b} does not match dim_b={psi.dim_b}")
    marginal = reduced_a(psi)
    if not is_incoherent(marginal, tol):
        raise PremiseViolated(
            f"subsystem A starts with coherence {l1_coherence(marginal):.3e}; "
            "the criterion requires a diagonal A-marginal"
        )
    n = op.n_operator()
    w = psi.coefficient_matrix
    for i in range(psi.dim_a):
        block = np.outer(w[i], w[i].conj())
        bracket = n @ block - block @ n
        if float(np.linalg.norm(bracket)) > tol:
            return True, i
    return False, None


def inert_operation(psi: BipartitePureState, n_values) -> KrausOperation:
    """Single-Kraus operation diagonal in psi's Schmidt B-basis.

    Builds N = sum_i n_i |b_i><b_i| with the b_i running over the Schmidt
    vectors (descending weight) and then a deterministic completion of the
    basis; n_values must cover at least the Schmidt rank and any directions
    beyond the provided values get coefficient 0. The Kraus operator is the
    PSD square root of N, so the operation never creates coherence on A for
    this state.
    """
    vals = np.asarray(n_values, dtype=float).reshape(-1)
    if vals.size == 0:
        raise ValueError("n_values must not be empty")
    if float(vals.min()) < 0.0 or float(vals.max()) > 1.0:
        raise ValueError(f"all values must lie in [0, 1], got range [{vals.min()}, {vals.max()}]")
    form = schmidt_decompose(psi)
    if vals.size < form.rank:
        raise ValueError(f"need at least {form.rank} values (the Schmidt rank), got {vals.size}")
    if vals.size > psi.dim_b:
        raise ValueError(f"at most dim_b = {psi.dim_b} values are meaningful, got {vals.size}")
    basis = complete_orthonormal_basis(form.basis_b, psi.dim_b)
    coeffs = np.zeros(psi.dim_b)
    coeffs[: vals.size] = vals
    n = (basis * coeffs) @ basis.conj().T
    evals, evecs = hermitian_eig(n)
    root = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T
    return KrausOperation([root], label="inert")


def kraus_operation_to_json(op: KrausOperation) -> dict:
    """JSON-ready dict {"dim_b", "label", "kraus"} in the matrix format."""
    from .linalg import matrix_to_json

    return {
        "dim_b": op.dim_b,
        "label": op.label,
        "kraus": [matrix_to_json(f) for f in op.kraus],
    }


def ensemble_to_json(ensemble: ChannelEnsemble) -> dict:
    """JSON-ready dict {"operations": [...]} of member operations."""
    return {"operations": [kraus_operation_to_json(op) for op in ensemble.operations]}


def kraus_operation_from_json(obj) -> KrausOperation:
    """Inverse of kraus_operation_to_json with field-named errors."""
    from .linalg import matrix_from_json

    if not isinstance(obj, dict):
        raise ValueError("channel value must be a JSON object")
    for key in ("dim_b", "kraus"):
        if key not in obj:
            raise ValueError(f"channel object is missing field '{key}'")
    dim_b = obj["dim_b"]
    if not isinstance(dim_b, int) or dim_b < 1:
        raise ValueError(f"field 'dim_b' must be a positive integer, got {dim_b!r}")
    mats = obj["kraus"]
    if not isinstance(mats, list) or not mats:
        raise ValueError("field 'kraus' must be a non-empty list of matrices")
    kraus = [matrix_from_json(m) for m in mats]
    for k, f in enumerate(kraus):
        if f.shape != (dim_b, dim_b):
            raise ValueError(f"kraus[{k}] has shape {f.shape}, expected ({dim_b}, {dim_b})")
    label = obj.get("label", "")
    if not isinstance(label, str):
        raise ValueError("field 'label' must be a string")
    return KrausOperation(kraus, label=label)


def ensemble_from_json(obj) -> ChannelEnsemble:
    """Inverse of ensemble_to_json with field-named errors."""
    if not isinstance(obj, dict) or "operations" not in obj:
        raise ValueError("ensemble object must carry an 'operations' list")
    ops = obj["operations"]
    if not isinstance(ops, list) or not ops:
        raise ValueError("field 'operations' must be a non-empty list")
    return ChannelEnsemble([kraus_operation_from_json(o) for o in ops])


def channel_from_json(obj):
    """Load either a single operation or an ensemble, keyed by its fields."""
    if isinstance(obj, dict) and "operations" in obj:
        return ensemble_from_json(obj)
    return kraus_operation_from_json(obj)
