"""Remote-coherence engine.

Everything subsystem A can gain from an operation on B is driven by the
operation's summary operator N: the unnormalized conditional state of A is
W N^T W^dagger for a pure state with coefficient matrix W, and the matching
contraction of the joint density matrix in the mixed case. On top of that
single contraction this module builds per-outcome records, channel averages,
the upper bounds relating averages to entanglement, and the two-qubit
factorization law.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .channels import ChannelEnsemble, KrausOperation, is_trace_preserving
from .coherence import is_incoherent_quantum, l1_coherence
from .errors import (
    NotTracePreserving,
    PremiseViolated,
    SearchExhausted,
    WrongDimension,
    ZeroProbability,
)
from .linalg import SeededRng, as_complex_matrix, complete_orthonormal_basis, matrix_to_json, random_pure_state
from .states import (
    BipartitePureState,
    DensityMatrix,
    concurrence,
    schmidt_decompose,
)

# Branches with probability below this cutoff have no conditional state; in
# averages they contribute exactly zero and are flagged instead of raising.
ZERO_PROBABILITY_CUTOFF = 1e-14

# Denominator cutoff for the factorization ratio.
RATIO_DENOMINATOR_CUTOFF = 1e-12

FACTORIZATION_ATOL = 1e-9


@dataclass(frozen=True)
class OutcomeRecord:
    """One post-selected branch: probability, A's state, its coherence."""

    probability: float
    state_a: DensityMatrix | None
    coherence: float
    zero_probability: bool = False


@dataclass(frozen=True)
class RccReport:
    """Per-outcome and aggregate results for one (state, channel) pair.

    lemma1_bounds aligns with outcomes (0.0 for flagged zero-probability
    branches). factorization_ratio is populated only for 2x2 systems with a
    nonvanishing maximally-entangled average.
    """

    outcomes: tuple[OutcomeRecord, ...]
    average_rcc: float
    entanglement: float
    lemma1_bounds: tuple[float, ...]
    theorem3_bound: float
    tighter_bound: float
    maxent_average_rcc: float
    factorization_ratio: float | None


def _branch_stack(channel) -> np.ndarray:
    if isinstance(channel, (KrausOperation, ChannelEnsemble)):
        return channel.branch_n_stack()
    raise TypeError(f"expected KrausOperation or ChannelEnsemble, got {type(channel).__name__}")


def _require_premise(psi: BipartitePureState, tol: float = 1e-9) -> None:
    offdiag = psi.marginal_offdiag()
    if offdiag >= tol:
        raise PremiseViolated(
            f"subsystem A starts with off-diagonal weight {offdiag:.3e}; "
            "averages are defined for diagonal A-marginals only"
        )


def _require_whole_channel(psi: BipartitePureState, channel) -> None:
    if channel.dim_b != psi.dim_b:
        raise ValueError(f"channel dimension {channel.dim_b} does not match dim_b={psi.dim_b}")
    if isinstance(channel, KrausOperation) and not is_trace_preserving(channel):
        raise NotTracePreserving(
            "averaging needs a trace-preserving channel; wrap post-selected "
            "operations into a ChannelEnsemble instead"
        )


def _unnormalized_branches(w: np.ndarray, stack: np.ndarray) -> np.ndarray:
    # (k, da, da) stack of W N_k^T W^dagger.
    return np.matmul(np.matmul(w[None, :, :], stack.transpose(0, 2, 1)), w.conj().T[None, :, :])


def _schmidt_branch_elements(psi: BipartitePureState, stack: np.ndarray) -> np.ndarray:
    # G_k[j, i] = <beta_j| N_k |beta_i> over psi's Schmidt B-basis.
    basis = schmidt_decompose(psi).basis_b
    return np.matmul(np.matmul(basis.conj().T[None, :, :], stack), basis[None, :, :])


def _offdiag_norms(g: np.ndarray) -> np.ndarray:
    # sqrt(sum_{j<i} |G_k[j, i]|^2) per branch; strict upper triangle.
    tri = np.triu(g, 1)
    return np.sqrt(np.sum(np.abs(tri) ** 2, axis=(1, 2)))


def post_operation_state_a(state, op: KrausOperation, dim_a=None, dim_b=None):
    """Conditional state of A after op post-selects on B, with its probability.

    Pure inputs contract the coefficient matrix, rho' = W N^T W^dagger / p;
    density-matrix inputs (which need explicit dims) contract the joint state
    with N directly. Raises ZeroProbability when the branch has essentially
    no support on the state.
    """
    n = op.n_operator()
    if isinstance(state, BipartitePureState):
        if op.dim_b != state.dim_b:
            raise ValueError(f"operation dimension {op.dim_b} does not match dim_b={state.dim_b}")
        w = state.coefficient_matrix
        unnorm = w @ n.T @ w.conj().T
    else:
        raw = state.matrix if isinstance(state, DensityMatrix) else as_complex_matrix(state)
        if dim_a is None or dim_b is None:
            raise ValueError("dim_a and dim_b are required for density-matrix input")
        if raw.shape[0] != dim_a * dim_b:
            raise ValueError(
                f"operator side {raw.shape[0]} does not match dim_a*dim_b = {dim_a * dim_b}"
            )
        if op.dim_b != dim_b:
            raise ValueError(f"operation dimension {op.dim_b} does not match dim_b={dim_b}")
        r4 = raw.reshape(dim_a, dim_b, dim_a, dim_b)
        unnorm = np.einsum("ijkl,lj->ik", r4, n)
    prob = float(np.trace(unnorm).real)
    if prob < ZERO_PROBABILITY_CUTOFF:
        raise ZeroProbability(f"branch probability {prob:.3e} is below {ZERO_PROBABILITY_CUTOFF}")
    conditional = unnorm / prob
    conditional = (conditional + conditional.conj().T) / 2
    return DensityMatrix(conditional), prob


def average_coherence(psi: BipartitePureState, channel) -> float:
    """Average coherence gained by A, sum_n p_n C(rho_n).

    Outcomes are single Kraus operators for a trace-preserving operation and
    whole member operations for an ensemble. Since p_n C(rho_n) is just the
    off-diagonal modulus sum of the unnormalized branch state, vanishing
    branches contribute zero without any special casing.
    """
    _require_premise(psi)
    _require_whole_channel(psi, channel)
    stack = _branch_stack(channel)
    unnorm = _unnormalized_branches(psi.coefficient_matrix, stack)
    mods = np.abs(unnorm)
    return float(mods.sum() - np.einsum("kii->", mods))


def maximally_entangled_partner(psi: BipartitePureState) -> BipartitePureState:
    """Equal-weight state over psi's Schmidt basis pairs, weights 1/dim_a.

    When the Schmidt rank is below dim_a both local bases are completed
    deterministically against computational directions, so the partner is
    always full rank. Its A-marginal is I/d, hence always incoherent.
    """
    d = psi.dim_a
    if psi.dim_b < d:
        raise WrongDimension(f"partner needs dim_b >= dim_a, got {psi.dim_b} < {d}")
    form = schmidt_decompose(psi)
    basis_a = complete_orthonormal_basis(form.basis_a, d)
    basis_b = complete_orthonormal_basis(form.basis_b, psi.dim_b)[:, :d]
    amp = np.zeros(d * psi.dim_b, dtype=np.complex128)
    for k in range(d):
        amp += np.kron(basis_a[:, k], basis_b[:, k])
    return BipartitePureState(psi.dim_a, psi.dim_b, amp / np.sqrt(d))


def outcome_coherence_bound(psi: BipartitePureState, op: KrausOperation) -> float:
    """Upper bound (E / p') sqrt(sum_{j<i} |N_ji|^2) on one branch's coherence.

    N_ji is evaluated in psi's Schmidt B-basis. The bound covers the achieved
    coherence whenever A's marginal starts diagonal.
    """
    if op.dim_b != psi.dim_b:
        raise ValueError(f"operation dimension {op.dim_b} does not match dim_b={psi.dim_b}")
    w = psi.coefficient_matrix
    n = op.n_operator()
    prob = float(np.trace(w @ n.T @ w.conj().T).real)
    if prob < ZERO_PROBABILITY_CUTOFF:
        raise ZeroProbability(f"branch probability {prob:.3e} is below {ZERO_PROBABILITY_CUTOFF}")
    g = _schmidt_branch_elements(psi, n[None, :, :])[0]
    offdiag = float(np.sqrt(np.sum(np.abs(np.triu(g, 1)) ** 2)))
    return concurrence(psi) / prob * offdiag


def average_coherence_bound(psi: BipartitePureState, channel) -> float:
    """Average bound (dim_a / 2) * E * average_coherence of the partner."""
    _require_premise(psi)
    _require_whole_channel(psi, channel)
    partner = maximally_entangled_partner(psi)
    return float(psi.dim_a / 2 * concurrence(psi) * average_coherence(partner, channel))


def tight_average_bound(psi: BipartitePureState, channel) -> float:
    """Branch-resolved average bound E * sum_k sqrt(sum_{j<i} |N^k_ji|^2).

    Never exceeds average_coherence_bound (up to rounding) and both dominate
    the achieved average.
    """
    _require_premise(psi)
    _require_whole_channel(psi, channel)
    stack = _branch_stack(channel)
    g = _schmidt_branch_elements(psi, stack)
    return float(concurrence(psi) * _offdiag_norms(g).sum())


def average_rcc(psi: BipartitePureState, channel) -> RccReport:
    """Full per-outcome report for a trace-preserving channel or ensemble.

    Zero-probability branches are kept in the outcome list, flagged, and
    contribute zero to the average and to the bound list.
    """
    _require_premise(psi)
    _require_whole_channel(psi, channel)
    stack = _branch_stack(channel)
    w = psi.coefficient_matrix
    unnorm = _unnormalized_branches(w, stack)
    ent = concurrence(psi)
    g = _schmidt_branch_elements(psi, stack)
    offdiag = _offdiag_norms(g)

    outcomes: list[OutcomeRecord] = []
    bounds: list[float] = []
    for k in range(stack.shape[0]):
        prob = float(np.trace(unnorm[k]).real)
        if prob < ZERO_PROBABILITY_CUTOFF:
            outcomes.append(OutcomeRecord(prob, None, 0.0, zero_probability=True))
            bounds.append(0.0)
            continue
        conditional = unnorm[k] / prob
        conditional = (conditional + conditional.conj().T) / 2
        state_a = DensityMatrix(conditional)
        outcomes.append(OutcomeRecord(prob, state_a, l1_coherence(state_a)))
        bounds.append(float(ent / prob * offdiag[k]))

    average = float(sum(o.probability * o.coherence for o in outcomes))
    partner = maximally_entangled_partner(psi)
    maxent_average = average_coherence(partner, channel)
    bound_via_partner = float(psi.dim_a / 2 * ent * maxent_average)
    tight = float(ent * offdiag.sum())
    ratio = None
    if psi.dim_a == 2 and psi.dim_b == 2 and maxent_average > RATIO_DENOMINATOR_CUTOFF:
        ratio = float(average / maxent_average)
    return RccReport(
        outcomes=tuple(outcomes),
        average_rcc=average,
        entanglement=ent,
        lemma1_bounds=tuple(bounds),
        theorem3_bound=bound_via_partner,
        tighter_bound=tight,
        maxent_average_rcc=maxent_average,
        factorization_ratio=ratio,
    )


def factorization_check(psi: BipartitePureState, channel) -> tuple[float | None, bool]:
    """Two-qubit factorization law: average equals E times the partner average.

    Returns (ratio, holds); the ratio is None when the partner average
    vanishes, in which case the law holds exactly when the average itself
    vanishes.
    """
    if psi.dim_a != 2 or psi.dim_b != 2:
        raise WrongDimension(
            f"factorization law is a 2x2 statement, got {psi.dim_a}x{psi.dim_b}"
        )
    average = average_coherence(psi, channel)
    ent = concurrence(psi)
    maxent_average = average_coherence(maximally_entangled_partner(psi), channel)
    if maxent_average > RATIO_DENOMINATOR_CUTOFF:
        ratio = average / maxent_average
        return float(ratio), bool(abs(average - ent * maxent_average) < FACTORIZATION_ATOL)
    return None, bool(average < FACTORIZATION_ATOL)


def _state_seed(matrix: np.ndarray) -> int:
    rounded = np.round(np.ascontiguousarray(matrix), 12)
    digest = hashlib.sha256(rounded.tobytes()).digest()
    return int.from_bytes(digest[:8], "big")


def find_creating_operation(
    rho_ab,
    dim_a: int,
    dim_b: int,
    *,
    attempts: int = 512,
    coherence_target: float = 1e-6,
) -> KrausOperation | None:
    """Search for a B-side projector that creates coherence on A.

    Returns None exactly when the state is block-diagonal in A's basis (then
    no operation can succeed). Otherwise draws random rank-1 projectors on B
    from a stream seeded by the state itself, so repeated calls replay the
    same search, and returns the first projector pushing A's coherence past
    coherence_target. SearchExhausted (carrying the best value seen) signals
    that the attempt budget ran out, as opposed to provable impossibility.
    """
    dm = rho_ab if isinstance(rho_ab, DensityMatrix) else DensityMatrix(rho_ab)
    if dm.dim != dim_a * dim_b:
        raise ValueError(f"operator side {dm.dim} does not match dim_a*dim_b = {dim_a * dim_b}")
    if is_incoherent_quantum(dm, dim_a, dim_b):
        return None
    rng = SeededRng(_state_seed(dm.matrix), 0)
    best = 0.0
    for k in range(attempts):
        beta = random_pure_state(dim_b, rng)
        op = KrausOperation([np.outer(beta, beta.conj())], label=f"projector-search[{k}]")
        try:
            state_a, _ = post_operation_state_a(dm, op, dim_a, dim_b)
        except ZeroProbability:
            continue
        achieved = l1_coherence(state_a)
        if achieved > coherence_target:
            return op
        best = max(best, achieved)
    raise SearchExhausted(
        f"no projector reached coherence {coherence_target:g} within {attempts} attempts "
        f"(best found {best:.3e})",
        best_value=best,
        attempts=attempts,
    )


def report_to_json(report: RccReport) -> dict:
    """JSON-ready dict mirroring the RccReport fields."""
    outcomes = []
    for rec in report.outcomes:
        outcomes.append(
            {
                "probability": rec.probability,
                "coherence": rec.coherence,
                "zero_probability": rec.zero_probability,
                "state_a": None if rec.state_a is None else matrix_to_json(rec.state_a.matrix),
            }
        )
    return {
        "outcomes": outcomes,
        "average_rcc": report.average_rcc,
        "entanglement": report.entanglement,
        "lemma1_bounds": list(report.lemma1_bounds),
        "theorem3_bound": report.theorem3_bound,
        "tighter_bound": report.tighter_bound,
        "maxent_average_rcc": report.maxent_average_rcc,
        "factorization_ratio": report.factorization_ratio,
    }
