"""Seeded random generators for states, channels, and sweep instances."""

from __future__ import annotations

import numpy as np

from .channels import ChannelEnsemble, KrausOperation
from .coherence import is_incoherent_quantum
from .linalg import SeededRng, haar_random_unitary
from .states import BipartitePureState, DensityMatrix


def random_schmidt_parts(dim_a: int, dim_b: int, rng: SeededRng):
    """Draw Schmidt weights and a Haar B-basis for a diagonal-A-marginal state.

    Two-dimensional A uses a single uniform draw for the first weight; larger
    A draws weights uniformly on the probability simplex. The basis columns
    are the first dim_a columns of a Haar unitary on B.
    """
    if dim_b < dim_a:
        raise ValueError(f"need dim_b >= dim_a, got {dim_b} < {dim_a}")
    g = rng.generator
    if dim_a == 2:
        first = float(g.random())
        weights = np.array([first, 1.0 - first])
    else:
        weights = g.dirichlet(np.ones(dim_a))
    basis = haar_random_unitary(dim_b, rng)[:, :dim_a]
    return weights, basis


def random_schmidt_state(dim_a: int, dim_b: int, rng: SeededRng) -> BipartitePureState:
    """Random pure state with a diagonal A-marginal (Schmidt form by build)."""
    weights, basis = random_schmidt_parts(dim_a, dim_b, rng)
    return BipartitePureState.from_schmidt(weights, basis)


def random_density_matrix(dim: int, rng: SeededRng) -> DensityMatrix:
    """Ginibre-induced random density matrix."""
    g = rng.generator
    z = (g.standard_normal((dim, dim)) + 1j * g.standard_normal((dim, dim))) / np.sqrt(2.0)
    m = z @ z.conj().T
    return DensityMatrix(m / np.trace(m).real, validate=False)


def random_incoherent_quantum_state(dim_a: int, dim_b: int, rng: SeededRng) -> DensityMatrix:
    """Random block-diagonal state sum_i q_i |i><i| (x) rho_i."""
    q = rng.generator.dirichlet(np.ones(dim_a))
    side = dim_a * dim_b
    out = np.zeros((side, side), dtype=np.complex128)
    for i in range(dim_a):
        block = random_density_matrix(dim_b, rng).matrix
        out[i * dim_b : (i + 1) * dim_b, i * dim_b : (i + 1) * dim_b] = q[i] * block
    return DensityMatrix(out, validate=False)


def random_noncq_state(dim_a: int, dim_b: int, rng: SeededRng, tol: float = 1e-9) -> DensityMatrix:
    """Random density matrix conditioned on failing the block-diagonal test."""
    for _ in range(64):
        candidate = random_density_matrix(dim_a * dim_b, rng)
        if not is_incoherent_quantum(candidate, dim_a, dim_b, tol):
            return candidate
    raise RuntimeError("could not draw a non-block-diagonal state; tolerance too loose?")


def random_kraus_operation(dim_b: int, rng: SeededRng, max_kraus: int = 3) -> KrausOperation:
    """Random sub-normalized operation: Ginibre Kraus set scaled to max eig(N) = 1.

    Covers trace-decreasing and nearly trace-preserving cases alike.
    """
    g = rng.generator
    count = int(g.integers(1, max_kraus + 1))
    mats = [
        (g.standard_normal((dim_b, dim_b)) + 1j * g.standard_normal((dim_b, dim_b))) / np.sqrt(2.0)
        for _ in range(count)
    ]
    n = np.zeros((dim_b, dim_b), dtype=np.complex128)
    for f in mats:
        n += f.conj().T @ f
    top = float(np.max(np.linalg.eigvalsh((n + n.conj().T) / 2)))
    scale = 1.0 / np.sqrt(top)
    return KrausOperation([scale * f for f in mats], label=f"random-kraus[{count}]")


def random_tp_channel(dim_b: int, rng: SeededRng, kraus_count: int | None = None) -> KrausOperation:
    """Random trace-preserving channel from an isometry split into blocks."""
    g = rng.generator
    count = int(kraus_count) if kraus_count else int(g.integers(2, 4))
    z = (
        g.standard_normal((count * dim_b, dim_b))
        + 1j * g.standard_normal((count * dim_b, dim_b))
    ) / np.sqrt(2.0)
    q, _ = np.linalg.qr(z)
    blocks = [q[k * dim_b : (k + 1) * dim_b, :] for k in range(count)]
    return KrausOperation(blocks, label=f"random-tp[{count}]")


def random_channel_ensemble(dim_b: int, rng: SeededRng) -> ChannelEnsemble:
    """Random ensemble: a trace-preserving Kraus set split into two members."""
    g = rng.generator
    count = int(g.integers(3, 5))
    whole = random_tp_channel(dim_b, rng, kraus_count=count)
    split = int(g.integers(1, count))
    first = KrausOperation(whole.kraus[:split], label="ensemble-member[0]")
    second = KrausOperation(whole.kraus[split:], label="ensemble-member[1]")
    return ChannelEnsemble([first, second])
