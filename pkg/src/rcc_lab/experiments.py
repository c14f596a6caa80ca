"""Monte Carlo experiment drivers and property-verification sweeps.

run_fig1 produces the entanglement-versus-average-coherence scatter for the
phase damping channel as a CSV (optionally an SVG); the verify_* sweeps
exercise the package's structural claims on seeded random instances and
report violations instead of raising.
"""

from __future__ import annotations

import concurrent.futures
import os
from dataclasses import dataclass

import numpy as np

from . import rcc
from .channels import (
    KrausOperation,
    ensemble_to_json,
    kraus_operation_to_json,
    creates_coherence,
    phase_damping,
)
from .coherence import l1_coherence
from .errors import SearchExhausted, ZeroProbability
from .linalg import SeededRng, matrix_to_json, partial_trace, tensor_product
from .sampling import (
    random_channel_ensemble,
    random_density_matrix,
    random_incoherent_quantum_state,
    random_kraus_operation,
    random_noncq_state,
    random_schmidt_parts,
    random_schmidt_state,
    random_tp_channel,
)
from .states import BipartitePureState, concurrence, state_to_json

CSV_HEADER = "sample,seed,r,omega0,entanglement,avg_rcc,avg_rcc_maxent,ratio"

VERIFY_SUITES = ("theorem1", "theorem2", "lemma1", "theorem3", "theorem4", "nosignal")


def worker_count() -> int:
    """Worker cap from the RCC_LAB_THREADS environment variable (default 1)."""
    raw = os.environ.get("RCC_LAB_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"RCC_LAB_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


def _fmt(x) -> str:
    # repr of a Python float is the shortest decimal that round-trips exactly.
    return repr(float(x))


@dataclass
class ExperimentConfig:
    """Settings for the scatter experiment.

    damping_rates must lie in [0, 1]; dims fixes (dim_a, dim_b) and must stay
    (2, 2) because the experiment's channel acts on a qubit; a plot_path
    turns on SVG emission next to the CSV.
    """

    samples: int = 200_000
    damping_rates: tuple = (0.1, 0.3, 0.5, 0.7, 0.9)
    seed: int = 0
    dims: tuple = (2, 2)
    output_path: str = "fig1.csv"
    plot_path: str | None = None

    @property
    def emit_plot(self) -> bool:
        return self.plot_path is not None

    def validate(self) -> None:
        if int(self.samples) < 1:
            raise ValueError(f"field 'samples': must be at least 1, got {self.samples}")
        if not self.damping_rates:
            raise ValueError("field 'damping_rates': must not be empty")
        for r in self.damping_rates:
            if not 0.0 <= float(r) <= 1.0:
                raise ValueError(f"field 'damping_rates': rate {r} lies outside [0, 1]")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"field 'seed': must fit in unsigned 64 bits, got {self.seed}")
        if len(self.dims) != 2 or any(int(d) < 1 for d in self.dims):
            raise ValueError(f"field 'dims': must be two positive integers, got {self.dims}")
        if not self.output_path:
            raise ValueError("field 'output_path': must be a non-empty path")

    @classmethod
    def from_mapping(cls, obj: dict) -> "ExperimentConfig":
        """Build a config from a JSON mapping, rejecting unknown fields."""
        if not isinstance(obj, dict):
            raise ValueError("config must be a JSON object")
        known = {
            "samples",
            "damping_rates",
            "seed",
            "dims",
            "output_path",
            "plot_path",
        }
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        kwargs = dict(obj)
        if "damping_rates" in kwargs:
            kwargs["damping_rates"] = tuple(float(r) for r in kwargs["damping_rates"])
        if "dims" in kwargs:
            kwargs["dims"] = tuple(int(d) for d in kwargs["dims"])
        return cls(**kwargs)


@dataclass
class Fig1Summary:
    """Aggregates from one scatter run, for the CLI summary lines."""

    rows: int
    rows_with_ratio: int
    max_ratio_deviation: float
    mean_average_by_rate: dict
    monotone: bool
    csv_path: str
    plot_path: str | None


def _fig1_sample(sample: int, seed: int, rates, channels):
    rng = SeededRng(seed, stream_id=sample)
    weights, basis = random_schmidt_parts(2, 2, rng)
    psi = BipartitePureState.from_schmidt(weights, basis)
    partner = rcc.maximally_entangled_partner(psi)
    ent = concurrence(psi)
    rows = []
    stats = []
    for rate, channel in zip(rates, channels):
        avg = rcc.average_coherence(psi, channel)
        maxent = rcc.average_coherence(partner, channel)
        if maxent > rcc.RATIO_DENOMINATOR_CUTOFF:
            ratio = avg / maxent
            ratio_txt = _fmt(ratio)
        else:
            ratio = None
            ratio_txt = ""
        rows.append(
            f"{sample},{seed},{_fmt(rate)},{_fmt(weights[0])},{_fmt(ent)},"
            f"{_fmt(avg)},{_fmt(maxent)},{ratio_txt}"
        )
        stats.append((rate, ent, avg, ratio))
    return rows, stats


def run_fig1(config: ExperimentConfig) -> Fig1Summary:
    """Run the phase-damping scatter and write one CSV row per (sample, rate).

    Output bytes depend only on the config and seed: samples are processed in
    index order with one RNG stream per sample, whatever the worker count.
    """
    config.validate()
    if tuple(int(d) for d in config.dims) != (2, 2):
        raise ValueError("field 'dims': the phase damping experiment is defined for dims = (2, 2)")
    rates = [float(r) for r in config.damping_rates]
    channels = [phase_damping(r) for r in rates]
    seed = int(config.seed)
    samples = int(config.samples)

    plot_stride = max(1, samples // 4000)
    blue_points = []
    red_points = []
    rate_sums = {r: 0.0 for r in rates}
    max_dev = 0.0
    rows_with_ratio = 0
    rows_written = 0

    def job(sample: int):
        return _fig1_sample(sample, seed, rates, channels)

    workers = worker_count()
    with open(config.output_path, "w", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        if workers > 1:
            pool = concurrent.futures.ThreadPoolExecutor(max_workers=workers)
            stream = pool.map(job, range(samples), chunksize=64)
        else:
            pool = None
            stream = map(job, range(samples))
        try:
            for sample, (rows, stats) in enumerate(stream):
                for line in rows:
                    fh.write(line + "\n")
                rows_written += len(rows)
                keep_for_plot = sample % plot_stride == 0
                for rate, ent, avg, ratio in stats:
                    rate_sums[rate] += avg
                    if ratio is not None:
                        rows_with_ratio += 1
                        max_dev = max(max_dev, abs(ratio - ent))
                    if keep_for_plot:
                        blue_points.append((ent, avg, rate))
                        if ratio is not None:
                            red_points.append((ent, ratio))
        finally:
            if pool is not None:
                pool.shutdown()

    means = {r: rate_sums[r] / samples for r in rates}
    ordered = [means[r] for r in sorted(means)]
    monotone = all(b > a - 1e-12 for a, b in zip(ordered, ordered[1:]))

    if config.emit_plot:
        svg = scatter_svg(blue_points, red_points, sorted(set(rates)))
        with open(config.plot_path, "w", newline="\n") as fh:
            fh.write(svg)

    return Fig1Summary(
        rows=rows_written,
        rows_with_ratio=rows_with_ratio,
        max_ratio_deviation=max_dev,
        mean_average_by_rate=means,
        monotone=monotone,
        csv_path=config.output_path,
        plot_path=config.plot_path,
    )


def scatter_svg(blue_points, red_points, rate_levels) -> str:
    """Minimal self-contained scatter: average coherence and ratio versus entanglement.

    Blue dots darken with the damping rate; red dots are the ratio series.
    """
    width, height = 640, 480
    left, right, top, bottom = 60, 20, 20, 50
    span_x = width - left - right
    span_y = height - top - bottom
    ys = [p[1] for p in blue_points] + [p[1] for p in red_points]
    y_max = max(1.0, max(ys) if ys else 1.0) * 1.05
    x_max = 1.05

    def px(x: float) -> float:
        return left + span_x * min(max(x / x_max, 0.0), 1.0)

    def py(y: float) -> float:
        return height - bottom - span_y * min(max(y / y_max, 0.0), 1.0)

    def blue_shade(rate: float) -> str:
        # light to dark blue as the rate grows
        level = 210 - int(160 * min(max(rate, 0.0), 1.0))
        return f"rgb({level // 2},{level},230)"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" y2="{height - bottom}" '
        'stroke="black" stroke-width="1"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" '
        'stroke="black" stroke-width="1"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        x_val = frac * x_max
        y_val = frac * y_max
        parts.append(
            f'<text x="{px(x_val):.1f}" y="{height - bottom + 18}" font-size="11" '
            f'text-anchor="middle">{x_val:.2f}</text>'
        )
        parts.append(
            f'<text x="{left - 8}" y="{py(y_val):.1f}" font-size="11" '
            f'text-anchor="end" dominant-baseline="middle">{y_val:.2f}</text>'
        )
    parts.append(
        f'<text x="{left + span_x / 2:.1f}" y="{height - 12}" font-size="13" '
        'text-anchor="middle">entanglement (concurrence)</text>'
    )
    parts.append(
        f'<text x="16" y="{top + span_y / 2:.1f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + span_y / 2:.1f})">average coherence / ratio</text>'
    )
    for ent, avg, rate in blue_points:
        parts.append(
            f'<circle cx="{px(ent):.1f}" cy="{py(avg):.1f}" r="2" '
            f'fill="{blue_shade(rate)}" fill-opacity="0.6"/>'
        )
    for ent, ratio in red_points:
        parts.append(
            f'<circle cx="{px(ent):.1f}" cy="{py(ratio):.1f}" r="2" '
            'fill="rgb(200,30,30)" fill-opacity="0.6"/>'
        )
    legend_y = top + 10
    for rate in rate_levels:
        parts.append(
            f'<circle cx="{width - right - 130}" cy="{legend_y}" r="4" fill="{blue_shade(rate)}"/>'
        )
        parts.append(
            f'<text x="{width - right - 120}" y="{legend_y + 4}" font-size="11">'
            f"average, r={rate:g}</text>"
        )
        legend_y += 16
    parts.append(
        f'<circle cx="{width - right - 130}" cy="{legend_y}" r="4" fill="rgb(200,30,30)"/>'
    )
    parts.append(
        f'<text x="{width - right - 120}" y="{legend_y + 4}" font-size="11">ratio</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts)


@dataclass
class SuiteReport:
    """Outcome of one verification sweep."""

    suite: str
    checked: int
    violations: int
    excluded: int
    max_violation: float
    worst_case: dict | None
    notes: tuple = ()

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _marginal_after_channel(rho: np.ndarray, dim_a: int, dim_b: int, op: KrausOperation) -> np.ndarray:
    # Brute-force (I (x) F_n) rho (I (x) F_n)^dagger route, kept independent
    # of the engine's contraction on purpose.
    eye = np.eye(dim_a, dtype=np.complex128)
    total = np.zeros((dim_a, dim_a), dtype=np.complex128)
    for f in op.kraus:
        big = tensor_product(eye, f)
        total += partial_trace(big @ rho @ big.conj().T, dim_a, dim_b, "A")
    return total


def verify_theorem1(samples: int, seed: int, operations_per_state: int = 100) -> SuiteReport:
    """Block-diagonal states never hand A coherence; all others can.

    Forward: random block-diagonal states against random operations must keep
    A's post-operation coherence below 1e-8. Converse: random states failing
    the block test must admit a coherence-creating projector within the
    search budget.
    """
    rng = SeededRng(seed, 0)
    dim_a = dim_b = 2
    checked = violations = excluded = 0
    max_violation = 0.0
    worst = None
    forward_worst = 0.0
    ops = [random_kraus_operation(dim_b, rng) for _ in range(operations_per_state)]
    for _ in range(samples):
        state = random_incoherent_quantum_state(dim_a, dim_b, rng)
        for op in ops:
            checked += 1
            try:
                state_a, _ = rcc.post_operation_state_a(state, op, dim_a, dim_b)
            except ZeroProbability:
                excluded += 1
                continue
            achieved = l1_coherence(state_a)
            forward_worst = max(forward_worst, achieved)
            if achieved >= 1e-8:
                violations += 1
                if achieved > max_violation:
                    max_violation = achieved
                    worst = {
                        "direction": "forward",
                        "state": matrix_to_json(state.matrix),
                        "channel": kraus_operation_to_json(op),
                        "post_coherence": achieved,
                    }
    exhausted = 0
    converse_ok = 0
    for _ in range(samples):
        state = random_noncq_state(dim_a, dim_b, rng)
        checked += 1
        try:
            op = rcc.find_creating_operation(state, dim_a, dim_b)
        except SearchExhausted as exc:
            exhausted += 1
            violations += 1
            if exc.best_value > max_violation:
                max_violation = exc.best_value
                worst = {
                    "direction": "converse",
                    "state": matrix_to_json(state.matrix),
                    "best_coherence": exc.best_value,
                }
            continue
        if op is None:
            violations += 1
            worst = {"direction": "converse-misclassified", "state": matrix_to_json(state.matrix)}
            continue
        converse_ok += 1
    notes = (
        f"forward: max post-coherence {forward_worst:.3e} over {samples * operations_per_state} checks",
        f"converse: {converse_ok}/{samples} searches succeeded, {exhausted} budget exhaustions",
    )
    return SuiteReport("theorem1", checked, violations, excluded, max_violation, worst, notes)


def verify_theorem2(samples: int, seed: int) -> SuiteReport:
    """Commutator criterion agrees with directly computed post-coherence.

    Instances whose achieved coherence falls inside the ambiguity band
    [1e-9, 1e-6] are excluded and counted; everything else must classify
    identically on both routes.
    """
    rng = SeededRng(seed, 0)
    checked = violations = excluded = 0
    max_violation = 0.0
    worst = None
    per_dim = max(1, samples // 2)
    for dim in (2, 3):
        for _ in range(per_dim):
            psi = random_schmidt_state(dim, dim, rng)
            op = random_kraus_operation(dim, rng)
            checked += 1
            try:
                state_a, _ = rcc.post_operation_state_a(psi, op)
            except ZeroProbability:
                excluded += 1
                continue
            achieved = l1_coherence(state_a)
            if 1e-9 <= achieved <= 1e-6:
                excluded += 1
                continue
            predicted, _ = creates_coherence(psi, op)
            if predicted != (achieved > 1e-6):
                violations += 1
                if achieved > max_violation:
                    max_violation = achieved
                    worst = {
                        "state": state_to_json(psi),
                        "channel": kraus_operation_to_json(op),
                        "post_coherence": achieved,
                        "predicted": predicted,
                    }
    fraction = excluded / checked if checked else 0.0
    notes = (f"excluded fraction {fraction:.4%} (ambiguity band [1e-9, 1e-6])",)
    return SuiteReport("theorem2", checked, violations, excluded, max_violation, worst, notes)


def verify_lemma1(samples: int, seed: int) -> SuiteReport:
    """Per-outcome coherence never exceeds its Cauchy bound (tolerance 1e-10)."""
    rng = SeededRng(seed, 0)
    checked = violations = excluded = 0
    max_violation = 0.0
    worst = None
    for dim in (2, 3, 4):
        for _ in range(samples):
            psi = random_schmidt_state(dim, dim, rng)
            op = random_kraus_operation(dim, rng)
            checked += 1
            try:
                state_a, _ = rcc.post_operation_state_a(psi, op)
                bound = rcc.outcome_coherence_bound(psi, op)
            except ZeroProbability:
                excluded += 1
                continue
            gap = l1_coherence(state_a) - bound
            if gap > 1e-10:
                violations += 1
                if gap > max_violation:
                    max_violation = gap
                    worst = {
                        "state": state_to_json(psi),
                        "channel": kraus_operation_to_json(op),
                        "excess": gap,
                    }
    return SuiteReport("lemma1", checked, violations, excluded, max_violation, worst)


def verify_theorem3(samples: int, seed: int) -> SuiteReport:
    """Average ordering: achieved <= branch-resolved bound <= partner bound."""
    rng = SeededRng(seed, 0)
    checked = violations = 0
    max_violation = 0.0
    worst = None
    for dim in (2, 3, 4):
        for k in range(samples):
            psi = random_schmidt_state(dim, dim, rng)
            if k % 2 == 0:
                channel = random_tp_channel(dim, rng)
                channel_json = kraus_operation_to_json(channel)
            else:
                channel = random_channel_ensemble(dim, rng)
                channel_json = ensemble_to_json(channel)
            checked += 1
            average = rcc.average_coherence(psi, channel)
            tight = rcc.tight_average_bound(psi, channel)
            partner_bound = rcc.average_coherence_bound(psi, channel)
            gap = max(average - tight, tight - partner_bound)
            if gap > 1e-10:
                violations += 1
                if gap > max_violation:
                    max_violation = gap
                    worst = {
                        "state": state_to_json(psi),
                        "channel": channel_json,
                        "excess": gap,
                    }
    return SuiteReport("theorem3", checked, violations, 0, max_violation, worst)


def verify_theorem4(samples: int, seed: int) -> SuiteReport:
    """Two-qubit factorization: average equals entanglement times partner average."""
    rng = SeededRng(seed, 0)
    checked = violations = 0
    max_violation = 0.0
    worst = None
    for _ in range(samples):
        psi = random_schmidt_state(2, 2, rng)
        channel = random_tp_channel(2, rng)
        checked += 1
        average = rcc.average_coherence(psi, channel)
        ent = concurrence(psi)
        maxent = rcc.average_coherence(rcc.maximally_entangled_partner(psi), channel)
        dev = abs(average - ent * maxent)
        if dev >= 1e-9:
            violations += 1
            if dev > max_violation:
                max_violation = dev
                worst = {
                    "state": state_to_json(psi),
                    "channel": kraus_operation_to_json(channel),
                    "deviation": dev,
                }
    return SuiteReport("theorem4", checked, violations, 0, max_violation, worst)


def verify_nosignal(samples: int, seed: int) -> SuiteReport:
    """Without post-selection a trace-preserving channel leaves A's marginal alone."""
    rng = SeededRng(seed, 0)
    checked = violations = 0
    max_violation = 0.0
    worst = None
    for k in range(samples):
        dim = 2 if k % 2 == 0 else 3
        rho = random_density_matrix(dim * dim, rng)
        channel = random_tp_channel(dim, rng)
        checked += 1
        before = partial_trace(rho.matrix, dim, dim, "A")
        after = _marginal_after_channel(rho.matrix, dim, dim, channel)
        dev = float(np.max(np.abs(after - before)))
        if dev >= 1e-10:
            violations += 1
            if dev > max_violation:
                max_violation = dev
                worst = {
                    "state": matrix_to_json(rho.matrix),
                    "channel": kraus_operation_to_json(channel),
                    "deviation": dev,
                }
    return SuiteReport("nosignal", checked, violations, 0, max_violation, worst)


_SUITE_RUNNERS = {
    "theorem1": verify_theorem1,
    "theorem2": verify_theorem2,
    "lemma1": verify_lemma1,
    "theorem3": verify_theorem3,
    "theorem4": verify_theorem4,
    "nosignal": verify_nosignal,
}


def run_verify(suite: str, samples: int, seed: int) -> SuiteReport:
    """Run one named verification sweep."""
    if suite not in _SUITE_RUNNERS:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(VERIFY_SUITES)}")
    if samples < 1:
        raise ValueError(f"samples must be at least 1, got {samples}")
    return _SUITE_RUNNERS[suite](samples, seed)
