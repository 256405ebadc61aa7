"""Significance testing of chain queries by restricted randomization.

For each randomization point of the query's chain, k null samples are drawn,
the statistic is evaluated on each, and an empirical p-value is computed
from the null values. Reports are deterministic for a given master seed,
independent of worker count or scheduling.
"""
from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass

from typing import Sequence

import numpy as np

from .randomize import (
    KIND_RELATION,
    RandomizationPoint,
    SwapChainConfig,
    enumerate_randomization_points,
    point_is_degenerate,
    randomize_chain,
)
from .relations import (
    BinaryRelation,
    ChainQuery,
    EngineError,
    PATH_COUNT,
    evaluate_chain,
)
from .stats import StatisticSpec, UndefinedStatisticError

LOWER = "lower"
UPPER = "upper"
TWO_SIDED = "two_sided"
TAILS = (LOWER, UPPER, TWO_SIDED)

DEFAULT_SAMPLES = 999
QUICK_SAMPLES = 30


def empirical_p_value(original: float, null_values: Sequence[float], tail: str) -> float:
    """Empirical p-value of the original statistic against null samples.

    With k null values, the lower tail is (#{v <= original} + 1) / (k + 1),
    the upper tail mirrors it, and the two-sided value doubles the smaller
    tail (capped at 1). Ties count in both tails.
    """
    if tail not in TAILS:
        raise EngineError(f"unknown tail '{tail}'")
    arr = np.asarray(null_values, dtype=np.float64)
    if arr.size == 0:
        raise EngineError("cannot compute a p-value from an empty null set")
    k = arr.size
    lower = (int(np.count_nonzero(arr <= original)) + 1) / (k + 1)
    upper = (int(np.count_nonzero(arr >= original)) + 1) / (k + 1)
    if tail == LOWER:
        return lower
    if tail == UPPER:
        return upper
    return min(1.0, 2.0 * min(lower, upper))


@dataclass(frozen=True)
class HypothesisSpec:
    """A chain query, a statistic, and how to judge its null distribution."""

    query: ChainQuery
    statistic: StatisticSpec
    tail: str
    samples_k: int = DEFAULT_SAMPLES
    master_seed: int = 0
    alpha: float = 0.05
    attempts_multiplier: int = 10

    def __post_init__(self) -> None:
        if self.tail not in TAILS:
            raise EngineError(f"unknown tail '{self.tail}'")
        if self.samples_k < 1:
            raise EngineError("samples_k must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise EngineError("alpha must lie in (0, 1)")
        if self.attempts_multiplier < 1:
            raise EngineError("attempts_multiplier must be >= 1")
        registered = self.statistic.resolve()
        if registered.semantics is not None and registered.semantics != self.query.semantics:
            raise EngineError(
                f"statistic '{self.statistic.name}' requires "
                f"{registered.semantics} semantics but the query declares "
                f"{self.query.semantics}"
            )


@dataclass(frozen=True)
class PointResult:
    """Null-distribution summary of one randomization point."""

    point: RandomizationPoint
    label: str
    original_value: float
    null_values: tuple[float, ...]
    null_mean: float
    null_std: float
    p_value: float
    degenerate: bool
    excluded_count: int
    equivalent_label: str | None = None


@dataclass(frozen=True)
class SignificanceReport:
    statistic_name: str
    tail: str
    samples_k: int
    master_seed: int
    alpha: float
    points: tuple[PointResult, ...]

    def machine_text(self, include_nulls: bool = False) -> str:
        """One tab-separated record per randomization point, fixed field order."""
        header = "point\toriginal\tmean\tstd\tp_value\texcluded\tdegenerate"
        if include_nulls:
            header += "\tnull_values"
        lines = [header]
        for pr in self.points:
            fields = [
                pr.label,
                _fmt(pr.original_value),
                _fmt(pr.null_mean),
                _fmt(pr.null_std),
                _fmt(pr.p_value),
                str(pr.excluded_count),
                "true" if pr.degenerate else "false",
            ]
            if include_nulls:
                fields.append(",".join(_fmt(v) for v in pr.null_values))
            lines.append("\t".join(fields))
        return "\n".join(lines) + "\n"

    def human_text(self) -> str:
        title = (
            f"statistic={self.statistic_name} tail={self.tail} "
            f"k={self.samples_k} seed={self.master_seed} alpha={_fmt(self.alpha)}"
        )
        rows = [("point", "original", "mean", "std", "p_value", "notes")]
        for pr in self.points:
            notes = []
            if pr.p_value <= self.alpha:
                notes.append("significant")
            if pr.degenerate:
                notes.append("degenerate null")
            if pr.excluded_count:
                notes.append(f"{pr.excluded_count} undefined samples excluded")
            if pr.equivalent_label:
                notes.append(f"same null model as {pr.equivalent_label}")
            rows.append(
                (
                    pr.label,
                    _fmt(pr.original_value),
                    _fmt(pr.null_mean),
                    _fmt(pr.null_std),
                    _fmt(pr.p_value),
                    "; ".join(notes),
                )
            )
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = [title]
        for r in rows:
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
        return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


def point_label(chain: Sequence[BinaryRelation], point: RandomizationPoint) -> str:
    if point.kind == KIND_RELATION:
        rel = chain[point.position]
        return f"sw({rel.name or f'R{point.position}'})"
    return f"sw(I{point.position + 1})"


def run_hypothesis(spec: HypothesisSpec, workers: int = 1) -> SignificanceReport:
    """Evaluate the hypothesis at every randomization point of its chain."""
    return run_hypothesis_batch([spec], workers=workers)[0]


def run_hypothesis_batch(
    specs: Sequence[HypothesisSpec], workers: int = 1
) -> list[SignificanceReport]:
    """Run several hypotheses that share one query, seed and sample count.

    The null chains are sampled once per point and every statistic is
    evaluated on each sample, so the per-statistic reports are identical to
    independent :func:`run_hypothesis` runs.
    """
    if not specs:
        return []
    base = specs[0]
    for other in specs[1:]:
        if (
            other.query != base.query
            or other.samples_k != base.samples_k
            or other.master_seed != base.master_seed
            or other.attempts_multiplier != base.attempts_multiplier
        ):
            raise EngineError(
                "batched hypotheses must share query, samples_k, master_seed "
                "and attempts_multiplier"
            )
    query = base.query
    query.validate()
    original_matrix = query.evaluate()
    originals = [spec.statistic.compute(original_matrix) for spec in specs]
    stat_specs = [spec.statistic for spec in specs]
    enumerated = enumerate_randomization_points(query.relations)
    per_spec_points: list[list[PointResult]] = [[] for _ in specs]
    for ep in enumerated:
        label = point_label(query.relations, ep.point)
        equivalent = (
            point_label(
                query.relations,
                RandomizationPoint(KIND_RELATION, ep.equivalent_relation),
            )
            if ep.equivalent_relation is not None
            else None
        )
        degenerate = point_is_degenerate(query.relations, ep.point)
        try:
            values = _point_samples(query, ep.point, base, stat_specs, workers)
        except EngineError as exc:
            raise EngineError(f"at randomization point {label}: {exc}") from exc
        for s, spec in enumerate(specs):
            nulls = tuple(row[s] for row in values if row[s] is not None)
            excluded = base.samples_k - len(nulls)
            if not nulls:
                raise EngineError(
                    f"at randomization point {label}: all {base.samples_k} null "
                    f"samples are undefined for statistic '{spec.statistic.name}'"
                )
            arr = np.asarray(nulls, dtype=np.float64)
            std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
            per_spec_points[s].append(
                PointResult(
                    point=ep.point,
                    label=label,
                    original_value=originals[s],
                    null_values=nulls,
                    null_mean=float(arr.mean()),
                    null_std=std,
                    p_value=empirical_p_value(originals[s], arr, spec.tail),
                    degenerate=degenerate,
                    excluded_count=excluded,
                    equivalent_label=equivalent,
                )
            )
    return [
        SignificanceReport(
            statistic_name=spec.statistic.name,
            tail=spec.tail,
            samples_k=spec.samples_k,
            master_seed=spec.master_seed,
            alpha=spec.alpha,
            points=tuple(per_spec_points[s]),
        )
        for s, spec in enumerate(specs)
    ]


def _sample_range(
    query: ChainQuery,
    point: RandomizationPoint,
    master_seed: int,
    attempts_multiplier: int,
    start: int,
    stop: int,
    stat_specs: Sequence[StatisticSpec],
) -> list[list[float | None]]:
    out = []
    for index in range(start, stop):
        cfg = SwapChainConfig(attempts_multiplier, master_seed, index)
        chain = randomize_chain(query.relations, point, cfg)
        matrix = evaluate_chain(chain, query.selection, query.semantics)
        row: list[float | None] = []
        for spec in stat_specs:
            try:
                row.append(spec.compute(matrix))
            except UndefinedStatisticError:
                row.append(None)
        out.append(row)
    return out


def _point_samples(
    query: ChainQuery,
    point: RandomizationPoint,
    base: HypothesisSpec,
    stat_specs: Sequence[StatisticSpec],
    workers: int,
) -> list[list[float | None]]:
    k = base.samples_k
    if workers <= 1:
        return _sample_range(
            query, point, base.master_seed, base.attempts_multiplier, 0, k, stat_specs
        )
    chunk = max(1, math.ceil(k / (workers * 4)))
    spans = [(lo, min(lo + chunk, k)) for lo in range(0, k, chunk)]
    results: dict[int, list[list[float | None]]] = {}
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {
            pool.submit(
                _sample_range,
                query,
                point,
                base.master_seed,
                base.attempts_multiplier,
                lo,
                hi,
                stat_specs,
            ): lo
            for lo, hi in spans
        }
        for fut in concurrent.futures.as_completed(futures):
            results[futures[fut]] = fut.result()
    out: list[list[float | None]] = []
    for lo, _ in spans:
        out.extend(results[lo])
    return out


def expected_path_matrix(
    query: ChainQuery,
    point: RandomizationPoint,
    samples_k: int,
    master_seed: int = 0,
    attempts_multiplier: int = 10,
) -> np.ndarray:
    """Entrywise mean of the path-count matrix over null samples at one point."""
    if samples_k < 1:
        raise EngineError("samples_k must be >= 1")
    acc: np.ndarray | None = None
    for index in range(samples_k):
        cfg = SwapChainConfig(attempts_multiplier, master_seed, index)
        chain = randomize_chain(query.relations, point, cfg)
        counts = evaluate_chain(chain, query.selection, PATH_COUNT).counts
        if acc is None:
            acc = counts.astype(np.float64)
        else:
            acc += counts
    assert acc is not None
    return acc / samples_k
