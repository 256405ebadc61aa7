"""Statistics reducing an evaluated chain result to one real number.

Built-ins cover distribution distances between source rows, single-column
proportion gaps, value-weighted destination averages and tuple counting.
User statistics register by name and receive the full path matrix, so they
can reach domain labels and numeric values.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .relations import EngineError, PathMatrix, PATH_COUNT, SEMANTICS


class StatisticError(EngineError):
    """Invalid statistic name, parameters or input."""


class UndefinedStatisticError(StatisticError):
    """The statistic is undefined on this result (e.g. a group with no paths)."""


def _row_distribution(p: PathMatrix, label: str) -> np.ndarray:
    row = p.row(label).astype(np.float64)
    total = row.sum()
    if total <= 0:
        raise UndefinedStatisticError(f"source row '{label}' has no paths")
    return row / total


def l1_distribution_distance(p: PathMatrix, group_a: str, group_b: str) -> float:
    """L1 distance between two source rows, each normalized to a distribution.

    Ranges over [0, 2]; 0 for identical distributions, 2 for disjoint support.
    """
    return float(
        np.abs(_row_distribution(p, group_a) - _row_distribution(p, group_b)).sum()
    )


def proportion_difference(
    p: PathMatrix, group_a: str, group_b: str, target_col: str
) -> float:
    """Percentage-point gap between two groups' shares of one destination column."""
    k = p.col_domain.index_of(target_col)
    return float(
        100.0 * (_row_distribution(p, group_a)[k] - _row_distribution(p, group_b)[k])
    )


def weighted_average_destination(p: PathMatrix, group: str) -> float:
    """Average destination value for one source row, weighted by path counts."""
    if p.col_domain.numeric_values is None:
        raise StatisticError(
            f"destination domain '{p.col_domain.name}' carries no numeric values"
        )
    values = np.asarray(p.col_domain.numeric_values, dtype=np.float64)
    return float(_row_distribution(p, group) @ values)


def l1_group_vs_rest(p: PathMatrix, group: str) -> float:
    """L1 distance between one source row and the aggregate of all other rows."""
    i = p.row_domain.index_of(group)
    row = p.counts[i].astype(np.float64)
    rest = p.counts.sum(axis=0, dtype=np.float64) - row
    row_total, rest_total = row.sum(), rest.sum()
    if row_total <= 0:
        raise UndefinedStatisticError(f"source row '{group}' has no paths")
    if rest_total <= 0:
        raise UndefinedStatisticError(f"complement of '{group}' has no paths")
    return float(np.abs(row / row_total - rest / rest_total).sum())


def tuple_count(p: PathMatrix) -> float:
    """Total number of result tuples.

    Sums all path counts; under boolean semantics the counts are already
    clamped to 0/1, so this is the number of reachable pairs.
    """
    return float(p.counts.sum())


@dataclass(frozen=True)
class RegisteredStatistic:
    name: str
    func: Callable[..., float]
    param_names: tuple[str, ...]
    semantics: str | None  # required evaluation semantics; None = either


_REGISTRY: dict[str, RegisteredStatistic] = {}


def register_statistic(
    name: str,
    func: Callable[..., float],
    param_names: tuple[str, ...] = (),
    semantics: str | None = PATH_COUNT,
    replace: bool = False,
) -> None:
    """Make a statistic addressable by name (from specs and the CLI)."""
    if semantics is not None and semantics not in SEMANTICS:
        raise StatisticError(f"unknown semantics '{semantics}'")
    if name in _REGISTRY and not replace:
        raise StatisticError(f"statistic '{name}' is already registered")
    _REGISTRY[name] = RegisteredStatistic(name, func, tuple(param_names), semantics)


def registered_statistics() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


@dataclass(frozen=True)
class StatisticSpec:
    """A statistic by name plus its label parameters."""

    name: str
    parameters: Mapping[str, str] = field(default_factory=dict)

    def resolve(self) -> RegisteredStatistic:
        if self.name not in _REGISTRY:
            raise StatisticError(
                f"unknown statistic '{self.name}' "
                f"(registered: {', '.join(registered_statistics())})"
            )
        registered = _REGISTRY[self.name]
        for param in registered.param_names:
            if param not in self.parameters:
                raise StatisticError(
                    f"statistic '{self.name}' requires parameter '{param}'"
                )
        for param in self.parameters:
            if param not in registered.param_names:
                raise StatisticError(
                    f"statistic '{self.name}' got unexpected parameter '{param}'"
                )
        return registered

    def compute(self, p: PathMatrix) -> float:
        registered = self.resolve()
        return float(registered.func(p, **dict(self.parameters)))


register_statistic(
    "l1_distribution_distance",
    l1_distribution_distance,
    ("group_a", "group_b"),
    PATH_COUNT,
)
register_statistic(
    "proportion_difference",
    proportion_difference,
    ("group_a", "group_b", "target_col"),
    PATH_COUNT,
)
register_statistic(
    "weighted_average_destination",
    weighted_average_destination,
    ("group",),
    PATH_COUNT,
)
register_statistic("l1_group_vs_rest", l1_group_vs_rest, ("group",), PATH_COUNT)
register_statistic("tuple_count", tuple_count, (), None)
