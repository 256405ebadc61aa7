"""Null-model samplers for single relations and for chain join junctions.

Three samplers are provided: the margin-preserving swap chain (an MCMC walk
over all 0/1 matrices sharing the original's row and column sums), uniform
row permutation, and uniform column permutation. A chain is randomized at
exactly one point at a time: either one relation is swap-randomized, or one
junction between adjacent relations is given a uniformly random relabeling
(realized as a column permutation of the left relation).

All samplers are pure functions of their seed material, so samples may be
drawn concurrently in any order and still reproduce bit-identically.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ._swapkernel import run_swap_chain
from .relations import BinaryRelation, EngineError

KIND_RELATION = "relation"
KIND_JUNCTION = "junction"
_KIND_CODES = {KIND_RELATION: 0, KIND_JUNCTION: 1}


@dataclass(frozen=True)
class SwapChainConfig:
    """Swap-chain sampling parameters.

    The chain attempts ``attempts_multiplier`` times the number of ones in
    the matrix; rejected attempts count (they are the self-loops that make
    the chain aperiodic).
    """

    attempts_multiplier: int = 10
    master_seed: int = 0
    sample_index: int = 0

    def __post_init__(self) -> None:
        if self.attempts_multiplier < 1:
            raise EngineError("attempts_multiplier must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise EngineError("master_seed must be a 64-bit unsigned integer")
        if self.sample_index < 0:
            raise EngineError("sample_index must be non-negative")


@dataclass(frozen=True)
class RandomizationPoint:
    """What gets randomized: one relation, or one junction between relations.

    Junction ``j`` sits between relations ``j`` and ``j + 1``.
    """

    kind: str
    position: int

    def __post_init__(self) -> None:
        if self.kind not in _KIND_CODES:
            raise EngineError(f"unknown randomization kind '{self.kind}'")
        if self.position < 0:
            raise EngineError("randomization position must be non-negative")


@dataclass(frozen=True)
class EnumeratedPoint:
    """A randomization point plus its null-model equivalence annotation.

    ``equivalent_relation`` marks a kept junction whose null model coincides
    with swap-randomizing that relation (the left neighbor has exactly one 1
    per column).
    """

    point: RandomizationPoint
    equivalent_relation: int | None = None


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))


def _derive_seed(master_seed: int, kind_code: int, position: int) -> int:
    ss = np.random.SeedSequence((int(master_seed), kind_code, position))
    return int(ss.generate_state(1, np.uint64)[0])


def swap_randomize(a: BinaryRelation, cfg: SwapChainConfig = SwapChainConfig()) -> BinaryRelation:
    """Sample a 0/1 matrix with the same row and column sums as ``a``.

    One proposal draws two edges independently at random and exchanges their
    columns when the four cells form a checkerboard; everything else is a
    rejection. Relations with fewer than two edges come back unchanged.
    """
    m = a.edge_count
    if m < 2:
        return a
    attempts = cfg.attempts_multiplier * m
    rng = _rng((cfg.master_seed, cfg.sample_index))
    pick_a = rng.integers(0, m, size=attempts, dtype=np.int64)
    pick_b = rng.integers(0, m, size=attempts, dtype=np.int64)
    rows = a.edge_rows.copy()
    cols = a.edge_cols.copy()
    present = a.dense.copy()
    run_swap_chain(rows, cols, present, pick_a, pick_b)
    return BinaryRelation(a.row_domain, a.col_domain, rows, cols, name=a.name)


def row_permute(a: BinaryRelation, seed) -> BinaryRelation:
    """Reorder the rows of ``a`` by a uniformly random permutation."""
    if a.n_rows <= 1:
        return a
    perm = _rng(seed).permutation(a.n_rows)
    return BinaryRelation(
        a.row_domain, a.col_domain, perm[a.edge_rows], a.edge_cols, name=a.name
    )


def column_permute(a: BinaryRelation, seed) -> BinaryRelation:
    """Reorder the columns of ``a`` by a uniformly random permutation."""
    if a.n_cols <= 1:
        return a
    perm = _rng(seed).permutation(a.n_cols)
    return BinaryRelation(
        a.row_domain, a.col_domain, a.edge_rows, perm[a.edge_cols], name=a.name
    )


def randomize_chain(
    chain: Sequence[BinaryRelation],
    point: RandomizationPoint,
    cfg: SwapChainConfig,
) -> tuple[BinaryRelation, ...]:
    """Randomize one relation or one junction, keeping all else fixed.

    Every (point, sample_index) pair gets an independent deterministic
    stream derived from the master seed.
    """
    relations = tuple(chain)
    n = len(relations)
    if point.kind == KIND_RELATION:
        if point.position >= n:
            raise EngineError(
                f"invalid randomization point: relation {point.position} "
                f"in a chain of {n}"
            )
        seed = _derive_seed(cfg.master_seed, _KIND_CODES[KIND_RELATION], point.position)
        new = swap_randomize(relations[point.position], replace(cfg, master_seed=seed))
    else:
        if point.position >= n - 1:
            raise EngineError(
                f"invalid randomization point: junction {point.position} "
                f"in a chain of {n}"
            )
        seed = _derive_seed(cfg.master_seed, _KIND_CODES[KIND_JUNCTION], point.position)
        # A random relabeling across the junction equals a column permutation
        # of the left relation.
        new = column_permute(relations[point.position], (seed, cfg.sample_index))
    return relations[: point.position] + (new,) + relations[point.position + 1 :]


def enumerate_randomization_points(
    chain: Sequence[BinaryRelation],
) -> list[EnumeratedPoint]:
    """All distinct randomization points of a chain, in chain order.

    Relations and junctions interleave. A junction whose right neighbor has
    exactly one 1 per row is dropped: relabeling across it reproduces the
    neighbor's own margin class, so the null model already appears as that
    relation's point. A junction whose left neighbor has exactly one 1 per
    column is kept but annotated as equivalent to that relation's point.
    """
    relations = tuple(chain)
    if not relations:
        raise EngineError("cannot enumerate points of an empty chain")
    out = [EnumeratedPoint(RandomizationPoint(KIND_RELATION, 0))]
    for j in range(len(relations) - 1):
        left, right = relations[j], relations[j + 1]
        if not right.one_per_row:
            equivalent = j if left.one_per_col else None
            out.append(
                EnumeratedPoint(
                    RandomizationPoint(KIND_JUNCTION, j),
                    equivalent_relation=equivalent,
                )
            )
        out.append(EnumeratedPoint(RandomizationPoint(KIND_RELATION, j + 1)))
    return out


def has_legal_swap(a: BinaryRelation) -> bool:
    """True iff some pair of edges admits the checkerboard swap.

    Equivalent to the existence of two rows with non-nested supports; checked
    with packed row bitsets.
    """
    if a.edge_count < 2 or a.n_rows < 2 or a.n_cols < 2:
        return False
    bits = np.packbits(a.dense, axis=1)
    for i in range(a.n_rows - 1):
        rest = bits[i + 1 :]
        inter = rest & bits[i]
        nested = np.all(inter == bits[i], axis=1) | np.all(inter == rest, axis=1)
        if not nested.all():
            return True
    return False


def point_is_degenerate(
    chain: Sequence[BinaryRelation], point: RandomizationPoint
) -> bool:
    """True when the point's null model has a single state."""
    relations = tuple(chain)
    if point.kind == KIND_RELATION:
        return not has_legal_swap(relations[point.position])
    return relations[point.position].col_domain.size <= 1
