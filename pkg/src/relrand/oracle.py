"""Exhaustive ground truth on tiny instances.

Enumerates a relation's full margin class (every 0/1 matrix with the same
row and column sums), the row/column permutation sets, exact null
distributions and exact p-values, and checks the combinatorial identities
relating swap randomization to permutations. Everything here is test
support: it trades scale for certainty.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .randomize import KIND_RELATION, RandomizationPoint
from .relations import (
    BinaryRelation,
    ChainQuery,
    EngineError,
    PATH_COUNT,
    evaluate_chain,
)
from .stats import StatisticSpec, UndefinedStatisticError

DEFAULT_MEMBER_LIMIT = 200_000


class EnumerationLimitError(EngineError):
    """The instance's state space exceeds the enumeration limit."""


@dataclass(frozen=True)
class MarginClass:
    """A relation together with every matrix sharing its margins."""

    base: BinaryRelation
    members: tuple[BinaryRelation, ...]

    @property
    def size(self) -> int:
        return len(self.members)


def _enumerate_margin_dense(
    row_sums: Sequence[int], col_sums: Sequence[int], limit: int
) -> list[np.ndarray]:
    rows = [int(r) for r in row_sums]
    cols = np.asarray(col_sums, dtype=np.int64)
    n_rows, n_cols = len(rows), cols.size
    if sum(rows) != int(cols.sum()):
        return []
    out: list[np.ndarray] = []
    work = np.zeros((n_rows, n_cols), dtype=np.uint8)

    def fill(i: int, caps: np.ndarray) -> None:
        if i == n_rows:
            out.append(work.copy())
            if len(out) > limit:
                raise EnumerationLimitError(
                    f"margin class exceeds the limit of {limit} members"
                )
            return
        rows_left = n_rows - i - 1
        open_cols = np.flatnonzero(caps > 0)
        for chosen in itertools.combinations(open_cols.tolist(), rows[i]):
            caps[list(chosen)] -= 1
            # every remaining column must still fit in the remaining rows
            if not rows_left or caps.max(initial=0) <= rows_left:
                work[i, list(chosen)] = 1
                fill(i + 1, caps)
                work[i, list(chosen)] = 0
            caps[list(chosen)] += 1

    fill(0, cols.copy())
    return out


def enumerate_margin_class(
    a: BinaryRelation, member_limit: int = DEFAULT_MEMBER_LIMIT
) -> MarginClass:
    """Every 0/1 matrix with a's row and column sums, as relations.

    Raises :class:`EnumerationLimitError` when the class is larger than
    ``member_limit``.
    """
    dense_members = _enumerate_margin_dense(
        a.row_sums.tolist(), a.col_sums.tolist(), member_limit
    )
    members = tuple(
        BinaryRelation.from_dense(a.row_domain, a.col_domain, d, name=a.name)
        for d in dense_members
    )
    return MarginClass(base=a, members=members)


def count_margin_matrices(row_sums: Sequence[int], col_sums: Sequence[int]) -> int:
    """Count 0/1 matrices with the given margins without materializing them.

    Recursion over rows on the multiset of remaining column capacities; the
    independent cross-check for the backtracking enumeration.
    """
    rows = tuple(int(r) for r in row_sums)
    caps = tuple(sorted((int(c) for c in col_sums), reverse=True))
    if any(r < 0 for r in rows) or any(c < 0 for c in caps):
        return 0
    if sum(rows) != sum(caps):
        return 0
    if any(r > len(caps) for r in rows) or any(c > len(rows) for c in caps):
        return 0

    @lru_cache(maxsize=None)
    def rec(i: int, caps: tuple[int, ...]) -> int:
        if i == len(rows):
            return 1
        need = rows[i]
        groups = [(value, len(list(g))) for value, g in itertools.groupby(caps)]
        positive = [(v, n) for v, n in groups if v > 0]
        total = 0
        for takes in _take_splits(need, [n for _, n in positive]):
            ways = 1
            taken: list[int] = []
            for (value, n), t in zip(positive, takes):
                ways *= math.comb(n, t)
                taken.extend([value - 1] * t + [value] * (n - t))
            taken.extend(v for v, n in groups if v == 0 for _ in range(n))
            total += ways * rec(i + 1, tuple(sorted(taken, reverse=True)))
        return total

    def _take_splits(need: int, sizes: list[int]):
        if not sizes:
            if need == 0:
                yield ()
            return
        first = sizes[0]
        for t in range(min(first, need) + 1):
            for rest in _take_splits(need - t, sizes[1:]):
                yield (t,) + rest

    return rec(0, caps)


def margin_class_size(a: BinaryRelation) -> int:
    return count_margin_matrices(a.row_sums.tolist(), a.col_sums.tolist())


def _legal_swaps(dense: np.ndarray) -> Iterable[np.ndarray]:
    rows, cols = np.nonzero(dense)
    m = rows.size
    for x in range(m):
        for y in range(x + 1, m):
            i, j = int(rows[x]), int(cols[x])
            k, l = int(rows[y]), int(cols[y])
            if i == k or j == l or dense[i, l] or dense[k, j]:
                continue
            neighbor = dense.copy()
            neighbor[i, j] = neighbor[k, l] = 0
            neighbor[i, l] = neighbor[k, j] = 1
            yield neighbor


def swap_graph_connected(mc: MarginClass) -> bool:
    """True iff single swaps connect the margin class (BFS from the base)."""
    index = {member.canonical_bytes: n for n, member in enumerate(mc.members)}
    base_key = mc.base.canonical_bytes
    if base_key not in index:
        return False
    seen = {base_key}
    frontier = [mc.base.dense.astype(np.uint8)]
    while frontier:
        dense = frontier.pop()
        for neighbor in _legal_swaps(dense):
            rel = BinaryRelation.from_dense(
                mc.base.row_domain, mc.base.col_domain, neighbor
            )
            key = rel.canonical_bytes
            if key not in index:
                return False
            if key not in seen:
                seen.add(key)
                frontier.append(neighbor)
    return len(seen) == len(mc.members)


def permutation_matrices(n: int, limit: int = DEFAULT_MEMBER_LIMIT) -> list[np.ndarray]:
    """All n-by-n permutation matrices (the margin class of the identity)."""
    if math.factorial(n) > limit:
        raise EnumerationLimitError(f"{n}! permutation matrices exceed the limit {limit}")
    out = []
    for sigma in itertools.permutations(range(n)):
        mat = np.zeros((n, n), dtype=np.uint8)
        mat[np.arange(n), sigma] = 1
        out.append(mat)
    return out


def _unique_dense(matrices: Iterable[np.ndarray]) -> list[np.ndarray]:
    seen: dict[bytes, np.ndarray] = {}
    for mat in matrices:
        seen.setdefault(mat.tobytes(), mat)
    return list(seen.values())


def swap_set_dense(a: BinaryRelation, limit: int = DEFAULT_MEMBER_LIMIT) -> list[np.ndarray]:
    """The margin class of ``a`` as dense uint8 matrices."""
    return _enumerate_margin_dense(a.row_sums.tolist(), a.col_sums.tolist(), limit)


def row_permutation_set(a: BinaryRelation, limit: int = DEFAULT_MEMBER_LIMIT) -> list[np.ndarray]:
    """All distinct row reorderings of ``a`` as dense uint8 matrices."""
    if math.factorial(a.n_rows) > limit:
        raise EnumerationLimitError(
            f"{a.n_rows}! row permutations exceed the limit {limit}"
        )
    dense = a.dense.astype(np.uint8)
    return _unique_dense(
        dense[list(sigma), :] for sigma in itertools.permutations(range(a.n_rows))
    )


def col_permutation_set(a: BinaryRelation, limit: int = DEFAULT_MEMBER_LIMIT) -> list[np.ndarray]:
    """All distinct column reorderings of ``a`` as dense uint8 matrices."""
    if math.factorial(a.n_cols) > limit:
        raise EnumerationLimitError(
            f"{a.n_cols}! column permutations exceed the limit {limit}"
        )
    dense = a.dense.astype(np.uint8)
    return _unique_dense(
        dense[:, list(sigma)] for sigma in itertools.permutations(range(a.n_cols))
    )


def _pack(mat: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(mat, dtype=np.uint8)
    r, c = arr.shape
    return r.to_bytes(2, "big") + c.to_bytes(2, "big") + arr.tobytes()


def _unpack(data: bytes) -> np.ndarray:
    r = int.from_bytes(data[:2], "big")
    c = int.from_bytes(data[2:4], "big")
    return np.frombuffer(data[4:], dtype=np.uint8).reshape(r, c)


def bool_product_set(
    left: Sequence[np.ndarray], right: Sequence[np.ndarray]
) -> set[bytes]:
    """Boolean products of every pair from two dense matrix families."""
    xs = np.stack(left).astype(np.int16)
    ys = np.stack(right).astype(np.int16)
    prods = np.einsum("aij,bjk->abik", xs, ys) > 0
    packed = prods.astype(np.uint8)
    out: set[bytes] = set()
    for x in range(packed.shape[0]):
        for y in range(packed.shape[1]):
            out.add(_pack(packed[x, y]))
    return out


def _byte_set(matrices: Iterable[np.ndarray]) -> set[bytes]:
    return {_pack(m) for m in matrices}


def _junction_variants(
    chain: Sequence[BinaryRelation], position: int, limit: int
) -> list[tuple[BinaryRelation, ...]]:
    left = chain[position]
    n = left.n_cols
    if math.factorial(n) > limit:
        raise EnumerationLimitError(
            f"{n}! junction relabelings exceed the limit {limit}"
        )
    variants = []
    for sigma in itertools.permutations(range(n)):
        perm = np.asarray(sigma, dtype=np.int64)
        relabeled = BinaryRelation(
            left.row_domain,
            left.col_domain,
            left.edge_rows,
            perm[left.edge_cols],
            name=left.name,
        )
        variants.append(
            tuple(chain[:position]) + (relabeled,) + tuple(chain[position + 1 :])
        )
    return variants


def _point_variants(
    query: ChainQuery, point: RandomizationPoint, limit: int
) -> list[tuple[BinaryRelation, ...]]:
    chain = query.relations
    if point.kind == KIND_RELATION:
        mc = enumerate_margin_class(chain[point.position], limit)
        return [
            tuple(chain[: point.position]) + (member,) + tuple(chain[point.position + 1 :])
            for member in mc.members
        ]
    if point.position >= len(chain) - 1:
        raise EngineError(f"invalid junction position {point.position}")
    return _junction_variants(chain, point.position, limit)


@dataclass(frozen=True)
class ExactNull:
    """Exact null distribution of a statistic at one randomization point."""

    values: dict[float, float]
    undefined_fraction: float

    def p_value(self, original: float, tail: str) -> float:
        lower = sum(p for v, p in self.values.items() if v <= original)
        upper = sum(p for v, p in self.values.items() if v >= original)
        if tail == "lower":
            return lower
        if tail == "upper":
            return upper
        if tail == "two_sided":
            return min(1.0, 2.0 * min(lower, upper))
        raise EngineError(f"unknown tail '{tail}'")

    def mean(self) -> float:
        return sum(v * p for v, p in self.values.items())


def exact_null_distribution(
    query: ChainQuery,
    point: RandomizationPoint,
    statistic: StatisticSpec,
    member_limit: int = DEFAULT_MEMBER_LIMIT,
) -> ExactNull:
    """Uniform-weight statistic distribution over the point's full state space."""
    variants = _point_variants(query, point, member_limit)
    weight = 1.0 / len(variants)
    values: dict[float, float] = {}
    undefined = 0
    for chain in variants:
        matrix = evaluate_chain(chain, query.selection, query.semantics)
        try:
            value = statistic.compute(matrix)
        except UndefinedStatisticError:
            undefined += 1
            continue
        values[value] = values.get(value, 0.0) + weight
    if not values:
        raise EngineError("statistic undefined on every state of the null model")
    defined_mass = sum(values.values())
    values = {v: p / defined_mass for v, p in values.items()}
    return ExactNull(values=values, undefined_fraction=undefined * weight)


def exact_expected_paths(
    query: ChainQuery,
    point: RandomizationPoint,
    member_limit: int = DEFAULT_MEMBER_LIMIT,
) -> np.ndarray:
    """Exact mean path-count matrix over the point's full state space."""
    variants = _point_variants(query, point, member_limit)
    acc: np.ndarray | None = None
    for chain in variants:
        counts = evaluate_chain(chain, query.selection, PATH_COUNT).counts
        acc = counts.astype(np.float64) if acc is None else acc + counts
    assert acc is not None
    return acc / len(variants)


PROPOSITION_IDS = (
    "P0a",
    "P0b",
    "P0c",
    "P1a",
    "P1b",
    "P1c",
    "P2a",
    "P2b",
    "P3a",
    "P3b",
    "P3c",
    "T4",
)


@dataclass(frozen=True)
class PropositionCheck:
    prop_id: str
    ok: bool
    detail: str = ""


def _render(data: bytes) -> str:
    mat = _unpack(data)
    return "\n".join("".join(str(int(v)) for v in row) for row in mat)


def _set_equal(
    prop_id: str,
    lhs: set[bytes],
    rhs: set[bytes],
    lhs_name: str,
    rhs_name: str,
) -> PropositionCheck:
    if lhs == rhs:
        return PropositionCheck(prop_id, True)
    only_l = sorted(lhs - rhs)
    only_r = sorted(rhs - lhs)
    parts = []
    if only_l:
        parts.append(f"in {lhs_name} only:\n{_render(only_l[0])}")
    if only_r:
        parts.append(f"in {rhs_name} only:\n{_render(only_r[0])}")
    return PropositionCheck(prop_id, False, "\n".join(parts))


def _subset(
    prop_id: str,
    lhs: set[bytes],
    rhs: set[bytes],
    lhs_name: str,
    rhs_name: str,
) -> PropositionCheck:
    missing = sorted(lhs - rhs)
    if not missing:
        return PropositionCheck(prop_id, True)
    return PropositionCheck(
        prop_id,
        False,
        f"{lhs_name} not contained in {rhs_name}; witness:\n{_render(missing[0])}",
    )


def verify_proposition(
    prop_id: str,
    a: BinaryRelation,
    b: BinaryRelation | None = None,
    member_limit: int = DEFAULT_MEMBER_LIMIT,
) -> PropositionCheck:
    """Check one combinatorial identity by explicit set construction.

    Sets are compared as dense boolean matrices, so both sides must have the
    same shape; a counterexample matrix is reported on failure.
    """
    if prop_id not in PROPOSITION_IDS:
        raise EngineError(f"unknown proposition id '{prop_id}'")
    dense_a = [a.dense.astype(np.uint8)]

    if prop_id == "P0a":
        perms = permutation_matrices(a.n_rows, member_limit)
        lhs = _byte_set(row_permutation_set(a, member_limit))
        rhs = bool_product_set(perms, dense_a)
        return _set_equal(prop_id, lhs, rhs, "rp(A)", "sw(I).A")
    if prop_id == "P0b":
        perms = permutation_matrices(a.n_cols, member_limit)
        lhs = _byte_set(col_permutation_set(a, member_limit))
        rhs = bool_product_set(dense_a, perms)
        return _set_equal(prop_id, lhs, rhs, "cp(A)", "A.sw(I)")
    if prop_id == "P0c":
        if not a.one_per_row and not a.one_per_col:
            return PropositionCheck(prop_id, True, "premise not satisfied; vacuous")
        sw = _byte_set(swap_set_dense(a, member_limit))
        if a.one_per_row:
            check = _set_equal(
                prop_id, sw, _byte_set(row_permutation_set(a, member_limit)),
                "sw(A)", "rp(A)",
            )
            if not check.ok or not a.one_per_col:
                return check
        return _set_equal(
            prop_id, sw, _byte_set(col_permutation_set(a, member_limit)),
            "sw(A)", "cp(A)",
        )

    if b is None:
        raise EngineError(f"proposition {prop_id} needs a second relation")
    dense_b = [b.dense.astype(np.uint8)]

    if prop_id in ("P1a", "P1b"):
        ab = bool_product_set(dense_a, dense_b)
        sw_a = swap_set_dense(a, member_limit)
        sw_b = swap_set_dense(b, member_limit)
        both = bool_product_set(sw_a, sw_b)
        if prop_id == "P1a":
            mid = bool_product_set(sw_a, dense_b)
            first = _subset(prop_id, ab, mid, "A.B", "sw(A).B")
            if not first.ok:
                return first
            return _subset(prop_id, mid, both, "sw(A).B", "sw(A).sw(B)")
        mid = bool_product_set(dense_a, sw_b)
        first = _subset(prop_id, ab, mid, "A.B", "A.sw(B)")
        if not first.ok:
            return first
        return _subset(prop_id, mid, both, "A.sw(B)", "sw(A).sw(B)")
    if prop_id == "P1c":
        from .relations import boolean_product

        ab_rel = boolean_product(a, b)
        ab = _byte_set([ab_rel.dense])
        sw_ab = _byte_set(swap_set_dense(ab_rel, member_limit))
        return _subset(prop_id, ab, sw_ab, "A.B", "sw(A.B)")
    if prop_id == "P2a":
        lhs = bool_product_set(dense_a, swap_set_dense(b, member_limit))
        rhs = _byte_set(col_permutation_set(a, member_limit))
        return _set_equal(prop_id, lhs, rhs, "A.sw(B)", "cp(A)")
    if prop_id == "P2b":
        lhs = bool_product_set(swap_set_dense(a, member_limit), dense_b)
        rhs = _byte_set(row_permutation_set(b, member_limit))
        return _set_equal(prop_id, lhs, rhs, "sw(A).B", "rp(B)")
    if prop_id == "P3a":
        from .relations import boolean_product

        ab_rel = boolean_product(a, b)
        lhs = _byte_set(col_permutation_set(ab_rel, member_limit))
        rhs = bool_product_set(dense_a, col_permutation_set(b, member_limit))
        return _set_equal(prop_id, lhs, rhs, "cp(A.B)", "A.cp(B)")
    if prop_id == "P3b":
        from .relations import boolean_product

        ab_rel = boolean_product(a, b)
        lhs = _byte_set(row_permutation_set(ab_rel, member_limit))
        rhs = bool_product_set(row_permutation_set(a, member_limit), dense_b)
        return _set_equal(prop_id, lhs, rhs, "rp(A.B)", "rp(A).B")
    if prop_id == "P3c":
        lhs = bool_product_set(col_permutation_set(a, member_limit), dense_b)
        rhs = bool_product_set(dense_a, row_permutation_set(b, member_limit))
        return _set_equal(prop_id, lhs, rhs, "cp(A).B", "A.rp(B)")
    # T4: A.sw(I).B == cp(A).B == A.rp(B)
    perms = permutation_matrices(a.n_cols, member_limit)
    a_perm = bool_product_set(dense_a, perms)
    lhs = bool_product_set([_unpack(p) for p in sorted(a_perm)], dense_b)
    mid = bool_product_set(col_permutation_set(a, member_limit), dense_b)
    rhs = bool_product_set(dense_a, row_permutation_set(b, member_limit))
    first = _set_equal("T4", lhs, mid, "A.sw(I).B", "cp(A).B")
    if not first.ok:
        return first
    return _set_equal("T4", mid, rhs, "cp(A).B", "A.rp(B)")
