"""Sparse binary relations over labeled attribute domains.

A relation is an immutable 0/1 matrix between two named domains. Chains of
join-compatible relations are evaluated to a path-count matrix between the
source and destination domains, either counting distinct paths or clamping
to boolean reachability.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

BOOLEAN = "boolean"
PATH_COUNT = "path_count"
SEMANTICS = (BOOLEAN, PATH_COUNT)


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(EngineError):
    """Invalid attribute domain definition."""


class JoinCompatibilityError(EngineError):
    """Adjacent relations in a chain cannot be joined."""


class UnknownLabelError(EngineError):
    """A label is not present in the expected domain."""


class RelationFormatError(EngineError):
    """A relation file is malformed."""


@dataclass(frozen=True)
class AttributeDomain:
    """A named, ordered collection of entity labels.

    ``numeric_values`` optionally attaches one real value per label (for
    instance an age per age-slot label); it is consumed by statistics that
    average over the destination domain.
    """

    name: str
    labels: tuple[str, ...]
    numeric_values: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(set(self.labels)) != len(self.labels):
            raise DomainError(f"domain '{self.name}' has duplicate labels")
        if self.numeric_values is not None:
            values = tuple(float(v) for v in self.numeric_values)
            object.__setattr__(self, "numeric_values", values)
            if len(values) != len(self.labels):
                raise DomainError(
                    f"domain '{self.name}' has {len(self.labels)} labels but "
                    f"{len(values)} numeric values"
                )

    @property
    def size(self) -> int:
        return len(self.labels)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}

    def index_of(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownLabelError(
                f"label '{label}' not in domain '{self.name}'"
            ) from None

    def value_of(self, label: str) -> float:
        if self.numeric_values is None:
            raise DomainError(f"domain '{self.name}' carries no numeric values")
        return self.numeric_values[self.index_of(label)]

    def subset(self, labels: Sequence[str]) -> "AttributeDomain":
        """Sub-domain with the given labels, keeping their numeric values."""
        idx = [self.index_of(label) for label in labels]
        values = None
        if self.numeric_values is not None:
            values = tuple(self.numeric_values[i] for i in idx)
        return AttributeDomain(self.name, tuple(self.labels[i] for i in idx), values)


def _as_edge_array(values, count: int | None = None) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int64).ravel()
    if count is not None and arr.size != count:
        raise EngineError("edge index arrays differ in length")
    return arr


@dataclass(frozen=True, eq=False)
class BinaryRelation:
    """An immutable sparse 0/1 relation between a row and a column domain.

    Edges are stored as parallel index arrays in canonical row-major order
    with duplicates removed. The optional ``name`` is presentation metadata
    only and does not participate in equality.
    """

    row_domain: AttributeDomain
    col_domain: AttributeDomain
    edge_rows: np.ndarray
    edge_cols: np.ndarray
    name: str | None = None

    def __post_init__(self) -> None:
        rows = _as_edge_array(self.edge_rows)
        cols = _as_edge_array(self.edge_cols, rows.size)
        nr, nc = self.row_domain.size, self.col_domain.size
        if rows.size:
            if rows.min() < 0 or rows.max() >= nr:
                raise EngineError(
                    f"edge row index out of range for domain '{self.row_domain.name}'"
                )
            if cols.min() < 0 or cols.max() >= nc:
                raise EngineError(
                    f"edge column index out of range for domain '{self.col_domain.name}'"
                )
            encoded = np.unique(rows * nc + cols)
            rows = encoded // nc
            cols = encoded % nc
        rows.setflags(write=False)
        cols.setflags(write=False)
        object.__setattr__(self, "edge_rows", rows)
        object.__setattr__(self, "edge_cols", cols)

    @classmethod
    def from_pairs(
        cls,
        row_domain: AttributeDomain,
        col_domain: AttributeDomain,
        pairs: Iterable[tuple[int, int]],
        name: str | None = None,
    ) -> "BinaryRelation":
        pairs = list(pairs)
        rows = np.fromiter((p[0] for p in pairs), dtype=np.int64, count=len(pairs))
        cols = np.fromiter((p[1] for p in pairs), dtype=np.int64, count=len(pairs))
        return cls(row_domain, col_domain, rows, cols, name=name)

    @classmethod
    def from_labeled_pairs(
        cls,
        row_domain: AttributeDomain,
        col_domain: AttributeDomain,
        pairs: Iterable[tuple[str, str]],
        name: str | None = None,
    ) -> "BinaryRelation":
        indexed = [
            (row_domain.index_of(r), col_domain.index_of(c)) for r, c in pairs
        ]
        return cls.from_pairs(row_domain, col_domain, indexed, name=name)

    @classmethod
    def from_dense(
        cls,
        row_domain: AttributeDomain,
        col_domain: AttributeDomain,
        dense,
        name: str | None = None,
    ) -> "BinaryRelation":
        arr = np.asarray(dense)
        if arr.shape != (row_domain.size, col_domain.size):
            raise EngineError(
                f"dense shape {arr.shape} does not match domains "
                f"{row_domain.size}x{col_domain.size}"
            )
        rows, cols = np.nonzero(arr)
        return cls(row_domain, col_domain, rows, cols, name=name)

    @property
    def n_rows(self) -> int:
        return self.row_domain.size

    @property
    def n_cols(self) -> int:
        return self.col_domain.size

    @property
    def edge_count(self) -> int:
        return int(self.edge_rows.size)

    @cached_property
    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset(zip(self.edge_rows.tolist(), self.edge_cols.tolist()))

    @cached_property
    def row_sums(self) -> np.ndarray:
        out = np.bincount(self.edge_rows, minlength=self.n_rows).astype(np.int64)
        out.setflags(write=False)
        return out

    @cached_property
    def col_sums(self) -> np.ndarray:
        out = np.bincount(self.edge_cols, minlength=self.n_cols).astype(np.int64)
        out.setflags(write=False)
        return out

    @cached_property
    def dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols), dtype=bool)
        out[self.edge_rows, self.edge_cols] = True
        out.setflags(write=False)
        return out

    @cached_property
    def csr(self) -> sp.csr_matrix:
        data = np.ones(self.edge_count, dtype=np.int64)
        return sp.csr_matrix(
            (data, (self.edge_rows, self.edge_cols)),
            shape=(self.n_rows, self.n_cols),
        )

    @cached_property
    def canonical_bytes(self) -> bytes:
        head = f"{self.n_rows}:{self.n_cols}:".encode()
        return head + self.edge_rows.tobytes() + self.edge_cols.tobytes()

    @cached_property
    def one_per_row(self) -> bool:
        return self.n_rows > 0 and bool(np.all(self.row_sums == 1))

    @cached_property
    def one_per_col(self) -> bool:
        return self.n_cols > 0 and bool(np.all(self.col_sums == 1))

    @property
    def one_to_one(self) -> bool:
        return self.one_per_row and self.one_per_col

    def with_name(self, name: str | None) -> "BinaryRelation":
        return BinaryRelation(
            self.row_domain, self.col_domain, self.edge_rows, self.edge_cols, name=name
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryRelation):
            return NotImplemented
        return (
            self.row_domain == other.row_domain
            and self.col_domain == other.col_domain
            and self.canonical_bytes == other.canonical_bytes
        )

    def __hash__(self) -> int:
        return hash((self.row_domain.name, self.col_domain.name, self.canonical_bytes))

    def __repr__(self) -> str:
        tag = self.name or f"{self.row_domain.name}x{self.col_domain.name}"
        return (
            f"BinaryRelation({tag}, {self.n_rows}x{self.n_cols}, "
            f"{self.edge_count} edges)"
        )


@dataclass(frozen=True, eq=False)
class PathMatrix:
    """Dense count of distinct chain paths from each source to each destination."""

    row_domain: AttributeDomain
    col_domain: AttributeDomain
    counts: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.counts, dtype=np.int64)
        if arr.shape != (self.row_domain.size, self.col_domain.size):
            raise EngineError(
                f"count matrix shape {arr.shape} does not match domains "
                f"{self.row_domain.size}x{self.col_domain.size}"
            )
        if arr.size and arr.min() < 0:
            raise EngineError("path counts must be non-negative")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)

    def row(self, label: str) -> np.ndarray:
        return self.counts[self.row_domain.index_of(label)]

    def total(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, PathMatrix):
            return NotImplemented
        return (
            self.row_domain == other.row_domain
            and self.col_domain == other.col_domain
            and np.array_equal(self.counts, other.counts)
        )

    def __hash__(self) -> int:
        return hash(
            (self.row_domain.name, self.col_domain.name, self.counts.tobytes())
        )


def transpose(a: BinaryRelation) -> BinaryRelation:
    """Swap the roles of rows and columns."""
    name = None if a.name is None else f"{a.name}^T"
    if a.name is not None and a.name.endswith("^T"):
        name = a.name[:-2]
    return BinaryRelation(a.col_domain, a.row_domain, a.edge_cols, a.edge_rows, name=name)


def identity_relation(
    row_domain: AttributeDomain,
    col_domain: AttributeDomain | None = None,
    name: str | None = None,
) -> BinaryRelation:
    """Identity map between two same-sized domains (defaults to one domain twice)."""
    col_domain = col_domain if col_domain is not None else row_domain
    if col_domain.size != row_domain.size:
        raise EngineError(
            f"identity relation needs equal-sized domains, got "
            f"{row_domain.size} and {col_domain.size}"
        )
    idx = np.arange(row_domain.size, dtype=np.int64)
    return BinaryRelation(row_domain, col_domain, idx, idx.copy(), name=name)


def _check_join(col_domain: AttributeDomain, b) -> None:
    rb = b.row_domain
    if col_domain is rb or col_domain.labels == rb.labels:
        if col_domain.name == rb.name:
            return
    if col_domain.name != rb.name or sorted(col_domain.labels) != sorted(rb.labels):
        raise JoinCompatibilityError(
            f"cannot join: column domain '{col_domain.name}' "
            f"({col_domain.size} labels) is not the row domain "
            f"'{rb.name}' ({rb.size} labels) of the next relation"
        )


def _align_rows(b: BinaryRelation, target: AttributeDomain) -> BinaryRelation:
    """Reindex b's rows to the label order of target (same name and label set)."""
    if b.row_domain is target or b.row_domain.labels == target.labels:
        return b
    remap = np.empty(b.n_rows, dtype=np.int64)
    for old, label in enumerate(b.row_domain.labels):
        remap[old] = target.index_of(label)
    return BinaryRelation(
        target, b.col_domain, remap[b.edge_rows], b.edge_cols, name=b.name
    )


def boolean_product(a: BinaryRelation, b: BinaryRelation) -> BinaryRelation:
    """Relation with an edge (i, k) wherever some j links i to k through a and b."""
    _check_join(a.col_domain, b)
    b = _align_rows(b, a.col_domain)
    prod = (a.csr @ b.csr).tocoo()
    keep = prod.data > 0
    return BinaryRelation(a.row_domain, b.col_domain, prod.row[keep], prod.col[keep])


def _counts_csr(x) -> sp.csr_matrix:
    if isinstance(x, BinaryRelation):
        return x.csr
    return sp.csr_matrix(x.counts)


def path_product(a, b) -> PathMatrix:
    """Count paths through the composition of two relations (or path matrices)."""
    _check_join(a.col_domain, b)
    if isinstance(b, BinaryRelation):
        b = _align_rows(b, a.col_domain)
    elif b.row_domain.labels != a.col_domain.labels:
        order = [b.row_domain.index_of(label) for label in a.col_domain.labels]
        b = PathMatrix(a.col_domain, b.col_domain, b.counts[order])
    counts = (_counts_csr(a) @ _counts_csr(b)).toarray().astype(np.int64)
    return PathMatrix(a.row_domain, b.col_domain, counts)


def evaluate_chain(
    chain: Sequence[BinaryRelation],
    selection: Iterable[str] | None = None,
    semantics: str = PATH_COUNT,
) -> PathMatrix:
    """Evaluate a chain join from source to destination domain.

    ``selection`` restricts the result to the given source labels (kept in
    domain order). Under boolean semantics every positive count is clamped
    to 1 before being returned.
    """
    relations = list(chain)
    if not relations:
        raise EngineError("cannot evaluate an empty chain")
    if semantics not in SEMANTICS:
        raise EngineError(f"unknown semantics '{semantics}'")
    first = relations[0]
    if selection is not None:
        wanted = list(dict.fromkeys(selection))
        idx = sorted(first.row_domain.index_of(label) for label in wanted)
        row_domain = first.row_domain.subset([first.row_domain.labels[i] for i in idx])
        current = first.csr[np.asarray(idx, dtype=np.int64)]
    else:
        row_domain = first.row_domain
        current = first.csr
    col_domain = first.col_domain
    for nxt in relations[1:]:
        _check_join(col_domain, nxt)
        nxt = _align_rows(nxt, col_domain)
        current = current @ nxt.csr
        col_domain = nxt.col_domain
    counts = np.asarray(current.toarray(), dtype=np.int64)
    if semantics == BOOLEAN:
        counts = (counts > 0).astype(np.int64)
    return PathMatrix(row_domain, col_domain, counts)


@dataclass(frozen=True)
class ChainQuery:
    """An ordered chain of join-compatible relations plus evaluation settings."""

    relations: tuple[BinaryRelation, ...]
    selection: tuple[str, ...] | None = None
    semantics: str = PATH_COUNT

    def __post_init__(self) -> None:
        object.__setattr__(self, "relations", tuple(self.relations))
        if not self.relations:
            raise EngineError("a chain query needs at least one relation")
        if self.selection is not None:
            object.__setattr__(self, "selection", tuple(self.selection))
        if self.semantics not in SEMANTICS:
            raise EngineError(f"unknown semantics '{self.semantics}'")

    def validate(self) -> None:
        """Check join compatibility and selection labels without evaluating."""
        col_domain = self.relations[0].col_domain
        for nxt in self.relations[1:]:
            _check_join(col_domain, nxt)
            col_domain = nxt.col_domain
        if self.selection is not None:
            for label in self.selection:
                self.relations[0].row_domain.index_of(label)

    def evaluate(self) -> PathMatrix:
        return evaluate_chain(self.relations, self.selection, self.semantics)


def load_relation(path, name: str | None = None) -> BinaryRelation:
    """Read a relation file: header directives plus one tab-separated edge per line.

    Headers: ``#rowdomain <name>``, ``#coldomain <name>`` and optionally
    ``#values <file>`` attaching numeric values to the column domain.
    Labels are registered in order of first appearance.
    """
    path = Path(path)
    if not path.is_file():
        raise RelationFormatError(f"relation file not found: {path}")
    row_name: str | None = None
    col_name: str | None = None
    values_file: str | None = None
    row_index: dict[str, int] = {}
    col_index: dict[str, int] = {}
    rows: list[int] = []
    cols: list[int] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                parts = line[1:].split(None, 1)
                if len(parts) != 2:
                    raise RelationFormatError(f"{path}:{lineno}: malformed header '{line}'")
                key, value = parts[0], parts[1].strip()
                if key == "rowdomain":
                    row_name = value
                elif key == "coldomain":
                    col_name = value
                elif key == "values":
                    values_file = value
                else:
                    raise RelationFormatError(f"{path}:{lineno}: unknown header '#{key}'")
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise RelationFormatError(
                    f"{path}:{lineno}: expected 'row<TAB>col', got '{line}'"
                )
            r, c = parts
            rows.append(row_index.setdefault(r, len(row_index)))
            cols.append(col_index.setdefault(c, len(col_index)))
    if row_name is None or col_name is None:
        raise RelationFormatError(
            f"{path}: missing #rowdomain/#coldomain header"
        )
    values = None
    if values_file is not None:
        mapping = _load_values_file(path.parent / values_file)
        missing = [label for label in col_index if label not in mapping]
        if missing:
            raise RelationFormatError(
                f"{path}: values file '{values_file}' lacks entries for "
                f"{len(missing)} labels (first: '{missing[0]}')"
            )
        values = tuple(mapping[label] for label in col_index)
    row_domain = AttributeDomain(row_name, tuple(row_index))
    col_domain = AttributeDomain(col_name, tuple(col_index), values)
    return BinaryRelation.from_pairs(
        row_domain, col_domain, zip(rows, cols), name=name or path.stem
    )


def _load_values_file(path: Path) -> dict[str, float]:
    if not path.is_file():
        raise RelationFormatError(f"values file not found: {path}")
    mapping: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise RelationFormatError(
                    f"{path}:{lineno}: expected 'label<TAB>value', got '{line}'"
                )
            try:
                mapping[parts[0]] = float(parts[1])
            except ValueError:
                raise RelationFormatError(
                    f"{path}:{lineno}: '{parts[1]}' is not a number"
                ) from None
    return mapping


def save_relation(rel: BinaryRelation, path, values_filename: str | None = None) -> None:
    """Write a relation file; numeric column values go to a sibling values file."""
    path = Path(path)
    lines = [f"#rowdomain {rel.row_domain.name}", f"#coldomain {rel.col_domain.name}"]
    if rel.col_domain.numeric_values is not None:
        values_filename = values_filename or f"{path.stem}.values.tsv"
        lines.append(f"#values {values_filename}")
        value_lines = [
            f"{label}\t{value:.10g}"
            for label, value in zip(rel.col_domain.labels, rel.col_domain.numeric_values)
        ]
        (path.parent / values_filename).write_text(
            "\n".join(value_lines) + "\n", encoding="utf-8"
        )
    row_labels = rel.row_domain.labels
    col_labels = rel.col_domain.labels
    for r, c in zip(rel.edge_rows.tolist(), rel.edge_cols.tolist()):
        lines.append(f"{row_labels[r]}\t{col_labels[c]}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
