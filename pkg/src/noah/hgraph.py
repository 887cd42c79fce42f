"""Attributed hypergraph container, text-file IO and attribute binarization."""
from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

logger = logging.getLogger(__name__)

_SPLIT = re.compile(r"[,\s]+")


class HypergraphFormatError(ValueError):
    """Malformed edge or attribute file (carries the 1-based line number)."""

    def __init__(self, path, lineno, msg):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {msg}")


@dataclass(frozen=True, eq=False)
class AttributedHypergraph:
    """Hypergraph on nodes ``0..node_count-1`` with a binary attribute matrix.

    ``hyperedges`` is an ordered tuple of sorted node-id tuples. Duplicate
    hyperedges are kept; they count toward degrees.
    """

    node_count: int
    hyperedges: tuple[tuple[int, ...], ...]
    attributes: np.ndarray

    def __post_init__(self):
        n = int(self.node_count)
        if n < 1:
            raise ValueError("node_count must be >= 1")
        edges = []
        for j, e in enumerate(self.hyperedges):
            ids = tuple(sorted(int(v) for v in e))
            if not ids:
                raise ValueError(f"hyperedge {j} is empty")
            if len(set(ids)) != len(ids):
                raise ValueError(f"hyperedge {j} has duplicate node ids")
            if ids[0] < 0 or ids[-1] >= n:
                raise ValueError(f"hyperedge {j} has node id outside [0, {n})")
            edges.append(ids)
        X = np.asarray(self.attributes)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2 or X.shape[0] != n:
            raise ValueError(f"attribute matrix must have {n} rows, got shape {X.shape}")
        if X.size and not np.isin(X, (0, 1)).all():
            raise ValueError("attribute entries must be 0 or 1")
        X = X.astype(np.int8)
        X.setflags(write=False)
        object.__setattr__(self, "node_count", n)
        object.__setattr__(self, "hyperedges", tuple(edges))
        object.__setattr__(self, "attributes", X)

    @property
    def num_edges(self) -> int:
        return len(self.hyperedges)

    @property
    def num_attributes(self) -> int:
        return self.attributes.shape[1]

    def incidence(self) -> sp.csr_matrix:
        """|V| x |E| binary incidence matrix (float64)."""
        return incidence_matrix(self.node_count, self.hyperedges)

    def with_edges(self, hyperedges) -> "AttributedHypergraph":
        return AttributedHypergraph(self.node_count, tuple(hyperedges), self.attributes)

    def __eq__(self, other):
        if not isinstance(other, AttributedHypergraph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and self.hyperedges == other.hyperedges
            and np.array_equal(self.attributes, other.attributes)
        )

    def __repr__(self):
        return (
            f"AttributedHypergraph(|V|={self.node_count}, |E|={self.num_edges}, "
            f"k={self.num_attributes})"
        )


def incidence_matrix(node_count, hyperedges) -> sp.csr_matrix:
    sizes = [len(e) for e in hyperedges]
    rows = np.fromiter((v for e in hyperedges for v in e), dtype=np.int64, count=sum(sizes))
    cols = np.repeat(np.arange(len(hyperedges)), sizes)
    data = np.ones(len(rows))
    return sp.csr_matrix((data, (rows, cols)), shape=(node_count, len(hyperedges)))


def degree_vector(H: AttributedHypergraph) -> np.ndarray:
    """Number of hyperedges containing each node (duplicates counted)."""
    deg = np.zeros(H.node_count, dtype=np.int64)
    for e in H.hyperedges:
        deg[list(e)] += 1
    return deg


def size_vector(H: AttributedHypergraph) -> np.ndarray:
    return np.array([len(e) for e in H.hyperedges], dtype=np.int64)


# -- file IO ---------------------------------------------------------------

def _content_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if line.lstrip().startswith("#"):
                continue
            yield lineno, line


def read_id_map(path) -> dict[str, int]:
    """Sidecar dictionary: one ``external_id<whitespace>dense_id`` pair per line."""
    mapping = {}
    for lineno, line in _content_lines(path):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise HypergraphFormatError(path, lineno, "expected '<external id> <dense id>'")
        try:
            mapping[parts[0]] = int(parts[1])
        except ValueError:
            raise HypergraphFormatError(path, lineno, f"dense id {parts[1]!r} is not an integer") from None
    return mapping


def load_attributes(attr_path) -> np.ndarray:
    rows = []
    for lineno, line in _content_lines(attr_path):
        tokens = line.split()
        if not tokens:
            raise HypergraphFormatError(attr_path, lineno, "empty attribute line")
        if any(t not in ("0", "1") for t in tokens):
            bad = next(t for t in tokens if t not in ("0", "1"))
            raise HypergraphFormatError(attr_path, lineno, f"non-binary attribute token {bad!r}")
        if rows and len(tokens) != len(rows[0]):
            raise HypergraphFormatError(
                attr_path, lineno, f"expected {len(rows[0])} attributes, got {len(tokens)}"
            )
        rows.append([int(t) for t in tokens])
    if not rows:
        raise HypergraphFormatError(attr_path, 0, "no attribute rows")
    return np.array(rows, dtype=np.int8)


def load_hypergraph(edge_path, attr_path, id_map=None) -> AttributedHypergraph:
    """Read an edge list and a node-per-line attribute file.

    Parameters
    ----------
    edge_path : path
        One hyperedge per line; node ids separated by commas and/or whitespace.
    attr_path : path
        One line per node (line order = node id), k space-separated 0/1 tokens.
    id_map : path, optional
        Sidecar dictionary translating external string ids to dense ids.

    Lines starting with ``#`` are ignored in every file. Repeated ids within a
    hyperedge are collapsed with a warning.
    """
    for p in (edge_path, attr_path) + ((id_map,) if id_map else ()):
        if not os.path.isfile(p):
            raise FileNotFoundError(f"no such file: {p}")
    X = load_attributes(attr_path)
    n = X.shape[0]
    mapping = read_id_map(id_map) if id_map else None

    edges = []
    for lineno, line in _content_lines(edge_path):
        tokens = [t for t in _SPLIT.split(line.strip()) if t]
        if not tokens:
            raise HypergraphFormatError(edge_path, lineno, "empty hyperedge")
        ids = []
        for t in tokens:
            if mapping is not None:
                if t not in mapping:
                    raise HypergraphFormatError(edge_path, lineno, f"unknown node id {t!r}")
                ids.append(mapping[t])
                continue
            try:
                ids.append(int(t, 10))
            except ValueError:
                raise HypergraphFormatError(edge_path, lineno, f"invalid node id {t!r}") from None
        bad = [v for v in ids if v < 0 or v >= n]
        if bad:
            raise HypergraphFormatError(
                edge_path, lineno, f"node id {bad[0]} out of range for {n} nodes"
            )
        uniq = sorted(set(ids))
        if len(uniq) != len(ids):
            logger.warning("%s:%d: duplicate node ids in hyperedge removed", edge_path, lineno)
        edges.append(tuple(uniq))
    return AttributedHypergraph(n, tuple(edges), X)


def _atomic_write_text(path, text):
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_hypergraph(H: AttributedHypergraph, edge_path, attr_path=None) -> None:
    """Write ``H`` in the format read by :func:`load_hypergraph`."""
    _atomic_write_text(edge_path, "".join(" ".join(map(str, e)) + "\n" for e in H.hyperedges))
    if attr_path is not None:
        _atomic_write_text(
            attr_path, "".join(" ".join(map(str, row)) + "\n" for row in H.attributes.tolist())
        )


# -- attribute preprocessing ----------------------------------------------

CATEGORICAL = "categorical"
CONTINUOUS = "continuous"


@dataclass
class RawAttributeTable:
    """Raw per-node attributes prior to binarization.

    ``rows[i][j]`` is node i's value for column j, ``kinds[j]`` is either
    ``"categorical"`` or ``"continuous"``.
    """

    rows: list
    kinds: list
    names: list = field(default_factory=list)

    def __post_init__(self):
        for kind in self.kinds:
            if kind not in (CATEGORICAL, CONTINUOUS):
                raise ValueError(f"unknown column kind {kind!r}")
        for i, row in enumerate(self.rows):
            if len(row) != len(self.kinds):
                raise ValueError(f"row {i} has {len(row)} values, expected {len(self.kinds)}")

    def column(self, j):
        return [row[j] for row in self.rows]


def binarize_attributes(
    raw: RawAttributeTable, thresholds: Mapping[int, float] | Sequence[float] | None = None
) -> np.ndarray:
    """One-hot encode categorical columns and threshold continuous ones.

    ``thresholds`` maps continuous column index to its cut point; a value
    ``x`` becomes 1 iff ``x >= threshold``. A categorical column with ``c``
    observed values expands to ``c`` columns in sorted value order.
    """
    if thresholds is None:
        thresholds = {}
    elif not isinstance(thresholds, Mapping):
        cont = [j for j, kind in enumerate(raw.kinds) if kind == CONTINUOUS]
        thresholds = dict(zip(cont, thresholds))
    blocks = []
    for j, kind in enumerate(raw.kinds):
        col = raw.column(j)
        if kind == CATEGORICAL:
            values = sorted(set(col))
            if len(values) < 2:
                raise ValueError(f"categorical column {j} has fewer than 2 observed values")
            index = {v: i for i, v in enumerate(values)}
            block = np.zeros((len(col), len(values)), dtype=np.int8)
            block[np.arange(len(col)), [index[v] for v in col]] = 1
        else:
            if j not in thresholds:
                raise ValueError(f"missing threshold for continuous column {j}")
            block = (np.asarray(col, dtype=float) >= thresholds[j]).astype(np.int8)[:, None]
        blocks.append(block)
    if not blocks:
        return np.zeros((len(raw.rows), 0), dtype=np.int8)
    return np.hstack(blocks)
