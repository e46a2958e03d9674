"""Partition-vs-classification agreement and the two diagnostic matrices.

Detected partitions are compared against the documents' category labels
with symmetrically normalized mutual information. Before any comparison,
clusters holding a single document are dropped (those are the articles
with no usable concepts). Two matrices summarize structure: composition
(how each category's articles spread over clusters) and category
co-occurrence (how often label pairs were assigned jointly).

All entropies and mutual informations use the natural logarithm; the
normalized ratio is base-independent.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from conceptgraph.corpus import Corpus, DocumentRecord
from conceptgraph.modularity import Partition, canonicalize


@dataclass(frozen=True)
class LabeledPartitionPair:
    """Items carrying both a detected cluster id and an external category.

    `items` are external document ids; `P[i]` is the (densely relabeled)
    cluster of item i and `Q[i]` its category label. Single-document
    clusters have already been removed.
    """

    items: tuple[str, ...]
    P: np.ndarray
    Q: tuple[str, ...]

    def __post_init__(self) -> None:
        if not (len(self.items) == self.P.size == len(self.Q)):
            raise ValueError("items, P and Q must cover the same item list")

    @property
    def n_items(self) -> int:
        return len(self.items)

    @property
    def n_clusters(self) -> int:
        return int(self.P.max()) + 1 if self.P.size else 0

    @property
    def n_categories(self) -> int:
        return len(set(self.Q))


@dataclass(frozen=True)
class ContingencyTable:
    """Joint counts n_pq over (cluster, category) with marginals."""

    counts: np.ndarray
    cluster_labels: tuple[int, ...]
    category_labels: tuple[str, ...]

    @property
    def row_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def column_marginals(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def n(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class CompositionMatrix:
    """M[cluster, category] = fraction of the category's articles in the cluster."""

    matrix: np.ndarray
    cluster_labels: tuple[int, ...]
    category_labels: tuple[str, ...]


@dataclass(frozen=True)
class CooccurrenceMatrix:
    """Row-normalized category co-assignment fractions plus the raw counts.

    `raw[a][b]` (a != b) counts multi-category documents tagged with both
    a and b; `raw[a][a]` counts single-category documents tagged a. Each
    row of `matrix` is `raw` divided by its row sum, so the diagonal is
    the fraction of the row category's articles that carried it alone.
    """

    matrix: np.ndarray
    raw: np.ndarray
    labels: tuple[str, ...]


def _entropy_from_counts(counts: np.ndarray) -> float:
    counts = counts[counts > 0].astype(np.float64)
    n = counts.sum()
    terms = (counts / n) * (np.log(n) - np.log(counts))
    return float(np.sum(np.sort(terms)))


def entropy(labels: Sequence) -> float:
    """Shannon entropy (natural log) of a label multiset.

    Raises:
        ValueError: empty input.
    """
    arr = np.asarray(list(labels))
    if arr.size == 0:
        raise ValueError("entropy of an empty labeling is undefined")
    _, counts = np.unique(arr, return_counts=True)
    return _entropy_from_counts(counts)


def contingency(pair: LabeledPartitionPair) -> ContingencyTable:
    """Joint (cluster, category) counts; rows in cluster-id order, columns
    in sorted category order."""
    clusters = np.unique(pair.P)
    categories = sorted(set(pair.Q))
    cat_idx = {c: i for i, c in enumerate(categories)}
    counts = np.zeros((clusters.size, len(categories)), dtype=np.int64)
    row_of = {int(p): r for r, p in enumerate(clusters)}
    for p, q in zip(pair.P.tolist(), pair.Q):
        counts[row_of[p], cat_idx[q]] += 1
    return ContingencyTable(
        counts=counts,
        cluster_labels=tuple(int(p) for p in clusters),
        category_labels=tuple(categories),
    )


def nmi(pair: LabeledPartitionPair) -> float:
    """Symmetrically normalized mutual information 2I(P,Q) / (H(P)+H(Q)).

    Lies in [0, 1]: 1 for identical partitions, 0 for independent ones.
    When both labelings are single-cluster (H(P)+H(Q) = 0) the partitions
    are identical and the value is defined as 1. Invariant under swapping
    P and Q and under any relabeling of either side.
    """
    if pair.n_items == 0:
        raise ValueError("nmi of an empty pair is undefined")
    table = contingency(pair)
    h_p = _entropy_from_counts(table.row_marginals)
    h_q = _entropy_from_counts(table.column_marginals)
    if h_p + h_q == 0.0:
        return 1.0
    # I = H(P) + H(Q) - H(P,Q). All three entropies are sums over sorted
    # count multisets, so swapping P and Q (transposing the table) cannot
    # change a single bit, identical labelings give exactly 1, and a
    # single-cluster side gives exactly 0.
    h_joint = _entropy_from_counts(table.counts.ravel())
    info = h_p + h_q - h_joint
    value = 2.0 * info / (h_p + h_q)
    return min(1.0, max(0.0, value))


def filter_single_node_clusters(
    partition: Partition | np.ndarray, docs: Sequence[DocumentRecord]
) -> LabeledPartitionPair:
    """Drop documents whose cluster contains exactly one document.

    Cluster sizes are measured over document nodes only, so a joint
    cluster holding one document plus any number of concepts still counts
    as a singleton and loses its document. Surviving clusters are
    relabeled densely by first occurrence. Each document's external label
    is its first category (the intended inputs are single-category
    sub-corpora, where that is the only one).
    """
    if isinstance(partition, Partition):
        labels = partition.doc_assignment()
    else:
        labels = np.asarray(partition, dtype=np.int64)
    if labels.size != len(docs):
        raise ValueError(
            f"partition covers {labels.size} documents but {len(docs)} were given"
        )
    if labels.size == 0:
        return LabeledPartitionPair(
            items=(), P=np.empty(0, dtype=np.int64), Q=()
        )
    sizes = np.bincount(labels)
    keep = sizes[labels] > 1
    kept_docs = [d for d, k in zip(docs, keep.tolist()) if k]
    return LabeledPartitionPair(
        items=tuple(d.external_id for d in kept_docs),
        P=canonicalize(labels[keep]),
        Q=tuple(d.categories[0] for d in kept_docs),
    )


def composition_matrix(pair: LabeledPartitionPair) -> CompositionMatrix:
    """Fraction of each category's articles falling into each cluster.

    M[p, q] = n_pq / n_q, so every category column sums to 1 (column
    denominators are taken after singleton filtering, over the items
    actually present in the pair).
    """
    if pair.n_items == 0:
        raise ValueError("composition of an empty pair is undefined")
    table = contingency(pair)
    col = table.column_marginals.astype(np.float64)
    matrix = table.counts.astype(np.float64) / col[np.newaxis, :]
    return CompositionMatrix(
        matrix=matrix,
        cluster_labels=table.cluster_labels,
        category_labels=table.category_labels,
    )


def cooccurrence_matrix(multi: Corpus, single: Corpus) -> CooccurrenceMatrix:
    """Category co-assignment counts and their row-normalized fractions.

    `multi` must contain only multi-category documents and `single` only
    single-category ones. Off-diagonal raw counts tally the multi-category
    documents tagged with both categories; the diagonal tallies the
    single-category documents of that category. Rows are then divided by
    their raw row sums (a document with three or more categories
    contributes to several cells of its rows). All-zero rows stay zero.
    """
    for doc in multi.documents:
        if len(doc.categories) < 2:
            raise ValueError(
                f"document {doc.external_id!r} in the multi-category corpus "
                f"has {len(doc.categories)} category"
            )
    for doc in single.documents:
        if len(doc.categories) != 1:
            raise ValueError(
                f"document {doc.external_id!r} in the single-category corpus "
                f"has {len(doc.categories)} categories"
            )
    labels = sorted(
        {c for d in multi.documents for c in d.categories}
        | {d.categories[0] for d in single.documents}
    )
    idx = {c: i for i, c in enumerate(labels)}
    k = len(labels)
    raw = np.zeros((k, k), dtype=np.int64)
    for doc in multi.documents:
        cats = sorted(idx[c] for c in doc.categories)
        for i, a in enumerate(cats):
            for b in cats[i + 1 :]:
                raw[a, b] += 1
                raw[b, a] += 1
    for doc in single.documents:
        a = idx[doc.categories[0]]
        raw[a, a] += 1
    row_sums = raw.sum(axis=1).astype(np.float64)
    safe = np.where(row_sums > 0, row_sums, 1.0)
    matrix = raw.astype(np.float64) / safe[:, np.newaxis]
    return CooccurrenceMatrix(matrix=matrix, raw=raw, labels=tuple(labels))


def write_matrix_csv(
    path: str | Path,
    row_labels: Sequence,
    col_labels: Sequence,
    matrix: np.ndarray,
    corner: str = "",
) -> None:
    """Labeled matrix CSV: first row and first column carry the labels.

    Floats are written with `repr` so re-parsing reproduces the exact
    values; integer matrices are written as plain integers.
    """
    is_int = np.issubdtype(matrix.dtype, np.integer)

    def fmt(x) -> str:
        return str(int(x)) if is_int else repr(float(x))

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([corner, *[str(c) for c in col_labels]])
        for label, row in zip(row_labels, matrix):
            writer.writerow([str(label), *[fmt(x) for x in row]])


def read_matrix_csv(path: str | Path) -> tuple[list[str], list[str], np.ndarray]:
    """Inverse of `write_matrix_csv`: (row labels, column labels, values)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    col_labels = rows[0][1:]
    row_labels = [r[0] for r in rows[1:]]
    values = np.array([[float(x) for x in r[1:]] for r in rows[1:]], dtype=np.float64)
    if values.size and values.shape[1] != len(col_labels):
        raise ValueError(f"{path}: ragged matrix rows")
    return row_labels, col_labels, values


def write_nmi_json(path: str | Path, pair: LabeledPartitionPair, value: float) -> None:
    payload = {
        "nmi": value,
        "n_items": pair.n_items,
        "n_clusters": pair.n_clusters,
        "n_categories": pair.n_categories,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_comparison(
    out_prefix: str | Path,
    pair: LabeledPartitionPair,
    multi: Corpus,
    single: Corpus,
) -> dict[str, Path]:
    """Write nmi.json, composition.csv, cooccurrence.csv, cooccurrence_raw.csv.

    `out_prefix` is either a directory or a path prefix; files are named
    `<prefix>nmi.json` etc., with a separating underscore when the prefix
    is not a directory.
    """
    prefix = Path(out_prefix)
    if prefix.is_dir() or str(out_prefix).endswith(("/", "\\")):
        prefix.mkdir(parents=True, exist_ok=True)

        def name(s: str) -> Path:
            return prefix / s

    else:
        prefix.parent.mkdir(parents=True, exist_ok=True)

        def name(s: str) -> Path:
            return prefix.parent / f"{prefix.name}_{s}"

    paths = {
        "nmi": name("nmi.json"),
        "composition": name("composition.csv"),
        "cooccurrence": name("cooccurrence.csv"),
        "cooccurrence_raw": name("cooccurrence_raw.csv"),
    }
    write_nmi_json(paths["nmi"], pair, nmi(pair))
    comp = composition_matrix(pair)
    write_matrix_csv(
        paths["composition"],
        comp.cluster_labels,
        comp.category_labels,
        comp.matrix,
    )
    cooc = cooccurrence_matrix(multi, single)
    write_matrix_csv(paths["cooccurrence"], cooc.labels, cooc.labels, cooc.matrix)
    write_matrix_csv(paths["cooccurrence_raw"], cooc.labels, cooc.labels, cooc.raw)
    return paths
