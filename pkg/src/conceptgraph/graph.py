"""The two network views of a corpus.

`build_bipartite` keeps the raw document-concept incidence structure
(unweighted, generic concepts dropped). `build_projection` collapses it to
a document-document graph whose edge weights are cosine similarities of
idf-weighted concept vectors. Both builders preserve corpus document
order: node i of a graph is `corpus.documents[i]`, and `doc_ids` maps
nodes back to original document ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import sparse

from conceptgraph import store
from conceptgraph.corpus import Corpus
from conceptgraph.errors import StoreError


@dataclass(eq=False)
class BipartiteGraph:
    """Unweighted document-concept incidence graph.

    Concept nodes cover the non-generic concepts used by at least one
    document; documents with no non-generic concepts stay as isolated doc
    nodes. Edges are canonically ordered by (doc node, concept node).
    """

    n_docs: int
    n_concepts: int
    doc_ids: np.ndarray
    concept_ids: np.ndarray
    edge_doc: np.ndarray
    edge_concept: np.ndarray

    @property
    def m(self) -> int:
        return int(self.edge_doc.size)

    @property
    def n_nodes(self) -> int:
        return self.n_docs + self.n_concepts

    @cached_property
    def doc_degrees(self) -> np.ndarray:
        return np.bincount(self.edge_doc, minlength=self.n_docs).astype(np.float64)

    @cached_property
    def concept_degrees(self) -> np.ndarray:
        return np.bincount(self.edge_concept, minlength=self.n_concepts).astype(
            np.float64
        )

    @cached_property
    def csr(self) -> sparse.csr_matrix:
        """Symmetric unit-weight adjacency over doc nodes then concept nodes."""
        n = self.n_nodes
        row = np.concatenate([self.edge_doc, self.edge_concept + self.n_docs])
        col = np.concatenate([self.edge_concept + self.n_docs, self.edge_doc])
        data = np.ones(row.size, dtype=np.float64)
        adj = sparse.csr_matrix((data, (row, col)), shape=(n, n))
        adj.sort_indices()
        return adj


@dataclass(eq=False)
class WeightedGraph:
    """Unipartite document graph with cosine-similarity edge weights.

    Edges are stored once with src < dst, sorted by (src, dst); all stored
    weights are strictly positive and lie in (0, 1] up to float rounding.
    """

    n_nodes: int
    doc_ids: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray

    @property
    def edge_count(self) -> int:
        return int(self.src.size)

    @property
    def total_weight(self) -> float:
        return float(self.weight.sum())

    @cached_property
    def csr(self) -> sparse.csr_matrix:
        n = self.n_nodes
        row = np.concatenate([self.src, self.dst])
        col = np.concatenate([self.dst, self.src])
        data = np.concatenate([self.weight, self.weight])
        adj = sparse.csr_matrix((data, (row, col)), shape=(n, n))
        adj.sort_indices()
        return adj

    @cached_property
    def strengths(self) -> np.ndarray:
        out = np.zeros(self.n_nodes, dtype=np.float64)
        out += np.bincount(self.src, weights=self.weight, minlength=self.n_nodes)
        out += np.bincount(self.dst, weights=self.weight, minlength=self.n_nodes)
        return out


def build_bipartite(corpus: Corpus) -> BipartiteGraph:
    """One edge per (document, non-generic concept) membership."""
    generic = corpus.generic_ids
    used: set[int] = set()
    for doc in corpus.documents:
        used.update(cid for cid in doc.concept_ids if cid not in generic)
    concept_ids = np.array(sorted(used), dtype=np.int64)
    concept_node = {cid: k for k, cid in enumerate(concept_ids.tolist())}

    edge_doc: list[int] = []
    edge_concept: list[int] = []
    for node, doc in enumerate(corpus.documents):
        for cid in sorted(doc.concept_ids):
            if cid in concept_node:
                edge_doc.append(node)
                edge_concept.append(concept_node[cid])
    return BipartiteGraph(
        n_docs=corpus.N,
        n_concepts=int(concept_ids.size),
        doc_ids=np.array([d.doc_id for d in corpus.documents], dtype=np.int64),
        concept_ids=concept_ids,
        edge_doc=np.array(edge_doc, dtype=np.int64),
        edge_concept=np.array(edge_concept, dtype=np.int64),
    )


def _idf_matrix(corpus: Corpus, log_base: float | None) -> sparse.csr_matrix:
    """Docs-by-vocabulary matrix of idf weights over non-generic concepts.

    Zero-idf concepts are kept as explicit zeros so that document pairs
    sharing only such concepts surface as explicit zero dot products (and
    can then be dropped, per the projection contract).
    """
    scale = 1.0 if log_base is None else math.log(log_base)
    generic = corpus.generic_ids
    n = corpus.N
    idf = np.zeros(corpus.V, dtype=np.float64)
    for entry in corpus.vocabulary:
        if entry.doc_count > 0 and entry.concept_id not in generic:
            idf[entry.concept_id] = math.log(n / entry.doc_count) / scale

    rows: list[int] = []
    cols: list[int] = []
    for node, doc in enumerate(corpus.documents):
        for cid in sorted(doc.concept_ids):
            if cid not in generic:
                rows.append(node)
                cols.append(cid)
    if not rows:
        return sparse.csr_matrix((n, corpus.V), dtype=np.float64)
    col_arr = np.array(cols, dtype=np.int64)
    mat = sparse.csr_matrix(
        (idf[col_arr], (np.array(rows, dtype=np.int64), col_arr)),
        shape=(n, corpus.V),
    )
    mat.sort_indices()
    return mat


def build_projection(corpus: Corpus, *, log_base: float | None = None) -> WeightedGraph:
    """Cosine-similarity projection onto the document side.

    Pairs sharing at least one non-generic concept get an edge weighted by
    the cosine of their idf vectors; exact-zero weights are dropped and
    zero-norm documents are left isolated. Construction goes through the
    sparse incidence product (the inverted-index accumulation), not the
    all-pairs loop.

    `log_base` switches the idf logarithm (None means natural log); cosine
    weights are invariant under that choice up to float rounding.
    """
    mat = _idf_matrix(corpus, log_base)
    sq_norms = np.asarray(mat.multiply(mat).sum(axis=1)).ravel()
    gram = (mat @ mat.T).tocsr()
    gram.setdiag(0.0)
    gram.eliminate_zeros()

    upper = sparse.triu(gram, k=1).tocoo()
    src = upper.row.astype(np.int64)
    dst = upper.col.astype(np.int64)
    norms = np.sqrt(sq_norms)
    weight = upper.data / (norms[src] * norms[dst])

    order = np.lexsort((dst, src))
    return WeightedGraph(
        n_nodes=corpus.N,
        doc_ids=np.array([d.doc_id for d in corpus.documents], dtype=np.int64),
        src=src[order],
        dst=dst[order],
        weight=weight[order],
    )


def projection_edge_count(graph: WeightedGraph) -> int:
    return graph.edge_count


def write_edges_csv(graph: BipartiteGraph | WeightedGraph, path: str | Path) -> None:
    """Edge list export with header src,dst,weight.

    Bipartite rows carry `d`/`c` prefixed original ids and weight 1; the
    projection writes original doc ids with round-trippable float weights.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("src,dst,weight\n")
        if isinstance(graph, BipartiteGraph):
            doc_ids = graph.doc_ids
            concept_ids = graph.concept_ids
            for d, c in zip(graph.edge_doc.tolist(), graph.edge_concept.tolist()):
                fh.write(f"d{doc_ids[d]},c{concept_ids[c]},1\n")
        else:
            doc_ids = graph.doc_ids
            for s, t, w in zip(
                graph.src.tolist(), graph.dst.tolist(), graph.weight.tolist()
            ):
                fh.write(f"{doc_ids[s]},{doc_ids[t]},{w!r}\n")


def _array_blob(arr: np.ndarray, dtype: str) -> bytes:
    return np.ascontiguousarray(arr, dtype=dtype).tobytes()


def save_graph(graph: BipartiteGraph | WeightedGraph, path: str | Path) -> None:
    """Serialize either graph kind to the versioned binary container."""
    if isinstance(graph, BipartiteGraph):
        meta = {"n_docs": graph.n_docs, "n_concepts": graph.n_concepts}
        sections = [
            store.pack_json(meta),
            _array_blob(graph.doc_ids, "<i8"),
            _array_blob(graph.concept_ids, "<i8"),
            _array_blob(graph.edge_doc, "<i8"),
            _array_blob(graph.edge_concept, "<i8"),
        ]
        store.write_artifact(path, store.KIND_BIPARTITE, sections)
    elif isinstance(graph, WeightedGraph):
        meta = {"n_nodes": graph.n_nodes}
        sections = [
            store.pack_json(meta),
            _array_blob(graph.doc_ids, "<i8"),
            _array_blob(graph.src, "<i8"),
            _array_blob(graph.dst, "<i8"),
            _array_blob(graph.weight, "<f8"),
        ]
        store.write_artifact(path, store.KIND_PROJECTION, sections)
    else:
        raise TypeError(f"cannot save {type(graph).__name__}")


def load_graph(path: str | Path) -> BipartiteGraph | WeightedGraph:
    """Load a graph saved by `save_graph`, inferring its kind from the header."""
    kind_byte = store.peek_kind(path)
    if kind_byte not in (store.KIND_BIPARTITE, store.KIND_PROJECTION):
        raise StoreError(f"{path}: not a graph artifact (kind {kind_byte!r})")
    sections = store.read_artifact(path, kind_byte)
    meta = store.unpack_json(sections[0])
    if kind_byte == store.KIND_BIPARTITE:
        return BipartiteGraph(
            n_docs=int(meta["n_docs"]),
            n_concepts=int(meta["n_concepts"]),
            doc_ids=np.frombuffer(sections[1], dtype="<i8").astype(np.int64),
            concept_ids=np.frombuffer(sections[2], dtype="<i8").astype(np.int64),
            edge_doc=np.frombuffer(sections[3], dtype="<i8").astype(np.int64),
            edge_concept=np.frombuffer(sections[4], dtype="<i8").astype(np.int64),
        )
    return WeightedGraph(
        n_nodes=int(meta["n_nodes"]),
        doc_ids=np.frombuffer(sections[1], dtype="<i8").astype(np.int64),
        src=np.frombuffer(sections[2], dtype="<i8").astype(np.int64),
        dst=np.frombuffer(sections[3], dtype="<i8").astype(np.int64),
        weight=np.frombuffer(sections[4], dtype="<f8").astype(np.float64),
    )
