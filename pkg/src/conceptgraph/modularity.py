"""Modularity scores and their seeded greedy maximization.

Two objectives share one multi-level optimizer: Newman weighted modularity
on the document projection, and Barber co-clustering modularity on the
bipartite graph, where documents and concepts are partitioned jointly.
Each run alternates a stochastic local-moving phase (the only randomness,
driven by the seed) with an exact aggregation phase, so a run is a
deterministic function of (graph, seed). `best_of_runs` implements the
repeated-runs protocol and keeps the highest-scoring partition.

`brute_force_max` enumerates every set partition of small graphs and is
the testing oracle for the optimizer.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from conceptgraph import _kernels
from conceptgraph.errors import UndefinedModularityError
from conceptgraph.graph import BipartiteGraph, WeightedGraph

MAX_BRUTE_FORCE_NODES = 12


@dataclass(eq=False, frozen=True)
class Partition:
    """Total assignment of graph nodes to clusters.

    Cluster ids are dense and canonicalized by first occurrence in node
    order. For bipartite partitions the first `n_docs` entries are
    document nodes and the rest concept nodes; for projections every node
    is a document. `score` is the modularity achieved (NaN for edgeless
    graphs, where modularity is undefined).
    """

    assignment: np.ndarray
    score: float
    graph_kind: str
    seed: int
    n_docs: int

    @property
    def n_nodes(self) -> int:
        return int(self.assignment.size)

    @property
    def n_clusters(self) -> int:
        return int(self.assignment.max()) + 1 if self.assignment.size else 0

    def doc_assignment(self) -> np.ndarray:
        return self.assignment[: self.n_docs]


def canonicalize(labels: np.ndarray) -> np.ndarray:
    """Relabel clusters densely by first occurrence in node order."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        return labels.copy()
    uniq, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(uniq.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(uniq.size)
    return rank[inverse]


def _as_assignment(partition, n_nodes: int) -> np.ndarray:
    labels = partition.assignment if isinstance(partition, Partition) else partition
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1 or labels.size != n_nodes:
        raise ValueError(
            f"partition must assign every node: got {labels.size} labels "
            f"for {n_nodes} nodes"
        )
    return labels


def modularity_unipartite(graph: WeightedGraph, partition) -> float:
    """Newman weighted modularity of a projection partition."""
    labels = _as_assignment(partition, graph.n_nodes)
    m = graph.total_weight
    if m <= 0.0:
        raise UndefinedModularityError("modularity is undefined for m = 0")
    dense = canonicalize(labels)
    nc = int(dense.max()) + 1
    sigma_tot = np.bincount(dense, weights=graph.strengths, minlength=nc)
    internal = dense[graph.src] == dense[graph.dst]
    sigma_in = 2.0 * np.bincount(
        dense[graph.src[internal]],
        weights=graph.weight[internal],
        minlength=nc,
    )
    m2 = 2.0 * m
    return float(np.sum(sigma_in / m2 - (sigma_tot / m2) ** 2))


def modularity_bipartite(graph: BipartiteGraph, partition) -> float:
    """Barber co-clustering modularity of a joint document+concept partition."""
    labels = _as_assignment(partition, graph.n_nodes)
    m = float(graph.m)
    if m <= 0.0:
        raise UndefinedModularityError("modularity is undefined for m = 0")
    dense = canonicalize(labels)
    nc = int(dense.max()) + 1
    doc_labels = dense[: graph.n_docs]
    concept_labels = dense[graph.n_docs :]
    big_k = np.bincount(doc_labels, weights=graph.doc_degrees, minlength=nc)
    big_d = np.bincount(concept_labels, weights=graph.concept_degrees, minlength=nc)
    internal = doc_labels[graph.edge_doc] == concept_labels[graph.edge_concept]
    e_c = np.bincount(doc_labels[graph.edge_doc[internal]], minlength=nc).astype(
        np.float64
    )
    return float(np.sum(e_c / m - big_k * big_d / (m * m)))


class _Level:
    """One optimizer level: symmetric CSR plus null-model bookkeeping.

    Unipartite levels track node strengths; bipartite levels track the
    (doc-degree, concept-degree) mass pair so Barber's null model stays
    exact after any number of aggregations. Self-loop entries hold the
    full ordered-pair internal weight of their supernode.
    """

    __slots__ = ("adj", "kind", "strength", "mass_k", "mass_d", "m")

    def __init__(self, adj, kind, *, strength=None, mass_k=None, mass_d=None, m=0.0):
        adj = adj.tocsr()
        adj.sort_indices()
        self.adj = adj
        self.kind = kind
        self.strength = strength
        self.mass_k = mass_k
        self.mass_d = mass_d
        self.m = m

    @classmethod
    def from_graph(cls, graph: BipartiteGraph | WeightedGraph) -> "_Level":
        if isinstance(graph, WeightedGraph):
            return cls(
                graph.csr,
                "idf",
                strength=graph.strengths.copy(),
                m=graph.total_weight,
            )
        if isinstance(graph, BipartiteGraph):
            mass_k = np.concatenate(
                [graph.doc_degrees, np.zeros(graph.n_concepts)]
            )
            mass_d = np.concatenate(
                [np.zeros(graph.n_docs), graph.concept_degrees]
            )
            return cls(
                graph.csr, "bp", mass_k=mass_k, mass_d=mass_d, m=float(graph.m)
            )
        raise TypeError(f"unsupported graph type {type(graph).__name__}")

    @property
    def n_nodes(self) -> int:
        return self.adj.shape[0]

    def arrays(self):
        return (
            self.adj.indptr.astype(np.int64),
            self.adj.indices.astype(np.int64),
            self.adj.data.astype(np.float64),
        )

    def move_nodes(self, comm: np.ndarray, state: np.uint64):
        indptr, indices, data = self.arrays()
        if self.kind == "idf":
            return _kernels.local_move_unipartite(
                indptr, indices, data, self.strength, comm, state
            )
        return _kernels.local_move_bipartite(
            indptr, indices, data, self.mass_k, self.mass_d, self.m, comm, state
        )

    def aggregate(self, dense: np.ndarray, nc: int) -> "_Level":
        n = self.n_nodes
        shrink = sparse.csr_matrix(
            (np.ones(n), (np.arange(n), dense)), shape=(n, nc)
        )
        adj = (shrink.T @ self.adj @ shrink).tocsr()
        if self.kind == "idf":
            strength = np.bincount(dense, weights=self.strength, minlength=nc)
            return _Level(adj, "idf", strength=strength, m=self.m)
        mass_k = np.bincount(dense, weights=self.mass_k, minlength=nc)
        mass_d = np.bincount(dense, weights=self.mass_d, minlength=nc)
        return _Level(adj, "bp", mass_k=mass_k, mass_d=mass_d, m=self.m)

    def modularity(self, labels: np.ndarray) -> float:
        """Score a partition of this level (self-loop aware); test hook."""
        dense = canonicalize(labels)
        nc = int(dense.max()) + 1
        coo = self.adj.tocoo()
        internal = dense[coo.row] == dense[coo.col]
        pair_sum = np.bincount(
            dense[coo.row[internal]], weights=coo.data[internal], minlength=nc
        )
        if self.kind == "idf":
            m2 = 2.0 * self.m
            tot = np.bincount(dense, weights=self.strength, minlength=nc)
            return float(np.sum(pair_sum / m2 - (tot / m2) ** 2))
        e_c = pair_sum / 2.0
        big_k = np.bincount(dense, weights=self.mass_k, minlength=nc)
        big_d = np.bincount(dense, weights=self.mass_d, minlength=nc)
        return float(np.sum(e_c / self.m - big_k * big_d / (self.m * self.m)))


def _score(graph, labels: np.ndarray) -> float:
    if isinstance(graph, WeightedGraph):
        return modularity_unipartite(graph, labels)
    return modularity_bipartite(graph, labels)


def _graph_kind(graph) -> tuple[str, int]:
    if isinstance(graph, WeightedGraph):
        return "idf", graph.n_nodes
    if isinstance(graph, BipartiteGraph):
        return "bp", graph.n_docs
    raise TypeError(f"unsupported graph type {type(graph).__name__}")


def louvain(graph: BipartiteGraph | WeightedGraph, seed: int) -> Partition:
    """One seeded greedy multi-level optimization run.

    Returns a partition that is a local maximum under single-node moves;
    isolated nodes always end as singleton clusters. Deterministic in
    (graph, seed). On an edgeless graph every node is a singleton and the
    score is NaN (modularity undefined).
    """
    kind, n_docs = _graph_kind(graph)
    n = graph.n_nodes
    if n < 1:
        raise ValueError("louvain requires a graph with at least one node")

    level = _Level.from_graph(graph)
    global_assign = np.arange(n, dtype=np.int64)
    if level.m <= 0.0:
        return Partition(
            assignment=global_assign,
            score=float("nan"),
            graph_kind=kind,
            seed=seed,
            n_docs=n_docs,
        )

    state = _kernels.seed_state(seed)
    while True:
        comm = np.arange(level.n_nodes, dtype=np.int64)
        state, _moves = level.move_nodes(comm, state)
        dense = canonicalize(comm)
        nc = int(dense.max()) + 1
        if nc == level.n_nodes:
            break
        global_assign = dense[global_assign]
        level = level.aggregate(dense, nc)

    assignment = canonicalize(global_assign)
    return Partition(
        assignment=assignment,
        score=_score(graph, assignment),
        graph_kind=kind,
        seed=seed,
        n_docs=n_docs,
    )


def best_of_runs(
    graph: BipartiteGraph | WeightedGraph,
    n_runs: int,
    base_seed: int,
    threads: int = 1,
) -> Partition:
    """Best partition over seeds base_seed .. base_seed + n_runs - 1.

    Ties are broken toward the smallest seed, and the reduction depends
    only on the per-seed results, never on completion order, so the
    outcome is identical whether runs execute sequentially or in a pool.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    seeds = range(base_seed, base_seed + n_runs)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda s: louvain(graph, s), seeds))
    else:
        results = [louvain(graph, s) for s in seeds]
    best = results[0]
    for part in results[1:]:
        if part.score > best.score:
            best = part
    return best


def _set_partitions(n: int):
    """Restricted-growth strings: every set partition of range(n), once."""
    if n == 0:
        yield ()
        return
    labels = [0] * n
    while True:
        yield tuple(labels)
        i = n - 1
        while i > 0 and labels[i] > max(labels[:i]):
            i -= 1
        if i == 0:
            return
        labels[i] += 1
        for j in range(i + 1, n):
            labels[j] = 0


def brute_force_max(graph: BipartiteGraph | WeightedGraph) -> Partition:
    """Exhaustive global modularity maximum for small graphs.

    Enumerates all set partitions (Bell-number growth; refuses more than
    MAX_BRUTE_FORCE_NODES nodes). The first optimum in enumeration order
    wins ties, and restricted-growth strings are canonical already.
    """
    kind, n_docs = _graph_kind(graph)
    n = graph.n_nodes
    if n > MAX_BRUTE_FORCE_NODES:
        raise ValueError(
            f"brute force refuses graphs with more than "
            f"{MAX_BRUTE_FORCE_NODES} nodes (got {n})"
        )
    if kind == "idf":
        m = graph.total_weight
        edges = list(
            zip(graph.src.tolist(), graph.dst.tolist(), graph.weight.tolist())
        )
        strengths = graph.strengths.tolist()
    else:
        m = float(graph.m)
        edges = [
            (d, graph.n_docs + c, 1.0)
            for d, c in zip(graph.edge_doc.tolist(), graph.edge_concept.tolist())
        ]
        masses_k = np.concatenate(
            [graph.doc_degrees, np.zeros(graph.n_concepts)]
        ).tolist()
        masses_d = np.concatenate(
            [np.zeros(graph.n_docs), graph.concept_degrees]
        ).tolist()
    if m <= 0.0:
        raise UndefinedModularityError("modularity is undefined for m = 0")

    best_q = -np.inf
    best_labels: tuple[int, ...] | None = None
    for labels in _set_partitions(n):
        nc = max(labels) + 1
        if kind == "idf":
            sigma_in = [0.0] * nc
            sigma_tot = [0.0] * nc
            for u, v, w in edges:
                if labels[u] == labels[v]:
                    sigma_in[labels[u]] += 2.0 * w
            for u in range(n):
                sigma_tot[labels[u]] += strengths[u]
            m2 = 2.0 * m
            q = sum(
                sigma_in[c] / m2 - (sigma_tot[c] / m2) ** 2 for c in range(nc)
            )
        else:
            e_c = [0.0] * nc
            big_k = [0.0] * nc
            big_d = [0.0] * nc
            for u, v, _w in edges:
                if labels[u] == labels[v]:
                    e_c[labels[u]] += 1.0
            for u in range(n):
                big_k[labels[u]] += masses_k[u]
                big_d[labels[u]] += masses_d[u]
            q = sum(e_c[c] / m - big_k[c] * big_d[c] / (m * m) for c in range(nc))
        if q > best_q:
            best_q = q
            best_labels = labels

    assignment = np.array(best_labels, dtype=np.int64)
    return Partition(
        assignment=assignment,
        score=float(best_q),
        graph_kind=kind,
        seed=-1,
        n_docs=n_docs,
    )


def write_partition_csv(
    partition: Partition, graph: BipartiteGraph | WeightedGraph, path: str | Path
) -> None:
    """Partition CSV with header `node,cluster`.

    Document rows carry the bare document id; concept rows (joint
    partitions only) carry the concept id prefixed with `c`.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node", "cluster"])
        labels = partition.assignment
        for i, doc_id in enumerate(graph.doc_ids.tolist()):
            writer.writerow([doc_id, int(labels[i])])
        if isinstance(graph, BipartiteGraph):
            offset = graph.n_docs
            for j, concept_id in enumerate(graph.concept_ids.tolist()):
                writer.writerow([f"c{concept_id}", int(labels[offset + j])])


def read_partition_csv(path: str | Path) -> tuple[dict[int, int], dict[int, int]]:
    """Inverse of `write_partition_csv`.

    Returns (document id -> cluster, concept id -> cluster); the concept
    map is empty for projection partitions.
    """
    docs: dict[int, int] = {}
    concepts: dict[int, int] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = csv.reader(fh)
        header = next(rows, None)
        if header != ["node", "cluster"]:
            raise ValueError(f"{path}: expected header node,cluster, got {header}")
        for lineno, row in enumerate(rows, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"{path}: line {lineno}: expected 2 fields")
            node, cluster = row
            try:
                label = int(cluster)
                if node.startswith("c"):
                    concepts[int(node[1:])] = label
                else:
                    docs[int(node)] = label
            except ValueError:
                raise ValueError(
                    f"{path}: line {lineno}: malformed row {row!r}"
                ) from None
    return docs, concepts
