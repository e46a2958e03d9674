"""Cluster characterization: representative concepts and the full report.

A cluster is described by the concepts its documents use most broadly:
each non-generic concept is scored by the percentage of the group's
documents that contain it. An alternative lift score (group frequency
relative to corpus frequency) is available behind a flag for exploration
but is not the default.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from conceptgraph.compare import (
    LabeledPartitionPair,
    composition_matrix,
    cooccurrence_matrix,
    nmi,
)
from conceptgraph.corpus import Corpus, DocumentRecord, corpus_stats
from conceptgraph.modularity import Partition

DEFAULT_TOP_K = 10


class RankingEntry(NamedTuple):
    name: str
    percentage: float
    count: int


@dataclass(frozen=True)
class ConceptRanking:
    """Top concepts of one document group.

    `entries` hold (concept name, percentage of the group's documents
    containing it, document count), ordered by the ranking score
    descending with ties broken by name ascending. `empty` flags a group
    with no documents (the ranking is then empty and meaningless).
    """

    cluster: int
    category_filter: str | None
    entries: tuple[RankingEntry, ...]
    group_size: int

    @property
    def empty(self) -> bool:
        return self.group_size == 0


def _rank_group(
    corpus: Corpus,
    group: Sequence[DocumentRecord],
    top_k: int,
    rank_by: str,
) -> tuple[RankingEntry, ...]:
    if not group:
        return ()
    generic = corpus.generic_ids
    counts: dict[int, int] = {}
    for doc in group:
        for cid in doc.concept_ids:
            if cid not in generic:
                counts[cid] = counts.get(cid, 0) + 1
    size = len(group)

    def percentage(cid: int) -> float:
        return 100.0 * counts[cid] / size

    if rank_by == "frequency":
        def key(cid: int):
            return (-percentage(cid), corpus.concept(cid).name)
    elif rank_by == "lift":
        def key(cid: int):
            entry = corpus.concept(cid)
            lift = (counts[cid] / size) / (entry.doc_count / corpus.N)
            return (-lift, entry.name)
    else:
        raise ValueError(f"unknown ranking score {rank_by!r}")

    ranked = sorted(counts, key=key)[:top_k]
    return tuple(
        RankingEntry(corpus.concept(cid).name, percentage(cid), counts[cid])
        for cid in ranked
    )


def representative_concepts(
    corpus: Corpus,
    partition: Partition | np.ndarray,
    cluster: int,
    top_k: int = DEFAULT_TOP_K,
    category_filter: str | None = None,
    rank_by: str = "frequency",
) -> ConceptRanking:
    """Most representative non-generic concepts of one cluster.

    The group is the cluster's documents (document node i of the
    partition corresponds to `corpus.documents[i]`), intersected with the
    documents carrying `category_filter` when one is given. An empty
    group yields an empty ranking flagged via `ConceptRanking.empty`.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    if isinstance(partition, Partition):
        labels = partition.doc_assignment()
    else:
        labels = np.asarray(partition, dtype=np.int64)
    if labels.size != corpus.N:
        raise ValueError(
            f"partition covers {labels.size} documents, corpus has {corpus.N}"
        )
    if not (labels == cluster).any():
        raise ValueError(f"cluster {cluster} does not exist in the partition")
    group = [
        corpus.documents[i]
        for i in np.flatnonzero(labels == cluster).tolist()
        if category_filter is None
        or category_filter in corpus.documents[i].categories
    ]
    return ConceptRanking(
        cluster=int(cluster),
        category_filter=category_filter,
        entries=_rank_group(corpus, group, top_k, rank_by),
        group_size=len(group),
    )


def export_report(
    corpus: Corpus,
    partition: Partition,
    pair: LabeledPartitionPair,
    top_k: int = DEFAULT_TOP_K,
    multi: Corpus | None = None,
    rank_by: str = "frequency",
    category_filter: str | None = None,
) -> dict:
    """Assemble the full structured report as one JSON-ready dictionary.

    Contains corpus stats, the partition summary (modularity, cluster
    sizes after single-document clusters are dropped), NMI against the
    external categories, the composition matrix, the category
    co-occurrence matrices when the multi-category sub-corpus is given,
    and per-cluster concept rankings. Cluster ids match the pair's dense
    relabeling, so they line up with the composition matrix rows. A
    `category_filter` restricts the ranking groups (not the matrices) to
    that category's documents, the drill-down view of a category spread
    across clusters. Percentages are rounded to 2 decimals; everything
    else is exact.
    """
    stats = corpus_stats(corpus)
    by_external = {d.external_id: d for d in corpus.documents}
    groups: dict[int, list[DocumentRecord]] = {}
    for item, p in zip(pair.items, pair.P.tolist()):
        groups.setdefault(p, []).append(by_external[item])

    comp = composition_matrix(pair)
    clusters = []
    for p in sorted(groups):
        group = groups[p]
        if category_filter is not None:
            group = [d for d in group if category_filter in d.categories]
        entries = _rank_group(corpus, group, top_k, rank_by)
        clusters.append(
            {
                "cluster": p,
                "size": len(group),
                "concepts": [
                    {
                        "name": e.name,
                        "percentage": round(e.percentage, 2),
                        "count": e.count,
                    }
                    for e in entries
                ],
            }
        )

    report = {
        "corpus": {
            "N": stats.N,
            "V": stats.V,
            "V_gen": stats.V_gen,
            "mean_k": stats.mean_k,
            "max_k": stats.max_k,
        },
        "partition": {
            "kind": partition.graph_kind,
            "seed": partition.seed,
            "modularity": None if math.isnan(partition.score) else partition.score,
            "n_clusters": pair.n_clusters,
            "cluster_sizes": [len(groups[p]) for p in sorted(groups)],
        },
        "nmi": {
            "nmi": nmi(pair),
            "n_items": pair.n_items,
            "n_clusters": pair.n_clusters,
            "n_categories": pair.n_categories,
        },
        "composition": {
            "clusters": list(comp.cluster_labels),
            "categories": list(comp.category_labels),
            "matrix": [[float(x) for x in row] for row in comp.matrix],
        },
        "clusters": clusters,
    }
    if multi is not None:
        cooc = cooccurrence_matrix(multi, corpus)
        report["cooccurrence"] = {
            "categories": list(cooc.labels),
            "matrix": [[float(x) for x in row] for row in cooc.matrix],
            "raw": [[int(x) for x in row] for row in cooc.raw],
        }
    return report


def write_report_json(report: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")


def format_report_text(report: dict) -> str:
    """Aligned plain-text rendering of a report's cluster rankings."""
    lines = []
    c = report["corpus"]
    lines.append(
        f"corpus: N={c['N']} V={c['V']} V_gen={c['V_gen']} "
        f"mean_k={c['mean_k']:.2f}"
    )
    p = report["partition"]
    q = p["modularity"]
    lines.append(
        f"partition: kind={p['kind']} clusters={p['n_clusters']} "
        f"Q={'undefined' if q is None else format(q, '.6f')} "
        f"nmi={report['nmi']['nmi']:.4f}"
    )
    for block in report["clusters"]:
        lines.append("")
        lines.append(f"cluster {block['cluster']} ({block['size']} documents)")
        names = [e["name"] for e in block["concepts"]]
        width = max((len(n) for n in names), default=7)
        width = max(width, len("concept"))
        lines.append(f"  {'concept'.ljust(width)}  {'%':>6}  {'docs':>6}")
        for e in block["concepts"]:
            lines.append(
                f"  {e['name'].ljust(width)}  {e['percentage']:>6.2f}  "
                f"{e['count']:>6}"
            )
    return "\n".join(lines) + "\n"
