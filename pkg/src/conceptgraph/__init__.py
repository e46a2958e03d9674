"""Concept-annotated document corpora as networks: build, cluster, audit.

The package turns a corpus of concept-tagged documents into two network
views (an unweighted document-concept bipartite graph and an idf-weighted
cosine-similarity projection), finds maximum-modularity partitions of both
with a seeded greedy optimizer, and compares the detected clusters against
an external document classification.
"""

__version__ = "0.1.0"

from conceptgraph.corpus import (
    ConceptEntry,
    ConceptVector,
    Corpus,
    CorpusStats,
    DocumentRecord,
    compute_idf,
    concept_vector,
    corpus_stats,
    load_corpus,
    load_corpus_bin,
    save_corpus,
    split_by_category_count,
)
from conceptgraph.graph import (
    BipartiteGraph,
    WeightedGraph,
    build_bipartite,
    build_projection,
    load_graph,
    projection_edge_count,
    save_graph,
)
from conceptgraph.modularity import (
    Partition,
    best_of_runs,
    brute_force_max,
    louvain,
    modularity_bipartite,
    modularity_unipartite,
    read_partition_csv,
    write_partition_csv,
)
from conceptgraph.compare import (
    CompositionMatrix,
    ContingencyTable,
    CooccurrenceMatrix,
    LabeledPartitionPair,
    composition_matrix,
    contingency,
    cooccurrence_matrix,
    entropy,
    filter_single_node_clusters,
    nmi,
)
from conceptgraph.report import (
    ConceptRanking,
    RankingEntry,
    export_report,
    representative_concepts,
)
from conceptgraph.pipeline import PipelineConfig, generate_synthetic, run_pipeline

__all__ = [
    "ConceptEntry",
    "ConceptVector",
    "Corpus",
    "CorpusStats",
    "DocumentRecord",
    "compute_idf",
    "concept_vector",
    "corpus_stats",
    "load_corpus",
    "load_corpus_bin",
    "save_corpus",
    "split_by_category_count",
    "BipartiteGraph",
    "WeightedGraph",
    "build_bipartite",
    "build_projection",
    "load_graph",
    "projection_edge_count",
    "save_graph",
    "Partition",
    "best_of_runs",
    "brute_force_max",
    "louvain",
    "modularity_bipartite",
    "modularity_unipartite",
    "read_partition_csv",
    "write_partition_csv",
    "CompositionMatrix",
    "ContingencyTable",
    "CooccurrenceMatrix",
    "LabeledPartitionPair",
    "composition_matrix",
    "contingency",
    "cooccurrence_matrix",
    "entropy",
    "filter_single_node_clusters",
    "nmi",
    "ConceptRanking",
    "RankingEntry",
    "export_report",
    "representative_concepts",
    "PipelineConfig",
    "generate_synthetic",
    "run_pipeline",
    "__version__",
]
