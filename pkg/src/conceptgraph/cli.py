"""Command-line interface.

Subcommands mirror the pipeline stages (ingest, stats, build, cluster,
compare, report) plus `synth` for planted test corpora and `pipeline`
for the full orchestrated run. Exit codes: 0 success, 1 usage error,
2 data error (unreadable or inconsistent inputs), 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from conceptgraph import __version__
from conceptgraph.compare import filter_single_node_clusters, write_comparison
from conceptgraph.corpus import (
    Corpus,
    corpus_stats,
    load_corpus,
    load_corpus_bin,
    save_corpus,
    split_by_category_count,
)
from conceptgraph.errors import ConceptGraphError, StageError
from conceptgraph.graph import (
    BipartiteGraph,
    build_bipartite,
    build_projection,
    load_graph,
    save_graph,
    write_edges_csv,
)
from conceptgraph.modularity import (
    Partition,
    best_of_runs,
    canonicalize,
    read_partition_csv,
    write_partition_csv,
)
from conceptgraph.pipeline import (
    DEFAULT_RUNS_BP,
    DEFAULT_RUNS_IDF,
    PipelineConfig,
    generate_synthetic,
    run_pipeline,
)
from conceptgraph.report import export_report, format_report_text, write_report_json

THREADS_ENV = "CONCEPTGRAPH_THREADS"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse's default usage-error exit code is 2; this CLI reserves
    2 for data errors, so usage problems are rethrown and mapped to 1."""

    def error(self, message: str):
        raise _UsageError(f"{self.prog}: {message}")


def _resolve_threads(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(THREADS_ENV, "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(
                f"{THREADS_ENV} must be an integer, got {env!r}"
            ) from None
    return 1


def _cmd_ingest(args) -> int:
    corpus = load_corpus(args.vocab, args.docs)
    save_corpus(corpus, args.out)
    print(f"ingested N={corpus.N} V={corpus.V} -> {args.out}")
    return 0


def _cmd_stats(args) -> int:
    corpus = load_corpus_bin(args.corpus)
    stats = corpus_stats(corpus)
    payload = {
        "N": stats.N,
        "V": stats.V,
        "V_gen": stats.V_gen,
        "mean_k": stats.mean_k,
        "max_k": stats.max_k,
    }
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        width = max(len(k) for k in payload)
        for key in ("N", "V", "V_gen", "mean_k", "max_k"):
            value = payload[key]
            text = f"{value:.2f}" if isinstance(value, float) else str(value)
            print(f"{key.ljust(width)}  {text}")
    return 0


def _select_subset(corpus: Corpus, subset: str) -> Corpus:
    if subset == "all":
        return corpus
    single, multi = split_by_category_count(corpus)
    return single if subset == "single" else multi


def _cmd_build(args) -> int:
    corpus = _select_subset(load_corpus_bin(args.infile), args.subset)
    if corpus.N == 0:
        raise ValueError(f"no documents in the {args.subset!r} subset")
    graph = build_bipartite(corpus) if args.mode == "bp" else build_projection(corpus)
    save_graph(graph, args.out)
    if isinstance(graph, BipartiteGraph):
        print(f"bp graph: docs={graph.n_docs} concepts={graph.n_concepts} m={graph.m}")
    else:
        print(f"idf graph: docs={graph.n_nodes} edges={graph.edge_count}")
    if args.export:
        write_edges_csv(graph, args.export)
        print(f"edges -> {args.export}")
    return 0


def _cmd_cluster(args) -> int:
    graph = load_graph(args.infile)
    kind = "bp" if isinstance(graph, BipartiteGraph) else "idf"
    runs = args.runs
    if runs is None:
        runs = DEFAULT_RUNS_BP if kind == "bp" else DEFAULT_RUNS_IDF
    part = best_of_runs(graph, runs, args.seed, threads=_resolve_threads(args.threads))
    write_partition_csv(part, graph, args.out)
    print(f"kind={kind} runs={runs} best_seed={part.seed} Q={part.score!r}")
    return 0


def _docs_from_partition(corpus: Corpus, partition_path):
    doc_map, concept_map = read_partition_csv(partition_path)
    docs = [corpus.document(doc_id) for doc_id in doc_map]
    labels = np.fromiter(doc_map.values(), dtype=np.int64, count=len(doc_map))
    return docs, labels, bool(concept_map)


def _cmd_compare(args) -> int:
    corpus = load_corpus_bin(args.corpus)
    single, multi = split_by_category_count(corpus)
    docs, labels, _ = _docs_from_partition(corpus, args.partition)
    pair = filter_single_node_clusters(labels, docs)
    paths = write_comparison(args.out_prefix, pair, multi, single)
    for name in sorted(paths):
        print(f"{name} -> {paths[name]}")
    return 0


def _cmd_report(args) -> int:
    full = load_corpus_bin(args.corpus)
    docs, labels, has_concepts = _docs_from_partition(full, args.partition)
    names = [e.name for e in full.vocabulary]
    flags = [e.is_generic for e in full.vocabulary]
    corpus = Corpus.build(list(docs), names, flags)
    _, multi = split_by_category_count(full)
    partition = Partition(
        assignment=canonicalize(labels),
        score=float("nan"),
        graph_kind="bp" if has_concepts else "idf",
        seed=-1,
        n_docs=len(docs),
    )
    pair = filter_single_node_clusters(labels, docs)
    report = export_report(
        corpus,
        partition,
        pair,
        args.top_k,
        multi=multi if multi.N else None,
        rank_by=args.rank_by,
        category_filter=args.category,
    )
    if args.format == "text":
        text = format_report_text(report)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            print(text, end="")
    else:
        if args.out:
            write_report_json(report, args.out)
        else:
            print(json.dumps(report, sort_keys=True, indent=2))
    if args.out:
        print(f"report -> {args.out}")
    return 0


def _cmd_synth(args) -> int:
    corpus = generate_synthetic(
        args.n_docs, args.n_concepts, args.blocks, args.p_in, args.p_out, args.seed
    )
    save_corpus(corpus, args.out)
    stats = corpus_stats(corpus)
    print(
        f"synthetic corpus: N={stats.N} V={stats.V} blocks={args.blocks} "
        f"mean_k={stats.mean_k:.2f} -> {args.out}"
    )
    return 0


def _read_config_file(path) -> dict[str, str]:
    """Flat `key = value` file; `#` starts a comment; keys match flag names."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(
                    f"{path}: line {lineno}: expected key = value, got {raw.rstrip()!r}"
                )
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


_CONFIG_INT_KEYS = ("runs", "runs_bp", "runs_idf", "seed", "top_k", "threads")
_CONFIG_PATH_KEYS = ("vocab", "docs", "corpus", "out_dir")


def _merge_pipeline_config(args) -> PipelineConfig:
    file_values = _read_config_file(args.config) if args.config else {}

    def pick(key: str, flag_value):
        if flag_value is not None:
            return flag_value
        if key in file_values:
            value = file_values[key]
            if key in _CONFIG_INT_KEYS:
                return int(value)
            if key == "export_edges":
                return value.lower() in ("1", "true", "yes")
            return value
        return None

    runs = pick("runs", args.runs)
    runs_bp = pick("runs_bp", args.runs_bp)
    runs_idf = pick("runs_idf", args.runs_idf)
    out_dir = pick("out_dir", args.out_dir)
    if out_dir is None:
        raise ValueError("an output directory is required (--out-dir)")
    return PipelineConfig(
        out_dir=Path(out_dir),
        vocab=pick("vocab", args.vocab),
        docs=pick("docs", args.docs),
        corpus=pick("corpus", args.corpus),
        mode=pick("mode", args.mode) or "both",
        runs_bp=runs_bp if runs_bp is not None else (runs or DEFAULT_RUNS_BP),
        runs_idf=runs_idf if runs_idf is not None else (runs or DEFAULT_RUNS_IDF),
        seed=pick("seed", args.seed) or 0,
        top_k=pick("top_k", args.top_k) or 10,
        threads=_resolve_threads(pick("threads", args.threads)),
        export_edges=bool(pick("export_edges", args.export_edges or None)),
    )


def _cmd_pipeline(args) -> int:
    config = _merge_pipeline_config(args)
    run_pipeline(config, progress=print)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="conceptgraph", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate text inputs into a binary corpus")
    p.add_argument("--vocab", required=True, help="vocabulary TSV")
    p.add_argument("--docs", required=True, help="documents JSONL")
    p.add_argument("--out", required=True, help="output corpus file")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("stats", help="print corpus statistics")
    p.add_argument("corpus", help="binary corpus file")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("build", help="construct a network representation")
    p.add_argument("--mode", choices=("bp", "idf"), required=True)
    p.add_argument("--in", dest="infile", required=True, help="binary corpus file")
    p.add_argument("--out", required=True, help="output graph file")
    p.add_argument(
        "--subset",
        choices=("single", "multi", "all"),
        default="single",
        help="which documents to include (default: single-category ones, "
        "the set the study protocol clusters)",
    )
    p.add_argument("--export", metavar="EDGES_CSV", help="also write an edge list CSV")
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("cluster", help="repeated seeded clustering, keep the best")
    p.add_argument("--in", dest="infile", required=True, help="binary graph file")
    p.add_argument(
        "--runs",
        type=int,
        help=f"number of runs (default {DEFAULT_RUNS_BP} joint, "
        f"{DEFAULT_RUNS_IDF} projection)",
    )
    p.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    p.add_argument("--threads", type=int, help=f"worker threads (or ${THREADS_ENV})")
    p.add_argument("--out", required=True, help="output partition CSV")
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("compare", help="score a partition against the categories")
    p.add_argument("--partition", required=True, help="partition CSV")
    p.add_argument("--corpus", required=True, help="binary corpus file")
    p.add_argument(
        "--out-prefix",
        required=True,
        help="directory or path prefix for nmi.json and the matrix CSVs",
    )
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("report", help="cluster report with representative concepts")
    p.add_argument("--corpus", required=True, help="binary corpus file")
    p.add_argument("--partition", required=True, help="partition CSV")
    p.add_argument("--top-k", type=int, default=10, help="concepts per cluster")
    p.add_argument("--category", help="restrict rankings to one category")
    p.add_argument(
        "--rank-by",
        choices=("frequency", "lift"),
        default="frequency",
        help="ranking score (default: within-group document frequency)",
    )
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--out", help="output file (default: standard output)")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("synth", help="generate a planted-block synthetic corpus")
    p.add_argument("--n-docs", type=int, required=True)
    p.add_argument("--n-concepts", type=int, required=True)
    p.add_argument("--blocks", type=int, required=True)
    p.add_argument("--p-in", type=float, required=True)
    p.add_argument("--p-out", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output corpus file")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("pipeline", help="run every stage into one output directory")
    p.add_argument("--config", help="flat key = value config file; flags override")
    p.add_argument("--vocab", help="vocabulary TSV")
    p.add_argument("--docs", help="documents JSONL")
    p.add_argument("--corpus", help="binary corpus file (alternative input)")
    p.add_argument("--out-dir", help="output directory")
    p.add_argument("--mode", choices=("bp", "idf", "both"))
    p.add_argument("--runs", type=int, help="run count for both modes")
    p.add_argument("--runs-bp", type=int, help="joint-mode run count")
    p.add_argument("--runs-idf", type=int, help="projection-mode run count")
    p.add_argument("--seed", type=int)
    p.add_argument("--top-k", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--export-edges", action="store_true", default=False)
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        data = isinstance(exc.cause, (ConceptGraphError, OSError, ValueError, KeyError))
        return 2 if data else 3
    except (ConceptGraphError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())
