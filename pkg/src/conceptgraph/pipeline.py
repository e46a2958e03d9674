"""End-to-end orchestration and the planted-block synthetic generator.

`run_pipeline` chains ingest, graph construction, repeated clustering,
comparison against the category labels, and reporting, writing every
artifact into one output directory together with a manifest of SHA-256
checksums. With a fixed configuration the emitted files are
byte-identical across runs; only the recorded timings differ.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from conceptgraph import __version__
from conceptgraph.compare import filter_single_node_clusters, nmi, write_comparison
from conceptgraph.corpus import (
    Corpus,
    DocumentRecord,
    corpus_stats,
    load_corpus,
    load_corpus_bin,
    save_corpus,
    split_by_category_count,
)
from conceptgraph.errors import StageError
from conceptgraph.graph import build_bipartite, build_projection, save_graph, write_edges_csv
from conceptgraph.modularity import best_of_runs, write_partition_csv
from conceptgraph.report import export_report, write_report_json

DEFAULT_RUNS_BP = 1000
DEFAULT_RUNS_IDF = 100
MODES = ("bp", "idf")


@dataclass
class PipelineConfig:
    """Everything a pipeline run depends on.

    Either `corpus` (a saved binary corpus) or both `vocab` and `docs`
    (the text interchange files) must be set. `mode` selects which
    representations to cluster; run counts default to the repeated-runs
    protocol (1000 joint bipartite runs, 100 projection runs).
    """

    out_dir: Path
    vocab: Path | None = None
    docs: Path | None = None
    corpus: Path | None = None
    mode: str = "both"
    runs_bp: int = DEFAULT_RUNS_BP
    runs_idf: int = DEFAULT_RUNS_IDF
    seed: int = 0
    top_k: int = 10
    threads: int = 1
    export_edges: bool = False

    def __post_init__(self) -> None:
        self.out_dir = Path(self.out_dir)
        if self.mode not in ("bp", "idf", "both"):
            raise ValueError(f"mode must be bp, idf or both, got {self.mode!r}")
        if self.runs_bp < 1 or self.runs_idf < 1:
            raise ValueError("run counts must be >= 1")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.corpus is None and (self.vocab is None or self.docs is None):
            raise ValueError(
                "either a binary corpus or both vocabulary and documents "
                "paths are required"
            )

    @property
    def modes(self) -> tuple[str, ...]:
        return MODES if self.mode == "both" else (self.mode,)

    def runs_for(self, mode: str) -> int:
        return self.runs_bp if mode == "bp" else self.runs_idf

    def as_dict(self) -> dict:
        return {
            "vocab": str(self.vocab) if self.vocab else None,
            "docs": str(self.docs) if self.docs else None,
            "corpus": str(self.corpus) if self.corpus else None,
            "mode": self.mode,
            "runs_bp": self.runs_bp,
            "runs_idf": self.runs_idf,
            "seed": self.seed,
            "top_k": self.top_k,
            "export_edges": self.export_edges,
        }


def generate_synthetic(
    n_docs: int,
    n_concepts: int,
    n_blocks: int,
    p_in: float,
    p_out: float,
    seed: int,
) -> Corpus:
    """Planted co-cluster corpus: block-diagonal membership probabilities.

    Document i and concept j belong to blocks i mod n_blocks and
    j mod n_blocks; membership of concept j in document i is a Bernoulli
    draw with probability p_in inside a block and p_out across blocks.
    The document's category records its block, so the planted partition
    is recoverable from the category labels.
    """
    if n_docs < 1 or n_concepts < 1:
        raise ValueError("n_docs and n_concepts must be >= 1")
    if not 1 <= n_blocks <= min(n_docs, n_concepts):
        raise ValueError("n_blocks must be in [1, min(n_docs, n_concepts)]")
    if not (0.0 <= p_out <= 1.0 and 0.0 <= p_in <= 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    if p_in <= p_out:
        raise ValueError("p_in must exceed p_out (planted structure)")

    rng = np.random.default_rng(seed)
    doc_block = np.arange(n_docs, dtype=np.int64) % n_blocks
    concept_block = np.arange(n_concepts, dtype=np.int64) % n_blocks
    same = doc_block[:, np.newaxis] == concept_block[np.newaxis, :]
    prob = np.where(same, p_in, p_out)
    member = rng.random((n_docs, n_concepts)) < prob

    documents = [
        DocumentRecord(
            doc_id=i,
            external_id=f"doc-{i}",
            categories=(f"block-{doc_block[i]}",),
            concept_ids=frozenset(np.flatnonzero(member[i]).tolist()),
        )
        for i in range(n_docs)
    ]
    names = [f"concept-{j}" for j in range(n_concepts)]
    return Corpus.build(documents, names, [False] * n_concepts)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


class _Manifest:
    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.files: list[Path] = []
        self.timings: dict[str, float] = {}
        self.results: dict[str, dict] = {}

    def add(self, *paths: Path) -> None:
        self.files.extend(paths)

    def write(self, config: PipelineConfig) -> Path:
        payload = {
            "tool_version": __version__,
            "config": config.as_dict(),
            "files": {
                p.name: _sha256(p) for p in sorted(self.files, key=lambda p: p.name)
            },
            "results": self.results,
            "timings_s": {k: round(v, 6) for k, v in self.timings.items()},
        }
        path = self.out_dir / "manifest.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
            fh.write("\n")
        return path


class _Stage:
    """Times a stage and converts its failures into stage-named errors."""

    def __init__(self, name: str, manifest: _Manifest):
        self.name = name
        self.manifest = manifest

    def __enter__(self) -> "_Stage":
        self._t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        self.manifest.timings[self.name] = time.perf_counter() - self._t0
        if exc is not None and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


def run_pipeline(config: PipelineConfig, progress=None) -> dict:
    """Execute every stage and return the manifest dictionary.

    `progress`, when given, is called with one human-readable line per
    milestone (the CLI forwards these to standard output).
    """
    def say(line: str) -> None:
        if progress is not None:
            progress(line)

    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    manifest = _Manifest(out)

    with _Stage("ingest", manifest):
        if config.corpus is not None:
            corpus = load_corpus_bin(config.corpus)
        else:
            corpus = load_corpus(config.vocab, config.docs)
        corpus_bin = out / "corpus.bin"
        save_corpus(corpus, corpus_bin)
        stats = corpus_stats(corpus)
        stats_path = out / "stats.json"
        with open(stats_path, "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "N": stats.N,
                    "V": stats.V,
                    "V_gen": stats.V_gen,
                    "mean_k": stats.mean_k,
                    "max_k": stats.max_k,
                },
                fh,
                sort_keys=True,
                indent=2,
            )
            fh.write("\n")
        manifest.add(corpus_bin, stats_path)
        single, multi = split_by_category_count(corpus)
        if single.N == 0:
            raise ValueError("no single-category documents to cluster")
        say(f"ingest: N={corpus.N} single={single.N} multi={multi.N}")

    for mode in config.modes:
        with _Stage(f"build:{mode}", manifest):
            graph = build_bipartite(single) if mode == "bp" else build_projection(single)
            graph_path = out / f"graph_{mode}.bin"
            save_graph(graph, graph_path)
            manifest.add(graph_path)
            if config.export_edges:
                edges_path = out / f"edges_{mode}.csv"
                write_edges_csv(graph, edges_path)
                manifest.add(edges_path)

        with _Stage(f"cluster:{mode}", manifest):
            runs = config.runs_for(mode)
            part = best_of_runs(graph, runs, config.seed, threads=config.threads)
            part_path = out / f"partition_{mode}.csv"
            write_partition_csv(part, graph, part_path)
            manifest.add(part_path)
            say(
                f"kind={mode} runs={runs} best_seed={part.seed} Q={part.score!r}"
            )

        with _Stage(f"compare:{mode}", manifest):
            pair = filter_single_node_clusters(part, single.documents)
            paths = write_comparison(out / mode, pair, multi, single)
            manifest.add(*paths.values())
            score = nmi(pair)
            manifest.results[mode] = {
                "best_seed": part.seed,
                "modularity": None if math.isnan(part.score) else part.score,
                "nmi": score,
                "n_clusters": pair.n_clusters,
            }
            say(f"nmi_{mode}={score:.4f}")

        with _Stage(f"report:{mode}", manifest):
            report = export_report(
                single, part, pair, config.top_k, multi=multi if multi.N else None
            )
            report_path = out / f"report_{mode}.json"
            write_report_json(report, report_path)
            manifest.add(report_path)

    manifest_path = manifest.write(config)
    say(f"manifest: {manifest_path}")
    with open(manifest_path, "r", encoding="utf-8") as fh:
        return json.load(fh)
