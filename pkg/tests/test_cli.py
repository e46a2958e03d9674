import json
import re
import subprocess
import sys

import pytest

from conceptgraph.cli import THREADS_ENV, main
from conceptgraph.corpus import load_corpus_bin
from conceptgraph.graph import BipartiteGraph, WeightedGraph, load_graph

VOCAB = """concept_id\tname\tgeneric
0\talpha\t0
1\tbeta\t0
2\tgamma\t0
3\tdelta\t0
4\tepsilon\t0
5\tzeta\t0
6\tmethod\t1
"""

# two clean category blocks, one doc tagged with both
DOCS = "\n".join(
    json.dumps(d)
    for d in [
        {"id": "a", "categories": ["x"], "concepts": [0, 1, 6]},
        {"id": "b", "categories": ["x"], "concepts": [0, 2, 6]},
        {"id": "c", "categories": ["x"], "concepts": [1, 2, 6]},
        {"id": "d", "categories": ["y"], "concepts": [3, 4, 6]},
        {"id": "e", "categories": ["y"], "concepts": [3, 5, 6]},
        {"id": "f", "categories": ["y"], "concepts": [4, 5, 6]},
        {"id": "m", "categories": ["x", "y"], "concepts": [0, 3]},
    ]
)


@pytest.fixture
def workspace(tmp_path):
    vocab = tmp_path / "vocab.tsv"
    docs = tmp_path / "docs.jsonl"
    vocab.write_text(VOCAB)
    docs.write_text(DOCS + "\n")
    return tmp_path


@pytest.fixture
def corpus_bin(workspace):
    out = workspace / "corpus.bin"
    code = main(
        [
            "ingest",
            "--vocab",
            str(workspace / "vocab.tsv"),
            "--docs",
            str(workspace / "docs.jsonl"),
            "--out",
            str(out),
        ]
    )
    assert code == 0
    return out


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestIngestAndStats:
    def test_ingest_roundtrip(self, workspace, capsys):
        out = workspace / "corpus.bin"
        code, stdout, _ = run_cli(
            capsys,
            "ingest",
            "--vocab",
            workspace / "vocab.tsv",
            "--docs",
            workspace / "docs.jsonl",
            "--out",
            out,
        )
        assert code == 0
        assert "ingested N=7 V=7" in stdout
        corpus = load_corpus_bin(out)
        assert corpus.N == 7
        assert corpus.document(6).categories == ("x", "y")

    def test_stats_text(self, corpus_bin, capsys):
        code, stdout, _ = run_cli(capsys, "stats", corpus_bin)
        assert code == 0
        assert re.search(r"^N\s+7$", stdout, re.M)
        assert re.search(r"^V_gen\s+1$", stdout, re.M)

    def test_stats_json(self, corpus_bin, capsys):
        code, stdout, _ = run_cli(capsys, "stats", corpus_bin, "--format", "json")
        assert code == 0
        payload = json.loads(stdout)
        assert payload["N"] == 7
        assert payload["V"] == 7
        assert payload["V_gen"] == 1
        # the generic concept does not count toward per-document sizes
        assert payload["max_k"] == 2

    def test_missing_input_is_a_data_error(self, workspace, capsys):
        code, _, stderr = run_cli(
            capsys,
            "ingest",
            "--vocab",
            workspace / "nope.tsv",
            "--docs",
            workspace / "docs.jsonl",
            "--out",
            workspace / "c.bin",
        )
        assert code == 2
        assert "error:" in stderr

    def test_malformed_vocab_is_a_data_error(self, workspace, capsys):
        bad = workspace / "bad.tsv"
        bad.write_text("id\tname\n0\talpha\n")
        code, _, stderr = run_cli(
            capsys,
            "ingest",
            "--vocab",
            bad,
            "--docs",
            workspace / "docs.jsonl",
            "--out",
            workspace / "c.bin",
        )
        assert code == 2
        assert "line 1" in stderr


class TestUsageErrors:
    def test_unknown_subcommand(self, capsys):
        code, _, stderr = run_cli(capsys, "frobnicate")
        assert code == 1
        assert "error:" in stderr

    def test_unknown_flag(self, corpus_bin, capsys):
        code, _, _ = run_cli(capsys, "stats", corpus_bin, "--loud")
        assert code == 1

    def test_bad_integer(self, capsys):
        code, _, _ = run_cli(
            capsys, "cluster", "--in", "g.bin", "--runs", "many", "--out", "p.csv"
        )
        assert code == 1

    def test_missing_required_flag(self, capsys):
        code, _, _ = run_cli(capsys, "build", "--mode", "bp")
        assert code == 1

    def test_version(self, capsys):
        code, stdout, _ = run_cli(capsys, "--version")
        assert code == 0
        assert stdout.strip() == "0.1.0"


class TestBuild:
    def test_bp_default_single_subset(self, workspace, corpus_bin, capsys):
        out = workspace / "g.bin"
        code, stdout, _ = run_cli(
            capsys, "build", "--mode", "bp", "--in", corpus_bin, "--out", out
        )
        assert code == 0
        assert "bp graph: docs=6" in stdout
        graph = load_graph(out)
        assert isinstance(graph, BipartiteGraph)
        assert graph.n_docs == 6

    def test_idf_mode(self, workspace, corpus_bin, capsys):
        out = workspace / "g.bin"
        code, stdout, _ = run_cli(
            capsys, "build", "--mode", "idf", "--in", corpus_bin, "--out", out
        )
        assert code == 0
        graph = load_graph(out)
        assert isinstance(graph, WeightedGraph)
        assert graph.n_nodes == 6

    def test_subset_all_keeps_every_document(self, workspace, corpus_bin, capsys):
        out = workspace / "g.bin"
        code, _, _ = run_cli(
            capsys,
            "build",
            "--mode",
            "bp",
            "--in",
            corpus_bin,
            "--out",
            out,
            "--subset",
            "all",
        )
        assert code == 0
        assert load_graph(out).n_docs == 7

    def test_empty_subset_is_a_data_error(self, workspace, capsys):
        vocab = workspace / "vocab.tsv"
        docs = workspace / "only_single.jsonl"
        docs.write_text(
            json.dumps({"id": "a", "categories": ["x"], "concepts": [0]}) + "\n"
        )
        corpus = workspace / "single_only.bin"
        assert (
            main(
                [
                    "ingest",
                    "--vocab",
                    str(vocab),
                    "--docs",
                    str(docs),
                    "--out",
                    str(corpus),
                ]
            )
            == 0
        )
        code, _, stderr = run_cli(
            capsys,
            "build",
            "--mode",
            "bp",
            "--in",
            corpus,
            "--out",
            workspace / "g.bin",
            "--subset",
            "multi",
        )
        assert code == 2
        assert "no documents" in stderr

    def test_export_edges(self, workspace, corpus_bin, capsys):
        out = workspace / "g.bin"
        edges = workspace / "edges.csv"
        code, stdout, _ = run_cli(
            capsys,
            "build",
            "--mode",
            "bp",
            "--in",
            corpus_bin,
            "--out",
            out,
            "--export",
            edges,
        )
        assert code == 0
        assert f"edges -> {edges}" in stdout
        lines = edges.read_text().splitlines()
        assert len(lines) > 1

    def test_wrong_artifact_kind_is_a_data_error(self, workspace, corpus_bin, capsys):
        graph_path = workspace / "g.bin"
        run_cli(capsys, "build", "--mode", "bp", "--in", corpus_bin, "--out", graph_path)
        code, _, stderr = run_cli(
            capsys,
            "build",
            "--mode",
            "bp",
            "--in",
            graph_path,
            "--out",
            workspace / "h.bin",
        )
        assert code == 2
        assert "error:" in stderr


@pytest.fixture
def bp_graph(workspace, corpus_bin):
    out = workspace / "graph_bp.bin"
    assert (
        main(["build", "--mode", "bp", "--in", str(corpus_bin), "--out", str(out)])
        == 0
    )
    return out


class TestCluster:
    def test_summary_line_and_artifact(self, workspace, bp_graph, capsys):
        out = workspace / "partition.csv"
        code, stdout, _ = run_cli(
            capsys,
            "cluster",
            "--in",
            bp_graph,
            "--runs",
            5,
            "--seed",
            3,
            "--out",
            out,
        )
        assert code == 0
        assert re.search(
            r"^kind=bp runs=5 best_seed=\d+ Q=-?\d+\.\d+$", stdout, re.M
        )
        assert out.read_text().startswith("node,cluster\n")

    def test_repeat_runs_are_byte_identical(self, workspace, bp_graph, capsys):
        a = workspace / "a.csv"
        b = workspace / "b.csv"
        _, out_a, _ = run_cli(
            capsys, "cluster", "--in", bp_graph, "--runs", 5, "--seed", 3, "--out", a
        )
        _, out_b, _ = run_cli(
            capsys, "cluster", "--in", bp_graph, "--runs", 5, "--seed", 3, "--out", b
        )
        assert a.read_bytes() == b.read_bytes()
        assert out_a == out_b

    def test_thread_env_does_not_change_results(
        self, workspace, bp_graph, capsys, monkeypatch
    ):
        a = workspace / "a.csv"
        b = workspace / "b.csv"
        run_cli(
            capsys,
            "cluster",
            "--in",
            bp_graph,
            "--runs",
            6,
            "--seed",
            1,
            "--threads",
            "1",
            "--out",
            a,
        )
        monkeypatch.setenv(THREADS_ENV, "3")
        run_cli(
            capsys, "cluster", "--in", bp_graph, "--runs", 6, "--seed", 1, "--out", b
        )
        assert a.read_bytes() == b.read_bytes()

    def test_invalid_thread_env_is_a_data_error(
        self, workspace, bp_graph, capsys, monkeypatch
    ):
        monkeypatch.setenv(THREADS_ENV, "several")
        code, _, stderr = run_cli(
            capsys,
            "cluster",
            "--in",
            bp_graph,
            "--runs",
            2,
            "--out",
            workspace / "p.csv",
        )
        assert code == 2
        assert THREADS_ENV in stderr

    def test_corpus_given_instead_of_graph(self, workspace, corpus_bin, capsys):
        code, _, stderr = run_cli(
            capsys,
            "cluster",
            "--in",
            corpus_bin,
            "--runs",
            2,
            "--out",
            workspace / "p.csv",
        )
        assert code == 2
        assert "error:" in stderr


@pytest.fixture
def partition_csv(workspace, bp_graph):
    out = workspace / "partition.csv"
    assert (
        main(
            [
                "cluster",
                "--in",
                str(bp_graph),
                "--runs",
                "10",
                "--seed",
                "0",
                "--out",
                str(out),
            ]
        )
        == 0
    )
    return out


class TestCompare:
    def test_writes_four_artifacts(self, workspace, corpus_bin, partition_csv, capsys):
        prefix = workspace / "cmp"
        prefix.mkdir()
        code, stdout, _ = run_cli(
            capsys,
            "compare",
            "--partition",
            partition_csv,
            "--corpus",
            corpus_bin,
            "--out-prefix",
            prefix,
        )
        assert code == 0
        for name in ("nmi.json", "composition.csv", "cooccurrence.csv",
                     "cooccurrence_raw.csv"):
            assert (prefix / name).exists()
            assert name in stdout
        payload = json.loads((prefix / "nmi.json").read_text())
        assert set(payload) == {"nmi", "n_items", "n_clusters", "n_categories"}
        assert payload["n_items"] == 6
        # the planted blocks are trivially recoverable on this toy corpus
        assert payload["nmi"] == 1.0

    def test_prefix_named_files(self, workspace, corpus_bin, partition_csv, capsys):
        code, _, _ = run_cli(
            capsys,
            "compare",
            "--partition",
            partition_csv,
            "--corpus",
            corpus_bin,
            "--out-prefix",
            workspace / "run7",
        )
        assert code == 0
        assert (workspace / "run7_nmi.json").exists()
        assert (workspace / "run7_composition.csv").exists()


class TestReport:
    def test_json_to_stdout(self, corpus_bin, partition_csv, capsys):
        code, stdout, _ = run_cli(
            capsys,
            "report",
            "--corpus",
            corpus_bin,
            "--partition",
            partition_csv,
            "--top-k",
            3,
        )
        assert code == 0
        report = json.loads(stdout)
        assert report["corpus"]["N"] == 6
        assert report["partition"]["kind"] == "bp"
        assert len(report["clusters"]) == report["nmi"]["n_clusters"]
        for block in report["clusters"]:
            assert len(block["concepts"]) <= 3
            names = [c["name"] for c in block["concepts"]]
            assert "method" not in names
        assert "cooccurrence" in report

    def test_text_to_file(self, workspace, corpus_bin, partition_csv, capsys):
        out = workspace / "report.txt"
        code, stdout, _ = run_cli(
            capsys,
            "report",
            "--corpus",
            corpus_bin,
            "--partition",
            partition_csv,
            "--format",
            "text",
            "--out",
            out,
        )
        assert code == 0
        assert f"report -> {out}" in stdout
        assert out.read_text().startswith("corpus: N=6")

    def test_category_filter(self, corpus_bin, partition_csv, capsys):
        code, stdout, _ = run_cli(
            capsys,
            "report",
            "--corpus",
            corpus_bin,
            "--partition",
            partition_csv,
            "--category",
            "x",
        )
        assert code == 0
        report = json.loads(stdout)
        assert sum(b["size"] for b in report["clusters"]) == 3

    def test_rank_by_choices_enforced(self, corpus_bin, partition_csv, capsys):
        code, _, _ = run_cli(
            capsys,
            "report",
            "--corpus",
            corpus_bin,
            "--partition",
            partition_csv,
            "--rank-by",
            "pagerank",
        )
        assert code == 1


class TestSynth:
    def test_generates_loadable_corpus(self, tmp_path, capsys):
        out = tmp_path / "synth.bin"
        code, stdout, _ = run_cli(
            capsys,
            "synth",
            "--n-docs",
            30,
            "--n-concepts",
            40,
            "--blocks",
            3,
            "--p-in",
            "0.5",
            "--p-out",
            "0.05",
            "--seed",
            5,
            "--out",
            out,
        )
        assert code == 0
        assert "blocks=3" in stdout
        corpus = load_corpus_bin(out)
        assert corpus.N == 30
        assert corpus.V == 40
        assert corpus.document(0).categories == ("block-0",)
        assert corpus.document(4).categories == ("block-1",)

    def test_flat_probabilities_rejected(self, tmp_path, capsys):
        code, _, stderr = run_cli(
            capsys,
            "synth",
            "--n-docs",
            10,
            "--n-concepts",
            10,
            "--blocks",
            2,
            "--p-in",
            "0.2",
            "--p-out",
            "0.2",
            "--out",
            tmp_path / "s.bin",
        )
        assert code == 2
        assert "p_in" in stderr


def manifest_without_timings(path):
    payload = json.loads(path.read_text())
    payload.pop("timings_s")
    return payload


class TestPipeline:
    def test_both_modes_end_to_end(self, workspace, corpus_bin, capsys):
        out_dir = workspace / "out"
        code, stdout, _ = run_cli(
            capsys,
            "pipeline",
            "--corpus",
            corpus_bin,
            "--out-dir",
            out_dir,
            "--mode",
            "both",
            "--runs",
            8,
            "--seed",
            7,
        )
        assert code == 0
        manifest = json.loads((out_dir / "manifest.json").read_text())
        for name in (
            "corpus.bin",
            "stats.json",
            "graph_bp.bin",
            "graph_idf.bin",
            "partition_bp.csv",
            "partition_idf.csv",
            "bp_nmi.json",
            "idf_nmi.json",
            "report_bp.json",
            "report_idf.json",
        ):
            assert name in manifest["files"], name
            assert (out_dir / name).exists()
        assert manifest["config"]["runs_bp"] == 8
        assert manifest["config"]["runs_idf"] == 8
        assert set(manifest["results"]) == {"bp", "idf"}
        for mode in ("bp", "idf"):
            assert 0.0 <= manifest["results"][mode]["nmi"] <= 1.0
            assert f"kind={mode} runs=8" in stdout
        assert "manifest:" in stdout

    def test_reruns_are_identical_modulo_timings(self, workspace, corpus_bin, capsys):
        args = ["--corpus", corpus_bin, "--mode", "both", "--runs", 6, "--seed", 2]
        a = workspace / "out_a"
        b = workspace / "out_b"
        assert run_cli(capsys, "pipeline", *args, "--out-dir", a)[0] == 0
        assert run_cli(capsys, "pipeline", *args, "--out-dir", b)[0] == 0
        for name in ("partition_bp.csv", "partition_idf.csv", "report_bp.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()
        ma = manifest_without_timings(a / "manifest.json")
        mb = manifest_without_timings(b / "manifest.json")
        ma["config"].pop("out_dir", None)
        mb["config"].pop("out_dir", None)
        assert ma == mb

    def test_config_file_with_flag_override(self, workspace, corpus_bin, capsys):
        cfg = workspace / "run.cfg"
        out_dir = workspace / "cfg_out"
        cfg.write_text(
            "# toy run\n"
            f"corpus = {corpus_bin}\n"
            f"out-dir = {out_dir}\n"
            "mode = bp\n"
            "runs = 9\n"
            "seed = 4\n"
        )
        code, _, _ = run_cli(capsys, "pipeline", "--config", cfg, "--runs", 3)
        assert code == 0
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["config"]["mode"] == "bp"
        assert manifest["config"]["runs_bp"] == 3
        assert manifest["config"]["seed"] == 4
        assert "partition_idf.csv" not in manifest["files"]

    def test_malformed_config_line(self, workspace, corpus_bin, capsys):
        cfg = workspace / "bad.cfg"
        cfg.write_text("runs 9\n")
        code, _, stderr = run_cli(capsys, "pipeline", "--config", cfg)
        assert code == 2
        assert "key = value" in stderr

    def test_missing_out_dir(self, corpus_bin, capsys):
        code, _, stderr = run_cli(capsys, "pipeline", "--corpus", corpus_bin)
        assert code == 2
        assert "out-dir" in stderr

    def test_stage_failure_names_the_stage(self, workspace, capsys):
        docs = workspace / "multi_only.jsonl"
        docs.write_text(
            json.dumps({"id": "m", "categories": ["x", "y"], "concepts": [0]}) + "\n"
        )
        corpus = workspace / "multi_only.bin"
        assert (
            main(
                [
                    "ingest",
                    "--vocab",
                    str(workspace / "vocab.tsv"),
                    "--docs",
                    str(docs),
                    "--out",
                    str(corpus),
                ]
            )
            == 0
        )
        code, _, stderr = run_cli(
            capsys,
            "pipeline",
            "--corpus",
            corpus,
            "--out-dir",
            workspace / "fail_out",
        )
        assert code == 2
        assert "stage 'ingest'" in stderr

    def test_unexpected_failure_is_internal(self, corpus_bin, capsys, monkeypatch):
        import conceptgraph.cli as cli_module

        def boom(path):
            raise RuntimeError("wires crossed")

        monkeypatch.setattr(cli_module, "load_corpus_bin", boom)
        code, _, stderr = run_cli(capsys, "stats", corpus_bin)
        assert code == 3
        assert "internal error" in stderr


class TestEntrypoint:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "conceptgraph", "--version"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout.strip() == "0.1.0"
