import json
import math

import numpy as np
import pytest

from conceptgraph.corpus import (
    Corpus,
    DocumentRecord,
    compute_idf,
    concept_vector,
    corpus_stats,
    load_corpus,
    load_corpus_bin,
    recount_doc_frequencies,
    save_corpus,
    split_by_category_count,
)
from conceptgraph.errors import CorpusFormatError, StoreError, UndefinedIdfError

from _util import make_corpus, random_corpus


def write_inputs(tmp_path, vocab_lines, doc_records):
    vocab = tmp_path / "vocabulary.tsv"
    vocab.write_text(
        "concept_id\tname\tgeneric\n" + "".join(f"{line}\n" for line in vocab_lines),
        encoding="utf-8",
    )
    docs = tmp_path / "documents.jsonl"
    docs.write_text(
        "".join(json.dumps(r) + "\n" for r in doc_records), encoding="utf-8"
    )
    return vocab, docs


BASIC_VOCAB = ["0\tphoton\t0", "1\tenergy\t1", "2\tquark\t0"]
BASIC_DOCS = [
    {"id": "a1", "categories": ["hep-ph"], "concepts": [0, 1]},
    {"id": "a2", "categories": ["hep-ph", "hep-th"], "concepts": [2]},
    {"id": "a3", "categories": ["gr-qc"], "concepts": [0, 2]},
]


class TestLoading:
    def test_basic_load(self, tmp_path):
        corpus = load_corpus(*write_inputs(tmp_path, BASIC_VOCAB, BASIC_DOCS))
        assert corpus.N == 3
        assert corpus.V == 3
        assert corpus.generic_ids == {1}
        doc = corpus.document(1)
        assert doc.external_id == "a2"
        assert doc.categories == ("hep-ph", "hep-th")
        assert doc.concept_ids == {2}
        assert corpus.concept(0).doc_count == 2

    def test_blank_lines_skipped(self, tmp_path):
        vocab, docs = write_inputs(tmp_path, BASIC_VOCAB, BASIC_DOCS)
        docs.write_text(
            "\n" + docs.read_text() + "\n\n", encoding="utf-8"
        )
        assert load_corpus(vocab, docs).N == 3

    def test_repeated_concept_mentions_collapse(self, tmp_path):
        records = [{"id": "a1", "categories": ["x"], "concepts": [2, 2, 0, 2]}]
        corpus = load_corpus(*write_inputs(tmp_path, BASIC_VOCAB, records))
        assert corpus.document(0).concept_ids == {0, 2}
        assert corpus.concept(2).doc_count == 1

    def test_bad_header(self, tmp_path):
        vocab, docs = write_inputs(tmp_path, BASIC_VOCAB, BASIC_DOCS)
        vocab.write_text("id\tname\tgeneric\n0\tphoton\t0\n", encoding="utf-8")
        with pytest.raises(CorpusFormatError, match="line 1"):
            load_corpus(vocab, docs)

    def test_bad_generic_flag(self, tmp_path):
        vocab, docs = write_inputs(tmp_path, ["0\tphoton\t2"], [])
        with pytest.raises(CorpusFormatError, match="generic flag"):
            load_corpus(vocab, docs)

    def test_non_integer_concept_id(self, tmp_path):
        vocab, docs = write_inputs(tmp_path, ["x\tphoton\t0"], [])
        with pytest.raises(CorpusFormatError, match="line 2"):
            load_corpus(vocab, docs)

    def test_duplicate_concept_id(self, tmp_path):
        vocab, docs = write_inputs(
            tmp_path, ["0\tphoton\t0", "0\tquark\t0"], []
        )
        with pytest.raises(CorpusFormatError, match="duplicate concept id"):
            load_corpus(vocab, docs)

    def test_sparse_concept_ids_rejected(self, tmp_path):
        vocab, docs = write_inputs(
            tmp_path, ["0\tphoton\t0", "2\tquark\t0"], []
        )
        with pytest.raises(CorpusFormatError, match="dense"):
            load_corpus(vocab, docs)

    def test_wrong_field_count(self, tmp_path):
        vocab, docs = write_inputs(tmp_path, ["0\tphoton"], [])
        with pytest.raises(CorpusFormatError, match="3 tab-separated fields"):
            load_corpus(vocab, docs)

    def test_invalid_json_line(self, tmp_path):
        vocab, docs = write_inputs(tmp_path, BASIC_VOCAB, [])
        docs.write_text('{"id": "a1",\n', encoding="utf-8")
        with pytest.raises(CorpusFormatError, match="line 1"):
            load_corpus(vocab, docs)

    def test_missing_field(self, tmp_path):
        records = [{"id": "a1", "concepts": [0]}]
        with pytest.raises(CorpusFormatError, match="categories"):
            load_corpus(*write_inputs(tmp_path, BASIC_VOCAB, records))

    def test_duplicate_external_id(self, tmp_path):
        records = [
            {"id": "a1", "categories": ["x"], "concepts": []},
            {"id": "a1", "categories": ["y"], "concepts": []},
        ]
        with pytest.raises(CorpusFormatError, match="duplicate document id"):
            load_corpus(*write_inputs(tmp_path, BASIC_VOCAB, records))

    def test_dangling_concept_reference(self, tmp_path):
        records = [{"id": "a1", "categories": ["x"], "concepts": [9]}]
        with pytest.raises(CorpusFormatError, match="concept 9"):
            load_corpus(*write_inputs(tmp_path, BASIC_VOCAB, records))

    def test_empty_categories_rejected(self, tmp_path):
        records = [{"id": "a1", "categories": [], "concepts": []}]
        with pytest.raises(CorpusFormatError, match="categories"):
            load_corpus(*write_inputs(tmp_path, BASIC_VOCAB, records))

    def test_duplicate_category_rejected(self, tmp_path):
        records = [{"id": "a1", "categories": ["x", "x"], "concepts": []}]
        with pytest.raises(CorpusFormatError, match="duplicate category"):
            load_corpus(*write_inputs(tmp_path, BASIC_VOCAB, records))

    def test_empty_concept_set_accepted(self, tmp_path):
        records = [{"id": "a1", "categories": ["x"], "concepts": []}]
        corpus = load_corpus(*write_inputs(tmp_path, BASIC_VOCAB, records))
        assert corpus.document(0).concept_ids == frozenset()


class TestRecounting:
    def test_claimed_counts_are_ignored(self):
        docs = [
            DocumentRecord(0, "a", ("x",), frozenset({0})),
            DocumentRecord(1, "b", ("x",), frozenset({0, 1})),
        ]
        corpus = Corpus.build(docs, ["p", "q"], [False, False])
        assert corpus.concept(0).doc_count == 2
        assert corpus.concept(1).doc_count == 1

    def test_recount_identity_random(self, rng):
        corpus = random_corpus(rng, n_docs=80, n_concepts=40, n_categories=5)
        brute = recount_doc_frequencies(corpus.documents, corpus.V)
        for entry in corpus.vocabulary:
            assert entry.doc_count == brute[entry.concept_id]

    def test_inconsistent_corpus_rejected(self):
        from conceptgraph.corpus import ConceptEntry

        docs = [DocumentRecord(0, "a", ("x",), frozenset({0}))]
        vocab = [ConceptEntry(0, "p", False, 7)]
        with pytest.raises(CorpusFormatError, match="doc_count mismatch"):
            Corpus(documents=docs, vocabulary=vocab)


class TestIdf:
    def test_value(self):
        corpus = make_corpus(
            [("a", ("x",), [0]), ("b", ("x",), [0, 1]), ("c", ("x",), [1])],
            n_concepts=2,
        )
        assert compute_idf(corpus, 0) == math.log(3 / 2)
        assert compute_idf(corpus, 1) == math.log(3 / 2)

    def test_ubiquitous_concept_has_zero_idf(self):
        corpus = make_corpus(
            [("a", ("x",), [0]), ("b", ("x",), [0])], n_concepts=1
        )
        assert compute_idf(corpus, 0) == 0.0

    def test_monotonicity_and_range(self, rng):
        corpus = random_corpus(rng, n_docs=60, n_concepts=30, n_categories=4, p=0.3)
        values = {}
        for entry in corpus.vocabulary:
            if entry.doc_count == 0:
                continue
            idf = compute_idf(corpus, entry.concept_id)
            assert 0.0 <= idf <= math.log(corpus.N)
            values[entry.concept_id] = (entry.doc_count, idf)
        for a, (ca, ia) in values.items():
            for b, (cb, ib) in values.items():
                if ca < cb:
                    assert ia > ib

    def test_unused_concept_is_an_error(self):
        corpus = make_corpus([("a", ("x",), [0])], n_concepts=2)
        with pytest.raises(UndefinedIdfError):
            compute_idf(corpus, 1)

    def test_empty_corpus_is_an_error(self):
        corpus = make_corpus([], n_concepts=1)
        with pytest.raises(UndefinedIdfError):
            compute_idf(corpus, 0)


class TestConceptVectors:
    def test_generic_concepts_never_appear(self, rng):
        corpus = random_corpus(
            rng, n_docs=40, n_concepts=25, n_categories=3, generic_fraction=0.2
        )
        for doc in corpus.documents:
            vec = concept_vector(corpus, doc.doc_id)
            assert not set(vec.weights) & corpus.generic_ids
            assert vec.dimension == corpus.V - len(corpus.generic_ids)

    def test_zero_idf_entries_are_kept(self):
        corpus = make_corpus(
            [("a", ("x",), [0, 1]), ("b", ("x",), [0])], n_concepts=2
        )
        vec = concept_vector(corpus, 0)
        assert vec.weights[0] == 0.0
        assert vec.weights[1] == math.log(2)

    def test_norm_and_dot(self):
        corpus = make_corpus(
            [("a", ("x",), [0, 1]), ("b", ("x",), [1, 2]), ("c", ("x",), [2])],
            n_concepts=3,
        )
        va = concept_vector(corpus, 0)
        vb = concept_vector(corpus, 1)
        w = math.log(3 / 2)
        assert va.dot(vb) == pytest.approx(w * w, abs=1e-15)
        assert va.norm() == pytest.approx(
            math.sqrt(math.log(3) ** 2 + w * w), abs=1e-15
        )


class TestSplit:
    def test_partition_of_documents(self, rng):
        corpus = random_corpus(
            rng, n_docs=100, n_concepts=20, n_categories=6, multi_fraction=0.4
        )
        single, multi = split_by_category_count(corpus)
        assert single.N + multi.N == corpus.N
        single_ids = {d.doc_id for d in single.documents}
        multi_ids = {d.doc_id for d in multi.documents}
        assert not single_ids & multi_ids
        assert all(len(d.categories) == 1 for d in single.documents)
        assert all(len(d.categories) >= 2 for d in multi.documents)

    def test_doc_ids_preserved_and_counts_recounted(self):
        corpus = make_corpus(
            [
                ("a", ("x",), [0]),
                ("b", ("x", "y"), [0]),
                ("c", ("y",), [0]),
            ],
            n_concepts=1,
        )
        single, multi = split_by_category_count(corpus)
        assert [d.doc_id for d in single.documents] == [0, 2]
        assert [d.doc_id for d in multi.documents] == [1]
        assert single.concept(0).doc_count == 2
        assert multi.concept(0).doc_count == 1


class TestStats:
    def test_empty_corpus_conventions(self):
        stats = corpus_stats(make_corpus([], n_concepts=2))
        assert stats.N == 0
        assert stats.mean_k == 0.0
        assert stats.max_k == 0

    def test_generic_concepts_excluded_from_k(self):
        corpus = make_corpus(
            [("a", ("x",), [0, 1, 2]), ("b", ("x",), [1])],
            n_concepts=3,
            generic=[1],
        )
        stats = corpus_stats(corpus)
        assert stats.N == 2
        assert stats.V == 3
        assert stats.V_gen == 1
        assert stats.mean_k == pytest.approx(1.0)
        assert stats.max_k == 2


class TestBinaryRoundtrip:
    def test_roundtrip(self, tmp_path, rng):
        corpus = random_corpus(
            rng, n_docs=50, n_concepts=30, n_categories=4,
            multi_fraction=0.3, generic_fraction=0.1,
        )
        path = tmp_path / "corpus.bin"
        save_corpus(corpus, path)
        loaded = load_corpus_bin(path)
        assert loaded.N == corpus.N
        assert loaded.vocabulary == corpus.vocabulary
        assert loaded.documents == corpus.documents

    def test_save_is_deterministic(self, tmp_path, rng):
        corpus = random_corpus(rng, n_docs=30, n_concepts=10, n_categories=3)
        p1, p2 = tmp_path / "one.bin", tmp_path / "two.bin"
        save_corpus(corpus, p1)
        save_corpus(corpus, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_truncated_file_rejected(self, tmp_path, rng):
        corpus = random_corpus(rng, n_docs=10, n_concepts=5, n_categories=2)
        path = tmp_path / "corpus.bin"
        save_corpus(corpus, path)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(StoreError):
            load_corpus_bin(path)

    def test_wrong_magic_rejected(self, tmp_path):
        path = tmp_path / "corpus.bin"
        path.write_bytes(b"NOTMAGIC" + b"\x00" * 16)
        with pytest.raises(StoreError):
            load_corpus_bin(path)
