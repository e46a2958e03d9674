"""Corpus ingestion, validation, idf weighting, and sparse concept vectors.

A corpus couples a concept vocabulary (with per-concept "generic" flags)
to a list of documents, each carrying one or more category labels and a
set of concept ids. Document frequencies are always recounted from the
documents themselves; whatever counts an input file claims are ignored.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from conceptgraph.errors import CorpusFormatError, UndefinedIdfError
from conceptgraph import store

VOCAB_HEADER = ("concept_id", "name", "generic")


@dataclass(frozen=True)
class ConceptEntry:
    """One vocabulary concept; `doc_count` is the number of documents using it."""

    concept_id: int
    name: str
    is_generic: bool
    doc_count: int


@dataclass(frozen=True)
class DocumentRecord:
    """One document: external identifier, category labels, concept id set."""

    doc_id: int
    external_id: str
    categories: tuple[str, ...]
    concept_ids: frozenset[int]


@dataclass(frozen=True)
class ConceptVector:
    """Sparse idf-weighted concept vector over non-generic concepts.

    `weights` holds an entry for every non-generic concept of the source
    document, including concepts whose idf is exactly zero. `dimension` is
    the ambient dimension (total non-generic vocabulary size).
    """

    weights: dict[int, float]
    dimension: int

    def norm(self) -> float:
        return math.sqrt(sum(w * w for w in self.weights.values()))

    def dot(self, other: "ConceptVector") -> float:
        if len(self.weights) > len(other.weights):
            return other.dot(self)
        return sum(
            w * other.weights[c] for c, w in self.weights.items() if c in other.weights
        )


@dataclass(frozen=True)
class CorpusStats:
    """Headline corpus numbers: sizes plus non-generic concepts per document."""

    N: int
    V: int
    V_gen: int
    mean_k: float
    max_k: int


@dataclass
class Corpus:
    """Validated, immutable-by-convention document corpus.

    All read operations are safe to call concurrently once construction
    has finished; nothing mutates a corpus after `__post_init__`.
    """

    documents: list[DocumentRecord]
    vocabulary: list[ConceptEntry]
    _doc_index: dict[int, int] = field(init=False, repr=False)
    _generic_ids: frozenset[int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._doc_index = {doc.doc_id: pos for pos, doc in enumerate(self.documents)}
        if len(self._doc_index) != len(self.documents):
            raise CorpusFormatError("duplicate document ids")
        self._generic_ids = frozenset(
            e.concept_id for e in self.vocabulary if e.is_generic
        )
        self._validate()

    def _validate(self) -> None:
        ids = [e.concept_id for e in self.vocabulary]
        if sorted(ids) != list(range(len(ids))):
            raise CorpusFormatError(
                "concept ids must be unique and dense in [0, V)"
            )
        counts = recount_doc_frequencies(self.documents, len(self.vocabulary))
        for entry in self.vocabulary:
            if entry.doc_count != counts[entry.concept_id]:
                raise CorpusFormatError(
                    f"doc_count mismatch for concept {entry.concept_id}: "
                    f"stored {entry.doc_count}, recounted {counts[entry.concept_id]}"
                )
        for doc in self.documents:
            if not doc.categories:
                raise CorpusFormatError(
                    f"document {doc.external_id!r} has no categories"
                )
            if len(set(doc.categories)) != len(doc.categories):
                raise CorpusFormatError(
                    f"document {doc.external_id!r} repeats a category"
                )
            for cid in doc.concept_ids:
                if not 0 <= cid < len(self.vocabulary):
                    raise CorpusFormatError(
                        f"document {doc.external_id!r} references unknown "
                        f"concept {cid}"
                    )

    @property
    def N(self) -> int:
        return len(self.documents)

    @property
    def V(self) -> int:
        return len(self.vocabulary)

    @property
    def generic_ids(self) -> frozenset[int]:
        return self._generic_ids

    def document(self, doc_id: int) -> DocumentRecord:
        try:
            return self.documents[self._doc_index[doc_id]]
        except KeyError:
            raise CorpusFormatError(f"unknown document id {doc_id}") from None

    def concept(self, concept_id: int) -> ConceptEntry:
        if not 0 <= concept_id < len(self.vocabulary):
            raise CorpusFormatError(f"unknown concept id {concept_id}")
        return self.vocabulary[concept_id]

    @classmethod
    def build(
        cls,
        documents: list[DocumentRecord],
        names: list[str],
        generic_flags: list[bool],
    ) -> "Corpus":
        """Assemble a corpus, recounting every concept's document frequency."""
        counts = recount_doc_frequencies(documents, len(names))
        vocabulary = [
            ConceptEntry(cid, names[cid], bool(generic_flags[cid]), counts[cid])
            for cid in range(len(names))
        ]
        return cls(documents=documents, vocabulary=vocabulary)


def recount_doc_frequencies(
    documents: list[DocumentRecord], n_concepts: int
) -> list[int]:
    """Brute-force document frequency per concept id."""
    counts = [0] * n_concepts
    for doc in documents:
        for cid in doc.concept_ids:
            if 0 <= cid < n_concepts:
                counts[cid] += 1
    return counts


def _parse_vocabulary(path: str | Path) -> tuple[list[str], list[bool]]:
    names: dict[int, str] = {}
    flags: dict[int, bool] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if tuple(header.split("\t")) != VOCAB_HEADER:
            raise CorpusFormatError(
                f"{path}: line 1: expected header "
                f"{'<TAB>'.join(VOCAB_HEADER)!r}, got {header!r}"
            )
        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise CorpusFormatError(
                    f"{path}: line {lineno}: expected 3 tab-separated fields, "
                    f"got {len(parts)}"
                )
            raw_id, name, raw_generic = parts
            try:
                cid = int(raw_id)
            except ValueError:
                raise CorpusFormatError(
                    f"{path}: line {lineno}: concept_id {raw_id!r} is not an integer"
                ) from None
            if raw_generic not in ("0", "1"):
                raise CorpusFormatError(
                    f"{path}: line {lineno}: generic flag must be 0 or 1, "
                    f"got {raw_generic!r}"
                )
            if cid in names:
                raise CorpusFormatError(
                    f"{path}: line {lineno}: duplicate concept id {cid}"
                )
            names[cid] = name
            flags[cid] = raw_generic == "1"
    if sorted(names) != list(range(len(names))):
        raise CorpusFormatError(
            f"{path}: concept ids must be dense in [0, {len(names)})"
        )
    ordered = range(len(names))
    return [names[i] for i in ordered], [flags[i] for i in ordered]


def _parse_documents(path: str | Path, n_concepts: int) -> list[DocumentRecord]:
    documents: list[DocumentRecord] = []
    seen_external: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(
                    f"{path}: line {lineno}: invalid JSON ({exc.msg})"
                ) from None
            if not isinstance(record, dict):
                raise CorpusFormatError(
                    f"{path}: line {lineno}: expected a JSON object"
                )
            try:
                external_id = record["id"]
                categories = record["categories"]
                concepts = record["concepts"]
            except KeyError as exc:
                raise CorpusFormatError(
                    f"{path}: line {lineno}: missing field {exc.args[0]!r}"
                ) from None
            if not isinstance(external_id, str):
                raise CorpusFormatError(
                    f"{path}: line {lineno}: 'id' must be a string"
                )
            if external_id in seen_external:
                raise CorpusFormatError(
                    f"{path}: line {lineno}: duplicate document id {external_id!r}"
                )
            if (
                not isinstance(categories, list)
                or not categories
                or not all(isinstance(c, str) for c in categories)
            ):
                raise CorpusFormatError(
                    f"{path}: line {lineno}: 'categories' must be a non-empty "
                    "list of strings"
                )
            if len(set(categories)) != len(categories):
                raise CorpusFormatError(
                    f"{path}: line {lineno}: duplicate category in {categories}"
                )
            if not isinstance(concepts, list) or not all(
                isinstance(c, int) and not isinstance(c, bool) for c in concepts
            ):
                raise CorpusFormatError(
                    f"{path}: line {lineno}: 'concepts' must be a list of integers"
                )
            for cid in concepts:
                if not 0 <= cid < n_concepts:
                    raise CorpusFormatError(
                        f"{path}: line {lineno}: concept {cid} not in vocabulary"
                    )
            seen_external.add(external_id)
            documents.append(
                DocumentRecord(
                    doc_id=len(documents),
                    external_id=external_id,
                    categories=tuple(categories),
                    # repeated mentions collapse to set membership
                    concept_ids=frozenset(concepts),
                )
            )
    return documents


def load_corpus(vocabulary_path: str | Path, documents_path: str | Path) -> Corpus:
    """Load and validate a corpus from a vocabulary TSV and a documents JSONL.

    Args:
        vocabulary_path: tab-separated file with header
            ``concept_id<TAB>name<TAB>generic`` and generic flags in {0, 1}.
        documents_path: one JSON object per line with fields ``id``
            (external identifier), ``categories`` (non-empty list of labels)
            and ``concepts`` (list of concept ids).

    Returns:
        A validated `Corpus` with document frequencies recounted from the
        documents file.

    Raises:
        CorpusFormatError: malformed line (the message carries the line
            number), dangling concept reference, or duplicate ids.
    """
    names, flags = _parse_vocabulary(vocabulary_path)
    documents = _parse_documents(documents_path, len(names))
    return Corpus.build(documents, names, flags)


def split_by_category_count(corpus: Corpus) -> tuple[Corpus, Corpus]:
    """Split into (single-category, multi-category) sub-corpora.

    Document ids are preserved; per-concept document frequencies are
    recounted within each part, so idf weights inside a part reflect that
    part alone. The two parts are disjoint and cover the corpus.
    """
    names = [e.name for e in corpus.vocabulary]
    flags = [e.is_generic for e in corpus.vocabulary]
    single = [d for d in corpus.documents if len(d.categories) == 1]
    multi = [d for d in corpus.documents if len(d.categories) > 1]
    return Corpus.build(single, names, flags), Corpus.build(multi, names, flags)


def compute_idf(corpus: Corpus, concept_id: int) -> float:
    """Inverse document frequency ln(N / N(c)) of one concept.

    Raises:
        UndefinedIdfError: the corpus is empty or the concept appears in no
            document (callers must exclude such concepts).
    """
    entry = corpus.concept(concept_id)
    if corpus.N == 0:
        raise UndefinedIdfError("idf is undefined for an empty corpus")
    if entry.doc_count == 0:
        raise UndefinedIdfError(
            f"concept {concept_id} ({entry.name!r}) appears in no document"
        )
    return math.log(corpus.N / entry.doc_count)


def concept_vector(corpus: Corpus, doc_id: int) -> ConceptVector:
    """idf-weighted sparse vector of a document's non-generic concepts."""
    doc = corpus.document(doc_id)
    dimension = corpus.V - len(corpus.generic_ids)
    weights = {
        cid: compute_idf(corpus, cid)
        for cid in doc.concept_ids
        if cid not in corpus.generic_ids
    }
    return ConceptVector(weights=weights, dimension=dimension)


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Size counts plus mean/max non-generic concepts per document."""
    generic = corpus.generic_ids
    ks = [len(d.concept_ids - generic) for d in corpus.documents]
    return CorpusStats(
        N=corpus.N,
        V=corpus.V,
        V_gen=len(generic),
        mean_k=(sum(ks) / len(ks)) if ks else 0.0,
        max_k=max(ks) if ks else 0,
    )


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Serialize a corpus to the versioned binary container."""
    payload = {
        "vocabulary": [
            {"name": e.name, "generic": 1 if e.is_generic else 0}
            for e in corpus.vocabulary
        ],
        "documents": [
            {
                "doc_id": d.doc_id,
                "id": d.external_id,
                "categories": list(d.categories),
                "concepts": sorted(d.concept_ids),
            }
            for d in corpus.documents
        ],
    }
    store.write_artifact(path, store.KIND_CORPUS, [store.pack_json(payload)])


def load_corpus_bin(path: str | Path) -> Corpus:
    """Load a corpus saved by `save_corpus`, re-running full validation."""
    sections = store.read_artifact(path, store.KIND_CORPUS)
    payload = store.unpack_json(sections[0])
    names = [v["name"] for v in payload["vocabulary"]]
    flags = [bool(v["generic"]) for v in payload["vocabulary"]]
    documents = [
        DocumentRecord(
            doc_id=d["doc_id"],
            external_id=d["id"],
            categories=tuple(d["categories"]),
            concept_ids=frozenset(d["concepts"]),
        )
        for d in payload["documents"]
    ]
    return Corpus.build(documents, names, flags)
