"""Sentence embedding, question-sentence similarity and score aggregation.

Each candidate entity is backed by the set of sentences mentioning it;
the semantic score of the candidate is an aggregation (average, per-doc
max then average, or global max) of the cosine similarities between the
question embedding and those sentence embeddings.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np

from .corpus import DocumentSet, Sentence
from .entities import CandidateEntity, CandidatePool
from .errors import CacheMissError, EmptyInputError, ParseError

log = logging.getLogger(__name__)

AGGREGATION_MODES = ("avg", "avg_max", "max")


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    provider_id: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("embedding must be a non-empty 1-d vector")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return int(self.values.size)


class Provider(Protocol):
    provider_id: str
    dim: int

    def embed(self, text: str) -> EmbeddingVector: ...


_TOKEN = re.compile(r"\w+(?:'\w+)?")


class WordAverageProvider:
    """Unweighted mean of in-vocabulary token vectors.

    Reads the plain-text vector format, one token per line followed by its
    space-separated components. Tokens are matched lowercase; a sentence
    with no in-vocabulary token embeds to the zero vector.
    """

    def __init__(self, vectors: dict[str, np.ndarray], provider_id: str = "word-avg"):
        if not vectors:
            raise EmptyInputError("empty word-vector table")
        dims = {v.size for v in vectors.values()}
        if len(dims) != 1:
            raise ValueError(f"inconsistent vector dimensions {sorted(dims)}")
        self.vectors = {k.lower(): np.asarray(v, dtype=float) for k, v in vectors.items()}
        self.dim = dims.pop()
        self.provider_id = provider_id

    @classmethod
    def from_file(cls, path: str | Path, provider_id: str = "word-avg") -> "WordAverageProvider":
        vectors: dict[str, np.ndarray] = {}
        dim: int | None = None
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                parts = line.rstrip("\n").split(" ")
                if len(parts) < 2:
                    if not line.strip():
                        continue
                    raise ParseError(str(path), line_no, "expected 'token v1 ... vd'")
                try:
                    vec = np.array([float(x) for x in parts[1:]], dtype=float)
                except ValueError as exc:
                    raise ParseError(str(path), line_no, f"bad float: {exc}") from exc
                if dim is None:
                    dim = vec.size
                elif vec.size != dim:
                    raise ParseError(str(path), line_no,
                                     f"expected {dim} components, got {vec.size}")
                vectors[parts[0]] = vec
        if not vectors:
            raise EmptyInputError(f"{path}: no vectors")
        return cls(vectors, provider_id=provider_id)

    def embed(self, text: str) -> EmbeddingVector:
        rows = [
            self.vectors[tok]
            for tok in (m.group(0).lower() for m in _TOKEN.finditer(text))
            if tok in self.vectors
        ]
        if rows:
            mean = np.mean(rows, axis=0)
        else:
            mean = np.zeros(self.dim)
        return EmbeddingVector(values=mean, provider_id=self.provider_id)


def text_sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class CacheProvider:
    """Serve sentence embeddings precomputed by an external encoder.

    The cache is JSONL with {"sha256", "text", "vector", "provider_id"}
    records, keyed by the SHA-256 of the exact text. A missing entry is a
    hard error naming the hash — partial caches would silently mix
    embedding spaces otherwise.
    """

    def __init__(self, path: str | Path):
        self.path = str(path)
        self.entries: dict[str, np.ndarray] = {}
        provider_ids: set[str] = set()
        dims: set[int] = set()
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    raw = json.loads(line)
                    digest = str(raw["sha256"])
                    vec = np.array([float(x) for x in raw["vector"]], dtype=float)
                    provider_ids.add(str(raw["provider_id"]))
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise ParseError(self.path, line_no, f"invalid cache record: {exc}") from exc
                if "text" in raw and text_sha256(str(raw["text"])) != digest:
                    raise ParseError(self.path, line_no, "sha256 does not match text")
                dims.add(vec.size)
                self.entries[digest] = vec
        if not self.entries:
            raise EmptyInputError(f"{path}: empty embedding cache")
        if len(provider_ids) != 1:
            raise ParseError(self.path, 0,
                             f"mixed provider_ids {sorted(provider_ids)} in one cache")
        if len(dims) != 1:
            raise ParseError(self.path, 0, f"mixed dimensions {sorted(dims)} in one cache")
        self.provider_id = provider_ids.pop()
        self.dim = dims.pop()

    def embed(self, text: str) -> EmbeddingVector:
        digest = text_sha256(text)
        vec = self.entries.get(digest)
        if vec is None:
            raise CacheMissError(
                f"{self.path}: no cached embedding for sha256 {digest}"
            )
        return EmbeddingVector(values=vec, provider_id=self.provider_id)


def write_cache(path: str | Path, texts: Iterable[str], provider: Provider) -> int:
    """Embed texts with `provider` and persist them in cache format."""
    written = 0
    seen: set[str] = set()
    with open(path, "w", encoding="utf-8") as fh:
        for text in texts:
            digest = text_sha256(text)
            if digest in seen:
                continue
            seen.add(digest)
            vec = provider.embed(text)
            fh.write(json.dumps({
                "sha256": digest,
                "text": text,
                "vector": [float(x) for x in vec.values],
                "provider_id": vec.provider_id,
            }, ensure_ascii=False) + "\n")
            written += 1
    return written


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity; 0 when either vector has zero norm."""
    if a.provider_id != b.provider_id:
        raise ValueError(
            f"provider mismatch: {a.provider_id!r} vs {b.provider_id!r}"
        )
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    na = float(np.linalg.norm(a.values))
    nb = float(np.linalg.norm(b.values))
    if na == 0.0 or nb == 0.0:
        return 0.0
    value = float(np.dot(a.values, b.values) / (na * nb))
    return max(-1.0, min(1.0, value))


@dataclass(frozen=True)
class EvidenceSet:
    entity: CandidateEntity
    sentences: tuple[tuple[Sentence, str], ...]  # (sentence, doc_id)
    scores: tuple[float, ...]

    def __post_init__(self):
        if len(self.sentences) != len(self.scores):
            raise ValueError("scores must parallel sentences")


@dataclass(frozen=True)
class SemanticScore:
    entity: CandidateEntity
    mode: str
    value: float

    def __post_init__(self):
        if self.mode not in AGGREGATION_MODES:
            raise ValueError(f"unknown aggregation mode {self.mode!r}")
        if not (-1.0 <= self.value <= 1.0):
            raise ValueError(f"semantic score {self.value} outside [-1, 1]")


def build_evidence(pool: CandidatePool, docset: DocumentSet, question_text: str,
                   provider: Provider) -> list[EvidenceSet]:
    """Collect and score each candidate's evidence sentences.

    Each distinct sentence is embedded and scored once, then shared across
    all candidates mentioned in it.
    """
    sentences = {
        (doc.doc_id, s.index): s
        for doc in docset.documents for s in doc.sentences
    }
    q_vec = provider.embed(question_text)
    score_memo: dict[tuple[str, int], float] = {}

    out: list[EvidenceSet] = []
    for candidate in pool.candidates:
        keys = sorted({(m.doc_id, m.sentence_index) for m in candidate.mentions})
        if not keys:
            log.warning("candidate %r has no evidence sentences; excluded",
                        candidate.canonical_surface)
            continue
        pairs = []
        scores = []
        for key in keys:
            if key not in score_memo:
                score_memo[key] = cosine(q_vec, provider.embed(sentences[key].text))
            pairs.append((sentences[key], key[0]))
            scores.append(score_memo[key])
        out.append(EvidenceSet(entity=candidate, sentences=tuple(pairs),
                               scores=tuple(scores)))
    return out


def aggregate(evidence: EvidenceSet, mode: str,
              avgmax_denominator: str = "containing_docs",
              n_docs: int | None = None) -> SemanticScore:
    """Fold per-sentence similarities into one semantic score.

    avg averages over all evidence sentences; max takes the single best;
    avg_max takes the best sentence per document, then averages — by
    default over the documents actually containing the entity, optionally
    (avgmax_denominator="all_docs") over all n_docs retrieved documents.
    """
    if not evidence.scores:
        raise ValueError(
            f"empty evidence for {evidence.entity.canonical_surface!r}"
        )
    if mode == "avg":
        value = float(np.mean(evidence.scores))
    elif mode == "max":
        value = float(np.max(evidence.scores))
    elif mode == "avg_max":
        per_doc: dict[str, float] = {}
        for (_sentence, doc_id), score in zip(evidence.sentences, evidence.scores):
            if doc_id not in per_doc or score > per_doc[doc_id]:
                per_doc[doc_id] = score
        total = float(sum(per_doc.values()))
        if avgmax_denominator == "containing_docs":
            value = total / len(per_doc)
        elif avgmax_denominator == "all_docs":
            if n_docs is None or n_docs <= 0:
                raise ValueError("all_docs denominator requires n_docs > 0")
            value = total / n_docs
        else:
            raise ValueError(f"unknown avgmax_denominator {avgmax_denominator!r}")
    else:
        raise ValueError(f"unknown aggregation mode {mode!r}")
    # Guard against float drift at the interval ends.
    value = max(-1.0, min(1.0, value))
    return SemanticScore(entity=evidence.entity, mode=mode, value=value)
