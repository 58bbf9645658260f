"""End-to-end pipeline: question type → entities → evidence → ranked run.

A PipelineConfig names every stage variant and data file; its canonical
JSON form is hashed into a config_id that is stamped on every output, so
any run file can be traced back to the exact configuration that produced
it.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from time import perf_counter
from typing import Callable, Mapping, Sequence

from .corpus import (DocumentSet, Question, preprocess_text, segment_sentences)
from .entities import (AnnotationFileExtractor, GazetteerExtractor, build_pool,
                       filter_by_type)
from .errors import ConfigError, UnmappedTypeError
from .qtype import (EmbeddingClassifier, QuestionClassifier, RuleBasedAnnotator,
                    load_labeled_questions, map_answer_types,
                    train_embedding_classifier)
from .qtype.taxonomy import AnswerTypeMap, default_answer_type_map, load_answer_type_map
from .ranking import RankingConfig, TiedRun, rank_answers, score_candidates
from .scoring import (AGGREGATION_MODES, CacheProvider, Provider,
                      WordAverageProvider, aggregate, build_evidence)

log = logging.getLogger(__name__)

CLASSIFIER_KINDS = ("svm", "external-embedding")
NER_BACKENDS = ("annotations", "gazetteer")
PROVIDER_KINDS = ("word-avg", "cache")
COMBINE_KINDS = ("additive", "multiplicative")
AVGMAX_DENOMINATORS = ("containing_docs", "all_docs")


@dataclass(frozen=True)
class PipelineConfig:
    # Stage variants.
    classifier: str = "svm"
    ner_backend: str = "gazetteer"
    embedding_provider: str = "word-avg"
    aggregation: str = "max"
    combine: str = "multiplicative"
    alpha: float = 0.1
    beta: float = 0.1
    candidate_cap: int = 100
    avgmax_denominator: str = "containing_docs"
    group_surface_variants: bool = True
    df_any_tag: bool = False
    score_digits: int = 9
    seed: int = 0
    workers: int = 1
    source_set: str = "custom"
    # Data files. Empty string means "not provided".
    questions_path: str = ""
    documents_path: str = ""
    model_path: str = ""
    labeled_path: str = ""
    vectors_path: str = ""
    cache_path: str = ""
    gazetteer_path: str = ""
    annotations_path: str = ""
    type_map_path: str = ""

    def __post_init__(self):
        checks = (
            ("classifier", CLASSIFIER_KINDS),
            ("ner_backend", NER_BACKENDS),
            ("embedding_provider", PROVIDER_KINDS),
            ("aggregation", AGGREGATION_MODES),
            ("combine", COMBINE_KINDS),
            ("avgmax_denominator", AVGMAX_DENOMINATORS),
        )
        for field_name, allowed in checks:
            value = getattr(self, field_name)
            if value not in allowed:
                raise ConfigError(
                    f"{field_name} must be one of {allowed}, got {value!r}"
                )
        if self.candidate_cap < 1:
            raise ConfigError("candidate_cap must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def canonical_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @property
    def config_id(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()[:12]

    def required_paths(self) -> dict[str, str]:
        required = {
            "questions_path": self.questions_path,
            "documents_path": self.documents_path,
        }
        if self.classifier == "svm":
            required["model_path"] = self.model_path
        else:
            required["labeled_path"] = self.labeled_path
        if self.ner_backend == "gazetteer":
            required["gazetteer_path"] = self.gazetteer_path
        else:
            required["annotations_path"] = self.annotations_path
        if self.embedding_provider == "word-avg":
            required["vectors_path"] = self.vectors_path
        else:
            required["cache_path"] = self.cache_path
        return required

    def validate_paths(self) -> None:
        for key, value in self.required_paths().items():
            if not value:
                raise ConfigError(f"{key} is required by this configuration")
            if not Path(value).is_file():
                raise ConfigError(f"{key}: no such file: {value}")
        if self.type_map_path and not Path(self.type_map_path).is_file():
            raise ConfigError(f"type_map_path: no such file: {self.type_map_path}")


def load_config(path: str | Path, overrides: Mapping[str, object] | None = None
                ) -> PipelineConfig:
    """Read a JSON config file, applying CLI overrides on top."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    raw.update(overrides or {})
    known = set(PipelineConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    try:
        return PipelineConfig(**raw)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a temp file + rename so readers never see partial output."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."),
                               prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# Stage loading (one-time cost, kept out of per-question timing)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LoadedStages:
    config: PipelineConfig
    annotator: RuleBasedAnnotator
    svm_classifier: QuestionClassifier | None
    embedding_classifier: EmbeddingClassifier | None
    provider: Provider
    extractor: object  # GazetteerExtractor | AnnotationFileExtractor
    type_map: AnswerTypeMap

    def predict_types(self, question: Question) -> tuple[str, str]:
        if self.config.classifier == "svm":
            ann = self.annotator.annotate(question.text)
            return self.svm_classifier.predict(ann)
        vector = self.provider.embed(preprocess_text(question.text))
        return self.embedding_classifier.predict_vector(vector.values)

    def prepare(self, question: Question, docset: DocumentSet):
        """Everything up to evidence scores (independent of agg/combine)."""
        segmented = replace(
            docset,
            documents=tuple(segment_sentences(d) for d in docset.documents),
        )
        try:
            coarse, fine = self.predict_types(question)
            accepted = map_answer_types(coarse, fine, self.type_map)
        except UnmappedTypeError:
            # Non-entity question types (definition/abbreviation style)
            # cannot be answered by entity ranking: empty run.
            return None
        all_mentions = self.extractor.extract(segmented)
        typed = filter_by_type(all_mentions, accepted)
        pool = build_pool(
            typed, segmented,
            cap=self.config.candidate_cap,
            group_surface_variants=self.config.group_surface_variants,
            all_mentions=all_mentions if self.config.df_any_tag else None,
            df_any_tag=self.config.df_any_tag,
        )
        evidence = build_evidence(pool, segmented,
                                  preprocess_text(question.text), self.provider)
        return pool, evidence, segmented.k

    def answer(self, question: Question, docset: DocumentSet) -> TiedRun:
        prepared = self.prepare(question, docset)
        config = self.config
        if prepared is None:
            return TiedRun(question_id=question.id, groups=(), scores=(),
                           config_id=config.config_id)
        _pool, evidence, n_docs = prepared
        return rank_from_evidence(
            evidence, n_docs, question.id, config, config.config_id)


def rank_from_evidence(evidence, n_docs: int, question_id: str,
                       config: PipelineConfig, config_id: str) -> TiedRun:
    """Aggregate evidence scores, combine with df and rank (pure tail)."""
    semantics = [
        aggregate(ev, config.aggregation,
                  avgmax_denominator=config.avgmax_denominator, n_docs=n_docs)
        for ev in evidence
    ]
    dfs = [ev.entity.df for ev in evidence]
    ranking_config = RankingConfig(
        combine_mode=config.combine, alpha=config.alpha, beta=config.beta,
        score_digits=config.score_digits,
    )
    if not semantics:
        return TiedRun(question_id=question_id, groups=(), scores=(),
                       config_id=config_id)
    scored = score_candidates(semantics, dfs, n_docs, ranking_config)
    return rank_answers(scored, question_id, ranking_config, config_id)


def load_stages(config: PipelineConfig) -> tuple[LoadedStages, float]:
    """Instantiate models, providers and extractors; returns load seconds."""
    config.validate_paths()
    started = perf_counter()
    provider: Provider
    if config.embedding_provider == "word-avg":
        provider = WordAverageProvider.from_file(config.vectors_path)
    else:
        provider = CacheProvider(config.cache_path)

    svm = None
    centroid = None
    if config.classifier == "svm":
        svm = QuestionClassifier.load(config.model_path)
    else:
        labeled = load_labeled_questions(config.labeled_path)
        centroid = train_embedding_classifier(
            labeled, lambda text: provider.embed(preprocess_text(text)).values)

    if config.ner_backend == "gazetteer":
        extractor = GazetteerExtractor.from_file(config.gazetteer_path)
    else:
        extractor = AnnotationFileExtractor(config.annotations_path)

    type_map = (load_answer_type_map(config.type_map_path)
                if config.type_map_path else default_answer_type_map())
    stages = LoadedStages(
        config=config,
        annotator=RuleBasedAnnotator(),
        svm_classifier=svm,
        embedding_classifier=centroid,
        provider=provider,
        extractor=extractor,
        type_map=type_map,
    )
    return stages, perf_counter() - started


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PipelineResult:
    runs: tuple[TiedRun, ...]
    errors: tuple[tuple[str, str], ...]  # (question_id, message)
    load_seconds: float
    question_seconds: tuple[tuple[str, float], ...]

    @property
    def ok(self) -> bool:
        return not self.errors


def run_pipeline(config: PipelineConfig, questions: Sequence[Question],
                 docsets: Mapping[str, DocumentSet],
                 stages: LoadedStages | None = None,
                 on_question: Callable[[str], None] | None = None) -> PipelineResult:
    """Answer every question; per-question failures are recorded, not fatal."""
    load_seconds = 0.0
    if stages is None:
        stages, load_seconds = load_stages(config)

    def solve(question: Question) -> tuple[TiedRun | None, str | None, float]:
        started = perf_counter()
        docset = docsets.get(question.id)
        if docset is None:
            return None, "no document set", perf_counter() - started
        try:
            run = stages.answer(question, docset)
        except Exception as exc:  # recorded per question, surfaced in summary
            log.exception("question %s failed", question.id)
            return None, f"{type(exc).__name__}: {exc}", perf_counter() - started
        return run, None, perf_counter() - started

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(solve, questions))
    else:
        outcomes = [solve(q) for q in questions]

    runs: list[TiedRun] = []
    errors: list[tuple[str, str]] = []
    timings: list[tuple[str, float]] = []
    for question, (run, error, seconds) in zip(questions, outcomes):
        timings.append((question.id, seconds))
        if error is not None:
            errors.append((question.id, error))
        else:
            runs.append(run)
        if on_question is not None:
            on_question(question.id)
    return PipelineResult(
        runs=tuple(runs),
        errors=tuple(errors),
        load_seconds=load_seconds,
        question_seconds=tuple(timings),
    )


def write_run_file(path: str | Path, result: PipelineResult,
                   config: PipelineConfig) -> None:
    """Run JSONL plus a .config.json sidecar with the effective config."""
    lines = []
    for run in result.runs:
        lines.append(json.dumps({
            "question_id": run.question_id,
            "groups": [sorted(g) for g in run.groups],
            "scores": list(run.scores),
            "config_id": run.config_id,
        }, ensure_ascii=False))
    atomic_write_text(path, "".join(line + "\n" for line in lines))
    sidecar = {
        "config_id": config.config_id,
        "config": json.loads(config.canonical_json()),
        "errors": [{"question_id": qid, "error": msg}
                   for qid, msg in result.errors],
    }
    atomic_write_text(str(path) + ".config.json",
                      json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
