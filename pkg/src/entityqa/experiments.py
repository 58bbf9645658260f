"""Experiment drivers: ablation grid, run evaluation, latency benchmark.

The ablation crosses classifier x embedding provider x aggregation x
combine mode (24 cells); expensive stages (classification, extraction,
evidence scoring) are computed once per classifier/provider pair and the
cheap tail (aggregate, combine, rank) is re-run per cell. Additive cells
sweep the 49-point (alpha, beta) grid and report the best cell by mean
tMRR.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from pathlib import Path
from time import perf_counter
from typing import Mapping, Sequence

from .corpus import Question, DocumentSet
from .errors import DataError
from .evaluation import (METRICS, Judgment, MetricReport, SignificanceResult,
                         compare_reports, evaluate_run)
from .pipeline import (CLASSIFIER_KINDS, PROVIDER_KINDS, LoadedStages,
                       PipelineConfig, atomic_write_text, load_stages,
                       rank_from_evidence)
from .ranking import ALPHA_BETA_GRID, TiedRun, load_runs
from .scoring import AGGREGATION_MODES

COMBINE_ORDER = ("multiplicative", "additive")


# ---------------------------------------------------------------------------
# Ablation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AblationRow:
    classifier: str
    embedding_provider: str
    aggregation: str
    combine: str
    alpha: float | None
    beta: float | None
    config_id: str
    means: dict[str, float]


def _check_coverage(questions: Sequence[Question],
                    docsets: Mapping[str, DocumentSet],
                    judgments: Mapping[str, Judgment]) -> None:
    no_docs = sorted(q.id for q in questions if q.id not in docsets)
    if no_docs:
        raise DataError(f"questions without document sets: {no_docs}")
    unjudged = sorted(q.id for q in questions if q.id not in judgments)
    if unjudged:
        raise DataError(f"questions without judgments: {unjudged}")


def run_ablation(base_config: PipelineConfig, questions: Sequence[Question],
                 docsets: Mapping[str, DocumentSet],
                 judgments: Mapping[str, Judgment],
                 tmrr_mode: str = "expected_reciprocal") -> list[AblationRow]:
    """Evaluate all 24 stage combinations on one question set."""
    _check_coverage(questions, docsets, judgments)
    rows: list[AblationRow] = []
    for classifier in CLASSIFIER_KINDS:
        for provider in PROVIDER_KINDS:
            pair_config = replace(base_config, classifier=classifier,
                                  embedding_provider=provider)
            stages, _ = load_stages(pair_config)
            prepared = {q.id: stages.prepare(q, docsets[q.id]) for q in questions}
            for aggregation in AGGREGATION_MODES:
                for combine in COMBINE_ORDER:
                    rows.append(_ablation_cell(
                        pair_config, questions, prepared, judgments,
                        aggregation, combine, tmrr_mode))
    return rows


def _evaluate_variant(variant: PipelineConfig, questions: Sequence[Question],
                      prepared: Mapping[str, object],
                      judgments: Mapping[str, Judgment],
                      tmrr_mode: str) -> MetricReport:
    runs = []
    for question in questions:
        item = prepared[question.id]
        if item is None:
            runs.append(TiedRun(question_id=question.id, groups=(), scores=(),
                                config_id=variant.config_id))
            continue
        _pool, evidence, n_docs = item
        runs.append(rank_from_evidence(evidence, n_docs, question.id,
                                       variant, variant.config_id))
    return evaluate_run(runs, judgments, run_id=variant.config_id,
                        tmrr_mode=tmrr_mode)


def _ablation_cell(pair_config: PipelineConfig, questions: Sequence[Question],
                   prepared: Mapping[str, object],
                   judgments: Mapping[str, Judgment],
                   aggregation: str, combine: str,
                   tmrr_mode: str) -> AblationRow:
    if combine == "multiplicative":
        variant = replace(pair_config, aggregation=aggregation, combine=combine)
        report = _evaluate_variant(variant, questions, prepared, judgments,
                                   tmrr_mode)
        return AblationRow(
            classifier=variant.classifier,
            embedding_provider=variant.embedding_provider,
            aggregation=aggregation, combine=combine,
            alpha=None, beta=None,
            config_id=variant.config_id, means=report.means(),
        )
    best: tuple[float, float, float, PipelineConfig, MetricReport] | None = None
    for alpha, beta in ALPHA_BETA_GRID:
        variant = replace(pair_config, aggregation=aggregation,
                          combine=combine, alpha=alpha, beta=beta)
        report = _evaluate_variant(variant, questions, prepared, judgments,
                                   tmrr_mode)
        mean_tmrr = report.mean("tMRR")
        if best is None or mean_tmrr > best[0]:
            best = (mean_tmrr, alpha, beta, variant, report)
    _score, alpha, beta, variant, report = best
    return AblationRow(
        classifier=variant.classifier,
        embedding_provider=variant.embedding_provider,
        aggregation=aggregation, combine=combine,
        alpha=alpha, beta=beta,
        config_id=variant.config_id, means=report.means(),
    )


def write_ablation_csv(path: str | Path, rows: Sequence[AblationRow]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["classifier", "embedding_provider", "aggregation",
                         "combine", "alpha", "beta", "config_id", *METRICS])
        for row in rows:
            writer.writerow([
                row.classifier, row.embedding_provider, row.aggregation,
                row.combine,
                "" if row.alpha is None else f"{row.alpha:.1f}",
                "" if row.beta is None else f"{row.beta:.1f}",
                row.config_id,
                *[f"{row.means[m]:.4f}" for m in METRICS],
            ])


def write_ablation_json(path: str | Path, rows: Sequence[AblationRow]) -> None:
    payload = [
        {
            "classifier": row.classifier,
            "embedding_provider": row.embedding_provider,
            "aggregation": row.aggregation,
            "combine": row.combine,
            "alpha": row.alpha,
            "beta": row.beta,
            "config_id": row.config_id,
            "means": row.means,
        }
        for row in rows
    ]
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Run-file evaluation
# ---------------------------------------------------------------------------

def evaluate_run_files(run_paths: Sequence[str | Path],
                       judgments: Mapping[str, Judgment],
                       tmrr_mode: str = "expected_reciprocal"
                       ) -> tuple[list[MetricReport],
                                  list[tuple[str, str, list[SignificanceResult]]]]:
    """Score each run file; pairwise t-tests when two or more are given."""
    if not run_paths:
        raise DataError("no run files given")
    reports: list[MetricReport] = []
    for path in run_paths:
        runs = load_runs(path)
        if not runs:
            raise DataError(f"{path}: empty run file")
        unknown = sorted({r.question_id for r in runs} - set(judgments))
        if unknown:
            raise DataError(f"{path}: question ids missing from qrels: {unknown}")
        reports.append(evaluate_run(runs, judgments,
                                    run_id=Path(path).stem, tmrr_mode=tmrr_mode))
    significance: list[tuple[str, str, list[SignificanceResult]]] = []
    for i in range(len(reports)):
        for j in range(i + 1, len(reports)):
            a, b = reports[i], reports[j]
            if sorted(a.question_ids) != sorted(b.question_ids):
                raise DataError(
                    f"runs {a.run_id!r} and {b.run_id!r} cover different questions"
                )
            b_aligned = b
            if a.question_ids != b.question_ids:
                order = {qid: k for k, qid in enumerate(b.question_ids)}
                b_aligned = MetricReport(
                    run_id=b.run_id,
                    question_ids=a.question_ids,
                    values={
                        m: tuple(b.series(m)[order[qid]] for qid in a.question_ids)
                        for m in METRICS
                    },
                )
            significance.append((a.run_id, b.run_id,
                                 compare_reports(a, b_aligned)))
    return reports, significance


def write_significance_json(path: str | Path,
                            results: Sequence[tuple[str, str,
                                                    list[SignificanceResult]]]) -> None:
    payload = [
        {
            "run_a": a,
            "run_b": b,
            "tests": [
                {
                    "metric": r.metric,
                    "mean_difference": r.mean_difference,
                    "t_statistic": r.t_statistic,
                    "p_value": r.p_value,
                    "significant": r.significant,
                }
                for r in tests
            ],
        }
        for a, b, tests in results
    ]
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Latency benchmark
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatencyReport:
    label: str
    iterations: int
    n_questions: int
    load_seconds: float
    mean_seconds: dict[str, float]  # per source set, plus "overall"
    low_confidence: bool
    speedup: dict[str, float] | None

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "iterations": self.iterations,
            "n_questions": self.n_questions,
            "load_seconds": self.load_seconds,
            "mean_seconds": self.mean_seconds,
            "low_confidence": self.low_confidence,
            "speedup": self.speedup,
        }


def run_latency_bench(config: PipelineConfig, questions: Sequence[Question],
                      docsets: Mapping[str, DocumentSet], iterations: int = 5,
                      comparison_path: str | Path | None = None,
                      label: str = "this-work") -> LatencyReport:
    """Wall-clock per-question time, averaged over warm iterations.

    Stage loading happens once and is reported separately. Timing runs
    single-worker regardless of the configured parallelism.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if not questions:
        raise DataError("no questions to benchmark")
    no_docs = sorted(q.id for q in questions if q.id not in docsets)
    if no_docs:
        raise DataError(f"questions without document sets: {no_docs}")
    stages, load_seconds = load_stages(replace(config, workers=1))
    totals = {q.id: 0.0 for q in questions}
    for _ in range(iterations):
        for question in questions:
            started = perf_counter()
            stages.answer(question, docsets[question.id])
            totals[question.id] += perf_counter() - started
    per_question = {qid: total / iterations for qid, total in totals.items()}

    by_set: dict[str, list[float]] = {}
    for question in questions:
        by_set.setdefault(question.source_set, []).append(per_question[question.id])
    mean_seconds = {
        source: sum(values) / len(values) for source, values in sorted(by_set.items())
    }
    mean_seconds["overall"] = sum(per_question.values()) / len(per_question)

    speedup = None
    if comparison_path is not None:
        with open(comparison_path, encoding="utf-8") as fh:
            other = json.load(fh)
        other_means = other.get("mean_seconds", {})
        speedup = {
            key: other_means[key] / ours
            for key, ours in mean_seconds.items()
            if key in other_means and ours > 0
        }
    return LatencyReport(
        label=label,
        iterations=iterations,
        n_questions=len(questions),
        load_seconds=load_seconds,
        mean_seconds=mean_seconds,
        low_confidence=iterations == 1,
        speedup=speedup,
    )


def write_latency_json(path: str | Path, report: LatencyReport) -> None:
    atomic_write_text(path, json.dumps(report.to_dict(), indent=2,
                                       sort_keys=True) + "\n")
