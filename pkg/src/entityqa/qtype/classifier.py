"""Question classification: training, prediction and model persistence.

Two classifier families share the same downstream contract (a coarse and
a fine label per question):

* the default linear-SVM path over sparse linguistic features, trained
  here from the labeled-question file;
* a nearest-centroid alternative over precomputed dense question
  embeddings, for setups where an external sentence encoder is available.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ..corpus import Question
from ..entities import ONTONOTES_TAGS
from ..errors import ParseError, TrainingError
from .annotate import Annotator, QuestionAnnotation, RuleBasedAnnotator
from .features import FeatureSpace
from .linear import LinearModel, train_one_vs_rest
from .taxonomy import AnswerTypeMap, Taxonomy, default_taxonomy, map_answer_types


@dataclass(frozen=True)
class AnswerTypePrediction:
    coarse_label: str
    fine_label: str
    accepted_tags: frozenset[str]

    def __post_init__(self):
        if not self.accepted_tags:
            raise ValueError("accepted_tags must be non-empty")
        bad = self.accepted_tags - ONTONOTES_TAGS
        if bad:
            raise ValueError(f"accepted_tags contains unknown tags {sorted(bad)}")


@dataclass(frozen=True)
class LabeledQuestion:
    coarse: str
    fine: str
    text: str

    @property
    def fine_qualified(self) -> str:
        return f"{self.coarse}:{self.fine}"


def load_labeled_questions(path: str | Path,
                           taxonomy: Taxonomy | None = None) -> list[LabeledQuestion]:
    """Parse the labeled-question file: "COARSE:fine<TAB>question text".

    Lines without a tab fall back to splitting on the first space, the
    other common distribution format of this data.
    """
    tax = taxonomy or default_taxonomy()
    out: list[LabeledQuestion] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "\t" in line:
                label, text = line.split("\t", 1)
            elif " " in line:
                label, text = line.split(" ", 1)
            else:
                raise ParseError(str(path), line_no, "expected 'LABEL:fine<TAB>text'")
            label = label.strip()
            if ":" not in label:
                raise ParseError(str(path), line_no, f"label {label!r} lacks a fine part")
            coarse, fine = label.split(":", 1)
            if not tax.validate_pair(coarse, fine):
                raise TrainingError(
                    f"{path}:{line_no}: unknown question label {label!r}"
                )
            if not text.strip():
                raise ParseError(str(path), line_no, "empty question text")
            out.append(LabeledQuestion(coarse=coarse, fine=fine, text=text.strip()))
    if not out:
        raise TrainingError(f"{path}: no labeled questions")
    return out


def split_labeled(labeled: Sequence[LabeledQuestion], train_fraction: float = 0.9,
                  seed: int = 0) -> tuple[list[LabeledQuestion], list[LabeledQuestion]]:
    """Seeded shuffle split; the held-out part is the tail."""
    if not (0.0 < train_fraction <= 1.0):
        raise ValueError("train_fraction must be in (0, 1]")
    order = list(labeled)
    random.Random(seed).shuffle(order)
    cut = int(round(train_fraction * len(order)))
    return order[:cut], order[cut:]


@dataclass(frozen=True)
class QuestionClassifier:
    space: FeatureSpace
    coarse_model: LinearModel
    fine_model: LinearModel
    hyperparams: dict

    def predict(self, ann: QuestionAnnotation) -> tuple[str, str]:
        active = self.space.extract(ann)
        coarse = self.coarse_model.classes[self.coarse_model.predict_index(active)]
        qualified = self.fine_model.classes[self.fine_model.predict_index(active)]
        fine = qualified.split(":", 1)[1] if ":" in qualified else qualified
        return coarse, fine

    def save(self, path: str | Path) -> None:
        path = Path(path)
        np.savez(
            path,
            coarse_weights=self.coarse_model.weights,
            coarse_bias=self.coarse_model.bias,
            fine_weights=self.fine_model.weights,
            fine_bias=self.fine_model.bias,
        )
        meta = {
            "vocab": self.space.to_dict(),
            "coarse_classes": list(self.coarse_model.classes),
            "fine_classes": list(self.fine_model.classes),
            "hyperparams": self.hyperparams,
        }
        meta_path = path.with_suffix(path.suffix + ".meta.json")
        meta_path.write_text(json.dumps(meta, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "QuestionClassifier":
        path = Path(path)
        arrays = np.load(path)
        meta = json.loads(
            path.with_suffix(path.suffix + ".meta.json").read_text(encoding="utf-8")
        )
        hyper = meta.get("hyperparams", {})
        recorded = tuple(
            (k, float(v)) for k, v in sorted(hyper.items())
            if isinstance(v, (int, float))
        )
        return cls(
            space=FeatureSpace.from_dict(meta["vocab"]),
            coarse_model=LinearModel(
                classes=tuple(meta["coarse_classes"]),
                weights=arrays["coarse_weights"],
                bias=arrays["coarse_bias"],
                hyperparams=recorded,
            ),
            fine_model=LinearModel(
                classes=tuple(meta["fine_classes"]),
                weights=arrays["fine_weights"],
                bias=arrays["fine_bias"],
                hyperparams=recorded,
            ),
            hyperparams=hyper,
        )


def train_classifier(labeled: Sequence[LabeledQuestion], *,
                     annotator: Annotator | None = None,
                     epochs: int = 10, learning_rate: float = 0.5,
                     l2: float = 1e-4, seed: int = 0) -> QuestionClassifier:
    """Train independent coarse and fine models over one feature space."""
    if not labeled:
        raise TrainingError("no training samples")
    ann_tool = annotator or RuleBasedAnnotator()
    annotations = [ann_tool.annotate(q.text) for q in labeled]
    space = FeatureSpace.build(annotations)
    actives = [space.extract(a) for a in annotations]

    coarse_classes = tuple(sorted({q.coarse for q in labeled}))
    fine_classes = tuple(sorted({q.fine_qualified for q in labeled}))
    coarse_idx = {c: i for i, c in enumerate(coarse_classes)}
    fine_idx = {f: i for i, f in enumerate(fine_classes)}

    coarse_samples = [(a, coarse_idx[q.coarse]) for a, q in zip(actives, labeled)]
    fine_samples = [(a, fine_idx[q.fine_qualified]) for a, q in zip(actives, labeled)]

    kwargs = dict(epochs=epochs, learning_rate=learning_rate, l2=l2, seed=seed)
    coarse_model = train_one_vs_rest(coarse_samples, coarse_classes,
                                     space.total_dim, **kwargs)
    fine_model = train_one_vs_rest(fine_samples, fine_classes,
                                   space.total_dim, **kwargs)
    return QuestionClassifier(
        space=space, coarse_model=coarse_model, fine_model=fine_model,
        hyperparams={"epochs": epochs, "learning_rate": learning_rate,
                     "l2": l2, "seed": seed},
    )


def classify_question(question: Question, annotator: Annotator,
                      classifier: QuestionClassifier,
                      type_map: AnswerTypeMap | None = None) -> AnswerTypePrediction:
    """Predict the answer type of a question and attach its entity tags."""
    coarse, fine = classifier.predict(annotator.annotate(question.text))
    accepted = map_answer_types(coarse, fine, type_map)
    return AnswerTypePrediction(coarse_label=coarse, fine_label=fine,
                                accepted_tags=accepted)


def classifier_accuracy(classifier: QuestionClassifier,
                        labeled: Sequence[LabeledQuestion],
                        annotator: Annotator | None = None) -> tuple[float, float]:
    """(coarse, fine) accuracy of a trained model on labeled questions."""
    if not labeled:
        raise ValueError("no evaluation samples")
    ann_tool = annotator or RuleBasedAnnotator()
    coarse_hits = fine_hits = 0
    for q in labeled:
        coarse, fine = classifier.predict(ann_tool.annotate(q.text))
        coarse_hits += coarse == q.coarse
        fine_hits += coarse == q.coarse and fine == q.fine
    return coarse_hits / len(labeled), fine_hits / len(labeled)


def majority_baseline(labeled: Sequence[LabeledQuestion]) -> float:
    """Accuracy of always predicting the most frequent coarse class."""
    if not labeled:
        raise ValueError("no samples")
    counts: dict[str, int] = {}
    for q in labeled:
        counts[q.coarse] = counts.get(q.coarse, 0) + 1
    return max(counts.values()) / len(labeled)


# ---------------------------------------------------------------------------
# Embedding-based alternative
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EmbeddingClassifier:
    """Nearest-centroid classification over dense question embeddings.

    The encoder itself is not bundled; any callable mapping text to a
    fixed-dimension vector works (including the sentence providers used
    for answer scoring).
    """

    coarse_classes: tuple[str, ...]
    fine_classes: tuple[str, ...]
    coarse_centroids: np.ndarray  # (C, d), rows L2-normalized where possible
    fine_centroids: np.ndarray

    def predict_vector(self, vector: np.ndarray) -> tuple[str, str]:
        norm = float(np.linalg.norm(vector))
        v = vector / norm if norm > 0 else vector
        coarse = self.coarse_classes[int(np.argmax(self.coarse_centroids @ v))]
        qualified = self.fine_classes[int(np.argmax(self.fine_centroids @ v))]
        fine = qualified.split(":", 1)[1] if ":" in qualified else qualified
        return coarse, fine


def _centroids(classes: tuple[str, ...], labels: Sequence[str],
               matrix: np.ndarray) -> np.ndarray:
    out = np.zeros((len(classes), matrix.shape[1]))
    index = {c: i for i, c in enumerate(classes)}
    counts = np.zeros(len(classes))
    for label, row in zip(labels, matrix):
        out[index[label]] += row
        counts[index[label]] += 1
    out /= np.maximum(counts, 1.0)[:, None]
    norms = np.linalg.norm(out, axis=1)
    nonzero = norms > 0
    out[nonzero] /= norms[nonzero, None]
    return out


def train_embedding_classifier(labeled: Sequence[LabeledQuestion],
                               embed: Callable[[str], np.ndarray]) -> EmbeddingClassifier:
    if not labeled:
        raise TrainingError("no training samples")
    rows = []
    for q in labeled:
        v = np.asarray(embed(q.text), dtype=float)
        norm = float(np.linalg.norm(v))
        rows.append(v / norm if norm > 0 else v)
    matrix = np.vstack(rows)
    coarse_classes = tuple(sorted({q.coarse for q in labeled}))
    fine_classes = tuple(sorted({q.fine_qualified for q in labeled}))
    return EmbeddingClassifier(
        coarse_classes=coarse_classes,
        fine_classes=fine_classes,
        coarse_centroids=_centroids(coarse_classes, [q.coarse for q in labeled], matrix),
        fine_centroids=_centroids(fine_classes, [q.fine_qualified for q in labeled], matrix),
    )
