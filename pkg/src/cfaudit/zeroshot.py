"""Zero-shot classification and retrieval over pre-extracted embeddings.

Everything here reduces to cosine similarity between image embeddings and
prompt embeddings. Prompts follow the template ``"A photo of a {value}"``
with lowercase attribute values; their embeddings arrive as files, text
encoding is out of scope.

Tie handling is deterministic throughout: argmax ties resolve to the
lowest label index and are recorded, retrieval ranking breaks similarity
ties by lower gallery index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .embeddings import EmbeddingMatrix
from .errors import MetricError

PROMPT_TEMPLATE = "A photo of a {}"


def prompt_text(value: str) -> str:
    """Render the classification prompt for one attribute value."""
    return PROMPT_TEMPLATE.format(value)


def _unit_rows(rows: np.ndarray, what: str) -> np.ndarray:
    """Unit-normalize rows in float64, rejecting zero rows."""
    out = np.asarray(rows, dtype=np.float64)
    if out.ndim == 1:
        out = out[None, :]
    norms = np.linalg.norm(out, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise MetricError(f"{what}: zero-norm row {int(zero[0])}")
    return out / norms[:, None]


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity between two non-zero vectors."""
    a64 = np.asarray(a, dtype=np.float64).ravel()
    b64 = np.asarray(b, dtype=np.float64).ravel()
    if a64.shape != b64.shape:
        raise MetricError(f"dim mismatch: {a64.shape[0]} vs {b64.shape[0]}")
    na = np.linalg.norm(a64)
    nb = np.linalg.norm(b64)
    if na == 0.0 or nb == 0.0:
        raise MetricError("cosine similarity of a zero vector is undefined")
    return float(a64 @ b64 / (na * nb))


@dataclass(frozen=True)
class PromptSet:
    """Ordered class labels with one unit-normalized embedding row each."""

    labels: tuple[str, ...]
    embeddings: EmbeddingMatrix

    def __post_init__(self) -> None:
        if len(set(self.labels)) != len(self.labels):
            raise MetricError("prompt labels must be unique")
        if self.embeddings.n != len(self.labels):
            raise MetricError(
                f"{len(self.labels)} labels but {self.embeddings.n} embedding rows"
            )
        norms = np.linalg.norm(self.embeddings.rows.astype(np.float64), axis=1)
        if norms.size and not np.allclose(norms, 1.0, atol=1e-5):
            raise MetricError("prompt embeddings must be unit-normalized")

    @property
    def dim(self) -> int:
        return self.embeddings.dim


def make_prompt_set(labels: Iterable[str], vectors: np.ndarray) -> PromptSet:
    """Build a PromptSet, normalizing the given prompt vectors."""
    labels = tuple(labels)
    seen: set[str] = set()
    for label in labels:
        if label in seen:
            raise MetricError(f"duplicate prompt label {label!r}")
        seen.add(label)
    unit = _unit_rows(np.atleast_2d(np.asarray(vectors)), "prompt vectors")
    matrix = EmbeddingMatrix(ids=list(labels), rows=unit.astype(np.float32))
    return PromptSet(labels=labels, embeddings=matrix)


@dataclass(frozen=True)
class ClassificationResult:
    """Per-sample similarities and argmax predictions for one prompt set.

    ``predictions`` holds label indices; ``ties`` lists the sample indices
    whose maximum similarity was attained by more than one label (the
    prediction is then the lowest such index).
    """

    labels: tuple[str, ...]
    similarities: np.ndarray
    predictions: np.ndarray
    ties: tuple[int, ...]

    @property
    def n(self) -> int:
        return int(self.similarities.shape[0])

    def predicted_labels(self) -> list[str]:
        return [self.labels[int(i)] for i in self.predictions]

    def subset(self, indices: Sequence[int]) -> "ClassificationResult":
        """Restrict the result to a subset of samples (e.g. one gender)."""
        idx = np.asarray(list(indices), dtype=np.intp)
        kept = set(int(i) for i in idx)
        remap = {int(orig): new for new, orig in enumerate(idx)}
        ties = tuple(remap[t] for t in self.ties if t in kept)
        return ClassificationResult(
            labels=self.labels,
            similarities=self.similarities[idx],
            predictions=self.predictions[idx],
            ties=ties,
        )


def classify_zero_shot(
    images: EmbeddingMatrix, prompts: PromptSet
) -> ClassificationResult:
    """Predict, per image, the prompt label with highest cosine similarity."""
    if images.dim != prompts.dim:
        raise MetricError(
            f"image dim {images.dim} does not match prompt dim {prompts.dim}"
        )
    image_unit = _unit_rows(images.rows, "image embeddings")
    prompt_unit = _unit_rows(prompts.embeddings.rows, "prompt embeddings")
    sims = image_unit @ prompt_unit.T
    predictions = np.argmax(sims, axis=1)
    if sims.size:
        row_max = sims.max(axis=1, keepdims=True)
        tie_rows = np.flatnonzero((sims == row_max).sum(axis=1) > 1)
    else:
        tie_rows = np.empty(0, dtype=np.intp)
    return ClassificationResult(
        labels=prompts.labels,
        similarities=sims,
        predictions=predictions,
        ties=tuple(int(i) for i in tie_rows),
    )


@dataclass(frozen=True)
class PreferenceResult:
    """Counts behind a person-preference fraction; ties are not preferences."""

    preferred: int
    ties: int
    total: int

    @property
    def fraction(self) -> float:
        return self.preferred / self.total


def person_preference_result(
    images: EmbeddingMatrix,
    person_prompt: np.ndarray,
    attribute_prompt: np.ndarray,
) -> PreferenceResult:
    """Count images strictly closer to the person prompt than the attribute one."""
    person = _unit_rows(person_prompt, "person prompt")[0]
    attribute = _unit_rows(attribute_prompt, "attribute prompt")[0]
    if person.shape != attribute.shape or images.dim != person.shape[0]:
        raise MetricError("prompt and image dimensions must all match")
    if images.n == 0:
        raise MetricError("person preference needs at least one image")
    image_unit = _unit_rows(images.rows, "image embeddings")
    person_sims = image_unit @ person
    attribute_sims = image_unit @ attribute
    preferred = int(np.count_nonzero(person_sims > attribute_sims))
    ties = int(np.count_nonzero(person_sims == attribute_sims))
    return PreferenceResult(preferred=preferred, ties=ties, total=images.n)


def person_preference(
    images: EmbeddingMatrix,
    person_prompt: np.ndarray,
    attribute_prompt: np.ndarray,
) -> float:
    """Fraction of images preferring the person prompt (strict inequality)."""
    return person_preference_result(images, person_prompt, attribute_prompt).fraction


def per_class_recall(
    result: ClassificationResult, truth: Sequence[str]
) -> dict[str, float]:
    """Recall per class; classes absent from the truth labels are omitted."""
    if len(truth) != result.n:
        raise MetricError(f"{result.n} samples but {len(truth)} truth labels")
    label_index = {label: i for i, label in enumerate(result.labels)}
    support: dict[str, int] = {}
    correct: dict[str, int] = {}
    for i, label in enumerate(truth):
        if label not in label_index:
            raise MetricError(f"unknown truth label {label!r}")
        support[label] = support.get(label, 0) + 1
        if int(result.predictions[i]) == label_index[label]:
            correct[label] = correct.get(label, 0) + 1
    return {
        label: correct.get(label, 0) / support[label]
        for label in result.labels
        if support.get(label, 0) > 0
    }


def recall_at_k(
    queries: EmbeddingMatrix,
    gallery: EmbeddingMatrix,
    truth: Sequence[int],
    k: int,
) -> float:
    """Fraction of queries whose truth row ranks in the top k by cosine.

    Equal similarities rank lower-index gallery rows first, so the result
    does not depend on ordering accidents inside the sort.
    """
    if queries.dim != gallery.dim:
        raise MetricError(
            f"query dim {queries.dim} does not match gallery dim {gallery.dim}"
        )
    if not 1 <= k <= gallery.n:
        raise MetricError(f"k={k} must be in [1, {gallery.n}]")
    if len(truth) != queries.n:
        raise MetricError(f"{queries.n} queries but {len(truth)} truth indices")
    truth_idx = np.asarray(list(truth), dtype=np.intp)
    if truth_idx.size and (truth_idx.min() < 0 or truth_idx.max() >= gallery.n):
        raise MetricError("truth indices must address gallery rows")
    if queries.n == 0:
        raise MetricError("recall@k needs at least one query")
    sims = _unit_rows(queries.rows, "queries") @ _unit_rows(gallery.rows, "gallery").T
    order = np.argsort(-sims, axis=1, kind="stable")
    hits = (order[:, :k] == truth_idx[:, None]).any(axis=1)
    return float(np.count_nonzero(hits)) / queries.n
