"""Bias audit aggregation: per-group metrics, disparities, serialized report.

A report couples each metric value to its demographic group and support,
derives the absolute man/woman disparity per metric, and serializes the
whole audit deterministically (identical inputs give identical bytes).
Provenance carries input-file digests and parameters, never timestamps.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .embeddings import EmbeddingMatrix
from .errors import MetricError
from .manifest import Gender
from .zeroshot import ClassificationResult, _unit_rows, per_class_recall


def self_similarity(group: EmbeddingMatrix, include_diagonal: bool = False) -> float:
    """Mean pairwise cosine similarity within one group.

    The mean runs over all unordered distinct pairs (i < j); self-pairs
    would add a constant 1 to every group and compress disparities, so the
    diagonal stays out unless ``include_diagonal`` asks for it as a
    sensitivity check.
    """
    if group.n < 2:
        raise MetricError(f"self-similarity needs >=2 rows, got {group.n}")
    unit = _unit_rows(group.rows, "group embeddings")
    sims = unit @ unit.T
    total = float(sims.sum())
    n = group.n
    if include_diagonal:
        return total / (n * n)
    return (total - float(np.trace(sims))) / (n * (n - 1))


def disparity(a: float, b: float) -> float:
    """Absolute difference between two group values of one metric."""
    return abs(a - b)


@dataclass(frozen=True)
class GroupMetric:
    """One metric value for one demographic group."""

    group: str
    metric: str
    value: float
    support: int

    def __post_init__(self) -> None:
        if self.support <= 0:
            raise MetricError(
                f"metric {self.metric!r} for group {self.group!r}: support must be positive"
            )


@dataclass(frozen=True)
class OccupationRow:
    name: str
    recall_men: float
    recall_women: float
    disparity: float


@dataclass(frozen=True)
class OccupationEval:
    """Classification outcome for one occupation with per-sample gender."""

    name: str
    result: ClassificationResult
    truth: tuple[str, ...]
    genders: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.truth) != self.result.n or len(self.genders) != self.result.n:
            raise MetricError(
                f"{self.name}: truth/gender length does not match sample count"
            )


def equality_of_opportunity_table(
    evals: Sequence[OccupationEval],
) -> list[OccupationRow]:
    """Per-occupation recall split by gender, with the absolute gap.

    An occupation with no positive samples for one gender cannot yield a
    recall there; it is dropped from the table with a warning.
    """
    rows: list[OccupationRow] = []
    for ev in evals:
        recalls: dict[str, float] = {}
        for gender in (Gender.MAN.value, Gender.WOMAN.value):
            idx = [i for i, g in enumerate(ev.genders) if g == gender]
            if not any(ev.truth[i] == ev.name for i in idx):
                warnings.warn(
                    f"occupation {ev.name!r}: no {gender} samples, excluded",
                    stacklevel=2,
                )
                break
            sub_recalls = per_class_recall(
                ev.result.subset(idx), [ev.truth[i] for i in idx]
            )
            recalls[gender] = sub_recalls[ev.name]
        if len(recalls) < 2:
            continue
        men = recalls[Gender.MAN.value]
        women = recalls[Gender.WOMAN.value]
        rows.append(
            OccupationRow(
                name=ev.name,
                recall_men=men,
                recall_women=women,
                disparity=disparity(men, women),
            )
        )
    return rows


def total_disparity(rows: Sequence[OccupationRow]) -> float:
    """Sum of per-occupation recall gaps (one scalar for dataset ranking)."""
    return float(sum(row.disparity for row in rows))


def _canonical(obj: object) -> object:
    """Recursively sort mapping keys so serialization ignores insertion order."""
    if isinstance(obj, Mapping):
        return {str(k): _canonical(obj[k]) for k in sorted(obj, key=str)}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    return obj


@dataclass(frozen=True)
class BiasReport:
    dataset: str
    metrics: tuple[GroupMetric, ...]
    disparities: dict[str, float]
    occupations: tuple[OccupationRow, ...]
    provenance: dict[str, object]
    realism: dict[str, float] | None = None

    def to_dict(self) -> dict[str, object]:
        out: dict[str, object] = {
            "dataset": self.dataset,
            "metrics": [
                {
                    "group": m.group,
                    "metric": m.metric,
                    "value": m.value,
                    "support": m.support,
                }
                for m in self.metrics
            ],
            "disparities": {k: self.disparities[k] for k in sorted(self.disparities)},
            "occupations": [
                {
                    "name": r.name,
                    "recall_men": r.recall_men,
                    "recall_women": r.recall_women,
                    "disparity": r.disparity,
                }
                for r in self.occupations
            ],
            "provenance": _canonical(self.provenance),
        }
        if self.realism is not None:
            out["realism"] = {k: self.realism[k] for k in sorted(self.realism)}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


def assemble_report(
    dataset: str,
    metrics: Sequence[GroupMetric],
    occupations: Sequence[OccupationRow] = (),
    provenance: Mapping[str, object] | None = None,
    groups: tuple[str, str] = (Gender.MAN.value, Gender.WOMAN.value),
    realism: Mapping[str, float] | None = None,
) -> BiasReport:
    """Derive disparities and assemble the serializable report.

    Every metric reported for one of the two ``groups`` must also be
    reported for the other; the disparity is their absolute difference.
    Metrics for other groups pass through without a disparity.
    """
    by_metric: dict[str, dict[str, float]] = {}
    for m in metrics:
        slot = by_metric.setdefault(m.metric, {})
        if m.group in slot:
            raise MetricError(
                f"duplicate value for metric {m.metric!r}, group {m.group!r}"
            )
        slot[m.group] = m.value
    first, second = groups
    disparities: dict[str, float] = {}
    for name in sorted(by_metric):
        values = by_metric[name]
        if (first in values) != (second in values):
            missing = second if first in values else first
            raise MetricError(f"metric {name!r} lacks a value for group {missing!r}")
        if first in values:
            disparities[name] = disparity(values[first], values[second])
    return BiasReport(
        dataset=dataset,
        metrics=tuple(metrics),
        disparities=disparities,
        occupations=tuple(occupations),
        provenance=dict(_canonical(dict(provenance or {}))),
        realism=dict(realism) if realism is not None else None,
    )


def file_digest(path: str | Path) -> str:
    """sha256 digest of a file, as recorded in report provenance."""
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return "sha256:" + digest.hexdigest()
