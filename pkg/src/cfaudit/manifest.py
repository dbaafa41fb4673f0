"""Dataset manifests: JSONL records, fine-tuning partitions, occupations.

A manifest is a JSONL file, one record per line, UTF-8, snake_case keys,
enums as lowercase strings. Synthetic records are linked to their real
source through an id convention: the gender-swapped versions of record
``X`` carry ids ``X_man`` and ``X_woman``.
"""

from __future__ import annotations

import csv
import json
import random
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable

from .errors import ManifestError


class Gender(str, Enum):
    MAN = "man"
    WOMAN = "woman"
    UNKNOWN = "unknown"


class Provenance(str, Enum):
    REAL = "real"
    SYNTHETIC = "synthetic"


class SourceGender(str, Enum):
    MAN = "man"
    WOMAN = "woman"
    NOT_APPLICABLE = "not_applicable"


class GenderRelation(str, Enum):
    """How a synthetic record's gender relates to its source image."""

    CHANGED = "changed"
    SAME = "same"
    ANY = "any"
    NOT_APPLICABLE = "not_applicable"


_REQUIRED_FIELDS = (
    "id", "image_path", "caption", "has_person",
    "gender", "provenance", "source_gender",
)


@dataclass
class ManifestRecord:
    """One image-caption sample with gender and provenance bookkeeping."""

    id: str
    image_path: str
    caption: str
    has_person: bool
    gender: Gender
    provenance: Provenance
    source_gender: SourceGender
    mask_path: str | None = None
    embedding_ref: tuple[str, int] | None = None

    def validate(self) -> None:
        """Check the provenance/gender consistency rules."""
        if self.provenance is Provenance.REAL:
            if self.source_gender is not SourceGender.NOT_APPLICABLE:
                raise ManifestError(
                    f"record {self.id!r}: real records must have "
                    f"source_gender not_applicable, got {self.source_gender.value!r}"
                )
        else:
            if self.gender is Gender.UNKNOWN:
                raise ManifestError(
                    f"record {self.id!r}: synthetic records must have gender man or woman"
                )
            if self.source_gender is SourceGender.NOT_APPLICABLE:
                raise ManifestError(
                    f"record {self.id!r}: synthetic records must have "
                    "source_gender man or woman"
                )
        if self.embedding_ref is not None:
            path, row = self.embedding_ref
            if not isinstance(path, str) or not isinstance(row, int) or row < 0:
                raise ManifestError(
                    f"record {self.id!r}: embedding_ref must be [path, non-negative row]"
                )

    def to_dict(self) -> dict:
        d: dict = {
            "id": self.id,
            "image_path": self.image_path,
            "caption": self.caption,
            "has_person": self.has_person,
            "gender": self.gender.value,
            "provenance": self.provenance.value,
            "source_gender": self.source_gender.value,
        }
        if self.mask_path is not None:
            d["mask_path"] = self.mask_path
        if self.embedding_ref is not None:
            d["embedding_ref"] = [self.embedding_ref[0], self.embedding_ref[1]]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ManifestRecord":
        for field in _REQUIRED_FIELDS:
            if field not in d:
                raise ManifestError(f"missing {field}")
        try:
            gender = Gender(d["gender"])
            provenance = Provenance(d["provenance"])
            source_gender = SourceGender(d["source_gender"])
        except ValueError as exc:
            raise ManifestError(str(exc)) from None
        ref = d.get("embedding_ref")
        if ref is not None:
            if not isinstance(ref, (list, tuple)) or len(ref) != 2:
                raise ManifestError("embedding_ref must be a [path, row] pair")
            ref = (ref[0], ref[1])
        record = cls(
            id=d["id"],
            image_path=d["image_path"],
            caption=d["caption"],
            has_person=bool(d["has_person"]),
            gender=gender,
            provenance=provenance,
            source_gender=source_gender,
            mask_path=d.get("mask_path"),
            embedding_ref=ref,
        )
        record.validate()
        return record


def load_manifest(path: str | Path) -> list[ManifestRecord]:
    """Parse a JSONL manifest, preserving order. Unknown keys are ignored."""
    records: list[ManifestRecord] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"line {lineno}: invalid JSON: {exc}") from None
            if not isinstance(payload, dict):
                raise ManifestError(f"line {lineno}: expected a JSON object")
            try:
                record = ManifestRecord.from_dict(payload)
            except ManifestError as exc:
                raise ManifestError(f"line {lineno}: {exc}") from None
            if record.id in seen_ids:
                raise ManifestError(f"line {lineno}: duplicate id {record.id!r}")
            seen_ids.add(record.id)
            records.append(record)
    return records


def write_manifest(records: Iterable[ManifestRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), ensure_ascii=False))
            fh.write("\n")


# --- partition codes -------------------------------------------------------

Selector = tuple[Provenance, Gender, GenderRelation]

_RW: Selector = (Provenance.REAL, Gender.WOMAN, GenderRelation.NOT_APPLICABLE)
_RM: Selector = (Provenance.REAL, Gender.MAN, GenderRelation.NOT_APPLICABLE)


def _syn(gender: Gender, relation: GenderRelation) -> Selector:
    return (Provenance.SYNTHETIC, gender, relation)


@dataclass(frozen=True)
class PartitionSpec:
    code: str
    selectors: tuple[Selector, ...]


#: Fine-tuning data partitions: which real/synthetic gender cells each code
#: mixes, and whether synthetic cells kept or changed the source gender.
PARTITIONS: dict[str, PartitionSpec] = {
    spec.code: spec
    for spec in (
        PartitionSpec("c1", (_RW,)),
        PartitionSpec("c2", (_RM,)),
        PartitionSpec("c3", (_RW, _RM)),
        PartitionSpec("c4", (_RW, _syn(Gender.MAN, GenderRelation.CHANGED))),
        PartitionSpec("c5", (_RW, _syn(Gender.MAN, GenderRelation.SAME))),
        PartitionSpec("c6", (_RM, _syn(Gender.WOMAN, GenderRelation.CHANGED))),
        PartitionSpec("c7", (_RM, _syn(Gender.WOMAN, GenderRelation.SAME))),
        PartitionSpec("c8", (
            _RW, _RM,
            _syn(Gender.WOMAN, GenderRelation.ANY),
            _syn(Gender.MAN, GenderRelation.ANY),
        )),
        PartitionSpec("c9", (
            _syn(Gender.WOMAN, GenderRelation.CHANGED),
            _syn(Gender.MAN, GenderRelation.CHANGED),
        )),
        PartitionSpec("c10", (
            _syn(Gender.WOMAN, GenderRelation.SAME),
            _syn(Gender.MAN, GenderRelation.SAME),
        )),
    )
}


def _matches(record: ManifestRecord, selector: Selector) -> bool:
    provenance, gender, relation = selector
    if record.provenance is not provenance or record.gender is not gender:
        return False
    if relation is GenderRelation.ANY or relation is GenderRelation.NOT_APPLICABLE:
        return True
    changed = record.source_gender.value != record.gender.value
    return changed if relation is GenderRelation.CHANGED else not changed


def build_partition(records: list[ManifestRecord], code: str) -> list[ManifestRecord]:
    """Select the records belonging to one partition code, in input order."""
    try:
        spec = PARTITIONS[code]
    except KeyError:
        raise ManifestError(f"unknown partition code {code!r}") from None
    return [r for r in records if any(_matches(r, s) for s in spec.selectors)]


# --- occupation selection --------------------------------------------------

_OCCUPATION_HEADER = [
    "name", "count_men", "count_women", "caption_appearances", "single_person_only",
]


@dataclass(frozen=True)
class OccupationRecord:
    name: str
    count_men: int
    count_women: int
    caption_appearances: int
    single_person_only: bool

    def __post_init__(self) -> None:
        for field in ("count_men", "count_women", "caption_appearances"):
            if getattr(self, field) < 0:
                raise ManifestError(f"occupation {self.name!r}: {field} must be >= 0")


def load_occupations(path: str | Path) -> list[OccupationRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _OCCUPATION_HEADER:
            raise ManifestError(
                f"bad occupation CSV header {header}, expected {_OCCUPATION_HEADER}"
            )
        out = []
        for row in reader:
            if len(row) != 5:
                raise ManifestError(f"occupation row {row} has {len(row)} fields")
            out.append(OccupationRecord(
                name=row[0],
                count_men=int(row[1]),
                count_women=int(row[2]),
                caption_appearances=int(row[3]),
                single_person_only=row[4].strip().lower() in ("true", "1"),
            ))
    return out


def write_occupations(occupations: Iterable[OccupationRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_OCCUPATION_HEADER)
        for occ in occupations:
            writer.writerow([
                occ.name, occ.count_men, occ.count_women,
                occ.caption_appearances, str(occ.single_person_only).lower(),
            ])


def select_occupations(
    occupations: list[OccupationRecord], min_per_gender: int = 50
) -> list[OccupationRecord]:
    """Keep occupations with more than ``min_per_gender`` examples of both
    genders (strictly greater), at least one caption appearance, and
    single-person annotations only. Order preserved."""
    return [
        occ for occ in occupations
        if occ.count_men > min_per_gender
        and occ.count_women > min_per_gender
        and occ.caption_appearances > 0
        and occ.single_person_only
    ]


_TOKEN = re.compile(r"[^\W\d_]+", re.UNICODE)


def count_caption_appearances(records: Iterable[ManifestRecord], name: str) -> int:
    """Whole-word, case-insensitive hits of a single keyword across captions."""
    keyword = name.lower()
    return sum(
        1
        for record in records
        for token in _TOKEN.findall(record.caption.lower())
        if token == keyword
    )


# --- dataset versions ------------------------------------------------------

def counterpart_ids(source_id: str) -> tuple[str, str]:
    """Ids of the (man, woman) synthetic versions of a real record."""
    return f"{source_id}_man", f"{source_id}_woman"


def dataset_version(
    records: list[ManifestRecord], fraction: float, seed: int
) -> list[ManifestRecord]:
    """Replace a fraction of real person records by their synthetic pairs.

    The records to replace are chosen by a seeded Fisher-Yates shuffle of
    the person-record ids, sorted lexicographically first, taking the first
    ``round(fraction * n)`` ids. A replaced record is substituted in place
    by its man and woman counterparts (in that order); synthetic records
    that are not pulled in as counterparts do not pass through.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ManifestError(f"fraction must be in [0, 1], got {fraction}")
    by_id = {r.id: r for r in records}
    candidates = [
        r for r in records if r.provenance is Provenance.REAL and r.has_person
    ]

    ids = sorted(r.id for r in candidates)
    rng = random.Random(seed)
    for i in range(len(ids) - 1, 0, -1):  # Fisher-Yates, descending
        j = rng.randrange(i + 1)
        ids[i], ids[j] = ids[j], ids[i]
    n_replace = int(fraction * len(ids) + 0.5)
    replaced = set(ids[:n_replace])

    out: list[ManifestRecord] = []
    for record in records:
        if record.provenance is Provenance.SYNTHETIC:
            continue
        if record.id not in replaced:
            out.append(record)
            continue
        for cid, gender in zip(counterpart_ids(record.id), (Gender.MAN, Gender.WOMAN)):
            counterpart = by_id.get(cid)
            if (
                counterpart is None
                or counterpart.provenance is not Provenance.SYNTHETIC
                or counterpart.gender is not gender
            ):
                raise ManifestError(
                    f"no synthetic {gender.value} counterpart for source id {record.id!r}"
                )
            out.append(counterpart)
    return out
