"""Batch command-line interface.

Subcommands cover the offline audit workflows: counterfactual caption
editing, inpainting-mask composition, fine-tuning partitions, balanced
dataset versions, bias profiling, realism measurement, and retrieval
evaluation.

Conventions shared by every subcommand:

* data goes only to the declared output paths; the run summary goes to
  standard error;
* exit 0 on success, 1 on processing errors, 2 on missing input files;
* results are deterministic for fixed inputs, flags and seed, regardless
  of ``--jobs``.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Sequence, TypeVar

import numpy as np

from .captions import default_lexicon, load_lexicon, make_counterfactual_pair
from .distances import (
    CMMD_DEFAULT_BANDWIDTH,
    CMMD_DEFAULT_SCALE,
    KID_DEFAULT_SUBSETS,
    KID_MAX_SUBSET,
    cmmd,
    fit_gaussian,
    frechet_distance,
    kid_unbiased,
)
from .embeddings import l2_normalize, read_embeddings, slice_by_ids
from .errors import AuditError, MaskError, MetricError
from .manifest import (
    PARTITIONS,
    Gender,
    build_partition,
    dataset_version,
    load_manifest,
    write_manifest,
)
from .masks import (
    COMBINE_MODES,
    compose_inpaint_mask,
    decode_mask,
    dilate_3x3,
    encode_mask,
)
from .report import GroupMetric, assemble_report, file_digest, self_similarity
from .zeroshot import (
    PROMPT_TEMPLATE,
    classify_zero_shot,
    make_prompt_set,
    per_class_recall,
    person_preference,
    recall_at_k,
)

T = TypeVar("T")
U = TypeVar("U")

PERSON_LABEL = "person"


class _MissingInput(Exception):
    """Input file or directory absent; maps to exit status 2."""


def _require_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise _MissingInput(f"{what} not found: {path}")
    return p


def _require_dir(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_dir():
        raise _MissingInput(f"{what} not found: {path}")
    return p


def _parallel_map(fn: Callable[[T], U], items: Sequence[T], jobs: int) -> list[U]:
    """Map preserving input order; thread pool when jobs > 1."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def _write_json(payload: dict, path: str) -> None:
    Path(path).write_text(
        json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


# --- subcommands -------------------------------------------------------------


def cmd_edit_captions(args: argparse.Namespace) -> int:
    manifest_path = _require_file(args.manifest, "manifest")
    if args.lexicon is not None:
        lexicon = load_lexicon(_require_file(args.lexicon, "lexicon"))
    else:
        lexicon = default_lexicon()
    records = load_manifest(manifest_path)
    pairs = _parallel_map(
        lambda record: make_counterfactual_pair(record.caption, lexicon),
        records,
        args.jobs,
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        for record, pair in zip(records, pairs):
            fh.write(
                json.dumps(
                    {
                        "id": record.id,
                        "original": pair.original,
                        "masculine": pair.masculine,
                        "feminine": pair.feminine,
                        "detected_gender": pair.detected_gender.value,
                    },
                    ensure_ascii=False,
                )
            )
            fh.write("\n")
    _note(f"edit-captions: {len(records)} captions processed")
    return 0


def cmd_compose_masks(args: argparse.Namespace) -> int:
    manifest_path = _require_file(args.manifest, "manifest")
    person_dir = _require_dir(args.person_dir, "person mask directory")
    skin_dir = _require_dir(args.skin_dir, "skin mask directory")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = load_manifest(manifest_path)

    def process(record) -> tuple[str, str | None]:
        if not record.has_person:
            return "skipped", f"{record.id}: no person"
        try:
            person = decode_mask(person_dir / f"{record.id}.png")
            if not person.bits.any():
                return "skipped", f"{record.id}: empty person mask"
            skin = decode_mask(skin_dir / f"{record.id}.png")
            combined = compose_inpaint_mask(person, skin, combine=args.combine)
            final = dilate_3x3(combined, iterations=args.dilate_iters)
            encode_mask(final, out_dir / f"{record.id}.png")
        except MaskError as exc:
            return "failed", f"{record.id}: {exc}"
        return "written", None

    outcomes = _parallel_map(process, records, args.jobs)
    written = sum(1 for status, _ in outcomes if status == "written")
    skipped = [detail for status, detail in outcomes if status == "skipped"]
    failed = [detail for status, detail in outcomes if status == "failed"]
    for detail in skipped:
        _note(f"skipped {detail}")
    for detail in failed:
        _note(f"failed {detail}")
    _note(
        f"compose-masks: {written} written, {len(skipped)} skipped, "
        f"{len(failed)} failed"
    )
    return 1 if failed else 0


def cmd_partitions(args: argparse.Namespace) -> int:
    manifest_path = _require_file(args.manifest, "manifest")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = load_manifest(manifest_path)
    codes = args.codes if args.codes else list(PARTITIONS)
    for code in codes:
        partition = build_partition(records, code)
        write_manifest(partition, out_dir / f"{code}.jsonl")
        _note(f"{code}: {len(partition)} records")
    return 0


def cmd_dataset_version(args: argparse.Namespace) -> int:
    manifest_path = _require_file(args.manifest, "manifest")
    records = load_manifest(manifest_path)
    versioned = dataset_version(records, args.fraction, args.seed)
    write_manifest(versioned, args.out)
    _note(
        f"dataset-version: fraction {args.fraction}, "
        f"{len(records)} records in, {len(versioned)} out"
    )
    return 0


def cmd_profile(args: argparse.Namespace) -> int:
    manifest_path = _require_file(args.manifest, "manifest")
    embeddings_path = _require_file(args.embeddings, "embeddings file")
    prompts_path = _require_file(args.prompts, "prompts file")
    records = load_manifest(manifest_path)
    images = read_embeddings(embeddings_path)
    prompt_matrix = read_embeddings(prompts_path)

    gender_labels = (Gender.MAN.value, Gender.WOMAN.value)
    for label in (PERSON_LABEL,) + gender_labels:
        if label not in prompt_matrix.ids:
            raise MetricError(
                f"prompt embedding {label!r} missing from {prompts_path}"
            )
    person_vec = prompt_matrix.row_by_id(PERSON_LABEL)
    gender_prompts = make_prompt_set(
        gender_labels,
        np.stack([prompt_matrix.row_by_id(label) for label in gender_labels]),
    )

    subjects = [
        r for r in records
        if r.has_person and r.gender in (Gender.MAN, Gender.WOMAN)
    ]
    known = set(images.ids)
    for record in subjects:
        if record.id not in known:
            raise MetricError(f"no embedding for record {record.id!r}")
    group_ids = {
        label: [r.id for r in subjects if r.gender.value == label]
        for label in gender_labels
    }

    def group_metrics(label: str) -> list[GroupMetric]:
        ids = group_ids[label]
        if not ids:
            raise MetricError(f"no person records for group {label!r}")
        sub = slice_by_ids(images, ids)
        preference = person_preference(
            sub, person_vec, prompt_matrix.row_by_id(label)
        )
        similarity = self_similarity(sub, include_diagonal=args.include_diagonal)
        return [
            GroupMetric(label, "person_preference", preference, len(ids)),
            GroupMetric(label, "self_similarity", similarity, len(ids)),
        ]

    per_group = _parallel_map(group_metrics, list(gender_labels), args.jobs)
    metrics = [metric for group in per_group for metric in group]

    all_subjects = slice_by_ids(images, [r.id for r in subjects])
    result = classify_zero_shot(all_subjects, gender_prompts)
    recalls = per_class_recall(result, [r.gender.value for r in subjects])
    for label in gender_labels:
        if label in recalls:
            metrics.append(
                GroupMetric(label, "gender_recall", recalls[label],
                            len(group_ids[label]))
            )

    provenance = {
        "inputs": {
            "manifest": file_digest(manifest_path),
            "embeddings": file_digest(embeddings_path),
            "prompts": file_digest(prompts_path),
        },
        "parameters": {
            "include_diagonal": args.include_diagonal,
            "prompt_template": PROMPT_TEMPLATE,
            "seed": args.seed,
        },
    }
    bias = assemble_report(
        dataset=manifest_path.stem, metrics=metrics, provenance=provenance
    )
    Path(args.out).write_text(bias.to_json(), encoding="utf-8")
    _note(
        f"profile: {len(subjects)} person records, "
        f"{len(metrics)} group metrics, {len(bias.disparities)} disparities"
    )
    return 0


def cmd_realism(args: argparse.Namespace) -> int:
    real_path = _require_file(args.real, "real embeddings file")
    synthetic_path = _require_file(args.synthetic, "synthetic embeddings file")
    real = read_embeddings(real_path)
    synthetic = read_embeddings(synthetic_path)
    if args.normalize:
        real = l2_normalize(real)
        synthetic = l2_normalize(synthetic)
    kid_subset = args.kid_subset
    if kid_subset is None:
        kid_subset = min(KID_MAX_SUBSET, real.n, synthetic.n)

    def run_fid() -> tuple[str, dict[str, float]]:
        value = frechet_distance(fit_gaussian(real), fit_gaussian(synthetic))
        return "fid", {"fid": value}

    def run_kid() -> tuple[str, dict[str, float]]:
        mean, std = kid_unbiased(
            real, synthetic,
            subset_size=kid_subset,
            n_subsets=args.kid_subsets,
            seed=args.seed,
        )
        return "kid", {"kid_mean": mean, "kid_std": std}

    def run_cmmd() -> tuple[str, dict[str, float]]:
        value = cmmd(
            real, synthetic,
            bandwidth=args.cmmd_bandwidth,
            scale=args.cmmd_scale,
        )
        return "cmmd", {"cmmd": value}

    results = _parallel_map(lambda f: f(), [run_fid, run_kid, run_cmmd], args.jobs)
    realism: dict[str, float] = {}
    for _, values in results:
        realism.update(values)

    provenance = {
        "inputs": {
            "real": file_digest(real_path),
            "synthetic": file_digest(synthetic_path),
        },
        "parameters": {
            "kid_subset": kid_subset,
            "kid_subsets": args.kid_subsets,
            "cmmd_bandwidth": args.cmmd_bandwidth,
            "cmmd_scale": args.cmmd_scale,
            "normalize": args.normalize,
            "seed": args.seed,
        },
    }
    bias = assemble_report(
        dataset=f"{real_path.stem}-vs-{synthetic_path.stem}",
        metrics=[],
        provenance=provenance,
        realism=realism,
    )
    Path(args.out).write_text(bias.to_json(), encoding="utf-8")
    _note(
        "realism: fid={fid:.6g} kid_mean={kid_mean:.6g} "
        "kid_std={kid_std:.6g} cmmd={cmmd:.6g}".format(**realism)
    )
    return 0


def cmd_retrieval(args: argparse.Namespace) -> int:
    queries_path = _require_file(args.queries, "queries file")
    gallery_path = _require_file(args.gallery, "gallery file")
    queries = read_embeddings(queries_path)
    gallery = read_embeddings(gallery_path)
    gallery_index = {id_: i for i, id_ in enumerate(gallery.ids)}

    if args.truth is not None:
        truth_path = _require_file(args.truth, "truth file")
        mapping = json.loads(truth_path.read_text(encoding="utf-8"))
        if not isinstance(mapping, dict):
            raise MetricError(f"{truth_path}: expected an object query id -> gallery id")
    else:
        mapping = {id_: id_ for id_ in queries.ids}

    def truth_for(ids: Sequence[str]) -> list[int]:
        out = []
        for id_ in ids:
            if id_ not in mapping:
                raise MetricError(f"no truth entry for query {id_!r}")
            target = mapping[id_]
            if target not in gallery_index:
                raise MetricError(f"truth id {target!r} not in gallery")
            out.append(gallery_index[target])
        return out

    overall = recall_at_k(queries, gallery, truth_for(queries.ids), args.k)
    payload: dict = {
        "k": args.k,
        "overall": {"recall_at_k": overall, "support": queries.n},
        "groups": [],
    }

    if args.groups is not None:
        groups_path = _require_file(args.groups, "groups file")
        groups = json.loads(groups_path.read_text(encoding="utf-8"))
        if not isinstance(groups, dict) or not all(
            isinstance(v, list) and all(isinstance(i, str) for i in v)
            for v in groups.values()
        ):
            raise MetricError(
                f"{groups_path}: expected an object group name -> array of query ids"
            )

        def group_entry(name: str) -> dict:
            ids = groups[name]
            sub = slice_by_ids(queries, ids)
            value = recall_at_k(sub, gallery, truth_for(ids), args.k)
            return {"name": name, "recall_at_k": value, "support": len(ids)}

        payload["groups"] = _parallel_map(group_entry, sorted(groups), args.jobs)

    payload["provenance"] = {
        "inputs": {
            "queries": file_digest(queries_path),
            "gallery": file_digest(gallery_path),
        },
        "parameters": {"k": args.k},
    }
    _write_json(payload, args.out)
    _note(
        f"retrieval: recall@{args.k} {overall:.4f} over {queries.n} queries, "
        f"{len(payload['groups'])} groups"
    )
    return 0


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfaudit",
        description="Bias audits for gender-counterfactual image-caption datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--jobs", type=int, default=1,
                        help="worker threads (default 1); results never depend on it")

    sp = sub.add_parser("edit-captions",
                        help="write masculine/feminine caption pairs per record")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--lexicon", default=None,
                    help="keyword lexicon JSON (default: shipped lexicon)")
    sp.add_argument("--out", required=True, help="output pairs JSONL")
    common(sp)
    sp.set_defaults(func=cmd_edit_captions)

    sp = sub.add_parser("compose-masks",
                        help="combine person and skin masks into inpainting masks")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--person-dir", required=True,
                    help="directory with <id>.png person masks")
    sp.add_argument("--skin-dir", required=True,
                    help="directory with <id>.png skin masks")
    sp.add_argument("--out", required=True, help="output mask directory")
    sp.add_argument("--combine", choices=COMBINE_MODES, default="intersect")
    sp.add_argument("--dilate-iters", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_compose_masks)

    sp = sub.add_parser("partitions",
                        help="emit one manifest per fine-tuning partition code")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--codes", nargs="*", default=None,
                    help=f"subset of {', '.join(PARTITIONS)} (default: all)")
    sp.set_defaults(func=cmd_partitions)

    sp = sub.add_parser("dataset-version",
                        help="replace a fraction of real person records by "
                             "synthetic man/woman pairs")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--fraction", type=float, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="output manifest JSONL")
    sp.set_defaults(func=cmd_dataset_version)

    sp = sub.add_parser("profile",
                        help="person preference, self-similarity and gender "
                             "recall per group, with disparities")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--embeddings", required=True,
                    help="image embeddings keyed by record id")
    sp.add_argument("--prompts", required=True,
                    help="prompt embeddings with ids person, man, woman")
    sp.add_argument("--out", required=True, help="output report JSON")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--include-diagonal", action="store_true",
                    help="count self-pairs in self-similarity (sensitivity check)")
    common(sp)
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("realism",
                        help="distribution distances between real and synthetic "
                             "embeddings")
    sp.add_argument("--real", required=True)
    sp.add_argument("--synthetic", required=True)
    sp.add_argument("--out", required=True, help="output report JSON")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--kid-subset", type=int, default=None,
                    help=f"KID subset size (default min({KID_MAX_SUBSET}, n))")
    sp.add_argument("--kid-subsets", type=int, default=KID_DEFAULT_SUBSETS)
    sp.add_argument("--cmmd-bandwidth", type=float, default=CMMD_DEFAULT_BANDWIDTH)
    sp.add_argument("--cmmd-scale", type=float, default=CMMD_DEFAULT_SCALE)
    sp.add_argument("--normalize", action="store_true",
                    help="unit-normalize rows before FID/KID")
    common(sp)
    sp.set_defaults(func=cmd_realism)

    sp = sub.add_parser("retrieval",
                        help="recall@k of queries against a gallery, with "
                             "per-group breakdown")
    sp.add_argument("--queries", required=True)
    sp.add_argument("--gallery", required=True)
    sp.add_argument("--truth", default=None,
                    help="JSON object query id -> gallery id "
                         "(default: match equal ids)")
    sp.add_argument("--groups", default=None,
                    help="JSON object group name -> array of query ids")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--out", required=True, help="output JSON")
    common(sp)
    sp.set_defaults(func=cmd_retrieval)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _MissingInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
