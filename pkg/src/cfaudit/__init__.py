"""Bias audits for gender-counterfactual image-caption datasets.

The package covers the offline pieces of a counterfactual balancing
pipeline: manifest handling with fine-tuning partitions, counterfactual
caption editing, inpainting-mask composition, and the audit metrics
(distribution distances, zero-shot measures, per-group disparities).
"""

from .captions import (
    CaptionGender,
    CaptionPair,
    GenderLexicon,
    default_lexicon,
    detect_gender,
    edit_caption,
    load_lexicon,
    make_counterfactual_pair,
    validate_lexicon,
)
from .distances import (
    GaussianStats,
    cmmd,
    fit_gaussian,
    frechet_distance,
    kid_unbiased,
    sqrtm_psd,
)
from .embeddings import (
    EmbeddingMatrix,
    l2_normalize,
    read_embeddings,
    slice_by_ids,
    write_embeddings,
)
from .errors import (
    AuditError,
    EmbeddingIOError,
    LexiconError,
    ManifestError,
    MaskError,
    MetricError,
)
from .manifest import (
    Gender,
    GenderRelation,
    ManifestRecord,
    OccupationRecord,
    PARTITIONS,
    Provenance,
    SourceGender,
    build_partition,
    count_caption_appearances,
    counterpart_ids,
    dataset_version,
    load_manifest,
    load_occupations,
    select_occupations,
    write_manifest,
    write_occupations,
)
from .masks import (
    BinaryMask,
    compose_inpaint_mask,
    coverage,
    decode_mask,
    dilate_3x3,
    encode_mask,
)
from .report import (
    BiasReport,
    GroupMetric,
    OccupationEval,
    OccupationRow,
    assemble_report,
    disparity,
    equality_of_opportunity_table,
    file_digest,
    self_similarity,
    total_disparity,
)
from .zeroshot import (
    ClassificationResult,
    PromptSet,
    classify_zero_shot,
    cosine_similarity,
    make_prompt_set,
    per_class_recall,
    person_preference,
    person_preference_result,
    prompt_text,
    recall_at_k,
)

__version__ = "0.1.0"

__all__ = [
    "AuditError",
    "BiasReport",
    "BinaryMask",
    "CaptionGender",
    "CaptionPair",
    "ClassificationResult",
    "EmbeddingIOError",
    "EmbeddingMatrix",
    "GaussianStats",
    "Gender",
    "GenderLexicon",
    "GenderRelation",
    "GroupMetric",
    "LexiconError",
    "ManifestError",
    "ManifestRecord",
    "MaskError",
    "MetricError",
    "OccupationEval",
    "OccupationRecord",
    "OccupationRow",
    "PARTITIONS",
    "PromptSet",
    "Provenance",
    "SourceGender",
    "assemble_report",
    "build_partition",
    "classify_zero_shot",
    "cmmd",
    "compose_inpaint_mask",
    "cosine_similarity",
    "count_caption_appearances",
    "counterpart_ids",
    "coverage",
    "dataset_version",
    "decode_mask",
    "default_lexicon",
    "detect_gender",
    "dilate_3x3",
    "disparity",
    "edit_caption",
    "encode_mask",
    "equality_of_opportunity_table",
    "file_digest",
    "fit_gaussian",
    "frechet_distance",
    "kid_unbiased",
    "l2_normalize",
    "load_lexicon",
    "load_manifest",
    "load_occupations",
    "make_counterfactual_pair",
    "make_prompt_set",
    "per_class_recall",
    "person_preference",
    "person_preference_result",
    "prompt_text",
    "read_embeddings",
    "recall_at_k",
    "select_occupations",
    "self_similarity",
    "slice_by_ids",
    "sqrtm_psd",
    "total_disparity",
    "validate_lexicon",
    "write_embeddings",
    "write_manifest",
    "write_occupations",
]
