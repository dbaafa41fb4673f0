"""
Assembling a bias report from embeddings
========================================

The profiling pipeline is: classify each image against gender prompts,
measure how often a neutral "person" prompt beats the gendered one,
measure within-group self-similarity, then collect everything into one
deterministic JSON report with per-metric disparities.
"""

import numpy as np

from cfaudit import (
    EmbeddingMatrix,
    GroupMetric,
    OccupationEval,
    assemble_report,
    classify_zero_shot,
    equality_of_opportunity_table,
    make_prompt_set,
    person_preference,
    prompt_text,
    self_similarity,
)

rng = np.random.default_rng(5)

# Synthetic stand-ins for CLIP embeddings: each gender group clusters
# around its own direction, with the "man" cluster slightly tighter.
d = 32
man_axis = rng.normal(size=d)
woman_axis = rng.normal(size=d)
man_rows = man_axis + 0.8 * rng.normal(size=(40, d))
woman_rows = woman_axis + 1.1 * rng.normal(size=(40, d))

men = EmbeddingMatrix(ids=[f"m{i}" for i in range(40)],
                      rows=man_rows.astype(np.float32))
women = EmbeddingMatrix(ids=[f"w{i}" for i in range(40)],
                        rows=woman_rows.astype(np.float32))

print("prompt for 'man':", prompt_text("man"))
prompts = make_prompt_set(
    ["man", "woman"],
    np.stack([man_axis, woman_axis]),
)
person_prompt = (man_axis + woman_axis) / 2.0

metrics = []
for label, group, axis in (("man", men, man_axis), ("woman", women, woman_axis)):
    preference = person_preference(group, person_prompt, axis)
    similarity = self_similarity(group)
    result = classify_zero_shot(group, prompts)
    recall = sum(1 for p in result.predicted_labels() if p == label) / group.n
    metrics += [
        GroupMetric(label, "person_preference", preference, group.n),
        GroupMetric(label, "self_similarity", similarity, group.n),
        GroupMetric(label, "gender_recall", recall, group.n),
    ]
    print(f"{label:>5}: preference {preference:.3f}, "
          f"self-similarity {similarity:.3f}, recall {recall:.3f}")

# Equality of opportunity on a toy occupation: how often is a dancer
# recognized as one, per gender?
dancer_prompts = make_prompt_set(["dancer", "other"], rng.normal(size=(2, d)))
all_images = EmbeddingMatrix(
    ids=men.ids + women.ids,
    rows=np.vstack([men.rows, women.rows]),
)
evaluation = OccupationEval(
    name="dancer",
    result=classify_zero_shot(all_images, dancer_prompts),
    truth=["dancer"] * 80,
    genders=["man"] * 40 + ["woman"] * 40,
)
rows = equality_of_opportunity_table([evaluation])
for row in rows:
    print(f"dancer: men {row.recall_men:.3f}, women {row.recall_women:.3f}, "
          f"disparity {row.disparity:.3f}")

report = assemble_report(
    dataset="demo-pool",
    metrics=metrics,
    occupations=rows,
    provenance={"seed": 5, "note": "synthetic demo embeddings"},
)
print()
print(report.to_json())
