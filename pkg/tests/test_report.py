import json
import math

import numpy as np
import pytest

from cfaudit import (
    EmbeddingMatrix,
    GroupMetric,
    OccupationEval,
    assemble_report,
    classify_zero_shot,
    disparity,
    equality_of_opportunity_table,
    file_digest,
    make_prompt_set,
    self_similarity,
    total_disparity,
)
from cfaudit.errors import MetricError


def matrix_from(rows, prefix="r"):
    rows = np.asarray(rows, dtype=np.float32)
    return EmbeddingMatrix(
        ids=[f"{prefix}{i}" for i in range(rows.shape[0])], rows=rows
    )


def self_similarity_oracle(rows, include_diagonal=False):
    """Hand enumeration of the cosine of every pair."""
    unit = []
    for row in rows:
        norm = math.sqrt(sum(float(v) ** 2 for v in row))
        unit.append([float(v) / norm for v in row])
    n = len(unit)
    if include_diagonal:
        pairs = [(i, j) for i in range(n) for j in range(n)]
    else:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    sims = [sum(a * b for a, b in zip(unit[i], unit[j])) for i, j in pairs]
    return sum(sims) / len(sims)


# --- self-similarity ---------------------------------------------------------

def test_self_similarity_identical_rows():
    rows = np.tile([0.3, -1.2, 0.5], (6, 1))
    assert self_similarity(matrix_from(rows)) == pytest.approx(1.0, abs=1e-12)


def test_self_similarity_orthogonal_pair():
    assert self_similarity(matrix_from([[1.0, 0.0], [0.0, 1.0]])) == 0.0


def test_self_similarity_three_vector_hand_value():
    rows = [[1.0, 0.0], [0.0, 1.0], [1.0 / math.sqrt(2), 1.0 / math.sqrt(2)]]
    want = (0.0 + 1.0 / math.sqrt(2) + 1.0 / math.sqrt(2)) / 3.0
    got = self_similarity(matrix_from(rows))
    assert got == pytest.approx(want, abs=1e-6)
    assert got == pytest.approx(0.4714, abs=1e-4)


def test_self_similarity_matches_oracle_with_and_without_diagonal():
    rng = np.random.default_rng(71)
    for _ in range(15):
        n = int(rng.integers(2, 8))
        matrix = matrix_from(rng.normal(size=(n, 4)))
        # compare on the float32-rounded rows the matrix actually stores
        stored = matrix.rows.astype(np.float64)
        assert self_similarity(matrix) == pytest.approx(
            self_similarity_oracle(stored), abs=1e-10
        )
        assert self_similarity(matrix, include_diagonal=True) == pytest.approx(
            self_similarity_oracle(stored, include_diagonal=True), abs=1e-10
        )


def test_self_similarity_invariances():
    rng = np.random.default_rng(72)
    for _ in range(100):
        n = int(rng.integers(2, 10))
        rows = rng.normal(size=(n, 5)).astype(np.float32)
        base = self_similarity(matrix_from(rows))
        perm = rng.permutation(n)
        assert self_similarity(matrix_from(rows[perm])) == pytest.approx(
            base, abs=1e-9
        )
        scales = rng.uniform(0.2, 20.0, size=(n, 1)).astype(np.float32)
        assert self_similarity(matrix_from(rows * scales)) == pytest.approx(
            base, abs=1e-6
        )


def test_self_similarity_doubling_the_set_increases_mean():
    # X with X duplicated has pair mean (4S + n) / (n(2n - 1)) against
    # 2S / (n(n - 1)); the gap is positive unless every row is identical,
    # because the copy pairs contribute cosine 1 each.
    rng = np.random.default_rng(73)
    rows = rng.normal(size=(4, 3))
    base = self_similarity(matrix_from(rows))
    doubled = np.vstack([rows, rows])
    assert self_similarity(matrix_from(doubled)) > base

    same = np.tile(rng.normal(size=3), (3, 1))
    identical = self_similarity(matrix_from(same))
    still = self_similarity(matrix_from(np.vstack([same, same])))
    assert still == pytest.approx(identical, abs=1e-12)


def test_self_similarity_needs_two_rows():
    with pytest.raises(MetricError, match=">=2 rows"):
        self_similarity(matrix_from([[1.0, 0.0]]))


# --- disparity ---------------------------------------------------------------

def test_disparity_printed_reference_rows():
    assert round(disparity(78.39, 92.82), 2) == 14.43
    assert round(disparity(0.433, 0.504), 3) == 0.071
    assert round(disparity(92.25, 97.22), 2) == 4.97
    assert disparity(0.525, 0.592) == pytest.approx(0.067)
    assert disparity(3.3, 3.3) == 0.0


def test_disparity_symmetric_non_negative():
    rng = np.random.default_rng(74)
    for _ in range(50):
        a, b = rng.normal(size=2) * 10
        assert disparity(a, b) == disparity(b, a) >= 0.0


# --- equality of opportunity -------------------------------------------------

def occupation_fixture(name, men_outcomes, women_outcomes):
    """Build an OccupationEval where each outcome says whether the sample
    was classified correctly; classification runs on crafted embeddings."""
    labels = (name, "other")
    prompts = make_prompt_set(labels, np.eye(2))
    rows = []
    genders = []
    for correct in men_outcomes:
        rows.append([1.0, 0.0] if correct else [0.0, 1.0])
        genders.append("man")
    for correct in women_outcomes:
        rows.append([1.0, 0.0] if correct else [0.0, 1.0])
        genders.append("woman")
    result = classify_zero_shot(matrix_from(rows, prefix=name), prompts)
    return OccupationEval(
        name=name,
        result=result,
        truth=tuple([name] * len(rows)),
        genders=tuple(genders),
    )


def test_equality_of_opportunity_counting_oracle():
    evals = [
        occupation_fixture("dancer", [True, True, False, True], [True, False]),
        occupation_fixture("welder", [True], [True, True, True]),
        occupation_fixture("singer", [False, False], [True, False, False, True]),
    ]
    rows = equality_of_opportunity_table(evals)
    by_name = {r.name: r for r in rows}
    assert by_name["dancer"].recall_men == pytest.approx(3 / 4)
    assert by_name["dancer"].recall_women == pytest.approx(1 / 2)
    assert by_name["dancer"].disparity == pytest.approx(1 / 4)
    assert by_name["welder"].recall_men == 1.0
    assert by_name["welder"].disparity == 0.0
    assert by_name["singer"].recall_men == 0.0
    assert by_name["singer"].recall_women == pytest.approx(1 / 2)
    assert total_disparity(rows) == pytest.approx(1 / 4 + 0.0 + 1 / 2)


def test_equality_of_opportunity_all_correct_means_zero():
    evals = [
        occupation_fixture("nurse", [True, True], [True, True, True]),
        occupation_fixture("pilot", [True], [True]),
    ]
    rows = equality_of_opportunity_table(evals)
    assert all(r.disparity == 0.0 for r in rows)
    assert total_disparity(rows) == 0.0


def test_equality_of_opportunity_excludes_unsupported_gender():
    complete = occupation_fixture("chef", [True, False], [True])
    men_only = occupation_fixture("mason", [True, True], [])
    with pytest.warns(UserWarning, match="mason.*no woman samples"):
        rows = equality_of_opportunity_table([complete, men_only])
    assert [r.name for r in rows] == ["chef"]


def test_dancer_reference_disparity():
    assert round(disparity(50.70, 58.43), 2) == 7.73


# --- report assembly ---------------------------------------------------------

def sample_metrics():
    return [
        GroupMetric("man", "self_similarity", 0.433, 100),
        GroupMetric("woman", "self_similarity", 0.504, 120),
        GroupMetric("man", "gender_recall", 0.9225, 100),
        GroupMetric("woman", "gender_recall", 0.9722, 120),
    ]


def test_assemble_report_derives_disparities():
    report = assemble_report("demo", sample_metrics())
    assert report.disparities["self_similarity"] == pytest.approx(0.071)
    assert report.disparities["gender_recall"] == pytest.approx(0.0497)
    for metric, gap in report.disparities.items():
        values = [m.value for m in report.metrics if m.metric == metric]
        assert abs(gap - abs(values[0] - values[1])) <= 1e-12


def test_assemble_report_missing_counterpart():
    metrics = [GroupMetric("man", "self_similarity", 0.4, 10)]
    with pytest.raises(MetricError, match="lacks a value for group 'woman'"):
        assemble_report("demo", metrics)


def test_assemble_report_duplicate_group_metric():
    metrics = [
        GroupMetric("man", "self_similarity", 0.4, 10),
        GroupMetric("man", "self_similarity", 0.5, 10),
    ]
    with pytest.raises(MetricError, match="duplicate"):
        assemble_report("demo", metrics)


def test_assemble_report_ignores_other_groups():
    metrics = sample_metrics() + [GroupMetric("all", "person_preference", 0.8, 220)]
    report = assemble_report("demo", metrics)
    assert "person_preference" not in report.disparities


def test_empty_report_is_valid():
    report = assemble_report("empty", [])
    payload = json.loads(report.to_json())
    assert payload["dataset"] == "empty"
    assert payload["metrics"] == []
    assert payload["disparities"] == {}
    assert payload["occupations"] == []


def test_report_schema_keys():
    report = assemble_report("demo", sample_metrics(),
                             provenance={"seed": 0},
                             realism={"fid": 1.0, "kid_mean": 0.1,
                                      "kid_std": 0.01, "cmmd": 2.0})
    payload = json.loads(report.to_json())
    assert list(payload) == [
        "dataset", "metrics", "disparities", "occupations", "provenance",
        "realism",
    ]
    assert list(payload["metrics"][0]) == ["group", "metric", "value", "support"]
    assert set(payload["realism"]) == {"fid", "kid_mean", "kid_std", "cmmd"}


def test_report_serialization_is_deterministic():
    first = assemble_report(
        "demo", sample_metrics(), provenance={"b": 2, "a": {"y": 1, "x": 0}}
    )
    second = assemble_report(
        "demo", sample_metrics(), provenance={"a": {"x": 0, "y": 1}, "b": 2}
    )
    assert first.to_json() == second.to_json()
    assert first.to_json().encode() == second.to_json().encode()


def test_group_metric_requires_support():
    with pytest.raises(MetricError, match="support"):
        GroupMetric("man", "x", 1.0, 0)


def test_file_digest_stable(tmp_path):
    path = tmp_path / "blob.bin"
    path.write_bytes(b"abc123")
    digest = file_digest(path)
    assert digest.startswith("sha256:")
    assert digest == file_digest(path)
    path.write_bytes(b"abc124")
    assert digest != file_digest(path)
