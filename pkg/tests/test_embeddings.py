import json

import numpy as np
import pytest

from cfaudit import (
    EmbeddingMatrix,
    l2_normalize,
    read_embeddings,
    slice_by_ids,
    write_embeddings,
)
from cfaudit.errors import EmbeddingIOError


def random_matrix(rng, n, d):
    rows = rng.normal(size=(n, d)).astype(np.float32)
    return EmbeddingMatrix(ids=[f"row{i:04d}" for i in range(n)], rows=rows)


def test_round_trip_bitwise(tmp_path):
    rng = np.random.default_rng(11)
    for trial in range(50):
        n = int(rng.integers(0, 40))
        d = int(rng.integers(1, 17))
        matrix = random_matrix(rng, n, d)
        path = tmp_path / f"m{trial}.emb"
        write_embeddings(matrix, path)
        back = read_embeddings(path)
        assert back.ids == matrix.ids
        assert back.rows.dtype == np.float32
        assert back.rows.shape == (n, d)
        assert back.rows.tobytes() == matrix.rows.tobytes()


def test_round_trip_empty_and_single_column(tmp_path):
    empty = EmbeddingMatrix(ids=[], rows=np.zeros((0, 5), dtype=np.float32))
    write_embeddings(empty, tmp_path / "empty.emb")
    back = read_embeddings(tmp_path / "empty.emb")
    assert back.n == 0 and back.dim == 5

    thin = EmbeddingMatrix(ids=["a", "b"], rows=np.array([[1.5], [-2.25]], dtype=np.float32))
    write_embeddings(thin, tmp_path / "thin.emb")
    back = read_embeddings(tmp_path / "thin.emb")
    assert back.dim == 1
    assert back.rows.tobytes() == thin.rows.tobytes()


def test_truncated_payload_rejected(tmp_path):
    rng = np.random.default_rng(3)
    matrix = random_matrix(rng, 7, 4)
    path = tmp_path / "t.emb"
    write_embeddings(matrix, path)
    blob = path.read_bytes()
    path.write_bytes(blob[:-4])
    with pytest.raises(EmbeddingIOError) as err:
        read_embeddings(path)
    # header declares 7x4 = 112 payload bytes, 108 remain after the cut
    assert "112" in str(err.value) and "108" in str(err.value)


def test_extra_payload_rejected(tmp_path):
    rng = np.random.default_rng(4)
    matrix = random_matrix(rng, 3, 2)
    path = tmp_path / "t.emb"
    write_embeddings(matrix, path)
    path.write_bytes(path.read_bytes() + b"\x00\x00\x00\x00")
    with pytest.raises(EmbeddingIOError):
        read_embeddings(path)


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "bad.emb"
    write_embeddings(EmbeddingMatrix(ids=["x"], rows=np.ones((1, 2), np.float32)), path)
    blob = bytearray(path.read_bytes())
    blob[:4] = b"NOPE"
    path.write_bytes(bytes(blob))
    with pytest.raises(EmbeddingIOError, match="magic"):
        read_embeddings(path)


def test_header_shorter_than_twelve_bytes(tmp_path):
    path = tmp_path / "short.emb"
    path.write_bytes(b"EMB1\x01")
    with pytest.raises(EmbeddingIOError, match="header"):
        read_embeddings(path)


def test_sidecar_length_mismatch(tmp_path):
    rng = np.random.default_rng(5)
    path = tmp_path / "m.emb"
    write_embeddings(random_matrix(rng, 4, 3), path)
    sidecar = tmp_path / "m.emb.ids.json"
    sidecar.write_text(json.dumps(["only", "three", "ids"]))
    with pytest.raises(EmbeddingIOError, match="3 ids for 4 rows"):
        read_embeddings(path)


def test_sidecar_missing(tmp_path):
    rng = np.random.default_rng(6)
    path = tmp_path / "m.emb"
    write_embeddings(random_matrix(rng, 2, 2), path)
    (tmp_path / "m.emb.ids.json").unlink()
    with pytest.raises(EmbeddingIOError, match="sidecar"):
        read_embeddings(path)


def test_sidecar_not_string_array(tmp_path):
    rng = np.random.default_rng(7)
    path = tmp_path / "m.emb"
    write_embeddings(random_matrix(rng, 2, 2), path)
    (tmp_path / "m.emb.ids.json").write_text("[1, 2]")
    with pytest.raises(EmbeddingIOError, match="array of strings"):
        read_embeddings(path)


def test_matrix_validation():
    with pytest.raises(EmbeddingIOError, match="2-dimensional"):
        EmbeddingMatrix(ids=["a"], rows=np.ones(3, dtype=np.float32))
    with pytest.raises(EmbeddingIOError, match="ids for"):
        EmbeddingMatrix(ids=["a"], rows=np.ones((2, 3), dtype=np.float32))
    with pytest.raises(EmbeddingIOError, match="duplicate id"):
        EmbeddingMatrix(ids=["a", "a"], rows=np.ones((2, 3), dtype=np.float32))
    bad = np.ones((2, 2), dtype=np.float32)
    bad[1, 0] = np.nan
    with pytest.raises(EmbeddingIOError, match="row 1"):
        EmbeddingMatrix(ids=["a", "b"], rows=bad)
    with pytest.raises(EmbeddingIOError, match="dimension"):
        EmbeddingMatrix(ids=[], rows=np.zeros((0, 0), dtype=np.float32))


def test_l2_normalize_unit_norms_and_idempotence():
    rng = np.random.default_rng(8)
    matrix = random_matrix(rng, 30, 6)
    unit = l2_normalize(matrix)
    norms = np.linalg.norm(unit.rows.astype(np.float64), axis=1)
    assert np.allclose(norms, 1.0, atol=1e-6)
    again = l2_normalize(unit)
    assert np.allclose(again.rows, unit.rows, atol=1e-6)
    assert unit.ids == matrix.ids


def test_l2_normalize_zero_row():
    rows = np.array([[1.0, 2.0], [0.0, 0.0]], dtype=np.float32)
    with pytest.raises(EmbeddingIOError, match="zero-norm row 1"):
        l2_normalize(EmbeddingMatrix(ids=["a", "b"], rows=rows))


def test_slice_by_ids_orders_and_copies():
    rng = np.random.default_rng(9)
    matrix = random_matrix(rng, 5, 3)
    picked = slice_by_ids(matrix, ["row0003", "row0000"])
    assert picked.ids == ["row0003", "row0000"]
    assert np.array_equal(picked.rows[0], matrix.rows[3])
    assert np.array_equal(picked.rows[1], matrix.rows[0])
    picked.rows[0, 0] += 1.0
    assert picked.rows[0, 0] != matrix.rows[3, 0]


def test_slice_by_ids_unknown():
    matrix = EmbeddingMatrix(ids=["a"], rows=np.ones((1, 2), np.float32))
    with pytest.raises(EmbeddingIOError, match="'b' not found"):
        slice_by_ids(matrix, ["b"])


def test_row_by_id():
    rows = np.array([[1, 2], [3, 4]], dtype=np.float32)
    matrix = EmbeddingMatrix(ids=["a", "b"], rows=rows)
    assert np.array_equal(matrix.row_by_id("b"), [3, 4])
    with pytest.raises(EmbeddingIOError):
        matrix.row_by_id("zzz")
