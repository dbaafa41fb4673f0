"""
Image retrieval recall@k
========================

Each query embedding should find its true gallery row among the top k
cosine neighbours. Noisier queries need a larger k.
"""

import numpy as np

from cfaudit import EmbeddingMatrix, recall_at_k

rng = np.random.default_rng(12)

gallery_rows = rng.normal(size=(100, 24)).astype(np.float32)
gallery = EmbeddingMatrix(ids=[f"g{i}" for i in range(100)], rows=gallery_rows)
truth = list(range(100))

for noise in (0.5, 1.2, 2.0):
    queries = EmbeddingMatrix(
        ids=[f"q{i}" for i in range(100)],
        rows=(gallery_rows + noise * rng.normal(size=gallery_rows.shape)).astype(np.float32),
    )
    recalls = [recall_at_k(queries, gallery, truth, k) for k in (1, 5, 10)]
    print(f"noise {noise:.1f}: recall@1 {recalls[0]:.2f}  "
          f"recall@5 {recalls[1]:.2f}  recall@10 {recalls[2]:.2f}")
