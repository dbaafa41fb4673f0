"""
Realism metrics: FID, KID and CMMD on known distributions
=========================================================

All three metrics compare embedding clouds. On Gaussians with known
parameters the Frechet distance has a closed form, which makes a good
sanity check before pointing the code at real embeddings.
"""

import numpy as np

from cfaudit import EmbeddingMatrix, cmmd, fit_gaussian, frechet_distance, kid_unbiased

rng = np.random.default_rng(0)


def cloud(tag, n, d, mean=0.0, scale=1.0):
    rows = (rng.normal(size=(n, d)) * scale + mean).astype(np.float32)
    return EmbeddingMatrix(ids=[f"{tag}{i}" for i in range(n)], rows=rows)


# Two samples of the same 16-dim standard normal: everything should be
# near zero.
a = cloud("a", 4000, 16)
b = cloud("b", 4000, 16)
print("same distribution:")
print("  fid :", frechet_distance(fit_gaussian(a), fit_gaussian(b)))
mean, std = kid_unbiased(a, b, subset_size=500, n_subsets=20, seed=1)
print(f"  kid : {mean:.5f} +/- {std:.5f}")
print("  cmmd:", cmmd(a, b))
print()

# Shift every coordinate by 0.25: the closed form says
# fid = ||mean gap||^2 = 16 * 0.25^2 = 1.
shifted = cloud("s", 4000, 16, mean=0.25)
print("shifted by 0.25 per coordinate (closed form fid = 1):")
print("  fid :", frechet_distance(fit_gaussian(a), fit_gaussian(shifted)))
mean, std = kid_unbiased(a, shifted, subset_size=500, n_subsets=20, seed=1)
print(f"  kid : {mean:.5f} +/- {std:.5f}")
print("  cmmd:", cmmd(a, shifted))
print()

# Same mean, doubled scale: fid = d * (1 - 2)^2 = 16.
wide = cloud("w", 4000, 16, scale=2.0)
print("doubled covariance (closed form fid = 16):")
print("  fid :", frechet_distance(fit_gaussian(a), fit_gaussian(wide)))
print()

# A set against itself is exactly zero, not merely small.
print("identical sets: fid", frechet_distance(fit_gaussian(a), fit_gaussian(a)),
      "cmmd", cmmd(a, a))
