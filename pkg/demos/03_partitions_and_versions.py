"""
Dataset partitions and gender-balanced versions
===============================================

A manifest mixes real photographs with synthetic man/woman counterfactuals
of each one. Partition codes c1..c10 slice that pool into the training
mixtures under study, and dataset_version swaps a seeded fraction of real
images for their counterfactual pair.
"""

from cfaudit import (
    Gender,
    ManifestRecord,
    PARTITIONS,
    Provenance,
    SourceGender,
    build_partition,
    counterpart_ids,
    dataset_version,
)


def record(id_, gender, provenance="real", source="not_applicable"):
    return ManifestRecord(
        id=id_, image_path=f"{id_}.jpg", caption=f"a {gender}", has_person=True,
        gender=Gender(gender), provenance=Provenance(provenance),
        source_gender=SourceGender(source),
    )


# Ten real photos; each gets a synthetic man and a synthetic woman version.
records = []
for i in range(10):
    source_id = f"img{i}"
    source_gender = "woman" if i % 2 else "man"
    records.append(record(source_id, source_gender))
    man_id, woman_id = counterpart_ids(source_id)
    records.append(record(man_id, "man", "synthetic", source_gender))
    records.append(record(woman_id, "woman", "synthetic", source_gender))

print(f"pool: {len(records)} records")
for code in PARTITIONS:
    part = build_partition(records, code)
    real = sum(1 for r in part if r.provenance is Provenance.REAL)
    print(f"  {code:>3}: {len(part):2d} records ({real} real, {len(part) - real} synthetic)")
print()

# Replacing half of the real images, deterministically per seed. Each
# replaced original contributes BOTH its counterfactuals, so the result
# is balanced where it was re-generated.
for fraction in (0.0, 0.5, 1.0):
    version = dataset_version(records, fraction, seed=7)
    synthetic = sum(1 for r in version if r.provenance is Provenance.SYNTHETIC)
    print(f"fraction {fraction:.1f}: {len(version)} records, {synthetic} synthetic")

# Same seed, same version; different seed, usually a different pick.
again = dataset_version(records, 0.5, seed=7)
other = dataset_version(records, 0.5, seed=8)
print("seed 7 reproducible:", [r.id for r in again] == [r.id for r in dataset_version(records, 0.5, seed=7)])
print("seed 8 differs:     ", [r.id for r in other] != [r.id for r in again])
