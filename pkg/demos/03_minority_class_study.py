"""Compare augmentation modes on a class-imbalanced synthetic dataset.

Trains the head with each augmentation policy on heavily imbalanced blobs
(400/80/40/16) and reports the mean recall of the rarest class ("both")
over several seeds. On low-dimensional embeddings the default band bound
would cover most of the vector, so the mask is scaled down with --max-band.

Run with:  python3 demos/03_minority_class_study.py
"""

import dataclasses

import numpy as np

from repaugment import AugmentConfig, TrainConfig, synth_dataset, train_multi_seed

COUNTS = (400, 80, 40, 16)
SEEDS = [0, 1, 2, 3, 4]

dataset = synth_dataset(dim=32, counts=COUNTS, separation=3.0, seed=0)
counts = [int(c) for c in dataset.class_counts()]
print(f"{len(dataset)} examples, class counts {counts}")
print(f"rarest-class test examples: {int(dataset.test().class_counts()[3])}\n")

# A convergent recipe; the low-lr transformer preset never reaches the
# rare class on blobs this small.
base = TrainConfig(lr=1e-3, batch_size=64, epochs=400, seed=0)

print(f"{'mode':10s} {'both recall':>12s} {'score':>8s}")
for mode in ("none", "mask_only", "gen_only", "full"):
    aug = AugmentConfig(mode=mode, max_band=2, noise_std=1.0)
    config = dataclasses.replace(base, augment=aug)
    runs, agg = train_multi_seed(dataset, config, SEEDS, parallel=len(SEEDS))
    recall = np.mean([r.report.per_class_acc[3] for r in runs])
    print(f"{mode:10s} {recall:12.3f} {agg['score']['mean']:8.3f}")
