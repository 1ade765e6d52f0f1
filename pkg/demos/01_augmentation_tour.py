"""Tour of the augmentation operations on a single embedding vector.

Run with:  python3 demos/01_augmentation_tour.py
"""

import numpy as np

from repaugment import AugmentConfig, NoiseSource, apply_gen, apply_mask
from repaugment.augment import repaugment, sample_mask

rng = NoiseSource(seed=42)
z = np.round(np.random.default_rng(0).normal(size=12), 2)
print("original z:          ", z)
print("mean(z):             ", round(z.mean(), 4))

# --- band masking -----------------------------------------------------------
# Two random bands are replaced by the scalar mean of the original vector.
config = AugmentConfig(max_band=6)
mask = sample_mask(z.size, config, rng)
print("\nsampled bands:       ", mask.bands)
masked = apply_mask(z, mask)
print("after mask:          ", np.round(masked, 2))
print("changed positions:   ", np.flatnonzero(masked != z))

# --- additive Gaussian noise ------------------------------------------------
noisy = apply_gen(z, config, rng)
print("\nafter noise:         ", np.round(noisy, 2))
print("gaussian draws so far:", rng.gaussian_draws)

# --- the combined class-conditional policy ----------------------------------
# Normal-class examples are only masked; abnormal classes are masked AND
# perturbed. Watch the draw counter: the normal class consumes none.
for label, name in enumerate(("normal", "crackle", "wheeze", "both")):
    source = NoiseSource(seed=7)
    out = repaugment(z, label, config, source)
    print(f"\nclass {name:<8} -> gaussian draws: {source.gaussian_draws:>2}, "
          f"changed coords: {int((out != z).sum())}")
