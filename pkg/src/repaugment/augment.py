"""Representation-level augmentation: band masking and class-conditional noise.

Two operations on a pooled embedding vector z:

  * mask: replace k random contiguous bands of coordinates with the scalar
    mean of the original vector;
  * gen:  add i.i.d. Gaussian noise to every coordinate.

The combined policy masks every class but adds noise only to the abnormal
(minority) classes; normal-class examples never consume Gaussian draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORMAL = 0

MODES = ("none", "mask_only", "gen_only", "full")


@dataclass(frozen=True)
class MaskSpec:
    """k bands [start, start+length) over a vector of size dim.

    Bands may overlap; length 0 marks an empty band. The mask value is 1
    inside the union of the bands and 0 elsewhere.
    """

    dim: int
    bands: tuple

    def __post_init__(self):
        for start, length in self.bands:
            if length < 0 or start < 0 or start + length > self.dim:
                raise ValueError(
                    f"band [{start}, {start + length}) out of range for dim {self.dim}")

    def as_bool(self) -> np.ndarray:
        mask = np.zeros(self.dim, dtype=bool)
        for start, length in self.bands:
            mask[start:start + length] = True
        return mask


@dataclass
class AugmentConfig:
    """Augmentation policy knobs; the defaults are the recommended recipe.

    num_bands / max_band bound the masking (band length is drawn from
    [0, max_band)); noise_mean / noise_std parameterize the additive
    Gaussian. mask_with_zero switches the masked-value fill from the
    vector mean to zero (experimental; mean fill performs better).
    """

    num_bands: int = 2
    max_band: int = 288
    noise_mean: float = 0.0
    noise_std: float = 1.0
    mode: str = "full"
    mask_with_zero: bool = False

    def __post_init__(self):
        if self.num_bands < 1:
            raise ValueError("num_bands must be >= 1")
        if self.max_band < 1:
            raise ValueError("max_band must be >= 1")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


class NoiseSource:
    """Seeded random stream with a Gaussian draw counter.

    The counter makes the class-conditional policy testable: code paths
    that must not add noise can be asserted to consume zero Gaussian
    draws. Single-owner; use one independently-seeded source per worker.
    """

    def __init__(self, seed):
        self._rng = np.random.default_rng(seed)
        self.gaussian_draws = 0

    def normal(self, n: int) -> np.ndarray:
        self.gaussian_draws += n
        return self._rng.standard_normal(n)

    def integers(self, low: int, high: int) -> int:
        """Uniform integer in [low, high)."""
        return int(self._rng.integers(low, high))


def sample_mask(d: int, config: AugmentConfig, rng) -> MaskSpec:
    """Draw k bands: length j ~ U[0, min(max_band, d)), start i ~ U[0, d-j)."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    j_bound = min(config.max_band, d)
    bands = []
    for _ in range(config.num_bands):
        j = rng.integers(0, j_bound)
        i = rng.integers(0, d - j)
        bands.append((i, j))
    return MaskSpec(d, tuple(bands))


def apply_mask(z: np.ndarray, mask: MaskSpec,
               fill_with_zero: bool = False) -> np.ndarray:
    """Replace masked coordinates with the mean of the original vector.

    Overlapping bands are harmless: every masked position gets the same
    fill value, computed once from the unmodified input.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.size != mask.dim:
        raise ValueError(f"vector size {z.shape} != mask dim {mask.dim}")
    fill = 0.0 if fill_with_zero else z.mean()
    out = z.copy()
    out[mask.as_bool()] = fill
    return out


def apply_gen(z: np.ndarray, config: AugmentConfig, rng) -> np.ndarray:
    """Add i.i.d. Gaussian noise; consumes exactly len(z) draws."""
    z = np.asarray(z, dtype=np.float64)
    noise = config.noise_mean + config.noise_std * rng.normal(z.size)
    return z + noise


def repaugment(z: np.ndarray, label: int, config: AugmentConfig,
               rng) -> np.ndarray:
    """Apply the class-conditional augmentation policy.

    full:      mask every class; add noise only for abnormal classes
               (mask first, then noise, so masked values get perturbed too).
    mask_only: mask every class.
    gen_only:  noise for abnormal classes, normal untouched.
    none:      identity.
    """
    z = np.asarray(z, dtype=np.float64)
    mode = config.mode
    if mode == "none":
        return z.copy()
    if mode == "gen_only":
        if label == NORMAL:
            return z.copy()
        return apply_gen(z, config, rng)
    mask = sample_mask(z.size, config, rng)
    out = apply_mask(z, mask, fill_with_zero=config.mask_with_zero)
    if mode == "full" and label != NORMAL:
        out = apply_gen(out, config, rng)
    return out
