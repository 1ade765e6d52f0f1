"""Classifier head: LayerNorm -> Linear(d, 4), softmax cross-entropy, Adam.

All arithmetic is float64. Batch reductions use exact (correctly rounded)
summation so losses and gradients are invariant to batch order and to
duplicating the batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NUM_CLASSES = 4
LN_EPS = 1e-5


@dataclass
class ClassifierParams:
    """Trainable parameters: LayerNorm affine + linear layer."""

    ln_scale: np.ndarray   # (d,)
    ln_shift: np.ndarray   # (d,)
    weight: np.ndarray     # (4, d)
    bias: np.ndarray       # (4,)

    @classmethod
    def init(cls, dim: int) -> "ClassifierParams":
        # Zero-init linear layer: training starts from uniform logits and
        # the first updates point each class row toward its class mean.
        return cls(ln_scale=np.ones(dim),
                   ln_shift=np.zeros(dim),
                   weight=np.zeros((NUM_CLASSES, dim)),
                   bias=np.zeros(NUM_CLASSES))

    @property
    def dim(self) -> int:
        return self.ln_scale.shape[0]

    def copy(self) -> "ClassifierParams":
        return ClassifierParams(self.ln_scale.copy(), self.ln_shift.copy(),
                                self.weight.copy(), self.bias.copy())

    def to_dict(self) -> dict:
        return {"ln_scale": self.ln_scale.tolist(),
                "ln_shift": self.ln_shift.tolist(),
                "weight": self.weight.tolist(),
                "bias": self.bias.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "ClassifierParams":
        return cls(np.asarray(data["ln_scale"], dtype=np.float64),
                   np.asarray(data["ln_shift"], dtype=np.float64),
                   np.asarray(data["weight"], dtype=np.float64),
                   np.asarray(data["bias"], dtype=np.float64))


@dataclass
class Gradients:
    ln_scale: np.ndarray
    ln_shift: np.ndarray
    weight: np.ndarray
    bias: np.ndarray

    def copy(self) -> "Gradients":
        return Gradients(self.ln_scale.copy(), self.ln_shift.copy(),
                         self.weight.copy(), self.bias.copy())


FIELDS = ("ln_scale", "ln_shift", "weight", "bias")


def layer_norm(z: np.ndarray, scale: np.ndarray, shift: np.ndarray):
    """Per-example normalization (biased variance) with learnable affine.

    Returns (normalized_with_affine, pre_affine) for batched input (n, d).
    """
    mean = z.mean(axis=-1, keepdims=True)
    var = z.var(axis=-1, keepdims=True)  # biased: divide by d
    h = (z - mean) / np.sqrt(var + LN_EPS)
    return scale * h + shift, h


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def forward(params: ClassifierParams, z: np.ndarray) -> np.ndarray:
    """Logits for one vector (d,) or a batch (n, d)."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape[-1] != params.dim:
        raise ValueError(f"input dim {z.shape[-1]} != params dim {params.dim}")
    y, _ = layer_norm(z, params.ln_scale, params.ln_shift)
    return y @ params.weight.T + params.bias


def _exact_mean(stack: np.ndarray) -> np.ndarray:
    """Correctly rounded mean over axis 0 (order-independent)."""
    n = stack.shape[0]
    flat = stack.reshape(n, -1)
    out = np.empty(flat.shape[1])
    for col in range(flat.shape[1]):
        out[col] = math.fsum(flat[:, col]) / n
    return out.reshape(stack.shape[1:])


def _forward_loss(params: ClassifierParams, features: np.ndarray,
                  labels: np.ndarray):
    """Validated forward pass; returns (loss, y, h, logits)."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise ValueError("batch must be a non-empty (n, d) array")
    if features.shape[1] != params.dim:
        raise ValueError(
            f"input dim {features.shape[1]} != params dim {params.dim}")
    n = features.shape[0]

    y, h = layer_norm(features, params.ln_scale, params.ln_shift)
    logits = y @ params.weight.T + params.bias
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    losses = log_z - shifted[np.arange(n), labels]
    return math.fsum(losses) / n, y, h, logits


def batch_loss(params: ClassifierParams, features, labels) -> float:
    """Mean softmax cross-entropy only, without gradients."""
    loss, _, _, _ = _forward_loss(params, features, labels)
    return loss


def loss_and_grad(params: ClassifierParams, features: np.ndarray,
                  labels: np.ndarray):
    """Mean softmax cross-entropy over the batch and its exact gradients.

    features: (n, d) float; labels: (n,) int codes 0..3.
    """
    loss, y, h, logits = _forward_loss(params, features, labels)
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n = features.shape[0]

    probs = softmax(logits)
    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0   # per-example, pre-mean

    dweight = dlogits[:, :, None] * y[:, None, :]      # (n, 4, d)
    dy = dlogits @ params.weight                        # (n, d)
    grads = Gradients(
        ln_scale=_exact_mean(dy * h),
        ln_shift=_exact_mean(dy),
        weight=_exact_mean(dweight),
        bias=_exact_mean(dlogits),
    )
    return loss, grads


@dataclass
class AdamState:
    """Adam moments plus hyperparameters; t counts completed steps."""

    lr: float
    beta1: float
    beta2: float
    eps: float
    t: int
    m: dict
    v: dict

    @classmethod
    def init(cls, params: ClassifierParams, lr: float,
             beta1: float = 0.9, beta2: float = 0.999,
             eps: float = 1e-8) -> "AdamState":
        zeros = {name: np.zeros_like(getattr(params, name)) for name in FIELDS}
        return cls(lr=lr, beta1=beta1, beta2=beta2, eps=eps, t=0,
                   m=zeros, v={k: a.copy() for k, a in zeros.items()})


def adam_step(params: ClassifierParams, grads: Gradients,
              state: AdamState):
    """One bias-corrected Adam update; returns (new_params, new_state)."""
    t = state.t + 1
    new_params = params.copy()
    new_m, new_v = {}, {}
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    for name in FIELDS:
        g = getattr(grads, name)
        m = state.beta1 * state.m[name] + (1 - state.beta1) * g
        v = state.beta2 * state.v[name] + (1 - state.beta2) * g * g
        step = state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
        setattr(new_params, name, getattr(params, name) - step)
        new_m[name] = m
        new_v[name] = v
    return new_params, AdamState(lr=state.lr, beta1=state.beta1,
                                 beta2=state.beta2, eps=state.eps,
                                 t=t, m=new_m, v=new_v)


@dataclass
class GradCheckReport:
    max_rel_error: float
    worst_param: str
    worst_index: int
    checked: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance


def _flatten(obj) -> np.ndarray:
    return np.concatenate([np.asarray(getattr(obj, name), dtype=np.float64).ravel()
                           for name in FIELDS])


def _coord_name(params: ClassifierParams, flat_index: int):
    for name in FIELDS:
        size = getattr(params, name).size
        if flat_index < size:
            return name, flat_index
        flat_index -= size
    raise IndexError(flat_index)


def grad_check(params: ClassifierParams, features, labels,
               tolerance: float = 1e-4, n_coords: int = 200,
               seed: int = 0, step: float = 1e-5,
               analytic: Gradients | None = None) -> GradCheckReport:
    """Compare analytic gradients against central finite differences.

    Checks a random subsample of at least n_coords coordinates (all of
    them if the model is smaller). The relative error uses an absolute
    floor of 1e-3 in the denominator so near-zero coordinates compare on
    an absolute scale. `analytic` overrides the computed gradients (for
    negative-control tests).
    """
    _, grads = loss_and_grad(params, features, labels)
    if analytic is not None:
        grads = analytic
    flat_params = _flatten(params)
    flat_grads = _flatten(grads)
    total = flat_params.size

    rng = np.random.default_rng(seed)
    if total <= n_coords:
        coords = np.arange(total)
    else:
        coords = rng.choice(total, size=n_coords, replace=False)

    def loss_at(flat: np.ndarray) -> float:
        probe = params.copy()
        offset = 0
        for name in FIELDS:
            arr = getattr(probe, name)
            setattr(probe, name,
                    flat[offset:offset + arr.size].reshape(arr.shape))
            offset += arr.size
        return batch_loss(probe, features, labels)

    worst = 0.0
    worst_idx = 0
    for idx in coords:
        bumped = flat_params.copy()
        bumped[idx] += step
        up = loss_at(bumped)
        bumped[idx] = flat_params[idx] - step
        down = loss_at(bumped)
        numeric = (up - down) / (2 * step)
        a = flat_grads[idx]
        rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-3)
        if rel > worst:
            worst, worst_idx = rel, int(idx)

    name, local = _coord_name(params, worst_idx)
    return GradCheckReport(max_rel_error=worst, worst_param=name,
                           worst_index=local, checked=len(coords),
                           tolerance=tolerance)
