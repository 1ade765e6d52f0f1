"""Representation-level augmentation and evaluation for pooled embeddings."""

from .augment import (AugmentConfig, MaskSpec, NoiseSource, apply_gen,
                      apply_mask, repaugment, sample_mask)
from .metrics import (EvalReport, MetricError, aggregate_reports, evaluate,
                      score_of)
from .nn import (AdamState, ClassifierParams, Gradients, adam_step, forward,
                 grad_check, loss_and_grad)
from .store import (DataError, Dataset, FormatError, ValidationError,
                    icbhi_counts, import_csv, load_store, synth_dataset,
                    write_store)
from .training import (DivergenceError, RunResult, TrainConfig, train,
                    train_multi_seed)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
