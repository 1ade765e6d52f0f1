"""Pooled-embedding extraction from pretrained audio/speech encoders.

Reads a manifest of audio clips, standardizes every clip to a fixed
duration, runs it through a pretrained encoder, pools the last hidden
states over time to one vector per clip, and writes the vectors as a REPA
dataset file (the exchange format of the `repaugment` package).

Waveform encoders (wav2vec2 / HuBERT / XLS-R) receive the raw,
un-normalized waveform. Spectrogram encoders delegate preprocessing to
their own bundled feature extractor; for AST the pooled vector is the mean
of the class and distill token embeddings instead of the time-axis mean.
"""

from __future__ import annotations

import csv
import logging
import struct
from dataclasses import dataclass

import numpy as np

log = logging.getLogger("repaug_extract")

SAMPLE_RATE = 16_000
TARGET_SECONDS = 8.0

LABEL_CODES = {"normal": 0, "crackle": 1, "wheeze": 2, "both": 3}
SPLIT_CODES = {"train": 0, "test": 1}

# Registered encoder shorthands: hub id, input kind, hidden size.
ENCODERS = {
    "wav2vec2-base": ("facebook/wav2vec2-base", "waveform", 768),
    "wav2vec2-large": ("facebook/wav2vec2-large", "waveform", 1024),
    "hubert-base": ("facebook/hubert-base-ls960", "waveform", 768),
    "hubert-large": ("facebook/hubert-large-ll60k", "waveform", 1024),
    "xls-r-300m": ("facebook/wav2vec2-xls-r-300m", "waveform", 1024),
    "ast": ("MIT/ast-finetuned-audioset-10-10-0.4593", "spectrogram", 768),
}

WAVEFORM_MODEL_TYPES = {"wav2vec2", "hubert", "wavlm", "unispeech",
                        "unispeech-sat", "wav2vec2-conformer"}


class ExtractionError(Exception):
    pass


@dataclass
class ManifestEntry:
    path: str
    label: int
    split: int


@dataclass
class ExtractionSpec:
    encoder: str                      # registered shorthand or local path
    entries: list
    out_path: str
    duration: float = TARGET_SECONDS  # seconds per standardized clip
    pad: str = "cyclic"               # cyclic | zero, for short clips
    crop: str = "center"              # center | start, for long clips


def load_manifest(path) -> list:
    """Parse `path,label,split` rows."""
    entries = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) != 3:
                raise ExtractionError(
                    f"{path} line {lineno}: expected path,label,split")
            clip, label, split = (cell.strip() for cell in row)
            if label.lower() not in LABEL_CODES:
                raise ExtractionError(
                    f"{path} line {lineno}: unknown label {label!r}")
            if split.lower() not in SPLIT_CODES:
                raise ExtractionError(
                    f"{path} line {lineno}: unknown split {split!r}")
            entries.append(ManifestEntry(clip, LABEL_CODES[label.lower()],
                                         SPLIT_CODES[split.lower()]))
    return entries


def load_audio(path, sample_rate: int = SAMPLE_RATE) -> np.ndarray:
    """Mono float32 waveform at the target sample rate."""
    from scipy.io import wavfile
    from scipy.signal import resample_poly

    try:
        rate, data = wavfile.read(path)
    except (OSError, ValueError) as exc:
        raise ExtractionError(f"cannot read audio {path}: {exc}") from exc
    data = np.asarray(data)
    if data.ndim == 2:
        data = data.mean(axis=1)
    if np.issubdtype(data.dtype, np.integer):
        data = data.astype(np.float32) / np.iinfo(data.dtype).max
    data = data.astype(np.float32)
    if rate != sample_rate:
        data = resample_poly(data, sample_rate, rate).astype(np.float32)
    return data


def standardize_duration(wave: np.ndarray, n_samples: int,
                         pad: str = "cyclic",
                         crop: str = "center") -> np.ndarray:
    """Pad short clips (cyclic repeat) or crop long ones (center) to n_samples."""
    if len(wave) == 0:
        raise ExtractionError("empty waveform")
    if len(wave) == n_samples:
        return wave
    if len(wave) < n_samples:
        if pad == "cyclic":
            reps = int(np.ceil(n_samples / len(wave)))
            return np.tile(wave, reps)[:n_samples]
        if pad == "zero":
            return np.pad(wave, (0, n_samples - len(wave)))
        raise ExtractionError(f"unknown pad policy {pad!r}")
    if crop == "center":
        start = (len(wave) - n_samples) // 2
    elif crop == "start":
        start = 0
    else:
        raise ExtractionError(f"unknown crop policy {crop!r}")
    return wave[start:start + n_samples]


def _resolve_encoder(name: str):
    """(model id or path, input kind). Local checkpoints are inspected."""
    if name in ENCODERS:
        model_id, kind, _ = ENCODERS[name]
        return model_id, kind
    from transformers import AutoConfig
    try:
        config = AutoConfig.from_pretrained(name)
    except (OSError, ValueError) as exc:
        raise ExtractionError(f"unknown encoder {name!r}: {exc}") from exc
    if config.model_type in WAVEFORM_MODEL_TYPES:
        return name, "waveform"
    if config.model_type == "audio-spectrogram-transformer":
        return name, "spectrogram"
    raise ExtractionError(
        f"unsupported encoder type {config.model_type!r} for {name!r}")


class Encoder:
    """Wraps a pretrained model; produces one pooled vector per clip."""

    def __init__(self, name: str):
        import torch
        from transformers import AutoModel

        self.model_id, self.kind = _resolve_encoder(name)
        log.info("loading %s (%s input)", self.model_id, self.kind)
        self.model = AutoModel.from_pretrained(self.model_id).eval()
        self.hidden_size = self.model.config.hidden_size
        self._torch = torch
        if self.kind == "spectrogram":
            from transformers import AutoFeatureExtractor
            self.preprocessor = AutoFeatureExtractor.from_pretrained(
                self.model_id)

    def frames(self, wave: np.ndarray) -> np.ndarray:
        """Last hidden states, (frames_or_tokens, hidden_size)."""
        torch = self._torch
        with torch.no_grad():
            if self.kind == "waveform":
                # raw waveform, deliberately un-normalized
                inputs = torch.from_numpy(wave).float().unsqueeze(0)
                hidden = self.model(inputs).last_hidden_state
            else:
                batch = self.preprocessor(wave, sampling_rate=SAMPLE_RATE,
                                          return_tensors="pt")
                hidden = self.model(**batch).last_hidden_state
        return hidden.squeeze(0).numpy()

    def pool(self, frames: np.ndarray) -> np.ndarray:
        if self.kind == "spectrogram":
            # AST-style: mean of the class and distill tokens
            return frames[:2].mean(axis=0)
        return frames.mean(axis=0)

    def embed(self, wave: np.ndarray) -> np.ndarray:
        return self.pool(self.frames(wave))


def write_repa(path, dim: int, records) -> None:
    """records: iterable of (label, split, float32 vector of length dim)."""
    records = list(records)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIII", b"REPA", 1, dim, len(records)))
        for label, split, values in records:
            values = np.ascontiguousarray(values, dtype=np.float32)
            if values.shape != (dim,):
                raise ExtractionError(
                    f"embedding shape {values.shape} != ({dim},)")
            if not np.isfinite(values).all():
                raise ExtractionError("non-finite embedding value")
            fh.write(struct.pack("<BB", label, split))
            fh.write(values.tobytes())


def extract(spec: ExtractionSpec) -> int:
    """Run the full manifest through the encoder; returns record count."""
    encoder = Encoder(spec.encoder)
    n_samples = int(round(spec.duration * SAMPLE_RATE))
    records = []
    for entry in spec.entries:
        wave = load_audio(entry.path)
        wave = standardize_duration(wave, n_samples, pad=spec.pad,
                                    crop=spec.crop)
        vector = encoder.embed(wave)
        records.append((entry.label, entry.split, vector))
        log.info("embedded %s -> dim %d", entry.path, vector.shape[0])
    write_repa(spec.out_path, encoder.hidden_size, records)
    return len(records)
