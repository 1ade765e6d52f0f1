"""Export pooled encoder embeddings from audio files into REPA datasets."""

from .extraction import (
    ENCODERS,
    Encoder,
    ExtractionError,
    ExtractionSpec,
    ManifestEntry,
    extract,
    load_audio,
    load_manifest,
    standardize_duration,
    write_repa,
)

__all__ = [
    "ENCODERS",
    "Encoder",
    "ExtractionError",
    "ExtractionSpec",
    "ManifestEntry",
    "extract",
    "load_audio",
    "load_manifest",
    "standardize_duration",
    "write_repa",
]
