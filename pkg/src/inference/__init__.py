"""Inference loop and transcript files."""

from inference.engine import (
    InferenceConfig,
    PolicyFailure,
    RetrievalFailure,
    run,
    run_batch,
)
from inference.transcripts import load_transcripts, save_transcripts

__all__ = [
    "InferenceConfig",
    "PolicyFailure",
    "RetrievalFailure",
    "load_transcripts",
    "run",
    "run_batch",
    "save_transcripts",
]
