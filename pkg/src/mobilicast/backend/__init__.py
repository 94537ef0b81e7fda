"""Text-generation backends behind one ``complete``/``generate`` contract."""
from .base import TOP_K_50, Backend, Completion, DecodingConfig, GenerationRecord
from .batch import read_records, records_to_jsonl, run_batch, write_records
from .http import API_KEY_ENV, HttpBackend
from .mock import MockBackend, MockParams, default_mock_params, mock_generate, simulate_day, transition_from_matrix

__all__ = [
    "API_KEY_ENV",
    "Backend",
    "Completion",
    "DecodingConfig",
    "GenerationRecord",
    "HttpBackend",
    "MockBackend",
    "MockParams",
    "TOP_K_50",
    "default_mock_params",
    "mock_generate",
    "read_records",
    "records_to_jsonl",
    "run_batch",
    "simulate_day",
    "transition_from_matrix",
    "write_records",
]
