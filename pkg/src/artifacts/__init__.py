"""Deterministic artifact serialization helpers."""

from artifacts.utils import JsonLineError, dumps_line, iter_jsonl

__all__ = ["JsonLineError", "dumps_line", "iter_jsonl"]
