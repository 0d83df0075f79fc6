"""File formats and the command-line interface."""

from .cli import format_nmse, main
from .formats import (load_fixture, load_model, load_signal, model_from_dict, model_to_dict,
                      parse_model, parse_signal, save_model, save_signal)

__all__ = [
    "format_nmse",
    "load_fixture",
    "load_model",
    "load_signal",
    "main",
    "model_from_dict",
    "model_to_dict",
    "parse_model",
    "parse_signal",
    "save_model",
    "save_signal",
]
