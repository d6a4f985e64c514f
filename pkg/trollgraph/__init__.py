"""Top-level package for trollgraph."""

from . import (
    crf,
    errors,
    evaluation,
    events,
    experiment,
    features,
    filters,
    lexicons,
    models,
    optim,
    options,
    parsers,
    selfcheck,
    serialization,
    snippets,
    synthetic,
    text,
)

__all__ = [
    "snippets",
    "parsers",
    "filters",
    "lexicons",
    "features",
    "optim",
    "crf",
    "models",
    "evaluation",
    "experiment",
    "serialization",
    "events",
    "errors",
    "options",
    "selfcheck",
    "synthetic",
    "text",
]

__author__ = """William Fernandes Dias"""
__email__ = "william.winchester1967@gmail.com"
__version__ = "0.1.0"
