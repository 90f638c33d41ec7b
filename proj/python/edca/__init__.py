"""Evolutionary data-centric AutoML for tabular classification.

Thin wrappers over the native core: structured values come back as dicts.
"""

import json
import os

from ._core import (
    ConfigError,
    DataError,
    Dataset,
    FittedPipeline,
    PipelineFailure,
    SearchError,
    __version__,
    fitness_from_mcc,
    load_csv,
    mcc,
    parse_csv,
)
from . import _core

__all__ = [
    "ConfigError",
    "DataError",
    "Dataset",
    "FittedPipeline",
    "PipelineFailure",
    "SearchError",
    "analyze",
    "fitness_from_mcc",
    "generate_synthetic",
    "load_csv",
    "load_pipeline",
    "mcc",
    "parse_csv",
    "run_experiment",
]


def generate_synthetic(spec=None, seed=0):
    """Synthetic mixed-type dataset; `spec` keys follow the config's "synthetic" block."""
    return _core._generate_synthetic(json.dumps(spec or {}), seed)


def analyze(dataset):
    """Column profiles and pipeline blueprint of `dataset` as a dict."""
    return json.loads(_core._analyze(dataset))


def run_experiment(config, base_dir=None, output_dir=None):
    """Runs a configured experiment; `config` is a dict or a path to a JSON file.

    Returns the report as a dict. When `output_dir` is given the full set of
    report files is written there too.
    """
    if isinstance(config, (str, os.PathLike)):
        path = os.fspath(config)
        with open(path) as fh:
            text = fh.read()
        base_dir = base_dir or os.path.dirname(os.path.abspath(path))
    else:
        text = json.dumps(config)
    out = None if output_dir is None else os.fspath(output_dir)
    return json.loads(_core._run_experiment(text, base_dir or "", out))


def load_pipeline(path_or_dict):
    """FittedPipeline from a best_pipeline JSON file or its parsed dict."""
    if isinstance(path_or_dict, dict):
        return FittedPipeline._from_json(json.dumps(path_or_dict))
    with open(path_or_dict) as fh:
        return FittedPipeline._from_json(fh.read())
