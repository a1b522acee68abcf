"""Lightweight cybersickness severity detection from eye/head tracking.

The pipeline turns raw 20 Hz tracking streams and 0-10 discomfort reports
into four-class severity predictions: report-anchored 11 s segments,
3 s mean-feature windows, user-specificity-aware training-set construction,
and from-scratch tree ensembles with a full evaluation suite.
"""

from . import (
    calibrate,
    dataio,
    evaluation,
    experiments,
    features,
    learners,
    partition,
    preprocess,
    reporting,
)
from .config import PipelineConfig
from .dataio import Dataset, SynthSpec, generate_synthetic, load_dataset
from .experiments import run_experiment
from .preprocess import CsClass

__version__ = "0.1.0"

__all__ = [
    "CsClass",
    "Dataset",
    "PipelineConfig",
    "SynthSpec",
    "calibrate",
    "dataio",
    "evaluation",
    "experiments",
    "features",
    "generate_synthetic",
    "learners",
    "load_dataset",
    "partition",
    "preprocess",
    "reporting",
    "run_experiment",
]
