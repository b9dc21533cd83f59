"""Paraphrase identification with an exclusive (Hungarian) alignment layer."""

from .assignment import assignment_total, brute_force_assignment, solve_max_assignment
from .data import PairExample, SplitSpec, SyntheticConfig, generate_synthetic, load_pairs, split, tokenize, write_pairs
from .encoder import EmbeddingTable, load_embeddings
from .estimator import HungarianParaphraseClassifier
from .model import Threshold, calibrate_threshold, predict, score_pair
from .training import TrainConfig, train

__version__ = "0.1.0"

__all__ = [
    "EmbeddingTable",
    "HungarianParaphraseClassifier",
    "PairExample",
    "SplitSpec",
    "SyntheticConfig",
    "Threshold",
    "TrainConfig",
    "assignment_total",
    "brute_force_assignment",
    "calibrate_threshold",
    "generate_synthetic",
    "load_embeddings",
    "load_pairs",
    "predict",
    "score_pair",
    "solve_max_assignment",
    "split",
    "tokenize",
    "train",
    "write_pairs",
]
