"""scikit-learn compatible paraphrase classifier."""

from __future__ import annotations

import logging

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .data import MAX_LENGTH, PairExample, split, SplitSpec
from .encoder import EmbeddingTable, LstmParams
from .model import PairScore, Threshold, calibrate_threshold, score_pair
from .training import TrainConfig, train
from .validation import check_pair_input, check_pair_labels

__all__ = ["HungarianParaphraseClassifier"]

logger = logging.getLogger(__name__)


class HungarianParaphraseClassifier(ClassifierMixin, BaseEstimator):
    """BiLSTM encoder + Hungarian alignment layer + cosine score.

    ``X`` is a sequence of ``(source, target)`` sentence pairs, each given
    as a raw string or as a token sequence; ``y`` holds 1 for paraphrase and
    0 otherwise.  ``decision_function`` returns the cosine score in
    [-1, 1] and ``predict`` thresholds it at the cut calibrated on the
    development data.

    Parameters
    ----------
    embeddings : EmbeddingTable
        Frozen word vectors; tokens missing from the table embed to zero.
    hidden_size : int
        LSTM units per direction.
    batch_size, max_epochs, patience : int
        Mini-batch size, epoch cap and early-stopping patience (epochs
        without dev-accuracy improvement).
    rho, eps_opt : float
        AdaDelta decay and stabilizer.
    eps : float
        Norm guard of every cosine.
    validation_fraction : float
        Share of the training data held out (class-balanced) for threshold
        calibration and early stopping when ``fit`` gets no ``eval_set``.
    detach_similarity : bool
        Stop gradients through the aligned similarities (ablation).
    """

    def __init__(
        self,
        embeddings: EmbeddingTable | None = None,
        hidden_size: int = 32,
        batch_size: int = 32,
        max_epochs: int = 50,
        patience: int = 5,
        rho: float = 0.6,
        eps_opt: float = 1e-6,
        eps: float = 1e-8,
        lowercase: bool = True,
        max_length: int = MAX_LENGTH,
        validation_fraction: float = 0.1,
        detach_similarity: bool = False,
        random_state: int = 0,
    ):
        self.embeddings = embeddings
        self.hidden_size = hidden_size
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.patience = patience
        self.rho = rho
        self.eps_opt = eps_opt
        self.eps = eps
        self.lowercase = lowercase
        self.max_length = max_length
        self.validation_fraction = validation_fraction
        self.detach_similarity = detach_similarity
        self.random_state = random_state

    def _config(self) -> TrainConfig:
        return TrainConfig(
            hidden_size=self.hidden_size,
            batch_size=self.batch_size,
            max_epochs=self.max_epochs,
            patience=self.patience,
            rho=self.rho,
            eps_opt=self.eps_opt,
            eps=self.eps,
            seed=self.random_state,
            detach_similarity=self.detach_similarity,
        )

    def _examples(self, X, y=None, prefix="x") -> list[PairExample]:
        pairs = check_pair_input(X, self.lowercase, self.max_length)
        labels = check_pair_labels(y, len(pairs)) if y is not None else [0] * len(pairs)
        return [PairExample(f"{prefix}{i}", p, q, int(l)) for i, ((p, q), l) in enumerate(zip(pairs, labels))]

    def fit(self, X, y, eval_set=None, on_epoch=None):
        """Train on ``(X, y)``; ``eval_set=(X_dev, y_dev)`` drives early stopping."""
        if self.embeddings is None:
            raise ValueError("an EmbeddingTable is required")
        examples = self._examples(X, y, "train")
        if eval_set is None:
            n_pos = sum(ex.label for ex in examples)
            n_neg = len(examples) - n_pos
            take_pos = max(1, round(self.validation_fraction * n_pos))
            take_neg = max(1, round(self.validation_fraction * n_neg))
            if n_pos <= take_pos or n_neg <= take_neg:
                raise ValueError("too few examples per class to hold out a validation split")
            spec = SplitSpec(take_pos, take_neg, 0, 0, seed=self.random_state)
            train_set, dev_set, _ = split(examples, spec)
        else:
            train_set = examples
            dev_set = self._examples(eval_set[0], eval_set[1], "dev")
        result = train(train_set, dev_set, self.embeddings, self._config(), on_epoch=on_epoch)
        self.params_ = result.params
        self.threshold_ = result.threshold
        self.history_ = result.history
        self.best_epoch_ = result.best_epoch
        self.classes_ = np.array([0, 1])
        return self

    def score_pairs(self, X) -> list[PairScore]:
        """Full scoring records (alignment, weights, halves) for each pair."""
        check_is_fitted(self, "params_")
        pairs = check_pair_input(X, self.lowercase, self.max_length)
        return [score_pair(p, q, self.params_, self.embeddings, self.eps) for p, q in pairs]

    def decision_function(self, X) -> np.ndarray:
        return np.array([s.value for s in self.score_pairs(X)])

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        return (scores >= self.threshold_.cut).astype(np.int64)

    def calibrate(self, X, y) -> "HungarianParaphraseClassifier":
        """Re-choose the decision cut on labeled development pairs."""
        labels = check_pair_labels(y, len(X))
        self.threshold_ = calibrate_threshold(zip(self.decision_function(X), labels))
        return self

    def _more_tags(self):
        return {"X_types": ["string"], "requires_y": True}

    # checkpoint helpers live in .checkpoint; thin wrappers here
    def save(self, path) -> None:
        from .checkpoint import save_checkpoint

        save_checkpoint(self, path)

    @classmethod
    def load(cls, path) -> "HungarianParaphraseClassifier":
        from .checkpoint import load_checkpoint

        return load_checkpoint(path)

    @classmethod
    def from_parts(cls, embeddings: EmbeddingTable, params: LstmParams, threshold: Threshold, **kwargs):
        """Wrap already-trained parameters as a fitted estimator."""
        est = cls(embeddings=embeddings, hidden_size=params.hidden_size, **kwargs)
        est.params_ = params
        est.threshold_ = threshold
        est.history_ = []
        est.best_epoch_ = 0
        est.classes_ = np.array([0, 1])
        return est
