"""Input checks shared by the estimator and the CLI."""

from __future__ import annotations

import numpy as np

from .data import MAX_LENGTH, prepare_tokens


def check_pair_input(X, lowercase: bool = True, max_length: int = MAX_LENGTH) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    """Normalize ``X`` into a list of non-empty ``(source_tokens, target_tokens)``."""
    if isinstance(X, (str, bytes)):
        raise TypeError("X must be a sequence of sentence pairs, not a single string")
    pairs = []
    for i, item in enumerate(X):
        try:
            p, q = item
        except (TypeError, ValueError):
            raise ValueError(f"X[{i}] is not a (source, target) pair") from None
        p = prepare_tokens(p, lowercase, max_length)
        q = prepare_tokens(q, lowercase, max_length)
        if not p or not q:
            raise ValueError(f"X[{i}] contains an empty sentence")
        pairs.append((p, q))
    if not pairs:
        raise ValueError("X contains no sentence pairs")
    return pairs


def check_pair_labels(y, n: int) -> list[int]:
    labels = np.asarray(y).ravel()
    if labels.shape[0] != n:
        raise ValueError(f"got {labels.shape[0]} labels for {n} pairs")
    if not np.all(np.isin(labels, (0, 1))):
        raise ValueError("labels must be 0 (non-paraphrase) or 1 (paraphrase)")
    return [int(v) for v in labels]
