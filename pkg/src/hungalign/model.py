"""Pair scoring, training loss and decision threshold."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .encoder import EmbeddingTable, LstmParams, bilstm_encode, embed
from .graph import Node, constant, op_cosine, op_mean_rows, op_mul_elementwise, op_slice, op_sub
from .hungarian_layer import Alignment, WeightedConcat, align, weight_and_concat

__all__ = ["PairScore", "Threshold", "calibrate_threshold", "loss", "predict", "score_hidden", "score_pair"]

PARAPHRASE = 1
NON_PARAPHRASE = 0


@dataclass
class PairScore:
    y: Node
    r_p: Node
    r_q: Node
    alignment: Alignment
    weighted: WeightedConcat

    @property
    def value(self) -> float:
        return float(self.y.value)


@dataclass(frozen=True)
class Threshold:
    cut: float
    dev_accuracy: float = float("nan")


def score_pair(
    p_tokens: Sequence[str],
    q_tokens: Sequence[str],
    params: LstmParams,
    table: EmbeddingTable,
    eps: float = 1e-8,
    detach_similarity: bool = False,
) -> PairScore:
    """Encode both sentences, align them exclusively and score with cosine.

    When both averaged halves vanish (every aligned pair matched exactly)
    the score is defined as +1.
    """
    if len(p_tokens) == 0 or len(q_tokens) == 0:
        raise ValueError("both sentences must contain at least one token")
    hp = bilstm_encode(embed(p_tokens, table), params)
    hq = bilstm_encode(embed(q_tokens, table), params)
    return score_hidden(hp, hq, eps, detach_similarity)


def score_hidden(hp, hq, eps: float = 1e-8, detach_similarity: bool = False) -> PairScore:
    """Score two hidden-state matrices (rows are positions)."""
    hp, hq = constant(hp), constant(hq)
    alignment = align(hp, hq, eps)
    weighted = weight_and_concat(alignment, detach_similarity)
    r = op_mean_rows(weighted.rows)
    half = hp.shape[1]
    r_p = op_slice(r, slice(0, half))
    r_q = op_slice(r, slice(half, 2 * half))
    if np.linalg.norm(r_p.value) < eps and np.linalg.norm(r_q.value) < eps:
        y = constant(1.0)
    else:
        y = op_cosine(r_p, r_q, eps)
    return PairScore(y=y, r_p=r_p, r_q=r_q, alignment=alignment, weighted=weighted)


def loss(y, gold: int) -> Node:
    """Squared error against +1 (paraphrase) or -1 (non-paraphrase)."""
    if gold not in (PARAPHRASE, NON_PARAPHRASE):
        raise ValueError(f"gold label must be 0 or 1, got {gold!r}")
    diff = op_sub(y, 1.0 if gold == PARAPHRASE else -1.0)
    return op_mul_elementwise(diff, diff)


def predict(y: float, threshold: Threshold | float) -> int:
    cut = threshold.cut if isinstance(threshold, Threshold) else float(threshold)
    return PARAPHRASE if y >= cut else NON_PARAPHRASE


def calibrate_threshold(dev_scores: Iterable[tuple[float, int]]) -> Threshold:
    """Cut maximizing accuracy of ``y >= cut`` over the given scores.

    Candidates are the smallest score, midpoints between consecutive
    distinct scores, and the float just above the largest one.  Ties go to
    the smallest cut.
    """
    pairs = list(dev_scores)
    scores = np.array([s for s, _ in pairs], dtype=np.float64)
    labels = np.array([l for _, l in pairs], dtype=np.int64)
    if scores.size == 0 or not np.all(np.isin(labels, (0, 1))):
        raise ValueError("need a non-empty list of (score, 0/1 label) pairs")
    if labels.min() == labels.max():
        raise ValueError("development scores contain a single class")

    distinct, inverse = np.unique(scores, return_inverse=True)
    pos = np.bincount(inverse, weights=labels, minlength=distinct.size)
    neg = np.bincount(inverse, weights=1 - labels, minlength=distinct.size)
    # cut just above distinct[k-1]: negatives below are right, positives at/above are right
    neg_below = np.concatenate([[0.0], np.cumsum(neg)])
    pos_at_or_above = np.concatenate([np.cumsum(pos[::-1])[::-1], [0.0]])
    correct = neg_below + pos_at_or_above
    mid = (distinct[:-1] + distinct[1:]) / 2.0
    # adjacent floats can round the midpoint down onto the lower score
    mid = np.where(mid > distinct[:-1], mid, distinct[1:])
    cuts = np.concatenate([[distinct[0]], mid, [np.nextafter(distinct[-1], np.inf)]])
    best = int(np.argmax(correct))  # first maximum is the smallest cut
    return Threshold(cut=float(cuts[best]), dev_accuracy=float(correct[best] / scores.size))
