"""Exclusive alignment of two hidden sequences and dissimilarity weighting.

The solver sees plain similarity values; the pairs it returns are then wired
into the graph through gather ops, so backprop runs through the chosen rows
(and through the chosen similarity cells) like any other edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import Assignment, solve_max_assignment
from .graph import Node, constant, detach, op_concat, op_gather_cells, op_gather_rows, op_pairwise_cosine, op_scale, op_sub

__all__ = ["Alignment", "WeightedConcat", "align", "mark_unmatched", "pairwise_cosine", "weight_and_concat"]


@dataclass
class Alignment:
    """K = min(M, N) aligned rows: ``a[i] = S[g_i]``, ``b[i] = T[h_i]``, ``m[i] = w[g_i, h_i]``."""

    pairs: Assignment
    a: Node
    b: Node
    m: Node
    similarity: Node

    def __len__(self):
        return len(self.pairs)

    @property
    def source_index(self) -> np.ndarray:
        return np.array([g for g, _ in self.pairs], dtype=np.intp)

    @property
    def target_index(self) -> np.ndarray:
        return np.array([h for _, h in self.pairs], dtype=np.intp)

    def total(self) -> float:
        return float(self.m.value.sum())


@dataclass
class WeightedConcat:
    alpha: Node  # (K,)
    rows: Node  # (K, 4H): alpha_i * [a_i, b_i]


def pairwise_cosine(source, target, eps: float = 1e-8) -> Node:
    source, target = constant(source), constant(target)
    if source.shape[0] == 0 or target.shape[0] == 0:
        raise ValueError("cannot align an empty sequence")
    return op_pairwise_cosine(source, target, eps)


def align(source, target, eps: float = 1e-8) -> Alignment:
    source, target = constant(source), constant(target)
    w = pairwise_cosine(source, target, eps)
    pairs = solve_max_assignment(w.value)
    g = [p[0] for p in pairs]
    h = [p[1] for p in pairs]
    return Alignment(
        pairs=pairs,
        a=op_gather_rows(source, g),
        b=op_gather_rows(target, h),
        m=op_gather_cells(w, g, h),
        similarity=w,
    )


def weight_and_concat(alignment: Alignment, detach_similarity: bool = False) -> WeightedConcat:
    """``alpha_i = 1 - m_i`` and ``R_i = alpha_i * [a_i, b_i]``.

    ``detach_similarity`` cuts the gradient path through ``m`` (ablation
    switch); gradients still reach the encoder through ``a`` and ``b``.
    """
    if len(alignment) == 0:
        raise ValueError("empty alignment")
    m = detach(alignment.m) if detach_similarity else alignment.m
    alpha = op_sub(1.0, m)
    rows = op_scale(alpha, op_concat(alignment.a, alignment.b, axis=1))
    return WeightedConcat(alpha=alpha, rows=rows)


def mark_unmatched(alignment: Alignment | np.ndarray, cut: float = 0.3) -> np.ndarray:
    """Flag aligned pairs whose similarity falls strictly below ``cut``."""
    if not -1.0 <= cut <= 1.0 + 1e-9:
        raise ValueError(f"cut must lie in [-1, 1], got {cut}")
    m = alignment.m.value if isinstance(alignment, Alignment) else np.asarray(alignment, dtype=np.float64)
    return m < cut
