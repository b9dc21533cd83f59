"""Frozen word embeddings and a parameter-shared BiLSTM encoder."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .graph import Node, constant, op_concat, op_matmul, op_add, op_sigmoid, op_slice, op_stack, op_tanh, parameter

__all__ = [
    "EmbeddingTable",
    "LstmParams",
    "bilstm_encode",
    "embed",
    "init_lstm_params",
    "load_embeddings",
    "lstm_step",
    "save_embeddings",
]

logger = logging.getLogger(__name__)

#: LSTM weight names per direction, in checkpoint order
PARAM_NAMES = ("fwd_Wx", "fwd_Wh", "fwd_b", "bwd_Wx", "bwd_Wh", "bwd_b")


class EmbeddingTable:
    """Read-only token -> vector lookup; unknown tokens map to the zero vector."""

    def __init__(self, tokens: Sequence[str], vectors):
        vectors = np.array(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[1] < 1:
            raise ValueError(f"embedding matrix must be |V| x d with d >= 1, got {vectors.shape}")
        if len(tokens) != vectors.shape[0]:
            raise ValueError(f"{len(tokens)} tokens for {vectors.shape[0]} vectors")
        self.tokens = list(tokens)
        self.index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise ValueError("duplicate tokens in embedding table")
        vectors.flags.writeable = False
        self.vectors = vectors

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.index

    def lookup(self, tokens: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(tokens), self.dim))
        for row, tok in enumerate(tokens):
            i = self.index.get(tok)
            if i is not None:
                out[row] = self.vectors[i]
        return out

    def oov_rate(self, sentences: Iterable[Sequence[str]]) -> float:
        total = missing = 0
        for sent in sentences:
            total += len(sent)
            missing += sum(tok not in self.index for tok in sent)
        return missing / total if total else 0.0


def load_embeddings(path, vocabulary: set[str] | None = None) -> EmbeddingTable:
    """Read a GloVe-style text file: a token then ``d`` floats per line.

    Lines whose arity disagrees with the first line are collected and
    reported together.  When ``vocabulary`` is given, other tokens are
    skipped, which keeps large files affordable.
    """
    path = Path(path)
    tokens, rows, bad = [], [], []
    dim = None
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").rstrip("\r").split(" ")
            if not line.strip():
                continue
            if dim is None:
                dim = len(parts) - 1
                if dim < 1:
                    raise ValueError(f"{path}:{lineno}: no vector components")
            if len(parts) - 1 != dim:
                bad.append(lineno)
                continue
            if vocabulary is not None and parts[0] not in vocabulary:
                continue
            try:
                rows.append([float(x) for x in parts[1:]])
            except ValueError:
                bad.append(lineno)
                continue
            tokens.append(parts[0])
    if bad:
        shown = ", ".join(map(str, bad[:20])) + (" ..." if len(bad) > 20 else "")
        raise ValueError(f"{path}: malformed embedding lines (expected {dim} values): {shown}")
    if dim is None:
        raise ValueError(f"{path}: empty embedding file")
    return EmbeddingTable(tokens, np.array(rows).reshape(len(rows), dim))


def save_embeddings(table: EmbeddingTable, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for tok, vec in zip(table.tokens, table.vectors):
            fh.write(tok + " " + " ".join(repr(float(x)) for x in vec) + "\n")


def embed(tokens: Sequence[str], table: EmbeddingTable) -> Node:
    """Constant (L, d) node of token vectors; no gradient reaches the table."""
    if len(tokens) == 0:
        raise ValueError("cannot embed an empty token list")
    return constant(table.lookup(tokens))


@dataclass
class LstmParams:
    """Weights for both directions; gate column blocks are ordered i, f, o, g."""

    fwd_Wx: Node
    fwd_Wh: Node
    fwd_b: Node
    bwd_Wx: Node
    bwd_Wh: Node
    bwd_b: Node

    @property
    def hidden_size(self) -> int:
        return self.fwd_Wh.shape[0]

    @property
    def input_size(self) -> int:
        return self.fwd_Wx.shape[0]

    def direction(self, name: str) -> tuple[Node, Node, Node]:
        return getattr(self, f"{name}_Wx"), getattr(self, f"{name}_Wh"), getattr(self, f"{name}_b")

    def nodes(self) -> list[Node]:
        return [getattr(self, n) for n in PARAM_NAMES]

    def arrays(self) -> dict[str, np.ndarray]:
        return {n: getattr(self, n).value.copy() for n in PARAM_NAMES}

    @classmethod
    def from_arrays(cls, arrays: dict[str, np.ndarray]) -> "LstmParams":
        params = cls(**{n: parameter(arrays[n]) for n in PARAM_NAMES})
        d, h = params.input_size, params.hidden_size
        for direction in ("fwd", "bwd"):
            wx, wh, b = params.direction(direction)
            if wx.shape != (d, 4 * h) or wh.shape != (h, 4 * h) or b.shape != (4 * h,):
                raise ValueError(f"inconsistent LSTM parameter shapes for direction {direction!r}")
        return params


def init_lstm_params(input_size: int, hidden_size: int, rng: np.random.Generator) -> LstmParams:
    """Glorot-uniform gate weights, forget bias 1, other biases 0."""
    if input_size < 1 or hidden_size < 1:
        raise ValueError("input and hidden sizes must be positive")

    def glorot(fan_in, fan_out):
        r = np.sqrt(6.0 / (fan_in + fan_out))
        # one block per gate, each scaled by its own fan
        return np.concatenate([rng.uniform(-r, r, size=(fan_in, fan_out)) for _ in range(4)], axis=1)

    arrays = {}
    for direction in ("fwd", "bwd"):
        arrays[f"{direction}_Wx"] = glorot(input_size, hidden_size)
        arrays[f"{direction}_Wh"] = glorot(hidden_size, hidden_size)
        b = np.zeros(4 * hidden_size)
        b[hidden_size : 2 * hidden_size] = 1.0
        arrays[f"{direction}_b"] = b
    return LstmParams.from_arrays(arrays)


def _gated_update(z, prev_c, hidden: int) -> tuple[Node, Node]:
    gates = op_sigmoid(op_slice(z, slice(0, 3 * hidden)))
    i = op_slice(gates, slice(0, hidden))
    f = op_slice(gates, slice(hidden, 2 * hidden))
    o = op_slice(gates, slice(2 * hidden, 3 * hidden))
    g = op_tanh(op_slice(z, slice(3 * hidden, 4 * hidden)))
    c = f * prev_c + i * g
    h = o * op_tanh(c)
    return h, c


def lstm_step(prev_h, prev_c, x, weights: tuple[Node, Node, Node]) -> tuple[Node, Node]:
    """One gated update; ``weights`` is ``(Wx, Wh, b)`` of a single direction."""
    wx, wh, b = weights
    z = op_add(op_add(op_matmul(x, wx), op_matmul(prev_h, wh)), b)
    return _gated_update(z, constant(prev_c), wh.shape[0])


def _run(embeddings: Node, weights, reverse: bool) -> list[Node]:
    wx, wh, b = weights
    hidden = wh.shape[0]
    # input projections for all positions in one product
    projected = op_add(op_matmul(embeddings, wx), b)
    h = c = constant(np.zeros(hidden))
    steps = range(embeddings.shape[0])
    out = []
    for t in reversed(steps) if reverse else steps:
        z = op_add(op_slice(projected, t), op_matmul(h, wh))
        h, c = _gated_update(z, c, hidden)
        out.append(h)
    return out[::-1] if reverse else out


def bilstm_encode(embeddings, params: LstmParams) -> Node:
    """(L, 2H) hidden states ``[h_fwd_i, h_bwd_i]`` from zero initial states."""
    embeddings = constant(embeddings)
    if embeddings.value.ndim != 2 or embeddings.shape[0] == 0:
        raise ValueError(f"expected a non-empty (L, d) matrix, got shape {embeddings.shape}")
    if embeddings.shape[1] != params.input_size:
        raise ValueError(f"embedding dim {embeddings.shape[1]} != LSTM input size {params.input_size}")
    forward = _run(embeddings, params.direction("fwd"), reverse=False)
    backward = _run(embeddings, params.direction("bwd"), reverse=True)
    return op_concat(op_stack(forward), op_stack(backward), axis=1)
