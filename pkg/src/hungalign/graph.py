"""Define-by-run reverse-mode autodiff over dense float64 arrays.

Every op builds its output ``Node`` eagerly and registers a closure that
pushes the upstream gradient to its parents.  Because links are recorded as
the forward pass executes, data-dependent wiring (rows picked by an
assignment solver, say) becomes an ordinary edge of the graph: the chosen
indices are constants and gradients flow through the gathered values.
"""

from __future__ import annotations

import itertools
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Node",
    "backward",
    "constant",
    "detach",
    "parameter",
    "zero_grad",
    "op_add",
    "op_concat",
    "op_cosine",
    "op_gather_cells",
    "op_gather_rows",
    "op_matmul",
    "op_mean_rows",
    "op_mul_elementwise",
    "op_neg",
    "op_pairwise_cosine",
    "op_scale",
    "op_sigmoid",
    "op_slice",
    "op_stack",
    "op_sub",
    "op_sum",
    "op_tanh",
]

# creation order doubles as a topological order: parents always exist first
_ids = itertools.count()


class Node:
    """A value in the graph plus its gradient accumulator."""

    __slots__ = ("value", "grad", "parents", "_backward", "requires_grad", "op", "_id")

    def __init__(
        self,
        value,
        parents: Sequence["Node"] = (),
        backward_fn: Callable[[], None] | None = None,
        requires_grad: bool = False,
        op: str = "",
    ):
        self.value = np.asarray(value, dtype=np.float64)
        self.requires_grad = requires_grad
        self.parents = tuple(parents) if requires_grad else ()
        self._backward = backward_fn if requires_grad else None
        self.grad = np.zeros_like(self.value) if requires_grad and not parents else None
        self.op = op
        self._id = next(_ids)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def is_leaf(self) -> bool:
        return not self.parents

    def __repr__(self):
        return f"Node(op={self.op or 'leaf'!r}, shape={self.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return op_add(self, other)

    def __radd__(self, other):
        return op_add(other, self)

    def __sub__(self, other):
        return op_sub(self, other)

    def __rsub__(self, other):
        return op_sub(other, self)

    def __mul__(self, other):
        return op_mul_elementwise(self, other)

    def __rmul__(self, other):
        return op_mul_elementwise(other, self)

    def __matmul__(self, other):
        return op_matmul(self, other)

    def __neg__(self):
        return op_neg(self)

    def __getitem__(self, key):
        return op_slice(self, key)


def constant(value) -> Node:
    return value if isinstance(value, Node) else Node(value)


def parameter(value) -> Node:
    """A trainable leaf; its ``grad`` starts at zero and accumulates."""
    return Node(np.array(value, dtype=np.float64), requires_grad=True, op="param")


def detach(node: Node) -> Node:
    return Node(node.value)


def zero_grad(params) -> None:
    for p in params:
        p.grad = np.zeros_like(p.value)


def _accumulate(node: Node, g: np.ndarray) -> None:
    if not node.requires_grad:
        return
    node.grad = g if node.grad is None else node.grad + g


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _make(value, parents: Sequence[Node], rule, op: str) -> Node:
    needs = any(p.requires_grad for p in parents)
    out = Node(value, parents, None, needs, op)
    if needs:
        out._backward = lambda: rule(out.grad)
    if not np.isfinite(out.value).all():
        raise FloatingPointError(f"non-finite value produced by {op}")
    return out


def backward(loss: Node) -> None:
    """Backpropagate from a scalar ``loss`` into every reachable node.

    Intermediate gradients are reset first, so replaying the same graph
    gives identical results; leaf gradients accumulate (call ``zero_grad``).
    """
    if loss.value.ndim != 0:
        raise ValueError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        return
    seen = {id(loss): loss}
    stack = [loss]
    while stack:
        node = stack.pop()
        for parent in node.parents:
            if parent.requires_grad and id(parent) not in seen:
                seen[id(parent)] = parent
                stack.append(parent)
    order = sorted(seen.values(), key=lambda n: n._id, reverse=True)
    for node in order:
        if not node.is_leaf:
            node.grad = None
    loss.grad = np.ones_like(loss.value)
    for node in order:
        if node._backward is not None and node.grad is not None:
            node._backward()


# -- elementwise -------------------------------------------------------------


def op_add(a, b) -> Node:
    a, b = constant(a), constant(b)

    def rule(g):
        _accumulate(a, _unbroadcast(g, a.shape))
        _accumulate(b, _unbroadcast(g, b.shape))

    return _make(a.value + b.value, (a, b), rule, "add")


def op_sub(a, b) -> Node:
    a, b = constant(a), constant(b)

    def rule(g):
        _accumulate(a, _unbroadcast(g, a.shape))
        _accumulate(b, _unbroadcast(-g, b.shape))

    return _make(a.value - b.value, (a, b), rule, "sub")


def op_neg(a) -> Node:
    a = constant(a)
    return _make(-a.value, (a,), lambda g: _accumulate(a, -g), "neg")


def op_mul_elementwise(a, b) -> Node:
    a, b = constant(a), constant(b)

    def rule(g):
        _accumulate(a, _unbroadcast(g * b.value, a.shape))
        _accumulate(b, _unbroadcast(g * a.value, b.shape))

    return _make(a.value * b.value, (a, b), rule, "mul")


def op_tanh(a) -> Node:
    a = constant(a)
    t = np.tanh(a.value)
    return _make(t, (a,), lambda g: _accumulate(a, g * (1.0 - t * t)), "tanh")


def op_sigmoid(a) -> Node:
    a = constant(a)
    s = 0.5 * (1.0 + np.tanh(0.5 * a.value))
    return _make(s, (a,), lambda g: _accumulate(a, g * s * (1.0 - s)), "sigmoid")


# -- linear algebra and shape ------------------------------------------------


def op_matmul(a, b) -> Node:
    a, b = constant(a), constant(b)
    av, bv = a.value, b.value
    if av.ndim not in (1, 2) or bv.ndim not in (1, 2) or av.shape[-1] != bv.shape[0]:
        raise ValueError(f"matmul shape mismatch: {av.shape} @ {bv.shape}")

    def rule(g):
        if av.ndim == 1 and bv.ndim == 1:
            ga, gb = g * bv, g * av
        elif av.ndim == 1:
            ga, gb = bv @ g, np.outer(av, g)
        elif bv.ndim == 1:
            ga, gb = np.outer(g, bv), av.T @ g
        else:
            ga, gb = g @ bv.T, av.T @ g
        _accumulate(a, ga)
        _accumulate(b, gb)

    return _make(av @ bv, (a, b), rule, "matmul")


def op_concat(a, b, axis: int = -1) -> Node:
    a, b = constant(a), constant(b)
    split = a.shape[axis]

    def rule(g):
        ga, gb = np.split(g, [split], axis=axis)
        _accumulate(a, ga)
        _accumulate(b, gb)

    return _make(np.concatenate([a.value, b.value], axis=axis), (a, b), rule, "concat")


def op_stack(nodes: Sequence[Node]) -> Node:
    """Stack equal-shape nodes along a new leading axis."""
    nodes = [constant(n) for n in nodes]
    if not nodes:
        raise ValueError("cannot stack an empty sequence")

    def rule(g):
        for i, n in enumerate(nodes):
            _accumulate(n, g[i])

    return _make(np.stack([n.value for n in nodes]), nodes, rule, "stack")


def op_slice(a, key) -> Node:
    """Basic (non-fancy) indexing, e.g. a row or a range of columns."""
    a = constant(a)

    def rule(g):
        full = np.zeros_like(a.value)
        full[key] = g
        _accumulate(a, full)

    return _make(a.value[key], (a,), rule, "slice")


def op_sum(a) -> Node:
    a = constant(a)
    return _make(a.value.sum(), (a,), lambda g: _accumulate(a, np.broadcast_to(g, a.shape).copy()), "sum")


def op_mean_rows(a) -> Node:
    """Average a (K, D) matrix over its rows."""
    a = constant(a)
    if a.value.ndim != 2 or a.shape[0] == 0:
        raise ValueError(f"mean_rows needs a non-empty matrix, got shape {a.shape}")
    k = a.shape[0]
    return _make(
        a.value.mean(axis=0),
        (a,),
        lambda g: _accumulate(a, np.broadcast_to(g / k, a.shape).copy()),
        "mean_rows",
    )


def op_scale(s, v) -> Node:
    """Scalar-times-vector product, or row-wise scaling of a (K, D) matrix by K scalars."""
    s, v = constant(s), constant(v)
    if s.value.ndim == 0:
        sv = s.value
    elif s.value.ndim == 1 and v.value.ndim == 2 and v.shape[0] == s.shape[0]:
        sv = s.value[:, None]
    else:
        raise ValueError(f"cannot scale shape {v.shape} by shape {s.shape}")

    def rule(g):
        prod = g * v.value
        _accumulate(s, prod.sum() if s.value.ndim == 0 else prod.sum(axis=1))
        _accumulate(v, g * sv)

    return _make(sv * v.value, (s, v), rule, "scale")


def op_gather_rows(src, indices) -> Node:
    """Select rows of ``src`` by constant indices.

    Backward scatter-adds into the selected rows, so a repeated index
    receives the sum of its upstream rows.
    """
    src = constant(src)
    idx = np.asarray(indices, dtype=np.intp)
    if idx.ndim != 1 or np.any(idx < 0) or np.any(idx >= src.shape[0]):
        raise IndexError(f"row indices {idx.tolist()} out of range for {src.shape[0]} rows")

    def rule(g):
        full = np.zeros_like(src.value)
        np.add.at(full, idx, g)
        _accumulate(src, full)

    return _make(src.value[idx], (src,), rule, "gather_rows")


def op_gather_cells(src, rows, cols) -> Node:
    """Select matrix cells ``src[rows[i], cols[i]]`` into a vector."""
    src = constant(src)
    r = np.asarray(rows, dtype=np.intp)
    c = np.asarray(cols, dtype=np.intp)
    if r.shape != c.shape or np.any(r < 0) or np.any(c < 0) or np.any(r >= src.shape[0]) or np.any(c >= src.shape[1]):
        raise IndexError("cell indices out of range")

    def rule(g):
        full = np.zeros_like(src.value)
        np.add.at(full, (r, c), g)
        _accumulate(src, full)

    return _make(src.value[r, c], (src,), rule, "gather_cells")


# -- cosine ------------------------------------------------------------------


def op_cosine(a, b, eps: float = 1e-8) -> Node:
    """``dot(a, b) / (max(|a|, eps) * max(|b|, eps))`` for two vectors."""
    a, b = constant(a), constant(b)
    if a.value.ndim != 1 or a.shape != b.shape:
        raise ValueError(f"cosine needs equal-length vectors, got {a.shape} and {b.shape}")
    av, bv = a.value, b.value
    aa = max(float((av * av).sum()), eps * eps)
    bb = max(float((bv * bv).sum()), eps * eps)
    # sqrt of the product keeps cosine(v, v) exactly 1
    denom = np.sqrt(aa * bb)
    y = (av * bv).sum() / denom

    def rule(g):
        ga = g * bv / denom
        if aa > eps * eps:
            ga = ga - g * y * av / aa
        gb = g * av / denom
        if bb > eps * eps:
            gb = gb - g * y * bv / bb
        _accumulate(a, ga)
        _accumulate(b, gb)

    return _make(y, (a, b), rule, "cosine")


def op_pairwise_cosine(s, t, eps: float = 1e-8) -> Node:
    """(M, N) matrix of cosines between the rows of ``s`` and of ``t``."""
    s, t = constant(s), constant(t)
    sv, tv = s.value, t.value
    if sv.ndim != 2 or tv.ndim != 2 or sv.shape[1] != tv.shape[1]:
        raise ValueError(f"pairwise cosine shape mismatch: {sv.shape} vs {tv.shape}")
    # same reduction for dots and squared norms, so identical rows give exactly 1
    dots = (sv[:, None, :] * tv[None, :, :]).sum(axis=-1)
    ss = np.maximum((sv * sv).sum(axis=-1), eps * eps)
    tt = np.maximum((tv * tv).sum(axis=-1), eps * eps)
    denom = np.sqrt(ss[:, None] * tt[None, :])
    w = dots / denom

    def rule(g):
        gd = g / denom
        gs = gd @ tv
        gt = gd.T @ sv
        gw = g * w
        live_s = ss > eps * eps
        live_t = tt > eps * eps
        gs -= np.where(live_s, gw.sum(axis=1) / ss, 0.0)[:, None] * sv
        gt -= np.where(live_t, gw.sum(axis=0) / tt, 0.0)[:, None] * tv
        _accumulate(s, gs)
        _accumulate(t, gt)

    return _make(w, (s, t), rule, "pairwise_cosine")
