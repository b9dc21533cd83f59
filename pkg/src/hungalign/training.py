"""Mini-batch AdaDelta training with early stopping on dev accuracy."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .data import PairExample
from .encoder import EmbeddingTable, LstmParams, init_lstm_params
from .graph import backward, zero_grad
from .model import Threshold, calibrate_threshold, loss, score_pair

__all__ = ["AdaDelta", "EpochRecord", "TrainConfig", "TrainResult", "TrainingDiverged", "adadelta_step", "train"]

logger = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    hidden_size: int = 32
    batch_size: int = 32
    max_epochs: int = 50
    patience: int = 5
    rho: float = 0.6
    eps_opt: float = 1e-6
    eps: float = 1e-8
    seed: int = 0
    detach_similarity: bool = False

    def __post_init__(self):
        if self.batch_size < 1 or self.max_epochs < 1 or self.hidden_size < 1:
            raise ValueError("batch_size, max_epochs and hidden_size must be >= 1")
        if self.patience < 0:
            raise ValueError("patience must be >= 0")
        if not 0.0 <= self.rho < 1.0 or self.eps_opt <= 0 or self.eps <= 0:
            raise ValueError("need 0 <= rho < 1 and positive eps values")

    @classmethod
    def desk(cls, **overrides) -> "TrainConfig":
        return replace(cls(), **overrides)

    @classmethod
    def reference(cls, **overrides) -> "TrainConfig":
        """Published setup: 150 hidden units, batch 512, at most 30 epochs."""
        return replace(cls(hidden_size=150, batch_size=512, max_epochs=30), **overrides)


@dataclass
class AdaDelta:
    """Running averages of squared gradients and squared updates, per parameter."""

    rho: float = 0.6
    eps: float = 1e-6
    sq_grad: dict[str, np.ndarray] = field(default_factory=dict)
    sq_update: dict[str, np.ndarray] = field(default_factory=dict)


def adadelta_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray], state: AdaDelta) -> dict[str, np.ndarray]:
    """Update ``params`` in place and return the applied deltas."""
    deltas = {}
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape} for {name}")
        if not np.isfinite(g).all():
            raise TrainingDiverged(f"non-finite gradient for parameter {name}")
        eg = state.sq_grad.get(name)
        ed = state.sq_update.get(name)
        if eg is None:
            eg = state.sq_grad[name] = np.zeros_like(p)
            ed = state.sq_update[name] = np.zeros_like(p)
        eg *= state.rho
        eg += (1.0 - state.rho) * g * g
        delta = -np.sqrt(ed + state.eps) / np.sqrt(eg + state.eps) * g
        ed *= state.rho
        ed += (1.0 - state.rho) * delta * delta
        p += delta
        deltas[name] = delta
    return deltas


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    dev_accuracy: float
    threshold: float

    def to_json(self) -> str:
        return json.dumps(asdict(self))


@dataclass
class TrainResult:
    params: LstmParams
    threshold: Threshold
    history: list[EpochRecord]
    best_epoch: int


def score_examples(examples: Sequence[PairExample], params: LstmParams, table: EmbeddingTable, eps: float) -> np.ndarray:
    return np.array([score_pair(ex.source, ex.target, params, table, eps).value for ex in examples])


def train(
    train_set: Sequence[PairExample],
    dev_set: Sequence[PairExample],
    table: EmbeddingTable,
    config: TrainConfig = TrainConfig(),
    params: LstmParams | None = None,
    on_epoch: Callable[[EpochRecord], None] | None = None,
) -> TrainResult:
    """Train the encoder and return the best-dev-accuracy parameters.

    Batch gradients are means of per-example gradients.  Training stops
    after ``max_epochs`` or once dev accuracy has not improved for
    ``patience`` epochs.
    """
    if not train_set or not dev_set:
        raise ValueError("training and development sets must be non-empty")
    rng = np.random.default_rng(config.seed)
    if params is None:
        params = init_lstm_params(table.dim, config.hidden_size, rng)
    nodes = dict(zip(("fwd_Wx", "fwd_Wh", "fwd_b", "bwd_Wx", "bwd_Wh", "bwd_b"), params.nodes()))
    state = AdaDelta(rho=config.rho, eps=config.eps_opt)
    dev_labels = [ex.label for ex in dev_set]

    history: list[EpochRecord] = []
    best: tuple[float, int, dict, Threshold] | None = None
    since_best = 0
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(train_set))
        epoch_loss = 0.0
        for batch_id, start in enumerate(range(0, len(order), config.batch_size)):
            batch = order[start : start + config.batch_size]
            zero_grad(nodes.values())
            batch_loss = 0.0
            for i in batch:
                ex = train_set[i]
                try:
                    scored = score_pair(ex.source, ex.target, params, table, config.eps, config.detach_similarity)
                except FloatingPointError as exc:
                    raise TrainingDiverged(f"epoch {epoch} batch {batch_id}: {exc}") from exc
                l = loss(scored.y, ex.label)
                backward(l)
                batch_loss += float(l.value)
            if not np.isfinite(batch_loss):
                raise TrainingDiverged(f"epoch {epoch} batch {batch_id}: non-finite loss")
            grads = {name: node.grad / len(batch) for name, node in nodes.items()}
            try:
                adadelta_step({name: node.value for name, node in nodes.items()}, grads, state)
            except TrainingDiverged as exc:
                raise TrainingDiverged(f"epoch {epoch} batch {batch_id}: {exc}") from exc
            epoch_loss += batch_loss

        dev_scores = score_examples(dev_set, params, table, config.eps)
        threshold = calibrate_threshold(zip(dev_scores, dev_labels))
        record = EpochRecord(epoch, epoch_loss / len(train_set), threshold.dev_accuracy, threshold.cut)
        history.append(record)
        logger.info("epoch %d loss %.5f dev acc %.4f cut %.4f", epoch, record.train_loss, record.dev_accuracy, record.threshold)
        if on_epoch is not None:
            on_epoch(record)

        if best is None or threshold.dev_accuracy > best[0]:
            best = (threshold.dev_accuracy, epoch, params.arrays(), threshold)
            since_best = 0
        else:
            since_best += 1
        if since_best >= config.patience:
            break

    _, best_epoch, arrays, threshold = best
    return TrainResult(LstmParams.from_arrays(arrays), threshold, history, best_epoch)
