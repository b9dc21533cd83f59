"""Self-describing ``.npz`` checkpoints.

Layout: a JSON ``meta`` entry (format tag, version, hyperparameters,
vocabulary, threshold, parameter shapes) plus one float64 array per LSTM
weight and the embedding matrix.  Arrays are stored raw, so a reload scores
bit-identically.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .encoder import PARAM_NAMES, EmbeddingTable, LstmParams
from .model import Threshold

FORMAT = "hungalign-checkpoint"
VERSION = 1
LOSS_ID = "squared_error_pm1"


class CheckpointError(ValueError):
    pass


def save_checkpoint(estimator, path) -> None:
    params: LstmParams = estimator.params_
    arrays = params.arrays()
    meta = {
        "format": FORMAT,
        "version": VERSION,
        "hyperparameters": {
            "input_size": params.input_size,
            "hidden_size": params.hidden_size,
            "eps": estimator.eps,
            "loss": LOSS_ID,
            "lowercase": estimator.lowercase,
            "max_length": estimator.max_length,
            "detach_similarity": estimator.detach_similarity,
            "rho": estimator.rho,
            "eps_opt": estimator.eps_opt,
        },
        "threshold": {"cut": estimator.threshold_.cut, "dev_accuracy": estimator.threshold_.dev_accuracy},
        "shapes": {name: list(a.shape) for name, a in arrays.items()},
        "vocabulary": estimator.embeddings.tokens,
    }
    payload = {f"param_{name}": a for name, a in arrays.items()}
    payload["embeddings"] = np.asarray(estimator.embeddings.vectors)
    payload["meta"] = np.array(json.dumps(meta))
    with Path(path).open("wb") as fh:
        np.savez(fh, **payload)


def load_checkpoint(path):
    from .estimator import HungarianParaphraseClassifier

    try:
        with np.load(Path(path), allow_pickle=False) as data:
            meta = json.loads(str(data["meta"]))
            if meta.get("format") != FORMAT:
                raise CheckpointError(f"{path}: not a {FORMAT} file")
            if meta.get("version") != VERSION:
                raise CheckpointError(f"{path}: unsupported checkpoint version {meta.get('version')}")
            arrays = {name: data[f"param_{name}"] for name in PARAM_NAMES}
            vectors = data["embeddings"]
    except (OSError, KeyError, ValueError) as exc:
        if isinstance(exc, CheckpointError):
            raise
        raise CheckpointError(f"{path}: unreadable checkpoint ({exc})") from exc
    for name, shape in meta["shapes"].items():
        if list(arrays[name].shape) != shape:
            raise CheckpointError(f"{path}: parameter {name} has shape {arrays[name].shape}, expected {shape}")
    hp = meta["hyperparameters"]
    if hp.get("loss") != LOSS_ID:
        raise CheckpointError(f"{path}: unknown loss {hp.get('loss')!r}")
    table = EmbeddingTable(meta["vocabulary"], vectors)
    threshold = Threshold(**meta["threshold"])
    return HungarianParaphraseClassifier.from_parts(
        table,
        LstmParams.from_arrays(arrays),
        threshold,
        eps=hp["eps"],
        lowercase=hp["lowercase"],
        max_length=hp["max_length"],
        detach_similarity=hp["detach_similarity"],
        rho=hp["rho"],
        eps_opt=hp["eps_opt"],
    )
