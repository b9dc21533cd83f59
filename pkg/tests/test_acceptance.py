"""Acceptance gate: one test per criterion, reported in the run summary.

Run alone with ``pytest tests/test_acceptance.py``; the summary section
"acceptance criteria" lists PASS / FAIL / SKIP per criterion.
"""

import os
import time

import numpy as np
import pytest

from hungalign.assignment import assignment_total, brute_force_assignment, solve_max_assignment
from hungalign.data import SplitSpec, SyntheticConfig, generate_synthetic, load_pairs, split
from hungalign.encoder import EmbeddingTable, bilstm_encode, init_lstm_params
from hungalign.estimator import HungarianParaphraseClassifier
from hungalign.model import Threshold, calibrate_threshold, score_pair
from hungalign.training import TrainConfig, train

from oracles import model_gradient_errors, naive_bilstm, sweep_best_accuracy

criterion = pytest.mark.criterion


@criterion("assignment optimality: 1000 random matrices up to 7x7 match enumeration within 1e-9, < 10 s")
def test_assignment_optimality():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    shapes = set()
    for _ in range(1000):
        m, n = rng.integers(1, 8, size=2)
        shapes.add((m, n))
        w = rng.uniform(-1, 1, size=(m, n))
        got = assignment_total(w, solve_max_assignment(w))
        oracle = assignment_total(w, brute_force_assignment(w))
        worst = max(worst, abs(got - oracle))
    elapsed = time.perf_counter() - start
    assert any(m != n for m, n in shapes)
    assert worst <= 1e-9
    assert elapsed < 10.0


@criterion("solver scaling: 100x100 random matrix in < 1 s")
def test_solver_scaling():
    w = np.random.default_rng(7).uniform(size=(100, 100))
    start = time.perf_counter()
    pairs = solve_max_assignment(w)
    elapsed = time.perf_counter() - start
    assert len(pairs) == 100
    assert elapsed < 1.0


@criterion("end-to-end gradient check: d=4, H=3, 20 assignment-stable pairs, rel err < 1e-4, < 2 min")
def test_end_to_end_gradient_check():
    rng = np.random.default_rng(99)
    table = EmbeddingTable([f"w{i}" for i in range(12)], rng.normal(size=(12, 4)))
    params = init_lstm_params(4, 3, rng)
    start = time.perf_counter()
    checked, worst = 0, 0.0
    while checked < 20:
        p = list(rng.choice(table.tokens, size=rng.integers(2, 5)))
        q = list(rng.choice(table.tokens, size=rng.integers(2, 5)))
        errors = model_gradient_errors(p, q, int(rng.integers(2)), params, table)
        if errors is None:
            continue
        assert set(errors) == {"fwd_Wx", "fwd_Wh", "fwd_b", "bwd_Wx", "bwd_Wh", "bwd_b"}
        worst = max(worst, *errors.values())
        checked += 1
    elapsed = time.perf_counter() - start
    assert worst < 1e-4
    assert elapsed < 120.0


@criterion("degeneracy: identical sentences give y = +1 exactly, all-OOV sentences stay finite")
def test_degeneracy():
    examples, table = generate_synthetic(SyntheticConfig(pairs=20, seed=1))
    params = init_lstm_params(table.dim, 8, np.random.default_rng(0))
    for ex in examples:
        assert score_pair(ex.source, ex.source, params, table).value == 1.0
        assert score_pair(ex.target, ex.target, params, table).value == 1.0
    for p, q in [(["zzz"], ["yyy"]), (["qq", "rr", "ss"], ["tt"]), (["oov"], ["happy", "big"])]:
        scored = score_pair(p, q, params, table)
        assert np.isfinite(scored.value)
        assert np.all(np.isfinite(scored.r_p.value)) and np.all(np.isfinite(scored.r_q.value))


@criterion("synthetic learning: desk preset, 1600/200/200, >= 90% test accuracy within 50 epochs, < 10 min, deterministic")
def test_synthetic_learning():
    examples, table = generate_synthetic(SyntheticConfig(pairs=2000, seed=0))
    train_set, dev_set, test_set = split(examples, SplitSpec(100, 100, 100, 100, seed=0))
    assert (len(train_set), len(dev_set), len(test_set)) == (1600, 200, 200)
    config = TrainConfig.desk(seed=0)
    start = time.perf_counter()
    result = train(train_set, dev_set, table, config)
    elapsed = time.perf_counter() - start
    scores = [score_pair(ex.source, ex.target, result.params, table).value for ex in test_set]
    accuracy = np.mean([(s >= result.threshold.cut) == ex.label for s, ex in zip(scores, test_set)])
    print(f"synthetic test accuracy {accuracy:.4f} after {len(result.history)} epochs in {elapsed:.1f} s")
    assert accuracy >= 0.90
    assert len(result.history) <= 50
    assert elapsed < 600.0
    replay = train(train_set, dev_set, table, TrainConfig.desk(seed=0, max_epochs=2))
    assert replay.history == result.history[:2]


@criterion("encoder oracle: BiLSTM matches naive recurrence to 1e-12 on 100 random inputs")
def test_encoder_oracle():
    rng = np.random.default_rng(31)
    worst = 0.0
    for _ in range(100):
        d, h, length = rng.integers(1, 9), rng.integers(1, 9), rng.integers(1, 12)
        params = init_lstm_params(d, h, rng)
        for node in params.nodes():
            node.value[...] = rng.normal(size=node.value.shape)
        xs = rng.normal(size=(length, d))
        got = bilstm_encode(xs, params).value
        worst = max(worst, np.abs(got - naive_bilstm(xs, params.arrays())).max())
    assert worst <= 1e-12


@criterion("threshold calibration: 200 random score sets match the exhaustive sweep")
def test_threshold_calibration():
    rng = np.random.default_rng(77)
    for trial in range(200):
        n = int(rng.integers(2, 60))
        scores = rng.uniform(-1, 1, size=n)
        if trial % 3 == 0:
            scores = np.round(scores, 1)  # plenty of ties
        labels = rng.integers(0, 2, size=n)
        labels[:2] = [0, 1]
        found = calibrate_threshold(zip(scores, labels))
        achieved = np.mean((scores >= found.cut) == labels)
        best = sweep_best_accuracy(scores, labels)
        assert achieved == pytest.approx(best, abs=1e-12)
        assert found.dev_accuracy == pytest.approx(best, abs=1e-12)


QUORA = os.environ.get("HUNGALIGN_QUORA_TSV")
VECTORS = os.environ.get("HUNGALIGN_EMBEDDINGS")


@criterion("quora subset (informational): trains end-to-end and beats the majority baseline")
@pytest.mark.skipif(not (QUORA and VECTORS), reason="set HUNGALIGN_QUORA_TSV and HUNGALIGN_EMBEDDINGS to run")
def test_quora_subset():
    from hungalign.encoder import load_embeddings

    examples = load_pairs(QUORA)
    n_pos = sum(ex.label for ex in examples)
    n_neg = len(examples) - n_pos
    train_set, dev_set, test_set = split(examples, SplitSpec(n_pos // 10, n_neg // 10, n_pos // 10, n_neg // 10))
    vocab = {tok for ex in examples for tok in ex.source + ex.target}
    table = load_embeddings(VECTORS, vocabulary=vocab)
    est = HungarianParaphraseClassifier(embeddings=table)
    est.fit(
        [(ex.source, ex.target) for ex in train_set],
        [ex.label for ex in train_set],
        eval_set=([(ex.source, ex.target) for ex in dev_set], [ex.label for ex in dev_set]),
    )
    labels = np.array([ex.label for ex in test_set])
    accuracy = est.score([(ex.source, ex.target) for ex in test_set], labels)
    majority = max(labels.mean(), 1 - labels.mean())
    print(f"quora subset test accuracy {accuracy:.4f} vs majority {majority:.4f}")
    assert accuracy > majority


@criterion("checkpoint round trip: 100 random pairs score bit-exactly after save/load")
def test_checkpoint_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    _, table = generate_synthetic(SyntheticConfig(pairs=0))
    params = init_lstm_params(table.dim, 6, rng)
    est = HungarianParaphraseClassifier.from_parts(table, params, Threshold(0.25, 0.5))
    vocab = list(table.tokens) + ["unknown-a", "unknown-b"]
    X = [
        (list(rng.choice(vocab, size=rng.integers(1, 9))), list(rng.choice(vocab, size=rng.integers(1, 9))))
        for _ in range(100)
    ]
    path = tmp_path / "ckpt.npz"
    est.save(path)
    loaded = HungarianParaphraseClassifier.load(path)
    before, after = est.decision_function(X), loaded.decision_function(X)
    assert before.tobytes() == after.tobytes()
    np.testing.assert_array_equal(est.predict(X), loaded.predict(X))
