"""Independent reference computations used as test oracles."""

import math

import numpy as np


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def naive_lstm_direction(xs, wx, wh, b):
    """Textbook LSTM recurrence with each gate computed separately."""
    hidden = wh.shape[0]
    blocks = [slice(k * hidden, (k + 1) * hidden) for k in range(4)]
    h = np.zeros(hidden)
    c = np.zeros(hidden)
    out = []
    for x in xs:
        i = _sigmoid(x @ wx[:, blocks[0]] + h @ wh[:, blocks[0]] + b[blocks[0]])
        f = _sigmoid(x @ wx[:, blocks[1]] + h @ wh[:, blocks[1]] + b[blocks[1]])
        o = _sigmoid(x @ wx[:, blocks[2]] + h @ wh[:, blocks[2]] + b[blocks[2]])
        g = np.tanh(x @ wx[:, blocks[3]] + h @ wh[:, blocks[3]] + b[blocks[3]])
        c = f * c + i * g
        h = o * np.tanh(c)
        out.append(h)
    return out


def naive_bilstm(xs, arrays):
    fwd = naive_lstm_direction(xs, arrays["fwd_Wx"], arrays["fwd_Wh"], arrays["fwd_b"])
    bwd = naive_lstm_direction(xs[::-1], arrays["bwd_Wx"], arrays["bwd_Wh"], arrays["bwd_b"])[::-1]
    return np.array([np.concatenate([f, b]) for f, b in zip(fwd, bwd)])


def sweep_best_accuracy(scores, labels):
    """Best accuracy of ``y >= cut`` over every score value and +inf."""
    best = 0.0
    for cut in list(scores) + [math.inf]:
        correct = sum((s >= cut) == bool(l) for s, l in zip(scores, labels))
        best = max(best, correct / len(scores))
    return best


def model_gradient_errors(p_tokens, q_tokens, gold, params, table, step=1e-5):
    """Relative error per parameter array between backprop and central differences.

    Returns ``None`` when some perturbation changes the assignment (the
    point is not assignment-stable).
    """
    from hungalign.graph import backward, zero_grad
    from hungalign.model import loss, score_pair

    scored = score_pair(p_tokens, q_tokens, params, table)
    pairs = scored.alignment.pairs
    zero_grad(params.nodes())
    backward(loss(scored.y, gold))
    errors = {}
    for name, node in zip(("fwd_Wx", "fwd_Wh", "fwd_b", "bwd_Wx", "bwd_Wh", "bwd_b"), params.nodes()):
        x = node.value
        numeric = np.zeros_like(x)
        for idx in np.ndindex(x.shape):
            orig = x[idx]
            vals = []
            for delta in (step, -step):
                x[idx] = orig + delta
                s = score_pair(p_tokens, q_tokens, params, table)
                if s.alignment.pairs != pairs:
                    x[idx] = orig
                    return None
                vals.append(float(loss(s.y, gold).value))
            x[idx] = orig
            numeric[idx] = (vals[0] - vals[1]) / (2 * step)
        denom = np.linalg.norm(node.grad) + np.linalg.norm(numeric)
        errors[name] = 0.0 if denom == 0 else float(np.linalg.norm(node.grad - numeric) / denom)
    return errors
