"""Command line interface: ``hungalign {train,eval,score,align}``.

Exit status: 0 success, 1 internal failure (including divergence), 2 usage
or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .checkpoint import CheckpointError
from .data import SplitSpec, SyntheticConfig, generate_synthetic, load_pairs, load_synthetic_config, split
from .encoder import load_embeddings
from .estimator import HungarianParaphraseClassifier
from .hungarian_layer import mark_unmatched
from .model import predict
from .training import TrainingDiverged
from .validation import check_pair_input

logger = logging.getLogger("hungalign")


class UsageError(Exception):
    pass


def _cut(text: str) -> float:
    value = float(text)
    if not -1.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"cut must lie in [-1, 1], got {value}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hungalign", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and write a checkpoint")
    p.add_argument("--train", type=Path, help="training pairs (TSV)")
    p.add_argument("--dev", type=Path, help="development pairs (TSV); held out from --train if omitted")
    p.add_argument("--test", type=Path, help="optional test pairs (TSV) scored after training")
    p.add_argument("--embeddings", type=Path, help="word vectors, one 'token v1 ... vd' per line")
    p.add_argument("--synthetic", metavar="CFG", help="generator config file, or 'default'")
    p.add_argument("--checkpoint", type=Path, required=True, help="output checkpoint path")
    p.add_argument("--history", type=Path, help="per-epoch JSON lines (default: CHECKPOINT.history.jsonl)")
    p.add_argument("--hidden", type=_positive, default=32)
    p.add_argument("--batch", type=_positive, default=32)
    p.add_argument("--epochs", type=_positive, default=50)
    p.add_argument("--patience", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("eval", help="accuracy of a checkpoint on labeled pairs")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--test", type=Path, required=True, help="labeled pairs (TSV)")
    p.add_argument("--dev", type=Path, help="re-calibrate the threshold on these pairs first")
    p.add_argument("--json", action="store_true", help="one JSON record per pair plus a summary record")

    p = sub.add_parser("score", help="score one sentence pair")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("source")
    p.add_argument("target")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("align", help="show the exclusive alignment of a sentence pair")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("source", nargs="?")
    p.add_argument("target", nargs="?")
    p.add_argument("--pairs", type=Path, help="align every pair of a TSV file instead")
    p.add_argument("--cut", type=_cut, default=0.3, help="similarity below which a pair is unmatched")
    p.add_argument("--json", action="store_true")
    return parser


# -- train -------------------------------------------------------------------


def cmd_train(args) -> int:
    if args.synthetic:
        config = SyntheticConfig() if args.synthetic == "default" else load_synthetic_config(_existing(args.synthetic))
        examples, table = generate_synthetic(config)
        n_pos = sum(ex.label for ex in examples)
        n_neg = len(examples) - n_pos
        spec = SplitSpec(n_pos // 10, n_neg // 10, n_pos // 10, n_neg // 10, seed=args.seed)
        train_set, dev_set, test_set = split(examples, spec)
    else:
        if args.train is None or args.embeddings is None:
            raise UsageError("train needs --train and --embeddings (or --synthetic)")
        train_set = load_pairs(_existing(args.train))
        dev_set = load_pairs(_existing(args.dev)) if args.dev else None
        test_set = load_pairs(_existing(args.test)) if args.test else None
        vocab = {tok for ds in (train_set, dev_set or [], test_set or []) for ex in ds for tok in ex.source + ex.target}
        table = load_embeddings(_existing(args.embeddings), vocabulary=vocab)
        logger.info("embedding OOV rate %.3f", table.oov_rate(ex.source + ex.target for ex in train_set))

    history_path = args.history or args.checkpoint.with_name(args.checkpoint.name + ".history.jsonl")
    est = HungarianParaphraseClassifier(
        embeddings=table,
        hidden_size=args.hidden,
        batch_size=args.batch,
        max_epochs=args.epochs,
        patience=args.patience,
        random_state=args.seed,
    )
    X = [(ex.source, ex.target) for ex in train_set]
    y = [ex.label for ex in train_set]
    eval_set = ([(ex.source, ex.target) for ex in dev_set], [ex.label for ex in dev_set]) if dev_set else None
    with history_path.open("w", encoding="utf-8") as hist:
        est.fit(X, y, eval_set=eval_set, on_epoch=lambda rec: (hist.write(rec.to_json() + "\n"), hist.flush()))
    est.save(args.checkpoint)

    print(f"epochs {len(est.history_)} best_epoch {est.best_epoch_}")
    print(f"dev_accuracy {est.threshold_.dev_accuracy:.4f} threshold {est.threshold_.cut:.6f}")
    if test_set:
        acc = est.score([(ex.source, ex.target) for ex in test_set], [ex.label for ex in test_set])
        print(f"test_accuracy {acc:.4f}")
    print(f"checkpoint {args.checkpoint}")
    return 0


# -- eval / score --------------------------------------------------------------


def cmd_eval(args) -> int:
    est = _load(args.checkpoint)
    if args.dev:
        dev = load_pairs(_existing(args.dev), lowercase=est.lowercase, max_length=est.max_length)
        est.calibrate([(ex.source, ex.target) for ex in dev], [ex.label for ex in dev])
    test = load_pairs(_existing(args.test), lowercase=est.lowercase, max_length=est.max_length)
    scores = est.decision_function([(ex.source, ex.target) for ex in test])
    correct = 0
    for ex, y in zip(test, scores):
        label = predict(float(y), est.threshold_)
        correct += label == ex.label
        if args.json:
            print(json.dumps({"id": ex.id, "y": float(y), "predicted": label, "gold": ex.label}))
    summary = {"accuracy": correct / len(test), "correct": correct, "total": len(test), "threshold": est.threshold_.cut}
    if args.json:
        print(json.dumps(summary))
    else:
        print(f"accuracy {summary['accuracy']:.4f} ({correct}/{len(test)}) threshold {est.threshold_.cut:.6f}")
    return 0


def cmd_score(args) -> int:
    est = _load(args.checkpoint)
    (scored,) = est.score_pairs([(args.source, args.target)])
    label = predict(scored.value, est.threshold_)
    if args.json:
        print(json.dumps({"y": scored.value, "label": label, "threshold": est.threshold_.cut}))
    else:
        print(f"y {scored.value:.6f} label {'paraphrase' if label else 'non-paraphrase'}")
    return 0


# -- align ---------------------------------------------------------------------


def alignment_report(est: HungarianParaphraseClassifier, source, target, cut: float = 0.3) -> dict:
    """Aligned pairs classed matched/unmatched by ``cut``, plus leftover tokens."""
    ((p, q),) = check_pair_input([(source, target)], est.lowercase, est.max_length)
    (scored,) = est.score_pairs([(p, q)])
    alignment = scored.alignment
    unmatched = mark_unmatched(alignment, cut)
    rows = []
    for (g, h), m, alpha, flag in zip(alignment.pairs, alignment.m.value, scored.weighted.alpha.value, unmatched):
        rows.append(
            {
                "source_index": g,
                "target_index": h,
                "source": p[g],
                "target": q[h],
                "m": float(m),
                "alpha": float(alpha),
                "class": "unmatched" if flag else "matched",
            }
        )
    used_src = {g for g, _ in alignment.pairs}
    used_tgt = {h for _, h in alignment.pairs}
    for i, tok in enumerate(p):
        if i not in used_src:
            rows.append({"source_index": i, "target_index": None, "source": tok, "target": None, "m": None, "alpha": None, "class": "unaligned"})
    for j, tok in enumerate(q):
        if j not in used_tgt:
            rows.append({"source_index": None, "target_index": j, "source": None, "target": tok, "m": None, "alpha": None, "class": "unaligned"})
    label = predict(scored.value, est.threshold_)
    return {
        "source": list(p),
        "target": list(q),
        "rows": rows,
        "y": scored.value,
        "label": label,
        "threshold": est.threshold_.cut,
        "cut": cut,
        "r_p": scored.r_p.value.tolist(),
        "r_q": scored.r_q.value.tolist(),
    }


def format_report(report: dict) -> str:
    header = ("source", "target", "m", "alpha", "class")
    body = []
    for r in report["rows"]:
        body.append(
            (
                r["source"] or "-",
                r["target"] or "-",
                "-" if r["m"] is None else f"{r['m']:+.4f}",
                "-" if r["alpha"] is None else f"{r['alpha']:.4f}",
                r["class"],
            )
        )
    widths = [max(len(str(x)) for x in col) for col in zip(header, *body)]
    lines = ["  ".join(str(x).ljust(w) for x, w in zip(row, widths)).rstrip() for row in [header, *body]]
    verdict = "paraphrase" if report["label"] else "non-paraphrase"
    lines.append(f"y {report['y']:+.6f}  label {verdict}  (threshold {report['threshold']:+.4f}, cut {report['cut']})")
    return "\n".join(lines)


def cmd_align(args) -> int:
    est = _load(args.checkpoint)
    if args.pairs:
        items = [(ex.source, ex.target) for ex in load_pairs(_existing(args.pairs), lowercase=est.lowercase)]
    elif args.source is not None and args.target is not None:
        items = [(args.source, args.target)]
    else:
        raise UsageError("align needs SOURCE and TARGET sentences or --pairs")
    for k, (p, q) in enumerate(items):
        report = alignment_report(est, p, q, args.cut)
        if args.json:
            print(json.dumps(report))
        else:
            if k:
                print()
            print(format_report(report))
    return 0


# -- plumbing --------------------------------------------------------------------


def _existing(path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"no such file: {path}")
    return path


def _load(path) -> HungarianParaphraseClassifier:
    return HungarianParaphraseClassifier.load(_existing(path))


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "score": cmd_score, "align": cmd_align}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, CheckpointError, FileNotFoundError, ValueError) as exc:
        print(f"hungalign {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except TrainingDiverged as exc:
        print(f"hungalign {args.command}: training diverged: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        logger.exception("internal failure")
        print(f"hungalign {args.command}: internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
