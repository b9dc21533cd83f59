"""Pair corpora: TSV I/O, tokenization, dev/test splitting and a synthetic task."""

from __future__ import annotations

import configparser
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .encoder import EmbeddingTable

__all__ = [
    "PairExample",
    "SplitSpec",
    "SyntheticConfig",
    "generate_synthetic",
    "load_pairs",
    "load_synthetic_config",
    "prepare_tokens",
    "split",
    "tokenize",
    "write_pairs",
]

logger = logging.getLogger(__name__)

MAX_LENGTH = 100


@dataclass(frozen=True)
class PairExample:
    id: str
    source: tuple[str, ...]
    target: tuple[str, ...]
    label: int  # 1 paraphrase, 0 non-paraphrase

    def __post_init__(self):
        if not self.source or not self.target:
            raise ValueError(f"pair {self.id!r}: empty sentence")
        if self.label not in (0, 1):
            raise ValueError(f"pair {self.id!r}: label must be 0 or 1, got {self.label!r}")


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    """Whitespace split, optionally lowercased.

    >>> tokenize("What is your review")
    ['what', 'is', 'your', 'review']
    """
    tokens = text.split()
    return [t.lower() for t in tokens] if lowercase else tokens


def prepare_tokens(sentence, lowercase: bool = True, max_length: int = MAX_LENGTH) -> tuple[str, ...]:
    """Tokenize a raw string (token sequences pass through) and truncate."""
    tokens = tokenize(sentence, lowercase) if isinstance(sentence, str) else [str(t) for t in sentence]
    if len(tokens) > max_length:
        logger.warning("truncating sentence of %d tokens to %d", len(tokens), max_length)
        tokens = tokens[:max_length]
    return tuple(tokens)


def _parse_label(raw: str) -> int | None:
    raw = raw.strip()
    return int(raw) if raw in ("0", "1") else None


def load_pairs(path, strict: bool = False, lowercase: bool = True, max_length: int = MAX_LENGTH) -> list[PairExample]:
    """Read ``id<TAB>question1<TAB>question2<TAB>label`` rows.

    The six-column Quora dump layout (id, qid1, qid2, question1, question2,
    is_duplicate) is accepted as well.  A first line whose label field is
    not an integer is taken as a header.  Malformed rows are logged with
    their line numbers and skipped, or raise under ``strict``.
    """
    path = Path(path)
    examples = []
    with path.open(encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) == 6:
                cols = [cols[0], cols[3], cols[4], cols[5]]
            if lineno == 1 and len(cols) == 4 and not cols[3].strip().lstrip("-").isdigit():
                continue
            problem = None
            if len(cols) != 4:
                problem = f"expected 4 tab-separated fields, got {len(cols)}"
            else:
                label = _parse_label(cols[3])
                source = prepare_tokens(cols[1], lowercase, max_length)
                target = prepare_tokens(cols[2], lowercase, max_length)
                if label is None:
                    problem = f"label must be 0 or 1, got {cols[3]!r}"
                elif not source or not target:
                    problem = "empty sentence"
            if problem:
                if strict:
                    raise ValueError(f"{path}:{lineno}: {problem}")
                logger.warning("%s:%d: skipping row: %s", path, lineno, problem)
                continue
            examples.append(PairExample(cols[0], source, target, label))
    if not examples:
        raise ValueError(f"{path}: no valid pairs")
    return examples


def write_pairs(path, examples: Sequence[PairExample], header: bool = True) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        if header:
            fh.write("id\tquestion1\tquestion2\tis_duplicate\n")
        for ex in examples:
            fh.write(f"{ex.id}\t{' '.join(ex.source)}\t{' '.join(ex.target)}\t{ex.label}\n")


@dataclass(frozen=True)
class SplitSpec:
    dev_pos: int = 5000
    dev_neg: int = 5000
    test_pos: int = 5000
    test_neg: int = 5000
    seed: int = 0


def split(examples: Sequence[PairExample], spec: SplitSpec) -> tuple[list, list, list]:
    """Sample class-balanced dev and test sets; the rest is training data."""
    ids = [ex.id for ex in examples]
    if len(set(ids)) != len(ids):
        raise ValueError("example ids must be unique")
    rng = np.random.default_rng(spec.seed)
    pos = [i for i, ex in enumerate(examples) if ex.label == 1]
    neg = [i for i, ex in enumerate(examples) if ex.label == 0]
    if len(pos) < spec.dev_pos + spec.test_pos:
        raise ValueError(f"need {spec.dev_pos + spec.test_pos} paraphrases, corpus has {len(pos)}")
    if len(neg) < spec.dev_neg + spec.test_neg:
        raise ValueError(f"need {spec.dev_neg + spec.test_neg} non-paraphrases, corpus has {len(neg)}")
    pos = rng.permutation(pos)
    neg = rng.permutation(neg)
    dev_idx = set(pos[: spec.dev_pos]) | set(neg[: spec.dev_neg])
    test_idx = set(pos[spec.dev_pos : spec.dev_pos + spec.test_pos]) | set(neg[spec.dev_neg : spec.dev_neg + spec.test_neg])
    # keep corpus order inside every split
    dev = [ex for i, ex in enumerate(examples) if i in dev_idx]
    test = [ex for i, ex in enumerate(examples) if i in test_idx]
    train = [ex for i, ex in enumerate(examples) if i not in dev_idx and i not in test_idx]
    return train, dev, test


# -- synthetic task ----------------------------------------------------------


DEFAULT_CLUSTERS = {
    "happy": ["happy", "glad", "joyful", "cheerful"],
    "sad": ["sad", "unhappy", "gloomy", "miserable"],
    "big": ["big", "large", "huge", "giant"],
    "small": ["small", "little", "tiny", "minor"],
    "fast": ["fast", "quick", "rapid", "speedy"],
    "slow": ["slow", "sluggish", "leisurely", "unhurried"],
    "hot": ["hot", "warm", "heated", "boiling"],
    "cold": ["cold", "chilly", "icy", "freezing"],
    "start": ["start", "begin", "launch", "commence"],
    "stop": ["stop", "end", "halt", "finish"],
    "buy": ["buy", "purchase", "acquire", "obtain"],
    "sell": ["sell", "vend", "trade", "auction"],
}
DEFAULT_ANTONYMS = [("happy", "sad"), ("big", "small"), ("fast", "slow"), ("hot", "cold"), ("start", "stop"), ("buy", "sell")]


@dataclass
class SyntheticConfig:
    """Synonym clusters, antonym cluster pairs and sampling settings."""

    clusters: dict[str, list[str]] = field(default_factory=lambda: {k: list(v) for k, v in DEFAULT_CLUSTERS.items()})
    antonyms: list[tuple[str, str]] = field(default_factory=lambda: list(DEFAULT_ANTONYMS))
    pairs: int = 2000
    min_length: int = 4
    max_length: int = 7
    dim: int = 24
    noise: float = 0.2
    seed: int = 0

    def validate(self) -> None:
        if self.pairs < 0:
            raise ValueError("pairs must be >= 0")
        if not 1 <= self.min_length <= self.max_length:
            raise ValueError("need 1 <= min_length <= max_length")
        if not 0 <= self.noise < 0.3:
            raise ValueError("noise must lie in [0, 0.3) to keep cluster cosines separated")
        if self.dim < 2 * len(self.clusters):
            raise ValueError(f"dim must be at least twice the number of clusters ({2 * len(self.clusters)})")
        seen = set()
        for name, members in self.clusters.items():
            if len(members) < 2:
                raise ValueError(f"cluster {name!r} needs at least two tokens")
            for tok in members:
                if tok in seen:
                    raise ValueError(f"token {tok!r} appears in more than one cluster")
                seen.add(tok)
        if not self.antonyms:
            raise ValueError("need at least one antonym pair")
        for a, b in self.antonyms:
            if a not in self.clusters or b not in self.clusters or a == b:
                raise ValueError(f"bad antonym pair ({a!r}, {b!r})")


def load_synthetic_config(path) -> SyntheticConfig:
    """Read an INI file with ``[synthetic]``, ``[clusters]`` and ``[antonyms]`` sections.

    ``[clusters]`` maps a cluster name to its space-separated tokens and
    ``[antonyms]`` maps a cluster name to its conflicting cluster.
    """
    parser = configparser.ConfigParser()
    with Path(path).open(encoding="utf-8") as fh:
        parser.read_file(fh)
    cfg = SyntheticConfig()
    if parser.has_section("synthetic"):
        sec = parser["synthetic"]
        cfg.pairs = sec.getint("pairs", cfg.pairs)
        cfg.min_length = sec.getint("min_length", cfg.min_length)
        cfg.max_length = sec.getint("max_length", cfg.max_length)
        cfg.dim = sec.getint("dim", cfg.dim)
        cfg.noise = sec.getfloat("noise", cfg.noise)
        cfg.seed = sec.getint("seed", cfg.seed)
    if parser.has_section("clusters"):
        cfg.clusters = {name: value.split() for name, value in parser["clusters"].items()}
    if parser.has_section("antonyms"):
        cfg.antonyms = [(name, value.strip()) for name, value in parser["antonyms"].items()]
    cfg.validate()
    return cfg


def synthetic_embeddings(config: SyntheticConfig) -> EmbeddingTable:
    """One orthonormal direction per cluster plus noise in a disjoint subspace.

    Any two members of a cluster then have cosine >= (1 - s^2) / (1 + s^2)
    and members of different clusters at most s^2 / (1 + s^2), where
    ``s`` is the noise norm.
    """
    rng = np.random.default_rng([config.seed, 1])
    k = len(config.clusters)
    basis, _ = np.linalg.qr(rng.normal(size=(config.dim, config.dim)))
    centres, noise_basis = basis[:, :k].T, basis[:, k:].T
    tokens, vectors = [], []
    for c, members in enumerate(config.clusters.values()):
        for tok in members:
            direction = rng.normal(size=noise_basis.shape[0]) @ noise_basis
            direction *= config.noise / np.linalg.norm(direction)
            tokens.append(tok)
            vectors.append(centres[c] + direction)
    return EmbeddingTable(tokens, np.array(vectors))


def generate_synthetic(config: SyntheticConfig | None = None) -> tuple[list[PairExample], EmbeddingTable]:
    """Class-balanced pairs whose label hinges on one substituted slot.

    The target is a shuffled copy of a sampled base sentence with one token
    replaced, by a synonym (paraphrase) or by a member of the antonym
    cluster (non-paraphrase).
    """
    config = config or SyntheticConfig()
    config.validate()
    table = synthetic_embeddings(config)
    rng = np.random.default_rng(config.seed)
    names = list(config.clusters)
    opposite = {}
    for a, b in config.antonyms:
        opposite.setdefault(a, []).append(b)
        opposite.setdefault(b, []).append(a)
    slot_clusters = [n for n in names if n in opposite]

    examples = []
    for n in range(config.pairs):
        label = 1 if n % 2 == 0 else 0
        length = int(rng.integers(config.min_length, config.max_length + 1))
        # substituted slot comes from a cluster with an antonym; the others from any cluster
        slot = int(rng.integers(length))
        clusters = [names[int(i)] for i in rng.integers(len(names), size=length)]
        clusters[slot] = slot_clusters[int(rng.integers(len(slot_clusters)))]
        base = [config.clusters[c][int(rng.integers(len(config.clusters[c])))] for c in clusters]
        swapped = list(base)
        members = config.clusters[clusters[slot]]
        if label == 1:
            choices = [t for t in members if t != base[slot]]
        else:
            foe = opposite[clusters[slot]][int(rng.integers(len(opposite[clusters[slot]])))]
            choices = config.clusters[foe]
        swapped[slot] = choices[int(rng.integers(len(choices)))]
        target = [swapped[i] for i in rng.permutation(length)]
        examples.append(PairExample(f"syn{n}", tuple(base), tuple(target), label))
    return examples, table
