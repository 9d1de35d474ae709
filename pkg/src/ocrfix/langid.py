"""Character n-gram language identification.

A multinomial logistic-regression classifier over hashed character n-gram
counts. Each line becomes a bag of n-grams (``min_n``..``max_n``, over the
line padded with a space on each side), hashed with 64-bit FNV-1a into a
fixed-size feature space and scaled to unit L2 norm. Training is
plain SGD on the logistic loss; each update uses the gradient averaged over a
mini-batch (batch size 1 by default), in a seeded shuffle order.
"""

from __future__ import annotations

import json
import math
import struct
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .docmodel import Document, PathLike, nfc
from .errors import DegenerateCorpusWarning, EmptyInput, InsufficientData, ParseError, VersionMismatch

FORMAT_VERSION = 1
MAGIC = b"OCRFIXLID\0"
HASH_ID = "fnv1a64"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


@lru_cache(maxsize=1 << 18)
def _bucket(gram: str, dimension: int) -> int:
    return fnv1a64(gram.encode("utf-8")) % dimension


def char_ngrams(text: str, min_n: int, max_n: int) -> list[str]:
    padded = f" {text} "
    grams = []
    for n in range(min_n, max_n + 1):
        grams.extend(padded[i : i + n] for i in range(len(padded) - n + 1))
    return grams


def featurize(text: str, min_n: int, max_n: int, dimension: int) -> dict[int, float]:
    """Unit-norm hashed n-gram counts for one line, as {bucket: weight}."""
    counts: dict[int, float] = {}
    for g in char_ngrams(nfc(text.strip()), min_n, max_n):
        b = _bucket(g, dimension)
        counts[b] = counts.get(b, 0.0) + 1.0
    norm = math.sqrt(sum(c * c for c in counts.values())) or 1.0
    return {b: c / norm for b, c in sorted(counts.items())}


def _matrix(texts: Sequence[str], min_n: int, max_n: int, dimension: int) -> sparse.csr_matrix:
    indptr, indices, data = [0], [], []
    for t in texts:
        feats = featurize(t, min_n, max_n, dimension)
        indices.extend(feats.keys())
        data.extend(feats.values())
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(len(texts), dimension),
    )


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class LangIdModel:
    labels: list[str]
    weights: np.ndarray  # (n_labels, dimension)
    bias: np.ndarray  # (n_labels,)
    min_n: int = 1
    max_n: int = 4
    metadata: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.weights.shape[1]

    def logits(self, text: str) -> np.ndarray:
        feats = featurize(text, self.min_n, self.max_n, self.dimension)
        idx = np.fromiter(feats.keys(), dtype=np.int64, count=len(feats))
        val = np.fromiter(feats.values(), dtype=np.float64, count=len(feats))
        return self.weights[:, idx] @ val + self.bias


@dataclass(frozen=True)
class TrainConfig:
    min_n: int = 1
    max_n: int = 4
    dimension: int = 1 << 18
    epochs: int = 10
    learning_rate: float = 0.1
    batch_size: int = 1
    seed: int = 0


def train(corpus: Iterable[tuple[str, str]], config: TrainConfig = TrainConfig()) -> LangIdModel:
    """Fit a classifier on ``(text, label)`` pairs.

    Labels are ordered by first appearance in the corpus.
    """
    pairs = [(nfc(t), lab) for t, lab in corpus]
    if any(not t.strip() for t, _ in pairs):
        raise ValueError("corpus contains an empty line")
    labels: list[str] = []
    for _, lab in pairs:
        if lab not in labels:
            labels.append(lab)
    if len(labels) < 2:
        raise InsufficientData(f"need at least 2 labels, got {labels}")
    by_label = {lab: sorted({t for t, l2 in pairs if l2 == lab}) for lab in labels}
    if all(by_label[lab] == by_label[labels[0]] for lab in labels):
        warnings.warn("all labels share identical texts", DegenerateCorpusWarning, stacklevel=2)

    texts = [t for t, _ in pairs]
    y = np.array([labels.index(lab) for _, lab in pairs])
    X = _matrix(texts, config.min_n, config.max_n, config.dimension)
    L = len(labels)
    W = np.zeros((L, config.dimension))
    b = np.zeros(L)
    onehot = np.eye(L)
    rng = np.random.default_rng(config.seed)
    bs = max(1, config.batch_size)
    for _ in range(config.epochs):
        order = rng.permutation(len(pairs))
        for start in range(0, len(order), bs):
            rows = order[start : start + bs]
            spans = [(X.indptr[r], X.indptr[r + 1]) for r in rows]
            idx = np.concatenate([X.indices[a:z] for a, z in spans])
            cols, inverse = np.unique(idx, return_inverse=True)
            dense = np.zeros((len(rows), len(cols)))  # (B, k)
            which = np.repeat(np.arange(len(rows)), [z - a for a, z in spans])
            np.add.at(dense, (which, inverse), np.concatenate([X.data[a:z] for a, z in spans]))
            p = _softmax(dense @ W[:, cols].T + b)
            err = (p - onehot[y[rows]]) / len(rows)  # (B, L)
            W[:, cols] -= config.learning_rate * (err.T @ dense)
            b -= config.learning_rate * err.sum(axis=0)

    pred = np.argmax(X @ W.T + b, axis=1)
    accuracy = float(np.mean(pred == y))
    meta = {
        "seed": config.seed,
        "epochs": config.epochs,
        "learning_rate": config.learning_rate,
        "batch_size": bs,
        "hash": HASH_ID,
        "train_accuracy": accuracy,
        "n_examples": len(pairs),
    }
    return LangIdModel(labels, W, b, config.min_n, config.max_n, meta)


def predict_line(model: LangIdModel, text: str) -> tuple[str, dict[str, float]]:
    if not text or not text.strip():
        raise EmptyInput("cannot identify the language of an empty line")
    probs = _softmax(model.logits(text))
    # np.argmax returns the first maximum, i.e. ties go to the earlier label
    best = int(np.argmax(probs))
    return model.labels[best], {lab: float(p) for lab, p in zip(model.labels, probs)}


MIN_TOKEN_CHARS = 4


def predict_token(model: LangIdModel, token: str, context_line: str) -> str:
    """Label a single token, falling back to the line label for short tokens."""
    if not token:
        raise EmptyInput("empty token")
    if len(token) >= MIN_TOKEN_CHARS:
        return predict_line(model, token)[0]
    return predict_line(model, context_line)[0]


def label_document(model: LangIdModel, doc: Document) -> Document:
    """Set ``lang`` on every token using :func:`predict_token`."""
    pages = []
    for page in doc.pages:
        lines = []
        for line in page.lines:
            if not line.tokens:
                lines.append(line)
                continue
            text = line.text
            line_label = predict_line(model, text)[0]
            tokens = tuple(
                replace(
                    t,
                    lang=line_label if len(t.text) < MIN_TOKEN_CHARS else predict_line(model, t.text)[0],
                )
                for t in line.tokens
            )
            lines.append(replace(line, tokens=tokens))
        pages.append(replace(page, lines=tuple(lines)))
    return replace(doc, pages=tuple(pages))


# -- persistence ---------------------------------------------------------------


def model_to_bytes(model: LangIdModel) -> bytes:
    header = {
        "version": FORMAT_VERSION,
        "labels": model.labels,
        "min_n": model.min_n,
        "max_n": model.max_n,
        "dimension": model.dimension,
        "hash": HASH_ID,
        "metadata": model.metadata,
    }
    hbytes = json.dumps(header, sort_keys=True, ensure_ascii=False).encode("utf-8")
    payload = np.ascontiguousarray(model.weights, dtype="<f8").tobytes()
    payload += np.ascontiguousarray(model.bias, dtype="<f8").tobytes()
    return MAGIC + struct.pack("<I", len(hbytes)) + hbytes + payload


def model_from_bytes(raw: bytes) -> LangIdModel:
    if not raw.startswith(MAGIC) or len(raw) < len(MAGIC) + 4:
        raise ParseError("not a language-identification model file")
    pos = len(MAGIC)
    (hlen,) = struct.unpack_from("<I", raw, pos)
    pos += 4
    try:
        header = json.loads(raw[pos : pos + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"corrupt model header: {exc}") from exc
    if not isinstance(header, dict) or "version" not in header:
        raise ParseError("model header lacks a version")
    if header["version"] != FORMAT_VERSION:
        raise VersionMismatch(f"model format version {header['version']!r}, expected {FORMAT_VERSION}")
    if header.get("hash") != HASH_ID:
        raise ParseError(f"unsupported hash function {header.get('hash')!r}")
    pos += hlen
    L, D = len(header["labels"]), int(header["dimension"])
    expected = 8 * (L * D + L)
    if len(raw) - pos != expected:
        raise ParseError(f"model payload is {len(raw) - pos} bytes, expected {expected}")
    w = np.frombuffer(raw, dtype="<f8", count=L * D, offset=pos).reshape(L, D).astype(np.float64)
    b = np.frombuffer(raw, dtype="<f8", count=L, offset=pos + 8 * L * D).astype(np.float64)
    return LangIdModel(list(header["labels"]), w, b, int(header["min_n"]), int(header["max_n"]), header.get("metadata", {}))


def save_model(model: LangIdModel, path: PathLike) -> None:
    Path(path).write_bytes(model_to_bytes(model))


def load_model(path: PathLike) -> LangIdModel:
    return model_from_bytes(Path(path).read_bytes())


# -- corpus files ----------------------------------------------------------------

_LABEL_PREFIX = "__label__"


def read_corpus(path: PathLike) -> list[tuple[str, str]]:
    """Read ``__label__<code>\\t<text>`` lines into (text, label) pairs."""
    pairs = []
    for no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not raw.strip():
            continue
        head, sep, text = raw.partition("\t")
        if not sep or not head.startswith(_LABEL_PREFIX) or len(head) == len(_LABEL_PREFIX):
            raise ParseError(f"{path}:{no}: expected '__label__<code><TAB><text>'")
        if not text.strip():
            raise ParseError(f"{path}:{no}: empty text")
        pairs.append((nfc(text), head[len(_LABEL_PREFIX) :]))
    return pairs


def write_corpus(pairs: Iterable[tuple[str, str]], path: PathLike) -> None:
    lines = [f"{_LABEL_PREFIX}{lab}\t{text}\n" for text, lab in pairs]
    Path(path).write_text("".join(lines), encoding="utf-8")
