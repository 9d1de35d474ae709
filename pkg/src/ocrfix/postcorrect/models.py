"""Channel and character language models for noisy-channel correction.

Channel convention: the *intended* character is the gold one, the *observed*
character is what the OCR engine produced. Per intended character ``c`` the
outcomes are keep, drop (OCR lost it) and substitution by any observed
character other than ``c``. Spurious OCR characters are modelled per slot
(the gap before each intended character and after the last one): a slot is
either empty or holds one inserted observed character.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from ..docmodel import PathLike, nfc
from ..errors import EmptyTrainingSet, ParseError, VersionMismatch
from .align import DEL, INS, KEEP, SUB, align_pair

FORMAT_VERSION = 1
BOS = "\x02"
EOS = "\x03"


@dataclass(frozen=True)
class TrainingPair:
    src: str
    ref: str

    def __post_init__(self):
        object.__setattr__(self, "src", nfc(self.src))
        object.__setattr__(self, "ref", nfc(self.ref))
        if not self.ref:
            raise ValueError("reference side of a training pair must be non-empty")


def _check_header(obj, kind: str) -> None:
    if not isinstance(obj, dict) or obj.get("format") != kind:
        raise ParseError(f"not a {kind} file")
    if obj.get("version") != FORMAT_VERSION:
        raise VersionMismatch(f"{kind} version {obj.get('version')!r}, expected {FORMAT_VERSION}")


def _read_json(path: PathLike):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


# -- channel -------------------------------------------------------------------


@dataclass
class ChannelModel:
    k: float = 0.1
    keep: Counter = field(default_factory=Counter)
    sub: dict = field(default_factory=lambda: defaultdict(Counter))  # intended -> observed -> n
    drop: Counter = field(default_factory=Counter)  # intended char lost by OCR
    ins: Counter = field(default_factory=Counter)  # spurious observed char
    empty_slots: int = 0
    observed_vocab: frozenset = frozenset()

    @property
    def trained(self) -> bool:
        return bool(self.keep or self.sub or self.drop or self.ins or self.empty_slots)

    @property
    def intended_vocab(self) -> frozenset:
        return self._intended

    def __post_init__(self):
        self._cache: dict = {}
        self._rebuild()

    def _rebuild(self) -> None:
        self._cache.clear()
        self._intended = frozenset(
            [c for c, n in self.keep.items() if n]
            + [c for c, row in self.sub.items() if any(row.values())]
            + [c for c, n in self.drop.items() if n]
        )
        self.sub_sources: dict[str, list[str]] = defaultdict(list)  # observed -> intended
        for c in sorted(self.sub):
            for o in sorted(self.sub[c]):
                if self.sub[c][o] > 0:
                    self.sub_sources[o].append(c)
        self.drop_chars = sorted(c for c, n in self.drop.items() if n > 0)
        self.ins_chars = frozenset(o for o, n in self.ins.items() if n > 0)
        n_ins = sum(self.ins.values())
        z = self.empty_slots + n_ins + self.k * (1 + len(self.observed_vocab))
        self._slot_z = z
        if z <= 0:
            self.log_no_insert = 0.0
        elif self.empty_slots + self.k > 0:
            self.log_no_insert = math.log(self.empty_slots + self.k) - math.log(z)
        else:
            self.log_no_insert = -math.inf

    def _denominator(self, c: str) -> float:
        row = self.sub.get(c)
        total = self.keep[c] + self.drop[c] + (sum(row.values()) if row else 0)
        others = len(self.observed_vocab - {c})
        return total + self.k * (2 + others)

    def distribution(self, c: str) -> dict:
        """Smoothed outcome distribution for intended ``c``.

        Keys are ``"keep"``, ``"drop"`` and ``("sub", o)``. Characters never
        seen as intended map to keep with probability one.
        """
        if c not in self.intended_vocab:
            return {"keep": 1.0}
        z = self._denominator(c)
        row = self.sub.get(c, Counter())
        out = {"keep": (self.keep[c] + self.k) / z, "drop": (self.drop[c] + self.k) / z}
        for o in sorted(self.observed_vocab - {c}):
            out[("sub", o)] = (row.get(o, 0) + self.k) / z
        return out

    def log_emit(self, intended: str, observed: str) -> float:
        """log P(observed | intended) for a keep or substitution."""
        key = ("e", intended, observed)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if intended not in self.intended_vocab:
            lp = 0.0 if intended == observed else -math.inf
        else:
            z = self._denominator(intended)
            if intended == observed:
                num = self.keep[intended] + self.k
            elif observed in self.observed_vocab:
                num = self.sub.get(intended, {}).get(observed, 0) + self.k
            else:
                num = 0.0
            lp = math.log(num) - math.log(z) if num > 0 else -math.inf
        self._cache[key] = lp
        return lp

    def log_drop(self, intended: str) -> float:
        if intended not in self.intended_vocab:
            return -math.inf
        num = self.drop[intended] + self.k
        return math.log(num) - math.log(self._denominator(intended)) if num > 0 else -math.inf

    def log_insert(self, observed: str) -> float:
        num = self.ins.get(observed, 0) + (self.k if observed in self.observed_vocab else 0.0)
        return math.log(num) - math.log(self._slot_z) if num > 0 and self._slot_z > 0 else -math.inf

    # persistence

    def to_json(self) -> dict:
        return {
            "format": "ocrfix-channel",
            "version": FORMAT_VERSION,
            "k": self.k,
            "keep": dict(sorted(self.keep.items())),
            "sub": {c: dict(sorted(row.items())) for c, row in sorted(self.sub.items()) if row},
            "drop": dict(sorted(self.drop.items())),
            "insert": dict(sorted(self.ins.items())),
            "empty_slots": self.empty_slots,
            "observed_vocab": sorted(self.observed_vocab),
        }

    @classmethod
    def from_json(cls, obj) -> "ChannelModel":
        _check_header(obj, "ocrfix-channel")
        try:
            sub = defaultdict(Counter, {c: Counter(row) for c, row in obj["sub"].items()})
            return cls(
                k=float(obj["k"]),
                keep=Counter(obj["keep"]),
                sub=sub,
                drop=Counter(obj["drop"]),
                ins=Counter(obj["insert"]),
                empty_slots=int(obj["empty_slots"]),
                observed_vocab=frozenset(obj["observed_vocab"]),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise ParseError(f"malformed channel model: {exc}") from exc


def train_channel(pairs: Iterable[TrainingPair], k: float = 0.1) -> ChannelModel:
    """Estimate channel counts from the alignments of (OCR, gold) pairs."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyTrainingSet("no training pairs")
    keep, drop, ins = Counter(), Counter(), Counter()
    sub: dict = defaultdict(Counter)
    empty_slots = 0
    observed = set()
    for pair in pairs:
        observed.update(pair.src)
        slot_has_insert = False
        for op in align_pair(pair.src, pair.ref):
            if op.kind == DEL:
                ins[op.src] += 1
                slot_has_insert = True
                continue
            if not slot_has_insert:
                empty_slots += 1
            slot_has_insert = False
            if op.kind == KEEP:
                keep[op.ref] += 1
            elif op.kind == SUB:
                sub[op.ref][op.src] += 1
            elif op.kind == INS:
                drop[op.ref] += 1
        if not slot_has_insert:
            empty_slots += 1
    return ChannelModel(k, keep, sub, drop, ins, empty_slots, frozenset(observed))


def save_channel(model: ChannelModel, path: PathLike) -> None:
    Path(path).write_text(json.dumps(model.to_json(), ensure_ascii=False, indent=1) + "\n", encoding="utf-8")


def load_channel(path: PathLike) -> ChannelModel:
    return ChannelModel.from_json(_read_json(path))


# -- character language model ----------------------------------------------------


@dataclass
class CharLM:
    """Add-k smoothed character n-gram model with begin/end sentinels."""

    order: int = 5
    k: float = 0.01
    counts: dict = field(default_factory=dict)  # context -> {char: n}
    vocab: frozenset = frozenset()

    def __post_init__(self):
        self._totals = {ctx: sum(row.values()) for ctx, row in self.counts.items()}
        self._size = len(self.vocab) + 1  # plus end sentinel
        self._cache: dict = {}

    @property
    def start(self) -> str:
        return BOS * (self.order - 1)

    def advance(self, context: str, ch: str) -> str:
        if self.order == 1:
            return ""
        return (context + ch)[-(self.order - 1) :]

    def logp(self, context: str, ch: str) -> float:
        key = (context, ch)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        row = self.counts.get(context)
        total = self._totals.get(context, 0)
        num = (row.get(ch, 0) if row else 0) + self.k
        den = total + self.k * self._size
        if den <= 0:
            lp = -math.log(self._size)
        elif num <= 0:
            lp = -math.inf
        else:
            lp = math.log(num) - math.log(den)
        self._cache[key] = lp
        return lp

    def prob(self, context: str, ch: str) -> float:
        return math.exp(self.logp(context, ch))

    def score(self, text: str) -> float:
        """Log probability of ``text`` including the end sentinel."""
        ctx, total = self.start, 0.0
        for ch in text:
            total += self.logp(ctx, ch)
            ctx = self.advance(ctx, ch)
        return total + self.logp(ctx, EOS)

    def to_json(self) -> dict:
        return {
            "format": "ocrfix-charlm",
            "version": FORMAT_VERSION,
            "order": self.order,
            "k": self.k,
            "vocab": sorted(self.vocab),
            "counts": {ctx: dict(sorted(row.items())) for ctx, row in sorted(self.counts.items())},
        }

    @classmethod
    def from_json(cls, obj) -> "CharLM":
        _check_header(obj, "ocrfix-charlm")
        try:
            return cls(int(obj["order"]), float(obj["k"]), {c: dict(r) for c, r in obj["counts"].items()}, frozenset(obj["vocab"]))
        except (KeyError, TypeError, AttributeError) as exc:
            raise ParseError(f"malformed language model: {exc}") from exc


def train_lm(corpus: Iterable[str], order: int = 5, k: float = 0.01) -> CharLM:
    texts = [nfc(t) for t in corpus]
    if not texts:
        raise EmptyTrainingSet("empty language-model corpus")
    if order < 1:
        raise ValueError("order must be >= 1")
    counts: dict = defaultdict(Counter)
    vocab = set()
    for text in texts:
        vocab.update(text)
        padded = BOS * (order - 1) + text + EOS
        for i in range(order - 1, len(padded)):
            counts[padded[i - order + 1 : i]][padded[i]] += 1
    return CharLM(order, k, {c: dict(r) for c, r in counts.items()}, frozenset(vocab))


def save_lm(model: CharLM, path: PathLike) -> None:
    Path(path).write_text(json.dumps(model.to_json(), ensure_ascii=False, indent=1) + "\n", encoding="utf-8")


def load_lm(path: PathLike) -> CharLM:
    return CharLM.from_json(_read_json(path))


def read_pairs(path: PathLike) -> list[TrainingPair]:
    """Read a ``src<TAB>ref`` TSV file of training pairs."""
    pairs = []
    for no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not raw:
            continue
        src, sep, ref = raw.partition("\t")
        if not sep or "\t" in ref or not ref:
            raise ParseError(f"{path}:{no}: expected 'src<TAB>ref' with non-empty ref")
        pairs.append(TrainingPair(src, ref))
    return pairs


def write_pairs(pairs: Iterable[TrainingPair], path: PathLike) -> None:
    Path(path).write_text("".join(f"{p.src}\t{p.ref}\n" for p in pairs), encoding="utf-8")
