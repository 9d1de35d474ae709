"""Character Error Rate and Structural Error Rate.

CER is the unit-cost Levenshtein distance between NFC strings (whitespace
runs collapsed to one space) divided by the reference length.

SER compares the line structure of a page with its reference. Lines are first
matched one-to-one by maximum total similarity (``1 - cer`` clipped at 0,
pairs below a threshold excluded). Unmatched hypothesis lines count as
insertions, unmatched reference lines as deletions, and matched lines outside
a longest increasing subsequence of reference positions are grouped into
maximal move blocks. The weighted operation count is scaled by the number of
reference lines and clipped to [0, 100].
"""

from __future__ import annotations

import json
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .docmodel import Document, nfc
from .errors import EmptyReference, PageCountMismatch

_SMALL = 4096  # below this many DP cells the pure-Python loop is faster


def normalize(text: str) -> str:
    return " ".join(nfc(text).split())


def _lev_small(a: str, b: str) -> int:
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _lev_numpy(a: str, b: str) -> int:
    # row recurrence with the in-row insertion chain solved by a running minimum:
    # d[j] = min_k<=j (t[k] + j - k) = j + cummin(t[k] - k)
    bv = np.frombuffer(b.encode("utf-32-le"), dtype=np.uint32)
    m = len(bv)
    ramp = np.arange(m + 1)
    prev = ramp.copy()
    for i, ca in enumerate(a, 1):
        t = np.empty(m + 1, dtype=np.int64)
        t[0] = i
        t[1:] = np.minimum(prev[1:] + 1, prev[:-1] + (bv != ord(ca)))
        prev = np.minimum.accumulate(t - ramp) + ramp
    return int(prev[-1])


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    if len(a) * len(b) <= _SMALL:
        return _lev_small(a, b)
    return _lev_numpy(a, b)


def cer(hyp: str, ref: str) -> float:
    ref = normalize(ref)
    if not ref:
        raise EmptyReference("reference text is empty")
    return levenshtein(normalize(hyp), ref) / len(ref)


def similarity(hyp: str, ref: str) -> float:
    if not normalize(ref):
        return 1.0 if not normalize(hyp) else 0.0
    return max(0.0, 1.0 - cer(hyp, ref))


@dataclass(frozen=True)
class SerWeights:
    w_insert: float = 1.0
    w_delete: float = 1.0
    w_move: float = 1.0
    threshold: float = 0.5

    def __post_init__(self):
        if min(self.w_insert, self.w_delete, self.w_move) < 0:
            raise ValueError("SER weights must be non-negative")
        if not 0 < self.threshold <= 1:
            raise ValueError("threshold must lie in (0, 1]")


_TOL = 1e-9


def _best_value(w: np.ndarray, rows: list, cols: list) -> tuple[float, dict]:
    if not rows or not cols:
        return 0.0, {}
    sub = w[np.ix_(rows, cols)]
    r, c = linear_sum_assignment(sub, maximize=True)
    pairs = {rows[i]: cols[j] for i, j in zip(r, c) if sub[i, j] > 0}
    return float(sub[r, c].sum()), pairs


def align_lines(hyp: Sequence[str], ref: Sequence[str], threshold: float = 0.5) -> list[tuple[int, int]]:
    """Maximum-similarity one-to-one matching of hypothesis and reference lines.

    Among optimal matchings the one whose sorted pair list is
    lexicographically smallest is returned.
    """
    nh, nr = len(hyp), len(ref)
    if not nh or not nr:
        return []
    sim = np.array([[similarity(h, r) for r in ref] for h in hyp], dtype=np.float64)
    w = np.where(sim >= threshold, sim, 0.0)
    allowed = w > 0

    free_cols = list(range(nr))
    fixed: list[tuple[int, int]] = []
    fixed_value = 0.0
    target, current = _best_value(w, list(range(nh)), free_cols)
    for h in range(nh):
        rest = list(range(h + 1, nh))
        cands = [r for r in free_cols if allowed[h, r]]
        chosen = None
        for r in cands:
            if current.get(h) == r:
                chosen = r
                break
            cols = [c for c in free_cols if c != r]
            value, pairs = _best_value(w, rest, cols)
            if fixed_value + w[h, r] + value >= target - _TOL:
                chosen, current = r, {h: r, **pairs}
                break
        if chosen is None:
            if h in current:
                # optimum without h exists (otherwise the loop would have chosen)
                _, current = _best_value(w, rest, free_cols)
            continue
        fixed.append((h, chosen))
        fixed_value += w[h, chosen]
        free_cols.remove(chosen)
    return fixed


def _lis_positions(seq: Sequence[int]) -> set:
    """Positions of one longest strictly increasing subsequence."""
    tails: list[int] = []
    tail_pos: list[int] = []
    parent = [-1] * len(seq)
    for i, v in enumerate(seq):
        k = bisect_left(tails, v)
        if k == len(tails):
            tails.append(v)
            tail_pos.append(i)
        else:
            tails[k] = v
            tail_pos[k] = i
        parent[i] = tail_pos[k - 1] if k else -1
    out = set()
    i = tail_pos[-1] if tail_pos else -1
    while i >= 0:
        out.add(i)
        i = parent[i]
    return out


@dataclass(frozen=True)
class SerCounts:
    insertions: int
    deletions: int
    moves: int


def ser(hyp: Sequence[str], ref: Sequence[str], weights: SerWeights = SerWeights()) -> tuple[float, SerCounts]:
    if not ref:
        raise EmptyReference("reference page has no lines")
    matching = align_lines(hyp, ref, weights.threshold)
    ins = len(hyp) - len(matching)
    dels = len(ref) - len(matching)
    ref_seq = [r for _, r in sorted(matching)]
    keep = _lis_positions(ref_seq)
    blocks = 0
    prev = None
    for p, r in enumerate(ref_seq):
        if p in keep:
            prev = None
            continue
        if prev is None or prev != (p - 1, r - 1):
            blocks += 1
        prev = (p, r)
    raw = weights.w_insert * ins + weights.w_delete * dels + weights.w_move * blocks
    score = min(100.0, 100.0 * raw / len(ref))
    return score, SerCounts(ins, dels, blocks)


# -- document reports -----------------------------------------------------------


@dataclass(frozen=True)
class PageEval:
    page: int
    cer: float
    ser: float
    counts: SerCounts
    distance: int
    ref_chars: int


@dataclass
class EvalReport:
    pages: list = field(default_factory=list)

    @property
    def corpus_cer(self) -> float:
        total = sum(p.ref_chars for p in self.pages)
        return sum(p.distance for p in self.pages) / total if total else 0.0

    @property
    def mean_ser(self) -> float:
        return sum(p.ser for p in self.pages) / len(self.pages) if self.pages else 0.0

    @property
    def totals(self) -> SerCounts:
        return SerCounts(
            sum(p.counts.insertions for p in self.pages),
            sum(p.counts.deletions for p in self.pages),
            sum(p.counts.moves for p in self.pages),
        )

    def to_json(self) -> dict:
        return {
            "pages": [
                {
                    "page": p.page,
                    "cer": p.cer,
                    "ser": p.ser,
                    "ops": {"ins": p.counts.insertions, "del": p.counts.deletions, "moves": p.counts.moves},
                }
                for p in self.pages
            ],
            "corpus_cer": self.corpus_cer,
            "mean_ser": self.mean_ser,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"


def report(hyp_doc: Document, ref_doc: Document, weights: SerWeights = SerWeights()) -> EvalReport:
    if len(hyp_doc.pages) != len(ref_doc.pages):
        raise PageCountMismatch(f"hypothesis has {len(hyp_doc.pages)} pages, reference {len(ref_doc.pages)}")
    hyp_pages = {p.page_number: p for p in hyp_doc.pages}
    out = EvalReport()
    for ref_page in ref_doc.pages:
        hyp_page = hyp_pages.get(ref_page.page_number)
        if hyp_page is None:
            raise PageCountMismatch(f"hypothesis lacks page {ref_page.page_number}")
        hyp_lines, ref_lines = hyp_page.line_texts(), ref_page.line_texts()
        ref_text = normalize("\n".join(ref_lines))
        if not ref_text:
            raise EmptyReference(f"reference page {ref_page.page_number} is empty")
        dist = levenshtein(normalize("\n".join(hyp_lines)), ref_text)
        score, counts = ser(hyp_lines, ref_lines, weights)
        out.pages.append(PageEval(ref_page.page_number, dist / len(ref_text), score, counts, dist, len(ref_text)))
    return out


def format_table(rows: dict) -> str:
    """Plain-text table of corpus CER and mean SER, one row per named report."""
    width = max([len(name) for name in rows] + [4])
    lines = [f"{'':<{width}}  {'CER':>6}  {'SER':>6}"]
    for name, rep in rows.items():
        lines.append(f"{name:<{width}}  {rep.corpus_cer:>6.2f}  {rep.mean_ser:>6.1f}")
    return "\n".join(lines) + "\n"
