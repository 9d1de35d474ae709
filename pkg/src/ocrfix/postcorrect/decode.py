"""Beam-search decoding of OCR lines under a noisy-channel objective.

A candidate correction ``w`` of an observed line ``x`` is scored as

    log P_lm(w) + channel_weight * log P_channel(x | w)

where the channel term follows one edit path: every intended character is
kept, substituted or dropped, and every slot between intended characters is
empty or holds one spurious observed character. Hypotheses are grouped by the
number of observed characters consumed; within a group, hypotheses with the
same LM context and slot state are merged (they share all futures) and the
best ``beam_width`` survive. Only edits seen in training are reachable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, NamedTuple, Sequence

from ..docmodel import Document, Token, nfc
from .models import EOS, ChannelModel, CharLM


@dataclass(frozen=True)
class BeamConfig:
    beam_width: int = 8
    channel_weight: float = 1.0
    max_insertions: int = 1

    def __post_init__(self):
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.channel_weight < 0:
            raise ValueError("channel_weight must be >= 0")
        if self.max_insertions < 0:
            raise ValueError("max_insertions must be >= 0")


class _Hyp(NamedTuple):
    score: float
    out: str
    ctx: str
    slot_used: bool  # a spurious character already fills the current slot
    inserted: int  # intended characters inserted at the current position


def _rank(h: _Hyp):
    return (-h.score, h.out)


def _prune(hyps: Iterable[_Hyp], width: int) -> list[_Hyp]:
    best: dict = {}
    for h in hyps:
        if h.score == -math.inf:
            continue
        key = (h.ctx, h.slot_used, h.inserted)
        cur = best.get(key)
        if cur is None or _rank(h) < _rank(cur):
            best[key] = h
    return sorted(best.values(), key=_rank)[:width]


def decode_line(line: str, channel: ChannelModel, lm: CharLM, cfg: BeamConfig = BeamConfig()) -> tuple[str, float]:
    """Return the best correction of ``line`` and its objective score."""
    line = nfc(line)
    if not line:
        return "", 0.0
    lam = cfg.channel_weight
    no_ins = channel.log_no_insert

    def emit(h: _Hyp, ch: str, channel_lp: float, inserted: int) -> _Hyp:
        slot = 0.0 if h.slot_used else no_ins
        score = h.score + lam * (channel_lp + slot) + lm.logp(h.ctx, ch)
        return _Hyp(score, h.out + ch, lm.advance(h.ctx, ch), False, inserted)

    layer = [_Hyp(0.0, "", lm.start, False, 0)]
    for pos in range(len(line) + 1):
        # intended characters the OCR dropped, inserted before position pos
        frontier = layer
        for _ in range(cfg.max_insertions):
            grown = [
                emit(h, c, channel.log_drop(c), h.inserted + 1)
                for h in frontier
                for c in channel.drop_chars
            ]
            if not grown:
                break
            layer = layer + grown
            frontier = grown
        layer = _prune(layer, cfg.beam_width)
        if pos == len(line):
            break
        obs = line[pos]
        nxt = []
        for h in layer:
            nxt.append(emit(h, obs, channel.log_emit(obs, obs), 0))
            for c in channel.sub_sources.get(obs, ()):
                nxt.append(emit(h, c, channel.log_emit(c, obs), 0))
            if not h.slot_used and obs in channel.ins_chars:
                nxt.append(_Hyp(h.score + lam * channel.log_insert(obs), h.out, h.ctx, True, 0))
        layer = nxt

    finals = [
        h._replace(score=h.score + lam * (0.0 if h.slot_used else no_ins) + lm.logp(h.ctx, EOS))
        for h in layer
    ]
    finals = [h for h in finals if h.score != -math.inf]
    if not finals:
        return line, -math.inf
    best = min(finals, key=_rank)
    return best.out, best.score


def correct_line(line: str, channel: ChannelModel, lm: CharLM, cfg: BeamConfig = BeamConfig()) -> str:
    return decode_line(line, channel, lm, cfg)[0]


def correct_document(doc: Document, corrector: Callable[[Sequence[str]], list]) -> Document:
    """Run a batch line corrector over every non-empty line of ``doc``.

    Tokens keep their box and language when a corrected line has the same
    token count; otherwise the new tokens take the line's first language label.
    """
    todo = [line.text for _, line in doc.iter_lines() if line.tokens]
    fixed = iter(corrector(todo))
    pages = []
    for page in doc.pages:
        lines = []
        for line in page.lines:
            if not line.tokens:
                lines.append(line)
                continue
            words = nfc(next(fixed)).split()
            if len(words) == len(line.tokens):
                tokens = tuple(replace(t, text=w) for t, w in zip(line.tokens, words))
            else:
                lang = next((t.lang for t in line.tokens if t.lang is not None), None)
                tokens = tuple(Token(w, None, lang, False) for w in words)
            lines.append(replace(line, tokens=tokens))
        pages.append(replace(page, lines=tuple(lines)))
    return replace(doc, pages=tuple(pages))


def beam_corrector(channel: ChannelModel, lm: CharLM, cfg: BeamConfig = BeamConfig()):
    def run(lines: Sequence[str]) -> list[str]:
        return [correct_line(text, channel, lm, cfg) for text in lines]

    return run
