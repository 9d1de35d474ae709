"""Mask non-target tokens before correction and put them back afterwards.

A masked line keeps only the tokens the corrector should see. The sidecar
stores, per line, the original index and text of every removed token so the
line can be rebuilt exactly.

Sidecar records may also carry the removed token's ``lang``, ``bbox`` and
``masked`` flag (optional keys, written only when set) so that a document
round trip is lossless.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .docmodel import BBox, Document, Line, PathLike, Token, bbox_from_json, nfc
from .errors import LabelMismatch, MissingRecord, ParseError, TokenCountDriftWarning


@dataclass(frozen=True)
class MaskPolicy:
    target_lang: str
    mask_langs: frozenset = frozenset()
    mask_numerals: bool = True
    mask_punct: frozenset = frozenset({"(", ")"})

    def __post_init__(self):
        object.__setattr__(self, "mask_langs", frozenset(self.mask_langs))
        object.__setattr__(self, "mask_punct", frozenset(self.mask_punct))
        if self.target_lang in self.mask_langs:
            raise ValueError(f"target language {self.target_lang!r} cannot also be masked")

    def masks(self, text: str, label: Optional[str]) -> bool:
        if label is not None and label in self.mask_langs:
            return True
        if self.mask_numerals and text and all(ch.isdecimal() for ch in text):
            return True
        return text in self.mask_punct


@dataclass(frozen=True)
class MaskedToken:
    index: int
    text: str
    lang: Optional[str] = None
    bbox: Optional[BBox] = None
    flagged: bool = False

    def to_token(self) -> Token:
        return Token(self.text, self.bbox, self.lang, self.flagged)


@dataclass(frozen=True)
class MaskRecord:
    page_number: int
    line_id: str
    masked: tuple[MaskedToken, ...]
    kept_count: int

    def to_json(self) -> dict:
        items = []
        for m in self.masked:
            item = {"i": m.index, "t": m.text}
            if m.lang is not None:
                item["lang"] = m.lang
            if m.bbox is not None:
                item["bbox"] = m.bbox.to_list()
            if m.flagged:
                item["masked"] = True
            items.append(item)
        return {"page": self.page_number, "line_id": self.line_id, "kept_count": self.kept_count, "masked": items}

    @classmethod
    def from_json(cls, obj) -> "MaskRecord":
        if not isinstance(obj, dict) or set(obj) != {"page", "line_id", "kept_count", "masked"}:
            raise ParseError(f"bad sidecar record: {obj!r}")
        masked = []
        for item in obj["masked"]:
            if not isinstance(item, dict) or not {"i", "t"} <= set(item) <= {"i", "t", "lang", "bbox", "masked"}:
                raise ParseError(f"bad masked-token entry: {item!r}")
            masked.append(
                MaskedToken(
                    int(item["i"]),
                    nfc(item["t"]),
                    item.get("lang"),
                    bbox_from_json(item.get("bbox"), "bbox"),
                    bool(item.get("masked", False)),
                )
            )
        rec = cls(int(obj["page"]), str(obj["line_id"]), tuple(masked), int(obj["kept_count"]))
        idx = [m.index for m in rec.masked]
        if any(b <= a for a, b in zip(idx, idx[1:])) or any(i < 0 or i >= rec.kept_count + len(idx) for i in idx):
            raise ParseError(f"sidecar record for {rec.line_id!r} has invalid indices {idx}")
        return rec


def mask_line(
    line: Line, labels: Sequence[Optional[str]], policy: MaskPolicy, page_number: int = 0
) -> tuple[str, MaskRecord]:
    """Split ``line`` into the text to correct and a record of what was removed."""
    if len(labels) != len(line.tokens):
        raise LabelMismatch(f"line {line.line_id!r}: {len(labels)} labels for {len(line.tokens)} tokens")
    kept, masked = [], []
    for i, (tok, lab) in enumerate(zip(line.tokens, labels)):
        if policy.masks(tok.text, lab):
            masked.append(MaskedToken(i, tok.text, tok.lang, tok.bbox, tok.masked))
        else:
            kept.append(tok.text)
    return " ".join(kept), MaskRecord(page_number, line.line_id, tuple(masked), len(kept))


def _merge(kept: list, masked: Sequence[MaskedToken], expected_kept: int, line_id: str) -> list:
    """Interleave kept items with masked tokens at their recorded positions.

    When the number of kept items differs from ``expected_kept``, masked
    tokens keep their relative order and their indices are clamped to the
    length of the sequence built so far.
    """
    if len(kept) != expected_kept:
        warnings.warn(
            f"line {line_id!r}: corrector changed token count from {expected_kept} to {len(kept)}",
            TokenCountDriftWarning,
            stacklevel=3,
        )
    out = list(kept)
    for m in masked:
        out.insert(min(m.index, len(out)), m)
    return out


def unmask_line(corrected_kept: str, record: MaskRecord) -> list[str]:
    merged = _merge(corrected_kept.split(), record.masked, record.kept_count, record.line_id)
    return [m.text if isinstance(m, MaskedToken) else m for m in merged]


def _labels_of(line: Line) -> list:
    return [t.lang for t in line.tokens]


def mask_document(doc: Document, policy: MaskPolicy, labels=None) -> tuple[Document, list[MaskRecord]]:
    """Mask every line of ``doc``; returns the masked document and the sidecar.

    ``labels`` maps (page_number, line_id) to per-token labels and defaults to
    the tokens' own ``lang`` fields. Lines whose tokens are all masked stay in
    the masked document with no tokens.
    """
    sidecar: list[MaskRecord] = []
    pages = []
    for page in doc.pages:
        lines = []
        for line in page.lines:
            labs = labels[(page.page_number, line.line_id)] if labels is not None else _labels_of(line)
            _, rec = mask_line(line, labs, policy, page.page_number)
            dropped = {m.index for m in rec.masked}
            kept = tuple(t for i, t in enumerate(line.tokens) if i not in dropped)
            lines.append(replace(line, tokens=kept))
            sidecar.append(rec)
        pages.append(replace(page, lines=tuple(lines)))
    return replace(doc, pages=tuple(pages)), sidecar


def unmask_document(doc: Document, sidecar: Iterable[MaskRecord]) -> Document:
    """Reinsert masked tokens into a corrected document."""
    records = {(r.page_number, r.line_id): r for r in sidecar}
    pages = []
    for page in doc.pages:
        lines = []
        for line in page.lines:
            rec = records.get((page.page_number, line.line_id))
            if rec is None:
                raise MissingRecord(page.page_number, line.line_id)
            merged = _merge(list(line.tokens), rec.masked, rec.kept_count, line.line_id)
            tokens = tuple(m.to_token() if isinstance(m, MaskedToken) else m for m in merged)
            lines.append(replace(line, tokens=tokens))
        pages.append(replace(page, lines=tuple(lines)))
    return replace(doc, pages=tuple(pages))


def dumps_sidecar(records: Iterable[MaskRecord]) -> str:
    return "".join(json.dumps(r.to_json(), ensure_ascii=False) + "\n" for r in records)


def save_sidecar(records: Iterable[MaskRecord], path: PathLike) -> None:
    Path(path).write_text(dumps_sidecar(records), encoding="utf-8")


def load_sidecar(path: PathLike) -> list[MaskRecord]:
    out = []
    for no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{no}: {exc}") from exc
        out.append(MaskRecord.from_json(obj))
    return out
