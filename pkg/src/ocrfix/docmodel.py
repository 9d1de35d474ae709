"""Canonical layout-aware document model and its JSON file format.

Every pipeline stage reads and writes this format. Objects are frozen
dataclasses: stages build new documents instead of mutating old ones.

Constructors do not validate; :func:`validate_document` reports every
invariant breach as data, and :func:`load_document` turns a non-empty
violation list into a :class:`~ocrfix.errors.ValidationError`.
"""

from __future__ import annotations

import json
import math
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Optional, Union

from .errors import ParseError, ValidationError

PathLike = Union[str, Path]
Number = Union[int, float]


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in page pixels, origin top-left."""

    x0: Number
    y0: Number
    x1: Number
    y1: Number

    @property
    def center_x(self) -> float:
        return (self.x0 + self.x1) / 2

    @property
    def width(self) -> Number:
        return self.x1 - self.x0

    def to_list(self) -> list:
        return [self.x0, self.y0, self.x1, self.y1]

    def scaled(self, factor: float) -> "BBox":
        return BBox(self.x0 * factor, self.y0 * factor, self.x1 * factor, self.y1 * factor)

    @staticmethod
    def union(boxes) -> Optional["BBox"]:
        boxes = [b for b in boxes if b is not None]
        if not boxes:
            return None
        return BBox(
            min(b.x0 for b in boxes),
            min(b.y0 for b in boxes),
            max(b.x1 for b in boxes),
            max(b.y1 for b in boxes),
        )


@dataclass(frozen=True)
class Token:
    text: str
    bbox: Optional[BBox] = None
    lang: Optional[str] = None
    masked: bool = False


@dataclass(frozen=True)
class Line:
    line_id: str
    tokens: tuple[Token, ...] = ()
    bbox: Optional[BBox] = None
    column: Optional[int] = None

    @property
    def text(self) -> str:
        return " ".join(t.text for t in self.tokens)


@dataclass(frozen=True)
class Page:
    page_number: int
    lines: tuple[Line, ...] = ()
    width: Optional[int] = None
    height: Optional[int] = None

    def line_texts(self) -> list[str]:
        return [line.text for line in self.lines]


@dataclass(frozen=True)
class Document:
    source_id: str
    pages: tuple[Page, ...] = ()
    metadata: dict = field(default_factory=dict)

    def iter_lines(self) -> Iterator[tuple[Page, Line]]:
        for page in self.pages:
            for line in page.lines:
                yield page, line


@dataclass(frozen=True)
class Violation:
    path: str
    rule: str
    message: str = ""


# -- validation ---------------------------------------------------------------


def _check_bbox(bbox: Optional[BBox], path: str, out: list) -> None:
    if bbox is None:
        return
    coords = bbox.to_list()
    if any(not math.isfinite(c) for c in coords):
        out.append(Violation(path, "bbox-finite", f"bbox {coords} has non-finite coordinates"))
        return
    if any(c < 0 for c in coords):
        out.append(Violation(path, "bbox-nonnegative", f"bbox {coords} has a negative coordinate"))
    if bbox.x0 > bbox.x1 or bbox.y0 > bbox.y1:
        out.append(Violation(path, "bbox-ordered", f"bbox {coords} violates x0<=x1, y0<=y1"))


def validate_document(doc: Document) -> list[Violation]:
    """Return every invariant violation in ``doc``; an empty list means valid."""
    out: list[Violation] = []
    prev_page = 0
    for pi, page in enumerate(doc.pages):
        ppath = f"pages[{pi}]"
        if page.page_number < 1:
            out.append(Violation(ppath, "page-number-positive", f"page_number {page.page_number}"))
        if pi and page.page_number <= prev_page:
            out.append(
                Violation(ppath, "page-number-increasing", f"{page.page_number} after {prev_page}")
            )
        prev_page = page.page_number if not pi else max(prev_page, page.page_number)
        for name in ("width", "height"):
            v = getattr(page, name)
            if v is not None and v < 0:
                out.append(Violation(f"{ppath}.{name}", "page-size-nonnegative", str(v)))
        seen: dict[str, int] = {}
        for li, line in enumerate(page.lines):
            lpath = f"{ppath}.lines[{li}]"
            if line.line_id in seen:
                first = seen[line.line_id]
                out.append(
                    Violation(
                        lpath,
                        "line-id-unique",
                        f"line_id {line.line_id!r} used by lines[{first}] and lines[{li}]",
                    )
                )
            else:
                seen[line.line_id] = li
            if line.column is not None and line.column < 0:
                out.append(Violation(lpath, "column-nonnegative", str(line.column)))
            _check_bbox(line.bbox, f"{lpath}.bbox", out)
            for ti, tok in enumerate(line.tokens):
                tpath = f"{lpath}.tokens[{ti}]"
                if not tok.text:
                    out.append(Violation(tpath, "token-nonempty", "empty token text"))
                elif any(ch.isspace() for ch in tok.text):
                    out.append(Violation(tpath, "token-no-whitespace", repr(tok.text)))
                if tok.text != nfc(tok.text):
                    out.append(Violation(tpath, "token-nfc", repr(tok.text)))
                _check_bbox(tok.bbox, f"{tpath}.bbox", out)
    return out


# -- JSON codec -----------------------------------------------------------------

_DOC_KEYS = ("source_id", "metadata", "pages")
_PAGE_KEYS = ("page_number", "width", "height", "lines")
_LINE_KEYS = ("line_id", "bbox", "column", "tokens")
_TOKEN_KEYS = ("text", "bbox", "lang", "masked")


def _expect_keys(obj: Any, keys: tuple, path: str) -> None:
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: expected an object, got {type(obj).__name__}")
    unknown = set(obj) - set(keys)
    if unknown:
        raise ParseError(f"{path}: unknown keys {sorted(unknown)}")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise ParseError(f"{path}: missing keys {missing}")


def _is_int(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _opt_int(v: Any, path: str) -> Optional[int]:
    if v is None or _is_int(v):
        return v
    raise ParseError(f"{path}: expected integer or null, got {v!r}")


def _str(v: Any, path: str) -> str:
    if not isinstance(v, str):
        raise ParseError(f"{path}: expected string, got {v!r}")
    return v


def bbox_from_json(v: Any, path: str) -> Optional[BBox]:
    if v is None:
        return None
    if (
        not isinstance(v, list)
        or len(v) != 4
        or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)
    ):
        raise ParseError(f"{path}: bbox must be [x0, y0, x1, y1], got {v!r}")
    return BBox(*v)


def document_from_json(obj: Any) -> Document:
    """Build a Document from decoded JSON, NFC-normalizing token texts.

    Raises ParseError on schema problems; does not check invariants.
    """
    _expect_keys(obj, _DOC_KEYS, "$")
    meta = obj["metadata"]
    if not isinstance(meta, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in meta.items()
    ):
        raise ParseError("$.metadata: expected a string-to-string map")
    if not isinstance(obj["pages"], list):
        raise ParseError("$.pages: expected a list")
    pages = []
    for pi, p in enumerate(obj["pages"]):
        ppath = f"$.pages[{pi}]"
        _expect_keys(p, _PAGE_KEYS, ppath)
        if not _is_int(p["page_number"]):
            raise ParseError(f"{ppath}.page_number: expected integer")
        if not isinstance(p["lines"], list):
            raise ParseError(f"{ppath}.lines: expected a list")
        lines = []
        for li, ln in enumerate(p["lines"]):
            lpath = f"{ppath}.lines[{li}]"
            _expect_keys(ln, _LINE_KEYS, lpath)
            if not isinstance(ln["tokens"], list):
                raise ParseError(f"{lpath}.tokens: expected a list")
            tokens = []
            for ti, t in enumerate(ln["tokens"]):
                tpath = f"{lpath}.tokens[{ti}]"
                _expect_keys(t, _TOKEN_KEYS, tpath)
                if not isinstance(t["masked"], bool):
                    raise ParseError(f"{tpath}.masked: expected boolean")
                lang = t["lang"]
                if lang is not None:
                    _str(lang, f"{tpath}.lang")
                tokens.append(
                    Token(
                        text=nfc(_str(t["text"], f"{tpath}.text")),
                        bbox=bbox_from_json(t["bbox"], f"{tpath}.bbox"),
                        lang=lang,
                        masked=t["masked"],
                    )
                )
            lines.append(
                Line(
                    line_id=_str(ln["line_id"], f"{lpath}.line_id"),
                    tokens=tuple(tokens),
                    bbox=bbox_from_json(ln["bbox"], f"{lpath}.bbox"),
                    column=_opt_int(ln["column"], f"{lpath}.column"),
                )
            )
        pages.append(
            Page(
                page_number=p["page_number"],
                lines=tuple(lines),
                width=_opt_int(p["width"], f"{ppath}.width"),
                height=_opt_int(p["height"], f"{ppath}.height"),
            )
        )
    return Document(source_id=_str(obj["source_id"], "$.source_id"), pages=tuple(pages), metadata=dict(meta))


def _bbox_json(b: Optional[BBox]):
    return None if b is None else b.to_list()


def document_to_json(doc: Document) -> dict:
    return {
        "source_id": doc.source_id,
        "metadata": dict(doc.metadata),
        "pages": [
            {
                "page_number": p.page_number,
                "width": p.width,
                "height": p.height,
                "lines": [
                    {
                        "line_id": ln.line_id,
                        "bbox": _bbox_json(ln.bbox),
                        "column": ln.column,
                        "tokens": [
                            {"text": t.text, "bbox": _bbox_json(t.bbox), "lang": t.lang, "masked": t.masked}
                            for t in ln.tokens
                        ],
                    }
                    for ln in p.lines
                ],
            }
            for p in doc.pages
        ],
    }


def dumps_document(doc: Document) -> str:
    return json.dumps(document_to_json(doc), ensure_ascii=False, indent=2) + "\n"


def loads_document(text: str) -> Document:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    doc = document_from_json(obj)
    violations = validate_document(doc)
    if violations:
        raise ValidationError(violations)
    return doc


def load_document(path: PathLike) -> Document:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8: {exc}") from exc
    return loads_document(text)


def save_document(doc: Document, path: PathLike) -> None:
    Path(path).write_text(dumps_document(doc), encoding="utf-8")
