"""Import first-pass OCR output and repair reading order.

The vendor adapter reads a cloud OCR JSON response shaped as
``pages -> blocks -> paragraphs -> words -> symbols``. Words are grouped into
lines by the break annotations on their last symbol; a paragraph boundary
always ends a line. Only axis-aligned boxes taken from polygon extrema are kept.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

from .docmodel import BBox, Document, Line, Page, PathLike, Token, document_from_json, nfc, validate_document
from .errors import EmptyPageWarning, MissingGeometryWarning, ParseError, ValidationError

_LINE_ENDING_BREAKS = {"EOL_SURE_SPACE", "LINE_BREAK"}


def _poly_bbox(poly, path: str) -> BBox:
    if not isinstance(poly, dict):
        raise ParseError(f"{path}: missing boundingBox")
    verts = poly.get("vertices")
    if not isinstance(verts, list) or not verts:
        raise ParseError(f"{path}: boundingBox has no vertices")
    # the vendor omits zero-valued coordinates
    xs = [max(0, v.get("x", 0)) for v in verts]
    ys = [max(0, v.get("y", 0)) for v in verts]
    return BBox(min(xs), min(ys), max(xs), max(ys))


def _word_text(word: dict, path: str) -> tuple[str, bool]:
    """Return (text, ends_line) for a vendor word."""
    symbols = word.get("symbols")
    if symbols is None:
        if "text" not in word:
            raise ParseError(f"{path}: word has neither symbols nor text")
        return str(word["text"]), bool(word.get("line_break", False))
    text = "".join(str(s.get("text", "")) for s in symbols)
    ends = False
    if symbols:
        brk = symbols[-1].get("property", {}).get("detectedBreak", {}).get("type")
        ends = brk in _LINE_ENDING_BREAKS
    return text, ends


def _vendor_pages(obj) -> list:
    if isinstance(obj, dict) and "responses" in obj:
        responses = obj["responses"]
        if not isinstance(responses, list):
            raise ParseError("responses must be a list")
        pages = []
        for r in responses:
            annot = (r or {}).get("fullTextAnnotation")
            if annot is None:
                # a response with no detected text still stands for one page
                pages.append({"blocks": []})
            else:
                pages.extend(annot.get("pages", []))
        return pages
    if isinstance(obj, dict) and "fullTextAnnotation" in obj:
        return (obj["fullTextAnnotation"] or {}).get("pages", [])
    if isinstance(obj, dict) and "pages" in obj:
        return obj["pages"]
    if isinstance(obj, dict) and not obj:
        return []
    raise ParseError("unrecognized OCR response: expected responses/fullTextAnnotation/pages")


def vendor_to_document(obj, source_id: str = "") -> Document:
    pages_in = _vendor_pages(obj)
    if not isinstance(pages_in, list):
        raise ParseError("pages must be a list")
    pages: list[Page] = []
    notes: list[str] = []
    if not pages_in:
        notes.append("EmptyPageWarning: response contains no pages")
        warnings.warn("OCR response contains no pages", EmptyPageWarning, stacklevel=2)
    for pi, vp in enumerate(pages_in):
        number = pi + 1
        lines: list[Line] = []
        current: list[Token] = []

        def flush():
            if current:
                lid = f"p{number}_l{len(lines)}"
                lines.append(Line(lid, tuple(current), BBox.union(t.bbox for t in current)))
                current.clear()

        for bi, block in enumerate(vp.get("blocks", [])):
            for gi, para in enumerate(block.get("paragraphs", [])):
                for wi, word in enumerate(para.get("words", [])):
                    wpath = f"pages[{pi}].blocks[{bi}].paragraphs[{gi}].words[{wi}]"
                    text, ends = _word_text(word, wpath)
                    bbox = _poly_bbox(word.get("boundingBox"), wpath)
                    for piece in nfc(text).split():
                        current.append(Token(piece, bbox))
                    if ends:
                        flush()
                flush()
        if not lines:
            notes.append(f"EmptyPageWarning: page {number} has no text")
            warnings.warn(f"page {number} has no text", EmptyPageWarning, stacklevel=2)
        w, h = vp.get("width"), vp.get("height")
        pages.append(Page(number, tuple(lines), w if isinstance(w, int) else None, h if isinstance(h, int) else None))
    meta = {}
    if notes:
        meta["warnings"] = "; ".join(notes)
    doc = Document(source_id, tuple(pages), meta)
    violations = validate_document(doc)
    if violations:
        raise ValidationError(violations)
    return doc


def import_ocr(path: PathLike) -> Document:
    """Read a vendor OCR response (or a canonical document) into a Document."""
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if isinstance(obj, dict) and "source_id" in obj:
        doc = document_from_json(obj)
        violations = validate_document(doc)
        if violations:
            raise ValidationError(violations)
        return doc
    return vendor_to_document(obj, source_id=path.stem)


# -- columns and reading order ------------------------------------------------


@dataclass(frozen=True)
class ColumnModel:
    """Column x-intervals (left to right) and the column of each line."""

    boundaries: tuple[tuple[float, float], ...]
    assignment: dict = field(default_factory=dict)
    missing_geometry: bool = False

    @property
    def n_columns(self) -> int:
        return len(self.boundaries)


def detect_columns(page: Page, gap_ratio: float = 0.15) -> ColumnModel:
    """Split a page into one or two columns using the x-projection of line boxes.

    Two columns are reported when the widest uncovered x-interval between line
    boxes is wider than ``gap_ratio`` times the text width.
    """
    lines = page.lines
    if any(ln.bbox is None for ln in lines):
        warnings.warn(
            f"page {page.page_number}: line without bbox, using one column",
            MissingGeometryWarning,
            stacklevel=2,
        )
        return ColumnModel(((0.0, float(page.width or 0)),), {ln.line_id: 0 for ln in lines}, True)
    if not lines:
        return ColumnModel(((0.0, float(page.width or 0)),), {}, False)

    left = min(ln.bbox.x0 for ln in lines)
    right = max(ln.bbox.x1 for ln in lines)
    text_width = right - left

    intervals = sorted((ln.bbox.x0, ln.bbox.x1) for ln in lines)
    best_gap, split = 0, None
    reach = intervals[0][1]
    for x0, x1 in intervals[1:]:
        if x0 - reach > best_gap:
            best_gap, split = x0 - reach, (reach + x0) / 2
        reach = max(reach, x1)

    if split is None or text_width <= 0 or best_gap <= gap_ratio * text_width:
        return ColumnModel(((left, right),), {ln.line_id: 0 for ln in lines})
    assignment = {ln.line_id: 0 if ln.bbox.center_x < split else 1 for ln in lines}
    return ColumnModel(((left, split), (split, right)), assignment)


def reorder_page(page: Page, columns: ColumnModel) -> Page:
    """Sort lines by (column, top, left) and record each line's column.

    The sort is stable. Without complete geometry only the column key is used.
    """
    have_geometry = all(ln.bbox is not None for ln in page.lines)

    def key(ln):
        col = columns.assignment[ln.line_id]
        if have_geometry:
            return (col, ln.bbox.y0, ln.bbox.x0)
        return (col,)

    ordered = sorted(page.lines, key=key)
    lines = tuple(replace(ln, column=columns.assignment[ln.line_id]) for ln in ordered)
    return replace(page, lines=lines)


def reorder_document(doc: Document, gap_ratio: float = 0.15) -> Document:
    pages = tuple(reorder_page(p, detect_columns(p, gap_ratio)) for p in doc.pages)
    return replace(doc, pages=pages)
