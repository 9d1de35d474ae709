from __future__ import annotations

import json
import warnings
from collections import Counter
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ocrfix.docmodel import BBox, Document, Line, Page, Token, save_document
from ocrfix.errors import EmptyPageWarning, MissingGeometryWarning, ParseError
from ocrfix.ingest import ColumnModel, detect_columns, import_ocr, reorder_document, reorder_page, vendor_to_document


def _word(text, x0, y0, x1, y1, brk=None):
    symbols = [{"text": ch} for ch in text]
    if brk:
        symbols[-1]["property"] = {"detectedBreak": {"type": brk}}
    return {
        "boundingBox": {"vertices": [{"x": x0, "y": y0}, {"x": x1, "y": y0}, {"x": x1, "y": y1}, {"x": x0, "y": y1}]},
        "symbols": symbols,
    }


def _response(*pages):
    return {"responses": [{"fullTextAnnotation": {"pages": [p]}} for p in pages]}


def test_two_words_one_line(tmp_path):
    page = {"blocks": [{"paragraphs": [{"words": [_word("ab", 0, 0, 20, 10, "SPACE"), _word("cd", 25, 0, 45, 10)]}]}]}
    path = tmp_path / "ocr.json"
    path.write_text(json.dumps(_response(page)))
    doc = import_ocr(path)
    (line,) = doc.pages[0].lines
    assert [t.text for t in line.tokens] == ["ab", "cd"]
    assert line.tokens[0].bbox == BBox(0, 0, 20, 10)
    assert line.bbox == BBox(0, 0, 45, 10)
    assert doc.source_id == "ocr"


def test_decomposed_word_is_composed():
    page = {"blocks": [{"paragraphs": [{"words": [_word("ḵä", 0, 0, 9, 9)]}]}]}
    doc = vendor_to_document(_response(page))
    assert doc.pages[0].lines[0].tokens[0].text == "ḵä"


def test_line_breaks_split_lines():
    words = [
        _word("a", 0, 0, 5, 5, "SPACE"),
        _word("b", 6, 0, 9, 5, "LINE_BREAK"),
        _word("c", 0, 10, 5, 15, "EOL_SURE_SPACE"),
        _word("d", 0, 20, 5, 25),
    ]
    doc = vendor_to_document({"pages": [{"blocks": [{"paragraphs": [{"words": words}]}]}]})
    assert doc.pages[0].line_texts() == ["a b", "c", "d"]
    assert [ln.line_id for ln in doc.pages[0].lines] == ["p1_l0", "p1_l1", "p1_l2"]


def test_paragraph_end_ends_line():
    page = {"blocks": [{"paragraphs": [{"words": [_word("a", 0, 0, 5, 5)]}, {"words": [_word("b", 0, 9, 5, 14)]}]}]}
    assert vendor_to_document({"pages": [page]}).pages[0].line_texts() == ["a", "b"]


def test_missing_vertex_coordinates_default_to_zero():
    word = _word("a", 0, 0, 5, 5)
    word["boundingBox"]["vertices"][0] = {}
    doc = vendor_to_document({"pages": [{"blocks": [{"paragraphs": [{"words": [word]}]}]}]})
    assert doc.pages[0].lines[0].tokens[0].bbox == BBox(0, 0, 5, 5)


def test_empty_response_warns_in_metadata(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text("{}")
    with pytest.warns(EmptyPageWarning):
        doc = import_ocr(path)
    assert doc.pages == ()
    assert "warnings" in doc.metadata


def test_empty_page_warns():
    with pytest.warns(EmptyPageWarning):
        doc = vendor_to_document(_response({"blocks": []}))
    assert len(doc.pages) == 1 and doc.pages[0].lines == ()
    assert "page 1" in doc.metadata["warnings"]


def test_garbage_is_parse_error(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("[1, 2]")
    with pytest.raises(ParseError):
        import_ocr(path)
    path.write_text("{oops")
    with pytest.raises(ParseError):
        import_ocr(path)


def test_word_without_box_is_parse_error():
    with pytest.raises(ParseError):
        vendor_to_document({"pages": [{"blocks": [{"paragraphs": [{"words": [{"symbols": [{"text": "a"}]}]}]}]}]})


def test_canonical_document_passes_through(tmp_path):
    doc = Document("x", (Page(1, (Line("a", (Token("t"),)),)),), {"k": "v"})
    save_document(doc, tmp_path / "d.json")
    assert import_ocr(tmp_path / "d.json") == doc


# -- columns -------------------------------------------------------------------


def _line(lid, x0, y0, x1, y1, text="w"):
    return Line(lid, (Token(text, BBox(x0, y0, x1, y1)),), BBox(x0, y0, x1, y1))


def test_full_width_lines_one_column():
    page = Page(1, tuple(_line(f"l{i}", 0, 20 * i, 1000, 20 * i + 10) for i in range(5)), 1000)
    cols = detect_columns(page)
    assert len(cols.boundaries) == 1
    assert set(cols.assignment.values()) == {0}


def test_two_clusters_two_columns():
    left = [_line(f"a{i}", 0, 20 * i, 400, 20 * i + 10) for i in range(4)]
    right = [_line(f"b{i}", 600, 20 * i, 1000, 20 * i + 10) for i in range(4)]
    cols = detect_columns(Page(1, tuple(left + right), 1000))
    assert len(cols.boundaries) == 2
    assert all(cols.assignment[f"a{i}"] == 0 and cols.assignment[f"b{i}"] == 1 for i in range(4))
    (l0, l1), (r0, r1) = cols.boundaries
    assert l0 <= l1 <= r0 <= r1


def test_single_line_one_column():
    assert len(detect_columns(Page(1, (_line("a", 10, 10, 50, 20),))).boundaries) == 1


def test_narrow_gap_stays_one_column():
    # gap 100 of text width 1000 is below 0.15
    lines = (_line("a", 0, 0, 450, 10), _line("b", 550, 0, 1000, 10))
    assert len(detect_columns(Page(1, lines)).boundaries) == 1
    assert len(detect_columns(Page(1, lines), gap_ratio=0.05).boundaries) == 2


def test_missing_geometry_falls_back():
    page = Page(1, (_line("a", 0, 0, 10, 10), Line("b", (Token("x"),))))
    with pytest.warns(MissingGeometryWarning):
        cols = detect_columns(page)
    assert cols.missing_geometry
    assert set(cols.assignment.values()) == {0}


def test_interleaved_columns_reordered():
    lines = (_line("L0", 0, 10, 100, 20), _line("L1", 600, 10, 700, 20), _line("L2", 0, 30, 100, 40))
    page = Page(1, lines)
    cols = ColumnModel(((0, 300), (300, 700)), {"L0": 0, "L1": 1, "L2": 0})
    out = reorder_page(page, cols)
    assert [ln.line_id for ln in out.lines] == ["L0", "L2", "L1"]
    assert [ln.column for ln in out.lines] == [0, 0, 1]


def test_ordered_page_unchanged():
    lines = tuple(replace(_line(f"l{i}", 0, 10 * i, 100, 10 * i + 5), column=0) for i in range(4))
    page = Page(1, lines)
    assert reorder_page(page, detect_columns(page)) == page


def test_equal_keys_keep_order():
    lines = (_line("x", 0, 0, 10, 10, "first"), _line("y", 0, 0, 10, 10, "second"))
    out = reorder_page(Page(1, lines), ColumnModel(((0, 10),), {"x": 0, "y": 0}))
    assert [ln.line_id for ln in out.lines] == ["x", "y"]


@st.composite
def pages_with_boxes(draw):
    n = draw(st.integers(1, 12))
    lines = []
    for i in range(n):
        x0 = draw(st.integers(0, 900))
        y0 = draw(st.integers(0, 900))
        lines.append(_line(f"l{i}", x0, y0, x0 + draw(st.integers(0, 400)), y0 + 10, f"t{i}"))
    return Page(1, tuple(lines), 1400)


@given(pages_with_boxes(), st.floats(0.01, 0.5))
@settings(max_examples=200, deadline=None)
def test_reorder_is_idempotent_permutation(page, ratio):
    cols = detect_columns(page, ratio)
    once = reorder_page(page, cols)
    assert Counter(ln.line_id for ln in once.lines) == Counter(ln.line_id for ln in page.lines)
    assert Counter(t.text for ln in once.lines for t in ln.tokens) == Counter(t.text for ln in page.lines for t in ln.tokens)
    assert reorder_page(once, cols) == once
    assert detect_columns(page, ratio) == cols


@given(pages_with_boxes(), st.sampled_from([0.25, 0.5, 2.0, 4.0]))
@settings(max_examples=200, deadline=None)
def test_columns_scale_invariant(page, factor):
    scaled = replace(
        page,
        lines=tuple(replace(ln, bbox=ln.bbox.scaled(factor), tokens=tuple(replace(t, bbox=t.bbox.scaled(factor)) for t in ln.tokens)) for ln in page.lines),
    )
    a, b = detect_columns(page), detect_columns(scaled)
    assert a.assignment == b.assignment
    assert len(a.boundaries) == len(b.boundaries)


def test_reorder_document_repairs_two_column_vendor_order():
    words = []
    for row in range(3):
        y = 100 * row
        words.append({"paragraphs": [{"words": [_word(f"L{row}", 0, y, 300, y + 20)]}]})
        words.append({"paragraphs": [{"words": [_word(f"R{row}", 600, y, 900, y + 20)]}]})
    doc = vendor_to_document({"pages": [{"blocks": words}]})
    assert doc.pages[0].line_texts() == ["L0", "R0", "L1", "R1", "L2", "R2"]
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fixed = reorder_document(doc)
    assert fixed.pages[0].line_texts() == ["L0", "L1", "L2", "R0", "R1", "R2"]
