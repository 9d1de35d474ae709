from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from ocrfix.docmodel import BBox, Document, Line, Page, Token  # noqa: E402

ROOT = Path(__file__).resolve().parents[1]

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


# -- strategies ------------------------------------------------------------------

TOKEN_ALPHABET = "abcdeḵäēłǥx()0123456789-'"

token_text = st.text(alphabet=TOKEN_ALPHABET, min_size=1, max_size=6)


@st.composite
def bboxes(draw, max_coord=2000):
    x0 = draw(st.integers(0, max_coord))
    y0 = draw(st.integers(0, max_coord))
    return BBox(x0, y0, x0 + draw(st.integers(0, 400)), y0 + draw(st.integers(0, 60)))


@st.composite
def tokens(draw):
    return Token(
        draw(token_text),
        draw(st.none() | bboxes()),
        draw(st.sampled_from([None, "kwk", "en"])),
        draw(st.booleans()),
    )


@st.composite
def documents(draw, max_pages=3, max_lines=5):
    n_pages = draw(st.integers(0, max_pages))
    pages = []
    for p in range(n_pages):
        n_lines = draw(st.integers(0, max_lines))
        lines = tuple(
            Line(
                f"p{p + 1}_l{i}",
                tuple(draw(st.lists(tokens(), max_size=6))),
                draw(st.none() | bboxes()),
                draw(st.none() | st.integers(0, 1)),
            )
            for i in range(n_lines)
        )
        pages.append(Page(p + 1, lines, draw(st.none() | st.integers(0, 3000)), draw(st.none() | st.integers(0, 3000))))
    meta = draw(st.dictionaries(st.text("abc", min_size=1, max_size=3), st.text(max_size=5), max_size=2))
    return Document(draw(st.text("xyz-", max_size=6)), tuple(pages), meta)


def simple_doc(*pages_of_lines, langs=None) -> Document:
    """Document from nested lists of line strings, one list per page."""
    pages = []
    for p, lines in enumerate(pages_of_lines, 1):
        built = []
        for i, text in enumerate(lines):
            toks = tuple(Token(w, None, langs) for w in text.split())
            built.append(Line(f"p{p}_l{i}", toks))
        pages.append(Page(p, tuple(built)))
    return Document("test", tuple(pages))


@pytest.fixture
def synthetic_bundle(tmp_path):
    from ocrfix.synth import write_bundle

    return write_bundle(tmp_path / "bundle")
