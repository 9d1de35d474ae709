"""Synthetic corpora for tests, demos and the bundled end-to-end example.

Nothing here is real Kwak'wala. The "target" language is a made-up syllabic
language written with Boas-Hunt-looking graphemes so that diacritics,
combining marks and digraphs exercise the same code paths as the real texts.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .docmodel import BBox, Document, Line, Page, PathLike, Token, nfc, save_document
from .translit import RuleTable, transliterate

TARGET = "kwk"
ENGLISH = "en"

CONSONANTS = ["k", "ḵ", "g", "ǥ", "x", "x̣", "q", "l", "ł", "ʟ", "m", "n", "p", "t", "s", "w", "y", "h", "dz", "ts", "kʼ", "tʼ"]
VOWELS = ["a", "e", "i", "o", "u", "ä", "ē", "ᴇ", "â"]

# missing diacritics are the dominant first-pass error on these scripts
CONFUSIONS = {"ḵ": "k", "ä": "a", "ē": "e", "ł": "l", "ǥ": "g"}

ENGLISH_WORDS = (
    "the of and to in he she it was said they his her them then when came went house chief "
    "canoe people sea river tribe song feast blanket fire morning evening night woman man "
    "children father mother brother sister took gave went saw called spoke answered great "
    "small first last all many other again there where what with from upon into after before "
    "this that those these one two three four salmon cedar box mask dance winter summer"
).split()

FIXTURE_RULES = (
    ("ḵ", "q̱"),
    ("ǥ", "g̱"),
    ("x̣", "x̱"),
    ("ᴇ", "a̱"),
    ("ʟ", "ƛ"),
    ("ä", "a"),
    ("â", "a"),
    ("ē", "e"),
    ("kʼ", "k̓"),
    ("tʼ", "t̓"),
)


def fixture_rule_table() -> RuleTable:
    return RuleTable(FIXTURE_RULES, "fixture", "boas-hunt-fixture", "umista-fixture")


def write_fixture_rules(path: PathLike) -> None:
    lines = [
        "#orthography: boas-hunt-fixture -> umista-fixture",
        "# TEST FIXTURE ONLY: invented mapping, not a community-approved table.",
    ]
    lines += [f"{s}\t{t}" for s, t in FIXTURE_RULES]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# -- generators -------------------------------------------------------------------


def make_lexicon(rng: random.Random, size: int = 400) -> list[str]:
    words: set = set()
    while len(words) < size:
        syl = []
        for _ in range(rng.choice((1, 2, 2, 3))):
            s = rng.choice(CONSONANTS) + rng.choice(VOWELS)
            if rng.random() < 0.3:
                s += rng.choice(CONSONANTS)
            syl.append(s)
        words.add(nfc("".join(syl)))
    return sorted(words)


class TargetLanguage:
    """Zipf-weighted sampler over an invented lexicon."""

    def __init__(self, seed: int = 0, size: int = 400):
        rng = random.Random(seed)
        self.lexicon = make_lexicon(rng, size)
        rng.shuffle(self.lexicon)
        self.weights = [1.0 / (i + 1) for i in range(len(self.lexicon))]

    def line(self, rng: random.Random, min_words: int = 4, max_words: int = 8) -> str:
        n = rng.randint(min_words, max_words)
        return " ".join(rng.choices(self.lexicon, self.weights, k=n))


def english_line(rng: random.Random, min_words: int = 4, max_words: int = 9) -> str:
    return " ".join(rng.choice(ENGLISH_WORDS) for _ in range(rng.randint(min_words, max_words)))


def add_noise(text: str, rng: random.Random, p: float = 0.1, table: Optional[dict] = None) -> str:
    """Replace each character found in ``table`` with its confusion w.p. ``p``."""
    table = CONFUSIONS if table is None else table
    return "".join(table[ch] if ch in table and rng.random() < p else ch for ch in text)


def noisy_pairs(n: int, seed: int = 0, p: float = 0.1, lang: Optional[TargetLanguage] = None) -> list[tuple[str, str]]:
    """``n`` (noisy, clean) target-language line pairs."""
    lang = lang or TargetLanguage(seed)
    rng = random.Random(seed + 1)
    out = []
    for _ in range(n):
        clean = lang.line(rng)
        out.append((add_noise(clean, rng, p), clean))
    return out


def markov_corpus(n_lines: int, alphabet: str, seed: int, concentration: float = 0.3, min_len: int = 25, max_len: int = 60) -> list[str]:
    """Lines drawn from a random first-order character Markov chain.

    Each seed gives a different transition matrix over the same alphabet.
    """
    rng = random.Random(seed)
    symbols = list(alphabet)
    trans = {}
    for a in symbols:
        row = [rng.gammavariate(concentration, 1.0) + 1e-6 for _ in symbols]
        total = sum(row)
        trans[a] = [w / total for w in row]
    lines = []
    for _ in range(n_lines):
        ch = rng.choice(symbols)
        out = [ch]
        for _ in range(rng.randint(min_len, max_len) - 1):
            ch = rng.choices(symbols, trans[ch])[0]
            out.append(ch)
        text = " ".join("".join(out).split())
        lines.append(text or symbols[0])
    return lines


# -- bilingual two-column document ----------------------------------------------------


@dataclass
class _GoldLine:
    tokens: list  # (text, lang)
    column: int
    y: int


def _target_line_tokens(lang: TargetLanguage, rng: random.Random, row: int) -> list:
    words = lang.line(rng, 3, 6).split()
    toks = [(w, TARGET) for w in words]
    if rng.random() < 0.25:
        at = rng.randint(1, len(toks))
        aside = [("(", TARGET)] + [(w, ENGLISH) for w in english_line(rng, 2, 3).split()] + [(")", TARGET)]
        toks[at:at] = aside
    if (row + 1) % 5 == 0:
        toks.insert(0, (str(row + 1), TARGET))
    return toks


def _page_layout(lang: TargetLanguage, rng: random.Random, rows: int) -> list[_GoldLine]:
    lines = []
    for r in range(rows):
        y = 80 + 48 * r
        lines.append(_GoldLine(_target_line_tokens(lang, rng, r), 0, y))
        lines.append(_GoldLine([(w, ENGLISH) for w in english_line(rng, 4, 7).split()], 1, y))
    return lines


_COLUMN_X = (60, 640)
_CHAR_W = 9


_COLUMN_W = 400


def _token_boxes(tokens: list, x0: int, y: int) -> list:
    # long lines are set tighter so they stay inside their column
    chars = sum(len(t) for t, _ in tokens) + len(tokens) - 1
    cw = min(float(_CHAR_W), _COLUMN_W / chars)
    boxes, x = [], float(x0)
    for text, _ in tokens:
        w = cw * len(text)
        boxes.append(BBox(round(x), y, round(x + w), y + 30))
        x += w + cw
    return boxes


def _vendor_word(text: str, box: BBox, last: bool) -> dict:
    symbols = [{"text": ch} for ch in text]
    symbols[-1]["property"] = {"detectedBreak": {"type": "LINE_BREAK" if last else "SPACE"}}
    return {
        "boundingBox": {
            "vertices": [
                {"x": box.x0, "y": box.y0},
                {"x": box.x1, "y": box.y0},
                {"x": box.x1, "y": box.y1},
                {"x": box.x0, "y": box.y1},
            ]
        },
        "symbols": symbols,
    }


@dataclass
class BilingualBundle:
    vendor: dict
    gold: Document
    langid_corpus: list
    pairs: list


def make_bilingual_bundle(seed: int = 7, pages: int = 3, rows: int = 14, noise: float = 0.2, n_langid: int = 1000, n_pairs: int = 500) -> BilingualBundle:
    """Build a noisy two-column OCR response, its gold document and training data.

    The vendor response lists lines row by row across both columns, the usual
    first-pass failure on two-column pages; the gold document lists the left
    column first.
    """
    lang = TargetLanguage(seed)
    rng = random.Random(seed * 7919 + 1)
    vendor_pages, gold_pages = [], []
    for pno in range(1, pages + 1):
        layout = _page_layout(lang, rng, rows)
        blocks = []
        for gl in layout:  # row-major: the reading-order damage
            boxes = _token_boxes(gl.tokens, _COLUMN_X[gl.column], gl.y)
            words = []
            for i, ((text, tlang), box) in enumerate(zip(gl.tokens, boxes)):
                seen = add_noise(text, rng, noise) if tlang == TARGET else text
                words.append(_vendor_word(seen, box, i == len(gl.tokens) - 1))
            blocks.append({"paragraphs": [{"words": words}]})
        vendor_pages.append({"width": 1100, "height": 1400, "blocks": blocks})
        ordered = sorted(layout, key=lambda g: (g.column, g.y))
        gold_lines = tuple(
            Line(f"g{pno}_{i}", tuple(Token(t, None, tl) for t, tl in gl.tokens), None, gl.column)
            for i, gl in enumerate(ordered)
        )
        gold_pages.append(Page(pno, gold_lines, 1100, 1400))
    vendor = {"responses": [{"fullTextAnnotation": {"pages": [p]}} for p in vendor_pages]}
    gold = Document("synthetic-gold", tuple(gold_pages), {"note": "synthetic test corpus"})

    lrng = random.Random(seed + 101)
    corpus = []
    for _ in range(n_langid):
        corpus.append((add_noise(lang.line(lrng), lrng, noise), TARGET))
        corpus.append((english_line(lrng), ENGLISH))
    prng = random.Random(seed + 202)
    pairs = []
    for _ in range(n_pairs):
        clean = " ".join(t for t, _ in _target_line_tokens(lang, prng, prng.randint(0, 99)))
        pairs.append((add_noise(clean, prng, noise), clean))
    return BilingualBundle(vendor, gold, corpus, pairs)


def transliterate_gold(doc: Document, table: RuleTable, target: str = TARGET) -> Document:
    from .translit import transliterate_document

    return transliterate_document(doc, table, target)


PIPELINE_TOML = """\
# End-to-end run over the bundled synthetic corpus.
seed = 7
out = "run"

[ingest]
input = "vendor_ocr.json"

[langid]
corpus = "langid_corpus.txt"

[reorder]
gap_ratio = 0.15

[mask]
target_lang = "kwk"
mask_langs = ["en"]
mask_numerals = true
mask_punct = ["(", ")"]

[correct]
pairs = "pairs.tsv"

[translit]
rules = "rules.tsv"
target_lang = "kwk"

[eval]
reference = "gold.json"
"""


def write_bundle(out_dir: PathLike, seed: int = 7) -> Path:
    """Write the bundled synthetic corpus and a pipeline config into ``out_dir``."""
    from .langid import write_corpus
    from .postcorrect import TrainingPair, write_pairs

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    b = make_bilingual_bundle(seed)
    (out / "vendor_ocr.json").write_text(json.dumps(b.vendor, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    save_document(b.gold, out / "gold_source.json")
    save_document(transliterate_gold(b.gold, fixture_rule_table()), out / "gold.json")
    write_corpus(b.langid_corpus, out / "langid_corpus.txt")
    write_pairs([TrainingPair(s, r) for s, r in b.pairs], out / "pairs.tsv")
    write_fixture_rules(out / "rules.tsv")
    (out / "pipeline.toml").write_text(PIPELINE_TOML, encoding="utf-8")
    return out


if __name__ == "__main__":
    import sys

    print(write_bundle(sys.argv[1] if len(sys.argv) > 1 else "data/synthetic"))
