"""Rule-table transliteration between orthographies.

Rules are applied in a single left-to-right pass. At each position the rule
with the longest matching source wins (earlier rules win ties); its target is
emitted and never rescanned. Characters no rule matches are copied.

Rule files are TSV::

    #orthography: boas-hunt -> umista
    # comment
    source<TAB>target

Rule content is data supplied by the user; the package ships only test
fixtures.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .docmodel import Document, PathLike, nfc
from .errors import DuplicateSource, ParseError

_HEADER = "#orthography:"


@dataclass(frozen=True)
class RuleTable:
    rules: tuple[tuple[str, str], ...] = ()
    name: str = ""
    source_orthography: str = ""
    target_orthography: str = ""
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        rules = tuple((nfc(s), nfc(t)) for s, t in self.rules)
        seen = set()
        for s, _ in rules:
            if not s:
                raise ValueError("rule source must be non-empty")
            if s in seen:
                raise DuplicateSource(s, 0)
            seen.add(s)
        object.__setattr__(self, "rules", rules)
        # first char -> rules sorted by descending source length, then table order
        index: dict = {}
        for order, (s, t) in enumerate(rules):
            index.setdefault(s[0], []).append((-len(s), order, s, t))
        object.__setattr__(self, "_index", {c: [(s, t) for _, _, s, t in sorted(v)] for c, v in index.items()})

    @property
    def sources(self) -> frozenset:
        return frozenset(s for s, _ in self.rules)


def load_rules(path: PathLike) -> RuleTable:
    path = Path(path)
    try:
        raw_lines = path.read_text(encoding="utf-8").splitlines()
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8") from exc
    src_orth = dst_orth = None
    rules: list[tuple[str, str]] = []
    first_seen: dict[str, int] = {}
    for no, raw in enumerate(raw_lines, 1):
        if raw.startswith(_HEADER):
            spec = raw[len(_HEADER) :]
            left, arrow, right = spec.partition("->")
            if not arrow or not left.strip() or not right.strip():
                raise ParseError(f"{path}:{no}: header must read '#orthography: <src> -> <dst>'")
            src_orth, dst_orth = left.strip(), right.strip()
            continue
        if raw.startswith("#") or not raw.strip():
            continue
        source, tab, target = raw.partition("\t")
        if not tab:
            raise ParseError(f"{path}:{no}: expected 'source<TAB>target'")
        if "\t" in target:
            raise ParseError(f"{path}:{no}: too many columns")
        source, target = nfc(source), nfc(target)
        if not source:
            raise ParseError(f"{path}:{no}: empty rule source")
        if source in first_seen:
            raise DuplicateSource(source, no)
        first_seen[source] = no
        rules.append((source, target))
    if src_orth is None:
        raise ParseError(f"{path}: missing '#orthography: <src> -> <dst>' header")
    return RuleTable(tuple(rules), path.stem, src_orth, dst_orth)


def transliterate(text: str, table: RuleTable) -> str:
    index = table._index
    out = []
    i, n = 0, len(text)
    while i < n:
        for source, target in index.get(text[i], ()):
            if text.startswith(source, i):
                out.append(target)
                i += len(source)
                break
        else:
            out.append(text[i])
            i += 1
    return nfc("".join(out))


def transliterate_document(doc: Document, table: RuleTable, target_lang: Optional[str] = None) -> Document:
    """Transliterate tokens that belong to the target language.

    Tokens flagged ``masked`` are skipped, and so are tokens labelled with a
    language other than ``target_lang`` when one is given. Tokens that
    transliterate to nothing are dropped.
    """
    pages = []
    for page in doc.pages:
        lines = []
        for line in page.lines:
            tokens = []
            for tok in line.tokens:
                if tok.masked or (target_lang is not None and tok.lang not in (None, target_lang)):
                    tokens.append(tok)
                    continue
                pieces = transliterate(tok.text, table).split()
                tokens.extend(replace(tok, text=p) for p in pieces)
            lines.append(replace(line, tokens=tuple(tokens)))
        pages.append(replace(page, lines=tuple(lines)))
    return replace(doc, pages=tuple(pages))
