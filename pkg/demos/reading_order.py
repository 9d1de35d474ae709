"""Show how column detection repairs the reading order of a two-column page."""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from ocrfix.ingest import import_ocr, reorder_document
from ocrfix.synth import make_bilingual_bundle

bundle = make_bilingual_bundle(seed=7, pages=1, rows=6)
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "vendor.json"
    path.write_text(json.dumps(bundle.vendor, ensure_ascii=False), encoding="utf-8")
    first = import_ocr(path)

fixed = reorder_document(first)
print("first pass (vendor order):")
for text in first.pages[0].line_texts():
    print("   ", text)
print("\nafter column detection:")
for line in fixed.pages[0].lines:
    print(f"    col {line.column}  {line.text}")
print("\ngold:")
for text in bundle.gold.pages[0].line_texts():
    print("   ", text)
