"""Hide English, numerals and brackets from the corrector, then put them back."""

from __future__ import annotations

from ocrfix.docmodel import Line, Token
from ocrfix.maskio import MaskPolicy, mask_line, unmask_line

words = ["ḵäs", "(", "he", "said", ")", "łēdzi", "12"]
labels = ["kwk", "kwk", "en", "en", "kwk", "kwk", "kwk"]
policy = MaskPolicy("kwk", frozenset({"en"}))

kept, record = mask_line(Line("l1", tuple(Token(w) for w in words)), labels, policy)
print("original :", " ".join(words))
print("to model :", kept)
print("sidecar  :", record.to_json())

corrected = kept.replace("ḵäs", "ḵās")  # pretend the corrector changed a word
print("restored :", " ".join(unmask_line(corrected, record)))
