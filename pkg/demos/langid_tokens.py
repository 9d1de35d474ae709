"""Train the hashed n-gram language identifier and label mixed-language text."""

from __future__ import annotations

from ocrfix.langid import TrainConfig, predict_line, predict_token, train
from ocrfix.synth import make_bilingual_bundle

bundle = make_bilingual_bundle(seed=7)
corpus = bundle.langid_corpus
cut = int(len(corpus) * 0.8)
model = train(corpus[:cut], TrainConfig(seed=0))
held = corpus[cut:]
acc = sum(predict_line(model, t)[0] == lab for t, lab in held) / len(held)
print(f"held-out line accuracy: {acc:.2%} on {len(held)} lines")

line = bundle.gold.pages[0].lines[0]
text = line.text
print(f"\nline: {text}")
for tok in line.tokens:
    print(f"  {tok.text:12s} gold={tok.lang:4s} predicted={predict_token(model, tok.text, text)}")
