"""Learn OCR confusions from aligned pairs and decode held-out noisy lines."""

from __future__ import annotations

from ocrfix.evaluate import cer
from ocrfix.postcorrect import BeamConfig, TrainingPair, align_pair, correct_line, train_channel, train_lm
from ocrfix.synth import noisy_pairs

pairs = noisy_pairs(800, seed=5, p=0.2)
train_pairs = [TrainingPair(s, r) for s, r in pairs[:500]]
test = pairs[500:]

channel = train_channel(train_pairs)
lm = train_lm([p.ref for p in train_pairs])
sample = next(p for p in train_pairs if p.src != p.ref)
print(f"edits turning {sample.src!r} into {sample.ref!r}:")
for op in align_pair(sample.src, sample.ref):
    if op.kind != "keep":
        print("  ", op)

cfg = BeamConfig(beam_width=8)
before = sum(cer(s, r) for s, r in test) / len(test)
after = sum(cer(correct_line(s, channel, lm, cfg), r) for s, r in test) / len(test)
print(f"\nmean CER on {len(test)} held-out lines: {before:.4f} -> {after:.4f}")

for s, r in test[:5]:
    out = correct_line(s, channel, lm, cfg)
    if s != r:
        print(f"\n  ocr : {s}\n  out : {out}\n  gold: {r}")
