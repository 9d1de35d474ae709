"""Character and structural error rates on small hand-made pages."""

from __future__ import annotations

from ocrfix.evaluate import align_lines, cer, ser

ref = [
    "the first line of the page",
    "a second line about boats",
    "third line with a number",
    "fourth line near the bottom",
    "and the very last line",
]

print("CER of one garbled line:", round(cer("the flrst llne of tho page", ref[0]), 4))

cases = {
    "identical": ref,
    "line 3 missing": ref[:2] + ref[3:],
    "lines 2 and 3 swapped": [ref[0], ref[2], ref[1], ref[3], ref[4]],
    "last two moved to top": ref[3:] + ref[:3],
    "extra junk line": ref + ["xq zzv pplk"],
}
for name, hyp in cases.items():
    score, counts = ser(hyp, ref)
    print(f"{name:24s} SER {score:5.1f}  {counts}  matching {align_lines(hyp, ref)}")
