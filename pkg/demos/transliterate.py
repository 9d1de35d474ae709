"""Single-pass longest-match rewriting with a rule table.

The bundled rules are test fixtures, not a real orthography mapping.
"""

from __future__ import annotations

from ocrfix.synth import fixture_rule_table
from ocrfix.translit import RuleTable, transliterate

print(transliterate("xxx", RuleTable((("xx", "y"), ("x", "z")))))  # yz: longest match first
once = transliterate("aa", RuleTable((("a", "bb"),)))
print(once, transliterate(once, RuleTable((("a", "bb"),))))  # bbbb bbbb: no cascading

table = fixture_rule_table()
for src, dst in table.rules:
    print(f"  {src!r:8} -> {dst!r}")
for word in ["ḵäs", "łēdzi", "gäh", "x̣ᴇla"]:
    print(f"{word:8s} -> {transliterate(word, table)}")
