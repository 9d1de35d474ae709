"""Character alignment of an OCR line with its gold transcription."""

from __future__ import annotations

from typing import NamedTuple, Optional

KEEP = "keep"
SUB = "sub"
DEL = "del"  # drop a source character
INS = "ins"  # add a reference character


class EditOp(NamedTuple):
    kind: str
    src: Optional[str]
    ref: Optional[str]


def align_pair(src: str, ref: str) -> list[EditOp]:
    """Minimal unit-cost edit script turning ``src`` into ``ref``.

    The traceback runs from the end of both strings and, among optimal moves,
    prefers keep, then substitute, then delete, then insert.
    """
    n, m = len(src), len(ref)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        d[i][0] = i
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        row, prev, a = d[i], d[i - 1], src[i - 1]
        for j in range(1, m + 1):
            diag = prev[j - 1] + (a != ref[j - 1])
            row[j] = min(diag, prev[j] + 1, row[j - 1] + 1)

    ops: list[EditOp] = []
    i, j = n, m
    while i or j:
        cur = d[i][j]
        if i and j and src[i - 1] == ref[j - 1] and d[i - 1][j - 1] == cur:
            ops.append(EditOp(KEEP, src[i - 1], ref[j - 1]))
            i, j = i - 1, j - 1
        elif i and j and d[i - 1][j - 1] + 1 == cur:
            ops.append(EditOp(SUB, src[i - 1], ref[j - 1]))
            i, j = i - 1, j - 1
        elif i and d[i - 1][j] + 1 == cur:
            ops.append(EditOp(DEL, src[i - 1], None))
            i -= 1
        else:
            ops.append(EditOp(INS, None, ref[j - 1]))
            j -= 1
    ops.reverse()
    return ops


def apply_script(src: str, ops: list[EditOp]) -> str:
    out, i = [], 0
    for op in ops:
        if op.kind == INS:
            out.append(op.ref)
            continue
        if src[i] != op.src:
            raise ValueError(f"script expects {op.src!r} at {i}, found {src[i]!r}")
        i += 1
        if op.kind in (KEEP, SUB):
            out.append(op.ref)
    if i != len(src):
        raise ValueError("script does not consume the whole source")
    return "".join(out)


def script_cost(ops: list[EditOp]) -> int:
    return sum(op.kind != KEEP for op in ops)
