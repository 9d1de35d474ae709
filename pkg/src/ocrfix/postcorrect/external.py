"""Line-by-line correction through an external program.

The child reads UTF-8 lines on standard input and must write exactly one
corrected line per input line, in order, on standard output, then exit 0.
"""

from __future__ import annotations

import shlex
import subprocess
from typing import Optional, Sequence, Union

from ..errors import ProcessFailure, ProtocolError

Command = Union[str, Sequence[str]]


def correct_external(lines: Sequence[str], command: Command, timeout: Optional[float] = None) -> list[str]:
    argv = shlex.split(command) if isinstance(command, str) else list(command)
    if not argv:
        raise ValueError("empty corrector command")
    for i, line in enumerate(lines):
        if "\n" in line or "\r" in line:
            raise ValueError(f"input line {i} contains a line break")
    payload = "".join(f"{line}\n" for line in lines).encode("utf-8")
    try:
        proc = subprocess.run(argv, input=payload, capture_output=True, timeout=timeout, check=False)
    except FileNotFoundError as exc:
        raise ProcessFailure(f"cannot start corrector {argv[0]!r}: {exc}") from exc
    except subprocess.TimeoutExpired as exc:
        raise ProcessFailure(f"corrector timed out after {timeout}s") from exc
    stderr = proc.stderr.decode("utf-8", errors="replace")
    if proc.returncode != 0:
        raise ProcessFailure(
            f"corrector exited with status {proc.returncode}: {stderr.strip()[:500]}",
            returncode=proc.returncode,
            stderr=stderr,
        )
    try:
        out = proc.stdout.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ProtocolError(f"corrector output is not UTF-8: {exc}") from exc
    if out and not out.endswith("\n"):
        raise ProtocolError("corrector output does not end with a newline")
    result = [s[:-1] if s.endswith("\r") else s for s in out.split("\n")[:-1]] if out else []
    if len(result) != len(lines):
        raise ProtocolError(f"corrector returned {len(result)} lines for {len(lines)} inputs")
    return result


def external_corrector(command: Command, timeout: Optional[float] = None):
    def run(lines: Sequence[str]) -> list[str]:
        return correct_external(lines, command, timeout)

    return run
