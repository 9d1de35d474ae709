"""Generate the synthetic bilingual corpus and run the whole pipeline on it.

    python3 demos/end_to_end.py [workdir]
"""

from __future__ import annotations

import sys
import tempfile
from pathlib import Path

from ocrfix.pipeline import load_config, run_pipeline
from ocrfix.synth import write_bundle


def main(workdir: str | None = None) -> None:
    root = Path(workdir or tempfile.mkdtemp(prefix="ocrfix-"))
    bundle = write_bundle(root / "bundle")
    cfg = load_config(bundle / "pipeline.toml")
    run_pipeline(cfg)  # prints the First Pass / Corrected table
    print(f"\nintermediates in {cfg.out}:")
    for p in sorted(cfg.out.iterdir()):
        print(f"  {p.name:22s} {p.stat().st_size:>8d} bytes")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
