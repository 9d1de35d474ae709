"""Full-pipeline runner driven by a TOML config.

Stages run in a fixed order and every stage boundary is a file in the output
directory, so intermediates can be inspected or diffed between runs. A
``manifest.json`` records the stages that ran with SHA-256 hashes of their
inputs and outputs.
"""

from __future__ import annotations

import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import evaluate, ingest, langid, maskio, postcorrect, translit
from .docmodel import PathLike, load_document, save_document
from .errors import ConfigError, OcrFixError

log = logging.getLogger(__name__)

STAGES = ("ingest", "langid-label", "reorder", "mask", "correct", "unmask", "translit", "eval")

_KNOWN = {
    "": {"seed", "out", "stages"},
    "ingest": {"input"},
    "langid": {"model", "corpus", "min_n", "max_n", "dimension", "epochs", "learning_rate", "batch_size"},
    "reorder": {"gap_ratio"},
    "mask": {"target_lang", "mask_langs", "mask_numerals", "mask_punct"},
    "correct": {"channel", "lm", "pairs", "command", "beam_width", "channel_weight", "max_insertions", "order", "channel_k", "lm_k"},
    "translit": {"rules", "target_lang"},
    "eval": {"reference", "w_insert", "w_delete", "w_move", "threshold"},
}


@dataclass
class PipelineConfig:
    base_dir: Path
    raw: dict
    seed: int = 0
    out: Path = Path("run")
    enabled: dict = field(default_factory=dict)

    def section(self, name: str) -> dict:
        return self.raw.get(name, {})

    def path(self, section: str, key: str) -> Optional[Path]:
        value = self.section(section).get(key)
        return None if value is None else self.base_dir / value

    def is_enabled(self, stage: str) -> bool:
        return self.enabled.get(stage, True)


def load_config(path: PathLike, out: Optional[PathLike] = None, seed: Optional[int] = None) -> PipelineConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    for key, value in raw.items():
        if isinstance(value, dict) and key != "stages":
            if key not in _KNOWN:
                raise ConfigError(f"{path}: unknown section [{key}]")
            unknown = set(value) - _KNOWN[key]
            if unknown:
                raise ConfigError(f"{path}: unknown keys in [{key}]: {sorted(unknown)}")
        elif key not in _KNOWN[""]:
            raise ConfigError(f"{path}: unknown top-level key {key!r}")
    stages = raw.get("stages", {})
    bad = set(stages) - set(STAGES)
    if bad:
        raise ConfigError(f"{path}: unknown stages {sorted(bad)}")
    base = path.parent
    cfg = PipelineConfig(
        base_dir=base,
        raw=raw,
        seed=int(seed if seed is not None else raw.get("seed", 0)),
        out=Path(out) if out is not None else base / raw.get("out", "run"),
        enabled={k: bool(v) for k, v in stages.items()},
    )
    return cfg


def preflight(cfg: PipelineConfig) -> None:
    """Fail before any stage runs when a needed input is missing."""
    problems = []

    def need(section: str, key: str, why: str):
        p = cfg.path(section, key)
        if p is None:
            problems.append(f"[{section}] {key} is required ({why})")
        elif not p.exists():
            problems.append(f"[{section}] {key}: {p} does not exist")

    need("ingest", "input", "the pipeline always starts from OCR output")
    if cfg.is_enabled("langid-label"):
        if cfg.path("langid", "model") and cfg.path("langid", "model").exists():
            pass
        elif cfg.path("langid", "corpus"):
            need("langid", "corpus", "training the language model")
        else:
            problems.append("[langid] needs an existing model or a training corpus")
    if cfg.is_enabled("mask") and "target_lang" not in cfg.section("mask"):
        problems.append("[mask] target_lang is required")
    if cfg.is_enabled("correct"):
        c = cfg.section("correct")
        if "command" in c:
            pass
        elif "channel" in c or "lm" in c:
            need("correct", "channel", "built-in corrector")
            need("correct", "lm", "built-in corrector")
        elif "pairs" in c:
            need("correct", "pairs", "training the corrector")
        else:
            problems.append("[correct] needs channel+lm, pairs or command")
    if cfg.is_enabled("translit"):
        need("translit", "rules", "translit enabled")
    if cfg.is_enabled("eval"):
        need("eval", "reference", "eval enabled")
    if problems:
        raise ConfigError("; ".join(problems))
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output directory {cfg.out}: {exc}") from exc


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class _Manifest:
    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.stages: list = []

    def _name(self, p: Path) -> str:
        for root in (self.cfg.out, self.cfg.base_dir):
            try:
                return p.resolve().relative_to(root.resolve()).as_posix()
            except ValueError:
                continue
        return p.as_posix()

    def record(self, stage: str, inputs, outputs) -> None:
        self.stages.append(
            {
                "stage": stage,
                "inputs": {self._name(p): sha256(p) for p in inputs},
                "outputs": {self._name(p): sha256(p) for p in outputs},
            }
        )
        log.info("stage %s done", stage)

    def write(self, status: str, failed: Optional[str] = None) -> None:
        body = {
            "status": status,
            "failed_stage": failed,
            "seed": self.cfg.seed,
            "stage_order": [s["stage"] for s in self.stages],
            "config": self.cfg.raw,
            "stages": self.stages,
        }
        (self.cfg.out / "manifest.json").write_text(
            json.dumps(body, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def mask_policy(section: dict) -> maskio.MaskPolicy:
    return maskio.MaskPolicy(
        target_lang=section["target_lang"],
        mask_langs=frozenset(section.get("mask_langs", [])),
        mask_numerals=bool(section.get("mask_numerals", True)),
        mask_punct=frozenset(section.get("mask_punct", ["(", ")"])),
    )


def ser_weights(section: dict) -> evaluate.SerWeights:
    return evaluate.SerWeights(
        float(section.get("w_insert", 1.0)),
        float(section.get("w_delete", 1.0)),
        float(section.get("w_move", 1.0)),
        float(section.get("threshold", 0.5)),
    )


def run_pipeline(cfg: PipelineConfig) -> int:
    """Run every enabled stage; returns a process exit code."""
    preflight(cfg)
    out = cfg.out
    manifest = _Manifest(cfg)
    stage = "preflight"
    try:
        stage = "ingest"
        current = out / "01_ingest.json"
        src = cfg.path("ingest", "input")
        save_document(ingest.import_ocr(src), current)
        manifest.record(stage, [src], [current])
        first_pass = current

        if cfg.is_enabled("langid-label"):
            lsec = cfg.section("langid")
            model_path = cfg.path("langid", "model")
            if model_path is None or not model_path.exists():
                stage = "langid-train"
                corpus_path = cfg.path("langid", "corpus")
                tc = langid.TrainConfig(
                    min_n=int(lsec.get("min_n", 1)),
                    max_n=int(lsec.get("max_n", 4)),
                    dimension=int(lsec.get("dimension", 1 << 18)),
                    epochs=int(lsec.get("epochs", 10)),
                    learning_rate=float(lsec.get("learning_rate", 0.1)),
                    batch_size=int(lsec.get("batch_size", 1)),
                    seed=cfg.seed,
                )
                model = langid.train(langid.read_corpus(corpus_path), tc)
                model_path = out / "langid.bin"
                langid.save_model(model, model_path)
                manifest.record(stage, [corpus_path], [model_path])
            else:
                model = langid.load_model(model_path)
            stage = "langid-label"
            nxt = out / "02_labeled.json"
            save_document(langid.label_document(model, load_document(current)), nxt)
            manifest.record(stage, [current, model_path], [nxt])
            current = nxt

        if cfg.is_enabled("reorder"):
            stage = "reorder"
            nxt = out / "03_reordered.json"
            gap = float(cfg.section("reorder").get("gap_ratio", 0.15))
            save_document(ingest.reorder_document(load_document(current), gap), nxt)
            manifest.record(stage, [current], [nxt])
            current = nxt

        sidecar_path = None
        if cfg.is_enabled("mask"):
            stage = "mask"
            nxt, sidecar_path = out / "04_masked.json", out / "04_sidecar.jsonl"
            masked, sidecar = maskio.mask_document(load_document(current), mask_policy(cfg.section("mask")))
            save_document(masked, nxt)
            maskio.save_sidecar(sidecar, sidecar_path)
            manifest.record(stage, [current], [nxt, sidecar_path])
            current = nxt

        if cfg.is_enabled("correct"):
            csec = cfg.section("correct")
            inputs = [current]
            if "command" in csec:
                corrector = postcorrect.external_corrector(csec["command"])
            else:
                if "channel" in csec:
                    ch_path, lm_path = cfg.path("correct", "channel"), cfg.path("correct", "lm")
                else:
                    stage = "correct-train"
                    pairs_path = cfg.path("correct", "pairs")
                    pairs = postcorrect.read_pairs(pairs_path)
                    ch_path, lm_path = out / "channel.json", out / "lm.json"
                    postcorrect.save_channel(postcorrect.train_channel(pairs, float(csec.get("channel_k", 0.1))), ch_path)
                    postcorrect.save_lm(
                        postcorrect.train_lm([p.ref for p in pairs], int(csec.get("order", 5)), float(csec.get("lm_k", 0.01))),
                        lm_path,
                    )
                    manifest.record(stage, [pairs_path], [ch_path, lm_path])
                beam = postcorrect.BeamConfig(
                    int(csec.get("beam_width", 8)),
                    float(csec.get("channel_weight", 1.0)),
                    int(csec.get("max_insertions", 1)),
                )
                corrector = postcorrect.beam_corrector(postcorrect.load_channel(ch_path), postcorrect.load_lm(lm_path), beam)
                inputs += [ch_path, lm_path]
            stage = "correct"
            nxt = out / "05_corrected.json"
            save_document(postcorrect.correct_document(load_document(current), corrector), nxt)
            manifest.record(stage, inputs, [nxt])
            current = nxt

        if cfg.is_enabled("unmask") and sidecar_path is not None:
            stage = "unmask"
            nxt = out / "06_unmasked.json"
            save_document(maskio.unmask_document(load_document(current), maskio.load_sidecar(sidecar_path)), nxt)
            manifest.record(stage, [current, sidecar_path], [nxt])
            current = nxt

        table = None
        target = cfg.section("translit").get("target_lang")
        if cfg.is_enabled("translit"):
            stage = "translit"
            rules_path = cfg.path("translit", "rules")
            table = translit.load_rules(rules_path)
            nxt = out / "07_translit.json"
            save_document(translit.transliterate_document(load_document(current), table, target), nxt)
            manifest.record(stage, [current, rules_path], [nxt])
            current = nxt

        if cfg.is_enabled("eval"):
            stage = "eval"
            ref_path = cfg.path("eval", "reference")
            ref = load_document(ref_path)
            weights = ser_weights(cfg.section("eval"))
            baseline_doc = load_document(first_pass)
            if table is not None:
                baseline_doc = translit.transliterate_document(baseline_doc, table, target)
            base_rep = evaluate.report(baseline_doc, ref, weights)
            rep = evaluate.report(load_document(current), ref, weights)
            outputs = [out / "report.json", out / "baseline_report.json", out / "report.txt"]
            outputs[0].write_text(rep.dumps(), encoding="utf-8")
            outputs[1].write_text(base_rep.dumps(), encoding="utf-8")
            text = evaluate.format_table({"First Pass": base_rep, "Corrected": rep})
            outputs[2].write_text(text, encoding="utf-8")
            manifest.record(stage, [current, first_pass, ref_path], outputs)
            print(text, end="")
    except (OcrFixError, OSError) as exc:
        log.error("stage %s failed: %s", stage, exc)
        manifest.write("failed", stage)
        raise
    manifest.write("ok")
    return 0
