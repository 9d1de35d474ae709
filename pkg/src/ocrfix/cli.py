"""Command-line entry point: one subcommand per pipeline stage plus ``run``.

Exit status: 0 on success, 1 on validation, protocol or I/O errors, 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from . import evaluate, ingest, langid, maskio, pipeline, postcorrect, translit
from .docmodel import load_document, save_document
from .errors import OcrFixError

log = logging.getLogger("ocrfix")


def _out(args, name: str) -> Path:
    p = Path(name)
    if args.out and not p.is_absolute():
        p = Path(args.out) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _config_defaults(args, section: str) -> None:
    """Fill unset arguments from the matching section of ``--config``."""
    if not args.config:
        return
    cfg = pipeline.load_config(args.config)
    for key, value in cfg.section(section).items():
        if getattr(args, key, None) is None:
            if isinstance(value, str) and key in _PATH_KEYS:
                value = str(cfg.base_dir / value)
            setattr(args, key, value)


_PATH_KEYS = {"input", "model", "corpus", "channel", "lm", "pairs", "rules", "reference"}


def cmd_ingest(args):
    _config_defaults(args, "ingest")
    save_document(ingest.import_ocr(_required(args, "input")), _out(args, args.output))


def cmd_langid_train(args):
    _config_defaults(args, "langid")
    tc = langid.TrainConfig(
        min_n=args.min_n or 1,
        max_n=args.max_n or 4,
        dimension=args.dimension or 1 << 18,
        epochs=args.epochs or 10,
        learning_rate=args.learning_rate or 0.1,
        batch_size=args.batch_size or 1,
        seed=args.seed,
    )
    model = langid.train(langid.read_corpus(_required(args, "corpus")), tc)
    langid.save_model(model, _out(args, _required(args, "model")))
    log.info("training accuracy %.4f", model.metadata["train_accuracy"])


def cmd_langid_label(args):
    _config_defaults(args, "langid")
    model = langid.load_model(_required(args, "model"))
    save_document(langid.label_document(model, load_document(args.input)), _out(args, args.output))


def cmd_reorder(args):
    _config_defaults(args, "reorder")
    gap = args.gap_ratio if args.gap_ratio is not None else 0.15
    save_document(ingest.reorder_document(load_document(args.input), gap), _out(args, args.output))


def cmd_mask(args):
    _config_defaults(args, "mask")
    policy = maskio.MaskPolicy(
        target_lang=_required(args, "target_lang"),
        mask_langs=frozenset(args.mask_langs or []),
        mask_numerals=True if args.mask_numerals is None else args.mask_numerals,
        mask_punct=frozenset(["(", ")"] if args.mask_punct is None else args.mask_punct),
    )
    masked, sidecar = maskio.mask_document(load_document(args.input), policy)
    save_document(masked, _out(args, args.output))
    maskio.save_sidecar(sidecar, _out(args, args.sidecar))


def cmd_correct_train(args):
    _config_defaults(args, "correct")
    pairs = postcorrect.read_pairs(_required(args, "pairs"))
    postcorrect.save_channel(
        postcorrect.train_channel(pairs, 0.1 if args.channel_k is None else args.channel_k), _out(args, _required(args, "channel"))
    )
    postcorrect.save_lm(
        postcorrect.train_lm([p.ref for p in pairs], args.order or 5, 0.01 if args.lm_k is None else args.lm_k),
        _out(args, _required(args, "lm")),
    )


def cmd_correct(args):
    _config_defaults(args, "correct")
    if args.command:
        corrector = postcorrect.external_corrector(args.command)
    else:
        cfg = postcorrect.BeamConfig(
            args.beam_width or 8,
            1.0 if args.channel_weight is None else args.channel_weight,
            1 if args.max_insertions is None else args.max_insertions,
        )
        corrector = postcorrect.beam_corrector(
            postcorrect.load_channel(_required(args, "channel")), postcorrect.load_lm(_required(args, "lm")), cfg
        )
    save_document(postcorrect.correct_document(load_document(args.input), corrector), _out(args, args.output))


def cmd_unmask(args):
    doc = maskio.unmask_document(load_document(args.input), maskio.load_sidecar(args.sidecar))
    save_document(doc, _out(args, args.output))


def cmd_translit(args):
    _config_defaults(args, "translit")
    table = translit.load_rules(_required(args, "rules"))
    doc = translit.transliterate_document(load_document(args.input), table, args.target_lang)
    save_document(doc, _out(args, args.output))


def cmd_eval(args):
    _config_defaults(args, "eval")
    weights = pipeline.ser_weights(
        {k: getattr(args, k) for k in ("w_insert", "w_delete", "w_move", "threshold") if getattr(args, k) is not None}
    )
    ref = load_document(_required(args, "reference"))
    rows = {}
    if args.baseline:
        rows["First Pass"] = evaluate.report(load_document(args.baseline), ref, weights)
    rep = evaluate.report(load_document(args.hyp), ref, weights)
    rows["Corrected" if args.baseline else "Output"] = rep
    _out(args, args.report).write_text(rep.dumps(), encoding="utf-8")
    sys.stdout.write(evaluate.format_table(rows))


def cmd_run(args):
    if not args.config:
        raise _Usage("run requires --config")
    cfg = pipeline.load_config(args.config, out=args.out, seed=args.seed_given)
    pipeline.run_pipeline(cfg)


class _Usage(Exception):
    pass


def _required(args, name: str):
    value = getattr(args, name, None)
    if value is None:
        raise _Usage(f"--{name.replace('_', '-')} is required (or set it in --config)")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ocrfix", description="OCR post-correction pipeline for multilingual legacy documents.")
    p.add_argument("--config", help="TOML pipeline config")
    p.add_argument("--out", help="output directory for relative output paths")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--verbose", "-v", action="store_true")
    sub = p.add_subparsers(dest="stage", metavar="STAGE", required=True)

    s = sub.add_parser("ingest", help="vendor OCR JSON -> canonical document")
    s.add_argument("--input")
    s.add_argument("--output", default="01_ingest.json")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("langid-train", help="train the language identifier")
    s.add_argument("--corpus")
    s.add_argument("--model", default=None)
    s.add_argument("--min-n", type=int)
    s.add_argument("--max-n", type=int)
    s.add_argument("--dimension", type=int)
    s.add_argument("--epochs", type=int)
    s.add_argument("--learning-rate", type=float)
    s.add_argument("--batch-size", type=int)
    s.set_defaults(func=cmd_langid_train)

    s = sub.add_parser("langid-label", help="label every token with a language")
    s.add_argument("--model")
    s.add_argument("--input", required=True)
    s.add_argument("--output", default="02_labeled.json")
    s.set_defaults(func=cmd_langid_label)

    s = sub.add_parser("reorder", help="detect columns and repair reading order")
    s.add_argument("--input", required=True)
    s.add_argument("--output", default="03_reordered.json")
    s.add_argument("--gap-ratio", type=float)
    s.set_defaults(func=cmd_reorder)

    s = sub.add_parser("mask", help="mask non-target tokens, write a sidecar")
    s.add_argument("--input", required=True)
    s.add_argument("--output", default="04_masked.json")
    s.add_argument("--sidecar", default="04_sidecar.jsonl")
    s.add_argument("--target-lang")
    s.add_argument("--mask-langs", nargs="*")
    s.add_argument("--mask-numerals", action=argparse.BooleanOptionalAction, default=None)
    s.add_argument("--mask-punct", nargs="*")
    s.set_defaults(func=cmd_mask)

    s = sub.add_parser("correct-train", help="train channel and character LM from pairs")
    s.add_argument("--pairs")
    s.add_argument("--channel", default=None)
    s.add_argument("--lm", default=None)
    s.add_argument("--order", type=int)
    s.add_argument("--channel-k", type=float)
    s.add_argument("--lm-k", type=float)
    s.set_defaults(func=cmd_correct_train)

    s = sub.add_parser("correct", help="post-correct masked lines")
    s.add_argument("--input", required=True)
    s.add_argument("--output", default="05_corrected.json")
    s.add_argument("--channel")
    s.add_argument("--lm")
    s.add_argument("--command", help="external corrector command line")
    s.add_argument("--beam-width", type=int)
    s.add_argument("--channel-weight", type=float)
    s.add_argument("--max-insertions", type=int)
    s.set_defaults(func=cmd_correct)

    s = sub.add_parser("unmask", help="reinsert masked tokens")
    s.add_argument("--input", required=True)
    s.add_argument("--sidecar", required=True)
    s.add_argument("--output", default="06_unmasked.json")
    s.set_defaults(func=cmd_unmask)

    s = sub.add_parser("translit", help="transliterate target-language tokens")
    s.add_argument("--input", required=True)
    s.add_argument("--rules")
    s.add_argument("--target-lang")
    s.add_argument("--output", default="07_translit.json")
    s.set_defaults(func=cmd_translit)

    s = sub.add_parser("eval", help="CER and SER against a gold document")
    s.add_argument("--hyp", required=True)
    s.add_argument("--ref", dest="reference")
    s.add_argument("--baseline", help="first-pass document for a comparison row")
    s.add_argument("--report", default="report.json")
    s.add_argument("--w-insert", type=float)
    s.add_argument("--w-delete", type=float)
    s.add_argument("--w-move", type=float)
    s.add_argument("--threshold", type=float)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("run", help="run the whole pipeline from --config")
    s.set_defaults(func=cmd_run)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore", category=UserWarning)
    args.seed_given = args.seed
    if args.seed is None:
        args.seed = 0
    try:
        args.func(args)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"ocrfix: error: {exc}", file=sys.stderr)
        return 2
    except (OcrFixError, OSError, json.JSONDecodeError) as exc:
        print(f"ocrfix {args.stage}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
