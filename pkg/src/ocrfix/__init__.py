"""OCR post-correction for multilingual legacy documents."""

from __future__ import annotations

from .docmodel import BBox, Document, Line, Page, Token, load_document, save_document, validate_document
from .errors import OcrFixError, OcrFixWarning
from .evaluate import EvalReport, SerWeights, align_lines, cer, report, ser
from .ingest import detect_columns, import_ocr, reorder_document, vendor_to_document
from .langid import LangIdModel, TrainConfig, label_document, predict_line, train
from .maskio import MaskPolicy, mask_document, unmask_document
from .translit import RuleTable, load_rules, transliterate, transliterate_document

__version__ = "0.1.0"

__all__ = [
    "BBox",
    "Document",
    "Line",
    "Page",
    "Token",
    "load_document",
    "save_document",
    "validate_document",
    "OcrFixError",
    "OcrFixWarning",
    "EvalReport",
    "SerWeights",
    "align_lines",
    "cer",
    "report",
    "ser",
    "detect_columns",
    "import_ocr",
    "reorder_document",
    "vendor_to_document",
    "LangIdModel",
    "TrainConfig",
    "label_document",
    "predict_line",
    "train",
    "MaskPolicy",
    "mask_document",
    "unmask_document",
    "RuleTable",
    "load_rules",
    "transliterate",
    "transliterate_document",
]
