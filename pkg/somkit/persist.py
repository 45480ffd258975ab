"""Run artifacts: code book JSON, assignment and modality CSV, run directories."""

from __future__ import annotations

import io
import json
import logging
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from .dataset import Standardization
from .errors import SomkitError, ValidationError
from .helpers import ensure_extension
from .quantize import CodeBook
from .superclass import SuperClassing
from .topology import MapTopology

logger = logging.getLogger(__name__)

CODEBOOK_SCHEMA = "somkit.codebook"
CODEBOOK_VERSION = 1

CODEBOOK_FILE = "codebook.json"
ASSIGNMENT_FILE = "assignment.csv"
REPORT_FILE = "report.txt"
SUPERCLASS_FILE = "superclasses.json"
CONFIG_FILE = "config.json"
MODALITY_FILE = "modalities.csv"


def dump_json(payload: Mapping[str, object]) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


@dataclass(frozen=True, eq=False)
class StoredCodebook:
    """A code book with what is needed to classify new raw rows into it."""

    codebook: CodeBook
    col_labels: List[str]
    standardization: Standardization
    metadata: Dict[str, object] = field(default_factory=dict)


def build_codebook_json(stored: StoredCodebook) -> str:
    """Codes are written as ``repr`` strings so they read back bit-exactly."""
    codebook = stored.codebook
    if len(stored.col_labels) != codebook.dim:
        raise ValidationError(f"{len(stored.col_labels)} column labels for {codebook.dim} components")
    document = {
        "schema": CODEBOOK_SCHEMA,
        "version": CODEBOOK_VERSION,
        "topology": codebook.topo.spec(),
        "columns": list(stored.col_labels),
        "standardization": stored.standardization.to_dict(),
        "codes": [[repr(float(x)) for x in row] for row in codebook.codes],
        "metadata": dict(stored.metadata),
    }
    return dump_json(document)


def parse_codebook_json(text: str) -> StoredCodebook:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"code book is not valid JSON: {exc}") from exc
    if document.get("schema") != CODEBOOK_SCHEMA:
        raise ValidationError("not a somkit code book")
    if document.get("version") != CODEBOOK_VERSION:
        raise ValidationError(f"unsupported code book version {document.get('version')!r}")
    topo = MapTopology.from_spec(document["topology"])
    codes = np.array([[float(x) for x in row] for row in document["codes"]], dtype=float)
    return StoredCodebook(
        CodeBook(topo, codes),
        list(document["columns"]),
        Standardization.from_dict(document["standardization"]),
        dict(document.get("metadata", {})),
    )


def load_codebook(path: Path) -> StoredCodebook:
    path = Path(path)
    if path.is_dir():
        path = path / CODEBOOK_FILE
    if not path.exists():
        raise ValidationError(f"missing code book {path}")
    return parse_codebook_json(path.read_text(encoding="utf-8"))


def _csv(frame: pd.DataFrame) -> str:
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def build_assignment_csv(
    row_labels: Sequence[str],
    units: Sequence[Optional[int]],
    super_of: Optional[Sequence[int]] = None,
    errors: Optional[Mapping[int, str]] = None,
    trained: Optional[Sequence[bool]] = None,
) -> str:
    """One line per row: id, unit, super-class and, when present, an error message.

    ``trained`` flags which rows took part in training; rows classified
    afterwards (incomplete rows under ``--missing exclude``) are marked 0.
    """
    errors = errors or {}
    if len(row_labels) != len(units):
        raise ValidationError("one unit per row is needed")
    columns: Dict[str, List[str]] = {"id": [], "unit": [], "superclass": []}
    for i, (label, unit) in enumerate(zip(row_labels, units)):
        columns["id"].append(str(label))
        if unit is None or i in errors:
            columns["unit"].append("")
            columns["superclass"].append("")
            continue
        columns["unit"].append(str(int(unit)))
        columns["superclass"].append("" if super_of is None else str(int(super_of[int(unit)])))
    if trained is not None:
        columns["trained"] = ["1" if flag else "0" for flag in trained]
    if errors:
        columns["error"] = [errors.get(i, "") for i in range(len(row_labels))]
    return _csv(pd.DataFrame(columns))


def read_assignment(path: Path) -> pd.DataFrame:
    path = Path(path)
    if path.is_dir():
        path = path / ASSIGNMENT_FILE
    if not path.exists():
        raise ValidationError(f"missing assignment file {path}")
    return pd.read_csv(path, dtype=str, keep_default_na=False)


def assigned_units(frame: pd.DataFrame) -> np.ndarray:
    """Unit column as integers; rows without a unit give -1."""
    return np.array([int(u) if u != "" else -1 for u in frame["unit"]], dtype=np.int64)


def build_modalities_csv(placement: Mapping[str, int], super_of: Optional[Sequence[int]] = None) -> str:
    frame = pd.DataFrame(
        {
            "modality": list(placement.keys()),
            "unit": [int(u) for u in placement.values()],
            "superclass": ["" if super_of is None else str(int(super_of[u])) for u in placement.values()],
        }
    )
    return _csv(frame)


def read_modalities(path: Path) -> Dict[str, int]:
    frame = pd.read_csv(Path(path), dtype=str, keep_default_na=False)
    return {row.modality: int(row.unit) for row in frame.itertuples(index=False)}


def build_superclass_json(sc: SuperClassing, components: Sequence[int]) -> str:
    document = {
        "method": sc.method,
        "count": sc.count,
        "labels": [int(x) for x in sc.super_of],
        "sizes": [int(x) for x in sc.sizes()],
        "contiguous": list(sc.contiguous),
        "components": [int(c) for c in components],
        "merges": [[a, b, repr(d)] for a, b, d in sc.merge_history],
    }
    return dump_json(document)


def parse_superclass_json(text: str) -> SuperClassing:
    document = json.loads(text)
    merges = tuple((int(a), int(b), float(d)) for a, b, d in document["merges"])
    return SuperClassing(
        np.array(document["labels"], dtype=np.int64),
        int(document["count"]),
        merges,
        tuple(bool(x) for x in document["contiguous"]),
        document["method"],
    )


def load_superclasses(run_dir: Path) -> Optional[SuperClassing]:
    path = Path(run_dir) / SUPERCLASS_FILE
    if not path.exists():
        return None
    return parse_superclass_json(path.read_text(encoding="utf-8"))


def write_run_dir(out: Path, files: Mapping[str, str]) -> Path:
    """Write all ``files`` into a fresh directory ``out`` or leave nothing behind.

    Files land in a hidden sibling directory first, which is renamed to
    ``out`` once every file is written.
    """
    out = Path(out)
    if out.exists():
        raise ValidationError(f"run directory {out} already exists")
    out.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{out.name}-", dir=out.parent))
    try:
        for name, text in files.items():
            (staging / name).write_text(text, encoding="utf-8")
        os.replace(staging, out)
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    logger.info("wrote %d artifacts to %s", len(files), out)
    return out


def write_svg(path: Path, svg_text: str) -> Path:
    path = Path(path)
    path = path.with_name(ensure_extension(path.name, "svg"))
    try:
        path.write_text(svg_text, encoding="utf-8")
    except OSError as exc:
        raise SomkitError(f"cannot write {path}: {exc}") from exc
    return path


__all__ = [
    "ASSIGNMENT_FILE",
    "CODEBOOK_FILE",
    "CODEBOOK_SCHEMA",
    "CODEBOOK_VERSION",
    "CONFIG_FILE",
    "MODALITY_FILE",
    "REPORT_FILE",
    "SUPERCLASS_FILE",
    "StoredCodebook",
    "assigned_units",
    "build_assignment_csv",
    "build_codebook_json",
    "build_modalities_csv",
    "build_superclass_json",
    "dump_json",
    "load_codebook",
    "load_superclasses",
    "parse_codebook_json",
    "parse_superclass_json",
    "read_assignment",
    "read_modalities",
    "write_run_dir",
    "write_svg",
]
