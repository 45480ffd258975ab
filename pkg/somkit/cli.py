"""Command-line surface: ``somkit <command> ...``.

Training commands write a run directory holding the code book, the
assignment, the quality report, the super-classes and the echoed
configuration. ``classify``, ``render`` and ``report`` work from a run
directory.
"""

from __future__ import annotations

import argparse
import logging
import secrets
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from . import persist
from .config import (
    ALIASES,
    DEFAULT_REPORT_RADIUS,
    DEFAULT_SUPERCLASSES,
    QUALITATIVE_ALGORITHMS,
    QUANTITATIVE_ALGORITHMS,
    RunConfig,
    canonical_algorithm,
    parse_topology,
)
from .dataset import DataMatrix, QualitativeColumn, Standardization, standardize
from .errors import IngestError, SomkitError, ValidationError
from .helpers import sanitize
from .init import initialize
from .metrics import (
    QualityReport,
    class_profiles,
    crosstab,
    deviations_for_labels,
    extended_distortion,
    quality_report,
)
from .qualitative import (
    ContingencyTable,
    ModalityMap,
    build_tables,
    chi2_correct_burt,
    chi2_correct_disjunctive,
    kacm1_train,
    kacm2_train,
    kacm_train,
    kdisj_train,
    korresp_train,
)
from .quantize import Assignment, CodeBook, assign_all, forgy, kbatch_train, scl_train, som_train, winner
from .rng import Stream
from .superclass import (
    SuperClassing,
    as_qualitative,
    contiguity_report,
    hierarchical_superclasses,
    string_superclasses,
)
from .topology import TOPOLOGY_KINDS
from .viz import (
    VIEWS,
    RenderOptions,
    render_cell_curves,
    render_codebook,
    render_component_plane,
    render_distance_octagons,
    render_label_map,
    render_pie_map,
)

logger = logging.getLogger(__name__)

ROLES = ("quantitative", "qualitative", "id", "ignore")
DEFAULT_MISSING_TOKENS = ("", "NA")


# --------------------------------------------------------------------------- ingestion


@dataclass(frozen=True, eq=False)
class IngestResult:
    """Parsed CSV: quantitative values (NaN where missing) and qualitative columns, all rows kept."""

    row_labels: Tuple[str, ...]
    col_labels: Tuple[str, ...]
    values: np.ndarray
    qualitative: Tuple[QualitativeColumn, ...]

    @property
    def n_rows(self) -> int:
        return len(self.row_labels)

    def empty_rows(self) -> np.ndarray:
        """Rows without any present quantitative value."""
        if self.values.shape[1] == 0:
            return np.ones(self.n_rows, dtype=bool)
        return np.isnan(self.values).all(axis=1)

    def data(self) -> Tuple[DataMatrix, np.ndarray]:
        """Data matrix over the rows with at least one value, and the indices of those rows."""
        if self.values.shape[1] == 0:
            raise ValidationError("no quantitative column in the input")
        keep = np.flatnonzero(~self.empty_rows())
        if keep.size == 0:
            raise ValidationError("every row has all quantitative values missing")
        if keep.size < self.n_rows:
            logger.warning("%d rows with no quantitative value left out", self.n_rows - keep.size)
        matrix = DataMatrix.from_array(
            self.values[keep],
            row_labels=[self.row_labels[i] for i in keep],
            col_labels=self.col_labels,
        )
        return matrix, keep


def read_header(path: Path) -> List[str]:
    try:
        frame = pd.read_csv(path, header=None, nrows=1, dtype=str, keep_default_na=False, encoding="utf-8")
    except (OSError, pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    return [str(x) for x in frame.iloc[0].tolist()]


def schema_from_flags(
    header: Sequence[str],
    id_column: Optional[str] = None,
    qualitative: Sequence[str] = (),
    ignore: Sequence[str] = (),
) -> Dict[str, str]:
    """Every header column is quantitative unless named as id, qualitative or ignored."""
    schema = {name: "quantitative" for name in header}
    for name, role in [(id_column, "id")] + [(q, "qualitative") for q in qualitative] + [(g, "ignore") for g in ignore]:
        if name is None:
            continue
        if name not in schema:
            raise IngestError("schema names an unknown column", column=name)
        schema[name] = role
    return schema


def _parse_number(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise IngestError(f"cannot parse {text!r} as a number", row=row, column=column) from None
    if not np.isfinite(value):
        raise IngestError(f"non-finite value {text!r}", row=row, column=column)
    return value


def ingest_csv(
    path: Path,
    schema: Mapping[str, str],
    missing_tokens: Sequence[str] = DEFAULT_MISSING_TOKENS,
) -> IngestResult:
    """Read a UTF-8 CSV with a header row; ``schema`` gives the role of every column.

    Rows are numbered from 1 after the header in error messages.
    """
    path = Path(path)
    header = read_header(path)
    if len(set(header)) != len(header):
        duplicate = next(name for name in header if header.count(name) > 1)
        raise IngestError("duplicate column name", column=duplicate)
    for name, role in schema.items():
        if name not in header:
            raise IngestError("schema names an unknown column", column=name)
        if role not in ROLES:
            raise IngestError(f"unknown column role {role!r}", column=name)
    for name in header:
        if name not in schema:
            raise IngestError("column has no role in the schema", column=name)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    missing = set(missing_tokens)
    n = len(frame)
    quantitative = [c for c in header if schema[c] == "quantitative"]
    values = np.full((n, len(quantitative)), np.nan)
    for j, column in enumerate(quantitative):
        for i, cell in enumerate(frame[column].tolist()):
            text = cell.strip()
            if text in missing or cell in missing:
                continue
            values[i, j] = _parse_number(text, i + 1, column)
    qualitative = []
    for column in (c for c in header if schema[c] == "qualitative"):
        cells = [None if (c.strip() in missing or c in missing) else c.strip() for c in frame[column].tolist()]
        qualitative.append(QualitativeColumn.from_values(column, cells))
    ids = [c for c in header if schema[c] == "id"]
    if len(ids) > 1:
        raise IngestError("only one id column is allowed", column=ids[1])
    if ids:
        labels = [c.strip() for c in frame[ids[0]].tolist()]
        seen = set()
        for i, label in enumerate(labels):
            if label in seen:
                raise IngestError(f"duplicate id {label!r}", row=i + 1, column=ids[0])
            seen.add(label)
    else:
        labels = [str(i + 1) for i in range(n)]
    logger.info("read %d rows, %d quantitative and %d qualitative columns from %s",
                n, len(quantitative), len(qualitative), path)
    return IngestResult(tuple(labels), tuple(quantitative), values, tuple(qualitative))


def read_contingency(path: Path) -> ContingencyTable:
    """Counts table: first column holds the row labels, header holds the column labels."""
    try:
        frame = pd.read_csv(Path(path), index_col=0, dtype=str, keep_default_na=False, encoding="utf-8")
    except (OSError, pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    counts = np.zeros(frame.shape, dtype=np.int64)
    for i in range(frame.shape[0]):
        for j, column in enumerate(frame.columns):
            text = frame.iat[i, j].strip()
            if not text.isdigit():
                raise IngestError(f"count {text!r} is not a non-negative integer", row=i + 1, column=str(column))
            counts[i, j] = int(text)
    return ContingencyTable(counts, [str(x) for x in frame.index], [str(x) for x in frame.columns])


# --------------------------------------------------------------------------- reports


def _num(value: Optional[float], digits: int = 6) -> str:
    return "undefined" if value is None else f"{value:.{digits}g}"


def _pct(value: Optional[float], digits: int) -> str:
    return "undefined" if value is None else f"{value:.{digits}f}"


def format_quality(report: QualityReport) -> List[str]:
    """Summary line in the order Dist | class sizes | Wilks | %inert, then the other measures."""
    sizes = " ".join(str(int(c)) for c in report.class_sizes)
    lines = [
        "Dist | class sizes | Wilks | %inert",
        f"{_num(report.distortion)} | {sizes} | {_num(report.wilks_lambda, 4)} | {_pct(report.explained_inertia_pct, 1)}",
        "",
        f"distortion            {_num(report.distortion)}",
        f"extended distortion   {_num(report.extended_distortion)} (r={report.radius})",
        f"SS-intra              {_num(report.ss_intra)}",
        f"Wilks lambda          {_num(report.wilks_lambda, 4)}",
        f"explained inertia %   {_pct(report.explained_inertia_pct, 2)}",
    ]
    lines.extend(f"note: {note}" for note in report.notes)
    return lines


def format_superclasses(sc: SuperClassing, components: Sequence[int]) -> List[str]:
    lines = [f"super-classes ({sc.method}, S={sc.count})"]
    for label, size in enumerate(sc.sizes()):
        state = "contiguous" if sc.contiguous[label] else f"{components[label]} pieces"
        units = " ".join(str(u) for u in sc.members(label))
        lines.append(f"  SC{label + 1}: {int(size)} units, {state}: {units}")
    return lines


def format_table(title: str, row_names: Sequence[str], col_names: Sequence[str], table: np.ndarray) -> List[str]:
    width = max([len(str(c)) for c in col_names] + [9])
    label_width = max([len(r) for r in row_names] + [len(title)])
    lines = [title.ljust(label_width) + " " + " ".join(str(c).rjust(width) for c in col_names)]
    for name, row in zip(row_names, table):
        lines.append(name.ljust(label_width) + " " + " ".join(f"{v:{width}.3f}" for v in row))
    return lines


def format_deviations(labels: np.ndarray, n_units: int, qual: QualitativeColumn) -> List[str]:
    table = deviations_for_labels(labels, n_units, qual)
    return format_table(f"deviations {qual.name}", qual.level_names, [f"u{u}" for u in range(n_units)], table)


def format_superclass_crossing(sc: SuperClassing, assignment: Assignment, qual: QualitativeColumn) -> List[str]:
    """Counts and deviations of ``qual`` across super-classes."""
    column = as_qualitative(sc, assignment)
    table = crosstab(column.codes, sc.count, qual).astype(float)
    lines = format_table(f"{qual.name} by super-class", qual.level_names, column.level_names, table)
    lines.append("")
    lines.extend(format_table(f"deviations {qual.name} by super-class", qual.level_names, column.level_names,
                              deviations_for_labels(column.codes, sc.count, qual)))
    return lines


# --------------------------------------------------------------------------- training


def _superclassing(codebook: CodeBook, config: RunConfig) -> Tuple[SuperClassing, List[int]]:
    if config.superclass_method == "string":
        sc = string_superclasses(codebook, config.superclasses, config.seed)
    else:
        sc = hierarchical_superclasses(codebook, config.superclasses, config.linkage)
    return sc, contiguity_report(sc, codebook.topo)


def _train_quantitative(config: RunConfig, ingest: IngestResult) -> Dict[str, str]:
    data, kept = ingest.data()
    scaled, transform = standardize(data, config.standardize)
    train = scaled
    if config.missing == "exclude" and scaled.has_missing:
        train = scaled.complete()
        logger.warning("%d incomplete rows left out of training", scaled.n_rows - train.n_rows)
    config.validate(n_cols=train.n_cols, has_missing=train.has_missing)
    n = train.n_rows
    iterations = config.resolve_iterations(n)
    radii = config.resolve_radii(iterations, n)
    init_seed, train_seed = Stream(config.seed).spawn_seeds(2)
    codes0 = initialize(config.init, train, config.topology, init_seed)
    logger.info("%s: %d units, %d iterations, seed %d", config.algorithm, codes0.unit_count, iterations, config.seed)
    trajectory: List[Tuple[int, int, float]] = []
    notes: List[str] = []
    if config.algorithm == "forgy":
        result = forgy(train, codes0, max_iters=iterations)
        codebook = result.codebook
        notes.append(f"forgy: {result.iterations} sweeps")
    elif config.algorithm == "kbatch":
        sweeps: List[Tuple[CodeBook, Assignment]] = []
        batch = kbatch_train(train, codes0, radii, max_iters=iterations,
                             on_step=lambda _, cb, assignment: sweeps.append((cb, assignment)))
        for sweep, ((cb, assignment), r) in enumerate(zip(sweeps, batch.radii_used), start=1):
            trajectory.append((sweep, r, extended_distortion(train, cb, r, assignment)))
        codebook = batch.codebook
        state = "converged" if batch.converged else "stopped without convergence"
        notes.append(f"kbatch: {batch.iterations} sweeps, {state}, final radius {batch.radius}")
    elif config.algorithm == "scl":
        codebook = scl_train(train, codes0, config.gain_schedule(iterations), train_seed)
    else:
        codebook = som_train(
            train, codes0, config.gain_schedule(iterations), radii, train_seed, missing_mode=config.missing
        )
    assignment = assign_all(codebook, scaled)
    sc, components = _superclassing(codebook, config)

    units: List[Optional[int]] = [None] * ingest.n_rows
    trained_flags = [False] * ingest.n_rows
    errors: Dict[int, str] = {}
    trained_rows = set(train.row_labels)
    for k, row in enumerate(kept):
        units[row] = int(assignment.class_of[k])
        trained_flags[row] = scaled.row_labels[k] in trained_rows
    for row in np.flatnonzero(ingest.empty_rows()):
        errors[int(row)] = "all components missing"

    lines = [
        f"somkit {config.algorithm} on {config.topology.spec()}, seed {config.seed}",
        f"rows: {ingest.n_rows} read, {n} used for training",
        f"iterations: {iterations}, radius schedule: {radii.describe()}",
        "",
    ]
    lines.extend(format_quality(quality_report(scaled, codebook, radius=config.report_radius)))
    lines.extend(f"note: {note}" for note in notes)
    lines.append("")
    lines.extend(format_superclasses(sc, components))
    if trajectory:
        lines.append("")
        lines.append("sweep radius extended_distortion")
        lines.extend(f"{s} {r} {_num(v)}" for s, r, v in trajectory)
    profiles = class_profiles(scaled, assignment)
    lines.append("")
    lines.extend(format_table("class means", [f"u{u}" for u in range(codebook.unit_count)],
                              scaled.col_labels, np.nan_to_num(profiles.means)))
    for qual in ingest.qualitative:
        codes = np.array([qual.codes[i] for i in kept])
        sub = QualitativeColumn(qual.name, qual.level_names, codes)
        lines.append("")
        lines.extend(format_deviations(assignment.class_of, codebook.unit_count, sub))

    stored = persist.StoredCodebook(codebook, list(data.col_labels), transform,
                                    {"algorithm": config.algorithm})
    return {
        persist.CODEBOOK_FILE: persist.build_codebook_json(stored),
        persist.ASSIGNMENT_FILE: persist.build_assignment_csv(
            ingest.row_labels, units, sc.super_of, errors,
            trained=trained_flags if config.missing == "exclude" else None,
        ),
        persist.REPORT_FILE: "\n".join(lines) + "\n",
        persist.SUPERCLASS_FILE: persist.build_superclass_json(sc, components),
        persist.CONFIG_FILE: persist.dump_json(
            {**config.to_dict(), "resolved_iterations": iterations, "resolved_radius_schedule": radii.describe()}
        ),
    }


def _train_qualitative(
    config: RunConfig,
    ingest: Optional[IngestResult],
    contingency: Optional[ContingencyTable],
) -> Dict[str, str]:
    quals = list(ingest.qualitative) if ingest is not None else []
    config.validate(n_qualitative=len(quals), contingency=contingency is not None)
    topo, seed = config.topology, config.seed
    tables = build_tables(quals, ingest.row_labels) if quals else None
    columns: List[str]
    report_data: Optional[DataMatrix] = None
    if config.algorithm == "korresp":
        table = contingency if contingency is not None else tables.contingency
        p, q = table.shape
        iterations = config.resolve_iterations(p + q)
        radii = config.resolve_radii(iterations, p + q)
        result: ModalityMap = korresp_train(table, topo, config.gain_schedule(iterations), radii, seed, iterations)
        columns = [f"col:{c}" for c in table.col_labels] + [f"row:{r}" for r in table.row_labels]
    elif config.algorithm == "kdisj":
        D = tables.disjunctive
        iterations = config.resolve_iterations(D.n_individuals + D.n_modalities)
        radii = config.resolve_radii(iterations, D.n_individuals + D.n_modalities)
        result = kdisj_train(D, topo, config.gain_schedule(iterations), radii, seed, iterations)
        columns = list(D.modality_labels) + list(D.row_labels)
    else:
        D, B = tables.disjunctive, tables.burt
        rows = D.n_individuals if config.algorithm == "kacm1" else D.n_modalities
        iterations = config.resolve_iterations(rows)
        radii = config.resolve_radii(iterations, rows)
        gain = config.gain_schedule(iterations)
        if config.algorithm == "kacm":
            result = kacm_train(B, topo, gain, radii, seed, iterations)
            report_data = chi2_correct_burt(B).as_data()
        elif config.algorithm == "kacm2":
            result = kacm2_train(D, B, topo, gain, radii, seed, iterations)
            report_data = chi2_correct_burt(B).as_data()
        else:
            result = kacm1_train(D, B, topo, gain, radii, seed, iterations)
            report_data = chi2_correct_disjunctive(D).as_data()
        columns = list(D.modality_labels)
    logger.info("%s: %d units, %d iterations, seed %d", config.algorithm, topo.unit_count, iterations, seed)
    codebook = result.codebook
    sc, components = _superclassing(codebook, config)

    lines = [
        f"somkit {config.algorithm} on {topo.spec()}, seed {seed}",
        f"iterations: {iterations}, radius schedule: {radii.describe()}",
        "",
    ]
    if report_data is not None:
        lines.extend(format_quality(quality_report(report_data, codebook, radius=config.report_radius)))
        lines.append("")
    lines.append("unit modalities")
    per_unit: Dict[int, List[str]] = {}
    for label, unit in result.modality_units.items():
        per_unit.setdefault(unit, []).append(label)
    lines.extend(f"u{u}: {', '.join(per_unit[u])}" for u in sorted(per_unit))
    lines.append("")
    lines.extend(format_superclasses(sc, components))

    if result.individual_units is not None:
        labels = result.individual_units
        for qual in quals:
            codes = np.array([qual.codes[i] for i in tables.kept_rows])
            lines.append("")
            lines.extend(format_deviations(labels, topo.unit_count, QualitativeColumn(qual.name, qual.level_names, codes)))
        assignment_csv = persist.build_assignment_csv(
            list(tables.disjunctive.row_labels), [int(u) for u in labels], sc.super_of
        )
    else:
        names = list(result.modality_units.keys())
        assignment_csv = persist.build_assignment_csv(names, list(result.modality_units.values()), sc.super_of)

    stored = persist.StoredCodebook(codebook, columns, Standardization.identity(codebook.dim),
                                    {"algorithm": config.algorithm})
    return {
        persist.CODEBOOK_FILE: persist.build_codebook_json(stored),
        persist.ASSIGNMENT_FILE: assignment_csv,
        persist.REPORT_FILE: "\n".join(lines) + "\n",
        persist.SUPERCLASS_FILE: persist.build_superclass_json(sc, components),
        persist.CONFIG_FILE: persist.dump_json(
            {**config.to_dict(), "resolved_iterations": iterations, "resolved_radius_schedule": radii.describe()}
        ),
        persist.MODALITY_FILE: persist.build_modalities_csv(result.modality_units, sc.super_of),
    }


def config_from_args(args: argparse.Namespace, algorithm: str) -> RunConfig:
    topo = parse_topology(args.topology, args.rows, args.cols)
    seed = args.seed if args.seed is not None else secrets.randbits(32)
    superclasses = args.superclasses if args.superclasses is not None else min(DEFAULT_SUPERCLASSES, topo.unit_count)
    return RunConfig(
        algorithm=algorithm,
        topology=topo,
        seed=seed,
        init=args.init,
        gain=args.gain,
        eps0=args.eps0,
        eps_final=args.eps_final,
        iterations=args.iters,
        radius_schedule=args.radius_schedule,
        standardize=args.standardize,
        missing=args.missing,
        superclasses=superclasses,
        linkage=args.linkage,
        superclass_method=args.superclass_method,
        report_radius=args.report_radius,
    )


def _ingest_from_args(args: argparse.Namespace, path: Path) -> IngestResult:
    header = read_header(path)
    schema = schema_from_flags(header, args.id, _split(args.qualitative), _split(args.ignore))
    return ingest_csv(path, schema, _missing_tokens(args))


def _split(values: Optional[Sequence[str]]) -> List[str]:
    out: List[str] = []
    for value in values or ():
        out.extend(v.strip() for v in value.split(",") if v.strip())
    return out


def _missing_tokens(args: argparse.Namespace) -> Tuple[str, ...]:
    if args.missing_token is None:
        return DEFAULT_MISSING_TOKENS
    return ("", args.missing_token)


def _default_out(algorithm: str, source: Optional[Path], seed: int) -> Path:
    stem = sanitize(source.stem) if source is not None else "table"
    return Path(f"{algorithm}-{stem}-seed{seed}")


def cmd_train(args: argparse.Namespace) -> int:
    algorithm = canonical_algorithm(args.command)
    config = config_from_args(args, algorithm)
    source = Path(args.data) if args.data else None
    if not config.is_qualitative:
        if source is None:
            raise ValidationError(f"{algorithm} needs a data file")
        files = _train_quantitative(config, _ingest_from_args(args, source))
    else:
        contingency = read_contingency(Path(args.contingency)) if args.contingency else None
        if contingency is not None and algorithm != "korresp":
            raise ValidationError("--contingency applies to korresp only")
        if contingency is None and source is None:
            raise ValidationError(f"{algorithm} needs a data file")
        ingest = _ingest_from_args(args, source) if source is not None and contingency is None else None
        files = _train_qualitative(config, ingest, contingency)
        if contingency is not None:
            source = Path(args.contingency)
    out = Path(args.out) if args.out else _default_out(algorithm, source, config.seed)
    persist.write_run_dir(out, files)
    print(out)
    return 0


# --------------------------------------------------------------------------- classify, render, report


def _stored_and_superclasses(target: Path) -> Tuple[persist.StoredCodebook, Optional[SuperClassing]]:
    stored = persist.load_codebook(target)
    sc = persist.load_superclasses(target) if target.is_dir() else None
    return stored, sc


def _standardized_values(stored: persist.StoredCodebook, ingest: IngestResult) -> np.ndarray:
    """Columns of the input matched to the code book by name, then standardized."""
    missing = [c for c in stored.col_labels if c not in ingest.col_labels]
    if missing or len(ingest.col_labels) != len(stored.col_labels):
        raise ValidationError(
            f"code book expects columns {', '.join(stored.col_labels)}; "
            f"input has {', '.join(ingest.col_labels)}"
        )
    order = [ingest.col_labels.index(c) for c in stored.col_labels]
    return stored.standardization.apply_values(ingest.values[:, order])


def classify_rows(stored: persist.StoredCodebook, values: np.ndarray) -> Tuple[List[Optional[int]], Dict[int, str]]:
    units: List[Optional[int]] = []
    errors: Dict[int, str] = {}
    for i, row in enumerate(values):
        if np.isnan(row).all():
            units.append(None)
            errors[i] = "all components missing"
            continue
        units.append(winner(stored.codebook, row))
    return units, errors


def cmd_classify(args: argparse.Namespace) -> int:
    target = Path(args.codebook)
    stored, sc = _stored_and_superclasses(target)
    ingest = _ingest_from_args(args, Path(args.data))
    values = _standardized_values(stored, ingest)
    if values.shape[1] != stored.codebook.dim:
        raise ValidationError(f"data has {values.shape[1]} columns, codes have {stored.codebook.dim}")
    units, errors = classify_rows(stored, values)
    if errors:
        logger.warning("%d rows could not be classified", len(errors))
    text = persist.build_assignment_csv(ingest.row_labels, units, sc.super_of if sc else None, errors)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _units_by_id(run_dir: Path) -> Dict[str, int]:
    frame = persist.read_assignment(run_dir)
    units = persist.assigned_units(frame)
    return {label: int(u) for label, u in zip(frame["id"], units) if u >= 0}


def _qual_on_map(ingest: IngestResult, name: str, units_by_id: Mapping[str, int], n_units: int) -> Tuple[Assignment, QualitativeColumn]:
    by_name = {q.name: q for q in ingest.qualitative}
    if name not in by_name:
        raise ValidationError(f"no qualitative column {name!r} in the data (use --qualitative)")
    qual = by_name[name]
    rows = [i for i, label in enumerate(ingest.row_labels) if label in units_by_id]
    if not rows:
        raise ValidationError("no data row matches an id of the run's assignment")
    assignment = Assignment.from_classes([units_by_id[ingest.row_labels[i]] for i in rows], n_units)
    return assignment, QualitativeColumn(qual.name, qual.level_names, qual.codes[rows])


def _annotations(assignment: Assignment, qual: QualitativeColumn) -> Dict[int, str]:
    table = crosstab(assignment, assignment.unit_count, qual)
    notes = {}
    for unit in range(assignment.unit_count):
        if table[:, unit].sum():
            notes[unit] = ", ".join(str(int(c)) for c in table[:, unit])
    return notes


def cmd_render(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    stored, sc = _stored_and_superclasses(run_dir)
    codebook = stored.codebook
    topo = codebook.topo
    opts = RenderOptions(cell_size_px=args.cell, margin=args.margin, superclass_fill=args.fill)
    shade = sc.super_of if (sc is not None and args.shade) else None
    ingest = _ingest_from_args(args, Path(args.data)) if args.data else None
    view = args.view
    if view == "codebook":
        svg = render_codebook(topo, codebook, opts, shade)
    elif view == "octagons":
        svg = render_distance_octagons(topo, codebook, opts, shade)
    elif view == "plane":
        svg = render_component_plane(topo, codebook, component=args.component, opts=opts, superclasses=shade)
    elif view == "curves":
        if ingest is None:
            raise ValidationError("the curves view needs --data")
        values = _standardized_values(stored, ingest)
        keep = ~np.isnan(values).all(axis=1)
        data = DataMatrix.from_array(values[keep], col_labels=stored.col_labels)
        svg = render_cell_curves(topo, data, assign_all(codebook, data), opts, shade)
    elif view == "pies":
        if ingest is None or not args.column:
            raise ValidationError("the pies view needs --data and --column")
        assignment, qual = _qual_on_map(ingest, args.column, _units_by_id(run_dir), topo.unit_count)
        svg = render_pie_map(topo, assignment, qual, opts, shade)
    else:
        modality_file = run_dir / persist.MODALITY_FILE
        if modality_file.exists():
            placements = persist.read_modalities(modality_file)
        else:
            placements = _units_by_id(run_dir)
        notes = None
        if ingest is not None and args.column:
            assignment, qual = _qual_on_map(ingest, args.column, _units_by_id(run_dir), topo.unit_count)
            notes = _annotations(assignment, qual)
        svg = render_label_map(topo, placements, opts, shade, notes)
    out = Path(args.out) if args.out else run_dir / f"{view}.svg"
    print(persist.write_svg(out, svg))
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    path = run_dir / persist.REPORT_FILE
    if not path.exists():
        raise ValidationError(f"missing report {path}")
    lines = [path.read_text(encoding="utf-8").rstrip("\n")]
    if args.data:
        stored = persist.load_codebook(run_dir)
        ingest = _ingest_from_args(args, Path(args.data))
        units = _units_by_id(run_dir)
        sc = persist.load_superclasses(run_dir)
        for qual in ingest.qualitative:
            assignment, sub = _qual_on_map(ingest, qual.name, units, stored.codebook.unit_count)
            lines.append("")
            lines.extend(format_deviations(assignment.class_of, assignment.unit_count, sub))
            if sc is not None and sc.count > 1:
                lines.append("")
                lines.extend(format_superclass_crossing(sc, assignment, sub))
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


# --------------------------------------------------------------------------- parser


def _add_schema_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--id", help="column holding row identifiers")
    parser.add_argument("--qualitative", action="append", help="qualitative column(s), comma separated")
    parser.add_argument("--ignore", action="append", help="column(s) to skip, comma separated")
    parser.add_argument("--missing-token", help='extra token marking a missing cell (default: empty or "NA")')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="somkit", description="Kohonen maps for data analysis.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug")
    sub = parser.add_subparsers(dest="command", required=True)

    train = argparse.ArgumentParser(add_help=False)
    train.add_argument("data", nargs="?", help="input CSV with a header row")
    train.add_argument("--rows", type=int, default=10)
    train.add_argument("--cols", type=int, default=10)
    train.add_argument("--topology", default="grid", choices=sorted(set(TOPOLOGY_KINDS) | {"hex"}))
    train.add_argument("--radius-schedule", help='e.g. "2@0,1@2N,0@4N"')
    train.add_argument("--eps0", type=float, default=0.5)
    train.add_argument("--eps-final", type=float, default=0.01)
    train.add_argument("--gain", default="harmonic", choices=("constant", "linear", "harmonic"))
    train.add_argument("--init", default="I", choices=("I", "II", "III"))
    train.add_argument("--seed", type=int)
    train.add_argument("--iters", help='iteration count, literal or a multiple of N such as "6N"')
    train.add_argument("--standardize", default="none", choices=("none", "center", "zscore"))
    train.add_argument("--missing", default="use", choices=("use", "exclude"))
    train.add_argument("--superclasses", type=int)
    train.add_argument("--linkage", default="ward", choices=("ward", "complete", "average"))
    train.add_argument("--superclass-method", default="hierarchical", choices=("hierarchical", "string"))
    train.add_argument("--report-radius", type=int, default=DEFAULT_REPORT_RADIUS,
                       help="neighbourhood radius of the extended distortion in the report")
    train.add_argument("--contingency", help="counts table for korresp (first column holds row labels)")
    train.add_argument("--out", help="run directory to create")
    _add_schema_flags(train)

    names = list(QUANTITATIVE_ALGORITHMS) + list(QUALITATIVE_ALGORITHMS) + sorted(ALIASES)
    for name in names:
        command = sub.add_parser(name, parents=[train], help=f"train with {ALIASES.get(name, name)}")
        command.set_defaults(handler=cmd_train)

    classify = sub.add_parser("classify", help="assign rows of a CSV to a trained map")
    classify.add_argument("codebook", help="run directory or code book JSON")
    classify.add_argument("data")
    classify.add_argument("--out")
    _add_schema_flags(classify)
    classify.set_defaults(handler=cmd_classify)

    render = sub.add_parser("render", help="draw a view of a run as SVG")
    render.add_argument("run_dir")
    render.add_argument("view", choices=VIEWS)
    render.add_argument("--data")
    render.add_argument("--column", help="qualitative column for pies and label annotations")
    render.add_argument("--component", type=int, default=0)
    render.add_argument("--cell", type=int, default=64)
    render.add_argument("--margin", type=int, default=16)
    render.add_argument("--shade", action="store_true", help="shade cells by super-class")
    render.add_argument("--fill", default="solid", choices=("solid", "hatch"))
    render.add_argument("--out")
    _add_schema_flags(render)
    render.set_defaults(handler=cmd_render)

    report = sub.add_parser("report", help="print the quality report of a run")
    report.add_argument("run_dir")
    report.add_argument("--data", help="CSV whose qualitative columns are crossed with the map")
    _add_schema_flags(report)
    report.set_defaults(handler=cmd_report)
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except SomkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


__all__ = [
    "IngestResult",
    "build_parser",
    "classify_rows",
    "cmd_classify",
    "cmd_render",
    "cmd_report",
    "cmd_train",
    "config_from_args",
    "format_quality",
    "ingest_csv",
    "main",
    "read_contingency",
    "read_header",
    "schema_from_flags",
]
