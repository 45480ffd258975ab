"""SVG map renderers.

Every renderer returns a complete SVG document whose view box is
(cols * cell + 2 margin) x (rows * cell + 2 margin). Output depends only on
the inputs and options: coordinates are written with fixed precision and
elements are emitted in unit order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .dataset import DataMatrix, QualitativeColumn
from .errors import ValidationError
from .fills import FILL_STYLES, build_fill
from .helpers import DEFAULT_PALETTE, escape, fmt, lighten, outline, svg_footer, svg_header
from .layout import CellFrame, MapLayout, map_layout
from .metrics import crosstab
from .quantize import Assignment, CodeBook
from .topology import DIRECTIONS, MapTopology, step

logger = logging.getLogger(__name__)

RHO_MIN = 0.2
RHO_MAX = 0.95
ELLIPSIS = "…"

Codes = Union[CodeBook, np.ndarray]


@dataclass(frozen=True)
class RenderOptions:
    cell_size_px: int = 64
    palette: Tuple[str, ...] = DEFAULT_PALETTE
    margin: int = 16
    grid_stroke: str = "#444444"
    grid_stroke_width: float = 1.0
    line_color: str = "#1f3b73"
    line_width: float = 1.0
    font_size: int = 9
    per_cell_scaling: bool = False
    superclass_fill: str = "solid"

    def __post_init__(self) -> None:
        if self.cell_size_px < 16:
            raise ValidationError(f"cell size must be at least 16 px, got {self.cell_size_px}")
        if self.margin < 0:
            raise ValidationError("margin must be non-negative")
        if not self.palette:
            raise ValidationError("palette is empty")
        if self.superclass_fill not in FILL_STYLES:
            raise ValidationError(f"unknown super-class fill {self.superclass_fill!r}")


def _codes(codes: Codes) -> np.ndarray:
    return np.asarray(codes.codes if isinstance(codes, CodeBook) else codes, dtype=float)


def _layout(topo: MapTopology, opts: RenderOptions) -> MapLayout:
    return map_layout(topo, opts.cell_size_px, opts.margin)


def _superclass_fills(
    superclasses: Optional[Sequence[int]],
    topo: MapTopology,
    opts: RenderOptions,
) -> Tuple[List[str], Dict[int, str]]:
    if superclasses is None:
        return [], {}
    labels = np.asarray(superclasses, dtype=np.int64)
    if labels.shape != (topo.unit_count,):
        raise ValidationError("one super-class label per unit is needed")
    count = int(labels.max()) + 1
    if count > len(opts.palette):
        raise ValidationError(f"palette has {len(opts.palette)} colours for {count} super-classes")
    defs = []
    fills = {}
    for label in range(count):
        pattern, ref = build_fill(opts.superclass_fill, label, lighten(opts.palette[label], 0.45))
        if pattern:
            defs.append(pattern)
        fills[label] = ref
    return defs, {unit: fills[int(labels[unit])] for unit in range(topo.unit_count)}


def _document(
    layout: MapLayout,
    opts: RenderOptions,
    body: Sequence[str],
    defs: Sequence[str] = (),
    cell_fills: Optional[Mapping[int, str]] = None,
) -> str:
    parts = [svg_header(layout.width, layout.height)]
    if defs:
        parts.append("<defs>" + "".join(defs) + "</defs>")
    parts.append(f'<rect x="0" y="0" width="{layout.width}" height="{layout.height}" fill="#ffffff"/>')
    stroke = outline(opts.grid_stroke, opts.grid_stroke_width)
    for unit, frame in enumerate(layout.frames()):
        fill = (cell_fills or {}).get(unit, "none")
        parts.append(
            f'<rect x="{fmt(frame.left)}" y="{fmt(frame.top)}" width="{fmt(frame.width)}" '
            f'height="{fmt(frame.height)}" fill="{fill}" {stroke}/>'
        )
    parts.extend(body)
    parts.append(svg_footer())
    return "\n".join(parts) + "\n"


def _scale(value: float, low: float, high: float) -> float:
    if high <= low:
        return 0.5
    return (value - low) / (high - low)


def _polyline(frame: CellFrame, values: np.ndarray, low: float, high: float, opts: RenderOptions) -> str:
    """Curve through the present values, x evenly spaced across the cell."""
    inner = frame.inset(3)
    step_x = inner.width / (values.shape[0] - 1)
    points = []
    for k, v in enumerate(values):
        if np.isnan(v):
            continue
        x = inner.left + k * step_x
        y = inner.top + inner.height * (1.0 - _scale(float(v), low, high))
        points.append(f"{fmt(x)},{fmt(y)}")
    return (
        f'<polyline points="{" ".join(points)}" fill="none" '
        f'{outline(opts.line_color, opts.line_width)}/>'
    )


def _bars(frame: CellFrame, values: Sequence[float], low: float, high: float, opts: RenderOptions) -> List[str]:
    """Side-by-side vertical bars, one per value, rising from the cell bottom."""
    inner = frame.inset(3)
    width = inner.width / max(1, len(values))
    out = []
    for k, v in enumerate(values):
        if np.isnan(v):
            continue
        height = inner.height * _scale(float(v), low, high)
        out.append(
            f'<rect x="{fmt(inner.left + k * width)}" y="{fmt(inner.top + inner.height - height)}" '
            f'width="{fmt(width)}" height="{fmt(height)}" fill="{opts.line_color}"/>'
        )
    return out


def _range(values: np.ndarray) -> Tuple[float, float]:
    if values.size == 0 or np.all(np.isnan(values)):
        return 0.0, 1.0
    return float(np.nanmin(values)), float(np.nanmax(values))


def render_cell_curves(
    topo: MapTopology,
    data: DataMatrix,
    assignment: Assignment,
    opts: RenderOptions = RenderOptions(),
    superclasses: Optional[Sequence[int]] = None,
) -> str:
    """Members of every class drawn as curves in their unit's cell."""
    layout = _layout(topo, opts)
    defs, fills = _superclass_fills(superclasses, topo, opts)
    values = data.values
    low, high = _range(values)
    body: List[str] = []
    for unit, frame in enumerate(layout.frames()):
        members = np.flatnonzero(assignment.class_of == unit)
        if members.size == 0:
            continue
        if opts.per_cell_scaling:
            low, high = _range(values[members])
        body.append(f'<g class="cell" data-unit="{unit}">')
        if data.n_cols < 2:
            body.extend(_bars(frame, [float(values[i, 0]) for i in members], low, high, opts))
        else:
            body.extend(_polyline(frame, values[i], low, high, opts) for i in members)
        body.append("</g>")
    return _document(layout, opts, body, defs, fills)


def render_codebook(
    topo: MapTopology,
    codes: Codes,
    opts: RenderOptions = RenderOptions(),
    superclasses: Optional[Sequence[int]] = None,
) -> str:
    """Each code vector drawn as a curve in its cell."""
    layout = _layout(topo, opts)
    defs, fills = _superclass_fills(superclasses, topo, opts)
    matrix = _codes(codes)
    low, high = _range(matrix)
    body: List[str] = []
    for unit, frame in enumerate(layout.frames()):
        row = matrix[unit]
        if opts.per_cell_scaling:
            low, high = _range(row)
        if matrix.shape[1] < 2:
            body.extend(_bars(frame, [float(row[0])], low, high, opts))
        else:
            body.append(_polyline(frame, row, low, high, opts))
    return _document(layout, opts, body, defs, fills)


def octagon_radii(
    topo: MapTopology,
    codes: Codes,
    rho_min: float = RHO_MIN,
    rho_max: float = RHO_MAX,
) -> List[Dict[str, float]]:
    """Vertex radius per direction for each unit, as a fraction of the half-cell.

    Close neighbour codes give radii near ``rho_max``; directions leading off
    the map are absent.
    """
    if not topo.is_square:
        raise ValidationError(f"distance octagons need a square lattice, not {topo.kind!r}")
    matrix = _codes(codes)
    distances: List[Dict[str, float]] = []
    for unit in range(topo.unit_count):
        per_unit = {}
        for name, drow, dcol in DIRECTIONS:
            other = step(topo, unit, drow, dcol)
            if other is None or other == unit:
                continue
            per_unit[name] = float(np.linalg.norm(matrix[unit] - matrix[other]))
        distances.append(per_unit)
    flat = [d for per_unit in distances for d in per_unit.values()]
    if not flat:
        return [{} for _ in distances]
    d_min, d_max = min(flat), max(flat)
    middle = (rho_min + rho_max) / 2
    radii = []
    for per_unit in distances:
        if d_max <= d_min:
            radii.append({name: middle for name in per_unit})
            continue
        radii.append({
            name: rho_min + (rho_max - rho_min) * (d_max - d) / (d_max - d_min)
            for name, d in per_unit.items()
        })
    return radii


def render_distance_octagons(
    topo: MapTopology,
    codes: Codes,
    opts: RenderOptions = RenderOptions(),
    superclasses: Optional[Sequence[int]] = None,
) -> str:
    """Per cell, an octagon whose vertex in each direction nears the border when that neighbour's code is close."""
    radii = octagon_radii(topo, codes)
    layout = _layout(topo, opts)
    defs, fills = _superclass_fills(superclasses, topo, opts)
    body: List[str] = []
    for unit, frame in enumerate(layout.frames()):
        half = frame.width / 2
        points = []
        for name, drow, dcol in DIRECTIONS:
            if name not in radii[unit]:
                continue
            norm = math.hypot(drow, dcol)
            r = radii[unit][name] * half
            points.append(f"{fmt(frame.cx + r * dcol / norm)},{fmt(frame.cy + r * drow / norm)}")
        if points:
            body.append(
                f'<polygon points="{" ".join(points)}" fill="{opts.line_color}" fill-opacity="0.35" '
                f'{outline(opts.line_color, opts.line_width)}/>'
            )
    return _document(layout, opts, body, defs, fills)


def pie_sectors(counts: Sequence[int]) -> List[Tuple[int, float, float]]:
    """``(modality, start, end)`` angles in degrees, clockwise from the top, zero counts skipped."""
    total = float(sum(counts))
    if total <= 0:
        return []
    sectors = []
    cumulative = 0
    for k, count in enumerate(counts):
        if count <= 0:
            continue
        start = 360.0 * cumulative / total
        cumulative += count
        sectors.append((k, start, 360.0 * cumulative / total))
    return sectors


def _polar(cx: float, cy: float, r: float, degrees: float) -> Tuple[float, float]:
    theta = math.radians(degrees)
    return cx + r * math.sin(theta), cy - r * math.cos(theta)


def _legend(layout: MapLayout, opts: RenderOptions, names: Sequence[str]) -> List[str]:
    """Swatches and names along the bottom margin."""
    if layout.margin < 8:
        return []
    size = min(layout.margin - 4, opts.font_size)
    y = layout.height - layout.margin + (layout.margin - size) / 2
    x = float(layout.margin)
    out = ['<g class="legend">']
    for k, name in enumerate(names):
        colour = opts.palette[k % len(opts.palette)]
        out.append(f'<rect x="{fmt(x)}" y="{fmt(y)}" width="{fmt(size)}" height="{fmt(size)}" fill="{colour}"/>')
        out.append(
            f'<text x="{fmt(x + size + 2)}" y="{fmt(y + size)}" font-size="{size}" '
            f'font-family="sans-serif">{escape(name)}</text>'
        )
        x += size + 6 + 0.6 * size * len(name)
    out.append("</g>")
    return out


def render_pie_map(
    topo: MapTopology,
    assignment: Assignment,
    qual: QualitativeColumn,
    opts: RenderOptions = RenderOptions(),
    superclasses: Optional[Sequence[int]] = None,
) -> str:
    """Per cell, a pie of the modality counts of the rows in that class."""
    layout = _layout(topo, opts)
    defs, fills = _superclass_fills(superclasses, topo, opts)
    table = crosstab(assignment, topo.unit_count, qual)
    body: List[str] = []
    for unit, frame in enumerate(layout.frames()):
        counts = [int(c) for c in table[:, unit]]
        sectors = pie_sectors(counts)
        if not sectors:
            continue
        r = min(frame.width, frame.height) / 2 - 3
        body.append(f'<g class="pie" data-unit="{unit}">')
        for k, start, end in sectors:
            colour = opts.palette[k % len(opts.palette)]
            title = f"<title>{escape(qual.level_names[k])}: {counts[k]}</title>"
            if len(sectors) == 1:
                body.append(
                    f'<circle cx="{fmt(frame.cx)}" cy="{fmt(frame.cy)}" r="{fmt(r)}" fill="{colour}">{title}</circle>'
                )
                continue
            x0, y0 = _polar(frame.cx, frame.cy, r, start)
            x1, y1 = _polar(frame.cx, frame.cy, r, end)
            large = 1 if end - start > 180.0 else 0
            body.append(
                f'<path d="M{fmt(frame.cx)},{fmt(frame.cy)} L{fmt(x0)},{fmt(y0)} '
                f'A{fmt(r)},{fmt(r)} 0 {large},1 {fmt(x1)},{fmt(y1)} Z" fill="{colour}" '
                f'data-start="{start:.6f}" data-end="{end:.6f}">{title}</path>'
            )
        body.append("</g>")
    body.extend(_legend(layout, opts, qual.level_names))
    return _document(layout, opts, body, defs, fills)


def render_component_plane(
    topo: MapTopology,
    codes: Codes,
    component: Optional[int] = None,
    values: Optional[Sequence[float]] = None,
    opts: RenderOptions = RenderOptions(),
    superclasses: Optional[Sequence[int]] = None,
) -> str:
    """Per cell, a bar proportional to one code component or to a supplied per-unit value."""
    matrix = _codes(codes)
    if (component is None) == (values is None):
        raise ValidationError("give either a component index or per-unit values")
    if component is not None:
        if not 0 <= component < matrix.shape[1]:
            raise ValidationError(f"component {component} out of range for {matrix.shape[1]} components")
        levels = matrix[:, component]
    else:
        levels = np.asarray(values, dtype=float)
        if levels.shape != (topo.unit_count,):
            raise ValidationError("one value per unit is needed")
    layout = _layout(topo, opts)
    defs, fills = _superclass_fills(superclasses, topo, opts)
    low, high = _range(levels)
    body: List[str] = []
    for unit, frame in enumerate(layout.frames()):
        inner = frame.inset(4)
        height = inner.height * _scale(float(levels[unit]), low, high)
        body.append(
            f'<rect x="{fmt(inner.left + inner.width / 4)}" y="{fmt(inner.top + inner.height - height)}" '
            f'width="{fmt(inner.width / 2)}" height="{fmt(height)}" fill="{opts.line_color}">'
            f"<title>{float(levels[unit]):.6g}</title></rect>"
        )
    return _document(layout, opts, body, defs, fills)


def render_label_map(
    topo: MapTopology,
    placements: Mapping[str, int],
    opts: RenderOptions = RenderOptions(),
    superclasses: Optional[Sequence[int]] = None,
    annotations: Optional[Mapping[int, str]] = None,
) -> str:
    """Labels stacked in the cell of their unit; overflow ends with an ellipsis."""
    layout = _layout(topo, opts)
    defs, fills = _superclass_fills(superclasses, topo, opts)
    per_unit: Dict[int, List[str]] = {}
    for label, unit in placements.items():
        if not 0 <= unit < topo.unit_count:
            raise IndexError(f"unit {unit} outside a map of {topo.unit_count} units")
        per_unit.setdefault(int(unit), []).append(label)
    line = opts.font_size * 1.2
    body: List[str] = []
    for unit, frame in enumerate(layout.frames()):
        labels = per_unit.get(unit, [])
        note = (annotations or {}).get(unit)
        if not labels and not note:
            continue
        capacity = max(1, int((frame.height - 4) // line))
        lines = list(labels)
        if note:
            capacity = max(1, capacity - 1)
        truncated = len(lines) > capacity
        if truncated:
            lines = lines[: capacity - 1] + [ELLIPSIS]
        if note:
            lines.append(f"({note})")
        title = f"<title>{escape(', '.join(labels))}</title>" if truncated else ""
        body.append(f'<g class="labels" data-unit="{unit}">{title}')
        for k, text in enumerate(lines):
            y = frame.top + 2 + (k + 1) * line - 0.2 * opts.font_size
            body.append(
                f'<text x="{fmt(frame.left + 3)}" y="{fmt(y)}" font-size="{opts.font_size}" '
                f'font-family="sans-serif">{escape(text)}</text>'
            )
        body.append("</g>")
    return _document(layout, opts, body, defs, fills)


VIEWS = ("curves", "codebook", "octagons", "pies", "plane", "labels")

__all__ = [
    "ELLIPSIS",
    "RHO_MAX",
    "RHO_MIN",
    "RenderOptions",
    "VIEWS",
    "octagon_radii",
    "pie_sectors",
    "render_cell_curves",
    "render_codebook",
    "render_component_plane",
    "render_distance_octagons",
    "render_label_map",
    "render_pie_map",
]
