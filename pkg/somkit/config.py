"""Run configuration: parameter parsing, defaults and cross-field validation."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Dict, Optional

from .dataset import STANDARDIZE_MODES
from .errors import MissingDataError, ScheduleError, ValidationError
from .init import INIT_METHODS
from .quantize import GAIN_KINDS, MISSING_MODES, GainSchedule
from .superclass import LINKAGES, SUPERCLASS_METHODS
from .topology import MapTopology, RadiusSchedule

QUANTITATIVE_ALGORITHMS = ("forgy", "scl", "som", "kbatch")
QUALITATIVE_ALGORITHMS = ("korresp", "kacm", "kacm1", "kacm2", "kdisj")
ALGORITHMS = QUANTITATIVE_ALGORITHMS + QUALITATIVE_ALGORITHMS
BATCH_ALGORITHMS = ("forgy", "kbatch")
KACM_FAMILY = ("kacm", "kacm1", "kacm2")

# Legacy SAS/IML procedure names.
ALIASES: Dict[str, str] = {"fastclus": "forgy", "kfast": "scl", "kacp": "som"}

TOPOLOGY_ALIASES: Dict[str, str] = {"hex": "hexgrid"}

DEFAULT_SUPERCLASSES = 4
DEFAULT_MAX_SWEEPS = 100
DEFAULT_REPORT_RADIUS = 1
KBATCH_SWEEPS_PER_RADIUS = 5
QUALITATIVE_ITERATIONS_PER_ROW = 30

_COUNT = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*([Nn]?)\s*$")


def canonical_algorithm(name: str) -> str:
    name = name.strip().lower()
    name = ALIASES.get(name, name)
    if name not in ALGORITHMS:
        raise ValidationError(f"unknown algorithm {name!r}")
    return name


def parse_count(text: str, n: int) -> int:
    """``"200"`` is 200; ``"6N"`` is six times ``n`` (fractional multiples are rounded)."""
    match = _COUNT.match(str(text))
    if not match:
        raise ValidationError(f"cannot read {text!r} as a count; use an integer or a multiple like 6N")
    number, per_row = match.groups()
    if per_row:
        return int(round(float(number) * n))
    if "." in number:
        raise ValidationError(f"count {text!r} must be an integer")
    return int(number)


def parse_radius_schedule(text: str, n: int) -> RadiusSchedule:
    """``"2@0,1@2N,0@4N"``: radius 2 from iteration 0, 1 from 2N, 0 from 4N."""
    pairs = []
    for chunk in str(text).split(","):
        radius, sep, threshold = chunk.strip().partition("@")
        if not sep:
            raise ScheduleError(f"radius schedule entry {chunk!r} must read radius@iteration")
        try:
            r = int(radius)
        except ValueError as exc:
            raise ScheduleError(f"radius {radius!r} is not an integer") from exc
        if r < 0:
            raise ScheduleError("radii must be non-negative")
        pairs.append((parse_count(threshold, n), r))
    return RadiusSchedule.from_pairs(pairs)


def default_start_radius(topo: MapTopology) -> int:
    return max(1, math.ceil(max(topo.rows, topo.cols) / 2) - 1)


def default_radius_schedule(topo: MapTopology, iterations: int) -> RadiusSchedule:
    """Start at about half the map side and step down to 0 at even intervals."""
    return RadiusSchedule.linear_decay(default_start_radius(topo), iterations)


def default_kbatch_schedule(topo: MapTopology) -> RadiusSchedule:
    """Radius held for a few sweeps at each value, ending at 0."""
    start = default_start_radius(topo)
    return RadiusSchedule.from_pairs(
        [(k * KBATCH_SWEEPS_PER_RADIUS, start - k) for k in range(start + 1)]
    )


def parse_topology(kind: str, rows: int, cols: int) -> MapTopology:
    kind = TOPOLOGY_ALIASES.get(kind, kind)
    if kind == "string":
        return MapTopology.string(rows * cols if cols > 1 and rows == 1 else rows)
    return MapTopology(kind, rows, cols)


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to replay a training run."""

    algorithm: str
    topology: MapTopology
    seed: int
    init: str = "I"
    gain: str = "harmonic"
    eps0: float = 0.5
    eps_final: float = 0.01
    iterations: Optional[str] = None
    radius_schedule: Optional[str] = None
    standardize: str = "none"
    missing: str = "use"
    superclasses: int = DEFAULT_SUPERCLASSES
    linkage: str = "ward"
    superclass_method: str = "hierarchical"
    report_radius: int = DEFAULT_REPORT_RADIUS

    def __post_init__(self) -> None:
        object.__setattr__(self, "algorithm", canonical_algorithm(self.algorithm))
        if self.init not in INIT_METHODS:
            raise ValidationError(f"unknown initialization {self.init!r}; expected I, II or III")
        if self.gain not in GAIN_KINDS:
            raise ValidationError(f"unknown gain schedule {self.gain!r}")
        if self.standardize not in STANDARDIZE_MODES:
            raise ValidationError(f"unknown standardization {self.standardize!r}")
        if self.missing not in MISSING_MODES:
            raise ValidationError(f"unknown missing mode {self.missing!r}")
        if self.linkage not in LINKAGES:
            raise ValidationError(f"unknown linkage {self.linkage!r}")
        if self.superclass_method not in SUPERCLASS_METHODS:
            raise ValidationError(f"unknown super-class method {self.superclass_method!r}")
        if self.report_radius < 0:
            raise ValidationError(f"report radius must be non-negative, got {self.report_radius}")
        if self.seed < 0:
            raise ValidationError("seed must be non-negative")

    @property
    def is_qualitative(self) -> bool:
        return self.algorithm in QUALITATIVE_ALGORITHMS

    def validate(
        self,
        n_cols: int = 0,
        has_missing: bool = False,
        n_qualitative: int = 0,
        contingency: bool = False,
    ) -> None:
        """Check the run against the data it will see."""
        algorithm = self.algorithm
        if algorithm in QUANTITATIVE_ALGORITHMS:
            if n_cols < 1:
                raise ValidationError(f"{algorithm} needs at least one quantitative column")
            if algorithm in BATCH_ALGORITHMS and has_missing:
                raise MissingDataError(
                    f"{algorithm} does not accept missing values; use som/scl or --missing exclude"
                )
            if self.init == "III" and n_cols < 2 and self.topology.kind != "string":
                raise ValidationError("initialization III on a 2-D map needs at least 2 columns")
        elif algorithm == "korresp":
            if not contingency and n_qualitative != 2:
                raise ValidationError("korresp requires exactly 2 qualitative variables")
        elif algorithm in KACM_FAMILY:
            if n_qualitative < 2:
                raise ValidationError(f"{algorithm} requires at least 2 qualitative variables")
        elif n_qualitative < 1:
            raise ValidationError("kdisj requires at least 1 qualitative variable")
        if not 1 <= self.superclasses <= self.topology.unit_count:
            raise ValidationError(
                f"super-class count must lie in [1, {self.topology.unit_count}], got {self.superclasses}"
            )

    def default_iteration_text(self) -> str:
        if self.algorithm in ("scl", "som"):
            return "6N"
        if self.algorithm == "kdisj":
            return "15N"
        if self.algorithm in BATCH_ALGORITHMS:
            return str(DEFAULT_MAX_SWEEPS)
        return f"{QUALITATIVE_ITERATIONS_PER_ROW}N"

    def resolve_iterations(self, n: int) -> int:
        """Iteration count; ``n`` is the row count that ``N`` stands for.

        For kdisj ``N`` stands for M + N entries, for the other qualitative
        algorithms for the rows of the trained table.
        """
        count = parse_count(self.iterations or self.default_iteration_text(), n)
        if count < 1:
            raise ScheduleError("a run needs at least one iteration")
        return count

    def resolve_radii(self, iterations: int, n: int) -> RadiusSchedule:
        if self.radius_schedule:
            return parse_radius_schedule(self.radius_schedule, n)
        if self.algorithm == "kbatch":
            return default_kbatch_schedule(self.topology)
        if self.algorithm in ("forgy", "scl"):
            return RadiusSchedule.constant(0)
        return default_radius_schedule(self.topology, iterations)

    def gain_schedule(self, iterations: int) -> GainSchedule:
        return GainSchedule(self.gain, self.eps0, self.eps_final, iterations)

    def to_dict(self) -> Dict[str, object]:
        return {
            "algorithm": self.algorithm,
            "topology": self.topology.spec(),
            "seed": self.seed,
            "init": self.init,
            "gain": self.gain,
            "eps0": self.eps0,
            "eps_final": self.eps_final,
            "iterations": self.iterations,
            "radius_schedule": self.radius_schedule,
            "standardize": self.standardize,
            "missing": self.missing,
            "superclasses": self.superclasses,
            "linkage": self.linkage,
            "superclass_method": self.superclass_method,
            "report_radius": self.report_radius,
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, object]) -> "RunConfig":
        fields = dict(payload)
        fields["topology"] = MapTopology.from_spec(str(fields["topology"]))
        known = {k: v for k, v in fields.items() if k in cls.__dataclass_fields__}
        return cls(**known)


__all__ = [
    "ALGORITHMS",
    "ALIASES",
    "BATCH_ALGORITHMS",
    "DEFAULT_REPORT_RADIUS",
    "DEFAULT_SUPERCLASSES",
    "KACM_FAMILY",
    "QUALITATIVE_ALGORITHMS",
    "QUANTITATIVE_ALGORITHMS",
    "RunConfig",
    "canonical_algorithm",
    "default_kbatch_schedule",
    "default_radius_schedule",
    "default_start_radius",
    "parse_count",
    "parse_radius_schedule",
    "parse_topology",
]
