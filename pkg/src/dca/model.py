"""Domain types shared by the fusion, engine and aggregation layers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping, Sequence

PAMP, DANGER, SAFE = 0, 1, 2
CATEGORY_NAMES = ("pamp", "danger", "safe")

# Upper bound of each signal category after normalisation.
PAMP_MAX = 100.0
DANGER_MAX = 100.0
SAFE_MAX = 10.0
DEFAULT_RANGES = (PAMP_MAX, DANGER_MAX, SAFE_MAX)


class Context(str, Enum):
    MATURE = "mature"
    SEMI_MATURE = "semimature"


def decide_context(cumulative_mature: float, cumulative_semimature: float) -> Context:
    """Ties go to semi-mature: the mature test is a strict inequality."""
    if cumulative_mature > cumulative_semimature:
        return Context.MATURE
    return Context.SEMI_MATURE


@dataclass(frozen=True)
class Params:
    signals_per_category: int = 1          # I
    signal_categories: int = 3             # J
    tissue_antigen_capacity: int = 500     # K (also T_max)
    max_cycles: int = 10_000               # L
    population_size: int = 100             # M
    dc_antigen_capacity: int = 50          # N
    outputs_per_dc: int = 3                # P
    antigen_receptors: int = 1             # R (also Q)
    migration_threshold_center: float = 60.0
    migration_threshold_spread_fraction: float = 0.5
    rng_seed: int = 0
    shuffle_sampling: bool = False

    def replace(self, **changes) -> "Params":
        return replace(self, **changes)


def validate_params(p: Params) -> list[str]:
    """Return every violated constraint on ``p``; an empty list means valid."""
    errors: list[str] = []

    def positive_int(name: str, value) -> bool:
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            errors.append(f"{name} must be ≥ 1")
            return False
        return True

    positive_int("signals_per_category", p.signals_per_category)
    if p.signal_categories != 3:
        errors.append("signal_categories must be 3")
    positive_int("tissue_antigen_capacity", p.tissue_antigen_capacity)
    positive_int("max_cycles", p.max_cycles)
    positive_int("population_size", p.population_size)
    cap_ok = positive_int("dc_antigen_capacity", p.dc_antigen_capacity)
    if p.outputs_per_dc != 3:
        errors.append("outputs_per_dc must be 3")
    rec_ok = positive_int("antigen_receptors", p.antigen_receptors)
    if cap_ok and rec_ok and p.antigen_receptors > p.dc_antigen_capacity:
        errors.append("receptors exceed DC capacity")

    center = p.migration_threshold_center
    spread = p.migration_threshold_spread_fraction
    if not (math.isfinite(center) and center >= 0):
        errors.append("migration_threshold_center must be a nonnegative real")
    if not (math.isfinite(spread) and 0.0 <= spread <= 1.0):
        errors.append("migration_threshold_spread_fraction must lie in [0, 1]")
    elif math.isfinite(center) and not center * (1.0 - spread) > 0:
        errors.append("lowest migration threshold must be positive")

    if not isinstance(p.rng_seed, int) or not 0 <= p.rng_seed < 2**64:
        errors.append("rng_seed must be a 64-bit unsigned integer")
    return errors


@dataclass(frozen=True)
class SignalMatrix:
    """I x 3 grid of signal values; column j is the PAMP, danger or safe category.

    ``ranges`` holds the upper bound for each column.  It defaults to the
    normalisation ranges of the three categories; a remapped matrix carries
    the bounds of whichever raw role was placed in the column.
    """

    values: tuple[tuple[float, float, float], ...]
    ranges: tuple[float, float, float] = DEFAULT_RANGES

    def __post_init__(self):
        if not self.values:
            raise ValueError("signal matrix needs at least one row")
        for row in self.values:
            if len(row) != 3:
                raise ValueError("signal matrix rows must have 3 categories")
            for j, v in enumerate(row):
                if not (math.isfinite(v) and 0.0 <= v <= self.ranges[j]):
                    raise ValueError(
                        f"{CATEGORY_NAMES[j]} out of range [0,{self.ranges[j]:g}]: {v!r}"
                    )

    @classmethod
    def from_triple(cls, pamp: float, danger: float, safe: float,
                    ranges: tuple[float, float, float] = DEFAULT_RANGES) -> "SignalMatrix":
        return cls(((float(pamp), float(danger), float(safe)),), ranges)

    @classmethod
    def zeros(cls, rows: int = 1) -> "SignalMatrix":
        return cls(tuple((0.0, 0.0, 0.0) for _ in range(rows)))

    def column(self, j: int) -> tuple[float, ...]:
        return tuple(row[j] for row in self.values)


@dataclass(frozen=True)
class AntigenEvent:
    timestamp: float
    antigen_type: str

    def __post_init__(self):
        if not (math.isfinite(self.timestamp) and self.timestamp >= 0):
            raise ValueError(f"antigen timestamp must be >= 0, got {self.timestamp!r}")
        if not isinstance(self.antigen_type, str) or not self.antigen_type:
            raise ValueError("antigen_type must be a nonempty string")


@dataclass
class DendriticCell:
    migration_threshold: float
    signal_snapshot: SignalMatrix | None = None
    antigen: list[AntigenEvent] = field(default_factory=list)
    # (csm, semimature, mature), same order as the weight columns
    cumulative_outputs: list[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])

    @property
    def csm(self) -> float:
        return self.cumulative_outputs[0]

    @property
    def semimature(self) -> float:
        return self.cumulative_outputs[1]

    @property
    def mature(self) -> float:
        return self.cumulative_outputs[2]

    def reset(self, threshold: float) -> None:
        self.signal_snapshot = None
        self.antigen = []
        self.cumulative_outputs = [0.0, 0.0, 0.0]
        self.migration_threshold = threshold


@dataclass(frozen=True)
class PresentationRecord:
    antigen: tuple[str, ...]
    cumulative_mature: float
    cumulative_semimature: float
    context: Context
    cycle_index: int
    flush: bool = False

    def __post_init__(self):
        expected = decide_context(self.cumulative_mature, self.cumulative_semimature)
        if self.context is not expected:
            raise ValueError(
                f"context {self.context.value} inconsistent with outputs "
                f"mature={self.cumulative_mature!r} semimature={self.cumulative_semimature!r}"
            )

    @property
    def is_mature(self) -> bool:
        return self.context is Context.MATURE


@dataclass(frozen=True)
class McavEntry:
    mature_presentations: int
    total_presentations: int

    def __post_init__(self):
        if self.total_presentations < 1:
            raise ValueError("total_presentations must be >= 1")
        if not 0 <= self.mature_presentations <= self.total_presentations:
            raise ValueError("mature_presentations must lie in [0, total]")

    @property
    def mcav(self) -> float:
        return self.mature_presentations / self.total_presentations


@dataclass(frozen=True)
class McavReport:
    entries: Mapping[str, McavEntry]

    def mcav(self, antigen_type: str) -> float:
        return self.entries[antigen_type].mcav

    def as_dict(self) -> dict[str, float]:
        return {k: e.mcav for k, e in self.entries.items()}

    def __contains__(self, antigen_type: str) -> bool:
        return antigen_type in self.entries

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def check_types(items: Sequence[str]) -> None:
    for t in items:
        if not t or any(c.isspace() for c in t):
            raise ValueError(f"antigen type must be nonempty without whitespace: {t!r}")
