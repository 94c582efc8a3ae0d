"""Weighted-sum fusion of PAMP, danger and safe signals into DC outputs.

Outputs are bound by role: column 0 is the costimulatory (CSM) output that
drives migration, column 1 the semi-mature output (safe signal only) and
column 2 the mature output (negative safe weight).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .model import DEFAULT_RANGES, SignalMatrix

CSM, SEMI_MATURE, MATURE = 0, 1, 2


class WeightProvenance(str, Enum):
    PRESET = "preset"
    DERIVED = "derived"


@dataclass(frozen=True)
class WeightSet:
    # w[j][p]: input category j (pamp, danger, safe) to output p (csm, semi, mature)
    w: tuple[tuple[float, float, float], ...]
    provenance: WeightProvenance = WeightProvenance.DERIVED
    w1: float | None = None
    w2: float | None = None

    def __post_init__(self):
        if len(self.w) != 3 or any(len(row) != 3 for row in self.w):
            raise ValueError("weight set must be 3 x 3")
        for p in range(3):
            if sum(abs(self.w[j][p]) for j in range(3)) <= 0:
                raise ValueError(f"output {p} has all-zero weights")

    def row(self, p: int) -> tuple[float, float, float]:
        """Weights feeding output ``p``, ordered (pamp, danger, safe)."""
        return (self.w[0][p], self.w[1][p], self.w[2][p])


def derive_weights(w1: float, w2: float) -> WeightSet:
    """Build the full weight set from the CSM weight ``w1`` and mature weight ``w2``."""
    if not (w1 > 0 and w2 > 0):
        raise ValueError(f"w1 and w2 must be positive, got {w1!r}, {w2!r}")
    w = (
        (w1, 0.0, w2),
        (w1 / 2, 0.0, w2 / 2),
        (w1 * 1.5, 1.0, w2 * -1.5),
    )
    return WeightSet(w, WeightProvenance.DERIVED, float(w1), float(w2))


# Fixed alternative weight table; its CSM and semi-mature rows do not
# match derive_weights(2, 2).
PRESET_WEIGHTS = WeightSet(
    (
        (2.0, 0.0, 2.0),
        (1.0, 0.0, 1.0),
        (2.0, 3.0, -3.0),
    ),
    WeightProvenance.PRESET,
)

DEFAULT_W1 = 2.0
DEFAULT_W2 = 2.0


def default_weights() -> WeightSet:
    return derive_weights(DEFAULT_W1, DEFAULT_W2)


class OutputSignals(NamedTuple):
    csm: float
    semimature: float
    mature: float


def fuse(weights: WeightSet, signals: SignalMatrix) -> OutputSignals:
    """Normalised weighted sum over every signal and category, once per output."""
    out = []
    for p in range(3):
        num = 0.0
        den = 0.0
        for row in signals.values:
            for j in range(3):
                wjp = weights.w[j][p]
                num += wjp * row[j]
                den += abs(wjp)
        out.append(num / den)
    return OutputSignals(*out)


ROLES = ("P", "D", "S")


@dataclass(frozen=True)
class MappingCode:
    """Assignment of raw signal roles to matrix columns.

    ``columns[c]`` names the raw role (P, D or S) placed in matrix column c.
    """

    label: str
    columns: tuple[str, str, str]

    def __post_init__(self):
        if sorted(self.columns) != sorted(ROLES):
            raise ValueError(f"mapping {self.label} is not a permutation of P, D, S")

    @property
    def source_index(self) -> tuple[int, int, int]:
        return tuple(ROLES.index(r) for r in self.columns)

    def inverse(self) -> "MappingCode":
        src = self.source_index
        inv = [""] * 3
        for col, role_idx in enumerate(src):
            inv[role_idx] = ROLES[col]
        return MappingCode(f"{self.label}^-1", tuple(inv))


MAPPINGS: dict[str, MappingCode] = {
    code.label: code
    for code in (
        MappingCode("M1", ("P", "D", "S")),
        MappingCode("M2", ("D", "P", "S")),
        MappingCode("M3", ("S", "D", "P")),
        MappingCode("M4", ("P", "S", "D")),
        MappingCode("M5", ("S", "P", "D")),
        MappingCode("M6", ("D", "S", "P")),
    )
}
IDENTITY = MAPPINGS["M1"]


def get_mapping(label: str) -> MappingCode:
    try:
        return MAPPINGS[label.upper()]
    except KeyError:
        raise ValueError(f"unknown mapping {label!r}; expected one of {', '.join(MAPPINGS)}") from None


def apply_mapping(code: MappingCode, raw: tuple[float, float, float],
                  ranges: tuple[float, float, float] = DEFAULT_RANGES) -> SignalMatrix:
    """Place the raw (pamp, danger, safe) values into columns per ``code``.

    Values are moved, not rescaled; each column keeps the range of the raw
    role it received.
    """
    src = code.source_index
    values = tuple(float(raw[i]) for i in src)
    col_ranges = tuple(ranges[i] for i in src)
    return SignalMatrix((values,), col_ranges)


def unmap(code: MappingCode, matrix: SignalMatrix) -> tuple[float, float, float]:
    """Recover the raw role triple from the first row of a mapped matrix."""
    raw = [0.0] * 3
    for col, role_idx in enumerate(code.source_index):
        raw[role_idx] = matrix.values[0][col]
    return tuple(raw)
