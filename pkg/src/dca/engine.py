"""Tissue update and cell cycle loop of the dendritic cell algorithm."""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .fusion import IDENTITY, MappingCode, WeightSet, apply_mapping, fuse
from .model import (
    AntigenEvent,
    DendriticCell,
    Params,
    PresentationRecord,
    SignalMatrix,
    decide_context,
    validate_params,
)

log = logging.getLogger(__name__)


class NothingToClassify(ValueError):
    pass


@dataclass
class Tissue:
    signal_matrix: SignalMatrix
    capacity: int
    antigen_store: deque = field(default_factory=deque)
    dropped_antigen_count: int = 0
    ingested_antigen_count: int = 0

    def add_antigen(self, events: Iterable[AntigenEvent]) -> None:
        for ev in events:
            self.ingested_antigen_count += 1
            if len(self.antigen_store) < self.capacity:
                self.antigen_store.append(ev)
            else:
                self.dropped_antigen_count += 1


@dataclass
class EngineState:
    params: Params
    tissue: Tissue
    population: list[DendriticCell]
    rng: np.random.Generator
    cycle_index: int = 0
    presentation_log: list[PresentationRecord] = field(default_factory=list)
    presented_antigen_count: int = 0

    def in_cell_antigen_count(self) -> int:
        return sum(len(c.antigen) for c in self.population)

    def conservation(self) -> tuple[int, int]:
        """(stored + presented + in-cell + dropped, ingested); equal when consistent."""
        t = self.tissue
        accounted = (len(t.antigen_store) + self.presented_antigen_count
                     + self.in_cell_antigen_count() + t.dropped_antigen_count)
        return accounted, t.ingested_antigen_count

    def draw_threshold(self) -> float:
        c = self.params.migration_threshold_center
        s = self.params.migration_threshold_spread_fraction
        if s == 0:
            return float(c)
        return float(self.rng.uniform(c * (1 - s), c * (1 + s)))


def init_engine(params: Params, weights: WeightSet | None = None) -> EngineState:
    errors = validate_params(params)
    if errors:
        raise ValueError("invalid params: " + "; ".join(errors))
    rng = np.random.default_rng(params.rng_seed)
    tissue = Tissue(SignalMatrix.zeros(params.signals_per_category),
                    params.tissue_antigen_capacity)
    state = EngineState(params, tissue, [], rng)
    state.population = [DendriticCell(state.draw_threshold())
                        for _ in range(params.population_size)]
    return state


def tissue_update(state: EngineState, signal_events: Sequence[SignalMatrix],
                  antigen_events: Sequence[AntigenEvent]) -> EngineState:
    """Overwrite the signal matrix with the latest event and enqueue antigen."""
    if signal_events:
        state.tissue.signal_matrix = signal_events[-1]
    state.tissue.add_antigen(antigen_events)
    return state


def _present(state: EngineState, cell: DendriticCell, flush: bool) -> PresentationRecord:
    mature, semi = cell.mature, cell.semimature
    record = PresentationRecord(
        antigen=tuple(ev.antigen_type for ev in cell.antigen),
        cumulative_mature=mature,
        cumulative_semimature=semi,
        context=decide_context(mature, semi),
        cycle_index=state.cycle_index,
        flush=flush,
    )
    state.presentation_log.append(record)
    state.presented_antigen_count += len(cell.antigen)
    return record


def cell_cycle(state: EngineState, weights: WeightSet) -> list[PresentationRecord]:
    p = state.params
    store = state.tissue.antigen_store
    matrix = state.tissue.signal_matrix
    # every cell sees the same matrix in a cycle, so the fused outputs are shared
    csm, semi, mature = fuse(weights, matrix)
    population = state.population

    order: Iterable[int] = range(len(population))
    if p.shuffle_sampling:
        order = state.rng.permutation(len(population)).tolist()
    receptors = p.antigen_receptors
    capacity = p.dc_antigen_capacity
    for m in order:
        if not store:
            break
        cell = population[m]
        take = min(receptors, capacity - len(cell.antigen), len(store))
        for _ in range(take):
            cell.antigen.append(store.popleft())

    emitted = []
    for cell in population:
        cell.signal_snapshot = matrix
        out = cell.cumulative_outputs
        out[0] += csm
        out[1] += semi
        out[2] += mature
        if out[0] > cell.migration_threshold:
            emitted.append(_present(state, cell, flush=False))
            cell.reset(state.draw_threshold())
    state.cycle_index += 1
    return emitted


def flush(state: EngineState) -> int:
    """Force-migrate every cell still holding antigen; returns the antigen count flushed."""
    flushed = 0
    for cell in state.population:
        if cell.antigen:
            flushed += len(cell.antigen)
            _present(state, cell, flush=True)
            cell.reset(state.draw_threshold())
    return flushed


@dataclass
class PresentationLog:
    records: list[PresentationRecord]
    cycles: int
    ingested: int
    dropped: int
    flushed: int
    config: dict

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


def _bucket_by_second(items, key) -> dict[int, list]:
    buckets: dict[int, list] = {}
    for item in items:
        buckets.setdefault(int(math.floor(key(item))), []).append(item)
    return buckets


def run(dataset, params: Params, weights: WeightSet,
        mapping: MappingCode = IDENTITY,
        observer: Callable[[EngineState], None] | None = None) -> PresentationLog:
    """Replay ``dataset`` through the engine, one cell cycle per dataset second.

    After the last data second the engine keeps cycling on held signals until
    the tissue store drains or ``max_cycles`` is reached, then flushes every
    cell still holding antigen.  ``observer`` is called after each cycle.
    """
    if not dataset.antigen_events:
        raise NothingToClassify("nothing to classify: dataset has no antigen events")
    state = init_engine(params, weights)

    matrices = _bucket_by_second(dataset.signal_records, lambda r: r.timestamp)
    antigen = _bucket_by_second(dataset.antigen_events, lambda e: e.timestamp)
    last_second = max(max(matrices, default=0), max(antigen, default=0))

    while state.cycle_index < params.max_cycles:
        sec = state.cycle_index
        if sec > last_second and not state.tissue.antigen_store:
            break
        recs = matrices.get(sec, ())
        mats = [apply_mapping(mapping, (r.pamp, r.danger, r.safe)) for r in recs]
        tissue_update(state, mats, antigen.get(sec, ()))
        cell_cycle(state, weights)
        if observer is not None:
            observer(state)

    if state.cycle_index < last_second + 1:
        log.warning("max_cycles=%d reached before end of data (%d s)",
                    params.max_cycles, last_second + 1)
    flushed = flush(state)
    if observer is not None:
        observer(state)

    config = {
        "params": {k: getattr(params, k) for k in params.__dataclass_fields__},
        "weights": {"provenance": weights.provenance.value, "w1": weights.w1,
                    "w2": weights.w2, "w": [list(r) for r in weights.w]},
        "mapping": mapping.label,
    }
    return PresentationLog(
        records=state.presentation_log,
        cycles=state.cycle_index,
        ingested=state.tissue.ingested_antigen_count,
        dropped=state.tissue.dropped_antigen_count,
        flushed=flushed,
        config=config,
    )
