"""Signal-mapping, parameter and weight sensitivity experiment series."""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .aggregation import compute_mcav
from .engine import run
from .fusion import IDENTITY, MAPPINGS, MappingCode, WeightSet, default_weights, derive_weights
from .model import Params
from .sessions import Dataset, Scenario, derive_seed, generate_corpus

log = logging.getLogger(__name__)

SERIES2_SWEEP: dict[str, tuple[int, ...]] = {
    "C": (10, 100, 200, 500),
    "N": (1, 2, 5, 10, 25, 50, 100),
    "R": (1, 2, 5, 10, 20),
    "T": (50, 500, 1000, 5000, 10000),
}
SWEEP_FIELDS = {
    "C": "population_size",
    "N": "dc_antigen_capacity",
    "R": "antigen_receptors",
    "T": "tissue_antigen_capacity",
}
WEIGHT_GRID: tuple[float, ...] = (0.5, 1, 2, 4, 8, 16)


class Series(str, Enum):
    S1 = "1"
    S2 = "2"
    S3 = "3"


@dataclass(frozen=True)
class ExperimentPlan:
    series: Series
    n_attack: int = 10
    n_normal: int = 10
    repeats_per_dataset: int = 3
    base_seed: int = 0
    mappings: tuple[str, ...] = tuple(MAPPINGS)
    sweep: Mapping[str, tuple[int, ...]] = field(default_factory=lambda: dict(SERIES2_SWEEP))
    weight_grid: tuple[float, ...] = WEIGHT_GRID

    def grid_size(self) -> int:
        if self.series is Series.S1:
            return len(self.mappings)
        if self.series is Series.S2:
            return sum(len(v) for v in self.sweep.values())
        return len(self.weight_grid) ** 2


@dataclass(frozen=True)
class SummaryRow:
    condition: str
    antigen_type: str
    mean_mcav: float
    stdev_mcav: float
    n_runs: int


@dataclass
class SummaryTable:
    rows: list[SummaryRow]
    # condition label -> settings that define it
    conditions: dict[str, dict] = field(default_factory=dict)

    def get(self, condition: str, antigen_type: str) -> SummaryRow:
        for r in self.rows:
            if r.condition == condition and r.antigen_type == antigen_type:
                return r
        raise KeyError((condition, antigen_type))

    def mean(self, condition: str, antigen_type: str) -> float:
        return self.get(condition, antigen_type).mean_mcav

    def for_condition(self, condition: str) -> list[SummaryRow]:
        return [r for r in self.rows if r.condition == condition]

    def surface(self) -> list[tuple[float, float, str, float]]:
        """(w1, w2, process, mean_mcav) rows for weight-grid tables."""
        return [(self.conditions[r.condition]["w1"], self.conditions[r.condition]["w2"],
                 r.antigen_type, r.mean_mcav) for r in self.rows]


@dataclass(frozen=True)
class RunResult:
    condition: str
    scores: Mapping[str, float]  # process name -> MCAV


@dataclass(frozen=True)
class _Job:
    condition: str
    dataset: Dataset
    params: Params
    weights: WeightSet
    mapping: MappingCode


def replicate_seed(base_seed: int, condition_index: int, dataset_index: int, repeat: int) -> int:
    return derive_seed(base_seed, 2, condition_index, dataset_index, repeat)


def _execute(job: _Job) -> RunResult:
    plog = run(job.dataset, job.params, job.weights, job.mapping)
    names = job.dataset.process_names()
    scores = {names.get(t, t): v for t, v in compute_mcav(plog).as_dict().items()}
    return RunResult(job.condition, scores)


def _execute_all(jobs: Sequence[_Job], workers: int | None) -> list[RunResult]:
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_execute, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [_execute(j) for j in jobs]


def summarize(results: Iterable[RunResult]) -> SummaryTable:
    """Sample mean and (n-1) standard deviation per condition and process.

    Row order follows first appearance of each condition, processes sorted.
    """
    grouped: dict[str, dict[str, list[float]]] = {}
    for res in results:
        per_cond = grouped.setdefault(res.condition, {})
        for name, v in res.scores.items():
            per_cond.setdefault(name, []).append(v)
    rows = []
    for cond, per_proc in grouped.items():
        for name in sorted(per_proc):
            vals = np.asarray(per_proc[name], dtype=float)
            sd = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
            rows.append(SummaryRow(cond, name, float(vals.mean()), sd, len(vals)))
    return SummaryTable(rows)


def _jobs_for(conditions, repeats, base_seed):
    jobs = []
    for ci, (label, params, weights, mapping, ds_subset) in enumerate(conditions):
        for di, ds in ds_subset:
            for r in range(repeats):
                seed = replicate_seed(base_seed, ci, di, r)
                jobs.append(_Job(label, ds, params.replace(rng_seed=seed), weights, mapping))
    return jobs


def run_series1(corpus: Sequence[Dataset], params: Params = Params(),
                weights: WeightSet | None = None, repeats: int = 3, base_seed: int = 0,
                mappings: Sequence[str] = tuple(MAPPINGS),
                workers: int | None = None) -> SummaryTable:
    """Every mapping over every dataset, summarised per mapping and scenario.

    Condition labels are ``<mapping>/<scenario>``, e.g. ``M1/attack``.
    """
    weights = weights or default_weights()
    by_scenario: dict[str, list[tuple[int, Dataset]]] = {}
    for i, ds in enumerate(corpus):
        by_scenario.setdefault(ds.scenario or "unknown", []).append((i, ds))
    conditions, settings = [], {}
    for m in mappings:
        for scenario, subset in by_scenario.items():
            label = f"{m}/{scenario}"
            conditions.append((label, params, weights, MAPPINGS[m], subset))
            settings[label] = {"mapping": m, "scenario": scenario}
    table = summarize(_execute_all(_jobs_for(conditions, repeats, base_seed), workers))
    table.conditions = settings
    return table


def run_series2(corpus: Sequence[Dataset], sweep: Mapping[str, Sequence[int]] = SERIES2_SWEEP,
                params: Params = Params(), weights: WeightSet | None = None,
                repeats: int = 3, base_seed: int = 0,
                workers: int | None = None) -> SummaryTable:
    """One-at-a-time sweep of cell count (C), DC capacity (N), receptors (R)
    and tissue capacity (T) over the attack datasets; condition labels like ``C10``."""
    weights = weights or default_weights()
    subset = [(i, ds) for i, ds in enumerate(corpus) if ds.scenario == Scenario.ATTACK.value]
    if not subset:
        raise ValueError("series 2 needs at least one attack dataset")
    conditions, settings = [], {}
    for code, values in sweep.items():
        fld = SWEEP_FIELDS[code]
        for v in values:
            label = f"{code}{v}"
            conditions.append((label, params.replace(**{fld: int(v)}), weights, IDENTITY, subset))
            settings[label] = {fld: int(v)}
    table = summarize(_execute_all(_jobs_for(conditions, repeats, base_seed), workers))
    table.conditions = settings
    return table


def run_series3(dataset: Dataset, grid: Sequence[float] = WEIGHT_GRID,
                params: Params = Params(), repeats: int = 3, base_seed: int = 0,
                workers: int | None = None) -> SummaryTable:
    """Exhaustive W1 x W2 grid on a single dataset; labels like ``W1=0.5;W2=16``."""
    conditions, settings = [], {}
    for w1, w2 in itertools.product(grid, grid):
        label = f"W1={w1:g};W2={w2:g}"
        conditions.append((label, params, derive_weights(w1, w2), IDENTITY, [(0, dataset)]))
        settings[label] = {"w1": float(w1), "w2": float(w2)}
    table = summarize(_execute_all(_jobs_for(conditions, repeats, base_seed), workers))
    table.conditions = settings
    return table


def pick_dataset(corpus: Sequence[Dataset], base_seed: int,
                 scenario: Scenario = Scenario.ATTACK) -> Dataset:
    """Seeded random choice of one dataset of the given scenario."""
    pool = [ds for ds in corpus if ds.scenario == scenario.value]
    if not pool:
        raise ValueError(f"no {scenario.value} dataset in corpus")
    rng = np.random.default_rng(derive_seed(base_seed, 3))
    return pool[int(rng.integers(len(pool)))]


def run_plan(plan: ExperimentPlan, params: Params = Params(),
             workers: int | None = None) -> SummaryTable:
    n_normal = plan.n_normal if plan.series is Series.S1 else 0
    corpus = generate_corpus(plan.n_attack, n_normal, plan.base_seed)
    log.info("series %s: %d datasets, %d conditions", plan.series.value,
             len(corpus), plan.grid_size())
    if plan.series is Series.S1:
        return run_series1(corpus, params, repeats=plan.repeats_per_dataset,
                           base_seed=plan.base_seed, mappings=plan.mappings, workers=workers)
    if plan.series is Series.S2:
        return run_series2(corpus, plan.sweep, params, repeats=plan.repeats_per_dataset,
                           base_seed=plan.base_seed, workers=workers)
    dataset = pick_dataset(corpus, plan.base_seed)
    return run_series3(dataset, plan.weight_grid, params, repeats=plan.repeats_per_dataset,
                       base_seed=plan.base_seed, workers=workers)
