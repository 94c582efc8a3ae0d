"""Command line entry point: ``dca gen``, ``dca detect`` and ``dca experiment``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import fileio
from .aggregation import classify, compute_mcav
from .engine import NothingToClassify, run
from .experiments import ExperimentPlan, Series, run_plan
from .fusion import DEFAULT_W1, DEFAULT_W2, MAPPINGS, PRESET_WEIGHTS, derive_weights, get_mapping
from .model import Params, validate_params
from .sessions import Scenario, SessionConfig, generate_session

log = logging.getLogger("dca")
DEFAULTS = Params()


class CliError(Exception):
    pass


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}") from exc


def cmd_gen(args) -> None:
    cfg = SessionConfig(scenario=Scenario(args.scenario), duration_s=args.duration,
                        rng_seed=args.seed, scan_target_count=args.targets)
    ds = generate_session(cfg)
    out = Path(args.out)
    _write(out, fileio.dumps_dataset(ds))
    fileio.load_dataset(out)


def cmd_detect(args) -> None:
    if args.preset_weights and (args.w1 is not None or args.w2 is not None):
        raise CliError("--preset-weights conflicts with --w1/--w2")
    if args.preset_weights:
        weights = PRESET_WEIGHTS
    else:
        w1 = DEFAULT_W1 if args.w1 is None else args.w1
        w2 = DEFAULT_W2 if args.w2 is None else args.w2
        try:
            weights = derive_weights(w1, w2)
        except ValueError as exc:
            raise CliError(str(exc)) from exc
    params = DEFAULTS.replace(
        rng_seed=args.seed,
        population_size=args.cells,
        dc_antigen_capacity=args.dc_capacity,
        antigen_receptors=args.receptors,
        tissue_antigen_capacity=args.tissue_capacity,
        max_cycles=args.max_cycles,
        migration_threshold_center=args.threshold_center,
        migration_threshold_spread_fraction=args.threshold_spread,
    )
    errors = validate_params(params)
    if errors:
        raise CliError("; ".join(errors))
    if not 0.0 <= args.threshold <= 1.0:
        raise CliError("--threshold must lie in [0, 1]")
    mapping = get_mapping(args.mapping)

    try:
        dataset = fileio.load_dataset(args.dataset)
    except OSError as exc:
        raise CliError(f"cannot read {args.dataset}: {exc.strerror or exc}") from exc
    try:
        plog = run(dataset, params, weights, mapping)
    except NothingToClassify as exc:
        raise CliError(str(exc)) from exc

    report = compute_mcav(plog, include_flush=not args.exclude_flush)
    truth = {t: v for t, v in dataset.truth.items() if t in report}
    result = classify(report, args.threshold, truth if len(truth) == len(report) else None)

    out = Path(args.out)
    _write(out, fileio.dumps_run_report(report, result))
    config = {
        "command": "detect",
        "dataset": str(args.dataset),
        "threshold": args.threshold,
        "exclude_flush": args.exclude_flush,
        **plog.config,
        "run": {"cycles": plog.cycles, "ingested": plog.ingested, "dropped": plog.dropped,
                "flushed": plog.flushed, "records": len(plog)},
        "processes": dataset.process_names(),
    }
    if result.rates is not None:
        r = result.rates
        config["rates"] = {"tp": r.tp, "fp": r.fp, "tn": r.tn, "fn": r.fn,
                           "tpr": r.tpr, "fpr": r.fpr}
    _write(out.with_name(out.name + ".json"), fileio.dumps_config(config))
    if args.log:
        _write(Path(args.log), fileio.dumps_log(plog.records))
    if len(fileio.read_csv(out)) != len(report):
        raise CliError(f"report {out} failed validation")


def cmd_experiment(args) -> None:
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create {out_dir}: {exc.strerror or exc}") from exc
    series = Series(args.series)
    plan = ExperimentPlan(series, n_attack=args.datasets, n_normal=args.datasets,
                          repeats_per_dataset=args.repeats, base_seed=args.base_seed)
    table = run_plan(plan, workers=args.workers)
    out = out_dir / f"series{series.value}.csv"
    _write(out, fileio.dumps_summary(table.rows))
    if series is Series.S3:
        lines = ["w1,w2,antigen_type,mean_mcav,stdev_mcav,n_runs"]
        for row in table.rows:
            c = table.conditions[row.condition]
            lines.append(f"{c['w1']:g},{c['w2']:g},{row.antigen_type},"
                         f"{row.mean_mcav:.4f},{row.stdev_mcav:.4f},{row.n_runs}")
        _write(out_dir / "series3_surface.csv", "\n".join(lines) + "\n")
    config = {
        "command": "experiment",
        "series": series.value,
        "base_seed": args.base_seed,
        "datasets_per_scenario": args.datasets,
        "repeats": args.repeats,
        "params": {k: getattr(DEFAULTS, k) for k in DEFAULTS.__dataclass_fields__},
        "w1": DEFAULT_W1,
        "w2": DEFAULT_W2,
        "conditions": table.conditions,
    }
    _write(out_dir / f"series{series.value}.json", fileio.dumps_config(config))
    if len(fileio.read_csv(out)) != len(table.rows):
        raise CliError(f"summary {out} failed validation")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dca", description="Dendritic cell algorithm toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic session dataset")
    g.add_argument("--scenario", choices=[s.value for s in Scenario], required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--duration", type=int, default=70)
    g.add_argument("--targets", type=int, default=1020)
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("detect", help="run the DCA on a dataset and write an MCAV report")
    d.add_argument("--dataset", required=True)
    d.add_argument("--seed", type=int, required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--mapping", default="M1", choices=list(MAPPINGS))
    d.add_argument("--w1", type=float, default=None)
    d.add_argument("--w2", type=float, default=None)
    d.add_argument("--preset-weights", action="store_true",
                   help="use the fixed preset weight table instead of W1/W2")
    d.add_argument("--threshold", type=float, default=0.5)
    d.add_argument("--cells", type=int, default=DEFAULTS.population_size)
    d.add_argument("--dc-capacity", type=int, default=DEFAULTS.dc_antigen_capacity)
    d.add_argument("--receptors", type=int, default=DEFAULTS.antigen_receptors)
    d.add_argument("--tissue-capacity", type=int, default=DEFAULTS.tissue_antigen_capacity)
    d.add_argument("--max-cycles", type=int, default=DEFAULTS.max_cycles)
    d.add_argument("--threshold-center", type=float, default=DEFAULTS.migration_threshold_center)
    d.add_argument("--threshold-spread", type=float,
                   default=DEFAULTS.migration_threshold_spread_fraction)
    d.add_argument("--exclude-flush", action="store_true",
                   help="leave end-of-run flush presentations out of the MCAV")
    d.add_argument("--log", default=None, help="also write the presentation log (JSON lines)")
    d.set_defaults(func=cmd_detect)

    e = sub.add_parser("experiment", help="run an experiment series and write summary CSVs")
    e.add_argument("--series", choices=[s.value for s in Series], required=True)
    e.add_argument("--base-seed", type=int, required=True)
    e.add_argument("--out-dir", required=True)
    e.add_argument("--repeats", type=int, default=3)
    e.add_argument("--datasets", type=int, default=10, help="datasets per scenario")
    e.add_argument("--workers", type=int, default=None)
    e.set_defaults(func=cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (CliError, fileio.DatasetFormatError) as exc:
        print(f"dca {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
