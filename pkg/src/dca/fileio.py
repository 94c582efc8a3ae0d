"""Text formats for datasets, presentation logs and CSV reports.

Dataset files are line oriented::

    #dca-dataset 1
    scenario=attack
    truth.4312=1
    S 0.000 0.0000 4.0000 10.0000
    A 0.123 4312

A header of ``key=value`` lines precedes the records.  ``S`` lines carry one
signal sample (timestamp, pamp, danger, safe) and ``A`` lines one antigen
event (timestamp, antigen type).
"""

from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path
from typing import Iterable, TextIO

from .aggregation import ClassificationResult
from .model import (
    AntigenEvent,
    Context,
    DANGER_MAX,
    McavReport,
    PAMP_MAX,
    PresentationRecord,
    SAFE_MAX,
)
from .sessions import Dataset, SignalRecord

MAGIC = "#dca-dataset 1"
RUN_REPORT_HEADER = ("antigen_type", "mature", "total", "mcav", "label")
SUMMARY_HEADER = ("condition", "antigen_type", "mean_mcav", "stdev_mcav", "n_runs")


class DatasetFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"{message} at line {line}" if line is not None else message)


def dumps_dataset(ds: Dataset) -> str:
    out = [MAGIC]
    for k, v in ds.metadata.items():
        if k.startswith("truth.") or "=" in k or "\n" in f"{k}{v}":
            raise ValueError(f"metadata entry not serialisable: {k!r}")
        out.append(f"{k}={v}")
    for t, bad in ds.truth.items():
        out.append(f"truth.{t}={int(bool(bad))}")

    sig = [(r.timestamp, 0, f"S {r.timestamp:.3f} {r.pamp:.4f} {r.danger:.4f} {r.safe:.4f}")
           for r in ds.signal_records]
    ant = []
    for ev in ds.antigen_events:
        if any(c.isspace() for c in ev.antigen_type):
            raise ValueError(f"antigen type contains whitespace: {ev.antigen_type!r}")
        ant.append((ev.timestamp, 1, f"A {ev.timestamp:.3f} {ev.antigen_type}"))
    # stable merge; signals first at equal timestamps
    merged = sorted(sig + ant, key=lambda x: (round(x[0], 3), x[1]))
    out.extend(line for _, _, line in merged)
    return "\n".join(out) + "\n"


def write_dataset(ds: Dataset, path: str | os.PathLike) -> None:
    Path(path).write_text(dumps_dataset(ds), encoding="utf-8")


def _number(token: str, what: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise DatasetFormatError(f"{what} is not a number: {token!r}", lineno) from None
    if value != value or value in (float("inf"), float("-inf")):
        raise DatasetFormatError(f"{what} is not finite", lineno)
    return value


def parse_dataset(text: str) -> Dataset:
    metadata: dict[str, str] = {}
    truth: dict[str, bool] = {}
    signals: list[SignalRecord] = []
    antigen: list[AntigenEvent] = []
    in_records = False
    last_t = {"S": -1.0, "A": -1.0}
    bounds = (("pamp", PAMP_MAX), ("danger", DANGER_MAX), ("safe", SAFE_MAX))

    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        kind = line.split(maxsplit=1)[0]
        if kind in ("S", "A"):
            in_records = True
            parts = line.split()
            t = _number(parts[1], "timestamp", lineno) if len(parts) > 1 else None
            if kind == "S":
                if len(parts) != 5:
                    raise DatasetFormatError("signal record needs 'S t pamp danger safe'", lineno)
                vals = [_number(p, name, lineno) for p, (name, _) in zip(parts[2:], bounds)]
                for v, (name, hi) in zip(vals, bounds):
                    if not 0.0 <= v <= hi:
                        raise DatasetFormatError(f"{name} out of range [0,{hi:g}]", lineno)
            else:
                if len(parts) != 3:
                    raise DatasetFormatError("antigen record needs 'A t antigen_type'", lineno)
            if t < 0:
                raise DatasetFormatError("negative timestamp", lineno)
            if t < last_t[kind]:
                raise DatasetFormatError("decreasing timestamp", lineno)
            last_t[kind] = t
            if kind == "S":
                signals.append(SignalRecord(t, *vals))
            else:
                antigen.append(AntigenEvent(t, parts[2]))
        elif "=" in line:
            if in_records:
                raise DatasetFormatError("header entry after records", lineno)
            key, value = line.split("=", 1)
            key = key.strip()
            if key.startswith("truth."):
                if value.strip() not in ("0", "1"):
                    raise DatasetFormatError("truth label must be 0 or 1", lineno)
                truth[key[len("truth."):]] = value.strip() == "1"
            else:
                metadata[key] = value
        else:
            raise DatasetFormatError(f"malformed line {line!r}", lineno)

    return Dataset(tuple(signals), tuple(antigen), truth, metadata)


def load_dataset(path: str | os.PathLike) -> Dataset:
    return parse_dataset(Path(path).read_text(encoding="utf-8"))


def record_to_json(rec: PresentationRecord) -> str:
    return json.dumps({
        "cycle": rec.cycle_index,
        "context": rec.context.value,
        "flush": rec.flush,
        "mature": rec.cumulative_mature,
        "semimature": rec.cumulative_semimature,
        "antigen": list(rec.antigen),
    }, separators=(",", ":"))


def dumps_log(records: Iterable[PresentationRecord]) -> str:
    return "".join(record_to_json(r) + "\n" for r in records)


def write_log(records: Iterable[PresentationRecord], path: str | os.PathLike) -> None:
    Path(path).write_text(dumps_log(records), encoding="utf-8")


def parse_log(text: str) -> list[PresentationRecord]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        out.append(PresentationRecord(
            antigen=tuple(d["antigen"]),
            cumulative_mature=d["mature"],
            cumulative_semimature=d["semimature"],
            context=Context(d["context"]),
            cycle_index=d["cycle"],
            flush=d["flush"],
        ))
    return out


def dumps_run_report(report: McavReport, result: ClassificationResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RUN_REPORT_HEADER)
    for t, entry in report.entries.items():
        w.writerow([t, entry.mature_presentations, entry.total_presentations,
                    f"{entry.mcav:.4f}", result.labels[t].value])
    return buf.getvalue()


def dumps_summary(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for r in rows:
        w.writerow([r.condition, r.antigen_type, f"{r.mean_mcav:.4f}",
                    f"{r.stdev_mcav:.4f}", r.n_runs])
    return buf.getvalue()


def read_csv(path_or_stream: str | os.PathLike | TextIO) -> list[dict[str, str]]:
    if hasattr(path_or_stream, "read"):
        return list(csv.DictReader(path_or_stream))
    with open(path_or_stream, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def dumps_config(config: dict) -> str:
    return json.dumps(config, indent=2, sort_keys=True) + "\n"
