from dca.model import AntigenEvent
from dca.sessions import Dataset, SignalRecord


def make_dataset(signals, antigen, truth=None, scenario="attack"):
    """signals: (pamp, danger, safe) per second; antigen: (t, type) pairs."""
    records = tuple(SignalRecord(float(t), *map(float, s)) for t, s in enumerate(signals))
    events = tuple(AntigenEvent(float(t), str(a)) for t, a in antigen)
    types = {e.antigen_type for e in events}
    return Dataset(records, events, truth or {t: False for t in sorted(types)},
                   {"scenario": scenario})


def with_signals(ds, fn):
    """Copy of ``ds`` with each signal record's (pamp, danger, safe) replaced by fn(record)."""
    records = tuple(SignalRecord(r.timestamp, *fn(r)) for r in ds.signal_records)
    return Dataset(records, ds.antigen_events, ds.truth, dict(ds.metadata))
