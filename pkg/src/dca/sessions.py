"""Synthetic ssh sessions with an embedded ping scan or an scp file transfer.

Each session produces per-second raw counters (ICMP destination-unreachable
errors and sent packets), the normalised PAMP/danger/safe signals derived
from them, and a stream of per-process antigen events whose rate follows
each process's activity profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .model import AntigenEvent, DANGER_MAX, PAMP_MAX, SAFE_MAX

PHASES = ("login", "pre", "active", "post")


class Scenario(str, Enum):
    ATTACK = "attack"
    NORMAL = "normal"


@dataclass(frozen=True)
class ProcessSpec:
    name: str
    antigen_type: str
    profile: Mapping[str, float]  # phase -> antigen events per second
    anomalous: bool = False

    def rate(self, phase: str) -> float:
        return float(self.profile.get(phase, 0.0))


# activity profiles in events/s for the default rosters
ATTACK_PROFILES = {
    "sshd": ({"login": 15, "pre": 0.5, "active": 0.5, "post": 0.5}, False),
    "bash": ({"login": 1, "pre": 4, "active": 0.25, "post": 4}, False),
    "pts": ({"login": 1.5, "pre": 1.5, "active": 8, "post": 1.5}, True),
    "nmap": ({"active": 20}, True),
}
NORMAL_PROFILES = {
    "sshd": ({"login": 15, "pre": 0.5, "active": 0.5, "post": 0.5}, False),
    "bash": ({"login": 1, "pre": 4, "active": 0.5, "post": 4}, False),
    "xforward": ({"login": 1, "pre": 1, "active": 1, "post": 1}, False),
    "scp": ({"active": 20}, False),
}
SCAN_PROCESS = "nmap"
SCAN_PARENT = "pts"


def default_roster(scenario: Scenario, rng: np.random.Generator) -> tuple[ProcessSpec, ...]:
    profiles = ATTACK_PROFILES if scenario is Scenario.ATTACK else NORMAL_PROFILES
    pids = rng.choice(np.arange(1000, 32768), size=len(profiles), replace=False)
    return tuple(
        ProcessSpec(name, str(int(pid)), profile, anomalous and scenario is Scenario.ATTACK)
        for (name, (profile, anomalous)), pid in zip(profiles.items(), pids)
    )


@dataclass(frozen=True)
class SessionConfig:
    scenario: Scenario = Scenario.ATTACK
    duration_s: int = 70
    rng_seed: int = 0
    process_roster: tuple[ProcessSpec, ...] | None = None
    # attack only; drawn from the seed when None
    scan_window: tuple[int, int] | None = None
    scan_target_count: int = 1020
    burstiness: float = 0.5
    nonresponder_fraction: float = 0.7
    probes_per_target: int = 2
    background_pps: float = 8.0
    login_s: int = 4
    # normal only
    transfer_bytes: int = 2_621_440
    packet_bytes: int = 1448
    transfer_pps: float = 50.0
    transfer_ramp_s: int = 5
    stray_du_probability: float = 0.02
    # raw counter -> signal scaling
    scale_p: float = 3.0
    scale_d: float = 0.5
    scale_s: float = 0.15

    def __post_init__(self):
        if self.duration_s < 1:
            raise ValueError("duration_s must be >= 1")
        if self.process_roster is not None and not self.process_roster:
            raise ValueError("process roster needs at least one process")
        if self.scan_window is not None:
            start, end = self.scan_window
            if not 0 <= start < end <= self.duration_s:
                raise ValueError(f"scan_window {self.scan_window} not inside [0, {self.duration_s}]")
        if self.burstiness < 0:
            raise ValueError("burstiness must be >= 0")


class SignalRecord(NamedTuple):
    timestamp: float
    pamp: float
    danger: float
    safe: float


@dataclass(frozen=True)
class Dataset:
    signal_records: tuple[SignalRecord, ...]
    antigen_events: tuple[AntigenEvent, ...]
    truth: Mapping[str, bool]
    metadata: Mapping[str, str] = field(default_factory=dict)
    # per-second (du_errors, packets) counters; not serialised
    raw: tuple[tuple[int, int], ...] | None = field(default=None, compare=False)

    @property
    def scenario(self) -> str:
        return self.metadata.get("scenario", "")

    def process_names(self) -> dict[str, str]:
        """antigen_type -> process name, from ``process.<name>`` metadata keys."""
        names = {v: k[len("process."):] for k, v in self.metadata.items()
                 if k.startswith("process.")}
        return {t: names.get(t, t) for t in self.truth}

    def window(self) -> tuple[int, int] | None:
        if "active_start" not in self.metadata:
            return None
        return int(self.metadata["active_start"]), int(self.metadata["active_end"])


def derive_signals(du_errors: Sequence[float], packets: Sequence[float],
                   scale_p: float = 3.0, scale_d: float = 0.5,
                   scale_s: float = 0.15) -> np.ndarray:
    """Normalised (pamp, danger, safe) per second from 1 Hz raw counters.

    The safe signal starts at its maximum and is decremented by the magnitude
    of the backward difference of packets/s; the first sample has no change.
    """
    du = np.asarray(du_errors, dtype=float)
    pps = np.asarray(packets, dtype=float)
    if du.shape != pps.shape or du.ndim != 1:
        raise ValueError("raw counter series must be 1-D and of equal length")
    if (du < 0).any() or (pps < 0).any():
        raise ValueError("raw counters must be nonnegative")
    delta = np.abs(np.diff(pps, prepend=pps[:1]))
    pamp = np.clip(scale_p * du, 0.0, PAMP_MAX)
    danger = np.clip(scale_d * pps, 0.0, DANGER_MAX)
    safe = np.clip(SAFE_MAX - scale_s * delta, 0.0, SAFE_MAX)
    return np.column_stack([pamp, danger, safe])


def _burst_weights(rng: np.random.Generator, n: int, burstiness: float) -> np.ndarray:
    # gamma weights with coefficient of variation ~ burstiness
    if burstiness == 0:
        return np.full(n, 1.0 / n)
    w = rng.gamma(1.0 / burstiness**2, size=n)
    return w / w.sum()


def _phase_bounds(cfg: SessionConfig, window: tuple[int, int]) -> dict[str, tuple[int, int]]:
    start, end = window
    login_end = min(cfg.login_s, start)
    return {
        "login": (0, login_end),
        "pre": (login_end, start),
        "active": (start, end),
        "post": (end, cfg.duration_s),
    }


def _draw_scan_window(cfg: SessionConfig, rng: np.random.Generator) -> tuple[int, int]:
    if cfg.scan_window is not None:
        return tuple(int(v) for v in cfg.scan_window)
    d = cfg.duration_s
    start = int(rng.integers(max(1, round(0.2 * d)), max(2, round(0.35 * d)) + 1))
    length = int(rng.integers(max(1, round(0.2 * d)), max(2, round(0.35 * d)) + 1))
    return start, min(d, start + length)


def _attack_counters(cfg, rng, window):
    d = cfg.duration_s
    start, end = window
    du = np.zeros(d, dtype=np.int64)
    pps = rng.poisson(cfg.background_pps, d).astype(np.int64)
    targets = rng.multinomial(cfg.scan_target_count, _burst_weights(rng, end - start, cfg.burstiness))
    du[start:end] = rng.binomial(targets, cfg.nonresponder_fraction)
    pps[start:end] += targets * cfg.probes_per_target
    return du, pps


def _transfer_shape(cfg: SessionConfig) -> np.ndarray:
    total = math.ceil(cfg.transfer_bytes / cfg.packet_bytes)
    r = cfg.transfer_pps
    ramp = r * np.arange(1, cfg.transfer_ramp_s + 1) / (cfg.transfer_ramp_s + 1)
    plateau = max(1, round((total - 2 * ramp.sum()) / r))
    return np.concatenate([ramp, np.full(plateau, r), ramp[::-1]])


def _normal_counters(cfg, rng, window):
    d = cfg.duration_s
    start, end = window
    du = (rng.random(d) < cfg.stray_du_probability).astype(np.int64)
    pps = rng.poisson(cfg.background_pps, d).astype(np.int64)
    shape = _transfer_shape(cfg)[: end - start]
    noise = 1.0 + 0.02 * rng.standard_normal(len(shape))
    pps[start:end] += np.rint(np.clip(shape * noise, 0, None)).astype(np.int64)
    return du, pps


def _draw_transfer_window(cfg: SessionConfig, rng: np.random.Generator) -> tuple[int, int]:
    d = cfg.duration_s
    length = len(_transfer_shape(cfg))
    lo, hi = max(1, round(0.12 * d)), max(1, round(0.2 * d))
    start = min(int(rng.integers(lo, hi + 1)), max(0, d - 1))
    return start, min(d, start + length)


def _antigen_stream(roster, bounds, rng, burstiness) -> list[AntigenEvent]:
    events: list[tuple[float, int, AntigenEvent]] = []
    for order, proc in enumerate(roster):
        for phase in PHASES:
            lo, hi = bounds[phase]
            span = hi - lo
            rate = proc.rate(phase)
            if span <= 0 or rate <= 0:
                continue
            expected = rate * span
            n = int(expected) + int(rng.random() < expected - int(expected))
            if n == 0:
                continue
            per_sec = rng.multinomial(n, _burst_weights(rng, span, burstiness))
            for offset, count in enumerate(per_sec):
                sec = lo + offset
                for frac in np.sort(rng.random(count)):
                    t = min(round(sec + float(frac), 3), sec + 0.999)
                    events.append((t, order, AntigenEvent(t, proc.antigen_type)))
    events.sort(key=lambda e: (e[0], e[1]))
    return [e[2] for e in events]


def generate_session(cfg: SessionConfig) -> Dataset:
    rng = np.random.default_rng(cfg.rng_seed)
    roster = cfg.process_roster or default_roster(cfg.scenario, rng)
    if cfg.scenario is Scenario.ATTACK:
        window = _draw_scan_window(cfg, rng)
        du, pps = _attack_counters(cfg, rng, window)
    else:
        window = _draw_transfer_window(cfg, rng)
        du, pps = _normal_counters(cfg, rng, window)

    sig = np.round(derive_signals(du, pps, cfg.scale_p, cfg.scale_d, cfg.scale_s), 4)
    records = tuple(SignalRecord(float(t), *map(float, row)) for t, row in enumerate(sig))
    bounds = _phase_bounds(cfg, window)
    events = _antigen_stream(roster, bounds, rng, cfg.burstiness)

    metadata = {
        "scenario": cfg.scenario.value,
        "seed": str(cfg.rng_seed),
        "duration": str(cfg.duration_s),
        "active_start": str(window[0]),
        "active_end": str(window[1]),
        "scan_targets": str(cfg.scan_target_count),
        "burstiness": repr(cfg.burstiness),
        "nonresponder_fraction": repr(cfg.nonresponder_fraction),
        "scale_p": repr(cfg.scale_p),
        "scale_d": repr(cfg.scale_d),
        "scale_s": repr(cfg.scale_s),
    }
    for proc in roster:
        metadata[f"process.{proc.name}"] = proc.antigen_type
    truth = {proc.antigen_type: proc.anomalous for proc in roster}
    raw = tuple((int(a), int(b)) for a, b in zip(du, pps))
    return Dataset(records, tuple(events), truth, metadata, raw)


def derive_seed(base_seed: int, *key: int) -> int:
    """Deterministic 64-bit seed for a (base_seed, key...) pair."""
    ss = np.random.SeedSequence(base_seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def generate_corpus(n_attack: int, n_normal: int, base_seed: int,
                    **config) -> list[Dataset]:
    """``n_attack`` attack sessions followed by ``n_normal`` normal sessions."""
    if n_attack < 0 or n_normal < 0 or n_attack + n_normal < 1:
        raise ValueError("corpus needs at least one dataset")
    out = []
    for scenario, n, code in ((Scenario.ATTACK, n_attack, 0), (Scenario.NORMAL, n_normal, 1)):
        for i in range(n):
            cfg = SessionConfig(scenario=scenario, rng_seed=derive_seed(base_seed, code, i), **config)
            out.append(generate_session(cfg))
    return out
