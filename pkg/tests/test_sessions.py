from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dca.fileio import dumps_dataset
from dca.sessions import (
    ATTACK_PROFILES,
    SCAN_PARENT,
    SCAN_PROCESS,
    Scenario,
    SessionConfig,
    _phase_bounds,
    derive_signals,
    generate_corpus,
    generate_session,
)


def test_steady_traffic_keeps_safe_at_max():
    sig = derive_signals([0, 0, 0, 0], [20, 20, 20, 20])
    assert sig[:, 0].tolist() == [0, 0, 0, 0]
    assert (sig[:, 1] > 0).all()
    assert sig[:, 2].tolist() == [10, 10, 10, 10]


def test_burst_dips_safe_at_both_edges():
    b = 40
    sig = derive_signals([0] * 5, [10, 10, 10 + b, 10, 10], scale_s=0.15)
    assert sig[:, 2].tolist() == pytest.approx([10, 10, 10 - 0.15 * b, 10 - 0.15 * b, 10])
    big = derive_signals([0] * 3, [0, 1000, 0])
    assert big[:, 2].tolist() == [10, 0, 0]


def test_scales_and_clamping():
    sig = derive_signals([10, 100], [50, 1000], scale_p=3.0, scale_d=0.5)
    assert sig[:, 0].tolist() == [30, 100]
    assert sig[:, 1].tolist() == [25, 100]


def test_negative_counters_rejected():
    with pytest.raises(ValueError):
        derive_signals([0, -1], [1, 1])


@given(st.lists(st.integers(0, 500), min_size=2, max_size=50))
def test_safe_anti_monotone_in_rate_of_change(pps):
    sig = derive_signals([0] * len(pps), pps, scale_s=0.01)  # small scale: no clamping
    delta = np.abs(np.diff(pps, prepend=pps[0]))
    order = np.argsort(delta, kind="stable")
    safe = sig[order, 2]
    assert (np.diff(safe) <= 1e-12).all()


def test_normal_session_has_no_pamp_through_transfer(normal):
    sig = np.array([r[1:] for r in normal.signal_records])
    assert sig[:, 0].max() <= 5
    lo, hi = normal.window()
    # skip the ramp edges; the plateau is smooth
    plateau = sig[lo + 6: hi - 6, 2]
    assert plateau.min() >= 8


def test_attack_session_shape(attack):
    sig = np.array([r[1:] for r in attack.signal_records])
    lo, hi = attack.window()
    inside, outside = sig[lo:hi], np.concatenate([sig[:lo], sig[hi:]])
    assert inside[:, 0].mean() > 50 > outside[:, 0].max()
    assert inside[:, 1].mean() > 2 * outside[:, 1].mean()
    assert inside[:, 2].mean() < outside[:, 2].mean()


def test_attack_truth_marks_scan_and_parent(corpus):
    for ds in corpus:
        names = ds.process_names()
        flagged = {names[t] for t, bad in ds.truth.items() if bad}
        if ds.scenario == "attack":
            assert flagged == {SCAN_PROCESS, SCAN_PARENT}
        else:
            assert flagged == set()


def test_pamp_higher_inside_scan_window(corpus):
    for ds in corpus[:10]:
        pamp = np.array([r.pamp for r in ds.signal_records])
        lo, hi = ds.window()
        assert pamp[lo:hi].mean() > np.concatenate([pamp[:lo], pamp[hi:]]).mean()


def test_normal_pamp_floor(corpus):
    for ds in corpus[10:]:
        assert max(r.pamp for r in ds.signal_records) <= 5


def test_antigen_counts_follow_profiles(corpus):
    for ds in corpus[:10]:
        cfg = SessionConfig(scenario=Scenario.ATTACK, scan_window=ds.window())
        bounds = _phase_bounds(cfg, ds.window())
        counts = Counter(e.antigen_type for e in ds.antigen_events)
        for name, (profile, _) in ATTACK_PROFILES.items():
            expected = sum(profile.get(ph, 0) * (hi - lo) for ph, (lo, hi) in bounds.items())
            got = counts[ds.metadata[f"process.{name}"]]
            assert abs(got - expected) <= 0.1 * expected


def test_du_errors_scale_with_targets():
    ds = generate_session(SessionConfig(rng_seed=5, scan_target_count=1020))
    total_du = sum(du for du, _ in ds.raw)
    assert total_du == pytest.approx(0.7 * 1020, rel=0.1)


def test_all_antigen_within_session(attack):
    assert all(0 <= e.timestamp < 70 for e in attack.antigen_events)
    times = [e.timestamp for e in attack.antigen_events]
    assert times == sorted(times)


def test_generation_is_deterministic():
    cfg = SessionConfig(scenario=Scenario.ATTACK, rng_seed=77)
    assert generate_session(cfg) == generate_session(cfg)
    assert dumps_dataset(generate_session(cfg)) == dumps_dataset(generate_session(cfg))


def test_explicit_scan_window():
    ds = generate_session(SessionConfig(rng_seed=1, scan_window=(30, 45)))
    assert ds.window() == (30, 45)
    nmap = ds.metadata["process.nmap"]
    assert all(30 <= e.timestamp < 45 for e in ds.antigen_events if e.antigen_type == nmap)


@pytest.mark.parametrize("window", [(50, 80), (10, 5), (-1, 4)])
def test_bad_scan_window(window):
    with pytest.raises(ValueError):
        SessionConfig(scan_window=window)


def test_corpus_sizes_and_distinct():
    corpus = generate_corpus(10, 10, base_seed=1)
    assert len(corpus) == 20
    assert Counter(ds.scenario for ds in corpus) == {"attack": 10, "normal": 10}
    texts = {dumps_dataset(ds) for ds in corpus}
    assert len(texts) == 20
    assert len({ds.metadata["seed"] for ds in corpus}) == 20


def test_single_attack_corpus():
    corpus = generate_corpus(1, 0, base_seed=1)
    assert [ds.scenario for ds in corpus] == ["attack"]
    with pytest.raises(ValueError):
        generate_corpus(0, 0, base_seed=1)
