#!/usr/bin/env python3
"""
Testes da análise de frota: critérios, supressão, RMS e ordenação.

A frota de fixtures (data/fixtures/fleet) tem quatro instâncias:
    cost.go:8            ChanSend  [4, 3, 1, 0]
    producer_consumer:6  ChanRecv  [1, 3, 0, 2]
    stats.go:6           Select    [3, 0, 0, 0]  (time.After + context.Done)
    worker.go:9          Select    [0, 1, 3, 0]
"""
import math
import sys
from pathlib import Path

ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(ROOT))

import pytest
from hypothesis import given, settings, strategies as st

from app.leakprof import (
    AnalyzerConfig, AnalyzerError, analyze_fleet, category_histogram, kind_histogram, rms, transient_filter,
)
from app.classifier import classify
from app.models import BlockKind, BlockSite, Frame, SourceLoc
from app.profile import GoroutineProfile, GoroutineRecord, parse_profile_dir

FLEET = ROOT / "data" / "fixtures" / "fleet"


def _fleet():
    profiles, failures = parse_profile_dir(FLEET)
    assert failures == []
    return profiles


def _sender_frames(function: str, file: str, line: int):
    return (
        Frame("runtime.gopark", SourceLoc("runtime/proc.go", 398, "runtime.gopark")),
        Frame("runtime.chansend", SourceLoc("runtime/chan.go", 259, "runtime.chansend")),
        Frame("runtime.chansend1", SourceLoc("runtime/chan.go", 145, "runtime.chansend1")),
        Frame(function, SourceLoc(file, line, function)),
    )


def _synthetic(instance: str, counts: dict) -> GoroutineProfile:
    """counts: índice do local → goroutines paradas em svc/fNN.go:NN."""
    records = []
    next_id = 1
    for index, count in sorted(counts.items()):
        frames = _sender_frames(f"svc.f{index:02d}", f"svc/f{index:02d}.go", index + 1)
        for _ in range(count):
            records.append(GoroutineRecord(next_id, "chan send", frames))
            next_id += 1
    return GoroutineProfile(instance, "", records)


# ═══════════════════════════════════════════════════════════════════════
# FROTA DE FIXTURES
# ═══════════════════════════════════════════════════════════════════════

def test_fleet_findings_ranked_by_rms():
    report = analyze_fleet(_fleet(), AnalyzerConfig(threshold=3))
    assert report.profiles == 4
    assert report.unclassified == 0
    summary = [(s.site.kind, str(s.site.location), s.total, s.max_count) for s in report.findings]
    assert summary == [
        (BlockKind.CHAN_SEND, "transactions/cost.go:8", 8, 4),
        (BlockKind.CHAN_RECV, "patterns/producer_consumer.go:6", 6, 3),
        (BlockKind.SELECT, "patterns/worker.go:9", 4, 3),
    ]
    assert report.findings[0].rms == math.sqrt(26 / 4)
    assert report.findings[1].rms == pytest.approx(math.sqrt(14 / 4))
    assert report.findings[2].rms == pytest.approx(math.sqrt(10 / 4))


def test_fleet_per_instance_and_representative():
    report = analyze_fleet(_fleet(), AnalyzerConfig(threshold=3))
    send, recv, select = report.findings
    assert send.per_instance_counts == [("host-a", 4), ("host-b", 3), ("host-c", 1)]
    assert recv.per_instance_counts == [("host-a", 1), ("host-b", 3), ("host-d", 2)]
    assert send.representative[0] == "host-a" and send.representative[1].id == 10
    assert recv.representative[0] == "host-b" and recv.representative[1].id == 8
    assert select.representative[0] == "host-c" and select.representative[1].id == 4


def test_transient_select_dropped():
    report = analyze_fleet(_fleet(), AnalyzerConfig(threshold=3))
    assert all("stats.go" not in s.site.location.file for s in report.findings)
    # sem símbolos transitórios o select do ticker volta
    report = analyze_fleet(_fleet(), AnalyzerConfig(threshold=3, transient_symbols=frozenset()))
    assert any(s.site.location == SourceLoc("patterns/stats.go", 6, "patterns.statsReporter$1")
               for s in report.findings)


def test_top_n_truncates():
    report = analyze_fleet(_fleet(), AnalyzerConfig(threshold=3, top_n=2))
    assert [s.site.kind for s in report.findings] == [BlockKind.CHAN_SEND, BlockKind.CHAN_RECV]


def test_suppression_moves_total_to_summary():
    config = AnalyzerConfig(threshold=3, suppression=frozenset({"patterns.Worker.Start$1"}))
    report = analyze_fleet(_fleet(), config)
    assert len(report.findings) == 2
    assert report.suppressed == {"patterns.Worker.Start$1": 4}


def test_default_threshold_finds_nothing_in_small_fleet():
    report = analyze_fleet(_fleet())
    assert report.findings == []
    assert report.config['threshold'] == 10000


def test_running_never_becomes_finding():
    report = analyze_fleet(_fleet(), AnalyzerConfig(threshold=1))
    kinds = {s.site.kind for s in report.findings}
    assert BlockKind.RUNNING not in kinds
    assert BlockKind.OTHER not in kinds
    assert BlockKind.IO_WAIT in kinds


def test_fleet_histograms():
    profiles = _fleet()
    histogram = kind_histogram(profiles)
    assert {k: c for k, (c, _) in histogram.items() if c} == {
        "ChanSend": 8, "ChanRecv": 6, "Select": 7, "IOWait": 1, "Sleep": 1, "Running": 1}
    assert histogram["ChanSend"][1] == pytest.approx(100 * 8 / 24)
    assert sum(p for _, p in histogram.values()) == pytest.approx(100)

    categories = category_histogram(profiles)
    assert categories["chan send (non-nil chan)"][0] == 8
    assert categories["chan receive (non-nil chan)"][0] == 6
    assert categories["select (>0 cases)"][0] == 7
    assert categories["select (0 cases)"][0] == 0


def test_generated_at_is_latest_capture():
    assert analyze_fleet(_fleet()).generated_at == "2024-05-01T10:05:00Z"


def test_unclassifiable_goroutines_counted_and_skipped():
    profiles, _ = parse_profile_dir(ROOT / "data" / "fixtures" / "unclassifiable")
    report = analyze_fleet(profiles, AnalyzerConfig(threshold=1))
    assert report.unclassified == 1
    assert [str(s.site.location) for s in report.findings] == ["transactions/cost.go:8"]


def test_empty_fleet_rejected():
    with pytest.raises(AnalyzerError):
        analyze_fleet([])


def test_invalid_config_rejected():
    with pytest.raises(AnalyzerError):
        AnalyzerConfig(threshold=0)
    with pytest.raises(AnalyzerError):
        AnalyzerConfig(top_n=0)


def test_transient_filter_keeps_non_select():
    profiles = _fleet()
    record = next(r for r in profiles[0].goroutines if r.id == 10)
    assert transient_filter(classify(record), record, AnalyzerConfig())


# ═══════════════════════════════════════════════════════════════════════
# LIMIAR E RMS
# ═══════════════════════════════════════════════════════════════════════

def test_threshold_boundary():
    below = analyze_fleet([_synthetic("a", {1: 9999})])
    at = analyze_fleet([_synthetic("a", {1: 10000})])
    assert below.findings == []
    assert len(at.findings) == 1
    assert at.findings[0].rms == 10000


def test_single_spike_across_three_instances():
    report = analyze_fleet([_synthetic("a", {}), _synthetic("b", {}), _synthetic("c", {1: 16000})])
    (stats,) = report.findings
    assert stats.rms == pytest.approx(9237.6, abs=0.05)
    assert stats.per_instance_counts == [("c", 16000)]


def test_spread_site_outranks_single_spike():
    report = analyze_fleet([_synthetic("a", {1: 10000, 2: 10000}), _synthetic("b", {2: 10000})])
    assert [s.site.function for s in report.findings] == ["svc.f02", "svc.f01"]
    assert report.findings[0].rms == pytest.approx(10000)
    assert report.findings[1].rms == pytest.approx(7071.07, abs=0.01)


def test_ties_broken_by_site_location():
    report = analyze_fleet([_synthetic("a", {3: 2, 1: 2})], AnalyzerConfig(threshold=1))
    assert [s.site.function for s in report.findings] == ["svc.f01", "svc.f03"]


def test_rms_single_profile_equals_count():
    assert rms([7], 1) == 7
    with pytest.raises(AnalyzerError):
        rms([1], 0)


@given(counts=st.lists(st.integers(0, 20000), min_size=1, max_size=6),
       k=st.integers(0, 50), index=st.integers(0, 5))
def test_rms_properties(counts, k, index):
    P = len(counts)
    base = rms(counts, P)
    assert rms([c * k for c in counts], P) == pytest.approx(k * base, rel=1e-12)
    bumped = list(counts)
    bumped[index % P] += 1
    assert rms(bumped, P) >= base
    assert max(counts) / math.sqrt(P) <= base + 1e-9
    assert base <= max(counts) + 1e-9


def _brute_force(fleet, threshold, top_n):
    P = len(fleet)
    sites = sorted({i for counts in fleet for i, c in counts.items() if c > 0})
    rows = []
    for i in sites:
        counts = [f.get(i, 0) for f in fleet]
        if max(counts) < threshold:
            continue
        value = math.sqrt(sum(c * c for c in counts) / P)
        rows.append((-value, -sum(counts), f"svc/f{i:02d}.go", f"svc.f{i:02d}", value))
    rows.sort()
    return [(row[3], row[4]) for row in rows[:top_n]]


@settings(max_examples=200, deadline=None)
@given(fleet=st.lists(st.dictionaries(st.integers(0, 19), st.integers(0, 40), max_size=20),
                      min_size=1, max_size=5),
       threshold=st.integers(1, 45), top_n=st.integers(1, 25))
def test_matches_brute_force(fleet, threshold, top_n):
    profiles = [_synthetic(f"i{n}", counts) for n, counts in enumerate(fleet)]
    report = analyze_fleet(profiles, AnalyzerConfig(threshold=threshold, top_n=top_n))
    got = [(s.site.function, s.rms) for s in report.findings]
    expected = _brute_force(fleet, threshold, top_n)
    assert [name for name, _ in got] == [name for name, _ in expected]
    for (_, a), (_, b) in zip(got, expected):
        assert a == pytest.approx(b, rel=1e-12)
