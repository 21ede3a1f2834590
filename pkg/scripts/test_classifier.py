#!/usr/bin/env python3
"""
Testes do classificador de pilhas e da contagem por local
"""
import sys
from dataclasses import replace
from pathlib import Path

ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(ROOT))

import pytest

from app.classifier import (
    CATEGORIES, OTHER_CATEGORY, ClassificationError, category, classify, select_arm_symbols, tally,
)
from app.models import BlockKind, BlockSite, Frame, SourceLoc
from app.profile import GoroutineRecord, load_profile_file

PROFILES = ROOT / "data" / "fixtures" / "profiles"

# id → (tipo, local, linha da tabela)
TABLE_KINDS = {
    1: (BlockKind.CHAN_RECV, "patterns/premature_return.go:8", "chan receive (non-nil chan)"),
    2: (BlockKind.CHAN_RECV, "patterns/nil_chan.go:12", "chan receive (nil chan)"),
    3: (BlockKind.CHAN_SEND, "transactions/cost.go:8", "chan send (non-nil chan)"),
    4: (BlockKind.CHAN_SEND, "patterns/nil_chan.go:20", "chan send (nil chan)"),
    5: (BlockKind.SELECT, "patterns/worker.go:9", "select (>0 cases)"),
    6: (BlockKind.SELECT, "patterns/serve.go:5", "select (0 cases)"),
    7: (BlockKind.IO_WAIT, "net/net.go:179", "IO wait"),
    8: (BlockKind.SYSCALL, "syscall/syscall_linux.go:69", "System call"),
    9: (BlockKind.SLEEP, "cmd/agent/main.go:31", "Sleep"),
    10: (BlockKind.RUNNING, "cmd/agent/main.go:20", "Running/Runnable"),
    11: (BlockKind.COND_WAIT, "sync/cond.go:70", "Condition Wait"),
    12: (BlockKind.SEM_ACQUIRE, "runtime/sema.go:77", "Semaphore Acquire"),
    13: (BlockKind.OTHER, "pool/pool.go:88", OTHER_CATEGORY),
}


def _frame(symbol: str, where: str) -> Frame:
    return Frame(symbol, SourceLoc.parse(where, symbol))


def test_every_table_row_classified():
    profile = load_profile_file(PROFILES / "table_kinds.gprof.txt")
    assert len(profile) == 13
    for record in profile.goroutines:
        kind, where, row = TABLE_KINDS[record.id]
        site = classify(record)
        assert site.kind == kind, record.id
        assert str(site.location) == where, record.id
        assert category(record, site) == row, record.id
    rows = {category(r) for r in profile.goroutines}
    assert rows == set(CATEGORIES) | {OTHER_CATEGORY}


def test_tally_two_kinds():
    profile = load_profile_file(PROFILES / "two_kinds.gprof.txt")
    counts = tally(profile)
    assert {(site.kind, str(site.location)): n for site, n in counts.items()} == {
        (BlockKind.CHAN_SEND, "transactions/cost.go:8"): 3,
        (BlockKind.CHAN_RECV, "patterns/producer_consumer.go:6"): 2,
    }
    # ordenado pela chave do local
    assert [s.location.file for s in counts] == ["patterns/producer_consumer.go", "transactions/cost.go"]


def test_park_without_user_frame_raises():
    profile = load_profile_file(ROOT / "data" / "fixtures" / "unclassifiable" / "park_only.gprof.txt")
    bad, good = profile.goroutines
    with pytest.raises(ClassificationError):
        classify(bad)
    assert classify(good).kind == BlockKind.CHAN_SEND
    with pytest.raises(ClassificationError):
        tally(profile)


def test_empty_frames_raise():
    with pytest.raises(ClassificationError):
        classify(GoroutineRecord(1, "running", ()))


def test_label_qualifiers_ignored():
    profile = load_profile_file(PROFILES / "table_kinds.gprof.txt")
    sleeper = next(r for r in profile.goroutines if r.id == 9)
    assert classify(replace(sleeper, state_label="sleep, 12 minutes")).kind == BlockKind.SLEEP


def test_not_parked_and_not_running_is_other():
    record = GoroutineRecord(3, "copystack", (_frame("main.loop", "cmd/main.go:9"),))
    assert classify(record) == BlockSite(BlockKind.OTHER, SourceLoc("cmd/main.go", 9, "main.loop"))


def test_custom_signatures():
    record = GoroutineRecord(1, "chan send", (
        _frame("runtime.gopark", "runtime/proc.go:398"),
        _frame("runtime.chansendX", "runtime/chan.go:1"),
        _frame("svc.push", "svc/push.go:3"),
    ))
    assert classify(record).kind == BlockKind.OTHER
    custom = classify(record, send_signature=frozenset({"runtime.chansendX"}))
    assert custom.kind == BlockKind.CHAN_SEND


def test_select_arm_symbols():
    profile = load_profile_file(ROOT / "data" / "fixtures" / "fleet" / "host-a.gprof.txt")
    ticker = next(r for r in profile.goroutines if r.id == 30)
    assert select_arm_symbols(ticker) == ["time.After", "context.Done"]
    sender = next(r for r in profile.goroutines if r.id == 10)
    assert select_arm_symbols(sender) == []
