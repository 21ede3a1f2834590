#!/usr/bin/env python3
"""Testes do linter de range sem close"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from app.models import SourceLoc
from app.program import load_program
from app.range_lint import range_lint
from app.runtime import run
from app.scenarios import build_scenario


def test_unclosed_range_flagged():
    program, _ = build_scenario("unclosed-range")
    (finding,) = range_lint(program)
    assert finding.range_site == SourceLoc("patterns/producer_consumer.go", 6, "patterns.producerConsumer$1")
    assert finding.channel == "patterns.producerConsumer.ch"
    assert "nunca é fechado" in str(finding)


def test_fixed_variant_is_clean():
    program, _ = build_scenario("unclosed-range", fixed=True)
    assert range_lint(program) == []


def test_close_inside_branch_counts():
    program = load_program(
        "func main\n"
        "  chan c 0\n"
        "  go consume(c)\n"
        "  if done\n"
        "    close c\n"
        "  end\n"
        "end\n"
        "func consume(in)\n"
        "  range in\n"
        "  end\n"
        "end\n"
    )
    assert range_lint(program) == []


def test_close_through_helper_function():
    program = load_program(
        "func main\n"
        "  chan c 0\n"
        "  go consume(c)\n"
        "  call shutdown(c)\n"
        "end\n"
        "func shutdown(x)\n"
        "  close x\n"
        "end\n"
        "func consume(in)\n"
        "  range in\n"
        "  end\n"
        "end\n"
    )
    assert range_lint(program) == []


def test_other_channel_closed_does_not_count():
    program = load_program(
        "func main\n"
        "  chan a 0\n"
        "  chan b 0\n"
        "  close b\n"
        "  range a\n"
        "  end\n"
        "end\n"
    )
    (finding,) = range_lint(program)
    assert finding.channel == "main.a"
    assert finding.range_site.line == 5


SHARED_CONSUMER = (
    "func main\n"
    "  chan a 0\n"
    "  chan b 0\n"
    "  go consume(a)\n"
    "  go consume(b)\n"
    "  close a\n"
    "end\n"
    "\n"
    "\n"
    "func consume(in)\n"
    "  range in\n"
    "  end\n"
    "end\n"
)


def test_shared_consumer_closing_one_channel_only():
    program = load_program(SHARED_CONSUMER)
    (finding,) = range_lint(program)
    assert finding.channel == "main.b"
    assert finding.range_site == SourceLoc("program.go", 11, "consume")


def test_shared_consumer_agrees_with_simulation():
    program = load_program(SHARED_CONSUMER)
    leaked = [(t.status.name, str(t.blocking_site)) for t in run(program).leaked()]
    assert leaked == [("BLOCKED_RECV", "program.go:11")]
    assert [str(f.range_site) for f in range_lint(program)] == ["program.go:11"]


def test_shared_consumer_both_closed():
    program = load_program(SHARED_CONSUMER.replace("  close a\n", "  close a\n  close b\n"))
    assert range_lint(program) == []


def test_helper_closing_other_channel_does_not_count():
    program = load_program(
        "func main\n"
        "  chan a 0\n"
        "  chan b 0\n"
        "  go consume(a)\n"
        "  call shutdown(b)\n"
        "end\n"
        "func shutdown(x)\n"
        "  close x\n"
        "end\n"
        "func consume(in)\n"
        "  range in\n"
        "  end\n"
        "end\n"
    )
    (finding,) = range_lint(program)
    assert finding.channel == "main.a"


def test_programs_without_range():
    for name in ("listing1", "ncast", "method-contract"):
        program, _ = build_scenario(name)
        assert range_lint(program) == []
