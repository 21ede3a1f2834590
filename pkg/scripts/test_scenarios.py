#!/usr/bin/env python3
"""
Testes do catálogo de cenários: cada variante com defeito reproduz exatamente
os locais esperados e cada variante corrigida termina sem tarefas.
"""
import sys
from collections import Counter
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

import pytest

from app.models import BlockKind, kind_for_status
from app.runtime import SchedulerConfig, run
from app.scenarios import (
    SCENARIOS, UnknownScenarioError, build_scenario, builtin_scenarios, get_scenario, scenario_names,
)


def _observed(result):
    """(tipo, arquivo:linha) → quantidade, a partir da tabela final de tarefas."""
    return Counter(
        (kind_for_status(task.status), str(task.blocking_site))
        for task in result.leaked()
    )


def _expected(expectation):
    return Counter({(kind, str(loc)): count for kind, loc, count in expectation.expected_sites})


def test_catalog_names():
    assert scenario_names() == sorted([
        "listing1", "premature-return", "timeout-leak", "ncast", "double-send",
        "unclosed-range", "timer-loop", "method-contract", "zero-case-select", "select-choice",
    ])


def test_unknown_scenario():
    with pytest.raises(UnknownScenarioError) as info:
        get_scenario("nope")
    assert "listing1" in str(info.value)


def test_leaky_variants_match_expected_sites():
    for program, expectation in builtin_scenarios():
        if expectation.fixed:
            continue
        result = run(program, SchedulerConfig(seed=expectation.seed), expectation.conditions)
        assert result.quiescent
        assert _observed(result) == _expected(expectation), program.name
        assert len(result.leaked()) == expectation.expected_leak_count


def test_fixed_variants_leave_no_tasks():
    for program, expectation in builtin_scenarios():
        if not expectation.fixed:
            continue
        result = run(program, SchedulerConfig(seed=expectation.seed), expectation.conditions)
        assert result.leaked() == [], f"{program.name}: {result.task_table()}"
        assert expectation.tag == 'clean'


def test_results_do_not_depend_on_seed():
    for program, expectation in builtin_scenarios():
        tables = {
            run(program, SchedulerConfig(seed=seed), expectation.conditions).task_table()
            for seed in (0, 1, 42, 2 ** 63)
        }
        assert len(tables) == 1, program.name


@pytest.mark.parametrize("n,capacity,leaked", [(5, 0, 4), (1, 0, 0), (3, 2, 0), (6, 2, 3)])
def test_ncast_counts(n, capacity, leaked):
    program, expectation = build_scenario("ncast", params={'n': n, 'capacity': capacity})
    result = run(program)
    assert len(result.leaked()) == leaked
    assert expectation.expected_leak_count == leaked


def test_ncast_fixed_uses_n_as_capacity():
    program, expectation = build_scenario("ncast", fixed=True, params={'n': 7})
    assert expectation.params['capacity'] == 7
    assert run(program).leaked() == []


def test_listing1_conditions():
    program, expectation = build_scenario("listing1", conditions={'err': False})
    assert not expectation.leaky
    assert run(program, conditions=expectation.conditions).leaked() == []


def test_timeout_leak_when_work_finishes_first():
    program, expectation = build_scenario("timeout-leak", params={'cancel_at': 5, 'work': 2})
    assert not expectation.leaky
    assert run(program, conditions=expectation.conditions).leaked() == []


def test_unclosed_range_worker_count():
    program, expectation = build_scenario("unclosed-range", params={'workers': 4, 'items': 2})
    leaked = run(program).leaked()
    assert len(leaked) == 4
    assert {kind_for_status(t.status) for t in leaked} == {BlockKind.CHAN_RECV}


def test_method_contract_leaks_listener_in_select():
    program, _ = build_scenario("method-contract")
    (task,) = run(program).leaked()
    assert kind_for_status(task.status) == BlockKind.SELECT
    assert task.leaf_function == "patterns.Worker.Start$1"
    assert task.block['zero_case'] is False


def test_zero_case_select_flags_block():
    program, _ = build_scenario("zero-case-select")
    (task,) = run(program).leaked()
    assert task.block['zero_case'] is True


def test_timer_loop_is_anti_pattern():
    program, expectation = build_scenario("timer-loop")
    assert expectation.tag == "anti-pattern"
    result = run(program)
    assert result.clock <= SchedulerConfig().time_limit
    assert len(result.leaked()) == 1


def test_unknown_param_rejected():
    with pytest.raises(ValueError):
        build_scenario("listing1", params={'bogus': 1})


def test_invalid_param_value_rejected():
    with pytest.raises(ValueError):
        build_scenario("ncast", params={'n': 0})


def test_demo_has_no_fixed_variant():
    assert not SCENARIOS["select-choice"].has_fixed
    with pytest.raises(ValueError):
        build_scenario("select-choice", fixed=True)


def test_select_choice_depends_on_seed():
    program, _ = build_scenario("select-choice")
    traces = {run(program, SchedulerConfig(seed=seed)).trace_text() for seed in range(20)}
    assert len(traces) == 2
