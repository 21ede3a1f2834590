#!/usr/bin/env python3
"""
Testes da linha de comando (códigos de saída e arquivos gravados)
"""
import io
import json
import sys
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(ROOT))

import pytest

from app.cli import UsageError, main, parse_extras
from app.classifier import tally
from app.models import BlockKind
from app.profile import load_profile_file

FIXTURES = ROOT / "data" / "fixtures"


def _cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main([str(a) for a in argv])
    return code, out.getvalue(), err.getvalue()


# ═══════════════════════════════════════════════════════════════════════
# SIMULATE
# ═══════════════════════════════════════════════════════════════════════

def test_simulate_ncast_writes_profile():
    with tempfile.TemporaryDirectory() as tmp:
        code, out, _ = _cli("simulate", "ncast", "--n", "5", "--out", tmp)
        assert code == 0
        assert "lingering=4" in out
        profile = load_profile_file(Path(tmp) / "ncast.gprof.txt")
        counts = tally(profile)
        assert [(s.kind, str(s.location), n) for s, n in counts.items()] == [
            (BlockKind.CHAN_SEND, "patterns/ncast.go:4", 4)]
        assert (Path(tmp) / "ncast.trace.txt").read_text(encoding='utf-8').startswith("step=")


def test_simulate_condition_token():
    with tempfile.TemporaryDirectory() as tmp:
        assert _cli("simulate", "listing1", "--err=true", "--out", tmp)[0] == 0
        assert len(load_profile_file(Path(tmp) / "listing1.gprof.txt")) == 1
        assert _cli("simulate", "listing1", "--err=false", "--out", tmp)[0] == 0
        assert len(load_profile_file(Path(tmp) / "listing1.gprof.txt")) == 0


def test_simulate_instance_header():
    with tempfile.TemporaryDirectory() as tmp:
        _cli("simulate", "unclosed-range", "--instance-id", "svc-7",
             "--captured-at", "2024-02-02T00:00:00Z", "--out", tmp)
        profile = load_profile_file(Path(tmp) / "svc-7.gprof.txt")
        assert profile.instance_id == "svc-7"
        assert profile.captured_at == "2024-02-02T00:00:00Z"
        assert len(profile) == 3


@pytest.mark.parametrize("flag, value", [("--instance-id", "my host"), ("--captured-at", "2024-02-02 00:00")])
def test_simulate_header_value_with_space_is_usage_error(flag, value):
    with tempfile.TemporaryDirectory() as tmp:
        code, _, err = _cli("simulate", "ncast", flag, value, "--out", tmp)
        assert code == 2
        assert "espaços" in err
        assert list(Path(tmp).iterdir()) == []


def test_simulate_same_seed_same_trace():
    with tempfile.TemporaryDirectory() as tmp:
        _cli("simulate", "select-choice", "--seed", "11", "--out", Path(tmp) / "a")
        _cli("simulate", "select-choice", "--seed", "11", "--out", Path(tmp) / "b")
        a = (Path(tmp) / "a" / "select-choice.trace.txt").read_text(encoding='utf-8')
        b = (Path(tmp) / "b" / "select-choice.trace.txt").read_text(encoding='utf-8')
        assert a == b


def test_simulate_chan_file_and_bound_exceeded():
    with tempfile.TemporaryDirectory() as tmp:
        program = Path(tmp) / "spin.chan"
        program.write_text("func main\n  for\n    call spin\n  end\nend\nfunc spin\nend\n", encoding='utf-8')
        code, _, err = _cli("simulate", program, "--max-steps", "50", "--out", tmp)
        assert code == 1
        assert "max_steps" in err
        assert (Path(tmp) / "spin.gprof.txt").exists()


def test_simulate_params_rejected_for_files():
    code, _, err = _cli("simulate", "data/scenarios/none.chan", "--n", "3")
    assert code == 2
    assert err.startswith("erro:")


def test_unknown_scenario_is_usage_error():
    code, _, err = _cli("simulate", "no-such-scenario")
    assert code == 2
    assert "listing1" in err


def test_unknown_param_is_usage_error():
    assert _cli("check", "listing1", "--bogus", "3")[0] == 2


# ═══════════════════════════════════════════════════════════════════════
# CHECK / LINT
# ═══════════════════════════════════════════════════════════════════════

def test_check_exit_codes():
    code, out, err = _cli("check", "listing1")
    assert code == 1
    assert "leak: goroutine 2" in err
    assert "FAIL (1 vazamento(s))" in out

    code, out, _ = _cli("check", "listing1", "--fixed")
    assert code == 0
    assert "PASS" in out


def test_check_with_suppression_file():
    with tempfile.TemporaryDirectory() as tmp:
        suppress = Path(tmp) / "suppress.txt"
        suppress.write_text("transactions.ComputeCost$1\n", encoding='utf-8')
        code, out, _ = _cli("check", "listing1", "--suppress", suppress)
        assert code == 0
        assert "suprimidos: 1" in out


def test_missing_suppression_file_is_usage_error():
    assert _cli("check", "listing1", "--suppress", "/nonexistent/list.txt")[0] == 2


def test_lint_exit_codes():
    code, out, _ = _cli("lint", "unclosed-range")
    assert code == 1
    assert "patterns/producer_consumer.go:6" in out
    code, out, _ = _cli("lint", "unclosed-range", "--fixed")
    assert code == 0
    assert "nenhum range sem close" in out


# ═══════════════════════════════════════════════════════════════════════
# ANALYZE
# ═══════════════════════════════════════════════════════════════════════

def test_analyze_fleet_json():
    with tempfile.TemporaryDirectory() as tmp:
        code, out, err = _cli("analyze", FIXTURES / "fleet", "--threshold", "3", "--format", "json", "--out", tmp)
        assert code == 0
        data = json.loads(out)
        assert [f['line'] for f in data['findings']] == [8, 6, 9]
        assert (Path(tmp) / "leak_report.json").read_text(encoding='utf-8') == out
        assert (Path(tmp) / "leak_report.txt").exists()
        assert "json:" in err


def test_analyze_config_file_and_flag_precedence():
    with tempfile.TemporaryDirectory() as tmp:
        config = Path(tmp) / "leakwatch.env"
        config.write_text("THRESHOLD=3\nTOP_N=1\n", encoding='utf-8')
        code, out, _ = _cli("analyze", FIXTURES / "fleet", "--config", config, "--format", "json", "--out", tmp)
        assert code == 0
        data = json.loads(out)
        assert data['config']['threshold'] == 3
        assert len(data['findings']) == 1

        code, out, _ = _cli("analyze", FIXTURES / "fleet", "--config", config, "--threshold", "100",
                            "--format", "json", "--out", tmp)
        assert json.loads(out)['findings'] == []


def test_analyze_no_readable_profiles():
    with tempfile.TemporaryDirectory() as tmp:
        assert _cli("analyze", tmp, "--out", tmp)[0] == 3
        code, _, err = _cli("analyze", FIXTURES / "malformed", "--out", tmp)
        assert code == 3
        assert err.count("aviso:") == 5


def test_analyze_strict_parse():
    with tempfile.TemporaryDirectory() as tmp:
        code, _, _ = _cli("analyze", FIXTURES / "malformed", "--strict", "--out", tmp)
        assert code == 4


def test_analyze_invalid_threshold():
    with tempfile.TemporaryDirectory() as tmp:
        assert _cli("analyze", FIXTURES / "fleet", "--threshold", "0", "--out", tmp)[0] == 2


def test_analyze_pdf():
    with tempfile.TemporaryDirectory() as tmp:
        code, _, _ = _cli("analyze", FIXTURES / "fleet", "--threshold", "3", "--pdf", "--out", tmp)
        assert code == 0
        assert (Path(tmp) / "leak_report.pdf").exists()


# ═══════════════════════════════════════════════════════════════════════
# PARSER
# ═══════════════════════════════════════════════════════════════════════

def test_no_command_is_usage_error():
    assert _cli()[0] == 2


def test_help_exits_zero():
    assert _cli("--help")[0] == 0


def test_parse_extras():
    assert parse_extras(["--n", "5", "--err=true", "--cond", "--name", "x"]) == (
        {'n': 5, 'name': 'x'}, {'err': True, 'cond': True})
    with pytest.raises(UsageError):
        parse_extras(["stray"])


def test_invalid_environment_config_is_usage_error(monkeypatch):
    from config import settings
    monkeypatch.setattr(settings, 'THRESHOLD', 0)
    with pytest.raises(settings.ConfigurationError) as info:
        settings.require_valid_config()
    assert "LEAKWATCH_THRESHOLD" in str(info.value)
    code, _, err = _cli("lint", "unclosed-range")
    assert code == 2
    assert "configuração inválida" in err


def test_valid_environment_config_passes():
    from config import settings
    settings.require_valid_config()
