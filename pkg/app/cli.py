"""
Linha de comando do leakwatch.

    python -m app.cli simulate ncast --n 5 --out reports/
    python -m app.cli check listing1 --err=true
    python -m app.cli analyze fleet/ --threshold 10000 --out reports/
    python -m app.cli lint data/scenarios/unclosed-range.chan

Flags desconhecidas no formato `--nome valor` ou `--nome=valor` viram parâmetros
do cenário (inteiros/texto) ou tokens de condição (`true`/`false`).
"""
import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from dotenv import dotenv_values

sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import (
    DEFAULT_SEED, MAX_STEPS, TIME_LIMIT, THRESHOLD, TOP_N, TRANSIENT_SYMBOLS, OUTPUT_DIR,
    SCENARIO_SUFFIX, PROFILE_SUFFIX,
    EXIT_OK, EXIT_FINDINGS, EXIT_USAGE, EXIT_NO_INPUT, EXIT_STRICT_PARSE,
    ConfigurationError, require_valid_config,
)
from app.program import ProgramParseError, SimProgram, load_program_file
from app.scenarios import UnknownScenarioError, get_scenario, scenario_names
from app.runtime import BoundExceeded, SchedulerConfig, Simulator
from app.snapshot import snapshot
from app.profile import check_header_value, write_profile_file, parse_profile_dir
from app.goleak import goleak_verify, load_name_list
from app.leakprof import AnalyzerConfig, AnalyzerError, analyze_fleet
from app.range_lint import range_lint
from app.report_generator import render_json, render_text, write_report
from app.logger import enable_console, log_error, log_info


class UsageError(Exception):
    """Entrada inválida na linha de comando (exit 2)"""
    pass


# ═══════════════════════════════════════════════════════════════════════════════
# CONFIGURAÇÃO EFETIVA
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass
class CliConfig:
    seed: int = DEFAULT_SEED
    max_steps: int = MAX_STEPS
    time_limit: int = TIME_LIMIT
    threshold: int = THRESHOLD
    top_n: int = TOP_N
    suppression: frozenset = frozenset()
    transient_symbols: frozenset = TRANSIENT_SYMBOLS
    sources: Dict[str, str] = field(default_factory=dict)   # chave → arquivo/flag de origem

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "CliConfig":
        """Valores padrão ← arquivo --config ← flags."""
        config = cls()
        file_values: Dict[str, Optional[str]] = {}
        if getattr(args, 'config', None):
            path = Path(args.config)
            if not path.is_file():
                raise UsageError(f"arquivo de configuração não encontrado: {path}")
            file_values = dotenv_values(path)

        def pick(key: str, flag: Optional[object]) -> Optional[object]:
            if flag is not None:
                config.sources[key] = "flag"
                return flag
            if file_values.get(key.upper()) not in (None, ""):
                config.sources[key] = str(args.config)
                return file_values[key.upper()]
            return None

        for key in ('seed', 'max_steps', 'time_limit', 'threshold', 'top_n'):
            value = pick(key, getattr(args, key, None))
            if value is not None:
                try:
                    setattr(config, key, int(value))
                except ValueError:
                    raise UsageError(f"{key} deve ser inteiro: '{value}'") from None

        suppress = pick('suppress', getattr(args, 'suppress', None))
        if suppress:
            config.suppression = _read_list(suppress)
        transient = pick('transient', getattr(args, 'transient', None))
        if transient:
            config.transient_symbols = _read_list(transient)
        return config

    def scheduler(self) -> SchedulerConfig:
        try:
            return SchedulerConfig(seed=self.seed, max_steps=self.max_steps, time_limit=self.time_limit)
        except ValueError as e:
            raise UsageError(str(e)) from None

    def analyzer(self) -> AnalyzerConfig:
        try:
            return AnalyzerConfig(self.threshold, self.top_n, self.transient_symbols, self.suppression)
        except AnalyzerError as e:
            raise UsageError(str(e)) from None


def _read_list(path) -> frozenset:
    try:
        return load_name_list(path)
    except OSError as e:
        raise UsageError(f"não foi possível ler {path}: {e}") from None


def parse_extras(extras: List[str]) -> Tuple[Dict[str, object], Dict[str, bool]]:
    """
    `--n 5 --err=true` → ({'n': 5}, {'err': True}).

    Returns:
        (parâmetros do cenário, tokens de condição)
    """
    params: Dict[str, object] = {}
    conditions: Dict[str, bool] = {}
    i = 0
    while i < len(extras):
        token = extras[i]
        if not token.startswith('--') or len(token) < 3:
            raise UsageError(f"argumento inesperado: '{token}'")
        name, sep, value = token[2:].partition('=')
        if not sep:
            if i + 1 < len(extras) and not extras[i + 1].startswith('--'):
                value = extras[i + 1]
                i += 1
            else:
                value = 'true'
        lowered = value.lower()
        if lowered in ('true', 'false'):
            conditions[name] = lowered == 'true'
        else:
            try:
                params[name] = int(value)
            except ValueError:
                params[name] = value
        i += 1
    return params, conditions


def resolve_program(target: str, fixed: bool, params: Dict[str, object],
                    conditions: Dict[str, bool]) -> Tuple[SimProgram, Dict[str, bool]]:
    """Arquivo `.chan` ou nome de cenário embutido → (programa, condições efetivas)."""
    path = Path(target)
    if target.endswith(SCENARIO_SUFFIX) or path.is_file():
        if not path.is_file():
            raise UsageError(f"arquivo não encontrado: {path}")
        if params:
            raise UsageError(f"parâmetros de cenário não se aplicam a arquivos: {', '.join(params)}")
        try:
            return load_program_file(path), conditions
        except ProgramParseError as e:
            raise UsageError(f"{path}: {e}") from None
    try:
        scenario = get_scenario(target)
        program, expectation = scenario.build(fixed=fixed, params=params, conditions=conditions)
    except UnknownScenarioError as e:
        raise UsageError(str(e)) from None
    except (ValueError, ProgramParseError) as e:
        raise UsageError(f"cenário '{target}': {e}") from None
    return program, dict(expectation.conditions)


# ═══════════════════════════════════════════════════════════════════════════════
# COMANDOS
# ═══════════════════════════════════════════════════════════════════════════════

def cmd_simulate(args, extras: List[str]) -> int:
    config = CliConfig.from_args(args)
    params, conditions = parse_extras(extras)
    try:
        check_header_value('--instance-id', args.instance_id or "")
        check_header_value('--captured-at', args.captured_at or "")
    except ValueError as e:
        raise UsageError(str(e)) from None
    program, conditions = resolve_program(args.target, args.fixed, params, conditions)

    simulator = Simulator(program, config.scheduler(), conditions)
    status = EXIT_OK
    try:
        result = simulator.run()
    except BoundExceeded as e:
        result = e.result
        print(f"erro: {e}", file=sys.stderr)
        status = EXIT_FINDINGS

    out_dir = Path(args.out or OUTPUT_DIR)
    out_dir.mkdir(parents=True, exist_ok=True)
    instance = args.instance_id or program.name
    trace_path = out_dir / f"{instance}.trace.txt"
    trace_path.write_text(result.trace_text(), encoding='utf-8')
    profile = snapshot(simulator, instance_id=instance, captured_at=args.captured_at or "")
    profile_path = write_profile_file(profile, out_dir / f"{instance}{PROFILE_SUFFIX}")

    print(result.task_table(), end="")
    print(f"steps={result.steps} clock={result.clock} lingering={len(result.leaked())}")
    print(f"trace: {trace_path}")
    print(f"profile: {profile_path}")
    log_info("cli", f"SIMULATE | program={program.name} | seed={config.seed} | out={out_dir}")
    return status


def cmd_check(args, extras: List[str]) -> int:
    config = CliConfig.from_args(args)
    params, conditions = parse_extras(extras)
    program, conditions = resolve_program(args.target, args.fixed, params, conditions)

    verdict = goleak_verify(program, config.scheduler(), config.suppression, conditions)
    if verdict.bound_exceeded:
        print(f"aviso: max_steps={config.max_steps} atingido antes da quiescência", file=sys.stderr)
    for finding in verdict.findings:
        print(f"leak: {finding}", file=sys.stderr)
    if verdict.findings:
        print(verdict.stacks, end="", file=sys.stderr)
    if verdict.suppressed:
        print(f"suprimidos: {verdict.suppressed_count}")
        for function, count in verdict.suppressed.items():
            print(f"  {function}: {count}")
    print(f"{program.name}: {'PASS' if verdict.passed else 'FAIL'} ({len(verdict.findings)} vazamento(s))")
    return EXIT_OK if verdict.passed else EXIT_FINDINGS


def cmd_analyze(args, extras: List[str]) -> int:
    if extras:
        raise UsageError(f"argumentos desconhecidos: {' '.join(extras)}")
    config = CliConfig.from_args(args)
    analyzer_config = config.analyzer()

    profiles, failures = parse_profile_dir(args.target)
    for path, message in failures:
        print(f"aviso: {path} ignorado: {message}", file=sys.stderr)
    if failures and args.strict:
        print(f"erro: {len(failures)} perfil(is) inválido(s) com --strict", file=sys.stderr)
        return EXIT_STRICT_PARSE
    if not profiles:
        print(f"erro: nenhum perfil legível em {args.target}", file=sys.stderr)
        return EXIT_NO_INPUT

    report = analyze_fleet(profiles, analyzer_config)
    written = write_report(report, Path(args.out or OUTPUT_DIR), pdf=args.pdf)

    print(render_json(report) if args.format == 'json' else render_text(report), end="")
    for kind in sorted(written):
        print(f"{kind}: {written[kind]}", file=sys.stderr)
    return EXIT_OK


def cmd_lint(args, extras: List[str]) -> int:
    params, conditions = parse_extras(extras)
    program, _ = resolve_program(args.target, args.fixed, params, conditions)
    findings = range_lint(program)
    for finding in findings:
        print(finding)
    if not findings:
        print(f"{program.name}: nenhum range sem close")
    return EXIT_FINDINGS if findings else EXIT_OK


# ═══════════════════════════════════════════════════════════════════════════════
# PARSER
# ═══════════════════════════════════════════════════════════════════════════════

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="arquivo KEY=VALUE (SEED, THRESHOLD, TOP_N, SUPPRESS, ...)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--max-steps", dest="max_steps", type=int, default=None)
    common.add_argument("--time-limit", dest="time_limit", type=int, default=None)
    common.add_argument("--suppress", default=None, help="arquivo com uma função por linha")
    common.add_argument("--out", default=None, help=f"diretório de saída (padrão: {OUTPUT_DIR})")
    common.add_argument("--verbose", "-v", action="store_true", help="logs em stderr")

    parser = argparse.ArgumentParser(
        prog="leakwatch",
        description="Simulação, verificação e análise de goroutines bloqueadas",
    )
    sub = parser.add_subparsers(dest="command", metavar="<comando>")
    sub.required = True

    simulate = sub.add_parser("simulate", parents=[common], allow_abbrev=False, help="executa um cenário e grava trace + perfil")
    simulate.add_argument("target", help=f"cenário ({', '.join(scenario_names())}) ou arquivo .chan")
    simulate.add_argument("--fixed", action="store_true", help="variante corrigida do cenário")
    simulate.add_argument("--instance-id", dest="instance_id", default=None)
    simulate.add_argument("--captured-at", dest="captured_at", default=None)
    simulate.set_defaults(handler=cmd_simulate)

    check = sub.add_parser("check", parents=[common], allow_abbrev=False, help="falha se sobrar goroutine no fim da execução")
    check.add_argument("target")
    check.add_argument("--fixed", action="store_true")
    check.set_defaults(handler=cmd_check)

    analyze = sub.add_parser("analyze", parents=[common], allow_abbrev=False, help="analisa uma frota de perfis .gprof.txt")
    analyze.add_argument("target", help="diretório, arquivo ou glob")
    analyze.add_argument("--threshold", type=int, default=None)
    analyze.add_argument("--top-n", dest="top_n", type=int, default=None)
    analyze.add_argument("--transient", default=None, help="arquivo com um símbolo transitório por linha")
    analyze.add_argument("--strict", action="store_true", help="perfil inválido encerra com código 4")
    analyze.add_argument("--format", choices=("json", "text"), default="text")
    analyze.add_argument("--pdf", action="store_true", help="grava também o relatório em PDF")
    analyze.set_defaults(handler=cmd_analyze)

    lint = sub.add_parser("lint", parents=[common], allow_abbrev=False, help="range sobre canal que nunca é fechado")
    lint.add_argument("target")
    lint.add_argument("--fixed", action="store_true")
    lint.set_defaults(handler=cmd_lint)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args, extras = parser.parse_known_args(argv)
    except SystemExit as e:
        # argparse já imprimiu a mensagem de uso
        return EXIT_USAGE if e.code else EXIT_OK

    if args.verbose:
        enable_console(logging.INFO)

    try:
        require_valid_config()
        return args.handler(args, extras)
    except ConfigurationError as e:
        print(f"erro: configuração inválida: {e}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as e:
        print(f"erro: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        log_error("cli", f"falha em '{args.command}'", e)
        raise


if __name__ == "__main__":
    sys.exit(main())
