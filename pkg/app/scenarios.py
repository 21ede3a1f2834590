"""
Catálogo de cenários embutidos: padrões de vazamento (variante com defeito e corrigida).

Cada cenário é um template `.chan` em data/scenarios/ com parâmetros `$nome`,
mais a expectativa que o simulador precisa reproduzir na tabela final de tarefas.
"""
from dataclasses import dataclass, field
from string import Template
from typing import Callable, Dict, List, Mapping, Optional, Tuple

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import SCENARIOS_DIR, SCENARIO_SUFFIX
from app.models import BlockKind, SourceLoc
from app.program import SimProgram, load_program
from app.logger import log_debug


ExpectedSite = Tuple[BlockKind, SourceLoc, int]


class UnknownScenarioError(KeyError):
    """Cenário não existe no catálogo"""

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"cenário desconhecido '{self.name}'. Disponíveis: {', '.join(scenario_names())}"


@dataclass(frozen=True)
class ScenarioExpectation:
    name: str
    fixed: bool
    leaky: bool
    tag: str                                   # leak | anti-pattern | clean | demo
    expected_sites: Tuple[ExpectedSite, ...]
    seed: int = 0
    conditions: Mapping[str, bool] = field(default_factory=dict)
    params: Mapping[str, object] = field(default_factory=dict)
    seed_independent: bool = True

    @property
    def expected_leak_count(self) -> int:
        return sum(count for _, _, count in self.expected_sites)


@dataclass(frozen=True)
class Scenario:
    name: str
    template: str
    description: str
    params: Mapping[str, object] = field(default_factory=dict)
    conditions: Mapping[str, bool] = field(default_factory=dict)
    tag: str = "leak"
    sites: Callable[[Mapping, Mapping], Tuple[ExpectedSite, ...]] = lambda p, c: ()
    fixed_template: Optional[str] = None
    fixed_params: Mapping[str, object] = field(default_factory=dict)
    seed_independent: bool = True
    has_fixed: bool = True

    def render(self, fixed: bool = False, params: Optional[Mapping] = None) -> str:
        """Texto do programa com os parâmetros aplicados."""
        template = self.fixed_template if fixed and self.fixed_template else self.template
        values = self.effective_params(fixed, params)
        text = (SCENARIOS_DIR / template).read_text(encoding='utf-8')
        # safe_substitute preserva sufixos como `$1` nos nomes de função
        return Template(text).safe_substitute({k: str(v) for k, v in values.items()})

    def effective_params(self, fixed: bool = False, params: Optional[Mapping] = None) -> Dict[str, object]:
        values = dict(self.params)
        if fixed:
            values.update(self.fixed_params)
        for key, value in (params or {}).items():
            if key not in self.params:
                raise ValueError(f"cenário '{self.name}' não aceita o parâmetro '{key}'")
            values[key] = value
        if 'capacity' in values and values['capacity'] == 'n':
            values['capacity'] = values['n']
        return values

    def build(self, fixed: bool = False, params: Optional[Mapping] = None,
              conditions: Optional[Mapping[str, bool]] = None,
              seed: int = 0) -> Tuple[SimProgram, ScenarioExpectation]:
        """
        Monta o programa e a expectativa do cenário.

        Args:
            fixed: Usa a variante corrigida
            params: Sobrescreve parâmetros do template (n, workers, ...)
            conditions: Sobrescreve tokens de condição (err, cond, ...)
            seed: Semente documentada da expectativa

        Returns:
            (SimProgram, ScenarioExpectation)
        """
        if fixed and not self.has_fixed:
            raise ValueError(f"cenário '{self.name}' não tem variante corrigida")
        values = self.effective_params(fixed, params)
        conds = dict(self.conditions)
        conds.update(conditions or {})

        suffix = ".fixed" if fixed else ""
        program = load_program(self.render(fixed, params), name=self.name)
        program.name = f"{self.name}{suffix}"
        log_debug("scenario", f"SCENARIO_BUILT | name={program.name} | params={values} | conditions={conds}")

        sites = () if fixed else tuple(s for s in self.sites(values, conds) if s[2] > 0)
        tag = self.tag if sites or self.tag == 'demo' else 'clean'
        expectation = ScenarioExpectation(
            name=program.name,
            fixed=fixed,
            leaky=bool(sites),
            tag=tag,
            expected_sites=sites,
            seed=seed,
            conditions=conds,
            params=values,
            seed_independent=self.seed_independent,
        )
        return program, expectation


def _loc(file: str, line: int, function: str) -> SourceLoc:
    return SourceLoc(file, line, function)


def _positive(values: Mapping, key: str) -> int:
    value = int(values[key])
    if value < 1:
        raise ValueError(f"parâmetro '{key}' deve ser >= 1")
    return value


# ═══════════════════════════════════════════════════════════════════════════════
# CATÁLOGO
# ═══════════════════════════════════════════════════════════════════════════════

SCENARIOS: Dict[str, Scenario] = {}


def _register(scenario: Scenario) -> Scenario:
    SCENARIOS[scenario.name] = scenario
    return scenario


_register(Scenario(
    name="listing1",
    template="listing1" + SCENARIO_SUFFIX,
    description="ComputeCost retorna no erro e o remetente anônimo vaza em cost.go:8",
    params={'capacity': 0},
    conditions={'err': True},
    fixed_params={'capacity': 1},
    sites=lambda p, c: (
        (BlockKind.CHAN_SEND, _loc("transactions/cost.go", 8, "transactions.ComputeCost$1"),
         1 if c.get('err') and int(p['capacity']) == 0 else 0),
    ),
))

_register(Scenario(
    name="premature-return",
    template="premature-return" + SCENARIO_SUFFIX,
    description="Receptor retorna antes de receber; remetente bloqueia no send",
    params={'capacity': 0},
    conditions={'cond': True},
    fixed_params={'capacity': 1},
    sites=lambda p, c: (
        (BlockKind.CHAN_SEND, _loc("patterns/premature_return.go", 3, "patterns.Fetch$1"),
         1 if c.get('cond') and int(p['capacity']) == 0 else 0),
    ),
))

_register(Scenario(
    name="timeout-leak",
    template="timeout-leak" + SCENARIO_SUFFIX,
    description="Contexto cancelado antes do worker; send sem receptor",
    params={'capacity': 0, 'cancel_at': 1, 'work': 2},
    fixed_params={'capacity': 1},
    sites=lambda p, c: (
        (BlockKind.CHAN_SEND, _loc("patterns/timeout.go", 5, "patterns.Handler$1"),
         1 if int(p['cancel_at']) < int(p['work']) and int(p['capacity']) == 0 else 0),
    ),
))

_register(Scenario(
    name="ncast",
    template="ncast" + SCENARIO_SUFFIX,
    description="n remetentes e um único recebimento; n-1 vazam",
    params={'n': 5, 'capacity': 0},
    fixed_params={'capacity': 'n'},
    sites=lambda p, c: (
        (BlockKind.CHAN_SEND, _loc("patterns/ncast.go", 4, "patterns.Broadcast$1"),
         max(_positive(p, 'n') - 1 - int(p['capacity']), 0)),
    ),
))

_register(Scenario(
    name="double-send",
    template="double-send" + SCENARIO_SUFFIX,
    fixed_template="double-send.fixed" + SCENARIO_SUFFIX,
    description="Falta return depois do envio de nil; o segundo send bloqueia",
    conditions={'err': True},
    sites=lambda p, c: (
        (BlockKind.CHAN_SEND, _loc("patterns/double_send.go", 7, "patterns.sender"),
         1 if c.get('err') else 0),
    ),
))

_register(Scenario(
    name="unclosed-range",
    template="unclosed-range" + SCENARIO_SUFFIX,
    fixed_template="unclosed-range.fixed" + SCENARIO_SUFFIX,
    description="Produtor não fecha o canal; todos os consumidores param no range",
    params={'workers': 3, 'items': 5},
    sites=lambda p, c: (
        (BlockKind.CHAN_RECV, _loc("patterns/producer_consumer.go", 6, "patterns.producerConsumer$1"),
         _positive(p, 'workers')),
    ),
))

_register(Scenario(
    name="timer-loop",
    template="timer-loop" + SCENARIO_SUFFIX,
    fixed_template="timer-loop.fixed" + SCENARIO_SUFFIX,
    description="Laço infinito sobre time.After sem saída (anti-padrão)",
    params={'period': 10, 'lifetime': 12},
    tag="anti-pattern",
    sites=lambda p, c: (
        (BlockKind.CHAN_RECV, _loc("patterns/stats.go", 5, "patterns.statsReporter$1"), 1),
    ),
))

_register(Scenario(
    name="method-contract",
    template="method-contract" + SCENARIO_SUFFIX,
    description="Start sem Stop: o listener fica preso no select",
    params={'entry': "patterns.foo"},
    fixed_params={'entry': "patterns.fooStopped"},
    sites=lambda p, c: (
        (BlockKind.SELECT, _loc("patterns/worker.go", 9, "patterns.Worker.Start$1"),
         1 if p['entry'] == "patterns.foo" else 0),
    ),
))

_register(Scenario(
    name="zero-case-select",
    template="zero-case-select" + SCENARIO_SUFFIX,
    fixed_template="zero-case-select.fixed" + SCENARIO_SUFFIX,
    description="select {} sem casos bloqueia para sempre",
    sites=lambda p, c: (
        (BlockKind.SELECT, _loc("patterns/serve.go", 5, "patterns.Serve$1"), 1),
    ),
))

_register(Scenario(
    name="select-choice",
    template="select-choice" + SCENARIO_SUFFIX,
    description="Dois braços prontos; a escolha depende da semente",
    tag="demo",
    seed_independent=False,
    has_fixed=False,
))


def scenario_names() -> List[str]:
    return sorted(SCENARIOS)


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise UnknownScenarioError(name) from None


def build_scenario(name: str, fixed: bool = False, params: Optional[Mapping] = None,
                   conditions: Optional[Mapping[str, bool]] = None,
                   seed: int = 0) -> Tuple[SimProgram, ScenarioExpectation]:
    """Atalho: get_scenario(name).build(...)."""
    return get_scenario(name).build(fixed, params, conditions, seed)


def builtin_scenarios(include_demos: bool = False) -> List[Tuple[SimProgram, ScenarioExpectation]]:
    """
    Todos os cenários de vazamento do catálogo, cada um seguido da variante corrigida.

    Args:
        include_demos: Inclui cenários de demonstração (dependentes da semente)

    Returns:
        Lista de (SimProgram, ScenarioExpectation) em ordem alfabética de nome
    """
    result = []
    for name in scenario_names():
        scenario = SCENARIOS[name]
        if scenario.tag == 'demo' and not include_demos:
            continue
        result.append(scenario.build())
        if scenario.has_fixed:
            result.append(scenario.build(fixed=True))
    return result
