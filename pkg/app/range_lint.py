"""
Linter de range: canais percorridos com `range` que nenhum caminho do programa fecha.

A análise é sintática: basta existir um `close` (ou `cancel`) do canal em qualquer
ponto alcançável a partir da declaração.  Cada declaração segue separadamente os
argumentos de `go`/`call` até os parâmetros das funções chamadas, então uma função
chamada com dois canais não mistura o close de um com o range do outro.
"""
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Dict, List, Set, Tuple

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.models import SourceLoc
from app.program import SimProgram, Close, Cancel, Spawn, Call, RangeOverChan, DECLARING
from app.logger import log_info


Key = Tuple[str, str]   # (função, nome do canal)


@dataclass(frozen=True)
class RangeFinding:
    channel: str           # "<função>.<nome>" do ponto de declaração
    range_site: SourceLoc

    def __str__(self) -> str:
        return f"{self.range_site}: range sobre '{self.channel}', que nunca é fechado"


def _reach(origin: Key, edges: Dict[Key, Set[Key]]) -> Set[Key]:
    seen = {origin}
    queue = deque([origin])
    while queue:
        for nxt in edges.get(queue.popleft(), ()):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def range_lint(program: SimProgram) -> List[RangeFinding]:
    """
    Aponta cada `range` sobre um canal sem nenhum `close` alcançável sintaticamente.

    Args:
        program: Programa já resolvido

    Returns:
        Lista de RangeFinding, ordenada pelo local do range
    """
    edges: Dict[Key, Set[Key]] = defaultdict(set)
    origins: Set[Key] = set()
    closed: Set[Key] = set()
    ranges: List[Tuple[Key, SourceLoc]] = []

    for function, stmt in program.statements():
        if isinstance(stmt, DECLARING):
            origins.add((function.name, stmt.name))
        elif isinstance(stmt, (Spawn, Call)):
            callee = program.functions[stmt.function]
            for arg, param in zip(stmt.args, callee.params):
                edges[(function.name, arg)].add((callee.name, param))
        elif isinstance(stmt, (Close, Cancel)):
            closed.add((function.name, stmt.chan if isinstance(stmt, Close) else stmt.ctx))
        elif isinstance(stmt, RangeOverChan):
            ranges.append(((function.name, stmt.chan), stmt.loc))

    # range → declarações que chegam até ele sem nenhum close no caminho
    unclosed: Dict[Key, List[Key]] = defaultdict(list)
    for origin in sorted(origins):
        bindings = _reach(origin, edges)
        if bindings & closed:
            continue
        for key in bindings:
            unclosed[key].append(origin)

    findings = set()
    for key, loc in ranges:
        for function, name in unclosed.get(key, ()):
            findings.add(RangeFinding(f"{function}.{name}", loc))

    result = sorted(findings, key=lambda f: (f.range_site.file, f.range_site.line, f.channel))
    if result:
        log_info("scenario", f"RANGE_LINT | program={program.name} | findings={len(result)}")
    return result
