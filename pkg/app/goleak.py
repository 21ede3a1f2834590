"""
Verificador de fim de execução: toda tarefa que não terminou quando o programa
ficou quiescente é um vazamento, salvo se a função estiver na lista de supressão.
"""
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Union

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.models import SourceLoc, TaskStatus
from app.program import SimProgram
from app.runtime import BoundExceeded, RunResult, SchedulerConfig, Simulator, Task, run
from app.profile import emit_profile
from app.snapshot import snapshot
from app.logger import log_warning, log_info


@dataclass(frozen=True)
class GoleakFinding:
    task_id: int
    status: TaskStatus
    function: str            # função folha
    location: SourceLoc      # onde a tarefa está parada
    created_by: str          # função que criou a tarefa
    created_at: SourceLoc

    @property
    def code_context(self):
        return self.function, self.location

    @property
    def creation_context(self):
        return self.created_by, self.created_at

    def __str__(self) -> str:
        return (f"goroutine {self.task_id} [{self.status.value}] em {self.function} "
                f"({self.location}), criada por {self.created_by} ({self.created_at})")


@dataclass
class VerifyResult:
    passed: bool
    findings: List[GoleakFinding]
    suppressed: Dict[str, int]
    run: RunResult
    bound_exceeded: bool = False
    stacks: str = ""     # perfil das tarefas remanescentes, para o log

    @property
    def suppressed_count(self) -> int:
        return sum(self.suppressed.values())


def load_name_list(path) -> frozenset:
    """Arquivo com um nome por linha; `#` inicia comentário."""
    names = set()
    for raw in Path(path).read_text(encoding='utf-8').splitlines():
        name = raw.split('#', 1)[0].strip()
        if name:
            names.add(name)
    return frozenset(names)


def _lingering(state: Union[RunResult, Simulator]) -> List[Task]:
    return [task for _, task in sorted(state.tasks.items()) if task.status != TaskStatus.DONE]


def _finding(task: Task) -> GoleakFinding:
    location = task.blocking_site or (task.frames[0] if task.frames else task.creation_site)
    return GoleakFinding(
        task_id=task.id,
        status=task.status,
        function=task.leaf_function,
        location=location,
        created_by=task.creation_site.function,
        created_at=task.creation_site,
    )


def goleak_find(state: Union[RunResult, Simulator], suppression: Iterable[str] = ()) -> List[GoleakFinding]:
    """
    Lista as tarefas remanescentes, em ordem de id.

    Args:
        state: Estado final (quiescente ou após BoundExceeded)
        suppression: Nomes de função cujas tarefas não são reportadas

    Returns:
        Um GoleakFinding por tarefa não concluída e não suprimida
    """
    suppressed = frozenset(suppression)
    return [_finding(t) for t in _lingering(state) if t.leaf_function not in suppressed]


def suppressed_counts(state: Union[RunResult, Simulator], suppression: Iterable[str] = ()) -> Dict[str, int]:
    """Quantas tarefas remanescentes cada função suprimida escondeu."""
    suppressed = frozenset(suppression)
    counts = Counter(t.leaf_function for t in _lingering(state) if t.leaf_function in suppressed)
    return dict(sorted(counts.items()))


def goleak_verify(
    program: SimProgram,
    config: Optional[SchedulerConfig] = None,
    suppression: Iterable[str] = (),
    conditions: Optional[Mapping[str, bool]] = None,
) -> VerifyResult:
    """
    Executa o programa até o fim e falha se sobrar alguma tarefa.

    BoundExceeded não interrompe a verificação: as tarefas do estado parcial
    entram como achados (livelock também é uma tarefa que não terminou).
    """
    suppression = frozenset(suppression)
    bound_exceeded = False
    try:
        result = run(program, config, conditions)
    except BoundExceeded as e:
        result = e.result
        bound_exceeded = True

    findings = goleak_find(result, suppression)
    suppressed = suppressed_counts(result, suppression)
    stacks = emit_profile(snapshot(result, instance_id=program.name)) if findings else ""

    if findings:
        log_warning("analyzer", f"GOLEAK_FAILED | program={program.name} | findings={len(findings)} | "
                                f"suppressed={sum(suppressed.values())}\n{stacks}")
    else:
        log_info("analyzer", f"GOLEAK_PASSED | program={program.name} | suppressed={sum(suppressed.values())}")

    return VerifyResult(
        passed=not findings,
        findings=findings,
        suppressed=suppressed,
        run=result,
        bound_exceeded=bound_exceeded,
        stacks=stacks,
    )
