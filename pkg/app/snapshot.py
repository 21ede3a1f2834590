"""
Snapshot do simulador no formato de perfil de goroutines.

Tarefas bloqueadas recebem uma sub-pilha sintética do runtime (quadro de park +
quadros do tipo de operação) acima dos quadros do IR, para que o classificador
trate a saída do simulador exatamente como um perfil externo.
"""
from typing import List, Optional, Union

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import PARK_SYMBOL, SELECT_CASE_PREFIX
from app.models import Frame, SourceLoc, TaskStatus
from app.profile import GoroutineProfile, GoroutineRecord
from app.runtime import Simulator, RunResult, Task, ORIGIN_SYMBOLS


def _rt(symbol: str, file: str, line: int) -> Frame:
    return Frame(symbol, SourceLoc(file, line, symbol))


PARK = _rt(PARK_SYMBOL, "runtime/proc.go", 398)

RUNTIME_FRAMES = {
    'send': (_rt("runtime.chansend", "runtime/chan.go", 259),
             _rt("runtime.chansend1", "runtime/chan.go", 145)),
    'recv': (_rt("runtime.chanrecv", "runtime/chan.go", 583),
             _rt("runtime.chanrecv1", "runtime/chan.go", 442)),
    'range': (_rt("runtime.chanrecv", "runtime/chan.go", 583),
              _rt("runtime.chanrecv2", "runtime/chan.go", 447)),
    'select': (_rt("runtime.selectgo", "runtime/select.go", 327),),
    'block': (_rt("runtime.block", "runtime/select.go", 104),),
    TaskStatus.SLEEPING: (_rt("runtime.timeSleep", "runtime/time.go", 195),),
    TaskStatus.IO_WAIT: (_rt("runtime.netpollblock", "runtime/netpoll.go", 564),),
    TaskStatus.SYSCALL: (_rt("runtime.entersyscallblock", "runtime/proc.go", 4012),),
    TaskStatus.COND_WAIT: (_rt("runtime.notifyListWait", "runtime/sema.go", 569),),
    TaskStatus.SEM_ACQUIRE: (_rt("runtime.semacquire1", "runtime/sema.go", 160),),
}

STATUS_LABELS = {
    TaskStatus.BLOCKED_SEND: "chan send",
    TaskStatus.BLOCKED_RECV: "chan receive",
    TaskStatus.BLOCKED_SELECT: "select",
    TaskStatus.SLEEPING: "sleep",
    TaskStatus.IO_WAIT: "IO wait",
    TaskStatus.SYSCALL: "syscall",
    TaskStatus.COND_WAIT: "sync.Cond.Wait",
    TaskStatus.SEM_ACQUIRE: "semacquire",
    TaskStatus.RUNNING: "running",
    TaskStatus.RUNNABLE: "runnable",
}


def state_label(task: Task) -> str:
    label = STATUS_LABELS[task.status]
    if task.status in (TaskStatus.BLOCKED_SEND, TaskStatus.BLOCKED_RECV) and task.block.get('nil'):
        return f"{label} (nil chan)"
    if task.status == TaskStatus.BLOCKED_SELECT and task.block.get('zero_case'):
        return f"{label} (no cases)"
    return label


def _arm_symbol(direction: str, origin: str) -> str:
    if origin in ORIGIN_SYMBOLS:
        return ORIGIN_SYMBOLS[origin]
    return "runtime.chansend" if direction == 'send' else "runtime.chanrecv"


def runtime_frames(task: Task) -> List[Frame]:
    """Sub-pilha sintética do runtime para o estado da tarefa (vazia se não estacionada)."""
    status = task.status
    if not status.is_parked:
        return []
    frames = [PARK]
    if status == TaskStatus.BLOCKED_SEND:
        frames.extend(RUNTIME_FRAMES['send'])
    elif status == TaskStatus.BLOCKED_RECV:
        frames.extend(RUNTIME_FRAMES['range' if task.block.get('range') else 'recv'])
    elif status == TaskStatus.BLOCKED_SELECT:
        if task.block.get('zero_case'):
            frames.extend(RUNTIME_FRAMES['block'])
        else:
            frames.extend(RUNTIME_FRAMES['select'])
            for direction, origin, site in task.block.get('arms', []):
                symbol = f"{SELECT_CASE_PREFIX}{_arm_symbol(direction, origin)})"
                loc = site or task.blocking_site
                frames.append(Frame(symbol, SourceLoc(loc.file, loc.line, symbol)))
    else:
        frames.extend(RUNTIME_FRAMES[status])
    return frames


def task_record(task: Task) -> GoroutineRecord:
    ir_locs = task.frames or [task.creation_site]
    frames = runtime_frames(task) + [Frame(loc.function, loc) for loc in ir_locs]
    created_by: Optional[Frame] = None
    if task.parent_function:
        created_by = Frame(task.creation_site.function, task.creation_site)
    return GoroutineRecord(task.id, state_label(task), tuple(frames), created_by)


def snapshot(state: Union[Simulator, RunResult], instance_id: str = "",
             captured_at: str = "") -> GoroutineProfile:
    """
    Perfil instantâneo de todas as tarefas vivas.

    Args:
        state: Simulador (inclusive no meio da execução) ou resultado de run()
        instance_id: Identificador da instância no cabeçalho do perfil
        captured_at: Timestamp do cabeçalho (opcional)

    Returns:
        GoroutineProfile com um registro por tarefa não concluída, em ordem de id
    """
    records = [task_record(task) for task_id, task in sorted(state.tasks.items())
               if task.status != TaskStatus.DONE]
    return GoroutineProfile(instance_id, captured_at, records)
