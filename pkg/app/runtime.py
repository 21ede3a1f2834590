"""
Simulador determinístico de tarefas e canais (modelo cooperativo, tempo lógico).

Reproduz a semântica de bloqueio de canais que os vazamentos dependem:
rendezvous em canais sem buffer, FIFO em canais com buffer, close acordando
todos os receptores, select com escolha sorteada (semente) entre braços prontos
e canais nil que bloqueiam para sempre.
"""
import heapq
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Mapping, Optional, Sequence, Tuple

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import DEFAULT_SEED, MAX_STEPS, TIME_LIMIT
from app.models import SourceLoc, TaskStatus
from app.program import (
    SimProgram, FunctionDef, Stmt, MakeChan, Send, Recv, Select, Close, Spawn, Call,
    RangeOverChan, If, ForLoop, Return, Sleep, Wait, Release, After, Ticker, Context,
    Cancel, CtxDone,
)
from app.logger import log_run_finished


# Origem do canal → símbolo de espera usado nos braços de select do snapshot
ORIGIN_SYMBOLS = {
    'timer': 'time.After',
    'ticker': 'time.Tick',
    'context': 'context.Done',
}

WAIT_STATUSES = {
    'iowait': TaskStatus.IO_WAIT,
    'syscall': TaskStatus.SYSCALL,
    'condwait': TaskStatus.COND_WAIT,
    'semacquire': TaskStatus.SEM_ACQUIRE,
}


class BoundExceeded(RuntimeError):
    """max_steps estourado com tarefas ainda executáveis (livelock, não vazamento quiescente)"""

    def __init__(self, result: "RunResult"):
        runnable = sum(1 for t in result.tasks.values()
                       if t.status in (TaskStatus.RUNNABLE, TaskStatus.RUNNING))
        super().__init__(
            f"max_steps={result.steps} excedido em '{result.program}' com {runnable} tarefa(s) executável(is)")
        self.result = result


# ═══════════════════════════════════════════════════════════════════════════════
# ESTADO
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass
class SchedulerConfig:
    seed: int = DEFAULT_SEED
    max_steps: int = MAX_STEPS
    model_time: int = 0            # relógio lógico inicial
    time_limit: int = TIME_LIMIT   # timers além do horizonte nunca disparam
    shuffle_runnable: bool = False

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps deve ser positivo")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed deve ser inteiro sem sinal de 64 bits")


@dataclass
class SelectWait:
    task_id: int
    fired: bool = False


@dataclass
class Waiter:
    task_id: int
    value: int = 0
    select: Optional[SelectWait] = None
    arm: int = -1


@dataclass
class ChannelState:
    id: int
    capacity: int = 0
    name: str = ""
    is_nil: bool = False
    closed: bool = False
    origin: str = "chan"
    created_at: Optional[SourceLoc] = None
    buffer: Deque[int] = field(default_factory=deque)
    sendq: Deque[Waiter] = field(default_factory=deque)
    recvq: Deque[Waiter] = field(default_factory=deque)
    sent: int = 0       # valores que entraram no canal (buffer ou entrega direta)
    received: int = 0
    offered: int = 0    # valores comprometidos: entregues, no buffer ou com o remetente parado
    dropped: int = 0    # remetentes parados que entraram em pânico no close

    @property
    def label(self) -> str:
        return f"{self.name or 'chan'}#{self.id}"


@dataclass(frozen=True)
class StepOutcome:
    kind: str                 # completed | blocked | panic | default
    value: int = 0
    ok: bool = True
    arm: Optional[int] = None
    message: str = ""

    @property
    def completed(self) -> bool:
        return self.kind == 'completed'


COMPLETED = StepOutcome('completed')
BLOCKED = StepOutcome('blocked')


@dataclass(frozen=True)
class ArmSpec:
    direction: str    # 'send' | 'recv'
    chan: int
    value: int = 0
    site: Optional[SourceLoc] = None


@dataclass
class Cursor:
    stmts: Tuple[Stmt, ...]
    pc: int = 0
    loops: Dict[int, int] = field(default_factory=dict)   # pc do `for` → iterações restantes (-1 = infinito)


@dataclass
class Activation:
    function: FunctionDef
    env: Dict[str, int]
    cursors: List[Cursor]
    call_site: Optional[SourceLoc] = None


@dataclass
class Task:
    id: int
    status: TaskStatus
    creation_site: SourceLoc
    parent_function: str = ""
    blocking_site: Optional[SourceLoc] = None
    activations: List[Activation] = field(default_factory=list)
    resume: Optional[StepOutcome] = None
    panic: Optional[str] = None
    block: Dict[str, object] = field(default_factory=dict)

    @property
    def frames(self) -> List[SourceLoc]:
        """Pilha de chamadas (mais interna primeiro)."""
        if not self.activations:
            return [self.blocking_site] if self.blocking_site else []
        locs: List[SourceLoc] = []
        innermost = self.activations[-1]
        locs.append(_current_loc(innermost))
        for depth in range(len(self.activations) - 2, -1, -1):
            call_site = self.activations[depth + 1].call_site
            locs.append(call_site or self.activations[depth].function.loc)
        return locs

    @property
    def leaf_function(self) -> str:
        frames = self.frames
        return frames[0].function if frames else self.creation_site.function


def _current_loc(act: Activation) -> SourceLoc:
    for cursor in reversed(act.cursors):
        if cursor.pc < len(cursor.stmts):
            return cursor.stmts[cursor.pc].loc
    return act.function.loc


@dataclass
class RunResult:
    program: str
    trace: List[str]
    tasks: Dict[int, Task]
    channels: Dict[int, ChannelState]
    steps: int
    clock: int
    quiescent: bool

    def trace_text(self) -> str:
        return "".join(line + "\n" for line in self.trace)

    def leaked(self) -> List[Task]:
        return [t for t in self.tasks.values() if t.status != TaskStatus.DONE]

    def task_table(self) -> str:
        """Tabela final de tarefas (texto estável, uma por linha)."""
        lines = []
        for task in self.tasks.values():
            site = str(task.blocking_site) if task.blocking_site else "-"
            panic = f" panic={task.panic}" if task.panic else ""
            lines.append(f"task={task.id} status={task.status.value} site={site} "
                         f"created={task.creation_site}{panic}")
        return "".join(line + "\n" for line in lines)


# ═══════════════════════════════════════════════════════════════════════════════
# SIMULADOR
# ═══════════════════════════════════════════════════════════════════════════════

class Simulator:
    """Máquina de estados sequencial; uma instância não compartilha nada com outra."""

    def __init__(self, program: Optional[SimProgram] = None,
                 config: Optional[SchedulerConfig] = None,
                 conditions: Optional[Mapping[str, bool]] = None):
        self.program = program
        self.config = config or SchedulerConfig()
        self.conditions = dict(conditions or {})
        self.rng = random.Random(self.config.seed)
        self.clock = self.config.model_time
        self.steps = 0
        self.trace: List[str] = []
        self.channels: Dict[int, ChannelState] = {}
        self.tasks: Dict[int, Task] = {}
        self.run_queue: Deque[int] = deque()
        self.timers: List[tuple] = []
        self.token_waiters: Dict[str, List[int]] = {}
        self._timer_seq = 0
        self._next_task = 1
        self._next_chan = 1
        self._started = False

    # --- trace ---

    def _emit(self, task_id: int, op: str, site: Optional[SourceLoc], detail: str = ""):
        self.trace.append(f"step={self.steps} task={task_id} op={op} site={site or '-'} detail={detail}")

    # --- tarefas ---

    def start_task(self, creation_site: SourceLoc, function: Optional[FunctionDef] = None,
                   env: Optional[Dict[str, int]] = None, parent_function: str = "") -> int:
        """Cria uma tarefa executável (sem pai quando chamada diretamente)."""
        task_id = self._next_task
        self._next_task += 1
        task = Task(task_id, TaskStatus.RUNNABLE, creation_site, parent_function)
        if function is not None:
            task.activations.append(Activation(function, dict(env or {}), [Cursor(function.body)]))
        self.tasks[task_id] = task
        self.run_queue.append(task_id)
        return task_id

    def _require_running(self, task_id: int) -> Task:
        task = self.tasks[task_id]
        if task.status in (TaskStatus.RUNNABLE, TaskStatus.RUNNING):
            task.status = TaskStatus.RUNNING
            return task
        raise ValueError(f"tarefa {task_id} não está executando ({task.status.value})")

    def _block(self, task: Task, status: TaskStatus, site: Optional[SourceLoc], **detail):
        task.status = status
        task.blocking_site = site or (task.frames[0] if task.frames else task.creation_site)
        task.block = detail

    def _wake(self, task_id: int, outcome: StepOutcome):
        task = self.tasks[task_id]
        if task.status == TaskStatus.DONE:
            return
        task.status = TaskStatus.RUNNABLE
        task.blocking_site = None
        task.block = {}
        task.resume = outcome
        self.run_queue.append(task_id)

    def _panic(self, task: Task, site: Optional[SourceLoc], message: str) -> StepOutcome:
        task.status = TaskStatus.DONE
        task.panic = message
        task.blocking_site = None
        task.block = {}
        task.activations.clear()
        self._emit(task.id, 'panic', site, message.replace(' ', '_'))
        return StepOutcome('panic', message=message)

    # --- canais ---

    def make_channel(self, capacity: int = 0, name: str = "", is_nil: bool = False,
                     origin: str = "chan", site: Optional[SourceLoc] = None) -> int:
        if capacity < 0:
            raise ValueError("capacidade não pode ser negativa")
        chan_id = self._next_chan
        self._next_chan += 1
        self.channels[chan_id] = ChannelState(
            chan_id, 0 if is_nil else capacity, name, is_nil, origin=origin, created_at=site)
        return chan_id

    def _live(self, queue: Deque[Waiter]) -> Optional[Waiter]:
        while queue:
            waiter = queue[0]
            stale = (waiter.select is not None and waiter.select.fired) \
                or self.tasks[waiter.task_id].status == TaskStatus.DONE
            if not stale:
                return waiter
            queue.popleft()
        return None

    def _pop_live(self, queue: Deque[Waiter]) -> Optional[Waiter]:
        waiter = self._live(queue)
        if waiter is not None:
            queue.popleft()
        return waiter

    def _finish_waiter(self, waiter: Waiter, value: int = 0, ok: bool = True):
        arm = None
        if waiter.select is not None:
            waiter.select.fired = True
            arm = waiter.arm
        self._wake(waiter.task_id, StepOutcome('completed', value, ok, arm))

    def send(self, task_id: int, chan_id: int, value: int = 0,
             site: Optional[SourceLoc] = None) -> StepOutcome:
        task = self._require_running(task_id)
        ch = self.channels[chan_id]
        if ch.is_nil:
            self._block(task, TaskStatus.BLOCKED_SEND, site, chan=chan_id, nil=True)
            return BLOCKED
        if ch.closed:
            return self._panic(task, site, "send on closed channel")
        ch.offered += 1
        receiver = self._pop_live(ch.recvq)
        if receiver is not None:
            ch.sent += 1
            ch.received += 1
            self._finish_waiter(receiver, value, True)
            return COMPLETED
        if len(ch.buffer) < ch.capacity:
            ch.buffer.append(value)
            ch.sent += 1
            return COMPLETED
        ch.sendq.append(Waiter(task_id, value))
        self._block(task, TaskStatus.BLOCKED_SEND, site, chan=chan_id)
        return BLOCKED

    def recv(self, task_id: int, chan_id: int, site: Optional[SourceLoc] = None,
             via_range: bool = False) -> StepOutcome:
        task = self._require_running(task_id)
        ch = self.channels[chan_id]
        if ch.is_nil:
            self._block(task, TaskStatus.BLOCKED_RECV, site, chan=chan_id, nil=True, range=via_range)
            return BLOCKED
        taken = self._take(ch)
        if taken is not None:
            return taken
        ch.recvq.append(Waiter(task_id))
        self._block(task, TaskStatus.BLOCKED_RECV, site, chan=chan_id, range=via_range,
                    origin=ch.origin)
        return BLOCKED

    def _take(self, ch: ChannelState) -> Optional[StepOutcome]:
        """Recepção sem bloqueio: buffer, remetente parado ou canal fechado."""
        if ch.buffer:
            value = ch.buffer.popleft()
            ch.received += 1
            sender = self._pop_live(ch.sendq)
            if sender is not None:
                if sender.select is not None:
                    ch.offered += 1
                ch.buffer.append(sender.value)
                ch.sent += 1
                self._finish_waiter(sender)
            return StepOutcome('completed', value, True)
        sender = self._pop_live(ch.sendq)
        if sender is not None:
            if sender.select is not None:
                ch.offered += 1
            ch.sent += 1
            ch.received += 1
            self._finish_waiter(sender)
            return StepOutcome('completed', sender.value, True)
        if ch.closed:
            return StepOutcome('completed', 0, False)
        return None

    def close(self, task_id: int, chan_id: int, site: Optional[SourceLoc] = None) -> StepOutcome:
        task = self._require_running(task_id)
        ch = self.channels[chan_id]
        if ch.is_nil:
            return self._panic(task, site, "close of nil channel")
        if ch.closed:
            return self._panic(task, site, "close of closed channel")
        self._close_channel(ch)
        return COMPLETED

    def _close_channel(self, ch: ChannelState):
        ch.closed = True
        while True:
            receiver = self._pop_live(ch.recvq)
            if receiver is None:
                break
            self._finish_waiter(receiver, 0, False)
        while True:
            sender = self._pop_live(ch.sendq)
            if sender is None:
                break
            if sender.select is not None:
                sender.select.fired = True
            else:
                ch.dropped += 1
            blocked = self.tasks[sender.task_id]
            self._panic(blocked, blocked.blocking_site, "send on closed channel")

    def _arm_ready(self, arm: ArmSpec) -> bool:
        ch = self.channels[arm.chan]
        if ch.is_nil:
            return False
        if arm.direction == 'send':
            return ch.closed or self._live(ch.recvq) is not None or len(ch.buffer) < ch.capacity
        return bool(ch.buffer) or self._live(ch.sendq) is not None or ch.closed

    def select(self, task_id: int, arms: Sequence[ArmSpec], has_default: bool = False,
               site: Optional[SourceLoc] = None) -> StepOutcome:
        task = self._require_running(task_id)
        if len(arms) == 1 and not has_default:
            # select de um braço só vira send/recv simples
            arm = arms[0]
            if arm.direction == 'send':
                outcome = self.send(task_id, arm.chan, arm.value, site)
            else:
                outcome = self.recv(task_id, arm.chan, site)
            return StepOutcome(outcome.kind, outcome.value, outcome.ok, 0, outcome.message) \
                if outcome.completed else outcome

        ready = [i for i, arm in enumerate(arms) if self._arm_ready(arm)]
        if ready:
            chosen = ready[0] if len(ready) == 1 else ready[self.rng.randrange(len(ready))]
            arm = arms[chosen]
            if arm.direction == 'send':
                outcome = self.send(task_id, arm.chan, arm.value, site)
            else:
                outcome = self.recv(task_id, arm.chan, site)
            if outcome.kind == 'panic':
                return outcome
            return StepOutcome('completed', outcome.value, outcome.ok, chosen)

        if has_default:
            return StepOutcome('default')

        if not arms:
            self._block(task, TaskStatus.BLOCKED_SELECT, site, arms=[], zero_case=True)
            return BLOCKED

        group = SelectWait(task_id)
        arm_info = []
        for index, arm in enumerate(arms):
            ch = self.channels[arm.chan]
            arm_info.append((arm.direction, ch.origin, arm.site))
            if ch.is_nil:
                continue
            queue = ch.sendq if arm.direction == 'send' else ch.recvq
            queue.append(Waiter(task_id, arm.value, group, index))
        self._block(task, TaskStatus.BLOCKED_SELECT, site, arms=arm_info, zero_case=False)
        return BLOCKED

    # --- tarefas e tempo ---

    def spawn(self, parent_id: int, function: FunctionDef, args: Sequence[int] = (),
              site: Optional[SourceLoc] = None) -> int:
        parent = self._require_running(parent_id)
        if len(args) != len(function.params):
            raise ValueError(f"'{function.name}' espera {len(function.params)} argumento(s)")
        env = dict(zip(function.params, args))
        creation = site or parent.creation_site
        child = self.start_task(creation, function, env, parent_function=creation.function)
        self._emit(parent_id, 'spawn', site, f"child={child},fn={function.name}")
        return child

    def _schedule(self, at: int, kind: str, payload):
        heapq.heappush(self.timers, (at, self._timer_seq, kind, payload))
        self._timer_seq += 1

    def sleep(self, task_id: int, ticks: int, site: Optional[SourceLoc] = None) -> StepOutcome:
        task = self._require_running(task_id)
        if ticks <= 0:
            return COMPLETED
        self._block(task, TaskStatus.SLEEPING, site, until=self.clock + ticks)
        self._schedule(self.clock + ticks, 'wake', task_id)
        return BLOCKED

    def wait(self, task_id: int, mode: str, token: Optional[str] = None,
             ticks: Optional[int] = None, site: Optional[SourceLoc] = None) -> StepOutcome:
        """iowait/syscall/condwait/semacquire: acorda por ticks ou por release(token)."""
        task = self._require_running(task_id)
        status = WAIT_STATUSES[mode]
        if ticks is not None:
            if ticks <= 0:
                return COMPLETED
            self._block(task, status, site, until=self.clock + ticks)
            self._schedule(self.clock + ticks, 'wake', task_id)
        else:
            self._block(task, status, site, token=token)
            self.token_waiters.setdefault(token, []).append(task_id)
        return BLOCKED

    def io_wait(self, task_id, token=None, ticks=None, site=None) -> StepOutcome:
        return self.wait(task_id, 'iowait', token, ticks, site)

    def syscall(self, task_id, token=None, ticks=None, site=None) -> StepOutcome:
        return self.wait(task_id, 'syscall', token, ticks, site)

    def cond_wait(self, task_id, token=None, ticks=None, site=None) -> StepOutcome:
        return self.wait(task_id, 'condwait', token, ticks, site)

    def sem_acquire(self, task_id, token=None, ticks=None, site=None) -> StepOutcome:
        return self.wait(task_id, 'semacquire', token, ticks, site)

    def release(self, token: str) -> int:
        waiting = self.token_waiters.pop(token, [])
        for task_id in waiting:
            self._wake(task_id, COMPLETED)
        return len(waiting)

    def after(self, ticks: int, site: Optional[SourceLoc] = None, name: str = "") -> int:
        """Canal de capacidade 1 que recebe um valor no tick now+ticks."""
        chan_id = self.make_channel(1, name, origin='timer', site=site)
        self._schedule(self.clock + ticks, 'fire', (chan_id, 0))
        return chan_id

    def ticker(self, period: int, site: Optional[SourceLoc] = None, name: str = "") -> int:
        chan_id = self.make_channel(1, name, origin='ticker', site=site)
        self._schedule(self.clock + period, 'fire', (chan_id, period))
        return chan_id

    def context(self, cancel_at: Optional[int] = None, site: Optional[SourceLoc] = None,
                name: str = "") -> int:
        chan_id = self.make_channel(0, name, origin='context', site=site)
        if cancel_at is not None:
            self._schedule(max(cancel_at, self.clock), 'cancel', chan_id)
        return chan_id

    def cancel(self, chan_id: int):
        ch = self.channels[chan_id]
        if not ch.closed and not ch.is_nil:
            self._close_channel(ch)

    def _fire(self, chan_id: int):
        ch = self.channels[chan_id]
        if ch.closed:
            return
        receiver = self._pop_live(ch.recvq)
        if receiver is not None:
            ch.sent += 1
            ch.received += 1
            self._finish_waiter(receiver, self.clock, True)
        elif len(ch.buffer) < ch.capacity:
            ch.buffer.append(self.clock)
            ch.sent += 1
        else:
            return
        ch.offered += 1

    def _advance_clock(self) -> bool:
        """Avança o relógio até o próximo timer dentro do horizonte; False se não há."""
        if not self.timers or self.timers[0][0] > self.config.time_limit:
            return False
        now = max(self.clock, self.timers[0][0])
        self.clock = now
        while self.timers and self.timers[0][0] == now:
            _, _, kind, payload = heapq.heappop(self.timers)
            if kind == 'wake':
                self._wake(payload, COMPLETED)
            elif kind == 'fire':
                chan_id, period = payload
                self._fire(chan_id)
                if period:
                    self._schedule(now + period, 'fire', (chan_id, period))
            elif kind == 'cancel':
                self.cancel(payload)
        return True

    # --- interpretador ---

    def _next_runnable(self) -> Optional[int]:
        live = [t for t in self.run_queue if self.tasks[t].status == TaskStatus.RUNNABLE]
        if not live:
            self.run_queue.clear()
            return None
        if self.config.shuffle_runnable:
            task_id = live[self.rng.randrange(len(live))]
        else:
            task_id = live[0]
        self.run_queue = deque(t for t in live if t != task_id)
        return task_id

    def _current(self, task: Task) -> Optional[Tuple[Activation, Cursor, Stmt]]:
        while task.activations:
            act = task.activations[-1]
            if not act.cursors:
                self._return(task, act.function.loc, implicit=True)
                continue
            cursor = act.cursors[-1]
            if cursor.pc < len(cursor.stmts):
                return act, cursor, cursor.stmts[cursor.pc]
            act.cursors.pop()
        return None

    def _return(self, task: Task, site: SourceLoc, implicit: bool = False):
        task.activations.pop()
        if not task.activations:
            task.status = TaskStatus.DONE
            task.blocking_site = None
            self._emit(task.id, 'return', site, "implicit" if implicit else "")

    def _chan(self, act: Activation, name: str) -> int:
        return act.env[name]

    def _arms(self, act: Activation, stmt: Select) -> List[ArmSpec]:
        return [ArmSpec(arm.direction, act.env[arm.chan], arm.value, arm.loc) for arm in stmt.arms]

    def step(self, task_id: int):
        """Executa uma instrução da tarefa (um passo do escalonador)."""
        task = self.tasks[task_id]
        task.status = TaskStatus.RUNNING
        self.steps += 1

        current = self._current(task)
        if current is None:
            if task.status != TaskStatus.DONE:
                task.status = TaskStatus.DONE
                self._emit(task.id, 'return', task.blocking_site or task.creation_site, "")
            return
        act, cursor, stmt = current

        if task.resume is not None:
            outcome, task.resume = task.resume, None
            self._complete(task, act, cursor, stmt, outcome)
        else:
            self._execute(task, act, cursor, stmt)

        if task.status == TaskStatus.RUNNING:
            task.status = TaskStatus.RUNNABLE
            self.run_queue.append(task.id)

    def _complete(self, task: Task, act: Activation, cursor: Cursor, stmt: Stmt, outcome: StepOutcome):
        """Conclui a instrução que bloqueou, com o resultado entregue por quem acordou a tarefa."""
        op = _op_name(stmt)
        self._emit(task.id, op, stmt.loc, f"resumed,value={outcome.value},ok={str(outcome.ok).lower()}")
        if isinstance(stmt, RangeOverChan):
            if outcome.ok:
                act.cursors.append(Cursor(stmt.body))
            else:
                cursor.pc += 1
            return
        cursor.pc += 1
        if isinstance(stmt, Select):
            arm = stmt.arms[outcome.arm or 0]
            if arm.body:
                act.cursors.append(Cursor(arm.body))

    def _execute(self, task: Task, act: Activation, cursor: Cursor, stmt: Stmt):
        loc = stmt.loc

        if isinstance(stmt, MakeChan):
            act.env[stmt.name] = self.make_channel(stmt.capacity, stmt.name, stmt.is_nil, site=loc)
            cursor.pc += 1

        elif isinstance(stmt, Send):
            ch = self.channels[act.env[stmt.chan]]
            outcome = self.send(task.id, ch.id, stmt.value, loc)
            self._after_channel_op(task, cursor, 'send', loc, ch, outcome)

        elif isinstance(stmt, (Recv, CtxDone)):
            ch = self.channels[act.env[stmt.chan if isinstance(stmt, Recv) else stmt.ctx]]
            outcome = self.recv(task.id, ch.id, loc)
            self._after_channel_op(task, cursor, 'recv', loc, ch, outcome)

        elif isinstance(stmt, RangeOverChan):
            ch = self.channels[act.env[stmt.chan]]
            outcome = self.recv(task.id, ch.id, loc, via_range=True)
            self._emit(task.id, 'recv', loc, f"ch={ch.label},range,{_describe(outcome)}")
            if outcome.completed:
                if outcome.ok:
                    act.cursors.append(Cursor(stmt.body))
                else:
                    cursor.pc += 1

        elif isinstance(stmt, Select):
            outcome = self.select(task.id, self._arms(act, stmt), stmt.default is not None, loc)
            self._emit(task.id, 'select', loc, f"arms={len(stmt.arms)},{_describe(outcome)}")
            if outcome.kind == 'completed':
                cursor.pc += 1
                body = stmt.arms[outcome.arm or 0].body
                if body:
                    act.cursors.append(Cursor(body))
            elif outcome.kind == 'default':
                cursor.pc += 1
                if stmt.default:
                    act.cursors.append(Cursor(stmt.default))

        elif isinstance(stmt, (Close, Cancel)):
            name = stmt.chan if isinstance(stmt, Close) else stmt.ctx
            ch = self.channels[act.env[name]]
            if isinstance(stmt, Cancel):
                self.cancel(ch.id)
                outcome = COMPLETED
            else:
                outcome = self.close(task.id, ch.id, loc)
            if outcome.completed:
                self._emit(task.id, 'close', loc, f"ch={ch.label}")
                cursor.pc += 1

        elif isinstance(stmt, Spawn):
            function = self.program.functions[stmt.function]
            self.spawn(task.id, function, [act.env[a] for a in stmt.args], loc)
            cursor.pc += 1

        elif isinstance(stmt, Call):
            function = self.program.functions[stmt.function]
            cursor.pc += 1
            env = dict(zip(function.params, (act.env[a] for a in stmt.args)))
            task.activations.append(Activation(function, env, [Cursor(function.body)], call_site=loc))

        elif isinstance(stmt, If):
            taken = bool(self.conditions.get(stmt.token, False))
            cursor.pc += 1
            branch = stmt.then if taken else stmt.orelse
            if branch:
                act.cursors.append(Cursor(branch))

        elif isinstance(stmt, ForLoop):
            remaining = cursor.loops.get(cursor.pc)
            if remaining is None:
                remaining = -1 if stmt.count is None else stmt.count
            if remaining == 0:
                cursor.loops.pop(cursor.pc, None)
                cursor.pc += 1
            else:
                cursor.loops[cursor.pc] = remaining - 1 if remaining > 0 else -1
                act.cursors.append(Cursor(stmt.body))

        elif isinstance(stmt, Return):
            self._return(task, loc)

        elif isinstance(stmt, Sleep):
            outcome = self.sleep(task.id, stmt.ticks, loc)
            self._emit(task.id, 'sleep', loc, f"ticks={stmt.ticks}")
            if outcome.completed:
                cursor.pc += 1

        elif isinstance(stmt, Wait):
            outcome = self.wait(task.id, stmt.mode, stmt.token, stmt.ticks, loc)
            self._emit(task.id, 'sleep', loc, f"wait={stmt.mode},token={stmt.token or stmt.ticks}")
            if outcome.completed:
                cursor.pc += 1

        elif isinstance(stmt, Release):
            self.release(stmt.token)
            cursor.pc += 1

        elif isinstance(stmt, After):
            act.env[stmt.name] = self.after(stmt.ticks, loc, stmt.name)
            cursor.pc += 1

        elif isinstance(stmt, Ticker):
            act.env[stmt.name] = self.ticker(stmt.period, loc, stmt.name)
            cursor.pc += 1

        elif isinstance(stmt, Context):
            act.env[stmt.name] = self.context(stmt.cancel_at, loc, stmt.name)
            cursor.pc += 1

        else:
            raise TypeError(f"instrução não suportada: {type(stmt).__name__}")

    def _after_channel_op(self, task: Task, cursor: Cursor, op: str, loc: SourceLoc,
                          ch: ChannelState, outcome: StepOutcome):
        if outcome.kind == 'panic':
            return
        self._emit(task.id, op, loc, f"ch={ch.label},{_describe(outcome)}")
        if outcome.completed:
            cursor.pc += 1

    # --- execução completa ---

    def run(self) -> RunResult:
        """
        Executa até quiescência (nenhuma tarefa executável e nenhum timer no horizonte).

        Raises:
            BoundExceeded: max_steps atingido com tarefas ainda executáveis
        """
        if self.program is not None and not self._started:
            self._started = True
            entry = self.program.entry_function
            self.start_task(entry.loc, entry)

        while True:
            task_id = self._next_runnable()
            if task_id is None:
                if self._advance_clock():
                    continue
                break
            if self.steps >= self.config.max_steps:
                self.run_queue.appendleft(task_id)
                result = self.result(quiescent=False)
                log_run_finished(result.program, result.steps, result.clock, len(result.leaked()),
                                 bound_exceeded=True)
                raise BoundExceeded(result)
            self.step(task_id)

        result = self.result(quiescent=True)
        log_run_finished(result.program, result.steps, result.clock, len(result.leaked()))
        return result

    def result(self, quiescent: bool = True) -> RunResult:
        return RunResult(
            program=self.program.name if self.program else "",
            trace=list(self.trace),
            tasks=self.tasks,
            channels=self.channels,
            steps=self.steps,
            clock=self.clock,
            quiescent=quiescent,
        )


def _describe(outcome: StepOutcome) -> str:
    if outcome.kind == 'completed':
        arm = f",arm={outcome.arm}" if outcome.arm is not None else ""
        return f"completed,value={outcome.value},ok={str(outcome.ok).lower()}{arm}"
    return outcome.kind


def _op_name(stmt: Stmt) -> str:
    if isinstance(stmt, Send):
        return 'send'
    if isinstance(stmt, (Recv, CtxDone, RangeOverChan)):
        return 'recv'
    if isinstance(stmt, Select):
        return 'select'
    # Sleep e esperas (iowait, syscall, condwait, semacquire) saem como sleep
    return 'sleep'


def run(program: SimProgram, config: Optional[SchedulerConfig] = None,
        conditions: Optional[Mapping[str, bool]] = None) -> RunResult:
    """Executa um programa do começo à quiescência (ver Simulator.run)."""
    return Simulator(program, config, conditions).run()
