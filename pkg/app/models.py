"""
Tipos compartilhados entre simulador, perfis e analisadores.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional


@dataclass(frozen=True, order=True)
class SourceLoc:
    """Local no código: renderiza sempre como `file:line`."""
    file: str
    line: int
    function: str = ""

    def __post_init__(self):
        if self.line < 1:
            raise ValueError(f"Linha inválida em {self.file}: {self.line}")

    def __str__(self) -> str:
        return f"{self.file}:{self.line}"

    @classmethod
    def parse(cls, text: str, function: str = "") -> "SourceLoc":
        """Converte `file:line` em SourceLoc (ValueError se malformado)."""
        path, sep, line = text.strip().rpartition(":")
        if not sep or not path or not line.isdigit():
            raise ValueError(f"Local malformado: '{text}'")
        return cls(path, int(line), function)


class TaskStatus(Enum):
    RUNNING = "Running"
    RUNNABLE = "Runnable"
    BLOCKED_SEND = "BlockedSend"
    BLOCKED_RECV = "BlockedRecv"
    BLOCKED_SELECT = "BlockedSelect"
    SLEEPING = "Sleeping"
    IO_WAIT = "IOWait"
    SYSCALL = "Syscall"
    COND_WAIT = "CondWait"
    SEM_ACQUIRE = "SemAcquire"
    DONE = "Done"

    @property
    def is_parked(self) -> bool:
        return self in PARKED_STATUSES


PARKED_STATUSES = frozenset({
    TaskStatus.BLOCKED_SEND,
    TaskStatus.BLOCKED_RECV,
    TaskStatus.BLOCKED_SELECT,
    TaskStatus.SLEEPING,
    TaskStatus.IO_WAIT,
    TaskStatus.SYSCALL,
    TaskStatus.COND_WAIT,
    TaskStatus.SEM_ACQUIRE,
})


class BlockKind(Enum):
    CHAN_SEND = "ChanSend"
    CHAN_RECV = "ChanRecv"
    SELECT = "Select"
    IO_WAIT = "IOWait"
    SYSCALL = "Syscall"
    SLEEP = "Sleep"
    COND_WAIT = "CondWait"
    SEM_ACQUIRE = "SemAcquire"
    RUNNING = "Running"
    OTHER = "Other"

    @classmethod
    def from_value(cls, value: str) -> "BlockKind":
        for kind in cls:
            if kind.value == value:
                return kind
        return cls.OTHER


# Tipos que contam como goroutine estacionada (candidatos do LeakProf)
PARKED_KINDS = frozenset({
    BlockKind.CHAN_SEND,
    BlockKind.CHAN_RECV,
    BlockKind.SELECT,
    BlockKind.IO_WAIT,
    BlockKind.SYSCALL,
    BlockKind.SLEEP,
    BlockKind.COND_WAIT,
    BlockKind.SEM_ACQUIRE,
})

STATUS_TO_KIND = {
    TaskStatus.BLOCKED_SEND: BlockKind.CHAN_SEND,
    TaskStatus.BLOCKED_RECV: BlockKind.CHAN_RECV,
    TaskStatus.BLOCKED_SELECT: BlockKind.SELECT,
    TaskStatus.SLEEPING: BlockKind.SLEEP,
    TaskStatus.IO_WAIT: BlockKind.IO_WAIT,
    TaskStatus.SYSCALL: BlockKind.SYSCALL,
    TaskStatus.COND_WAIT: BlockKind.COND_WAIT,
    TaskStatus.SEM_ACQUIRE: BlockKind.SEM_ACQUIRE,
    TaskStatus.RUNNING: BlockKind.RUNNING,
    TaskStatus.RUNNABLE: BlockKind.RUNNING,
}


@dataclass(frozen=True)
class Frame:
    """Um quadro de pilha: símbolo qualificado + local."""
    symbol: str
    location: SourceLoc

    def is_runtime(self, prefix: str = "runtime.") -> bool:
        return self.symbol.startswith(prefix)


@dataclass(frozen=True)
class BlockSite:
    """Chave de agregação: (tipo de operação, primeiro quadro fora do runtime)."""
    kind: BlockKind
    location: SourceLoc

    @property
    def function(self) -> str:
        return self.location.function

    def sort_key(self) -> tuple:
        return (self.location.file, self.location.line, self.location.function, self.kind.value)

    def __str__(self) -> str:
        return f"{self.kind.value} @ {self.location}"


def kind_for_status(status: TaskStatus) -> Optional[BlockKind]:
    """Tipo de bloqueio equivalente ao status de uma tarefa (None para Done)."""
    return STATUS_TO_KIND.get(status)
