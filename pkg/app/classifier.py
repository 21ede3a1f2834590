"""
Classificador de pilhas: goroutine → (tipo de bloqueio, local de bloqueio).

Goroutines bloqueadas têm `runtime.gopark` no topo; os quadros do runtime logo
abaixo dizem se é send, receive ou select.  O local é o primeiro quadro fora
do namespace `runtime.`.
"""
from collections import Counter
from typing import Dict, FrozenSet, Iterable, Mapping, Optional

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import (
    PARK_SYMBOL, RUNTIME_PREFIX, SEND_SIGNATURE, RECV_SIGNATURE, SELECT_SIGNATURE,
    LABEL_KINDS, RUNNING_LABELS, SELECT_CASE_PREFIX,
)
from app.models import BlockKind, BlockSite, Frame
from app.profile import GoroutineProfile, GoroutineRecord


class ClassificationError(ValueError):
    """Pilha malformada (park sem nenhum chamador fora do runtime)"""
    pass


# Linhas da tabela de tipos de bloqueio, na ordem de exibição
CATEGORIES = (
    "chan receive (non-nil chan)",
    "chan receive (nil chan)",
    "chan send (non-nil chan)",
    "chan send (nil chan)",
    "select (>0 cases)",
    "select (0 cases)",
    "IO wait",
    "System call",
    "Sleep",
    "Running/Runnable",
    "Condition Wait",
    "Semaphore Acquire",
)
OTHER_CATEGORY = "Other"

_KIND_CATEGORIES = {
    BlockKind.IO_WAIT: "IO wait",
    BlockKind.SYSCALL: "System call",
    BlockKind.SLEEP: "Sleep",
    BlockKind.RUNNING: "Running/Runnable",
    BlockKind.COND_WAIT: "Condition Wait",
    BlockKind.SEM_ACQUIRE: "Semaphore Acquire",
}


def _first_user_frame(frames: Iterable[Frame], prefix: str) -> Optional[Frame]:
    for frame in frames:
        if not frame.is_runtime(prefix):
            return frame
    return None


def classify(
    record: GoroutineRecord,
    send_signature: FrozenSet[str] = SEND_SIGNATURE,
    recv_signature: FrozenSet[str] = RECV_SIGNATURE,
    select_signature: FrozenSet[str] = SELECT_SIGNATURE,
    label_kinds: Mapping[str, str] = LABEL_KINDS,
) -> BlockSite:
    """
    Classifica um registro de goroutine.

    Args:
        record: Registro com pelo menos um quadro
        send_signature / recv_signature / select_signature: Símbolos do runtime de cada operação
        label_kinds: Rótulo de estado → tipo, para goroutines estacionadas fora de canais

    Returns:
        BlockSite (tipo + primeiro local fora do runtime)

    Raises:
        ClassificationError: pilha vazia, ou park sem chamador fora do runtime
    """
    if not record.frames:
        raise ClassificationError(f"goroutine {record.id} sem quadros")

    top = record.frames[0]
    label = record.label_base

    if top.symbol != PARK_SYMBOL:
        kind = BlockKind.RUNNING if label in RUNNING_LABELS else BlockKind.OTHER
        caller = _first_user_frame(record.frames, RUNTIME_PREFIX) or top
        return BlockSite(kind, caller.location)

    caller = _first_user_frame(record.frames[1:], RUNTIME_PREFIX)
    if caller is None:
        raise ClassificationError(
            f"goroutine {record.id}: {PARK_SYMBOL} sem chamador fora do runtime")

    beneath = set()
    for frame in record.frames[1:]:
        if not frame.is_runtime(RUNTIME_PREFIX):
            break
        beneath.add(frame.symbol)

    if beneath & send_signature:
        kind = BlockKind.CHAN_SEND
    elif beneath & recv_signature:
        kind = BlockKind.CHAN_RECV
    elif beneath & select_signature:
        kind = BlockKind.SELECT
    else:
        kind = BlockKind.from_value(label_kinds.get(label, BlockKind.OTHER.value))
    return BlockSite(kind, caller.location)


def select_arm_symbols(record: GoroutineRecord) -> list:
    """Símbolos dos braços `runtime.selectcase(<símbolo>)` abaixo do park."""
    symbols = []
    for frame in record.frames[1:]:
        if not frame.is_runtime(RUNTIME_PREFIX):
            break
        if frame.symbol.startswith(SELECT_CASE_PREFIX) and frame.symbol.endswith(")"):
            symbols.append(frame.symbol[len(SELECT_CASE_PREFIX):-1])
    return symbols


def category(record: GoroutineRecord, site: Optional[BlockSite] = None) -> str:
    """Linha da tabela de tipos de bloqueio para o registro."""
    site = site or classify(record)
    state = record.state_label
    if site.kind == BlockKind.CHAN_RECV:
        return CATEGORIES[1] if "(nil chan)" in state else CATEGORIES[0]
    if site.kind == BlockKind.CHAN_SEND:
        return CATEGORIES[3] if "(nil chan)" in state else CATEGORIES[2]
    if site.kind == BlockKind.SELECT:
        zero = "(no cases)" in state or any(f.symbol == "runtime.block" for f in record.frames[:3])
        return CATEGORIES[5] if zero else CATEGORIES[4]
    return _KIND_CATEGORIES.get(site.kind, OTHER_CATEGORY)


def tally(profile: GoroutineProfile) -> Dict[BlockSite, int]:
    """
    Conta registros por BlockSite (Running/Other incluídos).

    Returns:
        Dict ordenado pela chave do local (determinístico)
    """
    counts = Counter(classify(record) for record in profile.goroutines)
    return {site: counts[site] for site in sorted(counts, key=BlockSite.sort_key)}
