"""
IR de programas com canais (SimProgram) e o parser do formato textual `.chan`.

Gramática (uma instrução por linha, blocos fechados com `end`):

    program <nome>
    file <caminho>                 # arquivo usado nos SourceLoc seguintes
    entry <função>
    func <nome>[(<param>, ...)]
      [<file>:<line>] <instrução>
    end

Instruções: chan, send, recv, close, go, call, range/end, if/else/end, for/end,
select/case/default/end, return, sleep, iowait, syscall, condwait, semacquire,
release, after, ticker, context, cancel, done.  A referência completa está em
docs/ir_grammar.md.
"""
import re
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.models import SourceLoc


class ProgramParseError(ValueError):
    """Erro de leitura do IR, com linha e coluna"""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"linha {line}, coluna {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


# ═══════════════════════════════════════════════════════════════════════════════
# INSTRUÇÕES
# ═══════════════════════════════════════════════════════════════════════════════

@dataclass(frozen=True)
class Stmt:
    loc: SourceLoc


@dataclass(frozen=True)
class MakeChan(Stmt):
    name: str
    capacity: int = 0
    is_nil: bool = False


@dataclass(frozen=True)
class Send(Stmt):
    chan: str
    value: int = 0


@dataclass(frozen=True)
class Recv(Stmt):
    chan: str


@dataclass(frozen=True)
class SelectArm:
    loc: SourceLoc
    direction: str            # 'send' | 'recv'
    chan: str
    value: int = 0
    body: Tuple[Stmt, ...] = ()


@dataclass(frozen=True)
class Select(Stmt):
    arms: Tuple[SelectArm, ...] = ()
    default: Optional[Tuple[Stmt, ...]] = None


@dataclass(frozen=True)
class Close(Stmt):
    chan: str


@dataclass(frozen=True)
class Spawn(Stmt):
    function: str
    args: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Call(Stmt):
    function: str
    args: Tuple[str, ...] = ()


@dataclass(frozen=True)
class RangeOverChan(Stmt):
    chan: str
    body: Tuple[Stmt, ...] = ()


@dataclass(frozen=True)
class If(Stmt):
    token: str
    then: Tuple[Stmt, ...] = ()
    orelse: Tuple[Stmt, ...] = ()


@dataclass(frozen=True)
class ForLoop(Stmt):
    count: Optional[int] = None   # None = laço infinito
    body: Tuple[Stmt, ...] = ()


@dataclass(frozen=True)
class Return(Stmt):
    pass


@dataclass(frozen=True)
class Sleep(Stmt):
    ticks: int


@dataclass(frozen=True)
class Wait(Stmt):
    """iowait / syscall / condwait / semacquire: por ticks ou até `release <token>`."""
    mode: str
    token: Optional[str] = None
    ticks: Optional[int] = None


@dataclass(frozen=True)
class Release(Stmt):
    token: str


@dataclass(frozen=True)
class After(Stmt):
    name: str
    ticks: int


@dataclass(frozen=True)
class Ticker(Stmt):
    name: str
    period: int


@dataclass(frozen=True)
class Context(Stmt):
    name: str
    cancel_at: Optional[int] = None


@dataclass(frozen=True)
class Cancel(Stmt):
    ctx: str


@dataclass(frozen=True)
class CtxDone(Stmt):
    ctx: str


WAIT_MODES = ('iowait', 'syscall', 'condwait', 'semacquire')

# Instruções que declaram um nome de canal no escopo da função
DECLARING = (MakeChan, After, Ticker, Context)


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: Tuple[str, ...]
    body: Tuple[Stmt, ...]
    loc: SourceLoc


@dataclass
class SimProgram:
    name: str
    functions: Dict[str, FunctionDef]
    entry: str
    source: str = ""

    @property
    def entry_function(self) -> FunctionDef:
        return self.functions[self.entry]

    def statements(self) -> Iterator[Tuple[FunctionDef, Stmt]]:
        """Percorre todas as instruções do programa (inclusive aninhadas)."""
        for function in self.functions.values():
            for stmt in iter_statements(function.body):
                yield function, stmt

    def find(self, loc: SourceLoc) -> Optional[Stmt]:
        for _, stmt in self.statements():
            if stmt.loc.file == loc.file and stmt.loc.line == loc.line:
                return stmt
        return None


def iter_statements(body: Tuple[Stmt, ...]) -> Iterator[Stmt]:
    for stmt in body:
        yield stmt
        if isinstance(stmt, (RangeOverChan, ForLoop)):
            yield from iter_statements(stmt.body)
        elif isinstance(stmt, If):
            yield from iter_statements(stmt.then)
            yield from iter_statements(stmt.orelse)
        elif isinstance(stmt, Select):
            for arm in stmt.arms:
                yield from iter_statements(arm.body)
            if stmt.default:
                yield from iter_statements(stmt.default)


# ═══════════════════════════════════════════════════════════════════════════════
# PARSER
# ═══════════════════════════════════════════════════════════════════════════════

_PRAGMA_RE = re.compile(r'^(\S+):(\d+)$')
_FUNC_RE = re.compile(r'^func\s+([^\s(]+)\s*(?:\(([^)]*)\))?\s*$')
_CALL_RE = re.compile(r'^([^\s(]+)\s*(?:\(([^)]*)\))?\s*$')
_IDENT_RE = re.compile(r'^[A-Za-z_][A-Za-z0-9_.$]*$')


@dataclass
class _Line:
    number: int
    text: str          # sem comentário, sem indentação
    indent: int        # coluna (1-based) onde o texto começa
    loc: Optional[SourceLoc] = None
    keyword: str = ""
    rest: str = ""
    rest_col: int = 1


@dataclass
class _Scope:
    function: str
    names: set = field(default_factory=set)

    def child(self) -> "_Scope":
        """Escopo do corpo de um bloco: enxerga os nomes de fora, declara só para dentro."""
        return _Scope(self.function, set(self.names))


def _strip_comment(raw: str) -> str:
    pos = raw.find('#')
    return raw if pos < 0 else raw[:pos]


def _parse_int(text: str, line: _Line, what: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise ProgramParseError(f"{what} inválido: '{text}'", line.number, line.rest_col)
    if value < 0:
        raise ProgramParseError(f"{what} não pode ser negativo: {value}", line.number, line.rest_col)
    return value


def _parse_value(text: str, line: _Line) -> int:
    try:
        return int(text)
    except ValueError:
        raise ProgramParseError(f"valor inválido: '{text}'", line.number, line.rest_col) from None


def _split_args(text: Optional[str]) -> Tuple[str, ...]:
    if not text or not text.strip():
        return ()
    return tuple(a.strip() for a in text.split(','))


class _Parser:
    def __init__(self, text: str, default_name: str):
        self.lines: List[_Line] = []
        self.pos = 0
        self.name = default_name
        self.file = f"{default_name}.go"
        self.entry: Optional[str] = None
        self.entry_line = 0
        self.functions: Dict[str, FunctionDef] = {}
        self.seen_locs: Dict[Tuple[str, int], int] = {}
        self.pending_calls: List[Tuple[str, int, _Line]] = []
        self._tokenize(text)

    def _tokenize(self, text: str):
        for number, raw in enumerate(text.splitlines(), 1):
            body = _strip_comment(raw).rstrip()
            stripped = body.lstrip()
            if not stripped:
                continue
            indent = len(body) - len(stripped) + 1
            self.lines.append(_Line(number, stripped, indent))

    # --- helpers ---

    def _peek(self) -> Optional[_Line]:
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def _next(self) -> _Line:
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def _resolve_line(self, line: _Line, function: str) -> _Line:
        """Separa pragma `file:line`, palavra-chave e resto."""
        text = line.text
        col = line.indent
        first, _, remainder = text.partition(' ')
        match = _PRAGMA_RE.match(first)
        if match and remainder.strip():
            loc = SourceLoc(match.group(1), int(match.group(2)), function)
            offset = len(text) - len(remainder.lstrip())
            col += offset
            text = remainder.strip()
        else:
            loc = SourceLoc(self.file, line.number, function)
        keyword, _, rest = text.partition(' ')
        line.loc = loc
        line.keyword = keyword
        line.rest = rest.strip()
        line.rest_col = col + len(keyword) + (len(rest) - len(rest.lstrip())) + 1
        return line

    def _register_loc(self, line: _Line):
        key = (line.loc.file, line.loc.line)
        if key in self.seen_locs:
            raise ProgramParseError(
                f"SourceLoc duplicado {line.loc} (já usado na linha {self.seen_locs[key]})",
                line.number, line.indent)
        self.seen_locs[key] = line.number

    def _use(self, name: str, scope: _Scope, line: _Line):
        if name not in scope.names:
            col = line.indent + line.text.find(name) if name in line.text else line.rest_col
            raise ProgramParseError(
                f"canal desconhecido '{name}' em {scope.function}", line.number, col)

    def _declare(self, name: str, line: _Line, scope: _Scope):
        if not _IDENT_RE.match(name):
            raise ProgramParseError(f"identificador inválido: '{name}'", line.number, line.rest_col)
        scope.names.add(name)

    # --- topo ---

    def parse(self) -> SimProgram:
        while self._peek() is not None:
            line = self._next()
            keyword, _, rest = line.text.partition(' ')
            rest = rest.strip()
            if keyword == 'program':
                self.name = rest
            elif keyword == 'file':
                self.file = rest
            elif keyword == 'entry':
                self.entry = rest
                self.entry_line = line.number
            elif keyword == 'func':
                self._parse_function(line)
            else:
                raise ProgramParseError(f"esperado 'func', 'entry', 'file' ou 'program', encontrado '{keyword}'",
                                        line.number, line.indent)

        for function, number, line in self.pending_calls:
            target = self.functions.get(function)
            if target is None:
                raise ProgramParseError(f"função desconhecida '{function}'", number, line.rest_col)

        entry = self.entry or 'main'
        if entry not in self.functions:
            raise ProgramParseError(f"função de entrada ausente: '{entry}'", self.entry_line or 1)
        if self.functions[entry].params:
            raise ProgramParseError(f"função de entrada '{entry}' não pode ter parâmetros",
                                    self.entry_line or 1)

        self._check_arity()
        return SimProgram(self.name, dict(self.functions), entry)

    def _check_arity(self):
        for _, number, line in self.pending_calls:
            stmt_args = _split_args(_CALL_RE.match(line.rest).group(2))
            name = _CALL_RE.match(line.rest).group(1)
            params = self.functions[name].params
            if len(stmt_args) != len(params):
                raise ProgramParseError(
                    f"'{name}' espera {len(params)} argumento(s), recebeu {len(stmt_args)}",
                    number, line.rest_col)

    def _parse_function(self, line: _Line):
        match = _FUNC_RE.match(line.text)
        if not match:
            raise ProgramParseError(f"declaração de função malformada: '{line.text}'", line.number, line.indent)
        name = match.group(1)
        if name in self.functions:
            raise ProgramParseError(f"função duplicada '{name}'", line.number, line.indent)
        params = _split_args(match.group(2))
        scope = _Scope(name, set(params))
        body, terminator = self._parse_block(scope, stop=('end',))
        if terminator is None:
            raise ProgramParseError(f"função '{name}' sem 'end'", line.number, line.indent)
        self.functions[name] = FunctionDef(name, params, body, SourceLoc(self.file, line.number, name))

    def _parse_block(self, scope: _Scope, stop: Tuple[str, ...]) -> Tuple[Tuple[Stmt, ...], Optional[_Line]]:
        body: List[Stmt] = []
        while self._peek() is not None:
            line = self._next()
            keyword = line.text.partition(' ')[0]
            if keyword in stop:
                return tuple(body), line
            if keyword in ('end', 'else', 'case', 'default'):
                raise ProgramParseError(f"'{keyword}' fora de contexto", line.number, line.indent)
            body.append(self._parse_statement(self._resolve_line(line, scope.function), scope))
        return tuple(body), None

    def _expect_block(self, scope: _Scope, opener: _Line, stop=('end',)):
        body, terminator = self._parse_block(scope, stop)
        if terminator is None:
            raise ProgramParseError(f"bloco '{opener.keyword}' sem 'end'", opener.number, opener.indent)
        return body, terminator

    def _parse_statement(self, line: _Line, scope: _Scope) -> Stmt:
        kw, rest, loc = line.keyword, line.rest, line.loc
        args = rest.split()
        self._register_loc(line)

        if kw == 'chan':
            if len(args) != 2:
                raise ProgramParseError("uso: chan <nome> <capacidade|nil>", line.number, line.rest_col)
            self._declare(args[0], line, scope)
            if args[1] == 'nil':
                return MakeChan(loc, args[0], 0, True)
            return MakeChan(loc, args[0], _parse_int(args[1], line, "capacidade"))

        if kw == 'send':
            if len(args) not in (1, 2):
                raise ProgramParseError("uso: send <canal> [valor]", line.number, line.rest_col)
            self._use(args[0], scope, line)
            value = _parse_value(args[1], line) if len(args) == 2 else 0
            return Send(loc, args[0], value)

        if kw in ('recv', 'close', 'cancel', 'done'):
            if len(args) != 1:
                raise ProgramParseError(f"uso: {kw} <canal>", line.number, line.rest_col)
            self._use(args[0], scope, line)
            return {'recv': Recv, 'close': Close, 'cancel': Cancel, 'done': CtxDone}[kw](loc, args[0])

        if kw in ('go', 'call'):
            match = _CALL_RE.match(rest)
            if not match:
                raise ProgramParseError(f"uso: {kw} <função>(<canais>)", line.number, line.rest_col)
            call_args = _split_args(match.group(2))
            for arg in call_args:
                self._use(arg, scope, line)
            self.pending_calls.append((match.group(1), line.number, line))
            cls = Spawn if kw == 'go' else Call
            return cls(loc, match.group(1), call_args)

        if kw == 'range':
            if len(args) != 1:
                raise ProgramParseError("uso: range <canal>", line.number, line.rest_col)
            self._use(args[0], scope, line)
            body, _ = self._expect_block(scope.child(), line)
            return RangeOverChan(loc, args[0], body)

        if kw == 'if':
            if len(args) != 1:
                raise ProgramParseError("uso: if <token>", line.number, line.rest_col)
            then, terminator = self._expect_block(scope.child(), line, stop=('end', 'else'))
            orelse: Tuple[Stmt, ...] = ()
            if terminator.text == 'else':
                orelse, _ = self._expect_block(scope.child(), line)
            return If(loc, args[0], then, orelse)

        if kw == 'for':
            count = _parse_int(args[0], line, "contagem") if args else None
            body, _ = self._expect_block(scope.child(), line)
            return ForLoop(loc, count, body)

        if kw == 'select':
            return self._parse_select(line, scope)

        if kw == 'return':
            return Return(loc)

        if kw == 'sleep':
            if len(args) != 1:
                raise ProgramParseError("uso: sleep <ticks>", line.number, line.rest_col)
            return Sleep(loc, _parse_int(args[0], line, "ticks"))

        if kw in WAIT_MODES:
            if len(args) != 1:
                raise ProgramParseError(f"uso: {kw} <token|ticks>", line.number, line.rest_col)
            if args[0].isdigit():
                return Wait(loc, kw, None, int(args[0]))
            return Wait(loc, kw, args[0], None)

        if kw == 'release':
            if len(args) != 1:
                raise ProgramParseError("uso: release <token>", line.number, line.rest_col)
            return Release(loc, args[0])

        if kw in ('after', 'ticker'):
            if len(args) != 2:
                raise ProgramParseError(f"uso: {kw} <nome> <ticks>", line.number, line.rest_col)
            self._declare(args[0], line, scope)
            ticks = _parse_int(args[1], line, "ticks")
            if kw == 'ticker' and ticks == 0:
                raise ProgramParseError("período do ticker deve ser positivo", line.number, line.rest_col)
            return After(loc, args[0], ticks) if kw == 'after' else Ticker(loc, args[0], ticks)

        if kw == 'context':
            if len(args) not in (1, 2):
                raise ProgramParseError("uso: context <nome> [tick de cancelamento]", line.number, line.rest_col)
            self._declare(args[0], line, scope)
            cancel_at = _parse_int(args[1], line, "tick") if len(args) == 2 else None
            return Context(loc, args[0], cancel_at)

        raise ProgramParseError(f"instrução desconhecida '{kw}'", line.number, line.indent)

    def _parse_select(self, opener: _Line, scope: _Scope) -> Select:
        arms: List[SelectArm] = []
        default: Optional[Tuple[Stmt, ...]] = None
        while True:
            line = self._peek()
            if line is None:
                raise ProgramParseError("bloco 'select' sem 'end'", opener.number, opener.indent)
            keyword = line.text.partition(' ')[0]
            if keyword == 'end' and line.text == 'end':
                self._next()
                break
            if keyword not in ('case', 'default') and not _PRAGMA_RE.match(keyword):
                raise ProgramParseError("esperado 'case', 'default' ou 'end' dentro de select",
                                        line.number, line.indent)
            line = self._resolve_line(self._next(), scope.function)
            if line.keyword == 'default':
                if default is not None:
                    raise ProgramParseError("select com mais de um 'default'", line.number, line.indent)
                default = self._parse_arm_body(scope.child())
                continue
            if line.keyword != 'case':
                raise ProgramParseError(f"esperado 'case', encontrado '{line.keyword}'", line.number, line.indent)
            self._register_loc(line)
            parts = line.rest.split()
            if not parts or parts[0] not in ('recv', 'send', 'done') or len(parts) < 2:
                raise ProgramParseError("uso: case recv|send|done <canal> [valor]", line.number, line.rest_col)
            self._use(parts[1], scope, line)
            direction = 'send' if parts[0] == 'send' else 'recv'
            value = _parse_value(parts[2], line) if direction == 'send' and len(parts) > 2 else 0
            body = self._parse_arm_body(scope.child())
            arms.append(SelectArm(line.loc, direction, parts[1], value, body))

        return Select(opener.loc, tuple(arms), default)

    def _parse_arm_body(self, scope: _Scope) -> Tuple[Stmt, ...]:
        body: List[Stmt] = []
        while True:
            line = self._peek()
            if line is None:
                return tuple(body)
            first = line.text.partition(' ')[0]
            if first in ('case', 'default') or line.text == 'end':
                return tuple(body)
            if _PRAGMA_RE.match(first) and line.text.split()[1:2] in (['case'], ['default']):
                return tuple(body)
            self._next()
            keyword = first
            if keyword in ('else',):
                raise ProgramParseError(f"'{keyword}' fora de contexto", line.number, line.indent)
            body.append(self._parse_statement(self._resolve_line(line, scope.function), scope))


def load_program(text: str, name: str = "program") -> SimProgram:
    """
    Lê um programa no formato `.chan` e resolve nomes de canais e funções.

    Args:
        text: Texto do programa
        name: Nome padrão (quando não há diretiva `program`)

    Returns:
        SimProgram resolvido

    Raises:
        ProgramParseError: com linha/coluna do problema
    """
    program = _Parser(text, name).parse()
    program.source = text
    return program


def load_program_file(path: Path) -> SimProgram:
    """Lê um arquivo `.chan` do disco."""
    path = Path(path)
    return load_program(path.read_text(encoding='utf-8'), name=path.name.split('.')[0])
