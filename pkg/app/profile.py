r"""
Perfis de goroutines: modelo, parser e emissor do formato textual `.gprof.txt`.

Formato canônico (ver docs/profile_format.md):

    goroutine profile: total 1 instance=host-a captured_at=2024-05-01T00:00:00Z

    goroutine 7 [chan send]:
    runtime.gopark
    \truntime/proc.go:398
    server.ComputeCost$1
    \ttransactions/cost.go:8
    created by server.ComputeCost
    \ttransactions/cost.go:6
"""
import glob
import re
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import PROFILE_SUFFIX, PARSE_MAX_WORKERS
from app.models import Frame, SourceLoc
from app.logger import log_profile_skipped, log_info


class ProfileParseError(ValueError):
    """Perfil malformado, com a linha do problema"""

    def __init__(self, message: str, line: int):
        super().__init__(f"linha {line}: {message}")
        self.message = message
        self.line = line


@dataclass(frozen=True)
class GoroutineRecord:
    id: int
    state_label: str
    frames: Tuple[Frame, ...]          # mais interno primeiro
    created_by: Optional[Frame] = None

    @property
    def label_base(self) -> str:
        """Rótulo sem os qualificadores após a vírgula (`chan send, 5 minutes` → `chan send`)."""
        return self.state_label.split(',')[0].strip()


@dataclass
class GoroutineProfile:
    instance_id: str = ""
    captured_at: str = ""
    goroutines: List[GoroutineRecord] = field(default_factory=list)
    source: str = ""       # caminho do arquivo, quando lido do disco

    def __len__(self) -> int:
        return len(self.goroutines)


# ═══════════════════════════════════════════════════════════════════════════════
# PARSER
# ═══════════════════════════════════════════════════════════════════════════════

_HEADER_RE = re.compile(r'^goroutine profile: total (\d+)((?: \w+=\S+)*)$')
_BLOCK_RE = re.compile(r'^goroutine (\d+) \[([^\]]*)\]:$')
# Argumentos de dumps reais: (0xc000010000, 0x1, ...) ou (...)
_ARGS_RE = re.compile(r'\((?:0x[0-9a-fA-F]+|\.\.\.|[\s,{}?])*\)$')
_PC_RE = re.compile(r'\s+\+0x[0-9a-fA-F]+$')
_IN_GOROUTINE_RE = re.compile(r'\s+in goroutine \d+$')


def _symbol(text: str) -> str:
    return _ARGS_RE.sub('', text.strip())


def _location(text: str, symbol: str, number: int) -> SourceLoc:
    cleaned = _PC_RE.sub('', text.strip())
    try:
        return SourceLoc.parse(cleaned, symbol)
    except ValueError as e:
        raise ProfileParseError(str(e), number) from None


def parse_profile(text: str, instance_id: Optional[str] = None) -> GoroutineProfile:
    """
    Lê um perfil no formato textual.

    Args:
        text: Conteúdo do perfil
        instance_id: Instância usada quando o cabeçalho não traz `instance=`

    Returns:
        GoroutineProfile com os registros na ordem do arquivo

    Raises:
        ProfileParseError: cabeçalho malformado, quadro sem local, id duplicado
    """
    lines = text.splitlines()
    if not lines:
        raise ProfileParseError("perfil vazio (cabeçalho ausente)", 1)

    header = _HEADER_RE.match(lines[0].strip())
    if not header:
        raise ProfileParseError(f"cabeçalho malformado: '{lines[0].strip()}'", 1)
    declared_total = int(header.group(1))
    attrs = dict(item.split('=', 1) for item in header.group(2).split())

    profile = GoroutineProfile(
        instance_id=attrs.get('instance', instance_id or ""),
        captured_at=attrs.get('captured_at', ""),
    )
    seen: Dict[int, int] = {}
    index = 1

    while index < len(lines):
        raw = lines[index]
        if not raw.strip():
            index += 1
            continue
        number = index + 1
        block = _BLOCK_RE.match(raw.strip())
        if not block:
            raise ProfileParseError(f"esperado 'goroutine <id> [<estado>]:', encontrado '{raw.strip()}'", number)
        goroutine_id = int(block.group(1))
        if goroutine_id < 1:
            raise ProfileParseError(f"id de goroutine inválido: {goroutine_id}", number)
        if goroutine_id in seen:
            raise ProfileParseError(
                f"goroutine {goroutine_id} duplicada (já declarada na linha {seen[goroutine_id]})", number)
        seen[goroutine_id] = number

        frames: List[Frame] = []
        created_by: Optional[Frame] = None
        index += 1
        while index < len(lines) and lines[index].strip():
            line = lines[index]
            if line[0] in ' \t':
                raise ProfileParseError(f"local sem quadro: '{line.strip()}'", index + 1)
            symbol_line = line.strip()
            if index + 1 >= len(lines) or not lines[index + 1].strip() or lines[index + 1][0] not in ' \t':
                raise ProfileParseError(f"quadro sem local: '{symbol_line}'", index + 1)
            if symbol_line.startswith('created by '):
                symbol = _symbol(_IN_GOROUTINE_RE.sub('', symbol_line[len('created by '):]))
                created_by = Frame(symbol, _location(lines[index + 1], symbol, index + 2))
                index += 2
                if index < len(lines) and lines[index].strip():
                    raise ProfileParseError("'created by' deve ser o último quadro", index + 1)
                break
            symbol = _symbol(symbol_line)
            frames.append(Frame(symbol, _location(lines[index + 1], symbol, index + 2)))
            index += 2

        if not frames:
            raise ProfileParseError(f"goroutine {goroutine_id} sem quadros", number)
        profile.goroutines.append(GoroutineRecord(goroutine_id, block.group(2), tuple(frames), created_by))

    if declared_total != len(profile.goroutines):
        raise ProfileParseError(
            f"cabeçalho declara total {declared_total}, perfil tem {len(profile.goroutines)}", 1)
    return profile


# ═══════════════════════════════════════════════════════════════════════════════
# EMISSOR
# ═══════════════════════════════════════════════════════════════════════════════

def check_header_value(key: str, value: str) -> str:
    """Valores do cabeçalho são tokens `chave=valor`: espaço quebraria a releitura."""
    if value and (any(c.isspace() for c in value) or not value.isprintable()):
        raise ValueError(f"{key} não pode conter espaços: '{value}'")
    return value


def emit_profile(profile: GoroutineProfile) -> str:
    """Texto canônico: cabeçalho, blocos em ordem crescente de id separados por linha em branco."""
    header = f"goroutine profile: total {len(profile.goroutines)}"
    check_header_value('instance', profile.instance_id)
    check_header_value('captured_at', profile.captured_at)
    if profile.instance_id:
        header += f" instance={profile.instance_id}"
    if profile.captured_at:
        header += f" captured_at={profile.captured_at}"
    out = [header]
    for record in sorted(profile.goroutines, key=lambda g: g.id):
        out.append("")
        out.append(f"goroutine {record.id} [{record.state_label}]:")
        for frame in record.frames:
            out.append(frame.symbol)
            out.append(f"\t{frame.location}")
        if record.created_by is not None:
            out.append(f"created by {record.created_by.symbol}")
            out.append(f"\t{record.created_by.location}")
    return "\n".join(out) + "\n"


# ═══════════════════════════════════════════════════════════════════════════════
# ARQUIVOS
# ═══════════════════════════════════════════════════════════════════════════════

def _instance_from_path(path: Path) -> str:
    name = path.name
    return name[:-len(PROFILE_SUFFIX)] if name.endswith(PROFILE_SUFFIX) else path.stem


def load_profile_file(path) -> GoroutineProfile:
    """Lê um `.gprof.txt`; sem `instance=` no cabeçalho, a instância é o nome do arquivo."""
    path = Path(path)
    profile = parse_profile(path.read_text(encoding='utf-8'), instance_id=_instance_from_path(path))
    profile.source = str(path)
    return profile


def write_profile_file(profile: GoroutineProfile, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(emit_profile(profile), encoding='utf-8')
    return path


def expand_profile_paths(target) -> List[Path]:
    """Diretório (todos os `.gprof.txt`), arquivo único ou padrão glob → caminhos ordenados."""
    target = str(target)
    path = Path(target)
    if path.is_dir():
        return sorted(p for p in path.iterdir() if p.name.endswith(PROFILE_SUFFIX))
    if path.is_file():
        return [path]
    return sorted(Path(p) for p in glob.glob(target, recursive=True) if Path(p).is_file())


def parse_profile_dir(
    target,
    max_workers: int = PARSE_MAX_WORKERS,
) -> Tuple[List[GoroutineProfile], List[Tuple[Path, str]]]:
    """
    Lê vários perfis em paralelo.

    Args:
        target: Diretório, arquivo ou padrão glob
        max_workers: Leituras simultâneas

    Returns:
        Tuple[perfis, falhas]
        - perfis: em ordem de caminho (determinística)
        - falhas: (caminho, mensagem) de arquivos que não puderam ser lidos
    """
    paths = expand_profile_paths(target)
    parsed: Dict[Path, GoroutineProfile] = {}
    failures: Dict[Path, str] = {}

    if not paths:
        return [], []

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
        futures = {executor.submit(load_profile_file, path): path for path in paths}
        for future in as_completed(futures):
            path = futures[future]
            try:
                parsed[path] = future.result()
            except (ProfileParseError, OSError, UnicodeDecodeError) as e:
                failures[path] = str(e)

    for path in sorted(failures):
        log_profile_skipped(str(path), failures[path])
    log_info("profile", f"PROFILES_LOADED | target={target} | ok={len(parsed)} | failed={len(failures)}")

    return [parsed[p] for p in sorted(parsed)], [(p, failures[p]) for p in sorted(failures)]
