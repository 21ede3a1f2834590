"""
Configurações centralizadas do leakwatch (simulador, classificador e analisador de vazamentos)
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Carrega variáveis de ambiente
load_dotenv()


def _get_setting(key: str, default: str = "") -> str:
    """Busca configuração do ambiente (.env ou variável exportada)"""
    return os.getenv(f"LEAKWATCH_{key}", default)


def _get_int(key: str, default: int) -> int:
    try:
        return int(_get_setting(key, str(default)))
    except ValueError:
        return default


def _get_set(key: str, default: frozenset) -> frozenset:
    raw = _get_setting(key, "")
    if not raw:
        return default
    return frozenset(item.strip() for item in raw.split(",") if item.strip())


# === Scheduler ===
DEFAULT_SEED = _get_int("SEED", 0)
MAX_STEPS = _get_int("MAX_STEPS", 1_000_000)   # Limite de passos (livelock)
TIME_LIMIT = _get_int("TIME_LIMIT", 1000)      # Horizonte do relógio lógico (ticks)

# === Analyzer (LeakProf) ===
THRESHOLD = _get_int("THRESHOLD", 10_000)  # Goroutines bloqueadas no mesmo local, por perfil
TOP_N = _get_int("TOP_N", 10)

# Símbolos de espera transitória (select só com esses braços é descartado)
TRANSIENT_SYMBOLS = _get_set("TRANSIENT_SYMBOLS", frozenset({
    "time.Tick",
    "time.After",
    "context.Done",
}))

# === Stack Signatures ===
PARK_SYMBOL = "runtime.gopark"
RUNTIME_PREFIX = "runtime."
SELECT_CASE_PREFIX = "runtime.selectcase("

SEND_SIGNATURE = frozenset({"runtime.chansend", "runtime.chansend1"})
RECV_SIGNATURE = frozenset({"runtime.chanrecv", "runtime.chanrecv1", "runtime.chanrecv2"})
# runtime.block é o que o runtime usa para `select {}` sem casos
SELECT_SIGNATURE = frozenset({"runtime.selectgo", "runtime.block"})

# Rótulo de estado (parte antes da vírgula) → tipo de bloqueio, para goroutines estacionadas
LABEL_KINDS = {
    'IO wait': 'IOWait',
    'syscall': 'Syscall',
    'sleep': 'Sleep',
    'sync.Cond.Wait': 'CondWait',
    'semacquire': 'SemAcquire',
    'sync.Mutex.Lock': 'SemAcquire',
    'sync.RWMutex.Lock': 'SemAcquire',
    'sync.RWMutex.RLock': 'SemAcquire',
}
RUNNING_LABELS = frozenset({'running', 'runnable'})

# === Paths ===
BASE_DIR = Path(__file__).parent.parent
DATA_DIR = BASE_DIR / "data"
SCENARIOS_DIR = DATA_DIR / "scenarios"
FIXTURES_DIR = DATA_DIR / "fixtures"
OUTPUT_DIR = Path(_get_setting("OUTPUT_DIR", str(BASE_DIR / "reports")))
LOG_DIR = Path(_get_setting("LOG_DIR", str(BASE_DIR / "logs")))
LOG_TO_FILE = _get_setting("LOG_TO_FILE", "1") == "1"

PROFILE_SUFFIX = ".gprof.txt"
SCENARIO_SUFFIX = ".chan"
REPORT_BASENAME = "leak_report"

# === Parsing ===
PARSE_MAX_WORKERS = _get_int("PARSE_MAX_WORKERS", 4)

# === Report ===
REPORT_SCHEMA_VERSION = 1
MAX_REPRESENTATIVE_FRAMES = 32

# === Exit Codes (contrato estável da CLI) ===
EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_NO_INPUT = 3
EXIT_STRICT_PARSE = 4


class ConfigurationError(Exception):
    """Erro de configuração da aplicação"""
    pass


def validate_config() -> list:
    """
    Valida as configurações carregadas.

    Returns:
        Lista de erros (vazia se tudo OK)
    """
    errors = []

    if THRESHOLD < 1:
        errors.append("LEAKWATCH_THRESHOLD deve ser >= 1")

    if TOP_N < 1:
        errors.append("LEAKWATCH_TOP_N deve ser >= 1")

    if MAX_STEPS < 1:
        errors.append("LEAKWATCH_MAX_STEPS deve ser >= 1")

    if TIME_LIMIT < 0:
        errors.append("LEAKWATCH_TIME_LIMIT não pode ser negativo")

    if not SCENARIOS_DIR.exists():
        errors.append(f"Diretório de cenários não encontrado: {SCENARIOS_DIR}")

    return errors


def require_valid_config():
    """Levanta ConfigurationError com todos os problemas de validate_config()."""
    errors = validate_config()
    if errors:
        raise ConfigurationError("; ".join(errors))


def get_config_status() -> dict:
    """
    Retorna status das configurações para exibição.

    Returns:
        Dict com os valores efetivos
    """
    return {
        'seed': DEFAULT_SEED,
        'max_steps': MAX_STEPS,
        'time_limit': TIME_LIMIT,
        'threshold': THRESHOLD,
        'top_n': TOP_N,
        'transient_symbols': sorted(TRANSIENT_SYMBOLS),
        'output_dir': str(OUTPUT_DIR),
    }
