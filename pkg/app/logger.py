"""
Sistema de logging estruturado para a aplicação.
Centraliza toda a configuração de logs.
"""
import logging
import sys
from datetime import datetime
from typing import Optional

from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import LOG_DIR, LOG_TO_FILE


# Formato de log
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def setup_logger(
    name: str = "leakwatch",
    level: int = logging.INFO,
    log_to_file: bool = LOG_TO_FILE,
    log_to_console: bool = False
) -> logging.Logger:
    """
    Configura e retorna um logger.

    Args:
        name: Nome do logger
        level: Nível de logging (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_to_file: Se True, salva logs em arquivo
        log_to_console: Se True, mostra logs no console (stderr)

    Returns:
        Logger configurado
    """
    logger = logging.getLogger(name)

    # Evita duplicação de handlers
    if logger.handlers:
        return logger

    logger.setLevel(level)
    # cada logger tem os próprios handlers; sem isso o --verbose duplica linhas
    logger.propagate = False

    formatter = logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT)

    # Handler para arquivo
    if log_to_file:
        try:
            LOG_DIR.mkdir(parents=True, exist_ok=True)
            log_file = LOG_DIR / f"{name}_{datetime.now().strftime('%Y-%m-%d')}.log"
            file_handler = logging.FileHandler(log_file, encoding='utf-8')
            file_handler.setLevel(level)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)
        except OSError:
            # Diretório somente leitura: segue sem arquivo
            pass

    # stdout fica reservado para a saída dos comandos
    if log_to_console:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(level)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    if not logger.handlers:
        logger.addHandler(logging.NullHandler())

    return logger


# Logger principal da aplicação
logger = setup_logger("leakwatch")

# Loggers específicos por módulo
runtime_logger = setup_logger("leakwatch.runtime")
scenario_logger = setup_logger("leakwatch.scenario")
profile_logger = setup_logger("leakwatch.profile")
analyzer_logger = setup_logger("leakwatch.analyzer")
cli_logger = setup_logger("leakwatch.cli")
ui_logger = setup_logger("leakwatch.ui")

_MODULE_LOGGERS = {
    "runtime": runtime_logger,
    "scenario": scenario_logger,
    "profile": profile_logger,
    "analyzer": analyzer_logger,
    "cli": cli_logger,
    "ui": ui_logger,
}


def get_module_logger(module: str) -> logging.Logger:
    """Retorna o logger do módulo (ou o principal)."""
    return _MODULE_LOGGERS.get(module, logger)


def enable_console(level: int = logging.WARNING):
    """Liga a saída em stderr para todos os loggers (usado pela CLI com --verbose)."""
    formatter = logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT)
    for module_logger in [logger, *_MODULE_LOGGERS.values()]:
        if any(getattr(h, "_leakwatch_console", False) for h in module_logger.handlers):
            continue
        handler = logging.StreamHandler(sys.stderr)
        handler.setLevel(level)
        handler.setFormatter(formatter)
        handler._leakwatch_console = True
        module_logger.addHandler(handler)
        module_logger.setLevel(min(module_logger.level or level, level))


def log_error(module: str, message: str, exception: Optional[Exception] = None):
    """
    Log de erro com contexto.

    Args:
        module: Nome do módulo (runtime, scenario, profile, analyzer, cli, ui)
        message: Mensagem de erro
        exception: Exceção opcional para incluir traceback
    """
    module_logger = get_module_logger(module)

    if exception:
        module_logger.error(f"{message}: {exception}", exc_info=True)
    else:
        module_logger.error(message)


def log_warning(module: str, message: str):
    """Log de warning."""
    get_module_logger(module).warning(message)


def log_info(module: str, message: str):
    """Log de informação."""
    get_module_logger(module).info(message)


def log_debug(module: str, message: str):
    """Log de debug."""
    get_module_logger(module).debug(message)


def log_run_finished(program: str, steps: int, clock: int, leaked: int, bound_exceeded: bool = False):
    """Log específico para fim de simulação."""
    status = "BOUND_EXCEEDED" if bound_exceeded else "QUIESCENT"
    runtime_logger.info(
        f"RUN_FINISHED | program={program} | status={status} | steps={steps} | clock={clock} | leaked={leaked}"
    )


def log_profile_skipped(path: str, error: str):
    """Log específico para perfil descartado na leitura em lote."""
    profile_logger.warning(f"PROFILE_SKIPPED | path={path} | error={error}")


def log_finding(kind: str, location: str, total: int, rms: float):
    """Log de local suspeito aprovado pelos filtros."""
    analyzer_logger.info(f"FINDING | kind={kind} | site={location} | total={total} | rms={rms:.2f}")
