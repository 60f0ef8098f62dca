import logging
import os

from dotenv import load_dotenv

from errors import ConfigurationError

# Carrega as variáveis de ambiente do arquivo .env
load_dotenv()

# --- Configuração ---

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def get_threads() -> int:
    """Limite de paralelismo (TWOHEADS_THREADS); 0 = sequencial."""
    raw = os.getenv("TWOHEADS_THREADS", "0").strip() or "0"
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigurationError("TWOHEADS_THREADS", f"inteiro esperado, recebido '{raw}'")
    if threads < 0:
        raise ConfigurationError("TWOHEADS_THREADS", "deve ser >= 0")
    return threads


def get_data_dir() -> str:
    """Diretório onde o serviço HTTP guarda os arquivos EEGB."""
    return os.getenv("TWOHEADS_DATA_DIR", "./data")


def configure_logging(verbose: bool = False) -> None:
    """
    Configura o logging raiz, sempre em stderr.

    stdout fica reservado para a saída determinística da CLI.
    """
    level_name = "DEBUG" if verbose else os.getenv("TWOHEADS_LOG_LEVEL", "INFO").upper()
    level = getattr(logging, level_name, logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger().setLevel(level)
