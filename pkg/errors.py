"""Hierarquia de exceções compartilhada por services, CLI e routers."""
from typing import Optional


class TwoHeadsError(Exception):
    """Base de todos os erros do projeto."""


class ConfigurationError(TwoHeadsError):
    """Configuração inválida; `field` nomeia o campo violado."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DataValidationError(TwoHeadsError):
    """Invariante do RecordingSet violado."""

    def __init__(self, message: str, trial_index: Optional[int] = None):
        self.trial_index = trial_index
        if trial_index is not None:
            message = f"trial {trial_index}: {message}"
        super().__init__(message)


class ContainerFormatError(TwoHeadsError):
    """Arquivo EEGB malformado (magic, truncamento, bytes sobrando)."""

    def __init__(self, message: str, expected: Optional[int] = None, actual: Optional[int] = None):
        self.expected = expected
        self.actual = actual
        if expected is not None:
            message = f"{message} (esperado {expected} bytes, encontrado {actual})"
        super().__init__(message)


class ContainerIOError(TwoHeadsError):
    def __init__(self, path, message: str):
        self.path = str(path)
        super().__init__(f"{path}: {message}")


class PreconditionError(TwoHeadsError):
    """Entrada curta demais (filtro, sinal analítico, extração de features)."""


class ArgumentError(TwoHeadsError, ValueError):
    """Argumento inválido: dimensões incompatíveis, grupos vazios etc."""


class StratificationError(TwoHeadsError):
    """Apenas um rótulo presente onde os dois são necessários."""


class PipelineError(TwoHeadsError):
    """Erro dentro de uma célula do benchmark, anotado com suas coordenadas."""

    def __init__(self, kind: str, condition: str, seed: int, cause: Exception):
        self.kind = kind
        self.condition = condition
        self.seed = seed
        self.cause = cause
        super().__init__(f"[{kind} × {condition} × seed={seed}] {cause}")
