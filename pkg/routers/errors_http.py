# routers/errors_http.py
import logging

from fastapi import HTTPException, status

from errors import (
    ArgumentError,
    ConfigurationError,
    ContainerFormatError,
    DataValidationError,
    PipelineError,
    PreconditionError,
    StratificationError,
)

logger = logging.getLogger(__name__)

CLIENT_ERRORS = (
    ArgumentError,
    ConfigurationError,
    ContainerFormatError,
    DataValidationError,
    PreconditionError,
    StratificationError,
)


def to_http(e: Exception) -> HTTPException:
    """Converte um erro dos services no HTTPException correspondente."""
    if isinstance(e, HTTPException):
        return e
    cause = e.cause if isinstance(e, PipelineError) else e
    if isinstance(cause, ConfigurationError):
        return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))
    if isinstance(cause, CLIENT_ERRORS):
        return HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    logger.error(f"Erro interno: {e}", exc_info=True)
    return HTTPException(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        detail=f"Ocorreu um erro interno no servidor: {e}",
    )
