# schemas/selection_schemas.py
from typing import List

from pydantic import BaseModel, ConfigDict, Field


class SelectorModel(BaseModel):
    """Scores ANOVA-F por feature e os k índices selecionados (ordem crescente)."""
    model_config = ConfigDict(ser_json_inf_nan="constants")

    scores: List[float]
    k: int
    selected: List[int]
    fitted_on: int
    warnings: List[str] = Field(default_factory=list)


class RankedFeature(BaseModel):
    rank: int
    channel: int
    kind: str
    score: float
