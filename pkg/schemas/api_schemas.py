# schemas/api_schemas.py
from typing import Optional

from pydantic import BaseModel, Field

from schemas.bench_schemas import BenchmarkConfig


class DatasetSummary(BaseModel):
    id: str = Field(..., description="Digest FNV-1a 64 do arquivo EEGB (16 dígitos hex)")
    n_trials: int
    n_subjects: int
    n_channels: int
    n_samples: int
    sample_rate_hz: float


class BenchmarkRequest(BaseModel):
    dataset_id: str
    config: BenchmarkConfig = Field(default_factory=BenchmarkConfig)
    threads: Optional[int] = Field(None, ge=0, description="Sobrescreve TWOHEADS_THREADS")
