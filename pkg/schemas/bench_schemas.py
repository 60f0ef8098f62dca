# schemas/bench_schemas.py
from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from errors import ConfigurationError
from schemas.classifier_schemas import ClassifierKind, Hyperparams
from schemas.feature_schemas import FilterSpec

TIMING_SCOPE = "fit+predict+selection; excludes feature extraction and I/O"


class Condition(str, Enum):
    SOTA = "sota"
    FS = "fs"
    TWOHEADS = "twoheads"


class BenchmarkConfig(BaseModel):
    """Tudo o que determina um RunReport, além do dataset."""
    kinds: List[ClassifierKind] = Field(default_factory=lambda: list(ClassifierKind))
    conditions: List[Condition] = Field(default_factory=lambda: list(Condition))
    k: int = 50
    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    ratios: Tuple[float, float, float] = (0.7, 0.15, 0.15)
    hyperparams: Hyperparams = Field(default_factory=Hyperparams)
    filter_spec: FilterSpec = Field(default_factory=FilterSpec)

    @model_validator(mode="after")
    def _check(self):
        if not self.kinds:
            raise ConfigurationError("kinds", "pelo menos um classificador")
        if not self.conditions:
            raise ConfigurationError("conditions", "pelo menos uma condição")
        if not self.seeds:
            raise ConfigurationError("seeds", "pelo menos uma seed")
        if self.k < 1:
            raise ConfigurationError("k", "deve ser >= 1")
        return self


class RunResult(BaseModel):
    """Uma execução (classificador × condição × seed). Acurácias em %."""
    seed: int
    accuracy: float
    runtime_s: float
    n_train: int
    n_val: int
    n_test: int
    selected: Optional[List[int]] = None
    # Somente twoheads
    acc_1h: Optional[float] = None
    acc_2h: Optional[float] = None
    n_test_1h: Optional[int] = None
    n_test_2h: Optional[int] = None
    selected_1h: Optional[List[int]] = None
    selected_2h: Optional[List[int]] = None


class CellReport(BaseModel):
    classifier: ClassifierKind
    condition: Condition
    mean_accuracy: float
    accuracies: List[float]
    mean_runtime_s: float
    mean_acc_1h: Optional[float] = None
    mean_acc_2h: Optional[float] = None
    runs: List[RunResult]


class RunReport(BaseModel):
    config: BenchmarkConfig
    dataset_digest: str
    n_trials: int
    n_features: int
    timing_scope: str = TIMING_SCOPE
    cells: List[CellReport]

    def cell(self, kind: ClassifierKind, condition: Condition) -> CellReport:
        for cell in self.cells:
            if cell.classifier == kind and cell.condition == condition:
                return cell
        raise KeyError(f"{kind} × {condition}")
