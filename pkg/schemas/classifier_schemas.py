# schemas/classifier_schemas.py
from enum import Enum
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing_extensions import Annotated

from errors import ConfigurationError


class ClassifierKind(str, Enum):
    GAUSSIAN_NB = "gaussian_nb"
    KNN = "knn"
    LINEAR_SVM = "linear_svm"
    RBF_SVM = "rbf_svm"
    ADABOOST = "adaboost"
    RANDOM_FOREST = "random_forest"
    GRADIENT_BOOST = "gradient_boost"
    SECOND_ORDER_BOOST = "second_order_boost"


# --- Hiperparâmetros ---

def _require(condition: bool, field: str, message: str) -> None:
    if not condition:
        raise ConfigurationError(field, message)


class GaussianNBParams(BaseModel):
    var_smoothing: float = 1e-9

    @model_validator(mode="after")
    def _check(self):
        _require(self.var_smoothing > 0, "gaussian_nb.var_smoothing", "deve ser > 0")
        return self


class KnnParams(BaseModel):
    k: int = 5

    @model_validator(mode="after")
    def _check(self):
        _require(self.k >= 1, "knn.k", "deve ser >= 1")
        return self


class LinearSvmParams(BaseModel):
    reg_lambda: float = 1e-4
    epochs: int = 100

    @model_validator(mode="after")
    def _check(self):
        _require(self.reg_lambda > 0, "linear_svm.reg_lambda", "deve ser > 0")
        _require(self.epochs >= 1, "linear_svm.epochs", "deve ser >= 1")
        return self


class RbfSvmParams(BaseModel):
    reg_lambda: float = 1e-4
    epochs: int = 100
    # None: 1/(d · variância média das features padronizadas)
    gamma: Optional[float] = None

    @model_validator(mode="after")
    def _check(self):
        _require(self.reg_lambda > 0, "rbf_svm.reg_lambda", "deve ser > 0")
        _require(self.epochs >= 1, "rbf_svm.epochs", "deve ser >= 1")
        _require(self.gamma is None or self.gamma > 0, "rbf_svm.gamma", "deve ser > 0")
        return self


class AdaBoostParams(BaseModel):
    rounds: int = 100

    @model_validator(mode="after")
    def _check(self):
        _require(self.rounds >= 1, "adaboost.rounds", "deve ser >= 1")
        return self


class RandomForestParams(BaseModel):
    trees: int = 100
    max_depth: Optional[int] = None
    # None: ⌈√d⌉
    features_per_split: Optional[int] = None
    bootstrap: bool = True

    @model_validator(mode="after")
    def _check(self):
        _require(self.trees >= 1, "random_forest.trees", "deve ser >= 1")
        _require(self.max_depth is None or self.max_depth >= 1, "random_forest.max_depth", "deve ser >= 1")
        _require(
            self.features_per_split is None or self.features_per_split >= 1,
            "random_forest.features_per_split", "deve ser >= 1",
        )
        return self


class GradientBoostParams(BaseModel):
    trees: int = 100
    depth: int = 3
    learning_rate: float = 0.1

    @model_validator(mode="after")
    def _check(self):
        _require(self.trees >= 1, "gradient_boost.trees", "deve ser >= 1")
        _require(self.depth >= 1, "gradient_boost.depth", "deve ser >= 1")
        _require(0 < self.learning_rate <= 1, "gradient_boost.learning_rate", "deve estar em (0, 1]")
        return self


class SecondOrderBoostParams(BaseModel):
    trees: int = 100
    depth: int = 3
    learning_rate: float = 0.1
    # 0 é aceito: nesse limite as folhas coincidem com o passo de Newton do gradient_boost.
    reg_lambda: float = 1.0
    min_split_gain: float = 0.0

    @model_validator(mode="after")
    def _check(self):
        _require(self.trees >= 1, "second_order_boost.trees", "deve ser >= 1")
        _require(self.depth >= 1, "second_order_boost.depth", "deve ser >= 1")
        _require(0 < self.learning_rate <= 1, "second_order_boost.learning_rate", "deve estar em (0, 1]")
        _require(self.reg_lambda >= 0, "second_order_boost.reg_lambda", "deve ser >= 0")
        _require(self.min_split_gain >= 0, "second_order_boost.min_split_gain", "deve ser >= 0")
        return self


class Hyperparams(BaseModel):
    """Hiperparâmetros de todas as famílias; ecoados em todo RunReport."""
    gaussian_nb: GaussianNBParams = Field(default_factory=GaussianNBParams)
    knn: KnnParams = Field(default_factory=KnnParams)
    linear_svm: LinearSvmParams = Field(default_factory=LinearSvmParams)
    rbf_svm: RbfSvmParams = Field(default_factory=RbfSvmParams)
    adaboost: AdaBoostParams = Field(default_factory=AdaBoostParams)
    random_forest: RandomForestParams = Field(default_factory=RandomForestParams)
    gradient_boost: GradientBoostParams = Field(default_factory=GradientBoostParams)
    second_order_boost: SecondOrderBoostParams = Field(default_factory=SecondOrderBoostParams)

    def for_kind(self, kind: ClassifierKind) -> BaseModel:
        return getattr(self, ClassifierKind(kind).value)


# --- Modelos treinados ---

class _State(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")


class TreeArrays(_State):
    """Árvore binária em arrays paralelos; feature = −1 marca folha. Vai à esquerda se x <= threshold."""
    feature: List[int]
    threshold: List[float]
    left: List[int]
    right: List[int]
    value: List[float]


class Standardization(_State):
    mean: List[float]
    std: List[float]


class NaiveBayesState(_State):
    family: Literal["gaussian_nb"] = "gaussian_nb"
    log_priors: List[float]
    means: List[List[float]]
    variances: List[List[float]]


class KnnState(_State):
    family: Literal["knn"] = "knn"
    k: int
    train_X: List[List[float]]
    train_y: List[int]


class LinearState(_State):
    family: Literal["linear_svm"] = "linear_svm"
    weights: List[float]
    bias: float


class KernelState(_State):
    family: Literal["rbf_svm"] = "rbf_svm"
    gamma: float
    support: List[List[float]]
    coef: List[float]


class StumpEnsembleState(_State):
    family: Literal["adaboost"] = "adaboost"
    features: List[int]
    thresholds: List[float]
    left_labels: List[int]
    right_labels: List[int]
    alphas: List[float]


class ForestState(_State):
    family: Literal["random_forest"] = "random_forest"
    trees: List[TreeArrays]


class BoostState(_State):
    family: Literal["gradient_boost", "second_order_boost"]
    base_score: float
    learning_rate: float
    trees: List[TreeArrays]
    train_loss: List[float]


ModelState = Annotated[
    Union[NaiveBayesState, KnnState, LinearState, KernelState, StumpEnsembleState, ForestState, BoostState],
    Field(discriminator="family"),
]


class TrainedModel(_State):
    """União rotulada (pelo `kind`) dos parâmetros aprendidos de cada família."""
    kind: ClassifierKind
    hyperparams: dict
    n_features: int
    seed: Optional[int] = None
    standardization: Optional[Standardization] = None
    state: ModelState
