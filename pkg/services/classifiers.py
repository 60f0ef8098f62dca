# services/classifiers.py
"""
As oito famílias de classificadores binários (rótulos 0/1), implementadas do
zero sobre numpy, com um contrato único: fit_* -> TrainedModel, predict(model, X).

Convenções de empate: votos empatados e escores exatamente 0 dão rótulo 0;
distâncias empatadas favorecem a menor linha de treino.
"""
import logging
import math
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from errors import ArgumentError
from schemas.classifier_schemas import (
    AdaBoostParams,
    BoostState,
    ClassifierKind,
    ForestState,
    GaussianNBParams,
    GradientBoostParams,
    Hyperparams,
    KernelState,
    KnnParams,
    KnnState,
    LinearState,
    LinearSvmParams,
    NaiveBayesState,
    RandomForestParams,
    RbfSvmParams,
    SecondOrderBoostParams,
    Standardization,
    StumpEnsembleState,
    TrainedModel,
)
from services.trees import default_features_per_split, grow_tree, predict_tree

logger = logging.getLogger(__name__)

KNN_CHUNK_ELEMENTS = 1 << 22
MIN_ADABOOST_ERROR = 1e-10
NEWTON_MIN_HESSIAN = 1e-150


# --- Utilitários ---

def _check_training(X, y) -> Tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ArgumentError(f"X {X.shape} e y {y.shape} incompatíveis")
    if X.shape[1] < 1:
        raise ArgumentError("X não tem colunas")
    if not np.isfinite(X).all():
        raise ArgumentError("X contém valores não finitos")
    if not np.isin(y, (0, 1)).all():
        raise ArgumentError("rótulos devem estar em {0, 1}")
    if np.unique(y).size < 2:
        raise ArgumentError("o treino exige os dois rótulos")
    return X, y.astype(np.int64)


def _fit_standardization(X: np.ndarray) -> Standardization:
    std = X.std(axis=0)
    std[std == 0] = 1.0
    return Standardization(mean=X.mean(axis=0).tolist(), std=std.tolist())


def _apply_standardization(X: np.ndarray, standardization: Optional[Standardization]) -> np.ndarray:
    if standardization is None:
        return X
    return (X - np.asarray(standardization.mean)) / np.asarray(standardization.std)


def _signs(y: np.ndarray) -> np.ndarray:
    return np.where(y == 1, 1.0, -1.0)


def _model(kind: ClassifierKind, hp, X: np.ndarray, state, seed=None, standardization=None) -> TrainedModel:
    return TrainedModel(
        kind=kind,
        hyperparams=hp.model_dump(),
        n_features=int(X.shape[1]),
        seed=seed,
        standardization=standardization,
        state=state,
    )


def log_loss(y: np.ndarray, raw: np.ndarray) -> float:
    """Perda logística média para escores brutos (log-odds)."""
    return float(np.mean(np.logaddexp(0.0, raw) - y * raw))


# --- Gaussian NB ---

def fit_gaussian_nb(X, y, hp: Optional[GaussianNBParams] = None, seed: Optional[int] = None) -> TrainedModel:
    hp = hp or GaussianNBParams()
    X, y = _check_training(X, y)
    epsilon = hp.var_smoothing * float(X.var(axis=0).max())
    if epsilon == 0:
        # Todas as colunas constantes: variâncias iguais, a priori decide.
        epsilon = hp.var_smoothing
    groups = [X[y == label] for label in (0, 1)]
    state = NaiveBayesState(
        log_priors=[math.log(g.shape[0] / X.shape[0]) for g in groups],
        means=[g.mean(axis=0).tolist() for g in groups],
        variances=[(g.var(axis=0) + epsilon).tolist() for g in groups],
    )
    return _model(ClassifierKind.GAUSSIAN_NB, hp, X, state)


def _joint_log_likelihood(state: NaiveBayesState, X: np.ndarray) -> np.ndarray:
    columns = []
    for log_prior, mean, var in zip(state.log_priors, state.means, state.variances):
        mean, var = np.asarray(mean), np.asarray(var)
        columns.append(
            log_prior
            - 0.5 * np.sum(np.log(2 * np.pi * var))
            - 0.5 * np.sum((X - mean) ** 2 / var, axis=1)
        )
    return np.column_stack(columns)


# --- KNN ---

def fit_knn(X, y, hp: Optional[KnnParams] = None, seed: Optional[int] = None) -> TrainedModel:
    hp = hp or KnnParams()
    X, y = _check_training(X, y)
    standardization = _fit_standardization(X)
    state = KnnState(
        k=hp.k,
        train_X=_apply_standardization(X, standardization).tolist(),
        train_y=y.tolist(),
    )
    return _model(ClassifierKind.KNN, hp, X, state, standardization=standardization)


def _neighbors(state: KnnState, Xs: np.ndarray) -> np.ndarray:
    train = np.asarray(state.train_X, dtype=float)
    k = min(state.k, train.shape[0])
    rows_per_chunk = max(1, KNN_CHUNK_ELEMENTS // max(1, train.size))
    result = np.empty((Xs.shape[0], k), dtype=np.int64)
    for start in range(0, Xs.shape[0], rows_per_chunk):
        query = Xs[start:start + rows_per_chunk]
        distances = ((query[:, None, :] - train[None, :, :]) ** 2).sum(axis=-1)
        result[start:start + rows_per_chunk] = np.argsort(distances, axis=1, kind="stable")[:, :k]
    return result


def kneighbors(model: TrainedModel, X) -> np.ndarray:
    """Índices (linhas de treino) dos k vizinhos de cada consulta, do mais próximo ao mais distante."""
    Xs = _apply_standardization(_check_query(model, X), model.standardization)
    return _neighbors(model.state, Xs)


# --- SVM linear (Pegasos) ---

def fit_linear_svm(X, y, hp: Optional[LinearSvmParams] = None, seed: int = 0) -> TrainedModel:
    """
    Subgradiente estocástico no primal da hinge loss, passo 1/(λ·t).

    O bias entra como uma feature constante 1 acrescentada (e regularizada).
    Cada época percorre uma permutação das linhas sorteada pelo gerador da seed.
    """
    hp = hp or LinearSvmParams()
    X, y = _check_training(X, y)
    standardization = _fit_standardization(X)
    n = X.shape[0]
    Z = np.hstack([_apply_standardization(X, standardization), np.ones((n, 1))])
    signs = _signs(y)
    rng = np.random.default_rng(seed)

    w = np.zeros(Z.shape[1])
    t = 0
    for _ in range(hp.epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (hp.reg_lambda * t)
            margin = signs[i] * (Z[i] @ w)
            w *= 1.0 - 1.0 / t
            if margin < 1.0:
                w += eta * signs[i] * Z[i]

    state = LinearState(weights=w[:-1].tolist(), bias=float(w[-1]))
    return _model(ClassifierKind.LINEAR_SVM, hp, X, state, seed=seed, standardization=standardization)


# --- SVM RBF (Pegasos kernelizado) ---

def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """exp(−γ‖a−b‖²) para todos os pares de linhas."""
    sq = (A**2).sum(axis=1)[:, None] + (B**2).sum(axis=1)[None, :] - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


def default_gamma(Xs: np.ndarray) -> float:
    """1/(d · variância média das colunas)."""
    mean_variance = float(Xs.var(axis=0).mean())
    d = Xs.shape[1]
    return 1.0 / (d * mean_variance) if mean_variance > 0 else 1.0 / d


def fit_rbf_svm(X, y, hp: Optional[RbfSvmParams] = None, seed: int = 0) -> TrainedModel:
    """
    Pegasos kernelizado: α_i conta quantas vezes a linha i violou a margem;
    o escore de x é Σ_j α_j y_j K(x_j, x) / (λ·T).
    """
    hp = hp or RbfSvmParams()
    X, y = _check_training(X, y)
    standardization = _fit_standardization(X)
    Xs = _apply_standardization(X, standardization)
    gamma = hp.gamma if hp.gamma is not None else default_gamma(Xs)
    n = Xs.shape[0]
    K = rbf_kernel(Xs, Xs, gamma)
    signs = _signs(y)
    rng = np.random.default_rng(seed)

    counts = np.zeros(n)
    weighted = np.zeros(n)
    t = 0
    for _ in range(hp.epochs):
        for i in rng.permutation(n):
            t += 1
            if signs[i] * (K[i] @ weighted) / (hp.reg_lambda * t) < 1.0:
                counts[i] += 1
                weighted[i] += signs[i]

    support = counts > 0
    state = KernelState(
        gamma=gamma,
        support=Xs[support].tolist(),
        coef=(weighted[support] / (hp.reg_lambda * t)).tolist(),
    )
    logger.debug(f"rbf_svm: {int(support.sum())} vetores de suporte de {n}")
    return _model(ClassifierKind.RBF_SVM, hp, X, state, seed=seed, standardization=standardization)


# --- AdaBoost (stumps) ---

Stump = Tuple[int, float, int, int]


def best_stump(X: np.ndarray, y: np.ndarray, weights: np.ndarray) -> Tuple[Stump, float]:
    """
    Stump (feature, limiar, rótulo à esquerda, rótulo à direita) de menor erro ponderado.

    Limiares nos pontos médios entre valores distintos consecutivos; empates
    vão para a menor feature, depois o menor limiar, depois a polaridade
    "esquerda 0, direita 1". Sem nenhum limiar possível, devolve um stump
    constante com o rótulo de maior peso.
    """
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    w1 = np.where(y == 1, weights, 0.0)
    w0 = np.where(y == 0, weights, 0.0)
    cum1 = np.cumsum(w1[order], axis=0)
    cum0 = np.cumsum(w0[order], axis=0)
    total1, total0 = cum1[-1], cum0[-1]
    left1, left0 = cum1[:-1], cum0[:-1]

    errors = np.stack([
        (left1 + (total0 - left0)).T,  # esquerda -> 0, direita -> 1
        (left0 + (total1 - left1)).T,  # esquerda -> 1, direita -> 0
    ], axis=-1)
    errors[~(xs[1:] > xs[:-1]).T] = np.inf

    if errors.size == 0 or not np.isfinite(errors).any():
        label = 1 if weights[y == 1].sum() > weights[y == 0].sum() else 0
        error = float(min(weights[y == 1].sum(), weights[y == 0].sum()))
        return (0, float(X[:, 0].max()), label, label), error

    feature, position, polarity = np.unravel_index(int(np.argmin(errors)), errors.shape)
    low, high = xs[position, feature], xs[position + 1, feature]
    threshold = (low + high) / 2
    if not threshold < high:
        threshold = low
    left_label, right_label = (0, 1) if polarity == 0 else (1, 0)
    return (int(feature), float(threshold), left_label, right_label), float(errors[feature, position, polarity])


def _stump_predict(stump: Stump, X: np.ndarray) -> np.ndarray:
    feature, threshold, left_label, right_label = stump
    return np.where(X[:, feature] <= threshold, left_label, right_label)


def adaboost_round(X: np.ndarray, y: np.ndarray, weights: np.ndarray) -> Tuple[Stump, float, float, np.ndarray]:
    """
    Uma rodada: (stump, ε, α, pesos atualizados e normalizados).

    α = ½·ln((1−ε)/ε); com ε = 0, ε é limitado a MIN_ADABOOST_ERROR.
    """
    weights = weights / weights.sum()
    stump, error = best_stump(X, y, weights)
    epsilon = error
    alpha = 0.5 * math.log((1 - epsilon) / max(epsilon, MIN_ADABOOST_ERROR)) if epsilon < 1 else 0.0
    agreement = _signs(y) * _signs(_stump_predict(stump, X))
    updated = weights * np.exp(-alpha * agreement)
    return stump, epsilon, alpha, updated / updated.sum()


def fit_adaboost(X, y, hp: Optional[AdaBoostParams] = None, seed: Optional[int] = None) -> TrainedModel:
    """AdaBoost discreto; para se ε >= 0.5 (rodada descartada) ou ε = 0 (rodada mantida)."""
    hp = hp or AdaBoostParams()
    X, y = _check_training(X, y)
    weights = np.full(X.shape[0], 1.0 / X.shape[0])
    stumps, alphas = [], []
    for round_index in range(hp.rounds):
        stump, epsilon, alpha, new_weights = adaboost_round(X, y, weights)
        if epsilon >= 0.5:
            logger.debug(f"adaboost: ε={epsilon:.4f} na rodada {round_index}; parando")
            break
        stumps.append(stump)
        alphas.append(alpha)
        weights = new_weights
        if epsilon == 0:
            break
    if not stumps:
        logger.warning("adaboost: nenhuma rodada com ε < 0.5; o modelo prediz sempre 0")

    state = StumpEnsembleState(
        features=[s[0] for s in stumps],
        thresholds=[s[1] for s in stumps],
        left_labels=[s[2] for s in stumps],
        right_labels=[s[3] for s in stumps],
        alphas=alphas,
    )
    return _model(ClassifierKind.ADABOOST, hp, X, state)


# --- Random forest ---

def majority_leaf(y: np.ndarray) -> Callable[[np.ndarray], float]:
    """Folha de classificação: rótulo majoritário, empate -> 0."""
    return lambda rows: 1.0 if y[rows].mean() > 0.5 else 0.0


def fit_cart(X, y, *, max_depth: Optional[int] = None, max_features: Optional[int] = None, rng=None, rows=None):
    """Árvore CART de classificação (Gini) sobre o grower compartilhado."""
    y = np.asarray(y)
    labels = y.astype(float)
    return grow_tree(
        X, labels, np.ones_like(labels), majority_leaf(y),
        max_depth=max_depth, max_features=max_features, rng=rng, rows=rows,
    )


def fit_random_forest(X, y, hp: Optional[RandomForestParams] = None, seed: int = 0) -> TrainedModel:
    """
    Bagging de árvores CART. Cada árvore usa um gerador próprio derivado de
    (seed, índice da árvore) para o bootstrap e o sorteio de features por nó.
    """
    hp = hp or RandomForestParams()
    X, y = _check_training(X, y)
    n, d = X.shape
    per_split = hp.features_per_split or default_features_per_split(d)
    trees = []
    for child in np.random.SeedSequence(seed).spawn(hp.trees):
        rng = np.random.default_rng(child)
        rows = rng.integers(0, n, size=n) if hp.bootstrap else None
        trees.append(fit_cart(X, y, max_depth=hp.max_depth, max_features=per_split, rng=rng, rows=rows))
    return _model(ClassifierKind.RANDOM_FOREST, hp, X, ForestState(trees=trees), seed=seed)


# --- Boosting (primeira e segunda ordem) ---

def _newton_leaf(numerator: np.ndarray, hessian: np.ndarray, reg_lambda: float = 0.0) -> float:
    denominator = hessian.sum() + reg_lambda
    if abs(denominator) < NEWTON_MIN_HESSIAN:
        return 0.0
    return float(numerator.sum() / denominator)


def base_score(y: np.ndarray) -> float:
    """F₀ = log(p/(1−p)) com p a fração de rótulos 1."""
    p = float(np.mean(y))
    return math.log(p / (1 - p))


def fit_gradient_boost(X, y, hp: Optional[GradientBoostParams] = None, seed: Optional[int] = None) -> TrainedModel:
    """
    Boosting logístico: cada árvore (divisões por redução de variância) ajusta
    os resíduos y − σ(F); cada folha recebe o passo de Newton Σr / Σσ(1−σ).
    """
    hp = hp or GradientBoostParams()
    X, y = _check_training(X, y)
    f0 = base_score(y)
    raw = np.full(X.shape[0], f0)
    ones = np.ones(X.shape[0])
    trees, losses = [], [log_loss(y, raw)]
    for _ in range(hp.trees):
        prob = expit(raw)
        residual = y - prob
        hessian = prob * (1 - prob)
        tree = grow_tree(
            X, residual, ones,
            lambda rows: _newton_leaf(residual[rows], hessian[rows]),
            max_depth=hp.depth,
        )
        raw = raw + hp.learning_rate * predict_tree(tree, X)
        trees.append(tree)
        losses.append(log_loss(y, raw))
    state = BoostState(
        family="gradient_boost", base_score=f0, learning_rate=hp.learning_rate, trees=trees, train_loss=losses,
    )
    return _model(ClassifierKind.GRADIENT_BOOST, hp, X, state)


def fit_second_order_boost(X, y, hp: Optional[SecondOrderBoostParams] = None, seed: Optional[int] = None) -> TrainedModel:
    """
    Boosting regularizado de segunda ordem: g = σ(F) − y, h = σ(F)(1 − σ(F)),
    ganho ½[G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)], folha −G/(H+λ).
    """
    hp = hp or SecondOrderBoostParams()
    X, y = _check_training(X, y)
    f0 = base_score(y)
    raw = np.full(X.shape[0], f0)
    trees, losses = [], [log_loss(y, raw)]
    for _ in range(hp.trees):
        prob = expit(raw)
        grad = prob - y
        hess = prob * (1 - prob)
        tree = grow_tree(
            X, grad, hess,
            lambda rows: -_newton_leaf(grad[rows], hess[rows], hp.reg_lambda),
            max_depth=hp.depth,
            reg_lambda=hp.reg_lambda,
            scale=0.5,
            min_split_gain=hp.min_split_gain,
        )
        raw = raw + hp.learning_rate * predict_tree(tree, X)
        trees.append(tree)
        losses.append(log_loss(y, raw))
    state = BoostState(
        family="second_order_boost", base_score=f0, learning_rate=hp.learning_rate, trees=trees, train_loss=losses,
    )
    return _model(ClassifierKind.SECOND_ORDER_BOOST, hp, X, state)


# --- Predição ---

def _check_query(model: TrainedModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ArgumentError(f"X com shape {X.shape}; o modelo foi treinado com {model.n_features} features")
    return X


def decision_function(model: TrainedModel, X) -> np.ndarray:
    """Escore real por linha; o rótulo previsto é 1 exatamente quando o escore é > 0."""
    X = _apply_standardization(_check_query(model, X), model.standardization)
    state = model.state

    if isinstance(state, NaiveBayesState):
        jll = _joint_log_likelihood(state, X)
        return jll[:, 1] - jll[:, 0]
    if isinstance(state, KnnState):
        train_y = np.asarray(state.train_y)
        return train_y[_neighbors(state, X)].mean(axis=1) - 0.5
    if isinstance(state, LinearState):
        return X @ np.asarray(state.weights) + state.bias
    if isinstance(state, KernelState):
        if not state.coef:
            return np.zeros(X.shape[0])
        return rbf_kernel(X, np.asarray(state.support), state.gamma) @ np.asarray(state.coef)
    if isinstance(state, StumpEnsembleState):
        score = np.zeros(X.shape[0])
        for stump in zip(state.features, state.thresholds, state.left_labels, state.right_labels, state.alphas):
            score += stump[4] * _signs(_stump_predict(stump[:4], X))
        return score
    if isinstance(state, ForestState):
        votes = np.mean([predict_tree(tree, X) for tree in state.trees], axis=0)
        return votes - 0.5
    if isinstance(state, BoostState):
        raw = np.full(X.shape[0], state.base_score)
        for tree in state.trees:
            raw = raw + state.learning_rate * predict_tree(tree, X)
        return raw
    raise ArgumentError(f"modelo sem parâmetros reconhecidos: {model.kind}")


def predict(model: TrainedModel, X) -> np.ndarray:
    """Rótulos 0/1; aplica antes a padronização guardada no modelo, se houver."""
    return (decision_function(model, X) > 0).astype(np.int64)


def accuracy(pred: Sequence[int], truth: Sequence[int]) -> float:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1 or pred.size < 1:
        raise ArgumentError(f"predições {pred.shape} e rótulos {truth.shape} devem ter o mesmo tamanho >= 1")
    return float(np.mean(pred == truth))


# --- Registro ---

FITTERS: Dict[ClassifierKind, Callable[..., TrainedModel]] = {
    ClassifierKind.GAUSSIAN_NB: fit_gaussian_nb,
    ClassifierKind.KNN: fit_knn,
    ClassifierKind.LINEAR_SVM: fit_linear_svm,
    ClassifierKind.RBF_SVM: fit_rbf_svm,
    ClassifierKind.ADABOOST: fit_adaboost,
    ClassifierKind.RANDOM_FOREST: fit_random_forest,
    ClassifierKind.GRADIENT_BOOST: fit_gradient_boost,
    ClassifierKind.SECOND_ORDER_BOOST: fit_second_order_boost,
}


def fit(kind: ClassifierKind, X, y, hp: Optional[Hyperparams] = None, seed: int = 0) -> TrainedModel:
    """Ajusta a família `kind` com seus hiperparâmetros em `hp`."""
    kind = ClassifierKind(kind)
    hp = hp or Hyperparams()
    return FITTERS[kind](X, y, hp.for_kind(kind), seed=seed)
