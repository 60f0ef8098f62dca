# services/featsel.py
"""Seleção univariada de features pelo F da ANOVA de um fator (top-k)."""
import logging
import math
from typing import List, Sequence

import numpy as np

from errors import ArgumentError, StratificationError
from schemas.feature_schemas import FeatureName
from schemas.selection_schemas import RankedFeature, SelectorModel

logger = logging.getLogger(__name__)

DEFAULT_K = 50


def f_scores(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    F da ANOVA por coluna, com os grupos definidos pelos valores de y.

    F = [SSB/(g−1)] / [SSW/(N−g)]; SSW = 0 dá +inf se SSB > 0 e 0 se SSB = 0.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ArgumentError(f"X {X.shape} e y {y.shape} incompatíveis")
    classes = np.unique(y)
    g, N = classes.size, X.shape[0]
    if g < 2:
        raise ArgumentError("são necessários pelo menos 2 grupos")
    if N <= g:
        raise ArgumentError(f"N={N} deve ser maior que o número de grupos g={g}")

    grand = X.mean(axis=0)
    ssb = np.zeros(X.shape[1])
    ssw = np.zeros(X.shape[1])
    constant_within = np.ones(X.shape[1], dtype=bool)
    for label in classes:
        group = X[y == label]
        mean = group.mean(axis=0)
        ssb += group.shape[0] * (mean - grand) ** 2
        ssw += ((group - mean) ** 2).sum(axis=0)
        constant_within &= np.ptp(group, axis=0) == 0
    # Colunas constantes não podem herdar resíduos de arredondamento das médias.
    ssw[constant_within] = 0.0
    ssb[np.ptp(X, axis=0) == 0] = 0.0

    msb = ssb / (g - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = msb / (ssw / (N - g))
    scores[(ssw == 0) & (ssb > 0)] = np.inf
    scores[(ssw == 0) & (ssb == 0)] = 0.0
    return scores


def anova_f(groups: Sequence[Sequence[float]]) -> float:
    """F da ANOVA de um fator para uma lista de grupos de valores."""
    if len(groups) < 2:
        raise ArgumentError("são necessários pelo menos 2 grupos")
    if any(len(group) == 0 for group in groups):
        raise ArgumentError("todos os grupos devem ser não vazios")
    values = np.concatenate([np.asarray(group, dtype=float) for group in groups])
    labels = np.concatenate([np.full(len(group), j) for j, group in enumerate(groups)])
    return float(f_scores(values[:, None], labels)[0])


def rank_order(scores: np.ndarray) -> np.ndarray:
    """Índices por score decrescente; empates (inclusive +inf) pelo menor índice."""
    scores = np.asarray(scores, dtype=float)
    return np.lexsort((np.arange(scores.size), -scores))


def fit_selector(X: np.ndarray, y: np.ndarray, k: int = DEFAULT_K) -> SelectorModel:
    """Ajusta o seletor top-k apenas sobre as linhas recebidas (as de treino)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if np.unique(y).size < 2:
        raise StratificationError("a seleção de features exige os dois rótulos")
    if k < 1:
        raise ArgumentError(f"k deve ser >= 1, recebido {k}")
    n_features = X.shape[1]
    warnings: List[str] = []
    if k > n_features:
        message = f"k={k} maior que o número de features ({n_features}); usando {n_features}"
        logger.warning(message)
        warnings.append(message)
        k = n_features

    scores = f_scores(X, y)
    selected = np.sort(rank_order(scores)[:k])
    return SelectorModel(
        scores=scores.tolist(),
        k=k,
        selected=selected.tolist(),
        fitted_on=int(X.shape[0]),
        warnings=warnings,
    )


def transform(X: np.ndarray, model: SelectorModel) -> np.ndarray:
    """Restringe X às colunas selecionadas, em ordem crescente."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[1] != len(model.scores):
        raise ArgumentError(f"X com {X.shape[-1]} colunas; o seletor foi ajustado com {len(model.scores)}")
    return X[:, model.selected]


def rank_features(model: SelectorModel, feature_names: List[FeatureName], top: int) -> List[RankedFeature]:
    """Top-N features por score, para o `inspect`."""
    if top < 1:
        raise ArgumentError("top deve ser >= 1")
    order = rank_order(np.asarray(model.scores))[:top]
    return [
        RankedFeature(
            rank=rank,
            channel=feature_names[i].channel,
            kind=feature_names[i].kind,
            score=model.scores[i],
        )
        for rank, i in enumerate(order, start=1)
    ]


def format_ranking(rows: List[RankedFeature]) -> str:
    lines = [f"{'rank':>4}  {'channel':>7}  {'kind':<9}  {'F':>14}"]
    for row in rows:
        score = "inf" if math.isinf(row.score) else f"{row.score:.6g}"
        lines.append(f"{row.rank:>4}  {row.channel:>7}  {row.kind:<9}  {score:>14}")
    return "\n".join(lines)
