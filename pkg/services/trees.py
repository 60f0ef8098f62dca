# services/trees.py
"""
Crescimento de árvores binárias compartilhado por random_forest, gradient_boost
e second_order_boost.

Toda divisão é avaliada pelo mesmo critério de soma de gradientes/hessianas:

    ganho = escala · [G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)]

Com g = y, h = 1 e λ = 0 o critério é proporcional à redução de Gini (CART de
classificação); com g = resíduo e h = 1, à redução de variância; com g, h da
perda logística, escala ½ e λ > 0, ao ganho regularizado de segunda ordem.
"""
import math
from typing import Callable, List, Optional, Tuple

import numpy as np

from schemas.classifier_schemas import TreeArrays


LeafValue = Callable[[np.ndarray], float]


def split_gain(grad_left, hess_left, grad_right, hess_right, reg_lambda: float = 0.0, scale: float = 0.5):
    """Ganho de uma divisão a partir das somas de gradientes e hessianas de cada lado."""
    grad_total = grad_left + grad_right
    hess_total = hess_left + hess_right
    return scale * (
        grad_left**2 / (hess_left + reg_lambda)
        + grad_right**2 / (hess_right + reg_lambda)
        - grad_total**2 / (hess_total + reg_lambda)
    )


def best_split(
    X: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    reg_lambda: float = 0.0,
    scale: float = 1.0,
) -> Optional[Tuple[int, float, float]]:
    """
    Busca exaustiva, vetorizada em todas as colunas de X, do melhor limiar.

    Retorna (coluna, limiar, ganho) ou None quando nenhuma coluna tem dois
    valores distintos. Empates de ganho vão para a menor coluna e, dentro
    dela, para o menor limiar. O limiar é o ponto médio entre valores
    ordenados consecutivos (o menor deles, se o arredondamento atingir o maior).
    """
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    grad_cum = np.cumsum(grad[order], axis=0)
    hess_cum = np.cumsum(hess[order], axis=0)
    grad_left, hess_left = grad_cum[:-1], hess_cum[:-1]
    grad_right = grad_cum[-1] - grad_left
    hess_right = hess_cum[-1] - hess_left

    with np.errstate(divide="ignore", invalid="ignore"):
        gain = split_gain(grad_left, hess_left, grad_right, hess_right, reg_lambda, scale)
    gain[~(xs[1:] > xs[:-1]) | ~np.isfinite(gain)] = -np.inf
    if gain.size == 0:
        return None

    # Varredura coluna a coluna: o primeiro máximo é o de menor coluna e menor limiar.
    by_column = gain.T
    column, position = np.unravel_index(int(np.argmax(by_column)), by_column.shape)
    best = by_column[column, position]
    if best == -np.inf:
        return None
    low, high = xs[position, column], xs[position + 1, column]
    threshold = (low + high) / 2
    if not threshold < high:
        threshold = low
    return int(column), float(threshold), float(best)


def _candidate_features(n_features: int, max_features: Optional[int], rng: Optional[np.random.Generator]) -> np.ndarray:
    if max_features is None or max_features >= n_features:
        return np.arange(n_features)
    return np.sort(rng.choice(n_features, size=max_features, replace=False))


def grow_tree(
    X: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    leaf_value: LeafValue,
    *,
    max_depth: Optional[int] = None,
    reg_lambda: float = 0.0,
    scale: float = 1.0,
    min_split_gain: float = 0.0,
    max_features: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    rows: Optional[np.ndarray] = None,
) -> TreeArrays:
    """
    Cresce uma árvore em profundidade, filho esquerdo primeiro.

    `rows` pode repetir índices (amostra bootstrap). Um nó vira folha quando
    tem menos de 2 linhas, atinge max_depth ou nenhuma divisão tem ganho
    maior que min_split_gain; o valor da folha é leaf_value(linhas do nó).
    """
    X = np.asarray(X, dtype=float)
    rows = np.arange(X.shape[0]) if rows is None else np.asarray(rows, dtype=np.int64)
    feature: List[int] = []
    threshold: List[float] = []
    left: List[int] = []
    right: List[int] = []
    value: List[float] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    stack = [(new_node(), rows, 0)]
    while stack:
        node, idx, depth = stack.pop()
        split = None
        if idx.size >= 2 and (max_depth is None or depth < max_depth):
            candidates = _candidate_features(X.shape[1], max_features, rng)
            found = best_split(X[np.ix_(idx, candidates)], grad[idx], hess[idx], reg_lambda, scale)
            if found is not None and found[2] > min_split_gain:
                split = (int(candidates[found[0]]), found[1])
        if split is None:
            value[node] = float(leaf_value(idx))
            continue

        column, cut = split
        goes_left = X[idx, column] <= cut
        left_node, right_node = new_node(), new_node()
        feature[node], threshold[node] = column, cut
        left[node], right[node] = left_node, right_node
        stack.append((right_node, idx[~goes_left], depth + 1))
        stack.append((left_node, idx[goes_left], depth + 1))

    return TreeArrays(feature=feature, threshold=threshold, left=left, right=right, value=value)


def predict_tree(tree: TreeArrays, X: np.ndarray) -> np.ndarray:
    """Valor da folha alcançada por cada linha de X."""
    X = np.asarray(X, dtype=float)
    feature = np.asarray(tree.feature, dtype=np.int64)
    threshold = np.asarray(tree.threshold, dtype=float)
    left = np.asarray(tree.left, dtype=np.int64)
    right = np.asarray(tree.right, dtype=np.int64)
    node = np.zeros(X.shape[0], dtype=np.int64)
    active = np.flatnonzero(feature[node] >= 0)
    while active.size:
        current = node[active]
        goes_left = X[active, feature[current]] <= threshold[current]
        node[active] = np.where(goes_left, left[current], right[current])
        active = active[feature[node[active]] >= 0]
    return np.asarray(tree.value, dtype=float)[node]


def tree_depth(tree: TreeArrays) -> int:
    """Profundidade máxima (raiz folha = 0)."""
    depth = [0] * len(tree.feature)
    for node, f in enumerate(tree.feature):
        if f >= 0:
            depth[tree.left[node]] = depth[tree.right[node]] = depth[node] + 1
    return max(depth)


def default_features_per_split(n_features: int) -> int:
    return max(1, math.ceil(math.sqrt(n_features)))
