# services/segmentation.py
"""Divisão Two Heads (1H/2H por sujeito) e partição estratificada treino/validação/teste."""
import math
from fractions import Fraction
from typing import List, Protocol, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from errors import ArgumentError, DataValidationError, StratificationError

DEFAULT_RATIOS: Tuple[float, float, float] = (0.7, 0.15, 0.15)
MIN_SPLIT_ROWS = 10


class HalfAssignment(BaseModel):
    half_1h: List[int]
    half_2h: List[int]

    def rows(self, half: str) -> List[int]:
        if half == "1h":
            return self.half_1h
        if half == "2h":
            return self.half_2h
        raise ArgumentError(f"metade inválida '{half}' (use '1h' ou '2h')")


class SplitIndices(BaseModel):
    train: List[int]
    val: List[int]
    test: List[int]
    ratios: Tuple[float, float, float] = DEFAULT_RATIOS
    seed: int


class HasChronology(Protocol):
    subject_ids: np.ndarray
    chrono_indices: np.ndarray


def split_halves(data: HasChronology) -> HalfAssignment:
    """
    Para cada sujeito com m trials, os ⌈m/2⌉ primeiros em ordem cronológica
    vão para 1H e o restante para 2H. Aceita RecordingSet ou FeatureMatrix.
    """
    subjects = np.asarray(data.subject_ids)
    chrono = np.asarray(data.chrono_indices).astype(np.int64)
    in_first = np.zeros(subjects.shape[0], dtype=bool)
    for subject in np.unique(subjects):
        rows = np.flatnonzero(subjects == subject)
        if rows.size < 2:
            raise DataValidationError(f"subject {int(subject)} tem {rows.size} trial(s); são necessários pelo menos 2")
        cutoff = math.ceil(rows.size / 2)
        # Posição cronológica de cada linha dentro do sujeito.
        rank = np.empty(rows.size, dtype=np.int64)
        rank[np.argsort(chrono[rows], kind="stable")] = np.arange(rows.size)
        in_first[rows[rank < cutoff]] = True
    return HalfAssignment(
        half_1h=np.flatnonzero(in_first).tolist(),
        half_2h=np.flatnonzero(~in_first).tolist(),
    )


def largest_remainder(total: int, ratios: Sequence[Fraction]) -> List[int]:
    """Rateio inteiro de `total` pelos `ratios`; empates vão para a partição anterior (treino primeiro)."""
    quotas = [total * r for r in ratios]
    counts = [math.floor(q) for q in quotas]
    leftover = total - sum(counts)
    order = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:leftover]:
        counts[i] += 1
    return counts


def _exact_ratios(ratios: Sequence[float]) -> List[Fraction]:
    if len(ratios) != 3:
        raise ArgumentError("ratios deve ter 3 valores (treino, validação, teste)")
    exact = [Fraction(str(r)) for r in ratios]
    if any(r < 0 for r in exact) or sum(exact) != 1:
        raise ArgumentError(f"ratios {tuple(ratios)} devem ser não negativos e somar 1")
    return exact


def split_train_val_test(labels: Sequence[int], ratios: Sequence[float] = DEFAULT_RATIOS, seed: int = 0) -> SplitIndices:
    """
    Partição estratificada e determinística (labels, seed).

    Em cada grupo de rótulo os índices são embaralhados pelo gerador da seed.
    Os tamanhos saem do maior resto aplicado às contagens acumuladas dos grupos
    (rótulos em ordem crescente), de modo que o total de cada partição também
    respeite o maior resto sobre n.
    """
    y = np.asarray(labels)
    n = y.shape[0]
    if n < MIN_SPLIT_ROWS:
        raise ArgumentError(f"são necessárias pelo menos {MIN_SPLIT_ROWS} linhas; recebidas {n}")
    classes = np.unique(y)
    if classes.size < 2:
        raise StratificationError("a partição estratificada exige os dois rótulos")
    exact = _exact_ratios(ratios)

    rng = np.random.default_rng(seed)
    parts: List[List[int]] = [[], [], []]
    cumulative = 0
    previous = [0, 0, 0]
    for label in classes:
        members = rng.permutation(np.flatnonzero(y == label))
        cumulative += members.size
        target = largest_remainder(cumulative, exact)
        counts = [t - p for t, p in zip(target, previous)]
        counts = _repair(counts)
        previous = [p + c for p, c in zip(previous, counts)]
        start = 0
        for part, count in zip(parts, counts):
            part.extend(members[start:start + count].tolist())
            start += count

    train, val, test = (sorted(p) for p in parts)
    for label in classes:
        if not np.any(y[train] == label):
            raise StratificationError(f"rótulo {int(label)} ausente no treino")
    return SplitIndices(train=train, val=val, test=test, ratios=tuple(ratios), seed=seed)


def _repair(counts: List[int]) -> List[int]:
    # O maior resto não é monotônico; um grupo pode herdar −1 numa partição.
    counts = list(counts)
    while min(counts) < 0:
        low = counts.index(min(counts))
        high = counts.index(max(counts))
        counts[low] += 1
        counts[high] -= 1
    return counts
