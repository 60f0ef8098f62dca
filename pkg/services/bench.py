# services/bench.py
"""
Orquestração do benchmark: condições sota / fs / twoheads, execuções com seeds,
combinação ponderada das metades, tempo de execução e emissão de relatórios.
"""
import csv
import logging
import statistics
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from time import perf_counter
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import ArgumentError, ContainerIOError, PipelineError, StratificationError
from schemas.bench_schemas import BenchmarkConfig, CellReport, Condition, RunReport, RunResult, TIMING_SCOPE
from schemas.classifier_schemas import ClassifierKind, Hyperparams, TrainedModel
from schemas.feature_schemas import FeatureMatrix
from schemas.recording_schemas import RecordingSet
from schemas.selection_schemas import SelectorModel
from services import classifiers, featsel
from services.dataio import dataset_digest
from services.dsp import extract_features
from services.segmentation import DEFAULT_RATIOS, split_halves, split_train_val_test

logger = logging.getLogger(__name__)

# Acurácias (%) e tempos (s) publicados para o método em EEG real (tarefa
# saccade LR). Servem de referência na saída da CLI e no teste da regra de
# combinação; não são metas para o dataset sintético.
PUBLISHED_ACCURACIES: Dict[str, Dict[str, float]] = {
    "gaussian_nb": {"sota": 87.7, "fs": 90.8, "1h": 94.6, "2h": 91.4, "1h+2h": 93.0},
    "linear_svm": {"sota": 92.0, "fs": 92.1, "1h": 96.8, "2h": 88.7, "1h+2h": 92.7},
    "knn": {"sota": 90.7, "fs": 96.1, "1h": 96.9, "2h": 95.7, "1h+2h": 96.3},
    "rbf_svm": {"sota": 89.4, "fs": 96.5, "1h": 97.5, "2h": 95.9, "1h+2h": 96.7},
    "adaboost": {"sota": 96.3, "fs": 96.5, "1h": 97.7, "2h": 95.2, "1h+2h": 96.4},
    "random_forest": {"sota": 96.5, "fs": 96.9, "1h": 97.9, "2h": 96.4, "1h+2h": 97.1},
    "gradient_boost": {"sota": 97.4, "fs": 97.5, "1h": 98.2, "2h": 96.9, "1h+2h": 97.5},
    "second_order_boost": {"sota": 97.9, "fs": 98.1, "1h": 98.6, "2h": 97.6, "1h+2h": 98.1},
}

PUBLISHED_RUNTIMES_S: Dict[str, Dict[str, float]] = {
    "gaussian_nb": {"sota": 0.1, "fs": 0.1, "twoheads": 0.1},
    "linear_svm": {"sota": 15.8, "fs": 14.3, "twoheads": 7.3},
    "knn": {"sota": 0.6, "fs": 0.4, "twoheads": 0.4},
    "rbf_svm": {"sota": 17.0, "fs": 15.4, "twoheads": 3.5},
    "adaboost": {"sota": 67.7, "fs": 59.4, "twoheads": 31.4},
    "random_forest": {"sota": 10.2, "fs": 2.6, "twoheads": 3.3},
    "gradient_boost": {"sota": 147.6, "fs": 58.0, "twoheads": 70.6},
    "second_order_boost": {"sota": 30.9, "fs": 25.8, "twoheads": 14.6},
}

# Seções cronometradas nunca rodam ao mesmo tempo, mesmo com threads.
_timing_lock = threading.Lock()


def combine_weighted(acc_1h: float, n_1h: int, acc_2h: float, n_2h: int) -> float:
    """Média das acurácias (%) das metades ponderada pelos tamanhos de teste."""
    if n_1h < 1 or n_2h < 1:
        raise ArgumentError(f"contagens devem ser >= 1 (recebido {n_1h}, {n_2h})")
    for acc in (acc_1h, acc_2h):
        if not 0.0 <= acc <= 100.0:
            raise ArgumentError(f"acurácia {acc} fora de [0, 100]")
    if n_1h == n_2h:
        return (acc_1h + acc_2h) / 2
    combined = (n_1h * acc_1h + n_2h * acc_2h) / (n_1h + n_2h)
    return min(max(combined, min(acc_1h, acc_2h)), max(acc_1h, acc_2h))


def fit_pipeline(
    X: np.ndarray,
    y: np.ndarray,
    train: Sequence[int],
    kind: ClassifierKind,
    select: bool,
    k: int,
    hp: Hyperparams,
    seed: int,
) -> Tuple[Optional[SelectorModel], TrainedModel]:
    """Ajusta seletor (se `select`) e classificador usando só as linhas `train` de X."""
    rows = np.asarray(train, dtype=np.int64)
    X_train, y_train = X[rows], y[rows]
    selector = None
    if select:
        selector = featsel.fit_selector(X_train, y_train, k)
        X_train = featsel.transform(X_train, selector)
    return selector, classifiers.fit(kind, X_train, y_train, hp, seed)


def _pipeline(
    X: np.ndarray,
    y: np.ndarray,
    kind: ClassifierKind,
    select: bool,
    k: int,
    hp: Hyperparams,
    seed: int,
    ratios: Sequence[float],
) -> Tuple[float, float, Tuple[int, int, int], Optional[List[int]]]:
    """Divide, (seleciona), treina e testa. Retorna (acurácia %, segundos, tamanhos, selecionadas)."""
    split = split_train_val_test(y, ratios, seed)
    test = np.asarray(split.test)
    if test.size == 0:
        raise ArgumentError("partição de teste vazia")
    selected = None
    with _timing_lock:
        start = perf_counter()
        selector, model = fit_pipeline(X, y, split.train, kind, select, k, hp, seed)
        X_test = X[test]
        if selector is not None:
            X_test = featsel.transform(X_test, selector)
            selected = selector.selected
        pred = classifiers.predict(model, X_test)
        elapsed = perf_counter() - start
    acc = 100.0 * classifiers.accuracy(pred, y[test])
    return acc, elapsed, (len(split.train), len(split.val), len(split.test)), selected


def run_condition(
    features: FeatureMatrix,
    condition: Condition,
    kind: ClassifierKind,
    k: int = featsel.DEFAULT_K,
    hp: Optional[Hyperparams] = None,
    seed: int = 0,
    ratios: Sequence[float] = DEFAULT_RATIOS,
) -> RunResult:
    """
    Uma execução. sota: divide e treina com todas as features; fs: o seletor
    é ajustado só no treino e aplicado às partições; twoheads: o pipeline fs
    roda separadamente em cada metade (mesma seed) e as acurácias são
    combinadas pelo tamanho de teste de cada metade.
    """
    condition = Condition(condition)
    kind = ClassifierKind(kind)
    hp = hp or Hyperparams()
    X = np.asarray(features.values, dtype=float)
    y = np.asarray(features.labels).astype(np.int64)

    if condition != Condition.TWOHEADS:
        acc, elapsed, (n_train, n_val, n_test), selected = _pipeline(
            X, y, kind, condition == Condition.FS, k, hp, seed, ratios
        )
        return RunResult(
            seed=seed, accuracy=acc, runtime_s=elapsed,
            n_train=n_train, n_val=n_val, n_test=n_test, selected=selected,
        )

    halves = split_halves(features)
    per_half = {}
    for half in ("1h", "2h"):
        rows = np.asarray(halves.rows(half), dtype=np.int64)
        if np.unique(y[rows]).size < 2:
            raise StratificationError(f"metade {half} ficou com um único rótulo")
        try:
            per_half[half] = _pipeline(X[rows], y[rows], kind, True, k, hp, seed, ratios)
        except StratificationError as e:
            raise StratificationError(f"metade {half}: {e}") from e

    (acc_1h, time_1h, sizes_1h, sel_1h), (acc_2h, time_2h, sizes_2h, sel_2h) = per_half["1h"], per_half["2h"]
    return RunResult(
        seed=seed,
        accuracy=combine_weighted(acc_1h, sizes_1h[2], acc_2h, sizes_2h[2]),
        runtime_s=time_1h + time_2h,
        n_train=sizes_1h[0] + sizes_2h[0],
        n_val=sizes_1h[1] + sizes_2h[1],
        n_test=sizes_1h[2] + sizes_2h[2],
        acc_1h=acc_1h,
        acc_2h=acc_2h,
        n_test_1h=sizes_1h[2],
        n_test_2h=sizes_2h[2],
        selected_1h=sel_1h,
        selected_2h=sel_2h,
    )


def _cell_report(kind: ClassifierKind, condition: Condition, runs: List[RunResult]) -> CellReport:
    accuracies = [run.accuracy for run in runs]
    cell = CellReport(
        classifier=kind,
        condition=condition,
        mean_accuracy=statistics.fmean(accuracies),
        accuracies=accuracies,
        mean_runtime_s=statistics.fmean(run.runtime_s for run in runs),
        runs=runs,
    )
    if condition == Condition.TWOHEADS:
        cell.mean_acc_1h = statistics.fmean(run.acc_1h for run in runs)
        cell.mean_acc_2h = statistics.fmean(run.acc_2h for run in runs)
    return cell


def run_benchmark(
    data: RecordingSet,
    config: Optional[BenchmarkConfig] = None,
    threads: int = 0,
    digest: Optional[str] = None,
    features: Optional[FeatureMatrix] = None,
) -> RunReport:
    """
    Extrai as features uma vez e executa cada (classificador × condição × seed).

    Com threads > 0 as células rodam num pool, mas a agregação segue a ordem
    dos índices. Fit, seleção e predição rodam sob um lock (tempos medidos sem
    concorrência): threads aceleram a extração de features, não as células.
    """
    config = config or BenchmarkConfig()
    if config.filter_spec.sample_rate_hz != data.sample_rate_hz:
        spec = config.filter_spec.model_copy(update={"sample_rate_hz": data.sample_rate_hz})
        config = config.model_copy(update={"filter_spec": spec})
    if features is None:
        features = extract_features(data, config.filter_spec, threads)
    digest = digest or dataset_digest(data)

    cells = [(kind, condition, seed) for kind in config.kinds for condition in config.conditions for seed in config.seeds]

    def work(cell) -> RunResult:
        kind, condition, seed = cell
        try:
            return run_condition(features, condition, kind, config.k, config.hyperparams, seed, config.ratios)
        except Exception as e:
            raise PipelineError(ClassifierKind(kind).value, Condition(condition).value, seed, e) from e

    logger.info(f"Benchmark: {len(config.kinds)} classificadores × {len(config.conditions)} condições × {len(config.seeds)} seeds")
    if threads > 0:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, cells))
    else:
        results = [work(cell) for cell in cells]

    reports = []
    n_seeds = len(config.seeds)
    for i in range(0, len(results), n_seeds):
        kind, condition, _ = cells[i]
        cell = _cell_report(kind, condition, results[i:i + n_seeds])
        logger.info(f"{kind.value} × {condition.value}: {cell.mean_accuracy:.2f}% em {cell.mean_runtime_s:.3f}s")
        reports.append(cell)

    return RunReport(
        config=config,
        dataset_digest=digest,
        n_trials=features.n_rows,
        n_features=features.n_cols,
        cells=reports,
    )


CSV_COLUMNS = ["classifier", "condition", "mean_acc", "acc_1h", "acc_2h", "runtime_s"]


def _csv_value(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def emit_report(report: RunReport, path: Union[str, Path], fmt: str = "json") -> None:
    """Grava o relatório em JSON (sem perdas) ou CSV (uma linha por célula)."""
    if fmt not in ("json", "csv"):
        raise ArgumentError(f"formato desconhecido '{fmt}' (use json ou csv)")
    try:
        with open(path, "w", newline="") as handle:
            if fmt == "json":
                handle.write(report.model_dump_json(indent=2))
                handle.write("\n")
            else:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(CSV_COLUMNS)
                for cell in report.cells:
                    writer.writerow([
                        cell.classifier.value,
                        cell.condition.value,
                        _csv_value(cell.mean_accuracy),
                        _csv_value(cell.mean_acc_1h),
                        _csv_value(cell.mean_acc_2h),
                        _csv_value(cell.mean_runtime_s),
                    ])
    except OSError as e:
        raise ContainerIOError(path, f"falha ao gravar relatório: {e}") from e
    logger.info(f"Relatório {fmt} gravado em {path}")


def strip_wall_clock(report: RunReport) -> dict:
    """Relatório como dict sem os campos de tempo, para comparações de determinismo."""
    payload = report.model_dump(mode="json")
    for cell in payload["cells"]:
        cell.pop("mean_runtime_s")
        for run in cell["runs"]:
            run.pop("runtime_s")
    return payload
