import csv

import numpy as np
import pytest

from errors import ArgumentError, ContainerIOError, PipelineError, StratificationError
from schemas.bench_schemas import BenchmarkConfig, Condition, RunReport
from schemas.classifier_schemas import ClassifierKind, Hyperparams, LinearSvmParams
from schemas.recording_schemas import GeneratorConfig
from services import bench
from services.dataio import generate_synthetic
from services.dsp import extract_features
from services.segmentation import DEFAULT_RATIOS, split_halves, split_train_val_test

GNB = ClassifierKind.GAUSSIAN_NB
DIGEST = "0" * 16


@pytest.fixture
def bench_features(bench_recordings):
    return extract_features(bench_recordings)


def _quick_hp():
    return Hyperparams(linear_svm=LinearSvmParams(epochs=5))


# --- combine_weighted ---

def test_combine_published_rows():
    assert bench.combine_weighted(94.6, 120, 91.4, 120) == pytest.approx(93.0, abs=1e-9)
    assert bench.combine_weighted(98.6, 57, 97.6, 57) == pytest.approx(98.1, abs=1e-9)


@pytest.mark.parametrize("n_1h, n_2h", [(1, 1), (3, 17), (540, 539)])
def test_combine_equal_inputs(n_1h, n_2h):
    assert bench.combine_weighted(87.3, n_1h, 87.3, n_2h) == 87.3


def test_combine_weights_by_test_size():
    assert bench.combine_weighted(90.0, 3, 80.0, 1) == pytest.approx(87.5)


def test_combine_stays_between_halves():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a, b = rng.uniform(0, 100, 2)
        n, m = rng.integers(1, 500, 2)
        combined = bench.combine_weighted(a, int(n), b, int(m))
        assert min(a, b) <= combined <= max(a, b)


@pytest.mark.parametrize("args", [(90.0, 0, 80.0, 5), (90.0, 5, 80.0, 0), (100.5, 5, 80.0, 5), (90.0, 5, -1.0, 5)])
def test_combine_rejects_bad_input(args):
    with pytest.raises(ArgumentError):
        bench.combine_weighted(*args)


@pytest.mark.parametrize("kind", list(ClassifierKind))
def test_published_table_arithmetic(kind):
    row = bench.PUBLISHED_ACCURACIES[kind.value]
    combined = bench.combine_weighted(row["1h"], 1, row["2h"], 1)
    # Algumas linhas foram arredondadas a partir de valores por metade não arredondados.
    assert abs(combined - row["1h+2h"]) <= 0.05 + 1e-9


# --- run_condition ---

def test_twoheads_combined_matches_its_halves(bench_features):
    for seed in range(3):
        result = bench.run_condition(bench_features, Condition.TWOHEADS, GNB, k=4, seed=seed)
        assert result.accuracy == bench.combine_weighted(result.acc_1h, result.n_test_1h, result.acc_2h, result.n_test_2h)
        assert result.n_test == result.n_test_1h + result.n_test_2h
        assert len(result.selected_1h) == len(result.selected_2h) == 4
        assert result.runtime_s >= 0
        assert 0 <= result.accuracy <= 100


@pytest.mark.parametrize("kind", [ClassifierKind.GAUSSIAN_NB, ClassifierKind.KNN, ClassifierKind.LINEAR_SVM])
def test_fs_with_all_features_equals_sota(kind, bench_features):
    hp = _quick_hp()
    sota = bench.run_condition(bench_features, Condition.SOTA, kind, hp=hp, seed=2)
    fs = bench.run_condition(bench_features, Condition.FS, kind, k=bench_features.n_cols, hp=hp, seed=2)
    assert fs.accuracy == sota.accuracy
    assert fs.selected == list(range(bench_features.n_cols))
    assert sota.selected is None


def test_partition_sizes_are_reported(bench_features):
    result = bench.run_condition(bench_features, Condition.SOTA, GNB, seed=0)
    assert (result.n_train, result.n_val, result.n_test) == (56, 12, 12)


def test_fitted_models_ignore_non_training_rows(bench_features):
    X = np.asarray(bench_features.values, dtype=float)
    y = np.asarray(bench_features.labels).astype(np.int64)
    hp = _quick_hp()
    for seed in range(20):
        split = split_train_val_test(y, DEFAULT_RATIOS, seed)
        mutated = X.copy()
        outside = split.val + split.test
        mutated[outside] = np.random.default_rng(seed).normal(size=(len(outside), X.shape[1])) * 1e3
        for kind in (GNB, ClassifierKind.LINEAR_SVM):
            selector, model = bench.fit_pipeline(X, y, split.train, kind, True, 3, hp, seed)
            selector_m, model_m = bench.fit_pipeline(mutated, y, split.train, kind, True, 3, hp, seed)
            assert selector.model_dump_json() == selector_m.model_dump_json()
            assert model.model_dump_json() == model_m.model_dump_json()


def test_half_without_both_labels(bench_features):
    broken = bench_features.take_rows(np.arange(bench_features.n_rows))
    broken.labels[split_halves(broken).half_2h] = 1
    with pytest.raises(StratificationError, match="2h"):
        bench.run_condition(broken, Condition.TWOHEADS, GNB, k=2)


# --- run_benchmark ---

def test_one_cell_keeps_every_run(bench_recordings):
    config = BenchmarkConfig(kinds=[GNB], conditions=[Condition.SOTA])
    report = bench.run_benchmark(bench_recordings, config, digest=DIGEST)
    assert len(report.cells) == 1
    cell = report.cells[0]
    assert [run.seed for run in cell.runs] == [0, 1, 2, 3, 4]
    assert cell.mean_accuracy == pytest.approx(sum(cell.accuracies) / 5)
    assert report.n_features == 8
    assert report.timing_scope == bench.TIMING_SCOPE
    assert report.config.k == 50


def test_cells_follow_kind_then_condition(bench_recordings):
    config = BenchmarkConfig(kinds=[ClassifierKind.KNN, GNB], seeds=[0], hyperparams=_quick_hp())
    report = bench.run_benchmark(bench_recordings, config, digest=DIGEST)
    order = [(cell.classifier, cell.condition) for cell in report.cells]
    assert order == [(kind, condition) for kind in config.kinds for condition in Condition]
    twoheads = report.cell(GNB, Condition.TWOHEADS)
    assert twoheads.mean_acc_1h is not None and twoheads.mean_acc_2h is not None
    assert report.cell(GNB, Condition.FS).mean_acc_1h is None


def test_reports_are_deterministic(bench_recordings):
    config = BenchmarkConfig(kinds=[GNB, ClassifierKind.KNN], k=3, seeds=[0, 1])
    first = bench.run_benchmark(bench_recordings, config)
    second = bench.run_benchmark(bench_recordings, config)
    threaded = bench.run_benchmark(bench_recordings, config, threads=3)
    assert bench.strip_wall_clock(first) == bench.strip_wall_clock(second) == bench.strip_wall_clock(threaded)
    assert len(first.dataset_digest) == 16


def test_cell_errors_carry_coordinates(bench_recordings):
    features = extract_features(bench_recordings)
    features.labels[split_halves(features).half_1h] = 0
    config = BenchmarkConfig(kinds=[GNB], conditions=[Condition.TWOHEADS], seeds=[3])
    with pytest.raises(PipelineError) as info:
        bench.run_benchmark(bench_recordings, config, digest=DIGEST, features=features)
    assert (info.value.kind, info.value.condition, info.value.seed) == ("gaussian_nb", "twoheads", 3)
    assert isinstance(info.value.cause, StratificationError)
    assert "1h" in str(info.value)


# --- emit_report ---

@pytest.fixture
def small_report(bench_recordings):
    config = BenchmarkConfig(kinds=[GNB], k=4, seeds=[0, 1])
    return bench.run_benchmark(bench_recordings, config, digest=DIGEST)


def test_json_report_round_trips(tmp_path, small_report):
    path = tmp_path / "report.json"
    bench.emit_report(small_report, path, "json")
    assert RunReport.model_validate_json(path.read_text()) == small_report


def test_csv_report_layout(tmp_path, small_report):
    path = tmp_path / "report.csv"
    bench.emit_report(small_report, path, "csv")
    with open(path, newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert list(rows[0].keys()) == bench.CSV_COLUMNS
    assert [row["condition"] for row in rows] == ["sota", "fs", "twoheads"]
    assert rows[0]["acc_1h"] == rows[0]["acc_2h"] == ""
    assert float(rows[2]["acc_1h"]) == small_report.cells[2].mean_acc_1h
    assert float(rows[2]["mean_acc"]) == small_report.cells[2].mean_accuracy


def test_csv_has_a_row_per_cell(tmp_path, small_report):
    template = small_report.cells
    cells = [cell.model_copy(update={"classifier": kind}) for kind in ClassifierKind for cell in template]
    report = small_report.model_copy(update={"cells": cells})
    path = tmp_path / "full.csv"
    bench.emit_report(report, path, "csv")
    assert len(path.read_text().splitlines()) == 1 + 24


def test_unknown_format_rejected(tmp_path, small_report):
    with pytest.raises(ArgumentError):
        bench.emit_report(small_report, tmp_path / "r.xml", "xml")


def test_unwritable_report_path(tmp_path, small_report):
    with pytest.raises(ContainerIOError):
        bench.emit_report(small_report, tmp_path / "missing" / "r.json", "json")


def test_strip_wall_clock_drops_only_timings(small_report):
    stripped = bench.strip_wall_clock(small_report)
    assert "mean_runtime_s" not in stripped["cells"][0]
    assert "runtime_s" not in stripped["cells"][0]["runs"][0]
    assert stripped["cells"][0]["mean_accuracy"] == small_report.cells[0].mean_accuracy


# --- Fixture completo ---

@pytest.fixture(scope="module")
def fixture_report(fixture_recordings, fixture_features):
    return bench.run_benchmark(fixture_recordings, BenchmarkConfig(), digest=DIGEST, features=fixture_features)


@pytest.mark.slow
@pytest.mark.parametrize("kind", list(ClassifierKind))
def test_twoheads_not_worse_than_fs_on_fixture(kind, fixture_report):
    twoheads = fixture_report.cell(kind, Condition.TWOHEADS).mean_accuracy
    fs = fixture_report.cell(kind, Condition.FS).mean_accuracy
    assert twoheads >= fs - 0.5


@pytest.mark.slow
def test_knn_twoheads_faster_than_sota_on_fixture(fixture_report):
    twoheads = fixture_report.cell(ClassifierKind.KNN, Condition.TWOHEADS).mean_runtime_s
    sota = fixture_report.cell(ClassifierKind.KNN, Condition.SOTA).mean_runtime_s
    assert twoheads < sota


@pytest.mark.slow
def test_linear_svm_selection_faster_than_all_features_on_fixture(fixture_report):
    fs = fixture_report.cell(ClassifierKind.LINEAR_SVM, Condition.FS).mean_runtime_s
    sota = fixture_report.cell(ClassifierKind.LINEAR_SVM, Condition.SOTA).mean_runtime_s
    assert fs < sota


@pytest.fixture(scope="module")
def weak_contrast_report():
    # Com o contraste padrão as acurácias saturam em ~100% e não há margem a medir.
    recordings = generate_synthetic(GeneratorConfig(seed=42, contrast=0.05))
    config = BenchmarkConfig(
        kinds=[GNB, ClassifierKind.LINEAR_SVM],
        conditions=[Condition.FS, Condition.TWOHEADS],
    )
    return bench.run_benchmark(recordings, config, digest=DIGEST)


@pytest.mark.slow
@pytest.mark.parametrize("kind", [GNB, ClassifierKind.LINEAR_SVM])
def test_twoheads_beats_pooled_selection_under_drift(kind, weak_contrast_report):
    twoheads = weak_contrast_report.cell(kind, Condition.TWOHEADS).mean_accuracy
    fs = weak_contrast_report.cell(kind, Condition.FS).mean_accuracy
    assert twoheads >= fs + 2.0
