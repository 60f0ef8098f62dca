import json

import pytest

import cli
from schemas.recording_schemas import GeneratorConfig
from services import dataio


@pytest.fixture
def dataset(tmp_path, bench_recordings):
    path = tmp_path / "bench.eegb"
    dataio.write_container(bench_recordings, path)
    return path


def test_generate_writes_file_and_summary(tmp_path, capsys):
    out = tmp_path / "d.eegb"
    code = cli.main(["generate", "--subjects", "2", "--trials", "4", "--channels", "3", "--samples", "16", "--out", str(out)])
    assert code == cli.EXIT_OK
    assert capsys.readouterr().out == f"generated 8 trials, 2 subjects -> {out}\n"
    recordings = dataio.read_container(out)
    assert recordings.n_trials == 8
    assert recordings.n_channels == 3


def test_generate_is_reproducible(tmp_path):
    args = ["generate", "--subjects", "2", "--trials", "4", "--channels", "2", "--samples", "8", "--seed", "7"]
    cli.main(args + ["--out", str(tmp_path / "a.eegb")])
    cli.main(args + ["--out", str(tmp_path / "b.eegb")])
    assert dataio.file_digest(tmp_path / "a.eegb") == dataio.file_digest(tmp_path / "b.eegb")


def test_generate_default_seed_is_42(tmp_path):
    cli.main(["generate", "--subjects", "1", "--trials", "2", "--channels", "2", "--samples", "8", "--out", str(tmp_path / "a.eegb")])
    expected = dataio.generate_synthetic(GeneratorConfig(n_subjects=1, trials_per_subject=2, n_channels=2, n_samples=8, seed=42))
    assert dataio.read_container(tmp_path / "a.eegb") == expected


def test_generate_rejects_single_trial(tmp_path, capsys):
    code = cli.main(["generate", "--trials", "1", "--out", str(tmp_path / "x.eegb")])
    assert code == cli.EXIT_USAGE
    assert "trials_per_subject" in capsys.readouterr().err
    assert not (tmp_path / "x.eegb").exists()


def test_generate_into_missing_directory(tmp_path):
    code = cli.main(["generate", "--subjects", "1", "--trials", "2", "--channels", "2", "--samples", "8", "--out", str(tmp_path / "no" / "x.eegb")])
    assert code == cli.EXIT_FAILURE


def test_unknown_flag_is_usage_error(tmp_path):
    assert cli.main(["generate", "--out", str(tmp_path / "x"), "--bogus"]) == cli.EXIT_USAGE
    assert cli.main([]) == cli.EXIT_USAGE


def test_run_single_row(dataset, capsys):
    code = cli.main(["run", "--data", str(dataset), "--classifiers", "gnb", "--conditions", "sota"])
    assert code == cli.EXIT_OK
    out = capsys.readouterr().out.splitlines()
    rows = [line for line in out if line.startswith("Gaussian NB")]
    assert len(rows) == 1
    assert out[0].startswith(f"dataset {dataio.file_digest(dataset)}: 80 trials, 8 features")


def test_run_unknown_classifier(dataset, capsys):
    code = cli.main(["run", "--data", str(dataset), "--classifiers", "cnn"])
    assert code == cli.EXIT_USAGE
    err = capsys.readouterr().err
    assert "second_order_boost" in err and "gaussian_nb" in err


def test_run_missing_data_file(tmp_path):
    assert cli.main(["run", "--data", str(tmp_path / "none.eegb"), "--classifiers", "gnb"]) == cli.EXIT_FAILURE


def test_run_writes_deterministic_reports(dataset, tmp_path, capsys):
    args = ["run", "--data", str(dataset), "--classifiers", "gnb,knn", "--k", "4", "--runs", "2"]
    cli.main(args + ["--report", str(tmp_path / "a.json")])
    first_out = capsys.readouterr().out
    cli.main(args + ["--report", str(tmp_path / "b.json")])
    second_out = capsys.readouterr().out
    assert first_out == second_out

    def strip(path):
        payload = json.loads(path.read_text())
        for cell in payload["cells"]:
            cell.pop("mean_runtime_s")
            for run in cell["runs"]:
                run.pop("runtime_s")
        return payload

    first, second = strip(tmp_path / "a.json"), strip(tmp_path / "b.json")
    assert first == second
    assert first["config"]["seeds"] == [0, 1]
    assert len(first["cells"]) == 6


def test_run_csv_report(dataset, tmp_path):
    path = tmp_path / "r.csv"
    code = cli.main(["run", "--data", str(dataset), "--classifiers", "gnb", "--runs", "1", "--report", str(path), "--format", "csv"])
    assert code == cli.EXIT_OK
    assert path.read_text().splitlines()[0] == "classifier,condition,mean_acc,acc_1h,acc_2h,runtime_s"


def test_run_table_with_published_values(dataset, capsys):
    cli.main(["run", "--data", str(dataset), "--classifiers", "gnb", "--runs", "1", "--compare-published"])
    captured = capsys.readouterr()
    assert "(93.0)" in captured.out
    assert "Tempo (s)" in captured.err
    assert "Tempo (s)" not in captured.out


@pytest.mark.parametrize("value, expected", [(92.75, "92.8"), (92.65, "92.7"), (-0.05, "-0.1"), (100.0, "100.0"), (0.04, "0.0")])
def test_round_half_away_from_zero(value, expected):
    assert cli.round_half_away(value) == expected


def test_inspect_lists_ranking(dataset, capsys):
    code = cli.main(["inspect", "--data", str(dataset), "--half", "1h", "--top", "3"])
    assert code == cli.EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "half=1h trials=40"
    assert len(lines) == 2 + 3


def test_inspect_top_zero(dataset):
    assert cli.main(["inspect", "--data", str(dataset), "--top", "0"]) == cli.EXIT_USAGE


def test_inspect_invalid_half(dataset):
    assert cli.main(["inspect", "--data", str(dataset), "--half", "3h"]) == cli.EXIT_USAGE


def test_export_features(dataset, tmp_path, capsys):
    out = tmp_path / "f.csv"
    assert cli.main(["export-features", "--data", str(dataset), "--out", str(out), "--half", "2h"]) == cli.EXIT_OK
    assert capsys.readouterr().out == f"exported 40 rows, 8 features -> {out}\n"
    lines = out.read_text().splitlines()
    assert len(lines) == 41
    assert len(lines[0].split(",")) == 3 + 2 * 4
    again = tmp_path / "g.csv"
    cli.main(["export-features", "--data", str(dataset), "--out", str(again), "--half", "2h"])
    assert again.read_bytes() == out.read_bytes()


def test_export_empty_dataset_is_header_only(tmp_path):
    from schemas.recording_schemas import RecordingSet

    data = tmp_path / "empty.eegb"
    dataio.write_container(RecordingSet.empty(n_channels=2, n_samples=400), data)
    out = tmp_path / "f.csv"
    assert cli.main(["export-features", "--data", str(data), "--out", str(out)]) == cli.EXIT_OK
    assert out.read_text() == "subject,chrono_index,label,ch0_amp,ch0_phase,ch1_amp,ch1_phase\n"


@pytest.mark.slow
def test_inspect_fixture_first_half(tmp_path, fixture_recordings, capsys):
    data = tmp_path / "fixture.eegb"
    dataio.write_container(fixture_recordings, data)
    assert cli.main(["inspect", "--data", str(data), "--half", "1h", "--top", "8"]) == cli.EXIT_OK
    first = capsys.readouterr().out.splitlines()[2:]
    assert all(line.split()[2] == "amplitude" and int(line.split()[1]) < 8 for line in first)
    cli.main(["inspect", "--data", str(data), "--half", "all", "--top", "8"])
    pooled = capsys.readouterr().out.splitlines()[2:]
    assert pooled != first
