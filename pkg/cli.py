# -*- coding: utf-8 -*-
"""
Linha de comando do benchmark Two Heads.

    python cli.py generate --subjects 30 --trials 120 --out fixture.eegb
    python cli.py run --data fixture.eegb --classifiers gnb,knn --conditions sota,fs,twoheads
    python cli.py inspect --data fixture.eegb --half 1h --top 8
    python cli.py export-features --data fixture.eegb --half 2h --out feats.csv

Códigos de saída: 0 sucesso, 1 falha de execução ou de I/O, 2 erro de uso.
stdout recebe apenas saída determinística; logs e tempos vão para stderr.
"""
import argparse
import logging
import sys
from decimal import ROUND_HALF_UP, Decimal
from typing import List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from errors import ConfigurationError, TwoHeadsError
from schemas.bench_schemas import BenchmarkConfig, Condition, RunReport
from schemas.classifier_schemas import ClassifierKind
from schemas.feature_schemas import FeatureMatrix, FilterSpec
from schemas.recording_schemas import GeneratorConfig
from services import bench, dataio, dsp, featsel
from services.segmentation import split_halves
from settings import configure_logging, get_threads

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

DEFAULT_GENERATE_SEED = 42
DEFAULT_RUN_SEED = 0

CLASSIFIER_ALIASES = {"gnb": ClassifierKind.GAUSSIAN_NB.value}

TABLE_LABELS = {
    "gaussian_nb": "Gaussian NB",
    "linear_svm": "LinearSVC",
    "knn": "KNN",
    "rbf_svm": "RBF SVC",
    "adaboost": "AdaBoost",
    "random_forest": "Random Forest",
    "gradient_boost": "Gradient Boost",
    "second_order_boost": "2nd-order Boost",
}


class UsageError(TwoHeadsError):
    """Flag com valor inválido, detectada antes de qualquer trabalho."""


# --- Helpers ---

def round_half_away(value: float, places: int = 1) -> str:
    """Arredonda "meio para longe do zero" sobre a representação decimal mais curta."""
    quantum = Decimal(1).scaleb(-places)
    return str(Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP))


def parse_classifiers(raw: str) -> List[ClassifierKind]:
    valid = [kind.value for kind in ClassifierKind]
    kinds = []
    for name in (part.strip() for part in raw.split(",")):
        name = CLASSIFIER_ALIASES.get(name, name)
        if name not in valid:
            raise UsageError(f"classificador desconhecido '{name}'; válidos: {', '.join(valid)} (alias: gnb)")
        kinds.append(ClassifierKind(name))
    return kinds


def parse_conditions(raw: str) -> List[Condition]:
    valid = [condition.value for condition in Condition]
    conditions = []
    for name in (part.strip() for part in raw.split(",")):
        if name not in valid:
            raise UsageError(f"condição desconhecida '{name}'; válidas: {', '.join(valid)}")
        conditions.append(Condition(name))
    return conditions


def _positive(flag: str, value: int) -> None:
    if value < 1:
        raise UsageError(f"{flag} deve ser >= 1")


def _features_for_half(features: FeatureMatrix, half: str) -> FeatureMatrix:
    if half == "all":
        return features
    return features.take_rows(split_halves(features).rows(half))


def _load_features(path: str, threads: int) -> FeatureMatrix:
    recordings = dataio.read_container(path)
    spec = FilterSpec(sample_rate_hz=recordings.sample_rate_hz)
    return dsp.extract_features(recordings, spec, threads)


# --- Tabelas ---

def _table_columns(conditions: Sequence[Condition]) -> List[str]:
    columns = []
    for condition in conditions:
        if condition == Condition.TWOHEADS:
            columns += ["1h", "2h", "1h+2h"]
        else:
            columns.append(condition.value)
    return columns


def _cell_value(report: RunReport, kind: ClassifierKind, column: str) -> float:
    if column == "1h":
        return report.cell(kind, Condition.TWOHEADS).mean_acc_1h
    if column == "2h":
        return report.cell(kind, Condition.TWOHEADS).mean_acc_2h
    if column == "1h+2h":
        return report.cell(kind, Condition.TWOHEADS).mean_accuracy
    return report.cell(kind, Condition(column)).mean_accuracy


def format_accuracy_table(report: RunReport, compare_published: bool = False) -> str:
    """Tabela classificadores × condições, em %, 1 casa decimal."""
    columns = _table_columns(report.config.conditions)
    headers = [column.upper() for column in columns]
    lines = ["Acurácia (%)", f"{'classifier':<16}" + "".join(f"{h:>12}" for h in headers)]
    for kind in report.config.kinds:
        cells = []
        for column in columns:
            text = round_half_away(_cell_value(report, kind, column))
            if compare_published:
                text += f" ({round_half_away(bench.PUBLISHED_ACCURACIES[kind.value][column])})"
            cells.append(f"{text:>12}")
        lines.append(f"{TABLE_LABELS[kind.value]:<16}" + "".join(cells))
    if compare_published:
        lines.append("(entre parênteses: valores publicados em EEG real, apenas referência)")
    return "\n".join(lines)


def format_runtime_table(report: RunReport, compare_published: bool = False) -> str:
    """Tempo médio (s) de fit+predict(+seleção) por classificador × condição."""
    conditions = report.config.conditions
    lines = [f"Tempo (s): {report.timing_scope}", f"{'classifier':<16}" + "".join(f"{c.value.upper():>16}" for c in conditions)]
    for kind in report.config.kinds:
        cells = []
        for condition in conditions:
            text = f"{report.cell(kind, condition).mean_runtime_s:.3f}"
            if compare_published:
                text += f" ({bench.PUBLISHED_RUNTIMES_S[kind.value][condition.value]:.1f})"
            cells.append(f"{text:>16}")
        lines.append(f"{TABLE_LABELS[kind.value]:<16}" + "".join(cells))
    return "\n".join(lines)


# --- Comandos ---

def cmd_generate(args: argparse.Namespace) -> int:
    overrides = {
        "n_subjects": args.subjects,
        "trials_per_subject": args.trials,
        "n_channels": args.channels,
        "n_samples": args.samples,
        "contrast": args.contrast,
        "decay": args.decay,
        "seed": DEFAULT_GENERATE_SEED if args.seed is None else args.seed,
    }
    cfg = GeneratorConfig(**{key: value for key, value in overrides.items() if value is not None})
    recordings = dataio.generate_synthetic(cfg)
    dataio.write_container(recordings, args.out)
    print(f"generated {recordings.n_trials} trials, {cfg.n_subjects} subjects -> {args.out}")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    kinds = parse_classifiers(args.classifiers)
    conditions = parse_conditions(args.conditions)
    _positive("--k", args.k)
    _positive("--runs", args.runs)
    first_seed = DEFAULT_RUN_SEED if args.seed is None else args.seed
    config = BenchmarkConfig(
        kinds=kinds,
        conditions=conditions,
        k=args.k,
        seeds=list(range(first_seed, first_seed + args.runs)),
    )
    threads = get_threads()

    recordings = dataio.read_container(args.data)
    report = bench.run_benchmark(recordings, config, threads=threads, digest=dataio.file_digest(args.data))
    if args.report:
        bench.emit_report(report, args.report, args.format)

    print(f"dataset {report.dataset_digest}: {report.n_trials} trials, {report.n_features} features, seeds {config.seeds}")
    print(format_accuracy_table(report, args.compare_published))
    # Tempos variam entre execuções: ficam fora do stdout.
    print(format_runtime_table(report, args.compare_published), file=sys.stderr)
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    _positive("--top", args.top)
    features = _features_for_half(_load_features(args.data, get_threads()), args.half)
    y = np.asarray(features.labels)
    model = featsel.fit_selector(features.values, y, k=min(args.top, features.n_cols))
    rows = featsel.rank_features(model, features.feature_names, args.top)
    print(f"half={args.half} trials={features.n_rows}")
    print(featsel.format_ranking(rows))
    return EXIT_OK


def cmd_export_features(args: argparse.Namespace) -> int:
    features = _features_for_half(_load_features(args.data, get_threads()), args.half)
    dsp.export_features_csv(features, args.out)
    print(f"exported {features.n_rows} rows, {features.n_cols} features -> {args.out}")
    return EXIT_OK


# --- Parser ---

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="seed (generate: 42; run: primeira seed, 0)")
    common.add_argument("--verbose", action="store_true", help="logs em nível DEBUG (stderr)")

    parser = argparse.ArgumentParser(prog="twoheads", description="Benchmark Two Heads para EEG sintético.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="gera um dataset sintético EEGB")
    p.add_argument("--subjects", type=int)
    p.add_argument("--trials", type=int, help="trials por sujeito")
    p.add_argument("--channels", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--contrast", type=float)
    p.add_argument("--decay", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("run", parents=[common], help="executa o benchmark")
    p.add_argument("--data", required=True)
    p.add_argument("--classifiers", default=",".join(kind.value for kind in ClassifierKind))
    p.add_argument("--conditions", default=",".join(c.value for c in Condition))
    p.add_argument("--k", type=int, default=featsel.DEFAULT_K)
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--report")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--compare-published", action="store_true", help="mostra os valores publicados ao lado")
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("inspect", parents=[common], help="ranking F das features")
    p.add_argument("--data", required=True)
    p.add_argument("--half", choices=["all", "1h", "2h"], default="all")
    p.add_argument("--top", type=int, default=10)
    p.set_defaults(handler=cmd_inspect)

    p = sub.add_parser("export-features", parents=[common], help="exporta as features em CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--half", choices=["all", "1h", "2h"], default="all")
    p.set_defaults(handler=cmd_export_features)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except (UsageError, ConfigurationError, ValidationError) as e:
        print(f"erro de uso: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (TwoHeadsError, OSError) as e:
        logger.error(f"Falha em '{args.command}': {e}", exc_info=True)
        print(f"erro: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
