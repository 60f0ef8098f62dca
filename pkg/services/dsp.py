# services/dsp.py
"""Filtragem na banda alfa, sinal analítico e features de amplitude/fase por canal."""
import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy import signal as scipy_signal

from errors import ContainerIOError, PreconditionError
from schemas.feature_schemas import FeatureMatrix, FilterSpec, feature_names_for
from schemas.recording_schemas import RecordingSet

logger = logging.getLogger(__name__)

CENTRAL_FRACTION = 0.8
EXTRACT_CHUNK_TRIALS = 64


def design_bandpass(spec: FilterSpec) -> np.ndarray:
    """
    FIR passa-banda de fase linear por janela (Hamming).

    Diferença de dois passa-baixas sinc (high_hz e low_hz), normalizada para
    ganho unitário na frequência central geométrica √(low·high).
    """
    spec.check()
    fs = spec.sample_rate_hz
    n = np.arange(spec.n_taps) - (spec.n_taps - 1) / 2
    high = 2 * spec.high_hz / fs * np.sinc(2 * spec.high_hz / fs * n)
    low = 2 * spec.low_hz / fs * np.sinc(2 * spec.low_hz / fs * n)
    taps = (high - low) * np.hamming(spec.n_taps)
    center = math.sqrt(spec.low_hz * spec.high_hz)
    gain = np.abs(frequency_response(taps, center, fs))
    return taps / gain


def frequency_response(taps: np.ndarray, freq_hz, sample_rate_hz: float) -> np.ndarray:
    """Avalia a DTFT H(f) = Σ h[n]·e^{−iωn} diretamente."""
    omega = 2 * np.pi * np.atleast_1d(np.asarray(freq_hz, dtype=float)) / sample_rate_hz
    n = np.arange(len(taps))
    response = np.exp(-1j * np.outer(omega, n)) @ taps
    return response if np.ndim(freq_hz) else response[0]


def filter_zero_phase(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """
    Aplica o FIR para frente e para trás (fase zero, magnitude |H|²).

    Opera no último eixo. O sinal é estendido por reflexão ímpar de
    3·n_taps amostras em cada borda, daí o requisito |x| > 3·n_taps.
    """
    x = np.asarray(x, dtype=float)
    n_taps = len(taps)
    if x.shape[-1] <= 3 * n_taps:
        raise PreconditionError(f"sinal com {x.shape[-1]} amostras; são necessárias mais de {3 * n_taps}")
    return scipy_signal.filtfilt(taps, [1.0], x, axis=-1, padlen=3 * n_taps)


def analytic_signal(x: np.ndarray) -> np.ndarray:
    """
    Sinal analítico pelo método da DFT de comprimento exato (sem padding).

    Pesos por bin: 1 no DC, 2 em 1..⌈N/2⌉−1, 1 em N/2 (N par), 0 no resto.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] < 2:
        raise PreconditionError("o sinal analítico exige pelo menos 2 amostras")
    return scipy_signal.hilbert(x, axis=-1)


def central_window(n_samples: int, fraction: float = CENTRAL_FRACTION) -> slice:
    """Janela central com `fraction` das amostras, descartando as bordas."""
    margin = int(round(n_samples * (1 - fraction) / 2))
    return slice(margin, n_samples - margin)


def _amplitude_phase(block: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """(trials, canais, amostras) -> (trials, 2·canais) intercalando amplitude e fase."""
    analytic = analytic_signal(filter_zero_phase(block, taps))
    window = analytic[..., central_window(block.shape[-1])]
    amplitude = np.abs(window).mean(axis=-1)
    # Média circular; np.angle(0) = 0 dá fase 0 para sinal nulo.
    angle = np.angle(window)
    phase = np.arctan2(np.sin(angle).mean(axis=-1), np.cos(angle).mean(axis=-1))
    phase = np.where(phase <= -np.pi, np.pi, phase)
    features = np.empty(block.shape[:-2] + (2 * block.shape[-2],), dtype=float)
    features[..., 0::2] = amplitude
    features[..., 1::2] = phase
    return features


def extract_features(recordings: RecordingSet, spec: Optional[FilterSpec] = None, threads: int = 0) -> FeatureMatrix:
    """
    Extrai, por trial e canal, a amplitude média e a fase circular média
    do sinal analítico filtrado na banda alfa (janela central de 80%).
    """
    spec = spec or FilterSpec(sample_rate_hz=recordings.sample_rate_hz)
    taps = design_bandpass(spec)
    n = recordings.n_trials
    if n and recordings.n_samples <= 3 * spec.n_taps:
        raise PreconditionError(
            f"trial subject={int(recordings.subject_ids[0])} chrono_index={int(recordings.chrono_indices[0])}: "
            f"{recordings.n_samples} amostras; são necessárias mais de {3 * spec.n_taps}"
        )

    values = np.empty((n, 2 * recordings.n_channels), dtype=float)
    chunks = [slice(start, min(start + EXTRACT_CHUNK_TRIALS, n)) for start in range(0, n, EXTRACT_CHUNK_TRIALS)]

    def work(rows: slice) -> None:
        values[rows] = _amplitude_phase(recordings.samples[rows].astype(float), taps)

    logger.info(f"Extraindo features de {n} trials × {recordings.n_channels} canais")
    if threads > 0 and len(chunks) > 1:
        # Cada bloco escreve em linhas disjuntas; o resultado independe da ordem.
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, chunks))
    else:
        for rows in chunks:
            work(rows)

    return FeatureMatrix(
        values=values,
        feature_names=feature_names_for(recordings.n_channels),
        subject_ids=np.asarray(recordings.subject_ids).copy(),
        chrono_indices=np.asarray(recordings.chrono_indices).copy(),
        labels=np.asarray(recordings.labels).copy(),
    )


def export_features_csv(features: FeatureMatrix, path: Union[str, Path]) -> None:
    """CSV `subject,chrono_index,label,ch0_amp,ch0_phase,...` com 9 dígitos significativos."""
    header = ["subject", "chrono_index", "label"] + [name.label for name in features.feature_names]
    try:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for (subject, chrono, label), row in zip(features.row_meta, features.values):
                writer.writerow([subject, chrono, label] + [f"{v:.9g}" for v in row])
    except OSError as e:
        raise ContainerIOError(path, f"falha ao gravar CSV: {e}") from e
