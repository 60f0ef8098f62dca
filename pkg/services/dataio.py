# services/dataio.py
"""
Container EEGB e gerador sintético não estacionário.

Formato EEGB (little-endian, sem padding):
    header  = magic "EEGBIN01" | n_trials u32 | n_channels u32 | n_samples u32 | sample_rate_hz f32
    record  = subject_id u32 | chrono_index u32 | label u8 | samples f32[n_channels × n_samples]
"""
import logging
import math
import struct
from pathlib import Path
from typing import Iterator, Union

import numpy as np

try:
    from fnv_hash_fast import fnv1a_64 as fast_fnv1a_64
except ImportError:  # sem a extensão C: laço em Python, mesmo resultado
    fast_fnv1a_64 = None

from errors import ContainerFormatError, ContainerIOError, DataValidationError
from schemas.recording_schemas import GeneratorConfig, RecordingSet

logger = logging.getLogger(__name__)

# --- Constantes ---
MAGIC = b"EEGBIN01"
HEADER = struct.Struct("<8sIIIf")
RECORD_META_BYTES = 9
WRITE_CHUNK_TRIALS = 256
FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = 0xFFFFFFFFFFFFFFFF
UINT32_MAX = 2**32 - 1

PathLike = Union[str, Path]


def record_dtype(n_channels: int, n_samples: int) -> np.dtype:
    """dtype estruturado (empacotado) de um registro EEGB."""
    return np.dtype([
        ("subject_id", "<u4"),
        ("chrono_index", "<u4"),
        ("label", "u1"),
        ("samples", "<f4", (n_channels, n_samples)),
    ])


# --- Validação ---

def validate_recording(recordings: RecordingSet) -> None:
    """Verifica todos os invariantes do RecordingSet; levanta DataValidationError."""
    n = recordings.n_trials
    if not (math.isfinite(recordings.sample_rate_hz) and recordings.sample_rate_hz > 0):
        raise DataValidationError("sample_rate_hz deve ser finito e > 0")
    if recordings.n_channels < 1 or recordings.n_samples < 1:
        raise DataValidationError("n_channels e n_samples devem ser >= 1")
    for name in ("subject_ids", "chrono_indices"):
        if getattr(recordings, name).shape != (n,):
            raise DataValidationError(f"{name} deve ter {n} elementos")
    expected_shape = (n, recordings.n_channels, recordings.n_samples)
    if recordings.samples.shape != expected_shape:
        raise DataValidationError(f"samples com shape {recordings.samples.shape}, esperado {expected_shape}")

    labels = np.asarray(recordings.labels)
    bad = np.flatnonzero((labels != 0) & (labels != 1))
    if bad.size:
        i = int(bad[0])
        raise DataValidationError(f"label {labels[i]} fora de {{0, 1}}", trial_index=i)

    for name in ("subject_ids", "chrono_indices"):
        values = np.asarray(getattr(recordings, name)).astype(np.int64)
        bad = np.flatnonzero((values < 0) | (values > UINT32_MAX))
        if bad.size:
            raise DataValidationError(f"{name} fora do intervalo u32", trial_index=int(bad[0]))

    if n:
        finite = np.isfinite(recordings.samples).reshape(n, -1).all(axis=1)
        bad = np.flatnonzero(~finite)
        if bad.size:
            raise DataValidationError("amostra não finita", trial_index=int(bad[0]))

    _check_chronology(recordings)


def _check_chronology(recordings: RecordingSet) -> None:
    subjects = np.asarray(recordings.subject_ids)
    chrono = np.asarray(recordings.chrono_indices).astype(np.int64)
    for subject in np.unique(subjects):
        rows = np.flatnonzero(subjects == subject)
        m = rows.size
        seen = np.zeros(m, dtype=bool)
        for row in rows:
            c = chrono[row]
            if c >= m or seen[c]:
                raise DataValidationError(
                    f"subject {int(subject)}: chrono_index {c} quebra a sequência 0..{m - 1}",
                    trial_index=int(row),
                )
            seen[c] = True


# --- Serialização ---

def iter_container_chunks(recordings: RecordingSet) -> Iterator[bytes]:
    """Gera o stream EEGB em blocos (header primeiro), sem materializar o arquivo inteiro."""
    yield HEADER.pack(
        MAGIC,
        recordings.n_trials,
        recordings.n_channels,
        recordings.n_samples,
        recordings.sample_rate_hz,
    )
    dtype = record_dtype(recordings.n_channels, recordings.n_samples)
    for start in range(0, recordings.n_trials, WRITE_CHUNK_TRIALS):
        stop = min(start + WRITE_CHUNK_TRIALS, recordings.n_trials)
        block = np.empty(stop - start, dtype=dtype)
        block["subject_id"] = recordings.subject_ids[start:stop]
        block["chrono_index"] = recordings.chrono_indices[start:stop]
        block["label"] = recordings.labels[start:stop]
        block["samples"] = recordings.samples[start:stop]
        yield block.tobytes()


def container_bytes(recordings: RecordingSet) -> bytes:
    validate_recording(recordings)
    return b"".join(iter_container_chunks(recordings))


def write_container(recordings: RecordingSet, path: PathLike) -> None:
    """Grava o RecordingSet no formato EEGB."""
    validate_recording(recordings)
    try:
        with open(path, "wb") as handle:
            for chunk in iter_container_chunks(recordings):
                handle.write(chunk)
    except OSError as e:
        raise ContainerIOError(path, f"falha ao gravar: {e}") from e
    logger.info(f"{recordings.n_trials} trials gravados em {path}")


def parse_container(payload: bytes) -> RecordingSet:
    """Interpreta um stream EEGB completo já em memória."""
    if len(payload) < HEADER.size:
        raise ContainerFormatError("header truncado", expected=HEADER.size, actual=len(payload))
    magic, n_trials, n_channels, n_samples, rate = HEADER.unpack_from(payload)
    if magic != MAGIC:
        raise ContainerFormatError(f"magic inválido {magic!r}")
    dtype = _checked_layout(n_trials, n_channels, n_samples, len(payload))
    records = np.frombuffer(payload, dtype=dtype, count=n_trials, offset=HEADER.size)
    return _from_records(records, n_channels, n_samples, rate)


def read_container(path: PathLike) -> RecordingSet:
    """Lê e valida um arquivo EEGB."""
    try:
        with open(path, "rb") as handle:
            header = handle.read(HEADER.size)
            size = Path(path).stat().st_size
            if len(header) < HEADER.size:
                raise ContainerFormatError("header truncado", expected=HEADER.size, actual=len(header))
            magic, n_trials, n_channels, n_samples, rate = HEADER.unpack(header)
            if magic != MAGIC:
                raise ContainerFormatError(f"magic inválido {magic!r}")
            dtype = _checked_layout(n_trials, n_channels, n_samples, size)
            records = np.fromfile(handle, dtype=dtype, count=n_trials)
    except OSError as e:
        raise ContainerIOError(path, f"falha ao ler: {e}") from e
    recordings = _from_records(records, n_channels, n_samples, rate)
    logger.debug(f"{recordings.n_trials} trials lidos de {path}")
    return recordings


def _checked_layout(n_trials: int, n_channels: int, n_samples: int, size: int) -> np.dtype:
    """Confere o tamanho declarado pelo header contra o do arquivo antes de montar o dtype."""
    expected = HEADER.size + n_trials * (RECORD_META_BYTES + 4 * n_channels * n_samples)
    if size < expected:
        raise ContainerFormatError("payload truncado", expected=expected, actual=size)
    if size > expected:
        raise ContainerFormatError("bytes excedentes após o último trial", expected=expected, actual=size)
    try:
        return record_dtype(n_channels, n_samples)
    except (ValueError, OverflowError, MemoryError) as e:
        raise ContainerFormatError(f"dimensões {n_channels}×{n_samples} do header não representáveis") from e


def _from_records(records: np.ndarray, n_channels: int, n_samples: int, rate: float) -> RecordingSet:
    recordings = RecordingSet(
        n_channels=n_channels,
        n_samples=n_samples,
        sample_rate_hz=rate,
        subject_ids=np.array(records["subject_id"], dtype=np.uint32),
        chrono_indices=np.array(records["chrono_index"], dtype=np.uint32),
        labels=np.array(records["label"], dtype=np.uint8),
        samples=np.array(records["samples"], dtype=np.float32).reshape(len(records), n_channels, n_samples),
    )
    validate_recording(recordings)
    return recordings


# --- Digest ---

def fnv1a_64_reference(chunks, value: int = FNV_OFFSET) -> int:
    """FNV-1a de 64 bits byte a byte; lento, serve de oráculo para fnv1a_64."""
    for chunk in chunks:
        for byte in chunk:
            value = ((value ^ byte) * FNV_PRIME) & MASK64
    return value


def fnv1a_64(chunks) -> int:
    """FNV-1a de 64 bits sobre a concatenação de uma sequência de blocos de bytes."""
    if fast_fnv1a_64 is None:
        logger.debug("fnv-hash-fast indisponível; digest calculado em Python puro")
        return fnv1a_64_reference(chunks)
    return int(fast_fnv1a_64(b"".join(chunks)))


def dataset_digest(recordings: RecordingSet) -> str:
    """Digest FNV-1a 64 do stream EEGB, em 16 dígitos hexadecimais."""
    validate_recording(recordings)
    return f"{fnv1a_64(iter_container_chunks(recordings)):016x}"


def file_digest(path: PathLike) -> str:
    try:
        value = fnv1a_64([Path(path).read_bytes()])
    except OSError as e:
        raise ContainerIOError(path, f"falha ao ler: {e}") from e
    return f"{value:016x}"


# --- Gerador sintético ---

def generate_synthetic(cfg: GeneratorConfig) -> RecordingSet:
    """
    Gera um RecordingSet sintético com deriva entre as metades.

    Cada canal é ruído branco gaussiano; nos canais do conjunto ativo soma-se
    uma senoide em carrier_hz com amplitude
        A = base_amp + s·contrast·(1 − decay·t/(T−1)),  s = ±1 pelo rótulo,
    e fase inicial uniforme por (trial, canal). O conjunto ativo é set_a na
    primeira metade (t < ⌈T/2⌉) e set_b na segunda.
    """
    cfg.check()
    T = cfg.trials_per_subject
    C, S = cfg.n_channels, cfg.n_samples
    first_half = math.ceil(T / 2)
    set_a = np.asarray(cfg.set_a, dtype=np.int64)
    set_b = np.asarray(cfg.set_b, dtype=np.int64)
    omega_n = 2 * np.pi * cfg.carrier_hz * np.arange(S) / cfg.sample_rate_hz
    progress = np.arange(T) / (T - 1)

    logger.info(f"Gerando {cfg.n_subjects} sujeitos × {T} trials (seed={cfg.seed})")
    samples = np.empty((cfg.n_subjects * T, C, S), dtype=np.float32)
    labels = np.empty(cfg.n_subjects * T, dtype=np.uint8)

    # Um gerador independente por sujeito, derivado da seed.
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.n_subjects)
    for subject, child in enumerate(children):
        rng = np.random.default_rng(child)
        subject_labels = np.zeros(T, dtype=np.uint8)
        subject_labels[T - T // 2:] = 1
        subject_labels = rng.permutation(subject_labels)
        phases = rng.uniform(0.0, 2 * np.pi, size=(T, C))
        block = rng.standard_normal((T, C, S)) * cfg.noise_sigma

        sign = np.where(subject_labels == 1, 1.0, -1.0)
        amplitude = cfg.base_amp + sign * cfg.contrast * (1.0 - cfg.decay * progress)
        for rows, active in ((np.arange(first_half), set_a), (np.arange(first_half, T), set_b)):
            if rows.size == 0:
                continue
            phi = phases[np.ix_(rows, active)]
            carrier = np.sin(omega_n[None, None, :] + phi[:, :, None])
            block[np.ix_(rows, active)] += amplitude[rows, None, None] * carrier

        start = subject * T
        samples[start:start + T] = block
        labels[start:start + T] = subject_labels

    return RecordingSet(
        n_channels=C,
        n_samples=S,
        sample_rate_hz=cfg.sample_rate_hz,
        subject_ids=np.repeat(np.arange(cfg.n_subjects, dtype=np.uint32), T),
        chrono_indices=np.tile(np.arange(T, dtype=np.uint32), cfg.n_subjects),
        labels=labels,
        samples=samples,
    )
