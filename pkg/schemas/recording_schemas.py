# schemas/recording_schemas.py
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from errors import ConfigurationError

EEG_CHANNELS = 129
UINT64_MAX = 2**64 - 1


class Trial(BaseModel):
    """Um trial: amostras channel-major (n_channels × n_samples)."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    subject_id: int
    chrono_index: int
    label: int
    samples: np.ndarray


class RecordingSet(BaseModel):
    """
    Conjunto ordenado de trials multicanal.

    Os trials ficam em arrays colunares (um por campo) para que geração,
    extração de features e serialização trabalhem sem copiar trial a trial.
    `samples` tem shape (n_trials, n_channels, n_samples) em float32.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    n_channels: int = EEG_CHANNELS
    n_samples: int = 500
    sample_rate_hz: float = 500.0
    subject_ids: np.ndarray
    chrono_indices: np.ndarray
    labels: np.ndarray
    samples: np.ndarray

    @field_validator("sample_rate_hz")
    @classmethod
    def _as_float32(cls, value: float) -> float:
        # O container guarda a taxa em IEEE-754 32 bits.
        return float(np.float32(value))

    @property
    def n_trials(self) -> int:
        return int(self.labels.shape[0])

    def trial(self, index: int) -> Trial:
        return Trial(
            subject_id=int(self.subject_ids[index]),
            chrono_index=int(self.chrono_indices[index]),
            label=int(self.labels[index]),
            samples=self.samples[index],
        )

    @classmethod
    def empty(cls, n_channels: int = EEG_CHANNELS, n_samples: int = 500, sample_rate_hz: float = 500.0) -> "RecordingSet":
        return cls(
            n_channels=n_channels,
            n_samples=n_samples,
            sample_rate_hz=sample_rate_hz,
            subject_ids=np.zeros(0, dtype=np.uint32),
            chrono_indices=np.zeros(0, dtype=np.uint32),
            labels=np.zeros(0, dtype=np.uint8),
            samples=np.zeros((0, n_channels, n_samples), dtype=np.float32),
        )

    @classmethod
    def from_trials(cls, trials: List[Trial], n_channels: int, n_samples: int, sample_rate_hz: float) -> "RecordingSet":
        if not trials:
            return cls.empty(n_channels, n_samples, sample_rate_hz)
        return cls(
            n_channels=n_channels,
            n_samples=n_samples,
            sample_rate_hz=sample_rate_hz,
            subject_ids=np.array([t.subject_id for t in trials], dtype=np.uint32),
            chrono_indices=np.array([t.chrono_index for t in trials], dtype=np.uint32),
            labels=np.array([t.label for t in trials], dtype=np.uint8),
            samples=np.stack([np.asarray(t.samples, dtype=np.float32) for t in trials]),
        )

    def take(self, indices) -> "RecordingSet":
        """Subconjunto dos trials em `indices`, na ordem dada."""
        idx = np.asarray(indices, dtype=np.int64)
        return RecordingSet(
            n_channels=self.n_channels,
            n_samples=self.n_samples,
            sample_rate_hz=self.sample_rate_hz,
            subject_ids=self.subject_ids[idx],
            chrono_indices=self.chrono_indices[idx],
            labels=self.labels[idx],
            samples=self.samples[idx],
        )

    def __eq__(self, other: object) -> bool:
        # Igualdade campo a campo, amostras comparadas pelo padrão de bits.
        if not isinstance(other, RecordingSet):
            return NotImplemented
        return (
            self.n_channels == other.n_channels
            and self.n_samples == other.n_samples
            and self.sample_rate_hz == other.sample_rate_hz
            and np.array_equal(self.subject_ids, other.subject_ids)
            and np.array_equal(self.chrono_indices, other.chrono_indices)
            and np.array_equal(self.labels, other.labels)
            and self.samples.shape == other.samples.shape
            and np.array_equal(
                np.ascontiguousarray(self.samples, dtype=np.float32).view(np.uint32),
                np.ascontiguousarray(other.samples, dtype=np.float32).view(np.uint32),
            )
        )


def default_channel_sets(n_channels: int) -> Tuple[List[int], List[int]]:
    """
    Conjuntos ativos padrão: até 8 canais a partir do 0 e outros tantos a partir
    do canal central. Com 129 canais, 0..7 e 64..71.
    """
    width = max(1, min(8, n_channels // 2))
    middle = n_channels // 2
    return list(range(width)), list(range(middle, middle + width))


class GeneratorConfig(BaseModel):
    """Parâmetros do gerador sintético não estacionário."""
    n_subjects: int = 30
    trials_per_subject: int = 120
    n_channels: int = EEG_CHANNELS
    n_samples: int = 500
    sample_rate_hz: float = 500.0
    seed: int = 42
    noise_sigma: float = 1.0
    carrier_hz: float = 10.0
    base_amp: float = 1.0
    contrast: float = 0.6
    decay: float = 0.5
    # None: default_channel_sets(n_channels)
    set_a: Optional[List[int]] = None
    set_b: Optional[List[int]] = None

    @model_validator(mode="after")
    def _check(self) -> "GeneratorConfig":
        if self.n_channels >= 1 and (self.set_a is None or self.set_b is None):
            default_a, default_b = default_channel_sets(self.n_channels)
            self.set_a = default_a if self.set_a is None else self.set_a
            self.set_b = default_b if self.set_b is None else self.set_b
        self.check()
        return self

    def check(self) -> None:
        """Valida os invariantes; levanta ConfigurationError com o campo violado."""
        if self.n_subjects < 1:
            raise ConfigurationError("n_subjects", "deve ser >= 1")
        if self.trials_per_subject < 2:
            raise ConfigurationError("trials_per_subject", "deve ser >= 2")
        if self.n_channels < 1:
            raise ConfigurationError("n_channels", "deve ser >= 1")
        if self.n_samples < 1:
            raise ConfigurationError("n_samples", "deve ser >= 1")
        if not self.sample_rate_hz > 0:
            raise ConfigurationError("sample_rate_hz", "deve ser > 0")
        if not 0 <= self.seed <= UINT64_MAX:
            raise ConfigurationError("seed", "deve caber em 64 bits sem sinal")
        if not self.noise_sigma >= 0:
            raise ConfigurationError("noise_sigma", "deve ser >= 0")
        if not 0 < self.carrier_hz < self.sample_rate_hz / 2:
            raise ConfigurationError("carrier_hz", "deve estar em (0, sample_rate_hz/2)")
        if not np.isfinite(self.base_amp):
            raise ConfigurationError("base_amp", "deve ser finito")
        if not (np.isfinite(self.contrast) and self.contrast >= 0):
            raise ConfigurationError("contrast", "deve ser finito e >= 0")
        if not 0 <= self.decay < 1:
            raise ConfigurationError("decay", "deve estar em [0, 1)")
        for name in ("set_a", "set_b"):
            channels = getattr(self, name)
            if not channels:
                raise ConfigurationError(name, "não pode ser vazio")
            if len(set(channels)) != len(channels):
                raise ConfigurationError(name, "canais repetidos")
            if any(c < 0 or c >= self.n_channels for c in channels):
                raise ConfigurationError(name, f"índices devem estar em [0, {self.n_channels})")
        if set(self.set_a) & set(self.set_b):
            raise ConfigurationError("set_b", "set_a e set_b devem ser disjuntos")
