# schemas/feature_schemas.py
from typing import List, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from errors import ConfigurationError

FeatureKind = Literal["amplitude", "phase"]


class FilterSpec(BaseModel):
    """Passa-banda FIR da banda alfa."""
    low_hz: float = 8.0
    high_hz: float = 13.0
    n_taps: int = 101
    sample_rate_hz: float = 500.0

    def check(self) -> None:
        if not 0 < self.low_hz:
            raise ConfigurationError("low_hz", "deve ser > 0")
        if not self.low_hz < self.high_hz:
            raise ConfigurationError("high_hz", "deve ser maior que low_hz")
        if not self.high_hz < self.sample_rate_hz / 2:
            raise ConfigurationError("high_hz", "deve ser menor que sample_rate_hz/2")
        if self.n_taps < 3 or self.n_taps % 2 == 0:
            raise ConfigurationError("n_taps", "deve ser ímpar e >= 3")


class FeatureName(BaseModel):
    channel: int
    kind: FeatureKind

    @property
    def label(self) -> str:
        suffix = "amp" if self.kind == "amplitude" else "phase"
        return f"ch{self.channel}_{suffix}"


def feature_names_for(n_channels: int) -> List[FeatureName]:
    """Ordem canônica: ch0 amplitude, ch0 fase, ch1 amplitude, ..."""
    names = []
    for channel in range(n_channels):
        names.append(FeatureName(channel=channel, kind="amplitude"))
        names.append(FeatureName(channel=channel, kind="phase"))
    return names


class FeatureMatrix(BaseModel):
    """Matriz trials × features com a proveniência de cada coluna e de cada linha."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    values: np.ndarray
    feature_names: List[FeatureName]
    subject_ids: np.ndarray
    chrono_indices: np.ndarray
    labels: np.ndarray

    @property
    def n_rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_cols(self) -> int:
        return int(self.values.shape[1])

    @property
    def row_meta(self) -> List[Tuple[int, int, int]]:
        return [
            (int(s), int(c), int(y))
            for s, c, y in zip(self.subject_ids, self.chrono_indices, self.labels)
        ]

    def take_rows(self, indices) -> "FeatureMatrix":
        idx = np.asarray(indices, dtype=np.int64)
        return FeatureMatrix(
            values=self.values[idx],
            feature_names=self.feature_names,
            subject_ids=self.subject_ids[idx],
            chrono_indices=self.chrono_indices[idx],
            labels=self.labels[idx],
        )
