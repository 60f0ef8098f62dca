from pathlib import Path
from typing import List

import numpy as np
from fastapi import APIRouter, File, HTTPException, Query, UploadFile, status

from routers.errors_http import to_http
from schemas.api_schemas import DatasetSummary
from schemas.recording_schemas import GeneratorConfig, RecordingSet
from schemas.selection_schemas import RankedFeature
from services import dataio, dsp, featsel
from services.segmentation import split_halves
from settings import get_data_dir, get_threads

router = APIRouter(prefix="/datasets", tags=["Datasets"])

SUFFIX = ".eegb"

# --- Helper Functions ---

def _data_dir() -> Path:
    path = Path(get_data_dir())
    path.mkdir(parents=True, exist_ok=True)
    return path


def dataset_path(dataset_id: str) -> Path:
    """Caminho do dataset armazenado; 404 se o id não existir."""
    valid = len(dataset_id) == 16 and all(c in "0123456789abcdef" for c in dataset_id)
    path = _data_dir() / f"{dataset_id}{SUFFIX}"
    if not valid or not path.is_file():
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=f"Dataset '{dataset_id}' não encontrado.")
    return path


def _summary(dataset_id: str, recordings: RecordingSet) -> DatasetSummary:
    return DatasetSummary(
        id=dataset_id,
        n_trials=recordings.n_trials,
        n_subjects=int(np.unique(recordings.subject_ids).size),
        n_channels=recordings.n_channels,
        n_samples=recordings.n_samples,
        sample_rate_hz=recordings.sample_rate_hz,
    )


def _store(payload: bytes, recordings: RecordingSet) -> DatasetSummary:
    dataset_id = f"{dataio.fnv1a_64([payload]):016x}"
    (_data_dir() / f"{dataset_id}{SUFFIX}").write_bytes(payload)
    return _summary(dataset_id, recordings)

# --- API Endpoints ---

@router.post("/generate", response_model=DatasetSummary, status_code=status.HTTP_201_CREATED)
def generate_dataset(cfg: GeneratorConfig):
    """Gera um dataset sintético e o armazena com o digest como id."""
    try:
        recordings = dataio.generate_synthetic(cfg)
        return _store(dataio.container_bytes(recordings), recordings)
    except Exception as e:
        raise to_http(e)


@router.post("/upload", response_model=DatasetSummary, status_code=status.HTTP_201_CREATED)
async def upload_dataset(file: UploadFile = File(...)):
    """Recebe um arquivo EEGB, valida e armazena."""
    payload = await file.read()
    try:
        recordings = dataio.parse_container(payload)
        return _store(payload, recordings)
    except Exception as e:
        raise to_http(e)


@router.get("", response_model=List[DatasetSummary])
def list_datasets():
    """Lista os datasets armazenados em TWOHEADS_DATA_DIR."""
    try:
        return [
            _summary(path.stem, dataio.read_container(path))
            for path in sorted(_data_dir().glob(f"*{SUFFIX}"))
        ]
    except Exception as e:
        raise to_http(e)


@router.get("/{dataset_id}/features/top", response_model=List[RankedFeature])
def top_features(
    dataset_id: str,
    half: str = Query("all", pattern="^(all|1h|2h)$"),
    top: int = Query(10, ge=1),
):
    """Ranking F das features na partição pedida (todas as linhas, 1H ou 2H)."""
    path = dataset_path(dataset_id)
    try:
        features = dsp.extract_features(dataio.read_container(path), threads=get_threads())
        if half != "all":
            features = features.take_rows(split_halves(features).rows(half))
        model = featsel.fit_selector(features.values, np.asarray(features.labels), k=min(top, features.n_cols))
        return featsel.rank_features(model, features.feature_names, top)
    except Exception as e:
        raise to_http(e)
