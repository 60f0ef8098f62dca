from fastapi import APIRouter

from routers.datasets import dataset_path
from routers.errors_http import to_http
from schemas.api_schemas import BenchmarkRequest
from schemas.bench_schemas import RunReport
from services import bench, dataio
from settings import get_threads

router = APIRouter(prefix="/benchmark", tags=["Benchmark"])


@router.post("/run", response_model=RunReport)
def run_benchmark(request: BenchmarkRequest):
    """
    Executa o benchmark de forma síncrona sobre um dataset armazenado.
    O id do dataset já é o seu digest.
    """
    path = dataset_path(request.dataset_id)
    threads = get_threads() if request.threads is None else request.threads
    try:
        recordings = dataio.read_container(path)
        return bench.run_benchmark(recordings, request.config, threads=threads, digest=request.dataset_id)
    except Exception as e:
        raise to_http(e)
