from fastapi import FastAPI, Request, status
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from errors import ConfigurationError
from routers import benchmark, datasets
from settings import configure_logging

configure_logging()

# --- FastAPI App Initialization ---

app = FastAPI(
    title="API do benchmark Two Heads",
    description="Geração de EEG sintético, seleção de features e benchmark de classificadores por metade cronológica.",
    version="0.1.0",
)

origins = [
    "http://localhost:3000",
]

app.add_middleware(
    CORSMiddleware,
    allow_origins=origins,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

# --- Exception Handlers ---

@app.exception_handler(ConfigurationError)
def configuration_error_handler(request: Request, exc: ConfigurationError):
    # Validadores dos schemas levantam ConfigurationError ainda na leitura do corpo.
    return JSONResponse(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, content={"detail": str(exc)})

# --- Include Routers ---

app.include_router(datasets.router)
app.include_router(benchmark.router)


# --- Root Endpoint ---

@app.get("/")
def read_root():
    return {"message": "Backend do benchmark Two Heads está no ar!"}
