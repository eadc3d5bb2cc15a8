"""Ingestion, orchestration, persistence and the command line."""

from .config import PipelineConfig
from .persistence import TrainedBundle, load_model, save_model
from .records import Dataset, IngestError, ingest, write_dataset
from .runner import filter_active, run_evaluate, run_recommend, run_sweep, run_train
from .synth import SynthSpec, generate_synthetic, write_synthetic

__all__ = [
    "Dataset", "IngestError", "PipelineConfig", "SynthSpec", "TrainedBundle",
    "filter_active", "generate_synthetic", "ingest", "load_model", "run_evaluate",
    "run_recommend", "run_sweep", "run_train", "save_model", "write_dataset", "write_synthetic",
]
