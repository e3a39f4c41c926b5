"""Occupancy-to-direction prior training and dense grid export."""

from .augment import (
    ROTATIONS,
    AugmentationOp,
    augment,
    augment_arrays,
    random_op,
    rotation_index,
)
from .data import (
    BFFT_MAGIC,
    PairFormatError,
    TrainingPair,
    load_bfft,
    read_pair_file,
)
from .export import (
    PROB_FLOOR,
    export_prior,
    extract_window,
    model_cells,
    predict_grid,
    write_bff1,
)
from .maps import MapError, OccupancyMap, load_map
from .network import WINDOW_SIZE, PriorNet
from .training import (
    TrainConfig,
    TrainResult,
    TrainingDivergedError,
    build_model,
    load_checkpoint,
    load_config,
    save_checkpoint,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "AugmentationOp",
    "BFFT_MAGIC",
    "MapError",
    "OccupancyMap",
    "PROB_FLOOR",
    "PairFormatError",
    "PriorNet",
    "ROTATIONS",
    "TrainConfig",
    "TrainResult",
    "TrainingDivergedError",
    "TrainingPair",
    "WINDOW_SIZE",
    "augment",
    "augment_arrays",
    "build_model",
    "export_prior",
    "extract_window",
    "load_bfft",
    "load_checkpoint",
    "load_config",
    "load_map",
    "model_cells",
    "predict_grid",
    "random_op",
    "read_pair_file",
    "rotation_index",
    "save_checkpoint",
    "train",
    "write_bff1",
]
