"""Pedestrian flow modeling on occupancy grids.

Builds per-cell direction distributions from trajectory data, fuses them
with learned or uniform priors through a Dirichlet posterior, and measures
how much observed motion the resulting grids explain.
"""

from .evaluate import (
    DEFAULT_CHUNK,
    CurveResult,
    DatasetLikelihood,
    EvaluationError,
    dataset_likelihood,
    likelihood_curve,
    point_likelihood,
    read_curve_csv,
    upper_bound,
    write_curve_csv,
)
from .formats import FormatError, read_bfc1, read_bff1, read_bfft, write_bfc1, write_bff1, write_bfft
from .grids import (
    UNKNOWN_OCCUPANCY,
    WINDOW_SIZE,
    CellIndex,
    Geometry,
    MapFormatError,
    MapMetadata,
    OccupancyGrid,
    OutOfBoundsError,
    Window,
    extract_window,
    load_metadata,
    load_occupancy,
    load_occupancy_map,
    write_occupancy,
)
from .model import (
    SIMPLEX_TOL,
    BinningSpec,
    CountGrid,
    DirectionalGrid,
    FusionParams,
    GeometryMismatchError,
    accumulate,
    accumulate_set,
    bin_direction,
    bin_directions,
    build_bff,
    floor_field,
    merge,
    posterior_mean,
    uniform_grid,
    wrap_angle,
)
from .priors import GridValidationError, load_prior, uniform_prior, write_prior
from .synth import sample_walks
from .trajectories import (
    AdapterConfig,
    Observation,
    ObservationSet,
    TrajectoryParseError,
    chunk,
    derive_headings,
    load_adapter_config,
    parse_atc,
    parse_canonical,
    write_canonical,
)
from .training_data import export_pairs

__version__ = "0.1.0"

__all__ = [
    "AdapterConfig",
    "BinningSpec",
    "CellIndex",
    "CountGrid",
    "CurveResult",
    "DatasetLikelihood",
    "DEFAULT_CHUNK",
    "DirectionalGrid",
    "EvaluationError",
    "FormatError",
    "FusionParams",
    "Geometry",
    "GeometryMismatchError",
    "GridValidationError",
    "MapFormatError",
    "MapMetadata",
    "Observation",
    "ObservationSet",
    "OccupancyGrid",
    "OutOfBoundsError",
    "SIMPLEX_TOL",
    "TrajectoryParseError",
    "UNKNOWN_OCCUPANCY",
    "WINDOW_SIZE",
    "Window",
    "accumulate",
    "accumulate_set",
    "bin_direction",
    "bin_directions",
    "build_bff",
    "chunk",
    "dataset_likelihood",
    "derive_headings",
    "export_pairs",
    "extract_window",
    "floor_field",
    "likelihood_curve",
    "load_adapter_config",
    "load_metadata",
    "load_occupancy",
    "load_occupancy_map",
    "load_prior",
    "merge",
    "parse_atc",
    "parse_canonical",
    "point_likelihood",
    "posterior_mean",
    "read_bfc1",
    "read_bff1",
    "read_bfft",
    "read_curve_csv",
    "sample_walks",
    "uniform_grid",
    "uniform_prior",
    "upper_bound",
    "wrap_angle",
    "write_bfc1",
    "write_bff1",
    "write_bfft",
    "write_canonical",
    "write_curve_csv",
    "write_occupancy",
    "write_prior",
]
