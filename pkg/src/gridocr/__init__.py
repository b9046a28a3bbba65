"""Handwritten digit recognition with grid zoning features and kd-tree kNN."""

from .classifier import GridFeatureExtractor, GridKnnDigitClassifier
from .features import (
    FEATURE_KINDS,
    BlankImageError,
    BoundingBox,
    GridSpec,
    effective_region,
    extract_features,
    feature_length,
    gradient_features,
    grid_cells,
    mean_features,
    partition_boundaries,
)
from .harness import DEFAULT_PLAN, BenchRow, EvalReport, evaluate, fit_classifier, run_benchmark
from .model_io import (
    DatasetIndexError,
    ModelFormatError,
    load_model,
    model_from_bytes,
    model_to_bytes,
    read_index,
    save_model,
    split_entries,
    write_index,
)
from .neighbors import KdTree, Neighbor, linear_scan, majority_vote
from .raster import (
    PgmError,
    binarize,
    decode_pgm,
    encode_pgm,
    read_pgm,
    thin,
    write_pgm,
)

__version__ = "0.1.0"

__all__ = [
    "BenchRow",
    "BlankImageError",
    "BoundingBox",
    "DEFAULT_PLAN",
    "DatasetIndexError",
    "EvalReport",
    "FEATURE_KINDS",
    "GridFeatureExtractor",
    "GridKnnDigitClassifier",
    "GridSpec",
    "KdTree",
    "ModelFormatError",
    "Neighbor",
    "PgmError",
    "binarize",
    "decode_pgm",
    "effective_region",
    "encode_pgm",
    "evaluate",
    "extract_features",
    "feature_length",
    "fit_classifier",
    "gradient_features",
    "grid_cells",
    "linear_scan",
    "load_model",
    "majority_vote",
    "mean_features",
    "model_from_bytes",
    "model_to_bytes",
    "partition_boundaries",
    "read_index",
    "read_pgm",
    "run_benchmark",
    "save_model",
    "split_entries",
    "thin",
    "write_index",
    "write_pgm",
    "__version__",
]
