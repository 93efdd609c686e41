"""Min-max kernels, consistent weighted sampling sketches, and hashed-feature learning."""

from .vectors import SparseVector
from .kernels import (
    KernelKind,
    GramMatrix,
    min_max,
    resemblance,
    intersection,
    n_min_max,
    linear,
    kernel_value,
    gram,
    write_precomputed,
)
from .data import Dataset, NormalizeMode, load, dump, normalize
from .cws import (
    CwsDraw,
    CwsSample,
    RandomStream,
    Sketch,
    draw,
    cws_sample,
    sketch,
    sketch_batch,
    write_sketches,
    read_sketches,
)
from .encode import BitBudget, EncodedVector, truncate, truncate_codes, encode, inner
from .estimate import (
    Scheme,
    SimulationReport,
    ReportRow,
    collision_rate,
    theoretical_variance,
    simulate,
    write_csv,
)
from .learn import (
    TrainConfig,
    LinearModel,
    train,
    predict,
    evaluate,
    save_model,
    load_model,
)

__version__ = "0.1.0"

__all__ = [
    "SparseVector",
    "KernelKind", "GramMatrix", "min_max", "resemblance", "intersection",
    "n_min_max", "linear", "kernel_value", "gram", "write_precomputed",
    "Dataset", "NormalizeMode", "load", "dump", "normalize",
    "CwsDraw", "CwsSample", "RandomStream", "Sketch", "draw", "cws_sample",
    "sketch", "sketch_batch", "write_sketches", "read_sketches",
    "BitBudget", "EncodedVector", "truncate", "truncate_codes", "encode", "inner",
    "Scheme", "SimulationReport", "ReportRow", "collision_rate",
    "theoretical_variance", "simulate", "write_csv",
    "TrainConfig", "LinearModel", "train", "predict", "evaluate",
    "save_model", "load_model",
    "__version__",
]
