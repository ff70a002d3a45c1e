"""Discretization-independent operator learning with learned neural bases:
grids and quadrature, PDE data generators, multifidelity datasets, training,
and evaluation.
"""

from .grid import (
    FunctionSample,
    Grid,
    QuadratureWeights,
    grids_overlap,
    make_uniform_grid,
    restrict,
    trapezoid_weights,
)
from .model import (
    OperatorModel,
    approximate,
    encode,
    forward,
    load_model,
    make_model,
    reconstruct,
    save_model,
)
from .dataset import DatasetSpec, MultifidelityDataset, assemble, average_data_size
from .training import TrainConfig, l1_riemann_loss, train
from .evaluate import (
    EvalReport,
    evaluate_model,
    performance_gap,
    relative_l1_error,
)

__all__ = [
    "FunctionSample",
    "Grid",
    "QuadratureWeights",
    "grids_overlap",
    "make_uniform_grid",
    "restrict",
    "trapezoid_weights",
    "OperatorModel",
    "approximate",
    "encode",
    "forward",
    "load_model",
    "make_model",
    "reconstruct",
    "save_model",
    "DatasetSpec",
    "MultifidelityDataset",
    "assemble",
    "average_data_size",
    "TrainConfig",
    "l1_riemann_loss",
    "train",
    "EvalReport",
    "evaluate_model",
    "performance_gap",
    "relative_l1_error",
]

__version__ = "0.1.0"
