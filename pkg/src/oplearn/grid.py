"""Uniform grids on [0,1]^d with trapezoidal quadrature.

Node ordering is row-major lexicographic: for d=2 the node at flat index
i*R + j has coordinates (x_i, y_j), so x varies slowest.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform tensor-product grid over [0,1]^d including both boundaries."""

    d: int
    R: int
    points: np.ndarray = field(compare=False)  # (R^d, d)

    @property
    def spacing(self):
        return 1.0 / (self.R - 1)

    @property
    def n_nodes(self):
        return self.R**self.d

    def axis_nodes(self):
        """The R nodes along one axis, k/(R-1) for k = 0..R-1."""
        return np.arange(self.R) / (self.R - 1)


def make_uniform_grid(d, R):
    if d not in (1, 2):
        raise ValueError(f"dimension must be 1 or 2, got {d}")
    if R < 2:
        raise ValueError(f"need at least 2 points per axis, got {R}")
    x = np.arange(R) / (R - 1)
    if d == 1:
        points = x[:, None]
    else:
        xx, yy = np.meshgrid(x, x, indexing="ij")
        points = np.column_stack([xx.ravel(), yy.ravel()])
    return Grid(d=d, R=R, points=points)


@dataclass(frozen=True)
class QuadratureWeights:
    """One nonnegative weight per grid node; weights sum to the domain volume 1."""

    grid: Grid
    weights: np.ndarray


def trapezoid_weights(g):
    """Trapezoidal rule weights: h*(1/2, 1, ..., 1, 1/2) per axis, tensor product in 2D."""
    w1 = np.full(g.R, g.spacing)
    w1[0] *= 0.5
    w1[-1] *= 0.5
    if g.d == 1:
        w = w1
    else:
        w = np.outer(w1, w1).ravel()
    return QuadratureWeights(grid=g, weights=w)


def integrate(values, qw):
    """Quadrature sum of nodal values against the given weights."""
    return float(np.dot(qw.weights, values))


@dataclass(frozen=True)
class FunctionSample:
    """Values of a function at the nodes of a Grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.grid.n_nodes,):
            raise ValueError(
                f"expected {self.grid.n_nodes} values, got shape {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sample contains non-finite values")


def grids_overlap(Ra, Rb):
    """True iff the coarser grid's nodes are a subset of the finer grid's nodes.

    Holds exactly when (Ra-1) divides (Rb-1) or vice versa; partial overlap
    (shared gcd points only) counts as non-overlapping.
    """
    a, b = Ra - 1, Rb - 1
    return a % b == 0 or b % a == 0


def restrict(s, coarse):
    """Restrict a sample to a nested coarser grid by picking coincident nodes."""
    fine = s.grid
    if coarse.d != fine.d:
        raise ValueError("dimension mismatch")
    if coarse.R > fine.R or (fine.R - 1) % (coarse.R - 1) != 0:
        raise ValueError(f"grid R={coarse.R} is not nested in R={fine.R}")
    step = (fine.R - 1) // (coarse.R - 1)
    if fine.d == 1:
        values = s.values[::step]
    else:
        values = s.values.reshape(fine.R, fine.R)[::step, ::step].ravel()
    return FunctionSample(grid=coarse, values=values.copy())
