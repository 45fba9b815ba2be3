"""Structured vertex-centered grid on [0,L]x[0,1]^2 and scalar/vector fields.

Wall boundaries (x2, x3) carry a reflection parity per field component; the
parity defines ghost values for the difference stencils and the periodized
extension used by interpolation and streamline tracing.  There is no
extension in x1: inlet/outlet stencils are one-sided.
"""

from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

# Component parities (in x2, x3) for the common field classes.
# Velocity-like: normal component odd at its wall, everything else even.
VELOCITY_PARITY = ((1, 1), (-1, 1), (1, -1))
# Vorticity-like (also vector potentials): tangential components odd.
VORTICITY_PARITY = ((-1, -1), (1, -1), (-1, 1))
SCALAR_PARITY = (1, 1)


class DomainError(ValueError):
    """Point outside the (extended) domain."""


@dataclass(frozen=True)
class Grid:
    """Vertex-centered tensor grid: N_i nodes per axis, h_i = extent/(N_i-1)."""

    L: float
    shape: tuple

    def __post_init__(self):
        if self.L <= 0.0:
            raise ValueError(f"nozzle length must be positive, got {self.L}")
        if len(self.shape) != 3 or any(n < 3 for n in self.shape):
            raise ValueError(f"need >= 3 nodes per axis, got {self.shape}")

    @cached_property
    def axes(self):
        n1, n2, n3 = self.shape
        return (
            np.linspace(0.0, self.L, n1),
            np.linspace(0.0, 1.0, n2),
            np.linspace(0.0, 1.0, n3),
        )

    @cached_property
    def spacing(self):
        n1, n2, n3 = self.shape
        return (self.L / (n1 - 1), 1.0 / (n2 - 1), 1.0 / (n3 - 1))

    @cached_property
    def coords(self):
        """Meshgrid node coordinates, shape (N1,N2,N3) each."""
        return np.meshgrid(*self.axes, indexing="ij")

    @cached_property
    def node_weights(self):
        """Per-axis trapezoid weights (1/2 at the two end nodes)."""
        out = []
        for n in self.shape:
            w = np.ones(n)
            w[0] = w[-1] = 0.5
            out.append(w)
        return tuple(out)

    @cached_property
    def cell_volumes(self):
        """Control-volume measure dV per node (trapezoid product rule)."""
        w1, w2, w3 = self.node_weights
        h1, h2, h3 = self.spacing
        return (
            w1[:, None, None] * w2[None, :, None] * w3[None, None, :]
            * h1 * h2 * h3
        )

    @cached_property
    def plane_weights(self):
        """Surface measure dS per node of an inlet/outlet plane (N2,N3)."""
        _, w2, w3 = self.node_weights
        _, h2, h3 = self.spacing
        return w2[:, None] * w3[None, :] * h2 * h3

    def refine(self):
        """Halved spacing: N -> 2N-1 per axis (nodes are nested)."""
        return Grid(self.L, tuple(2 * n - 1 for n in self.shape))


@dataclass
class ScalarField:
    grid: Grid
    values: np.ndarray
    parity: tuple = SCALAR_PARITY
    zero_mean: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} != grid {self.grid.shape}"
            )

    def check_finite(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite entries")

    def mean(self):
        dv = self.grid.cell_volumes
        return float(np.sum(self.values * dv) / np.sum(dv))

    def project_zero_mean(self):
        out = ScalarField(self.grid, self.values - self.mean(), self.parity,
                          zero_mean=True)
        return out

    @classmethod
    def zeros(cls, grid, parity=SCALAR_PARITY):
        return cls(grid, np.zeros(grid.shape), parity)

    @classmethod
    def from_function(cls, grid, fun, parity=SCALAR_PARITY):
        x1, x2, x3 = grid.coords
        return cls(grid, np.asarray(fun(x1, x2, x3), dtype=float), parity)


@dataclass
class VectorField:
    grid: Grid
    values: np.ndarray  # (N1, N2, N3, 3)
    parity: tuple = VELOCITY_PARITY

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape + (3,):
            raise ValueError(
                f"values shape {self.values.shape} != grid {self.grid.shape}+(3,)"
            )

    def component(self, i):
        return ScalarField(self.grid, self.values[..., i], self.parity[i])

    def magnitude_sq(self):
        return np.sum(self.values**2, axis=-1)

    @classmethod
    def zeros(cls, grid, parity=VELOCITY_PARITY):
        return cls(grid, np.zeros(grid.shape + (3,)), parity)

    @classmethod
    def from_functions(cls, grid, funs, parity=VELOCITY_PARITY):
        x1, x2, x3 = grid.coords
        vals = np.stack([np.asarray(f(x1, x2, x3), dtype=float) for f in funs],
                        axis=-1)
        return cls(grid, vals, parity)
