"""Grids, scalar fields, the density/pressure transform, and drift potentials.

The computational domain is a fixed box [-L, L]^dim (dim = 1 or 2) with a
uniform cell width h shared by all axes.  Cell centers sit at
x_i = -L + (i + 1/2) h.  Fields store one nonnegative value per cell and are
tagged as holding either the density rho or the pressure
u = m/(m-1) * rho^(m-1); the outermost cell ring is required to be zero so
that everything stays compactly supported inside the box.

All operations are pure functions of immutable inputs.  Reductions use a
fixed traversal order, so repeated runs are bit-identical.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidExponentError, InvalidInputError, InvalidParameterError

__all__ = [
    "Grid",
    "FieldVariable",
    "Field",
    "Potential",
    "pressure_from_density",
    "density_from_pressure",
    "integrate",
    "make_quadratic_potential",
    "make_zero_potential",
    "make_polynomial_potential",
]


@dataclass(frozen=True)
class Grid:
    """Uniform Cartesian lattice on the box [-extent, extent]^dim."""

    dim: int
    h: float
    extent: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise InvalidParameterError(f"dim must be 1 or 2, got {self.dim}")
        if not self.h > 0:
            raise InvalidParameterError(f"spacing h must be > 0, got {self.h}")
        if not self.extent > 0:
            raise InvalidParameterError(f"extent must be > 0, got {self.extent}")
        n = round(2.0 * self.extent / self.h)
        if abs(n * self.h - 2.0 * self.extent) > 1e-9 * self.extent:
            raise InvalidParameterError(
                f"2*extent/h = {2.0 * self.extent / self.h} is not an integer cell count"
            )
        if n < 8:
            raise InvalidParameterError(f"need at least 8 cells per axis, got {n}")

    @property
    def n_cells(self) -> int:
        """Cells per axis."""
        return round(2.0 * self.extent / self.h)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_cells,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    def axis_centers(self) -> np.ndarray:
        """Cell-center coordinates along one axis, ascending."""
        n = self.n_cells
        return -self.extent + (np.arange(n) + 0.5) * self.h

    def centers(self) -> np.ndarray:
        """Cell-center positions, shape grid.shape + (dim,)."""
        return _centers_cached(self)

    def coord_of_index(self, i: int) -> float:
        return -self.extent + (i + 0.5) * self.h

    def index_of_coord(self, x: float) -> int:
        return int(round((x + self.extent) / self.h - 0.5))


@lru_cache(maxsize=64)
def _centers_cached(grid: Grid) -> np.ndarray:
    ax = grid.axis_centers()
    if grid.dim == 1:
        pts = ax[:, None]
    else:
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        pts = np.stack([X, Y], axis=-1)
    pts.setflags(write=False)
    return pts


class FieldVariable(enum.Enum):
    DENSITY = "density"
    PRESSURE = "pressure"


@dataclass(frozen=True)
class Field:
    """Nonnegative scalar per cell, compactly supported inside the box.

    ``m`` is the nonlinearity exponent the field belongs to; it rides along
    so that transforms and diagnostics agree on the same physics.
    """

    grid: Grid
    values: np.ndarray
    variable: FieldVariable
    m: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise InvalidInputError(
                f"values shape {v.shape} does not match grid shape {self.grid.shape}"
            )
        if np.any(v < 0.0):
            raise InvalidInputError("field values must be nonnegative")
        if not self.m > 1.0:
            raise InvalidExponentError(f"exponent m must be > 1, got {self.m}")
        if _outer_ring_max(v) != 0.0:
            raise InvalidInputError("outermost cell ring must be zero (compact support)")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values: np.ndarray, variable: FieldVariable | None = None) -> "Field":
        return Field(self.grid, values, variable or self.variable, self.m)

    def max(self) -> float:
        return float(self.values.max())


def _outer_ring_max(v: np.ndarray) -> float:
    if v.ndim == 1:
        return float(max(abs(v[0]), abs(v[-1])))
    return float(
        max(
            np.abs(v[0, :]).max(),
            np.abs(v[-1, :]).max(),
            np.abs(v[:, 0]).max(),
            np.abs(v[:, -1]).max(),
        )
    )


def pressure_from_density(rho: Field, m: float) -> Field:
    """u = m/(m-1) rho^(m-1), cellwise.  Support is unchanged."""
    if not m > 1.0:
        raise InvalidExponentError(f"exponent m must be > 1, got {m}")
    if rho.variable is not FieldVariable.DENSITY:
        raise InvalidInputError("pressure_from_density expects a density field")
    u = (m / (m - 1.0)) * np.power(rho.values, m - 1.0)
    return Field(rho.grid, u, FieldVariable.PRESSURE, m)


def density_from_pressure(u: Field, m: float) -> Field:
    """rho = ((m-1)/m u)^(1/(m-1)), the inverse of pressure_from_density."""
    if not m > 1.0:
        raise InvalidExponentError(f"exponent m must be > 1, got {m}")
    if u.variable is not FieldVariable.PRESSURE:
        raise InvalidInputError("density_from_pressure expects a pressure field")
    rho = np.power(((m - 1.0) / m) * u.values, 1.0 / (m - 1.0))
    return Field(u.grid, rho, FieldVariable.DENSITY, m)


def integrate(f: Field) -> float:
    """h^dim * sum of cell values, reduced in a fixed deterministic order."""
    return f.grid.cell_volume * float(np.sum(f.values))


@dataclass(frozen=True)
class Potential:
    """Drift potential as evaluable value/gradient plus coarse metadata.

    ``eval`` maps points of shape (..., dim) to values of shape (...);
    ``grad`` maps the same points to gradients of shape (..., dim).
    ``hessian_bound`` is an upper bound for the Hessian norm on the box and
    ``min_point`` locates the global minimum when the potential is strictly
    convex (stored as a tuple so potentials stay hashable).
    """

    eval: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    grad: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    hessian_bound: float
    strictly_convex: bool
    min_point: tuple[float, ...] | None = None

    def min_value(self) -> float:
        if self.min_point is None:
            raise InvalidInputError("potential has no recorded minimum point")
        return float(self.eval(np.asarray(self.min_point, dtype=float)))


def make_quadratic_potential(a: float, dim: int = 1) -> Potential:
    """Phi(x) = a |x|^2 with gradient 2 a x; strictly convex, minimum at 0."""
    if not a > 0:
        raise InvalidParameterError(f"quadratic coefficient must be > 0, got {a}")

    def _eval(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return a * np.sum(x * x, axis=-1)

    def _grad(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return 2.0 * a * x

    return Potential(
        eval=_eval,
        grad=_grad,
        hessian_bound=2.0 * a * dim,
        strictly_convex=True,
        min_point=(0.0,) * dim,
    )


def make_zero_potential(dim: int = 1) -> Potential:
    """Phi = 0: no drift, not strictly convex."""

    def _eval(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1])

    def _grad(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape)

    return Potential(eval=_eval, grad=_grad, hessian_bound=0.0, strictly_convex=False)


def make_polynomial_potential(
    coefficients: Sequence[float],
    strictly_convex: bool = False,
    min_point: tuple[float, ...] | None = None,
) -> Potential:
    """One-dimensional polynomial Phi(x) = sum_k c_k x^k.

    Convexity cannot be inferred cheaply for arbitrary coefficients, so the
    caller declares it (and then the minimum location, if known).
    """
    coeffs = [float(c) for c in coefficients]
    if len(coeffs) < 1:
        raise InvalidParameterError("need at least one polynomial coefficient")
    dcoeffs = [k * c for k, c in enumerate(coeffs)][1:] or [0.0]

    def _eval(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        s = x[..., 0]
        out = np.zeros_like(s)
        for c in reversed(coeffs):
            out = out * s + c
        return out

    def _grad(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        s = x[..., 0]
        out = np.zeros_like(s)
        for c in reversed(dcoeffs):
            out = out * s + c
        return out[..., None]

    # crude but safe Hessian bound on |x| <= 10 for the second derivative
    d2coeffs = [k * c for k, c in enumerate(dcoeffs)][1:] or [0.0]
    hess = float(sum(abs(c) * 10.0**k for k, c in enumerate(d2coeffs)))
    return Potential(
        eval=_eval,
        grad=_grad,
        hessian_bound=hess,
        strictly_convex=strictly_convex,
        min_point=min_point,
    )
