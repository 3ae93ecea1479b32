"""Initial density profiles for experiments."""

from __future__ import annotations

import numpy as np

from .barriers import BarenblattSpec, barenblatt
from .core import Field, FieldVariable, Grid, Potential, density_from_pressure
from .errors import DomainTooSmallError
from .freeboundary import equilibrium_profile

__all__ = ["barenblatt_density", "bump_density", "equilibrium_offset_density"]


def barenblatt_density(grid: Grid, spec: BarenblattSpec, t: float = 0.0) -> Field:
    """Sample the self-similar profile at time t and convert to density."""
    if spec.support_radius(t) >= grid.extent - 2.0 * grid.h:
        raise DomainTooSmallError(
            f"support radius {spec.support_radius(t):.3g} does not fit in the box"
        )
    u = barenblatt(grid.centers(), t, spec)
    pressure = Field(grid, u, FieldVariable.PRESSURE, spec.m)
    return density_from_pressure(pressure, spec.m)


def bump_density(
    grid: Grid, m: float, amplitude: float, width: float, center=0.0
) -> Field:
    """Smooth compactly supported bump: amplitude * ((1 - |x-c|^2/w^2)_+)^2."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    if c.size == 1 and grid.dim == 2:
        c = np.full(2, float(c[0]))
    pts = grid.centers()
    r2 = np.sum((pts - c) ** 2, axis=-1)
    prof = np.maximum(1.0 - r2 / width**2, 0.0)
    values = amplitude * prof * prof
    if np.any(r2[_ring_mask(grid)] <= width**2):
        raise DomainTooSmallError("bump support reaches the box edge")
    return Field(grid, values, FieldVariable.DENSITY, m)


def _ring_mask(grid: Grid) -> np.ndarray:
    shape = grid.shape
    mask = np.zeros(shape, dtype=bool)
    if grid.dim == 1:
        mask[:2] = mask[-2:] = True
    else:
        mask[:2, :] = mask[-2:, :] = True
        mask[:, :2] = mask[:, -2:] = True
    return mask


def equilibrium_offset_density(
    grid: Grid, m: float, pot: Potential, mass: float, scale: float = 1.0
) -> Field:
    """Equilibrium density for the given mass, multiplied by ``scale``.

    With scale < 1 this gives data strictly below the stationary profile;
    with scale = 1 it is the (grid-sampled) stationary state itself.
    """
    prof = equilibrium_profile(mass, pot, m, grid)
    rho = density_from_pressure(prof.pressure, m)
    return rho.with_values(scale * rho.values)
