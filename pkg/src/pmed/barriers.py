"""Closed-form barrier families and pointwise sub/supersolution checks.

The pressure equation under scrutiny is

    u_t = (m-1) u Lap(u) + |grad u|^2 + grad u . grad Phi + (m-1) u Lap(Phi)

with free-boundary law  u_t = |grad u|^2 + grad Phi . grad u  on the edge of
the positivity set.  Two explicit families act as comparison profiles:

* the self-similar Barenblatt pressure
      B(x, t) = (C (t+tau)^(2 lam) - K |x|^2)_+ / (t+tau),
      lam = 1 / ((m-1) d + 2),  K = lam / 2,
  an exact solution of the drift-free equation, and

* annular traveling waves  H(x, t) = A (|x| + omega t - B)_+, which are
  supersolutions of the drift-free equation on {|x| <= R} x [ (B-R)/omega, 0 ]
  whenever omega/A > 1 + 2(m-1)(n-1)(R-B)/R and R/2 < B < R.

Ball-extremized, exponentially weighted perturbations (sup/inf convolutions)
followed by a velocity-preserving hyperbolic rescale turn these into local
barriers for the full drift equation.  ``residual_pmed`` verifies the
resulting inequalities by centered finite differences on a sample lattice.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .core import Potential
from .errors import (
    InvalidInputError,
    InvalidParameterError,
    InvalidTimeError,
    OutOfCylinderError,
)

__all__ = [
    "BarenblattSpec",
    "SphericalWaveSpec",
    "RescaleSpec",
    "RescaledBarrierSpec",
    "BarrierSpec",
    "Evaluable",
    "barenblatt",
    "spherical_wave",
    "validate_wave_params",
    "sup_convolution",
    "inf_convolution",
    "hyperbolic_rescale",
    "build_barrier",
    "SpaceTimeBox",
    "ResidualReport",
    "residual_pmed",
]

# evaluable profile: (points of shape (..., dim), time) -> values of shape (...)
Evaluable = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class BarenblattSpec:
    """Parameters of the self-similar compactly supported pressure profile."""

    m: float
    d: int
    tau: float
    C: float

    def __post_init__(self):
        if not self.m > 1.0:
            raise InvalidParameterError(f"m must be > 1, got {self.m}")
        if self.d not in (1, 2):
            raise InvalidParameterError(f"d must be 1 or 2, got {self.d}")
        if not self.tau > 0.0:
            raise InvalidParameterError(f"tau must be > 0, got {self.tau}")
        if not self.C > 0.0:
            raise InvalidParameterError(f"C must be > 0, got {self.C}")

    @property
    def lam(self) -> float:
        return 1.0 / ((self.m - 1.0) * self.d + 2.0)

    @property
    def K(self) -> float:
        return 0.5 * self.lam

    def support_radius(self, t: float) -> float:
        s = t + self.tau
        if s <= 0.0:
            raise InvalidTimeError(f"t + tau must be > 0, got {s}")
        return float(np.sqrt(self.C / self.K) * s**self.lam)

    def boundary_speed(self, t: float) -> float:
        """d/dt of the support radius (hand-differentiated closed form)."""
        s = t + self.tau
        if s <= 0.0:
            raise InvalidTimeError(f"t + tau must be > 0, got {s}")
        return float(self.lam * np.sqrt(self.C / self.K) * s ** (self.lam - 1.0))

    def boundary_gradient(self, t: float) -> float:
        """|grad u| on the support boundary: 2 K r(t) / (t + tau)."""
        s = t + self.tau
        return float(2.0 * self.K * self.support_radius(t) / s)


@dataclass(frozen=True)
class SphericalWaveSpec:
    """Annular traveling-wave supersolution A(|x| + omega t - B)_+."""

    A: float
    omega: float
    B: float
    R: float
    m: float
    d: int

    def __post_init__(self):
        if not self.A > 0.0:
            raise InvalidParameterError(f"A must be > 0, got {self.A}")
        if not self.omega > 0.0:
            raise InvalidParameterError(f"omega must be > 0, got {self.omega}")
        if not self.R > 0.0:
            raise InvalidParameterError(f"R must be > 0, got {self.R}")
        if not self.m > 1.0:
            raise InvalidParameterError(f"m must be > 1, got {self.m}")
        if self.d not in (1, 2):
            raise InvalidParameterError(f"d must be 1 or 2, got {self.d}")

    def is_valid(self) -> bool:
        return validate_wave_params(self.A, self.omega, self.B, self.R, self.m, self.d)


@dataclass(frozen=True)
class RescaleSpec:
    """Data of the velocity-preserving local rescale around (x0, t0).

    ``drift`` is the frozen drift vector grad Phi(x0); ``C_pert`` scales the
    convolution strength needed to absorb the potential's curvature.
    """

    alpha: float
    x0: tuple[float, ...]
    t0: float
    drift: tuple[float, ...]
    C_pert: float

    def __post_init__(self):
        # alpha = 1 is the identity rescale; convolution strengths must still
        # land strictly inside (0, 1)
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidParameterError(f"alpha must be in (0, 1], got {self.alpha}")
        if len(self.x0) != len(self.drift):
            raise InvalidParameterError("x0 and drift must have the same dimension")
        if not self.C_pert > 0.0:
            raise InvalidParameterError(f"C_pert must be > 0, got {self.C_pert}")


@dataclass(frozen=True)
class RescaledBarrierSpec:
    """A base profile pushed through convolution + hyperbolic rescale."""

    base: Union[BarenblattSpec, SphericalWaveSpec]
    rescale: RescaleSpec


BarrierSpec = Union[BarenblattSpec, SphericalWaveSpec, RescaledBarrierSpec]


def _radii(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.sum(x * x, axis=-1))


def barenblatt(x: np.ndarray, t: float, spec: BarenblattSpec) -> np.ndarray:
    """Evaluate the self-similar pressure profile at points x, time t."""
    s = t + spec.tau
    if s <= 0.0:
        raise InvalidTimeError(f"t + tau must be > 0, got {s}")
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    return np.maximum(spec.C * s ** (2.0 * spec.lam) - spec.K * r2, 0.0) / s


def spherical_wave(x: np.ndarray, t: float, spec: SphericalWaveSpec) -> np.ndarray:
    """Evaluate A(|x| + omega t - B)_+ at points x, time t."""
    r = _radii(x)
    return spec.A * np.maximum(r + spec.omega * t - spec.B, 0.0)


def validate_wave_params(
    A: float, omega: float, B: float, R: float, m: float, n: int
) -> bool:
    """True iff the wave parameters satisfy the supersolution criterion."""
    if not R > 0.0:
        raise InvalidParameterError(f"R must be > 0, got {R}")
    if not A > 0.0:
        raise InvalidParameterError(f"A must be > 0, got {A}")
    in_range = R / 2.0 < B < R
    slope_ok = omega / A > 1.0 + 2.0 * (m - 1.0) * (n - 1) * (R - B) / R
    return bool(in_range and slope_ok)


def _ball_offsets(dim: int, radius: float, step: float) -> np.ndarray:
    """Sample offsets covering the closed ball of given radius.

    One-dimensional balls are segments: the lattice includes both endpoints
    and the exact center, which makes extremization of radial ramps exact.
    In 2D a Cartesian sub-lattice of the disk plus the center is used.
    """
    if radius <= 0.0:
        return np.zeros((1, dim))
    k = max(1, int(np.ceil(radius / step)))
    axis = np.linspace(-radius, radius, 2 * k + 1)
    if dim == 1:
        return axis[:, None]
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=-1)
    keep = np.sum(pts * pts, axis=-1) <= radius * radius * (1.0 + 1e-12)
    return pts[keep]


def _ball_extremized(
    w: Evaluable, alpha: float, step: float | None, sign: float
) -> Evaluable:
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError(f"alpha must be in (0, 1), got {alpha}")

    def _conv(x: np.ndarray, t: float) -> np.ndarray:
        if t > 1.0 + 1e-12:
            raise InvalidTimeError(f"convolution radius negative for t = {t}")
        x = np.asarray(x, dtype=float)
        radius = alpha * (1.0 - min(t, 1.0))
        dim = x.shape[-1]
        offs = _ball_offsets(dim, radius, step if step is not None else radius / 4.0)
        pts = x[..., None, :] + offs  # (..., k, dim)
        vals = w(pts, t)
        ext = vals.max(axis=-1) if sign > 0 else vals.min(axis=-1)
        return np.exp(-sign * alpha * t) * ext

    return _conv


def sup_convolution(w: Evaluable, alpha: float, step: float | None = None) -> Evaluable:
    """e^(-alpha t) * sup of w over the ball of radius alpha (1 - t)."""
    return _ball_extremized(w, alpha, step, sign=+1.0)


def inf_convolution(w: Evaluable, alpha: float, step: float | None = None) -> Evaluable:
    """e^(+alpha t) * inf of w over the ball of radius alpha (1 - t)."""
    return _ball_extremized(w, alpha, step, sign=-1.0)


def hyperbolic_rescale(w: Evaluable, spec: RescaleSpec) -> Evaluable:
    """u(x, t) = alpha * w(alpha^-1 (x - x0 + drift (t - t0)), alpha^-1 (t - t0)).

    Amplitudes shrink by alpha while gradients (hence boundary velocities)
    are preserved.  Evaluation is restricted to the cylinder
    |x - x0| <= alpha, t in [t0 - alpha, t0].
    """
    a = spec.alpha
    x0 = np.asarray(spec.x0, dtype=float)
    b = np.asarray(spec.drift, dtype=float)

    def _rescaled(x: np.ndarray, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        dt = t - spec.t0
        if dt > 1e-9 or dt < -a - 1e-9:
            raise OutOfCylinderError(
                f"t = {t} outside [{spec.t0 - a}, {spec.t0}] for alpha = {a}"
            )
        rel = x - x0
        if np.any(np.sum(rel * rel, axis=-1) > a * a * (1.0 + 1e-9)):
            raise OutOfCylinderError(f"points outside the ball of radius {a} around {spec.x0}")
        return a * w((rel + b * dt) / a, dt / a)

    return _rescaled


def build_barrier(spec: BarrierSpec, step: float | None = None) -> Evaluable:
    """Turn a barrier parameter set into an evaluable space-time profile.

    Rescaled kinds are composed as convolution at strength C_pert * alpha in
    the unit scale followed by the hyperbolic rescale: inf convolution for
    the wave (supersolution side), sup convolution for the Barenblatt
    (subsolution side).
    """
    if isinstance(spec, BarenblattSpec):
        return lambda x, t: barenblatt(x, t, spec)
    if isinstance(spec, SphericalWaveSpec):
        return lambda x, t: spherical_wave(x, t, spec)
    if isinstance(spec, RescaledBarrierSpec):
        base = build_barrier(spec.base)
        strength = spec.rescale.C_pert * spec.rescale.alpha
        if isinstance(spec.base, SphericalWaveSpec):
            conv = inf_convolution(base, strength, step)
        else:
            conv = sup_convolution(base, strength, step)
        return hyperbolic_rescale(conv, spec.rescale)
    raise InvalidParameterError(f"unknown barrier spec {spec!r}")


@dataclass(frozen=True)
class SpaceTimeBox:
    """Axis-aligned sampling region: per-axis [lo, hi] plus a time window."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    t_lo: float
    t_hi: float

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise InvalidParameterError("lo and hi must have the same dimension")
        if any(a > b for a, b in zip(self.lo, self.hi)):
            raise InvalidParameterError("box must satisfy lo <= hi per axis")
        if self.t_lo > self.t_hi:
            raise InvalidParameterError("box must satisfy t_lo <= t_hi")

    @property
    def dim(self) -> int:
        return len(self.lo)


@dataclass(frozen=True)
class ResidualReport:
    """Sampled inequality residuals for one candidate profile.

    Interior residual (per sample point with u above the floor):
        r_int = u_t - (m-1) u Lap(u) - |grad u|^2 - grad u . grad Phi
                - (m-1) u Lap(Phi)
    Boundary residual (velocity form, at floor-crossing points):
        r_bd  = u_t / |grad u| - |grad u| - grad Phi . grad u / |grad u|
    A subsolution check passes when the worst residuals stay below +tol;
    a supersolution check when they stay above -tol (rate form for the
    boundary, i.e. r_bd * |grad u|).
    """

    kind: str
    tol: float
    interior_residuals: np.ndarray
    interior_points: np.ndarray
    interior_times: np.ndarray
    boundary_residuals: np.ndarray
    boundary_rate_residuals: np.ndarray
    boundary_points: np.ndarray
    boundary_times: np.ndarray
    passed: bool

    @property
    def interior_count(self) -> int:
        return int(self.interior_residuals.size)

    @property
    def boundary_count(self) -> int:
        return int(self.boundary_residuals.size)

    def worst_interior(self) -> float:
        if self.interior_residuals.size == 0:
            return 0.0
        vals = self.interior_residuals
        return float(vals.max() if self.kind == "sub" else vals.min())

    def worst_boundary(self) -> float:
        if self.boundary_rate_residuals.size == 0:
            return 0.0
        vals = self.boundary_rate_residuals
        return float(vals.max() if self.kind == "sub" else vals.min())


def _lattice(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + np.arange(n) * step


def _derivatives(
    candidate: Evaluable,
    pot: Potential,
    pts: np.ndarray,
    t: float,
    h_s: float,
    m: float,
):
    """Centered differences of the candidate and drift terms at sample points."""
    dim = pts.shape[-1]
    u0 = np.asarray(candidate(pts, t), dtype=float)
    dt = h_s * h_s
    u_t = (candidate(pts, t + dt) - candidate(pts, t - dt)) / (2.0 * dt)
    grad = np.empty(u0.shape + (dim,))
    lap = np.zeros_like(u0)
    lap_phi = np.zeros_like(u0)
    for k in range(dim):
        e = np.zeros(dim)
        e[k] = h_s
        up = candidate(pts + e, t)
        um = candidate(pts - e, t)
        grad[..., k] = (up - um) / (2.0 * h_s)
        lap += (up - 2.0 * u0 + um) / (h_s * h_s)
        gp = pot.grad(pts + e)[..., k]
        gm = pot.grad(pts - e)[..., k]
        lap_phi += (gp - gm) / (2.0 * h_s)
    g_phi = pot.grad(pts)
    r_int = (
        u_t
        - (m - 1.0) * u0 * lap
        - np.sum(grad * grad, axis=-1)
        - np.sum(grad * g_phi, axis=-1)
        - (m - 1.0) * u0 * lap_phi
    )
    grad_norm = np.sqrt(np.sum(grad * grad, axis=-1))
    rate = u_t - grad_norm**2 - np.sum(grad * g_phi, axis=-1)
    return u0, r_int, rate, grad_norm


def residual_pmed(
    candidate: Evaluable,
    pot: Potential,
    kind: str,
    box: SpaceTimeBox,
    h_s: float,
    m: float,
    c_tol: float | None = None,
    u_floor: float | None = None,
    grad_floor: float | None = None,
) -> ResidualReport:
    """Sample the sub/supersolution inequalities of the pressure equation.

    The candidate must be evaluable on the box enlarged by h_s in space and
    h_s^2 in time.  Interior points are those with u above ``u_floor``
    (default 10 h_s); boundary residuals are evaluated at the floor-crossing
    points of each lattice line, where |grad u| exceeds ``grad_floor``.
    """
    if kind not in ("sub", "super"):
        raise InvalidParameterError(f"kind must be 'sub' or 'super', got {kind!r}")
    if not h_s > 0.0:
        raise InvalidParameterError(f"h_s must be > 0, got {h_s}")
    floor = 10.0 * h_s if u_floor is None else u_floor
    gfloor = 10.0 * h_s if grad_floor is None else grad_floor

    axes = [_lattice(lo, hi, h_s) for lo, hi in zip(box.lo, box.hi)]
    times = _lattice(box.t_lo, box.t_hi, h_s)
    if box.dim == 1:
        pts = axes[0][:, None]
    else:
        X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
        pts = np.stack([X, Y], axis=-1)

    int_res, int_pts, int_ts = [], [], []
    bd_vel, bd_rate, bd_pts, bd_ts = [], [], [], []
    u_max = 0.0
    for t in times:
        u0, r_int, _, _ = _derivatives(candidate, pot, pts, float(t), h_s, m)
        u_max = max(u_max, float(u0.max(initial=0.0)))
        mask = u0 > floor
        if np.any(mask):
            int_res.append(r_int[mask])
            int_pts.append(pts[mask])
            int_ts.append(np.full(int(mask.sum()), t))
        crossings = _floor_crossings(u0, pts, floor, box.dim, h_s)
        if crossings.size:
            _, r_b, rate, gn = _derivatives(candidate, pot, crossings, float(t), h_s, m)
            ok = gn > gfloor
            if np.any(ok):
                bd_rate.append(rate[ok])
                bd_vel.append(rate[ok] / gn[ok])
                bd_pts.append(crossings[ok])
                bd_ts.append(np.full(int(ok.sum()), t))

    interior = np.concatenate(int_res) if int_res else np.empty(0)
    rate_arr = np.concatenate(bd_rate) if bd_rate else np.empty(0)
    vel_arr = np.concatenate(bd_vel) if bd_vel else np.empty(0)
    if not (np.all(np.isfinite(interior)) and np.all(np.isfinite(vel_arr))):
        raise InvalidInputError("candidate produced non-finite residuals")

    tol = (c_tol if c_tol is not None else 50.0 * (1.0 + u_max)) * h_s
    if kind == "sub":
        ok_int = interior.size == 0 or float(interior.max()) <= tol
        ok_bd = rate_arr.size == 0 or float(rate_arr.max()) <= tol
    else:
        ok_int = interior.size == 0 or float(interior.min()) >= -tol
        ok_bd = rate_arr.size == 0 or float(rate_arr.min()) >= -tol

    return ResidualReport(
        kind=kind,
        tol=tol,
        interior_residuals=interior,
        interior_points=np.concatenate(int_pts) if int_pts else np.empty((0, box.dim)),
        interior_times=np.concatenate(int_ts) if int_ts else np.empty(0),
        boundary_residuals=vel_arr,
        boundary_rate_residuals=rate_arr,
        boundary_points=np.concatenate(bd_pts) if bd_pts else np.empty((0, box.dim)),
        boundary_times=np.concatenate(bd_ts) if bd_ts else np.empty(0),
        passed=bool(ok_int and ok_bd),
    )


def _floor_crossings(
    u0: np.ndarray, pts: np.ndarray, floor: float, dim: int, h_s: float
) -> np.ndarray:
    """Linear-interpolated floor-level crossings along each lattice line."""
    out = []
    if dim == 1:
        out.append(_line_crossings(u0, pts[:, 0], floor))
        pts_out = [np.asarray(c)[:, None] for c in out if len(c)]
        return np.concatenate(pts_out) if pts_out else np.empty((0, 1))
    found = []
    above = u0 > floor
    # crossings along axis 0, then axis 1, row-major
    for axis in (0, 1):
        a = above if axis == 0 else above.T
        v = u0 if axis == 0 else u0.T
        p = pts if axis == 0 else np.swapaxes(pts, 0, 1)
        flip = a[:-1, :] != a[1:, :]
        idx = np.argwhere(flip)
        for i, j in idx:
            v0, v1 = v[i, j], v[i + 1, j]
            theta = (floor - v0) / (v1 - v0)
            found.append(p[i, j] + theta * (p[i + 1, j] - p[i, j]))
    return np.asarray(found) if found else np.empty((0, 2))


def _line_crossings(vals: np.ndarray, xs: np.ndarray, floor: float) -> list[float]:
    above = vals > floor
    out = []
    for i in np.nonzero(above[:-1] != above[1:])[0]:
        theta = (floor - vals[i]) / (vals[i + 1] - vals[i])
        out.append(float(xs[i] + theta * (xs[i + 1] - xs[i])))
    return out
