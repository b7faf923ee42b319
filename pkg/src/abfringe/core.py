"""
Geometry and quadrature helpers shared by the field, phase and
interferometer modules.

Vectors are plain ``numpy`` arrays of shape ``(3,)`` (or ``(..., 3)`` for
batches).  A *sampler* is any callable ``F(x, t)`` that accepts points of
shape ``(..., 3)`` and times broadcastable to ``(...)`` and returns field
values of shape ``(..., 3)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

Sampler = Callable[[np.ndarray, np.ndarray], np.ndarray]

DEFAULT_N_SUB = 64
CLOSURE_TOL = 1e-12  # cm


class QuadratureError(ArithmeticError):
    """Non-finite values met while integrating."""


class DegeneratePathWarning(UserWarning):
    """All events of a path coincide; the integral is zero."""


def vec3(x, y=None, z=None) -> np.ndarray:
    if y is None:
        out = np.asarray(x, dtype=float)
        if out.shape != (3,):
            raise ValueError(f"expected a 3-vector, got shape {out.shape}")
        return out
    return np.array([x, y, z], dtype=float)


@dataclass(frozen=True)
class Event:
    position: np.ndarray
    time: float

    def __post_init__(self):
        object.__setattr__(self, "position", vec3(self.position))
        if not (np.all(np.isfinite(self.position)) and np.isfinite(self.time)):
            raise ValueError("event coordinates must be finite")


@dataclass
class TimedPath:
    """Ordered events joined by straight segments, linear in time."""

    events: list[Event]
    closed: bool = False

    def __post_init__(self):
        if len(self.events) < 2:
            raise ValueError("a path needs at least two events")
        times = np.array([ev.time for ev in self.events])
        if np.any(np.diff(times) < 0):
            raise ValueError("event times must be non-decreasing")
        if self.closed:
            gap = np.linalg.norm(self.events[0].position - self.events[-1].position)
            if gap > CLOSURE_TOL:
                raise ValueError(f"closed path does not close: gap {gap:.3e} cm")

    @classmethod
    def from_arrays(cls, positions, times, closed: bool = False) -> "TimedPath":
        positions = np.asarray(positions, dtype=float)
        times = np.broadcast_to(np.asarray(times, dtype=float), positions.shape[:1])
        return cls([Event(p, t) for p, t in zip(positions, times)], closed=closed)

    @property
    def positions(self) -> np.ndarray:
        return np.array([ev.position for ev in self.events])

    @property
    def times(self) -> np.ndarray:
        return np.array([ev.time for ev in self.events])

    def length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.positions, axis=0), axis=1)))


def simpson_rule(n_panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of composite Simpson on [0, 1] with ``n_panels`` panels."""
    if n_panels < 1:
        raise ValueError("need at least one Simpson panel")
    n = 2 * n_panels
    u = np.linspace(0.0, 1.0, n + 1)
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return u, w / (3.0 * n)


def _check_finite(values: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(values)):
        raise QuadratureError(f"non-finite sampler output in {what}")


def split_at_radius(path: TimedPath, radius: float) -> TimedPath:
    """Insert events where segments cross the cylinder rho = radius about z.

    Keeps quadrature panels off the kink of fields that change form at a
    cylindrical wall.
    """
    pos, times = path.positions, path.times
    out_p, out_t = [pos[0]], [times[0]]
    for a, b, ta, tb in zip(pos[:-1], pos[1:], times[:-1], times[1:]):
        d = b - a
        # |a_xy + s d_xy|^2 = radius^2
        qa = d[0] ** 2 + d[1] ** 2
        qb = 2.0 * (a[0] * d[0] + a[1] * d[1])
        qc = a[0] ** 2 + a[1] ** 2 - radius ** 2
        cuts = []
        if qa > 0.0:
            disc = qb * qb - 4.0 * qa * qc
            if disc > 0.0:
                sq = np.sqrt(disc)
                cuts = sorted(s for s in ((-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa))
                              if 1e-12 < s < 1.0 - 1e-12)
        for s in cuts:
            out_p.append(a + s * d)
            out_t.append(ta + s * (tb - ta))
        out_p.append(b)
        out_t.append(tb)
    return TimedPath.from_arrays(np.array(out_p), np.array(out_t), closed=path.closed)


def line_integral(sampler: Sampler, path: TimedPath, n_sub: int = DEFAULT_N_SUB,
                  wall_radius: float | None = None) -> float:
    """Integral of F(x(s), t(s)) . dx along a timed polygonal path.

    Position and time are interpolated linearly between consecutive
    events; each segment gets ``n_sub`` Simpson panels.  If
    ``wall_radius`` is given, segments are first split where they cross
    that cylinder.
    """
    if wall_radius is not None:
        path = split_at_radius(path, wall_radius)
    pos, times = path.positions, path.times
    seg = np.diff(pos, axis=0)
    if not np.any(np.linalg.norm(seg, axis=1) > 0.0):
        warnings.warn("degenerate path: all events coincide", DegeneratePathWarning,
                      stacklevel=2)
        return 0.0

    u, w = simpson_rule(n_sub)
    x = pos[:-1, None, :] + u[None, :, None] * seg[:, None, :]
    t = times[:-1, None] + u[None, :] * np.diff(times)[:, None]
    F = np.asarray(sampler(x, t), dtype=float)
    _check_finite(F, "line_integral")
    integrand = np.einsum("sud,sd->su", F, seg)
    return float(np.sum(integrand @ w))


def curve_integral(sampler: Sampler, curve: Callable[[np.ndarray], tuple],
                   n_panels: int = DEFAULT_N_SUB, breaks: Sequence[float] = ()) -> float:
    """Integral of F . dx along a smooth parametric curve, u in [0, 1].

    ``curve(u)`` returns ``(x, t, dx_du)`` for an array of parameters.
    ``breaks`` are interior parameter values where the integrand may kink.
    """
    edges = np.unique(np.concatenate([[0.0], np.asarray(breaks, dtype=float), [1.0]]))
    un, wn = simpson_rule(n_panels)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        u = lo + (hi - lo) * un
        x, t, dx = curve(u)
        F = np.asarray(sampler(x, t), dtype=float)
        _check_finite(F, "curve_integral")
        total += (hi - lo) * float(np.einsum("ud,ud->u", F, dx) @ wn)
    return total


def _disk_basis(normal) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = vec3(normal)
    norm = np.linalg.norm(n)
    if norm == 0.0:
        raise ValueError("disk normal must be non-zero")
    n = n / norm
    helper = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(n, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return n, e1, e2


def surface_flux(sampler: Sampler, center, normal, radius: float, t: float,
                 n_r: int = DEFAULT_N_SUB, n_phi: int = 128,
                 r_breaks: Sequence[float] = ()) -> float:
    """Flux of F through a planar disk at fixed time ``t``.

    Radial direction: Gauss-Legendre with ``n_r`` nodes per sub-interval,
    split at ``r_breaks``; no node sits on a break, so fields that jump
    there are sampled on the correct side.  Azimuth: trapezoid rule,
    spectrally accurate for the periodic integrand.
    """
    if radius < 0:
        raise ValueError("disk radius must be non-negative")
    if radius == 0.0:
        return 0.0
    n, e1, e2 = _disk_basis(normal)
    c0 = vec3(center)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    dirs = np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2

    breaks = [b for b in r_breaks if 0.0 < b < radius]
    edges = np.array([0.0, *sorted(breaks), radius])
    gx, gw = np.polynomial.legendre.leggauss(n_r)
    un, wn = 0.5 * (gx + 1.0), 0.5 * gw
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        r = lo + (hi - lo) * un
        x = c0 + r[:, None, None] * dirs[None, :, :]
        F = np.asarray(sampler(x, np.full(x.shape[:-1], float(t))), dtype=float)
        _check_finite(F, "surface_flux")
        ring = (F @ n).sum(axis=1) * (2.0 * np.pi / n_phi)
        total += (hi - lo) * float((ring * r) @ wn)
    return total


def fd_curl(sampler: Sampler, point, t, h: float) -> np.ndarray:
    """Central-difference curl; O(h^2).  ``point`` may be (3,) or (..., 3)."""
    if h <= 0:
        raise ValueError("step h must be positive")
    p = np.asarray(point, dtype=float)
    J = np.empty(p.shape[:-1] + (3, 3))  # J[..., i, j] = dF_i / dx_j
    for j in range(3):
        dp = np.zeros(3)
        dp[j] = h
        J[..., :, j] = (np.asarray(sampler(p + dp, t)) - np.asarray(sampler(p - dp, t))) / (2 * h)
    return np.stack([J[..., 2, 1] - J[..., 1, 2],
                     J[..., 0, 2] - J[..., 2, 0],
                     J[..., 1, 0] - J[..., 0, 1]], axis=-1)


def fd_time_derivative(sampler: Sampler, point, t, h: float) -> np.ndarray:
    """Central-difference time derivative; O(h^2)."""
    if h <= 0:
        raise ValueError("step h must be positive")
    p = np.asarray(point, dtype=float)
    t = np.asarray(t, dtype=float)
    return (np.asarray(sampler(p, t + h)) - np.asarray(sampler(p, t - h))) / (2 * h)


def polygon_area(xy: np.ndarray) -> float:
    """Signed shoelace area of a closed polygon given by its vertices."""
    xy = np.asarray(xy, dtype=float)
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
