"""
Electric and magnetic contributions to the Aharonov-Bohm phase of a
coaxial circular loop around a solenoid with time-varying flux.

Phase normalization is e/(hbar c), so that

    alpha = (e / hbar c) [ int (oint E . dx) c dt  +  int B . dS ]

is dimensionless in Gaussian units.  The electric term integrates the
loop EMF over the observation window [t0, t0 + T]; the magnetic term is
the flux through the loop when the window closes.  By Faraday's law the
electric term equals minus the flux *change* over the window, so
whatever part of the flux built up inside the window cancels and only
the flux present at t0 survives.  With the window opened while the
time-varying potential A_1 is still zero, the survivor is exactly the
static flux of A_0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS
from .core import DEFAULT_N_SUB, TimedPath, curve_integral, simpson_rule, surface_flux
from .fields import Solenoid, electric_field, magnetic_field, vector_potential

FLUX_AGREEMENT_RTOL = 1e-8


class ConsistencyError(RuntimeError):
    """Two independent evaluations of the same quantity disagree."""


@dataclass(frozen=True)
class LoopSpec:
    """Circle of radius ``radius`` about the solenoid axis (z = 0 plane).

    Traversed once, starting at angle 0, at uniform angular speed over
    [t0, t0 + duration]; ``direction`` +1 is counter-clockwise seen
    from +z.
    """

    radius: float
    t0: float = 0.0
    duration: float = 0.0
    direction: int = 1

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("loop radius must be positive")
        if self.duration < 0:
            raise ValueError("loop duration must be >= 0")
        if self.direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")

    @property
    def t_end(self) -> float:
        return self.t0 + self.duration

    def curve(self, t_fixed: float | None = None):
        """Parametric form u -> (x, t, dx/du) for ``core.curve_integral``."""
        rho, sgn = self.radius, self.direction

        def _c(u):
            u = np.asarray(u, dtype=float)
            ang = sgn * 2 * math.pi * u
            x = rho * np.stack([np.cos(ang), np.sin(ang), np.zeros_like(ang)], axis=-1)
            dx = sgn * 2 * math.pi * rho * np.stack(
                [-np.sin(ang), np.cos(ang), np.zeros_like(ang)], axis=-1)
            if t_fixed is None:
                t = self.t0 + u * self.duration
            else:
                t = np.full(u.shape, float(t_fixed))
            return x, t, dx

        return _c

    def timed_path(self, n_events: int = 257) -> TimedPath:
        u = np.linspace(0.0, 1.0, n_events)
        x, t, _ = self.curve()(u)
        x[-1] = x[0]
        return TimedPath.from_arrays(x, t, closed=True)

    def captured_area(self, s: Solenoid) -> float:
        """Area of the flux-carrying region inside the loop."""
        return math.pi * min(self.radius, s.radius) ** 2


@dataclass(frozen=True)
class PhaseBreakdown:
    electric: float
    magnetic: float
    total: float
    static_part: float
    time_dependent_residual: float

    @property
    def magnetic_time_dependent(self) -> float:
        return self.magnetic - self.static_part

    def reversed(self) -> "PhaseBreakdown":
        return PhaseBreakdown(-self.electric, -self.magnetic, -self.total,
                              -self.static_part, -self.time_dependent_residual)


def loop_emf(loop: LoopSpec, s: Solenoid, t, n_sub: int = DEFAULT_N_SUB) -> np.ndarray:
    """oint E . dx around the loop at each time in ``t`` (statV)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    u, w = simpson_rule(n_sub)
    x, _, dx = loop.curve()(u)
    tt = np.broadcast_to(t[:, None], (t.size, u.size))
    E = electric_field(s, np.broadcast_to(x, (t.size,) + x.shape), tt)
    return np.einsum("tud,ud->tu", E, dx) @ w


def electric_phase(loop: LoopSpec, s: Solenoid, n_sub: int = DEFAULT_N_SUB,
                   n_t: int = DEFAULT_N_SUB, constants=CONSTANTS) -> float:
    """(e/hbar c) int_{t0}^{t0+T} (oint E . dx) c dt, by nested quadrature."""
    if loop.duration == 0.0:
        return 0.0
    ut, wt = simpson_rule(n_t)
    times = loop.t0 + ut * loop.duration
    emf = loop_emf(loop, s, times, n_sub)
    return constants.e_over_hbar_c * constants.c * loop.duration * float(emf @ wt)


def magnetic_flux_phase(loop: LoopSpec, s: Solenoid, t_eval: float,
                        n_sub: int = DEFAULT_N_SUB, constants=CONSTANTS) -> float:
    """(e/hbar c) times the flux through the loop at ``t_eval``.

    Computed as oint A . dx and cross-checked against the disk integral
    of B; raises ConsistencyError if they differ by more than 1e-8
    relative.
    """
    line = curve_integral(lambda x, t: vector_potential(s, x, t),
                          loop.curve(t_fixed=t_eval), n_sub)
    surf = loop.direction * surface_flux(
        lambda x, t: magnetic_field(s, x, t), (0, 0, 0), (0, 0, 1), loop.radius,
        t_eval, n_r=n_sub, r_breaks=(s.radius,))
    scale = max(abs(line), abs(surf))
    if scale > 0 and abs(line - surf) > FLUX_AGREEMENT_RTOL * scale:
        raise ConsistencyError(
            f"line flux {line:.12e} and surface flux {surf:.12e} disagree")
    return float(constants.e_over_hbar_c * line)


def total_phase(loop: LoopSpec, s: Solenoid, n_sub: int = DEFAULT_N_SUB,
                n_t: int = DEFAULT_N_SUB, constants=CONSTANTS) -> PhaseBreakdown:
    electric = electric_phase(loop, s, n_sub, n_t, constants)
    magnetic = magnetic_flux_phase(loop, s, loop.t_end, n_sub, constants)
    static = (constants.e_over_hbar_c * loop.direction * loop.captured_area(s)
              * s.waveform.B_static)
    total = electric + magnetic
    return PhaseBreakdown(electric, magnetic, total, float(static), total - static)


def static_time_split(loop: LoopSpec, s: Solenoid, t_eval: float,
                      constants=CONSTANTS) -> tuple[float, float]:
    """Flux phase of A_0 and of A_1 = A - A_0 through the loop at ``t_eval``."""
    k = constants.e_over_hbar_c * loop.direction * loop.captured_area(s)
    return k * s.waveform.B_static, k * float(s.waveform.B_time_dependent(t_eval))


@dataclass(frozen=True)
class FaradayCheck:
    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs


def faraday_check(rho: float, s: Solenoid, t: float, n_sub: int = DEFAULT_N_SUB,
                  constants=CONSTANTS) -> FaradayCheck:
    """oint E . dx versus -(1/c) d/dt int B . dS on a coaxial circle.

    The left side is a line quadrature of the analytic E field; the right
    side is a disk quadrature of dB/dt, using the analytic waveform
    derivative.
    """
    loop = LoopSpec(rho)
    lhs = float(loop_emf(loop, s, t, n_sub)[0])
    bdot = float(s.waveform.Bdot(t))
    rhs = -surface_flux(lambda x, _t: _dBdt_sampler(s, x, bdot), (0, 0, 0), (0, 0, 1),
                        rho, t, n_r=n_sub, r_breaks=(s.radius,)) / constants.c
    return FaradayCheck(lhs, rhs)


def _dBdt_sampler(s: Solenoid, x, bdot: float) -> np.ndarray:
    x = np.asarray(x)
    out = np.zeros(x.shape)
    out[..., 2] = np.where(np.hypot(x[..., 0], x[..., 1]) < s.radius, bdot, 0.0)
    return out


@dataclass(frozen=True)
class InfinitesimalPhase:
    electric_piece: float
    magnetic_piece: float

    @property
    def sum(self) -> float:
        return self.electric_piece + self.magnetic_piece


def infinitesimal_phase(rho: float, dphi: float, dt: float, s: Solenoid, t: float,
                        constants=CONSTANTS) -> InfinitesimalPhase:
    """Phase pieces for a short arc rho*dphi covered in time dt (rho >= R).

    electric: (e/hbar c) E . dx (c dt); magnetic: (e/hbar c) (dphi R^2/2)(Bdot dt).
    """
    if rho < s.radius:
        raise ValueError("infinitesimal_phase needs rho >= solenoid radius")
    k = constants.e_over_hbar_c
    x = np.array([rho, 0.0, 0.0])
    dx = np.array([0.0, rho * dphi, 0.0])
    E = electric_field(s, x, t, constants.c)
    electric = k * float(E @ dx) * (constants.c * dt)
    magnetic = k * (dphi * s.radius ** 2 / 2) * (float(s.waveform.Bdot(t)) * dt)
    return InfinitesimalPhase(electric, magnetic)
