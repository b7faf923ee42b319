"""
Relativistic Lorentz-force integrator (classic RK4), used as an
independent check on the arc geometry and on R = pc/(eB).

    dx/dt = p c^2 / E,        E = sqrt((pc)^2 + (m c^2)^2)
    dp/dt = q (E_field + (v/c) x B),   q = -e for an electron

The state also carries the accumulated path length s, with ds/dt = |v|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .constants import CONSTANTS

FieldFn = Callable[[np.ndarray, float], np.ndarray]


class IntegrationError(ArithmeticError):
    def __init__(self, message: str, last_state: "ElectronState | None" = None):
        super().__init__(message)
        self.last_state = last_state


@dataclass(frozen=True)
class ElectronState:
    position: np.ndarray   # cm
    momentum: np.ndarray   # g cm / s
    time: float = 0.0      # s

    def energy(self, constants=CONSTANTS) -> float:
        """Total energy sqrt((pc)^2 + (m c^2)^2), erg."""
        pc = float(np.linalg.norm(self.momentum)) * constants.c
        return math.hypot(pc, constants.electron_rest_energy)


@dataclass
class Trajectory:
    times: np.ndarray
    positions: np.ndarray
    momenta: np.ndarray
    path_length: np.ndarray

    @property
    def final(self) -> ElectronState:
        return ElectronState(self.positions[-1], self.momenta[-1], float(self.times[-1]))

    def energies(self, constants=CONSTANTS) -> np.ndarray:
        pc = np.linalg.norm(self.momenta, axis=1) * constants.c
        return np.hypot(pc, constants.electron_rest_energy)


def momentum_from_wavelength(lam: float, constants=CONSTANTS) -> float:
    """de Broglie momentum 2 pi hbar / lam, g cm/s."""
    if not lam > 0:
        raise ValueError("wavelength must be positive")
    return constants.planck_h / lam


def pc_from_kinetic(T: float, constants=CONSTANTS) -> float:
    """pc = sqrt(T^2 + 2 T m c^2) for kinetic energy T (erg)."""
    mc2 = constants.electron_rest_energy
    return math.sqrt(T * T + 2 * T * mc2)


def gyroradius(p: float, B: float, constants=CONSTANTS) -> float:
    return p * constants.c / (constants.e * abs(B))


def cyclotron_period(p: float, B: float, constants=CONSTANTS) -> float:
    """2 pi E / (e |B| c) for total energy E."""
    E = math.hypot(p * constants.c, constants.electron_rest_energy)
    return 2 * math.pi * E / (constants.e * abs(B) * constants.c)


def uniform_field(B0: float, E0=(0.0, 0.0, 0.0)) -> tuple[FieldFn, FieldFn]:
    Bv = np.array([0.0, 0.0, B0])
    Ev = np.asarray(E0, dtype=float)
    return (lambda x, t: Ev), (lambda x, t: Bv)


def _rhs(y: np.ndarray, t: float, E_fn: FieldFn, B_fn: FieldFn, q: float, c: float,
         mc2: float) -> np.ndarray:
    x, p = y[0:3], y[3:6]
    energy = math.sqrt(float(p @ p) * c * c + mc2 * mc2)
    v = p * (c * c / energy)
    force = q * (np.asarray(E_fn(x, t)) + np.cross(v, np.asarray(B_fn(x, t))) / c)
    out = np.empty(7)
    out[0:3] = v
    out[3:6] = force
    out[6] = math.sqrt(float(v @ v))
    return out


def rk4_step(y, t, dt, E_fn, B_fn, q=-CONSTANTS.e, constants=CONSTANTS):
    c, mc2 = constants.c, constants.electron_rest_energy
    k1 = _rhs(y, t, E_fn, B_fn, q, c, mc2)
    k2 = _rhs(y + 0.5 * dt * k1, t + 0.5 * dt, E_fn, B_fn, q, c, mc2)
    k3 = _rhs(y + 0.5 * dt * k2, t + 0.5 * dt, E_fn, B_fn, q, c, mc2)
    k4 = _rhs(y + dt * k3, t + dt, E_fn, B_fn, q, c, mc2)
    return y + dt / 6.0 * (k1 + 2.0 * (k2 + k3) + k4)


def _pack(state: ElectronState) -> np.ndarray:
    return np.concatenate([np.asarray(state.position, float),
                           np.asarray(state.momentum, float), [0.0]])


def integrate(state0: ElectronState, E_fn: FieldFn, B_fn: FieldFn, dt: float, T: float,
              q: float = -CONSTANTS.e, constants=CONSTANTS) -> Trajectory:
    """Fixed-step RK4 from state0.time to state0.time + T (last step shortened)."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not T >= dt:
        raise ValueError("T must be at least dt")
    n_full = int(math.floor(T / dt + 1e-9))
    steps = [dt] * n_full
    rest = T - n_full * dt
    if rest > 1e-12 * dt:
        steps.append(rest)

    y = _pack(state0)
    t = float(state0.time)
    ys, ts = [y], [t]
    for h in steps:
        y_new = rk4_step(y, t, h, E_fn, B_fn, q, constants)
        if not np.all(np.isfinite(y_new)):
            raise IntegrationError(f"non-finite state at t = {t + h:.6e} s",
                                   ElectronState(y[0:3], y[3:6], t))
        y, t = y_new, t + h
        ys.append(y)
        ts.append(t)
    Y = np.array(ys)
    return Trajectory(np.array(ts), Y[:, 0:3], Y[:, 3:6], Y[:, 6])


def propagate_to_plane(state0: ElectronState, x_plane: float, E_fn: FieldFn, B_fn: FieldFn,
                       dt: float, max_steps: int = 1_000_000, q: float = -CONSTANTS.e,
                       constants=CONSTANTS) -> tuple[np.ndarray, float]:
    """Integrate until x reaches ``x_plane``; return (y, t) exactly on the plane.

    The last step length is found by root-finding on a single RK4 step.
    """
    y = _pack(state0)
    t = float(state0.time)
    for _ in range(max_steps):
        y_new = rk4_step(y, t, dt, E_fn, B_fn, q, constants)
        if not np.all(np.isfinite(y_new)):
            raise IntegrationError("non-finite state", ElectronState(y[0:3], y[3:6], t))
        if y_new[0] >= x_plane:
            h = brentq(lambda h: rk4_step(y, t, h, E_fn, B_fn, q, constants)[0] - x_plane,
                       0.0, dt, xtol=1e-30, rtol=4 * np.finfo(float).eps)
            return rk4_step(y, t, h, E_fn, B_fn, q, constants), t + h
        y, t = y_new, t + dt
    raise IntegrationError("end plane not reached", ElectronState(y[0:3], y[3:6], t))


@dataclass(frozen=True)
class LegShot:
    length: float
    heading: float
    miss: float


def leg_length(start, end, lam: float, B0: float, heading_guess: float,
               steps: int = 400, constants=CONSTANTS) -> LegShot:
    """Shoot from ``start`` (on one crystal plane) to ``end`` (on the next).

    The initial heading in the x-y plane is adjusted until the integrated
    orbit crosses the end plane at ``end``; returns the integrated path
    length.  ``steps`` sets dt from the straight-line transit time.
    """
    start = np.array([start[0], start[1], 0.0], dtype=float)
    x_end, y_end = float(end[0]), float(end[1])
    p = momentum_from_wavelength(lam, constants)
    E_fn, B_fn = uniform_field(B0)
    energy = math.hypot(p * constants.c, constants.electron_rest_energy)
    speed = p * constants.c ** 2 / energy
    chord = math.hypot(x_end - start[0], y_end - start[1])
    dt = chord / speed / steps

    def miss(psi):
        s0 = ElectronState(start, p * np.array([math.cos(psi), math.sin(psi), 0.0]))
        y, _ = propagate_to_plane(s0, x_end, E_fn, B_fn, dt, max_steps=10 * steps,
                                  constants=constants)
        return y[1] - y_end, y[6]

    half = 0.05
    try:
        psi = brentq(lambda a: miss(a)[0], heading_guess - half, heading_guess + half,
                     xtol=1e-16, rtol=4 * np.finfo(float).eps)
    except ValueError as exc:
        raise IntegrationError(f"shooting failed to bracket the end point: {exc}") from exc
    dy, length = miss(psi)
    return LegShot(float(length), float(psi), float(dy))
