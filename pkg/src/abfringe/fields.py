"""
Closed-form fields of an infinite solenoid along z with time-varying
flux, and the uniform stray field of the three-crystal interferometer.

Gaussian units throughout.  The symmetric gauge is used:

    A_in  = rho B(t) / 2      phi_hat     (rho <  R)
    A_out = B(t) R^2 / (2 rho) phi_hat    (rho >= R)

with B = curl A and E = -(1/c) dA/dt.  The electric field therefore
carries a factor 1/c:

    E_in  = -rho Bdot / (2 c)      phi_hat
    E_out = -Bdot R^2 / (2 rho c)  phi_hat
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS


@dataclass(frozen=True)
class Waveform:
    """B(t) = B_static + B_amp sin(2 pi freq t + phase0) + ramp t   [gauss].

    ``ramp`` (G/s) is the linear-in-time variant; it vanishes at t = 0.
    """

    B_static: float = 0.0
    B_amp: float = 0.0
    freq: float = 0.0
    phase0: float = 0.0
    ramp: float = 0.0

    def __post_init__(self):
        if self.freq < 0:
            raise ValueError("waveform frequency must be >= 0")
        if self.freq == 0 and self.B_amp != 0:
            raise ValueError("B_amp != 0 needs freq > 0; use `ramp` for a slow drift")

    @classmethod
    def static(cls, B: float) -> "Waveform":
        return cls(B_static=B)

    @classmethod
    def linear_ramp(cls, rate: float, B_static: float = 0.0) -> "Waveform":
        return cls(B_static=B_static, ramp=rate)

    @property
    def is_static(self) -> bool:
        return self.B_amp == 0 and self.ramp == 0

    def B(self, t):
        t = np.asarray(t, dtype=float)
        out = self.B_static + self.ramp * t
        if self.B_amp:
            out = out + self.B_amp * np.sin(2 * math.pi * self.freq * t + self.phase0)
        return out

    def Bdot(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, float(self.ramp))
        if self.B_amp:
            w = 2 * math.pi * self.freq
            out = out + self.B_amp * w * np.cos(w * t + self.phase0)
        return out

    def B_time_dependent(self, t):
        """Field of the time-varying part A_1 alone."""
        return self.B(t) - self.B_static


@dataclass(frozen=True)
class Solenoid:
    radius: float
    waveform: Waveform

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("solenoid radius must be positive")


@dataclass(frozen=True)
class UniformField:
    """Spatially uniform B0 along +z (out of the page); E = 0 when static."""

    B0: float
    waveform: Waveform | None = None

    def B_at(self, t: float = 0.0) -> float:
        return float(self.waveform.B(t)) if self.waveform is not None else self.B0

    def sampler(self, t_fixed: float | None = None):
        """(E, B) callables for the trajectory integrator."""
        def E(x, t):
            return np.zeros(np.shape(x))

        def B(x, t):
            Bz = self.B_at(t if t_fixed is None else t_fixed)
            out = np.zeros(np.shape(x))
            out[..., 2] = Bz
            return out

        return E, B


def _cylindrical(x):
    x = np.asarray(x, dtype=float)
    rho = np.hypot(x[..., 0], x[..., 1])
    safe = np.where(rho > 0, rho, 1.0)
    phi_hat = np.stack([-x[..., 1] / safe, x[..., 0] / safe, np.zeros_like(rho)], axis=-1)
    return rho, phi_hat


def _azimuthal_profile(rho, R):
    """rho/2 inside, R^2/(2 rho) outside; 0 on the axis."""
    inside = rho < R
    safe = np.where(rho > 0, rho, 1.0)
    prof = np.where(inside, 0.5 * rho, 0.5 * R * R / safe)
    return np.where(rho > 0, prof, 0.0)


def vector_potential(s: Solenoid, x, t) -> np.ndarray:
    """A(x, t) in G cm."""
    rho, phi_hat = _cylindrical(x)
    mag = _azimuthal_profile(rho, s.radius) * s.waveform.B(t)
    return mag[..., None] * phi_hat


def magnetic_field(s: Solenoid, x, t) -> np.ndarray:
    """B(t) z_hat inside, zero for rho >= R."""
    rho, _ = _cylindrical(x)
    Bz = np.where(rho < s.radius, s.waveform.B(t), 0.0)
    out = np.zeros(rho.shape + (3,))
    out[..., 2] = Bz
    return out


def electric_field(s: Solenoid, x, t, c: float = CONSTANTS.c) -> np.ndarray:
    """E = -(1/c) dA/dt, statV/cm."""
    rho, phi_hat = _cylindrical(x)
    mag = -_azimuthal_profile(rho, s.radius) * s.waveform.Bdot(t) / c
    return mag[..., None] * phi_hat


def flux(s: Solenoid, t) -> float:
    """Total flux pi R^2 B(t) in G cm^2."""
    return math.pi * s.radius ** 2 * s.waveform.B(t)


def flux_rate(s: Solenoid, t) -> float:
    return math.pi * s.radius ** 2 * s.waveform.Bdot(t)


def samplers(s: Solenoid):
    """(A, B, E) as two-argument samplers for the core quadrature routines."""
    return (lambda x, t: vector_potential(s, x, t),
            lambda x, t: magnetic_field(s, x, t),
            lambda x, t: electric_field(s, x, t))
