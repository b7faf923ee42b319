"""
Three-crystal diamond interferometer in a uniform field B0 (+z).

Layout (field off): crystals C1, C2, C3 are the planes x = 0, D, 2D.
The beam arrives at C1 along +x and splits into headings +theta (upper
arm) and -theta (lower arm).  At C2 the upper arm turns by -2 theta and
the lower arm by +2 theta; both reach C3 at (2D, 0).

Leg labels go round the diamond:

    upper arm:  l1 = C1 -> C2,  l2 = C2 -> C3
    lower arm:  m2 = C1 -> C2,  m1 = C2 -> C3

so reflecting about the beam axis swaps l1 <-> m2 and l2 <-> m1.

With the field on, an electron (charge -e) moving along +x is pushed
toward +y, so every leg becomes a left-turning arc of radius R.  The
diffraction turns are applied to the local tangent.  The only free
parameter, the incoming tangent at C1, is fixed by root-finding so the
two beam spots on C2 stay centred on the axis.  The arms then meet C3
within a gap that is second order in D/R; recombination itself is
treated as ideal and the gap is reported.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .constants import CONSTANTS
from .fields import Waveform

LEG_NAMES = ("l1", "l2", "m1", "m2")
FRINGE_MODELS = ("naive_ab", "werner_brill", "full_cancellation")


class GeometryError(ValueError):
    """The arcs cannot reach the next crystal plane (field too strong)."""

    def __init__(self, message: str, leg: str | None = None):
        super().__init__(message if leg is None else f"leg {leg}: {message}")
        self.leg = leg


@dataclass(frozen=True)
class WBConfig:
    """Crystal spacing D [cm], diffraction angle theta [rad],
    de Broglie wavelength lam [cm], field B0 [G] along +z.

    A negative B0 means the field points into the page.
    """

    D: float = 5.0
    theta: float = 2e-2
    lam: float = 4.86e-10
    B0: float = 0.0

    def __post_init__(self):
        if not self.D > 0:
            raise ValueError("D must be positive")
        if not 0 < self.theta < math.pi / 4:
            raise ValueError("theta must lie in (0, pi/4)")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not math.isfinite(self.B0):
            raise ValueError("B0 must be finite")


def radius_of_curvature(lam: float, B0: float, constants=CONSTANTS) -> float:
    """R = 2 pi hbar c / (e lam |B0|) in cm; ``math.inf`` when B0 = 0."""
    if B0 == 0:
        return math.inf
    return 2 * math.pi * constants.hbar * constants.c / (constants.e * lam * abs(B0))


def curvature(lam: float, B0: float, constants=CONSTANTS) -> float:
    """Signed path curvature 1/R; positive means a left (counter-clockwise) turn."""
    return constants.e * lam * B0 / (2 * math.pi * constants.hbar * constants.c)


@dataclass(frozen=True)
class Leg:
    name: str
    start: tuple[float, float]
    heading: float
    end: tuple[float, float]
    end_heading: float
    length: float


def propagate_arc(x0: float, y0: float, heading: float, kappa: float, width: float,
                  name: str | None = None) -> Leg:
    """Follow an arc of curvature ``kappa`` from (x0, y0) to the plane x0 + width.

    Written in forms that stay accurate as kappa -> 0 (no 1/kappa).
    """
    s0, c0 = math.sin(heading), math.cos(heading)
    if c0 <= 0:
        raise GeometryError("beam does not head toward the next crystal", name)
    s1 = s0 + kappa * width
    if abs(s1) >= 1.0:
        raise GeometryError(f"arc turns back before reaching x = {x0 + width:g}", name)
    c1 = math.sqrt(1.0 - s1 * s1)
    dy = width * (2 * s0 + kappa * width) / (c0 + c1)
    # sin of the swept angle divided by (kappa * width)
    g = c0 + s0 * (2 * s0 + kappa * width) / (c0 + c1)
    z = kappa * width * g
    asinc = math.asin(z) / z if z != 0.0 else 1.0
    return Leg(name or "", (x0, y0), heading, (x0 + width, y0 + dy),
               math.asin(s1), width * g * asinc)


def _trace(cfg: WBConfig, psi0: float, kappa: float) -> dict[str, Leg]:
    D, th = cfg.D, cfg.theta
    l1 = propagate_arc(0.0, 0.0, psi0 + th, kappa, D, "l1")
    m2 = propagate_arc(0.0, 0.0, psi0 - th, kappa, D, "m2")
    l2 = propagate_arc(D, l1.end[1], l1.end_heading - 2 * th, kappa, D, "l2")
    m1 = propagate_arc(D, m2.end[1], m2.end_heading + 2 * th, kappa, D, "m1")
    return {"l1": l1, "l2": l2, "m1": m1, "m2": m2}


def _solve_entry_heading(cfg: WBConfig, kappa: float) -> float:
    if kappa == 0.0:
        return 0.0

    def centre(psi0):
        legs = _trace(cfg, psi0, kappa)
        return legs["l1"].end[1] + legs["m2"].end[1]

    # first-order solution is -kappa D / (2 cos theta); bracket generously around it
    guess = -kappa * cfg.D / (2 * math.cos(cfg.theta))
    half = 4 * abs(guess) + 1e-12
    lo, hi = guess - half, guess + half
    try:
        f_lo, f_hi = centre(lo), centre(hi)
    except GeometryError as exc:
        raise GeometryError("no arc solution near the entry heading", exc.leg) from exc
    if f_lo * f_hi > 0:
        raise GeometryError("entry heading not bracketed", "l1")
    return brentq(centre, lo, hi, xtol=1e-18, rtol=4 * np.finfo(float).eps, maxiter=200)


@dataclass(frozen=True)
class PathSet:
    l1: float
    l2: float
    m1: float
    m2: float
    l1p: float
    l2p: float
    m1p: float
    m2p: float
    enclosed_area: float
    entry_heading: float = 0.0
    recombination_gap: float = 0.0
    legs: dict = field(default_factory=dict, repr=False)

    @property
    def deltas(self) -> dict[str, float]:
        return {"l1": self.l1p - self.l1, "l2": self.l2p - self.l2,
                "m1": self.m1p - self.m1, "m2": self.m2p - self.m2}

    def vertices(self) -> np.ndarray:
        """Diamond corners C1, upper C2 spot, C3 (upper arm), lower C2 spot."""
        L = self.legs
        return np.array([L["l1"].start, L["l1"].end, L["l2"].end, L["m2"].end])


def diamond_area(D: float, theta: float) -> float:
    """Field-free diamond area: diagonals 2D and 2D tan(theta)."""
    return 2 * D * D * math.tan(theta)


def build_geometry(cfg: WBConfig, constants=CONSTANTS) -> PathSet:
    kappa = curvature(cfg.lam, cfg.B0, constants)
    psi0 = _solve_entry_heading(cfg, kappa)
    legs = _trace(cfg, psi0, kappa)
    straight = cfg.D / math.cos(cfg.theta)
    return PathSet(
        l1=straight, l2=straight, m1=straight, m2=straight,
        l1p=legs["l1"].length, l2p=legs["l2"].length,
        m1p=legs["m1"].length, m2p=legs["m2"].length,
        enclosed_area=diamond_area(cfg.D, cfg.theta),
        entry_heading=psi0,
        recombination_gap=legs["l2"].end[1] - legs["m1"].end[1],
        legs=legs,
    )


def fit_power_law(x, y) -> tuple[float, float]:
    """Least-squares slope and intercept of log|y| against log|x|."""
    x, y = np.abs(np.asarray(x, float)), np.abs(np.asarray(y, float))
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(intercept)


def _exponents(xs, rows, min_delta: float) -> dict[str, float]:
    out = {}
    for name in LEG_NAMES:
        pairs = [(x, r[name]) for x, r in zip(xs, rows) if abs(r[name]) > min_delta]
        if len(pairs) < 3:
            raise ValueError(f"fewer than 3 usable points for leg {name}")
        out[f"p_{name}"] = fit_power_law(*zip(*pairs))[0]
    return out


def scaling_exponents(cfg: WBConfig, B_grid, min_delta: float = 1e-12) -> dict[str, float]:
    """Log-log slopes of |delta| against B0 for every leg.

    Points whose delta falls below ``min_delta`` cm are dropped.
    """
    rows = [build_geometry(replace(cfg, B0=B)).deltas for B in B_grid]
    return _exponents(list(B_grid), rows, min_delta)


def spacing_exponents(cfg: WBConfig, D_grid, min_delta: float = 1e-12) -> dict[str, float]:
    """Log-log slopes of |delta| against the crystal spacing D at fixed B0."""
    rows = [build_geometry(replace(cfg, D=D)).deltas for D in D_grid]
    return _exponents(list(D_grid), rows, min_delta)


@dataclass(frozen=True)
class PhaseReport:
    ab_phase: float
    dynamical_phase: float
    net_phase: float
    D_over_R: float
    regime_ok: bool
    regime: str

    @property
    def cancellation_ratio(self) -> float:
        """|net| / |ab|; 0 means perfect cancellation."""
        return abs(self.net_phase) / abs(self.ab_phase) if self.ab_phase else 0.0


def classify_regime(D_over_R: float, theta: float) -> str:
    """'ok' if D/R < theta/10, 'marginal' if below theta, else 'violated'."""
    if D_over_R < theta / 10:
        return "ok"
    if D_over_R < theta:
        return "marginal"
    return "violated"


def phase_report(cfg: WBConfig, include_second_order: bool = True,
                 constants=CONSTANTS) -> PhaseReport:
    paths = build_geometry(cfg, constants)
    d = paths.deltas
    ab = constants.e_over_hbar_c * cfg.B0 * paths.enclosed_area
    if include_second_order:
        dL = (d["l2"] + d["l1"]) - (d["m2"] + d["m1"])
    else:
        dL = d["l2"] - d["m1"]
    dyn = 2 * math.pi / cfg.lam * dL
    d_over_r = cfg.D / radius_of_curvature(cfg.lam, cfg.B0, constants)
    regime = classify_regime(d_over_r, cfg.theta)
    return PhaseReport(ab, dyn, ab + dyn, d_over_r, regime == "ok", regime)


@dataclass
class FringeSeries:
    model: str
    t: np.ndarray
    phase: np.ndarray
    gaps: list[int]

    @property
    def peak_to_peak(self) -> float:
        ok = np.isfinite(self.phase)
        if not ok.any():
            return math.nan
        return float(np.ptp(self.phase[ok]))


def _fringe_phase(cfg: WBConfig, waveform: Waveform, t: float, model: str,
                  constants) -> float:
    area = diamond_area(cfg.D, cfg.theta)
    if model == "full_cancellation":
        return constants.e_over_hbar_c * waveform.B_static * area
    B = float(waveform.B(t))
    if model == "naive_ab":
        return constants.e_over_hbar_c * B * area
    return phase_report(replace(cfg, B0=B), True, constants).net_phase


def fringe_time_series(cfg: WBConfig, waveform: Waveform, samples: int, model: str,
                       workers: int = 1, constants=CONSTANTS) -> FringeSeries:
    """Interferometer phase over one waveform period, sampled at t_k = k / (samples f).

    Samples whose geometry cannot be solved are left as NaN and listed in
    ``gaps``.
    """
    if model not in FRINGE_MODELS:
        raise ValueError(f"unknown model {model!r}; expected one of {FRINGE_MODELS}")
    if waveform.freq <= 0:
        raise ValueError("fringe sweep needs a waveform with freq > 0")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    t = np.arange(samples) / (samples * waveform.freq)

    def one(tk):
        try:
            return _fringe_phase(cfg, waveform, tk, model, constants)
        except GeometryError:
            return math.nan

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            phase = np.array(list(pool.map(one, t)))
    else:
        phase = np.array([one(tk) for tk in t])
    gaps = [int(i) for i in np.flatnonzero(~np.isfinite(phase))]
    return FringeSeries(model, t, phase, gaps)
