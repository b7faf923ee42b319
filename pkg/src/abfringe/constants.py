"""Physical constants in Gaussian CGS units (CODATA 2018).

Every module reads constants from here; nothing else hard-codes them.
"""

from dataclasses import dataclass
import math


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.054571817e-27        # erg s
    c: float = 2.99792458e10             # cm / s
    e: float = 4.80320471e-10            # statC, magnitude of the electron charge
    m_e: float = 9.1093837015e-28        # g
    erg_per_ev: float = 1.602176634e-12  # erg / eV

    @property
    def planck_h(self) -> float:
        return 2.0 * math.pi * self.hbar

    @property
    def e_over_hbar_c(self) -> float:
        """Flux-to-phase factor, rad / (G cm^2)."""
        return self.e / (self.hbar * self.c)

    @property
    def electron_rest_energy(self) -> float:
        """m_e c^2 in erg."""
        return self.m_e * self.c ** 2

    def as_dict(self) -> dict:
        return {
            "hbar_erg_s": self.hbar,
            "c_cm_per_s": self.c,
            "e_statC": self.e,
            "m_e_g": self.m_e,
            "planck_h_erg_s": self.planck_h,
        }


CONSTANTS = PhysicalConstants()
