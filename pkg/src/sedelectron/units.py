"""Physical-constant presets.

Two unit systems are supported.  ``natural`` sets hbar = m = omega0 = c = 1
and chooses the charge so the radiation time constant takes a requested
value.  ``gaussian-cgs`` uses CODATA 2018 electron constants in esu/g/cm/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

UNIT_SYSTEMS = ("natural", "gaussian-cgs")

# CODATA 2018, Gaussian-CGS
CGS_ELEMENTARY_CHARGE = 4.803204712570263e-10  # esu
CGS_ELECTRON_MASS = 9.1093837015e-28  # g
CGS_LIGHT_SPEED = 2.99792458e10  # cm/s
CGS_HBAR = 1.054571817e-27  # erg s
ERG_PER_EV = 1.602176634e-12


@dataclass(frozen=True)
class Constants:
    """Charge, mass, light speed and reduced Planck constant of one unit system."""

    charge: float
    mass: float
    light_speed: float
    hbar: float
    name: str = "natural"

    @property
    def bohr_radius(self) -> float:
        return self.hbar**2 / (self.mass * self.charge**2)


def natural_constants(tau_omega0: float = 1e-6) -> Constants:
    """hbar = m = c = 1 (with omega0 = 1); charge set so that tau = tau_omega0."""
    if tau_omega0 <= 0:
        raise ValueError("tau_omega0 must be positive")
    return Constants(charge=math.sqrt(1.5 * tau_omega0), mass=1.0, light_speed=1.0, hbar=1.0)


def atomic_constants() -> Constants:
    """hbar = m = e = 1; used for the H-like ground-state functional."""
    return Constants(charge=1.0, mass=1.0, light_speed=137.035999084, hbar=1.0, name="natural")


def cgs_constants() -> Constants:
    return Constants(
        charge=CGS_ELEMENTARY_CHARGE,
        mass=CGS_ELECTRON_MASS,
        light_speed=CGS_LIGHT_SPEED,
        hbar=CGS_HBAR,
        name="gaussian-cgs",
    )


def erg_to_ev(energy_erg: float) -> float:
    return energy_erg / ERG_PER_EV
