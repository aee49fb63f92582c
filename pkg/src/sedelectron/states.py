"""Analytic test states, potentials and a split-step propagator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .grids import Grid
from .nelson import WavefunctionGrid, make_wavefunction


@dataclass(frozen=True)
class HarmonicPotential:
    mass: float = 1.0
    omega: float = 1.0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return 0.5 * self.mass * self.omega**2 * np.asarray(x) ** 2


@dataclass(frozen=True)
class CoulombPotential:
    """-Z e^2 / r."""

    charge: float = 1.0
    Z: int = 1

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return -self.Z * self.charge**2 / np.asarray(r)


@dataclass(frozen=True)
class FreePotential:
    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(x, dtype=float))


def coherent_state_values(x, t: float, m: float = 1.0, omega: float = 1.0, hbar: float = 1.0, x0: float = 1.0):
    """Oscillator coherent state released from rest at ``x0``, exact at time ``t``."""
    x = np.asarray(x, dtype=float)
    xc = x0 * math.cos(omega * t)
    pc = -m * omega * x0 * math.sin(omega * t)
    k = m * omega / hbar
    amp = (k / math.pi) ** 0.25
    phase = pc * x / hbar - 0.5 * omega * t - 0.5 * xc * pc / hbar
    return amp * np.exp(-0.5 * k * (x - xc) ** 2 + 1j * phase)


def harmonic_ground(grid: Grid, m: float = 1.0, omega: float = 1.0, hbar: float = 1.0, t: float = 0.0):
    return make_wavefunction(grid, coherent_state_values(grid.points, t, m, omega, hbar, 0.0), t)


def coherent_state(grid: Grid, t: float, m=1.0, omega=1.0, hbar=1.0, x0=1.0) -> WavefunctionGrid:
    return make_wavefunction(grid, coherent_state_values(grid.points, t, m, omega, hbar, x0), t)


def plane_wave(grid: Grid, k: float, t: float = 0.0, m: float = 1.0, hbar: float = 1.0) -> WavefunctionGrid:
    energy = hbar**2 * k**2 / (2 * m)
    return make_wavefunction(grid, np.exp(1j * (k * grid.points - energy * t / hbar)), t)


def hydrogen_1s(grid: Grid, a0: float = 1.0, t: float = 0.0, energy: float = 0.0, hbar: float = 1.0):
    if grid.kind != "radial":
        raise DomainError("the 1s state lives on a radial grid")
    return make_wavefunction(grid, np.exp(-grid.points / a0 - 1j * energy * t / hbar), t)


def stationary_series(psi: WavefunctionGrid, energy: float, hbar: float, dt: float, n: int = 3):
    """``n`` time slices of an eigenstate, centred on ``psi.time``."""
    t0 = psi.time - dt * (n // 2)
    out = []
    for j in range(n):
        t = t0 + j * dt
        vals = psi.values * np.exp(-1j * energy * (t - psi.time) / hbar)
        out.append(WavefunctionGrid(psi.grid, vals, t, psi.norm_constant))
    return out


def split_step(psi: WavefunctionGrid, potential, m: float, hbar: float, dt: float, steps: int) -> WavefunctionGrid:
    """Strang split-step Fourier propagation on a periodic Cartesian grid."""
    g = psi.grid
    if not g.periodic:
        raise DomainError("split-step propagation needs a periodic grid")
    k = 2.0 * np.pi * np.fft.fftfreq(g.size, d=g.spacing)
    half_v = np.exp(-0.5j * dt * np.asarray(potential(g.points), dtype=float) / hbar)
    kin = np.exp(-0.5j * dt * hbar * k**2 / m)
    vals = np.array(psi.values)
    for _ in range(steps):
        vals = half_v * np.fft.ifft(kin * np.fft.fft(half_v * vals))
    return WavefunctionGrid(g, vals, psi.time + steps * dt, psi.norm_constant)
