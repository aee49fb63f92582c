"""Continuum-limit frequency integrals over the resonance line shape.

These are the reference values the discrete mode sums converge to.  They
share no code with the mode-sum path: the integrand is written directly
from the susceptibility denominator and integrated adaptively.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate


def _moment(k: int, omega0: float, tau: float, lo: float, hi: float) -> float:
    """Integral of omega**k / |omega0^2 - omega^2 + i tau omega^3|^2 over [lo, hi]."""
    gamma = 0.5 * tau * omega0**2  # half-width of the line
    if gamma <= 0:
        raise ValueError("the line integral needs tau > 0")

    def line(w: float, dw: float | None = None) -> float:
        # omega0^2 - w^2 factored so the detuning dw keeps full precision
        dw = w - omega0 if dw is None else dw
        return w**k / ((dw * (w + omega0)) ** 2 + (tau * w**3) ** 2)

    def core(u: float) -> float:
        t = math.tan(u)
        return line(omega0 + gamma * t, gamma * t) * gamma * (1.0 + t * t)

    # core of +-K half-widths in the tangent variable (resonance at u = 0),
    # wings in the log of the detuning
    inside = lo < omega0 < hi
    k_core = min(1e3, (omega0 - lo) / gamma, (hi - omega0) / gamma) if inside else 0.0
    total = 0.0
    if k_core > 0:
        u = math.atan(k_core)
        for a, b in ((-u, 0.0), (0.0, u)):
            total += integrate.quad(core, a, b, epsabs=0.0, epsrel=1e-10, limit=500)[0]
        edge = math.log(k_core * gamma)
        for sign, span in ((-1.0, omega0 - lo), (1.0, hi - omega0)):
            if span > k_core * gamma:

                def wing(v: float, sign: float = sign) -> float:
                    d = math.exp(v)
                    return line(omega0 + sign * d, sign * d) * d

                total += integrate.quad(wing, edge, math.log(span), epsabs=0.0, epsrel=1e-10, limit=500)[0]
    else:
        total += integrate.quad(line, lo, hi, epsabs=0.0, epsrel=1e-10, limit=500)[0]
    return total


def commutator_integral(hbar: float, omega0: float, tau: float, lo: float, hi: float) -> float:
    """(2 tau hbar omega0^2 / pi) * int omega^2/|D|^2; tends to hbar as tau -> 0."""
    return 2.0 * tau * hbar * omega0**2 / np.pi * _moment(2, omega0, tau, lo, hi)


def position_variance_integral(hbar: float, mass: float, omega0: float, tau: float, lo: float, hi: float) -> float:
    """Per-component <x^2> of the steady state; tends to hbar/(2 m omega0)."""
    return tau * hbar / (np.pi * mass) * _moment(3, omega0, tau, lo, hi)


def momentum_variance_integral(hbar: float, mass: float, omega0: float, tau: float, lo: float, hi: float) -> float:
    """Per-component <P^2> of the closed-form momentum; tends to m hbar omega0 / 2."""
    return tau * mass * hbar * omega0**4 / np.pi * _moment(1, omega0, tau, lo, hi)
