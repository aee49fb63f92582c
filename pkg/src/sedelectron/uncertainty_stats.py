"""Mean/fluctuation algebra and uncertainty-product bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class DispersionReport:
    mean: float
    mean_square: float
    fluctuation: float
    units: str = ""
    count: int = 0


def mean_fluct_decompose(samples, units: str = "") -> DispersionReport:
    """Split ``<a^2>`` into ``<a>^2 + <(a - <a>)^2>``.

    The fluctuation is computed from centred samples (two-pass) and the
    mean square is then assembled from the parts, so the identity holds to
    rounding while staying accurate for large means.
    """
    a = np.asarray(samples, dtype=float).ravel()
    if a.size == 0:
        raise DomainError("need at least one sample")
    mean = float(np.mean(a))
    fluct = float(np.mean((a - mean) ** 2))
    return DispersionReport(mean, mean * mean + fluct, fluct, units, int(a.size))


@dataclass(frozen=True)
class UncertaintyCheck:
    product: float
    bound: float
    minimal: bool
    violation: bool

    @property
    def ratio(self) -> float:
        return self.product / self.bound


def uncertainty_product_check(dx2: float, dp2: float, hbar: float, rtol: float = 1e-6) -> UncertaintyCheck:
    """Compare ``dx2 * dp2`` with ``hbar^2 / 4``."""
    if dx2 < 0 or dp2 < 0:
        raise DomainError("dispersions must be nonnegative")
    bound = hbar * hbar / 4.0
    product = dx2 * dp2
    minimal = math.isclose(product, bound, rel_tol=rtol)
    return UncertaintyCheck(product, bound, minimal, product < bound and not minimal)


def minimal_radial_momentum_dispersion(r2: float, hbar: float) -> float:
    """Smallest ``<dP_r^2>`` allowed once ``<(dr)^2>`` is set to ``<r^2>``."""
    if r2 <= 0:
        raise DomainError("<r^2> must be positive")
    return hbar * hbar / (4.0 * r2)


@dataclass(frozen=True)
class AngularMomentumReport:
    l: int
    Lz_bar2: float
    dLx2: float
    dLy2: float
    dLz2: float
    L2_total: float
    standard_L2: float  # l(l+1) hbar^2 for comparison
    # dLz2 = hbar^2/4 is taken as given for every l, not derived
    dLz2_assumed: bool = True

    @property
    def delta(self) -> float:
        return self.L2_total - self.standard_L2

    def satisfies_component_inequality(self, hbar: float) -> bool:
        return self.dLx2 * self.dLy2 >= hbar * hbar / 4.0 * self.dLz2 * (1 - 1e-12)


def _component_parts(l: int) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    lz2 = Fraction(l * l)
    dlx2 = Fraction(l, 2)
    dlz2 = Fraction(1, 4)
    return lz2, dlx2, dlx2, dlz2


def angular_momentum_paper_total(l: int, hbar: float = 1.0) -> AngularMomentumReport:
    """``<L^2> = Lz_bar^2 + dLx^2 + dLy^2 + dLz^2`` with the zero-point quarter.

    Components in units of hbar^2 are l^2, l/2, l/2 and 1/4, so the total is
    ``(l + 1/2)^2``; the sum is done in exact rationals.
    """
    if isinstance(l, bool) or int(l) != l or l < 0:
        raise DomainError("l must be a nonnegative integer")
    l = int(l)
    parts = _component_parts(l)
    total = sum(parts, Fraction(0))
    h2 = hbar * hbar
    lz2, dlx2, dly2, dlz2 = (float(p) * h2 for p in parts)
    return AngularMomentumReport(l, lz2, dlx2, dly2, dlz2, float(total) * h2, float(l * (l + 1)) * h2)


def angular_momentum_table_csv(l_max: int, header_lines=()) -> str:
    out = [f"# {line}" for line in header_lines]
    out.append("l,paper_L2_over_hbar2,standard_L2_over_hbar2,delta")
    for l in range(l_max + 1):
        rep = angular_momentum_paper_total(l, 1.0)
        out.append(f"{l},{rep.L2_total:.17g},{rep.standard_L2:.17g},{rep.delta:.17g}")
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class IsotropicDispersions:
    dLx2: float
    dLy2: float
    dLz2: float

    @property
    def total(self) -> float:
        return self.dLx2 + self.dLy2 + self.dLz2


def isotropic_ground_dispersions(hbar: float = 1.0) -> IsotropicDispersions:
    """Equal components ``hbar^2/4`` for a spherically symmetric ground state."""
    q = hbar * hbar / 4.0
    return IsotropicDispersions(q, q, q)
