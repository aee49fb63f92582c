"""Uniform 1-D grids: finite differences and quadrature.

Cartesian grids may be periodic (endpoint excluded).  Radial grids hold
``r_i = i*h`` for ``i = 1..n``; the origin is implied and quadrature
weights include the ``4 pi r^2`` measure.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import DomainError, ShapeError

GRID_KINDS = ("cartesian", "radial")


@dataclass(frozen=True, eq=False)
class Grid:
    points: np.ndarray
    kind: str = "cartesian"
    periodic: bool = False

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if self.kind not in GRID_KINDS:
            raise DomainError(f"unknown grid kind {self.kind!r}")
        if pts.ndim != 1 or len(pts) < 5:
            raise ShapeError("grid needs at least 5 points")
        d = np.diff(pts)
        if not np.allclose(d, d[0], rtol=1e-9, atol=0.0) or d[0] <= 0:
            raise DomainError("grid spacing must be uniform and increasing")
        if self.kind == "radial":
            if self.periodic:
                raise DomainError("radial grids cannot be periodic")
            if not np.isclose(pts[0], d[0], rtol=1e-9):
                raise DomainError("radial grid must start at r = h")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def spacing(self) -> float:
        return float(self.points[1] - self.points[0])

    @property
    def size(self) -> int:
        return len(self.points)

    def same_as(self, other: "Grid") -> bool:
        return (
            self.kind == other.kind
            and self.periodic == other.periodic
            and self.size == other.size
            and np.array_equal(self.points, other.points)
        )


def cartesian_grid(x_min: float, x_max: float, n: int, periodic: bool = False) -> Grid:
    pts = np.linspace(x_min, x_max, n, endpoint=not periodic)
    return Grid(pts, "cartesian", periodic)


def radial_grid(r_max: float, n: int) -> Grid:
    h = r_max / n
    return Grid(h * np.arange(1, n + 1), "radial")


@lru_cache(maxsize=64)
def _stencil_weights(offsets: tuple[int, ...], deriv: int) -> np.ndarray:
    """Finite-difference weights at integer ``offsets`` (unit spacing)."""
    k = np.array(offsets, dtype=float)
    n = len(k)
    vander = np.vander(k, n, increasing=True).T  # row p: k**p
    rhs = np.zeros(n)
    fact = 1.0
    for i in range(2, deriv + 1):
        fact *= i
    rhs[deriv] = fact
    return np.linalg.solve(vander, rhs)


def derivative(f: np.ndarray, h: float, deriv: int = 1, order: int = 2, periodic: bool = False) -> np.ndarray:
    """``deriv``-th derivative with accuracy ``order`` (even).

    Centred stencils in the interior; near the ends of a non-periodic grid,
    one-sided stencils of ``deriv + order`` points keep the accuracy order.
    """
    if order % 2 or order < 2:
        raise DomainError("order must be a positive even integer")
    f = np.asarray(f)
    n = len(f)
    half = (deriv + 1) // 2 + order // 2 - 1
    width = 2 * half + 1
    if n < width:
        raise ShapeError("grid too short for the requested stencil")
    centre = _stencil_weights(tuple(range(-half, half + 1)), deriv)
    out = np.zeros(f.shape, dtype=np.result_type(f, float))
    if periodic:
        for w, k in zip(centre, range(-half, half + 1)):
            out += w * np.roll(f, -k)
        return out / h**deriv
    for w, k in zip(centre, range(-half, half + 1)):
        out[half : n - half] += w * f[half + k : n - half + k]
    # one-sided stencils need deriv + order points for the same accuracy
    wb = max(width, deriv + order)
    for i in list(range(half)) + list(range(n - half, n)):
        start = min(max(i - half, 0), n - wb)
        offs = tuple(range(start - i, start - i + wb))
        out[i] = _stencil_weights(offs, deriv) @ f[start : start + wb]
    return out / h**deriv


def gradient(f: np.ndarray, grid: Grid, order: int = 2) -> np.ndarray:
    return derivative(f, grid.spacing, 1, order, grid.periodic)


def laplacian(f: np.ndarray, grid: Grid, order: int = 2) -> np.ndarray:
    """Laplacian; on radial grids ``f'' + (2/r) f'`` for s-wave fields."""
    d2 = derivative(f, grid.spacing, 2, order, grid.periodic)
    if grid.kind == "radial":
        return d2 + 2.0 * derivative(f, grid.spacing, 1, order) / grid.points
    return d2


def divergence(flux: np.ndarray, grid: Grid, order: int = 2) -> np.ndarray:
    """Divergence of a radial/axial flux; radial uses ``F' + 2F/r``.

    The expanded form avoids dividing an O(h^2) error in ``(r^2 F)'`` by
    ``r^2`` next to the origin.
    """
    if grid.kind == "radial":
        return derivative(flux, grid.spacing, 1, order) + 2.0 * flux / grid.points
    return derivative(flux, grid.spacing, 1, order, grid.periodic)


def integrate_field(f: np.ndarray, grid: Grid) -> float | complex:
    """Integral of ``f`` over the grid volume (4 pi r^2 dr on radial grids)."""
    f = np.asarray(f)
    h = grid.spacing
    if grid.periodic:
        return np.sum(f) * h
    if grid.kind == "radial":
        r = grid.points
        integrand = np.concatenate([[0.0], 4.0 * np.pi * r * r * f])
        return integrate.simpson(integrand, dx=h)
    return integrate.simpson(f, dx=h)


def l2_norm(f: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(abs(integrate_field(np.abs(f) ** 2, grid))))
