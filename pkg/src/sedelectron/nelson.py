"""Stochastic-mechanics layer on 1-D grids.

A wavefunction is written ``psi = exp(i S1/hbar - S2/hbar)``.  ``S1`` gives
the current velocity ``V = grad S1 / m``, ``S2`` the osmotic velocity
``U = grad S2 / m``.  Walkers diffuse with constant ``hbar / 2m`` and
forward drift ``V - U``, which keeps ``|psi|^2`` stationary for
eigenstates.  The residual checks compare the exact real/imaginary split
of the Schrodinger equation with the variant obtained by dropping the
``(hbar/2m) lap S2 - (grad S2)^2/m`` combination.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import grids
from .errors import DomainError, ShapeError, SingularityError, SurfaceTermWarning, WalkerRangeError
from .grids import Grid
from .parallel import ordered_map, split_range
from .rng import counter_normals, counter_uniforms, philox_key

BOUNDARY_POLICIES = ("reflect", "clip", "error", "none")


@dataclass(frozen=True, eq=False)
class WavefunctionGrid:
    grid: Grid
    values: np.ndarray
    time: float = 0.0
    norm_constant: float = 1.0  # B: sqrt of the norm of the unnormalized input

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.points.shape:
            raise ShapeError("values do not match the grid")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def norm(self) -> float:
        return float(grids.integrate_field(self.density, self.grid))

    def to_csv(self, header_lines=()) -> str:
        out = [f"# {line}" for line in header_lines]
        out.append("x,re_psi,im_psi")
        for x, z in zip(self.grid.points, self.values):
            out.append(f"{float(x):.17g},{z.real:.17g},{z.imag:.17g}")
        return "\n".join(out) + "\n"


def make_wavefunction(grid: Grid, values, time: float = 0.0) -> WavefunctionGrid:
    """Normalize ``values`` on ``grid``; the original norm's square root is kept as B."""
    vals = np.asarray(values, dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise DomainError("wavefunction values must be finite")
    n = float(grids.integrate_field(np.abs(vals) ** 2, grid))
    if not n > 0:
        raise DomainError("wavefunction has zero norm")
    b = math.sqrt(n)
    return WavefunctionGrid(grid, vals / b, time, b)


@dataclass(frozen=True, eq=False)
class ActionFields:
    grid: Grid
    S1: np.ndarray
    S2: np.ndarray
    hbar: float
    time: float = 0.0
    valid: np.ndarray | None = None  # False on masked node neighbourhoods
    winding: float = 0.0  # S1 gained around a periodic box

    def mask(self) -> np.ndarray:
        return np.ones(self.grid.size, bool) if self.valid is None else self.valid


@dataclass(frozen=True, eq=False)
class VelocityFields:
    grid: Grid
    V: np.ndarray
    U: np.ndarray

    def at(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pts = self.grid.points
        return np.interp(x, pts, self.V), np.interp(x, pts, self.U)


def _phase_increments(values: np.ndarray, periodic: bool) -> np.ndarray:
    nxt = np.roll(values, -1) if periodic else values[1:]
    return np.angle(nxt * np.conj(values if periodic else values[:-1]))


def _node_mask(values: np.ndarray, grid: Grid, node_tol: float, mask_radius: float | None) -> np.ndarray:
    mag = np.abs(values)
    nodes = mag <= node_tol * mag.max()
    if not nodes.any():
        return np.ones(len(values), bool)
    if mask_radius is None:
        where = grid.points[nodes]
        raise SingularityError(f"wavefunction vanishes at {where[:5]} (pass mask_radius to exclude nodes)")
    valid = np.ones(len(values), bool)
    for x in grid.points[nodes]:
        valid &= np.abs(grid.points - x) > mask_radius
    return valid


def actions_from_wavefunction(
    psi: WavefunctionGrid, hbar: float, *, node_tol: float = 0.0, mask_radius: float | None = None
) -> ActionFields:
    """S1 = hbar * (unwrapped phase), S2 = -hbar ln|psi| + hbar ln B.

    The phase is unwrapped by summing neighbour-to-neighbour phase
    increments, so S1 is a continuous branch.  ``psi.values`` are already
    normalized, which makes ``exp(-2 S2/hbar)`` integrate to one.
    """
    vals = psi.values
    valid = _node_mask(vals, psi.grid, node_tol, mask_radius)
    inc = _phase_increments(vals, psi.grid.periodic)
    steps = inc[:-1] if psi.grid.periodic else inc
    phase = np.angle(vals[0]) + np.concatenate([[0.0], np.cumsum(steps)])
    winding = hbar * float(np.sum(inc)) if psi.grid.periodic else 0.0
    with np.errstate(divide="ignore"):
        s2 = -hbar * np.log(np.abs(vals))
    s1 = hbar * phase
    if not valid.all():
        s1 = np.where(valid, s1, np.nan)
        s2 = np.where(valid, s2, np.nan)
    return ActionFields(psi.grid, s1, s2, hbar, psi.time, None if valid.all() else valid, winding)


def wavefunction_from_actions(a: ActionFields, hbar: float | None = None) -> WavefunctionGrid:
    hbar = a.hbar if hbar is None else hbar
    s1 = np.nan_to_num(a.S1)
    s2 = np.where(np.isnan(a.S2), np.inf, a.S2)
    if not (np.all(np.isfinite(s1)) and np.all(np.isfinite(a.S2[a.mask()]))):
        raise DomainError("action fields must be finite")
    # shift S2 before exponentiating so a large constant cannot underflow
    s2_min = np.min(s2)
    vals = np.exp(1j * s1 / hbar - (s2 - s2_min) / hbar)
    return make_wavefunction(a.grid, vals, a.time)


def _grad_s1(a: ActionFields, order: int = 2) -> np.ndarray:
    if not a.grid.periodic:
        return grids.gradient(a.S1, a.grid, order)
    # periodic S1 is continuous only up to the winding; differentiate the
    # periodic remainder and add back the mean slope
    length = a.grid.spacing * a.grid.size
    slope = a.winding / length
    rem = a.S1 - slope * (a.grid.points - a.grid.points[0])
    return grids.gradient(rem, a.grid, order) + slope


def velocities_from_actions(a: ActionFields, m: float, order: int = 2) -> VelocityFields:
    """V = grad S1 / m, U = grad S2 / m by centred differences."""
    return VelocityFields(a.grid, _grad_s1(a, order) / m, grids.gradient(a.S2, a.grid, order) / m)


def forward_backward_velocities(v: VelocityFields) -> tuple[np.ndarray, np.ndarray]:
    """Real-form forward/backward velocities (V + U, V - U)."""
    return v.V + v.U, v.V - v.U


# --- walker ensembles --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WalkerEnsemble:
    positions: np.ndarray
    seed: int
    step: int = 0

    def __post_init__(self) -> None:
        pos = np.array(self.positions, dtype=float)
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    def __len__(self) -> int:
        return len(self.positions)

    def to_csv(self, header_lines=()) -> str:
        out = [f"# {line}" for line in header_lines]
        out.append("walker_id,x")
        out.extend(f"{i},{x:.17g}" for i, x in enumerate(self.positions))
        return "\n".join(out) + "\n"


@dataclass(frozen=True)
class HarmonicGroundDrift:
    """(V, U) = (0, omega x) for the oscillator ground state."""

    omega: float = 1.0

    def __call__(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return np.zeros_like(x), self.omega * x


@dataclass(frozen=True)
class UniformDrift:
    velocity: float = 0.0

    def __call__(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return np.full_like(x, self.velocity), np.zeros_like(x)


DriftSource = VelocityFields | Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


def _drift(source: DriftSource, x: np.ndarray) -> np.ndarray:
    v, u = source.at(x) if isinstance(source, VelocityFields) else source(x)
    return v - u


def _apply_boundary(x: np.ndarray, bounds: tuple[float, float] | None, policy: str) -> np.ndarray:
    if bounds is None or policy == "none":
        return x
    lo, hi = bounds
    if x.size == 0 or (x.min() >= lo and x.max() <= hi):
        return x
    if policy == "clip":
        return np.clip(x, lo, hi)
    if policy == "error":
        if np.any((x < lo) | (x > hi)):
            raise WalkerRangeError(f"walker left [{lo}, {hi}]")
        return x
    width = hi - lo
    y = np.mod(x - lo, 2.0 * width)
    return lo + np.where(y > width, 2.0 * width - y, y)


@dataclass(frozen=True)
class _ChunkTask:
    positions: np.ndarray
    start: int
    n_total: int
    key: int
    first_step: int
    steps: int
    drift: DriftSource
    dt: float
    sigma: float
    bounds: tuple[float, float] | None
    boundary: str


def _evolve_chunk(task: _ChunkTask) -> np.ndarray:
    x = task.positions.copy()
    n = len(x)
    for s in range(task.first_step, task.first_step + task.steps):
        b = _drift(task.drift, x)
        if task.sigma > 0:
            # word index (step, walker) -> independent of how walkers are chunked
            noise = counter_normals(task.key, s * task.n_total + task.start, n)
            x = x + b * task.dt + task.sigma * noise
        else:
            x = x + b * task.dt
        x = _apply_boundary(x, task.bounds, task.boundary)
    return x


def evolve_ensemble(
    w: WalkerEnsemble,
    drift: DriftSource,
    hbar: float,
    m: float,
    dt: float,
    steps: int,
    *,
    bounds: tuple[float, float] | None = None,
    boundary: str = "reflect",
    workers: int = 1,
) -> WalkerEnsemble:
    """Euler-Maruyama steps of ``dX = (V - U) dt + sqrt(hbar/m) dW``.

    Noise for walker ``i`` at global step ``s`` comes from word
    ``s*N + i`` of a Philox stream keyed by the ensemble seed, so the
    output is bitwise independent of ``workers``.  When ``drift`` is a
    :class:`VelocityFields`, bounds default to its grid extent.
    """
    if dt <= 0:
        raise DomainError("dt must be positive")
    if steps < 0:
        raise DomainError("steps must be nonnegative")
    if boundary not in BOUNDARY_POLICIES:
        raise DomainError(f"unknown boundary policy {boundary!r}")
    if hbar < 0 or m <= 0:
        raise DomainError("need hbar >= 0 and m > 0")
    if bounds is None and isinstance(drift, VelocityFields):
        bounds = (float(drift.grid.points[0]), float(drift.grid.points[-1]))
    n = len(w)
    sigma = math.sqrt(hbar / m * dt)
    key = philox_key(w.seed, 1)
    tasks = [
        _ChunkTask(w.positions[a:b], a, n, key, w.step, steps, drift, dt, sigma, bounds, boundary)
        for a, b in split_range(n, max(1, workers))
    ]
    parts = ordered_map(_evolve_chunk, tasks, workers)
    return WalkerEnsemble(np.concatenate(parts) if parts else np.zeros(0), w.seed, w.step + steps)


def sample_walkers(grid: Grid, density: np.ndarray, n: int, seed: int) -> WalkerEnsemble:
    """Draw ``n`` positions from a 1-D density by inverse-CDF interpolation."""
    x = grid.points
    rho = np.asarray(density, dtype=float)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * np.diff(x))])
    cdf /= cdf[-1]
    u = counter_uniforms(philox_key(seed, 0), 0, n)
    return WalkerEnsemble(np.interp(u, cdf, x), seed)


def density_l1_distance(positions: np.ndarray, edges: np.ndarray, bin_probabilities: np.ndarray) -> float:
    """Sum over bins of |empirical - target| probability (mass outside counts too)."""
    counts, _ = np.histogram(positions, bins=edges)
    n = len(positions)
    p_emp = counts / n
    outside_emp = 1.0 - p_emp.sum()
    outside_ref = max(0.0, 1.0 - float(np.sum(bin_probabilities)))
    return float(np.sum(np.abs(p_emp - bin_probabilities)) + abs(outside_emp - outside_ref))


def grid_bin_probabilities(grid: Grid, density: np.ndarray, edges: np.ndarray) -> np.ndarray:
    x = grid.points
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (density[1:] + density[:-1]) * np.diff(x))])
    return np.diff(np.interp(edges, x, cdf))


# --- residual checks -----------------------------------------------------------


@dataclass(frozen=True)
class ResidualReport:
    l2: float
    linf: float
    rho_weighted_mean: float
    grid_h: float
    dt: float

    def to_dict(self) -> dict:
        return {
            "l2": self.l2,
            "linf": self.linf,
            "rho_weighted_mean": self.rho_weighted_mean,
            "grid_h": self.grid_h,
            "dt": self.dt,
        }


def _report(res: np.ndarray, rho: np.ndarray, grid: Grid, dt: float) -> ResidualReport:
    ok = np.isfinite(res)
    r = np.where(ok, res, 0.0)
    w = np.where(ok, rho, 0.0)
    norm = float(np.real(grids.integrate_field(w, grid)))
    mean = float(np.real(grids.integrate_field(r * w, grid))) / norm if norm > 0 else math.nan
    return ResidualReport(
        l2=grids.l2_norm(r, grid),
        linf=float(np.max(np.abs(r))) if r.size else 0.0,
        rho_weighted_mean=mean,
        grid_h=grid.spacing,
        dt=dt,
    )


def _check_series(series: Sequence[WavefunctionGrid]) -> float:
    if len(series) < 3:
        raise ShapeError("need at least three time slices")
    g = series[0].grid
    for psi in series[1:]:
        if not psi.grid.same_as(g):
            raise ShapeError("time slices are on different grids")
    t = np.array([psi.time for psi in series])
    dts = np.diff(t)
    if not np.all(dts > 0) or not np.allclose(dts, dts[0], rtol=1e-9):
        raise ShapeError("time slices must be uniformly spaced and increasing")
    return float(dts[0])


def _series_actions(series: Sequence[WavefunctionGrid], hbar: float, **mask_kw) -> list[ActionFields]:
    acts = [actions_from_wavefunction(psi, hbar, **mask_kw) for psi in series]
    # align the S1 branch across time: unwrap the reference-point value
    ref = np.array([a.S1[0] for a in acts]) / hbar
    shift = hbar * (np.unwrap(ref) - ref)
    return [
        ActionFields(a.grid, a.S1 + d, a.S2, a.hbar, a.time, a.valid, a.winding) for a, d in zip(acts, shift)
    ]


@dataclass(frozen=True)
class ContinuityResult:
    residual: np.ndarray  # d rho/dt + div(V rho) at interior time slices
    report: ResidualReport
    ac1_identity_max: float  # max |(ac1 lhs - ab lhs) - ac1 rhs|
    ac2_identity_max: float
    ac1_rhs: np.ndarray = field(repr=False, default=None)  # (i/m) div(grad S2 rho)


def continuity_residual(
    series: Sequence[WavefunctionGrid], m: float, hbar: float, *, order: int = 2, **mask_kw
) -> ContinuityResult:
    """Pointwise continuity residual and the forward/backward identities.

    With the formal complex velocities ``V +- iU`` the forward and backward
    continuity left-hand sides differ from the plain one by
    ``+-(i/m) div(grad S2 rho)``; that difference is checked pointwise.
    """
    dt = _check_series(series)
    grid = series[0].grid
    acts = _series_actions(series, hbar, **mask_kw)
    rhos = [psi.density for psi in series]
    res, id1, id2, rhs_all = [], 0.0, 0.0, []
    for k in range(1, len(series) - 1):
        rho = rhos[k]
        drho = (rhos[k + 1] - rhos[k - 1]) / (2.0 * dt)
        vel = velocities_from_actions(acts[k], m, order)
        div = lambda f: grids.divergence(f, grid, order)  # noqa: E731
        ab = drho + div(vel.V * rho)
        ac1 = drho + div((vel.V + 1j * vel.U) * rho)
        ac2 = drho + div((vel.V - 1j * vel.U) * rho)
        rhs = 1j / m * div(grids.gradient(acts[k].S2, grid, order) * rho)
        id1 = max(id1, float(np.nanmax(np.abs((ac1 - ab) - rhs))))
        id2 = max(id2, float(np.nanmax(np.abs((ac2 - ab) + rhs))))
        res.append(ab)
        rhs_all.append(rhs)
    res_arr = np.array(res)
    mid = len(res) // 2
    return ContinuityResult(
        residual=res_arr,
        report=_report(res_arr[mid], rhos[mid + 1], grid, dt),
        ac1_identity_max=id1,
        ac2_identity_max=id2,
        ac1_rhs=np.array(rhs_all),
    )


@dataclass(frozen=True)
class MadelungResult:
    res_aa1: np.ndarray
    res_aa2: np.ndarray
    res_ag1: np.ndarray
    aa1: ResidualReport
    aa2: ResidualReport
    ag1: ResidualReport


def madelung_residuals(
    series: Sequence[WavefunctionGrid],
    potential: Callable[[np.ndarray], np.ndarray],
    m: float,
    hbar: float,
    *,
    order: int = 2,
    **mask_kw,
) -> MadelungResult:
    """Residuals (lhs - rhs) of the split Schrodinger equation at the middle slice.

    aa1: dS2/dt = (hbar/2m) lap S1 - grad S1 . grad S2 / m
    aa2: -dS1/dt = (grad S1)^2/2m - (grad S2)^2/2m + (hbar/2m) lap S2 + U
    ag1: -dS1/dt = (grad S1)^2/2m + (grad S2)^2/2m + U
    """
    dt = _check_series(series)
    grid = series[0].grid
    acts = _series_actions(series, hbar, **mask_kw)
    k = len(series) // 2
    a = acts[k]
    ds1 = (acts[k + 1].S1 - acts[k - 1].S1) / (2.0 * dt)
    ds2 = (acts[k + 1].S2 - acts[k - 1].S2) / (2.0 * dt)
    g1 = _grad_s1(a, order)
    g2 = grids.gradient(a.S2, grid, order)
    lap1 = grids.laplacian(a.S1, grid, order) if not grid.periodic else grids.gradient(g1, grid, order)
    lap2 = grids.laplacian(a.S2, grid, order)
    pot = np.asarray(potential(grid.points), dtype=float)
    res_aa1 = ds2 - (hbar / (2 * m) * lap1 - g1 * g2 / m)
    res_aa2 = -ds1 - (g1**2 / (2 * m) - g2**2 / (2 * m) + hbar / (2 * m) * lap2 + pot)
    res_ag1 = -ds1 - (g1**2 / (2 * m) + g2**2 / (2 * m) + pot)
    rho = series[k].density
    return MadelungResult(
        res_aa1,
        res_aa2,
        res_ag1,
        _report(res_aa1, rho, grid, dt),
        _report(res_aa2, rho, grid, dt),
        _report(res_ag1, rho, grid, dt),
    )


@dataclass(frozen=True)
class IntegralIdentity:
    lhs: float  # int lap S2 exp(-2 S2/hbar) dV
    rhs: float  # (2/hbar) int (grad S2)^2 exp(-2 S2/hbar) dV
    pointwise_af2_residual: float  # max |lap S2 - (2/hbar)(grad S2)^2|
    boundary_flux: float


def integral_identity_check(
    s2: np.ndarray, grid: Grid, hbar: float, *, order: int = 2, flux_tol: float = 1e-12
) -> IntegralIdentity:
    """Both sides of the integration-by-parts identity for S2, plus the pointwise gap.

    Warns with :class:`SurfaceTermWarning` when ``grad S2 exp(-2 S2/hbar)``
    at the outer boundary exceeds ``flux_tol``.
    """
    s2 = np.asarray(s2, dtype=float)
    if s2.shape != grid.points.shape:
        raise ShapeError("S2 does not match the grid")
    g = grids.gradient(s2, grid, order)
    lap = grids.laplacian(s2, grid, order)
    weight = np.exp(-2.0 * (s2 - s2.min()) / hbar) * math.exp(-2.0 * s2.min() / hbar)
    flux_profile = np.abs(g * weight)
    if grid.kind == "radial":
        flux = float(4.0 * np.pi * grid.points[-1] ** 2 * flux_profile[-1])
    else:
        flux = float(flux_profile[-1] + flux_profile[0])
    if flux > flux_tol and not grid.periodic:
        warnings.warn(f"boundary flux {flux:.3g} is not negligible; surface terms survive", SurfaceTermWarning)
    lhs = float(grids.integrate_field(lap * weight, grid))
    rhs = float(2.0 / hbar * grids.integrate_field(g**2 * weight, grid))
    return IntegralIdentity(lhs, rhs, float(np.max(np.abs(lap - 2.0 / hbar * g**2))), flux)


@dataclass(frozen=True)
class EnergySplit:
    T_current: float
    T_osmotic: float
    V_pot: float
    hamiltonian: float  # <psi|H|psi> from a high-order Laplacian of psi

    @property
    def total(self) -> float:
        return self.T_current + self.T_osmotic + self.V_pot


def hamiltonian_expectation(
    psi: WavefunctionGrid, potential: Callable[[np.ndarray], np.ndarray], m: float, hbar: float, order: int = 8
) -> float:
    """<psi| -hbar^2/2m lap + U |psi>; radial Laplacian as (r psi)''/r."""
    g = psi.grid
    vals = psi.values
    h = g.spacing
    if g.kind == "radial":
        lap = grids.derivative(g.points * vals, h, 2, order) / g.points
    else:
        lap = grids.derivative(vals, h, 2, order, g.periodic)
    pot = np.asarray(potential(g.points), dtype=float)
    h_psi = -(hbar**2) / (2.0 * m) * lap + pot * vals
    return float(np.real(grids.integrate_field(np.conj(vals) * h_psi, g)) / psi.norm())


def energy_split(
    psi: WavefunctionGrid,
    potential: Callable[[np.ndarray], np.ndarray],
    m: float,
    hbar: float,
    *,
    order: int = 2,
    **mask_kw,
) -> EnergySplit:
    """Current kinetic, osmotic kinetic and potential expectation values."""
    a = actions_from_wavefunction(psi, hbar, **mask_kw)
    v = velocities_from_actions(a, m, order)
    rho = np.where(a.mask(), psi.density, 0.0)
    g = psi.grid
    norm = float(grids.integrate_field(rho, g))
    pot = np.asarray(potential(g.points), dtype=float)
    t_cur = float(grids.integrate_field(0.5 * m * np.nan_to_num(v.V) ** 2 * rho, g)) / norm
    t_osm = float(grids.integrate_field(0.5 * m * np.nan_to_num(v.U) ** 2 * rho, g)) / norm
    v_pot = float(grids.integrate_field(pot * rho, g)) / norm
    return EnergySplit(t_cur, t_osm, v_pot, hamiltonian_expectation(psi, potential, m, hbar))
