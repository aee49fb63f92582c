"""Radiation-damped harmonic oscillator driven by the vacuum field.

The electron is bound harmonically (frequency ``omega0``) and driven by the
electric field of a :class:`~sedelectron.vacuum_field.ModeSet` evaluated at
the oscillator centre (dipole approximation).  Radiation reaction enters
through the order-reduced damping ``tau * omega0**2 * xdot``, which has no
runaway solutions.

For one mode with phasor ``conj(a) e^{i omega t}`` and per-mode scale
``F``, the steady state is::

    x = 2 Re( alpha e^{i omega t} ) pol,   alpha = -(e/m) F conj(a) chi(omega)
    P = 2 Re( beta  e^{i omega t} ) pol,   beta  = -i (e F omega0^2 / omega) conj(a) chi(omega)

with ``chi = 1/(omega0^2 - omega^2 + i tau omega^3)``.  ``P`` is the
canonical momentum ``m xdot - (e/c) A`` with the ``i tau omega^3`` term of
its numerator dropped, a relative change of order ``tau omega``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numba
import numpy as np

from .errors import AccuracyWarning, CoverageError, DomainError, ModelValidityError
from .parallel import ordered_map
from .rng import derive_seed
from .units import Constants, natural_constants
from .vacuum_field import ModeSamplingConfig, ModeSet, build_mode_set, vector_potential_at

_STEP_RESOLUTION_LIMIT = 0.1  # dt * omega0 above this triggers an accuracy warning


def radiation_time_constant(e: float, m: float, c: float) -> float:
    """Lorentz-Abraham time 2 e^2 / (3 m c^3)."""
    if e == 0:
        raise DomainError("charge must be nonzero")
    if m <= 0 or c <= 0:
        raise DomainError("mass and light speed must be positive")
    return 2.0 * e * e / (3.0 * m * c**3)


@dataclass(frozen=True)
class OscillatorParams:
    charge: float
    mass: float
    omega0: float
    light_speed: float
    hbar: float
    tau_override: float | None = None
    unit_system: str = "natural"

    def __post_init__(self) -> None:
        if self.mass <= 0 or self.light_speed <= 0 or self.omega0 <= 0 or self.hbar <= 0:
            raise DomainError("mass, light speed, omega0 and hbar must be positive")
        if self.tau_override is not None and self.tau_override < 0:
            raise DomainError("tau must be nonnegative")

    @property
    def tau(self) -> float:
        if self.tau_override is not None:
            return self.tau_override
        return radiation_time_constant(self.charge, self.mass, self.light_speed)

    @property
    def tau_omega0(self) -> float:
        return self.tau * self.omega0

    @property
    def damping_rate(self) -> float:
        """Energy decay rate tau * omega0**2 of the free oscillator."""
        return self.tau * self.omega0**2

    @classmethod
    def natural(cls, tau_omega0: float) -> "OscillatorParams":
        k = natural_constants(tau_omega0)
        return cls(charge=k.charge, mass=k.mass, omega0=1.0, light_speed=k.light_speed, hbar=k.hbar)

    @classmethod
    def from_constants(cls, k: Constants, omega0: float) -> "OscillatorParams":
        return cls(
            charge=k.charge,
            mass=k.mass,
            omega0=omega0,
            light_speed=k.light_speed,
            hbar=k.hbar,
            unit_system=k.name,
        )


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    positions: np.ndarray  # (n, 3)
    momenta: np.ndarray  # (n, 3)
    velocities: np.ndarray | None = None
    status: str = "ok"
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = len(self.times)
        if len(self.positions) != n or len(self.momenta) != n:
            raise DomainError("trajectory arrays must have equal lengths")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise DomainError("trajectory times must be strictly increasing")

    def to_csv(self, header_lines=()) -> str:
        out = [f"# {line}" for line in header_lines]
        out.append("t,x,y,z,px,py,pz")
        for t, r, p in zip(self.times, self.positions, self.momenta):
            out.append(",".join(format(float(v), ".17g") for v in (t, *r, *p)))
        return "\n".join(out) + "\n"


def susceptibility(omega, params: OscillatorParams):
    """1/(omega0^2 - omega^2 + i tau omega^3); the other branch is its conjugate."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise DomainError("frequency must be nonnegative")
    val = 1.0 / (params.omega0**2 - omega**2 + 1j * params.tau * omega**3)
    return complex(val) if val.ndim == 0 else val


def _require_narrow_line(params: OscillatorParams) -> None:
    if params.tau_omega0 >= 1.0:
        raise ModelValidityError(f"tau*omega0 = {params.tau_omega0:g} >= 1; the spectral solution does not apply")


def _mode_coefficients(ms: ModeSet, params: OscillatorParams, r0) -> tuple[np.ndarray, np.ndarray]:
    """(alpha, beta) per mode, with the propagation phase at ``r0`` folded in."""
    chi = susceptibility(ms.frequencies, params)
    phase0 = np.exp(-1j * (ms.wavevectors @ np.asarray(r0, dtype=float)))
    za = np.conj(ms.amplitudes) * phase0 * ms.field_scales
    e, m, w0 = params.charge, params.mass, params.omega0
    alpha = -(e / m) * za * chi
    beta = -1j * (e * w0**2 / ms.frequencies) * za * chi
    return alpha, beta


def _sum_modes(coef: np.ndarray, ms: ModeSet, times: np.ndarray, chunk: int = 4096) -> np.ndarray:
    out = np.empty((len(times), 3))
    for s in range(0, len(times), chunk):
        t = times[s : s + chunk]
        z = np.exp(1j * np.multiply.outer(t, ms.frequencies)) * coef
        out[s : s + chunk] = (2.0 * z.real) @ ms.polarizations
    return out


def steady_state_solution(ms: ModeSet, params: OscillatorParams, times, r0=(0.0, 0.0, 0.0)) -> Trajectory:
    """Closed-form forced response of every mode, sampled at ``times``.

    ``velocities`` holds the exact derivative of the position sum.
    """
    _require_narrow_line(params)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if len(ms) == 0:
        z = np.zeros((len(times), 3))
        return Trajectory(times, z, z.copy(), z.copy())
    alpha, beta = _mode_coefficients(ms, params, r0)
    x = _sum_modes(alpha, ms, times)
    v = _sum_modes(1j * ms.frequencies * alpha, ms, times)
    p = _sum_modes(beta, ms, times)
    return Trajectory(times, x, p, v)


def canonical_momentum(ms: ModeSet, params: OscillatorParams, velocities, times, r0=(0.0, 0.0, 0.0)) -> np.ndarray:
    """m * xdot - (e/c) A evaluated at the oscillator centre."""
    a = vector_potential_at(ms, np.asarray(r0, dtype=float), np.asarray(times, dtype=float))
    return params.mass * np.asarray(velocities) - (params.charge / params.light_speed) * a


def integrate_equation_of_motion(
    params: OscillatorParams,
    drive: Callable[[np.ndarray], np.ndarray],
    x0,
    v0,
    dt: float,
    T: float,
    *,
    record_every: int = 1,
    chunk_steps: int = 1 << 16,
) -> Trajectory:
    """Classical fourth-order Runge-Kutta for ``x'' + tau w0^2 x' + w0^2 x = -(e/m) E(t)``.

    ``drive`` maps an array of times to electric-field vectors of shape
    ``(n, 3)``.  Momenta in the returned trajectory are mechanical, ``m v``.
    """
    if dt <= 0 or T <= dt:
        raise DomainError("need dt > 0 and T > dt")
    status = "ok"
    if dt * params.omega0 > _STEP_RESOLUTION_LIMIT:
        status = "accuracy-warning"
        warnings.warn(f"dt*omega0 = {dt * params.omega0:g} exceeds {_STEP_RESOLUTION_LIMIT}", AccuracyWarning)

    n_steps = int(round(T / dt))
    gamma = params.damping_rate
    w2 = params.omega0**2
    qm = -params.charge / params.mass
    x = np.array(x0, dtype=float).reshape(3).copy()
    v = np.array(v0, dtype=float).reshape(3).copy()

    n_rec = n_steps // record_every
    rec_x = np.empty((n_rec + 1, 3))
    rec_v = np.empty((n_rec + 1, 3))
    rec_x[0], rec_v[0] = x, v
    filled = 1
    for s in range(0, n_steps, chunk_steps):
        m = min(chunk_steps, n_steps - s)
        t_half = (s + 0.5 * np.arange(2 * m + 1)) * dt
        force = qm * np.asarray(drive(t_half), dtype=float).reshape(2 * m + 1, 3)
        if not np.all(np.isfinite(force)):
            raise DomainError("drive returned non-finite values")
        filled = _integrate_chunk(x, v, force, dt, gamma, w2, record_every, s, rec_x, rec_v, filled)
    times = np.arange(filled) * (record_every * dt)
    return Trajectory(
        times=times,
        positions=rec_x[:filled],
        momenta=params.mass * rec_v[:filled],
        velocities=rec_v[:filled],
        status=status,
    )


@numba.njit(cache=True)
def _integrate_chunk(x, v, force, h, gamma, w2, record_every, start, rec_x, rec_v, filled):
    # force[2k], force[2k+1], force[2k+2]: drive acceleration at t_k, t_k + h/2, t_k + h
    n_steps = (force.shape[0] - 1) // 2
    for k in range(n_steps):
        for j in range(3):
            f0 = force[2 * k, j]
            fm = force[2 * k + 1, j]
            f1 = force[2 * k + 2, j]
            x0 = x[j]
            v0 = v[j]
            a1 = f0 - gamma * v0 - w2 * x0
            x2 = x0 + 0.5 * h * v0
            v2 = v0 + 0.5 * h * a1
            a2 = fm - gamma * v2 - w2 * x2
            x3 = x0 + 0.5 * h * v2
            v3 = v0 + 0.5 * h * a2
            a3 = fm - gamma * v3 - w2 * x3
            x4 = x0 + h * v3
            v4 = v0 + h * a3
            a4 = f1 - gamma * v4 - w2 * x4
            x[j] = x0 + h / 6.0 * (v0 + 2.0 * v2 + 2.0 * v3 + v4)
            v[j] = v0 + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        if (start + k + 1) % record_every == 0:
            rec_x[filled] = x
            rec_v[filled] = v
            filled += 1
    return filled


def _check_coverage(params: OscillatorParams, ms: ModeSet) -> None:
    lo, hi = ms.cutoffs
    if not lo <= params.omega0 <= hi:
        raise CoverageError(f"cutoffs ({lo:g}, {hi:g}) do not contain omega0 = {params.omega0:g}")


def commutator_tensor(params: OscillatorParams, ms: ModeSet) -> np.ndarray:
    """3x3 matrix C with [P_j, x_k] = -i C_jk for unit commutators per mode.

    Per mode, ``[P_j, x_k] = (conj(beta) alpha - beta conj(alpha)) pol_j pol_k / |a|^2``
    which evaluates to ``-2i e^2 F^2 omega0^2 / (m omega |D|^2) pol_j pol_k``.
    """
    if len(ms) == 0:
        return np.zeros((3, 3))
    _require_narrow_line(params)
    _check_coverage(params, ms)
    w = ms.frequencies
    chi2 = np.abs(susceptibility(w, params)) ** 2
    e, m, w0 = params.charge, params.mass, params.omega0
    per_mode = 2.0 * e * e * ms.field_scales**2 * w0**2 * chi2 / (m * w)
    return (ms.polarizations * per_mode[:, None]).T @ ms.polarizations


def commutator_mode_sum(params: OscillatorParams, ms: ModeSet) -> float:
    """Isotropic part (trace / 3) of :func:`commutator_tensor`; approaches hbar."""
    return float(np.trace(commutator_tensor(params, ms)) / 3.0)


@dataclass(frozen=True)
class DispersionSummary:
    x2: float
    p2: float
    n_modes: int
    n_realizations: int
    seed: int
    x2_stderr: float = 0.0
    p2_stderr: float = 0.0

    @property
    def product(self) -> float:
        return self.x2 * self.p2

    def to_dict(self) -> dict:
        return {
            "x2": self.x2,
            "p2": self.p2,
            "product": self.product,
            "n_modes": self.n_modes,
            "n_realizations": self.n_realizations,
            "seed": self.seed,
        }


def phase_averaged_dispersions(params: OscillatorParams, ms: ModeSet) -> tuple[float, float]:
    """Exact expectation over mode phases of per-component <x^2>, <P^2>."""
    if len(ms) == 0:
        return 0.0, 0.0
    _require_narrow_line(params)
    alpha, beta = _mode_coefficients(ms, params, (0.0, 0.0, 0.0))
    # 2|coef|^2 per mode, shared equally among components on average: sum_j pol_j^2 = 1
    return float(2.0 * np.sum(np.abs(alpha) ** 2) / 3.0), float(2.0 * np.sum(np.abs(beta) ** 2) / 3.0)


def sample_times(params: OscillatorParams, n_times: int, spacing: float | None = None) -> np.ndarray:
    """Times spread over many coherence times 1/(tau omega0^2)."""
    spacing = 1.0 / params.damping_rate if spacing is None else spacing
    return np.arange(n_times) * spacing


def oscillator_dispersions(
    params: OscillatorParams, ms: ModeSet, times=None, n_times: int = 4096
) -> tuple[float, float]:
    """Time-averaged per-component <x^2>, <P^2> of one realization (ergodic estimate)."""
    if len(ms) == 0:
        return 0.0, 0.0
    _check_coverage(params, ms)
    t = sample_times(params, n_times) if times is None else np.asarray(times, dtype=float)
    traj = steady_state_solution(ms, params, t)
    return float(np.mean(traj.positions**2)), float(np.mean(traj.momenta**2))


@dataclass(frozen=True)
class _RealizationTask:
    params: OscillatorParams
    sampling: ModeSamplingConfig
    seed: int
    index: int
    n_times: int


def _realization_moments(task: _RealizationTask) -> tuple[float, float]:
    cfg = task.sampling
    ms = build_mode_set(
        ModeSamplingConfig(**{**cfg.__dict__, "seed": derive_seed(task.seed, task.index)})
    )
    return oscillator_dispersions(task.params, ms, n_times=task.n_times)


def ensemble_dispersions(
    params: OscillatorParams,
    sampling: ModeSamplingConfig,
    n_realizations: int,
    seed: int,
    *,
    n_times: int = 64,
    workers: int = 1,
) -> DispersionSummary:
    """Average over independent mode-set realizations, each time-sampled.

    Realization ``k`` draws its modes from ``derive_seed(seed, k)``, so the
    result does not depend on ``workers``.
    """
    if n_realizations < 1:
        raise DomainError("need at least one realization")
    tasks = [_RealizationTask(params, sampling, seed, k, n_times) for k in range(n_realizations)]
    moments = np.array(ordered_map(_realization_moments, tasks, workers))
    x2s, p2s = moments[:, 0], moments[:, 1]
    denom = math.sqrt(n_realizations)
    return DispersionSummary(
        x2=float(np.mean(x2s)),
        p2=float(np.mean(p2s)),
        n_modes=sampling.count,
        n_realizations=n_realizations,
        seed=seed,
        x2_stderr=float(np.std(x2s, ddof=1) / denom) if n_realizations > 1 else math.inf,
        p2_stderr=float(np.std(p2s, ddof=1) / denom) if n_realizations > 1 else math.inf,
    )


def resonance_sampling(
    params: OscillatorParams,
    count: int,
    seed: int,
    *,
    span: float = 50.0,
    resonance_fraction: float = 0.9,
) -> ModeSamplingConfig:
    """Resonance-stratified mode sampling over ``[omega0/span, span*omega0]``."""
    return ModeSamplingConfig(
        count=count,
        omega_min=params.omega0 / span,
        omega_max=params.omega0 * span,
        sampling_law="stratified",
        seed=seed,
        resonance_center=params.omega0,
        resonance_width=0.5 * params.tau * params.omega0**2,
        resonance_fraction=resonance_fraction,
        hbar=params.hbar,
        light_speed=params.light_speed,
    )
