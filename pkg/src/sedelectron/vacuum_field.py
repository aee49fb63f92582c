"""Random-phase synthesis of the zero-point electromagnetic field.

The vacuum field is a finite sum of transverse plane-wave modes.  Each
mode carries a complex amplitude of fixed modulus 1/sqrt(2) and uniform
random phase, so the phase-averaged square field of a mode equals the
symmetrized vacuum expectation ``field_scale**2``.

Field conventions (phase ``phi = omega*t - q.r``, amplitude ``a``)::

    E = sum field_scale * pol * (conj(a) e^{+i phi} + a e^{-i phi})
    A = sum (i c / omega) field_scale * pol * (conj(a) e^{+i phi} - a e^{-i phi})

which gives ``E = -(1/c) dA/dt`` and ``|A|/|E| = c/omega`` per mode.

A sampled mode stands in for ``weight`` physical modes of the box of
volume ``V``; its ``field_scale`` is ``sqrt(2 pi hbar omega weight / V)``.
Hand-built modes have ``weight = 1``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError

AMPLITUDE_MODULUS = 1.0 / math.sqrt(2.0)
SAMPLING_LAWS = ("uniform", "stratified")
MODE_CSV_COLUMNS = ("qx", "qy", "qz", "omega", "ex", "ey", "ez", "re_a", "im_a", "field_scale")


@dataclass(frozen=True)
class Mode:
    wavevector: np.ndarray
    frequency: float
    polarization: np.ndarray
    amplitude: complex
    field_scale: float

    @property
    def phase(self) -> float:
        return float(np.angle(self.amplitude))


@dataclass(frozen=True)
class ModeSamplingConfig:
    """How to draw a mode set.

    ``stratified`` puts ``resonance_fraction`` of the modes on a truncated
    Lorentzian centred at ``resonance_center`` with half-width
    ``resonance_width`` and the rest uniformly in frequency; both parts use
    one jittered sample per stratum.  Quadrature weights follow the
    balance heuristic over the two parts.
    """

    count: int
    omega_min: float
    omega_max: float
    sampling_law: str = "uniform"
    seed: int = 0
    resonance_center: float | None = None
    resonance_width: float | None = None
    resonance_fraction: float = 0.9
    hbar: float = 1.0
    light_speed: float = 1.0
    volume: float = 1.0

    def validate(self) -> None:
        if int(self.count) != self.count or self.count < 0:
            raise ConfigurationError(f"mode count must be a nonnegative integer, got {self.count!r}")
        if not (math.isfinite(self.omega_min) and math.isfinite(self.omega_max)):
            raise ConfigurationError("frequency cutoffs must be finite")
        if self.omega_min <= 0 or self.omega_min >= self.omega_max:
            raise ConfigurationError(
                f"cutoffs must satisfy 0 < omega_min < omega_max, got ({self.omega_min}, {self.omega_max})"
            )
        if self.sampling_law not in SAMPLING_LAWS:
            raise ConfigurationError(f"unknown sampling_law {self.sampling_law!r}")
        if self.sampling_law == "stratified":
            if self.resonance_center is None or self.resonance_width is None:
                raise ConfigurationError("stratified sampling needs resonance_center and resonance_width")
            if self.resonance_width <= 0:
                raise ConfigurationError("resonance_width must be positive")
            if not 0.0 <= self.resonance_fraction <= 1.0:
                raise ConfigurationError("resonance_fraction must lie in [0, 1]")
        if self.hbar <= 0 or self.light_speed <= 0 or self.volume <= 0:
            raise ConfigurationError("hbar, light_speed and volume must be positive")


@dataclass(frozen=True, eq=False)
class ModeSet:
    """Immutable columnar store of vacuum modes."""

    wavevectors: np.ndarray  # (n, 3)
    frequencies: np.ndarray  # (n,)
    polarizations: np.ndarray  # (n, 3)
    amplitudes: np.ndarray  # (n,) complex
    field_scales: np.ndarray  # (n,)
    normalization_volume: float = 1.0
    cutoffs: tuple[float, float] = (0.0, math.inf)
    seed: int = 0
    light_speed: float = 1.0
    hbar: float = 1.0
    weights: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        n = len(self.frequencies)
        if self.weights is None:
            object.__setattr__(self, "weights", np.ones(n))
        for name in ("wavevectors", "frequencies", "polarizations", "amplitudes", "field_scales", "weights"):
            arr = getattr(self, name)
            arr.setflags(write=False)
            if len(arr) != n:
                raise DomainError(f"{name} has {len(arr)} rows, expected {n}")

    def __len__(self) -> int:
        return len(self.frequencies)

    def __getitem__(self, i: int) -> Mode:
        return Mode(
            wavevector=self.wavevectors[i],
            frequency=float(self.frequencies[i]),
            polarization=self.polarizations[i],
            amplitude=complex(self.amplitudes[i]),
            field_scale=float(self.field_scales[i]),
        )

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def with_amplitudes(self, amplitudes: np.ndarray) -> "ModeSet":
        return _replace(self, amplitudes=np.asarray(amplitudes, dtype=complex).copy())

    def with_field_scales(self, field_scales: np.ndarray) -> "ModeSet":
        return _replace(self, field_scales=np.asarray(field_scales, dtype=float).copy())

    def union(self, other: "ModeSet") -> "ModeSet":
        return ModeSet(
            wavevectors=np.vstack([self.wavevectors, other.wavevectors]),
            frequencies=np.concatenate([self.frequencies, other.frequencies]),
            polarizations=np.vstack([self.polarizations, other.polarizations]),
            amplitudes=np.concatenate([self.amplitudes, other.amplitudes]),
            field_scales=np.concatenate([self.field_scales, other.field_scales]),
            normalization_volume=self.normalization_volume,
            cutoffs=(min(self.cutoffs[0], other.cutoffs[0]), max(self.cutoffs[1], other.cutoffs[1])),
            seed=self.seed,
            light_speed=self.light_speed,
            hbar=self.hbar,
            weights=np.concatenate([self.weights, other.weights]),
        )


def _replace(ms: ModeSet, **changes) -> ModeSet:
    kw = dict(
        wavevectors=ms.wavevectors,
        frequencies=ms.frequencies,
        polarizations=ms.polarizations,
        amplitudes=ms.amplitudes,
        field_scales=ms.field_scales,
        normalization_volume=ms.normalization_volume,
        cutoffs=ms.cutoffs,
        seed=ms.seed,
        light_speed=ms.light_speed,
        hbar=ms.hbar,
        weights=ms.weights,
    )
    kw.update(changes)
    return ModeSet(**kw)


def empty_mode_set(hbar: float = 1.0, light_speed: float = 1.0) -> ModeSet:
    return ModeSet(
        wavevectors=np.zeros((0, 3)),
        frequencies=np.zeros(0),
        polarizations=np.zeros((0, 3)),
        amplitudes=np.zeros(0, dtype=complex),
        field_scales=np.zeros(0),
        light_speed=light_speed,
        hbar=hbar,
    )


def mode_field_scale(omega, hbar: float, volume: float, weight=1.0):
    """Per-mode coefficient sqrt(2 pi hbar omega weight / V)."""
    return np.sqrt(2.0 * np.pi * hbar * np.asarray(omega) * weight / volume)


def single_mode_set(
    direction: Sequence[float],
    polarization: Sequence[float],
    omega: float,
    phase: float = 0.0,
    *,
    hbar: float = 1.0,
    light_speed: float = 1.0,
    volume: float = 1.0,
) -> ModeSet:
    """One mode travelling along ``direction``; ``polarization`` is projected transverse."""
    khat = np.asarray(direction, dtype=float)
    khat = khat / np.linalg.norm(khat)
    pol = np.asarray(polarization, dtype=float)
    pol = pol - khat * (pol @ khat)
    norm = np.linalg.norm(pol)
    if norm == 0:
        raise DomainError("polarization is parallel to the wavevector")
    pol = pol / norm
    return ModeSet(
        wavevectors=(khat * omega / light_speed)[None, :],
        frequencies=np.array([float(omega)]),
        polarizations=pol[None, :],
        amplitudes=np.array([AMPLITUDE_MODULUS * np.exp(1j * phase)]),
        field_scales=np.atleast_1d(mode_field_scale(omega, hbar, volume)),
        normalization_volume=volume,
        cutoffs=(float(omega), float(omega)),
        light_speed=light_speed,
        hbar=hbar,
    )


def _isotropic_directions(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _transverse_polarizations(rng: np.random.Generator, khat: np.ndarray) -> np.ndarray:
    n = len(khat)
    # helper axis least aligned with khat keeps the cross product well conditioned
    helper = np.zeros((n, 3))
    helper[np.arange(n), np.argmin(np.abs(khat), axis=1)] = 1.0
    e1 = np.cross(khat, helper)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(khat, e1)
    angle = rng.uniform(0.0, 2.0 * np.pi, n)
    pol = np.cos(angle)[:, None] * e1 + np.sin(angle)[:, None] * e2
    pol -= khat * np.einsum("ij,ij->i", pol, khat)[:, None]
    return pol / np.linalg.norm(pol, axis=1, keepdims=True)


def _cauchy_cdf(w, center, width):
    return np.arctan((np.asarray(w) - center) / width) / np.pi + 0.5


def _stratified_uniforms(rng: np.random.Generator, n: int) -> np.ndarray:
    return (np.arange(n) + rng.uniform(0.0, 1.0, n)) / n


def _sample_frequencies(cfg: ModeSamplingConfig, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Frequencies and the sampling density ``count * p(omega)`` at each one."""
    lo, hi, n = cfg.omega_min, cfg.omega_max, cfg.count
    if cfg.sampling_law == "uniform":
        omega = rng.uniform(lo, hi, n)
        return omega, np.full(n, n / (hi - lo))

    c, g = cfg.resonance_center, cfg.resonance_width
    n_res = int(round(cfg.resonance_fraction * n))
    n_uni = n - n_res
    f_lo, f_hi = _cauchy_cdf(lo, c, g), _cauchy_cdf(hi, c, g)
    u = f_lo + (f_hi - f_lo) * _stratified_uniforms(rng, n_res)
    w_res = c + g * np.tan(np.pi * (u - 0.5))
    w_uni = lo + (hi - lo) * _stratified_uniforms(rng, n_uni)
    omega = np.clip(np.concatenate([w_res, w_uni]), lo, hi)
    cauchy_pdf = (g / np.pi) / ((omega - c) ** 2 + g**2) / (f_hi - f_lo)
    density = n_res * cauchy_pdf + n_uni / (hi - lo)
    return omega, density


def build_mode_set(cfg: ModeSamplingConfig) -> ModeSet:
    """Sample ``cfg.count`` vacuum modes.

    Each sampled mode represents ``weight = g(omega) / (count p(omega))``
    physical modes, with ``g = V omega^2 / (pi^2 c^3)`` the density of
    states summed over both polarizations.  One transverse polarization is
    drawn per sample.
    """
    cfg.validate()
    n = int(cfg.count)
    c = cfg.light_speed
    if n == 0:
        ms = empty_mode_set(cfg.hbar, c)
        return _replace(ms, normalization_volume=cfg.volume, cutoffs=(cfg.omega_min, cfg.omega_max), seed=cfg.seed)

    rng = np.random.default_rng(cfg.seed)
    omega, density = _sample_frequencies(cfg, rng)
    khat = _isotropic_directions(rng, n)
    pol = _transverse_polarizations(rng, khat)
    phases = rng.uniform(0.0, 2.0 * np.pi, n)

    dos = cfg.volume * omega**2 / (np.pi**2 * c**3)
    weights = dos / density
    return ModeSet(
        wavevectors=khat * (omega / c)[:, None],
        frequencies=omega,
        polarizations=pol,
        amplitudes=AMPLITUDE_MODULUS * np.exp(1j * phases),
        field_scales=mode_field_scale(omega, cfg.hbar, cfg.volume, weights),
        normalization_volume=cfg.volume,
        cutoffs=(cfg.omega_min, cfg.omega_max),
        seed=cfg.seed,
        light_speed=c,
        hbar=cfg.hbar,
        weights=weights,
    )


def _check_point(r, t) -> tuple[np.ndarray, np.ndarray]:
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    if r.shape[-1:] != (3,):
        raise DomainError("position must be a 3-vector")
    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(t))):
        raise DomainError("position and time must be finite")
    return r, t


def _phase_args(ms: ModeSet, r: np.ndarray, t: np.ndarray) -> np.ndarray:
    """omega t - q.r - arg(a), shape t.shape + (n_modes,)."""
    offset = ms.wavevectors @ r + np.angle(ms.amplitudes)
    return np.multiply.outer(t, ms.frequencies) - offset


def _evaluate(ms: ModeSet, r, t, trig, coef: np.ndarray, chunk: int = 1 << 20) -> np.ndarray:
    r, t = _check_point(r, t)
    if len(ms) == 0:
        return np.zeros(t.shape + (3,))
    flat = t.reshape(-1)
    out = np.empty((flat.size, 3))
    rows = max(1, chunk // len(ms))
    for s in range(0, flat.size, rows):
        out[s : s + rows] = (trig(_phase_args(ms, r, flat[s : s + rows])) * coef) @ ms.polarizations
    return out.reshape(t.shape + (3,))


def electric_field_at(ms: ModeSet, r, t) -> np.ndarray:
    """Electric field at position ``r``; ``t`` may be a scalar or an array of times.

    Returns shape ``t.shape + (3,)``.  Per mode this is
    ``2 |a| field_scale cos(omega t - q.r - arg a) pol``.
    """
    return _evaluate(ms, r, t, np.cos, 2.0 * np.abs(ms.amplitudes) * ms.field_scales)


def vector_potential_at(ms: ModeSet, r, t) -> np.ndarray:
    # (i c/omega)(z - conj z) with z = conj(a) e^{i phi} is -(2c/omega)|a| sin(phi - arg a)
    with np.errstate(divide="ignore"):
        coef = -2.0 * ms.light_speed * np.abs(ms.amplitudes) * ms.field_scales / ms.frequencies
    return _evaluate(ms, r, t, np.sin, coef)


def field_drive(ms: ModeSet, r=(0.0, 0.0, 0.0)):
    """Vectorized electric-field evaluator ``t -> E(r, t)`` at a fixed point."""
    r = np.asarray(r, dtype=float)

    def drive(t):
        return electric_field_at(ms, r, t)

    return drive


def mode_set_to_csv(ms: ModeSet, header_lines: Iterable[str] = ()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MODE_CSV_COLUMNS)
    for i in range(len(ms)):
        q, e, a = ms.wavevectors[i], ms.polarizations[i], ms.amplitudes[i]
        row = (*q, ms.frequencies[i], *e, a.real, a.imag, ms.field_scales[i])
        w.writerow([format(float(v), ".17g") for v in row])
    return buf.getvalue()


def mode_set_from_csv(text: str, *, hbar: float = 1.0, light_speed: float = 1.0, volume: float = 1.0) -> ModeSet:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    if tuple(header) != MODE_CSV_COLUMNS:
        raise DomainError(f"unexpected mode CSV header {header}")
    rows = np.array([[float(v) for v in row] for row in reader], dtype=float).reshape(-1, len(MODE_CSV_COLUMNS))
    omega = rows[:, 3]
    fs = rows[:, 9]
    with np.errstate(divide="ignore", invalid="ignore"):
        weights = fs**2 * volume / (2.0 * np.pi * hbar * omega) if len(rows) else np.zeros(0)
    return ModeSet(
        wavevectors=rows[:, 0:3].copy(),
        frequencies=omega.copy(),
        polarizations=rows[:, 4:7].copy(),
        amplitudes=rows[:, 7] + 1j * rows[:, 8],
        field_scales=fs.copy(),
        normalization_volume=volume,
        cutoffs=(float(omega.min()), float(omega.max())) if len(rows) else (0.0, math.inf),
        light_speed=light_speed,
        hbar=hbar,
        weights=weights,
    )
