"""The five experiment families behind the command line.

Each runner takes a validated :class:`RunConfig` and returns the files to
write, the headline numbers and a list of tolerance checks.  Nothing here
touches the filesystem.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import grids, hydrogen_ground, nelson, oscillator, quadrature, states, vacuum_field
from .config import RunConfig, vacuum_sampling
from .units import Constants, atomic_constants, cgs_constants, natural_constants

RYDBERG_EV = 13.605693122994  # CODATA 2018


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    limit: float
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "limit": self.limit, "passed": self.passed}


def _at_most(name: str, value: float, limit: float) -> Check:
    return Check(name, float(value), float(limit), bool(value <= limit))


@dataclass
class Outcome:
    results: dict
    files: dict[str, str] = field(default_factory=dict)  # name -> CSV body (header added by the writer)
    json_files: dict[str, dict] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)


def constants_for(rc: RunConfig) -> Constants:
    if rc.unit_system == "gaussian-cgs":
        return cgs_constants()
    return natural_constants(1.0)


def oscillator_params(rc: RunConfig, tau_omega0: float | None = None) -> oscillator.OscillatorParams:
    p = rc.param_dict()
    omega0 = p["omega0"]
    if rc.unit_system == "gaussian-cgs":
        return oscillator.OscillatorParams.from_constants(cgs_constants(), omega0)
    t = p["tau_omega0"] if tau_omega0 is None else tau_omega0
    # natural units: tau = 2 e^2 / 3 with m = c = hbar = 1
    return oscillator.OscillatorParams(
        charge=math.sqrt(1.5 * t / omega0), mass=1.0, omega0=omega0, light_speed=1.0, hbar=1.0
    )


def _oscillator_times(rc: RunConfig) -> tuple[float, float, float]:
    """(dt, transient, total duration)."""
    p = rc.param_dict()
    params = oscillator_params(rc)
    dt = p["dt_omega0"] / params.omega0
    transient = p["damping_times"] / params.damping_rate
    window = p["window_periods"] * 2.0 * math.pi / params.omega0
    return dt, transient, transient + window


def oscillator_step_count(rc: RunConfig) -> float:
    dt, _, total = _oscillator_times(rc)
    return total / dt


# --- vacuum-sample -------------------------------------------------------------


def run_vacuum_sample(rc: RunConfig) -> Outcome:
    cfg = vacuum_sampling(rc)
    ms = vacuum_field.build_mode_set(cfg)
    n = len(ms)
    res: dict = {"n_modes": n, "omega_min": cfg.omega_min, "omega_max": cfg.omega_max}
    checks = []
    if n:
        qdote = np.abs(np.einsum("ij,ij->i", ms.wavevectors, ms.polarizations))
        qnorm = np.linalg.norm(ms.wavevectors, axis=1)
        disp = np.max(np.abs(qnorm * ms.light_speed / ms.frequencies - 1.0))
        modulus = np.max(np.abs(np.abs(ms.amplitudes) ** 2 - 0.5))
        # field energy density check: time-averaged |E|^2 at the origin vs sum of field_scale^2
        p = rc.param_dict()
        period = 2.0 * math.pi / cfg.omega_min
        t = np.linspace(0.0, period * p["n_times"], p["n_times"], endpoint=False)
        e2 = float(np.mean(np.sum(vacuum_field.electric_field_at(ms, np.zeros(3), t) ** 2, axis=1)))
        predicted = float(np.sum(ms.field_scales**2))
        # E = -(1/c) dA/dt by a centred difference at a few times
        h = 1e-4 / cfg.omega_max
        ts = t[:8]
        da = (
            vacuum_field.vector_potential_at(ms, np.zeros(3), ts + h)
            - vacuum_field.vector_potential_at(ms, np.zeros(3), ts - h)
        ) / (2.0 * h)
        e = vacuum_field.electric_field_at(ms, np.zeros(3), ts)
        gauge = float(np.max(np.abs(e + da / ms.light_speed)) / np.max(np.abs(e)))
        res.update(
            max_transversality=float(qdote.max() / qnorm.max()),
            max_dispersion_error=float(disp),
            max_amplitude_modulus_error=float(modulus),
            mean_E2_origin=e2,
            predicted_E2=predicted,
            E2_ratio=e2 / predicted,
            potential_relation_error=gauge,
        )
        checks = [
            _at_most("transversality", res["max_transversality"], 1e-12),
            _at_most("dispersion_relation", res["max_dispersion_error"], 1e-12),
            _at_most("amplitude_modulus", res["max_amplitude_modulus_error"], 1e-12),
            _at_most("E_equals_minus_dA_dt", gauge, 1e-6),
        ]
    return Outcome(res, {"modes.csv": vacuum_field.mode_set_to_csv(ms)}, checks=checks)


# --- oscillator-run ------------------------------------------------------------


def _drive_modes(rc: RunConfig, params: oscillator.OscillatorParams) -> vacuum_field.ModeSet:
    p = rc.param_dict()
    if p["drive"] == "single":
        return vacuum_field.single_mode_set(
            (0.0, 0.0, 1.0),
            (1.0, 0.0, 0.0),
            p["drive_ratio"] * params.omega0,
            hbar=params.hbar,
            light_speed=params.light_speed,
        )
    cfg = oscillator.resonance_sampling(params, p["count"], rc.seed, span=p["span"])
    return vacuum_field.build_mode_set(cfg)


def _rel_l2(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def run_oscillator(rc: RunConfig) -> Outcome:
    p = rc.param_dict()
    params = oscillator_params(rc)
    ms = _drive_modes(rc, params)
    dt, transient, total = _oscillator_times(rc)
    traj = oscillator.integrate_equation_of_motion(
        params, vacuum_field.field_drive(ms), np.zeros(3), np.zeros(3), dt, total, record_every=p["record_every"]
    )
    keep = traj.times >= transient
    t = traj.times[keep]
    ode_x = traj.positions[keep]
    ode_v = traj.velocities[keep]
    ss = oscillator.steady_state_solution(ms, params, t)
    canon_ss = oscillator.canonical_momentum(ms, params, ss.velocities, t)
    canon_ode = oscillator.canonical_momentum(ms, params, ode_v, t)
    res = {
        "tau_omega0": params.tau_omega0,
        "n_modes": len(ms),
        "dt": dt,
        "transient": transient,
        "duration": total,
        "integrator_status": traj.status,
        "position_rel_l2_error": _rel_l2(ode_x, ss.positions),
        "velocity_rel_l2_error": _rel_l2(ode_v, ss.velocities),
        "momentum_rel_l2_error": _rel_l2(canon_ss, ss.momenta),
        "momentum_rel_l2_error_ode": _rel_l2(canon_ode, ss.momenta),
    }
    checks = [_at_most("time_frequency_equivalence", res["position_rel_l2_error"], 1e-3)]
    if params.tau_omega0 <= 1e-4:
        checks.append(_at_most("momentum_relation", res["momentum_rel_l2_error"], 1e-2))
    window = oscillator.Trajectory(t, ode_x, params.mass * ode_v)
    files = {"trajectory.csv": window.to_csv(), "steady_state.csv": ss.to_csv()}
    json_files: dict[str, dict] = {}

    if p["realizations"] > 0:
        dparams = oscillator_params(rc, p["dispersion_tau_omega0"])
        sampling = oscillator.resonance_sampling(dparams, p["dispersion_modes"], rc.seed)
        summ = oscillator.ensemble_dispersions(
            dparams, sampling, p["realizations"], rc.seed, n_times=p["n_times"], workers=rc.workers
        )
        h, m, w0 = dparams.hbar, dparams.mass, dparams.omega0
        x2_ref, p2_ref = h / (2 * m * w0), m * h * w0 / 2
        res.update(
            x2=summ.x2,
            p2=summ.p2,
            x2_stderr=summ.x2_stderr,
            p2_stderr=summ.p2_stderr,
            uncertainty_product=summ.product,
            x2_over_ground=summ.x2 / x2_ref,
            p2_over_ground=summ.p2 / p2_ref,
            product_over_bound=summ.product / (h * h / 4),
        )
        json_files["dispersion.json"] = summ.to_dict()
        checks += [
            _at_most("x2_zero_point", abs(res["x2_over_ground"] - 1), 0.10),
            _at_most("p2_zero_point", abs(res["p2_over_ground"] - 1), 0.10),
            _at_most("uncertainty_product", abs(res["product_over_bound"] - 1), 0.20),
        ]
    return Outcome(res, files, json_files, checks)


# --- commutator-sum ------------------------------------------------------------


def run_commutator(rc: RunConfig) -> Outcome:
    p = rc.param_dict()
    params = oscillator_params(rc)
    cfg = oscillator.resonance_sampling(
        params, p["count"], rc.seed, span=p["span"], resonance_fraction=p["resonance_fraction"]
    )
    ms = vacuum_field.build_mode_set(cfg)
    tensor = oscillator.commutator_tensor(params, ms) / params.hbar
    value = float(np.trace(tensor) / 3.0)
    oracle = quadrature.commutator_integral(
        params.hbar, params.omega0, params.tau, cfg.omega_min, cfg.omega_max
    ) / params.hbar
    res = {
        "tau_omega0": params.tau_omega0,
        "n_modes": len(ms),
        "commutator_over_hbar": value,
        "continuum_over_hbar": oracle,
        "relative_to_continuum": value / oracle - 1.0,
        "anisotropy": float(np.max(np.abs(tensor - value * np.eye(3)))),
    }
    rows = ["j,k,value_over_hbar"] + [f"{j},{k},{tensor[j, k]:.17g}" for j in range(3) for k in range(3)]
    checks = [
        _at_most("commutator_vs_hbar", abs(value - 1.0), 0.02),
        _at_most("commutator_vs_continuum", abs(res["relative_to_continuum"]), 0.02),
    ]
    files = {"commutator_tensor.csv": "\n".join(rows) + "\n", "modes.csv": vacuum_field.mode_set_to_csv(ms)}
    return Outcome(res, files, checks=checks)


# --- nelson-run ----------------------------------------------------------------


def run_nelson(rc: RunConfig) -> Outcome:
    p = rc.param_dict()
    omega, m, hbar = p["omega"], 1.0, 1.0
    grid = grids.cartesian_grid(p["x_min"], p["x_max"], p["n_grid"])
    psi = states.harmonic_ground(grid, m, omega, hbar)
    pot = states.HarmonicPotential(m, omega)
    acts = nelson.actions_from_wavefunction(psi, hbar)
    vel = nelson.velocities_from_actions(acts, m)
    drift = nelson.HarmonicGroundDrift(omega) if p["drift"] == "analytic" else vel

    walkers = nelson.sample_walkers(grid, psi.density, p["n_walkers"], rc.seed)
    final = nelson.evolve_ensemble(
        walkers,
        drift,
        hbar,
        m,
        p["dt"],
        p["steps"],
        bounds=(p["x_min"], p["x_max"]),
        boundary=p["boundary"],
        workers=rc.workers,
    )
    x = final.positions
    var_ref = hbar / (2 * m * omega)
    length = math.sqrt(var_ref * 2)
    edges = np.linspace(-5 * length, 5 * length, p["bins"] + 1)
    target = nelson.grid_bin_probabilities(grid, psi.density, edges)
    l1 = nelson.density_l1_distance(x, edges, target)
    counts, _ = np.histogram(x, bins=edges)

    split = nelson.energy_split(psi, pot, m, hbar)
    series = states.stationary_series(psi, 0.5 * hbar * omega, hbar, 1e-3)
    mad = nelson.madelung_residuals(series, pot, m, hbar)
    ident = nelson.integral_identity_check(acts.S2, grid, hbar)
    cont = nelson.continuity_residual(series, m, hbar)

    res = {
        "n_walkers": len(final),
        "steps": final.step,
        "walker_variance": float(np.var(x)),
        "variance_over_ground": float(np.var(x) / var_ref),
        "walker_mean": float(np.mean(x)),
        "density_l1": l1,
        "T_current": split.T_current,
        "T_osmotic": split.T_osmotic,
        "V_pot": split.V_pot,
        "energy_total": split.total,
        "hamiltonian_expectation": split.hamiltonian,
        "max_res_aa1": float(np.max(np.abs(mad.res_aa1))),
        "max_res_aa2": float(np.max(np.abs(mad.res_aa2))),
        "max_res_ag1": float(np.max(np.abs(mad.res_ag1))),
        "mean_res_ag1": mad.ag1.rho_weighted_mean,
        "identity_lhs": ident.lhs,
        "identity_rhs": ident.rhs,
        "pointwise_af2_residual": ident.pointwise_af2_residual,
        "continuity_l2": cont.report.l2,
    }
    checks = [
        _at_most("walker_variance", abs(res["variance_over_ground"] - 1), 0.03),
        _at_most("density_l1", l1, 0.05),
        _at_most("energy_split_total", abs(split.total - split.hamiltonian), 1e-8),
        _at_most("madelung_aa2", res["max_res_aa2"], 1e-8),
        _at_most("madelung_ag1_mean", abs(res["mean_res_ag1"]), 1e-6),
        _at_most("integral_identity", abs(ident.lhs - ident.rhs), 1e-8),
    ]
    dens = ["bin_left,bin_right,empirical,target"] + [
        f"{a:.17g},{b:.17g},{c / len(x):.17g},{d:.17g}"
        for a, b, c, d in zip(edges[:-1], edges[1:], counts, target)
    ]
    files = {
        "walkers.csv": final.to_csv(),
        "wavefunction.csv": psi.to_csv(),
        "density.csv": "\n".join(dens) + "\n",
    }
    residuals = {
        "aa1": mad.aa1.to_dict(),
        "aa2": mad.aa2.to_dict(),
        "ag1": mad.ag1.to_dict(),
        "continuity": cont.report.to_dict(),
    }
    return Outcome(res, files, {"residuals.json": residuals}, checks)


# --- hlike-ground --------------------------------------------------------------


def run_hlike(rc: RunConfig) -> Outcome:
    p = rc.param_dict()
    k = cgs_constants() if rc.unit_system == "gaussian-cgs" else atomic_constants()
    atoms = [hydrogen_ground.AtomSpec(z, k, p["radial_spread"]) for z in range(p["z_min"], p["z_max"] + 1)]
    ground = [hydrogen_ground.minimize_ground_energy(a) for a in atoms]
    first = ground[0]
    res = {
        "Z": first.Z,
        "r_min": first.r_min,
        "E_min": first.E_min,
        "r_numeric": first.r_numeric,
        "E_numeric": first.E_numeric,
        "max_relative_gap": max(g.relative_gap for g in ground),
    }
    checks = [_at_most("numeric_vs_analytic", res["max_relative_gap"], 1e-10)]
    if first.E_min_eV is not None:
        res["E_min_eV"] = first.E_min_eV
        if p["radial_spread"] == 1.0:
            worst = max(abs(g.E_min_eV / (-RYDBERG_EV * g.Z**2) - 1) for g in ground)
            checks.append(_at_most("rydberg_ev", worst, 1e-3))
    return Outcome(res, {"sweep.csv": hydrogen_ground.sweep_csv(atoms)}, checks=checks)


RUNNERS = {
    "vacuum-sample": run_vacuum_sample,
    "oscillator-run": run_oscillator,
    "commutator-sum": run_commutator,
    "nelson-run": run_nelson,
    "hlike-ground": run_hlike,
}


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"
