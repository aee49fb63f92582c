"""End-to-end acceptance criteria, one test each, with a printed verdict line."""

import json
import math
import time

import numpy as np
import pytest

from sedelectron import grids, nelson, quadrature, states
from sedelectron.cli import run_experiment
from sedelectron.config import parse_config
from sedelectron.hydrogen_ground import AtomSpec, minimize_ground_energy
from sedelectron.uncertainty_stats import angular_momentum_paper_total, isotropic_ground_dispersions
from sedelectron.units import cgs_constants

RYDBERG_EV = 13.605693122994


@pytest.fixture
def report(capsys):
    def emit(n, title, passed, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n:2d} {'PASS' if passed else 'FAIL'} {title}: {detail}")
        return passed

    return emit


def run(tmp_path, text, name="out"):
    rc = parse_config(text)
    out = tmp_path / name
    start = time.perf_counter()
    status = run_experiment(rc, out)
    elapsed = time.perf_counter() - start
    assert status == 0
    return json.loads((out / "summary.json").read_text()), elapsed, out


def test_1_commutator_recovery(tmp_path, report):
    s, elapsed, _ = run(tmp_path, "[run]\nexperiment = commutator-sum\nseed = 1\n[commutator-sum]\ntau_omega0 = 1e-6\n")
    tau = s["tau_omega0"]
    oracle = quadrature.commutator_integral(1.0, 1.0, tau, 1 / 50, 50)
    value = s["commutator_over_hbar"]
    ok = abs(value - 1) <= 0.02 and abs(value / oracle - 1) <= 0.02 and elapsed < 60
    report(1, "commutator", ok, f"sum/hbar = {value:.6f}, quadrature/hbar = {oracle:.8f}, {elapsed:.1f} s")
    assert ok


def test_2_zero_point_dispersions(tmp_path, report):
    s, elapsed, out = run(
        tmp_path, "[run]\nexperiment = oscillator-run\nseed = 2\n[oscillator-run]\nrealizations = 200\n"
    )
    d = json.loads((out / "dispersion.json").read_text())
    # natural units: hbar / (2 m w0) = m hbar w0 / 2 = 1/2
    x2, p2 = d["x2"] / 0.5, d["p2"] / 0.5
    prod = d["x2"] * d["p2"] / 0.25
    ok = (
        d["n_realizations"] >= 200
        and abs(x2 - 1) <= 0.10
        and abs(p2 - 1) <= 0.10
        and abs(prod - 1) <= 0.20
        and elapsed < 300
    )
    report(2, "zero-point dispersions", ok, f"x2 ratio {x2:.4f}, p2 ratio {p2:.4f}, product ratio {prod:.4f}, {elapsed:.1f} s")
    assert ok


@pytest.mark.parametrize("ratio", [1.0, 0.5, 2.0])
def test_3_time_frequency_equivalence(tmp_path, report, ratio):
    s, _, _ = run(
        tmp_path,
        f"[run]\nexperiment = oscillator-run\nseed = 3\n[oscillator-run]\ntau_omega0 = 1e-4\ndrive_ratio = {ratio}\ndamping_times = 20\n",
    )
    err = s["position_rel_l2_error"]
    ok = err < 1e-3 and s["transient"] >= 20 / (s["tau_omega0"])
    report(3, f"time/frequency (omega/omega0 = {ratio})", ok, f"relative L2 = {err:.3e}")
    assert ok


def test_4_momentum_relation(tmp_path, report):
    s, _, _ = run(tmp_path, "[run]\nexperiment = oscillator-run\nseed = 4\n[oscillator-run]\ntau_omega0 = 1e-4\n")
    err = s["momentum_rel_l2_error"]
    ok = s["tau_omega0"] <= 1e-4 and err < 1e-2
    report(4, "momentum relation", ok, f"relative L2 = {err:.3e} (ODE-based {s['momentum_rel_l2_error_ode']:.3e})")
    assert ok


def test_5_nelson_stationarity(tmp_path, report):
    s, elapsed, _ = run(
        tmp_path,
        "[run]\nexperiment = nelson-run\nseed = 5\n[nelson-run]\nn_walkers = 100000\ndt = 1e-3\nsteps = 10000\n",
    )
    var, l1 = s["walker_variance"], s["density_l1"]
    ok = abs(var / 0.5 - 1) <= 0.03 and l1 < 0.05 and elapsed < 60
    report(5, "Nelson stationarity", ok, f"variance {var:.5f} (target 0.5), L1 {l1:.4f}, {elapsed:.1f} s")
    assert ok


def test_6_energy_split(report):
    g = grids.cartesian_grid(-12.0, 12.0, 4801)
    ho = nelson.energy_split(states.harmonic_ground(g), states.HarmonicPotential(), 1.0, 1.0)
    rg = grids.radial_grid(30.0, 6000)
    h = nelson.energy_split(states.hydrogen_1s(rg), states.CoulombPotential(), 1.0, 1.0)
    ok = (
        ho.T_current == 0.0
        and abs(ho.T_osmotic - 0.25) < 1e-8
        and abs(ho.V_pot - 0.25) < 1e-8
        and abs(ho.total - ho.hamiltonian) < 1e-8
        and rg.size >= 4000
        and abs(h.total + 0.5) < 1e-8
    )
    report(
        6,
        "energy split",
        ok,
        f"HO ({ho.T_current:.1e}, {ho.T_osmotic:.10f}, {ho.V_pot:.10f}), |total-<H>| {abs(ho.total - ho.hamiltonian):.1e}; "
        f"1s total {h.total:.12f}",
    )
    assert ok


def test_7_madelung_residuals(report):
    g = grids.cartesian_grid(-12.0, 12.0, 4801)
    ho = nelson.madelung_residuals(
        states.stationary_series(states.harmonic_ground(g), 0.5, 1.0, 1e-3), states.HarmonicPotential(), 1.0, 1.0
    )
    rg = grids.radial_grid(30.0, 6000)
    hy = nelson.madelung_residuals(
        states.stationary_series(states.hydrogen_1s(rg), -0.5, 1.0, 1e-3), states.CoulombPotential(), 1.0, 1.0
    )
    exact = max(np.max(np.abs(r)) for r in (ho.res_aa1, ho.res_aa2, hy.res_aa1, hy.res_aa2))
    pointwise = min(np.max(np.abs(ho.res_ag1)), np.max(np.abs(hy.res_ag1)))
    mean = max(abs(ho.ag1.rho_weighted_mean), abs(hy.ag1.rho_weighted_mean))
    ok = exact < 1e-8 and pointwise > 0.1 and mean < 1e-6
    report(7, "Madelung residuals", ok, f"exact pair max {exact:.2e}, ag1 pointwise {pointwise:.3g}, ag1 mean {mean:.2e}")
    assert ok


def test_8_integral_identity(report):
    g = grids.cartesian_grid(-12.0, 12.0, 4801)
    ident = nelson.integral_identity_check(g.points**2 / 2, g, 1.0)
    ok = abs(ident.lhs - ident.rhs) < 1e-8 and ident.pointwise_af2_residual > 0 and ident.boundary_flux < 1e-12
    report(
        8,
        "integral identity",
        ok,
        f"lhs {ident.lhs:.12f}, rhs {ident.rhs:.12f}, pointwise residual {ident.pointwise_af2_residual:.4g}",
    )
    assert ok


def test_9_continuity(report):
    norms, ident = [], 0.0
    for n in (400, 800, 1600):
        g = grids.cartesian_grid(-10.0, 10.0, n + 1)
        series = [states.coherent_state(g, 0.3 + k * 1e-4, x0=1.0) for k in (-1, 0, 1)]
        res = nelson.continuity_residual(series, 1.0, 1.0)
        norms.append(res.report.l2)
        ident = max(ident, res.ac1_identity_max, res.ac2_identity_max)
    orders = [math.log2(a / b) for a, b in zip(norms, norms[1:])]
    ok = min(orders) >= 1.9 and ident < 1e-12
    report(9, "continuity", ok, f"observed orders {', '.join(f'{o:.3f}' for o in orders)}, identity {ident:.1e}")
    assert ok


def test_10_angular_momentum_table(report):
    totals = [angular_momentum_paper_total(l).L2_total for l in range(4)]
    iso = isotropic_ground_dispersions(1.0).total
    ok = totals == [0.25, 2.25, 6.25, 12.25] and iso == 0.75
    report(10, "angular momentum", ok, f"<L^2>/hbar^2 = {totals}, isotropic sum {iso}")
    assert ok


def test_11_hlike_ground(report):
    gaps, analytic_ok = [], True
    for Z in range(1, 21):
        gs = minimize_ground_energy(AtomSpec(Z=Z))
        gaps.append(gs.relative_gap)
        analytic_ok &= math.isclose(gs.r_min, 1 / Z, rel_tol=1e-15) and math.isclose(gs.E_min, -0.5 * Z * Z, rel_tol=1e-15)
    cgs = minimize_ground_energy(AtomSpec(constants=cgs_constants()))
    ev_err = abs(cgs.E_min_eV / -RYDBERG_EV - 1)
    ok = analytic_ok and max(gaps) < 1e-10 and cgs.relative_gap < 1e-10 and ev_err < 1e-3
    report(11, "H-like ground state", ok, f"max minimizer gap {max(gaps):.1e}, CGS E_min {cgs.E_min_eV:.6f} eV")
    assert ok


REDUCED = {
    "vacuum-sample": "[vacuum-sample]\ncount = 500\nsampling_law = stratified\n",
    "oscillator-run": "[oscillator-run]\ntau_omega0 = 1e-3\nrealizations = 16\ndispersion_modes = 500\n",
    "commutator-sum": "[commutator-sum]\ncount = 2000\n",
    "nelson-run": "[nelson-run]\nn_walkers = 20000\nsteps = 500\nn_grid = 1601\ndrift = grid\n",
    "hlike-ground": "[hlike-ground]\nz_min = 1\nz_max = 10\n",
}


@pytest.mark.parametrize("experiment", list(REDUCED))
def test_12_determinism(tmp_path, report, experiment):
    outs = []
    for w in (1, 8):
        text = f"[run]\nexperiment = {experiment}\nseed = 12\nworkers = {w}\n" + REDUCED[experiment]
        _, _, out = run(tmp_path, text, f"w{w}")
        outs.append(out)
    names = sorted(p.name for p in outs[0].iterdir())
    same = names == sorted(p.name for p in outs[1].iterdir())
    differing = []
    for name in names:
        a, b = ((o / name).read_bytes() for o in outs)
        if name == "summary.json":
            ja, jb = json.loads(a), json.loads(b)
            ja.pop("wall_time_s"), jb.pop("wall_time_s")
            equal = ja == jb
        else:
            equal = a == b
        if not equal:
            differing.append(name)
    ok = same and not differing
    report(12, f"determinism ({experiment})", ok, f"{len(names)} files compared, differing: {differing or 'none'}")
    assert ok
