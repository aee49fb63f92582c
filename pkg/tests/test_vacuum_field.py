import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sedelectron.errors import ConfigurationError, DomainError
from sedelectron.vacuum_field import (
    ModeSamplingConfig,
    build_mode_set,
    electric_field_at,
    empty_mode_set,
    mode_set_from_csv,
    mode_set_to_csv,
    single_mode_set,
    vector_potential_at,
)


def uniform_cfg(count=200, lo=0.5, hi=2.0, seed=3, **kw):
    return ModeSamplingConfig(count=count, omega_min=lo, omega_max=hi, seed=seed, **kw)


def test_empty_mode_set_gives_zero_fields():
    ms = build_mode_set(uniform_cfg(count=0))
    assert len(ms) == 0
    assert np.array_equal(electric_field_at(ms, [1.0, 2.0, 3.0], 0.7), np.zeros(3))
    assert np.array_equal(vector_potential_at(ms, [0, 0, 0], np.arange(4.0)), np.zeros((4, 3)))


def test_frequencies_in_band_and_on_light_cone():
    ms = build_mode_set(uniform_cfg(count=1000, lo=0.9, hi=1.1, seed=7))
    assert len(ms) == 1000
    assert np.all((ms.frequencies >= 0.9) & (ms.frequencies <= 1.1))
    qn = np.linalg.norm(ms.wavevectors, axis=1)
    assert np.allclose(ms.light_speed * qn, ms.frequencies, rtol=1e-14, atol=0)


def test_directions_are_isotropic():
    ms = build_mode_set(uniform_cfg(count=100_000, seed=11))
    khat = ms.wavevectors / np.linalg.norm(ms.wavevectors, axis=1, keepdims=True)
    assert np.linalg.norm(khat.mean(axis=0)) < 0.02


def test_polarizations_transverse_and_unit():
    ms = build_mode_set(uniform_cfg(count=5000, seed=1))
    qn = np.linalg.norm(ms.wavevectors, axis=1)
    dots = np.abs(np.einsum("ij,ij->i", ms.wavevectors, ms.polarizations))
    assert np.all(dots <= 1e-12 * qn)
    assert np.allclose(np.linalg.norm(ms.polarizations, axis=1), 1.0, atol=1e-15)


def test_amplitude_modulus():
    ms = build_mode_set(uniform_cfg(count=500))
    assert np.allclose(np.abs(ms.amplitudes), 1 / math.sqrt(2), rtol=0, atol=1e-15)


@pytest.mark.parametrize("lo,hi", [(-1.0, 2.0), (0.0, 1.0), (2.0, 2.0), (3.0, 1.0), (1.0, math.inf)])
def test_invalid_cutoffs_rejected(lo, hi):
    with pytest.raises(ConfigurationError):
        build_mode_set(uniform_cfg(lo=lo, hi=hi))


def test_same_seed_same_set():
    a = build_mode_set(uniform_cfg(seed=5, count=300))
    b = build_mode_set(uniform_cfg(seed=5, count=300))
    assert mode_set_to_csv(a) == mode_set_to_csv(b)
    t = np.linspace(0, 3, 5)
    assert np.array_equal(electric_field_at(a, [0.1, 0.2, 0.3], t), electric_field_at(b, [0.1, 0.2, 0.3], t))


def test_single_mode_field_at_origin():
    ms = single_mode_set((0, 0, 1), (1, 0, 0), 2.0, phase=0.0)
    e = electric_field_at(ms, np.zeros(3), 0.0)
    assert np.allclose(e, [math.sqrt(2) * ms.field_scales[0], 0, 0], rtol=1e-15)


def test_field_scale_formula():
    ms = single_mode_set((1, 0, 0), (0, 1, 0), 3.0, hbar=2.0, volume=5.0)
    assert ms.field_scales[0] == pytest.approx(math.sqrt(2 * math.pi * 2.0 * 3.0 / 5.0), rel=1e-15)


def test_fields_transverse_per_mode():
    ms = build_mode_set(uniform_cfg(count=50, seed=2))
    r, t = np.array([0.3, -1.2, 0.8]), 1.7
    for i in range(len(ms)):
        one = single_mode_set(ms.wavevectors[i], ms.polarizations[i], ms.frequencies[i], np.angle(ms.amplitudes[i]))
        e = electric_field_at(one, r, t)
        khat = ms.wavevectors[i] / np.linalg.norm(ms.wavevectors[i])
        assert abs(e @ khat) < 1e-12 * max(1.0, np.linalg.norm(e))


def test_single_mode_phase_ensemble_mean_square():
    # Monte Carlo over phases: <E^2> = 2 |a|^2 fs^2 <cos^2> = fs^2
    rng = np.random.default_rng(0)
    base = single_mode_set((0, 0, 1), (1, 0, 0), 1.3)
    e2 = [
        np.sum(electric_field_at(base.with_amplitudes([np.exp(1j * ph) / math.sqrt(2)]), np.zeros(3), 0.0) ** 2)
        for ph in rng.uniform(0, 2 * np.pi, 10_000)
    ]
    assert np.mean(e2) == pytest.approx(base.field_scales[0] ** 2, rel=0.03)


def test_vector_potential_amplitude_ratio():
    w = 2.5
    ms = single_mode_set((0, 1, 0), (0, 0, 1), w, light_speed=3.0)
    t = np.linspace(0, 2 * np.pi / w, 2001)
    e = electric_field_at(ms, np.zeros(3), t)
    a = vector_potential_at(ms, np.zeros(3), t)
    ratio = np.max(np.linalg.norm(a, axis=1)) / np.max(np.linalg.norm(e, axis=1))
    assert ratio == pytest.approx(3.0 / w, rel=1e-5)


def test_electric_field_is_minus_time_derivative_of_potential():
    ms = build_mode_set(uniform_cfg(count=40, seed=9))
    r = np.array([0.2, 0.1, -0.4])
    t = np.linspace(0, 5, 7)
    errs = []
    for h in (1e-2, 5e-3):
        da = (vector_potential_at(ms, r, t + h) - vector_potential_at(ms, r, t - h)) / (2 * h)
        errs.append(np.max(np.abs(electric_field_at(ms, r, t) + da / ms.light_speed)))
    # centred difference: halving h quarters the error
    assert errs[1] < errs[0] / 3.5
    assert errs[1] < 1e-4 * np.max(np.abs(electric_field_at(ms, r, t)))


def test_union_is_linear():
    a = build_mode_set(uniform_cfg(count=30, seed=1))
    b = build_mode_set(uniform_cfg(count=20, seed=2))
    u = a.union(b)
    r, t = np.array([0.5, 0.0, 1.0]), np.array([0.0, 0.3, 2.0])
    np.testing.assert_allclose(
        electric_field_at(u, r, t), electric_field_at(a, r, t) + electric_field_at(b, r, t), rtol=1e-12, atol=1e-13
    )


def test_non_finite_inputs_rejected():
    ms = single_mode_set((0, 0, 1), (1, 0, 0), 1.0)
    with pytest.raises(DomainError):
        electric_field_at(ms, [np.nan, 0, 0], 0.0)
    with pytest.raises(DomainError):
        vector_potential_at(ms, [0, 0, 0], np.inf)


def test_csv_round_trip():
    ms = build_mode_set(uniform_cfg(count=25, seed=4))
    text = mode_set_to_csv(ms, ["seed = 4"])
    assert text.splitlines()[1] == "qx,qy,qz,omega,ex,ey,ez,re_a,im_a,field_scale"
    back = mode_set_from_csv(text)
    for name in ("wavevectors", "frequencies", "polarizations", "amplitudes", "field_scales"):
        assert np.array_equal(getattr(back, name), getattr(ms, name))
    np.testing.assert_allclose(back.weights, ms.weights, rtol=1e-12)


def test_stratified_weights_reproduce_mode_density_integral():
    # sum of weights approximates the number of modes in the band, V/(3 pi^2 c^3) (hi^3 - lo^3)
    cfg = ModeSamplingConfig(
        count=4000,
        omega_min=0.5,
        omega_max=2.0,
        sampling_law="stratified",
        seed=1,
        resonance_center=1.0,
        resonance_width=1e-3,
    )
    ms = build_mode_set(cfg)
    exact = (2.0**3 - 0.5**3) / (3 * np.pi**2)
    assert np.sum(ms.weights) == pytest.approx(exact, rel=0.01)


def test_empty_helper_matches():
    assert len(empty_mode_set()) == 0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**63 - 1), st.integers(1, 60))
def test_invariants_for_any_seed(seed, count):
    ms = build_mode_set(uniform_cfg(count=count, seed=seed, lo=0.1, hi=10.0))
    qn = np.linalg.norm(ms.wavevectors, axis=1)
    assert np.all((ms.frequencies >= 0.1) & (ms.frequencies <= 10.0))
    assert np.all(np.abs(np.einsum("ij,ij->i", ms.wavevectors, ms.polarizations)) <= 1e-12 * qn)
    assert np.allclose(np.abs(ms.amplitudes) ** 2, 0.5, atol=1e-15)
