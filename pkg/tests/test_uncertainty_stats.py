import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sedelectron import oscillator as osc
from sedelectron.errors import DomainError
from sedelectron.uncertainty_stats import (
    angular_momentum_paper_total,
    angular_momentum_table_csv,
    isotropic_ground_dispersions,
    mean_fluct_decompose,
    minimal_radial_momentum_dispersion,
    uncertainty_product_check,
)
from sedelectron.vacuum_field import build_mode_set


def test_constant_samples():
    rep = mean_fluct_decompose([1, 1, 1])
    assert (rep.mean**2, rep.fluctuation, rep.mean_square) == (1.0, 0.0, 1.0)
    assert rep.count == 3


def test_symmetric_pair():
    rep = mean_fluct_decompose([-1.0, 1.0])
    assert (rep.mean, rep.fluctuation, rep.mean_square) == (0.0, 1.0, 1.0)


def test_normal_draws_mean_square():
    x = np.random.default_rng(12).normal(2.0, 3.0, 1_000_000)
    rep = mean_fluct_decompose(x, units="m")
    assert rep.mean_square == pytest.approx(13.0, rel=0.01)
    assert rep.units == "m"


def test_empty_samples_rejected():
    with pytest.raises(DomainError):
        mean_fluct_decompose([])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=200))
def test_identity_holds_for_any_samples(xs):
    rep = mean_fluct_decompose(xs)
    assert rep.fluctuation >= 0
    assert rep.mean_square == pytest.approx(rep.mean**2 + rep.fluctuation, rel=1e-12, abs=1e-300)
    direct = math.fsum(x * x for x in xs) / len(xs)
    assert rep.mean_square == pytest.approx(direct, rel=1e-9, abs=1e-9)


def test_oscillator_trajectory_decomposition():
    p = osc.OscillatorParams.natural(1e-3)
    ms = build_mode_set(osc.resonance_sampling(p, 2000, seed=21))
    t = osc.sample_times(p, 4000, spacing=1.0 / (4 * p.damping_rate))
    x = osc.steady_state_solution(ms, p, t).positions[:, 0]
    rep = mean_fluct_decompose(x)
    assert rep.mean_square == pytest.approx(np.mean(x**2), rel=1e-12)
    # zero-mean drive: the mean is small next to the spread
    assert abs(rep.mean) < 0.1 * math.sqrt(rep.fluctuation)


def test_harmonic_ground_pair_is_minimal():
    for hbar, m, w in [(1.0, 1.0, 1.0), (0.5, 2.0, 3.0)]:
        chk = uncertainty_product_check(hbar / (2 * m * w), m * hbar * w / 2, hbar)
        assert chk.product == pytest.approx(hbar**2 / 4, rel=1e-15)
        assert chk.minimal and not chk.violation
        assert chk.ratio == pytest.approx(1.0)


def test_below_bound_flags_violation():
    chk = uncertainty_product_check(1.0, 1.0 / 8, 1.0)
    assert chk.violation and not chk.minimal
    assert chk.bound == 0.25


def test_above_bound_is_neither():
    chk = uncertainty_product_check(1.0, 1.0, 1.0)
    assert not chk.violation and not chk.minimal


def test_negative_dispersion_rejected():
    with pytest.raises(DomainError):
        uncertainty_product_check(-1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        minimal_radial_momentum_dispersion(0.0, 1.0)


def test_minimal_radial_dispersion():
    assert minimal_radial_momentum_dispersion(1.0, 1.0) == 0.25
    assert minimal_radial_momentum_dispersion(4.0, 2.0) == 0.25


@pytest.mark.parametrize("l,total", [(0, 0.25), (1, 2.25), (2, 6.25)])
def test_paper_totals(l, total):
    rep = angular_momentum_paper_total(l)
    assert rep.L2_total == total
    assert rep.delta == 0.25
    assert rep.dLz2 == 0.25 and rep.dLz2_assumed


def test_l_two_against_standard():
    rep = angular_momentum_paper_total(2)
    assert rep.standard_L2 == 6.0
    assert rep.L2_total - rep.standard_L2 == 0.25


def test_components_and_inequality():
    hbar = 1.5
    rep = angular_momentum_paper_total(3, hbar)
    h2 = hbar * hbar
    assert (rep.Lz_bar2, rep.dLx2, rep.dLy2, rep.dLz2) == (9 * h2, 1.5 * h2, 1.5 * h2, 0.25 * h2)
    assert rep.L2_total == rep.Lz_bar2 + rep.dLx2 + rep.dLy2 + rep.dLz2
    assert rep.satisfies_component_inequality(hbar)
    # l = 0 makes the x, y spreads vanish, so the product inequality fails
    assert not angular_momentum_paper_total(0, hbar).satisfies_component_inequality(hbar)


def test_half_integer_square_for_l_up_to_100():
    for l in range(101):
        rep = angular_momentum_paper_total(l)
        assert rep.L2_total == (l + 0.5) ** 2
        assert rep.L2_total == rep.Lz_bar2 + rep.dLx2 + rep.dLy2 + rep.dLz2


@pytest.mark.parametrize("bad", [-1, 1.5, True])
def test_bad_l_rejected(bad):
    with pytest.raises(DomainError):
        angular_momentum_paper_total(bad)


def test_table_csv():
    text = angular_momentum_table_csv(3, ["seed = 0"])
    lines = text.splitlines()
    assert lines[0] == "# seed = 0"
    assert lines[1] == "l,paper_L2_over_hbar2,standard_L2_over_hbar2,delta"
    assert lines[2:] == ["0,0.25,0,0.25", "1,2.25,2,0.25", "2,6.25,6,0.25", "3,12.25,12,0.25"]


def test_isotropic_ground_dispersions():
    d = isotropic_ground_dispersions(1.0)
    assert (d.dLx2, d.dLy2, d.dLz2, d.total) == (0.25, 0.25, 0.25, 0.75)
    assert d.dLx2 * d.dLy2 == 0.25 * d.dLz2
    assert isotropic_ground_dispersions(2.0).total == 3.0
