from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from propertime import povm, states
from propertime.specfun import sinc

T = np.linspace(-150.0, 150.0, 3001)
Z = np.linspace(-40.0, 40.0, 801)


@pytest.fixture(scope="module")
def shell_time():
    s = states.shell_packet(1.0, 0.3)
    return s, povm.time_density(s, 0.0, T, l_max=0)


def test_position_overlap_examples():
    assert povm.position_overlap(0.0, 0.0) == pytest.approx(1.0, abs=1e-12)
    assert abs(povm.position_overlap(0.0, 2.0)) < 1e-12
    assert povm.position_overlap(0.0, 1.0).real == pytest.approx(2 / np.pi, abs=1e-10)


@given(st.floats(0.0, 10.0), st.floats(0.5, 2.0), st.floats(-3.0, 3.0))
def test_position_overlap_is_sinc(dz, m, tau):
    ov = povm.position_overlap(1.0, 1.0 + dz, tau=tau, m=m)
    oracle = integrate.quad(lambda n: np.cos(m * dz * n), -np.pi / 2, np.pi / 2)[0] / np.pi
    assert abs(ov - oracle) < 1e-8
    assert abs(ov - sinc(m * np.pi * dz / 2)) < 1e-8


def _pv_oracle(wa, wb):
    # c(D) = int w_a(t' + D) w_b(t') dt', then (1/2 pi) PV int c(D)/D dD by Cauchy-weight quadrature
    def c(d):
        return integrate.quad(lambda t: wa(t + d) * wb(t), -40, 40, epsabs=1e-13)[0]

    lim = 30.0
    return integrate.quad(c, -lim, lim, weight="cauchy", wvar=0.0, epsabs=1e-11)[0] / (2 * np.pi), c(0.0)


@pytest.mark.parametrize("a,b", [((0.0, 1.0), (0.0, 1.0)), ((0.0, 1.0), (1.5, 0.8))])
def test_time_kernel_analytic_vs_independent_oracle(a, b):
    wa, wb = povm.GaussianWindow(*a), povm.GaussianWindow(*b)
    pv, c0 = _pv_oracle(wa, wb)
    for sign, xi in (("+", 1), ("-", -1)):
        r = povm.time_overlap_smeared(wa, wb, sign, 0.3)
        assert r.value.real == pytest.approx(0.5 * c0, abs=1e-9)
        assert r.value.imag == pytest.approx(-xi * pv, abs=1e-8)
        assert r.discrepancy < 1e-4


def test_time_kernel_identical_windows_and_conjugation():
    w = povm.GaussianWindow(0.5, 1.2)
    plus = povm.time_overlap_smeared(w, w, "+")
    minus = povm.time_overlap_smeared(w, w, "-")
    assert plus.value.real == pytest.approx(0.5, abs=1e-12)
    assert minus.value == pytest.approx(np.conj(plus.value), abs=1e-14)


def test_time_kernel_pv_tail():
    w = povm.GaussianWindow(0.0, 0.5)
    vals = [abs(povm._smeared_analytic(w, povm.GaussianWindow(d, 0.5), 1)) * d for d in (20.0, 40.0, 80.0)]
    assert max(vals) / min(vals) - 1 < 0.05
    # the tail is (int w_a)(int w_b) / (2 pi dt), and int w = sqrt(2 sqrt(pi) s) for these windows
    assert vals[0] == pytest.approx(2 * np.sqrt(np.pi) * 0.5 / (2 * np.pi), rel=0.05)


def test_windows_validated():
    with pytest.raises(ValueError):
        povm.GaussianWindow(0.0, 0.0)
    with pytest.raises(ValueError):
        povm.time_overlap_smeared(lambda t: t, povm.GaussianWindow(0, 1))


def test_time_completeness_radial(shell_time):
    _, prof = shell_time
    assert prof.total_mass == pytest.approx(1.0, abs=1e-3)
    assert np.all(prof.density >= 0)


def test_spherical_state_higher_l_vanish(shell_time):
    s, prof0 = shell_time
    general = replace(s, symmetry=None)
    prof3 = povm.time_density(general, 0.0, T[::10], l_max=3)
    assert np.max(np.abs(prof3.density - prof0.density[::10])) < 1e-10 * prof0.density.max()


def test_sign_flip_reverses_time():
    t = np.linspace(-60, 60, 241)
    a = povm.time_density(states.shell_packet(1.5, 0.4, "+"), 0.7, t, l_max=0).density
    b = povm.time_density(states.shell_packet(1.5, 0.4, "-"), 0.7, t, l_max=0).density
    assert np.max(np.abs(a - b[::-1])) < 1e-12 * a.max()


def test_position_element_density_is_sinc_squared():
    z0 = 1.5
    prof = povm.position_density(states.position_element_state(z0), 0.0, Z)
    ref = sinc(np.pi * (Z - z0) / 2) ** 2
    scale = prof.density[np.argmin(np.abs(Z - z0))]
    assert np.max(np.abs(prof.density / scale - ref)) < 1e-3
    assert Z[np.argmax(prof.density)] == pytest.approx(z0, abs=0.1)


def test_axial_fast_path_matches_general_path():
    s = states.gaussian_packet((0.0, 0.0, 0.6), 0.5)
    z = np.linspace(-10, 10, 41)
    fast = povm.position_density(s, 0.0, z, m_z_window=(-2, 2))
    slow = povm.position_density(replace(s, symmetry=None), 0.0, z, m_z_window=(-2, 2))
    assert np.max(np.abs(fast.density - slow.density)) < 1e-10 * fast.density.max()
    assert slow.truncation["m_z_window"] == [-2, 2]


def test_interval_probability():
    s = states.gaussian_packet((0.0, 0.0, 0.0), 0.5)
    prof = povm.position_density(s, 0.0, Z)
    assert povm.interval_probability(prof, Z[0], Z[-1]) == pytest.approx(min(prof.total_mass, 1.0))
    assert povm.interval_probability(prof, 1.0, 1.0) == 0.0
    assert povm.interval_probability(prof, 0.0, Z[-1]) == pytest.approx(0.5, abs=0.01)
    with pytest.raises(ValueError):
        povm.interval_probability(prof, -100.0, 0.0)


def test_completeness_residual_decreases():
    s = states.gaussian_packet((0.2, 0.0, 0.5), 0.5)
    coarse = povm.completeness_residual("position", s, Z, lambda_max=2.0)
    fine = povm.completeness_residual("position", s, Z, lambda_max=8.0)
    assert coarse > fine
    assert fine < 1e-2
    with pytest.raises(ValueError):
        povm.completeness_residual("energy", s, Z)


def test_mixture_density_is_convex_sum():
    a = states.gaussian_packet((0.0, 0.0, 0.5), 0.5)
    b = states.gaussian_packet((0.0, 0.0, -0.5), 0.5, "-")
    z = np.linspace(-10, 10, 81)
    mix = povm.position_density(states.Mixture((0.3, 0.7), (a, b)), 0.0, z)
    pa = povm.position_density(a, 0.0, z).density
    pb = povm.position_density(b, 0.0, z).density
    assert np.allclose(mix.density, 0.3 * pa + 0.7 * pb, rtol=1e-13, atol=0)


def test_truncation_deficit_warns():
    s = states.gaussian_packet((0.0, 0.0, 0.0), 0.5)
    prof = povm.position_density(s, 0.0, np.linspace(-2, 2, 41))
    assert any("deficit" in w for w in prof.warnings)


def test_density_rejects_bad_truncation():
    s = states.gaussian_packet((0.0, 0.0, 0.0), 0.5)
    with pytest.raises(ValueError):
        povm.position_density(s, 0.0, Z, lambda_max=0.0)
    with pytest.raises(ValueError):
        povm.position_density(s, 0.0, Z, m_z_window=(2, -2))
    with pytest.raises(ValueError):
        povm.time_density(s, 0.0, T, l_max=-1)


def test_long_axis_is_not_aliased():
    s = states.localized_state(lambda n: np.cos(n) ** 2 * np.exp(0.8 * n) + 0j)
    z = np.linspace(-160.0, 240.0, 2001)
    prof = povm.position_density(s, 10.0, z)
    assert prof.total_mass <= 1.0 + 1e-6
    assert not prof.warnings
    coarse = povm.position_density(s, 10.0, z, grid=povm.default_position_grid(n_nu=96))
    assert any("under-resolved" in w for w in coarse.warnings)
