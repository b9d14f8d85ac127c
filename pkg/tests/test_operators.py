import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from propertime import kinematics as K
from propertime import operators as O
from propertime import states
from propertime.analysis import commutator_check, form_asymmetry


@pytest.fixture(scope="module")
def sph():
    return K.build_grid("spherical", (48, 8, 8), {"r_max": 30.0})


@pytest.fixture(scope="module")
def hyp():
    return K.build_grid("hyperbolic", (8, 64, 4), {"omega_max": 3.0})


def test_deficiency_counts_and_norms():
    q0 = O.deficiency_solutions("Q0", 0.3)
    q3 = O.deficiency_solutions("Q3", 0.3)
    assert len(q0) == 2 and len(q3) == 4
    for d in q0 + q3:
        assert d.norm_sq == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        O.deficiency_solutions("Q1")


def test_deficiency_norm_oracles():
    # 2m int_m^inf dE/(E+m)^2 = 1 and (1/sinh pi) int e^{2 nu} dnu = 1
    a = 2 * integrate.quad(lambda e: 1 / (e + 1) ** 2, 1, np.inf)[0]
    b = integrate.quad(lambda n: np.exp(2 * n), -np.pi / 2, np.pi / 2)[0] / np.sinh(np.pi)
    assert a == pytest.approx(1.0, abs=1e-12) and b == pytest.approx(1.0, abs=1e-12)


def test_deficiency_eigen_residuals(sph, hyp):
    for d in O.deficiency_solutions("Q0", 0.7):
        app = O.apply_q0(d.state, 0.7, sph)
        assert O.eigen_residual(app, d.eigenvalue, d.state, sph) < 1e-5
    for d in O.deficiency_solutions("Q3", 0.7):
        app = O.apply_q3(d.state, 0.7, hyp)
        assert O.eigen_residual(app, d.eigenvalue, d.state, hyp) < 1e-5


def test_time_eigenfunction_at_zero(sph):
    s = O.extension_time_eigenfunction(0.0, 0.4, 0.0)
    assert O.eigen_residual(O.apply_q0(s, 0.0, sph), 0.0, s, sph) < 1e-5


def test_position_eigenfunction_half_pi(hyp):
    s, z = O.extension_position_eigenfunction(np.pi / 2, 0)
    assert z == pytest.approx(2 / np.pi * np.arctan(np.tanh(np.pi / 2)), rel=1e-15)
    assert O.eigen_residual(O.apply_q3(s, 0.0, hyp), z, s, hyp) < 1e-5


def test_residual_shrinks_under_refinement(sph):
    s = O.extension_time_eigenfunction(1.5, 0.4, 0.7)
    coarse = O.eigen_residual(O.apply_q0(s, 0.7, sph, h=4e-2, richardson=False), 1.5, s, sph)
    fine = O.eigen_residual(O.apply_q0(s, 0.7, sph, h=1e-2, richardson=False), 1.5, s, sph)
    assert fine < coarse / 50


def test_q3_tau_shift(hyp):
    st_ = states.gaussian_packet((0.1, 0.0, 0.3), 0.5, "-")
    a = O.apply_q3(st_, 1.7, hyp).values - O.apply_q3(st_, 0.0, hyp).values
    _, nu, _ = K.cartesian_to_hyperbolic(*hyp.cartesian)
    expected = -1.7 * np.tan(nu) * st_.values(hyp)[1]
    assert np.max(np.abs(a[1] - expected)) < 1e-12 * np.max(np.abs(expected))


def test_momentum_multiplicative_sign(sph):
    for sign, factor in (("+", 1.0), ("-", -1.0)):
        s = states.gaussian_packet((0.0, 0.0, 0.4), 0.5, sign)
        idx = states.sign_index(sign)
        out = O.apply_momentum(s, 0, sph)[idx]
        assert np.allclose(out, factor * sph.energy * s.values(sph)[idx], rtol=1e-15, atol=0)
    with pytest.raises(ValueError):
        O.apply_momentum(s, 4, sph)


def test_mean_pi3_of_packet():
    g = K.build_grid("spherical", (96, 48, 16), {"r_max": 6.0})
    s = states.gaussian_packet((0.0, 0.0, 1.5), 0.15)
    assert O.expectation(s, O.apply_momentum(s, 3, g), g).real == pytest.approx(1.5, rel=0.01)


def test_spectrum_examples():
    z = O.extension_spectrum(np.pi, -3, 3).z
    assert np.allclose(z, 2 * np.arange(-3, 3) + 1, atol=1e-13)
    z0 = O.extension_spectrum(1e-12, -2, 3).z
    assert np.allclose(z0, 2 * np.arange(-2, 3), atol=1e-11)
    assert O.extension_spectrum(0.0, 0, 1).z[0] == 0.0
    assert O.extension_spectrum(np.pi / 2, 0, 1).z[0] == pytest.approx(0.4725, abs=2e-4)
    with pytest.raises(ValueError):
        O.extension_spectrum(-np.pi, 0, 2)
    with pytest.raises(ValueError):
        O.extension_spectrum(0.0, 2, 2)


@given(st.floats(-3.14159, np.pi), st.integers(-20, 20), st.floats(0.2, 5.0))
def test_spacing_property(phi, n0, m):
    z = O.extension_spectrum(phi, n0, n0 + 6, m).z
    assert np.allclose(np.diff(z), 2.0 / m, rtol=0, atol=1e-12 * (1 + abs(n0)) / m)


def test_seam_continuity():
    for n in range(-3, 4):
        assert abs(O.extension_spectrum(np.pi, n, n + 1).z[0] - O.seam_limit(n)) < 1e-9


def test_spectrum_csv_format():
    txt = O.extension_spectrum(np.pi, 0, 2).to_csv()
    assert txt == "n,z\n0,1\n1,3\n"


def test_eigenfunction_moduli_independent_of_t_and_tau(rng):
    p = rng.normal(size=(3, 20))
    a = O.q0_eigenfunction(0.0, 2, 1)(*p)
    b = O.q0_eigenfunction(3.3, 2, 1, tau=1.1)(*p)
    assert np.allclose(np.abs(a), np.abs(b), rtol=1e-13)
    c = O.q3_eigenfunction(0.0, 1.2, 1)(*p)
    d = O.q3_eigenfunction(2.0, 1.2, 1, tau=4.0)(*p)
    assert np.allclose(np.abs(c), np.abs(d), rtol=1e-13)
    with pytest.raises(ValueError):
        O.q0_eigenfunction(0.0, 1, 2)


def test_block_diagonal():
    g = K.build_grid("spherical", (32, 16, 8), {"r_max": 8.0})
    s = states.gaussian_packet((0.1, 0.0, 0.3), 0.5, "+")
    assert not np.any(O.apply_q0(s, 0.5, g).values[1])
    assert not np.any(O.apply_q3(s, 0.5, g).values[1])


def test_symmetric_quadratic_forms():
    a = states.gaussian_packet((0.3, 0.0, 0.4), 0.5)
    b = states.gaussian_packet((0.0, 0.2, -0.3), 0.6)
    assert form_asymmetry(a, b, "Q0", 1.0) < 1e-6
    assert form_asymmetry(a, b, "Q3", 1.0) < 1e-6


@pytest.mark.parametrize("sign", "+-")
def test_commutator_expectation(sign):
    s = states.gaussian_packet((0.3, 0.0, 0.4), 0.5, sign)
    lhs, rhs, rel = commutator_check(s, 1.0)
    assert rel < 0.02
    assert abs(lhs.real) < 0.02 * abs(rhs)
