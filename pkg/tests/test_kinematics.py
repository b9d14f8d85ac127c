import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from propertime import kinematics as K
from propertime import states

finite = st.floats(-20.0, 20.0, allow_nan=False)


def test_origin_maps_to_hyperbolic_origin():
    p = K.convert(K.MomentumPoint("cartesian", (0.0, 0.0, 0.0)), "hyperbolic")
    assert [float(c) for c in p.coords] == [0.0, 0.0, 0.0]


def test_pz_equal_mass_is_quarter_pi():
    om, nu, _ = K.convert(K.MomentumPoint("cartesian", (0.0, 0.0, 2.0)), "hyperbolic", m=2.0).coords
    assert float(om) == 0.0 and float(nu) == pytest.approx(np.pi / 4, abs=1e-15)


def test_hyperbolic_roundtrip_fixed_point():
    p = K.MomentumPoint("hyperbolic", (0.8, 0.6, 1.0))
    back = K.convert(K.convert(p, "cartesian"), "hyperbolic")
    assert np.allclose([float(c) for c in back.coords], [0.8, 0.6, 1.0], rtol=1e-12, atol=0)


@given(finite, finite, finite, st.floats(0.1, 10.0))
def test_roundtrip_property(px, py, pz, m):
    p = np.array([px, py, pz])
    for chart in ("spherical", "hyperbolic"):
        back = np.array(K.to_cartesian(K.convert(K.MomentumPoint("cartesian", tuple(p)), chart, m), m))
        assert np.all(np.abs(back - p) <= 1e-12 * (np.linalg.norm(p) + m))


@pytest.mark.parametrize("chart,coords", [("hyperbolic", (0.1, np.pi / 2, 0.0)),
                                          ("hyperbolic", (-0.1, 0.0, 0.0)),
                                          ("spherical", (1.0, 4.0, 0.0)),
                                          ("spherical", (1.0, 1.0, 2 * np.pi))])
def test_out_of_range_rejected(chart, coords):
    with pytest.raises(ValueError):
        K.MomentumPoint(chart, coords)


def test_energy_examples():
    assert float(K.energy(K.MomentumPoint("cartesian", (0.0, 0.0, 0.0)), 1.5)) == 1.5
    assert float(K.energy(K.MomentumPoint("cartesian", (0.0, 0.0, 1.0)))) == pytest.approx(np.sqrt(2), rel=1e-15)
    assert float(K.energy(K.MomentumPoint("hyperbolic", (0.0, np.pi / 4, 0.0)))) == pytest.approx(np.sqrt(2), rel=1e-15)
    assert float(K.energy(K.MomentumPoint("hyperbolic", (1.0, 0.0, 0.0)))) == pytest.approx(np.cosh(1.0), rel=1e-15)


@given(st.floats(0.0, 5.0), st.floats(-1.55, 1.55), st.floats(0.0, 6.28), st.floats(0.2, 5.0))
def test_energy_closed_form_property(om, nu, ph, m):
    closed = float(K.energy(K.MomentumPoint("hyperbolic", (om, nu, ph)), m))
    px, py, pz = K.hyperbolic_to_cartesian(om, nu, ph, m)
    assert closed == pytest.approx(np.sqrt(px * px + py * py + pz * pz + m * m), rel=1e-12)
    assert closed >= m


def test_spherical_weight():
    r, th, m = 1.3, 0.7, 1.0
    w = float(K.measure_weight(K.MomentumPoint("spherical", (r, th, 0.2)), m))
    assert w == pytest.approx(m * r * r * np.sin(th) / np.hypot(r, m), rel=1e-15)


def test_hyperbolic_nu_marginal_is_sec_cubed():
    nus = np.linspace(-1.4, 1.4, 9)
    w = K.measure_weight(K.MomentumPoint("hyperbolic", (np.full(9, 0.3), nus, np.zeros(9))))
    ratio = w * np.cos(nus) ** 3
    assert np.allclose(ratio, ratio[0], rtol=1e-14)


def _fd_jacobian(q, m, h=1e-3):
    jac = np.empty((3, 3))
    for k in range(3):
        def f(s):
            e = np.array(q, dtype=float)
            e[k] += s
            return np.array(K.hyperbolic_to_cartesian(*e, m))
        jac[:, k] = (f(-2 * h) - 8 * f(-h) + 8 * f(h) - f(2 * h)) / (12 * h)
    return jac


@given(st.floats(0.05, 3.0), st.floats(-1.3, 1.3), st.floats(0.0, 6.2), st.floats(0.5, 2.0))
def test_hyperbolic_jacobian_vs_finite_differences(om, nu, ph, m):
    e = m * np.cosh(om) / np.cos(nu)
    oracle = m / e * abs(np.linalg.det(_fd_jacobian((om, nu, ph), m)))
    assert float(K.measure_weight(K.MomentumPoint("hyperbolic", (om, nu, ph)), m)) == pytest.approx(oracle, rel=1e-8)


@pytest.mark.parametrize("sizes,bounds", [((0, 4, 4), None), ((4, 1, 4), None), ((4, 4), None),
                                          ((4, 4, 4), {"r_max": -1.0})])
def test_build_grid_rejects(sizes, bounds):
    with pytest.raises(ValueError):
        K.build_grid("spherical", sizes, bounds)


def test_grid_weights_positive_and_immutable():
    g = K.build_grid("hyperbolic", (8, 16, 4), {"omega_max": 4.0})
    assert np.all(g.weights > 0)
    with pytest.raises(Exception):
        g.m = 2.0
    assert K.grid_from_spec(g.metadata()).same_as(g)


def test_gaussian_norm_spherical_grid():
    st_ = states.gaussian_packet((0.2, -0.1, 0.3), 0.6)
    g = K.build_grid("spherical", (64, 16, 32), {"r_max": 12.0})
    assert K.inner_product(st_, st_, g).real == pytest.approx(1.0, abs=1e-8)


def test_norm_chart_independence():
    st_ = states.gaussian_packet((0.2, 0.0, 0.3), 0.6)
    sph = K.build_grid("spherical", (96, 48, 32), {"r_max": 10.0})
    hyp = K.build_grid("hyperbolic", (96, 160, 32), {"omega_max": 5.0})
    assert abs(K.norm(st_, sph) - K.norm(st_, hyp)) < 1e-6


def test_inner_product_sign_orthogonal_and_hermitian(rng):
    g = K.build_grid("spherical", (48, 16, 16), {"r_max": 8.0})
    a = states.gaussian_packet((0.1, 0.2, 0.3), 0.5, "+")
    b = states.gaussian_packet((0.1, 0.2, 0.3), 0.5, "-")
    assert K.inner_product(a, b, g) == 0
    c = states.gaussian_packet(rng.uniform(-1, 1, 3), 0.7, "+").scaled(1 + 2j)
    ab = K.inner_product(a, c, g)
    assert ab == np.conj(K.inner_product(c, a, g))


def test_boost_identity_and_mean_momentum():
    a = states.gaussian_packet((0.0, 0.0, 0.0), 0.01)
    assert K.boost_z(a, 0.0) is a
    chi = 0.4
    b = K.boost_z(a, chi)
    g = K.build_grid("cartesian", (48, 48, 48), {"p_max": 0.08})
    # shift the cartesian window onto the boosted packet; finite width adds 3 w^2 / 2 to <E>
    px, py, pz = g.cartesian
    pz_shift = pz + np.sinh(chi)
    vals = b.evaluate(px, py, pz_shift)[0]
    w = g.axis_weights
    wt = np.einsum("i,j,k->ijk", *w) / np.sqrt(px**2 + py**2 + pz_shift**2 + 1)
    nsq = np.sum(wt * np.abs(vals) ** 2)
    mean = np.sum(wt * pz_shift * np.abs(vals) ** 2) / nsq
    assert nsq == pytest.approx(1.0, abs=1e-6)
    assert mean == pytest.approx(np.sinh(chi), abs=1e-4)


def test_boost_preserves_inner_products(rng):
    g = K.build_grid("spherical", (96, 48, 32), {"r_max": 12.0})
    a = states.gaussian_packet(rng.uniform(-0.5, 0.5, 3), 0.6)
    b = states.gaussian_packet(rng.uniform(-0.5, 0.5, 3), 0.55)
    before = K.inner_product(a, b, g)
    after = K.inner_product(K.boost_z(a, 0.35), K.boost_z(b, 0.35), g)
    assert abs(after - before) < 1e-6
