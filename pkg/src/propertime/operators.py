"""Acting rules of the four-position and momentum operators, deficiency
solutions, the single-particle extension spectrum, and eigenfunction factories.

Derivatives are taken by 4th-order central differences with one Richardson
step (``D = (16 D_{h/2} - D_h) / 15``).  Because states are evaluators in
Cartesian momentum, each stencil simply re-evaluates the state along the
relevant curve:

* ``pi . grad`` is the derivative along the dilation ``s -> psi(e^s pi)``,
  so it needs no chart boundary handling;
* ``d/dnu`` (fixed ``omega``, ``phi``) moves along the hyperbolic chart,
  with the step shrunk near ``nu = +-pi/2`` so the stencil stays inside.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .kinematics import (cartesian_to_hyperbolic, cartesian_to_spherical, check_mass,
                         gauss_legendre, hyperbolic_to_cartesian)
from .povm import PovmElementSpec
from .specfun import conical_table, spherical_harmonic, transverse_prefactor
from .states import PhysState, sign_index, sign_value

Q0_STEP = 1e-2
Q3_STEP = 2e-3
CONVERGENCE_RTOL = 1e-8


@dataclass(frozen=True)
class OperatorApplication:
    """Samples of ``Q psi`` on a grid plus the stencil bookkeeping.

    ``residual`` is the Richardson error estimate relative to ``max |values|``.
    """

    operator: str
    tau: float
    stencil: dict
    values: np.ndarray = field(repr=False)
    residual: float
    converged: bool


def _central4(f, h):
    return (f(-2 * h) - 8 * f(-h) + 8 * f(h) - f(2 * h)) / (12 * h)


def _richardson(f, h):
    coarse, fine = _central4(f, h), _central4(f, h / 2)
    return (16 * fine - coarse) / 15, np.abs(fine - coarse) / 15


def _relative(err, values):
    scale = np.max(np.abs(values)) if values.size else 0.0
    return float(np.max(err) / scale) if scale > 0 else float(np.max(err, initial=0.0))


def dilation_derivative(state, grid, h=Q0_STEP, richardson=True):
    """``(pi . grad) psi`` on ``grid`` for both sign components; returns (values, abs error)."""
    state.require_evaluator("a derivative stencil")
    px, py, pz = grid.cartesian

    def along(s):
        k = np.exp(s)
        return state.evaluate(k * px, k * py, k * pz)

    if richardson:
        return _richardson(along, h)
    return _central4(along, h), np.zeros(px.shape)


def nu_derivative(state, grid, h=Q3_STEP, richardson=True):
    """``d psi / d nu`` at fixed ``(omega, phi)``; returns (values, abs error, per-node step)."""
    state.require_evaluator("a derivative stencil")
    m = state.m
    omega, nu, phi = cartesian_to_hyperbolic(*grid.cartesian, m)
    gap = np.pi / 2 - np.abs(nu)
    step = np.minimum(h, gap / 32.0)  # stencil reaches 2 * step <= gap / 16 from the wall

    def along(s):
        return state.evaluate(*hyperbolic_to_cartesian(omega, nu + s * step / h, phi, m))

    # differentiate in s with unit spacing h, then rescale to d/dnu
    if richardson:
        d, err = _richardson(along, h)
    else:
        d, err = _central4(along, h), np.zeros(nu.shape)
    return d * (h / step), err * (h / step), step


def _sigma3(values):
    out = values.copy()
    out[1] *= -1
    return out


def apply_q0(state, tau, grid, h=Q0_STEP, richardson=True, rtol=CONVERGENCE_RTOL):
    """Samples of ``sigma3 (E/m) [(i/m)(pi . grad + 3/2) + tau] psi``."""
    m = state.m
    psi = state.values(grid)
    d, err = dilation_derivative(state, grid, h, richardson)
    e = grid.energy
    out = _sigma3((e / m) * ((1j / m) * (d + 1.5 * psi) + tau * psi))
    # scale by the size of the derivative term: the output itself can vanish (t = 0)
    residual = _relative((e / m**2) * err, (e / m**2) * (np.abs(d) + np.abs(psi)))
    return OperatorApplication("Q0", float(tau), {"kind": "dilation", "order": 4, "h": h,
                                                  "richardson": richardson},
                               out, residual, residual <= rtol)


def apply_q3(state, tau, grid, h=Q3_STEP, richardson=True, rtol=CONVERGENCE_RTOL):
    """Samples of ``[(i/m)(d/dnu + (3/2) tan nu) + tau tan nu] sigma3 psi``."""
    m = state.m
    psi = state.values(grid)
    d, err, step = nu_derivative(state, grid, h, richardson)
    _, nu, _ = cartesian_to_hyperbolic(*grid.cartesian, m)
    t = np.tan(nu)
    out = _sigma3((1j / m) * (d + 1.5 * t * psi) + tau * t * psi)
    residual = _relative(err / m, (np.abs(d) + np.abs(t * psi)) / m)
    return OperatorApplication("Q3", float(tau), {"kind": "nu", "order": 4, "h": h,
                                                  "min_step": float(np.min(step)),
                                                  "richardson": richardson},
                               out, residual, residual <= rtol)


def _momentum_factor(mu, px, py, pz, m):
    if mu == 0:
        return np.sqrt(px * px + py * py + pz * pz + m * m)
    return (px, py, pz)[mu - 1]


def apply_momentum(state, mu, grid):
    """``sigma3 Pi^mu psi`` on ``grid`` (multiplicative; ``Pi^0 = E``)."""
    if mu not in (0, 1, 2, 3):
        raise ValueError(f"momentum index must be 0..3, got {mu!r}")
    px, py, pz = grid.cartesian
    return _sigma3(_momentum_factor(mu, px, py, pz, state.m) * state.values(grid))


def momentum_state(state, mu):
    """``sigma3 Pi^mu psi`` as a new evaluator state (for composing with the Q stencils)."""
    if mu not in (0, 1, 2, 3):
        raise ValueError(f"momentum index must be 0..3, got {mu!r}")
    state.require_evaluator("momentum composition")
    m = state.m

    def wrap(f, sgn):
        if f is None:
            return None
        return lambda px, py, pz: sgn * _momentum_factor(mu, px, py, pz, m) * f(px, py, pz)

    return PhysState(plus=wrap(state.plus, 1.0), minus=wrap(state.minus, -1.0), m=m,
                     symmetry=state.symmetry if mu in (0, 3) else None,
                     label=f"Pi{mu}({state.label})")


def expectation(state, applied, grid):
    """``<psi | applied>`` where ``applied`` holds operator samples on ``grid``."""
    psi = state.values(grid)
    w = grid.weights
    return complex(sum(np.sum(w * np.conj(psi[s]) * applied[s]) for s in range(2)))


# -- deficiency solutions ---------------------------------------------------------

@dataclass(frozen=True)
class DeficiencySolution:
    """One deficiency function ``Q* f = eigenvalue f`` and its marginal-measure norm."""

    operator: str
    eigenvalue: complex
    sign: str
    radial: object = field(repr=False)   # marginal profile: r -> value (Q0) or nu -> value (Q3)
    state: PhysState = field(repr=False)
    norm_sq: float
    norm_target: float = 1.0


def _gauss_semi_infinite(f, n=200):
    """int_0^inf f(s) ds by Gauss-Legendre after s = x / (1 - x)."""
    x, w = gauss_legendre(n, 0.0, 1.0)
    s = x / (1.0 - x)
    return float(np.sum(w * f(s) / (1.0 - x) ** 2))


def deficiency_solutions(operator, tau=0.0, m=1.0):
    """Deficiency functions of ``Q0`` (two) or ``Q3`` (four) with quadrature norms.

    Q0: ``R^{xi i/m} = sqrt(2) exp(i m tau ln(r/m)) / (r^{1/2} (E + m))`` in the
    ``xi`` component (times ``Y^{0,0}`` as a 3D state); norm under
    ``m r^2 / E dr``.
    Q3: ``V^{+-i/m}_{(xi)} = sinh(pi)^{-1/2} (sec nu)^{i m tau - 3/2} exp(+-xi nu)``;
    norm under ``sec^3 nu dnu``.  As 3D states these carry no transverse
    factor and are evaluable pointwise only.
    """
    m = check_mass(m)
    out = []
    if operator in ("Q0", "q0"):
        y00 = 1.0 / np.sqrt(4.0 * np.pi)
        for sign in ("+", "-"):
            def radial(r, tau=tau):
                r = np.asarray(r, dtype=float)
                return np.sqrt(2.0) * np.exp(1j * m * tau * np.log(r / m)) / (np.sqrt(r) * (np.hypot(r, m) + m))

            def f(px, py, pz, radial=radial):
                return y00 * radial(np.sqrt(px * px + py * py + pz * pz))

            # r = m s, measure m r^2/E dr; integrand |R|^2 m r^2 / E
            nsq = _gauss_semi_infinite(lambda s: m * (m * s) ** 2 / np.hypot(m * s, m)
                                       * np.abs(radial(m * s)) ** 2 * m)
            comps = {"plus": f, "minus": None} if sign == "+" else {"plus": None, "minus": f}
            out.append(DeficiencySolution("Q0", sign_value(sign) * 1j / m, sign, radial,
                                          PhysState(**comps, m=m, symmetry="spherical",
                                                    label=f"R^({sign}i/m)"), nsq))
        return out
    if operator in ("Q3", "q3"):
        nu_nodes, nu_w = gauss_legendre(120, -np.pi / 2, np.pi / 2)
        for sign in ("+", "-"):
            xi = sign_value(sign)
            for lab, eig_sign in (("+", 1), ("-", -1)):
                def profile(nu, k=eig_sign * xi, tau=tau):
                    nu = np.asarray(nu, dtype=float)
                    c = np.cos(nu)
                    return c**1.5 * np.exp(-1j * m * tau * np.log(c)) * np.exp(k * nu) / np.sqrt(np.sinh(np.pi))

                def f(px, py, pz, profile=profile):
                    return profile(np.arctan(pz / m)) + 0j * px

                nsq = float(np.sum(nu_w * np.abs(profile(nu_nodes)) ** 2 / np.cos(nu_nodes) ** 3))
                comps = {"plus": f, "minus": None} if sign == "+" else {"plus": None, "minus": f}
                out.append(DeficiencySolution("Q3", eig_sign * 1j / m, sign, profile,
                                              PhysState(**comps, m=m, symmetry="axial",
                                                        label=f"V^({lab}i/m)_({sign})"), nsq))
        return out
    raise ValueError(f"operator must be 'Q0' or 'Q3', got {operator!r}")


# -- extension spectrum -----------------------------------------------------------

@dataclass(frozen=True)
class ExtensionSpectrum:
    """Eigenvalues ``z_phi^n`` (units 1/m) for ``n`` in a half-open window."""

    phi: float
    m: float
    n: np.ndarray
    z: np.ndarray

    def rows(self):
        return [(int(k), float(v)) for k, v in zip(self.n, self.z)]

    def to_csv(self, path=None):
        lines = ["n,z"] + [f"{k},{v:.17g}" for k, v in self.rows()]
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        return text


def extension_offset(phi):
    """``arctan[tan(phi/2) tanh(pi/2)]`` on the principal branch.

    ``(1 - cos phi)/sin phi = tan(phi/2)`` removes the 0/0 at ``phi = 0``
    (offset 0).  ``phi = pi`` is the limit from below, ``pi/2``.
    """
    phi = float(phi)
    if not -np.pi < phi <= np.pi:
        raise ValueError(f"extension parameter must lie in (-pi, pi], got {phi!r}")
    if phi == np.pi:
        return np.pi / 2
    return float(np.arctan(np.tan(phi / 2.0) * np.tanh(np.pi / 2.0)))


def extension_spectrum(phi, n_min, n_max, m=1.0):
    """Eigenvalue ladder ``z_phi^n = (2/(m pi)) [offset(phi) + n pi]`` for ``n_min <= n < n_max``."""
    m = check_mass(m)
    n_min, n_max = int(n_min), int(n_max)
    if n_max <= n_min:
        raise ValueError("need n_max > n_min")
    n = np.arange(n_min, n_max)
    z = 2.0 * extension_offset(phi) / (m * np.pi) + 2.0 * n / m
    return ExtensionSpectrum(float(phi), m, n, z)


def seam_limit(n, m=1.0, delta=1e-6):
    """Linear extrapolation of ``z_phi^{n+1}`` to ``phi -> -pi`` from ``delta`` and ``2 delta``."""
    f1 = extension_spectrum(-np.pi + delta, n + 1, n + 2, m).z[0]
    f2 = extension_spectrum(-np.pi + 2 * delta, n + 1, n + 2, m).z[0]
    return 2 * f1 - f2


# -- eigenfunction factories -------------------------------------------------------

def time_radial(t, sign, tau, m, r):
    """``sqrt(m/2pi) r^{-3/2} (r/m)^{i m tau} (r/(E+m))^{-+ i m t}`` for the given sign."""
    xi = sign_value(sign)
    r = np.asarray(r, dtype=float)
    u = np.log(r / (np.hypot(r, m) + m))
    return (np.sqrt(m / (2 * np.pi)) * r**-1.5
            * np.exp(1j * m * tau * np.log(r / m) - 1j * xi * m * t * u))


def q0_eigenfunction(t, l, m_z, sign="+", tau=0.0, m=1.0):
    """Time eigenfunction ``Y^{l, m_z} R^t`` for one energy sign (generalized function)."""
    if l < 0 or abs(m_z) > l:
        raise ValueError(f"need l >= 0 and |m_z| <= l, got l={l}, m_z={m_z}")
    m = check_mass(m)

    def f(px, py, pz):
        r, theta, phi = cartesian_to_spherical(px, py, pz)
        return spherical_harmonic(l, m_z, theta, phi) * time_radial(t, sign, tau, m, r)

    return PovmElementSpec("time", {"t": float(t), "l": int(l), "m_z": int(m_z)},
                           "+" if sign_index(sign) == 0 else "-", float(tau), m, f)


def longitudinal_factor(z, sign, tau, m, nu):
    """``pi^{-1/2} (sec nu)^{-3/2} exp(i m tau ln sec nu) exp(-i m xi z nu)``."""
    xi = sign_value(sign)
    c = np.cos(nu)
    return c**1.5 * np.exp(-1j * m * tau * np.log(c) - 1j * m * xi * z * nu) / np.sqrt(np.pi)


def q3_eigenfunction(z, Lambda, m_z, sign="+", tau=0.0, m=1.0):
    """Position eigenfunction at continuous ``z`` with transverse labels ``(Lambda, m_z)``."""
    if Lambda < 0:
        raise ValueError("Lambda must be >= 0")
    m = check_mass(m)
    mu = abs(int(m_z))
    pref = float(transverse_prefactor(mu, Lambda)) / (2.0 * m**1.5 * np.pi)

    def f(px, py, pz):
        omega, nu, phi = cartesian_to_hyperbolic(px, py, pz, m)
        shape = np.shape(omega)
        cone = conical_table(mu, [Lambda], np.cosh(np.ravel(omega)))[0].reshape(shape)
        return pref * cone * np.exp(1j * m_z * phi) * longitudinal_factor(z, sign, tau, m, nu)

    return PovmElementSpec("position", {"z": float(z), "Lambda": float(Lambda), "m_z": int(m_z)},
                           "+" if sign_index(sign) == 0 else "-", float(tau), m, f)


def extension_time_eigenfunction(t, phi, tau=0.0, m=1.0, l=0, m_z=0):
    """Two-component eigenfunction ``Y R^t_phi`` of a Q0 extension (mixes both signs)."""
    m = check_mass(m)

    def comp(sign, phase):
        def f(px, py, pz):
            r, theta, az = cartesian_to_spherical(px, py, pz)
            return phase * spherical_harmonic(l, m_z, theta, az) * time_radial(t, sign, tau, m, r)
        return f

    return PhysState(plus=comp("+", 1.0), minus=comp("-", np.exp(1j * phi)), m=m,
                     symmetry="spherical" if l == 0 else None, label=f"R^t_phi(t={t:g}, phi={phi:g})")


def extension_position_eigenfunction(phi, n, sign="+", tau=0.0, m=1.0):
    """``V^{z_phi^n}_{(xi)}`` as a 3D state with trivial transverse factor."""
    z = float(extension_spectrum(phi, n, n + 1, m).z[0])

    def f(px, py, pz):
        return longitudinal_factor(z, sign, tau, m, np.arctan(pz / m)) + 0j * px

    comps = {"plus": f, "minus": None} if sign_index(sign) == 0 else {"plus": None, "minus": f}
    return PhysState(**comps, m=m, symmetry="axial", label=f"V^(z={z:g})"), z


def eigen_residual(applied, eigenvalue, state, grid, mask=None):
    """``||Q psi - q psi|| / ||psi||`` on ``grid``, optionally restricted to ``mask``."""
    psi = state.values(grid)
    w = grid.weights if mask is None else grid.weights * mask
    diff = applied.values - eigenvalue * psi
    num = sum(np.sum(w * np.abs(diff[s]) ** 2) for s in range(2))
    den = sum(np.sum(w * np.abs(psi[s]) ** 2) for s in range(2))
    return float(np.sqrt(num / den))
