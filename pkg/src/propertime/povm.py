"""Time and position POVM densities.

Time
    With ``u = ln(r / (E + m))`` (``u < 0``, ``du = m dr / (r E)``) the
    pairing of a state with a time eigenfunction becomes a half-line Fourier
    integral,

    .. math:: \\langle\\psi^{t,l,m_z}_{\\tau;\\xi}|\\phi\\rangle
              = \\sqrt{m/2\\pi}\\int_{-\\infty}^0 du\\, e^{i\\xi m t u} h_{lm}(u),
              \\qquad h_{lm} = r^{3/2} (r/m)^{-im\\tau} \\phi_{lm}(r),

    so ``int p(t) dt = sum_lm int |h_lm|^2 du`` exactly.

Position
    ``p(z) = (m/2) sum_{m_z} int 2 Lambda dLambda |a(z, Lambda, m_z)|^2`` with
    ``a`` computed by an azimuthal projection, a Mehler--Fock style transverse
    sum and a longitudinal Fourier sum in ``nu``.

All delta-normalized kernels appear only in smeared form.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special

from . import kernels
from .kinematics import build_grid, gauss_legendre, log_radial_variable, radius_from_log_variable
from .specfun import conical_table, sinc, spherical_harmonic, transverse_prefactor
from .states import Mixture, PhysState, SampledState, sign_value

log = logging.getLogger(__name__)

DEFAULT_L_MAX = 12
DEFAULT_LAMBDA_MAX = 8.0
DEFAULT_N_LAMBDA = 64
DEFAULT_MZ_WINDOW = (-4, 4)
MASS_DEFICIT_WARNING = 1e-2
POSITIVITY_FLOOR = -1e-12


@dataclass(frozen=True)
class PovmElementSpec:
    """A time (``t, l, m_z``) or position (``z, Lambda, m_z``) eigenfunction with its evaluator."""

    kind: str
    numbers: dict
    sign: str
    tau: float
    m: float
    evaluator: Callable = field(repr=False)

    def __call__(self, px, py, pz):
        return self.evaluator(px, py, pz)

    def as_state(self):
        comps = {"plus": self.evaluator, "minus": None} if self.sign == "+" else \
            {"plus": None, "minus": self.evaluator}
        return PhysState(**comps, m=self.m, label=f"{self.kind}-element{self.numbers}")


@dataclass(frozen=True)
class DensityProfile:
    """Sampled density on the t or z axis (units 1/m) with truncation metadata."""

    axis: str
    points: np.ndarray
    density: np.ndarray
    weights: np.ndarray
    tau: float
    truncation: dict
    m: float = 1.0
    warnings: tuple = ()
    clipped: int = 0

    @property
    def total_mass(self):
        return float(np.sum(self.weights * self.density))

    def header(self):
        return {
            "axis": self.axis,
            "units": "1/m",
            "mass": self.m,
            "tau": self.tau,
            "truncation": self.truncation,
            "total_mass": self.total_mass,
        }

    def mean(self):
        return float(np.sum(self.weights * self.points * self.density) / self.total_mass)

    def variance(self):
        mu = self.mean()
        return float(np.sum(self.weights * (self.points - mu) ** 2 * self.density) / self.total_mass)


def trapezoid_weights(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0):
        raise ValueError("axis samples must be 1-D and strictly increasing")
    w = np.zeros_like(x)
    d = np.diff(x)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


def _finalize(axis, pts, dens, tau, trunc, m, warnings):
    clipped = int(np.sum(dens < 0))
    if np.any(dens < POSITIVITY_FLOOR):
        raise ArithmeticError(f"density below the noise floor: min {dens.min():.3e}")
    if clipped:
        log.info("clipped %d slightly negative density samples", clipped)
    dens = np.maximum(dens, 0.0)
    prof = DensityProfile(axis, pts, dens, trapezoid_weights(pts), float(tau), trunc, m,
                          tuple(warnings), clipped)
    deficit = 1.0 - prof.total_mass
    if deficit > MASS_DEFICIT_WARNING:
        prof = DensityProfile(axis, pts, dens, prof.weights, float(tau), trunc, m,
                              prof.warnings + (f"truncation mass deficit {deficit:.3e}",), clipped)
    return prof


def _mixture_density(fn, mixture, *args, **kw):
    parts = [fn(s, *args, **kw) for s in mixture.states]
    dens = sum(w * p.density for w, p in zip(mixture.weights, parts))
    warns = sum((p.warnings for p in parts), ())
    p0 = parts[0]
    return _finalize(p0.axis, p0.points, dens, p0.tau, p0.truncation, p0.m, warns)


# -- time ---------------------------------------------------------------------------

def radial_support(state, floor=1e-6, r_lo=1e-8, r_hi=1e3, n=4000):
    """Radial window where ``r^{3/2} |psi|`` (max over probe directions) exceeds ``floor * max``.

    ``r^{3/2} psi`` is the integrand of the time pairing in ``u``, so this is
    the window that carries the time-density mass.
    """
    r = np.geomspace(r_lo, r_hi, n) * state.m
    ct = np.linspace(-1.0, 1.0, 9)
    ph = np.linspace(0.0, 2 * np.pi, 8, endpoint=False)
    st, cp, sp = np.sqrt(1 - ct**2), np.cos(ph), np.sin(ph)
    dirs = [(a * c, a * s_, b) for a, b in zip(st, ct) for c, s_ in zip(cp, sp)]
    env = np.zeros(n)
    for d in dirs:
        env = np.maximum(env, np.max(np.abs(state.evaluate(r * d[0], r * d[1], r * d[2])), axis=0))
    env *= r**1.5
    live = np.nonzero(env > floor * env.max())[0]
    if live.size == 0:
        raise ValueError("state vanishes on the probe set")
    return float(r[max(live[0] - 1, 0)]), float(r[min(live[-1] + 1, n - 1)])


def default_time_grid(state=None, t_max=100.0, n_theta=32, n_phi=32, r_min=None, r_max=None,
                      n_r=None):
    """Log-radial spherical grid covering the radial support of ``state``.

    The radial node count grows with ``m t_max`` times the ``u`` extent so the
    phase ``exp(i m t u)`` stays resolved over the requested time window.
    """
    m = 1.0 if state is None else state.m
    if state is not None and (r_min is None or r_max is None):
        lo, hi = radial_support(state)
        r_min = lo / m if r_min is None else r_min
        r_max = hi / m if r_max is None else r_max
    r_min = 1e-4 if r_min is None else r_min
    r_max = 40.0 if r_max is None else r_max
    if n_r is None:
        extent = log_radial_variable(r_max * m, m) - log_radial_variable(r_min * m, m)
        n_r = int(128 + 2.0 * m * t_max * extent)  # GL mid-range gaps are ~pi/2 the mean
    return build_grid("spherical", (n_r, n_theta, n_phi), {"r_min": r_min, "r_max": r_max},
                      m=m, radial_map="log")


def _angular_projections(state, grid, l_max, sign_idx):
    """Return (r nodes, radial weights, list of (l, m_z), phi_lm[r] array) for one sign."""
    r, theta, phi = grid.axis_nodes
    wr, wth, wph = grid.axis_weights
    sym = None if isinstance(state, SampledState) else state.symmetry
    f = state.components()[sign_idx] if not isinstance(state, SampledState) else None
    if sym == "spherical":
        vals = f(np.zeros_like(r), np.zeros_like(r), r)
        return r, wr, [(0, 0)], (np.sqrt(4 * np.pi) * vals)[None, :], (0, 0)
    if sym == "axial":
        th, rr = np.meshgrid(theta, r, indexing="xy")
        vals = f(rr * np.sin(th), np.zeros_like(rr), rr * np.cos(th))  # phi = 0 slice, (n_r, n_theta)
        lm = [(l, 0) for l in range(l_max + 1)]
        ylm = np.array([np.conj(spherical_harmonic(l, 0, theta, 0.0)) for l, _ in lm])  # (n_lm, n_th)
        proj = 2 * np.pi * (vals * wth) @ ylm.T
        return r, wr, lm, proj.T, (0, 0)
    vals = state.values(grid)[sign_idx]  # (n_r, n_th, n_ph)
    lm = [(l, mz) for l in range(l_max + 1) for mz in range(-l, l + 1)]
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    ang_w = np.outer(wth, wph)
    ylm = np.array([np.conj(spherical_harmonic(l, mz, th, ph)) * ang_w for l, mz in lm])
    proj = np.einsum("kab,rab->kr", ylm, vals)
    return r, wr, lm, proj, (-l_max, l_max)


def time_density(state, tau, t, grid=None, l_max=DEFAULT_L_MAX):
    """``p(t) = sum_{l <= l_max, |m_z| <= l} |<psi^{t,l,m_z}_{tau;xi}|phi>|^2`` on the samples ``t``.

    ``grid`` must be spherical; the default uses log-radial nodes, which
    resolve the ``(r/(E+m))^{-+imt}`` phase uniformly.  Spherically symmetric
    states only evaluate ``l = 0`` and axially symmetric ones only ``m_z = 0``.
    """
    if isinstance(state, Mixture):
        return _mixture_density(time_density, state, tau, t, grid, l_max)
    if l_max < 0:
        raise ValueError("l_max must be >= 0")
    t = np.asarray(t, dtype=float)
    m = state.m
    if grid is None:
        grid = default_time_grid(state, t_max=float(np.max(np.abs(t))))
    if grid.chart != "spherical":
        raise ValueError("time density needs a spherical grid")
    dens = np.zeros(t.shape)
    warnings = []
    window = (0, 0)
    for s in state.signs_present():
        xi = sign_value("+" if s == 0 else "-")
        r, wr, lm, proj, window = _angular_projections(state, grid, l_max, s)
        e = np.hypot(r, m)
        u = log_radial_variable(r, m)
        wu = wr * m / (r * e)  # du = m dr / (r E)
        h = r**1.5 * np.exp(-1j * m * tau * np.log(r / m)) * proj  # (n_lm, n_r)
        amp = np.sqrt(m / (2 * np.pi)) * kernels.fourier_sum(xi * m * t, u, h * wu)
        dens += np.sum(np.abs(amp) ** 2, axis=1)
        # phase resolution: largest node gap where the integrand lives
        live = np.max(np.abs(h), axis=0) > 1e-8 * np.max(np.abs(h))
        if np.count_nonzero(live) > 1:
            order = np.sort(u[live])
            gap = np.max(np.diff(order))
            if gap * m * np.max(np.abs(t)) > 1.0:
                warnings.append(f"phase under-resolved: max |t| gap product {gap * m * np.max(np.abs(t)):.2f} > 1")
    trunc = {"l_max": int(l_max), "m_z_window": list(window), "grid": grid.metadata()}
    return _finalize("t", t, dens, tau, trunc, m, warnings)


# -- position -------------------------------------------------------------------------

def nu_nodes_needed(z_max, m=1.0):
    """Gauss--Legendre nodes in ``nu`` that resolve ``exp(i m z nu)`` up to ``|z| = z_max``."""
    return int(np.ceil(m * z_max * np.pi / 4 + 16))


def default_position_grid(m=1.0, n_omega=96, n_nu=192, n_phi=32, omega_max=10.0, z_max=None):
    """Hyperbolic grid for position densities; ``z_max`` raises ``n_nu`` when the axis is long."""
    if z_max is not None:
        n_nu = max(n_nu, 64 + int(np.ceil(m * z_max)))
    return build_grid("hyperbolic", (n_omega, n_nu, n_phi), {"omega_max": omega_max}, m=m)


def _azimuthal_projections(state, grid, window, sign_idx):
    """``f_{m_z}(omega, nu) = int dphi e^{-i m_z phi} psi`` for m_z in window."""
    omega, nu, phi = grid.axis_nodes
    sym = None if isinstance(state, SampledState) else state.symmetry
    if sym in ("axial", "spherical"):
        f = state.components()[sign_idx]
        om, nn = np.meshgrid(omega, nu, indexing="ij")
        m = state.m
        px = m * np.sinh(om) / np.cos(nn)
        vals = f(px, np.zeros_like(px), m * np.tan(nn))
        return [0], (2 * np.pi * vals)[None]
    vals = state.values(grid)[sign_idx]
    wph = grid.axis_weights[2]
    mzs = list(range(window[0], window[1] + 1))
    basis = np.exp(-1j * np.outer(mzs, phi)) * wph
    return mzs, np.einsum("kc,abc->kab", basis, vals)


def position_amplitudes(state, tau, z, grid=None, lambda_max=DEFAULT_LAMBDA_MAX,
                        n_lambda=DEFAULT_N_LAMBDA, m_z_window=DEFAULT_MZ_WINDOW, sign_idx=0):
    """``a(z, Lambda, m_z)`` for one sign: returns (m_z list, Lambda nodes, Lambda weights, a[k, z, L])."""
    m = state.m
    z_max = float(np.max(np.abs(z), initial=0.0))
    grid = default_position_grid(m, z_max=z_max) if grid is None else grid
    if grid.chart != "hyperbolic":
        raise ValueError("position density needs a hyperbolic grid")
    xi = sign_value("+" if sign_idx == 0 else "-")
    omega, nu, _ = grid.axis_nodes
    wom, wnu, _ = grid.axis_weights
    lam, wl = gauss_legendre(n_lambda, 0.0, lambda_max)
    wlam = wl * 2.0 * lam  # dlambda = 2 Lambda dLambda
    mzs, proj = _azimuthal_projections(state, grid, m_z_window, sign_idx)
    c = np.cos(nu)
    # conj of the longitudinal factor without the z phase, times the nu measure
    long_w = wnu * c**-3 * c**1.5 * np.exp(1j * m * tau * np.log(c)) / np.sqrt(np.pi)
    amps = []
    for k, mz in enumerate(mzs):
        mu = abs(mz)
        trans = conical_table(mu, lam, np.cosh(omega))
        trans *= (transverse_prefactor(mu, lam) / (2.0 * m**1.5 * np.pi))[:, None]
        cl = (trans * (wom * m**3 * np.sinh(omega))) @ proj[k]  # (n_lambda, n_nu)
        amps.append(kernels.fourier_sum(m * xi * np.asarray(z, dtype=float), nu, cl * long_w))
    return mzs, lam, wlam, np.array(amps)


def position_density(state, tau, z, grid=None, lambda_max=DEFAULT_LAMBDA_MAX,
                     n_lambda=DEFAULT_N_LAMBDA, m_z_window=DEFAULT_MZ_WINDOW):
    """``p(z; tau) = (m/2) sum_{m_z} int_0^{Lambda_max} 2 Lambda dLambda |a|^2`` on samples ``z``."""
    if isinstance(state, Mixture):
        return _mixture_density(position_density, state, tau, z, grid, lambda_max,
                                n_lambda, m_z_window)
    if not lambda_max > 0 or n_lambda < 2:
        raise ValueError("need lambda_max > 0 and n_lambda >= 2")
    if m_z_window[0] > m_z_window[1]:
        raise ValueError("empty m_z window")
    z = np.asarray(z, dtype=float)
    m = state.m
    z_max = float(np.max(np.abs(z), initial=0.0))
    grid = default_position_grid(m, z_max=z_max) if grid is None else grid
    warnings = []
    if grid.chart == "hyperbolic" and grid.shape[1] < nu_nodes_needed(z_max, m):
        warnings.append(f"phase under-resolved: {grid.shape[1]} nu nodes for |z| <= {z_max:g} "
                        f"(need {nu_nodes_needed(z_max, m)})")
    dens = np.zeros(z.shape)
    window = [0, 0]
    for s in state.signs_present():
        mzs, _, wlam, a = position_amplitudes(state, tau, z, grid, lambda_max, n_lambda,
                                              m_z_window, s)
        window = [min(mzs), max(mzs)]
        dens += 0.5 * m * np.einsum("l,kzl->z", wlam, np.abs(a) ** 2)
    trunc = {"Lambda_max": float(lambda_max), "n_lambda": int(n_lambda),
             "m_z_window": window, "grid": grid.metadata()}
    return _finalize("z", z, dens, tau, trunc, m, warnings)


def interval_probability(profile, a, b):
    """``int_a^b p`` using the profile's samples (linear interpolation at the ends), clipped to [0, 1]."""
    x = profile.points
    if a > b:
        raise ValueError("need a <= b")
    if a < x[0] or b > x[-1]:
        raise ValueError(f"interval [{a}, {b}] outside sampled range [{x[0]}, {x[-1]}]")
    if a == b:
        return 0.0
    inner = (x > a) & (x < b)
    xs = np.concatenate([[a], x[inner], [b]])
    ps = np.concatenate([[np.interp(a, x, profile.density)], profile.density[inner],
                         [np.interp(b, x, profile.density)]])
    return float(np.clip(np.sum(trapezoid_weights(xs) * ps), 0.0, 1.0))


# -- overlap kernels ------------------------------------------------------------------

def position_overlap(z1, z2, Lambda=1.0, m_z=0, tau=0.0, sign="+", m=1.0, n=None):
    """Longitudinal pairing of two position elements with equal ``(Lambda, m_z)``.

    Integrates ``sec^3 nu conj(L_{z1}) L_{z2}`` over ``nu`` by Gauss--Legendre;
    the transverse labels only fix the common delta normalization.
    """
    from .operators import longitudinal_factor  # local: operators imports this module

    n = int(48 + 2 * m * abs(z1 - z2)) if n is None else n
    nu, w = gauss_legendre(n, -np.pi / 2, np.pi / 2)
    la = longitudinal_factor(z1, sign, tau, m, nu)
    lb = longitudinal_factor(z2, sign, tau, m, nu)
    return complex(np.sum(w * np.cos(nu) ** -3 * np.conj(la) * lb))


@dataclass(frozen=True)
class GaussianWindow:
    """Normalized smearing window ``(pi s^2)^{-1/4} exp(-(t - c)^2 / (2 s^2))``."""

    center: float
    width: float

    def __post_init__(self):
        if not (np.isfinite(self.center) and self.width > 0 and np.isfinite(self.width)):
            raise ValueError("window needs a finite center and a positive finite width")

    def __call__(self, t):
        s = self.width
        return (np.pi * s * s) ** -0.25 * np.exp(-((np.asarray(t) - self.center) ** 2) / (2 * s * s))


@dataclass(frozen=True)
class SmearedOverlap:
    analytic: complex
    direct: complex

    @property
    def value(self):
        return self.analytic

    @property
    def discrepancy(self):
        return abs(self.analytic - self.direct)


def _smeared_analytic(wa, wb, xi):
    """``(1/2pi)[pi delta(dt) - i xi PV 1/dt]`` paired with two Gaussian windows."""
    sa, sb = wa.width, wb.width
    s2 = sa * sa + sb * sb
    norm = (np.pi * sa * sa) ** -0.25 * (np.pi * sb * sb) ** -0.25 * np.sqrt(2 * np.pi * sa * sa * sb * sb / s2)
    mu = wa.center - wb.center
    # c(D) = int w_a(t' + D) w_b(t') dt' = norm exp(-(D - mu)^2 / (2 s2))
    delta_part = 0.5 * norm * np.exp(-mu * mu / (2 * s2))
    pv = norm * 2 * np.sqrt(np.pi) * special.dawsn(mu / np.sqrt(2 * s2))
    return complex(delta_part, -xi * pv / (2 * np.pi))


def _smeared_direct(wa, wb, xi, tau, m, n_t=None, n_u=None):
    """Smear the radial eigenfunctions in t numerically, then pair them under ``m r^2/E dr``."""
    from .operators import time_radial

    s_min = min(wa.width, wb.width)
    u_cut = 9.0 / (m * s_min)
    span = max(abs(wa.center - wb.center), 1.0)
    n_u = int(96 + 2 * m * u_cut * (span + 12 * max(wa.width, wb.width))) if n_u is None else n_u
    u, wu = gauss_legendre(n_u, -u_cut, 0.0)
    r = radius_from_log_variable(u, m)
    e = np.hypot(r, m)
    w_r = wu * r * e / m * m * r * r / e  # dr = rE/m du, then the measure m r^2/E
    sign = "+" if xi > 0 else "-"

    def smeared(win):
        n = int(64 + 2 * m * u_cut * 12 * win.width) if n_t is None else n_t
        t, wt = gauss_legendre(n, win.center - 8.0 * win.width, win.center + 8.0 * win.width)
        wt = wt * win(t)
        out = np.zeros(u.shape, dtype=complex)
        for tk, wk in zip(t, wt):
            out += wk * time_radial(tk, sign, tau, m, r)
        return out

    return complex(np.sum(w_r * np.conj(smeared(wa)) * smeared(wb)))


def time_overlap_smeared(window_a, window_b, sign="+", tau=0.0, m=1.0):
    """Doubly smeared time kernel ``int int w_a(t) w_b(t') <psi^t|psi^t'> dt dt'`` by two routes."""
    for w in (window_a, window_b):
        if not isinstance(w, GaussianWindow):
            raise ValueError("windows must be GaussianWindow instances (normalizable, smooth)")
    xi = sign_value(sign)
    return SmearedOverlap(_smeared_analytic(window_a, window_b, xi),
                          _smeared_direct(window_a, window_b, xi, tau, m))


def completeness_residual(kind, state, axis, **truncation):
    """``|1 - total mass|`` of the time (``kind="time"``) or position density on ``axis``."""
    if kind == "time":
        prof = time_density(state, truncation.pop("tau", 0.0), axis, **truncation)
    elif kind == "position":
        prof = position_density(state, truncation.pop("tau", 0.0), axis, **truncation)
    else:
        raise ValueError("kind must be 'time' or 'position'")
    return abs(1.0 - prof.total_mass)
