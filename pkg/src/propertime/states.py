"""Physical single-particle states.

A :class:`PhysState` holds one evaluator per energy sign.  Evaluators take
Cartesian momentum arrays ``(px, py, pz)`` and return complex amplitudes, so
any chart grid (and any finite-difference stencil) can sample them.  States
read from files are :class:`SampledState` objects, which only know their
values on the grid they were written on.

Localized states are built from a longitudinal profile ``g(nu)`` and a
transverse spectrum ``alpha(Lambda)``::

    psi(omega, nu, phi) = C A(omega) pi^{-1/2} cos(nu)^{3/2} exp(i m tau ln sec nu) g(nu)

where ``A(omega) = int dlambda alpha T_Lambda(omega)`` superposes the m_z = 0
transverse modes of the position eigenfunctions (``dlambda = 2 Lambda dLambda``).
This fixes the otherwise free omega-dependent factor of the momentum-space
form by convention.  For a position amplitude ``Omega(z)``, the profile is
``g(nu) = int dz Omega(z) exp(-i m xi z nu)``.
"""
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import chebyshev
from scipy import integrate

from . import kernels
from .kinematics import cartesian_to_hyperbolic, check_mass, gauss_legendre, inner_product
from .specfun import conical_table, transverse_prefactor


def sign_index(sign):
    if sign in ("+", 1, +1.0):
        return 0
    if sign in ("-", -1, -1.0):
        return 1
    raise ValueError(f"energy sign must be '+' or '-', got {sign!r}")


def sign_value(sign):
    return 1 - 2 * sign_index(sign)


@dataclass(frozen=True)
class PhysState:
    """Two-component (energy sign +/-) momentum-space amplitude.

    ``plus``/``minus`` are evaluators ``f(px, py, pz) -> complex array`` or
    ``None`` for an identically zero component.  ``symmetry`` is a promise
    used by density fast paths: ``"spherical"`` (rotation invariant) or
    ``"axial"`` (invariant about the z axis).
    """

    plus: Optional[Callable] = None
    minus: Optional[Callable] = None
    m: float = 1.0
    normalized: bool = False
    symmetry: Optional[str] = None
    label: str = ""

    def components(self):
        return (self.plus, self.minus)

    def signs_present(self):
        return [i for i, f in enumerate(self.components()) if f is not None]

    def require_evaluator(self, what="evaluation"):
        return None

    def evaluate(self, px, py, pz):
        px, py, pz = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (px, py, pz)))
        out = np.zeros((2,) + px.shape, dtype=complex)
        for i, f in enumerate(self.components()):
            if f is not None:
                out[i] = f(px, py, pz)
        return out

    def values(self, grid):
        return self.evaluate(*grid.cartesian)

    def scaled(self, factor, normalized=False):
        def scale(f):
            return None if f is None else (lambda px, py, pz: factor * f(px, py, pz))

        return replace(self, plus=scale(self.plus), minus=scale(self.minus), normalized=normalized)


@dataclass(frozen=True)
class SampledState(PhysState):
    """A state known only through its values on one grid (e.g. read from a file)."""

    samples: np.ndarray = field(default=None, repr=False)
    grid_spec: dict = field(default=None)

    def require_evaluator(self, what="evaluation"):
        raise ValueError(f"{what} needs an evaluator; sampled state {self.label!r} only has grid values")

    def evaluate(self, px, py, pz):
        self.require_evaluator("off-grid evaluation")

    def values(self, grid):
        if grid.spec != self.grid_spec:
            raise ValueError(
                f"chart mismatch: state sampled on {self.grid_spec} but grid is {grid.spec}"
            )
        return self.samples

    def scaled(self, factor, normalized=False):
        return replace(self, samples=self.samples * factor, normalized=normalized)


@dataclass(frozen=True)
class Mixture:
    """Finite convex combination of pure states: ``rho = sum_k w_k |psi_k><psi_k|``."""

    weights: tuple
    states: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(w) != len(self.states) or np.any(w < 0) or not np.isclose(w.sum(), 1.0):
            raise ValueError("mixture weights must be non-negative and sum to 1")

    @property
    def m(self):
        return self.states[0].m


def _placed(sign, f, **kw):
    comps = {"plus": None, "minus": None}
    comps["plus" if sign_index(sign) == 0 else "minus"] = f
    return PhysState(**comps, **kw)


# -- Gaussian test packets --------------------------------------------------------

def _gaussian_norm_sq(c, w, m):
    """int m/E exp(-|p - c|^2 / (2 w^2)) d^3p, reduced to one radial integral."""

    def integrand(r):
        e = np.hypot(r, m)
        if c == 0.0:
            return 4.0 * np.pi * m * r * r / e * np.exp(-r * r / (2 * w * w))
        # (e^{-(r-c)^2/2w^2} - e^{-(r+c)^2/2w^2}) w^2 / c without cancellation at small c
        x = 2.0 * r * c / (w * w)
        ratio = -np.expm1(-x) / x if x > 0 else 1.0
        g = np.exp(-((r - c) ** 2) / (2 * w * w)) * 2.0 * r * ratio
        return 2.0 * np.pi * m * r / e * g

    lo, hi = max(0.0, c - 14 * w), c + 14 * w
    val, _ = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-13, limit=400,
                            points=[c] if lo < c < hi else None)
    return val


def gaussian_packet(center, width, sign="+", m=1.0):
    """Normalized single-sign Gaussian ``exp(-|pi - center|^2 / (4 width^2))``.

    The normalization uses a one-dimensional reduction of the invariant-measure
    integral (the measure and the Gaussian depend only on ``|pi|`` and
    ``|pi - center|``), so it is independent of any grid.
    """
    m = check_mass(m)
    if not width > 0:
        raise ValueError(f"width must be positive, got {width!r}")
    c = np.asarray(center, dtype=float)
    if c.shape != (3,):
        raise ValueError("center must be a 3-vector")
    n = 1.0 / np.sqrt(_gaussian_norm_sq(float(np.linalg.norm(c)), width, m))
    cx, cy, cz = c
    k = 1.0 / (4.0 * width * width)

    def f(px, py, pz):
        d2 = (px - cx) ** 2 + (py - cy) ** 2 + (pz - cz) ** 2
        return n * np.exp(-k * d2) + 0j

    if not c.any():
        symmetry = "spherical"
    elif cx == 0.0 and cy == 0.0:
        symmetry = "axial"
    else:
        symmetry = None
    return _placed(sign, f, m=m, normalized=True, symmetry=symmetry,
                   label=f"gaussian(center={c.tolist()}, width={width:g}, sign={sign})")


def shell_packet(radius, width, sign="+", m=1.0):
    """Normalized spherically symmetric shell ``exp(-(|pi| - radius)^2 / (4 width^2))``."""
    m = check_mass(m)
    if not width > 0 or radius < 0:
        raise ValueError("need width > 0 and radius >= 0")
    k = 1.0 / (4.0 * width * width)

    def radial_sq(r):
        return 4.0 * np.pi * m * r * r / np.hypot(r, m) * np.exp(-2 * k * (r - radius) ** 2)

    lo, hi = max(0.0, radius - 14 * width), radius + 14 * width
    nsq, _ = integrate.quad(radial_sq, lo, hi, epsabs=0.0, epsrel=1e-13, limit=400)
    n = 1.0 / np.sqrt(nsq)

    def f(px, py, pz):
        r = np.sqrt(px * px + py * py + pz * pz)
        return n * np.exp(-k * (r - radius) ** 2) + 0j

    return _placed(sign, f, m=m, normalized=True, symmetry="spherical",
                   label=f"shell(radius={radius:g}, width={width:g}, sign={sign})")


def normalize(state, grid):
    """Rescale to unit norm on ``grid``; zero-norm input is rejected."""
    nsq = inner_product(state, state, grid).real
    if not nsq > 0:
        raise ValueError("cannot normalize a zero-norm state")
    return state.scaled(1.0 / np.sqrt(nsq), normalized=True)


# -- localized states ---------------------------------------------------------------

def _trapezoid_weights(x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0):
        raise ValueError("sample grid must be 1-D, strictly increasing, with >= 2 points")
    w = np.zeros_like(x)
    d = np.diff(x)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


@dataclass(frozen=True)
class TransverseProfile:
    """Transverse spectrum ``alpha(Lambda)`` sampled on a Lambda grid (m_z = 0 modes)."""

    Lambda: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.Lambda, dtype=float)
        a = np.asarray(self.alpha, dtype=complex)
        if lam.shape != a.shape or np.any(lam < 0):
            raise ValueError("alpha samples must match a non-negative Lambda grid")
        object.__setattr__(self, "Lambda", lam)
        object.__setattr__(self, "alpha", a)
        if not self.norm_sq() > 0:
            raise ValueError("transverse profile has zero norm")

    @property
    def weights(self):
        return _trapezoid_weights(self.Lambda) * 2.0 * self.Lambda  # dlambda = 2 Lambda dLambda

    def norm_sq(self):
        return float(np.sum(self.weights * np.abs(self.alpha) ** 2))

    @classmethod
    def gaussian(cls, center=2.0, width=0.4, lam_max=None, n=161):
        lam_max = center + 8 * width if lam_max is None else lam_max
        lam = np.linspace(0.0, lam_max, n)
        prof = cls(lam, np.exp(-((lam - center) ** 2) / (4 * width * width)))
        return cls(lam, prof.alpha / np.sqrt(prof.norm_sq()))
    # alpha(0) != 0 leaves a slow algebraic omega tail in A(omega); the default
    # center keeps alpha(0) ~ e^-25 so hyperbolic grids with omega_max ~ 8 suffice


def transverse_mode(mu, lambdas, omega, m=1.0):
    """Real transverse factor of the position eigenfunctions, without ``exp(i m_z phi)``:

    ``sqrt(sinh(pi Lambda)) |Gamma(1/2 + mu + i Lambda)| / (2 m^{3/2} pi) P^{-mu}_{-1/2+i Lambda}(cosh omega)``.
    Shape ``(len(lambdas), len(omega))``.
    """
    pref = transverse_prefactor(mu, lambdas) / (2.0 * m**1.5 * np.pi)
    return pref[:, None] * conical_table(mu, lambdas, np.cosh(omega))


class _TransverseEnvelope:
    """Chebyshev interpolant of ``A(omega)`` on ``[0, omega_cut]``, zero beyond."""

    def __init__(self, profile, m, tol=1e-10):
        self.profile = profile
        self.m = m
        coarse = np.linspace(0.0, 40.0, 161)
        a = self.direct(coarse)
        env = np.sqrt(np.sinh(coarse)) * np.abs(a)
        big = np.nonzero(env > tol * env.max())[0]
        self.omega_cut = float(coarse[min(big[-1] + 4, coarse.size - 1)])
        deg = int(48 + 3 * profile.Lambda.max() * self.omega_cut / np.pi)
        self.cheb = chebyshev.Chebyshev.interpolate(self.direct, deg, domain=[0.0, self.omega_cut])

    def direct(self, omega):
        omega = np.atleast_1d(omega)
        p = self.profile
        modes = transverse_mode(0, p.Lambda, omega, self.m)
        return (p.weights * p.alpha) @ modes

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        out = np.zeros(omega.shape, dtype=complex)
        inside = omega <= self.omega_cut
        out[inside] = self.cheb(omega[inside])
        return out

    def norm_sq(self, n=400):
        om, w = gauss_legendre(n, 0.0, self.omega_cut)
        return float(2.0 * np.pi * self.m**3 * np.sum(w * np.sinh(om) * np.abs(self(om)) ** 2))


@dataclass(frozen=True)
class LocalizedState(PhysState):
    """Single-sign state with separated longitudinal and transverse structure."""

    profile: Optional[Callable] = field(default=None, repr=False)
    transverse: Optional[TransverseProfile] = field(default=None, repr=False)
    tau: float = 0.0
    sign: str = "+"


def _longitudinal_norm_sq(profile, n=2048):
    nu, w = gauss_legendre(n, -np.pi / 2, np.pi / 2)
    return float(np.sum(w * np.abs(profile(nu)) ** 2) / np.pi)


def localized_state(profile, transverse=None, sign="+", tau=0.0, m=1.0, label="localized"):
    """Normalized state with longitudinal profile ``g(nu)`` (see module docstring)."""
    m = check_mass(m)
    transverse = TransverseProfile.gaussian() if transverse is None else transverse
    envelope = _TransverseEnvelope(transverse, m)
    nsq = _longitudinal_norm_sq(profile) * envelope.norm_sq()
    if not nsq > 0:
        raise ValueError("profile has zero norm")
    c = 1.0 / np.sqrt(nsq * np.pi)

    def f(px, py, pz):
        omega, nu, _ = cartesian_to_hyperbolic(px, py, pz, m)
        cnu = np.cos(nu)
        return c * envelope(omega) * cnu**1.5 * np.exp(-1j * m * tau * np.log(cnu)) * profile(nu)

    comps = {"plus": f, "minus": None} if sign_index(sign) == 0 else {"plus": None, "minus": f}
    return LocalizedState(**comps, m=m, normalized=True, symmetry="axial", label=label,
                          profile=profile, transverse=transverse, tau=tau,
                          sign="+" if sign_index(sign) == 0 else "-")


@dataclass(frozen=True)
class PositionAmplitude:
    """Longitudinal amplitude ``Omega(z)`` and transverse spectrum ``alpha(Lambda)``."""

    z: np.ndarray
    omega: np.ndarray
    transverse: TransverseProfile = field(default_factory=TransverseProfile.gaussian)

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        om = np.asarray(self.omega, dtype=complex)
        if z.shape != om.shape:
            raise ValueError("Omega samples must match the z grid")
        _trapezoid_weights(z)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "omega", om)

    @property
    def weights(self):
        return _trapezoid_weights(self.z)

    def is_zero(self):
        return not np.any(self.omega)

    def fourier(self, k, m=1.0):
        """``F_Omega(k) = (m pi / sqrt(2 pi)) int dz Omega(z) exp(-i pi m k z)``."""
        k = np.atleast_1d(np.asarray(k, dtype=float))
        s = kernels.fourier_sum(-np.pi * m * k, self.z, (self.weights * self.omega)[None, :])[:, 0]
        return m * np.pi / np.sqrt(2 * np.pi) * s


def longitudinal_profile(pa, sign="+", m=1.0):
    """Chebyshev interpolant of ``g(nu) = int dz Omega(z) exp(-i m xi z nu)`` on ``[-pi/2, pi/2]``."""
    xi = sign_value(sign)
    zmax = float(np.max(np.abs(pa.z)))
    deg = int(64 + 1.3 * m * zmax * np.pi / 2)
    coeffs = (pa.weights * pa.omega)[None, :]

    def direct(nu):
        return kernels.fourier_sum(-m * xi * np.asarray(nu), pa.z, coeffs)[:, 0]

    cheb = chebyshev.Chebyshev.interpolate(direct, deg, domain=[-np.pi / 2, np.pi / 2])
    return cheb


def state_from_position_amplitude(pa, sign="+", tau=0.0, m=1.0):
    """Momentum-space state ``int dlambda alpha int dz Omega(z) |psi^{z, lambda, 0}_{tau; xi}>``, normalized.

    Band limitation to ``k = nu / pi`` in ``[-1/2, 1/2]`` is structural.
    """
    if pa.is_zero():
        raise ValueError("Omega is identically zero; the state cannot be normalized")
    profile = longitudinal_profile(pa, sign, m)
    return localized_state(profile, pa.transverse, sign, tau, m, label="from-position-amplitude")


def position_element_state(z0, transverse=None, sign="+", tau=0.0, m=1.0):
    """State ``int dlambda alpha |psi^{z0, lambda, 0}>``: a single position element, transversally smeared."""
    xi = sign_value(sign)

    def profile(nu):
        return np.exp(-1j * m * xi * z0 * np.asarray(nu))

    return localized_state(profile, transverse, sign, tau, m, label=f"position-element(z0={z0:g})")
