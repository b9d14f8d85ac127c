"""Momentum-space charts, the invariant measure and quadrature grids.

Natural units throughout: the mass ``m`` is the only scale.  The invariant
measure is ``dmu = m d^3 pi / E``.  Per chart (coordinates, density of
``dmu`` with respect to the coordinate volume):

* cartesian ``(p1, p2, p3)``:           ``m / E``
* spherical ``(r, theta, phi)``:        ``m r^2 sin(theta) / E``
* hyperbolic ``(omega, nu, phi)``:      ``m^3 sinh(omega) sec(nu)^3``

The hyperbolic chart is ``p1 = m sinh(omega) sec(nu) cos(phi)``,
``p2 = m sinh(omega) sec(nu) sin(phi)``, ``p3 = m tan(nu)``, in which
``E = m sec(nu) cosh(omega)``.
"""
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy.special import roots_legendre

CHARTS = ("cartesian", "spherical", "hyperbolic")
TWO_PI = 2.0 * np.pi


def check_mass(m):
    if not np.isfinite(m) or m <= 0:
        raise ValueError(f"mass must be positive and finite, got {m!r}")
    return float(m)


@dataclass(frozen=True)
class MomentumPoint:
    """A momentum (or an array of momenta) in one chart."""

    chart: str
    coords: tuple

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise ValueError(f"unknown chart {self.chart!r}")
        c = tuple(np.asarray(v, dtype=float) for v in self.coords)
        if len(c) != 3:
            raise ValueError("a momentum point has three coordinates")
        object.__setattr__(self, "coords", c)
        _check_ranges(self.chart, *c)


def _check_ranges(chart, a, b, c):
    if chart == "spherical":
        if np.any(a < 0) or np.any((b < 0) | (b > np.pi)) or np.any((c < 0) | (c >= TWO_PI)):
            raise ValueError("spherical chart needs r >= 0, theta in [0, pi], phi in [0, 2pi)")
    elif chart == "hyperbolic":
        if np.any(a < 0) or np.any(np.abs(b) >= np.pi / 2) or np.any((c < 0) | (c >= TWO_PI)):
            raise ValueError("hyperbolic chart needs omega >= 0, |nu| < pi/2, phi in [0, 2pi)")


# -- raw chart maps (arrays in, arrays out, no range checks) -----------------

def spherical_to_cartesian(r, theta, phi):
    st = np.sin(theta)
    return r * st * np.cos(phi), r * st * np.sin(phi), r * np.cos(theta)


def cartesian_to_spherical(px, py, pz):
    rho = np.hypot(px, py)
    r = np.hypot(rho, pz)
    theta = np.arctan2(rho, pz)
    phi = np.mod(np.arctan2(py, px), TWO_PI)
    return r, theta, np.where(phi >= TWO_PI, 0.0, phi)


def hyperbolic_to_cartesian(omega, nu, phi, m=1.0):
    rho = m * np.sinh(omega) / np.cos(nu)
    return rho * np.cos(phi), rho * np.sin(phi), m * np.tan(nu)


def cartesian_to_hyperbolic(px, py, pz, m=1.0):
    nu = np.arctan(pz / m)
    rho = np.hypot(px, py)
    omega = np.arcsinh(rho * np.cos(nu) / m)
    phi = np.mod(np.arctan2(py, px), TWO_PI)
    return omega, nu, np.where(phi >= TWO_PI, 0.0, phi)


def to_cartesian(point, m=1.0):
    a, b, c = point.coords
    if point.chart == "cartesian":
        return a, b, c
    if point.chart == "spherical":
        return spherical_to_cartesian(a, b, c)
    return hyperbolic_to_cartesian(a, b, c, m)


def convert(point, target, m=1.0):
    """Express ``point`` in the ``target`` chart."""
    if target not in CHARTS:
        raise ValueError(f"unknown chart {target!r}")
    m = check_mass(m)
    xyz = to_cartesian(point, m)
    if target == "cartesian":
        return MomentumPoint("cartesian", xyz)
    if target == "spherical":
        return MomentumPoint("spherical", cartesian_to_spherical(*xyz))
    return MomentumPoint("hyperbolic", cartesian_to_hyperbolic(*xyz, m))


def energy(point, m=1.0):
    """``E = sqrt(|pi|^2 + m^2)``; closed form ``m sec(nu) cosh(omega)`` in the hyperbolic chart."""
    m = check_mass(m)
    a, b, _ = point.coords
    if point.chart == "hyperbolic":
        return m * np.cosh(a) / np.cos(b)
    if point.chart == "spherical":
        return np.hypot(a, m)
    px, py, pz = point.coords
    return np.sqrt(px * px + py * py + pz * pz + m * m)


def measure_weight(point, m=1.0):
    """Density of the invariant measure with respect to the chart's coordinate volume."""
    m = check_mass(m)
    a, b, _ = point.coords
    if point.chart == "cartesian":
        return m / energy(point, m)
    if point.chart == "spherical":
        return m * a * a * np.sin(b) / np.hypot(a, m)
    return m**3 * np.sinh(a) / np.cos(b) ** 3


# -- quadrature grids ---------------------------------------------------------

@lru_cache(maxsize=64)
def _legendre_rule(n):
    x, w = roots_legendre(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def gauss_legendre(n, lo=-1.0, hi=1.0):
    """Gauss--Legendre nodes and weights on ``[lo, hi]`` (rules cached by ``n``)."""
    x, w = _legendre_rule(int(n))
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def _gauss(n, lo, hi):
    x, w = _legendre_rule(int(n))
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def _periodic(n):
    return TWO_PI * np.arange(n) / n, np.full(n, TWO_PI / n)


def log_radial_variable(r, m=1.0):
    """``u = ln(r / (E + m))``, the variable in which the time kernel is a Fourier phase."""
    return np.log(r / (np.hypot(r, m) + m))


def radius_from_log_variable(u, m=1.0):
    s = np.exp(u)
    return 2.0 * m * s / (1.0 - s * s)


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor-product quadrature for the invariant measure in one chart.

    ``axis_nodes``/``axis_weights`` are the per-dimension rules in the chart
    coordinates (for the spherical chart the polar rule is Gauss--Legendre in
    ``cos(theta)``, so its weights already carry ``sin(theta)``).  ``weights``
    is the full per-node weight including the invariant density.  Grids are
    immutable; ``spec`` is the serializable recipe.
    """

    chart: str
    axis_nodes: tuple
    axis_weights: tuple
    m: float
    spec: dict = field(compare=False)

    @property
    def shape(self):
        return tuple(a.size for a in self.axis_nodes)

    @cached_property
    def mesh(self):
        return np.meshgrid(*self.axis_nodes, indexing="ij")

    @cached_property
    def cartesian(self):
        a, b, c = self.mesh
        if self.chart == "cartesian":
            return a, b, c
        if self.chart == "spherical":
            return spherical_to_cartesian(a, b, c)
        return hyperbolic_to_cartesian(a, b, c, self.m)

    @cached_property
    def energy(self):
        px, py, pz = self.cartesian
        return np.sqrt(px * px + py * py + pz * pz + self.m**2)

    @cached_property
    def weights(self):
        wa, wb, wc = np.meshgrid(*self.axis_weights, indexing="ij")
        a, b, _ = self.mesh
        m = self.m
        if self.chart == "cartesian":
            density = m / self.energy
        elif self.chart == "spherical":
            density = m * a * a / self.energy  # sin(theta) sits in the cos(theta) rule
        else:
            density = m**3 * np.sinh(a) / np.cos(b) ** 3
        return wa * wb * wc * density

    def same_as(self, other):
        return isinstance(other, QuadratureGrid) and self.spec == other.spec

    def metadata(self):
        return dict(self.spec)


def build_grid(chart, sizes, bounds=None, m=1.0, radial_map="linear"):
    """Build a :class:`QuadratureGrid`.

    Parameters
    ----------
    chart : {"cartesian", "spherical", "hyperbolic"}
    sizes : three node counts, each >= 2.
    bounds : dict
        cartesian: ``{"p_max": L}`` (cube ``[-L, L]^3``);
        spherical: ``{"r_max": R}`` plus ``{"r_min": R0}`` for ``radial_map="log"``;
        hyperbolic: ``{"omega_max": W}`` and optionally ``{"nu_max": N}`` (default pi/2).
        All lengths in units of ``m``.
    radial_map : {"linear", "log"}
        Spherical chart only.  ``"log"`` places Gauss--Legendre nodes in
        ``u = ln(r / (E + m))`` which resolves the time-POVM phase uniformly.
    """
    if chart not in CHARTS:
        raise ValueError(f"unknown chart {chart!r}")
    m = check_mass(m)
    sizes = tuple(int(n) for n in sizes)
    if len(sizes) != 3 or min(sizes) < 2:
        raise ValueError(f"need three sizes >= 2, got {sizes}")
    bounds = dict(bounds or {})
    for key, val in bounds.items():
        if not val > 0:
            raise ValueError(f"truncation bound {key} must be positive, got {val!r}")
    spec = {"chart": chart, "sizes": list(sizes), "bounds": bounds, "m": m}
    if chart == "cartesian":
        lim = bounds.setdefault("p_max", 10.0) * m
        ax = [_gauss(n, -lim, lim) for n in sizes]
    elif chart == "spherical":
        r_max = bounds.setdefault("r_max", 12.0) * m
        if radial_map == "linear":
            rad = _gauss(sizes[0], 0.0, r_max)
        elif radial_map == "log":
            r_min = bounds.setdefault("r_min", 1e-3) * m
            if r_min >= r_max:
                raise ValueError("r_min must be below r_max")
            u, wu = _gauss(sizes[0], log_radial_variable(r_min, m), log_radial_variable(r_max, m))
            r = radius_from_log_variable(u, m)
            rad = (r, wu * r * np.hypot(r, m) / m)  # dr = (r E / m) du
        else:
            raise ValueError(f"unknown radial_map {radial_map!r}")
        spec["radial_map"] = radial_map
        x, wx = _gauss(sizes[1], -1.0, 1.0)
        order = np.argsort(np.arccos(x))
        ax = [rad, (np.arccos(x)[order], wx[order]), _periodic(sizes[2])]
    else:
        w_max = bounds.setdefault("omega_max", 8.0)
        nu_max = bounds.setdefault("nu_max", np.pi / 2)
        if nu_max > np.pi / 2:
            raise ValueError("nu_max cannot exceed pi/2")
        ax = [_gauss(sizes[0], 0.0, w_max), _gauss(sizes[1], -nu_max, nu_max), _periodic(sizes[2])]
    return QuadratureGrid(
        chart=chart,
        axis_nodes=tuple(a[0] for a in ax),
        axis_weights=tuple(a[1] for a in ax),
        m=m,
        spec=spec,
    )


def grid_from_spec(spec):
    return build_grid(
        spec["chart"], spec["sizes"], spec.get("bounds"), spec.get("m", 1.0),
        spec.get("radial_map", "linear"),
    )


def inner_product(a, b, grid):
    """``<a|b> = sum_xi int dmu conj(a_xi) b_xi`` by quadrature on ``grid``."""
    va, vb = a.values(grid), b.values(grid)
    w = grid.weights
    # fixed reduction order: per sign, then the two signs in order
    return complex(sum(np.sum(w * np.conj(va[s]) * vb[s]) for s in range(2)))


def norm(state, grid):
    return float(np.sqrt(max(inner_product(state, state, grid).real, 0.0)))


def boost_z(state, rapidity):
    """Apply a pure z-boost: ``(U psi)(pi) = psi(Lambda^{-1} pi)``.

    The invariant measure makes this unitary with no extra factor.  A state at
    rest boosted by ``chi`` acquires ``<pi^3> = m sinh(chi)``.
    """
    from .states import PhysState

    if rapidity == 0.0:
        return state
    ch, sh, m = np.cosh(rapidity), np.sinh(rapidity), state.m

    def pull_back(f):
        if f is None:
            return None

        def boosted(px, py, pz):
            e = np.sqrt(px * px + py * py + pz * pz + m * m)
            return f(px, py, pz * ch - e * sh)

        return boosted

    state.require_evaluator("boost")
    symmetry = "axial" if state.symmetry in ("spherical", "axial") else None
    return PhysState(
        plus=pull_back(state.plus), minus=pull_back(state.minus), m=m,
        normalized=state.normalized, symmetry=symmetry,
        label=f"boost_z({state.label}, {rapidity:g})",
    )
