"""Admissibility of localized states, tail statistics, proper-time sweeps and
the boost covariance check.

Every localized state here is described by its longitudinal profile
``g(nu)``: the momentum amplitude is ``cos(nu)^{3/2} exp(i m tau ln sec nu) g(nu)``
times a transverse factor, and ``F_Omega(k)`` is proportional to ``g(pi k)``.
Domain membership then reads:

(a) ``F_Omega`` vanishes outside ``|k| <= 1/2`` (automatic for states, a
    measured out-of-band energy fraction for sampled amplitudes);
(b) ``F_Omega(+-1/2) = 0``;
(c) ``|g|`` decays like ``(sec nu)^p`` with ``p <= -DECAY_MARGIN`` at both walls;
(d) finite norm;
(e) smooth (second differences stable under step halving).

The thresholds are conventions, listed as module constants.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .kinematics import build_grid, cartesian_to_hyperbolic, gauss_legendre, hyperbolic_to_cartesian
from .operators import apply_momentum, apply_q0, apply_q3, expectation
from .povm import DensityProfile, position_density
from .states import LocalizedState, PhysState, PositionAmplitude, SampledState, sign_value

DECAY_MARGIN = 0.1
ENDPOINT_RTOL = 1e-6
BAND_TOL = 1e-4
SMOOTH_RTOL = 0.1
TAIL_FRACTION = 0.25
MIN_TAIL_HALF_WIDTH = 40.0
MIN_TAIL_SAMPLES = 5

PASS, FAIL, INDETERMINATE = "pass", "fail", "indeterminate"


# -- longitudinal profiles -------------------------------------------------------------

def _amplitude_profile_fn(pa, sign, m):
    xi = sign_value(sign)
    coeffs = (pa.weights * pa.omega)[None, :]

    def g(nu):
        nu = np.atleast_1d(np.asarray(nu, dtype=float))
        return kernels.fourier_sum(-m * xi * nu, pa.z, coeffs)[:, 0]

    return g


def _state_profile_fn(state, tau):
    """``g(nu)`` read off a generic state along the ``omega`` where it peaks (``phi = 0``)."""
    if isinstance(state, SampledState):
        state.require_evaluator("admissibility profiling")
    m = state.m
    idx = state.signs_present()
    if not idx:
        raise ValueError("state has no components")
    f = state.components()[idx[0]]
    om = np.linspace(0.0, 8.0, 161)
    px, py, pz = hyperbolic_to_cartesian(om, np.zeros_like(om), np.zeros_like(om), m)
    omega0 = float(om[np.argmax(np.abs(f(px, py, pz)))])

    def g(nu):
        nu = np.atleast_1d(np.asarray(nu, dtype=float))
        c = np.cos(nu)
        vals = f(*hyperbolic_to_cartesian(np.full_like(nu, omega0), nu, np.zeros_like(nu), m))
        return vals * c**-1.5 * np.exp(1j * m * tau * np.log(c))

    return g


def longitudinal_profile_of(obj, tau=0.0, sign="+", m=1.0):
    """Return ``(g, kind)``; ``kind`` is ``"amplitude"``, ``"profile"`` (closed interval) or ``"state"``."""
    if isinstance(obj, PositionAmplitude):
        return _amplitude_profile_fn(obj, sign, m), "amplitude"
    if isinstance(obj, LocalizedState):
        return (lambda nu: np.asarray(obj.profile(np.asarray(nu, dtype=float)), dtype=complex)), "profile"
    if isinstance(obj, PhysState):
        return _state_profile_fn(obj, tau), "state"
    raise TypeError(f"cannot profile {type(obj).__name__}")


# -- admissibility --------------------------------------------------------------------

@dataclass(frozen=True)
class AdmissibilityReport:
    """Per-check verdicts (``pass``/``fail``/``indeterminate``) and fitted numbers."""

    verdicts: dict
    exponents: dict
    details: dict
    conventions: dict = field(default_factory=lambda: {
        "decay_margin": DECAY_MARGIN, "endpoint_rtol": ENDPOINT_RTOL,
        "band_tol": BAND_TOL, "smooth_rtol": SMOOTH_RTOL})

    @property
    def admissible(self):
        return all(v == PASS for v in self.verdicts.values())

    def to_dict(self):
        d = asdict(self)
        d["admissible"] = self.admissible
        return d


def _out_of_band_fraction(pa, m):
    """Energy fraction of ``F_Omega`` outside ``|k| <= 1/2`` (Parseval: total is ``m pi ||Omega||^2``)."""
    total = float(np.sum(pa.weights * np.abs(pa.omega) ** 2))
    k, wk = gauss_legendre(int(256 + 4 * m * np.max(np.abs(pa.z))), -0.5, 0.5)
    inside = float(np.sum(wk * np.abs(pa.fourier(k, m)) ** 2)) / (m * np.pi)
    return max(0.0, 1.0 - inside / total)


def _endpoint_values(g, kind):
    if kind in ("amplitude", "profile"):
        return np.abs(g(np.array([-np.pi / 2, np.pi / 2])))
    # generic states only live on the open interval: cubic extrapolation
    d = np.array([1.0, 2.0, 3.0, 4.0]) * 1e-6
    out = []
    for side in (-1.0, 1.0):
        vals = g(side * (np.pi / 2 - d))
        coef = np.polyfit(d, vals, 3)
        out.append(abs(coef[-1]))
    return np.array(out)


def _decay_exponents(g, n=16):
    """Slope of ``log|g|`` against ``log sec nu`` near each wall; ``-inf`` for vanishing data."""
    d = np.geomspace(1e-4, 1e-2, n)
    ref = np.max(np.abs(g(np.linspace(-1.4, 1.4, 57))))
    out = {}
    for name, side in (("left", -1.0), ("right", 1.0)):
        vals = np.abs(g(side * (np.pi / 2 - d)))
        usable = vals > 1e-15 * max(ref, 1e-300)
        if not np.any(usable):
            out[name] = -np.inf
            continue
        if np.count_nonzero(usable) < 4:
            out[name] = np.nan
            continue
        x = -np.log(np.sin(d[usable]))  # log sec(nu) at nu = +-(pi/2 - d)
        out[name] = float(np.polyfit(x, np.log(vals[usable]), 1)[0])
    return out


def _l2_check(g):
    vals = []
    for n in (512, 1024):
        nu, w = gauss_legendre(n, -np.pi / 2, np.pi / 2)
        vals.append(float(np.sum(w * np.abs(g(nu)) ** 2)) / np.pi)
    ok = np.isfinite(vals[1]) and vals[1] > 0 and abs(vals[1] - vals[0]) <= 1e-6 * vals[1]
    return ok, vals[1]


def _smoothness(g, h=1e-2):
    nu = np.linspace(-np.pi / 2 + 0.05, np.pi / 2 - 0.05, 201)

    def d2(step):
        return (g(nu + step) - 2 * g(nu) + g(nu - step)) / step**2

    coarse, fine = d2(h), d2(h / 2)
    floor = 1e-8 * np.max(np.abs(g(nu))) / (h / 2) ** 2
    gap = float(np.max(np.abs(coarse - fine)))
    return gap <= SMOOTH_RTOL * float(np.max(np.abs(fine))) + floor, gap


def admissibility_check(obj, tau=0.0, sign="+", m=1.0):
    """Run checks (a)-(e) on a state or a :class:`PositionAmplitude`."""
    if isinstance(obj, PhysState):
        m = obj.m
        if isinstance(obj, LocalizedState):
            sign = obj.sign
    g, kind = longitudinal_profile_of(obj, tau, sign, m)
    verdicts, exps, details = {}, {}, {"input": kind}

    if kind == "amplitude":
        frac = _out_of_band_fraction(obj, m)
        details["out_of_band_fraction"] = frac
        verdicts["band_limit"] = PASS if frac <= BAND_TOL else FAIL
    else:
        details["out_of_band_fraction"] = 0.0
        verdicts["band_limit"] = PASS  # nu in (-pi/2, pi/2) is k in (-1/2, 1/2)

    nu = np.linspace(-np.pi / 2 + 1e-3, np.pi / 2 - 1e-3, 2001)
    scale = float(np.max(np.abs(g(nu))))
    ends = _endpoint_values(g, kind)
    details["endpoint_values"] = [float(e) for e in ends]
    details["profile_max"] = scale
    verdicts["endpoint_zeros"] = PASS if np.all(ends < ENDPOINT_RTOL * scale) else FAIL

    dec = _decay_exponents(g)
    exps.update({f"boundary_{k}": v for k, v in dec.items()})
    if any(np.isnan(v) for v in dec.values()):
        verdicts["boundary_decay"] = INDETERMINATE
    else:
        verdicts["boundary_decay"] = PASS if all(v <= -DECAY_MARGIN for v in dec.values()) else FAIL

    ok, nsq = _l2_check(g)
    details["longitudinal_norm_sq"] = nsq
    verdicts["square_integrable"] = PASS if ok else FAIL

    smooth, gap = _smoothness(g)
    details["second_difference_gap"] = gap
    verdicts["smooth"] = PASS if smooth else FAIL
    return AdmissibilityReport(verdicts, exps, details)


# -- amplitudes and tails ---------------------------------------------------------------

def amplitude_profile(obj, z, tau=0.0, sign="+", m=1.0, n_nu=None):
    """Longitudinal amplitude ``p0(z)`` with ``|p0|^2 = p(z; tau)`` for localized inputs.

    ``p0(z) = sqrt(m/2) G(z) / (pi sqrt(L))`` where ``G(z) = int dnu exp(i m xi z nu)
    exp(i m (tau_s - tau) ln sec nu) g(nu)`` and ``L = (1/pi) int |g|^2``.  The
    transverse spectrum drops out.  For other states only ``sqrt(p(z))`` is
    available and is returned (real).
    """
    z = np.asarray(z, dtype=float)
    if isinstance(obj, PhysState) and not isinstance(obj, LocalizedState):
        return np.sqrt(position_density(obj, tau, z).density)
    if isinstance(obj, PositionAmplitude):
        from .states import state_from_position_amplitude
        obj = state_from_position_amplitude(obj, sign, tau, m)
    m, xi = obj.m, sign_value(obj.sign)
    n = int(256 + 2.0 * m * np.max(np.abs(z), initial=0.0)) if n_nu is None else n_nu
    nu, w = gauss_legendre(n, -np.pi / 2, np.pi / 2)
    c = np.cos(nu)
    gv = np.asarray(obj.profile(nu), dtype=complex)
    lnorm = float(np.sum(w * np.abs(gv) ** 2)) / np.pi
    coeff = w * np.exp(-1j * m * (obj.tau - tau) * np.log(c)) * gv
    big_g = kernels.fourier_sum(m * xi * z, nu, coeff[None, :])[:, 0]
    return np.sqrt(m / 2) * big_g / (np.pi * np.sqrt(lnorm))


def _envelope(z, a):
    """Local maxima of ``|a|`` ordered by ``|z|``; raw samples when too few maxima."""
    a = np.abs(a)
    peaks = np.nonzero((a[1:-1] > a[:-2]) & (a[1:-1] >= a[2:]))[0] + 1
    if peaks.size >= MIN_TAIL_SAMPLES:
        return z[peaks], a[peaks]
    return z, a


def _tail_window(z, a):
    z = np.asarray(z, dtype=float)
    a = np.abs(np.asarray(a))
    half = np.max(np.abs(z))
    sel = np.abs(z) >= (1.0 - TAIL_FRACTION) * half
    zs, av = [], []
    for side in (z < 0, z > 0):
        mask = sel & side
        if np.count_nonzero(mask) >= 3:
            ez, ea = _envelope(np.abs(z[mask]), a[mask])
            zs.append(ez)
            av.append(ea)
    if not zs:
        return np.array([]), np.array([]), half
    zz, aa = np.concatenate(zs), np.concatenate(av)
    keep = aa > 0
    return zz[keep], aa[keep], half


def tail_exponent(z, values):
    """Least-squares slope of ``log`` envelope vs ``log |z|`` over the outer 25% of the window."""
    zz, aa, _ = _tail_window(z, values)
    if zz.size < MIN_TAIL_SAMPLES:
        return float("nan")
    return float(np.polyfit(np.log(zz), np.log(aa), 1)[0])


@dataclass(frozen=True)
class TailTestResult:
    verdict: str  # "bounded", "not_bounded", "indeterminate"
    A: float
    exponential_rate: float
    power_exponent: float
    preferred_model: str
    residuals: dict

    def to_dict(self):
        return asdict(self)


def exponential_tail_test(z, p0, A, m=1.0):
    """Compare the tail of ``|p0|`` with ``exp(-A |z|)`` and with a power law ``C |z|^q``.

    The bound holds when the fitted exponential rate is at least ``A``.  The
    power exponent is free; the residual of the fixed ``C/|z|`` law is also
    reported.
    Windows narrower than ``40/m`` or with too few tail samples are
    indeterminate.
    """
    if not A > 0:
        raise ValueError("A must be positive")
    zz, aa, half = _tail_window(z, p0)
    if half * m < MIN_TAIL_HALF_WIDTH or zz.size < MIN_TAIL_SAMPLES:
        return TailTestResult("indeterminate", float(A), float("nan"), float("nan"), "none", {})
    y = np.log(aa)
    ce = np.polyfit(zz, y, 1)
    cp = np.polyfit(np.log(zz), y, 1)
    res_e = float(np.sum((np.polyval(ce, zz) - y) ** 2))
    res_p = float(np.sum((np.polyval(cp, np.log(zz)) - y) ** 2))
    c_inv = np.mean(y + np.log(zz))  # fixed C/|z| law, only the constant is fitted
    res_inv = float(np.sum((c_inv - np.log(zz) - y) ** 2))
    rate = float(-ce[0]) / m
    verdict = "bounded" if rate >= A else "not_bounded"
    model = "exponential" if res_e < res_p else "power"
    return TailTestResult(verdict, float(A), rate, float(cp[0]), model,
                          {"exponential": res_e, "power": res_p, "inverse_z": res_inv})


def compact_support_verdict(z, p0, half_width, floor=None):
    """True when ``|p0|`` outside ``|z| > half_width`` stays below ``floor`` (default 1e-12 max)."""
    a = np.abs(np.asarray(p0))
    floor = 1e-12 * a.max() if floor is None else floor
    outside = np.abs(np.asarray(z)) > half_width
    if not np.any(outside):
        raise ValueError("no samples outside the window")
    return bool(a[outside].max() <= floor)


# -- proper-time sweep ----------------------------------------------------------------

@dataclass(frozen=True)
class SweepResult:
    taus: np.ndarray
    profiles: tuple = field(repr=False)
    means: np.ndarray = None
    variances: np.ndarray = None
    total_masses: np.ndarray = None
    tail_exponents: np.ndarray = None
    slope: float = 0.0
    intercept: float = 0.0
    fit_residual: float = 0.0
    warnings: tuple = ()

    def summary_rows(self):
        return [
            {"tau": float(t), "mean": float(mu), "variance": float(v),
             "tail_exponent": float(te), "total_mass": float(tm)}
            for t, mu, v, te, tm in zip(self.taus, self.means, self.variances,
                                        self.tail_exponents, self.total_masses)
        ]

    def to_dict(self):
        return {"taus": [float(t) for t in self.taus], "slope": self.slope,
                "intercept": self.intercept, "fit_residual": self.fit_residual,
                "rows": self.summary_rows(), "warnings": list(self.warnings)}


def propertime_sweep(state, taus, z, workers=1, **truncation):
    """``p(z; tau)`` for each ``tau`` plus the mean trajectory and its linear fit.

    ``workers > 1`` evaluates the taus on a thread pool; results keep the
    input order and each density is computed exactly as in the serial path,
    so the output does not depend on ``workers``.
    ``fit_residual`` is the max deviation from the fitted line relative to the
    total drift over the sweep (or absolute when the drift vanishes).
    """
    taus = np.asarray(taus, dtype=float)
    if taus.ndim != 1 or taus.size < 2 or not np.all(np.isfinite(taus)):
        raise ValueError("need at least two finite tau values")

    def one(tau):
        return position_density(state, tau, z, **truncation)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            profiles = tuple(pool.map(one, taus))
    else:
        profiles = tuple(one(t) for t in taus)
    means = np.array([p.mean() for p in profiles])
    var = np.array([p.variance() for p in profiles])
    mass = np.array([p.total_mass for p in profiles])
    tails = np.array([tail_exponent(p.points, p.density) for p in profiles])
    slope, intercept = np.polyfit(taus, means, 1)
    dev = np.max(np.abs(means - (slope * taus + intercept)))
    drift = abs(slope) * (taus.max() - taus.min())
    resid = float(dev / drift) if drift > 1e-12 else float(dev)
    warns = tuple(w for p in profiles for w in p.warnings)
    return SweepResult(taus, profiles, means, var, mass, tails, float(slope), float(intercept),
                       resid, warns)


def momentum_expectation(state, mu, grid=None):
    """``<Pi^mu>`` by quadrature (default: hyperbolic grid sized for compact packets)."""
    grid = build_grid("hyperbolic", (64, 128, 16), {"omega_max": 6.0}, m=state.m) if grid is None else grid
    return expectation(state, apply_momentum(state, mu, grid), grid).real


# -- covariance ---------------------------------------------------------------------

@dataclass(frozen=True)
class CovarianceReport:
    rapidity: float
    tau: float
    lhs: complex
    rhs: complex
    q3: complex
    q0: complex
    discrepancy: float
    converged: bool
    stencil: dict

    def to_dict(self):
        d = asdict(self)
        for k in ("lhs", "rhs", "q3", "q0"):
            d[k] = [d[k].real, d[k].imag]
        return d


def covariance_grids(m=1.0, scale=1):
    hyper = build_grid("hyperbolic", (64 * scale, 128 * scale, 32), {"omega_max": 5.0}, m=m)
    spher = build_grid("spherical", (64 * scale, 48 * scale, 32), {"r_max": 8.0}, m=m)
    return hyper, spher


def covariance_check(state, rapidity, tau=1.0, grids=None, h3=None, h0=None, richardson=True):
    """Compare ``<U psi|Q3 U psi>`` with ``cosh(chi) <Q3> + sinh(chi) <Q0>`` (relative discrepancy)."""
    from .kinematics import boost_z
    from .operators import Q0_STEP, Q3_STEP

    hyper, spher = covariance_grids(state.m) if grids is None else grids
    h3 = Q3_STEP if h3 is None else h3
    h0 = Q0_STEP if h0 is None else h0
    boosted = boost_z(state, rapidity)
    a_l = apply_q3(boosted, tau, hyper, h=h3, richardson=richardson)
    a_3 = apply_q3(state, tau, hyper, h=h3, richardson=richardson)
    a_0 = apply_q0(state, tau, spher, h=h0, richardson=richardson)
    lhs = expectation(boosted, a_l.values, hyper)
    q3 = expectation(state, a_3.values, hyper)
    q0 = expectation(state, a_0.values, spher)
    rhs = np.cosh(rapidity) * q3 + np.sinh(rapidity) * q0
    scale = max(abs(lhs), abs(rhs), 1e-300)
    conv = a_l.converged and a_3.converged and a_0.converged if richardson else True
    return CovarianceReport(float(rapidity), float(tau), lhs, rhs, q3, q0,
                            float(abs(lhs - rhs) / scale), bool(conv),
                            {"h3": h3, "h0": h0, "richardson": richardson})


def covariance_convergence(state, rapidity, tau=1.0, steps=(0.2, 0.1, 0.05), grids=None):
    """Discrepancies with plain 4th-order stencils at each step and the observed orders."""
    grids = covariance_grids(state.m) if grids is None else grids
    disc = [covariance_check(state, rapidity, tau, grids, h3=h, h0=h, richardson=False).discrepancy
            for h in steps]
    orders = [float(np.log(disc[i] / disc[i + 1]) / np.log(steps[i] / steps[i + 1]))
              for i in range(len(steps) - 1)]
    return {"steps": list(steps), "discrepancies": disc, "orders": orders}


# -- operator algebra checks -----------------------------------------------------------

def commutator_check(state, tau=0.0, grid=None):
    """``<[Q3, Pi3]>`` by composing stencils, against ``i <1 + (Pi3/m)^2>``.

    Both operators carry ``sigma3``, which squares away, so the same identity
    holds in either sign sector.

    Returns ``(lhs, rhs, relative discrepancy)``.  Valid for states that vanish
    fast enough at ``nu = +-pi/2``.
    """
    from .operators import momentum_state

    m = state.m
    grid = build_grid("hyperbolic", (48, 128, 16), {"omega_max": 6.0}, m=m) if grid is None else grid
    q_p = apply_q3(momentum_state(state, 3), tau, grid).values  # Q3 Pi3 psi
    p_q = apply_q3(state, tau, grid)
    pz = grid.cartesian[2]
    pq = p_q.values * pz
    pq[1] *= -1  # sigma3 Pi3 acting on Q3 psi
    lhs = expectation(state, q_p - pq, grid)
    rhs = 1j * expectation(state, state.values(grid) * (1 + (pz / m) ** 2), grid)
    return lhs, rhs, float(abs(lhs - rhs) / abs(rhs))


def form_asymmetry(a, b, operator, tau=0.0, grid=None):
    """``|<a|Q b> - <Q a|b>|`` relative to ``|<a|Q b>|`` for ``Q0`` or ``Q3``."""
    m = a.m
    if operator == "Q0":
        grid = build_grid("spherical", (64, 48, 32), {"r_max": 8.0}, m=m) if grid is None else grid
        qa, qb = apply_q0(a, tau, grid).values, apply_q0(b, tau, grid).values
    elif operator == "Q3":
        grid = build_grid("hyperbolic", (64, 128, 32), {"omega_max": 5.0}, m=m) if grid is None else grid
        qa, qb = apply_q3(a, tau, grid).values, apply_q3(b, tau, grid).values
    else:
        raise ValueError("operator must be 'Q0' or 'Q3'")
    left = expectation(a, qb, grid)
    right = np.conj(expectation(b, qa, grid))
    return float(abs(left - right) / max(abs(left), 1e-300))
