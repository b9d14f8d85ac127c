"""Named invariant checks run by ``propertime verify`` and the acceptance tests.

Each check returns a :class:`CheckResult` with the measured value, the
threshold it was held to and a short detail string.  Checks use fixed seeds,
so a run is reproducible.
"""
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import optimize

from . import analysis, kinematics, operators, povm, specfun, states
from .kinematics import build_grid, inner_product

SEED = 20240611


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""
    seconds: float = 0.0

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.detail} (value {self.value:.3e}, threshold {self.threshold:.1e})"

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class Context:
    m: float = 1.0
    level: str = "quick"
    workers: int = 1

    def rng(self, salt=0):
        return np.random.default_rng(SEED + salt)


REGISTRY = {}


def check(name):
    def deco(fn):
        REGISTRY[name] = fn
        return fn
    return deco


def _result(name, value, threshold, detail, ok=None):
    ok = bool(value <= threshold) if ok is None else bool(ok)
    return CheckResult(name, ok, float(value), float(threshold), detail)


# -- shared fixtures ------------------------------------------------------------------

def completeness_packets(m=1.0):
    """Three packets (spherical, axial, general) used for the completeness checks."""
    return (states.shell_packet(1.0, 0.3, "+", m),
            states.gaussian_packet((0.0, 0.0, 1.0), 0.5, "+", m),
            states.gaussian_packet((0.4, 0.0, 0.8), 0.5, "+", m))


def leaning_profile(target, power=2.0, m=1.0):
    """``g = cos^p(nu) exp(a nu)`` with ``a`` solved so that ``<tan nu> = target``."""
    nu, w = kinematics.gauss_legendre(512, -np.pi / 2, np.pi / 2)

    def mean_tan(a):
        wt = w * np.cos(nu) ** (2 * power) * np.exp(2 * a * nu)
        return np.sum(wt * np.tan(nu)) / np.sum(wt) - target

    a = optimize.brentq(mean_tan, -20.0, 20.0, xtol=1e-14)
    return lambda x: np.cos(x) ** power * np.exp(a * np.asarray(x)) + 0j


def admissible_amplitude(power=2, half_width=60.0, n=12001):
    """``Omega`` whose profile is ``cos^power(nu)`` (``m = 1``), sampled on ``[-W, W]``."""
    z = np.linspace(-half_width, half_width, n)
    nu, w = kinematics.gauss_legendre(600, -np.pi / 2, np.pi / 2)
    om = (w * np.cos(nu) ** power) @ np.exp(1j * np.outer(nu, z)) / (2 * np.pi)
    return states.PositionAmplitude(z, om)


# -- specfun -----------------------------------------------------------------------

@check("specfun.gamma_reflection")
def _gamma_reflection(ctx):
    lams = np.array([0.0, 0.5, 1.0, 2.0])
    dev = np.abs(specfun.gamma_abs_half(0, lams) ** 2 * np.cosh(np.pi * lams) / np.pi - 1.0)
    return _result("specfun.gamma_reflection", dev.max(), 1e-10, "|Gamma(1/2+iL)|^2 cosh(pi L)/pi = 1")


@check("specfun.conical_continuity")
def _conical_continuity(ctx):
    worst, ratio_worst = 0.0, 0.0
    for mu in (0, 1, 2):
        for lam in (0.5, 2.0, 5.0):
            for x in (1.2, specfun.SERIES_CROSSOVER, 3.0, 20.0):
                p = specfun.conical_p(mu=mu, Lambda=lam, x=x)
                d1 = abs(specfun.conical_p(mu=mu, Lambda=lam, x=x + 1e-4) - p)
                d2 = abs(specfun.conical_p(mu=mu, Lambda=lam, x=x + 1e-6) - p)
                worst = max(worst, d2 / (1.0 + abs(p)))
                if d1 > 1e-12:
                    ratio_worst = max(ratio_worst, d2 / d1)
    ok = worst < 1e-4 and ratio_worst < 0.05
    return _result("specfun.conical_continuity", worst, 1e-4,
                   f"|P(x+h)-P(x)| -> 0, step-ratio {ratio_worst:.3f} (expect ~0.01)", ok)


@check("specfun.ylm_orthonormality")
def _ylm(ctx):
    x, wx = kinematics.gauss_legendre(16)
    ph = np.arange(16) * 2 * np.pi / 16
    th, pp = np.meshgrid(np.arccos(x), ph, indexing="ij")
    w = np.outer(wx, np.full(16, 2 * np.pi / 16))
    lm = [(l, k) for l in range(5) for k in range(-l, l + 1)]
    ys = np.array([specfun.spherical_harmonic(l, k, th, pp) for l, k in lm])
    gram = np.einsum("aij,bij,ij->ab", np.conj(ys), ys, w)
    dev = np.abs(gram - np.eye(len(lm))).max()
    return _result("specfun.ylm_orthonormality", dev, 1e-8, "Gram matrix l <= 4 is the identity")


# -- kinematics --------------------------------------------------------------------

@check("kinematics.chart_roundtrip")
def _roundtrip(ctx):
    rng, m = ctx.rng(1), ctx.m
    p = rng.normal(scale=3.0 * m, size=(3, 10_000))
    worst = 0.0
    for chart in ("spherical", "hyperbolic"):
        pt = kinematics.convert(kinematics.MomentumPoint("cartesian", tuple(p)), chart, m)
        back = np.array(kinematics.to_cartesian(pt, m))
        worst = max(worst, float(np.max(np.abs(back - p) / (np.linalg.norm(p, axis=0) + m))))
    return _result("kinematics.chart_roundtrip", worst, 1e-12, "cartesian -> chart -> cartesian, 1e4 points")


@check("kinematics.energy_closed_form")
def _energy(ctx):
    rng, m = ctx.rng(2), ctx.m
    om = rng.uniform(0, 4, 1000)
    nu = rng.uniform(-1.5, 1.5, 1000)
    ph = rng.uniform(0, 2 * np.pi, 1000)
    closed = kinematics.energy(kinematics.MomentumPoint("hyperbolic", (om, nu, ph)), m)
    px, py, pz = kinematics.hyperbolic_to_cartesian(om, nu, ph, m)
    direct = np.sqrt(px**2 + py**2 + pz**2 + m**2)
    return _result("kinematics.energy_closed_form", np.max(np.abs(closed / direct - 1)), 1e-12,
                   "m sec(nu) cosh(omega) vs sqrt(|p|^2 + m^2)")


@check("kinematics.jacobian")
def _jacobian(ctx):
    rng, m = ctx.rng(3), ctx.m
    worst = 0.0
    for _ in range(50):
        q = np.array([rng.uniform(0.05, 3), rng.uniform(-1.4, 1.4), rng.uniform(0, 6)])
        h = 1e-3
        jac = np.empty((3, 3))
        for k in range(3):
            def f(s):
                e = q.copy()
                e[k] += s
                return np.array(kinematics.hyperbolic_to_cartesian(*e, m))
            jac[:, k] = (f(-2 * h) - 8 * f(-h) + 8 * f(h) - f(2 * h)) / (12 * h)
        e = m * np.cosh(q[0]) / np.cos(q[1])
        oracle = m / e * abs(np.linalg.det(jac))
        w = kinematics.measure_weight(kinematics.MomentumPoint("hyperbolic", tuple(q)), m)
        worst = max(worst, abs(w / oracle - 1))
    return _result("kinematics.jacobian", worst, 1e-8, "hyperbolic weight vs (m/E) |det J| by finite differences")


def chart_norms(state, m=1.0):
    grids = {
        "spherical": build_grid("spherical", (96, 48, 32), {"r_max": 10.0}, m=m),
        "hyperbolic": build_grid("hyperbolic", (96, 160, 32), {"omega_max": 5.0}, m=m),
        "cartesian": build_grid("cartesian", (64, 64, 64), {"p_max": 6.0}, m=m),
    }
    return {k: inner_product(state, state, g).real for k, g in grids.items()}


@check("kinematics.norm_chart_independence")
def _norms(ctx):
    st = states.gaussian_packet((0.2, 0.0, 0.3), 0.6, "+", ctx.m)
    n = chart_norms(st, ctx.m)
    spread = max(n.values()) - min(n.values())
    return _result("kinematics.norm_chart_independence", spread, 1e-6,
                   ", ".join(f"{k} {v:.10f}" for k, v in n.items()))


@check("kinematics.boost_unitarity")
def _boost(ctx):
    rng, m = ctx.rng(4), ctx.m
    grid = build_grid("spherical", (96, 48, 32), {"r_max": 12.0}, m=m)
    worst = 0.0
    for _ in range(3):
        a = states.gaussian_packet(rng.uniform(-0.5, 0.5, 3), rng.uniform(0.5, 0.7), "+", m)
        b = states.gaussian_packet(rng.uniform(-0.5, 0.5, 3), rng.uniform(0.5, 0.7), "+", m)
        chi = rng.uniform(-0.5, 0.5)
        before = inner_product(a, b, grid)
        after = inner_product(kinematics.boost_z(a, chi), kinematics.boost_z(b, chi), grid)
        worst = max(worst, abs(after - before))
    return _result("kinematics.boost_unitarity", worst, 1e-6, "<Ua|Ub> = <a|b> on random pairs")


# -- states -------------------------------------------------------------------------

@check("states.constructor_invariants")
def _constructors(ctx):
    m = ctx.m
    hyper = build_grid("hyperbolic", (96, 192, 8), {"omega_max": 8.0}, m=m)
    built = [
        states.gaussian_packet((0.0, 0.0, 0.3), 0.5, "+", m),
        states.gaussian_packet((0.0, 0.0, 0.3), 0.5, "-", m),
        states.shell_packet(1.0, 0.4, "+", m),
        states.localized_state(np.cos, m=m),
        states.position_element_state(1.0, m=m),
    ]
    if m == 1.0:
        built.append(states.state_from_position_amplitude(admissible_amplitude(2, 30.0, 3001)))
    worst = max(abs(inner_product(s, s, hyper).real - 1.0) for s in built)
    return _result("states.constructor_invariants", worst, 1e-6,
                   f"{len(built)} constructors normalized on the hyperbolic grid")


def sinc_smeared(pa, z, m=1.0):
    """``int dz' Omega(z') sinc(m pi (z - z')/2)`` by the trapezoid rule."""
    ker = specfun.sinc(m * np.pi * (z[:, None] - pa.z[None, :]) / 2)
    return ker @ (pa.weights * pa.omega)


@check("states.smeared_amplitude_density")
def _smeared(ctx):
    m = ctx.m
    zs = np.linspace(-12.0, 12.0, 1201)
    pa = states.PositionAmplitude(zs, np.exp(-((zs - 1.0) ** 2) / (2 * 1.5**2)))
    st = states.state_from_position_amplitude(pa, m=m)
    z = np.linspace(-30.0, 30.0, 601)
    dens = povm.position_density(st, 0.0, z).density
    ref = np.abs(sinc_smeared(pa, z, m)) ** 2
    w = povm.trapezoid_weights(z)
    ref *= np.sum(w * dens) / np.sum(w * ref)
    l1 = np.sum(w * np.abs(dens - ref)) / np.sum(w * dens)
    return _result("states.smeared_amplitude_density", l1, 0.02, "p(z) vs |sinc * Omega|^2, L1 distance")


# -- operators ---------------------------------------------------------------------

@check("operators.deficiency_norms")
def _def_norms(ctx):
    sols = operators.deficiency_solutions("Q0", 0.7, ctx.m) + operators.deficiency_solutions("Q3", 0.7, ctx.m)
    dev = max(abs(s.norm_sq - s.norm_target) for s in sols)
    return _result("operators.deficiency_norms", dev, 1e-6, f"{len(sols)} deficiency solutions with norm 1")


@check("operators.eigen_residuals")
def _eigen(ctx):
    m, tau = ctx.m, 0.7
    sph = build_grid("spherical", (48, 8, 8), {"r_max": 30.0}, m=m)
    hyp = build_grid("hyperbolic", (8, 64, 4), {"omega_max": 3.0}, m=m)
    res = []
    for d in operators.deficiency_solutions("Q0", tau, m):
        res.append(operators.eigen_residual(operators.apply_q0(d.state, tau, sph), d.eigenvalue, d.state, sph))
    for d in operators.deficiency_solutions("Q3", tau, m):
        res.append(operators.eigen_residual(operators.apply_q3(d.state, tau, hyp), d.eigenvalue, d.state, hyp))
    for t in (0.0, 1.5):
        s = operators.extension_time_eigenfunction(t, 0.4, tau, m)
        res.append(operators.eigen_residual(operators.apply_q0(s, tau, sph), t, s, sph))
    for phi in (np.pi / 2, 1.0):
        for sign in "+-":
            s, z = operators.extension_position_eigenfunction(phi, 1, sign, tau, m)
            res.append(operators.eigen_residual(operators.apply_q3(s, tau, hyp), z, s, hyp))
    return _result("operators.eigen_residuals", max(res), 1e-5,
                   f"{len(res)} eigenfunctions, ||Q psi - q psi|| / ||psi||")


@check("operators.spectrum_spacing")
def _spacing(ctx):
    m = ctx.m
    worst = 0.0
    for phi in (np.pi, np.pi / 2, 0.0, -2.0):
        z = operators.extension_spectrum(phi, -5, 6, m).z
        worst = max(worst, np.max(np.abs(np.diff(z) - 2.0 / m)))
    zpi = operators.extension_spectrum(np.pi, -3, 3, m).z
    worst = max(worst, np.max(np.abs(zpi - (2 * np.arange(-3, 3) + 1) / m)))
    return _result("operators.spectrum_spacing", worst, 1e-12, "spacing 2/m and z_pi^n = (2n+1)/m")


@check("operators.seam_continuity")
def _seam(ctx):
    m = ctx.m
    worst = max(abs(operators.extension_spectrum(np.pi, n, n + 1, m).z[0] - operators.seam_limit(n, m))
                for n in range(-3, 4))
    return _result("operators.seam_continuity", worst, 1e-9, "z_pi^n vs lim phi -> -pi of z_phi^(n+1)")


@check("operators.symmetric_forms")
def _symmetric(ctx):
    m = ctx.m
    a = states.gaussian_packet((0.3, 0.0, 0.4), 0.5, "+", m)
    b = states.gaussian_packet((0.0, 0.2, -0.3), 0.6, "+", m)
    d0 = analysis.form_asymmetry(a, b, "Q0", 1.0)
    d3 = analysis.form_asymmetry(a, b, "Q3", 1.0)
    return _result("operators.symmetric_forms", max(d0, d3), 1e-6, f"Q0 {d0:.1e}, Q3 {d3:.1e}")


@check("operators.commutator")
def _commutator(ctx):
    worst = 0.0
    for sign in "+-":
        st = states.gaussian_packet((0.3, 0.0, 0.4), 0.5, sign, ctx.m)
        worst = max(worst, analysis.commutator_check(st, 1.0)[2])
    return _result("operators.commutator", worst, 0.02, "<[Q3, Pi3]> = i <1 + (Pi3/m)^2>, both signs")


@check("operators.block_diagonal")
def _block(ctx):
    m = ctx.m
    grid = build_grid("spherical", (32, 16, 8), {"r_max": 8.0}, m=m)
    leak = 0.0
    for sign, other in (("+", 1), ("-", 0)):
        st = states.gaussian_packet((0.1, 0.0, 0.3), 0.5, sign, m)
        leak = max(leak, np.max(np.abs(operators.apply_q0(st, 0.5, grid).values[other])))
    return _result("operators.block_diagonal", leak, 0.0, "apply_q0 keeps each sign sector", leak == 0.0)


# -- povm -------------------------------------------------------------------------

def completeness_table(m=1.0, t_max=200.0, z_max=60.0):
    """Total masses per packet at growing truncations: time (l_max 2, 6, 12), position (Lambda_max 2, 4, 8)."""
    t = np.linspace(-t_max, t_max, int(20 * t_max) + 1)
    z = np.linspace(-z_max, z_max, int(10 * z_max) + 1)
    rows = []
    for st in completeness_packets(m):
        tm = [povm.time_density(st, 0.0, t, l_max=l) for l in (2, 6, 12)]
        zm = [povm.position_density(st, 0.0, z, lambda_max=L) for L in (2.0, 4.0, 8.0)]
        rows.append((st.label, tm, zm))
    return rows


@check("povm.positivity_normalization")
def _completeness(ctx):
    rows = completeness_table(ctx.m)
    worst, detail, ok = 0.0, [], True
    for label, tm, zm in rows:
        for profs in (tm, zm):
            masses = [p.total_mass for p in profs]
            mono = all(b >= a - 1e-9 for a, b in zip(masses, masses[1:]))
            ok &= mono and masses[-1] <= 1 + 1e-6 and min(p.density.min() for p in profs) >= 0.0
            worst = max(worst, abs(1 - masses[-1]))
        detail.append(f"{label.split('(')[0]} t {tm[-1].total_mass:.6f} z {zm[-1].total_mass:.6f}")
    return _result("povm.positivity_normalization", worst, 1e-2, "; ".join(detail), ok and worst <= 1e-2)


@check("povm.sinc_kernel")
def _sinc(ctx):
    m = ctx.m
    dz = np.arange(0, 1001) * 0.01 / m
    ov = np.array([povm.position_overlap(0.0, d, m=m) for d in dz])
    err = np.max(np.abs(ov - specfun.sinc(m * np.pi * dz / 2)))
    zero = abs(povm.position_overlap(0.0, 2.0 / m, m=m))
    return _result("povm.sinc_kernel", max(err, zero), 1e-6,
                   f"max error {err:.1e} on [0, 10/m], |overlap(2/m)| {zero:.1e}")


@check("povm.time_kernel")
def _time_kernel(ctx):
    m = ctx.m
    pairs = [((0.0, 1.0), (0.0, 1.0)), ((0.0, 1.0), (1.5, 0.8)), ((-1.0, 0.7), (2.0, 1.2))]
    worst = 0.0
    for sign in "+-":
        for a, b in pairs:
            r = povm.time_overlap_smeared(povm.GaussianWindow(*a), povm.GaussianWindow(*b), sign, 0.5, m)
            worst = max(worst, r.discrepancy)
    return _result("povm.time_kernel", worst, 1e-4, "smeared kernel: analytic vs half-line Fourier route")


@check("povm.tail_law")
def _tail(ctx):
    st = states.localized_state(np.cos, m=ctx.m)
    z = np.linspace(-200.0, 200.0, 8001) / ctx.m
    q = analysis.tail_exponent(z, analysis.amplitude_profile(st, z))
    return _result("povm.tail_law", abs(q + 2.0), 0.2, f"amplitude tail exponent {q:.4f} in [-2.2, -1.8]")


def drift_sweep(ctx, target=0.5, taus=None):
    m = ctx.m
    st = states.localized_state(leaning_profile(target, 2.0, m), m=m, label="leaning")
    taus = np.linspace(0.0, 10.0 / m, 5) if taus is None else taus
    z = np.linspace(-80.0, 120.0, 2001) / m  # wide enough that the spread packet stays inside at tau = 10
    sw = analysis.propertime_sweep(st, taus, z, workers=ctx.workers)
    return st, sw, analysis.momentum_expectation(st, 3) / m


@check("povm.tau_drift")
def _drift(ctx):
    _, sw, ref = drift_sweep(ctx)
    rel = abs(sw.slope - ref) / abs(ref)
    return _result("povm.tau_drift", rel, 0.01, f"slope {sw.slope:.6f} vs <Pi3>/m {ref:.6f}")


# -- analysis ----------------------------------------------------------------------

@check("analysis.admissibility_examples")
def _admissibility(ctx):
    z = np.linspace(-2.0, 2.0, 801)
    box = analysis.admissibility_check(states.PositionAmplitude(z, np.ones_like(z)))
    ext, _ = operators.extension_position_eigenfunction(np.pi / 2, 0)
    ext_r = analysis.admissibility_check(ext)
    good = analysis.admissibility_check(states.localized_state(lambda n: np.cos(n) ** 2 + 0j))
    ok = (not box.admissible) and (not ext_r.admissible) and ext_r.verdicts["boundary_decay"] == "fail" \
        and good.admissible
    return _result("analysis.admissibility_examples", 0.0, 0.0,
                   f"box {box.admissible}, extension {ext_r.admissible}, cos^2 {good.admissible}", ok)


@check("analysis.no_compact_support")
def _no_compact(ctx):
    rng = ctx.rng(5)
    z = np.linspace(-150.0, 150.0, 6001)
    flagged = 0
    for _ in range(10):
        p, tilt, z0 = rng.uniform(1.0, 3.0), rng.uniform(-0.5, 0.5), rng.uniform(-3.0, 3.0)
        g = (lambda p, tilt, z0: lambda nu: np.cos(nu) ** p * (1 + tilt * np.sin(nu)) * np.exp(-1j * z0 * nu))(p, tilt, z0)
        st = states.localized_state(g)
        if not analysis.admissibility_check(st).admissible:
            raise AssertionError("random packet unexpectedly inadmissible")
        p0 = analysis.amplitude_profile(st, z)
        flagged += sum(analysis.compact_support_verdict(z, p0, w) for w in (10.0, 40.0, 100.0))
    return _result("analysis.no_compact_support", flagged, 0, "10 random admissible packets, windows 10/40/100")


@check("analysis.truncation_monotone")
def _truncation(ctx):
    flips = []
    for power in (2, 4):
        pa = admissible_amplitude(power)
        before = analysis.admissibility_check(pa).admissible
        for cut in (4.0, 8.0, 16.0):
            om = np.where(np.abs(pa.z) <= cut, pa.omega, 0.0)
            after = analysis.admissibility_check(states.PositionAmplitude(pa.z, om, pa.transverse)).admissible
            flips.append(before and not after)
    return _result("analysis.truncation_monotone", 0.0, 0.0,
                   f"{sum(flips)}/{len(flips)} truncations flip admissible -> inadmissible", all(flips))


@check("analysis.exponential_tail")
def _exp_tail(ctx):
    st = states.localized_state(np.cos, m=ctx.m)
    z = np.linspace(-200.0, 200.0, 8001) / ctx.m
    p0 = analysis.amplitude_profile(st, z)
    verdicts = [analysis.exponential_tail_test(z, p0, a * ctx.m, ctx.m).verdict for a in (0.25, 0.5, 1.0)]
    synth = analysis.exponential_tail_test(z, np.exp(-0.6 * np.abs(z)), 0.5, ctx.m).verdict
    narrow = analysis.exponential_tail_test(z[np.abs(z) < 20], p0[np.abs(z) < 20], 0.5, ctx.m).verdict
    ok = all(v == "not_bounded" for v in verdicts) and synth == "bounded" and narrow == "indeterminate"
    return _result("analysis.exponential_tail", 0.0, 0.0,
                   f"admissible {verdicts}, synthetic {synth}, narrow {narrow}", ok)


@check("analysis.sweep_affine")
def _sweep(ctx):
    _, sw, _ = drift_sweep(ctx)
    return _result("analysis.sweep_affine", sw.fit_residual, 0.01, "linear-fit residual / total drift")


@check("analysis.covariance")
def _covariance(ctx):
    st = states.gaussian_packet((0.3, 0.0, 0.4), 0.5, "+", ctx.m)
    grids = analysis.covariance_grids(ctx.m)
    r0 = analysis.covariance_check(st, 0.0, 1.0, grids)
    rp = analysis.covariance_check(st, 0.3, 1.0, grids)
    rm = analysis.covariance_check(st, -0.3, 1.0, grids)
    conv = analysis.covariance_convergence(st, 0.3, 1.0, grids=grids)
    order = min(conv["orders"])
    ok = r0.discrepancy < 1e-12 and rp.discrepancy < 1e-3 and rm.discrepancy < 1e-3 and order >= 2
    return _result("analysis.covariance", rp.discrepancy, 1e-3,
                   f"chi 0: {r0.discrepancy:.1e}, +0.3: {rp.discrepancy:.1e}, -0.3: {rm.discrepancy:.1e}, "
                   f"order {order:.2f}", ok)


# -- cli ---------------------------------------------------------------------------

@check("cli.byte_identical")
def _bytes(ctx):
    from . import io

    st = states.gaussian_packet((0.0, 0.0, 0.5), 0.5, "+", ctx.m)
    prof = povm.position_density(st, 0.0, np.linspace(-10, 10, 201))
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        for k in (1, 2):
            io.write_profile_csv(prof, tmp / f"p{k}.csv")
            io.write_profile_json(prof, tmp / f"p{k}.json")
        same = (tmp / "p1.csv").read_bytes() == (tmp / "p2.csv").read_bytes() \
            and (tmp / "p1.json").read_bytes() == (tmp / "p2.json").read_bytes()
        a, b = io.read_profile_csv(tmp / "p1.csv"), io.read_profile_json(tmp / "p1.json")
        cross = np.array_equal(a.density, b.density) and np.array_equal(a.points, b.points)
    return _result("cli.byte_identical", 0.0, 0.0, f"repeat emission identical {same}, csv == json {cross}",
                   same and cross)


def run_checks(ctx=None, only=None):
    """Run the registered checks (all, or the names in ``only``) in registry order."""
    ctx = Context() if ctx is None else ctx
    names = list(REGISTRY) if not only else list(only)
    unknown = [n for n in names if n not in REGISTRY]
    if unknown:
        raise ValueError(f"unknown checks: {unknown}")
    out = []
    for name in names:
        t0 = time.perf_counter()
        try:
            res = REGISTRY[name](ctx)
        except Exception as exc:  # a crashing check is a failed check
            res = CheckResult(name, False, float("nan"), float("nan"), f"error: {type(exc).__name__}: {exc}")
        res.seconds = time.perf_counter() - t0
        out.append(res)
    return out
