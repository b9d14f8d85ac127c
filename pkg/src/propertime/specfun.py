"""Special functions for the eigenfunction formulas.

Conical (Mehler) functions ``P^{-mu}_{-1/2 + i Lambda}(x)`` are evaluated with
two routes:

* ``x <= SERIES_CROSSOVER``: the Gauss hypergeometric series in ``(1 - x)/2``,
  which converges geometrically there;
* otherwise: the Mehler--Dirichlet integral

  .. math::

     P^{-\\mu}_{-1/2+i\\Lambda}(\\cosh\\xi) = \\sqrt{2/\\pi}\\,
       \\frac{(\\sinh\\xi)^{-\\mu}}{\\Gamma(\\mu + 1/2)}
       \\int_0^\\xi \\cos(\\Lambda t)(\\cosh\\xi - \\cosh t)^{\\mu - 1/2}\\,dt

  with ``t = xi sin(theta)``, which removes the endpoint singularity and makes
  the integrand analytic, so Gauss--Legendre converges spectrally.  The node
  count grows linearly with ``Lambda * xi``.

Accuracy target is 1e-8 relative to the function's local scale.
"""
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import kernels
from .kinematics import gauss_legendre

SERIES_CROSSOVER = 1.5
SERIES_MAX_TERMS = 400


class ConicalEvaluationError(ArithmeticError):
    """Raised when a conical-function evaluation fails to converge."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual estimate {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class ConicalArgs:
    mu: int
    Lambda: float
    x: float

    def __post_init__(self):
        if int(self.mu) != self.mu or self.mu < 0:
            raise ValueError(f"mu must be a non-negative integer, got {self.mu!r}")
        if not self.Lambda >= 0:
            raise ValueError(f"Lambda must be >= 0, got {self.Lambda!r}")
        if not self.x >= 1:
            raise ValueError(f"x must be >= 1, got {self.x!r}")


def gamma_abs_half(mu, Lambda):
    """Return ``|Gamma(1/2 + mu + i Lambda)|``."""
    if mu < 0 or int(mu) != mu:
        raise ValueError("mu must be a non-negative integer")
    Lambda = np.asarray(Lambda, dtype=float)
    if np.any(Lambda < 0):
        raise ValueError("Lambda must be non-negative")
    out = np.exp(special.loggamma(0.5 + mu + 1j * Lambda).real)
    return float(out) if out.ndim == 0 else out


def transverse_prefactor(mu, Lambda):
    """``sqrt(sinh(pi Lambda)) |Gamma(1/2 + mu + i Lambda)|``, overflow-safe."""
    Lambda = np.asarray(Lambda, dtype=float)
    a = np.pi * Lambda
    # log sinh a = a + log(1 - exp(-2a)) - log 2
    with np.errstate(divide="ignore"):
        log_sinh = a + np.log1p(-np.exp(-2.0 * a)) - np.log(2.0)
        out = np.exp(0.5 * log_sinh + special.loggamma(0.5 + mu + 1j * Lambda).real)
    return np.where(Lambda > 0, out, 0.0)


def sinc(x):
    """Unnormalized sinc, ``sin(x)/x`` with ``sinc(0) = 1``."""
    out = np.sinc(np.asarray(x, dtype=float) / np.pi)
    return float(out) if out.ndim == 0 else out


def spherical_harmonic(l, m_z, theta, phi):
    """Orthonormal spherical harmonic ``Y^{l, m_z}(theta, phi)`` (Condon--Shortley phase)."""
    if l < 0 or abs(m_z) > l:
        raise ValueError(f"need l >= 0 and |m_z| <= l, got l={l}, m_z={m_z}")
    return special.sph_harm_y(l, m_z, theta, phi)


def _series(mu, lambdas, x):
    """Hypergeometric series for ``x`` close to 1; returns (values, residual)."""
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))[:, None]
    x = np.atleast_1d(np.asarray(x, dtype=float))[None, :]
    z = (1.0 - x) / 2.0
    term = np.ones(np.broadcast(lambdas, x).shape)
    total = term.copy()
    peak = np.abs(term)
    for k in range(SERIES_MAX_TERMS):
        # (1/2 - iL)_k (1/2 + iL)_k is real: |1/2 + k + iL|^2 per step
        term = term * ((k + 0.5) ** 2 + lambdas**2) / ((k + 1.0) * (k + 1.0 + mu)) * z
        total = total + term
        peak = np.maximum(peak, np.abs(term))
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    else:
        raise ConicalEvaluationError("hypergeometric series did not converge", float(np.max(np.abs(term))))
    with np.errstate(divide="ignore"):
        pref = ((x - 1.0) / (x + 1.0)) ** (mu / 2.0) / special.gamma(1.0 + mu)
    residual = float(np.max(peak) * 1e-16)
    return pref * total, residual


def _quadrature_nodes(n):
    return gauss_legendre(n, 0.0, np.pi / 2)


def _mehler_dirichlet(mu, lambdas, xi, n):
    """Mehler--Dirichlet table ``out[i, j]`` at ``Lambda_i`` and ``x_j = cosh(xi_j)``."""
    theta, w = _quadrature_nodes(n)
    s = np.sin(theta)
    one_minus_s = np.cos(theta) ** 2 / (1.0 + s)
    xi = np.asarray(xi, dtype=float)[:, None]
    gap = 2.0 * np.sinh(xi * (1.0 + s) / 2.0) * np.sinh(xi * one_minus_s / 2.0)
    amp = w * xi * np.cos(theta) * gap ** (mu - 0.5)
    pref = np.sqrt(2.0 / np.pi) * np.exp(-special.gammaln(mu + 0.5)) * np.sinh(xi[:, 0]) ** (-mu)
    amp = amp * pref[:, None]
    return kernels.cosine_transform(lambdas, xi * s, amp)


def _node_count(lam_max, xi_max):
    return int(48 + np.ceil(1.5 * lam_max * xi_max + 4.0 * xi_max))


def conical_table(mu, lambdas, x):
    """Vectorized ``P^{-mu}_{-1/2 + i Lambda}(x)`` with shape ``(len(lambdas), len(x))``.

    Uses a fixed node count sized from ``max(Lambda) * max(arccosh x)``; the
    accuracy is the same as :func:`conical_p` but no per-point convergence
    check is made.  Use :func:`conical_p` when an error report is needed.
    """
    if int(mu) != mu or mu < 0:
        raise ValueError("mu must be a non-negative integer")
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(lambdas < 0) or np.any(x < 1):
        raise ValueError("need Lambda >= 0 and x >= 1")
    out = np.empty((lambdas.size, x.size))
    near = x <= SERIES_CROSSOVER
    if np.any(near):
        out[:, near], _ = _series(mu, lambdas, x[near])
    if np.any(~near):
        xi = np.arccosh(x[~near])
        n = _node_count(lambdas.max(initial=0.0), xi.max())
        out[:, ~near] = _mehler_dirichlet(mu, lambdas, xi, n)
    return out


def conical_p(args=None, *, mu=None, Lambda=None, x=None, rtol=1e-10):
    """Associated conical function ``P^{-mu}_{-1/2 + i Lambda}(x)`` for ``x >= 1``.

    Accepts either a :class:`ConicalArgs` or keyword arguments.  Raises
    :class:`ConicalEvaluationError` with the residual estimate when the series
    or the quadrature fails to converge to ``rtol`` of the local scale.
    """
    if args is None:
        args = ConicalArgs(mu, Lambda, x)
    mu, lam, x = int(args.mu), float(args.Lambda), float(args.x)
    if x == 1.0:
        return 1.0 if mu == 0 else 0.0
    if x <= SERIES_CROSSOVER:
        value, _ = _series(mu, [lam], [x])
        return float(value[0, 0])
    xi = np.arccosh(x)
    n = _node_count(lam, xi)
    coarse = _mehler_dirichlet(mu, [lam], [xi], n)[0, 0]
    fine = _mehler_dirichlet(mu, [lam], [xi], n + n // 2)[0, 0]
    # local scale: integral of |integrand|, guards against relative error at zeros
    scale = abs(_mehler_dirichlet(mu, [0.0], [xi], n)[0, 0])
    residual = abs(fine - coarse)
    if residual > rtol * max(scale, abs(fine)):
        raise ConicalEvaluationError("Mehler-Dirichlet quadrature did not converge", residual)
    return float(fine)
