"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the numpy
implementation is used.  :func:`use_backend` switches explicitly, which the
benchmark and the backend-parity tests rely on.
"""
import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_active = "compiled" if _compiled is not None else "python"


def available_backends():
    return sorted(_BACKENDS)


def active_backend():
    return _active


def use_backend(name):
    """Select ``"compiled"`` or ``"python"``; returns the previous backend name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    previous, _active = _active, name
    return previous


def cosine_transform(lambdas, angles, amplitudes):
    """Return ``out[i, j] = sum_k amplitudes[j, k] cos(lambdas[i] angles[j, k])``."""
    return _BACKENDS[_active].cosine_transform(
        np.ascontiguousarray(lambdas, dtype=float),
        np.ascontiguousarray(angles, dtype=float),
        np.ascontiguousarray(amplitudes, dtype=float),
    )


def fourier_sum(freqs, nodes, coeffs):
    """Return ``out[a, b] = sum_j coeffs[b, j] exp(i freqs[a] nodes[j])``."""
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    return _BACKENDS[_active].fourier_sum(
        np.ascontiguousarray(np.atleast_1d(freqs), dtype=float),
        np.ascontiguousarray(nodes, dtype=float),
        np.ascontiguousarray(coeffs.T),
    )
