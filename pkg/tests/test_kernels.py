import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from propertime import _kernels_py, kernels

compiled = pytest.mark.skipif("compiled" not in kernels.available_backends(), reason="extension not built")


@pytest.fixture
def backend():
    prev = kernels.active_backend()
    yield kernels.use_backend
    kernels.use_backend(prev)


def _both(backend, fn, *args):
    out = {}
    for name in kernels.available_backends():
        backend(name)
        out[name] = fn(*args)
    return out


def test_python_reference_against_loops(rng):
    f, x = rng.normal(size=5), rng.normal(size=7)
    c = rng.normal(size=(3, 7)) + 1j * rng.normal(size=(3, 7))
    ref = np.array([[sum(c[b, j] * np.exp(1j * f[a] * x[j]) for j in range(7)) for b in range(3)] for a in range(5)])
    got = _kernels_py.fourier_sum(f, x, np.ascontiguousarray(c.T))
    assert np.allclose(got, ref, rtol=1e-13, atol=1e-13)
    lam, ang, amp = rng.uniform(0, 3, 4), rng.uniform(0, 2, (6, 9)), rng.normal(size=(6, 9))
    ref2 = np.array([[np.sum(amp[j] * np.cos(l * ang[j])) for j in range(6)] for l in lam])
    assert np.allclose(_kernels_py.cosine_transform(lam, ang, amp), ref2, rtol=1e-13, atol=1e-13)


@compiled
@pytest.mark.parametrize("uniform", [True, False])
@pytest.mark.parametrize("rows", [1, 5, 64])
def test_fourier_sum_parity(backend, rng, uniform, rows):
    freqs = np.linspace(-40.0, 40.0, 801) if uniform else np.sort(rng.uniform(-40, 40, 801))
    nodes = rng.uniform(-1.5, 1.5, 300)
    coeffs = rng.normal(size=(rows, 300)) + 1j * rng.normal(size=(rows, 300))
    out = _both(backend, kernels.fourier_sum, freqs, nodes, coeffs)
    scale = np.max(np.abs(out["python"]))
    assert np.max(np.abs(out["compiled"] - out["python"])) < 1e-12 * scale


@compiled
@given(st.integers(1, 300), st.floats(-50, 50), st.floats(0.001, 2.0))
def test_fourier_sum_parity_property(n, start, step):
    rng = np.random.default_rng(n)
    freqs = start + step * np.arange(n)
    nodes = rng.uniform(-2, 2, 17)
    coeffs = rng.normal(size=(2, 17)) + 0j
    prev = kernels.use_backend("python")
    try:
        ref = kernels.fourier_sum(freqs, nodes, coeffs)
        kernels.use_backend("compiled")
        got = kernels.fourier_sum(freqs, nodes, coeffs)
    finally:
        kernels.use_backend(prev)
    assert np.max(np.abs(got - ref)) <= 1e-11 * max(1.0, np.max(np.abs(ref)))


@compiled
def test_cosine_transform_parity(backend, rng):
    lam = np.linspace(0, 8, 64)
    ang = rng.uniform(0, 3, (40, 90))
    amp = rng.normal(size=(40, 90))
    out = _both(backend, kernels.cosine_transform, lam, ang, amp)
    assert np.max(np.abs(out["compiled"] - out["python"])) < 1e-12 * np.max(np.abs(out["python"]))


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")


def test_default_backend_is_compiled_when_built():
    expected = "compiled" if "compiled" in kernels.available_backends() else "python"
    assert kernels.active_backend() == expected
