"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np


def cosine_transform(lambdas, angles, amplitudes):
    """out[i, j] = sum_k amplitudes[j, k] * cos(lambdas[i] * angles[j, k])."""
    lambdas = np.ascontiguousarray(lambdas, dtype=float)
    angles = np.ascontiguousarray(angles, dtype=float)
    amplitudes = np.ascontiguousarray(amplitudes, dtype=float)
    out = np.empty((lambdas.size, angles.shape[0]))
    for j in range(angles.shape[0]):
        out[:, j] = np.cos(np.multiply.outer(lambdas, angles[j])) @ amplitudes[j]
    return out


def fourier_sum(freqs, nodes, coeffs_t, block=256):
    """out[a, b] = sum_j coeffs_t[j, b] * exp(1j * freqs[a] * nodes[j])."""
    freqs = np.ascontiguousarray(freqs, dtype=float)
    nodes = np.ascontiguousarray(nodes, dtype=float)
    coeffs_t = np.ascontiguousarray(coeffs_t, dtype=complex)
    out = np.empty((freqs.size, coeffs_t.shape[1]), dtype=complex)
    for start in range(0, freqs.size, block):
        phase = np.exp(1j * np.multiply.outer(freqs[start:start + block], nodes))
        out[start:start + block] = phase @ coeffs_t
    return out
