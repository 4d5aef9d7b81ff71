"""Pure-NumPy density-matrix kernels; reference semantics for the C core.

All functions take the density matrix as a (2^n, 2^n) complex array plus the
register position of the operand qubit(s) (position 0 is the most significant
index bit) and return the updated matrix.  They may or may not mutate their
input; callers must use the return value.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def _row_col_view(rho: np.ndarray, n: int, pos: int) -> np.ndarray:
    """6-axis view splitting the row and column index at one qubit."""
    high = 1 << pos
    low = 1 << (n - 1 - pos)
    return rho.reshape(high, 2, low, high, 2, low)


def apply_unitary_1q(rho: np.ndarray, n: int, pos: int, u: np.ndarray) -> np.ndarray:
    t = rho.reshape((2,) * (2 * n))
    t = np.moveaxis(np.tensordot(u, t, axes=([1], [pos])), 0, pos)
    t = np.moveaxis(np.tensordot(np.conj(u), t, axes=([1], [n + pos])), 0, n + pos)
    return np.ascontiguousarray(t).reshape(rho.shape)


def apply_unitary_2q(
    rho: np.ndarray, n: int, pos_a: int, pos_b: int, u: np.ndarray
) -> np.ndarray:
    t = rho.reshape((2,) * (2 * n))
    u4 = u.reshape(2, 2, 2, 2)
    t = np.moveaxis(
        np.tensordot(u4, t, axes=([2, 3], [pos_a, pos_b])), (0, 1), (pos_a, pos_b)
    )
    t = np.moveaxis(
        np.tensordot(np.conj(u4), t, axes=([2, 3], [n + pos_a, n + pos_b])),
        (0, 1),
        (n + pos_a, n + pos_b),
    )
    return np.ascontiguousarray(t).reshape(rho.shape)


def apply_relax_dephase_1q(
    rho: np.ndarray, n: int, pos: int, gamma: float, offdiag_factor: float
) -> np.ndarray:
    """Amplitude damping (strength ``gamma``) composed with pure dephasing.

    ``offdiag_factor`` is the total factor on the qubit's off-diagonal
    blocks, sqrt(1 - gamma) * exp(-t/Tphi).
    """
    rho = np.ascontiguousarray(rho)
    v = _row_col_view(rho, n, pos)
    v[:, 0, :, :, 0, :] += gamma * v[:, 1, :, :, 1, :]
    v[:, 1, :, :, 1, :] *= 1.0 - gamma
    v[:, 0, :, :, 1, :] *= offdiag_factor
    v[:, 1, :, :, 0, :] *= offdiag_factor
    return rho


def apply_depolarize_1q(rho: np.ndarray, n: int, pos: int, p: float) -> np.ndarray:
    """With probability ``p`` replace the qubit by the maximally mixed state."""
    rho = np.ascontiguousarray(rho)
    v = _row_col_view(rho, n, pos)
    mean = 0.5 * (v[:, 0, :, :, 0, :] + v[:, 1, :, :, 1, :])
    v[:, 0, :, :, 0, :] *= 1.0 - p
    v[:, 0, :, :, 0, :] += p * mean
    v[:, 1, :, :, 1, :] *= 1.0 - p
    v[:, 1, :, :, 1, :] += p * mean
    v[:, 0, :, :, 1, :] *= 1.0 - p
    v[:, 1, :, :, 0, :] *= 1.0 - p
    return rho


def apply_depolarize_2q(
    rho: np.ndarray, n: int, pos_a: int, pos_b: int, p: float
) -> np.ndarray:
    """With probability ``p`` replace the qubit pair by the maximally mixed state."""
    rho = np.ascontiguousarray(rho)
    pa, pb = sorted((pos_a, pos_b))
    a = 1 << pa
    b = 1 << (pb - pa - 1)
    c = 1 << (n - 1 - pb)
    v = rho.reshape(a, 2, b, 2, c, a, 2, b, 2, c)
    tr = (
        v[:, 0, :, 0, :, :, 0, :, 0, :]
        + v[:, 0, :, 1, :, :, 0, :, 1, :]
        + v[:, 1, :, 0, :, :, 1, :, 0, :]
        + v[:, 1, :, 1, :, :, 1, :, 1, :]
    )
    rho *= 1.0 - p
    for s1 in (0, 1):
        for s2 in (0, 1):
            v[:, s1, :, s2, :, :, s1, :, s2, :] += (p / 4.0) * tr
    return rho
