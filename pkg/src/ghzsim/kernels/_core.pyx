# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""C kernels for density-matrix gate and channel application.

Same contracts as ``_numpy_backend``; operands are register positions with
position 0 on the most significant index bit.  All updates are in place on a
C-contiguous complex128 matrix and return the input array.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"

ctypedef double complex cplx


cdef inline Py_ssize_t _insert_bit(Py_ssize_t idx, Py_ssize_t bit) nogil:
    # Spread idx so that index bit `bit` is zero: room for masked iteration.
    cdef Py_ssize_t low = idx & ((<Py_ssize_t> 1 << bit) - 1)
    return ((idx >> bit) << (bit + 1)) | low


def apply_unitary_1q(cnp.ndarray rho_in, int n, int pos, cnp.ndarray u_in):
    cdef cnp.ndarray[cplx, ndim=2, mode="c"] rho = np.ascontiguousarray(
        rho_in, dtype=np.complex128
    )
    cdef cnp.ndarray[cplx, ndim=2] u = np.ascontiguousarray(u_in, dtype=np.complex128)
    cdef Py_ssize_t d = (<Py_ssize_t> 1) << n
    cdef Py_ssize_t bit = n - 1 - pos
    cdef Py_ssize_t mask = (<Py_ssize_t> 1) << bit
    cdef cplx u00 = u[0, 0], u01 = u[0, 1], u10 = u[1, 0], u11 = u[1, 1]
    cdef cplx c00 = u00.conjugate(), c01 = u01.conjugate()
    cdef cplx c10 = u10.conjugate(), c11 = u11.conjugate()
    cdef Py_ssize_t blk, i0, i1, j
    cdef cplx a, b
    with nogil:
        # rows: rho <- U rho; both target rows are contiguous
        for blk in range(d >> 1):
            i0 = _insert_bit(blk, bit)
            i1 = i0 | mask
            for j in range(d):
                a = rho[i0, j]
                b = rho[i1, j]
                rho[i0, j] = u00 * a + u01 * b
                rho[i1, j] = u10 * a + u11 * b
        # columns: rho <- rho U^dagger; walk pairs inside each row so the
        # access pattern stays cache-friendly
        for j in range(d):
            for blk in range(d >> 1):
                i0 = _insert_bit(blk, bit)
                i1 = i0 | mask
                a = rho[j, i0]
                b = rho[j, i1]
                rho[j, i0] = a * c00 + b * c01
                rho[j, i1] = a * c10 + b * c11
    return np.asarray(rho)


def apply_unitary_2q(cnp.ndarray rho_in, int n, int pos_a, int pos_b, cnp.ndarray u_in):
    cdef cnp.ndarray[cplx, ndim=2, mode="c"] rho = np.ascontiguousarray(
        rho_in, dtype=np.complex128
    )
    cdef cnp.ndarray[cplx, ndim=2] u = np.ascontiguousarray(u_in, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=2] uc = np.conj(u)
    cdef Py_ssize_t d = (<Py_ssize_t> 1) << n
    cdef Py_ssize_t bit_a = n - 1 - pos_a
    cdef Py_ssize_t bit_b = n - 1 - pos_b
    cdef Py_ssize_t lo_bit = min(bit_a, bit_b)
    cdef Py_ssize_t hi_bit = max(bit_a, bit_b)
    cdef Py_ssize_t mask_a = (<Py_ssize_t> 1) << bit_a
    cdef Py_ssize_t mask_b = (<Py_ssize_t> 1) << bit_b
    cdef Py_ssize_t blk, base, j, s, t
    cdef Py_ssize_t idx[4]
    cdef cplx vec[4]
    cdef cplx acc
    cdef cplx um[4][4]
    cdef cplx umc[4][4]
    for s in range(4):
        for t in range(4):
            um[s][t] = u[s, t]
            umc[s][t] = uc[s, t]
    with nogil:
        # rows: rho <- U rho
        for blk in range(d >> 2):
            base = _insert_bit(_insert_bit(blk, lo_bit), hi_bit)
            # local 2-bit index: bit 1 <-> qubit a, bit 0 <-> qubit b
            idx[0] = base
            idx[1] = base | mask_b
            idx[2] = base | mask_a
            idx[3] = base | mask_a | mask_b
            for j in range(d):
                for s in range(4):
                    vec[s] = rho[idx[s], j]
                for s in range(4):
                    acc = 0
                    for t in range(4):
                        acc = acc + um[s][t] * vec[t]
                    rho[idx[s], j] = acc
        # columns: rho <- rho U^dagger, pairs walked inside each row
        for j in range(d):
            for blk in range(d >> 2):
                base = _insert_bit(_insert_bit(blk, lo_bit), hi_bit)
                idx[0] = base
                idx[1] = base | mask_b
                idx[2] = base | mask_a
                idx[3] = base | mask_a | mask_b
                for s in range(4):
                    vec[s] = rho[j, idx[s]]
                for s in range(4):
                    acc = 0
                    for t in range(4):
                        acc = acc + vec[t] * umc[s][t]
                    rho[j, idx[s]] = acc
    return np.asarray(rho)


def apply_relax_dephase_1q(
    cnp.ndarray rho_in, int n, int pos, double gamma, double offdiag_factor
):
    cdef cnp.ndarray[cplx, ndim=2, mode="c"] rho = np.ascontiguousarray(
        rho_in, dtype=np.complex128
    )
    cdef Py_ssize_t d = (<Py_ssize_t> 1) << n
    cdef Py_ssize_t bit = n - 1 - pos
    cdef Py_ssize_t mask = (<Py_ssize_t> 1) << bit
    cdef Py_ssize_t rblk, cblk, i0, i1, j0, j1
    with nogil:
        for rblk in range(d >> 1):
            i0 = _insert_bit(rblk, bit)
            i1 = i0 | mask
            for cblk in range(d >> 1):
                j0 = _insert_bit(cblk, bit)
                j1 = j0 | mask
                rho[i0, j0] = rho[i0, j0] + gamma * rho[i1, j1]
                rho[i1, j1] = rho[i1, j1] * (1.0 - gamma)
                rho[i0, j1] = rho[i0, j1] * offdiag_factor
                rho[i1, j0] = rho[i1, j0] * offdiag_factor
    return np.asarray(rho)


def apply_depolarize_1q(cnp.ndarray rho_in, int n, int pos, double p):
    cdef cnp.ndarray[cplx, ndim=2, mode="c"] rho = np.ascontiguousarray(
        rho_in, dtype=np.complex128
    )
    cdef Py_ssize_t d = (<Py_ssize_t> 1) << n
    cdef Py_ssize_t bit = n - 1 - pos
    cdef Py_ssize_t mask = (<Py_ssize_t> 1) << bit
    cdef Py_ssize_t rblk, cblk, i0, i1, j0, j1
    cdef double q = 1.0 - p
    cdef cplx mean
    with nogil:
        for rblk in range(d >> 1):
            i0 = _insert_bit(rblk, bit)
            i1 = i0 | mask
            for cblk in range(d >> 1):
                j0 = _insert_bit(cblk, bit)
                j1 = j0 | mask
                mean = 0.5 * (rho[i0, j0] + rho[i1, j1])
                rho[i0, j0] = q * rho[i0, j0] + p * mean
                rho[i1, j1] = q * rho[i1, j1] + p * mean
                rho[i0, j1] = q * rho[i0, j1]
                rho[i1, j0] = q * rho[i1, j0]
    return np.asarray(rho)


def apply_depolarize_2q(cnp.ndarray rho_in, int n, int pos_a, int pos_b, double p):
    cdef cnp.ndarray[cplx, ndim=2, mode="c"] rho = np.ascontiguousarray(
        rho_in, dtype=np.complex128
    )
    cdef Py_ssize_t d = (<Py_ssize_t> 1) << n
    cdef Py_ssize_t bit_a = n - 1 - pos_a
    cdef Py_ssize_t bit_b = n - 1 - pos_b
    cdef Py_ssize_t lo_bit = min(bit_a, bit_b)
    cdef Py_ssize_t hi_bit = max(bit_a, bit_b)
    cdef Py_ssize_t mask_a = (<Py_ssize_t> 1) << bit_a
    cdef Py_ssize_t mask_b = (<Py_ssize_t> 1) << bit_b
    cdef Py_ssize_t rblk, cblk, rbase, cbase, s, t
    cdef Py_ssize_t ri[4]
    cdef Py_ssize_t ci[4]
    cdef double q = 1.0 - p
    cdef cplx tr
    with nogil:
        for rblk in range(d >> 2):
            rbase = _insert_bit(_insert_bit(rblk, lo_bit), hi_bit)
            ri[0] = rbase
            ri[1] = rbase | mask_b
            ri[2] = rbase | mask_a
            ri[3] = rbase | mask_a | mask_b
            for cblk in range(d >> 2):
                cbase = _insert_bit(_insert_bit(cblk, lo_bit), hi_bit)
                ci[0] = cbase
                ci[1] = cbase | mask_b
                ci[2] = cbase | mask_a
                ci[3] = cbase | mask_a | mask_b
                tr = 0
                for s in range(4):
                    tr = tr + rho[ri[s], ci[s]]
                tr = 0.25 * tr
                for s in range(4):
                    for t in range(4):
                        if s == t:
                            rho[ri[s], ci[t]] = q * rho[ri[s], ci[t]] + p * tr
                        else:
                            rho[ri[s], ci[t]] = q * rho[ri[s], ci[t]]
    return np.asarray(rho)
