# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels (float64 states only)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def explicit_step(const double[:, ::1] D, const double[:, ::1] A,
                  const double[:, ::1] Ahat, const double[:, ::1] R,
                  const double[:, ::1] Rhat, const double[:, ::1] V,
                  const double[:, ::1] FV, const double[:, ::1] FdV,
                  double dt, F, Fdot):
    cdef Py_ssize_t s = V.shape[0], d = V.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double dt2 = dt * dt, acc
    Vn_arr = np.empty((s, d))
    Fn_arr = np.empty((s, d))
    Fdn_arr = np.empty((s, d))
    cdef double[:, ::1] Vn = Vn_arr
    cdef double[:, ::1] Fn = Fn_arr
    cdef double[:, ::1] Fdn = Fdn_arr
    cdef double[::1] f_i, fd_i
    # increment form: unit row sums of D are assumed, V_1 is added last
    for i in range(s):
        for k in range(d):
            acc = 0.0
            for j in range(s):
                acc += D[i, j] * (V[j, k] - V[0, k]) + dt * A[i, j] * FV[j, k] \
                    + dt2 * Ahat[i, j] * FdV[j, k]
            for j in range(i):
                acc += dt * R[i, j] * Fn[j, k] + dt2 * Rhat[i, j] * Fdn[j, k]
            Vn[i, k] = V[0, k] + acc
        row = Vn_arr[i].copy()
        f_i = np.ascontiguousarray(F(row), dtype=np.float64)
        fd_i = np.ascontiguousarray(Fdot(row), dtype=np.float64)
        for k in range(d):
            Fn[i, k] = f_i[k]
            Fdn[i, k] = fd_i[k]
    return Vn_arr, Fn_arr, Fdn_arr


def upwind_F(const double[::1] u, double dx):
    cdef Py_ssize_t n = u.shape[0], j
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    out[0] = -(u[0] - u[n - 1]) / dx
    for j in range(1, n):
        out[j] = -(u[j] - u[j - 1]) / dx
    return out_arr


def upwind_Fdot(const double[::1] u, double dx):
    cdef Py_ssize_t n = u.shape[0], j
    cdef double dx2 = dx * dx
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    out[0] = (u[0] - 2.0 * u[n - 1] + u[n - 2]) / dx2
    out[1] = (u[1] - 2.0 * u[0] + u[n - 1]) / dx2
    for j in range(2, n):
        out[j] = (u[j] - 2.0 * u[j - 1] + u[j - 2]) / dx2
    return out_arr


def total_variation(const double[::1] u):
    cdef Py_ssize_t n = u.shape[0], j
    cdef double tv = fabs(u[0] - u[n - 1])
    for j in range(n - 1):
        tv += fabs(u[j + 1] - u[j])
    return tv
