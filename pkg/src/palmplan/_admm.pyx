# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled ADMM iteration kernel; mirrors _admm_py.run exactly.

The dense matrices are small (tens of rows), so plain loops beat BLAS
dispatch overhead by a wide margin here.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, isfinite

STATUS_MAX_ITER = 0
STATUS_SOLVED = 1
STATUS_PRIMAL_INFEASIBLE = 2
STATUS_DUAL_INFEASIBLE = 3


cdef void _matvec(double[:, ::1] m, double[::1] v, double[::1] out) noexcept:
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(m.shape[0]):
        acc = 0.0
        for j in range(m.shape[1]):
            acc += m[i, j] * v[j]
        out[i] = acc


cdef void _matvec_t(double[:, ::1] m, double[::1] v, double[::1] out) noexcept:
    cdef Py_ssize_t i, j
    for j in range(m.shape[1]):
        out[j] = 0.0
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            out[j] += m[i, j] * v[i]


cdef double _max_abs(double[::1] v) noexcept:
    cdef Py_ssize_t i
    cdef double best = 0.0, a
    for i in range(v.shape[0]):
        a = fabs(v[i])
        if a > best:
            best = a
    return best


def run(double[:, ::1] kinv, double[:, ::1] p_mat, double[::1] q,
        double[:, ::1] a_mat, double[::1] l, double[::1] u, double[::1] rho,
        double sigma, double alpha, double[::1] x0, double[::1] z0,
        double[::1] y0, int max_iter, int check_every, double eps_abs,
        double eps_rel, double eps_inf):
    """Run over-relaxed ADMM; returns (x, z, y, status, iters, r_prim, r_dual)."""
    cdef Py_ssize_t n = q.shape[0]
    cdef Py_ssize_t m = l.shape[0]
    cdef cnp.ndarray xa = np.array(x0, dtype=np.float64)
    cdef cnp.ndarray za = np.array(z0, dtype=np.float64)
    cdef cnp.ndarray ya = np.array(y0, dtype=np.float64)
    cdef double[::1] x = xa
    cdef double[::1] z = za
    cdef double[::1] y = ya
    cdef double[::1] rhs = np.zeros(n)
    cdef double[::1] x_t = np.zeros(n)
    cdef double[::1] ax_t = np.zeros(m)
    cdef double[::1] work_m = np.zeros(m)
    cdef double[::1] work_n = np.zeros(n)
    cdef double[::1] px = np.zeros(n)
    cdef double[::1] aty = np.zeros(n)
    cdef double[::1] y_chk = ya.copy()
    cdef double[::1] x_chk = xa.copy()
    cdef double r_prim = INFINITY, r_dual = INFINITY
    cdef double eps_p, eps_d, z_bar, acc, val, ndy, ndx, total, dqx
    cdef Py_ssize_t i, j
    cdef int it = 0, status
    cdef bint bad, ok

    for it in range(1, max_iter + 1):
        # rhs = sigma*x - q + A'(rho*z - y)
        for i in range(m):
            work_m[i] = rho[i] * z[i] - y[i]
        _matvec_t(a_mat, work_m, rhs)
        for j in range(n):
            rhs[j] += sigma * x[j] - q[j]
        _matvec(kinv, rhs, x_t)
        _matvec(a_mat, x_t, ax_t)
        for j in range(n):
            x[j] = alpha * x_t[j] + (1.0 - alpha) * x[j]
        for i in range(m):
            z_bar = alpha * ax_t[i] + (1.0 - alpha) * z[i]
            val = z_bar + y[i] / rho[i]
            if val < l[i]:
                val = l[i]
            elif val > u[i]:
                val = u[i]
            y[i] = y[i] + rho[i] * (z_bar - val)
            z[i] = val

        if it % check_every == 0 or it == max_iter:
            _matvec(a_mat, x, work_m)      # Ax
            _matvec(p_mat, x, px)
            _matvec_t(a_mat, y, aty)
            r_prim = 0.0
            for i in range(m):
                val = fabs(work_m[i] - z[i])
                if val > r_prim:
                    r_prim = val
            r_dual = 0.0
            for j in range(n):
                val = fabs(px[j] + q[j] + aty[j])
                if val > r_dual:
                    r_dual = val
            eps_p = eps_abs + eps_rel * max(_max_abs(work_m), _max_abs(z))
            eps_d = eps_abs + eps_rel * max(_max_abs(px), max(_max_abs(q), _max_abs(aty)))
            bad = False
            for j in range(n):
                if not isfinite(x[j]):
                    bad = True
                    break
            if bad:
                return xa, za, ya, STATUS_MAX_ITER, it, r_prim, r_dual
            if r_prim <= eps_p and r_dual <= eps_d:
                return xa, za, ya, STATUS_SOLVED, it, r_prim, r_dual

            # primal infeasibility certificate from the dual increment
            ndy = 0.0
            for i in range(m):
                work_m[i] = y[i] - y_chk[i]
                val = fabs(work_m[i])
                if val > ndy:
                    ndy = val
            if ndy > 1e-12:
                _matvec_t(a_mat, work_m, work_n)
                if _max_abs(work_n) <= eps_inf * ndy:
                    total = 0.0
                    ok = True
                    for i in range(m):
                        if work_m[i] > 0.0:
                            if u[i] == INFINITY:
                                ok = False
                                break
                            total += u[i] * work_m[i]
                        elif work_m[i] < 0.0:
                            if l[i] == -INFINITY:
                                ok = False
                                break
                            total += l[i] * work_m[i]
                    if ok and total <= -eps_inf * ndy:
                        return xa, za, ya, STATUS_PRIMAL_INFEASIBLE, it, r_prim, r_dual

            # dual infeasibility certificate from the primal increment
            ndx = 0.0
            dqx = 0.0
            for j in range(n):
                work_n[j] = x[j] - x_chk[j]
                dqx += q[j] * work_n[j]
                val = fabs(work_n[j])
                if val > ndx:
                    ndx = val
            if ndx > 1e-12 and dqx < -eps_inf * ndx:
                _matvec(p_mat, work_n, x_t)
                if _max_abs(x_t) <= eps_inf * ndx:
                    _matvec(a_mat, work_n, work_m)
                    ok = True
                    for i in range(m):
                        if work_m[i] > eps_inf * ndx and u[i] != INFINITY:
                            ok = False
                            break
                        if work_m[i] < -eps_inf * ndx and l[i] != -INFINITY:
                            ok = False
                            break
                    if ok:
                        return xa, za, ya, STATUS_DUAL_INFEASIBLE, it, r_prim, r_dual
            for i in range(m):
                y_chk[i] = y[i]
            for j in range(n):
                x_chk[j] = x[j]
    return xa, za, ya, STATUS_MAX_ITER, it, r_prim, r_dual
