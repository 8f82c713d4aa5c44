# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled geodesic kernels for surfaces of revolution.

Mirrors ``_revol_fallback`` (same RK4 stepping, step counts and shooting
schedule) so both backends agree to float roundoff.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, ceil, cos, fabs, fmod, hypot, sin, sqrt

cnp.import_array()

BACKEND_NAME = "cython"

PROFILE_PLANE = 0
PROFILE_PARABOLOID = 1
PROFILE_DOME = 2

DEF G_FLOOR = 1e-300

cdef double M_PI = 3.141592653589793238462643383279502884


cdef inline void _coeffs1(int pid, double q, double* e, double* ep,
                          double* g, double* gp, double* k) nogil:
    cdef double w
    if pid == 0:
        e[0] = 1.0; ep[0] = 0.0
        g[0] = q * q; gp[0] = 2.0 * q
        k[0] = 0.0
    elif pid == 1:
        w = 1.0 + 4.0 * q * q
        e[0] = w; ep[0] = 8.0 * q
        g[0] = q * q; gp[0] = 2.0 * q
        k[0] = 4.0 / (w * w)
    else:
        e[0] = 1.0; ep[0] = 0.0
        g[0] = sin(q) * sin(q); gp[0] = sin(2.0 * q)
        k[0] = 1.0


cdef inline void _rhs1(int pid, double* s, double* out) nogil:
    cdef double e, ep, g, gp, k
    _coeffs1(pid, s[0], &e, &ep, &g, &gp, &k)
    out[0] = s[2]
    out[1] = s[3]
    out[2] = (-ep * s[2] * s[2] + gp * s[3] * s[3]) / (2.0 * e)
    if s[3] == 0.0:
        out[3] = 0.0
    else:
        out[3] = -(gp / (g if g > G_FLOOR else G_FLOOR)) * s[2] * s[3]
    out[4] = s[5]
    out[5] = -k * s[4]


cdef inline void _rk4_1(int pid, double* s, double dt, int nsteps) nogil:
    cdef double k1[6]
    cdef double k2[6]
    cdef double k3[6]
    cdef double k4[6]
    cdef double tmp[6]
    cdef int i, step
    for step in range(nsteps):
        _rhs1(pid, s, k1)
        for i in range(6):
            tmp[i] = s[i] + 0.5 * dt * k1[i]
        _rhs1(pid, tmp, k2)
        for i in range(6):
            tmp[i] = s[i] + 0.5 * dt * k2[i]
        _rhs1(pid, tmp, k3)
        for i in range(6):
            tmp[i] = s[i] + dt * k3[i]
        _rhs1(pid, tmp, k4)
        for i in range(6):
            s[i] = s[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


cdef inline double _wrap1(double a) nogil:
    cdef double out = fmod(a + M_PI, 2.0 * M_PI)
    if out < 0:
        out += 2.0 * M_PI
    out -= M_PI
    if out <= -M_PI:
        out = M_PI
    return out


def initial_state(int pid, double q0, double phi0, betas):
    betas = np.ascontiguousarray(betas, dtype=np.float64)
    cdef double[:] b = betas
    cdef Py_ssize_t m = b.shape[0], i
    out_arr = np.zeros((m, 6), dtype=np.float64)
    cdef double[:, :] out = out_arr
    cdef double e, ep, g, gp, k
    _coeffs1(pid, q0, &e, &ep, &g, &gp, &k)
    if g < G_FLOOR:
        g = G_FLOOR
    for i in range(m):
        out[i, 0] = q0
        out[i, 1] = phi0
        out[i, 2] = cos(b[i]) / sqrt(e)
        out[i, 3] = sin(b[i]) / sqrt(g)
        out[i, 5] = 1.0
    return out_arr


def advance(int pid, state, lengths, int nsteps):
    state = np.ascontiguousarray(state, dtype=np.float64)
    lengths = np.ascontiguousarray(lengths, dtype=np.float64)
    out_arr = state.copy()
    cdef double[:, :] out = out_arr
    cdef double[:] ln = lengths
    cdef Py_ssize_t m = out.shape[0], i
    cdef double s[6]
    cdef int j
    for i in range(m):
        for j in range(6):
            s[j] = out[i, j]
        _rk4_1(pid, s, ln[i] / nsteps, nsteps)
        for j in range(6):
            out[i, j] = s[j]
    return out_arr


def ray_grid(int pid, double q0, double phi0, betas, tgrid, double h_target):
    betas = np.ascontiguousarray(betas, dtype=np.float64)
    tgrid = np.ascontiguousarray(tgrid, dtype=np.float64)
    cdef double[:] b = betas
    cdef double[:] tg = tgrid
    cdef Py_ssize_t m = b.shape[0], k = tg.shape[0], i, gi
    out_arr = np.empty((k, m, 6), dtype=np.float64)
    cdef double[:, :, :] out = out_arr
    start = initial_state(pid, q0, phi0, betas)
    cdef double[:, :] st = start
    cdef double s[6]
    cdef double t_prev, span
    cdef int nsteps, j
    for i in range(m):
        for j in range(6):
            s[j] = st[i, j]
        t_prev = 0.0
        for gi in range(k):
            span = tg[gi] - t_prev
            if span > 0:
                nsteps = <int>ceil(span / h_target)
                if nsteps < 1:
                    nsteps = 1
                _rk4_1(pid, s, span / nsteps, nsteps)
            for j in range(6):
                out[gi, i, j] = s[j]
            t_prev = tg[gi]
    return out_arr


cdef inline double _residual1(int pid, double q, double phi, double tq,
                              double tphi) nogil:
    cdef double e, ep, g, gp, k, dq, dphi
    _coeffs1(pid, tq, &e, &ep, &g, &gp, &k)
    dq = q - tq
    dphi = _wrap1(phi - tphi)
    return sqrt(e * dq * dq + g * dphi * dphi)


cdef inline void _endpoint1(int pid, double q0, double phi0, double beta,
                            double tlen, double h_target,
                            double* q_out, double* phi_out) nogil:
    cdef double s[6]
    cdef double e, ep, g, gp, k
    cdef int nsteps
    _coeffs1(pid, q0, &e, &ep, &g, &gp, &k)
    if g < G_FLOOR:
        g = G_FLOOR
    s[0] = q0; s[1] = phi0
    s[2] = cos(beta) / sqrt(e)
    s[3] = sin(beta) / sqrt(g)
    s[4] = 0.0; s[5] = 1.0
    nsteps = <int>ceil(tlen / h_target)
    if nsteps < 8:
        nsteps = 8
    _rk4_1(pid, s, tlen / nsteps, nsteps)
    q_out[0] = s[0]
    phi_out[0] = s[1]


def shoot(int pid, double q0, double phi0, tq, tphi, double arc0, arcs,
          double h_target, int fan=24, int newton_iters=12):
    tq = np.ascontiguousarray(tq, dtype=np.float64)
    tphi = np.ascontiguousarray(tphi, dtype=np.float64)
    arcs = np.ascontiguousarray(arcs, dtype=np.float64)
    cdef double[:] tq_v = tq
    cdef double[:] tphi_v = tphi
    cdef double[:] arcs_v = arcs
    cdef Py_ssize_t m = tq_v.shape[0], i
    beta_arr = np.empty(m, dtype=np.float64)
    tlen_arr = np.empty(m, dtype=np.float64)
    res_arr = np.empty(m, dtype=np.float64)
    cdef double[:] beta_o = beta_arr
    cdef double[:] tlen_o = tlen_arr
    cdef double[:] res_o = res_arr

    cdef double e0, ep0, g0, gp0, k0
    _coeffs1(pid, q0, &e0, &ep0, &g0, &gp0, &k0)
    if g0 < G_FLOOR:
        g0 = G_FLOOR

    cdef double dphi_t, dx, dy, l_est, beta0, l_safe, l_max
    cdef double best_beta, best_t, best_res, betac, t_acc, res
    cdef double s[6]
    cdef double fd = 1e-7
    cdef double q_c, phi_c, q_b, phi_b, q_t, phi_t
    cdef double rq, rphi, j11, j12, j21, j22, det, dbeta, dtl, cap, dt_step
    cdef double off, dt
    cdef int nsteps, fi, it, stp
    cdef double e, ep, g, gp, k

    for i in range(m):
        dphi_t = _wrap1(tphi_v[i] - phi0)
        dx = arcs_v[i] - arc0
        dy = sqrt(g0) * dphi_t
        l_est = hypot(dx, dy)
        if l_est < 1e-13:
            beta_o[i] = 0.0
            tlen_o[i] = 0.0
            res_o[i] = 0.0
            continue
        beta0 = atan2(dy, dx)
        l_safe = l_est
        l_max = 2.0 * l_safe
        nsteps = <int>ceil(l_max / h_target)
        if nsteps < 16:
            nsteps = 16
        best_res = 1e308
        best_beta = beta0
        best_t = l_safe
        for fi in range(fan):
            off = -0.75 * M_PI + 1.5 * M_PI * fi / (fan - 1.0)
            betac = beta0 + off
            _coeffs1(pid, q0, &e, &ep, &g, &gp, &k)
            if g < G_FLOOR:
                g = G_FLOOR
            s[0] = q0; s[1] = phi0
            s[2] = cos(betac) / sqrt(e)
            s[3] = sin(betac) / sqrt(g)
            s[4] = 0.0; s[5] = 1.0
            dt = l_max / nsteps
            t_acc = 0.0
            for stp in range(nsteps):
                _rk4_1(pid, s, dt, 1)
                t_acc += dt
                res = _residual1(pid, s[0], s[1], tq_v[i], tphi_v[i])
                if res < best_res:
                    best_res = res
                    best_beta = betac
                    best_t = t_acc
        betac = best_beta
        t_acc = best_t
        for it in range(newton_iters):
            _endpoint1(pid, q0, phi0, betac, t_acc, h_target, &q_c, &phi_c)
            rq = q_c - tq_v[i]
            rphi = _wrap1(phi_c - tphi_v[i])
            _endpoint1(pid, q0, phi0, betac + fd, t_acc, h_target, &q_b, &phi_b)
            dt_step = t_acc * fd + fd * 1e-9
            _endpoint1(pid, q0, phi0, betac, t_acc * (1.0 + fd) + fd * 1e-9,
                       h_target, &q_t, &phi_t)
            j11 = (q_b - q_c) / fd
            j21 = _wrap1(phi_b - phi_c) / fd
            j12 = (q_t - q_c) / dt_step
            j22 = _wrap1(phi_t - phi_c) / dt_step
            det = j11 * j22 - j12 * j21
            if fabs(det) < 1e-30:
                det = 1e-30
            dbeta = -(j22 * rq - j12 * rphi) / det
            dtl = -(-j21 * rq + j11 * rphi) / det
            cap = 0.5 * (l_safe if l_safe > 1e-6 else 1e-6)
            if dbeta > 0.5:
                dbeta = 0.5
            elif dbeta < -0.5:
                dbeta = -0.5
            if dtl > cap:
                dtl = cap
            elif dtl < -cap:
                dtl = -cap
            betac += dbeta
            t_acc += dtl
            if t_acc < 0.0:
                t_acc = 0.0
        _endpoint1(pid, q0, phi0, betac, t_acc, h_target, &q_c, &phi_c)
        beta_o[i] = betac
        tlen_o[i] = t_acc
        res_o[i] = _residual1(pid, q_c, phi_c, tq_v[i], tphi_v[i])
    return beta_arr, tlen_arr, res_arr
