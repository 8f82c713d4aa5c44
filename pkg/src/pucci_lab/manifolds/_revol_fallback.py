"""Pure-numpy geodesic kernels for surfaces of revolution.

Reference implementation of the backend API; the compiled module in
``_revol_kernels.pyx`` mirrors it step for step so both produce the same
trajectories up to float roundoff.

State layout: (q, phi, vq, vphi, j, jp) where (q, phi) are meridian/angle
chart coordinates, (vq, vphi) chart velocities, and (j, jp) the transverse
Jacobi field with j(0) = 0, j'(0) = 1.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"

PROFILE_PLANE = 0
PROFILE_PARABOLOID = 1
PROFILE_DOME = 2

_G_FLOOR = 1e-300


def _coeffs(pid: int, q: np.ndarray):
    """Metric data (E, E', G, G', K) at meridian coordinate q."""
    if pid == PROFILE_PLANE:
        one = np.ones_like(q)
        return one, np.zeros_like(q), q * q, 2.0 * q, np.zeros_like(q)
    if pid == PROFILE_PARABOLOID:
        w = 1.0 + 4.0 * q * q
        return w, 8.0 * q, q * q, 2.0 * q, 4.0 / (w * w)
    if pid == PROFILE_DOME:
        one = np.ones_like(q)
        s = np.sin(q)
        return one, np.zeros_like(q), s * s, np.sin(2.0 * q), one
    raise ValueError(f"unknown profile id {pid}")


def _rhs(pid: int, state: np.ndarray) -> np.ndarray:
    q = state[:, 0]
    vq = state[:, 2]
    vphi = state[:, 3]
    j = state[:, 4]
    jp = state[:, 5]
    e, ep, g, gp, k = _coeffs(pid, q)
    out = np.empty_like(state)
    out[:, 0] = vq
    out[:, 1] = vphi
    out[:, 2] = (-ep * vq * vq + gp * vphi * vphi) / (2.0 * e)
    out[:, 3] = np.where(vphi == 0.0, 0.0,
                         -(gp / np.maximum(g, _G_FLOOR)) * vq * vphi)
    out[:, 4] = jp
    out[:, 5] = -k * j
    return out


def _rk4(pid: int, state: np.ndarray, dt: np.ndarray, nsteps: int) -> np.ndarray:
    s = state.copy()
    h = dt[:, None]
    for _ in range(nsteps):
        k1 = _rhs(pid, s)
        k2 = _rhs(pid, s + 0.5 * h * k1)
        k3 = _rhs(pid, s + 0.5 * h * k2)
        k4 = _rhs(pid, s + h * k3)
        s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return s


def initial_state(pid: int, q0: float, phi0: float, betas: np.ndarray) -> np.ndarray:
    """Unit-speed departure states at chart point (q0, phi0)."""
    betas = np.asarray(betas, dtype=float)
    e, _, g, _, _ = _coeffs(pid, np.array([q0]))
    state = np.zeros((len(betas), 6))
    state[:, 0] = q0
    state[:, 1] = phi0
    state[:, 2] = np.cos(betas) / math.sqrt(e[0])
    state[:, 3] = np.sin(betas) / math.sqrt(max(g[0], _G_FLOOR))
    state[:, 5] = 1.0
    return state


def advance(pid: int, state: np.ndarray, lengths: np.ndarray, nsteps: int) -> np.ndarray:
    """RK4-integrate each row of ``state`` for its own arc length."""
    lengths = np.asarray(lengths, dtype=float)
    return _rk4(pid, np.asarray(state, dtype=float), lengths / nsteps, nsteps)


def ray_grid(pid: int, q0: float, phi0: float, betas: np.ndarray,
             tgrid: np.ndarray, h_target: float) -> np.ndarray:
    """States of the ray fan at each radius of ``tgrid``; shape (k, m, 6)."""
    betas = np.asarray(betas, dtype=float)
    tgrid = np.asarray(tgrid, dtype=float)
    state = initial_state(pid, q0, phi0, betas)
    out = np.empty((len(tgrid), len(betas), 6))
    t_prev = 0.0
    for i, t in enumerate(tgrid):
        span = t - t_prev
        if span > 0:
            nsteps = max(1, int(math.ceil(span / h_target)))
            dt = np.full(len(betas), span / nsteps)
            state = _rk4(pid, state, dt, nsteps)
        out[i] = state
        t_prev = t
    return out


def _wrap(a):
    out = np.mod(a + math.pi, 2.0 * math.pi) - math.pi
    return np.where(out <= -math.pi, math.pi, out)


def _residual(pid, q, phi, tq, tphi):
    e, _, g, _, _ = _coeffs(pid, tq)
    dq = q - tq
    dphi = _wrap(phi - tphi)
    return np.sqrt(e * dq * dq + g * dphi * dphi)


def _endpoint(pid, q0, phi0, betas, lengths, h_target):
    state = initial_state(pid, q0, phi0, betas)
    nsteps = max(8, int(math.ceil(np.max(lengths) / h_target)))
    s = _rk4(pid, state, np.asarray(lengths) / nsteps, nsteps)
    return s[:, 0], s[:, 1]


def shoot(pid: int, q0: float, phi0: float, tq: np.ndarray, tphi: np.ndarray,
          arc0: float, arcs: np.ndarray, h_target: float,
          fan: int = 24, newton_iters: int = 12):
    """Solve the geodesic boundary value problem toward each target.

    ``arc0`` and ``arcs`` are meridian arc lengths from the apex for the
    source and targets (initial-guess metric only).  Returns initial angles,
    arc lengths and final chart-metric residuals.
    """
    tq = np.asarray(tq, dtype=float)
    tphi = np.asarray(tphi, dtype=float)
    m = len(tq)
    e0, _, g0, _, _ = _coeffs(pid, np.array([q0]))
    dphi_t = _wrap(tphi - phi0)
    dx = np.asarray(arcs, dtype=float) - arc0
    dy = math.sqrt(max(g0[0], _G_FLOOR)) * dphi_t
    l_est = np.hypot(dx, dy)
    beta0 = np.arctan2(dy, dx)

    trivial = l_est < 1e-13
    l_safe = np.where(trivial, 1e-13, l_est)

    # coarse fan: track the closest approach to the target along each ray
    offsets = np.linspace(-0.75 * math.pi, 0.75 * math.pi, fan)
    best_beta = beta0.copy()
    best_t = l_safe.copy()
    best_res = np.full(m, np.inf)
    l_max = 2.0 * l_safe
    nsteps = max(16, int(math.ceil(float(np.max(l_max)) / h_target)))
    for off in offsets:
        betas = beta0 + off
        state = initial_state(pid, q0, phi0, betas)
        dt = l_max / nsteps
        t_acc = np.zeros(m)
        for _ in range(nsteps):
            k1 = _rhs(pid, state)
            k2 = _rhs(pid, state + 0.5 * dt[:, None] * k1)
            k3 = _rhs(pid, state + 0.5 * dt[:, None] * k2)
            k4 = _rhs(pid, state + dt[:, None] * k3)
            state = state + (dt[:, None] / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t_acc = t_acc + dt
            res = _residual(pid, state[:, 0], state[:, 1], tq, tphi)
            better = res < best_res
            best_res = np.where(better, res, best_res)
            best_beta = np.where(better, betas, best_beta)
            best_t = np.where(better, t_acc, best_t)

    # Newton refinement of (beta, t) on the chart endpoint map
    beta = best_beta
    tlen = best_t
    fd = 1e-7
    for _ in range(newton_iters):
        q_c, phi_c = _endpoint(pid, q0, phi0, beta, tlen, h_target)
        rq = q_c - tq
        rphi = _wrap(phi_c - tphi)
        q_b, phi_b = _endpoint(pid, q0, phi0, beta + fd, tlen, h_target)
        q_t, phi_t = _endpoint(pid, q0, phi0, beta, tlen * (1.0 + fd) + fd * 1e-9, h_target)
        j11 = (q_b - q_c) / fd
        j21 = (_wrap(phi_b - phi_c)) / fd
        dt_step = tlen * fd + fd * 1e-9
        j12 = (q_t - q_c) / dt_step
        j22 = (_wrap(phi_t - phi_c)) / dt_step
        det = j11 * j22 - j12 * j21
        det = np.where(np.abs(det) < 1e-30, 1e-30, det)
        dbeta = -(j22 * rq - j12 * rphi) / det
        dtl = -(-j21 * rq + j11 * rphi) / det
        # trust region keeps the fan solution basin
        cap = 0.5 * np.maximum(l_safe, 1e-6)
        dbeta = np.clip(dbeta, -0.5, 0.5)
        dtl = np.clip(dtl, -cap, cap)
        beta = beta + dbeta
        tlen = np.maximum(tlen + dtl, 0.0)
    q_c, phi_c = _endpoint(pid, q0, phi0, beta, tlen, h_target)
    resid = _residual(pid, q_c, phi_c, tq, tphi)
    beta = np.where(trivial, 0.0, beta)
    tlen = np.where(trivial, 0.0, tlen)
    resid = np.where(trivial, 0.0, resid)
    return beta, tlen, resid
