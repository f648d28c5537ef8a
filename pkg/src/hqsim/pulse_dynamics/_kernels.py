"""Fixed-step RK4 kernels for the 4x4 lab-frame dynamics.

Energies are in GHz and times in ns, so the Schroedinger generator is
``-2j*pi*H``. Only the diagonal of H depends on the detuning. Segments are
passed in their encoded form ``(kind, dur, a, b, amp, freq, phase, sigma)``
with time measured from the segment start.

Every propagator integrates from ``t_from`` and returns snapshots at the
ascending ``checkpoints``; the step between two checkpoints is the largest
uniform step not exceeding ``dt_max``.
"""

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi
_DIAG = np.array([0.5, 0.5, -0.5, -0.5])


@njit(cache=True, nogil=True)
def _envelope(t, dur, sigma, t_edge):
    if sigma <= 0.0:
        return 1.0
    env = 1.0
    if t < t_edge:
        env = math.exp(-((t - t_edge) ** 2) / (2.0 * sigma * sigma))
    if t > dur - t_edge:
        fall = math.exp(-((t - (dur - t_edge)) ** 2) / (2.0 * sigma * sigma))
        if fall < env:
            env = fall
    return env


@njit(cache=True, nogil=True)
def _static_eps(seg, t):
    if seg[0] == 0.0:
        return seg[2] + (seg[3] - seg[2]) * t / seg[1]
    return seg[2]


@njit(cache=True, nogil=True)
def _eps_at(seg, t, t_edge, offset):
    e = _static_eps(seg, t) + offset
    if seg[0] == 2.0 and seg[4] != 0.0:
        e += seg[4] * _envelope(t, seg[1], seg[7], t_edge) * math.cos(TWO_PI * seg[5] * t + seg[6])
    return e


@njit(cache=True, nogil=True)
def _apply_h(h0, eps, x, out):
    # out = -2j*pi * H(eps) @ x
    for i in range(4):
        d = h0[i, i] + eps * _DIAG[i]
        for j in range(4):
            acc = d * x[i, j]
            for k in range(4):
                if k != i:
                    acc += h0[i, k] * x[k, j]
            out[i, j] = -1j * TWO_PI * acc


@njit(cache=True, nogil=True)
def _n_steps(span, dt_max):
    n = int(math.ceil(span / dt_max - 1e-9))
    return max(n, 1)


@njit(cache=True, nogil=True)
def propagate_unitary(h0, seg, t_edge, offset, t_from, checkpoints, dt_max):
    """U(t_k, t_from) for every checkpoint t_k."""
    nck = checkpoints.shape[0]
    res = np.empty((nck, 4, 4), np.complex128)
    u = np.eye(4, dtype=np.complex128)
    k1 = np.empty((4, 4), np.complex128)
    k2 = np.empty((4, 4), np.complex128)
    k3 = np.empty((4, 4), np.complex128)
    k4 = np.empty((4, 4), np.complex128)
    tmp = np.empty((4, 4), np.complex128)
    t_prev = t_from
    for c in range(nck):
        span = checkpoints[c] - t_prev
        if span > 0.0:
            n_steps = _n_steps(span, dt_max)
            dt = span / n_steps
            for n in range(n_steps):
                t = t_prev + n * dt
                e0 = _eps_at(seg, t, t_edge, offset)
                em = _eps_at(seg, t + 0.5 * dt, t_edge, offset)
                e1 = _eps_at(seg, t + dt, t_edge, offset)
                _apply_h(h0, e0, u, k1)
                for i in range(4):
                    for j in range(4):
                        tmp[i, j] = u[i, j] + 0.5 * dt * k1[i, j]
                _apply_h(h0, em, tmp, k2)
                for i in range(4):
                    for j in range(4):
                        tmp[i, j] = u[i, j] + 0.5 * dt * k2[i, j]
                _apply_h(h0, em, tmp, k3)
                for i in range(4):
                    for j in range(4):
                        tmp[i, j] = u[i, j] + dt * k3[i, j]
                _apply_h(h0, e1, tmp, k4)
                for i in range(4):
                    for j in range(4):
                        u[i, j] += dt / 6.0 * (k1[i, j] + 2.0 * k2[i, j] + 2.0 * k3[i, j] + k4[i, j])
            t_prev = checkpoints[c]
        res[c] = u
    return res


@njit(cache=True, nogil=True)
def _lindblad_rhs(h0, eps, gamma, v0, v1, rho, out):
    # coherent part: -2j*pi*(H rho - rho H)
    for i in range(4):
        di = h0[i, i] + eps * _DIAG[i]
        for j in range(4):
            dj = h0[j, j] + eps * _DIAG[j]
            acc = di * rho[i, j] - rho[i, j] * dj
            for k in range(4):
                if k != i:
                    acc += h0[i, k] * rho[k, j]
                if k != j:
                    acc -= rho[i, k] * h0[k, j]
            out[i, j] = -1j * TWO_PI * acc
    if gamma > 0.0:
        # L = |v0><v1| with real v: L rho L^+ = <v1|rho|v1> |v0><v0|
        w = np.zeros(4, np.complex128)  # rho @ v1
        wl = np.zeros(4, np.complex128)  # v1^T @ rho
        for i in range(4):
            for k in range(4):
                w[i] += rho[i, k] * v1[k]
                wl[i] += v1[k] * rho[k, i]
        p = 0j
        for k in range(4):
            p += v1[k] * w[k]
        for i in range(4):
            for j in range(4):
                out[i, j] += gamma * (p * v0[i] * v0[j] - 0.5 * (v1[i] * wl[j] + w[i] * v1[j]))


@njit(cache=True, nogil=True)
def lower_pair(h0, eps):
    h = h0.copy()
    for i in range(4):
        h[i, i] += eps * _DIAG[i]
    _, vecs = np.linalg.eigh(h)
    return vecs[:, 0].copy(), vecs[:, 1].copy()


@njit(cache=True, nogil=True)
def _gamma(es, t1_eps, t1_log):
    return math.exp(-np.interp(es, t1_eps, t1_log))


@njit(cache=True, nogil=True)
def propagate_lindblad(rhos, h0, seg, t_edge, offset, t_from, checkpoints, dt_max,
                       t1_eps, t1_log):
    """Snapshots (n_ck, B, 4, 4) of a batch of density matrices.

    Relaxation acts between the two lowest eigenstates of the undriven
    Hamiltonian at the static detuning; along a ramp these are refreshed at
    every step midpoint.
    """
    nck = checkpoints.shape[0]
    nb = rhos.shape[0]
    res = np.empty((nck, nb, 4, 4), np.complex128)
    cur = rhos.astype(np.complex128).copy()
    k1 = np.empty((4, 4), np.complex128)
    k2 = np.empty((4, 4), np.complex128)
    k3 = np.empty((4, 4), np.complex128)
    k4 = np.empty((4, 4), np.complex128)
    tmp = np.empty((4, 4), np.complex128)
    ramp = seg[0] == 0.0
    es = _static_eps(seg, t_from) + offset
    v0, v1 = lower_pair(h0, es)
    gamma = _gamma(es, t1_eps, t1_log)
    t_prev = t_from
    for c in range(nck):
        span = checkpoints[c] - t_prev
        if span > 0.0:
            n_steps = _n_steps(span, dt_max)
            dt = span / n_steps
            for n in range(n_steps):
                t = t_prev + n * dt
                if ramp:
                    es = _static_eps(seg, t + 0.5 * dt) + offset
                    v0, v1 = lower_pair(h0, es)
                    gamma = _gamma(es, t1_eps, t1_log)
                e0 = _eps_at(seg, t, t_edge, offset)
                em = _eps_at(seg, t + 0.5 * dt, t_edge, offset)
                e1 = _eps_at(seg, t + dt, t_edge, offset)
                for m in range(nb):
                    rho = cur[m]
                    _lindblad_rhs(h0, e0, gamma, v0, v1, rho, k1)
                    for i in range(4):
                        for j in range(4):
                            tmp[i, j] = rho[i, j] + 0.5 * dt * k1[i, j]
                    _lindblad_rhs(h0, em, gamma, v0, v1, tmp, k2)
                    for i in range(4):
                        for j in range(4):
                            tmp[i, j] = rho[i, j] + 0.5 * dt * k2[i, j]
                    _lindblad_rhs(h0, em, gamma, v0, v1, tmp, k3)
                    for i in range(4):
                        for j in range(4):
                            tmp[i, j] = rho[i, j] + dt * k3[i, j]
                    _lindblad_rhs(h0, e1, gamma, v0, v1, tmp, k4)
                    for i in range(4):
                        for j in range(4):
                            rho[i, j] += dt / 6.0 * (k1[i, j] + 2.0 * k2[i, j]
                                                     + 2.0 * k3[i, j] + k4[i, j])
            t_prev = checkpoints[c]
        res[c] = cur
    return res


@njit(cache=True, nogil=True)
def relaxation_integral(seg, offset, n_samples, t1_eps, t1_log):
    """Trapezoid estimate of the integral of 1/T1 over a segment."""
    acc = 0.0
    for n in range(n_samples + 1):
        t = seg[1] * n / n_samples
        g = _gamma(_static_eps(seg, t) + offset, t1_eps, t1_log)
        w = 0.5 if (n == 0 or n == n_samples) else 1.0
        acc += w * g
    return acc * seg[1] / n_samples
