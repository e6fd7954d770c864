"""Propagation kernels for y'' = U(r) y written as a first-order 2x2 system.

Each step of the radial grid is advanced with the sixth-order Magnus
integrator on three Gauss-Legendre nodes.  The coefficient matrix
``[[0, 1], [U, 0]]`` is traceless, so every Magnus exponent is traceless too
and its exponential has the closed form ``cosh(q) I + sinh(q)/q Omega``.

Two code paths produce identical numbers: numba kernels (default) and a
pure-numpy path selected with ``ERANGE_DISABLE_NUMBA=1``.  Both are importable
directly (``*_numba`` / ``*_numpy``) for the benchmark and the parity tests.

Growth is tracked with a log scale: a step whose exponent has real part above
``SCALE_THRESHOLD`` returns a propagator divided by ``exp(q)`` and reports
``q``; the sweeps renormalise whenever the state leaves ``[TINY, HUGE]``.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import HAVE_NUMBA, njit

SQRT15 = math.sqrt(15.0)
GAUSS_NODES = np.array([0.5 - SQRT15 / 10.0, 0.5, 0.5 + SQRT15 / 10.0])
GAUSS_WEIGHTS = np.array([5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])

SCALE_THRESHOLD = 50.0
HUGE = 1e100
TINY = 1e-100


# ---------------------------------------------------------------- numba path


@njit(cache=True, nogil=True)
def _comm(a1, b1, c1, a2, b2, c2):
    return b1 * c2 - b2 * c1, 2.0 * (a1 * b2 - a2 * b1), 2.0 * (a2 * c1 - a1 * c2)


@njit(cache=True, nogil=True)
def _omega(h, u1, u2, u3):
    # alpha_1 = h A(mid); alpha_2, alpha_3 only touch the lower-left entry
    a1a, a1b, a1c = 0.0, h, h * u2
    a2c = SQRT15 * h / 3.0 * (u3 - u1)
    a3c = 10.0 * h / 3.0 * (u3 - 2.0 * u2 + u1)
    c1a, c1b, c1c = _comm(a1a, a1b, a1c, 0.0, 0.0, a2c)
    ta, tb, tc = _comm(a1a, a1b, a1c, c1a, c1b, 2.0 * a3c + c1c)
    c2a, c2b, c2c = -ta / 60.0, -tb / 60.0, -tc / 60.0
    xa, xb, xc = -20.0 * a1a + c1a, -20.0 * a1b + c1b, -20.0 * a1c - a3c + c1c
    za, zb, zc = _comm(xa, xb, xc, c2a, c2b, a2c + c2c)
    return (
        a1a + za / 240.0,
        a1b + zb / 240.0,
        a1c + a3c / 12.0 + zc / 240.0,
    )


@njit(cache=True, nogil=True)
def _expm_traceless(a, b, c):
    q2 = a * a + b * c
    shift = 0.0
    if abs(q2) < 1e-6:
        ch = 1.0 + q2 / 2.0 + q2 * q2 / 24.0 + q2 * q2 * q2 / 720.0
        sh = 1.0 + q2 / 6.0 + q2 * q2 / 120.0 + q2 * q2 * q2 / 5040.0
    elif q2 > 0.0:
        q = math.sqrt(q2)
        if q > SCALE_THRESHOLD:
            e = math.exp(-2.0 * q)
            ch = 0.5 * (1.0 + e)
            sh = 0.5 * (1.0 - e) / q
            shift = q
        else:
            ch = math.cosh(q)
            sh = math.sinh(q) / q
    else:
        t = math.sqrt(-q2)
        ch = math.cos(t)
        sh = math.sin(t) / t
    return ch + sh * a, sh * b, sh * c, ch - sh * a, shift


@njit(cache=True, nogil=True)
def magnus_propagators_numba(h, U):
    m = h.shape[0]
    E = np.empty((m, 2, 2))
    q = np.empty(m)
    for i in range(m):
        oa, ob, oc = _omega(h[i], U[i, 0], U[i, 1], U[i, 2])
        e00, e01, e10, e11, s = _expm_traceless(oa, ob, oc)
        E[i, 0, 0] = e00
        E[i, 0, 1] = e01
        E[i, 1, 0] = e10
        E[i, 1, 1] = e11
        q[i] = s
    return E, q


@njit(cache=True, nogil=True)
def sweep_numba(E, q, y0, backward):
    m = E.shape[0]
    y = np.empty((m + 1, 2))
    L = np.zeros(m + 1)
    if backward:
        y[m, 0] = y0[0]
        y[m, 1] = y0[1]
        for j in range(m):
            i = m - 1 - j
            p0 = y[i + 1, 0]
            p1 = y[i + 1, 1]
            # inverse of a unimodular propagator is its adjugate
            n0 = E[i, 1, 1] * p0 - E[i, 0, 1] * p1
            n1 = -E[i, 1, 0] * p0 + E[i, 0, 0] * p1
            lg = L[i + 1] + q[i]
            big = max(abs(n0), abs(n1))
            if big > HUGE or (0.0 < big < TINY):
                n0 /= big
                n1 /= big
                lg += math.log(big)
            y[i, 0] = n0
            y[i, 1] = n1
            L[i] = lg
    else:
        y[0, 0] = y0[0]
        y[0, 1] = y0[1]
        for i in range(m):
            p0 = y[i, 0]
            p1 = y[i, 1]
            n0 = E[i, 0, 0] * p0 + E[i, 0, 1] * p1
            n1 = E[i, 1, 0] * p0 + E[i, 1, 1] * p1
            lg = L[i] + q[i]
            big = max(abs(n0), abs(n1))
            if big > HUGE or (0.0 < big < TINY):
                n0 /= big
                n1 /= big
                lg += math.log(big)
            y[i + 1, 0] = n0
            y[i + 1, 1] = n1
            L[i + 1] = lg
    return y, L


@njit(cache=True, nogil=True)
def rescaled_cumsum_numba(totals, ratio):
    m = totals.shape[0]
    out = np.zeros(m + 1)
    acc = 0.0
    for i in range(m):
        acc = (acc + totals[i]) * ratio[i]
        out[i + 1] = acc
    return out


# ---------------------------------------------------------------- numpy path


def _comm_np(m1, m2):
    a1, b1, c1 = m1
    a2, b2, c2 = m2
    return (b1 * c2 - b2 * c1, 2.0 * (a1 * b2 - a2 * b1), 2.0 * (a2 * c1 - a1 * c2))


def magnus_propagators_numpy(h, U):
    h = np.asarray(h, dtype=float)
    U = np.asarray(U, dtype=float)
    u1, u2, u3 = U[:, 0], U[:, 1], U[:, 2]
    zero = np.zeros_like(h)
    a1 = (zero, h, h * u2)
    a2c = SQRT15 * h / 3.0 * (u3 - u1)
    a3c = 10.0 * h / 3.0 * (u3 - 2.0 * u2 + u1)
    c1 = _comm_np(a1, (zero, zero, a2c))
    t = _comm_np(a1, (c1[0], c1[1], 2.0 * a3c + c1[2]))
    c2 = (-t[0] / 60.0, -t[1] / 60.0, -t[2] / 60.0)
    x = (-20.0 * a1[0] + c1[0], -20.0 * a1[1] + c1[1], -20.0 * a1[2] - a3c + c1[2])
    z = _comm_np(x, (c2[0], c2[1], a2c + c2[2]))
    a = a1[0] + z[0] / 240.0
    b = a1[1] + z[1] / 240.0
    c = a1[2] + a3c / 12.0 + z[2] / 240.0

    q2 = a * a + b * c
    ch = np.empty_like(q2)
    sh = np.empty_like(q2)
    shift = np.zeros_like(q2)
    small = np.abs(q2) < 1e-6
    pos = (q2 > 0.0) & ~small
    neg = (q2 < 0.0) & ~small
    s = q2[small]
    ch[small] = 1.0 + s / 2.0 + s * s / 24.0 + s * s * s / 720.0
    sh[small] = 1.0 + s / 6.0 + s * s / 120.0 + s * s * s / 5040.0
    qp = np.sqrt(q2[pos])
    scaled = qp > SCALE_THRESHOLD
    with np.errstate(over="ignore"):
        e = np.exp(-2.0 * qp)
        ch_p = np.where(scaled, 0.5 * (1.0 + e), np.cosh(np.minimum(qp, SCALE_THRESHOLD)))
        sh_p = np.where(scaled, 0.5 * (1.0 - e) / qp, np.sinh(np.minimum(qp, SCALE_THRESHOLD)) / qp)
    ch[pos] = ch_p
    sh[pos] = sh_p
    shift[pos] = np.where(scaled, qp, 0.0)
    tn = np.sqrt(-q2[neg])
    ch[neg] = np.cos(tn)
    sh[neg] = np.sin(tn) / tn

    E = np.empty((h.shape[0], 2, 2))
    E[:, 0, 0] = ch + sh * a
    E[:, 0, 1] = sh * b
    E[:, 1, 0] = sh * c
    E[:, 1, 1] = ch - sh * a
    return E, shift


def sweep_numpy(E, q, y0, backward):
    m = E.shape[0]
    y = np.empty((m + 1, 2))
    L = np.zeros(m + 1)
    Ef = E.tolist()
    qf = q.tolist()
    out0 = [0.0] * (m + 1)
    out1 = [0.0] * (m + 1)
    lg_out = [0.0] * (m + 1)
    p0, p1 = float(y0[0]), float(y0[1])
    lg = 0.0
    order = range(m - 1, -1, -1) if backward else range(m)
    first = m if backward else 0
    out0[first], out1[first] = p0, p1
    for i in order:
        (e00, e01), (e10, e11) = Ef[i]
        if backward:
            n0 = e11 * p0 - e01 * p1
            n1 = -e10 * p0 + e00 * p1
            dst = i
        else:
            n0 = e00 * p0 + e01 * p1
            n1 = e10 * p0 + e11 * p1
            dst = i + 1
        lg += qf[i]
        big = max(abs(n0), abs(n1))
        if big > HUGE or (0.0 < big < TINY):
            n0 /= big
            n1 /= big
            lg += math.log(big)
        out0[dst], out1[dst], lg_out[dst] = n0, n1, lg
        p0, p1 = n0, n1
    y[:, 0] = out0
    y[:, 1] = out1
    L[:] = lg_out
    return y, L


def rescaled_cumsum_numpy(totals, ratio):
    """out[i+1] = (out[i] + totals[i]) * ratio[i], out[0] = 0."""
    if np.all(ratio == 1.0):
        return np.concatenate(([0.0], np.cumsum(totals)))
    out = np.zeros(totals.shape[0] + 1)
    acc = 0.0
    for i, (t, f) in enumerate(zip(totals.tolist(), ratio.tolist())):
        acc = (acc + t) * f
        out[i + 1] = acc
    return out


if HAVE_NUMBA:
    magnus_propagators = magnus_propagators_numba
    sweep = sweep_numba
    rescaled_cumsum = rescaled_cumsum_numba
else:
    magnus_propagators = magnus_propagators_numpy
    sweep = sweep_numpy
    rescaled_cumsum = rescaled_cumsum_numpy


def apply_propagators(E, q, y, L):
    """Apply per-row propagators ``E[..., 2, 2]`` to states ``y[..., 2]``.

    Rows leaving ``[TINY, HUGE]`` are renormalised; the returned log scales
    absorb both the propagator shifts ``q`` and any renormalisation.
    """
    out = np.einsum("...ij,...j->...i", E, y)
    big = np.max(np.abs(out), axis=-1)
    fix = (big > HUGE) | ((big > 0.0) & (big < TINY))
    safe = np.where(fix, big, 1.0)
    out = out / safe[..., None]
    return out, L + q + np.log(safe)
