"""Hot kernels: orbit iteration of linear-fractional maps and batched distances.

Every kernel exists twice, as a numba ``@njit`` loop and as a pure numpy
version.  The numba path is used when numba imports and the environment
variable ``KOBDYN_NUMBA`` is not set to ``0``; both paths are importable
directly (``numpy_kernels`` / ``numba_kernels``) so they can be compared.
"""

import math
import os
from types import SimpleNamespace

import numpy as np

ATANH_SWITCH = 0.5


# ---------------------------------------------------------------- numpy path

def _np_ball_distance_pairs(Z, W):
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    W = np.atleast_2d(np.asarray(W, dtype=complex))
    nz = np.linalg.norm(Z, axis=1)
    nw = np.linalg.norm(W, axis=1)
    ip = np.sum(Z * np.conj(W), axis=1)
    nw2 = nw * nw
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(nw2 > 0, ip / np.where(nw2 > 0, nw2, 1.0), 0.0)
        sw = np.sqrt((1.0 - nw) * (1.0 + nw))
        proj = coef[:, None] * W
        num = W - proj - sw[:, None] * (Z - proj)
        den = np.abs(1.0 - ip)
        t = np.linalg.norm(num, axis=1) / den
        s = (1.0 - nz) * (1.0 + nz) * (1.0 - nw) * (1.0 + nw) / (den * den)
        small = 2.0 * np.arctanh(np.minimum(t, ATANH_SWITCH))
        large = 2.0 * np.log1p(np.minimum(t, 1.0)) - np.log(s)
    out = np.where(t < ATANH_SWITCH, small, large)
    bad = (nz >= 1.0) | (nw >= 1.0)
    out[bad] = np.inf
    return out


def _np_siegel_distance_pairs(P, Q):
    P = np.atleast_2d(np.asarray(P, dtype=complex))
    Q = np.atleast_2d(np.asarray(Q, dtype=complex))
    p0, q0 = P[:, 0], Q[:, 0]
    pt, qt = P[:, 1:], Q[:, 1:]
    rp = p0.imag - np.sum(np.abs(pt) ** 2, axis=1)
    rq = q0.imag - np.sum(np.abs(qt) ** 2, axis=1)
    B = (p0 - np.conj(q0)) / 2j - np.sum(pt * np.conj(qt), axis=1)
    diff = pt - qt
    N1 = p0 - q0 - 2j * np.sum(diff * np.conj(qt), axis=1)
    dd = np.sum(np.abs(diff) ** 2, axis=1)
    aB = np.abs(B)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.sqrt(np.abs(N1) ** 2 / 4.0 + rq * dd) / aB
        s = rp * rq / (aB * aB)
        small = 2.0 * np.arctanh(np.minimum(t, ATANH_SWITCH))
        large = 2.0 * np.log1p(np.minimum(t, 1.0)) - np.log(s)
    out = np.where(t < ATANH_SWITCH, small, large)
    out[(rp <= 0) | (rq <= 0)] = np.inf
    return out


def _np_lft_orbit(M, z0, n, horizon, ball):
    M = np.asarray(M, dtype=complex)
    q = M.shape[0] - 1
    A, b, c, d = M[:q, :q], M[:q, q], M[q, :q], M[q, q]
    out = np.empty((n + 1, q), dtype=complex)
    out[0] = z0
    z = out[0]
    count = 1
    for m in range(n):
        new = (A @ z + b) / (c @ z + d)
        if not np.all(np.isfinite(new)):
            break
        if ball and np.vdot(new, new).real >= 1.0:
            break
        if np.max(np.abs(new)) > horizon:
            break
        out[m + 1] = new
        z = new
        count += 1
    return out[:count]


numpy_kernels = SimpleNamespace(
    name="numpy",
    ball_distance_pairs=_np_ball_distance_pairs,
    siegel_distance_pairs=_np_siegel_distance_pairs,
    lft_orbit=_np_lft_orbit,
)


# ---------------------------------------------------------------- numba path

def _build_numba_kernels():
    import numba

    @numba.njit(cache=True)
    def _finish(t, s):
        if t < ATANH_SWITCH:
            return 2.0 * math.atanh(t)
        if t > 1.0:
            t = 1.0
        return 2.0 * math.log1p(t) - math.log(s)

    @numba.njit(cache=True)
    def ball_distance_pairs(Z, W):
        n, q = Z.shape
        out = np.empty(n)
        for k in range(n):
            nz2 = 0.0
            nw2 = 0.0
            ip = 0j
            for j in range(q):
                nz2 += Z[k, j].real ** 2 + Z[k, j].imag ** 2
                nw2 += W[k, j].real ** 2 + W[k, j].imag ** 2
                ip += Z[k, j] * W[k, j].conjugate()
            nz = math.sqrt(nz2)
            nw = math.sqrt(nw2)
            if nz >= 1.0 or nw >= 1.0:
                out[k] = np.inf
                continue
            coef = ip / nw2 if nw2 > 0 else 0j
            sw = math.sqrt((1.0 - nw) * (1.0 + nw))
            num2 = 0.0
            for j in range(q):
                pj = coef * W[k, j]
                v = W[k, j] - pj - sw * (Z[k, j] - pj)
                num2 += v.real ** 2 + v.imag ** 2
            den = abs(1.0 - ip)
            t = math.sqrt(num2) / den
            s = (1.0 - nz) * (1.0 + nz) * (1.0 - nw) * (1.0 + nw) / (den * den)
            out[k] = _finish(t, s)
        return out

    @numba.njit(cache=True)
    def siegel_distance_pairs(P, Q):
        n, q = P.shape
        out = np.empty(n)
        for k in range(n):
            rp = P[k, 0].imag
            rq = Q[k, 0].imag
            B = (P[k, 0] - Q[k, 0].conjugate()) / 2j
            inner = 0j
            dd = 0.0
            for j in range(1, q):
                rp -= P[k, j].real ** 2 + P[k, j].imag ** 2
                rq -= Q[k, j].real ** 2 + Q[k, j].imag ** 2
                B -= P[k, j] * Q[k, j].conjugate()
                diff = P[k, j] - Q[k, j]
                inner += diff * Q[k, j].conjugate()
                dd += diff.real ** 2 + diff.imag ** 2
            if rp <= 0.0 or rq <= 0.0:
                out[k] = np.inf
                continue
            N1 = P[k, 0] - Q[k, 0] - 2j * inner
            aB = abs(B)
            t = math.sqrt(abs(N1) ** 2 / 4.0 + rq * dd) / aB
            s = rp * rq / (aB * aB)
            out[k] = _finish(t, s)
        return out

    @numba.njit(cache=True)
    def _lft_orbit(M, z0, n, horizon, ball):
        q = M.shape[0] - 1
        out = np.empty((n + 1, q), dtype=np.complex128)
        out[0, :] = z0
        count = 1
        new = np.empty(q, dtype=np.complex128)
        for m in range(n):
            den = M[q, q]
            for j in range(q):
                den += M[q, j] * out[m, j]
            ok = True
            big = 0.0
            norm2 = 0.0
            for i in range(q):
                acc = M[i, q]
                for j in range(q):
                    acc += M[i, j] * out[m, j]
                v = acc / den
                if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                    ok = False
                a = abs(v)
                if a > big:
                    big = a
                norm2 += v.real ** 2 + v.imag ** 2
                new[i] = v
            if not ok or big > horizon or (ball and norm2 >= 1.0):
                break
            out[m + 1, :] = new
            count += 1
        return out[:count]

    def lft_orbit(M, z0, n, horizon, ball):
        return _lft_orbit(np.ascontiguousarray(M, dtype=np.complex128),
                          np.ascontiguousarray(z0, dtype=np.complex128),
                          int(n), float(horizon), bool(ball))

    def _pairs(kernel):
        def run(Z, W):
            Z = np.ascontiguousarray(np.atleast_2d(Z), dtype=np.complex128)
            W = np.ascontiguousarray(np.atleast_2d(W), dtype=np.complex128)
            return kernel(Z, W)
        return run

    return SimpleNamespace(
        name="numba",
        ball_distance_pairs=_pairs(ball_distance_pairs),
        siegel_distance_pairs=_pairs(siegel_distance_pairs),
        lft_orbit=lft_orbit,
    )


try:
    numba_kernels = _build_numba_kernels()
except ImportError:  # pragma: no cover - numba is optional
    numba_kernels = None

USE_NUMBA = numba_kernels is not None and os.environ.get("KOBDYN_NUMBA", "1") != "0"
kernels = numba_kernels if USE_NUMBA else numpy_kernels
