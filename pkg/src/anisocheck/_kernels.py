"""Hot sweep kernels, in numba and pure-numpy builds.

Each sweep exists twice with identical elementwise arithmetic: a serial
``@njit`` loop and a vectorized numpy fallback.  ``*_dispatch`` picks the
build per call via the ANISOCHECK_DISABLE_NUMBA flag, so results (values
and argmin indices, first occurrence wins) are identical either way.
"""

import numpy as np

from ._jit import njit, numba_requested

SQRT2 = np.sqrt(2.0)
C0 = 1.0 / (SQRT2 - 0.5)
C1_MAX = 1.5 - SQRT2


# -- quadratic form comparison -------------------------------------------------
#
# Q1 = (1+a^2) k1^2 + 2ab k1 k2 + (1+b^2) k2^2
# Q2 = 2a k1^2 + 2(a+b-1) k1 k2 + 2b k2^2
# over a <= b in [1/sqrt(2), 1], (k1,k2) on the unit circle; the sweep
# certifies Q1 <= c0 Q2 and (Q1-Q2)/Q1 <= 3/2 - sqrt(2).


@njit(cache=True)
def _quadratic_sweep_jit(alphas, betas, coss, sins):
    min1 = np.inf
    i1 = j1 = k1i = 0
    min2 = np.inf
    i2 = j2 = k2i = 0
    maxr = -np.inf
    ir = jr = kr = 0
    bad_q2 = 0
    na, nb, nk = alphas.size, betas.size, coss.size
    for i in range(na):
        a = alphas[i]
        for j in range(nb):
            b = betas[j]
            if b < a:
                continue
            for k in range(nk):
                k1 = coss[k]
                k2 = sins[k]
                q1 = (1.0 + a * a) * k1 * k1 + 2.0 * a * b * k1 * k2 + (1.0 + b * b) * k2 * k2
                q2 = 2.0 * a * k1 * k1 + 2.0 * (a + b - 1.0) * k1 * k2 + 2.0 * b * k2 * k2
                if q2 <= 0.0:
                    bad_q2 += 1
                    continue
                m1 = C0 * q2 - q1
                m2 = C1_MAX - (q1 - q2) / q1
                r = q1 / q2
                if m1 < min1:
                    min1 = m1
                    i1, j1, k1i = i, j, k
                if m2 < min2:
                    min2 = m2
                    i2, j2, k2i = i, j, k
                if r > maxr:
                    maxr = r
                    ir, jr, kr = i, j, k
    return min1, i1, j1, k1i, min2, i2, j2, k2i, maxr, ir, jr, kr, bad_q2


def _quadratic_sweep_np(alphas, betas, coss, sins):
    min1 = np.inf
    i1 = j1 = k1i = 0
    min2 = np.inf
    i2 = j2 = k2i = 0
    maxr = -np.inf
    ir = jr = kr = 0
    bad_q2 = 0
    nb = betas.size
    k1 = coss[None, :]
    k2 = sins[None, :]
    for i, a in enumerate(alphas):
        sel = np.nonzero(betas >= a)[0]
        if sel.size == 0:
            continue
        b = betas[sel][:, None]
        q1 = (1.0 + a * a) * k1 * k1 + 2.0 * a * b * k1 * k2 + (1.0 + b * b) * k2 * k2
        q2 = 2.0 * a * k1 * k1 + 2.0 * (a + b - 1.0) * k1 * k2 + 2.0 * b * k2 * k2
        good = q2 > 0.0
        bad_q2 += int(q2.size - good.sum())
        m1 = np.where(good, C0 * q2 - q1, np.inf)
        m2 = np.where(good, C1_MAX - (q1 - q2) / q1, np.inf)
        r = np.where(good, q1 / np.where(good, q2, 1.0), -np.inf)
        f = int(np.argmin(m1))
        if m1.ravel()[f] < min1:
            min1 = float(m1.ravel()[f])
            i1, j1, k1i = i, int(sel[f // coss.size]), f % coss.size
        f = int(np.argmin(m2))
        if m2.ravel()[f] < min2:
            min2 = float(m2.ravel()[f])
            i2, j2, k2i = i, int(sel[f // coss.size]), f % coss.size
        f = int(np.argmax(r))
        if r.ravel()[f] > maxr:
            maxr = float(r.ravel()[f])
            ir, jr, kr = i, int(sel[f // coss.size]), f % coss.size
    return min1, i1, j1, k1i, min2, i2, j2, k2i, maxr, ir, jr, kr, bad_q2


def quadratic_sweep(alphas, betas, coss, sins):
    if numba_requested():
        return _quadratic_sweep_jit(alphas, betas, coss, sins)
    return _quadratic_sweep_np(alphas, betas, coss, sins)


# -- curvature pinch -----------------------------------------------------------
#
# For unit k orthogonal to a (componentwise in [1, sqrt 2], sorted), with
# |A|^2 = |k|^2 = 1 and R = (sum k)^2 - 1, certify R <= 0, -R <= |A|^2 and
# |A|^2 <= -c0 R.


@njit(cache=True)
def _curvature_sweep_jit(aa, psis):
    n = aa.shape[0]
    min_mR = np.inf
    arg_mR = 0
    min_m2 = np.inf
    arg_m2 = 0
    max_ratio = -np.inf
    arg_r = 0
    max_cons = 0.0
    for p in range(n):
        a1, a2, a3 = aa[p, 0], aa[p, 1], aa[p, 2]
        # orthonormal basis of the constraint plane; cross(a, e1) never
        # degenerates on [1, sqrt2]^3
        b1x, b1y, b1z = 0.0, a3, -a2
        nb = np.sqrt(b1y * b1y + b1z * b1z)
        b1y /= nb
        b1z /= nb
        b2x = a2 * b1z - a3 * b1y
        b2y = a3 * b1x - a1 * b1z
        b2z = a1 * b1y - a2 * b1x
        nb2 = np.sqrt(b2x * b2x + b2y * b2y + b2z * b2z)
        b2x /= nb2
        b2y /= nb2
        b2z /= nb2
        cp = np.cos(psis[p])
        sp = np.sin(psis[p])
        k1 = cp * b1x + sp * b2x
        k2 = cp * b1y + sp * b2y
        k3 = cp * b1z + sp * b2z
        cons = abs(a1 * k1 + a2 * k2 + a3 * k3)
        if cons > max_cons:
            max_cons = cons
        A2 = k1 * k1 + k2 * k2 + k3 * k3
        s = k1 + k2 + k3
        R = s * s - A2
        mR = -R
        m2 = -C0 * R - A2
        if mR < min_mR:
            min_mR = mR
            arg_mR = p
        if m2 < min_m2:
            min_m2 = m2
            arg_m2 = p
        if -R > 1e-15:
            ratio = A2 / (-R)
            if ratio > max_ratio:
                max_ratio = ratio
                arg_r = p
    return min_mR, arg_mR, min_m2, arg_m2, max_ratio, arg_r, max_cons


def _curvature_sweep_np(aa, psis):
    a1, a2, a3 = aa[:, 0], aa[:, 1], aa[:, 2]
    b1 = np.stack([np.zeros_like(a1), a3, -a2], axis=-1)
    b1 /= np.linalg.norm(b1, axis=-1)[:, None]
    b2 = np.cross(aa, b1)
    b2 /= np.linalg.norm(b2, axis=-1)[:, None]
    k = np.cos(psis)[:, None] * b1 + np.sin(psis)[:, None] * b2
    cons = np.abs(np.einsum("pi,pi->p", aa, k))
    A2 = np.einsum("pi,pi->p", k, k)
    s = k.sum(axis=1)
    R = s * s - A2
    mR = -R
    m2 = -C0 * R - A2
    ratio = np.where(-R > 1e-15, A2 / np.where(-R > 1e-15, -R, 1.0), -np.inf)
    p1 = int(np.argmin(mR))
    p2 = int(np.argmin(m2))
    pr = int(np.argmax(ratio))
    return (float(mR[p1]), p1, float(m2[p2]), p2, float(ratio[pr]), pr,
            float(cons.max()))


def curvature_sweep(aa, psis):
    if numba_requested():
        return _curvature_sweep_jit(aa, psis)
    return _curvature_sweep_np(aa, psis)


# -- pointwise Ricci lower bound ----------------------------------------------
#
# Ric(y) = sum_i k_i (s - k_i) y_i^2 >= -|k|^2 / sqrt(2) for unit k, y.


@njit(cache=True)
def _ricci_sweep_jit(ks, ys):
    n = ks.shape[0]
    worst = np.inf
    arg = 0
    for p in range(n):
        k1, k2, k3 = ks[p, 0], ks[p, 1], ks[p, 2]
        y1, y2, y3 = ys[p, 0], ys[p, 1], ys[p, 2]
        s = k1 + k2 + k3
        ric = (k1 * (s - k1) * y1 * y1 + k2 * (s - k2) * y2 * y2
               + k3 * (s - k3) * y3 * y3)
        A2 = k1 * k1 + k2 * k2 + k3 * k3
        m = ric + A2 / SQRT2
        if m < worst:
            worst = m
            arg = p
    return worst, arg


def _ricci_sweep_np(ks, ys):
    s = ks.sum(axis=1)
    ric = np.einsum("pi,pi->p", ks * (s[:, None] - ks), ys * ys)
    A2 = np.einsum("pi,pi->p", ks, ks)
    m = ric + A2 / SQRT2
    p = int(np.argmin(m))
    return float(m[p]), p


def ricci_sweep(ks, ys):
    if numba_requested():
        return _ricci_sweep_jit(ks, ys)
    return _ricci_sweep_np(ks, ys)
