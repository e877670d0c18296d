"""Brute-force certification sweeps for the pointwise algebraic inequalities.

Every sweep samples the full parameter domain of one inequality, records
the worst margin together with the exact configuration achieving it, and
a standalone evaluator re-evaluates any stored configuration so reports
are reproducible.  Sampling is deterministic: a Halton low-discrepancy
stream and a fixed-seed PRNG stream, both reported, plus closed-form
witness configurations where an equality case is known.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kr
from ._jit import numba_requested

SQRT2 = kr.SQRT2
C0 = kr.C0
C1_MAX = kr.C1_MAX
DEFAULT_TOL = 1e-10

_PRIMES = (2, 3, 5, 7, 11, 13)


def halton(count, dims, skip=20):
    """Deterministic Halton points in [0,1)^dims (radical inverse)."""
    out = np.empty((count, dims))
    for d in range(dims):
        b = _PRIMES[d]
        idx = np.arange(skip, skip + count, dtype=np.int64)
        f = np.zeros(count)
        denom = 1.0
        work = idx.copy()
        while work.max() > 0:
            denom *= b
            f += (work % b) / denom
            work //= b
        out[:, d] = f
    return out


@dataclass
class MarginRecord:
    name: str
    margin: float
    config: dict
    tolerance: float

    @property
    def passed(self):
        return self.margin >= -self.tolerance

    def as_dict(self):
        return {"name": self.name, "margin": self.margin, "config": self.config,
                "tolerance": self.tolerance, "pass": self.passed}


@dataclass
class SweepReport:
    suite: str
    domain: str
    sample_count: int
    tolerance: float
    records: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    method: str = ""

    @property
    def worst_margin(self):
        return min(r.margin for r in self.records)

    @property
    def passed(self):
        return all(r.passed for r in self.records)

    def as_dict(self):
        return {
            "suite": self.suite,
            "domain": self.domain,
            "sample_count": self.sample_count,
            "tolerance": self.tolerance,
            "worst_margin": self.worst_margin,
            "pass": self.passed,
            "records": [r.as_dict() for r in self.records],
            "extras": self.extras,
            "method": self.method,
        }


def _method_tag():
    return "numba" if numba_requested() else "numpy"


# -- quadratic form comparison -------------------------------------------------


def quadratic_lemma_point(alpha, beta, theta):
    """Margins (c0 Q2 - Q1, c1_max - (Q1-Q2)/Q1, Q1/Q2) at one configuration."""
    k1, k2 = np.cos(theta), np.sin(theta)
    q1 = (1.0 + alpha * alpha) * k1 * k1 + 2.0 * alpha * beta * k1 * k2 \
        + (1.0 + beta * beta) * k2 * k2
    q2 = 2.0 * alpha * k1 * k1 + 2.0 * (alpha + beta - 1.0) * k1 * k2 \
        + 2.0 * beta * k2 * k2
    return C0 * q2 - q1, C1_MAX - (q1 - q2) / q1, q1 / q2


def quadratic_lemma_point_from_a(a1, a2, a3, theta):
    """Same margins parametrized by the sorted coefficient triple."""
    return quadratic_lemma_point(a1 / a3, a2 / a3, theta)


def verify_quadratic_lemma(n_alpha=200, n_beta=200, n_angle=720, tol=DEFAULT_TOL):
    """Sweep a <= b in [1/sqrt2, 1] x unit circle and certify

        Q1 <= c0 Q2   and   (Q1 - Q2)/Q1 <= 3/2 - sqrt(2),

    together with the closed-form identity 1/(1 - (3/2 - sqrt2)) = c0.
    """
    alphas = np.linspace(1.0 / SQRT2, 1.0, n_alpha)
    betas = np.linspace(1.0 / SQRT2, 1.0, n_beta)
    thetas = np.linspace(0.0, 2.0 * np.pi, n_angle, endpoint=False)
    coss, sins = np.cos(thetas), np.sin(thetas)
    (m1, i1, j1, k1, m2, i2, j2, k2, maxr, ir, jr, krr, bad) = kr.quadratic_sweep(
        alphas, betas, coss, sins)
    count = int(np.sum(betas[None, :] >= alphas[:, None]) * n_angle)
    rep = SweepReport(
        suite="quadratic_lemma",
        domain=f"alpha<=beta in [2^-1/2,1]^2 ({n_alpha}x{n_beta}), {n_angle} angles",
        sample_count=count, tolerance=tol, method=_method_tag())
    rep.records.append(MarginRecord(
        "c0*Q2 - Q1", float(m1),
        {"alpha": float(alphas[i1]), "beta": float(betas[j1]), "theta": float(thetas[k1])},
        tol))
    rep.records.append(MarginRecord(
        "(3/2 - sqrt2) - (Q1-Q2)/Q1", float(m2),
        {"alpha": float(alphas[i2]), "beta": float(betas[j2]), "theta": float(thetas[k2])},
        tol))
    c0_identity = abs(1.0 / (1.0 - C1_MAX) - C0)
    rep.records.append(MarginRecord("identity 1/(1-c1_max) = c0", -c0_identity,
                                    {"residual": c0_identity}, tol))
    rep.extras["max_ratio_q1_q2"] = float(maxr)
    rep.extras["max_ratio_config"] = {
        "alpha": float(alphas[ir]), "beta": float(betas[jr]), "theta": float(thetas[krr])}
    rep.extras["q2_nonpositive_count"] = int(bad)
    rep.extras["c0"] = C0
    return rep


# -- curvature pinch -----------------------------------------------------------


def _constraint_basis(a):
    a = np.asarray(a, dtype=float)
    b1 = np.array([0.0, a[2], -a[1]])
    b1 /= np.linalg.norm(b1)
    b2 = np.cross(a, b1)
    b2 /= np.linalg.norm(b2)
    return b1, b2


def curvature_pinch_point(a, psi):
    """(-R, c0 * (-R) - |A|^2, |A|^2, constraint residual) for the principal
    curvature direction psi in the plane sum a_i k_i = 0, |k| = 1."""
    b1, b2 = _constraint_basis(a)
    k = np.cos(psi) * b1 + np.sin(psi) * b2
    A2 = float(k @ k)
    s = float(k.sum())
    R = s * s - A2
    return -R, -C0 * R - A2, A2, abs(float(np.asarray(a) @ k))


def _curvature_samples(count, seed, sampler):
    if sampler == "halton":
        pts = halton(count, 4)
    else:
        rng = np.random.default_rng(seed)
        pts = rng.random((count, 4))
    aa = 1.0 + (SQRT2 - 1.0) * np.sort(pts[:, :3], axis=1)
    psis = 2.0 * np.pi * pts[:, 3]
    return aa, psis


def verify_curvature_pinch(samples=1_000_000, seed=1234, tol=DEFAULT_TOL,
                           corner_angles=20001):
    """Certify R <= 0, -R <= |A|^2 <= -c0 R on the constrained domain.

    ``samples`` are split between the Halton stream and the seeded PRNG
    stream; a deterministic pass over the corner triples of [1, sqrt2]^3
    with a fine angle grid probes near-sharpness of c0.
    """
    rep = SweepReport(
        suite="curvature_pinch",
        domain="a sorted in [1,sqrt2]^3, unit k with sum a_i k_i = 0",
        sample_count=samples, tolerance=tol, method=_method_tag())
    max_ratio = -np.inf
    ratio_cfg = None
    max_cons = 0.0
    for sampler, cnt in (("halton", samples // 2), ("prng", samples - samples // 2)):
        aa, psis = _curvature_samples(cnt, seed, sampler)
        mR, pR, m2, p2, ratio, pr, cons = kr.curvature_sweep(aa, psis)
        rep.records.append(MarginRecord(
            f"-R >= 0 [{sampler}]", float(mR),
            {"a": aa[pR].tolist(), "psi": float(psis[pR])}, tol))
        rep.records.append(MarginRecord(
            f"c0*(-R) - |A|^2 [{sampler}]", float(m2),
            {"a": aa[p2].tolist(), "psi": float(psis[p2])}, tol))
        max_cons = max(max_cons, cons)
        if ratio > max_ratio:
            max_ratio = ratio
            ratio_cfg = {"a": aa[pr].tolist(), "psi": float(psis[pr])}
    # |A|^2 >= -R is (sum k)^2 >= 0: record the identity margin at the
    # moment R is most negative (trivially nonnegative, kept for the table)
    rep.records.append(MarginRecord("|A|^2 + R >= 0", 0.0, {"identity": "(sum k)^2"}, tol))
    # deterministic near-sharpness pass over the corner triples
    corners = [(1.0, 1.0, 1.0), (1.0, 1.0, SQRT2), (1.0, SQRT2, SQRT2),
               (SQRT2, SQRT2, SQRT2)]
    psis = np.linspace(0.0, 2.0 * np.pi, corner_angles)
    for a in corners:
        aa = np.tile(np.asarray(a), (corner_angles, 1))
        mR, pR, m2, p2, ratio, pr, cons = kr.curvature_sweep(aa, psis)
        rep.records.append(MarginRecord(
            f"c0*(-R) - |A|^2 [corner {tuple(round(x, 6) for x in a)}]", float(m2),
            {"a": list(a), "psi": float(psis[p2])}, tol))
        max_cons = max(max_cons, cons)
        if ratio > max_ratio:
            max_ratio = ratio
            ratio_cfg = {"a": list(a), "psi": float(psis[pr])}
    rep.extras["max_ratio_A2_over_negR"] = float(max_ratio)
    rep.extras["max_ratio_config"] = ratio_cfg
    rep.extras["near_sharp"] = bool(max_ratio >= C0 - 0.05)
    rep.extras["max_constraint_residual"] = float(max_cons)
    rep.extras["c0"] = C0
    return rep


# -- Ricci lower bound ----------------------------------------------------------


def ricci_point(k, y):
    """Margin of Ric(y,y) + |A|^2/sqrt(2) for principal curvatures k and a
    unit direction y."""
    k = np.asarray(k, dtype=float)
    y = np.asarray(y, dtype=float)
    s = float(k.sum())
    ric = float(np.sum(k * (s - k) * y * y))
    return ric + float(k @ k) / SQRT2


def _unit_sphere_points(u, v):
    z = 2.0 * u - 1.0
    th = 2.0 * np.pi * v
    s = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.stack([s * np.cos(th), s * np.sin(th), z], axis=-1)


def verify_ricci_bound(samples=1_000_000, seed=1234, tol=DEFAULT_TOL):
    """Certify Ric(y,y) >= -|A|^2/sqrt(2) over unit (k, y), including the
    closed-form equality witness k = (-sqrt2, 1, 1)/2, y = e1."""
    rep = SweepReport(
        suite="ricci_bound",
        domain="unit principal-curvature vectors k and unit directions y",
        sample_count=samples, tolerance=tol, method=_method_tag())
    for sampler, cnt in (("halton", samples // 2), ("prng", samples - samples // 2)):
        if sampler == "halton":
            pts = halton(cnt, 4)
        else:
            pts = np.random.default_rng(seed).random((cnt, 4))
        ks = _unit_sphere_points(pts[:, 0], pts[:, 1])
        ys = _unit_sphere_points(pts[:, 2], pts[:, 3])
        worst, p = kr.ricci_sweep(ks, ys)
        rep.records.append(MarginRecord(
            f"Ric + |A|^2/sqrt2 [{sampler}]", float(worst),
            {"k": ks[p].tolist(), "y": ys[p].tolist()}, tol))
    k_eq = np.array([-SQRT2, 1.0, 1.0]) / 2.0
    y_eq = np.array([1.0, 0.0, 0.0])
    m_eq = ricci_point(k_eq, y_eq)
    rep.records.append(MarginRecord("equality witness k=(-sqrt2,1,1)/2, y=e1",
                                    float(m_eq), {"k": k_eq.tolist(), "y": y_eq.tolist()},
                                    tol))
    rep.extras["equality_witness_margin"] = float(m_eq)
    return rep


# -- improved Kato spot-check ----------------------------------------------------
#
# Harmonic polynomials u on flat R^3 satisfy
# |Hess u|^2 >= (3/8) |grad u|^-2 |grad |grad u|^2|^2; derivatives are exact.

_KATO_CATALOG = {}


def _register_kato(name, grad, hess):
    _KATO_CATALOG[name] = (grad, hess)


_register_kato(
    "linear_x",
    lambda p: np.stack([np.ones_like(p[..., 0]), np.zeros_like(p[..., 0]),
                        np.zeros_like(p[..., 0])], axis=-1),
    lambda p: np.zeros(p.shape + (3,)),
)


def _xy_grad(p):
    return np.stack([p[..., 1], p[..., 0], np.zeros_like(p[..., 0])], axis=-1)


def _xy_hess(p):
    h = np.zeros(p.shape + (3,))
    h[..., 0, 1] = 1.0
    h[..., 1, 0] = 1.0
    return h


_register_kato("xy", _xy_grad, _xy_hess)


def _x2y2_grad(p):
    return np.stack([2 * p[..., 0], -2 * p[..., 1], np.zeros_like(p[..., 0])], axis=-1)


def _x2y2_hess(p):
    h = np.zeros(p.shape + (3,))
    h[..., 0, 0] = 2.0
    h[..., 1, 1] = -2.0
    return h


_register_kato("x2_minus_y2", _x2y2_grad, _x2y2_hess)


def _xyz_grad(p):
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    return np.stack([y * z, x * z, x * y], axis=-1)


def _xyz_hess(p):
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    h = np.zeros(p.shape + (3,))
    h[..., 0, 1] = z
    h[..., 1, 0] = z
    h[..., 0, 2] = y
    h[..., 2, 0] = y
    h[..., 1, 2] = x
    h[..., 2, 1] = x
    return h


_register_kato("xyz", _xyz_grad, _xyz_hess)


def _zx2y2_grad(p):
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    return np.stack([2 * x * z, -2 * y * z, x * x - y * y], axis=-1)


def _zx2y2_hess(p):
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    h = np.zeros(p.shape + (3,))
    h[..., 0, 0] = 2 * z
    h[..., 1, 1] = -2 * z
    h[..., 0, 2] = 2 * x
    h[..., 2, 0] = 2 * x
    h[..., 1, 2] = -2 * y
    h[..., 2, 1] = -2 * y
    return h


_register_kato("z_x2_minus_y2", _zx2y2_grad, _zx2y2_hess)


def _rez3_grad(p):
    x, y = p[..., 0], p[..., 1]
    return np.stack([3 * (x * x - y * y), -6 * x * y, np.zeros_like(x)], axis=-1)


def _rez3_hess(p):
    x, y = p[..., 0], p[..., 1]
    h = np.zeros(p.shape + (3,))
    h[..., 0, 0] = 6 * x
    h[..., 0, 1] = -6 * y
    h[..., 1, 0] = -6 * y
    h[..., 1, 1] = -6 * x
    return h


_register_kato("re_z3", _rez3_grad, _rez3_hess)


def kato_catalog_names():
    return sorted(_KATO_CATALOG)


def kato_point(poly, point, grad_floor=1e-8):
    """Margin |Hess u|^2 - (3/8)|grad u|^-2 |grad|grad u|^2|^2 at one point,
    or None when |grad u| is below the floor (critical point skipped)."""
    grad_fn, hess_fn = _KATO_CATALOG[poly]
    p = np.asarray(point, dtype=float)
    g = grad_fn(p)
    H = hess_fn(p)
    g2 = float(np.sum(g * g))
    if g2 < grad_floor**2:
        return None
    lhs = float(np.sum(H * H))
    hg = H @ g
    rhs = (3.0 / 8.0) * 4.0 * float(hg @ hg) / g2
    return lhs - rhs


def verify_kato(points=10_000, seed=1234, tol=DEFAULT_TOL, box=1.0):
    """Sweep the harmonic polynomial catalog on points of [-box, box]^3
    with exact derivatives (points with |grad u| below 1e-8 are skipped
    and counted)."""
    rep = SweepReport(
        suite="kato_inequality",
        domain=f"harmonic polynomial catalog on [-{box}, {box}]^3",
        sample_count=points * len(_KATO_CATALOG), tolerance=tol, method="numpy")
    half = points // 2
    pts = np.concatenate([
        box * (2.0 * halton(half, 3) - 1.0),
        box * (2.0 * np.random.default_rng(seed).random((points - half, 3)) - 1.0),
    ])
    skipped = {}
    for name in kato_catalog_names():
        grad_fn, hess_fn = _KATO_CATALOG[name]
        g = grad_fn(pts)
        H = hess_fn(pts)
        g2 = np.sum(g * g, axis=-1)
        ok = g2 >= 1e-16
        skipped[name] = int(np.sum(~ok))
        lhs = np.sum(H * H, axis=(-2, -1))
        hg = np.einsum("...ij,...j->...i", H, g)
        rhs = 1.5 * np.sum(hg * hg, axis=-1) / np.where(ok, g2, 1.0)
        margin = np.where(ok, lhs - rhs, np.inf)
        p = int(np.argmin(margin))
        rep.records.append(MarginRecord(
            f"kato[{name}]", float(margin[p]), {"poly": name, "point": pts[p].tolist()},
            tol))
    rep.extras["skipped_points"] = skipped
    return rep
