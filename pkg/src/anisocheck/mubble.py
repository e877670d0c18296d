"""Warped bubble problem on rotationally symmetric model 3-manifolds.

A model is [0, T] x S^2 with metric dt^2 + f(t)^2 g_{S^2}, so

    R(t) = 2 (1 - f'^2) / f^2 - 4 f'' / f,
    Lap u = u'' + 2 (f'/f) u'          (radial functions).

A spectral witness is a positive u with Lap u <= -(2 lambda - R) u / 2;
here u is the radial ground state of -Lap + R/2 (1D Sturm-Liouville
solver, natural/Neumann ends) and lambda its eigenvalue, so the witness
inequality holds by construction up to discretization noise.

The bubble functional over symmetric regions {t < t0} is

    A(t0) = 4 pi f(t0)^2 u(t0) - 4 pi int_{t_mid}^{t0} h u f^2 dt,

with h = -amplitude * tan(phi) on the band where phi sweeps (-pi/2, pi/2).
Its minimizer must have sphere area at most 8 pi / lambda and intrinsic
diameter at most 2 pi / sqrt(lambda), and the slope condition
lambda + h^2 - 2 |h'| >= 0 holds with amplitude sqrt(lambda) exactly at
the Lipschitz budget; the half amplitude fails it under the budget for
lambda > 1/4, which is reproducible here as a recorded counterexample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal

FOUR_PI = 4.0 * math.pi


# -- profiles -------------------------------------------------------------------


def _profile_functions(name, params):
    if name == "cylinder":
        return (lambda t: np.ones_like(t),
                lambda t: np.zeros_like(t),
                lambda t: np.zeros_like(t))
    if name == "funnel":
        a = float(params.get("rate", 0.1))
        return (lambda t: np.exp(-a * t),
                lambda t: -a * np.exp(-a * t),
                lambda t: a * a * np.exp(-a * t))
    if name == "bulge":
        amp = float(params.get("amplitude", 0.05))
        period = float(params.get("period", 17.0))
        om = 2.0 * math.pi / period
        return (lambda t: 1.0 + amp * np.cos(om * t),
                lambda t: -amp * om * np.sin(om * t),
                lambda t: -amp * om * om * np.cos(om * t))
    if name == "round_cap":
        return (np.sin, np.cos, lambda t: -np.sin(t))
    raise ValueError(f"unknown warping profile {name!r}")


@dataclass
class WarpedModel:
    """Sampled rotationally symmetric model with spectral witness."""

    name: str
    T: float
    t: np.ndarray
    f: np.ndarray
    fp: np.ndarray
    fpp: np.ndarray
    R: np.ndarray
    u: np.ndarray
    lam: float
    lambda1: float
    params: dict = field(default_factory=dict)

    @property
    def n_grid(self):
        return self.t.size

    def spline_u(self):
        return CubicSpline(self.t, self.u)

    def as_dict(self):
        return {"name": self.name, "T": self.T, "n_grid": self.n_grid,
                "lambda": self.lam, "lambda1": self.lambda1, "params": self.params}


def scalar_curvature_profile(f, fp, fpp):
    return 2.0 * (1.0 - fp * fp) / (f * f) - 4.0 * fpp / f


def lambda1_sturm(name, params, T, n_grid=4001, t_min=0.0):
    """Bottom eigenvalue and positive ground state of -Lap + R/2 over
    radial functions, natural (Neumann) ends.

    1D P1 elements with lumped mass and weight f^2, solved at n_grid and
    2 n_grid - 1 nodes; the returned eigenvalue is the Richardson
    extrapolation, the eigenfunction lives on the fine grid.
    """
    ff, fpf, fppf = _profile_functions(name, params)

    def solve(n):
        t = np.linspace(t_min, T, n)
        h = t[1] - t[0]
        f = ff(t)
        R = scalar_curvature_profile(f, fpf(t), fppf(t))
        w_mid = ((f[:-1] + f[1:]) / 2.0) ** 2
        mass = f * f * h
        mass[0] *= 0.5
        mass[-1] *= 0.5
        diag = np.zeros(n)
        diag[:-1] += w_mid / h
        diag[1:] += w_mid / h
        off = -w_mid / h
        pot = 0.5 * R * mass
        d = np.sqrt(mass)
        main = (diag + pot) / (d * d)
        sub = off / (d[:-1] * d[1:])
        vals, vecs = eigh_tridiagonal(main, sub, select="i", select_range=(0, 0))
        v = vecs[:, 0] / d
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        return float(vals[0]), t, v / np.abs(v).max()

    lam_c, _, _ = solve(n_grid)
    lam_f, t, u = solve(2 * n_grid - 1)
    lam_ext = (4.0 * lam_f - lam_c) / 3.0
    return lam_ext, t[::2], u[::2]


def make_model(name, T, params=None, lam=None, n_grid=4001, t_min=0.0):
    """Build a catalog model; ``lam`` defaults to the solver's lambda_1 so
    the witness inequality holds with equality up to discretization."""
    params = dict(params or {})
    lam1, t, u = lambda1_sturm(name, params, T, n_grid=n_grid, t_min=t_min)
    ff, fpf, fppf = _profile_functions(name, params)
    f, fp, fpp = ff(t), fpf(t), fppf(t)
    return WarpedModel(name=name, T=float(T), t=t, f=f, fp=fp, fpp=fpp,
                       R=scalar_curvature_profile(f, fp, fpp), u=u,
                       lam=float(lam1 if lam is None else lam), lambda1=float(lam1),
                       params=params)


def catalog():
    """Catalog models satisfying T >= 5 pi / sqrt(lambda)."""
    return {
        "cylinder": make_model("cylinder", T=20.0, lam=1.0),
        "funnel": make_model("funnel", T=17.0, params={"rate": 0.1}),
        "bulge": make_model("bulge", T=17.0, params={"amplitude": 0.05, "period": 17.0}),
    }


def supersolution_residual(model):
    """Max over interior nodes of Lap u + (2 lambda - R) u / 2 (should be
    <= discretization noise; exactly (lam - lambda1) u in the continuum)."""
    t, u = model.t, model.u
    h = t[1] - t[0]
    lap = np.empty_like(u)
    lap[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h**2
    lap[0] = lap[1]
    lap[-1] = lap[-2]
    lap = lap + 2.0 * (model.fp / model.f) * np.gradient(u, h, edge_order=2)
    resid = lap + 0.5 * (2.0 * model.lam - model.R) * u
    return float(resid[1:-1].max())


# -- band profiles and the slope condition ---------------------------------------


@dataclass
class BubbleProfiles:
    lam: float
    eps: float
    amplitude: float
    lip_phi: float
    band: tuple
    t_mid: float
    t: np.ndarray
    phi0: np.ndarray
    phi: np.ndarray
    h: np.ndarray
    lip_within_budget: bool

    def as_dict(self):
        return {"lambda": self.lam, "eps": self.eps, "amplitude": self.amplitude,
                "lip_phi": self.lip_phi, "band": list(self.band), "t_mid": self.t_mid,
                "lip_within_budget": self.lip_within_budget}


def _amplitude_value(amplitude, lam):
    if amplitude == "sqrt-lambda":
        return math.sqrt(lam)
    if amplitude == "half":
        return 0.5
    return float(amplitude)


def build_phi_h(model, eps=0.1, amplitude="sqrt-lambda", n_band=4001):
    """Band profiles: phi0(t) = t (distance to the t = 0 boundary is exact
    in the symmetric model), the affine sweep phi mapping
    [eps, 4 pi/sqrt(lam) + 2 eps] onto [-pi/2, pi/2], and
    h = -amplitude * tan(phi)."""
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    lam = model.lam
    denom = 4.0 / math.sqrt(lam) + eps / math.pi
    lip = 1.0 / denom
    t_lo = eps
    t_hi = eps + math.pi * denom          # = 4 pi / sqrt(lam) + 2 eps
    if t_hi > model.T:
        raise ValueError(
            f"model too short for the band: need T >= {t_hi:.3f}, have {model.T}")
    amp = _amplitude_value(amplitude, lam)
    t = np.linspace(t_lo, t_hi, n_band)[1:-1]     # open band, tan stays finite
    phi = (t - eps) / denom - math.pi / 2.0
    h = -amp * np.tan(phi)
    t_mid = eps + 0.5 * math.pi * denom
    return BubbleProfiles(lam=lam, eps=eps, amplitude=amp, lip_phi=lip,
                          band=(t_lo, t_hi), t_mid=t_mid, t=t, phi0=t, phi=phi,
                          h=h, lip_within_budget=bool(lip < math.sqrt(lam) / 2.0))


def check_h_condition(profiles, lip_mode="model"):
    """Minimum over the band of lambda + h^2 - 2 |h'|.

    ``lip_mode='model'`` uses the model's actual phi slope; ``'budget'``
    uses the full allowance sqrt(lambda)/2 (the general-manifold bound for
    a Lipschitz-2 smoothed distance), under which the sqrt(lambda)
    amplitude sits exactly at equality and the half amplitude fails for
    lambda > 1/4.
    """
    lam = profiles.lam
    amp = profiles.amplitude
    if lip_mode == "model":
        L = profiles.lip_phi
    elif lip_mode == "budget":
        L = math.sqrt(lam) / 2.0
    else:
        raise ValueError("lip_mode must be 'model' or 'budget'")
    tan = np.tan(profiles.phi)
    # margin = lam + amp^2 tan^2 - 2 amp L sec^2, grouped so that the
    # sqrt(lambda)-amplitude budget case cancels exactly instead of
    # through sec^2-amplified rounding
    two_LA = (2.0 * L) * amp
    margin = (lam - two_LA) + (amp * amp - two_LA) * (tan * tan)
    k = int(np.argmin(margin))
    return float(margin[k]), {"t": float(profiles.t[k]), "phi": float(profiles.phi[k]),
                              "lip": L, "amplitude": amp}


# -- the bubble functional --------------------------------------------------------


@dataclass
class MuBubbleSolution:
    t0: float
    boundary_area: float
    boundary_diameter: float
    value: float
    stationarity_residual: float
    boundary_minimizer: bool
    value_at_reference: float    # A at the t_mid competitor
    lam: float

    def as_dict(self):
        return self.__dict__.copy()


def minimize_A(model, eps=0.1, amplitude="sqrt-lambda", n_scan=4001,
               golden_tol=1e-10):
    """Minimize A over symmetric regions {t < t0}, t0 in the band: dense
    scan plus golden-section refinement on spline interpolants.

    The first-variation condition at an interior minimizer is
    2 (f'/f) u + u' = h u, whose residual is reported.
    """
    prof = build_phi_h(model, eps=eps, amplitude=amplitude)
    lam, amp = prof.lam, prof.amplitude
    u_s = model.spline_u()
    ff, fpf, _ = _profile_functions(model.name, model.params)
    denom = 4.0 / math.sqrt(lam) + eps / math.pi

    def h_of(t):
        return -amp * np.tan((t - eps) / denom - math.pi / 2.0)

    lo, hi = prof.band
    pad = (hi - lo) * 1e-6
    grid = np.linspace(lo + pad, hi - pad, n_scan)
    integ = CubicSpline(grid, h_of(grid) * u_s(grid) * ff(grid) ** 2)
    anti = integ.antiderivative()
    mid = prof.t_mid

    def value(t0):
        return FOUR_PI * (ff(t0) ** 2 * u_s(t0) - (anti(t0) - anti(mid)))

    vals = value(grid)
    k = int(np.argmin(vals))
    a = grid[max(0, k - 1)]
    b = grid[min(n_scan - 1, k + 1)]
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - gr * (b - a)
    x2 = a + gr * (b - a)
    f1, f2 = value(x1), value(x2)
    while b - a > golden_tol * max(1.0, abs(b)):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - gr * (b - a)
            f1 = value(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + gr * (b - a)
            f2 = value(x2)
    t0 = 0.5 * (a + b)
    on_edge = bool(t0 - lo < 1e-3 * (hi - lo) or hi - t0 < 1e-3 * (hi - lo))
    f0 = float(ff(t0))
    resid = abs(2.0 * float(fpf(t0)) / f0 * float(u_s(t0)) + float(u_s(t0, 1))
                - float(h_of(t0)) * float(u_s(t0)))
    return MuBubbleSolution(
        t0=float(t0), boundary_area=FOUR_PI * f0 * f0,
        boundary_diameter=math.pi * f0, value=float(value(t0)),
        stationarity_residual=resid, boundary_minimizer=on_edge,
        value_at_reference=float(value(mid)), lam=lam)


@dataclass
class ConclusionMargins:
    area_margin: float        # 8 pi / lam - boundary area
    diameter_margin: float    # 2 pi / sqrt(lam) - boundary diameter
    containment_margin: float  # 5 pi / sqrt(lam) - t0
    minimality_slack: float   # A(reference) - A(minimizer)

    @property
    def passed(self):
        return (self.area_margin >= -1e-8 and self.diameter_margin >= -1e-8
                and self.containment_margin >= -1e-8 and self.minimality_slack >= -1e-8)

    def as_dict(self):
        d = self.__dict__.copy()
        d["pass"] = self.passed
        return d


def verify_conclusions(solution, lam=None):
    lam = solution.lam if lam is None else lam
    return ConclusionMargins(
        area_margin=8.0 * math.pi / lam - solution.boundary_area,
        diameter_margin=2.0 * math.pi / math.sqrt(lam) - solution.boundary_diameter,
        containment_margin=5.0 * math.pi / math.sqrt(lam) - solution.t0,
        minimality_slack=solution.value_at_reference - solution.value)
