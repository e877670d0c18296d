"""Direction-dependent area integrands and their ellipticity statistics.

An integrand is a positively 1-homogeneous function ``phi`` on ambient
space minus the origin.  Three families are provided:

* ``isotropic``    -- phi(v) = |v|, the area integrand;
* ``quadratic``    -- phi(v) = sqrt(v^T A v) for a symmetric positive
                      definite matrix A (support function of an ellipsoid);
* ``perturbed``    -- phi(v) = |v| + eps * P(v) |v|^(1-deg) for a catalog
                      homogeneous polynomial P, i.e. |v| (1 + eps * p(v/|v|)).

Every family carries closed-form value, gradient and Hessian.  The module
also computes the statistics used downstream: the extreme tangential
Hessian eigenvalues (a_min, a_max) over the unit sphere, the ellipticity
ratio Lambda = a_min / a_max, the C^1 sup-norm on the sphere and the
minimum of phi on the sphere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SQRT2 = float(np.sqrt(2.0))

#: Profile catalog for the perturbed family.  Each entry is a homogeneous
#: polynomial P with |P| <= 1 on the unit sphere, given as
#: (degree, value, gradient, hessian), all vectorized over (..., d).
_PROFILES = {}


def _register_profile(name, degree, value, grad, hess):
    _PROFILES[name] = (degree, value, grad, hess)


def _axis2_value(v):
    return v[..., -1] ** 2


def _axis2_grad(v):
    g = np.zeros_like(v)
    g[..., -1] = 2.0 * v[..., -1]
    return g


def _axis2_hess(v):
    d = v.shape[-1]
    h = np.zeros(v.shape[:-1] + (d, d))
    h[..., -1, -1] = 2.0
    return h


_register_profile("axis2", 2, _axis2_value, _axis2_grad, _axis2_hess)


def _saddle2_value(v):
    return v[..., 0] ** 2 - v[..., 1] ** 2


def _saddle2_grad(v):
    g = np.zeros_like(v)
    g[..., 0] = 2.0 * v[..., 0]
    g[..., 1] = -2.0 * v[..., 1]
    return g


def _saddle2_hess(v):
    d = v.shape[-1]
    h = np.zeros(v.shape[:-1] + (d, d))
    h[..., 0, 0] = 2.0
    h[..., 1, 1] = -2.0
    return h


_register_profile("saddle2", 2, _saddle2_value, _saddle2_grad, _saddle2_hess)


def _quartic_value(v):
    # sum v_i^4 - 0.5 |v|^4, in [-1, 1] on the sphere for d <= 4
    return np.sum(v**4, axis=-1) - 0.5 * np.sum(v**2, axis=-1) ** 2


def _quartic_grad(v):
    s2 = np.sum(v**2, axis=-1, keepdims=True)
    return 4.0 * v**3 - 2.0 * s2 * v


def _quartic_hess(v):
    d = v.shape[-1]
    s2 = np.sum(v**2, axis=-1)
    h = -4.0 * v[..., :, None] * v[..., None, :]
    eye = np.eye(d)
    h += (12.0 * v**2 - 2.0 * s2[..., None])[..., :, None] * eye
    return h


_register_profile("quartic_saddle", 4, _quartic_value, _quartic_grad, _quartic_hess)


def profile_names():
    return sorted(_PROFILES)


class Integrand:
    """A 1-homogeneous integrand with closed-form derivatives.

    Use the constructors :meth:`isotropic`, :meth:`quadratic`,
    :meth:`perturbed`.  ``dim`` is the ambient dimension (n+1 for
    hypersurfaces of dimension n >= 2).
    """

    def __init__(self, kind, dim, matrix=None, epsilon=0.0, profile=None, scale=1.0):
        if dim < 3:
            raise ValueError("ambient dimension must be at least 3")
        self.kind = kind
        self.dim = int(dim)
        self.matrix = None if matrix is None else np.asarray(matrix, dtype=float)
        self.epsilon = float(epsilon)
        self.profile = profile
        self.scale = float(scale)
        if kind == "quadratic":
            A = self.matrix
            if A is None or A.shape != (dim, dim):
                raise ValueError("quadratic integrand needs a dim x dim matrix")
            if not np.allclose(A, A.T, atol=1e-12):
                raise ValueError("quadratic integrand matrix must be symmetric")
            if np.min(np.linalg.eigvalsh(A)) <= 0:
                raise ValueError("quadratic integrand matrix must be positive definite")
        elif kind == "perturbed":
            if profile not in _PROFILES:
                raise ValueError(f"unknown profile {profile!r}; choose from {profile_names()}")
        elif kind != "isotropic":
            raise ValueError(f"unknown integrand kind {kind!r}")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def isotropic(dim, scale=1.0):
        return Integrand("isotropic", dim, scale=scale)

    @staticmethod
    def quadratic(matrix):
        matrix = np.asarray(matrix, dtype=float)
        return Integrand("quadratic", matrix.shape[0], matrix=matrix)

    @staticmethod
    def perturbed(dim, epsilon, profile):
        return Integrand("perturbed", dim, epsilon=epsilon, profile=profile)

    def rescaled(self, c):
        """The integrand c * phi (c > 0); used for scale-invariance checks."""
        if c <= 0:
            raise ValueError("scale factor must be positive")
        if self.kind == "quadratic":
            return Integrand("quadratic", self.dim, matrix=c * c * self.matrix)
        out = Integrand(self.kind, self.dim, epsilon=self.epsilon, profile=self.profile,
                        scale=self.scale * c)
        return out

    def describe(self):
        if self.kind == "isotropic":
            tag = "isotropic" if self.scale == 1.0 else f"{self.scale:g}*isotropic"
        elif self.kind == "quadratic":
            tag = f"quadratic(diag-ish {np.diag(self.matrix)})"
        else:
            tag = f"perturbed(eps={self.epsilon:g}, {self.profile})"
        return tag

    # -- evaluation --------------------------------------------------------

    def _check_nonzero(self, v):
        if np.any(np.linalg.norm(v, axis=-1) == 0.0):
            raise ValueError("integrand evaluated at the zero vector")

    def value(self, v):
        v = np.asarray(v, dtype=float)
        self._check_nonzero(v)
        if self.kind == "quadratic":
            q = np.einsum("...i,ij,...j->...", v, self.matrix, v)
            return np.sqrt(q)
        s = np.linalg.norm(v, axis=-1)
        if self.kind == "isotropic":
            return self.scale * s
        deg, P, _, _ = _PROFILES[self.profile]
        return self.scale * (s + self.epsilon * P(v) * s ** (1 - deg))

    def gradient(self, v):
        v = np.asarray(v, dtype=float)
        self._check_nonzero(v)
        if self.kind == "quadratic":
            Av = np.einsum("ij,...j->...i", self.matrix, v)
            q = np.einsum("...i,...i->...", v, Av)
            return Av / np.sqrt(q)[..., None]
        s = np.linalg.norm(v, axis=-1)[..., None]
        if self.kind == "isotropic":
            return self.scale * v / s
        deg, P, DP, _ = _PROFILES[self.profile]
        p = P(v)[..., None]
        out = v / s + self.epsilon * (DP(v) * s ** (1 - deg) + (1 - deg) * p * s ** (-1 - deg) * v)
        return self.scale * out

    def hessian(self, v):
        v = np.asarray(v, dtype=float)
        self._check_nonzero(v)
        d = v.shape[-1]
        eye = np.eye(d)
        if self.kind == "quadratic":
            Av = np.einsum("ij,...j->...i", self.matrix, v)
            q = np.einsum("...i,...i->...", v, Av)[..., None, None]
            return self.matrix / np.sqrt(q) - Av[..., :, None] * Av[..., None, :] / q**1.5
        s = np.linalg.norm(v, axis=-1)[..., None, None]
        vhat = v / np.linalg.norm(v, axis=-1)[..., None]
        tang = (eye - vhat[..., :, None] * vhat[..., None, :]) / s
        if self.kind == "isotropic":
            return self.scale * tang
        deg, P, DP, D2P = _PROFILES[self.profile]
        p = P(v)[..., None, None]
        gp = DP(v)
        cross = gp[..., :, None] * v[..., None, :] + v[..., :, None] * gp[..., None, :]
        pert = (
            D2P(v) * s ** (1 - deg)
            + (1 - deg) * s ** (-1 - deg) * cross
            + (1 - deg) * p * (s ** (-1 - deg) * eye - (1 + deg) * s ** (-3 - deg)
                               * v[..., :, None] * v[..., None, :])
        )
        return self.scale * (tang + self.epsilon * pert)


def eval_derivatives(integrand, v):
    """(phi, D phi, D^2 phi) at one point or a batch; raises on zero vectors."""
    return integrand.value(v), integrand.gradient(v), integrand.hessian(v)


# -- finite-difference oracles ---------------------------------------------


def fd_gradient(fn, v, step=1e-3):
    """Fourth-order central-difference gradient of a scalar callable."""
    v = np.asarray(v, dtype=float)
    d = v.shape[-1]
    out = np.empty(v.shape)
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        out[..., i] = (
            -fn(v + 2 * step * e) + 8 * fn(v + step * e)
            - 8 * fn(v - step * e) + fn(v - 2 * step * e)
        ) / (12 * step)
    return out


def fd_hessian(fn, v, step=1e-3):
    """Fourth-order Hessian oracle: the 4-point first-derivative stencil
    applied twice, so it never consults closed-form derivatives."""
    v = np.asarray(v, dtype=float)
    d = v.shape[-1]

    def partial(w, j):
        e = np.zeros(d)
        e[j] = 1.0
        return (
            -fn(w + 2 * step * e) + 8 * fn(w + step * e)
            - 8 * fn(w - step * e) + fn(w - 2 * step * e)
        ) / (12 * step)

    out = np.empty(v.shape + (d,))
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        for j in range(d):
            out[..., i, j] = (
                -partial(v + 2 * step * e, j) + 8 * partial(v + step * e, j)
                - 8 * partial(v - step * e, j) + partial(v - 2 * step * e, j)
            ) / (12 * step)
    return 0.5 * (out + np.swapaxes(out, -1, -2))


# -- sphere sampling and ellipticity statistics ----------------------------


def sphere_grid(dim, resolution):
    """Quasi-uniform deterministic grid on the unit sphere in R^dim.

    Lattice points on the surface of the cube [-1,1]^dim (``resolution``
    nodes per edge, forced odd so that all +-e_i directions are present)
    are deduplicated and radially normalized.
    """
    if resolution < 8:
        raise ValueError("sphere grid resolution must be at least 8")
    m = int(resolution) | 1
    axis = np.linspace(-1.0, 1.0, m)
    pts = []
    for a in range(dim):
        for side in (-1.0, 1.0):
            grids = np.meshgrid(*([axis] * (dim - 1)), indexing="ij")
            face = np.stack([grid.ravel() for grid in grids], axis=-1)
            col = np.full((face.shape[0], 1), side)
            pts.append(np.concatenate([face[:, :a], col, face[:, a:]], axis=1))
    pts = np.unique(np.concatenate(pts, axis=0), axis=0)
    return pts / np.linalg.norm(pts, axis=1)[:, None]


def tangent_basis(nu):
    """Orthonormal bases of nu-perp, batched: columns 2..d of the Householder
    reflection exchanging e_1 with -sign(nu_1) nu."""
    nu = np.asarray(nu, dtype=float)
    d = nu.shape[-1]
    sign = np.where(nu[..., 0] >= 0, 1.0, -1.0)
    u = nu.copy()
    u[..., 0] += sign
    nrm2 = np.sum(u * u, axis=-1)
    H = np.eye(d) - 2.0 * u[..., :, None] * u[..., None, :] / nrm2[..., None, None]
    return H[..., :, 1:]


def pinch_bounds(integrand, sphere_grid_resolution=17):
    """Extremes of the tangential Hessian eigenvalues over the sphere.

    Returns (a_min, a_max): the min/max over a quasi-uniform grid of the
    eigenvalues of D^2 phi(nu) restricted to the tangent hyperplane of nu.
    """
    nu = sphere_grid(integrand.dim, sphere_grid_resolution)
    T = tangent_basis(nu)
    hess = integrand.hessian(nu)
    tangential = np.einsum("pdi,pde,pej->pij", T, hess, T)
    eigs = np.linalg.eigvalsh(tangential)
    return float(eigs[:, 0].min()), float(eigs[:, -1].max())


def stability_lambda(integrand, sphere_grid_resolution=17, bounds=None):
    """Ellipticity ratio Lambda = a_min / a_max; equals 1 for the area
    integrand and is >= 1/sqrt(2) whenever the pinch window holds."""
    a_min, a_max = bounds if bounds is not None else pinch_bounds(integrand, sphere_grid_resolution)
    if a_min <= 0:
        raise ValueError("integrand is not convex on the sampled grid (a_min <= 0)")
    return a_min / a_max


def c1_norm(integrand, sphere_grid_resolution=17, gradient="ambient"):
    """Grid maximum over the sphere of sqrt(phi^2 + |D phi|^2).

    ``gradient='ambient'`` uses the full ambient gradient (default);
    ``'spherical'`` uses its tangential part D phi - phi nu.
    """
    nu = sphere_grid(integrand.dim, sphere_grid_resolution)
    phi = integrand.value(nu)
    dphi = integrand.gradient(nu)
    if gradient == "spherical":
        dphi = dphi - phi[:, None] * nu
    elif gradient != "ambient":
        raise ValueError("gradient must be 'ambient' or 'spherical'")
    return float(np.sqrt(phi**2 + np.sum(dphi**2, axis=-1)).max())


def min_phi(integrand, sphere_grid_resolution=17):
    nu = sphere_grid(integrand.dim, sphere_grid_resolution)
    return float(integrand.value(nu).min())


@dataclass
class IntegrandReport:
    """Ellipticity statistics of one integrand on one sphere grid."""

    a_min: float
    a_max: float
    stability_lambda: float
    c1_norm: float
    phi_min: float
    pinch_satisfied: bool          # [a_min, a_max] inside [1, sqrt(2)]
    pinch_satisfied_scaled: bool   # a_max <= sqrt(2) a_min (some rescaling fits)
    resolution: int

    def as_dict(self):
        return {
            "a_min": self.a_min,
            "a_max": self.a_max,
            "stability_lambda": self.stability_lambda,
            "c1_norm": self.c1_norm,
            "phi_min": self.phi_min,
            "pinch_satisfied": self.pinch_satisfied,
            "pinch_satisfied_scaled": self.pinch_satisfied_scaled,
            "resolution": self.resolution,
        }


def analyze(integrand, sphere_grid_resolution=17, pinch_tol=1e-9):
    a_min, a_max = pinch_bounds(integrand, sphere_grid_resolution)
    lam = a_min / a_max if a_min > 0 else float("nan")
    window = a_min >= 1.0 - pinch_tol and a_max <= SQRT2 + pinch_tol
    scaled = a_min > 0 and a_max <= SQRT2 * a_min + pinch_tol
    return IntegrandReport(
        a_min=a_min,
        a_max=a_max,
        stability_lambda=lam,
        c1_norm=c1_norm(integrand, sphere_grid_resolution),
        phi_min=min_phi(integrand, sphere_grid_resolution),
        pinch_satisfied=bool(window),
        pinch_satisfied_scaled=bool(scaled),
        resolution=int(sphere_grid_resolution),
    )


def catalog(dim):
    """Catalog integrands in ambient dimension ``dim`` keyed by name.

    ``quadratic_mild`` is tuned so the tangential Hessian window is exactly
    [1, 1.1^1.5]: positive definite matrix 1.1 * diag(1, ..., 1, 1.1).
    ``quadratic_aniso4`` (dim 4 only) violates the pinch with a_max = 4.
    """
    out = {"isotropic": Integrand.isotropic(dim)}
    mild = 1.1 * np.diag([1.0] * (dim - 1) + [1.1])
    out["quadratic_mild"] = Integrand.quadratic(mild)
    if dim == 4:
        out["quadratic_aniso4"] = Integrand.quadratic(np.diag([1.0, 1.0, 1.0, 4.0]))
        out["perturbed_axis"] = Integrand.perturbed(dim, 0.1, "axis2")
        out["perturbed_quartic"] = Integrand.perturbed(dim, 0.03, "quartic_saddle")
    else:
        out["perturbed_saddle"] = Integrand.perturbed(dim, 0.04, "saddle2")
    return out
