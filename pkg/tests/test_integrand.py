import numpy as np
import pytest

from anisocheck import integrand as ig

SQRT2 = np.sqrt(2.0)


def test_isotropic_derivatives_at_unit_vector():
    iso = ig.Integrand.isotropic(4)
    nu = np.array([0.5, 0.5, 0.5, 0.5])
    phi, grad, hess = ig.eval_derivatives(iso, nu)
    assert phi == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(grad, nu, atol=1e-15)
    assert np.allclose(hess, np.eye(4) - np.outer(nu, nu), atol=1e-15)


def test_quadratic_identity_matrix_equals_isotropic():
    iso = ig.Integrand.isotropic(4)
    quad = ig.Integrand.quadratic(np.eye(4))
    rng = np.random.default_rng(3)
    v = rng.normal(size=(50, 4))
    assert np.allclose(quad.value(v), iso.value(v), atol=1e-14)
    assert np.allclose(quad.gradient(v), iso.gradient(v), atol=1e-13)
    assert np.allclose(quad.hessian(v), iso.hessian(v), atol=1e-13)


def test_quadratic_aniso4_at_first_axis():
    quad = ig.Integrand.quadratic(np.diag([1.0, 1.0, 1.0, 4.0]))
    e1 = np.array([1.0, 0.0, 0.0, 0.0])
    phi, grad, hess = ig.eval_derivatives(quad, e1)
    assert phi == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(grad, e1, atol=1e-15)
    assert hess[3, 3] == pytest.approx(4.0, abs=1e-14)


def test_zero_vector_rejected():
    iso = ig.Integrand.isotropic(4)
    with pytest.raises(ValueError):
        iso.value(np.zeros(4))


def test_homogeneity_euler_radial_invariants():
    rng = np.random.default_rng(11)
    for integ in ig.catalog(4).values():
        v = rng.normal(size=(1000, 4))
        v /= np.linalg.norm(v, axis=1)[:, None]
        assert np.abs(integ.value(2.0 * v) - 2.0 * integ.value(v)).max() <= 1e-12
        euler = np.einsum("pi,pi->p", integ.gradient(v), v) - integ.value(v)
        assert np.abs(euler).max() <= 1e-10
        radial = np.einsum("pde,pe->pd", integ.hessian(v), v)
        assert np.abs(radial).max() <= 1e-8


def test_derivatives_match_finite_differences():
    rng = np.random.default_rng(5)
    for d in (3, 4):
        for integ in ig.catalog(d).values():
            v = rng.normal(size=d)
            v /= np.linalg.norm(v)
            g = integ.gradient(v)
            h = integ.hessian(v)
            g_fd = ig.fd_gradient(integ.value, v, step=1e-3)
            h_fd = ig.fd_hessian(integ.value, v, step=1e-3)
            assert np.abs(g_fd - g).max() / max(1.0, np.abs(g).max()) <= 1e-6
            assert np.abs(h_fd - h).max() / max(1.0, np.abs(h).max()) <= 1e-6


def test_pinch_bounds_isotropic():
    a_min, a_max = ig.pinch_bounds(ig.Integrand.isotropic(4), 17)
    assert a_min == pytest.approx(1.0, abs=1e-12)
    assert a_max == pytest.approx(1.0, abs=1e-12)


def test_pinch_bounds_aniso4():
    # support function of the ellipsoid with semiaxes (1,1,1,2): principal
    # curvature radii range over [a^2/b, b^2/a] = [1/2, 4]; the grid
    # contains the axis directions so both extremes are hit exactly
    quad = ig.Integrand.quadratic(np.diag([1.0, 1.0, 1.0, 4.0]))
    a_min, a_max = ig.pinch_bounds(quad, 17)
    assert a_min == pytest.approx(0.5, abs=1e-12)
    assert a_max == pytest.approx(4.0, abs=1e-9)
    rep = ig.analyze(quad, 17)
    assert not rep.pinch_satisfied
    assert not rep.pinch_satisfied_scaled
    assert rep.stability_lambda == pytest.approx(1.0 / 8.0, abs=1e-12)


def test_pinch_bounds_mild_quadratic_window():
    # 1.1 * diag(1, 1, 1, 1.1): radii window exactly [1, 1.1^(3/2)]
    mild = ig.Integrand.quadratic(1.1 * np.diag([1.0, 1.0, 1.0, 1.1]))
    a_min, a_max = ig.pinch_bounds(mild, 17)
    assert a_min == pytest.approx(1.0, abs=1e-12)
    assert a_max == pytest.approx(1.1**1.5, abs=1e-12)
    rep = ig.analyze(mild, 17)
    assert rep.pinch_satisfied and rep.pinch_satisfied_scaled


def test_unnormalized_mild_quadratic_needs_scaling():
    # diag(1,1,1,1.1) alone dips below 1 at the pole (a_min = 1.1^-1/2)
    lit = ig.Integrand.quadratic(np.diag([1.0, 1.0, 1.0, 1.1]))
    rep = ig.analyze(lit, 17)
    assert rep.a_min == pytest.approx(1.1**-0.5, abs=1e-12)
    assert rep.a_max == pytest.approx(1.1, abs=1e-12)
    assert not rep.pinch_satisfied
    assert rep.pinch_satisfied_scaled


def test_stability_lambda_scale_invariant():
    quad = ig.Integrand.quadratic(np.diag([1.0, 1.0, 1.0, 4.0]))
    lam = ig.stability_lambda(quad, 9)
    lam_scaled = ig.stability_lambda(quad.rescaled(3.7), 9)
    assert lam_scaled == pytest.approx(lam, rel=1e-12)
    pert = ig.Integrand.perturbed(4, 0.05, "quartic_saddle")
    assert ig.stability_lambda(pert.rescaled(0.2), 9) == pytest.approx(
        ig.stability_lambda(pert, 9), rel=1e-12)


def test_catalog_pinched_integrands_have_large_lambda():
    for d in (3, 4):
        for name, integ in ig.catalog(d).items():
            rep = ig.analyze(integ, 17)
            if name == "quadratic_aniso4":
                continue
            assert rep.pinch_satisfied_scaled, name
            assert rep.stability_lambda >= 1.0 / SQRT2 - 1e-12, name


def test_c1_norm_values():
    iso = ig.Integrand.isotropic(4)
    assert ig.c1_norm(iso, 17) == pytest.approx(SQRT2, abs=1e-12)
    assert ig.c1_norm(iso.rescaled(2.0), 17) == pytest.approx(2 * SQRT2, abs=1e-12)
    assert ig.c1_norm(iso, 17, gradient="spherical") == pytest.approx(1.0, abs=1e-12)
    quad = ig.Integrand.quadratic(np.diag([1.0, 1.0, 1.0, 4.0]))
    # at nu = e4: phi = 2 and |D phi| = 2, so the norm is at least 2
    assert ig.c1_norm(quad, 17) >= 2.0


def test_min_phi_values():
    assert ig.min_phi(ig.Integrand.isotropic(4), 17) == pytest.approx(1.0, abs=1e-12)
    quad = ig.Integrand.quadratic(np.diag([1.0, 1.0, 1.0, 4.0]))
    # min over the sphere of sqrt(v^T A v) is the square root of the
    # smallest eigenvalue of A
    assert ig.min_phi(quad, 17) == pytest.approx(1.0, abs=1e-12)
    pert = ig.Integrand.perturbed(4, 0.1, "axis2")
    assert 0.9 <= ig.min_phi(pert, 17) <= 1.0


def test_sphere_grid_contains_axes_and_rejects_small_resolution():
    grid = ig.sphere_grid(4, 17)
    assert np.allclose(np.linalg.norm(grid, axis=1), 1.0, atol=1e-14)
    for i in range(4):
        e = np.zeros(4)
        e[i] = 1.0
        assert np.min(np.linalg.norm(grid - e, axis=1)) <= 1e-14
    with pytest.raises(ValueError):
        ig.sphere_grid(4, 7)


def test_tangent_basis_orthonormal_to_normal():
    rng = np.random.default_rng(2)
    nu = rng.normal(size=(200, 4))
    nu /= np.linalg.norm(nu, axis=1)[:, None]
    T = ig.tangent_basis(nu)
    assert np.abs(np.einsum("pd,pdi->pi", nu, T)).max() <= 1e-13
    gram = np.einsum("pdi,pdj->pij", T, T)
    assert np.abs(gram - np.eye(3)).max() <= 1e-13


def test_pinch_bounds_resolution_doubling_stable():
    pert = ig.Integrand.perturbed(4, 0.1, "axis2")
    a1 = ig.pinch_bounds(pert, 17)
    a2 = ig.pinch_bounds(pert, 33)
    assert abs(a1[0] - a2[0]) <= 1e-3
    assert abs(a1[1] - a2[1]) <= 1e-3
