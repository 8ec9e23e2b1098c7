"""Mollifier construction, the sheared-kernel cancellation, and sampling."""

import numpy as np
import pytest
import scipy.linalg

from bvmix.grid import GridSpec
from bvmix.mollifiers import (AnisotropicMollifier, IsotropicMollifier,
                              alberti_eval, alberti_grad,
                              anisotropic_l1_decay, cancellation_residual,
                              matrix_exp, sample_isotropic,
                              sample_isotropic_gradient)

SHEAR = np.array([[0.0, 1.0], [0.0, 0.0]])


def test_matrix_exp_matches_scipy():
    rng = np.random.default_rng(5)
    for _ in range(50):
        a = rng.standard_normal((2, 2))
        assert np.abs(matrix_exp(a) - scipy.linalg.expm(a)).max() < 1e-12


def test_isotropic_mass_and_support():
    m = IsotropicMollifier(2, 0.3)
    xs = np.linspace(-0.5, 0.5, 801)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    pts = np.stack([X, Y], axis=-1)
    vals = m(pts)
    h = xs[1] - xs[0]
    assert float(vals.sum()) * h * h == pytest.approx(1.0, abs=1e-3)
    # support is the ball of the declared radius
    outside = np.hypot(X, Y) > m.radius
    assert np.all(vals[outside] == 0.0)
    with pytest.raises(ValueError):
        IsotropicMollifier(2, 0.0)


def test_cancellation_residual_zero_matrix():
    m = AnisotropicMollifier.make(3.0, np.zeros((2, 2)), 1e-5)
    pts = np.random.default_rng(1).uniform(-1.2, 1.2, size=(8, 2))
    assert float(np.max(cancellation_residual(m, pts))) == 0.0


def test_cancellation_residual_random_traceless():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(6):
        mat = rng.standard_normal((2, 2))
        mat[1, 1] = -mat[0, 0]
        mat /= np.linalg.norm(mat)
        lam = rng.uniform(1.0, 8.0)
        m = AnisotropicMollifier.make(lam, mat, 1e-5)
        pts = rng.uniform(-1.2, 1.2, size=(16, 2))
        worst = max(worst, float(np.max(cancellation_residual(m, pts))))
    assert worst < 1e-9


def test_alberti_grad_matches_differences():
    rng = np.random.default_rng(9)
    m = AnisotropicMollifier.make(2.5, SHEAR, 1e-6)
    pts = rng.uniform(-1.1, 1.1, size=(12, 2))
    grad = alberti_grad(m, pts)
    h = 1e-5
    for ax in range(2):
        e = np.zeros(2)
        e[ax] = h
        num = (alberti_eval(m, pts + e) - alberti_eval(m, pts - e)) / (2.0 * h)
        assert np.abs(grad[..., ax] - num).max() < 1e-6


def test_anisotropic_decay_zero_matrix():
    m = AnisotropicMollifier.make(4.0, np.zeros((2, 2)), 1e-15)
    assert anisotropic_l1_decay(m) == 0.0


def test_anisotropic_decay_halving_and_product():
    vals = {}
    for lam in (2.0, 4.0, 8.0, 16.0, 32.0):
        m = AnisotropicMollifier.make(lam, SHEAR, 1e-15)
        vals[lam] = anisotropic_l1_decay(m)
    for lam in (2.0, 4.0, 8.0, 16.0):
        # doubling lam shrinks the integral by at least a fixed factor
        assert vals[2 * lam] < 0.75 * vals[lam]
    products = [lam * vals[lam] for lam in (2.0, 4.0, 8.0, 16.0, 32.0)]
    assert all(p < 2.0 for p in products)
    assert products == sorted(products)
    assert products[0] == pytest.approx(1.0, abs=1e-3)


def test_sample_isotropic_unit_discrete_mass():
    g = GridSpec(2, 64)
    k = sample_isotropic(g, 0.1)
    assert float(k.field.values.sum()) * g.cell_volume == pytest.approx(1.0, abs=1e-12)
    assert k.field.values.min() >= 0.0
    assert 0.9 < k.mass_factor <= 1.0


def test_sample_isotropic_unresolved_guard():
    g = GridSpec(2, 32)
    with pytest.raises(ValueError):
        sample_isotropic(g, 1e-4)
    k = sample_isotropic(g, 1e-4, allow_unresolved=True)
    # sub-grid scale: all the mass sits on one node
    assert np.count_nonzero(k.field.values) == 1
    assert float(k.field.values.sum()) * g.cell_volume == pytest.approx(1.0, abs=1e-12)


def test_sample_isotropic_rejects_torus_wrap():
    g = GridSpec(2, 64)
    with pytest.raises(ValueError):
        sample_isotropic(g, 0.5)


def test_sample_gradient_kernel_has_zero_mean():
    # the gradient of a compactly supported kernel integrates to zero
    g = GridSpec(2, 64)
    k = sample_isotropic(g, 0.1)
    for comp in sample_isotropic_gradient(g, k):
        assert abs(float(comp.sum())) * g.cell_volume < 1e-10


def test_anisotropic_radius_stretch():
    m = AnisotropicMollifier.make(1.0, SHEAR, 0.02)
    assert m.radius >= 0.02
    assert m.matrix.shape == (2, 2)
