"""Velocity descriptors: evaluation, characteristics, variation, divergence."""

import math

import numpy as np
import pytest

from bvmix.flows import (AlternatingShear, CellularRotation, SmoothSpectral,
                         SpectralMode, divergence_residual, flow_dim,
                         flow_eval, flow_map, flow_tv, sample_flow)
from bvmix.grid import GridSpec


def test_alternating_shear_validation():
    with pytest.raises(ValueError):
        AlternatingShear(amplitude=-1.0)
    with pytest.raises(ValueError):
        AlternatingShear(tau=0.0)
    with pytest.raises(ValueError):
        AlternatingShear(profile="sawtooth")


def test_step_shear_one_sided_sampling():
    # the jump nodes take the limit from below: -a at y = 0, +a at y = 1/2
    u = AlternatingShear(amplitude=1.0, tau=1.0, profile="step")
    t = 0.5  # leg 0, shears along x
    assert np.allclose(flow_eval(u, np.array([0.3, 0.25]), t), [1.0, 0.0])
    assert np.allclose(flow_eval(u, np.array([0.3, 0.75]), t), [-1.0, 0.0])
    assert np.allclose(flow_eval(u, np.array([0.3, 0.0]), t), [-1.0, 0.0])
    assert np.allclose(flow_eval(u, np.array([0.3, 0.5]), t), [1.0, 0.0])


def test_alternating_legs_swap_axes():
    u = AlternatingShear(amplitude=1.0, tau=0.25, profile="sine")
    v0 = flow_eval(u, np.array([0.3, 0.1]), 0.1)   # leg 0
    v1 = flow_eval(u, np.array([0.3, 0.1]), 0.3)   # leg 1
    assert v0[1] == 0.0
    assert v1[0] == 0.0


def test_shear_flow_map_is_translation():
    # within one leg the y coordinate is frozen, so x moves linearly
    u = AlternatingShear(amplitude=1.0, tau=0.25, profile="step")
    end = flow_map(u, np.array([0.1, 0.25]), 0.25)
    assert np.allclose(end, [(0.1 + 0.25) % 1.0, 0.25], atol=1e-12)


def test_cellular_rotation_quarter_turn():
    # angular speed at the cell center is 2 pi, and the orbit's four-fold
    # symmetry makes the quarter turn exact, not just to linear order
    cr = CellularRotation(cells_per_axis=2)
    center = np.array([0.25, 0.25])
    off = 1e-4
    start = center + np.array([off, 0.0])
    v = flow_eval(cr, start, 0.0)
    assert np.hypot(*v) / off == pytest.approx(2.0 * math.pi, rel=1e-6)
    end = flow_map(cr, start, 0.25)
    assert np.abs(end - (center + np.array([0.0, off]))).max() < 1e-10


def test_flow_tv_values():
    assert flow_tv(SmoothSpectral((), dim=2)) == 0.0
    # one shear leg of amplitude a has variation 4a for both profiles
    assert flow_tv(AlternatingShear(1.0, 0.25, "step")) == pytest.approx(4.0, rel=1e-12)
    assert flow_tv(AlternatingShear(1.0, 0.25, "sine")) == pytest.approx(4.0, rel=1e-9)
    assert flow_tv(AlternatingShear(0.3, 1.0, "sine")) == pytest.approx(1.2, rel=1e-9)
    assert flow_tv(CellularRotation(2)) == pytest.approx(
        math.pi**2 * (math.sqrt(2.0) + 2.0) / 2.0, rel=1e-9)


def test_spectral_projection_makes_divergence_free():
    g = GridSpec(2, 64)
    modes = (SpectralMode(freq=(1, 2), amp=(1.0, 1.0), phase=0.3),
             SpectralMode(freq=(3, -1), amp=(0.5, -0.2), phase=1.1))
    proj = SmoothSpectral(modes, dim=2)
    raw = SmoothSpectral(modes, dim=2, project=False)
    assert divergence_residual(proj, g) < 1e-8
    assert divergence_residual(raw, g) > 1e-3


def test_sample_flow_shapes_and_dim():
    g = GridSpec(2, 32)
    u = sample_flow(AlternatingShear(0.5, 1.0, "sine"), g)
    assert len(u.components) == 2
    assert u.components[0].shape == g.shape
    assert flow_dim(AlternatingShear(1.0)) == 2
    assert flow_dim(SmoothSpectral((), dim=3)) == 3
