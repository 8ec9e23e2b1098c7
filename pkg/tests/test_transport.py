"""Advection snapshots, duality, reversal, and the mixing trace."""

import math

import numpy as np
import pytest

from bvmix.flows import AlternatingShear, SmoothSpectral
from bvmix.grid import GridSpec, ScalarField
from bvmix.transport import (advect, advect_callable, backward_advect,
                             interp_periodic, mixing_trace, pairing_drift,
                             snapshot_times)

ZERO_FLOW = SmoothSpectral((), dim=2)


def smooth_field(g):
    X, Y = g.node_coords()
    return ScalarField(g, np.cos(2 * np.pi * X) * np.sin(2 * np.pi * Y))


def test_snapshot_times():
    assert snapshot_times(0.0, None) == [0.0]
    assert snapshot_times(1.0, 0.25) == [0.0, 0.25, 0.5, 0.75, 1.0]
    # default cadence is T/32
    times = snapshot_times(2.0, None)
    assert len(times) == 33
    assert times[1] == pytest.approx(2.0 / 32.0)
    with pytest.raises(ValueError):
        snapshot_times(-1.0, None)
    with pytest.raises(ValueError):
        snapshot_times(1.0, -0.5)


def test_interp_nodes_exact():
    g = GridSpec(2, 32)
    X, Y = g.node_coords()
    vals = np.sin(2 * np.pi * X) * np.cos(4 * np.pi * Y)
    pts = np.stack([X, Y], axis=-1)
    assert np.abs(interp_periodic(vals, pts, g) - vals).max() == 0.0


def test_interp_midpoint_accuracy():
    g = GridSpec(2, 32)
    X, Y = g.node_coords()
    vals = np.sin(2 * np.pi * X)
    q = np.stack([(X + 0.5 * g.spacing) % 1.0, Y], axis=-1)
    err = np.abs(interp_periodic(vals, q, g) - np.sin(2 * np.pi * q[..., 0])).max()
    assert err < 5e-5  # one cubic-kernel step at n = 32


def test_zero_flow_advection_is_constant():
    g = GridSpec(2, 32)
    rho0 = smooth_field(g)
    run = advect(rho0, ZERO_FLOW, 1.0, cadence=0.25)
    for f in run.fields():
        assert np.array_equal(f.values, rho0.values)
    assert run.mass_drift == 0.0
    assert run.l2_drift == 0.0


def test_advection_drift_diagnostics():
    g = GridSpec(2, 64)
    rho0 = smooth_field(g)
    run = advect(rho0, AlternatingShear(0.3, tau=0.5, profile="sine"), 1.0)
    assert abs(run.mass_drift) < 1e-12
    assert abs(run.l2_drift) < 1e-3
    # pullback clips to the initial range, so no overshoot ever
    assert run.linf_growth <= 1.0 + 1e-12


def test_backward_snapshot_at_final_time_is_exact():
    g = GridSpec(2, 32)
    phiT = smooth_field(g)
    flow = AlternatingShear(0.3, tau=0.5, profile="sine")
    bwd = backward_advect(phiT, flow, [0.0, 0.5, 1.0])
    assert np.array_equal(bwd.fields()[-1].values, phiT.values)


def test_forward_backward_duality():
    # the pairing integral of forward and backward snapshots is a
    # conserved quantity of the continuous problem
    g = GridSpec(2, 32)
    flow = AlternatingShear(0.3, tau=0.5, profile="sine")
    fwd = advect(smooth_field(g), flow, 1.0, cadence=0.25)
    X, Y = g.node_coords()
    phiT = ScalarField(g, np.sin(2 * np.pi * X))
    bwd = backward_advect(phiT, flow, fwd.times())
    assert pairing_drift(fwd, bwd) < 1e-4


def test_time_reversal():
    g = GridSpec(2, 128)
    X, _ = g.node_coords()
    rho0 = ScalarField(g, np.cos(2 * np.pi * X))
    flow = AlternatingShear(0.3, tau=0.25, profile="sine")
    run = advect(rho0, flow, 0.5, cadence=0.25)
    back = backward_advect(run.final(), flow, [0.0, 0.25, 0.5])
    err = np.abs(back.fields()[0].values - rho0.values).max()
    assert err < 1e-3  # interpolation-limited at this resolution


def test_callable_advection_matches_grid_pullback():
    g = GridSpec(2, 32)
    flow = AlternatingShear(0.3, tau=0.5, profile="sine")
    times = snapshot_times(1.0, 0.25)
    grid_run = advect(ScalarField(g, np.cos(2 * np.pi * g.node_coords()[0])),
                      flow, 1.0, cadence=0.25)
    exact_run = advect_callable(lambda p: np.cos(2 * np.pi * p[..., 0]),
                                g, flow, times)
    gap = np.abs(exact_run.final().values - grid_run.final().values).max()
    assert gap < 1e-3


def test_advect_validation():
    g = GridSpec(2, 16)
    with pytest.raises(ValueError):
        advect(smooth_field(g), SmoothSpectral((), dim=3), 1.0)
    with pytest.raises(ValueError):
        advect(smooth_field(g), ZERO_FLOW, 1.0, method="spectral")


def test_mixing_trace_flat_for_zero_flow():
    g = GridSpec(2, 32)
    X, Y = g.node_coords()
    cb = ScalarField(g, np.where(((np.floor(2 * X) + np.floor(2 * Y)) % 2) < 1,
                                 1.0, -1.0))
    tr = mixing_trace(cb, ZERO_FLOW, [0.5 * k for k in range(5)])
    vals = [v for _, v in tr]
    assert all(v == vals[0] for v in vals)
    assert tr[0][0] == 0.0


def test_mixing_trace_decays_under_alternating_shear():
    g = GridSpec(2, 64)
    X, _ = g.node_coords()
    rho0 = ScalarField(g, np.cos(2 * np.pi * X))
    flow = AlternatingShear(amplitude=1.0, tau=0.5, profile="sine")
    tr = mixing_trace(rho0, flow, [0.5 * k for k in range(9)])
    vals = [v for _, v in tr]
    assert vals[0] == pytest.approx(1.0 / (2.0 * math.pi * math.sqrt(2.0)), abs=1e-10)
    assert all(v > 0.0 for v in vals)
    assert vals[-1] < 0.2 * vals[0]


def test_mixing_trace_prepends_time_zero():
    g = GridSpec(2, 32)
    tr = mixing_trace(smooth_field(g), ZERO_FLOW, [0.5, 1.0])
    assert [t for t, _ in tr] == [0.0, 0.5, 1.0]


def test_mixing_trace_unknown_norm():
    g = GridSpec(2, 16)
    with pytest.raises(ValueError):
        mixing_trace(smooth_field(g), ZERO_FLOW, [1.0], norm="l2")


def test_mixing_trace_weak_norm_variant():
    g = GridSpec(2, 16)
    X, _ = g.node_coords()
    rho0 = ScalarField(g, np.sign(np.cos(2 * np.pi * X)))
    tr = mixing_trace(rho0, ZERO_FLOW, [1.0], norm="wminus11")
    assert tr[0][1] == tr[1][1]
    assert tr[0][1] > 0.0
