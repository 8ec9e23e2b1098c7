"""Regularisation parameters, the averaged-Jacobian field, the remainder
decompositions, and the vanishing ladder."""

import math

import numpy as np
import pytest

from bvmix.commutator import (RegularisationParams, bound_report_five,
                              bound_report_seven, decomposition_residual,
                              dl_commutator, identity_times, mbar_field,
                              report_to_csv, split_residuals,
                              vanishing_sequence, vanishing_to_csv)
from bvmix.flows import (AlternatingShear, SmoothSpectral, SpectralMode,
                         sample_flow)
from bvmix.grid import GridSpec, ScalarField, VectorField
from bvmix.mollifiers import AnisotropicMollifier

ZERO_FLOW = SmoothSpectral((), dim=2)


@pytest.fixture(scope="module")
def smooth_pair():
    """One forward/backward snapshot pair shared by the report tests."""
    from bvmix.transport import advect, backward_advect
    g = GridSpec(2, 32)
    X, Y = g.node_coords()
    flow = AlternatingShear(amplitude=0.3, tau=0.5, profile="sine")
    fwd = advect(ScalarField(g, np.cos(2 * np.pi * X)), flow, 1.0)
    bwd = backward_advect(ScalarField(g, np.sin(2 * np.pi * X) * np.cos(2 * np.pi * Y)),
                          flow, fwd.times())
    return fwd, bwd, flow


def test_params_validation():
    with pytest.raises(ValueError):
        RegularisationParams(lam=-1.0, delta=0.01, epsilon=0.1)
    with pytest.raises(ValueError):
        RegularisationParams(lam=1.0, delta=0.0, epsilon=0.1)
    # delta must stay below epsilon * e^-lam
    with pytest.raises(ValueError):
        RegularisationParams(lam=1.0, delta=0.05, epsilon=0.1)
    # support delta * e^lam must fit inside the torus
    with pytest.raises(ValueError):
        RegularisationParams(lam=4.0, delta=0.01, epsilon=0.9)
    with pytest.raises(ValueError):
        RegularisationParams(lam=0.1, delta=0.01, epsilon=0.2, delta_prime=-0.1,
                             epsilon_prime=0.05)


def test_support_radius():
    p = RegularisationParams(lam=1.0, delta=0.02, epsilon=0.1)
    assert p.support_radius() == pytest.approx(0.02 * math.e, rel=1e-12)


def test_mbar_of_sine_shear_has_one_slot():
    g = GridSpec(2, 128)
    u = sample_flow(AlternatingShear(1.0, tau=1.0, profile="sine"), g)
    mb = mbar_field(u, 0.05)
    s = mb.samples
    assert s[..., 0, 1].min() == pytest.approx(-1.0, abs=1e-9)
    assert s[..., 0, 1].max() == pytest.approx(1.0, abs=1e-9)
    for i, j in ((0, 0), (1, 0), (1, 1)):
        assert np.abs(s[..., i, j]).max() == 0.0


def test_mbar_of_constant_flow_is_negligible():
    g = GridSpec(2, 32)
    u = VectorField(g, [np.full(g.shape, 0.4), np.full(g.shape, -0.9)])
    assert np.abs(mbar_field(u, 0.05).samples).max() == 0.0


def test_mbar_invariants_on_random_flow():
    g = GridSpec(2, 64)
    modes = (SpectralMode(freq=(1, 2), amp=(0.7, 0.1), phase=0.2),
             SpectralMode(freq=(2, -1), amp=(-0.3, 0.5), phase=1.7))
    u = sample_flow(SmoothSpectral(modes, dim=2), g)
    s = mbar_field(u, 0.04).samples
    trace = s[..., 0, 0] + s[..., 1, 1]
    frob = np.sqrt((s ** 2).sum(axis=(-2, -1)))
    assert np.abs(trace).max() < 1e-9
    assert frob.max() <= 1.0 + 1e-9


def test_mbar_torus_guard():
    g = GridSpec(2, 32)
    u = sample_flow(AlternatingShear(1.0, 1.0, "sine"), g)
    with pytest.raises(ValueError):
        mbar_field(u, 0.2)  # smoothing radius 4*eps would wrap


def test_commutator_vanishes_for_constant_velocity():
    g = GridSpec(2, 64)
    X, Y = g.node_coords()
    phi = ScalarField(g, np.sin(2 * np.pi * X) * np.cos(4 * np.pi * Y))
    u = VectorField(g, [np.full(g.shape, 0.7), np.full(g.shape, -0.2)])
    m = AnisotropicMollifier.make(1.0, np.array([[0.0, 1.0], [0.0, 0.0]]), 0.02)
    r = dl_commutator(phi, u, m)
    assert np.abs(r.values).max() == 0.0


def test_identity_times_brackets():
    ts = identity_times(2.0)
    assert ts[0] == 0.0 and ts[-1] == 2.0
    assert len(ts) == 14
    assert all(b > a for a, b in zip(ts, ts[1:]))


def test_five_term_identity(smooth_pair):
    fwd, bwd, flow = smooth_pair
    p = RegularisationParams(lam=0.5, delta=0.02, epsilon=0.1)
    report = bound_report_five(fwd, bwd, flow, p)
    assert [t.name for t in report.terms] == ["I1", "I2", "I3", "I4", "I5"]
    assert decomposition_residual(report) < 1e-10
    assert all(t.rhs_value >= 0.0 for t in report.terms)
    assert all(t.lhs_value is not None for t in report.terms)
    assert "final_pairing" in report.norms


def test_seven_term_identity_and_splits(smooth_pair):
    fwd, bwd, flow = smooth_pair
    p = RegularisationParams(lam=0.5, delta=0.02, epsilon=0.1,
                             delta_prime=0.007, epsilon_prime=0.04)
    report = bound_report_seven(fwd, bwd, flow, p)
    names = [t.name for t in report.terms]
    assert names == ["I1", "I2", "I3", "I4", "I5", "I3p", "I4p", "I5p", "R1", "R2"]
    assert decomposition_residual(report) < 1e-10
    splits = split_residuals(report)
    # the refined terms re-slice the coarse ones exactly
    assert splits["I3_split"] < 1e-12
    assert splits["I45_split"] < 1e-12


def test_seven_term_requires_cutoffs(smooth_pair):
    fwd, bwd, flow = smooth_pair
    p = RegularisationParams(lam=0.5, delta=0.02, epsilon=0.1)
    with pytest.raises(ValueError):
        bound_report_seven(fwd, bwd, flow, p)


def test_report_csv_round_trip(smooth_pair, tmp_path):
    fwd, bwd, flow = smooth_pair
    p = RegularisationParams(lam=0.5, delta=0.02, epsilon=0.1)
    report = bound_report_five(fwd, bwd, flow, p)
    path = tmp_path / "bounds.csv"
    report_to_csv(report, str(path))
    lines = path.read_text().splitlines()
    header = [ln for ln in lines if not ln.startswith("#")][0]
    assert header == "name,rhs_value,lhs_value,lam,delta,delta_prime,epsilon,epsilon_prime"
    rows = [ln for ln in lines if not ln.startswith("#")][1:]
    assert len(rows) == 5
    first = rows[0].split(",")
    assert first[0] == "I1"
    assert float(first[3]) == 0.5


def test_vanishing_zero_flow_short_circuit():
    g = GridSpec(2, 32)
    X, Y = g.node_coords()
    phiT = ScalarField(g, np.sin(2 * np.pi * X) * np.cos(2 * np.pi * Y))
    rungs = vanishing_sequence(ZERO_FLOW, phiT, [1.0, 0.5])
    assert len(rungs) == 2
    for r in rungs:
        assert r.achieved
        assert r.lam == 0.0
        assert r.kappa_floor is None
        assert r.rhs["I2"] == 0.0
        assert max(r.rhs.values()) <= r.kappa
        # with no transport only the plain mollification term is active
        assert r.rhs["I3"] == r.rhs["I4"] == r.rhs["I5"] == 0.0


def test_vanishing_reports_floor_when_stuck():
    g = GridSpec(2, 32)
    X, Y = g.node_coords()
    phiT = ScalarField(g, np.sin(2 * np.pi * X) * np.cos(2 * np.pi * Y))
    flow = AlternatingShear(0.5, tau=1.0, profile="step")
    rungs = vanishing_sequence(flow, phiT, [1.0, 0.25, 0.05])
    assert rungs[0].achieved
    # the forced averaging parameter grows as kappa shrinks until the
    # resolution floor wins; then the rung must say what it did achieve
    stuck = [r for r in rungs if not r.achieved]
    assert stuck
    for r in stuck:
        assert r.kappa_floor is not None
        assert r.kappa_floor == pytest.approx(max(r.rhs.values()), rel=1e-12)
        assert r.kappa_floor > r.kappa


def test_vanishing_ladder_validation():
    g = GridSpec(2, 16)
    phiT = ScalarField(g, np.zeros(g.shape))
    with pytest.raises(ValueError):
        vanishing_sequence(ZERO_FLOW, phiT, [0.5, 1.0])
    with pytest.raises(ValueError):
        vanishing_sequence(ZERO_FLOW, phiT, [1.0, -0.5])
    with pytest.raises(ValueError):
        vanishing_sequence(ZERO_FLOW, phiT, [])
    with pytest.raises(ValueError):
        vanishing_sequence(ZERO_FLOW, phiT, [1.0], T=0.0)


def test_vanishing_csv(tmp_path):
    g = GridSpec(2, 32)
    X, Y = g.node_coords()
    phiT = ScalarField(g, np.sin(2 * np.pi * X) * np.cos(2 * np.pi * Y))
    rungs = vanishing_sequence(ZERO_FLOW, phiT, [1.0])
    path = tmp_path / "vanishing.csv"
    vanishing_to_csv(rungs, str(path))
    lines = path.read_text().splitlines()
    assert lines[0].startswith("kappa,achieved,kappa_floor")
    assert len(lines) == 2
    assert lines[1].split(",")[1] == "1"
