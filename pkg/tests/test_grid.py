"""Grid container, spectral round trips, convolution, serialization."""

import numpy as np
import pytest

from bvmix.grid import (GridSpec, ScalarField, SpectralField, VectorField,
                        convolve_periodic, from_spectral, load_field,
                        save_field, to_spectral, translate)
from bvmix.mollifiers import sample_isotropic


def test_gridspec_rejects_bad_sizes():
    with pytest.raises(ValueError):
        GridSpec(2, 31)
    with pytest.raises(ValueError):
        GridSpec(2, 0)
    with pytest.raises(ValueError):
        GridSpec(0, 16)


def test_gridspec_geometry():
    g = GridSpec(2, 64)
    assert g.spacing == 1.0 / 64
    assert g.cell_volume == g.spacing**2
    assert g.shape == (64, 64)
    assert g.axis_coords()[0] == 0.0
    assert g.axis_coords()[-1] == pytest.approx(1.0 - g.spacing)


def test_scalar_field_shape_guard():
    g = GridSpec(2, 8)
    with pytest.raises(ValueError):
        ScalarField(g, np.zeros((8, 4)))


def test_vector_field_component_count():
    g = GridSpec(2, 8)
    with pytest.raises(ValueError):
        VectorField(g, [np.zeros((8, 8))])


def test_to_spectral_single_mode():
    g = GridSpec(2, 64)
    X, _ = g.node_coords()
    s = to_spectral(ScalarField(g, np.cos(2 * np.pi * X)))
    assert s.coeffs[1, 0] == pytest.approx(0.5, abs=1e-12)
    assert s.coeffs[-1, 0] == pytest.approx(0.5, abs=1e-12)
    rest = s.coeffs.copy()
    rest[1, 0] = rest[-1, 0] = 0.0
    assert np.abs(rest).max() < 1e-12


def test_from_spectral_zero_and_constant():
    g = GridSpec(2, 16)
    zero = from_spectral(SpectralField(g, np.zeros(g.shape, dtype=complex)))
    assert np.all(zero.values == 0.0)
    coeffs = np.zeros(g.shape, dtype=complex)
    coeffs[0, 0] = 2.5
    const = from_spectral(SpectralField(g, coeffs))
    assert np.allclose(const.values, 2.5, atol=1e-13)


def test_spectral_round_trip():
    g = GridSpec(2, 32)
    X, Y = g.node_coords()
    f = ScalarField(g, np.cos(2 * np.pi * X) + 0.3 * np.sin(4 * np.pi * Y))
    back = from_spectral(to_spectral(f))
    assert np.abs(back.values - f.values).max() < 1e-12


def test_from_spectral_rejects_asymmetric_coeffs():
    g = GridSpec(2, 8)
    coeffs = np.zeros(g.shape, dtype=complex)
    coeffs[1, 0] = 1.0  # conjugate partner missing
    with pytest.raises(ValueError):
        from_spectral(SpectralField(g, coeffs))


def test_convolution_mode_eigenvalue():
    # a cosine mode is an eigenvector of the circulant convolution; the
    # eigenvalue must equal the direct node quadrature of the kernel
    # against that mode
    g = GridSpec(2, 128)
    X, _ = g.node_coords()
    k = sample_isotropic(g, 0.08)
    offs = g.centered_offsets()
    factor = float((k.field.values * np.cos(2 * np.pi * offs[0])).sum()
                   * g.cell_volume)
    out = convolve_periodic(ScalarField(g, np.cos(2 * np.pi * X)), k.field)
    assert np.abs(out.values - factor * np.cos(2 * np.pi * X)).max() < 1e-12
    assert 0.9 < factor < 1.0


def test_convolution_rejects_non_unit_mass_mollifier():
    g = GridSpec(2, 16)
    bad = ScalarField(g, np.full(g.shape, 0.5))
    with pytest.raises(ValueError):
        convolve_periodic(ScalarField(g, np.ones(g.shape)), bad)


def test_translate_exact():
    g = GridSpec(2, 32)
    X, Y = g.node_coords()
    f = ScalarField(g, np.cos(2 * np.pi * X) * np.sin(2 * np.pi * Y))
    t = translate(f, (3, -5))
    want = np.roll(f.values, (3, -5), axis=(0, 1))
    assert np.array_equal(t.values, want)


@pytest.mark.parametrize("fmt", ["binary", "csv"])
def test_save_load_round_trip(tmp_path, fmt):
    g = GridSpec(2, 16)
    rng = np.random.default_rng(3)
    f = ScalarField(g, rng.standard_normal(g.shape))
    path = str(tmp_path / f"field.{fmt}")
    save_field(f, path, fmt=fmt)
    back = load_field(path)
    assert back.grid == g
    # %.17g round-trips float64 exactly, so both formats are lossless
    assert np.array_equal(back.values, f.values)


def test_save_rejects_unknown_format(tmp_path):
    g = GridSpec(2, 8)
    f = ScalarField(g, np.zeros(g.shape))
    with pytest.raises(ValueError):
        save_field(f, str(tmp_path / "x"), fmt="hdf5")
