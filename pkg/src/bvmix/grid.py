"""Periodic grids, fields, and spectral transforms on the unit torus.

Everything downstream works on uniform node grids over [0,1)^d with
periodic wrap.  The Fourier convention is

    f(x) = sum_w  fhat(w) exp(2*pi*i w.x),   w integer frequencies,

so that coefficients are obtained from ``numpy.fft.fftn`` divided by the
node count and Parseval reads ``sum |fhat|^2 = mean |f|^2``.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field

import numpy as np

_BINARY_MAGIC = b"BVMX"  # little-endian header + float64 payload


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid: ``n`` nodes per axis on the torus [0,1)^d.

    ``n`` must be a power of two (>= 4) so that halving/refinement studies
    nest exactly and FFT sizes stay friendly.
    """

    dim: int
    n: int

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"grid dimension must be >= 1, got {self.dim}")
        if self.n < 4 or not _is_pow2(self.n):
            raise ValueError(f"nodes per axis must be a power of two >= 4, got {self.n}")

    @property
    def spacing(self) -> float:
        return 1.0 / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    def axis_coords(self) -> np.ndarray:
        """Node positions along one axis: 0, 1/n, ..., (n-1)/n."""
        return np.arange(self.n) / self.n

    def node_coords(self) -> list[np.ndarray]:
        """Meshgrid arrays (ij indexing) of node positions, one per axis."""
        ax = self.axis_coords()
        return list(np.meshgrid(*([ax] * self.dim), indexing="ij"))

    def centered_offsets(self) -> list[np.ndarray]:
        """Node displacements wrapped to [-1/2, 1/2), one array per axis.

        Entry [j] is the signed displacement of node j from the origin, so
        kernels sampled on these arrays are centered at node 0 with wrap.
        """
        ax = self.axis_coords()
        ax = np.where(ax >= 0.5, ax - 1.0, ax)
        return list(np.meshgrid(*([ax] * self.dim), indexing="ij"))

    def frequencies(self) -> list[np.ndarray]:
        """Integer frequency meshgrids matching fftn layout."""
        k = np.fft.fftfreq(self.n, d=1.0 / self.n)
        return list(np.meshgrid(*([k] * self.dim), indexing="ij"))


@dataclass
class ScalarField:
    """Real scalar samples on a :class:`GridSpec`, row-major layout."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    def mean(self) -> float:
        return float(self.values.mean())

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


@dataclass
class VectorField:
    """d-component vector samples on a shared grid."""

    grid: GridSpec
    components: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        comps = tuple(np.asarray(c, dtype=float) for c in self.components)
        if len(comps) != self.grid.dim:
            raise ValueError(
                f"expected {self.grid.dim} components, got {len(comps)}"
            )
        for c in comps:
            if c.shape != self.grid.shape:
                raise ValueError("component shape does not match grid")
        self.components = comps

    def max_norm(self) -> float:
        sq = sum(c**2 for c in self.components)
        return float(np.sqrt(sq.max()))


@dataclass
class SpectralField:
    """Complex Fourier coefficients, fftn layout, convention fhat = fftn/n^d."""

    grid: GridSpec
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != self.grid.shape:
            raise ValueError("coefficient shape does not match grid")


def to_spectral(f: ScalarField) -> SpectralField:
    coeffs = np.fft.fftn(f.values) / f.grid.n**f.grid.dim
    return SpectralField(f.grid, coeffs)


def from_spectral(s: SpectralField, tol: float = 1e-10) -> ScalarField:
    """Inverse transform; rejects coefficients without Hermitian symmetry.

    The symmetry check compares fhat(w) with conj(fhat(-w)) in max norm,
    scaled by the largest coefficient magnitude.
    """
    c = s.coeffs
    flipped = c
    for ax in range(c.ndim):
        flipped = np.flip(np.roll(flipped, -1, axis=ax), axis=ax)
    scale = max(float(np.abs(c).max()), 1e-300)
    asym = float(np.abs(c - np.conj(flipped)).max()) / scale
    if asym > tol:
        raise ValueError(
            f"spectral coefficients are not Hermitian-symmetric (relative deviation {asym:.3e})"
        )
    vals = np.fft.ifftn(c).real * s.grid.n**s.grid.dim
    return ScalarField(s.grid, vals)


def convolve_periodic(f: ScalarField, kernel: ScalarField) -> ScalarField:
    """Discrete periodic convolution (f * kernel)(x) = sum_y f(x-y) k(y) dx^d.

    ``kernel`` holds point samples of the kernel centered at node 0 (use
    :meth:`GridSpec.centered_offsets` to build it).  A non-negative kernel
    is treated as a mollifier and must carry discrete unit mass within
    1e-6; the samplers in :mod:`bvmix.mollifiers` renormalize to exact
    discrete unit mass, so kernels built there always pass.  The circular
    sum is evaluated by FFT, which reproduces the direct node sum up to
    roundoff.  For non-negative inputs the tiny negative roundoff is
    clipped so that positivity is exact; this matters downstream where
    band energies feed non-negativity certificates.
    """
    if f.grid != kernel.grid:
        raise ValueError("field and kernel must share a grid")
    if kernel.values.min() >= 0.0:
        mass = float(kernel.values.sum()) * f.grid.cell_volume
        if abs(mass - 1.0) > 1e-6:
            raise ValueError(
                f"mollifier kernel must have discrete unit mass (got {mass:.8f}); "
                "sample it through bvmix.mollifiers so it is renormalized"
            )
    fa, ka = f.values, kernel.values
    out = np.fft.ifftn(np.fft.fftn(fa) * np.fft.fftn(ka)).real * f.grid.cell_volume
    if fa.min() >= 0.0 and ka.min() >= 0.0:
        np.maximum(out, 0.0, out=out)
    return ScalarField(f.grid, out)


def convolve_array(values: np.ndarray, kernel: np.ndarray, cell_volume: float) -> np.ndarray:
    """Bare-array version of :func:`convolve_periodic` (no clipping)."""
    return np.fft.ifftn(np.fft.fftn(values) * np.fft.fftn(kernel)).real * cell_volume


def translate(f: ScalarField, shift_nodes: tuple[int, ...]) -> ScalarField:
    """Translate by whole nodes (exact, periodic)."""
    if len(shift_nodes) != f.grid.dim:
        raise ValueError("shift must have one entry per axis")
    return ScalarField(f.grid, np.roll(f.values, shift_nodes, axis=tuple(range(f.grid.dim))))


# ---------------------------------------------------------------------------
# serialization: binary is little-endian throughout; CSV uses %.17g so the
# round trip is exact for float64
# ---------------------------------------------------------------------------


def save_field(f: ScalarField, path: str, fmt: str = "binary") -> None:
    if fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(_BINARY_MAGIC)
            fh.write(struct.pack("<II", f.grid.dim, f.grid.n))
            fh.write(f.values.astype("<f8").tobytes(order="C"))
    elif fmt == "csv":
        with open(path, "w") as fh:
            fh.write(f"# dim={f.grid.dim} n={f.grid.n} order=row-major\n")
            flat = f.values.ravel(order="C")
            for v in flat:
                fh.write("%.17g\n" % v)
    else:
        raise ValueError(f"unknown field format {fmt!r}")


def load_field(path: str) -> ScalarField:
    with open(path, "rb") as fh:
        head = fh.read(4)
        if head == _BINARY_MAGIC:
            dim, n = struct.unpack("<II", fh.read(8))
            grid = GridSpec(dim, n)
            count = n**dim
            data = np.frombuffer(fh.read(8 * count), dtype="<f8").astype(float)
            if data.size != count:
                raise ValueError("truncated field file")
            return ScalarField(grid, data.reshape(grid.shape, order="C"))
    # fall through: text format
    with open(path, "r") as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError("unrecognized field file header")
        meta = dict(tok.split("=") for tok in header[1:].split() if "=" in tok)
        grid = GridSpec(int(meta["dim"]), int(meta["n"]))
        data = np.loadtxt(io.StringIO(fh.read()))
    if data.size != grid.n**grid.dim:
        raise ValueError("CSV node count does not match header")
    return ScalarField(grid, np.asarray(data, dtype=float).reshape(grid.shape, order="C"))
