"""Divergence-free velocity fields on the torus.

Three families: smooth spectral fields (divergence-free by projecting each
Fourier amplitude onto the plane orthogonal to its frequency), alternating
shears with a step or sine profile, and cellwise rigid rotations.  Shears
and rotations have closed-form characteristics and exact total variation;
smooth fields integrate characteristics adaptively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .grid import GridSpec, VectorField

Array = np.ndarray

#: default cap on a single characteristic step; callers resolving a grid
#: should pass spacing/4 instead
DEFAULT_MAX_STEP = 1.0 / 128.0


@dataclass(frozen=True)
class SpectralMode:
    """One real Fourier mode amp * cos(2*pi*freq.x + phase)."""

    freq: tuple[int, ...]
    amp: tuple[float, ...]
    phase: float = 0.0

    def __post_init__(self) -> None:
        if len(self.freq) != len(self.amp):
            raise ValueError("frequency and amplitude dimension mismatch")


@dataclass(frozen=True)
class SmoothSpectral:
    """Superposition of Fourier modes, projected divergence-free.

    With ``project`` left on, each amplitude is replaced by its component
    orthogonal to the mode frequency at construction, so the field is
    divergence-free identically.  ``project=False`` keeps the amplitudes
    as given and serves as the negative control for the divergence check.
    """

    modes: tuple[SpectralMode, ...] = ()
    dim: int = 2
    project: bool = True

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        fixed = []
        for m in self.modes:
            if len(m.freq) != self.dim:
                raise ValueError("mode dimension does not match flow dimension")
            if self.project:
                w = np.asarray(m.freq, dtype=float)
                a = np.asarray(m.amp, dtype=float)
                n2 = float(w @ w)
                if n2 > 0:
                    a = a - (float(a @ w) / n2) * w
                m = SpectralMode(m.freq, tuple(a.tolist()), m.phase)
            fixed.append(m)
        object.__setattr__(self, "modes", tuple(fixed))


@dataclass(frozen=True)
class AlternatingShear:
    """Shear that alternates axes every half-period tau.

    During leg j (t in [j*tau, (j+1)*tau)) the velocity is a shear along
    axis j mod 2 whose magnitude is the profile evaluated at the other
    coordinate.  Profile "step" is +amplitude on [0,1/2) and -amplitude on
    [1/2,1); exactly on a jump line the one-sided value from below is
    used.  Profile "sine" is amplitude*sin(2*pi*s).  Two-dimensional.
    """

    amplitude: float = 1.0
    tau: float = 0.25
    profile: str = "step"

    def __post_init__(self) -> None:
        if self.amplitude < 0:
            raise ValueError("amplitude must be >= 0")
        if self.tau <= 0:
            raise ValueError("half-period must be > 0")
        if self.profile not in ("step", "sine"):
            raise ValueError(f"unknown shear profile {self.profile!r}")


@dataclass(frozen=True)
class CellularRotation:
    """Rigid rotation inside the inscribed disc of each cell of a k x k
    partition, zero outside (one full counterclockwise turn per unit
    time).  The disc boundary counts as outside; the jump there is what
    makes the field BV rather than Lipschitz.  Two-dimensional."""

    cells_per_axis: int = 2

    def __post_init__(self) -> None:
        if self.cells_per_axis < 1:
            raise ValueError("cell count must be >= 1")


FlowDescriptor = Union[SmoothSpectral, AlternatingShear, CellularRotation]


def flow_dim(flow: FlowDescriptor) -> int:
    if isinstance(flow, SmoothSpectral):
        return flow.dim
    return 2


def _shear_profile(flow: AlternatingShear, s: Array) -> Array:
    s = np.mod(s, 1.0)
    a = flow.amplitude
    if flow.profile == "sine":
        return a * np.sin(2.0 * np.pi * s)
    # one-sided from below on the jump set {0, 1/2}
    vals = np.where(s < 0.5, a, -a)
    vals = np.where(s == 0.0, -a, vals)
    vals = np.where(s == 0.5, a, vals)
    return vals


def _shear_leg_axes(leg: int) -> tuple[int, int]:
    """(moving axis, transverse axis) for a leg index."""
    if leg % 2 == 0:
        return 0, 1
    return 1, 0


def _spectral_velocity(flow: SmoothSpectral, x: Array) -> Array:
    u = np.zeros_like(x)
    for m in flow.modes:
        w = np.asarray(m.freq, dtype=float)
        phase = 2.0 * np.pi * (x @ w) + m.phase
        u += np.cos(phase)[..., None] * np.asarray(m.amp)
    return u


def _spectral_gradient(flow: SmoothSpectral, x: Array) -> Array:
    """Gradient with the derivative index first: out[..., i, j] = d_i u_j."""
    g = np.zeros(x.shape[:-1] + (flow.dim, flow.dim))
    for m in flow.modes:
        w = np.asarray(m.freq, dtype=float)
        phase = 2.0 * np.pi * (x @ w) + m.phase
        s = -2.0 * np.pi * np.sin(phase)
        g += s[..., None, None] * np.multiply.outer(w, np.asarray(m.amp))
    return g


def flow_eval(flow: FlowDescriptor, x, t: float = 0.0) -> Array:
    """Exact velocity at points x (shape (..., d)), at time t.

    Only the alternating shear actually depends on t (through which axis
    is active); the other variants are autonomous.
    """
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    if pts.shape[-1] != flow_dim(flow):
        raise ValueError("point dimension does not match flow dimension")

    if isinstance(flow, SmoothSpectral):
        u = _spectral_velocity(flow, pts)
    elif isinstance(flow, AlternatingShear):
        leg = math.floor(t / flow.tau)
        mv, tr = _shear_leg_axes(leg)
        u = np.zeros_like(pts)
        u[..., mv] = _shear_profile(flow, pts[..., tr])
    else:
        k = flow.cells_per_axis
        centers = (np.floor(k * np.mod(pts, 1.0)) + 0.5) / k
        rel = np.mod(pts, 1.0) - centers
        inside = (rel**2).sum(axis=-1) < (0.5 / k) ** 2
        u = 2.0 * np.pi * np.stack([-rel[..., 1], rel[..., 0]], axis=-1)
        u = np.where(inside[..., None], u, 0.0)
    return u[0] if single else u


def _shear_map(flow: AlternatingShear, pts: Array, t: float, t0: float):
    """Walk the legs covering [t0, t0+t]; each leg is a translation."""
    out = pts.copy()
    hit = np.zeros(pts.shape[:-1], dtype=bool)
    tau = flow.tau
    s, end_time = t0, t0 + t
    forward = t > 0
    while s != end_time:
        if forward:
            leg = math.floor(s / tau)
            seg_end = min((leg + 1) * tau, end_time)
        else:
            leg = math.ceil(s / tau) - 1
            seg_end = max(leg * tau, end_time)
        dt = seg_end - s
        mv, tr = _shear_leg_axes(leg)
        coord = out[..., tr]
        if flow.profile == "step":
            wrapped = np.mod(coord, 1.0)
            hit |= (wrapped == 0.0) | (wrapped == 0.5)
        out[..., mv] = np.mod(out[..., mv] + _shear_profile(flow, coord) * dt, 1.0)
        s = seg_end
    return out, hit


def _rotation_map(flow: CellularRotation, pts: Array, t: float) -> Array:
    k = flow.cells_per_axis
    wrapped = np.mod(pts, 1.0)
    centers = (np.floor(k * wrapped) + 0.5) / k
    rel = wrapped - centers
    inside = (rel**2).sum(axis=-1) < (0.5 / k) ** 2
    ang = 2.0 * np.pi * t
    c, sn = math.cos(ang), math.sin(ang)
    turned = np.stack(
        [c * rel[..., 0] - sn * rel[..., 1], sn * rel[..., 0] + c * rel[..., 1]],
        axis=-1,
    )
    return np.where(inside[..., None], centers + turned, wrapped)


def _rk4(f, x: Array, h: float) -> Array:
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _integrate_characteristics(flow: SmoothSpectral, pts: Array, t: float,
                               tol: float, max_step: float) -> Array:
    """Adaptive RK4 (step doubling) in the universal cover; the velocity
    is periodic, so no wrapping is needed mid-flight."""
    f = lambda x: _spectral_velocity(flow, x)
    x = pts.copy()
    remaining = t
    h = math.copysign(min(max_step, abs(t)), t)
    while remaining != 0.0:
        if abs(h) > abs(remaining):
            h = remaining
        full = _rk4(f, x, h)
        half = _rk4(f, _rk4(f, x, 0.5 * h), 0.5 * h)
        err = float(np.max(np.abs(full - half))) / 15.0
        if err <= tol or abs(h) <= 1e-14:
            x = half
            remaining -= h
            grow = 5.0 if err == 0.0 else min(5.0, 0.9 * (tol / err) ** 0.2)
            h = math.copysign(min(abs(h) * grow, max_step), t)
        else:
            h *= max(0.2, 0.9 * (tol / err) ** 0.2)
    return np.mod(x, 1.0)


def flow_map(flow: FlowDescriptor, x, t: float, t0: float = 0.0,
             max_step: float | None = None, return_jump_flag: bool = False):
    """Position at time t0+t of the characteristic through x at time t0.

    Exact for shears (piecewise translations) and rotations (closed-form
    rotation); numerically integrated for spectral fields (adaptive RK4,
    local tolerance 1e-10, steps capped at ``max_step``).  Negative t runs
    the characteristic backwards.

    With ``return_jump_flag`` the result is a pair (points, flags) where
    the flag marks trajectories that sat exactly on a step-profile jump
    line during some leg and were therefore moved by the one-sided value
    from below.
    """
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    if pts.shape[-1] != flow_dim(flow):
        raise ValueError("point dimension does not match flow dimension")

    hit = np.zeros(pts.shape[:-1], dtype=bool)
    if t == 0.0:
        out = np.mod(pts, 1.0)
    elif isinstance(flow, AlternatingShear):
        out, hit = _shear_map(flow, pts, t, t0)
    elif isinstance(flow, CellularRotation):
        out = _rotation_map(flow, pts, t)
    else:
        cap = DEFAULT_MAX_STEP if max_step is None else max_step
        out = _integrate_characteristics(flow, pts, t, 1e-10, cap)

    if single:
        out, hit = out[0], hit[0]
    return (out, hit) if return_jump_flag else out


def flow_tv(flow: FlowDescriptor, quad_points: int = 512) -> float:
    """Total variation of the velocity over the torus.

    Exact for both shear profiles (4*amplitude) and for the cellular
    rotation (interior gradient plus the tangential jump across each disc
    boundary); midpoint quadrature of the analytic gradient for spectral
    fields.
    """
    if isinstance(flow, AlternatingShear):
        # step: two jumps of size 2a along unit-length lines
        # sine: 2*pi*a*int|cos| = 4a as well
        return 4.0 * flow.amplitude
    if isinstance(flow, CellularRotation):
        # per cell, radius r = 1/(2k), spin 2*pi: interior Frobenius
        # sqrt(2)*2*pi over area pi r^2, boundary jump 2*pi*r over length
        # 2*pi*r; k^2 cells make the total independent of k
        return math.pi**2 * (math.sqrt(2.0) + 2.0) / 2.0
    grid = np.arange(quad_points) / quad_points + 0.5 / quad_points
    mesh = np.stack(np.meshgrid(*([grid] * flow.dim), indexing="ij"), axis=-1)
    g = _spectral_gradient(flow, mesh)
    frob = np.sqrt((g**2).sum(axis=(-2, -1)))
    return float(frob.mean())


def sample_flow(flow: FlowDescriptor, grid: GridSpec, t: float = 0.0) -> VectorField:
    """Velocity sampled at the grid nodes at time t."""
    if grid.dim != flow_dim(flow):
        raise ValueError("grid dimension does not match flow dimension")
    mesh = np.stack(grid.node_coords(), axis=-1)
    u = flow_eval(flow, mesh, t)
    return VectorField(grid, tuple(u[..., i] for i in range(grid.dim)))


def divergence_residual(flow: FlowDescriptor, grid: GridSpec) -> float:
    """Max-norm of the spectral divergence of the sampled velocity.

    Structurally zero for shears (each component is constant along its own
    axis), below 1e-8 for projected spectral fields, and merely reported
    for the rotation (the sampled jump has no reason to be small in this
    weak sense).
    """
    u = sample_flow(flow, grid)
    freqs = grid.frequencies()
    div = np.zeros(grid.shape, dtype=complex)
    for ax in range(grid.dim):
        div += 2.0j * np.pi * freqs[ax] * np.fft.fftn(u.components[ax])
    return float(np.max(np.abs(np.fft.ifftn(div))))
