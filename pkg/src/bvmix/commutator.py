"""Bound terms for the locally mollified transport decomposition.

Pairing the final tracer state against a Lipschitz test function splits,
after mollifying with an anisotropic kernel selected per localization
point, into five terms: the final-datum mollification error (I1), the
initial-datum pairing (I2), a locality flux (I3), an anisotropy mismatch
(I4), and the averaged-commutator remainder (I5).  Inserting second
frequency cutoffs delta' (test function) and epsilon' (velocity) refines
this to seven terms, with remainders R1 and R2 linear in the removed
high-frequency parts.

Every term is evaluated two ways.  The rhs values are the displayed
bound formulas with each suppressed constant set to one; they are cheap
at any resolution.  On grids up to ``LHS_GRID_CAP`` nodes per axis the
lhs values are direct quadratures of the defining integrals, organized
so the localization average over the outer point collapses to one FFT
correlation per distinct direction matrix; the decomposition identity
(pairing = sum of terms) is then machine-checkable.  Cost scales with
the number of distinct direction matrices, so shear-like velocities
(a handful of values) are cheap while fully generic fields are not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .flows import sample_flow
from .grid import GridSpec, ScalarField, VectorField, convolve_array
from .mollifiers import (
    AnisotropicMollifier,
    alberti_grad,
    sample_anisotropic,
    sample_isotropic,
)
from .norms import (
    bv_band_energy,
    forward_gradient,
    gradient_frobenius,
    l2_band_energy,
    tv_norm,
    wminus11_norm,
)
from .transport import AdvectionResult, backward_advect

TERM_NAMES = ("I1", "I2", "I3", "I4", "I5", "I3p", "I4p", "I5p", "R1", "R2")

# the quadruple quadrature is O(n^2d * support); beyond this it is rhs-only
LHS_GRID_CAP = 64


@dataclass(frozen=True)
class RegularisationParams:
    """Mollification scales: lam (anisotropic averaging), delta (kernel
    scale), epsilon (localization), plus the optional second cutoffs.

    The constraint delta <= epsilon * exp(-lam) keeps the kernel support
    inside the localization ball; it also caps the support radius
    delta * exp(lam) below 1/8, so sampled kernels always fit the torus.
    """

    lam: float
    delta: float
    epsilon: float
    delta_prime: float | None = None
    epsilon_prime: float | None = None

    def __post_init__(self) -> None:
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.delta <= 0 or self.epsilon <= 0:
            raise ValueError("delta and epsilon must be positive")
        for name in ("delta_prime", "epsilon_prime"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive when given")
        if self.delta > self.epsilon * math.exp(-self.lam) * (1.0 + 1e-12):
            raise ValueError("delta must satisfy delta <= epsilon*exp(-lam)")
        if self.delta * math.exp(self.lam) >= 0.5:
            raise ValueError("kernel support delta*exp(lam) must stay below 1/2")
        if 4.0 * self.epsilon >= 0.5:
            raise ValueError("localization scale must satisfy 4*epsilon < 1/2")

    def support_radius(self) -> float:
        return self.delta * math.exp(self.lam)


@dataclass
class MbarField:
    """Direction matrix per grid node.

    ``samples[..., i, j]`` is the normalized smoothed gradient entry for
    component i differentiated along axis j (Jacobian layout, so a shear
    u = (w(y), 0) populates the (1,2) slot).  Admissibility: traceless
    within 1e-10 and Frobenius norm at most 1 + 1e-10 at every node; the
    zero matrix marks nodes where the smoothed gradient is negligible.
    """

    grid: GridSpec
    samples: np.ndarray

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=float)
        d = self.grid.dim
        if self.samples.shape != self.grid.shape + (d, d):
            raise ValueError("matrix samples must have shape grid.shape + (d, d)")
        tr = np.trace(self.samples, axis1=-2, axis2=-1)
        if float(np.abs(tr).max()) > 1e-10:
            raise ValueError("direction matrices must be traceless within 1e-10")
        fro = np.sqrt((self.samples**2).sum(axis=(-2, -1)))
        if float(fro.max()) > 1.0 + 1e-10:
            raise ValueError("direction matrices must have Frobenius norm <= 1")

    def unique_values(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Distinct matrices with their node masks (exact bit equality).

        Shear-like velocities produce a handful of values; the lhs
        quadrature cost is linear in their count.
        """
        d = self.grid.dim
        flat = self.samples.reshape(-1, d * d)
        uniq, inverse = np.unique(flat, axis=0, return_inverse=True)
        inverse = inverse.reshape(self.grid.shape)
        return [(uniq[i].reshape(d, d).copy(), inverse == i) for i in range(len(uniq))]


def mbar_field(u: VectorField, eps: float) -> MbarField:
    """Normalized direction field of the gradient smoothed at scale 4*eps.

    Nodes where the smoothed gradient Frobenius norm is at most
    1e-12 * tv_norm(u) get the zero matrix (admissible).  The tiny trace
    left by forward differencing is projected out before normalizing.
    """
    if not 4.0 * eps < 0.5:
        raise ValueError("direction field needs 4*eps < 1/2")
    grid = u.grid
    d = grid.dim
    kernel = sample_isotropic(grid, 4.0 * eps, allow_unresolved=True)
    grad = forward_gradient(u)
    sm = np.empty(grid.shape + (d, d))
    for a in range(d):
        for b in range(d):
            sm[..., a, b] = convolve_array(grad[b][a], kernel.field.values,
                                           grid.cell_volume)
    tr = np.trace(sm, axis1=-2, axis2=-1) / d
    for a in range(d):
        sm[..., a, a] -= tr
    fro = np.sqrt((sm**2).sum(axis=(-2, -1)))
    thresh = 1e-12 * tv_norm(u)
    keep = fro > thresh
    out = np.zeros_like(sm)
    np.divide(sm, np.where(keep, fro, 1.0)[..., None, None], out=out,
              where=keep[..., None, None])
    fro2 = np.sqrt((out**2).sum(axis=(-2, -1)))
    over = fro2 > 1.0
    if over.any():
        out /= np.where(over, fro2, 1.0)[..., None, None]
    return MbarField(grid, out)


# ---------------------------------------------------------------------------
# quadrature plumbing
# ---------------------------------------------------------------------------


def identity_times(T: float, interior: int = 12) -> list[float]:
    """Snapshot grid {0} + Gauss-Legendre(interior) + {T} for the reports.

    The endpoints carry zero quadrature weight (they exist for the
    endpoint terms I1 and I2); the interior nodes integrate the time
    integrals at spectral accuracy for smooth flows.
    """
    if T <= 0:
        raise ValueError("final time must be positive")
    if interior < 1:
        raise ValueError("need at least one interior node")
    x, _ = np.polynomial.legendre.leggauss(interior)
    return [0.0] + [0.5 * T * (xi + 1.0) for xi in x] + [T]


def _time_weights(times: np.ndarray) -> np.ndarray:
    """Weights matching :func:`identity_times`, else composite trapezoid."""
    T = float(times[-1])
    k = len(times) - 2
    if k >= 1 and times[0] == 0.0:
        x, w = np.polynomial.legendre.leggauss(k)
        mapped = 0.5 * T * (x + 1.0)
        if float(np.abs(mapped - times[1:-1]).max()) <= 1e-12 * max(T, 1.0):
            out = np.zeros(len(times))
            out[1:-1] = 0.5 * T * w
            return out
    out = np.zeros(len(times))
    dt = np.diff(times)
    out[:-1] += dt / 2.0
    out[1:] += dt / 2.0
    return out


def _correlate(a: np.ndarray, k: np.ndarray, cell: float) -> np.ndarray:
    """sum_y a(y) k(y - x) dy as a function of x (periodic, via FFT)."""
    return np.fft.ifftn(np.fft.fftn(a) * np.conj(np.fft.fftn(k))).real * cell


def _shift_bilinear(values: np.ndarray, shift: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Samples of the field at every node displaced by ``-shift``.

    A uniform displacement keeps the sample points on a translated
    lattice, so periodic bilinear interpolation collapses to 2^d rolls;
    bilinear (not cubic) keeps nonnegative fields nonnegative, which the
    gradient-magnitude segment averages rely on.
    """
    d = grid.dim
    cells = np.asarray(shift, dtype=float) * grid.n
    base = np.floor(cells).astype(int)
    frac = cells - base
    out = np.zeros_like(values)
    axes = tuple(range(d))
    for corner in range(1 << d):
        bits = [(corner >> j) & 1 for j in range(d)]
        w = 1.0
        for j in range(d):
            w *= frac[j] if bits[j] else 1.0 - frac[j]
        if w == 0.0:
            continue
        out += w * np.roll(values, tuple(base[j] + bits[j] for j in range(d)), axes)
    return out


def _commutator_values(phi_vals: np.ndarray, u_comps, grad_samples: np.ndarray,
                       support: list[tuple[int, ...]], cell: float) -> np.ndarray:
    """Defect field  sum_h phi(x-h) (u(x) - u(x-h)) . grad_kernel(h) dh.

    Offset-by-offset accumulation so a constant velocity yields an exact
    zero (the velocity difference vanishes term by term).
    """
    d = len(u_comps)
    axes = tuple(range(d))
    out = np.zeros_like(phi_vals)
    for s in support:
        g = grad_samples[s]
        if not g.any():
            continue
        acc = (u_comps[0] - np.roll(u_comps[0], s, axes)) * g[0]
        for j in range(1, d):
            acc += (u_comps[j] - np.roll(u_comps[j], s, axes)) * g[j]
        out += np.roll(phi_vals, s, axes) * acc
    return out * cell


def dl_commutator(phi_t: ScalarField, u: VectorField,
                  m: AnisotropicMollifier) -> ScalarField:
    """Transport-mollification defect for one fixed anisotropic kernel,
    by grid quadrature over the kernel support ball."""
    grid = phi_t.grid
    if u.grid != grid:
        raise ValueError("test function and velocity must share a grid")
    if m.radius >= 0.5:
        raise ValueError("kernel support must fit inside the torus")
    sk = sample_anisotropic(grid, m, allow_unresolved=True)
    offs = np.stack(grid.centered_offsets(), axis=-1)
    g = alberti_grad(m, offs) * sk.mass_factor
    support = [tuple(int(v) for v in ij)
               for ij in np.argwhere(np.abs(g).max(axis=-1) > 0.0)]
    vals = _commutator_values(phi_t.values, u.components, g, support,
                              grid.cell_volume)
    return ScalarField(grid, vals)


# ---------------------------------------------------------------------------
# bound reports
# ---------------------------------------------------------------------------


@dataclass
class BoundTerm:
    name: str
    rhs_value: float
    lhs_value: float | None = None

    def __post_init__(self) -> None:
        if self.name not in TERM_NAMES:
            raise ValueError(f"unknown term name {self.name!r}")
        if not self.rhs_value >= 0.0:
            raise ValueError("rhs bound values must be nonnegative")


@dataclass
class BoundReport:
    """Per-term bound values plus the norms that entered them.

    ``norms['final_pairing']`` holds the directly computed pairing of the
    final tracer state with the final test function, the quantity the
    decomposition reassembles.
    """

    terms: list[BoundTerm]
    params: RegularisationParams
    norms: dict[str, float]

    def term(self, name: str) -> BoundTerm:
        for t in self.terms:
            if t.name == name:
                return t
        raise KeyError(name)

    def has_term(self, name: str) -> bool:
        return any(t.name == name for t in self.terms)


def decomposition_residual(report: BoundReport) -> float:
    """|pairing - sum of decomposition lhs terms|, preferring the
    seven-term split when present."""
    if report.has_term("R1"):
        names = ("I1", "I2", "I3p", "I4p", "I5p", "R1", "R2")
    else:
        names = ("I1", "I2", "I3", "I4", "I5")
    vals = [report.term(n).lhs_value for n in names]
    if any(v is None for v in vals):
        raise ValueError("report has no lhs quadratures (grid too large)")
    return abs(report.norms["final_pairing"] - sum(vals))


def split_residuals(report: BoundReport) -> dict[str, float]:
    """Linearity checks of the second-cutoff splits on the lhs values."""
    need = ("I3", "I3p", "R1", "I4", "I5", "I4p", "I5p", "R2")
    vals = {n: report.term(n).lhs_value for n in need}
    if any(v is None for v in vals.values()):
        raise ValueError("split residuals need a seven-term report with lhs values")
    return {
        "I3_split": abs(vals["I3"] - (vals["I3p"] + vals["R1"])),
        "I45_split": abs((vals["I4"] + vals["I5"])
                         - (vals["I4p"] + vals["I5p"] + vals["R2"])),
    }


def _as_field(u, grid: GridSpec) -> VectorField:
    if isinstance(u, VectorField):
        if u.grid != grid:
            raise ValueError("velocity grid does not match the snapshots")
        return u
    return sample_flow(u, grid, 0.0)


def _check_series(rho: AdvectionResult, phi: AdvectionResult) -> np.ndarray:
    rt = np.asarray(rho.times())
    pt = np.asarray(phi.times())
    if rt.shape != pt.shape or float(np.abs(rt - pt).max()) > 1e-12 * max(rt[-1], 1.0):
        raise ValueError("tracer and test-function series must share snapshot times")
    if rho.snapshots[0][1].grid != phi.snapshots[0][1].grid:
        raise ValueError("tracer and test-function series must share a grid")
    if rt[0] != 0.0 or rt[-1] <= 0.0:
        raise ValueError("snapshot series must run from 0 to a positive final time")
    return rt


def _segment_average(gmag: np.ndarray, h: np.ndarray, grid: GridSpec) -> np.ndarray:
    """The field  integral_0^1 gmag(x - s h) ds  by GL8 in s."""
    x, w = np.polynomial.legendre.leggauss(8)
    acc = np.zeros(grid.shape)
    for xq, wq in zip(x, w):
        acc += 0.5 * wq * _shift_bilinear(gmag, 0.5 * (xq + 1.0) * h, grid)
    return acc


def _lhs_quadratures(rho: AdvectionResult, phi: AdvectionResult, u_field: VectorField,
                     p: RegularisationParams, times: np.ndarray,
                     names) -> dict[str, float]:
    """Direct quadratures of the named terms.

    Everything except the anisotropy-mismatch pieces goes through
    circular convolutions and spectral gradients, which keeps the
    decomposition identity exact at the lattice level: the commutator in
    its pre-integration-by-parts form u.(grad phi * K) - ((u.grad phi) * K)
    is the same integrand as the h-space form, quadratured consistently.
    The kernel gradient in h appears only inside I5/I5p, and I4/I4p are
    the commutator totals minus those pieces, so the identity never sees
    the kernel-gradient quadrature error.
    """
    names = set(names)
    grid = u_field.grid
    d = grid.dim
    cell = grid.cell_volume
    axes = tuple(range(d))
    weights = _time_weights(times)
    freqs = grid.frequencies()

    if names & {"I3p", "I4p", "I5p", "R1", "R2"}:
        if p.delta_prime is None or p.epsilon_prime is None:
            raise ValueError("second-cutoff terms need delta_prime and epsilon_prime")

    need_flux = names & {"I3", "I3p", "R1"}
    need_sm_phi = names & {"I3p", "R1"}
    need_com_u = "I4" in names
    need_com_sm = "I4p" in names
    need_com_hi = "R2" in names
    need_mis_u = names & {"I4", "I5"}
    need_mis_sm = names & {"I4p", "I5p"}
    need_uprime = names & {"I4p", "I5p", "R2"}
    need_gphi = need_com_u or need_com_sm or need_com_hi

    def sgrad(vals: np.ndarray) -> list[np.ndarray]:
        fh = np.fft.fftn(vals)
        return [np.fft.ifftn(2j * np.pi * f * fh).real for f in freqs]

    mb = mbar_field(u_field, p.epsilon)
    ke = sample_isotropic(grid, p.epsilon, allow_unresolved=True)
    offs = np.stack(grid.centered_offsets(), axis=-1)

    kernels = []
    for mat, mask in mb.unique_values():
        # kernel machinery contracts h . m . grad, so the Jacobian-layout
        # matrix enters transposed
        am = AnisotropicMollifier.make(p.lam, mat.T, p.delta)
        sk = sample_anisotropic(grid, am, allow_unresolved=True)
        entry: dict = {"mat": mat, "K": sk.field.values,
                       "w_eps": _correlate(mask.astype(float), ke.field.values, cell)}
        if need_flux:
            wg = sgrad(entry["w_eps"])
            entry["u_dot"] = sum(u_field.components[j] * wg[j] for j in range(d))
        if need_mis_u or need_mis_sm:
            entry["G"] = alberti_grad(am, offs) * sk.mass_factor
        kernels.append(entry)

    used: list[int] = []
    if need_mis_u or need_mis_sm:
        supp_mask = np.zeros(grid.shape, dtype=bool)
        for k in kernels:
            supp_mask |= np.abs(k["G"]).max(axis=-1) > 0.0
        support = [tuple(int(v) for v in ij) for ij in np.argwhere(supp_mask)]
        h_vecs = np.array([offs[s] for s in support]).reshape(len(support), d)
        for k in kernels:
            md = k["mat"].T
            cvals = (float(h_vecs[i] @ md @ k["G"][support[i]]) * cell
                     for i in range(len(support)))
            k["c"] = {i: v for i, v in enumerate(cvals) if v != 0.0}
        used = sorted({i for k in kernels for i in k["c"]})

    if need_uprime:
        kep = sample_isotropic(grid, p.epsilon_prime, allow_unresolved=True)
        u_sm = tuple(convolve_array(c, kep.field.values, cell)
                     for c in u_field.components)
        u_hi = tuple(c - cs for c, cs in zip(u_field.components, u_sm))
    if need_sm_phi:
        kdp = sample_isotropic(grid, p.delta_prime, allow_unresolved=True)
    if need_mis_u:
        gmag = gradient_frobenius(forward_gradient(u_field))
        seg = {i: _segment_average(gmag, h_vecs[i], grid) for i in used}
    if need_mis_sm:
        gmag_sm = gradient_frobenius(forward_gradient(VectorField(grid, u_sm)))
        seg_sm = {i: _segment_average(gmag_sm, h_vecs[i], grid) for i in used}

    def commutator(comps, adv, k) -> np.ndarray:
        out = sum(comps[j] * convolve_array(gphi[j], k["K"], cell)
                  for j in range(d))
        return out - convolve_array(adv, k["K"], cell)

    acc = dict.fromkeys(("I3", "I45", "I5", "I3p", "R1", "I45p", "I45h", "I5p"), 0.0)
    if not names - {"I1", "I2"}:
        weights = ()
    for ti, w_t in enumerate(weights):
        if w_t == 0.0:
            continue
        phiv = phi.snapshots[ti][1].values
        rhov = rho.snapshots[ti][1].values
        if need_gphi:
            gphi = sgrad(phiv)
            adv_u = sum(u_field.components[j] * gphi[j] for j in range(d)) \
                if need_com_u else None
            adv_sm = sum(u_sm[j] * gphi[j] for j in range(d)) if need_com_sm else None
            adv_hi = sum(u_hi[j] * gphi[j] for j in range(d)) if need_com_hi else None
        if need_sm_phi:
            phiv_sm = convolve_array(phiv, kdp.field.values, cell)
            phiv_hi = phiv - phiv_sm
        if used:
            rolls = {i: np.roll(phiv, support[i], axes) for i in used}
        for k in kernels:
            loc = rhov * k["w_eps"]
            if "I3" in names:
                conv = convolve_array(phiv, k["K"], cell)
                acc["I3"] += w_t * ((rhov * conv * k["u_dot"]).sum() * cell)
            if need_sm_phi:
                if "I3p" in names:
                    conv_sm = convolve_array(phiv_sm, k["K"], cell)
                    acc["I3p"] += w_t * ((rhov * conv_sm * k["u_dot"]).sum() * cell)
                if "R1" in names:
                    conv_hi = convolve_array(phiv_hi, k["K"], cell)
                    acc["R1"] += w_t * ((rhov * conv_hi * k["u_dot"]).sum() * cell)
            if need_com_u:
                acc["I45"] += w_t * ((loc * commutator(u_field.components, adv_u, k)
                                      ).sum() * cell)
            if need_com_sm:
                acc["I45p"] += w_t * ((loc * commutator(u_sm, adv_sm, k)).sum() * cell)
            if need_com_hi:
                acc["I45h"] += w_t * ((loc * commutator(u_hi, adv_hi, k)).sum() * cell)
            if need_mis_u:
                vm = sum(cv * rolls[i] * seg[i] for i, cv in k["c"].items())
                acc["I5"] += w_t * ((loc * vm).sum() * cell)
            if need_mis_sm:
                vmp = sum(cv * rolls[i] * seg_sm[i] for i, cv in k["c"].items())
                acc["I5p"] += w_t * ((loc * vmp).sum() * cell)

    out: dict[str, float] = {}
    if "I1" in names or "I2" in names:
        rhoT = rho.final().values
        phiT = phi.final().values
        rho0 = rho.snapshots[0][1].values
        phi0 = phi.snapshots[0][1].values
        i1 = i2 = 0.0
        for k in kernels:
            if "I1" in names:
                i1 += ((rhoT * (phiT - convolve_array(phiT, k["K"], cell))
                        * k["w_eps"]).sum() * cell)
            if "I2" in names:
                i2 += ((rho0 * convolve_array(phi0, k["K"], cell)
                        * k["w_eps"]).sum() * cell)
        out["I1"] = i1
        out["I2"] = i2
    full = {"I3": acc["I3"], "I4": acc["I45"] - acc["I5"], "I5": acc["I5"],
            "I3p": acc["I3p"], "I4p": acc["I45p"] - acc["I5p"],
            "I5p": acc["I5p"], "R1": acc["R1"], "R2": acc["I45h"]}
    for n in names - {"I1", "I2"}:
        out[n] = full[n]
    return out


def _report(rho: AdvectionResult, phi: AdvectionResult, u,
            p: RegularisationParams, seven: bool,
            rho0_weak: float | None) -> BoundReport:
    times = _check_series(rho, phi)
    grid = rho.snapshots[0][1].grid
    d = grid.dim
    T = float(times[-1])
    if seven and (p.delta_prime is None or p.epsilon_prime is None):
        raise ValueError("seven-term report needs delta_prime and epsilon_prime")
    u_field = _as_field(u, grid)

    rho_sup = max(float(np.abs(f.values).max()) for f in rho.fields())
    u_tv = tv_norm(u_field)
    if rho0_weak is None:
        rho0 = rho.snapshots[0][1]
        rho0_weak = 0.0 if not rho0.values.any() else wminus11_norm(rho0)

    outer = 2.0 * p.delta * math.exp(p.lam)
    l2_full = l2_band_energy(phi.fields(), times, None, outer)
    bv_full = bv_band_energy(u_field, None, p.epsilon)

    e = math.exp
    rhs = {
        "I1": p.delta * e((d + 1) * p.lam) * rho_sup,
        "I2": (1.0 + e(p.lam) / p.delta + 1.0 / p.epsilon) * rho0_weak,
        "I3": T ** ((d - 1) / d) * (e(d * p.lam) / p.epsilon)
              * rho_sup * u_tv * l2_full ** (1.0 / d),
        "I4": T * e(2 * p.lam) * rho_sup * math.sqrt(u_tv) * math.sqrt(bv_full),
        "I5": (T / p.lam) * rho_sup * u_tv,
    }
    norms = {
        "d": float(d), "T": T, "rho_sup": rho_sup, "u_tv": u_tv,
        "rho0_weak": rho0_weak, "l2_band": l2_full, "bv_band": bv_full,
    }
    if seven:
        l2_part = l2_band_energy(phi.fields(), times, p.delta_prime, outer)
        bv_part = bv_band_energy(u_field, p.epsilon_prime, p.epsilon)
        rhs.update({
            "I3p": T ** ((d - 1) / d) * (e(d * p.lam) / p.epsilon)
                   * rho_sup * u_tv * l2_part ** (1.0 / d),
            "I4p": T * e(2 * p.lam) * rho_sup * math.sqrt(u_tv) * math.sqrt(bv_part),
            "I5p": (T / p.lam) * rho_sup * u_tv,
            "R1": T * (p.delta_prime * e((d + 1) * p.lam)
                       / (p.epsilon * p.delta)) * rho_sup * u_tv,
            "R2": T * (p.epsilon_prime * e((d + 1) * p.lam)
                       / p.delta) * rho_sup * u_tv,
        })
        norms["l2_band_inner"] = l2_part
        norms["bv_band_inner"] = bv_part

    norms["final_pairing"] = float(
        (rho.final().values * phi.final().values).sum()) * grid.cell_volume

    names = TERM_NAMES if seven else TERM_NAMES[:5]
    lhs: dict[str, float] = {}
    if grid.n <= LHS_GRID_CAP:
        lhs = _lhs_quadratures(rho, phi, u_field, p, times, names)

    terms = [BoundTerm(n, rhs[n], lhs.get(n)) for n in names]
    return BoundReport(terms, p, norms)


def bound_report_five(rho: AdvectionResult, phi: AdvectionResult, u,
                      p: RegularisationParams,
                      rho0_weak: float | None = None) -> BoundReport:
    """Five-term report: rhs bound values always, lhs quadratures on
    grids up to LHS_GRID_CAP nodes per axis.

    ``u`` may be a VectorField or a flow descriptor (sampled at time 0;
    the decomposition assumes the velocity is autonomous over the span).
    ``rho0_weak`` overrides the initial-datum weak norm when the caller
    has already paid for the LP (mandatory above the LP grid cap unless
    the initial datum is identically zero).
    """
    return _report(rho, phi, u, p, seven=False, rho0_weak=rho0_weak)


def bound_report_seven(rho: AdvectionResult, phi: AdvectionResult, u,
                       p: RegularisationParams,
                       rho0_weak: float | None = None) -> BoundReport:
    """Seven-term report (second cutoffs active); also carries the plain
    I3/I4/I5 entries so the split identities are checkable."""
    return _report(rho, phi, u, p, seven=True, rho0_weak=rho0_weak)


def term_quadratures(rho: AdvectionResult, phi: AdvectionResult, u,
                     p: RegularisationParams,
                     names=TERM_NAMES) -> dict[str, float]:
    """Direct quadratures of the named decomposition terms, no grid cap.

    Reports cap their lhs column at LHS_GRID_CAP because the quadrature
    cost grows like n^(2d) times the kernel support; this entry point
    leaves the budget to the caller so individual terms can be measured
    on grids fine enough to resolve scale separations the capped grids
    cannot hold. Computes only what ``names`` asks for.
    """
    bad = set(names) - set(TERM_NAMES)
    if bad:
        raise ValueError(f"unknown term names {sorted(bad)!r}")
    times = _check_series(rho, phi)
    grid = rho.snapshots[0][1].grid
    return _lhs_quadratures(rho, phi, _as_field(u, grid), p, times, names)


def report_to_csv(report: BoundReport, path: str) -> None:
    p = report.params
    with open(path, "w") as fh:
        for key in sorted(report.norms):
            fh.write("# %s = %.17g\n" % (key, report.norms[key]))
        fh.write("name,rhs_value,lhs_value,lam,delta,delta_prime,epsilon,epsilon_prime\n")
        for t in report.terms:
            lhs = "" if t.lhs_value is None else "%.17g" % t.lhs_value
            row = [t.name, "%.17g" % t.rhs_value, lhs,
                   "%.17g" % p.lam, "%.17g" % p.delta,
                   "" if p.delta_prime is None else "%.17g" % p.delta_prime,
                   "%.17g" % p.epsilon,
                   "" if p.epsilon_prime is None else "%.17g" % p.epsilon_prime]
            fh.write(",".join(row) + "\n")


# ---------------------------------------------------------------------------
# vanishing-sequence mode
# ---------------------------------------------------------------------------


@dataclass
class VanishingRung:
    """One ladder rung: target level, selected scales, and the five rhs
    values (unit tracer amplitude, zero initial datum)."""

    kappa: float
    achieved: bool
    lam: float
    epsilon: float
    delta: float
    rhs: dict[str, float]
    kappa_floor: float | None = None


def _bisect_largest(pred, lo: float, hi: float, iters: int = 48) -> float:
    """Largest feasible scale in [lo, hi]; pred(lo) must hold."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo

def vanishing_sequence(flow, phiT: ScalarField, kappa_ladder,
                       T: float = 1.0, snapshots: int = 17) -> list[VanishingRung]:
    """Zero-initial-datum mode: drive every bound term below each ladder
    level in turn.

    Per level: the averaging parameter comes from the I5 formula, the
    localization scale from bisection on the gradient band energy (I4),
    and the kernel scale from bisection on the test-function band energy
    (I3) under the I1 cap.  All rhs values use unit tracer amplitude;
    the initial-datum term is identically zero here.  Scales never probe
    below one grid cell: when the caps and the resolution floor leave no
    feasible scale the rung reports the smallest level its best-effort
    parameters do achieve (given this rung's averaging parameter).
    """
    ladder = [float(k) for k in kappa_ladder]
    if not ladder or any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("ladder levels must be strictly decreasing")
    if any(k <= 0 for k in ladder):
        raise ValueError("ladder levels must be positive")
    if T <= 0:
        raise ValueError("final time must be positive")
    grid = phiT.grid
    d = grid.dim
    u_field = _as_field(flow, grid)
    u_tv = tv_norm(u_field)
    rho_sup = 1.0
    times = np.linspace(0.0, T, snapshots)
    phis = backward_advect(phiT, flow, list(times)).fields()

    rungs: list[VanishingRung] = []
    prev_lam = 0.0
    prev_eps = 0.12
    prev_delta = math.inf
    for kappa in ladder:
        if u_tv == 0.0:
            eps = prev_eps
            delta = min(prev_delta, 0.5 * kappa, eps)
            rhs = {"I1": delta * rho_sup, "I2": 0.0, "I3": 0.0, "I4": 0.0,
                   "I5": 0.0}
            rungs.append(VanishingRung(kappa, True, 0.0, eps, delta, rhs))
            prev_delta = delta
            continue

        lam = max((T * rho_sup * u_tv / kappa) * (1.0 + 1e-12), prev_lam)
        feasible = True

        c4 = T * math.exp(2.0 * lam) * rho_sup * math.sqrt(u_tv)

        def i4_of(e: float) -> float:
            return c4 * math.sqrt(bv_band_energy(u_field, None, e))

        floor_e = grid.spacing
        hi_e = prev_eps
        if floor_e > hi_e:
            eps = hi_e
            feasible = i4_of(eps) <= kappa
        elif i4_of(hi_e) <= kappa:
            eps = hi_e
        elif i4_of(floor_e) > kappa:
            eps = floor_e
            feasible = False
        else:
            eps = _bisect_largest(lambda x: i4_of(x) <= kappa, floor_e, hi_e)

        c3 = T ** ((d - 1) / d) * math.exp(d * lam) / eps * rho_sup * u_tv

        def i3_of(dl: float) -> float:
            band = l2_band_energy(phis, times, None, 2.0 * dl * math.exp(lam))
            return c3 * band ** (1.0 / d)

        cap_d = min(prev_delta, eps * math.exp(-lam) * (1.0 - 1e-12),
                    kappa * math.exp(-(d + 1) * lam) / rho_sup * (1.0 - 1e-12))
        floor_d = 0.5 * grid.spacing * math.exp(-lam)
        if cap_d < floor_d:
            delta = cap_d
            feasible = False
        elif i3_of(cap_d) <= kappa:
            delta = cap_d
        elif i3_of(floor_d) > kappa:
            delta = floor_d
            feasible = False
        else:
            delta = _bisect_largest(lambda x: i3_of(x) <= kappa, floor_d, cap_d)

        rhs = {
            "I1": delta * math.exp((d + 1) * lam) * rho_sup,
            "I2": 0.0,
            "I3": i3_of(delta),
            "I4": i4_of(eps),
            "I5": T * rho_sup * u_tv / lam,
        }
        worst = max(rhs.values())
        achieved = feasible and worst <= kappa
        rungs.append(VanishingRung(kappa, achieved, lam, eps, delta, rhs,
                                   None if achieved else worst))
        prev_lam, prev_eps, prev_delta = lam, eps, delta
    return rungs


def vanishing_to_csv(rungs: list[VanishingRung], path: str) -> None:
    with open(path, "w") as fh:
        fh.write("kappa,achieved,kappa_floor,lam,epsilon,delta,"
                 "rhs_I1,rhs_I2,rhs_I3,rhs_I4,rhs_I5\n")
        for r in rungs:
            floor = "" if r.kappa_floor is None else "%.17g" % r.kappa_floor
            fh.write(",".join([
                "%.17g" % r.kappa, str(int(r.achieved)), floor,
                "%.17g" % r.lam, "%.17g" % r.epsilon, "%.17g" % r.delta,
            ] + ["%.17g" % r.rhs[n] for n in ("I1", "I2", "I3", "I4", "I5")])
                + "\n")
