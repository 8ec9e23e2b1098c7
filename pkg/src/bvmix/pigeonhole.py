"""Parameter selection by pigeonhole over smoothing-scale schedules.

The regularisation scales that feed the commutator bounds cannot be
chosen freely: each one must sit inside a spectral band where the data
happens to carry little energy, and the candidate bands form two
geometric ladders — an ordinary one for the test function (ratio alpha)
and a tetration ladder for the velocity gradient, whose rungs are
iterated exponentials.  Averaging over a ladder shows some rung holds at
most the mean energy, which is the entire selection argument.

Two modes.  The worst-case mode takes the last rung of each ladder and
produces closed-form parameters; beyond tiny transport budgets these are
tetration-scale magnitudes, so fields of the selection degrade from
float to TowerReal as needed.  The empirical mode actually measures the
band energies of supplied data and picks the emptiest reachable rung,
reporting rungs whose scales fall below the grid (or outside the torus)
as unreachable rather than pretending to scan them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .grid import ScalarField, VectorField
from .norms import bv_band_energy, l2_band_energy, tv_norm
from .tower import (TowerReal, exp_ceil, from_real, render, tetrate,
                    to_real, tower_compare, tower_exp, tower_ln,
                    tower_negate, tower_pow, tower_recip, tower_scale_log)
from .transport import AdvectionResult

Real = Union[float, int, TowerReal]

_REL_TOL = 1e-9


@dataclass(frozen=True)
class BoundConstants:
    """Dimensionless constants of the mixing bounds; only existence is
    guaranteed, so defaults are 1 and every test works with ratios."""

    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    dim: int = 2

    def __post_init__(self) -> None:
        if not (self.a > 0 and self.b > 0 and self.c > 0):
            raise ValueError("constants must be positive")
        if self.dim < 2:
            raise ValueError("dimension must be at least 2")


# ---------------------------------------------------------------------------
# mixed float/tower helpers
# ---------------------------------------------------------------------------


def as_tower(x: Real) -> TowerReal:
    """Lift a plain number; huge integers go through their logarithm."""
    if isinstance(x, TowerReal):
        return x
    if isinstance(x, int) and x.bit_length() > 1020:
        return tower_exp(from_real(math.log(x)))
    return from_real(float(x))


def demote(x: TowerReal) -> Real:
    """Hand back an ordinary float whenever the value fits one."""
    if x.sign == 0 or x.height == 0:
        return to_real(x)
    return x


def _mul(a: TowerReal, b: TowerReal) -> TowerReal:
    """Product of positive values.

    Plain times anything is exact tower scaling.  Tower times tower is
    resolved by absorption: the honest adjustment to the larger factor's
    mantissa is below float precision once both magnitudes are towers.
    """
    if a.sign <= 0 or b.sign <= 0:
        raise ValueError("product helper only handles positive values")
    if a.height == 0:
        return tower_scale_log(b, math.log(a.mantissa))
    if b.height == 0:
        return tower_scale_log(a, math.log(b.mantissa))
    if a.recip != b.recip:
        # huge times tiny: compare magnitudes of exponents and absorb
        big, small = (a, b) if not a.recip else (b, a)
        flipped = TowerReal(1, False, small.height, small.mantissa)
        return big if _key(big) >= _key(flipped) else tower_recip(flipped)
    return a if _key(a) >= _key(b) else b


def _key(t: TowerReal) -> tuple[int, float]:
    return (t.height, t.mantissa)


def _pow(base: TowerReal, n: Real) -> TowerReal:
    """base**n for positive base and positive integer-like n."""
    if isinstance(n, TowerReal):
        ln = tower_ln(base)
        if ln.sign == 0:
            return from_real(1.0)
        mag = _mul(TowerReal(1, ln.recip, ln.height, ln.mantissa)
                   if ln.height else from_real(abs(to_real(ln))), n)
        return tower_exp(mag if ln.sign > 0 else tower_negate(mag))
    return tower_pow(base, n)


def _succ(n: Real) -> Real:
    """n + 1; at tower heights the increment is below mantissa precision."""
    if isinstance(n, TowerReal):
        return n
    return n + 1


def ceil_value(x: TowerReal) -> Real:
    """Integer ceiling where representable, else the comparison key.

    Tower-height ceilings cannot be materialized as integers; the tower
    itself orders correctly against every value the formulas compare it
    with, which is all the selection chain needs.
    """
    if x.sign <= 0:
        raise ValueError("ceiling helper expects positive values")
    if x.height == 0:
        return int(math.ceil(x.mantissa))
    if x.recip:
        return 1
    return x


def _close(a: Real, b: Real) -> bool:
    ta, tb = as_tower(a), as_tower(b)
    if ta.height != 0 or tb.height != 0:
        return ta == tb or tower_compare(ta, tb) == 0
    x, y = to_real(ta), to_real(tb)
    return math.isclose(x, y, rel_tol=_REL_TOL, abs_tol=1e-300)


def _le(a: Real, b: Real) -> bool:
    return tower_compare(as_tower(a), as_tower(b)) <= 0


# ---------------------------------------------------------------------------
# the selection record
# ---------------------------------------------------------------------------


def _band_scale(height_step: Real, rung: Real, x0: float) -> TowerReal:
    """(exp^(height_step * rung)(x0))^(-1) as a tower value."""
    if isinstance(height_step, TowerReal) or isinstance(rung, TowerReal):
        # the height itself is astronomically large; the scale is the
        # reciprocal of a tower whose height only matters as an order key
        h = _mul(as_tower(height_step), as_tower(rung))
        return tower_recip(tower_exp(h))
    return tower_recip(tetrate(int(height_step) * int(rung), x0))


def _alpha_of(eps: Real, lam: float, d: int) -> Real:
    return demote(tower_scale_log(_pow(as_tower(eps), d), -d * (d + 1) * lam))


def _delta_of(alpha: Real, n1: Real, lam: float) -> Real:
    core = _pow(as_tower(alpha), n1)
    return demote(tower_scale_log(core, math.log(0.5) - lam))


@dataclass(frozen=True)
class PigeonholeSelection:
    """One consistent set of regularisation parameters.

    Every equation tying the fields together is re-verified on
    construction; fields hold floats when the magnitudes allow and
    TowerReal otherwise.  ``transport_free`` flags the degenerate
    zero-transport branch where the whole ladder collapses to lam = 0.
    """

    lam: float
    alpha: Real
    n1_count: Real
    n1: Real
    delta: Real
    delta_prime: Real
    x0: float
    height_step: Real
    n2_count: Real
    n2: Real
    epsilon: Real
    epsilon_prime: Real
    dim: int = 2
    transport_free: bool = False

    def __post_init__(self) -> None:
        d = self.dim
        lam = self.lam
        if lam < 0:
            raise ValueError("lam must be nonnegative")
        for name in ("n1", "n2"):
            v = getattr(self, name)
            if not isinstance(v, TowerReal) and v < 1:
                raise ValueError(f"{name} must be at least 1")
        if not _le(self.n1, self.n1_count) or not _le(self.n2, self.n2_count):
            raise ValueError("rung index exceeds its ladder length")
        checks = {
            "alpha": (self.alpha, _alpha_of(self.epsilon, lam, d)),
            "delta": (self.delta, _delta_of(self.alpha, self.n1, lam)),
            "delta_prime": (self.delta_prime,
                            demote(_pow(as_tower(self.alpha), _succ(self.n1)))),
            "epsilon": (self.epsilon,
                        demote(tower_scale_log(
                            _band_scale(self.height_step, self.n2, self.x0),
                            math.log(0.25)))),
            "epsilon_prime": (self.epsilon_prime,
                              demote(_band_scale(self.height_step,
                                                 _succ(self.n2), self.x0))),
            "n2_count": (self.n2_count, ceil_value(
                as_tower(exp_ceil(5.0 * lam)))),
            "height_step": (self.height_step, ceil_value(
                as_tower(exp_ceil((d + 5.0) * lam)))),
        }
        for name, (have, want) in checks.items():
            if not _close(have, want):
                raise ValueError(f"inconsistent selection field {name}: "
                                 f"{have!r} vs required {want!r}")
        # the ladder count must be the ceiling of eps^-d e^(d(d+1)lam)
        raw = tower_scale_log(_pow(tower_recip(as_tower(self.epsilon)), d),
                              d * (d + 1) * lam)
        want_count = ceil_value(raw)
        if not _close(self.n1_count, want_count):
            raise ValueError("n1_count is not the required ceiling")
        if not _le(self.delta,
                   demote(tower_scale_log(as_tower(self.epsilon), -lam))):
            raise ValueError("delta must not exceed epsilon * e^-lam")


def lambda_value(kappa: float, rho_sup: float, T: float, u_tv: float) -> float:
    """Dimensionless transport budget (1/kappa) * T * sup * tv."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if min(rho_sup, T, u_tv) < 0:
        raise ValueError("transport ingredients must be nonnegative")
    return T * rho_sup * u_tv / kappa


def select_worstcase(kappa: float, rho_sup: float, T: float, u_tv: float,
                     c: BoundConstants = BoundConstants()
                     ) -> PigeonholeSelection:
    """Closed-form selection taking the last rung of both ladders.

    No data is inspected: the averaging argument guarantees the last
    rung works when nothing better is known.  All derived magnitudes
    follow the equation chain exactly, which drives most of them out of
    float range as soon as lam is more than a few units.
    """
    lam = lambda_value(kappa, rho_sup, T, u_tv)
    d = c.dim
    n2_count = exp_ceil(5.0 * lam)
    height_step = exp_ceil((d + 5.0) * lam)
    x0 = rho_sup / kappa
    n2 = n2_count
    epsilon = demote(tower_scale_log(_band_scale(height_step, n2, x0),
                                     math.log(0.25)))
    epsilon_prime = demote(_band_scale(height_step, n2 + 1, x0))
    alpha = _alpha_of(epsilon, lam, d)
    n1_count = ceil_value(tower_scale_log(
        _pow(tower_recip(as_tower(epsilon)), d), d * (d + 1) * lam))
    n1 = n1_count
    delta = _delta_of(alpha, n1, lam)
    delta_prime = demote(_pow(as_tower(alpha), _succ(n1)))
    return PigeonholeSelection(
        lam=lam, alpha=alpha, n1_count=n1_count, n1=n1, delta=delta,
        delta_prime=delta_prime, x0=x0, height_step=height_step,
        n2_count=n2_count, n2=n2, epsilon=epsilon,
        epsilon_prime=epsilon_prime, dim=d, transport_free=(lam == 0.0))


# ---------------------------------------------------------------------------
# empirical scans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScanCaps:
    """Desk-scale limits on how many rungs each scan may touch."""

    max_n1: int = 64
    max_m: int = 12
    max_n2: int = 16

    def __post_init__(self) -> None:
        if min(self.max_n1, self.max_m, self.max_n2) < 1:
            raise ValueError("caps must be at least 1")


@dataclass(frozen=True)
class BandStatus:
    """Outcome of one rung of the tetration ladder."""

    rung: int
    outer: float | None
    inner: float | None
    energy: float | None
    status: str  # scanned | underflow | torus | cap


@dataclass(frozen=True)
class EmpiricalReport:
    lam: float
    horizon: float
    u_tv: float
    phi_sup: float
    l2_scales: list[float]
    l2_energies: list[float]
    l2_truncated: bool
    l2_total: float
    l2_mean: float
    cross_term: float
    cross_ratio: float
    certificate: float
    bv_bands: list[BandStatus]
    unreachable: int


def l2_band_scan(snapshots: list[ScalarField], times: np.ndarray,
                 scales: list[float]) -> list[float]:
    """Band energies down a decreasing schedule of smoothing scales.

    Entry i is the energy between scales[i+1] (inner) and scales[i]
    (outer); a schedule of k scales yields k-1 bands.
    """
    if len(scales) < 2:
        raise ValueError("schedule needs at least two scales")
    if any(b >= a for a, b in zip(scales, scales[1:])):
        raise ValueError("schedule must be strictly decreasing")
    return [l2_band_energy(snapshots, times, scales[i + 1], scales[i])
            for i in range(len(scales) - 1)]


def _series_parts(series: AdvectionResult):
    times = np.asarray(series.times(), dtype=float)
    fields = series.fields()
    sup = max(float(np.abs(f.values).max()) for f in fields)
    return fields, times, sup


def _phi_sq_norm(fields, times) -> float:
    vals = [float((f.values ** 2).sum() * f.grid.cell_volume) for f in fields]
    return float(np.trapezoid(vals, times))


def select_empirical(phi_series: AdvectionResult, u: VectorField,
                     kappa: float, caps: ScanCaps = ScanCaps(),
                     c: BoundConstants = BoundConstants()
                     ) -> tuple[PigeonholeSelection, EmpiricalReport]:
    """Measure the ladders on real data and take the emptiest rung.

    The velocity ladder is scanned first because epsilon (hence alpha
    and the whole test-function ladder) depends on the chosen rung.
    Rungs whose scales no grid can represent are reported, not scanned.
    The test-function sup norm stands in for the density bound in the
    transport budget, since this mode owns no separate density.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    fields, times, sup = _series_parts(phi_series)
    if times.size < 2:
        raise ValueError("series needs at least two snapshots")
    grid = fields[0].grid
    u_tv = tv_norm(u)
    horizon = float(times[-1] - times[0])
    lam = lambda_value(kappa, sup, horizon, u_tv)
    d = c.dim
    n2_count = exp_ceil(5.0 * lam)
    height_step = exp_ceil((d + 5.0) * lam)
    x0 = sup / kappa
    cell = 1.0 / grid.n

    bands: list[BandStatus] = []
    best: tuple[float, int] | None = None
    if u_tv == 0.0:
        # constant flow: every band energy is zero, smallest rung wins
        n2 = 1
        bands.append(BandStatus(1, None, None, 0.0, "scanned"))
    else:
        top = min(n2_count, caps.max_n2)
        for rung in range(1, top + 1):
            if height_step * rung > caps.max_m:
                bands.append(BandStatus(rung, None, None, None, "cap"))
                break
            outer = to_real(_band_scale(height_step, rung, x0))
            if outer < cell:
                bands.append(BandStatus(rung, None, None, None, "underflow"))
                break  # scales only shrink from here
            if not 4.0 * outer < 0.5:
                bands.append(BandStatus(rung, outer, None, None, "torus"))
                continue
            inner = to_real(_band_scale(height_step, rung + 1, x0))
            inner_arg = inner if inner >= cell else None
            energy = bv_band_energy(u, inner_arg, outer)
            bands.append(BandStatus(rung, outer, inner_arg, energy, "scanned"))
            if best is None or energy < best[0]:
                best = (energy, rung)
        if best is None:
            finest = min((b.outer for b in bands if b.outer), default=None)
            raise ValueError(
                "no reachable velocity band: usable scales lie in "
                f"[{cell:.3g}, 0.125), finest scheduled scale was "
                f"{finest if finest is not None else 'below float range'}")
        n2 = best[1]
    unreachable = sum(1 for b in bands if b.status != "scanned")

    epsilon = demote(tower_scale_log(_band_scale(height_step, n2, x0),
                                     math.log(0.25)))
    epsilon_prime = demote(_band_scale(height_step, n2 + 1, x0))
    alpha = _alpha_of(epsilon, lam, d)
    n1_count = ceil_value(tower_scale_log(
        _pow(tower_recip(as_tower(epsilon)), d), d * (d + 1) * lam))
    if isinstance(alpha, TowerReal):
        raise ValueError("alpha fell below float range; the test-function "
                         "ladder cannot be scanned on any grid")
    top1 = caps.max_n1 if isinstance(n1_count, TowerReal) \
        else min(n1_count, caps.max_n1)
    schedule: list[float] = []
    energies: list[float] = []
    truncated = False
    for k in range(1, top1 + 1):
        outer = alpha ** k
        if outer < cell:
            truncated = True  # nothing below one cell is represented
            break
        inner = alpha ** (k + 1)
        schedule.append(outer)
        energies.append(l2_band_energy(fields, times,
                                       inner if inner >= cell else None,
                                       outer))
    if not energies:
        raise ValueError(
            f"no reachable test-function band: alpha = {alpha:.3g} is "
            f"already below one grid cell ({cell:.3g})")
    n1 = 1 + min(range(len(energies)), key=lambda i: (energies[i], i))
    total = _phi_sq_norm(fields, times)
    mean = sum(energies) / len(energies)
    cross = max(0.0, (sum(energies) - total) / len(energies))
    cross_ratio = cross / (horizon * alpha) if horizon * alpha > 0 else 0.0
    certificate = mean + horizon * alpha * cross_ratio

    delta = _delta_of(alpha, n1, lam)
    delta_prime = demote(_pow(as_tower(alpha), n1 + 1))
    selection = PigeonholeSelection(
        lam=lam, alpha=alpha, n1_count=n1_count, n1=n1, delta=delta,
        delta_prime=delta_prime, x0=x0, height_step=height_step,
        n2_count=n2_count, n2=n2, epsilon=epsilon,
        epsilon_prime=epsilon_prime, dim=d, transport_free=(lam == 0.0))
    report = EmpiricalReport(
        lam=lam, horizon=horizon, u_tv=u_tv, phi_sup=sup,
        l2_scales=schedule, l2_energies=energies, l2_truncated=truncated,
        l2_total=total, l2_mean=mean, cross_term=cross,
        cross_ratio=cross_ratio, certificate=certificate, bv_bands=bands,
        unreachable=unreachable)
    return selection, report


# ---------------------------------------------------------------------------
# headline thresholds
# ---------------------------------------------------------------------------


def theorem_threshold(kappa: float, rho_sup: float, T: float, u_tv: float,
                      c: BoundConstants = BoundConstants()) -> TowerReal:
    """Mixing-time threshold kappa * (exp^H(rho_sup/kappa))^-1.

    H is the integer ceiling of a * exp((b/kappa) * rho_sup * T * tv);
    the ceiling is taken before tower construction, and non-integer
    heights never appear.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if min(rho_sup, T, u_tv) < 0:
        raise ValueError("transport ingredients must be nonnegative")
    height = exp_ceil((c.b / kappa) * rho_sup * T * u_tv, c.a)
    tower = tetrate(height, rho_sup / kappa)
    return tower_scale_log(tower_recip(tower), math.log(kappa))


def mixing_lower_bound(rho0_weak: float, rho0_sup: float, T: float,
                       u_tv: float, c: BoundConstants = BoundConstants()
                       ) -> TowerReal:
    """Lower bound on the mixed norm after time T under a BV flow.

    rho0_weak is the initial negative-norm size, rho0_sup the sup bound;
    the bound is their contrapositive pairing: the weak norm cannot have
    dropped below rho0_weak / exp-tower(height set by the transport
    budget at contrast ratio rho0_sup/rho0_weak).
    """
    if rho0_weak <= 0:
        raise ValueError("rho0_weak must be positive")
    if rho0_sup < rho0_weak:
        raise ValueError("sup bound cannot be below the weak norm")
    if min(T, u_tv) < 0:
        raise ValueError("transport ingredients must be nonnegative")
    ratio = rho0_sup / rho0_weak
    height = exp_ceil(c.b * ratio * T * u_tv, c.a)
    tower = tetrate(height, ratio)
    return tower_scale_log(tower_recip(tower), math.log(rho0_weak))


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------


def render_value(x: Real) -> str:
    if isinstance(x, TowerReal):
        return render(x)
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


_CSV_FIELDS = ("lam", "alpha", "n1_count", "n1", "delta", "delta_prime",
               "x0", "height_step", "n2_count", "n2", "epsilon",
               "epsilon_prime", "dim", "transport_free")


def selection_to_csv(sel: PigeonholeSelection) -> str:
    header = ",".join(_CSV_FIELDS)
    row = ",".join(
        str(getattr(sel, f)) if f in ("dim", "transport_free")
        else render_value(getattr(sel, f)) for f in _CSV_FIELDS)
    return header + "\n" + row + "\n"
