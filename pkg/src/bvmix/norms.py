"""Norms and band energies: Lp, homogeneous H^-1, dual W^-1,1, discrete TV.

The weak norms are what the mixing bounds are stated in.  H^-1 is the
spectral sum over nonzero frequencies,

    ||f||_{H^-1}^2 = sum_{w != 0} |fhat(w)|^2 / (4 pi^2 |w|^2),

and W^-1,1 is the value of a small linear program: the supremum of the
pairing integral f*phi over test functions with ||phi||_inf +
||grad phi||_inf <= 1, discretized with node bounds and axis-adjacent
difference bounds.
"""

from __future__ import annotations

import numpy as np

from .grid import GridSpec, ScalarField, VectorField, convolve_periodic
from .mollifiers import sample_isotropic


def lp_norm(f: ScalarField, p: float) -> float:
    """Grid quadrature of the L^p norm; p = inf gives the max norm."""
    if p == np.inf:
        return float(np.abs(f.values).max())
    if p < 1:
        raise ValueError("p must be >= 1")
    return float((np.abs(f.values) ** p).sum() * f.grid.cell_volume) ** (1.0 / p)


def hminus1_norm(f: ScalarField) -> float:
    """Homogeneous negative Sobolev norm; the mean mode is excluded.

    The norm is homogeneous so the zero frequency carries no weight; a
    nonzero mean is simply not part of the value (callers who care report
    ``f.mean()`` alongside).
    """
    g = f.grid
    coeffs = np.fft.fftn(f.values) / g.n**g.dim
    k2 = sum(kk**2 for kk in g.frequencies())
    weight = np.zeros_like(k2)
    nz = k2 > 0
    weight[nz] = 1.0 / (4.0 * np.pi**2 * k2[nz])
    return float(np.sqrt(np.sum(np.abs(coeffs) ** 2 * weight)))


# ---------------------------------------------------------------------------
# discrete gradients and total variation
# ---------------------------------------------------------------------------


def forward_gradient(u: VectorField) -> list[list[np.ndarray]]:
    """Forward-difference gradient samples G[i][j] = d_i u_j (periodic).

    Derivative index first; step jumps land on the node just below the
    interface, which makes the discrete TV of an axis-aligned step exact.
    """
    g = u.grid
    inv = 1.0 / g.spacing
    return [
        [(np.roll(u.components[j], -1, axis=i) - u.components[j]) * inv for j in range(g.dim)]
        for i in range(g.dim)
    ]


def gradient_frobenius(grad: list[list[np.ndarray]]) -> np.ndarray:
    sq = np.zeros_like(grad[0][0])
    for row in grad:
        for comp in row:
            sq += comp**2
    return np.sqrt(sq)


def tv_norm(u: VectorField) -> float:
    """Isotropic finite-difference total variation sum |D+ u|_F dx^d."""
    frob = gradient_frobenius(forward_gradient(u))
    return float(frob.sum() * u.grid.cell_volume)


# ---------------------------------------------------------------------------
# band energies (the pigeonhole observables)
# ---------------------------------------------------------------------------


def _l2_sq(values: np.ndarray, cell: float) -> float:
    return float((values**2).sum() * cell)


def _trapezoid(vals: np.ndarray, times: np.ndarray) -> float:
    return float(np.trapezoid(vals, times))


def _check_band(value: float, scale: float, what: str) -> float:
    if value < -1e-12 * max(scale, 1.0):
        raise ArithmeticError(
            f"{what} band energy came out negative ({value:.3e}); "
            "this indicates an internal consistency failure"
        )
    return max(value, 0.0)


def l2_band_energy(snapshots: list[ScalarField], times: np.ndarray,
                   inner: float | None, outer: float) -> float:
    """L^2-in-time band energy between smoothing scales ``inner`` and ``outer``.

    Computes  ||g||^2_{L2_t L2_x} - ||g * k_outer||^2_{L2_t L2_x}  with
    g = phi * k_inner (or phi itself when inner is None/0).  Trapezoid
    quadrature over the snapshot times.  Sub-grid scales are allowed: the
    sampled kernel degenerates toward a discrete delta and the band energy
    toward zero, which is the discrete statement of the same limit.
    """
    times = np.asarray(times, dtype=float)
    if len(snapshots) != times.size or len(snapshots) < 2:
        raise ValueError("need matching snapshots/times with at least two entries")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    grid = snapshots[0].grid
    if inner is not None and inner > 0 and not inner < outer:
        raise ValueError("inner scale must be below outer scale")
    if not outer < 0.5:
        raise ValueError("outer scale must be below 1/2")
    k_out = sample_isotropic(grid, outer, allow_unresolved=True)
    k_in = None
    if inner is not None and inner > 0:
        k_in = sample_isotropic(grid, inner, allow_unresolved=True)
    cell = grid.cell_volume
    per_t = np.empty(times.size)
    for idx, snap in enumerate(snapshots):
        if snap.grid != grid:
            raise ValueError("snapshots must share a grid")
        g = convolve_periodic(snap, k_in.field) if k_in is not None else snap
        smoothed = convolve_periodic(g, k_out.field)
        per_t[idx] = _l2_sq(g.values, cell) - _l2_sq(smoothed.values, cell)
    total = _trapezoid(per_t, times)
    scale = _trapezoid(np.array([_l2_sq(s.values, cell) for s in snapshots]), times)
    return _check_band(total, scale, "L2")


def bv_band_energy(u: VectorField, inner: float | None, outer: float) -> float:
    """BV band energy  ||Du * k_inner||_{L1} - ||Du * k_inner * k_4outer||_{L1}.

    ``outer`` is the localization scale; the smoothing kernel applied on
    top uses radius 4*outer, matching how the gradient field is averaged
    before direction extraction.  Requires inner < 4*outer < 1/2 when an
    inner scale is given.
    """
    big = 4.0 * outer
    if not big < 0.5:
        raise ValueError("4*outer must be below 1/2")
    if inner is not None and inner > 0 and not inner < big:
        raise ValueError("inner scale must be below 4*outer")
    grid = u.grid
    k_big = sample_isotropic(grid, big, allow_unresolved=True)
    grad = forward_gradient(u)
    if inner is not None and inner > 0:
        k_in = sample_isotropic(grid, inner, allow_unresolved=True)
        grad = [[convolve_periodic(ScalarField(grid, comp), k_in.field).values
                 for comp in row] for row in grad]
    first = float(gradient_frobenius(grad).sum() * grid.cell_volume)
    smoothed = [[convolve_periodic(ScalarField(grid, comp), k_big.field).values
                 for comp in row] for row in grad]
    second = float(gradient_frobenius(smoothed).sum() * grid.cell_volume)
    return _check_band(first - second, first, "BV")


# ---------------------------------------------------------------------------
# W^-1,1 via its dual linear program
# ---------------------------------------------------------------------------

LP_NODE_CAP = 64 * 64


def pairing(f: ScalarField, phi: np.ndarray) -> float:
    """Quadrature pairing  sum f_i phi_i dx^d  (the LP objective)."""
    return float((f.values * phi).sum() * f.grid.cell_volume)


def is_feasible_test_function(grid: GridSpec, phi: np.ndarray, tol: float = 1e-12) -> bool:
    """Combined budget check: ||phi||_inf + max |adjacent diff|/dx <= 1."""
    sup = float(np.abs(phi).max())
    lip = max(
        float(np.abs(np.roll(phi, -1, axis=ax) - phi).max()) for ax in range(grid.dim)
    ) / grid.spacing
    return sup + lip <= 1.0 + tol


def _diff(phi: np.ndarray, dim: int) -> list[np.ndarray]:
    return [np.roll(phi, -1, axis=ax) - phi for ax in range(dim)]


def _diff_adjoint(ys: list[np.ndarray]) -> np.ndarray:
    out = np.zeros_like(ys[0])
    for ax, y in enumerate(ys):
        out += np.roll(y, 1, axis=ax) - y
    return out


def _lp_box_lip(c: np.ndarray, cap: float, diff_cap: float, gap_tol: float,
                floor: float, max_iter: int,
                phi0: np.ndarray | None, ys0: list[np.ndarray] | None):
    """max c.phi over |phi_i| <= cap, |adjacent diff| <= diff_cap.

    Primal-dual iteration (projected gradient on both sides) with an exact
    duality certificate: any edge flow y bounds the value by
    cap*||c - div y||_1 + diff_cap*||y||_1.  The loop stops once the gap is
    below gap_tol relative to max(value, floor) -- the caller passes the
    best lower bound across the outer scan as ``floor``, so LPs that
    cannot contend for the norm stop as soon as their upper certificate
    says so.  The returned primal point is exactly feasible (violations
    are scaled out, legal because the constraint set is star-shaped
    around zero).
    """
    dim = c.ndim
    # asymmetric steps: tau*sigma = 1/||D||^2 with ||D||^2 = 4*dim; the
    # primal variable lives at scale cap while the optimal edge flow is
    # tiny, so a large primal step closes the gap far faster than the
    # symmetric choice
    balance = 30.0
    tau = balance / np.sqrt(4.0 * dim)
    sigma = 1.0 / (balance * np.sqrt(4.0 * dim))
    phi = np.zeros_like(c) if phi0 is None else phi0.copy()
    ys = [np.zeros_like(c) for _ in range(dim)] if ys0 is None else [y.copy() for y in ys0]
    phib = phi.copy()
    check_every = 100
    best_lower, best_upper = -np.inf, np.inf
    best_feas = np.zeros_like(c)
    for it in range(max_iter):
        dphi = _diff(phib, dim)
        for ax in range(dim):
            v = ys[ax] + sigma * dphi[ax]
            ys[ax] = np.sign(v) * np.maximum(np.abs(v) - sigma * diff_cap, 0.0)
        phi_new = np.clip(phi - tau * _diff_adjoint(ys) + tau * c, -cap, cap)
        phib = 2.0 * phi_new - phi
        phi = phi_new
        if (it + 1) % check_every == 0:
            if diff_cap > 0:
                mx = max(float(np.abs(d).max()) for d in _diff(phi, dim))
                feas = phi / max(1.0, mx / diff_cap)
            else:
                feas = np.full_like(phi, float(np.clip(np.mean(phi), -cap, cap)))
            lower = float((c * feas).sum())
            resid = c - _diff_adjoint(ys)
            upper = cap * float(np.abs(resid).sum()) + diff_cap * sum(
                float(np.abs(y).sum()) for y in ys
            )
            if lower > best_lower:
                best_lower, best_feas = lower, feas
            best_upper = min(best_upper, upper)
            scale = max(abs(best_lower), floor, 1e-30)
            if (best_upper - best_lower <= gap_tol * scale
                    or best_upper <= floor * (1.0 + 0.1 * gap_tol)):
                return best_lower, best_upper, best_feas, ys
    raise RuntimeError(
        f"W^-1,1 inner LP failed to certify gap {gap_tol:g} within {max_iter} iterations "
        f"(last gap {best_upper - best_lower:.3e})"
    )


def _lp_exact(c: np.ndarray, cap: float, diff_cap: float) -> float:
    """Simplex solve of the box-Lipschitz LP; the stall rescue."""
    import scipy.sparse as sp
    from scipy.optimize import linprog
    if diff_cap < 1e-7:
        # caps below the solver's presolve tolerance draw spurious
        # infeasibility verdicts; the pinched problem is exact and the
        # value moves by less than the scan's own gap tolerance
        diff_cap = 0.0
    n = c.size
    shape = c.shape
    rows = []
    idx = np.arange(n).reshape(shape)
    for ax in range(c.ndim):
        rolled = np.roll(idx, -1, axis=ax).ravel()
        d = sp.coo_matrix((np.ones(n), (np.arange(n), rolled)), (n, n)) \
            - sp.eye(n)
        rows.extend([d, -d])
    a_ub = sp.vstack(rows, format="csr")
    b_ub = np.full(a_ub.shape[0], diff_cap)
    res = linprog(-c.ravel(), A_ub=a_ub, b_ub=b_ub,
                  bounds=(-cap, cap), method="highs")
    if not res.success:
        raise RuntimeError(f"exact LP fallback failed: {res.message}")
    return -float(res.fun)


def wminus11_norm(f: ScalarField, gap_tol: float = 1e-6, a_points: int = 33,
                  node_cap: int = LP_NODE_CAP, max_iter: int = 400_000) -> float:
    """W^-1,1 norm of f by the discretized dual problem.

    The combined budget ||phi||_inf + ||grad phi||_inf <= 1 is enforced by
    the stricter joint sets {|phi_i| <= a, |diff| <= (1-a)dx}.  A fixed
    scan over ``a_points`` values of a in [0,1] locates the winner (the
    value function is concave in a, so the grid argmax brackets the true
    maximizer within one step); a ternary collapse of that bracket then
    recovers what the grid resolution lost -- the value is piecewise
    linear in a, so the cuts converge.  Every inner LP either closes its
    own duality gap below ``gap_tol`` at the norm's scale or certifies,
    via its dual flow, that it cannot contend.  Inner solves are
    warm-started from their neighbor, scanning from a = 1 down so the
    floor grows quickly.
    """
    g = f.grid
    if g.n**g.dim > node_cap:
        raise ValueError(
            f"grid has {g.n**g.dim} nodes, above the LP cap {node_cap}; "
            "use hminus1_norm as the weak-norm proxy on fine grids"
        )
    c = f.values * g.cell_volume
    best = abs(float(c.sum()))  # a = 1 in closed form: differences pinched to zero
    phi0: np.ndarray | None = None
    ys0: list[np.ndarray] | None = None
    grid_as = np.linspace(1.0, 0.0, a_points)[1:-1]  # a = 0 forces phi = 0
    values: list[float] = []
    for a in grid_as:
        diff_cap = (1.0 - a) * g.spacing
        lower, _, feas, ys = _lp_box_lip(c, a, diff_cap, gap_tol, best, max_iter, phi0, ys0)
        phi0, ys0 = feas, ys
        values.append(lower)
        best = max(best, lower)

    small = g.n ** g.dim <= 1024  # simplex beats iteration dispatch here

    def solve(a: float) -> float:
        nonlocal phi0, ys0
        if small:
            return _lp_exact(c, a, (1.0 - a) * g.spacing)
        # probes stop at the norm's scale: near the maximizer that is full
        # accuracy, elsewhere the contention certificate suffices; a probe
        # that cannot certify on a short budget is handed to the exact
        # solver rather than left to grind
        try:
            lower, _, feas, ys = _lp_box_lip(c, a, (1.0 - a) * g.spacing,
                                             gap_tol, best, max_iter // 8,
                                             phi0, ys0)
            phi0, ys0 = feas, ys
            return lower
        except RuntimeError:
            return _lp_exact(c, a, (1.0 - a) * g.spacing)

    step = 1.0 / (a_points - 1)
    k = int(np.argmax(values))
    lo = max(0.0, float(grid_as[k]) - step)
    hi = min(1.0, float(grid_as[k]) + step)
    while hi - lo > 1e-6:
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        v1, v2 = solve(m1), solve(m2)
        best = max(best, v1, v2)
        if v1 < v2:
            lo = m1
        else:
            hi = m2
    return best
