"""Radial ground states of a Henon-type problem by scaled shooting.

Minimizers of the quotient

    Q(w) = ||w||_{W^1_p}^p / (int_B |x|^alpha |w|^q dx)^(p/q)

over W^1_p(B) \ {0} can be rescaled so that the Euler-Lagrange equation
carries no multiplier: the profile w solves

    -(r^(n-1) |w'|^(p-2) w')' + r^(n-1) w^(p-1) = r^(alpha+n-1) w^(q-1)

with w > 0, w'(0) = 0, w'(1) = 0.  The minimum value of the quotient is then
mu = ||w||_{W^1_p}^(p(q-p)/q), and the unit-norm minimizer is v = w / ||w||.

The profile is found by shooting on the origin value d = w(0): integrate
outward and drive the boundary slope w'(1) to zero.  Trials that die (w hits
zero) or blow up before r = 1 are mapped to continuous surrogate residuals so
the root-finder sees a single sign change.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BracketError, ConvergenceError
from .flux_ode import (FluxState, grad_from_flux, integrate_flux_ode,
                       profile_evaluators)
from .mesh import RadialFunction, RadialGrid, build_grid
from .rootfind import brent_root, sign_change_pairs
from .special import surface_measure
from .steklov import _shoot as _steklov_shot, solve_steklov

__all__ = ["HenonSolution", "validate_parameters", "critical_exponent",
           "admissible_q_upper", "shooting_miss", "solve_henon", "resample",
           "SlopeReport", "derivative_asymptotics", "LimitPoint",
           "LimitReport", "limit_comparison"]

# Trial profiles larger than this multiple of the origin value are classified
# as blow-up.  The threshold must scale with d: near q = p the true origin
# value itself is astronomically large (d grows like mu^(q/(p(q-p)))), so an
# absolute cutoff would misclassify the solution itself.
_CAP_FACTOR = 1e6


def critical_exponent(n: int, p: float) -> float:
    """Sobolev critical exponent p* = np/(n-p), infinite for p >= n."""
    return n * p / (n - p) if p < n else math.inf


def admissible_q_upper(n: int, p: float, alpha: float) -> float:
    """Largest admissible q, namely p* + p alpha/(n-p) = p(n+alpha)/(n-p).

    The weight |x|^alpha relaxes the critical exponent: the quotient stays
    well-defined (and attained) for q up to this alpha-shifted threshold.
    """
    return p * (n + alpha) / (n - p)


def validate_parameters(n: int, p: float, q: float, alpha: float) -> None:
    if not (isinstance(n, (int, np.integer)) and n >= 3):
        raise ValueError(f"dimension must be an integer >= 3, got {n!r}")
    if not 2.0 <= p < n:
        raise ValueError(f"p must satisfy 2 <= p < n, got p={p} at n={n}")
    if not alpha >= 0.0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    upper = admissible_q_upper(n, p, alpha)
    if q <= p:
        raise ValueError(
            f"need q > p, got q={q} at p={p}; q = p degenerates to the "
            "constant profile (the quotient reduces to the volume ratio)")
    if not q < upper:
        raise ValueError(
            f"need q < p(n+alpha)/(n-p) = {upper:.6g}, got q={q}; beyond "
            "it the weighted quotient loses compactness")


def _seed(n: int, p: float, q: float, alpha: float, d: float,
          r_seed: float) -> FluxState:
    """Startup state at r_seed for the trial with origin value d.

    The flux starts as (a - b r^alpha) r^n with a = d^(p-1)/n and
    b = d^(q-1)/(alpha+n); keeping the sink contribution makes the seed exact
    for the constant solution w = 1 when alpha = 0.
    """
    if d <= 0.0:
        raise ValueError(f"origin value must be positive, got {d}")
    if not 0.0 < r_seed <= 1e-2:
        raise ValueError(f"seed radius must lie in (0, 1e-2], got {r_seed}")
    c_net = d ** (p - 1.0) / n - d ** (q - 1.0) / (alpha + n) * r_seed ** alpha
    amp = math.copysign(abs(c_net) ** (1.0 / (p - 1.0)), c_net)
    value = d + amp * (p - 1.0) / p * r_seed ** (p / (p - 1.0))
    return FluxState(radius=r_seed, value=value, flux=c_net * r_seed ** n)


def _rhs_factory(n: int, p: float, q: float, alpha: float):
    nm1, pm1, qm1 = n - 1, p - 1.0, q - 1.0

    def rhs(r, w):
        # Trial steps may poke below zero; fractional powers need w >= 0.
        w = w if w > 0.0 else 0.0
        return r ** nm1 * (w ** pm1 - r ** alpha * w ** qm1)

    return rhs


def _trial(n, p, q, alpha, d, tol, seed_radius, dense=False):
    seed = _seed(n, p, q, alpha, d, seed_radius)
    return integrate_flux_ode(_rhs_factory(n, p, q, alpha), seed, 1.0,
                              p=p, n=n, tol=tol,
                              value_cap=_CAP_FACTOR * max(1.0, d),
                              stop_on_nonpositive=True, dense=dense)


def shooting_miss(n: int, p: float, q: float, alpha: float, d: float, *,
                  tol: float = 1e-10, seed_radius: float = 1e-4) -> float:
    """Boundary-slope residual of the trial with origin value d.

    Completed trials return w'(1).  Trials that die at r* < 1 return
    w'(r*) - (1 - r*) (kept negative, growing more so the earlier the death);
    trials that blow up return w'(r*) + (1 - r*).  Both surrogates match
    w'(1) continuously as r* -> 1, so the residual changes sign exactly once
    between undershoot and overshoot.
    """
    traj = _trial(n, p, q, alpha, d, tol, seed_radius)
    end = traj.end
    slope = float(grad_from_flux(end.flux, end.radius, p, n))
    if traj.status == "hit_zero":
        return slope - (1.0 - end.radius)
    if traj.status == "capped":
        return slope + (1.0 - end.radius)
    return slope


def _initial_center(n: int, p: float, q: float, alpha: float,
                    seed_radius: float) -> float:
    """Predicted origin value from the large-alpha asymptotics.

    mu is close to (alpha+n)^(p/q) |S|^(1-p/q) lambda_p and the profile is
    close to ||w|| phi_p, so d ~ mu^(q/(p(q-p))) phi_p(0).  The prediction
    only seeds a bracket; moderate alpha is handled by the outward expansion.
    """
    end = _steklov_shot(n, p, 1e-8, seed_radius, dense=False).end
    lam = end.flux / end.value ** (p - 1.0)
    meas = surface_measure(n)
    mu_pred = meas ** (1.0 - p / q) * (alpha + n) ** (p / q) * lam
    phi0 = (lam * meas) ** (-1.0 / p) / end.value
    return mu_pred ** (q / (p * (q - p))) * phi0


def _bracket(miss, lo: float, hi: float, scan_points: int,
             max_expansions: int):
    """Scan geometrically for sign changes, expanding outward if needed.

    Returns (brackets, expansions) where each bracket is (a, b, fa, fb);
    a == b signals an exact root hit at a scan point.  Several brackets mean
    the residual crossed zero more than once; the caller disambiguates by
    the quotient value.
    """
    ds = list(np.geomspace(lo, hi, scan_points))
    fs = [miss(d) for d in ds]
    expansions = 0
    while True:
        brackets = []
        if fs[0] == 0.0:
            brackets.append((ds[0], ds[0], 0.0, 0.0))
        # An exact zero at a later scan point is caught as a pair whose right
        # endpoint vanishes; the root solve returns it immediately.
        for i in sign_change_pairs(fs):
            brackets.append((ds[i], ds[i + 1], fs[i], fs[i + 1]))
        if brackets:
            return brackets, expansions
        if expansions >= max_expansions:
            raise BracketError(
                f"no sign change of the shooting residual in "
                f"[{ds[0]:.4g}, {ds[-1]:.4g}] after {expansions} expansions")
        expansions += 1
        if fs[-1] > 0.0:  # residual still positive at the top: root above
            ds.append(ds[-1] * 4.0)
            fs.append(miss(ds[-1]))
        else:
            ds.insert(0, ds[0] / 4.0)
            fs.insert(0, miss(ds[0]))


@dataclass
class HenonSolution:
    """Ground-state profile with its multiplier and normalized version."""

    n: int
    p: float
    q: float
    alpha: float
    d0: float        # origin value w(0) of the multiplier-free profile
    mu: float        # minimum of the quotient, ||w||^(p(q-p)/q)
    norm_w: float    # ||w||_{W^1_p}
    shoot_res: float  # |w'(1)| left by the root solve
    w: RadialFunction
    v: RadialFunction  # w / ||w||
    grid: RadialGrid
    diagnostics: dict = field(default_factory=dict)


def _finalize(n, p, q, alpha, grid, d0, shoot_res, value_fn, grad_fn,
              diagnostics) -> HenonSolution:
    meas = surface_measure(n)
    rq = grid.quad_x
    wq = np.maximum(value_fn(rq), 0.0)
    dwq = grad_fn(rq)
    num_int = grid.integrate((np.abs(dwq) ** p + wq ** p) * rq ** (n - 1))
    den_int = grid.integrate(rq ** (alpha + n - 1) * wq ** q)
    norm_w = (meas * num_int) ** (1.0 / p)
    mu = norm_w ** (p * (q - p) / q)
    # Same number through the quotient; agreement checks quadrature and the
    # boundary residual at once, since Q(w) = mu rests on the weak form.
    mu_quotient = meas ** (1.0 - p / q) * num_int / den_int ** (p / q)

    w = RadialFunction(grid, np.asarray(value_fn(grid.nodes), dtype=float),
                       np.asarray(grad_fn(grid.nodes), dtype=float),
                       _value_fn=value_fn, _deriv_fn=grad_fn)
    inv = 1.0 / norm_w
    v = RadialFunction(grid, inv * w.values, inv * w.derivatives,
                       _value_fn=lambda r: inv * np.asarray(value_fn(r)),
                       _deriv_fn=lambda r: inv * np.asarray(grad_fn(r)))
    diagnostics = dict(diagnostics)
    diagnostics["mu_quotient_rel_err"] = float(abs(mu_quotient - mu) / mu)
    return HenonSolution(n=n, p=p, q=q, alpha=alpha, d0=float(d0),
                         mu=float(mu), norm_w=float(norm_w),
                         shoot_res=float(shoot_res), w=w, v=v,
                         grid=grid, diagnostics=diagnostics)


def solve_henon(n: int, p: float, q: float, alpha: float, *,
                grid: RadialGrid | None = None, refinement: int = 8,
                tol: float = 1e-10, seed_radius: float = 1e-4,
                d_lo: float | None = None, d_hi: float | None = None,
                scan_points: int = 16, max_expansions: int = 12
                ) -> HenonSolution:
    """Shoot for the ground state and package profile, mu, and diagnostics.

    The bracket for the origin value is seeded from the large-alpha
    prediction unless d_lo/d_hi are given.  Bracketing trials run at a
    relaxed tolerance; only the final profile is integrated at full
    tolerance with dense output.
    """
    validate_parameters(n, p, q, alpha)
    if scan_points < 2:
        raise ValueError("scan needs at least two points")
    if max_expansions < 0:
        raise ValueError("max_expansions must be nonnegative")
    if grid is None:
        grid = build_grid(n, refinement=refinement, alpha_hint=alpha)
    elif grid.n != n:
        raise ValueError(f"grid was built for n={grid.n}, requested n={n}")

    if d_lo is None or d_hi is None:
        center = _initial_center(n, p, q, alpha, seed_radius)
        d_lo = center / 10.0 if d_lo is None else d_lo
        d_hi = center * 10.0 if d_hi is None else d_hi
    if not 0.0 < d_lo < d_hi:
        raise ValueError(f"need 0 < d_lo < d_hi, got {d_lo}, {d_hi}")

    trials = 0
    scan_tol = max(tol, 1e-8)

    def miss_scan(d):
        nonlocal trials
        trials += 1
        return shooting_miss(n, p, q, alpha, d, tol=scan_tol,
                             seed_radius=seed_radius)

    def miss_fine(d):
        nonlocal trials
        trials += 1
        return shooting_miss(n, p, q, alpha, d, tol=tol,
                             seed_radius=seed_radius)

    brackets, expansions = _bracket(miss_scan, d_lo, d_hi, scan_points,
                                    max_expansions)
    candidates = []
    for a, b, fa, fb in brackets:
        if a == b:
            d0 = a
        else:
            # The quotient is stationary at the root, so mu is quadratically
            # insensitive to the leftover error in d; modest tolerances do.
            # The miss values carry integration noise ~ (trajectory scale) x
            # tol, so the f threshold cannot sit much below 1e-6 relative.
            d0 = brent_root(miss_fine, a, b,
                            f_tol=1e-6 * max(abs(fa), abs(fb)),
                            x_tol=1e-12 * max(1.0, b), fa=fa, fb=fb)
        final = _trial(n, p, q, alpha, d0, tol, seed_radius, dense=True)
        if final.status != "completed":
            if len(brackets) > 1:
                continue  # spurious crossing of a surrogate branch
            raise ConvergenceError(
                f"profile at the fitted origin value {d0:.8g} terminated "
                f"early ({final.status} at r={final.end.radius:.6g})")
        c_net = (d0 ** (p - 1.0) / n
                 - d0 ** (q - 1.0) / (alpha + n) * seed_radius ** alpha)
        value_fn, grad_fn = profile_evaluators(final, d0, c_net)
        residual = float(grad_from_flux(final.end.flux, 1.0, p, n))
        diagnostics = {
            "bracket": (float(a), float(b)),
            "expansions": expansions,
            "ode_steps": int(final.rs.size),
        }
        candidates.append(_finalize(n, p, q, alpha, grid, d0, abs(residual),
                                    value_fn, grad_fn, diagnostics))
    if not candidates:
        raise ConvergenceError(
            "every bracketed root produced a profile that terminated early")
    # With several roots the minimizer is the branch of least quotient value.
    best = min(candidates, key=lambda sol: sol.mu)
    best.diagnostics["trials"] = trials
    if len(candidates) > 1:
        best.diagnostics["competing_roots"] = [
            (sol.d0, sol.mu) for sol in candidates]
    return best


def resample(sol: HenonSolution, grid: RadialGrid) -> HenonSolution:
    """Re-tabulate a solved profile on another grid without re-shooting.

    Norms and mu are re-integrated with the new grid's quadrature; the
    underlying dense profile is unchanged.
    """
    if grid.n != sol.n:
        raise ValueError(f"grid was built for n={grid.n}, solution has n={sol.n}")
    diagnostics = dict(sol.diagnostics)
    diagnostics["resampled"] = True
    return _finalize(sol.n, sol.p, sol.q, sol.alpha, grid, sol.d0,
                     sol.shoot_res, sol.w, sol.w.derivative, diagnostics)


@dataclass
class SlopeReport:
    """Log-log growth rates of v' at both degenerate ends.

    The boundary slope is fit against log(1-r) deep inside the layer,
    1 - r in [1e-3/alpha, 0.1/alpha]: there the cumulative mass of the
    weight r^(alpha+n-1) is still linear in 1 - r and the flux obeys the
    clean power law (v')^(p-1) ~ alpha (1-r).  Past 1-r ~ 1/alpha that
    mass saturates and the local slope decays toward zero, so a window on
    the far side of the layer would measure the crossover, not the
    exponent.  The origin slope is fit against log r on r in [1e-3, 1e-2].
    Both tend to `expected` = 1/(p-1): the profile leaves the origin and
    meets the Neumann boundary with the same power.
    A slope of None flags a monotonicity violation (v' <= 0 somewhere in
    that window), which is a finding, not an exception.
    """

    expected: float
    boundary_slope: float | None
    origin_slope: float | None
    boundary_monotone: bool
    origin_monotone: bool


def _window_slope(dv, xs, anchor_vals) -> tuple[float | None, bool]:
    vals = dv(anchor_vals)
    if not np.all(vals > 0.0):
        return None, False
    return float(np.polyfit(np.log(xs), np.log(vals), 1)[0]), True


def derivative_asymptotics(sol: HenonSolution, num: int = 40) -> SlopeReport:
    """Fit the endpoint growth exponents of v'; needs alpha >= 100.

    Below alpha = 100 the boundary layer is too shallow for the fit window
    to sit inside it.
    """
    if sol.alpha < 100.0:
        raise ValueError(f"slope windows are calibrated for alpha >= 100, "
                         f"got alpha={sol.alpha:g}")
    dv = sol.v.derivative
    alpha = sol.alpha
    s = np.geomspace(1e-3 / alpha, 0.1 / alpha, num)
    boundary_slope, boundary_ok = _window_slope(dv, s, 1.0 - s)
    r = np.geomspace(1e-3, 1e-2, num)
    origin_slope, origin_ok = _window_slope(dv, r, r)
    return SlopeReport(expected=1.0 / (sol.p - 1.0),
                       boundary_slope=boundary_slope,
                       origin_slope=origin_slope,
                       boundary_monotone=boundary_ok,
                       origin_monotone=origin_ok)


@dataclass
class LimitPoint:
    alpha: float
    mu: float
    rho: float      # mu / ((alpha+n)^(p/q) |S|^(1-p/q) lambda_p)
    sup_err: float  # max |v - phi_p| on a uniform probe grid


@dataclass
class LimitReport:
    """Convergence of (mu, v) toward the Steklov pair as alpha grows."""

    n: int
    p: float
    q: float
    lambda_p: float
    phi_sup: float  # max of phi_p, the scale for judging sup_err
    points: list[LimitPoint]
    rho_err_decreasing: bool
    sup_err_decreasing: bool


_DEFAULT_ALPHAS = (25.0, 50.0, 100.0, 200.0, 400.0)


def limit_comparison(n: int, p: float, q: float, alphas=_DEFAULT_ALPHAS, *,
                     refinement: int = 8, tol: float = 1e-10,
                     probe_points: int = 501) -> LimitReport:
    """Compare ground states against the Steklov limit along increasing alpha.

    For each alpha the ratio rho and the sup distance between v and phi_p
    are recorded; the trend flags report whether both errors decrease over
    the last (up to) three entries.
    """
    alphas = [float(a) for a in alphas]
    if len(alphas) < 2 or any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("needs at least two strictly increasing alphas")
    stek = solve_steklov(n, p, refinement=refinement, tol=tol)
    rs = np.linspace(0.0, 1.0, probe_points)
    phi_vals = stek.phi(rs)
    meas, lam = stek.surface_measure, stek.lambda_p

    points = []
    for alpha in alphas:
        sol = solve_henon(n, p, q, alpha, refinement=refinement, tol=tol)
        rho = sol.mu / ((alpha + n) ** (p / q) * meas ** (1.0 - p / q) * lam)
        sup_err = float(np.max(np.abs(sol.v(rs) - phi_vals)))
        points.append(LimitPoint(alpha=alpha, mu=sol.mu, rho=float(rho),
                                 sup_err=sup_err))

    rho_errs = [abs(pt.rho - 1.0) for pt in points[-3:]]
    sup_errs = [pt.sup_err for pt in points[-3:]]
    return LimitReport(
        n=n, p=p, q=q, lambda_p=lam, phi_sup=float(np.max(phi_vals)),
        points=points,
        rho_err_decreasing=all(b < a for a, b in zip(rho_errs, rho_errs[1:])),
        sup_err_decreasing=all(b < a for a, b in zip(sup_errs, sup_errs[1:])))
