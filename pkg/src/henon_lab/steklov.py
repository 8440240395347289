"""Nonlinear Steklov eigenproblem on the unit ball and its limiting form.

The first eigenvalue lambda_p and its radial eigenfunction phi_p solve

    -(r^(n-1) (phi')^(p-1))' + r^(n-1) phi^(p-1) = 0,   phi > 0, phi' > 0,

with the boundary relation (phi'(1))^(p-1) = lambda_p phi(1)^(p-1).  Because
the equation is homogeneous, a single outward integration from an arbitrary
origin value yields the eigenvalue as flux(1) / u(1)^(p-1); no shooting loop
is needed.  The eigenfunction is then rescaled to unit W^1_p norm, which
pins the boundary value at (lambda_p * |S|)^(-1/p).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solveh_banded

from .errors import ConvergenceError
from .flux_ode import integrate_flux_ode, profile_evaluators, series_seed
from .mesh import RadialFunction, RadialGrid, TridiagForm, assemble_forms, build_grid
from .special import bessel_i, bessel_i_prime, surface_measure

__all__ = ["SteklovSolution", "steklov_eigenvalue", "solve_steklov",
           "bessel_lambda2", "limit_form_matrix", "limit_form_min_closed",
           "limit_form_min_numeric"]


def _validate(n: int, p: float) -> None:
    if not (isinstance(n, (int, np.integer)) and n >= 3):
        raise ValueError(f"dimension must be an integer >= 3, got {n!r}")
    if not p >= 2.0:
        raise ValueError(f"p must satisfy p >= 2, got {p}")


def _shoot(n: int, p: float, tol: float, seed_radius: float, dense: bool = True):
    # Homogeneity: the origin value is arbitrary, 1.0 keeps magnitudes tame.
    seed = series_seed(p, n, 1.0, seed_radius)
    nm1 = n - 1

    def rhs(r, u):
        return r ** nm1 * u ** (p - 1.0)

    return integrate_flux_ode(rhs, seed, 1.0, p=p, n=n, tol=tol, dense=dense)


def steklov_eigenvalue(n: int, p: float, *, tol: float = 1e-10,
                       seed_radius: float = 1e-4) -> float:
    """First Steklov eigenvalue lambda_p, by a single outward integration.

    The value is a boundary quotient of the integrated profile and does not
    involve any spatial grid, so it is cheap enough for parameter scans.
    """
    _validate(n, p)
    end = _shoot(n, p, tol, seed_radius, dense=False).end
    lam = end.flux / end.value ** (p - 1.0)
    if not 0.0 < lam < 1.0 / n:
        raise ConvergenceError(
            f"eigenvalue quotient {lam:.6g} escaped (0, 1/n); "
            f"integration tolerance {tol:g} is likely too loose")
    return float(lam)


@dataclass
class SteklovSolution:
    """Eigenpair (lambda_p, phi_p) with phi_p normalized in W^1_p."""

    n: int
    p: float
    lambda_p: float
    phi: RadialFunction
    phi0: float  # phi_p(0)
    phi1: float  # phi_p(1), equals (lambda_p |S|)^(-1/p)
    surface_measure: float
    grid: RadialGrid
    diagnostics: dict = field(default_factory=dict)


def solve_steklov(n: int, p: float, *, grid: RadialGrid | None = None,
                  refinement: int = 8, tol: float = 1e-10,
                  seed_radius: float = 1e-4) -> SteklovSolution:
    """Solve for the eigenpair and normalize the eigenfunction.

    The returned phi carries dense evaluators valid on all of [0, 1]; the
    grid only fixes where nodal values are tabulated and how norms are
    integrated.
    """
    _validate(n, p)
    if grid is None:
        grid = build_grid(n, refinement=refinement)
    elif grid.n != n:
        raise ValueError(f"grid was built for n={grid.n}, requested n={n}")

    traj = _shoot(n, p, tol, seed_radius)
    end = traj.end
    lam = end.flux / end.value ** (p - 1.0)
    if not 0.0 < lam < 1.0 / n:
        raise ConvergenceError(
            f"eigenvalue quotient {lam:.6g} escaped (0, 1/n); "
            f"integration tolerance {tol:g} is likely too loose")

    value_fn, grad_fn = profile_evaluators(traj, 1.0, 1.0 / n)
    meas = surface_measure(n)
    rq = grid.quad_x
    uq = value_fn(rq)
    duq = grad_fn(rq)
    norm_p = meas * grid.integrate((np.abs(duq) ** p + np.abs(uq) ** p)
                                   * rq ** (n - 1))
    scale = norm_p ** (-1.0 / p)

    phi = RadialFunction(grid, scale * value_fn(grid.nodes),
                         scale * grad_fn(grid.nodes),
                         _value_fn=lambda r: scale * value_fn(r),
                         _deriv_fn=lambda r: scale * grad_fn(r))
    phi1_exact = (lam * meas) ** (-1.0 / p)
    diagnostics = {
        "ode_steps": int(traj.rs.size),
        "ode_tol": tol,
        "seed_radius": seed_radius,
        "w1p_norm_raw": float(norm_p ** (1.0 / p)),
        # |phi(1) - (lambda |S|)^(-1/p)| / phi(1): quadrature + ODE error.
        "boundary_identity_rel_err": float(abs(phi.boundary_value - phi1_exact)
                                           / phi1_exact),
    }
    return SteklovSolution(n=n, p=p, lambda_p=float(lam), phi=phi,
                           phi0=float(phi.origin_value),
                           phi1=float(phi.boundary_value),
                           surface_measure=meas, grid=grid,
                           diagnostics=diagnostics)


def bessel_lambda2(n: int) -> float:
    """Closed form for p = 2: lambda_2 = 1 - n/2 + I'_(n/2-1)(1) / I_(n/2-1)(1).

    The p = 2 eigenfunction is r^(1-n/2) I_(n/2-1)(r); differentiating and
    evaluating the boundary quotient gives this expression.
    """
    if not (isinstance(n, (int, np.integer)) and n >= 3):
        raise ValueError(f"dimension must be an integer >= 3, got {n!r}")
    nu = n / 2.0 - 1.0
    return 1.0 - n / 2.0 + bessel_i_prime(nu, 1.0) / bessel_i(nu, 1.0)


def limit_form_min_closed(n: int, p: float,
                          lambda_p: float | None = None) -> float:
    """Minimum of the limiting quadratic form over {w : w(1) = 1}, closed form.

    The minimizer is proportional to phi_p' and the minimum value is
    lambda_p^(2/p - 1/(p-1) - 1) |S|^(2/p - 1) (1 - (n-1) lambda_p).
    """
    _validate(n, p)
    if lambda_p is None:
        lambda_p = steklov_eigenvalue(n, p)
    meas = surface_measure(n)
    return (lambda_p ** (2.0 / p - 1.0 / (p - 1.0) - 1.0)
            * meas ** (2.0 / p - 1.0) * (1.0 - (n - 1.0) * lambda_p))


def limit_form_matrix(sol: SteklovSolution,
                      grid: RadialGrid | None = None) -> TridiagForm:
    """P1 matrix of the limiting quadratic form

        Q[w] = int_0^1 [ (p-1)(phi') ^(p-2) w'^2 r^(n-1)
                         + (n-1)(phi')^(p-2) w^2 r^(n-3)
                         + (p-1) phi^(p-2) w^2 r^(n-1) ] dr.

    For p > 2 the weight (phi')^(p-2) degenerates like r^(p-2)/(p-1) at the
    origin; the first cell is integrated in the substituted variable
    t = r^(p/(p-1)) where the integrand is smooth.
    """
    if grid is None:
        grid = sol.grid
    p, n = sol.p, sol.n
    phi, dphi = sol.phi, sol.phi.derivative

    def stiffness(r):
        return (p - 1.0) * np.abs(dphi(r)) ** (p - 2.0) * r ** (n - 1)

    def mass(r):
        return ((n - 1.0) * np.abs(dphi(r)) ** (p - 2.0) * r ** (n - 3)
                + (p - 1.0) * np.abs(phi(r)) ** (p - 2.0) * r ** (n - 1))

    first_cell = p / (p - 1.0) if p > 2.0 else None
    return assemble_forms(grid, stiffness, mass, first_cell_exponent=first_cell)


def limit_form_min_numeric(sol: SteklovSolution,
                           grid: RadialGrid | None = None
                           ) -> tuple[float, RadialFunction]:
    """Minimize the limiting form over P1 functions with w(1) = 1.

    The constrained minimum solves the interior tridiagonal system with the
    boundary column moved to the right-hand side; the matrix is symmetric
    positive definite, so a banded Cholesky solve suffices.
    """
    if grid is None:
        grid = sol.grid
    form = limit_form_matrix(sol, grid)
    diag, off = form.diag, form.off
    m = form.size - 1  # interior unknowns, node m is pinned at 1
    ab = np.zeros((2, m))
    ab[1] = diag[:m]
    ab[0, 1:] = off[:m - 1]
    rhs = np.zeros(m)
    rhs[-1] = -off[m - 1]
    w = np.empty(form.size)
    w[:m] = solveh_banded(ab, rhs)
    w[m] = 1.0
    value = float(form.quad_form(w))
    derivs = np.empty_like(w)
    derivs[1:-1] = grid.interior_derivatives(w)
    slopes = grid.cell_slopes(w)
    derivs[0] = slopes[0]
    derivs[-1] = slopes[-1]
    return value, RadialFunction(grid, w, derivs)
