"""Second-variation pencil: assembly identities, eigensolver, diagnostics."""
import numpy as np
import pytest
from scipy.linalg import eigh

from henon_lab.errors import ConvergenceError
from henon_lab.mesh import build_grid
from henon_lab.second_variation import (eigenprofile_properties,
                                        eigenprofile_steepness,
                                        min_second_variation, pencil_forms,
                                        pencil_min_eig, positivity_scan,
                                        potential_profile,
                                        potential_sign_change,
                                        schrodinger_potential,
                                        second_variation_forms)
from henon_lab.steklov import limit_form_matrix


def _const_forms(grid, **overrides):
    kwargs = dict(p=2.0, n=grid.n, q=3.0, alpha=0.0, mu=0.0,
                  value_fn=lambda r: np.ones_like(np.asarray(r, dtype=float)),
                  deriv_fn=lambda r: np.ones_like(np.asarray(r, dtype=float)))
    kwargs.update(overrides)
    return pencil_forms(grid, **kwargs)


def test_constraint_form_moment():
    # For ell = 1 at n = 4 the full-ones quadratic of B integrates
    # 3r + r^3 over (0, 1), which is 7/4 exactly.
    grid = build_grid(4, refinement=6)
    _, b_form = _const_forms(grid)
    assert abs(b_form.quad_form(np.ones(b_form.size)) - 1.75) <= 1e-12
    assert b_form.size == grid.nodes.size


def test_angular_index_validation():
    grid = build_grid(4, refinement=4)
    with pytest.raises(ValueError, match="angular index"):
        _const_forms(grid, ell=0)


def test_zero_mu_matches_limit_form(steklov):
    # Dropping the focusing term must reproduce the limiting-form matrix of
    # the Steklov eigenfunction, entry for entry.
    sol = steklov(4, 2.5)
    lf = limit_form_matrix(sol)
    a_form, _ = pencil_forms(sol.grid, p=sol.p, n=sol.n, q=3.7, alpha=123.0,
                             mu=0.0, value_fn=sol.phi,
                             deriv_fn=sol.phi.derivative)
    scale = np.max(np.abs(lf.diag))
    assert np.max(np.abs(a_form.diag - lf.diag)) <= 1e-12 * scale
    assert np.max(np.abs(a_form.off - lf.off)) <= 1e-12 * scale


def test_limit_pencil_is_positive(steklov):
    sol = steklov(4, 2.0)
    a_form, b_form = pencil_forms(sol.grid, p=2.0, n=4, q=3.0, alpha=0.0,
                                  mu=0.0, value_fn=sol.phi,
                                  deriv_fn=sol.phi.derivative)
    sigma, h, _ = pencil_min_eig(a_form, b_form)
    assert sigma > 0.0
    assert abs(b_form.quad_form(h) - 1.0) <= 1e-10
    assert h[-1] >= 0.0


def test_eigensolver_start_invariance(ground_state):
    sol = ground_state(4, 2.0, 3.0, 50.0)
    a_form, b_form = second_variation_forms(sol)
    s1, h1, _ = pencil_min_eig(a_form, b_form)
    s2, h2, _ = pencil_min_eig(a_form, b_form,
                               start=1e6 * np.ones(a_form.size))
    assert abs(s1 - s2) <= 1e-10 * max(1.0, abs(s1))
    assert np.max(np.abs(h1 - h2)) <= 1e-6 * np.max(np.abs(h1))


def test_coarse_pencil_matches_dense(ground_state):
    sol = ground_state(4, 2.0, 3.0, 50.0)
    grid = build_grid(4, refinement=4)
    a_form, b_form = second_variation_forms(sol, grid=grid)
    sigma, _, _ = pencil_min_eig(a_form, b_form)
    dense = eigh(a_form.to_dense(), b_form.to_dense(), eigvals_only=True)
    assert abs(sigma - dense[0]) <= 1e-12 * max(1.0, abs(dense[0]))


def test_min_second_variation_packaging(ground_state):
    result = min_second_variation(ground_state(4, 2.0, 3.0, 400.0))
    assert result.sigma > 0.0
    assert result.lambda_reg == 0.0
    assert result.ell == 1 and result.angular == 3.0
    assert result.diagnostics["method"] == "sturm+inverse"
    assert result.h.boundary_value > 0.0
    assert eigenprofile_steepness(result) > 0.0


def test_eigenprofile_shapes(ground_state):
    # Stable point, p = 2: monotone profile with a flat origin exponent.
    rep = eigenprofile_properties(
        min_second_variation(ground_state(4, 2.0, 3.0, 400.0)))
    assert rep.monotone
    assert rep.expected_origin_slope == 0.0
    assert abs(rep.origin_slope) <= 0.05
    assert 1.0 < rep.steepness < 2.0

    # Stable point, p > 2: the eigenprofile concentrates at the origin, the
    # interior monotonicity and the fit window both give way.  Data, not
    # an error.
    rep = eigenprofile_properties(
        min_second_variation(ground_state(4, 2.5, 3.0, 400.0)))
    assert not rep.monotone
    assert rep.origin_slope is None

    # Unstable point (large q): lambda_reg > 0.  The angular part of the
    # constraint metric forces h ~ r near the origin, so the measured
    # exponent of h' sits near 0 rather than at the reference value.
    result = min_second_variation(ground_state(3, 2.5, 14.0, 400.0))
    assert result.sigma < 0.0
    assert result.lambda_reg == -result.sigma
    rep = eigenprofile_properties(result)
    assert rep.monotone
    assert rep.expected_origin_slope == -1.0 / 1.5
    assert abs(rep.origin_slope) <= 0.15


def test_potential_crossing_in_layer(ground_state):
    sol = ground_state(4, 2.5, 3.0, 400.0)
    r0 = potential_sign_change(sol)
    alpha = sol.alpha
    assert r0 > 1.0 - 1.5 * np.log(alpha) / alpha
    assert r0 < 1.0
    potential = schrodinger_potential(sol)
    assert abs(potential(r0)) <= 1e-6
    assert potential(1.0) < 0.0
    # Adding the focusing term back leaves the manifestly positive part.
    rs = np.linspace(0.05, 1.0, 50)
    muf = sol.mu ** (sol.q / sol.p)
    focusing = (sol.q - 1.0) * muf * rs ** sol.alpha * sol.v(rs) ** (sol.q - 2.0)
    assert np.all(potential(rs) + focusing > 0.0)


def test_potential_profile_api(ground_state):
    sol = ground_state(4, 2.0, 3.0, 400.0)
    profile = potential_profile(sol)
    assert profile.values.size == sol.grid.nodes.size - 1
    assert len(profile.sign_changes) == 1
    with pytest.raises(ValueError, match="nonnegative"):
        potential_profile(sol, lam=-1.0)


def test_no_crossing_reported():
    # The constant profile at alpha = 0 keeps the potential positive on all
    # of (0, 1]; the unique-crossing accessor must refuse.
    from henon_lab.henon import solve_henon
    sol = solve_henon(4, 2.0, 2.2, 0.0)
    with pytest.raises(ConvergenceError, match="sign change"):
        potential_sign_change(sol)


def test_positivity_scan_isolates_failures():
    scan = positivity_scan(4, 2.0, (3.0, 1.5), (200.0, 400.0), refinement=6)
    assert len(scan.cells) == 4
    good = [c for c in scan.cells if c.q == 3.0]
    bad = [c for c in scan.cells if c.q == 1.5]
    assert all(c.sigma is not None and c.sigma > 0.0 for c in good)
    assert all(c.sigma is None and "q > p" in c.error for c in bad)
    assert scan.positive_at_largest_alpha(3.0) is True
    assert scan.positive_at_largest_alpha(1.5) is None
    with pytest.raises(KeyError):
        scan.positive_at_largest_alpha(2.7)
    with pytest.raises(ValueError, match="at least one"):
        positivity_scan(4, 2.0, (), (100.0,))
