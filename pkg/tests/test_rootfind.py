"""Bracketing root solver: acceptance rules, errors, and scan helper."""
from __future__ import annotations

import numpy as np
import pytest

from henon_lab.errors import BracketError, ConvergenceError
from henon_lab.rootfind import brent_root, sign_change_pairs


def test_polynomial_root():
    root = brent_root(lambda x: x ** 3 - 2.0 * x - 5.0, 2.0, 3.0,
                      f_tol=1e-14, x_tol=1e-14)
    assert abs(root - 2.0945514815423265) < 1e-12
    assert isinstance(root, float)


def test_endpoint_root_short_circuits():
    calls = []

    def f(x):
        calls.append(x)
        return x - 2.0

    assert brent_root(f, 2.0, 5.0, f_tol=1e-12, x_tol=1e-12) == 2.0


def test_reuses_supplied_endpoint_values():
    evals = []

    def f(x):
        evals.append(x)
        return x * x - 2.0

    root = brent_root(f, 1.0, 2.0, f_tol=1e-14, x_tol=1e-14,
                      fa=-1.0, fb=2.0)
    assert 1.0 not in evals and 2.0 not in evals
    assert abs(root - np.sqrt(2.0)) < 1e-13


def test_same_sign_bracket_rejected():
    with pytest.raises(BracketError):
        brent_root(lambda x: x * x + 1.0, -1.0, 1.0, f_tol=1e-12, x_tol=1e-12)


def test_f_tol_accepts_noise_floor():
    # Simulated measurement noise: |f| never drops below ~1e-7, as with a
    # shooting residual at finite integration tolerance.
    def f(x):
        return (x - 0.3) + 1e-7 * np.sin(1e4 * x)

    root = brent_root(f, 0.0, 1.0, f_tol=1e-6, x_tol=1e-15)
    assert abs(f(root)) <= 1e-6


def test_bracket_collapse_returns_best_endpoint():
    # A jump discontinuity never satisfies any f tolerance; the solver must
    # shrink the bracket to x_tol and hand back the better endpoint.
    jump = 0.37219

    def f(x):
        return -1.0 if x < jump else 1.0

    root = brent_root(f, 0.0, 1.0, f_tol=1e-30, x_tol=1e-10)
    assert abs(root - jump) < 1e-9


def test_iteration_cap_raises():
    with pytest.raises(ConvergenceError, match="iteration exhausted"):
        brent_root(lambda x: np.tanh(50.0 * (x - 0.6180339)), 0.0, 1.0,
                   f_tol=1e-30, x_tol=1e-30, max_iter=3)


def test_sign_change_pairs():
    vals = [3.0, 1.0, -1.0, -2.0, 0.5, 0.2, -0.1]
    assert sign_change_pairs(vals) == [1, 3, 5]
    assert sign_change_pairs([1.0, 2.0, 3.0]) == []
    # A zero sample counts as a crossing boundary exactly once.
    assert sign_change_pairs([1.0, 0.0, -1.0]) == [0]
