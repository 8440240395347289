"""Shared fixtures: session-scoped solver caches and the acceptance report.

Solves are pure functions of their parameters, so one cache per session is
safe; the acceptance file is collected first and therefore pays the cold
cost inside its own runtime budgets, while the module tests reuse the
results.  Every `criterion` block contributes one line to the summary
printed at the end of the run.
"""
from __future__ import annotations

import time
from contextlib import contextmanager

import pytest

from henon_lab import solve_henon, solve_steklov

_RESULTS: list[tuple[int, str, bool, float, str]] = []


@pytest.fixture(scope="session")
def steklov():
    cache = {}

    def get(n, p):
        key = (n, float(p))
        if key not in cache:
            cache[key] = solve_steklov(n, p)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def ground_state():
    cache = {}

    def get(n, p, q, alpha, **kwargs):
        key = (n, float(p), float(q), float(alpha),
               tuple(sorted(kwargs.items())))
        if key not in cache:
            cache[key] = solve_henon(n, p, q, alpha, **kwargs)
        return cache[key]

    return get


@pytest.fixture
def criterion():
    """Record one acceptance line; assertion failures still propagate."""

    @contextmanager
    def run(num: int, label: str, budget_s: float | None = None):
        t0 = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            detail = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
            _RESULTS.append((num, label, False, time.perf_counter() - t0, detail))
            raise
        elapsed = time.perf_counter() - t0
        on_time = budget_s is None or elapsed <= budget_s
        _RESULTS.append((num, label, on_time, elapsed,
                         "" if on_time else f"over the {budget_s:g}s budget"))
        assert on_time, f"criterion {num} took {elapsed:.2f}s, budget {budget_s:g}s"

    return run


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, label, ok, dt, detail in sorted(_RESULTS, key=lambda r: r[0]):
        line = f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {label}  [{dt:.2f}s]"
        if detail:
            line += f"  ({detail[:140]})"
        terminalreporter.write_line(line)
