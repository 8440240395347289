"""Graded radial grids on [0, 1], per-cell Gauss quadrature, and P1 form assembly.

The grids serve three weighted measures at once: r^(n-1) (volume), r^(n-3)
(angular term of the reduced forms), and r^(alpha+n-1) (boundary-concentrated
weight). Quadrature weights are plain dr weights; any r-power enters through
the sampled integrand, so one grid serves all three measures.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "RadialGrid",
    "build_grid",
    "RadialFunction",
    "TridiagForm",
    "assemble_forms",
]

MAX_REFINEMENT = 12


def _smoothstep_nodes(lo: float, hi: float, cells: int) -> np.ndarray:
    # 3x^2 - 2x^3 clusters quadratically at both ends of [lo, hi].
    xi = np.linspace(0.0, 1.0, cells + 1)
    return lo + (hi - lo) * xi * xi * (3.0 - 2.0 * xi)


def _boundary_layer_nodes(lo: float, cells: int) -> np.ndarray:
    # Quadratic clustering toward r = 1, resolving (1-r)^(1/(p-1)) profiles.
    eta = np.linspace(0.0, 1.0, cells + 1)
    return 1.0 - (1.0 - lo) * (1.0 - eta) ** 2


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Nodes on [0, 1] plus a fixed Gauss rule on every cell.

    Attributes
    ----------
    n : int
        Ambient dimension; fixes the default quadrature degree so that
        r^(n-1) integrates exactly.
    nodes : ndarray
        Strictly increasing, nodes[0] == 0.0 and nodes[-1] == 1.0.
    quad_x, quad_w : ndarray
        Flattened per-cell Gauss abscissae and plain-measure weights.
    quad_cell : ndarray
        Cell index of each abscissa.
    """

    n: int
    nodes: np.ndarray
    quad_x: np.ndarray
    quad_w: np.ndarray
    quad_cell: np.ndarray
    quad_points: int

    @property
    def num_nodes(self) -> int:
        return self.nodes.size

    @property
    def num_cells(self) -> int:
        return self.nodes.size - 1

    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    def integrate(self, values) -> float:
        """Integrate over [0, 1]; `values` is a callable or samples at quad_x."""
        if callable(values):
            values = values(self.quad_x)
        return float(np.dot(self.quad_w, values))

    def cell_slopes(self, node_values: np.ndarray) -> np.ndarray:
        return np.diff(node_values) / self.widths()

    def interior_derivatives(self, node_values: np.ndarray) -> np.ndarray:
        """Centered difference derivatives at nodes[1:-1]."""
        x = self.nodes
        return (node_values[2:] - node_values[:-2]) / (x[2:] - x[:-2])


def _gauss_cells(nodes: np.ndarray, npts: int):
    gx, gw = np.polynomial.legendre.leggauss(npts)
    a = nodes[:-1]
    h = np.diff(nodes)
    x = (a[:, None] + 0.5 * h[:, None] * (gx[None, :] + 1.0)).ravel()
    w = (0.5 * h[:, None] * gw[None, :]).ravel()
    cell = np.repeat(np.arange(a.size), npts)
    return x, w, cell


def build_grid(n: int, refinement: int = 8, alpha_hint: float = 0.0,
               quad_points: int | None = None) -> RadialGrid:
    """Build a graded grid with 2^refinement base cells.

    Parameters
    ----------
    n : int
        Dimension, n >= 3.
    refinement : int
        Doubling level in [1, 12]; node count grows ~2x per level.
    alpha_hint : float
        If positive, the boundary layer [1 - 10/alpha, 1] receives at least
        50 nodes with quadratic clustering toward r = 1.
    quad_points : int, optional
        Gauss points per cell; default makes r^(n-1) exact.
    """
    if not isinstance(n, (int, np.integer)) or n < 3:
        raise ValueError(f"dimension n must be an integer >= 3, got {n!r}")
    if not 1 <= refinement <= MAX_REFINEMENT:
        raise ValueError(f"refinement must lie in [1, {MAX_REFINEMENT}], got {refinement}")
    if alpha_hint < 0:
        raise ValueError(f"alpha_hint must be >= 0, got {alpha_hint}")
    m = quad_points if quad_points is not None else max(3, -(-n // 2))
    if m < 1:
        raise ValueError("quad_points must be >= 1")

    base_cells = 2 ** refinement
    if alpha_hint > 0.0:
        width = min(10.0 / alpha_hint, 1.0)
        if width >= 1.0:
            nodes = _smoothstep_nodes(0.0, 1.0, max(base_cells, 64))
        else:
            layer_cells = max(56, base_cells // 4)
            interface = 1.0 - width
            base = _smoothstep_nodes(0.0, interface, base_cells)
            layer = _boundary_layer_nodes(interface, layer_cells)
            nodes = np.concatenate([base, layer[1:]])
    else:
        nodes = _smoothstep_nodes(0.0, 1.0, base_cells)

    nodes[0], nodes[-1] = 0.0, 1.0
    if np.any(np.diff(nodes) <= 0.0):
        raise ValueError("grid construction produced non-increasing nodes")
    x, w, cell = _gauss_cells(nodes, m)
    return RadialGrid(n=int(n), nodes=nodes, quad_x=x, quad_w=w,
                      quad_cell=cell, quad_points=m)


def _hermite_pieces(nodes, values, derivs, r):
    r = np.asarray(r, dtype=float)
    idx = np.clip(np.searchsorted(nodes, r, side="right") - 1, 0, nodes.size - 2)
    h = nodes[idx + 1] - nodes[idx]
    t = (r - nodes[idx]) / h
    return idx, h, t


def _hermite_value(nodes, values, derivs, r):
    idx, h, t = _hermite_pieces(nodes, values, derivs, r)
    t2, t3 = t * t, t * t * t
    return ((2 * t3 - 3 * t2 + 1) * values[idx]
            + (t3 - 2 * t2 + t) * h * derivs[idx]
            + (-2 * t3 + 3 * t2) * values[idx + 1]
            + (t3 - t2) * h * derivs[idx + 1])


def _hermite_derivative(nodes, values, derivs, r):
    idx, h, t = _hermite_pieces(nodes, values, derivs, r)
    t2 = t * t
    return ((6 * t2 - 6 * t) * values[idx] / h
            + (3 * t2 - 4 * t + 1) * derivs[idx]
            + (-6 * t2 + 6 * t) * values[idx + 1] / h
            + (3 * t2 - 2 * t) * derivs[idx + 1])


@dataclass
class RadialFunction:
    """A radial profile: values and derivative values on the grid nodes.

    Solvers that know the profile between nodes (dense ODE output) attach
    evaluator closures; otherwise evaluation falls back to piecewise cubic
    Hermite interpolation of the stored nodal data.
    """

    grid: RadialGrid
    values: np.ndarray
    derivatives: np.ndarray
    _value_fn: Callable | None = field(default=None, repr=False, compare=False)
    _deriv_fn: Callable | None = field(default=None, repr=False, compare=False)

    def __call__(self, r):
        if self._value_fn is not None:
            return self._value_fn(r)
        return _hermite_value(self.grid.nodes, self.values, self.derivatives, r)

    def derivative(self, r):
        if self._deriv_fn is not None:
            return self._deriv_fn(r)
        return _hermite_derivative(self.grid.nodes, self.values, self.derivatives, r)

    @property
    def boundary_value(self) -> float:
        return float(self.values[-1])

    @property
    def origin_value(self) -> float:
        return float(self.values[0])


@dataclass
class TridiagForm:
    """Symmetric tridiagonal quadratic form from P1 assembly."""

    diag: np.ndarray
    off: np.ndarray

    @property
    def size(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        a = np.diag(self.diag)
        idx = np.arange(self.off.size)
        a[idx, idx + 1] = self.off
        a[idx + 1, idx] = self.off
        return a

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[:-1] += self.off * x[1:]
        y[1:] += self.off * x[:-1]
        return y

    def quad_form(self, x: np.ndarray) -> float:
        return float(np.dot(x, self.matvec(x)))

    def banded_upper(self) -> np.ndarray:
        ab = np.zeros((2, self.size))
        ab[0, 1:] = self.off
        ab[1, :] = self.diag
        return ab


def _first_cell_rule(grid: RadialGrid, exponent: float):
    # Substitution t = r^exponent on the cell touching r = 0 keeps fractional
    # powers r^(1/(exponent)) of the weight smooth for the Gauss rule.
    r1 = grid.nodes[1]
    gx, gw = np.polynomial.legendre.leggauss(grid.quad_points)
    t_hi = r1 ** exponent
    t = 0.5 * t_hi * (gx + 1.0)
    w = 0.5 * t_hi * gw
    inv = 1.0 / exponent
    r = t ** inv
    return r, w * inv * t ** (inv - 1.0)


def assemble_forms(grid: RadialGrid, stiffness_weight, mass_weight,
                   first_cell_exponent: float | None = None) -> TridiagForm:
    """Assemble the P1 tridiagonal form of a(r) h'^2 + c(r) h^2 on [0, 1].

    `stiffness_weight` and `mass_weight` are callables evaluated at the
    quadrature abscissae; they must already include the r-power measure.
    `first_cell_exponent` switches the cell at r = 0 to a substituted rule
    (t = r^exponent) so degenerate gradient weights keep full order.
    """
    xs = grid.quad_x
    ws = grid.quad_w
    cells = grid.quad_cell
    if first_cell_exponent is not None:
        r0, w0 = _first_cell_rule(grid, first_cell_exponent)
        mask = cells == 0
        xs = xs.copy()
        ws = ws.copy()
        xs[mask] = r0
        ws[mask] = w0

    left = grid.nodes[cells]
    h = grid.widths()[cells]
    phi_r = (xs - left) / h
    phi_l = 1.0 - phi_r

    a = np.asarray(stiffness_weight(xs), dtype=float) * ws
    c = np.asarray(mass_weight(xs), dtype=float) * ws

    diag = np.zeros(grid.num_nodes)
    off = np.zeros(grid.num_nodes - 1)
    k = a / (h * h)
    np.add.at(diag, cells, k + c * phi_l * phi_l)
    np.add.at(diag, cells + 1, k + c * phi_r * phi_r)
    np.add.at(off, cells, -k + c * phi_l * phi_r)
    return TridiagForm(diag=diag, off=off)
