"""Quadrature on [-pi/2, pi/2] and the PT inner product."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ResolutionError
from .scarf import HALF_PI, ModelParams, eigenfunctions

__all__ = [
    "Grading",
    "QuadratureRule",
    "build_rule",
    "graded_rule",
    "check_resolution",
    "pt_inner_product",
    "gram_matrix",
    "bilinear_gram",
    "bilinear_overlaps",
]


@dataclass(frozen=True)
class Grading:
    """Geometric grading toward an interior point (and optionally the ends)."""

    point: float
    ratio: float
    min_width: float


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    panels: int
    order_per_panel: int
    grading: Optional[Grading] = None
    breaks: np.ndarray = field(default=None, repr=False)

    def integrate(self, values, axis=-1):
        return np.tensordot(values, self.weights, axes=([axis], [0]))


def _composite(breaks, order):
    t, w = np.polynomial.legendre.leggauss(order)
    lo, hi = breaks[:-1], breaks[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def build_rule(panels: int = 8, order: int = 32) -> QuadratureRule:
    """Composite Gauss-Legendre rule with equal panels on [-pi/2, pi/2]."""
    if panels < 1 or order < 2:
        raise ValueError("need panels >= 1 and order >= 2")
    breaks = np.linspace(-HALF_PI, HALF_PI, panels + 1)
    nodes, weights = _composite(breaks, order)
    return QuadratureRule(nodes, weights, panels, order, None, breaks)


def _geometric_breaks(a, b, ratio, min_width, toward_a):
    """Breakpoints on [a, b] shrinking geometrically toward one end."""
    length = b - a
    if length <= 0:
        return np.array([a, b])
    widths = []
    w = length
    while w * ratio > min_width:
        w *= ratio
        widths.append(w)
    # Panels from the singular end outward: min, ..., ratio*L, then the rest.
    offsets = [0.0] + sorted(widths) + [length]
    offsets = np.array(offsets)
    return a + offsets if toward_a else b - offsets[::-1]


def graded_rule(point: float, *, ratio: float = 0.25, min_width: float = 1e-10,
                order: int = 16, base_panels: int = 8, grade_ends: bool = True) -> QuadratureRule:
    """Composite rule graded geometrically toward ``point`` from both sides.

    ``base_panels`` equal panels are laid down first; the panels adjacent to
    ``point`` (and to the interval ends when ``grade_ends``) are then
    subdivided geometrically down to ``min_width``.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError("grading ratio must lie in (0, 1)")
    if not -HALF_PI < point < HALF_PI:
        raise ValueError("grading point must be interior")
    pieces = []
    for a, b in ((-HALF_PI, point), (point, HALF_PI)):
        n = max(1, int(round(base_panels * (b - a) / math.pi)))
        edges = np.linspace(a, b, n + 1)
        for i in range(n):
            lo, hi = edges[i], edges[i + 1]
            near_point = hi == point or lo == point
            near_end = grade_ends and (lo == -HALF_PI or hi == HALF_PI)
            if near_point:
                seg = _geometric_breaks(lo, hi, ratio, min_width, toward_a=(lo == point))
            elif near_end:
                seg = _geometric_breaks(lo, hi, ratio, min_width, toward_a=(lo == -HALF_PI))
            else:
                seg = np.array([lo, hi])
            pieces.append(seg[:-1])
    breaks = np.concatenate(pieces + [np.array([HALF_PI])])
    nodes, weights = _composite(breaks, order)
    return QuadratureRule(nodes, weights, breaks.size - 1, order,
                          Grading(point, ratio, min_width), breaks)


def check_resolution(rule: QuadratureRule, max_index: int) -> None:
    need = 4 * max_index + 32
    have = rule.order_per_panel * rule.panels
    if have < need:
        raise ResolutionError(
            f"rule has {have} nodes but degree {max_index} needs at least {need}"
        )


def pt_inner_product(m: int, n: int, p: ModelParams, rule: QuadratureRule) -> complex:
    """Integral of (PT psi_m)(x) psi_n(x) = conj(psi_m(-x)) psi_n(x)."""
    check_resolution(rule, max(m, n))
    top = max(m, n) + 1
    direct = eigenfunctions(top, p, rule.nodes)
    reflected = eigenfunctions(top, p, -rule.nodes)
    return complex(rule.integrate(np.conj(reflected[m]) * direct[n]))


def gram_matrix(N: int, p: ModelParams, rule: QuadratureRule) -> np.ndarray:
    """G[m, n] = <PT psi_m, psi_n>, expected diag(1, -1, 1, ...)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    check_resolution(rule, N - 1)
    direct = eigenfunctions(N, p, rule.nodes)
    reflected = np.conj(eigenfunctions(N, p, -rule.nodes))
    return (reflected * rule.weights) @ direct.T


def bilinear_gram(N: int, p: ModelParams, rule: QuadratureRule) -> np.ndarray:
    """B[m, n] = integral psi_m psi_n, with no reflection or conjugation."""
    if N < 1:
        raise ValueError("N must be >= 1")
    check_resolution(rule, N - 1)
    psi = eigenfunctions(N, p, rule.nodes)
    return (psi * rule.weights) @ psi.T


def bilinear_overlaps(values, N: int, p: ModelParams, rule: QuadratureRule, *, chunk: int = 128):
    """Coefficients integral psi_n(y) f(y) dy for n < N, f sampled on the rule nodes.

    Streams over n in chunks so large mode counts do not hold the full table.
    """
    check_resolution(rule, N - 1)
    values = np.asarray(values)
    out = np.empty(N, dtype=complex)
    for lo in range(0, N, chunk):
        hi = min(N, lo + chunk)
        psi = eigenfunctions(hi, p, rule.nodes)[lo:hi]
        out[lo:hi] = psi @ (rule.weights * values)
    return out
