"""Completeness of the PT eigenfunctions.

With the alternating norm, sum_n (-1)^n psi_n(x) psi_n(y) = delta(x - y). Since
(-1)^n psi_n(x) psi_n(y) = |D_n|^2 W(x) W(y) P_n(u) P_n(v) and |D_n|^2 is the
reciprocal Jacobi norm h_n for parameters (alpha, conj(alpha)), the same sum is
the Jacobi delta series in u = sin x. Both routes are implemented here and
compared, and completeness is probed weakly through reconstruction of test
functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import OverflowGuardError
from .ptproduct import QuadratureRule, bilinear_overlaps, build_rule, check_resolution
from .scarf import HALF_PI, ModelParams, eigenfunction, eigenfunctions, one_minus_sin, one_plus_sin
from .specfun import DEFAULT_CONTROL, jacobi_all, log_gamma

__all__ = [
    "TestFunction",
    "ConvergenceReport",
    "default_grid",
    "test_corpus",
    "jacobi_delta_coefficients",
    "jacobi_delta_partial",
    "reconstruct",
    "reconstruct_via_jacobi",
    "delta_convergence_report",
]


@dataclass(frozen=True)
class TestFunction:
    """A probe function for the reconstruction suite."""

    __test__ = False  # not a pytest class

    identifier: str
    evaluator: Callable
    note: str = ""
    informational: bool = False

    def __call__(self, y):
        return np.asarray(self.evaluator(np.asarray(y, dtype=float)), dtype=complex)


def default_grid(points: int = 33, margin: float = 0.1) -> np.ndarray:
    """Uniform interior grid keeping ``margin`` away from both ends."""
    return np.linspace(-HALF_PI + margin, HALF_PI - margin, points)


def _endpoint_corrected(y):
    # cos y e^{sin y} minus the part of e^{sin y} that is linear in sin y at
    # both ends, so the bracket vanishes at sin y = +-1 as well.
    s = np.sin(y)
    return np.cos(y) * (np.exp(s) - math.cosh(1.0) - s * math.sinh(1.0))


def test_corpus(p: ModelParams):
    """The reconstruction probes; the last one does not vanish at the ends."""
    return [
        TestFunction("cos2_sin", lambda y: np.cos(y) ** 2 * np.sin(y), "odd, real, smooth"),
        TestFunction("cos4", lambda y: np.cos(y) ** 4, "even, real, smooth"),
        TestFunction("psi0_plus_i_psi3",
                     lambda y: eigenfunction(0, p, y) + 1j * eigenfunction(3, p, y),
                     "complex, finite expansion"),
        TestFunction("cos_exp_sin_corrected", _endpoint_corrected,
                     "slowly decaying coefficients, endpoint corrected"),
        TestFunction("one", lambda y: np.ones_like(y), "does not vanish at the ends",
                     informational=True),
    ]


@dataclass(frozen=True)
class ConvergenceReport:
    identifier: str
    rows: tuple  # (N, sup_error)
    monotone: bool
    stalled: bool
    informational: bool = False


def jacobi_delta_coefficients(N: int, p: ModelParams, *, variant: str = "norm",
                              overflow_guard: float = DEFAULT_CONTROL.overflow_guard):
    """Coefficients of the Jacobi delta series for a = alpha, b = conj(alpha).

    ``variant="norm"`` gives the reciprocal norms
    (2n + a + b + 1) n! Gamma(n + a + b + 1) / (2^(a+b+1) Gamma(n + a + 1) Gamma(n + b + 1)),
    which make sum_n c_n P_n(u) P_n(v) = delta(u - v) / ((1-u)^a (1+u)^b).
    ``variant="table"`` gives n! Gamma(a + b + 2n + 1) Gamma(a + b + n + 1) /
    (Gamma(a + n + 1) Gamma(b + n + 1)), the form that grows factorially; it
    is kept so the comparison can be reported. Coefficients are built in the
    log domain and the overflow guard is applied there.
    """
    a, b = p.alpha, p.beta
    ab = 2.0 * p.alpha_r
    log_guard = math.log(overflow_guard)
    out = np.empty(N, dtype=complex)
    for n in range(N):
        if variant == "norm":
            lg = (math.log(2 * n + ab + 1) + log_gamma(n + 1.0) + log_gamma(n + ab + 1.0)
                  - (ab + 1) * math.log(2.0) - log_gamma(n + a + 1.0) - log_gamma(n + b + 1.0))
        elif variant == "table":
            lg = (log_gamma(n + 1.0) + log_gamma(ab + 2 * n + 1.0) + log_gamma(ab + n + 1.0)
                  - log_gamma(n + a + 1.0) - log_gamma(n + b + 1.0))
        else:
            raise ValueError(f"unknown variant {variant!r}")
        if lg.real > log_guard:
            raise OverflowGuardError(f"delta-series coefficient {n} exceeds the overflow guard")
        out[n] = np.exp(lg)
    return out


def jacobi_delta_partial(N: int, p: ModelParams, u, v, *, variant: str = "norm"):
    """sum_{n<N} c_n P_n(u) P_n(v) with ``jacobi_delta_coefficients``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    coef = jacobi_delta_coefficients(N, p, variant=variant)
    pu = jacobi_all(N - 1, p.alpha, p.beta, u)
    pv = jacobi_all(N - 1, p.alpha, p.beta, v)
    val = np.tensordot(coef[:, None] * pu.reshape(N, -1), pv.reshape(N, -1), axes=([0], [0])) \
        if (u.ndim or v.ndim) else np.sum(coef * pu * pv)
    if u.ndim or v.ndim:
        return val.reshape(u.shape + v.shape)
    return complex(val)


def reconstruct(f: Callable, N: int, p: ModelParams, rule: Optional[QuadratureRule] = None,
                eval_grid=None, *, sign_alternation: bool = True):
    """f_N(x) = sum_{n<N} (-1)^n psi_n(x) integral psi_n(y) f(y) dy on eval_grid.

    ``sign_alternation=False`` drops the (-1)^n factor; it exists only as a
    mutation sentinel that must break the reconstruction.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    rule = build_rule(16, 64) if rule is None else rule
    grid = default_grid() if eval_grid is None else np.asarray(eval_grid, dtype=float)
    coeffs = bilinear_overlaps(f(rule.nodes), N, p, rule)
    if sign_alternation:
        coeffs = coeffs * (-1.0) ** np.arange(N)
    return coeffs @ eigenfunctions(N, p, grid)


def reconstruct_via_jacobi(f: Callable, N: int, p: ModelParams,
                           rule: Optional[QuadratureRule] = None, eval_grid=None):
    """Same reconstruction through the Jacobi delta series in u = sin x.

    f_N(x) = W(x) integral J_N(sin x, sin y) W(y) f(y) dy with
    W = (1 - sin)^(alpha/2 + 1/4) (1 + sin)^(conj(alpha)/2 + 1/4).
    """
    rule = build_rule(16, 64) if rule is None else rule
    check_resolution(rule, N - 1)
    grid = default_grid() if eval_grid is None else np.asarray(eval_grid, dtype=float)

    def weight(x):
        return np.exp((p.alpha / 2 + 0.25) * np.log(one_minus_sin(x))
                      + (p.beta / 2 + 0.25) * np.log(one_plus_sin(x)))

    kern = jacobi_delta_partial(N, p, np.sin(grid), np.sin(rule.nodes))
    integrand = kern * (rule.weights * weight(rule.nodes) * f(rule.nodes))[None, :]
    return weight(grid) * integrand.sum(axis=1)


def delta_convergence_report(f: TestFunction, N_list: Sequence[int], p: ModelParams,
                             rule: Optional[QuadratureRule] = None, eval_grid=None, *,
                             band: float = 0.10, stall_level: float = 1e-2,
                             floor: float = 1e-9) -> ConvergenceReport:
    """Sup-norm reconstruction error per N on a fixed interior grid.

    ``monotone`` allows each error to exceed its predecessor by at most
    ``band`` (relative); errors below ``floor`` count as quadrature noise.
    ``stalled`` marks a final error above ``stall_level``.
    """
    N_list = [int(n) for n in N_list]
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N_list must be increasing")
    rule = build_rule(16, 64) if rule is None else rule
    grid = default_grid() if eval_grid is None else np.asarray(eval_grid, dtype=float)
    target = f(grid)
    coeffs = bilinear_overlaps(f(rule.nodes), N_list[-1], p, rule)
    coeffs = coeffs * (-1.0) ** np.arange(N_list[-1])
    psi = eigenfunctions(N_list[-1], p, grid)
    rows = []
    for N in N_list:
        approx = coeffs[:N] @ psi[:N]
        rows.append((N, float(np.max(np.abs(approx - target)))))
    errs = [e for _, e in rows]
    monotone = all(b <= (1.0 + band) * a or b < floor for a, b in zip(errs, errs[1:]))
    return ConvergenceReport(f.identifier, tuple(rows), monotone, errs[-1] > stall_level,
                             f.informational)
