"""PT-symmetric Scarf I model on (-pi/2, pi/2) with beta = conj(alpha).

H = -d^2/dx^2 + V(x). The bound states are
psi_n = D_n (1 - sin x)^(alpha/2 + 1/4) (1 + sin x)^(conj(alpha)/2 + 1/4)
        * P_n^(alpha, conj(alpha))(sin x)
with real energies (n + Re(alpha) + 1/2)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .specfun import jacobi_all, log_gamma

__all__ = [
    "ModelParams",
    "Eigenstate",
    "one_minus_sin",
    "one_plus_sin",
    "potential",
    "energy",
    "normalization",
    "eigenstate",
    "eigenfunction",
    "eigenfunctions",
    "schrodinger_residual",
]

HALF_PI = 0.5 * math.pi
_ENDPOINT_MARGIN = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """The complex Scarf parameter alpha; beta = conj(alpha) is implied."""

    alpha: complex

    def __post_init__(self):
        a = complex(self.alpha)
        object.__setattr__(self, "alpha", a)
        if not (math.isfinite(a.real) and math.isfinite(a.imag)):
            raise ValueError("alpha must be finite")
        if not a.real > 0.5:
            raise ValueError(
                f"unbroken PT symmetry requires Re(alpha) > 1/2; got Re(alpha) = {a.real}"
            )

    @property
    def alpha_r(self) -> float:
        return self.alpha.real

    @property
    def alpha_i(self) -> float:
        return self.alpha.imag

    @property
    def beta(self) -> complex:
        return self.alpha.conjugate()

    @property
    def is_hermitian(self) -> bool:
        return self.alpha.imag == 0.0


@dataclass(frozen=True)
class Eigenstate:
    n: int
    energy: float
    norm_const: complex
    params: ModelParams

    def __call__(self, x):
        return eigenfunction(self.n, self.params, x)


def one_minus_sin(x):
    """1 - sin x without cancellation near x = pi/2."""
    return 2.0 * np.sin(0.25 * np.pi - 0.5 * np.asarray(x, dtype=float)) ** 2


def one_plus_sin(x):
    """1 + sin x without cancellation near x = -pi/2."""
    return 2.0 * np.cos(0.25 * np.pi - 0.5 * np.asarray(x, dtype=float)) ** 2


def potential(x, p: ModelParams):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= HALF_PI - _ENDPOINT_MARGIN):
        raise DomainError("the Scarf potential diverges at x = +-pi/2")
    a, b = p.alpha, p.beta
    c2 = np.cos(x) ** 2
    v = np.asarray(((a * a + b * b) / 2 - 0.25) / c2 + ((a * a - b * b) / 2) * np.sin(x) / c2)
    return complex(v) if v.ndim == 0 else v


def energy(n: int, p: ModelParams) -> float:
    return (n + p.alpha_r + 0.5) ** 2


def _log_norm_sq(n: int, p: ModelParams) -> float:
    ar = p.alpha_r
    g = log_gamma(n + p.alpha + 1.0)
    return (
        math.log(2 * n + 2 * ar + 1)
        + log_gamma(n + 1.0).real
        + log_gamma(n + 2 * ar + 1.0).real
        - (2 * ar + 1) * math.log(2.0)
        - 2.0 * g.real
    )


def normalization(n: int, p: ModelParams) -> complex:
    """D_n including its i^n phase; D_n / i^n is real positive."""
    return (1j ** n) * math.exp(0.5 * _log_norm_sq(n, p))


def eigenstate(n: int, p: ModelParams) -> Eigenstate:
    return Eigenstate(n=n, energy=energy(n, p), norm_const=normalization(n, p), params=p)


def _weights(p: ModelParams, x):
    """(1 - sin x)^(alpha/2 + 1/4) (1 + sin x)^(conj(alpha)/2 + 1/4), 0 at the ends."""
    x = np.asarray(x, dtype=float)
    lo, hi = one_minus_sin(x), one_plus_sin(x)
    out = np.zeros(x.shape, dtype=complex)
    ok = (lo > 0) & (hi > 0) & (np.abs(x) < HALF_PI)
    ea = p.alpha / 2 + 0.25
    eb = p.beta / 2 + 0.25
    out[ok] = np.exp(ea * np.log(lo[ok]) + eb * np.log(hi[ok]))
    return out


def eigenfunctions(N: int, p: ModelParams, x):
    """psi_0 .. psi_{N-1} at x; shape (N,) + shape(x)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > HALF_PI + 1e-15):
        raise DomainError("eigenfunctions live on [-pi/2, pi/2]")
    u = np.clip(np.sin(x), -1.0, 1.0)
    polys = jacobi_all(N - 1, p.alpha, p.beta, u)
    d = np.array([normalization(n, p) for n in range(N)])
    shape = (N,) + (1,) * x.ndim
    return d.reshape(shape) * _weights(p, x)[None, ...] * polys


def eigenfunction(n: int, p: ModelParams, x):
    vals = eigenfunctions(n + 1, p, x)[n]
    return complex(vals) if np.ndim(vals) == 0 else vals


def schrodinger_residual(n: int, p: ModelParams, interior_grid, h: float, *, energy_value=None) -> float:
    """max |-psi'' + V psi - E psi| / max |psi| on the grid, psi'' by a 5-point stencil."""
    if h <= 0:
        raise ValueError("h must be positive")
    grid = np.asarray(interior_grid, dtype=float)
    if np.any(np.abs(grid) + 2 * h >= HALF_PI):
        raise DomainError("finite-difference stencil leaves (-pi/2, pi/2)")
    e = energy(n, p) if energy_value is None else energy_value
    offsets = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * h
    pts = grid[:, None] + offsets[None, :]
    psi = eigenfunction(n, p, pts)
    second = (-psi[:, 0] + 16 * psi[:, 1] - 30 * psi[:, 2] + 16 * psi[:, 3] - psi[:, 4]) / (12 * h * h)
    centre = psi[:, 2]
    res = -second + potential(grid, p) * centre - e * centre
    return float(np.max(np.abs(res)) / np.max(np.abs(centre)))
