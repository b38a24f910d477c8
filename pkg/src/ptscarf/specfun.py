"""Complex-parameter special functions.

Everything in the package is built on the routines here: a Lanczos log-Gamma
with reflection, Pochhammer symbols, Jacobi polynomials by three-term
recurrence, the Gauss hypergeometric function with its linear-transformation
continuation, and the Appell F4 double series (inside its convergence domain
and, for large |U|, through the Gamma-weighted pair of F4s in 1/U and V/U).

All functions are pure. Parameters are Python/numpy complex scalars; the
hypergeometric routines additionally accept numpy arrays for the argument.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zetac

from .errors import (
    ConvergenceError,
    DegeneracyError,
    DomainError,
    NonFiniteError,
    OverflowGuardError,
    PoleError,
)

__all__ = [
    "SeriesControl",
    "DEFAULT_CONTROL",
    "log_gamma",
    "gamma",
    "rgamma",
    "pochhammer",
    "jacobi_p",
    "jacobi_all",
    "iter_jacobi",
    "gauss_2f1",
    "appell_f4",
    "appell_f4_continued",
]


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for the hypergeometric series."""

    max_terms: int = 20000
    rel_tol: float = 1e-16
    overflow_guard: float = 1e300

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError("rel_tol must lie in (0, 1)")
        if not self.overflow_guard > 0.0:
            raise ValueError("overflow_guard must be positive")


DEFAULT_CONTROL = SeriesControl()

# ---------------------------------------------------------------------------
# Gamma family
# ---------------------------------------------------------------------------

_POLE_TOL = 1e-12
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)
_TWO_PI = 2.0 * math.pi
_EULER_GAMMA = 0.57721566490153286061

# log Gamma(1 + w) = -gamma*w + sum_{k>=2} (-1)^k zeta(k)/k w^k, and the
# shifted series about 2; the radius keeps 40 terms far below 1 ulp.
_TAYLOR_RADIUS = 0.2
_TAYLOR_TERMS = 40
_TAYLOR_AT_1 = [0.0, -_EULER_GAMMA] + [
    (-1.0) ** k * (1.0 + float(zetac(k))) / k for k in range(2, _TAYLOR_TERMS)
]
_TAYLOR_AT_2 = [0.0, 1.0 - _EULER_GAMMA] + [
    (-1.0) ** k * float(zetac(k)) / k for k in range(2, _TAYLOR_TERMS)
]


def _horner(coeffs, w):
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * w + c
    return acc


def _nearest_pole(z: complex):
    """Return the nonpositive integer within the pole tolerance of z, or None."""
    m = round(z.real)
    if m <= 0 and abs(z - m) < _POLE_TOL:
        return int(m)
    return None


def _lanczos_log_gamma(z: complex) -> complex:
    z = z - 1.0
    acc = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(acc)


def _log_gamma(z: complex) -> complex:
    if abs(z - 1.0) < _TAYLOR_RADIUS:
        return _horner(_TAYLOR_AT_1, z - 1.0)
    if abs(z - 2.0) < _TAYLOR_RADIUS:
        return _horner(_TAYLOR_AT_2, z - 2.0)
    if z.real < 0.5:
        # Branch offset keeps the result on the principal branch (continuous
        # off the negative real axis).
        branch = math.copysign(_TWO_PI, z.imag) * math.floor(0.5 * z.real + 0.25)
        return (
            complex(_LOG_PI, branch)
            - cmath.log(cmath.sin(math.pi * z))
            - _log_gamma(1.0 - z)
        )
    return _lanczos_log_gamma(z)


def log_gamma(z) -> complex:
    """Principal branch of log Gamma(z) for complex z.

    Raises PoleError within 1e-12 of a nonpositive integer.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise NonFiniteError(f"log_gamma argument is not finite: {z!r}")
    if _nearest_pole(z) is not None:
        raise PoleError(f"log_gamma has a pole at {z!r}")
    return _log_gamma(z)


def gamma(z) -> complex:
    return cmath.exp(log_gamma(z))


def rgamma(z) -> complex:
    """1/Gamma(z); entire, so poles of Gamma map to (linearised) zeros."""
    z = complex(z)
    m = _nearest_pole(z)
    if m is not None:
        # 1/Gamma(-k + e) = (-1)^k k! e + O(e^2)
        k = -m
        return (-1.0) ** k * math.factorial(k) * (z - m)
    return cmath.exp(-_log_gamma(z))


def pochhammer(a, n: int) -> complex:
    """Rising factorial (a)_n = Gamma(a+n)/Gamma(a)."""
    if n < 0:
        raise ValueError("pochhammer needs n >= 0")
    a = complex(a)
    if n <= 64:
        acc = 1.0 + 0j
        for k in range(n):
            acc *= a + k
        return acc
    return cmath.exp(log_gamma(a + n) - log_gamma(a))


# ---------------------------------------------------------------------------
# Jacobi polynomials
# ---------------------------------------------------------------------------

_RECURRENCE_FLOOR = 1e-14


def jacobi_all(n_max: int, a, b, x):
    """P_0 .. P_{n_max} of P^{(a,b)} at x; shape (n_max + 1,) + shape(x)."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    a, b = complex(a), complex(b)
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-14):
        raise DomainError("Jacobi polynomials are evaluated on [-1, 1] only")
    out = np.empty((n_max + 1,) + x.shape, dtype=complex)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0
    ab2 = a * a - b * b
    for k in range(2, n_max + 1):
        s = 2 * k + a + b
        den = 2 * k * (k + a + b) * (s - 2)
        if abs(den) < _RECURRENCE_FLOOR:
            raise DegeneracyError(f"Jacobi recurrence breaks down at degree {k}")
        out[k] = (
            (s - 1) * (s * (s - 2) * x + ab2) * out[k - 1]
            - 2 * (k + a - 1) * (k + b - 1) * s * out[k - 2]
        ) / den
    return out


def iter_jacobi(a, b, x):
    """Yield P_0, P_1, ... of P^{(a,b)} at x without storing the table."""
    a, b = complex(a), complex(b)
    x = np.asarray(x, dtype=float)
    prev = np.ones(x.shape, dtype=complex)
    yield prev
    cur = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0
    yield cur
    ab2 = a * a - b * b
    k = 2
    while True:
        s = 2 * k + a + b
        den = 2 * k * (k + a + b) * (s - 2)
        if abs(den) < _RECURRENCE_FLOOR:
            raise DegeneracyError(f"Jacobi recurrence breaks down at degree {k}")
        prev, cur = cur, ((s - 1) * (s * (s - 2) * x + ab2) * cur
                          - 2 * (k + a - 1) * (k + b - 1) * s * prev) / den
        yield cur
        k += 1


def jacobi_p(n: int, a, b, x):
    """Jacobi polynomial P_n^{(a,b)}(x) for complex a, b and |x| <= 1."""
    vals = jacobi_all(n, a, b, x)[n]
    if np.ndim(vals) == 0:
        return complex(vals)
    return vals


# ---------------------------------------------------------------------------
# Gauss 2F1
# ---------------------------------------------------------------------------

_SERIES_RADIUS = 0.9
_DEGENERACY_GAP = 1e-8
# Integer parameter gaps make the connection coefficients singular while the
# function itself stays analytic in b, so the value is recovered as the mean
# over a small circle in b (trapezoidal rule, exponentially accurate). The
# radius shrinks with |log| of the argument so that the power factors
# w^(c-a-b) stay slowly varying around the circle.
_CIRCLE_RADIUS = 0.1
_CIRCLE_POINTS = 24
_CUT_NUDGE = 1e-300


def _near_integer(v: complex) -> bool:
    return abs(v - round(v.real)) < _DEGENERACY_GAP


def _is_nonpositive_integer(v: complex) -> bool:
    return _nearest_pole(v) is not None


def _gamma_ratio(num, den) -> complex:
    """prod Gamma(num) / prod Gamma(den); denominator poles give 0."""
    for d in den:
        if _is_nonpositive_integer(complex(d)):
            return 0j
    acc = 0j
    for v in num:
        if _is_nonpositive_integer(complex(v)):
            raise DegeneracyError(f"Gamma pole at {v!r} in a connection coefficient")
        acc += _log_gamma(complex(v))
    for v in den:
        acc -= _log_gamma(complex(v))
    return cmath.exp(acc)


def _series(a, b, c, z, ctrl: SeriesControl):
    """Plain hypergeometric series, vectorised over z (|z| < 1 assumed)."""
    if _is_nonpositive_integer(complex(c)):
        raise DegeneracyError(f"series lower parameter {c!r} is a nonpositive integer")
    z = np.asarray(z, dtype=complex)
    total = np.ones(z.shape, dtype=complex)
    term = np.ones(z.shape, dtype=complex)
    idx = np.flatnonzero(np.ones(z.shape, dtype=bool))
    zf = z.ravel()
    tf = term.ravel()
    sf = total.ravel()
    small_before = np.zeros(idx.size, dtype=bool)
    for j in range(ctrl.max_terms):
        factor = (a + j) * (b + j) / ((c + j) * (j + 1.0))
        tf[idx] *= factor * zf[idx]
        sf[idx] += tf[idx]
        mag = np.abs(tf[idx])
        if np.any(mag > ctrl.overflow_guard):
            raise OverflowGuardError("2F1 series term exceeded the overflow guard")
        if factor == 0:
            return total
        small = mag <= ctrl.rel_tol * np.abs(sf[idx])
        done = small & small_before
        if np.any(done):
            keep = ~done
            idx = idx[keep]
            small = small[keep]
            if idx.size == 0:
                return total
        small_before = small
    raise ConvergenceError("2F1 series did not converge within max_terms")


def _perturbed(route, a, b, c, z, w, ctrl):
    with np.errstate(divide="ignore"):
        scale = max(1.0, float(np.max(np.abs(np.log(np.abs(z))))),
                    float(np.max(np.abs(np.log(np.abs(w))))))
    radius = min(_CIRCLE_RADIUS, 1.0 / scale)
    theta = 2.0 * np.pi * (np.arange(_CIRCLE_POINTS) + 0.5) / _CIRCLE_POINTS
    acc = 0.0
    for shift in radius * np.exp(1j * theta):
        acc = acc + route(a, b + shift, c, z, w, ctrl)
    return acc / _CIRCLE_POINTS


def _pow(base, p):
    return np.exp(p * np.log(base))


def _route_series(a, b, c, z, w, ctrl):
    return _series(a, b, c, z, ctrl)


def _route_pfaff(a, b, c, z, w, ctrl):
    return _pow(w, -a) * _series(a, c - b, c, -z / w, ctrl)


def _one_minus_z_raw(a, b, c, z, w, ctrl):
    g1 = _gamma_ratio([c, c - a - b], [c - a, c - b])
    g2 = _gamma_ratio([c, a + b - c], [a, b])
    out = np.zeros(np.shape(w), dtype=complex)
    if g1 != 0:
        out += g1 * _series(a, b, a + b - c + 1, w, ctrl)
    if g2 != 0:
        out += g2 * _pow(w, c - a - b) * _series(c - a, c - b, c - a - b + 1, w, ctrl)
    return out


def _route_one_minus_z(a, b, c, z, w, ctrl):
    if _near_integer(c - a - b):
        return _perturbed(_one_minus_z_raw, a, b, c, z, w, ctrl)
    return _one_minus_z_raw(a, b, c, z, w, ctrl)


def _inverse_raw(a, b, c, z, w, ctrl):
    g1 = _gamma_ratio([c, b - a], [b, c - a])
    g2 = _gamma_ratio([c, a - b], [a, c - b])
    mz = -z
    inv = 1.0 / z
    out = np.zeros(np.shape(z), dtype=complex)
    if g1 != 0:
        out += g1 * _pow(mz, -a) * _series(a, a - c + 1, a - b + 1, inv, ctrl)
    if g2 != 0:
        out += g2 * _pow(mz, -b) * _series(b, b - c + 1, b - a + 1, inv, ctrl)
    return out


def _route_inverse(a, b, c, z, w, ctrl):
    if _near_integer(a - b):
        return _perturbed(_inverse_raw, a, b, c, z, w, ctrl)
    return _inverse_raw(a, b, c, z, w, ctrl)


def _inverse_one_minus_z_raw(a, b, c, z, w, ctrl):
    g1 = _gamma_ratio([c, b - a], [b, c - a])
    g2 = _gamma_ratio([c, a - b], [a, c - b])
    inv = 1.0 / w
    out = np.zeros(np.shape(w), dtype=complex)
    if g1 != 0:
        out += g1 * _pow(w, -a) * _series(a, c - b, a - b + 1, inv, ctrl)
    if g2 != 0:
        out += g2 * _pow(w, -b) * _series(b, c - a, b - a + 1, inv, ctrl)
    return out


def _route_inverse_one_minus_z(a, b, c, z, w, ctrl):
    if _near_integer(a - b):
        return _perturbed(_inverse_one_minus_z_raw, a, b, c, z, w, ctrl)
    return _inverse_one_minus_z_raw(a, b, c, z, w, ctrl)


def _one_minus_inverse_raw(a, b, c, z, w, ctrl):
    g1 = _gamma_ratio([c, c - a - b], [c - a, c - b])
    g2 = _gamma_ratio([c, a + b - c], [a, b])
    v = -w / z
    out = np.zeros(np.shape(z), dtype=complex)
    if g1 != 0:
        out += g1 * _pow(z, -a) * _series(a, a - c + 1, a + b - c + 1, v, ctrl)
    if g2 != 0:
        phase = np.exp((c - a - b) * np.log(w) + (a - c) * np.log(z))
        out += g2 * phase * _series(c - a, 1 - a, c - a - b + 1, v, ctrl)
    return out


def _route_one_minus_inverse(a, b, c, z, w, ctrl):
    if _near_integer(c - a - b):
        return _perturbed(_one_minus_inverse_raw, a, b, c, z, w, ctrl)
    return _one_minus_inverse_raw(a, b, c, z, w, ctrl)


_ROUTES = {
    "series": _route_series,
    "pfaff": _route_pfaff,
    "one_minus_z": _route_one_minus_z,
    "inverse": _route_inverse,
    "inverse_one_minus_z": _route_inverse_one_minus_z,
    "one_minus_inverse": _route_one_minus_inverse,
}
_TRANSFORM_ORDER = ("pfaff", "one_minus_z", "inverse", "inverse_one_minus_z", "one_minus_inverse")


def _route_measures(z, w):
    az, aw = np.abs(z), np.abs(w)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.stack([az / aw, aw, 1.0 / az, 1.0 / aw, aw / az])


def gauss_2f1(a, b, c, z, *, one_minus_z=None, method="auto", branch="above",
              ctrl: SeriesControl = DEFAULT_CONTROL):
    """Gauss hypergeometric function 2F1(a, b; c; z).

    ``z`` may be a scalar or an array. ``one_minus_z`` supplies 1 - z exactly
    when the caller knows it more accurately than the subtraction would give
    (the kernel close to z = 1 depends on this). Real z > 1 sits on the branch
    cut; ``branch`` selects the limit from above ("above"), below ("below"),
    or raises ("raise"). ``method`` forces a single route, which is how the
    cross-route consistency tests pin the continuation.
    """
    a, b, c = complex(a), complex(b), complex(c)
    if _is_nonpositive_integer(c):
        raise PoleError(f"2F1 lower parameter c={c!r} is a nonpositive integer")
    if method != "auto" and method not in _ROUTES:
        raise ValueError(f"unknown 2F1 method {method!r}")
    scalar = np.ndim(z) == 0
    z = np.array(z, dtype=complex, ndmin=1)
    if one_minus_z is None:
        w = 1.0 - z
    else:
        w = np.broadcast_to(np.array(one_minus_z, dtype=complex, ndmin=1), z.shape).copy()
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(w))):
        raise NonFiniteError("2F1 argument is not finite")

    out = np.empty(z.shape, dtype=complex)
    at_one = w == 0
    if np.any(at_one):
        if (c - a - b).real <= 0:
            raise DomainError("2F1 diverges at z = 1 when Re(c - a - b) <= 0")
        out[at_one] = _gamma_ratio([c, c - a - b], [c - a, c - b])
    on_cut = (z.imag == 0) & (z.real > 1) & ~at_one
    if np.any(on_cut):
        if branch == "raise":
            raise DomainError("real z > 1 lies on the 2F1 branch cut")
        if branch not in ("above", "below"):
            raise ValueError(f"unknown branch policy {branch!r}")
        nudge = _CUT_NUDGE if branch == "above" else -_CUT_NUDGE
        z[on_cut] = z[on_cut].real + 1j * nudge
        w[on_cut] = w[on_cut].real - 1j * nudge

    live = ~at_one
    if method == "auto":
        names = np.empty(z.shape, dtype=object)
        direct = live & (np.abs(z) <= _SERIES_RADIUS)
        names[direct] = "series"
        rest = live & ~direct
        if np.any(rest):
            meas = _route_measures(z[rest], w[rest])
            pick = np.argmin(meas, axis=0)
            names[rest] = [_TRANSFORM_ORDER[k] for k in pick]
    else:
        names = np.full(z.shape, method, dtype=object)

    for name in _ROUTES:
        sel = live & (names == name)
        if np.any(sel):
            out[sel] = _ROUTES[name](a, b, c, z[sel], w[sel], ctrl)
    if not np.all(np.isfinite(out)):
        raise NonFiniteError("2F1 produced a non-finite value")
    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# Appell F4
# ---------------------------------------------------------------------------

_F4_CHUNK = 64
_F4_TAIL = 8


def _series_shifted(A, B, c, x, ctrl: SeriesControl):
    """2F1(A_s, B_s; c; x) for arrays A, B of upper parameters and scalar x."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    total = np.ones(A.shape, dtype=complex)
    if x == 0:
        return total
    term = np.ones(A.shape, dtype=complex)
    idx = np.arange(A.size)
    small_before = np.zeros(A.size, dtype=bool)
    for j in range(ctrl.max_terms):
        term[idx] *= (A[idx] + j) * (B[idx] + j) / ((c + j) * (j + 1.0)) * x
        total[idx] += term[idx]
        mag = np.abs(term[idx])
        if np.any(mag > ctrl.overflow_guard):
            raise OverflowGuardError("F4 inner series exceeded the overflow guard")
        small = mag <= ctrl.rel_tol * np.abs(total[idx])
        done = small & small_before
        if np.any(done):
            keep = ~done
            idx = idx[keep]
            small = small[keep]
            if idx.size == 0:
                return total
        small_before = small
    raise ConvergenceError("F4 inner 2F1 series did not converge within max_terms")


def appell_f4(a, b, c, d, U, V, ctrl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """Appell F4(a, b; c, d; U, V) inside sqrt|U| + sqrt|V| < 1.

    Summed in iterated form: an outer sum over the power of V, each term
    carrying the full 2F1(a+s, b+s; c; U).
    """
    a, b, c, d = complex(a), complex(b), complex(c), complex(d)
    U, V = complex(U), complex(V)
    if _is_nonpositive_integer(c) or _is_nonpositive_integer(d):
        raise PoleError("F4 lower parameters must not be nonpositive integers")
    if math.sqrt(abs(U)) + math.sqrt(abs(V)) >= 1.0:
        raise DomainError("F4 double series diverges: sqrt|U| + sqrt|V| >= 1")
    total = 0j
    coef = 1.0 + 0j
    s0 = 0
    while True:
        s = np.arange(s0, s0 + _F4_CHUNK, dtype=float)
        ratios = (a + s) * (b + s) / ((s + 1.0) * (d + s)) * V
        coefs = coef * np.concatenate(([1.0], np.cumprod(ratios[:-1])))
        coef = coefs[-1] * ratios[-1]
        terms = coefs * _series_shifted(a + s, b + s, c, U, ctrl)
        total += terms.sum()
        tail = np.abs(terms[-_F4_TAIL:]).max()
        if tail <= ctrl.rel_tol * abs(total) or not np.any(coefs):
            break
        s0 += _F4_CHUNK
        if s0 >= ctrl.max_terms:
            raise ConvergenceError("F4 outer sum did not converge within max_terms")
    if not (math.isfinite(total.real) and math.isfinite(total.imag)):
        raise NonFiniteError("F4 produced a non-finite value")
    return total


def appell_f4_continued(a, b, c, d, U, V, ctrl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """F4 continued to large |U| (after ordering so that |V| <= |U|).

    Uses F4(a,b;c,d;U,V) = G1 (-U)^{-a} F4(a, a-c+1; a-b+1, d; 1/U, V/U)
                         + G2 (-U)^{-b} F4(b, b-c+1; b-a+1, d; 1/U, V/U),
    valid when sqrt|1/U| + sqrt|V/U| < 1.
    """
    a, b, c, d = complex(a), complex(b), complex(c), complex(d)
    U, V = complex(U), complex(V)
    if abs(V) > abs(U):
        c, d, U, V = d, c, V, U
    if U == 0:
        raise DomainError("continuation needs U != 0")
    inv, ratio = 1.0 / U, V / U
    if math.sqrt(abs(inv)) + math.sqrt(abs(ratio)) >= 1.0:
        raise DomainError("F4 continuation diverges: sqrt|1/U| + sqrt|V/U| >= 1")
    if _near_integer(a - b):
        raise DegeneracyError("F4 continuation needs a - b away from an integer")
    mu = -U
    g1 = _gamma_ratio([c, b - a], [c - a, b])
    g2 = _gamma_ratio([c, a - b], [c - b, a])
    total = 0j
    if g1 != 0:
        total += g1 * cmath.exp(-a * cmath.log(mu)) * appell_f4(a, a - c + 1, a - b + 1, d, inv, ratio, ctrl)
    if g2 != 0:
        total += g2 * cmath.exp(-b * cmath.log(mu)) * appell_f4(b, b - c + 1, b - a + 1, d, inv, ratio, ctrl)
    return total
