import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptscarf.errors import (
    ConvergenceError,
    DomainError,
    PoleError,
)
from ptscarf.specfun import (
    SeriesControl,
    appell_f4,
    appell_f4_continued,
    gamma,
    gauss_2f1,
    iter_jacobi,
    jacobi_all,
    jacobi_p,
    log_gamma,
    pochhammer,
    rgamma,
)

# Frozen from mpmath at 30 digits.
LOG_GAMMA_2_HALF_I = complex(-0.0793737235296744864490424309396, 0.219589310095378353554502244225)
JACOBI_4_AT_03 = complex(0.00308333333333333333333333333329, -0.492625)
F4_BRUTE = 1.31040675374674983888552835429


def _away_from_poles(z):
    m = round(z.real)
    return not (m <= 0 and abs(z - m) < 1e-3)


complexes = st.builds(
    complex,
    st.floats(-20, 20, allow_nan=False),
    st.floats(-20, 20, allow_nan=False),
).filter(lambda z: abs(z) <= 20 and _away_from_poles(z) and _away_from_poles(z + 1)
         and _away_from_poles(1 - z))


class TestLogGamma:
    def test_trivial_values(self):
        assert log_gamma(1) == 0
        assert log_gamma(2) == pytest.approx(0, abs=1e-16)
        assert log_gamma(0.5).real == pytest.approx(0.5723649429247001, rel=1e-14)

    def test_frozen_oracle(self):
        assert abs(log_gamma(2 + 0.5j) - LOG_GAMMA_2_HALF_I) < 1e-14

    @pytest.mark.parametrize("z", [0.95 + 0.1j, 1.1, 2.1 - 0.15j, 7.3 + 4j, 0.3 - 9j,
                                   -2.5, -3.7 + 0.2j, -0.5 + 1e-9j, -0.5 - 1e-9j, 30 + 30j])
    def test_matches_mpmath(self, z):
        ref = complex(mp.loggamma(z))
        assert abs(log_gamma(z) - ref) <= 1e-13 * max(1.0, abs(ref))

    @pytest.mark.parametrize("z", [0, -1, -7, -3 + 1e-14j])
    def test_poles_raise(self, z):
        with pytest.raises(PoleError):
            log_gamma(z)

    def test_rgamma_zero_at_poles(self):
        assert rgamma(-4) == 0
        assert abs(rgamma(-3 + 1e-13) - complex(mp.rgamma(-3 + 1e-13))) < 1e-20

    @settings(max_examples=100, deadline=None)
    @given(complexes)
    def test_recurrence(self, z):
        lhs = cmath.exp(log_gamma(z + 1))
        rhs = z * cmath.exp(log_gamma(z))
        assert abs(lhs - rhs) <= 1e-12 * abs(rhs)

    @settings(max_examples=100, deadline=None)
    @given(complexes.filter(lambda z: abs(z.imag) < 8))
    def test_reflection(self, z):
        val = gamma(z) * gamma(1 - z) * cmath.sin(math.pi * z) / math.pi
        assert abs(val - 1) < 1e-11


class TestPochhammer:
    def test_values(self):
        assert pochhammer(3.3 + 1j, 0) == 1
        assert pochhammer(1, 5) == 120
        a = 0.5 + 0.5j
        assert pochhammer(a, 3) == pytest.approx(a * (a + 1) * (a + 2), rel=1e-15)

    def test_log_path_agrees_with_product(self):
        a = 0.7 + 0.3j
        direct = 1.0 + 0j
        for k in range(80):
            direct *= a + k
        assert abs(pochhammer(a, 80) / direct - 1) < 1e-12

    def test_negative_n_rejected(self):
        with pytest.raises(ValueError):
            pochhammer(1.0, -1)


class TestJacobi:
    def test_low_degree(self):
        assert jacobi_p(0, 0.3j, 2, 0.1) == 1
        assert jacobi_p(1, 0, 0, 0.5) == pytest.approx(0.5)

    def test_frozen_finite_sum(self):
        val = jacobi_p(4, 1 + 0.5j, 1 - 0.5j, 0.3)
        assert abs(val - JACOBI_4_AT_03) < 1e-13

    def test_matches_mpmath_high_degree(self):
        x = np.array([-0.9, 0.2, 0.77])
        vals = jacobi_all(30, 0.8 + 1.2j, 0.8 - 1.2j, x)[30]
        for xi, v in zip(x, vals):
            ref = complex(mp.jacobi(30, 0.8 + 1.2j, 0.8 - 1.2j, xi))
            assert abs(v - ref) <= 1e-11 * abs(ref)

    def test_iterator_matches_table(self):
        x = np.linspace(-1, 1, 7)
        table = jacobi_all(15, 1 + 0.5j, 1 - 0.5j, x)
        gen = iter_jacobi(1 + 0.5j, 1 - 0.5j, x)
        for n in range(16):
            np.testing.assert_allclose(next(gen), table[n], rtol=1e-15, atol=0)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.51, 3), st.floats(-2, 2), st.floats(-1, 1))
    def test_reflection_symmetry(self, ar, ai, x):
        a, b = complex(ar, ai), complex(ar, -ai)
        lhs = jacobi_all(20, a, b, -x)
        rhs = jacobi_all(20, b, a, x) * (-1.0) ** np.arange(21)
        assert np.all(np.abs(lhs - rhs) <= 1e-12 * np.maximum(1.0, np.abs(rhs)))

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-0.9, 3), st.floats(-2, 2))
    def test_endpoint_value(self, ar, ai):
        a, b = complex(ar, ai), complex(ar, -ai)
        vals = jacobi_all(20, a, b, 1.0)
        for n in range(21):
            ref = pochhammer(a + 1, n) / math.factorial(n)
            assert abs(vals[n] - ref) <= 1e-12 * max(1.0, abs(ref))

    def test_domain(self):
        with pytest.raises(DomainError):
            jacobi_p(2, 1, 1, 1.5)


class TestGauss2F1:
    def test_trivial(self):
        assert gauss_2f1(0.3, 0.4j, 1.7, 0.0) == 1
        assert gauss_2f1(1, 1, 2, 0.5) == pytest.approx(-math.log(0.5) / 0.5, rel=1e-14)

    @pytest.mark.parametrize("z", [0.5 + 0.5j, 0.95, -0.99, 1.5, 3.0, -5 + 2j, 0.6 + 0.8j, 12 - 3j])
    def test_matches_mpmath(self, z):
        a, b, c = 0.3 + 0.2j, 0.7, 1.4 - 0.5j
        ref = complex(mp.hyp2f1(a, b, c, mp.mpc(z, 1e-30) if isinstance(z, float) else z))
        assert abs(gauss_2f1(a, b, c, z) - ref) <= 1e-10 * max(1.0, abs(ref))

    def test_vectorised(self):
        z = np.array([0.1, 0.95, -3.0, 2 + 1j])
        vals = gauss_2f1(0.5, 1.5j, 2.2, z)
        for zi, v in zip(z, vals):
            assert v == pytest.approx(gauss_2f1(0.5, 1.5j, 2.2, zi), rel=1e-15)

    @pytest.mark.parametrize("a,b,c,z", [(1, 2, 3, 3 + 0.1j), (1.5, 0.5, 2, 0.95),
                                         (2.0, 1 - 0.5j, 1 + 0.5j, 0.97)])
    def test_integer_gap(self, a, b, c, z):
        ref = complex(mp.hyp2f1(a, b, c, z))
        assert abs(gauss_2f1(a, b, c, z) - ref) <= 1e-12 * abs(ref)

    def test_exact_one_minus_z(self):
        # kernel parameters: c - a - b = -1 exactly
        a, b, c = 2.0, 1 - 0.5j, 2 - 0.5j
        val = gauss_2f1(a, b, c, 1 - 1e-9, one_minus_z=1e-9)
        with mp.workdps(40):  # 1 - w must not round in the reference
            ref = complex(mp.hyp2f1(a, b, c, mp.mpf(1) - mp.mpf(1e-9)))
        assert abs(val - ref) <= 1e-9 * abs(ref)

    def test_branch_point(self):
        with pytest.raises(DomainError):
            gauss_2f1(1, 1, 1.5, 1.0)
        assert gauss_2f1(0.2, 0.3, 1.5, 1.0) == pytest.approx(
            complex(mp.hyp2f1(0.2, 0.3, 1.5, 1)), rel=1e-13)

    def test_cut_policy(self):
        above = gauss_2f1(0.3, 0.7, 1.2, 2.0)
        below = gauss_2f1(0.3, 0.7, 1.2, 2.0, branch="below")
        assert above == pytest.approx(below.conjugate(), rel=1e-14)
        with pytest.raises(DomainError):
            gauss_2f1(0.3, 0.7, 1.2, 2.0, branch="raise")

    def test_c_pole(self):
        with pytest.raises(PoleError):
            gauss_2f1(1, 1, -2, 0.3)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-1.5, 1.5),
           st.floats(0.55, 0.85), st.floats(0, 2 * math.pi))
    def test_route_consistency(self, ar, ai, br, ci, r, phi):
        # z in the overlap |z| < 0.9 where the series and every transform converge
        a, b, c = complex(ar, ai), complex(br, 0.3), complex(1.7, ci)
        z = r * cmath.exp(1j * phi)
        if abs(1 - z) < 0.35 or abs(z) < 0.6:
            return  # transforms evaluated too close to their own radius
        ref = gauss_2f1(a, b, c, z, method="series")
        for m in ("pfaff", "one_minus_z", "inverse", "inverse_one_minus_z",
                  "one_minus_inverse"):
            w = 1 - z
            meas = {"pfaff": abs(z / w), "one_minus_z": abs(w), "inverse": 1 / abs(z),
                    "inverse_one_minus_z": 1 / abs(w), "one_minus_inverse": abs(w / z)}[m]
            if meas > 0.8:
                continue
            val = gauss_2f1(a, b, c, z, method=m)
            assert abs(val - ref) <= 1e-9 * max(1.0, abs(ref)), m


class TestAppellF4:
    def test_trivial(self):
        assert appell_f4(1.5, 2, 2, 1.5, 0, 0) == 1

    def test_frozen_double_sum(self):
        assert abs(appell_f4(1.5, 2, 2, 1.5, 0.04, 0.09) - F4_BRUTE) < 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            appell_f4(1, 1, 2, 2, 0.3, 0.3)

    def test_max_terms(self):
        with pytest.raises(ConvergenceError):
            appell_f4(1, 1, 2, 2, 0.2, 0.3, SeriesControl(max_terms=3))

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.5, 3), st.floats(0.5, 3), st.floats(-1, 1), st.floats(-0.8, 0.8),
           st.floats(-0.8, 0.8))
    def test_reduction_to_2f1(self, a, b, ci, ur, ui):
        c, d = complex(1.5, ci), complex(1.2, -ci)
        U = complex(ur, ui) * 0.9
        if abs(U) >= 0.9:
            return
        ref = gauss_2f1(a, b, c, U)
        assert abs(appell_f4(a, b, c, d, U, 0) - ref) <= 1e-12 * max(1.0, abs(ref))

    @pytest.mark.parametrize("x,y", [(-30, 0.2), (-60, -0.1), (-20 + 5j, 0.1j)])
    def test_continuation_product_reduction(self, x, y):
        # F4(a, b; c, a+b-c+1; x(1-y), y(1-x)) = 2F1(a, b; c; x) 2F1(a, b; a+b-c+1; y)
        a, b, c = 2.0, 2.5, 2 + 0.5j
        d = a + b - c + 1
        U, V = x * (1 - y), y * (1 - x)
        ref = complex(mp.hyp2f1(a, b, c, x) * mp.hyp2f1(a, b, d, y))
        assert abs(appell_f4_continued(a, b, c, d, U, V) - ref) <= 1e-12 * abs(ref)

    @pytest.mark.parametrize("U", [-40.0, -6.0, -3 + 4j])
    def test_continuation_reduces_to_2f1(self, U):
        a, b, c, d = 2.0, 2.5, 2 + 0.5j, 2 - 0.5j
        ref = complex(mp.hyp2f1(a, b, c, U))
        assert abs(appell_f4_continued(a, b, c, d, U, 0.0) - ref) <= 1e-13 * abs(ref)
        ref = complex(mp.hyp2f1(a, b, d, U))
        assert abs(appell_f4_continued(a, b, c, d, 0.0, U) - ref) <= 1e-13 * abs(ref)

    def test_continuation_outside_region(self):
        with pytest.raises(DomainError):
            appell_f4_continued(2.0, 2.5, 2, 2, -2.0, -1.5)
