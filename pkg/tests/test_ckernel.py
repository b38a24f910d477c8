import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ptscarf import ckernel as ck
from ptscarf.errors import DomainError, ExtrapolationError, ResolutionError, SingularLineError
from ptscarf.ptproduct import build_rule
from ptscarf.scarf import ModelParams, eigenfunction

P1 = ModelParams(1 + 0.5j)
P2 = ModelParams(0.8 + 1.2j)

# mpmath at 30 digits: closed form on the z < 1 side, conjugate reflection on z > 1
CLOSED = {
    (P1, 0.3, 0.7): complex(-0.169838103038049885, -0.116432985598029794),
    (P1, -0.5, 0.2): complex(-0.741219272021351805, 1.45463015109698206),
    (P1, 0.3, -0.7): complex(-0.575442664582079537, 0.868118197758195905),
    (P2, 0.3, 0.7): complex(-1.70270661251158970, 0.729251306537409733),
    (P2, -0.5, 0.2): complex(-10.7005600074992362, 8.78537395185498577),
    (P2, 0.3, -0.7): complex(-7.92478361125907925, 3.83704177275588878),
}
N_CONST_P1 = complex(-0.586020953334653951, 1.17204190666930790)
# termwise eigenfunction series at t = -1 + 2^-4, (x, y) = (0.3, 0.7), mpmath
ABEL_T4 = complex(-0.162425942930179198, -0.146121285708678226)

coords = st.floats(-1.4, 1.4)


def _off_line(x, y, band=0.1):
    return abs(math.sin(x) + math.sin(y)) > band


class TestConstants:
    def test_kernel_constant(self):
        assert abs(ck.kernel_constant(P1) - N_CONST_P1) < 1e-14

    def test_hermitian_constant_vanishes(self):
        assert ck.kernel_constant(ModelParams(1.3)) == 0
        assert ck.delta_weight(ModelParams(1.3)) == 1.0
        assert ck.pole_coefficient(ModelParams(1.3)) == 0

    def test_kernel_params(self):
        kp = ck.kernel_params(P1)
        assert (kp.a, kp.b, kp.c, kp.d) == (2, 2.5, 2 + 0.5j, 2 - 0.5j)

    def test_point_geometry(self):
        pt = ck.KernelPoint(0.3, 0.7)
        assert pt.one_minus_z == pytest.approx(1 - pt.z, rel=1e-13)
        assert pt.U(-0.5) == pytest.approx(pt.P * -0.5 / 0.25)
        with pytest.raises(DomainError):
            ck.KernelPoint(1.6, 0.0)

    def test_schedule(self):
        assert ck.AbelSchedule(k_values=(2, 3)).t_values == [-0.75, -0.875]
        with pytest.raises(ValueError):
            ck.AbelSchedule(k_values=(5, 4))
        with pytest.raises(ValueError):
            ck.AbelSchedule(k_values=(0, 1))


class TestClosedForm:
    @pytest.mark.parametrize("key", list(CLOSED))
    def test_frozen(self, key):
        p, x, y = key
        val = ck.kernel_closed(x, y, p)
        assert abs(val - CLOSED[key]) <= 1e-10 * abs(CLOSED[key])

    def test_vectorised(self):
        xs = np.array([0.3, -0.5, 0.3])
        ys = np.array([0.7, 0.2, -0.7])
        vals = ck.kernel_closed(xs, ys, P1)
        for x, y, v in zip(xs, ys, vals):
            assert v == CLOSED[(P1, x, y)] or abs(v - CLOSED[(P1, x, y)]) < 1e-12

    def test_singular_line(self):
        with pytest.raises(SingularLineError):
            ck.kernel_closed(0.4, -0.4, P1)
        with pytest.raises(SingularLineError):
            ck.f4_limit(P1, ck.KernelPoint(0.4, -0.4))

    def test_domain(self):
        with pytest.raises(DomainError):
            ck.kernel_closed(1.58, 0.0, P1)

    def test_hermitian_vanishes_off_line(self):
        assert ck.kernel_closed(0.3, 0.7, ModelParams(1.0)) == 0

    @settings(max_examples=60, deadline=None)
    @given(coords, coords)
    def test_symmetric(self, x, y):
        assume(_off_line(x, y))
        a, b = ck.kernel_closed(x, y, P1), ck.kernel_closed(y, x, P1)
        assert abs(a - b) <= 1e-11 * max(1.0, abs(a))

    @settings(max_examples=60, deadline=None)
    @given(coords, coords)
    def test_pt_reflection(self, x, y):
        assume(_off_line(x, y))
        a = ck.kernel_closed(x, y, P2)
        b = np.conj(ck.kernel_closed(-x, -y, P2))
        assert abs(a - b) <= 1e-11 * max(1.0, abs(a))

    @settings(max_examples=40, deadline=None)
    @given(coords, coords)
    def test_conjugate_parameter(self, x, y):
        assume(_off_line(x, y))
        a = ck.kernel_closed(x, y, ModelParams(P1.beta))
        b = ck.kernel_closed(-x, -y, P1)
        assert abs(a - b) <= 1e-11 * max(1.0, abs(a))

    def test_candidate_family(self):
        forms = ck.candidate_forms()
        assert len(forms) == 144
        assert ck.RESOLVED_FORM in forms
        assert len({f.label for f in forms}) == 144


class TestRoutes:
    def test_abel_at_t_matches_termwise(self):
        pt = ck.KernelPoint(0.3, 0.7)
        t = -1 + 2.0 ** -4
        assert abs(ck.abel_series_sum(pt, P1, t) - ABEL_T4) < 1e-12
        assert abs(ck.kernel_abel_at_t(pt, P1, t) - ABEL_T4) < 1e-12

    @pytest.mark.parametrize("xy", [(0.3, 0.7), (-0.5, 0.2), (0.3, -0.7)])
    def test_generating_function_deep(self, xy):
        pt = ck.KernelPoint(*xy)
        t = -1 + 2.0 ** -8
        a = ck.abel_series_sum(pt, P1, t)
        b = ck.kernel_abel_at_t(pt, P1, t)
        assert abs(a - b) <= 1e-9 * abs(a)

    @pytest.mark.parametrize("p", [P1, P2])
    @pytest.mark.parametrize("xy", [(0.3, 0.7), (-0.5, 0.2), (0.3, -0.7)])
    def test_three_routes(self, p, xy):
        pt = ck.KernelPoint(*xy)
        closed = CLOSED[(p,) + xy]
        assert abs(ck.kernel_abel(pt, p) - closed) <= 1e-6 * abs(closed)
        assert abs(ck.f4_limit(p, pt) - closed) <= 1e-10 * abs(closed)

    def test_calibration_is_one(self):
        cal = ck.calibrate_constant(P1, ck.KernelPoint(-0.5, 0.2))
        assert abs(cal - 1) < 1e-6

    def test_series_paths_agree(self):
        pt = ck.KernelPoint(0.3, -0.2)
        a = ck.kernel_series(pt, P2, 30)
        b = ck.kernel_series(pt, P2, 30, path="coefficients")
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a))
        with pytest.raises(ValueError):
            ck.kernel_series(pt, P2, 30, path="nope")

    def test_plain_series_does_not_converge(self):
        assert ck.series_diagnostic(ck.KernelPoint(0.3, 0.7), P1) == "non-convergent"

    def test_abel_domain(self):
        pt = ck.KernelPoint(0.3, 0.7)
        with pytest.raises(DomainError):
            ck.abel_series_sum(pt, P1, -1.0)
        with pytest.raises(DomainError):
            ck.kernel_abel_at_t(pt, P1, 0.5)

    def test_abel_needs_points(self):
        with pytest.raises(DomainError):
            ck.kernel_abel(ck.KernelPoint(0.3, 0.7), P1,
                           ck.AbelSchedule(k_values=(1, 2, 3), extrapolation_order=2))

    def test_abel_trace(self):
        est, trace = ck.kernel_abel(ck.KernelPoint(0.3, 0.7), P1, return_trace=True)
        assert len(trace["h"]) == len(trace["values"]) >= 4
        assert trace["error"] < 1e-6


class TestRichardson:
    def test_exact_for_polynomials(self):
        h = [0.5, 0.25, 0.125, 0.0625]
        v = [3 + 2 * x - x * x for x in h]
        est, err = ck.richardson_extrapolate(h, v, 2)
        assert est == pytest.approx(3, abs=1e-13)
        assert err < 1e-13

    def test_too_few(self):
        with pytest.raises(ExtrapolationError):
            ck.richardson_extrapolate([0.5, 0.25], [1, 2], 1)


class TestResolution:
    def test_unique_survivor(self):
        pts = [ck.KernelPoint(x, y) for x, y in [(0.3, 0.7), (0.3, -0.7), (-0.9, 0.1),
                                                 (1.1, 0.4), (-1.0, -0.3), (0.6, -0.2)]]
        res = ck.resolve_closed_form(P1, pts, ck.KernelPoint(-0.5, 0.2))
        assert res["survivors"] == [ck.RESOLVED_FORM]
        printed = [r for r in res["records"]
                   if r["form"] == ck.ClosedForm(second="1-c+b")][0]
        assert printed["residual"] > 1e-3


class TestAction:
    @pytest.mark.parametrize("n", [0, 1, 3])
    def test_eigenfunction_parity(self, n):
        xs = np.array([-0.8, 0.1, 0.9])
        got = ck.c_apply(lambda y: eigenfunction(n, P1, y), xs, P1)
        want = (-1) ** n * eigenfunction(n, P1, xs)
        assert np.max(np.abs(got - want)) < 1e-5 * np.max(np.abs(want))

    def test_hermitian_is_parity(self):
        f = lambda y: np.cos(y) ** 2 * (1 + np.sin(y))  # noqa: E731
        assert ck.c_apply(f, 0.4, ModelParams(1.2)) == pytest.approx(f(-0.4))

    def test_spectral_reference(self):
        rule = build_rule(16, 64)
        from ptscarf.ptproduct import bilinear_overlaps
        f = lambda y: np.cos(y) ** 3  # noqa: E731
        coeffs = bilinear_overlaps(f(rule.nodes), 40, P1, rule)
        dense = ck.c_apply(f, 0.2, P1)
        spectral = ck.c_apply_spectral(coeffs, 0.2, P1)
        assert abs(dense - spectral) < 1e-4

    def test_rule_must_be_graded(self):
        with pytest.raises(ResolutionError):
            ck.c_apply(np.cos, 0.2, P1, build_rule())

    def test_requires_callable(self):
        with pytest.raises(TypeError):
            ck.c_apply(np.ones(5), 0.2, P1)

    def test_c_squared(self):
        f = lambda y: np.cos(y) ** 2 * np.exp(1j * np.sin(y))  # noqa: E731
        assert ck.c_squared_check(f, [0.35], P1) < 1e-4


class TestHermitianLimit:
    def test_parity_limit(self):
        assert ck.parity_limit_check(ModelParams(1.0), np.cos, 0.3, modes=256) < 1e-3

    def test_rejects_complex(self):
        with pytest.raises(ValueError):
            ck.parity_limit_check(P1, np.cos, 0.3)


def test_singularity_slope_is_simple_pole():
    slope, omz, mags = ck.singularity_slope(P1)
    assert slope == pytest.approx(-1.0, abs=0.02)
    assert np.all(np.diff(mags) > 0)
