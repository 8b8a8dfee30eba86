"""Delay relations, forward meshes, and the closed form mesh points."""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import delaysym.expr as ex
from delaysym.delay import (
    AffineDelay,
    ConstantDelay,
    GeneralDelay,
    Mesh,
    MoebiusDelay,
    QScaleDelay,
    build_mesh,
    closed_form_point,
    default_domain,
    parse_delay_spec,
    scale_delay,
)
from delaysym.errors import (
    DomainError,
    NoForwardPoint,
    NotMonotone,
    ParameterDomainError,
    ParseError,
)

INF = math.inf


class TestConstant:
    def test_basic(self):
        r = ConstantDelay(0.5)
        assert r.delayed_point(2.0) == 1.5
        assert r.advance(2.0) == 2.5
        assert r.derivative(1.0) == 1.0

    def test_tau_positive(self):
        with pytest.raises(ParameterDomainError):
            ConstantDelay(0.0)
        with pytest.raises(ParameterDomainError):
            ConstantDelay(-1.0)

    def test_gap_is_literal(self):
        # prolongations and the flow map rely on the gap folding to a number
        assert ConstantDelay(2.0).gap_expr() == ex.Num(2.0)

    def test_mesh(self):
        mesh = build_mesh(ConstantDelay(1.0), 0.0, 4)
        assert mesh.points == (-1.0, 0.0, 1.0, 2.0, 3.0, 4.0)


class TestAffine:
    def test_delay_check(self):
        r = AffineDelay(2.0, 1.0)
        assert r.delayed_point(0.0) == -1.0
        # (q-1)*x < tau fails at and beyond x = 1
        with pytest.raises(DomainError):
            r.delayed_point(1.0)
        with pytest.raises(DomainError):
            r.delayed_point(2.0)

    def test_advance_inverts(self):
        r = AffineDelay(0.5, 0.25)
        x = 0.8
        assert r.advance(r.delayed_point(x)) == pytest.approx(x, rel=1e-15)

    def test_identity_rejected(self):
        with pytest.raises(ParameterDomainError):
            AffineDelay(1.0, 0.0)
        with pytest.raises(ParameterDomainError):
            AffineDelay(-0.5, 1.0)

    def test_q1_is_constant_shift(self):
        r = AffineDelay(1.0, 0.75)
        assert r.delayed_point(3.0) == 2.25

    def test_accumulation_from_above(self):
        # q > 1: forward points converge to tau/(q-1) from below
        r = AffineDelay(2.0, 1.0)
        mesh = build_mesh(r, 0.0, 12)
        assert all(p < 1.0 for p in mesh.points)
        assert mesh.points[-1] == pytest.approx(1.0, abs=1e-3)


class TestQScale:
    def test_positive_half_line_only(self):
        r = QScaleDelay(0.5)
        assert r.delayed_point(4.0) == 2.0
        assert r.advance(2.0) == 4.0
        with pytest.raises(DomainError):
            r.delayed_point(-1.0)
        with pytest.raises(DomainError):
            r.delayed_point(0.0)

    def test_q_range(self):
        for bad in (0.0, 1.0, 1.5, -0.2):
            with pytest.raises(ParameterDomainError):
                QScaleDelay(bad)

    def test_mesh_geometric(self):
        mesh = build_mesh(QScaleDelay(0.5), 1.0, 3)
        assert mesh.points == pytest.approx((0.5, 1.0, 2.0, 4.0, 8.0))


class TestMoebius:
    def test_angle_subtraction(self):
        # on theta = atan(x) the relation subtracts atan(C)
        r = MoebiusDelay(1.0)
        x = 0.7
        xm = r.delayed_point(x)
        assert math.atan(x) - math.atan(xm) == pytest.approx(math.atan(1.0), rel=1e-14)

    def test_advance_inverts(self):
        r = MoebiusDelay(0.5)
        x = 1.3
        assert r.advance(r.delayed_point(x)) == pytest.approx(x, rel=1e-14)

    def test_pole_raises(self):
        r = MoebiusDelay(1.0)
        with pytest.raises(DomainError):
            r.delayed_point(-1.0)

    def test_no_forward_point_past_pole(self):
        # advancing fails once 1 - C*x <= 0
        r = MoebiusDelay(1.0)
        with pytest.raises(NoForwardPoint):
            r.advance(1.0)
        with pytest.raises(NoForwardPoint):
            r.advance(2.0)

    def test_not_a_delay_left_of_pole(self):
        r = MoebiusDelay(1.0)
        with pytest.raises(DomainError):
            r.delayed_point(-3.0)

    def test_zero_c_rejected(self):
        with pytest.raises(ParameterDomainError):
            MoebiusDelay(0.0)

    def test_derivative_matches_fd(self):
        r = MoebiusDelay(0.8)
        x, h = 0.4, 1e-7
        fd = (r.delayed_point(x + h) - r.delayed_point(x - h)) / (2 * h)
        assert r.derivative(x) == pytest.approx(fd, rel=1e-7)


class TestGeneral:
    def test_supplied_function(self):
        r = GeneralDelay(ex.parse("x - 1 - 0.1*sin(x)"))
        x = 2.0
        xm = r.delayed_point(x)
        assert xm == pytest.approx(2.0 - 1.0 - 0.1 * math.sin(2.0))
        fwd = r.advance(x)
        assert ex.evaluate(r.g, {"x": fwd}) == pytest.approx(x, abs=1e-12)

    def test_must_delay(self):
        r = GeneralDelay(ex.parse("x + 1"))
        with pytest.raises(DomainError):
            r.delayed_point(0.0)

    def test_only_x_allowed(self):
        with pytest.raises(ParameterDomainError):
            GeneralDelay(ex.parse("x - y", ("x", "y")))

    def test_not_monotone_detected(self):
        r = GeneralDelay(ex.parse("-x"), increasing=True)
        with pytest.raises(NotMonotone):
            r.advance(1.0)

    def test_declared_not_increasing(self):
        r = GeneralDelay(ex.parse("-0.5*x"), increasing=False)
        assert r.delayed_point(2.0) == -1.0
        with pytest.raises(NotMonotone):
            r.advance(2.0)

    def test_no_forward_point_for_bounded_g(self):
        # g saturates below 1, so no x+ has g(x+) = 1
        r = GeneralDelay(ex.parse("-1/(1 + x^2)"))
        with pytest.raises((NoForwardPoint, NotMonotone)):
            r.advance(1.0)


class TestScaleDelayFactory:
    def test_positive_fraction_is_qscale(self):
        assert isinstance(scale_delay(0.25), QScaleDelay)

    def test_negative_is_general_noninvertible(self):
        r = scale_delay(-0.5)
        assert isinstance(r, GeneralDelay)
        assert not r.increasing
        assert r.delayed_point(2.0) == -1.0

    def test_rejects_non_delaying(self):
        for bad in (0.0, 1.0, 2.0):
            with pytest.raises(ParameterDomainError):
                scale_delay(bad)


class TestDefaultDomain:
    def test_each_family(self):
        assert default_domain(ConstantDelay(1.0)) == (-INF, INF)
        assert default_domain(AffineDelay(1.0, 2.0)) == (-INF, INF)
        assert default_domain(AffineDelay(0.5, 1.0)) == (-2.0, INF)
        assert default_domain(AffineDelay(2.0, 1.0)) == (-INF, 1.0)
        assert default_domain(QScaleDelay(0.3)) == (0.0, INF)
        assert default_domain(MoebiusDelay(2.0)) == (-0.5, INF)
        assert default_domain(GeneralDelay(ex.parse("x - 1"))) == (-INF, INF)


class TestMesh:
    def test_mesh_validates_links(self):
        r = ConstantDelay(1.0)
        with pytest.raises(ParameterDomainError):
            Mesh((0.0, 1.0, 2.5), r)  # 2.5 - 1 != 1.0... g link broken
        with pytest.raises(ParameterDomainError):
            Mesh((0.0, 0.0, 1.0), r)  # not strictly increasing

    def test_build_mesh_needs_intervals(self):
        with pytest.raises(ParameterDomainError):
            build_mesh(ConstantDelay(1.0), 0.0, 0)

    def test_moebius_mesh_stops_at_pole(self):
        with pytest.raises(NoForwardPoint):
            build_mesh(MoebiusDelay(1.0), 0.9, 3)


class TestClosedFormPoint:
    def test_history_point(self):
        r = AffineDelay(0.5, 1.0)
        assert closed_form_point(r, 2.0, 0.0, -1) == 0.0

    def test_constant_exact(self):
        r = ConstantDelay(0.7)
        assert closed_form_point(r, 0.3, -0.4, 13) == 0.3 + 13 * 0.7

    def test_q1_exact(self):
        r = AffineDelay(1.0, 0.5)
        assert closed_form_point(r, 0.0, -0.5, 40) == 20.0

    def test_limit_point_for_contracting_mesh(self):
        # q = 2, tau = 1: meshes accumulate at tau/(q-1) = 1
        r = AffineDelay(2.0, 1.0)
        x50 = closed_form_point(r, 0.0, -1.0, 50)
        assert abs(x50 - 1.0) <= 1e-14

    def test_rejects_inconsistent_history(self):
        r = AffineDelay(2.0, 1.0)
        with pytest.raises(ParameterDomainError):
            closed_form_point(r, 0.0, -0.5, 3)

    def test_rejects_non_affine(self):
        with pytest.raises(ParameterDomainError):
            closed_form_point(MoebiusDelay(1.0), 0.5, MoebiusDelay(1.0).delayed_point(0.5), 2)

    def test_agrees_with_iterated_mesh(self):
        rng = random.Random(11)
        for _ in range(20):
            q = rng.uniform(0.2, 2.5)
            tau = rng.uniform(0.1, 3.0)
            x0 = rng.uniform(-1.0, 1.0)
            if q > 1 and x0 >= tau / (q - 1):
                x0 = tau / (q - 1) - 1.0
            elif q < 1 and x0 <= -tau / (1 - q) + 0.05:
                x0 = -tau / (1 - q) + 1.0
            r = AffineDelay(q, tau)
            mesh = build_mesh(r, x0, rng.randint(1, 30))
            xm1 = r.delayed_point(x0)
            for i, p in enumerate(mesh.points):
                c = closed_form_point(r, x0, xm1, i - 1)
                assert abs(c - p) <= 1e-12 * (1.0 + abs(p))

    @settings(max_examples=60, deadline=None)
    @given(
        q=st.floats(0.3, 2.0),
        tau=st.floats(0.1, 2.0),
        n=st.integers(1, 12),
    )
    def test_property_chain_consistency(self, q, tau, n):
        r = AffineDelay(q, tau)
        x0 = 0.0 if q <= 1 else min(0.0, tau / (q - 1) - 1.0)
        mesh = build_mesh(r, x0, n)
        xm1 = r.delayed_point(x0)
        # every interior point delays onto its predecessor
        for a, b in zip(mesh.points, mesh.points[1:]):
            assert r.delayed_point(b) == pytest.approx(a, rel=1e-12, abs=1e-12)
        c = closed_form_point(r, x0, xm1, n)
        assert c == pytest.approx(mesh.points[-1], rel=1e-12, abs=1e-12)


class TestParseDelaySpec:
    @pytest.mark.parametrize(
        "text,cls",
        [
            ("constant(1)", ConstantDelay),
            ("affine(0.5, 1.0)", AffineDelay),
            ("qscale(0.25)", QScaleDelay),
            ("moebius(2)", MoebiusDelay),
            ('general("x - 1 - 0.1*sin(x)")', GeneralDelay),
        ],
    )
    def test_families(self, text, cls):
        assert isinstance(parse_delay_spec(text), cls)

    def test_round_trip_through_spec_string(self):
        for text in ("constant(0.5)", "affine(2.0, 1.0)", "qscale(0.75)", "moebius(1.0)"):
            r = parse_delay_spec(text)
            again = parse_delay_spec(r.spec_string())
            assert again == r

    def test_general_round_trip(self):
        r = parse_delay_spec('general("x - 2")')
        assert parse_delay_spec(r.spec_string()).g == r.g

    def test_bad_forms(self):
        with pytest.raises((ParseError, ParameterDomainError)):
            parse_delay_spec("nosuch(1)")
        with pytest.raises((ParseError, ParameterDomainError)):
            parse_delay_spec("constant()")
        with pytest.raises((ParseError, ParameterDomainError)):
            parse_delay_spec("constant(-1)")
