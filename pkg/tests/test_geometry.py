import math

import pytest
from hypothesis import given, strategies as st

from horseshoe_lab.errors import ConfigError, DegenerateGap
from horseshoe_lab.fixtures import REF0
from horseshoe_lab.geometry import (Block, BlockSystem, Interval, binding_constraint, dimension_reducible,
                                    epsilon_margin, penetrates, rates, shape_constants, validate_system)


def box(u, c, s):
    return Block.from_lists([u, c, s])


class TestPenetration:
    def test_crossing_along_one_axis(self):
        assert penetrates(box([0, 1], [0.4, 0.6], [0.4, 0.6]), box([0.2, 0.8], [0, 1], [0, 1]))

    def test_not_spanning(self):
        assert not penetrates(box([0.3, 1], [0.4, 0.6], [0.4, 0.6]), box([0.2, 0.8], [0, 1], [0, 1]))

    def test_spanning_two_axes_is_not_penetration(self):
        assert not penetrates(box([0, 1], [0, 1], [0.4, 0.6]), box([0.2, 0.8], [0.2, 0.8], [0, 1]))

    def test_flush_transverse_face(self):
        X, Y = box([0, 1], [0, 0.5], [0.4, 0.6]), box([0.2, 0.8], [0, 1], [0, 1])
        assert penetrates(X, Y)
        assert not penetrates(X, Y, strict=True)

    def test_touching_spanning_face_fails(self):
        assert not penetrates(box([0.2, 1], [0.4, 0.6], [0.4, 0.6]), box([0.2, 0.8], [0, 1], [0, 1]))


class TestReference:
    def test_ref0_valid(self, ref0_sys):
        rep = validate_system(ref0_sys)
        assert rep.valid, rep.to_dict()

    def test_ref0_rates(self, ref0_sys):
        r = rates(ref0_sys)
        assert r.lam == pytest.approx((3, 0.45, 0.15), abs=1e-12)
        assert r.mu == pytest.approx((6, 1 / 0.45, 0.2), abs=1e-12)
        assert r.is_horseshoe_shaped()
        assert dimension_reducible(r)

    def test_ref0_shape_constants(self, ref0_sys):
        k = shape_constants(ref0_sys)
        assert k.a1 == pytest.approx(3.5, abs=1e-12)
        assert k.a2 == pytest.approx(3.5, abs=1e-12)
        assert k.b1 == pytest.approx(0, abs=1e-12)
        assert k.b2 == pytest.approx(0, abs=1e-12)

    def test_ref0_epsilon(self, ref0_sys):
        r, k = rates(ref0_sys), shape_constants(ref0_sys)
        assert epsilon_margin(r, k) == pytest.approx(0.05, abs=1e-12)
        assert binding_constraint(r, k) == "lam_c<1/2"

    def test_b1_variant(self, b1_sys):
        assert validate_system(b1_sys).valid
        k = shape_constants(b1_sys)
        assert (k.a1, k.b1, k.a1_eff) == pytest.approx((7, 1, 3.5), abs=1e-12)

    def test_figure4_caption(self, fig4_sys):
        rep = validate_system(fig4_sys)
        assert not dimension_reducible(rates(fig4_sys))
        assert rep.to_dict()
        with pytest.raises(DegenerateGap):
            shape_constants(fig4_sys)


class TestInput:
    def test_missing_block(self):
        d = dict(REF0)
        del d["A"]
        with pytest.raises(ConfigError):
            BlockSystem.from_dict(d)

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), "x", None])
    def test_non_finite(self, bad):
        d = {k: [list(p) for p in v] for k, v in REF0.items()}
        d["A"][0][0] = bad
        with pytest.raises(ConfigError):
            BlockSystem.from_dict(d)

    def test_inverted_interval(self):
        d = {k: [list(p) for p in v] for k, v in REF0.items()}
        d["A"][0] = [0.36, 0.06]
        with pytest.raises(ConfigError):
            BlockSystem.from_dict(d)

    def test_round_trip(self, ref0_sys):
        assert BlockSystem.from_dict(ref0_sys.to_dict()) == ref0_sys


@given(alpha=st.floats(0.2, 5), beta=st.floats(-3, 3))
def test_shape_constants_invariant_under_c_rescaling(alpha, beta):
    sysm = BlockSystem.from_dict(REF0)
    k0 = shape_constants(sysm)
    k1 = shape_constants(sysm.map_c_axis(alpha, beta))
    for a, b in ((k0.a1, k1.a1), (k0.a2, k1.a2), (k0.b1, k1.b1), (k0.b2, k1.b2)):
        assert math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-9)


def test_interval_ops():
    a, b = Interval(0, 1), Interval(0.25, 0.5)
    assert b.inside(a) and b.strictly_inside(a)
    assert not a.inside(b)
    assert a.hull(Interval(2, 3)).as_list() == [0, 3]
