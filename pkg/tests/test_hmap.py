import numpy as np
import pytest
from hypothesis import given, strategies as st

from horseshoe_lab.errors import InvalidSigns, InvalidSystem, OutOfDomain, PerturbationTooLarge
from horseshoe_lab.fixtures import REF0, ref0
from horseshoe_lab.geometry import BlockSystem, rates
from horseshoe_lab.hmap import (Perturbation, analytic_cone_margins, build_map, cone_check, fixed_saddles,
                                itinerary, philox)

LETTERS = "ABCD"


def _points_in_domains(m, n, seed):
    rng = philox(seed, 7)
    blocks = [m.system.block(k) for k in LETTERS]
    k = rng.integers(0, 4, n)
    lo = np.array([b.lo for b in blocks])[k]
    hi = np.array([b.hi for b in blocks])[k]
    return lo + (hi - lo) * rng.random((n, 3))


def test_saddles_ref0(ref0_map):
    P, Q = fixed_saddles(ref0_map)
    assert P == pytest.approx([0.07, 0.0, 0.1 / 0.85], abs=1e-12)
    assert Q == pytest.approx([0.89, 1.0, 0.875], abs=1e-12)
    assert np.allclose(ref0_map.apply(P), P, atol=1e-13)


def test_round_trip_affine(ref0_map):
    pts = _points_in_domains(ref0_map, 100_000, 0)
    img, idx = ref0_map.apply_many(pts)
    assert (idx >= 0).all()
    back, _ = ref0_map.apply_inverse_many(img)
    assert np.max(np.abs(back - pts)) <= 1e-12


def test_round_trip_perturbed(ref0_sys):
    m = build_map(ref0_sys, pert=Perturbation.generate(ref0_sys, 1e-3, seed=3))
    pts = _points_in_domains(m, 20_000, 1)
    img, _ = m.apply_many(pts)
    back, _ = m.apply_inverse_many(img)
    assert np.max(np.abs(back - pts)) <= 1e-12


def test_out_of_domain(ref0_map):
    with pytest.raises(OutOfDomain):
        ref0_map.apply([0.99, 0.5, 0.5])
    with pytest.raises(OutOfDomain):
        ref0_map.apply_inverse([0.0, 0.5, 0.99])
    out, idx = ref0_map.apply_many([[0.99, 0.5, 0.5]])
    assert idx[0] == -1 and np.isnan(out).all()


def test_branches_send_domains_to_images(ref0_map):
    sysm = ref0_map.system
    for name, img in zip(LETTERS, ("Astar", "Bstar", "Cstar", "Dstar")):
        b = sysm.block(name)
        corners = np.array([[x, y, z] for x in b.u.as_list() for y in b.c.as_list() for z in b.s.as_list()])
        k = np.full(len(corners), LETTERS.index(name))
        assert sysm.block(img).contains_points(ref0_map.forward(corners, k), 1e-12).all()


@pytest.mark.parametrize("signs", [{"A": (1, 1, -1)}, {"B": (-1, -1, 1), "C": (1, -1, -1)}])
def test_orientation_signs(ref0_sys, signs):
    m = build_map(ref0_sys, signs)
    pts = _points_in_domains(m, 2000, 2)
    img, _ = m.apply_many(pts)
    back, _ = m.apply_inverse_many(img)
    assert np.max(np.abs(back - pts)) <= 1e-12
    dets = m.determinant_signs()
    for name, sg in signs.items():
        assert dets[name] == int(np.prod(sg))


@pytest.mark.parametrize("bad", [{"E": (1, 1, 1)}, {"A": (1, 1)}, {"A": (1, 0, 1)}, {"A": (True, 1, 1)}])
def test_invalid_signs(ref0_sys, bad):
    with pytest.raises(InvalidSigns):
        build_map(ref0_sys, bad)


def test_invalid_system_rejected(fig4_sys):
    with pytest.raises(InvalidSystem):
        build_map(fig4_sys)
    assert build_map(fig4_sys, require_valid=False) is not None


def test_perturbation_too_large(ref0_sys):
    with pytest.raises(PerturbationTooLarge):
        build_map(ref0_sys, pert=Perturbation.generate(ref0_sys, 0.05, seed=0))


def test_perturbation_deterministic(ref0_sys):
    a = Perturbation.generate(ref0_sys, 1e-3, seed=5).to_dict()
    b = Perturbation.generate(ref0_sys, 1e-3, seed=5).to_dict()
    c = Perturbation.generate(ref0_sys, 1e-3, seed=6).to_dict()
    assert a == b and a != c
    assert Perturbation.from_dict(ref0_sys, {"amplitude": 1e-3, "seed": 5}).to_dict() == a


@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 10_000))
def test_itinerary_shift(nb, nf, seed):
    """The forward itinerary of f(p) is that of p with its first letter dropped."""
    m = build_map(ref0())
    p = _points_in_domains(m, 1, seed)[0]
    it = itinerary(m, p, nb, nf + 1)
    if it.escaped_forward or not it.forward:
        return
    q = m.apply(p)
    it_q = itinerary(m, q, nb, nf)
    assert it_q.forward == it.forward[1:nf + 1]
    if not it_q.escaped_backward and nb:
        assert it_q.backward[0] == it.forward[0]


def test_fixed_point_itinerary(ref0_map):
    P, Q = fixed_saddles(ref0_map)
    assert itinerary(ref0_map, P, 5, 5).forward == "AAAAA"
    assert itinerary(ref0_map, Q, 5, 5).backward == "CCCCC"


class TestCones:
    def test_ref0_passes(self, ref0_map):
        rep = cone_check(ref0_map, 0.05)
        assert rep.passed, rep.failing()

    def test_sampled_match_analytic(self, ref0_map, ref0_sys):
        rep = cone_check(ref0_map, 0.05)
        ana = analytic_cone_margins(rates(ref0_sys), 0.05, rep.eps)
        for key, v in ana.items():
            assert rep.margins[key] == pytest.approx(v, abs=1e-10)

    def test_weak_u_rate_fails(self):
        d = {k: [list(p) for p in v] for k, v in REF0.items()}
        d["Astar"][0] = [0.2, 0.47]
        d["Dstar"][0] = [0.2, 0.47]
        m = build_map(BlockSystem.from_dict(d), require_valid=False)
        rep = cone_check(m, 0.05)
        assert not rep.passed
        assert "c:Df|Cu" in rep.failing()

    def test_perturbed_passes(self, ref0_sys):
        m = build_map(ref0_sys, pert=Perturbation.generate(ref0_sys, 1e-4, seed=0))
        assert cone_check(m, 0.05).passed
