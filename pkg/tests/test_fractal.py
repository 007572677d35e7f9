import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from horseshoe_lab.cantor import CantorApprox, IfsPair, refine
from horseshoe_lab.errors import DegenerateScales, EmptyInput
from horseshoe_lab.fractal import (PointCloud, Section, box_dimension, hausdorff_distance, omega_sets,
                                   render_pgm, resolved_horizon, sample_H, sample_invariant_set,
                                   theorem_b_from_sets, theorem_b_report)
from horseshoe_lab.fractal import _count_intervals
from horseshoe_lab.geometry import Interval
from horseshoe_lab.hmap import build_map, fixed_saddles


class TestBoxCounting:
    @given(st.lists(st.tuples(st.floats(0, 0.9), st.floats(1e-4, 0.1)), min_size=1, max_size=6),
           st.sampled_from([2.0 ** -k for k in range(3, 11)]))
    def test_interval_counts(self, raw, r):
        """Each interval of length l meets ceil(l/r) or ceil(l/r)+1 boxes; overlaps only reduce the total."""
        iv = np.array(sorted((a, a + w) for a, w in raw))
        n = _count_intervals(iv, r)
        upper = sum(math.ceil((b - a) / r) + 1 for a, b in iv)
        merged = [list(iv[0])]
        for a, b in iv[1:]:
            if a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        lower = max(math.ceil((b - a) / r) for a, b in merged)
        assert lower <= n <= upper
        assert abs(n - sum(math.ceil((b - a) / r) for a, b in merged)) <= 2 * len(merged)

    def test_middle_third_dimension(self):
        ifs = IfsPair.from_intervals(Interval(0, 1), Interval(0, 1 / 3), Interval(2 / 3, 1))
        scales = [3.0 ** -k for k in range(2, 11)]
        rep = box_dimension(refine(ifs, 14), scales)
        assert rep.slope == pytest.approx(math.log(2) / math.log(3), abs=1e-3)

    def test_filled_square(self):
        g = (np.arange(256) + 0.5) / 256
        pts = np.array([(x, y) for x in g for y in g])
        assert box_dimension(pts, [2.0 ** -k for k in range(2, 7)]).slope == pytest.approx(2, abs=0.05)

    def test_errors(self):
        with pytest.raises(EmptyInput):
            box_dimension(np.empty((0, 2)))
        with pytest.raises(DegenerateScales):
            box_dimension(np.array([[0.1, 0.2]]), [0.1, 0.1])


class TestSampling:
    def test_section_parse(self):
        assert Section.parse("u=1") == Section(0, 1.0)
        assert Section.parse({"axis": "x_s", "value": 0.5}).axis == 2

    def test_unstable_sample_monotone_in_horizon(self, ref0_map):
        P, _ = fixed_saddles(ref0_map)
        sec = Section(2, float(P[2]))
        counts = [len(sample_invariant_set(ref0_map, "unstable", sec, 128, n)) for n in (3, 5, 7)]
        assert counts[0] >= counts[1] >= counts[2] > 0

    def test_sample_H_monotone(self, ref0_map):
        sec = Section(0, 0.5)
        a = sample_H(ref0_map, sec, 128, 3, 3)
        b = sample_H(ref0_map, sec, 128, 6, 6)
        assert len(a) >= len(b)
        assert set(map(tuple, b.points)) <= set(map(tuple, a.points))

    def test_deterministic(self, ref0_map):
        sec = Section(0, 0.5)
        a = sample_H(ref0_map, sec, 64, 5, 5).points
        b = sample_H(ref0_map, sec, 64, 5, 5).points
        assert np.array_equal(a, b)

    def test_bad_which(self, ref0_map):
        with pytest.raises(ValueError):
            sample_invariant_set(ref0_map, "both", Section(0, 0.5), 8, 2)

    def test_pgm(self, tmp_path):
        cloud = PointCloud(np.array([[1.0, 0.0, 0.0], [1.0, 1.0, 1.0]]), Section(0, 1.0), {"grid": 4})
        render_pgm(cloud, tmp_path / "x.pgm")
        data = (tmp_path / "x.pgm").read_bytes()
        assert data.startswith(b"P5\n4 4\n255\n")
        img = np.frombuffer(data[len(b"P5\n4 4\n255\n"):], dtype=np.uint8).reshape(4, 4)
        assert (img == 0).sum() == 2
        assert img[3, 0] == 0 and img[0, 3] == 0

    def test_resolved_horizon(self):
        assert resolved_horizon(0.45, 1024) == 8
        assert resolved_horizon(0.45, 10 ** 9) == 12


class TestOmega:
    def test_affine_exact(self, ref0_map):
        om = omega_sets(ref0_map, 6)
        assert len(om.omega1) == 64 and len(om.omega2) == 64
        assert om.method.startswith("affine")

    def test_numerical_matches_exact(self, ref0_map):
        a = omega_sets(ref0_map, 5)
        b = omega_sets(ref0_map, 5, exact_affine=False)
        assert hausdorff_distance(a.omega1, b.omega1) < 1e-9
        assert hausdorff_distance(a.omega2, b.omega2) < 1e-9

    def test_hausdorff(self):
        a = CantorApprox(np.array([[0.0, 1.0]]), 0)
        b = CantorApprox(np.array([[0.0, 0.2], [0.8, 1.0]]), 0)
        assert hausdorff_distance(a, b) == pytest.approx(0.3)
        assert hausdorff_distance(a, a) == 0


class TestTheoremB:
    def test_applies_for_small_tau0(self, ref0_sys, ref0_map):
        rep = theorem_b_report(ref0_sys, ref0_map, depth=8, tau0=1.0)
        assert rep.applicable
        assert all(v == "holds" for v in rep.verdicts.values()), rep.verdicts

    def test_not_applicable_for_large_tau0(self, ref0_sys, ref0_map):
        rep = theorem_b_report(ref0_sys, ref0_map, depth=8, tau0=100.0)
        assert not rep.applicable
        assert set(rep.verdicts.values()) == {"not-applicable"}


def test_figure4_cloud_nonempty(fig4_sys):
    m = build_map(fig4_sys, require_valid=False)
    cloud = sample_H(m, Section.parse("u=1"), 256, 8, 8)
    assert len(cloud) > 0
