import numpy as np
import pytest

from horseshoe_lab.errors import NoConvergence
from horseshoe_lab.hmap import Perturbation, build_map, fixed_saddles
from horseshoe_lab.surfaces import (graph_transform_cs, graph_transform_cu, image_height, invariance_defect,
                                    section_line)

P_S = 0.1 / 0.85


@pytest.fixture(scope="module")
def affine_surfaces(ref0_map):
    return graph_transform_cu(ref0_map, resolution=33), graph_transform_cs(ref0_map, resolution=33)


@pytest.fixture(scope="module")
def perturbed(ref0_sys):
    m = build_map(ref0_sys, pert=Perturbation.generate(ref0_sys, 1e-3, seed=4))
    return m, graph_transform_cu(m, resolution=65), graph_transform_cs(m, resolution=65)


def test_affine_cu_is_flat(affine_surfaces):
    phi, _ = affine_surfaces
    assert np.max(np.abs(phi.values - P_S)) < 1e-10
    ratios = [e["ratio"] for e in phi.log[1:]]
    assert all(abs(r - 0.15) < 0.0075 for r in ratios)


def test_affine_cs_is_flat(affine_surfaces, ref0_map):
    _, phis = affine_surfaces
    _, Q = fixed_saddles(ref0_map)
    assert np.max(np.abs(phis.values - Q[0])) < 1e-10
    assert phis.log[-1]["ratio"] == pytest.approx(1 / 6, rel=0.05)


def test_affine_invariance(affine_surfaces, ref0_map):
    for g in affine_surfaces:
        assert invariance_defect(ref0_map, g) < 1e-10
        assert g.derivative_budget() < 1e-8
        assert g.precondition_ok


def test_perturbed_small(perturbed):
    m, phi, phis = perturbed
    assert phi.derivative_budget() < 0.1
    assert phis.derivative_budget() < 0.1
    assert np.max(np.abs(phi.values - P_S)) < 5e-3
    # bilinear interpolation of the grid limits the defect, not the iteration
    assert invariance_defect(m, phi) < 1e-6
    assert invariance_defect(m, phis) < 1e-6


def test_initial_guess_irrelevant(ref0_map):
    a = graph_transform_cu(ref0_map, resolution=9, initial=0.11)
    b = graph_transform_cu(ref0_map, resolution=9, initial=0.24)
    assert np.max(np.abs(a.values - b.values)) < 1e-10


def test_no_convergence(ref0_map):
    with pytest.raises(NoConvergence):
        graph_transform_cu(ref0_map, resolution=9, max_iter=3)


def test_section_line_affine(affine_surfaces, ref0_map):
    phi, phis = affine_surfaces
    line = section_line(ref0_map, phi, phis)
    assert len(line.segments) == 2
    for seg in line.segments:
        assert np.allclose(seg.points[:, 0], 0.89, atol=1e-10)
        assert np.allclose(seg.points[:, 2], P_S, atol=1e-10)
    c = np.array([0.2, 0.7])
    s = line.arclength_of(c)
    assert np.all(np.diff(s) > 0)


def test_image_height_matches_surface(affine_surfaces, ref0_map):
    phi, _ = affine_surfaces
    q = np.array([[0.5, 0.2], [0.2, 0.8]])
    assert np.allclose(image_height(ref0_map, phi, q), P_S, atol=1e-10)


def test_artifacts(tmp_path, affine_surfaces):
    phi, _ = affine_surfaces
    phi.to_csv(tmp_path / "phi.csv")
    lines = (tmp_path / "phi.csv").read_text().splitlines()
    assert len(lines) == 1 + phi.values.size
    assert '"iterations"' in phi.log_json()
