"""The ten acceptance criteria, each at its stated tolerance.

Every test records a PASS/FAIL line that is printed in the terminal summary.
"""
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import record
from horseshoe_lab.cantor import (IfsPair, gap_lemma, gap_monotone, ifs_from_gamma, ifs_from_sigma, intersect,
                                  newhouse_dim_lower, refine, selfsimilar_thickness, thickness)
from horseshoe_lab.cli import run
from horseshoe_lab.fixtures import ref0, ref0_b1
from horseshoe_lab.fractal import box_dimension, omega_sets, theorem_a_report
from horseshoe_lab.geometry import Interval, shape_constants
from horseshoe_lab.hmap import Perturbation, build_map, philox
from horseshoe_lab.surfaces import graph_transform_cu

# seed 4 is one whose bumps deform both invariant surfaces (several seeds barely touch them)
SEED = 4
CONFIGS = Path(__file__).resolve().parent.parent / "configs"
P_S = 0.1 / 0.85


def _middle(alpha):
    r = (1 - alpha) / 2
    return IfsPair.from_intervals(Interval(0, 1), Interval(0, r), Interval(1 - r, 1))


def test_criterion_1_thickness_oracle():
    t0 = time.perf_counter()
    err3 = abs(thickness(refine(_middle(1 / 3), 12)).tau - 1.0)
    errs = {a: abs(thickness(refine(_middle(a), 12)).tau - (1 - a) / (2 * a)) for a in (0.1, 1 / 3, 0.5)}
    dt = time.perf_counter() - t0
    ok = err3 <= 1e-12 and max(errs.values()) <= 1e-9 and dt < 1.0
    record(1, ok, f"middle-third err {err3:.2e}, middle-alpha max err {max(errs.values()):.2e}, {dt:.2f}s")
    assert ok


def test_criterion_2_ref0_cantor():
    t0 = time.perf_counter()
    sysm = ref0()
    ifs = ifs_from_gamma(sysm)
    taus = [thickness(refine(ifs, d)).tau for d in range(2, 15)]
    ss = selfsimilar_thickness(ifs)
    k = shape_constants(sysm)
    dt = time.perf_counter() - t0
    err = max(abs(t - 4.5) for t in taus)
    ok = err <= 1e-9 and abs(ss - 4.5) <= 1e-9 and k.a1 == 3.5 and min(taus) > k.a1 and dt < 5.0
    record(2, ok, f"max |tau-4.5| {err:.2e} over d=2..14, selfsimilar {ss!r}, a1 {k.a1!r}, {dt:.2f}s")
    assert ok


def test_criterion_3_newhouse():
    target = math.log(2) / math.log(2 + 2 / 9)
    nd = newhouse_dim_lower(4.5)
    bd = box_dimension(refine(ifs_from_gamma(ref0()), 14)).slope
    ok = abs(nd - target) <= 1e-12 and abs(bd - nd) <= 0.02
    record(3, ok, f"newhouse {nd:.12f} (target {target:.12f}), box dim {bd:.4f}")
    assert ok


def test_criterion_4_theorem_a():
    t0 = time.perf_counter()
    sysm = ref0()
    rep = theorem_a_report(sysm, build_map(sysm), depth=12, grid=1024)
    dt = time.perf_counter() - t0
    m = rep.measured
    wu = m["Wu_section"]["box"]["slope"]
    hd = m["H_section_box"]["slope"]
    checks = {
        "hypotheses": rep.applicable,
        "gap_lemma": m["gap_lemma"]["verdict"] == "applies",
        "nonempty": len(m["intersection_nonempty_by_depth"]) >= 12 and all(m["intersection_nonempty_by_depth"]),
        "chain": 8 / 4.5 < wu < 2 and abs(wu - 1.868) <= 0.03,
        "dim_H": hd < 1,
        "runtime": dt < 60,
    }
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    record(4, ok, f"Wu box {wu:.4f}, H box {hd:.4f}, {dt:.1f}s" + (f", failed {failed}" if failed else ""))
    assert ok


def test_criterion_5_discrepancy_fixture():
    sysm = ref0_b1()
    rep = theorem_a_report(sysm, build_map(sysm), depth=12, grid=256)
    side = rep.measured["thickness"]["omega1"]
    k = shape_constants(sysm)
    ok = (abs(side["tau"] - 4.5) <= 1e-9 and k.a1 == 7 and k.a1_eff == 3.5
          and side["a"] == 7 and side["a_eff"] == 3.5 and side["tau_below_a"]
          and any("below a" in n for n in rep.notes))
    record(5, ok, f"tau {side['tau']:.10f}, a1 {side['a']}, a1_eff {side['a_eff']}, flagged {side['tau_below_a']}")
    assert ok


def test_criterion_6_figure4(tmp_path, capsys):
    cfg = str(CONFIGS / "figure4.json")
    out = str(tmp_path)
    t0 = time.perf_counter()
    code = run(["render", cfg, "--output-dir", out, "--quiet"])
    dt = time.perf_counter() - t0
    doc = json.loads((tmp_path / "render.json").read_text())["result"]
    pgm = (tmp_path / "render_H.pgm").read_bytes()
    code_v = run(["validate", cfg, "--output-dir", out, "--quiet"])
    reducible = json.loads((tmp_path / "validate.json").read_text())["result"]["dimension_reducible"]
    code_c = run(["constants", cfg, "--output-dir", out])
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    ok = (code == 0 and doc["points"] > 1000 and pgm.startswith(b"P5\n1024 1024\n") and "slope" in doc["box"]
          and dt < 60 and code_v == 0 and reducible is False and code_c == 1 and err["error"] == "DegenerateGap")
    record(6, ok, f"{doc['points']} points, box dim {doc['box'].get('slope', float('nan')):.3f}, {dt:.1f}s, "
                  f"constants -> {err['error']}")
    assert ok


def test_criterion_7_graph_transform():
    sysm = ref0()
    phi = graph_transform_cu(build_map(sysm))
    err = float(np.max(np.abs(phi.values - P_S)))
    ratios = [e["ratio"] for e in phi.log[1:] if e["ratio"] is not None]
    contraction_ok = all(abs(r - 0.15) <= 0.05 * 0.15 for r in ratios)
    mp = build_map(sysm, pert=Perturbation.generate(sysm, 1e-3, seed=SEED))
    phip = graph_transform_cu(mp)
    budget = phip.derivative_budget()
    dev = float(np.max(np.abs(phip.values - P_S)))
    ok = err <= 1e-10 and len(phi.log) <= 60 and contraction_ok and budget < 0.1 and dev < 5e-3
    record(7, ok, f"affine err {err:.1e} in {len(phi.log)} iterations, ratios {min(ratios):.4f}..{max(ratios):.4f}; "
                  f"perturbed budget {budget:.3g}, deviation {dev:.1e}")
    assert ok


def test_criterion_8_robustness():
    sysm = ref0()
    m = build_map(sysm, pert=Perturbation.generate(sysm, 1e-3, seed=SEED))
    om = omega_sets(m, 10)
    t1, t2 = thickness(om.omega1).tau, thickness(om.omega2).tau
    gl = gap_lemma(om.omega1, om.omega2)
    inter = intersect(om.omega1, om.omega2)
    ok = abs(t1 - 4.5) <= 0.2 and abs(t2 - 4.5) <= 0.2 and gl.applies and not inter.empty
    record(8, ok, f"tau1 {t1:.5f}, tau2 {t2:.5f}, gap lemma {gl.verdict}, {len(inter)} intersection intervals")
    assert ok


def _random_equal_scale_ifs(rng):
    lam = rng.uniform(0.2, 0.45)
    lo, L = rng.uniform(-0.3, 0.3), rng.uniform(0.7, 1.3)
    # each end trim at most 0.4 of the free length, so the images never touch
    t0, t1 = rng.uniform(0, 0.4 * (1 - 2 * lam), 2) * L
    r = lam * L
    return IfsPair.from_intervals(Interval(lo, lo + L), Interval(lo + t0, lo + t0 + r),
                                  Interval(lo + L - t1 - r, lo + L - t1), tuple(rng.choice([-1, 1], 2)))


def test_criterion_9_properties():
    rng = philox(9, 0)
    accepted = empty = 0
    while accepted < 200:
        S1, S2 = refine(_random_equal_scale_ifs(rng), 12), refine(_random_equal_scale_ifs(rng), 12)
        if not gap_lemma(S1, S2).applies:
            continue
        accepted += 1
        empty += intersect(S1, S2).empty

    scans = mono_fail = 0
    while scans < 50:
        ifs = _random_equal_scale_ifs(rng)
        if not abs(ifs.scales[0]) * (1 + ifs.shape_b()) < 1:
            continue
        scans += 1
        mono_fail += not gap_monotone(ifs, 10)

    S = refine(ifs_from_gamma(ref0()), 12)
    tau0 = thickness(S).tau
    worst = 0.0
    for _ in range(100):
        alpha = rng.uniform(0.1, 10) * rng.choice([-1, 1])
        worst = max(worst, abs(thickness(S.affine(alpha, rng.uniform(-10, 10))).tau - tau0))

    ok = empty == 0 and mono_fail == 0 and worst <= 1e-12
    record(9, ok, f"gap lemma {accepted - empty}/{accepted} non-empty; monotone {scans - mono_fail}/{scans}; "
                  f"affine invariance max err {worst:.1e}")
    assert ok


def test_criterion_10_determinism(tmp_path):
    cfg = str(CONFIGS / "ref0.json")
    outs = []
    for k in range(2):
        assert run(["theorem-a", cfg, "--output-dir", str(tmp_path / str(k)), "--quiet"]) == 0
        outs.append((tmp_path / str(k) / "theorem-a.json").read_bytes())
    m = build_map(ref0())
    rng = philox(10, 0)
    k = rng.integers(0, 4, 100_000)
    blocks = [m.system.block(n) for n in "ABCD"]
    lo = np.array([b.lo for b in blocks])[k]
    hi = np.array([b.hi for b in blocks])[k]
    pts = lo + (hi - lo) * rng.random((100_000, 3))
    img, _ = m.apply_many(pts)
    back, _ = m.apply_inverse_many(img)
    rt = float(np.max(np.abs(back - pts)))
    ok = outs[0] == outs[1] and rt <= 1e-12
    record(10, ok, f"theorem-a JSON identical: {outs[0] == outs[1]}, round trip max err {rt:.1e}")
    assert ok
