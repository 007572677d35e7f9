"""Box counting, section sampling of invariant sets, the Cantor sets
Omega_1 / Omega_2 on the section line, and the Theorem A / B desk reports."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .cantor import (CantorApprox, gap_lemma, ifs_from_gamma, ifs_from_sigma, intersect, merge_intervals,
                     newhouse_dim_lower, refine, thickness)
from .errors import DegenerateGap, DegenerateScales, EmptyInput, InsufficientGaps, LabError
from .geometry import AXES, BlockSystem, dimension_reducible, rates, shape_constants
from .hmap import CoupledMap, fixed_saddles
from .surfaces import SectionLine, graph_transform_cs, graph_transform_cu, section_line

DEFAULT_SCALES = tuple(2.0 ** -k for k in range(4, 13))
EDGE_SNAP = 1e-9


# ---------------------------------------------------------------------------
# box counting

@dataclass
class PointCloud:
    points: np.ndarray
    section: Optional["Section"] = None
    params: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("x_u,x_c,x_s\n")
            for p in self.points:
                fh.write(f"{p[0]!r},{p[1]!r},{p[2]!r}\n")


@dataclass
class BoxCountReport:
    scales: list
    counts: list
    slope: float
    r2: float
    fit_range: tuple

    def to_dict(self) -> dict:
        return {"scales": self.scales, "counts": self.counts, "slope": self.slope, "r2": self.r2,
                "fit_range": list(self.fit_range)}


def _count_intervals(iv: np.ndarray, r: float) -> int:
    lo = np.floor(iv[:, 0] / r + EDGE_SNAP).astype(np.int64)
    hi = np.ceil(iv[:, 1] / r - EDGE_SNAP).astype(np.int64) - 1
    hi = np.maximum(hi, lo)
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    prev = np.concatenate([[np.iinfo(np.int64).min], np.maximum.accumulate(hi)[:-1]])
    return int(np.sum(np.maximum(0, hi - np.maximum(lo - 1, prev))))


def _count_points(pts: np.ndarray, r: float) -> int:
    keys = np.floor(pts / r + EDGE_SNAP).astype(np.int64)
    return int(len(np.unique(keys, axis=0)))


def cloud_scales(grid: int) -> tuple:
    """Dyadic scales no finer than four grid spacings."""
    return tuple(s for s in DEFAULT_SCALES if s >= 4.0 / max(grid, 1)) or (DEFAULT_SCALES[0],)


def box_dimension(data: Union[PointCloud, CantorApprox, np.ndarray], scales: Optional[Sequence[float]] = None,
                  exclude_coarsest: Optional[int] = None) -> BoxCountReport:
    """Least-squares slope of log N(r) against log(1/r).

    With the default scale set the two coarsest scales are left out of the
    fit; explicit scales are all fitted unless ``exclude_coarsest`` says
    otherwise.
    """
    if scales is None:
        scales = DEFAULT_SCALES
        if isinstance(data, PointCloud) and "grid" in data.params:
            scales = cloud_scales(int(data.params["grid"]))
        exclude = 2 if exclude_coarsest is None else exclude_coarsest
    else:
        exclude = 0 if exclude_coarsest is None else exclude_coarsest
    scales = sorted((float(s) for s in scales), reverse=True)
    if isinstance(data, CantorApprox):
        if data.empty:
            raise EmptyInput("no intervals to count")
        iv = np.asarray(data.intervals, dtype=float)
        counts = [_count_intervals(iv, r) for r in scales]
    else:
        pts = data.points if isinstance(data, PointCloud) else np.asarray(data, dtype=float)
        if len(pts) == 0:
            raise EmptyInput("no points to count")
        pts = pts.reshape(len(pts), -1)
        counts = [_count_points(pts, r) for r in scales]
    fit_s = scales[exclude:] if len(scales) - exclude >= 2 else scales
    fit_c = counts[len(scales) - len(fit_s):]
    if len(set(fit_s)) < 2:
        raise DegenerateScales("need at least two distinct scales")
    x = np.log(1.0 / np.asarray(fit_s))
    y = np.log(np.asarray(fit_c, dtype=float))
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss == 0 else max(0.0, 1 - float(np.sum(resid ** 2)) / ss)
    return BoxCountReport(scales, counts, float(slope), r2, (fit_s[0], fit_s[-1]))


# ---------------------------------------------------------------------------
# section sampling

@dataclass(frozen=True)
class Section:
    """Axis-aligned plane ``x_axis = value``; the free axes span ``bounds``."""
    axis: int
    value: float
    bounds: tuple = ((0.0, 1.0), (0.0, 1.0))

    @classmethod
    def parse(cls, spec) -> "Section":
        """Accepts ``{"axis": "u", "value": 1.0}`` or ``"u=1"``."""
        if isinstance(spec, str):
            ax, val = spec.split("=")
            spec = {"axis": ax.strip(), "value": float(val)}
        ax = spec["axis"]
        ax = AXES.index(ax.replace("x_", "")) if isinstance(ax, str) else int(ax)
        bounds = tuple(tuple(b) for b in spec.get("bounds", ((0.0, 1.0), (0.0, 1.0))))
        return cls(ax, float(spec["value"]), bounds)

    @property
    def free_axes(self) -> tuple:
        return tuple(a for a in range(3) if a != self.axis)

    def grid(self, n: int) -> np.ndarray:
        if n <= 0:
            return np.empty((0, 3))
        a = np.linspace(*self.bounds[0], n)
        b = np.linspace(*self.bounds[1], n)
        A, B = np.meshgrid(a, b, indexing="ij")
        pts = np.empty((A.size, 3))
        pts[:, self.axis] = self.value
        pts[:, self.free_axes[0]] = A.ravel()
        pts[:, self.free_axes[1]] = B.ravel()
        return pts

    def to_dict(self) -> dict:
        return {"axis": AXES[self.axis], "value": self.value, "bounds": [list(b) for b in self.bounds]}


_R1_BRANCHES = (0, 3)   # A, D
_R2_BRANCHES = (1, 2)   # B, C


def _survives(m: CoupledMap, pts: np.ndarray, n: int, transient: int, backward: bool) -> np.ndarray:
    """Orbit stays defined for ``n`` steps and every step from ``transient``
    on uses an R1 branch (backward) or an R2 branch (forward)."""
    alive = np.ones(len(pts), dtype=bool)
    cur = pts.copy()
    late = _R1_BRANCHES if backward else _R2_BRANCHES
    for k in range(1, n + 1):
        ids = np.flatnonzero(alive)
        if len(ids) == 0:
            break
        nxt, idx = (m.apply_inverse_many if backward else m.apply_many)(cur[ids])
        ok = idx >= 0
        if k >= transient:
            ok &= np.isin(idx, late)
        alive[ids[~ok]] = False
        cur[ids[ok]] = nxt[ok]
    return alive


def sample_invariant_set(m: CoupledMap, which: str, section: Section, grid: int, n: int,
                         transient: int = 3, chunk: int = 1 << 18) -> PointCloud:
    """``which`` is ``"unstable"`` (backward criterion, W^u(Gamma)) or
    ``"stable"`` (forward criterion, W^s(Sigma))."""
    if which not in ("unstable", "stable"):
        raise ValueError("which must be 'unstable' or 'stable'")
    pts = section.grid(grid)
    keep = np.zeros(len(pts), dtype=bool)
    for s in range(0, len(pts), chunk):
        keep[s:s + chunk] = _survives(m, pts[s:s + chunk], n, transient, which == "unstable")
    return PointCloud(pts[keep], section, {"grid": grid, "n": n, "transient": transient, "which": which})


def sample_H(m: CoupledMap, section: Section, grid: int, n_fwd: int, n_back: int,
             transient: int = 3, chunk: int = 1 << 18) -> PointCloud:
    pts = section.grid(grid)
    keep = np.zeros(len(pts), dtype=bool)
    for s in range(0, len(pts), chunk):
        p = pts[s:s + chunk]
        ok = _survives(m, p, n_back, transient, True)
        ok[ok] = _survives(m, p[ok], n_fwd, transient, False)
        keep[s:s + chunk] = ok
    return PointCloud(pts[keep], section, {"grid": grid, "n_fwd": n_fwd, "n_back": n_back,
                                           "transient": transient})


def render_pgm(cloud: PointCloud, path, size: Optional[int] = None) -> None:
    """Binary PGM (P5) of the cloud on its section; members are black (0)."""
    sec = cloud.section
    n = size or int(cloud.params.get("grid", 512)) or 1
    img = np.full((n, n), 255, dtype=np.uint8)
    if len(cloud) and sec is not None:
        a0, a1 = sec.free_axes
        (l0, h0), (l1, h1) = sec.bounds
        col = np.clip(np.rint((cloud.points[:, a0] - l0) / (h0 - l0) * (n - 1)), 0, n - 1).astype(int)
        row = np.clip(np.rint((h1 - cloud.points[:, a1]) / (h1 - l1) * (n - 1)), 0, n - 1).astype(int)
        img[row, col] = 0
    with open(path, "wb") as fh:
        fh.write(f"P5\n{n} {n}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


# ---------------------------------------------------------------------------
# Omega sets on the section line

@dataclass
class OmegaSets:
    omega1: CantorApprox
    omega2: CantorApprox
    line: SectionLine
    levels1: list
    levels2: list
    method: str

    def to_dict(self) -> dict:
        return {"method": self.method, "line": self.line.to_dict(), "depth": self.omega1.depth,
                "omega1_intervals": len(self.omega1), "omega2_intervals": len(self.omega2)}


def _c_levels(m: CoupledMap, line: SectionLine, depth: int, side: int, surf) -> list:
    """c-parameter intervals of L whose backward (side 1) / forward (side 2)
    orbit stays in the coupling images / domains for 1..depth steps.

    Every level-j interval is split by locating, with vectorised bisection,
    where the c-coordinate of the j-th iterate crosses the four endpoints of
    the two target blocks.
    """
    sysm = m.system
    if side == 1:
        tgt = (sysm.Astar.c, sysm.Dstar.c)
        step = m.apply_inverse_many
    else:
        tgt = (sysm.B.c, sysm.C.c)
        step = m.apply_many
    segs = np.array([sg.c_range for sg in line.segments])
    # level 1: the part of each component lying in the targets
    levels = []
    cur = []
    for lo, hi in segs:
        for t in tgt:
            a, b = max(lo, t.lo), min(hi, t.hi)
            if a < b:
                cur.append((a, b))
    cur = merge_intervals(np.array(cur))
    levels.append(cur)

    # Iterates are pushed back onto the invariant surface after every step
    # (along x_s for the backward orbit, along x_u for the forward one).
    # Without this the transverse error of L grows like the inverse
    # contraction rate and orbits leave the blocks after a few steps.
    def h(c, j):
        p = line.locate(c)
        for _ in range(j):
            p, idx = step(p)
            ok = idx >= 0
            if side == 1:
                r = np.where(idx == 3, 1, 0)
                p[ok, 2] = surf.evaluate(r[ok], p[ok][:, :2])
            else:
                r = np.where(idx == 2, 1, 0)
                p[ok, 0] = surf.evaluate(r[ok], p[ok][:, 1:])
        return p[:, 1]

    for j in range(1, depth):
        a, b = cur[:, 0], cur[:, 1]
        # orientation from interior points (endpoints may sit on a block face)
        incr = h(a + 0.75 * (b - a), j) >= h(a + 0.25 * (b - a), j)
        kids = []
        for t in tgt:
            for val in (t.lo, t.hi):
                lo_c, hi_c = a.copy(), b.copy()
                # bisection for h(c) = val on each interval (h monotone)
                for _ in range(60):
                    mid = 0.5 * (lo_c + hi_c)
                    hm = h(mid, j)
                    hm = np.where(np.isnan(hm), np.where(incr, np.inf, -np.inf), hm)
                    go_right = (hm < val) == incr
                    lo_c = np.where(go_right, mid, lo_c)
                    hi_c = np.where(go_right, hi_c, mid)
                kids.append(0.5 * (lo_c + hi_c))
        # child k spans the preimages of target k's endpoints (clamped to the parent)
        out = []
        for k in range(2):
            e0, e1 = kids[2 * k], kids[2 * k + 1]
            lo_k, hi_k = np.minimum(e0, e1), np.maximum(e0, e1)
            lo_k, hi_k = np.maximum(lo_k, a), np.minimum(hi_k, b)
            sel = lo_k < hi_k
            out.append(np.stack([lo_k[sel], hi_k[sel]], 1))
        cur = merge_intervals(np.concatenate(out))
        levels.append(cur)
    return levels


def omega_sets(m: CoupledMap, depth: int, resolution: int = 65, exact_affine: bool = True) -> OmegaSets:
    """Omega_1 (W^u(Gamma) trace) and Omega_2 (W^s(Sigma) trace) on the
    section line, in its arclength coordinate."""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    phi = graph_transform_cu(m, resolution=resolution)
    phis = graph_transform_cs(m, resolution=resolution)
    line = section_line(m, phi, phis)
    if exact_affine and not m.perturbed:
        signs = {b.name: b.signs for b in m.branches}
        g, s = ifs_from_gamma(m.system, signs), ifs_from_sigma(m.system, signs)
        lv1 = [np.asarray(refine(g, d).intervals, dtype=float) for d in range(1, depth + 1)]
        lv2 = [np.asarray(refine(s, d).intervals, dtype=float) for d in range(1, depth + 1)]
        method = "affine: cylinders of the c-branch IFS, leaves are coordinate lines"
    else:
        lv1 = _c_levels(m, line, depth, 1, phi)
        lv2 = _c_levels(m, line, depth, 2, phis)
        method = "numerical: bisection of iterate c-coordinates along the computed section line"
    levels1 = [CantorApprox(_to_arclength(line, iv), d + 1, f"Omega_1 ({method})") for d, iv in enumerate(lv1)]
    levels2 = [CantorApprox(_to_arclength(line, iv), d + 1, f"Omega_2 ({method})") for d, iv in enumerate(lv2)]
    return OmegaSets(levels1[-1], levels2[-1], line, levels1, levels2, method)


def _to_arclength(line: SectionLine, iv: np.ndarray) -> np.ndarray:
    iv = np.asarray(iv, dtype=float).reshape(-1, 2)
    return np.stack([line.arclength_of(iv[:, 0]), line.arclength_of(iv[:, 1])], 1)


def _dist_to(Y: np.ndarray, x: np.ndarray) -> np.ndarray:
    k = np.searchsorted(Y[:, 0], x, side="right") - 1
    d = np.full(len(x), np.inf)
    ok = k >= 0
    d[ok] = np.maximum(0, x[ok] - Y[k[ok], 1])
    has_next = k + 1 < len(Y)
    nxt = np.minimum(k + 1, len(Y) - 1)
    return np.minimum(d, np.where(has_next, Y[nxt, 0] - x, np.inf))


def hausdorff_distance(S1: CantorApprox, S2: CantorApprox) -> float:
    """Hausdorff distance between two finite unions of closed intervals.

    The farthest point of X from Y is an endpoint of X or the midpoint of a
    gap of Y (clipped into X), so those candidates suffice."""
    def one_way(X, Y):
        Xi = np.asarray(X.intervals, dtype=float)
        Yi = np.asarray(Y.intervals, dtype=float)
        cand = [Xi.ravel()]
        mids = 0.5 * (Yi[1:, 0] + Yi[:-1, 1])
        k = np.searchsorted(Xi[:, 0], mids, side="right") - 1
        ok = (k >= 0) & (mids <= Xi[np.maximum(k, 0), 1])
        cand.append(mids[ok])
        return float(np.max(_dist_to(Yi, np.concatenate(cand))))
    if S1.empty or S2.empty:
        raise EmptyInput("Hausdorff distance of an empty set")
    return max(one_way(S1, S2), one_way(S2, S1))


# ---------------------------------------------------------------------------
# theorem reports

HOLDS, FAILS, NA = "holds", "fails", "not-applicable"


def _verdict(ok: Optional[bool]) -> str:
    return NA if ok is None else (HOLDS if ok else FAILS)


def resolved_horizon(rate: float, grid: int, cap: int = 12) -> int:
    """Largest n with ``rate**n`` at least one grid spacing: deeper orbits
    select Cantor fibres thinner than the grid and undersample them."""
    if not 0 < rate < 1 or grid < 2:
        return cap
    return int(max(1, min(cap, np.floor(np.log(1.0 / (grid - 1)) / np.log(rate)))))


@dataclass
class TheoremReport:
    theorem: str
    hypotheses: dict = field(default_factory=dict)
    measured: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def applicable(self) -> bool:
        return all(v == HOLDS for v in self.hypotheses.values())

    def to_dict(self) -> dict:
        return {"theorem": self.theorem, "applicable": self.applicable, "hypotheses": self.hypotheses,
                "measured": self.measured, "bounds": self.bounds, "verdicts": self.verdicts,
                "notes": self.notes}


def _constants_or_none(sysm: BlockSystem):
    try:
        return shape_constants(sysm)
    except DegenerateGap:
        return None


def _common_hypotheses(sysm: BlockSystem, rep: TheoremReport):
    r = rates(sysm)
    k = _constants_or_none(sysm)
    rep.hypotheses["dimension_reducible"] = _verdict(dimension_reducible(r))
    if k is None:
        rep.notes.append("shape constants undefined: image blocks touch on the c-axis (DegenerateGap)")
        rep.hypotheses["max_b_le_1"] = NA
    else:
        rep.hypotheses["max_b_le_1"] = _verdict(max(k.b1, k.b2) <= 1 + 1e-12)
        rep.measured["shape_constants"] = k.to_dict()
    rep.measured["rates"] = r.to_dict()
    return r, k


def _omega_block(om: OmegaSets, k) -> tuple:
    t1, t2 = thickness(om.omega1), thickness(om.omega2)
    gl = gap_lemma(om.omega1, om.omega2)
    inter = [intersect(a, b) for a, b in zip(om.levels1, om.levels2)]
    sides = {}
    for name, t, a, b in (("omega1", t1.tau, k.a1, k.b1), ("omega2", t2.tau, k.a2, k.b2)):
        sides[name] = {"tau": t, "a": a, "a_eff": a / (1 + b), "b": b, "tau_below_a": bool(t < a)}
    return t1, t2, gl, inter, sides


def theorem_a_report(sysm: BlockSystem, m: CoupledMap, depth: int = 12, grid: int = 1024,
                     transient: int = 3, horizon: Optional[int] = None) -> TheoremReport:
    rep = TheoremReport("A")
    r, k = _common_hypotheses(sysm, rep)
    rep.hypotheses["a1_a2_gt_1"] = NA if k is None else _verdict(k.a1 * k.a2 > 1)
    claims = ("H_nonempty", "H_totally_disconnected", "gap_lemma", "dim_Wu_bounds", "dim_Ws_bounds", "dim_H_lt_1")
    if not rep.applicable:
        rep.verdicts = {c: NA for c in claims}
        rep.notes.append("hypotheses fail; no claim is tested")
        return rep
    om = omega_sets(m, depth)
    t1, t2, gl, inter, sides = _omega_block(om, k)
    nonempty = [not s.empty for s in inter]
    P, Q = fixed_saddles(m)
    n_u = horizon or resolved_horizon(r.lam_c, grid)
    n_s = horizon or resolved_horizon(1.0 / r.mu_c, grid)
    wu = sample_invariant_set(m, "unstable", Section(2, float(P[2])), grid, n_u, transient)
    ws = sample_invariant_set(m, "stable", Section(0, float(Q[0])), grid, n_s, transient)
    bd_u = box_dimension(wu)
    bd_s = box_dimension(ws)
    last = inter[-1]
    bd_h = box_dimension(last) if not last.empty else None
    lo_u = (2 * k.a1 + 1) / (k.a1 + 1)
    lo_s = (2 * k.a2 + 1) / (k.a2 + 1)
    widest = float(np.max(np.asarray(last.intervals[:, 1] - last.intervals[:, 0], dtype=float))) if not last.empty else None
    rep.measured.update({
        "depth": depth, "omega": om.to_dict(), "thickness": sides,
        "gap_lemma": gl.to_dict(), "intersection_nonempty_by_depth": nonempty,
        "intersection_intervals": len(last), "intersection_widest_component": widest,
        "saddles": {"P": P.tolist(), "Q": Q.tolist()},
        "Wu_section": {"section": wu.section.to_dict(), "points": len(wu), "horizon": n_u,
                       "box": bd_u.to_dict()},
        "Ws_section": {"section": ws.section.to_dict(), "points": len(ws), "horizon": n_s,
                       "box": bd_s.to_dict()},
        "H_section_box": bd_h.to_dict() if bd_h else None,
    })
    rep.bounds = {"dim_Wu_lower": lo_u, "dim_Ws_lower": lo_s, "dim_W_upper": 2.0, "dim_H_upper": 1.0,
                  "newhouse_omega1": newhouse_dim_lower(t1.tau), "newhouse_omega2": newhouse_dim_lower(t2.tau)}
    rep.verdicts = {
        "H_nonempty": _verdict(all(nonempty)),
        # components shrink geometrically with depth; compare with the line's length
        "H_totally_disconnected": _verdict(widest is not None and len(last) > 1
                                           and widest < 1e-3 * om.omega1.hull.length()),
        "gap_lemma": HOLDS if gl.applies else FAILS,
        "dim_Wu_bounds": _verdict(lo_u < bd_u.slope < 2),
        "dim_Ws_bounds": _verdict(lo_s < bd_s.slope < 2),
        "dim_H_lt_1": _verdict(bd_h is not None and bd_h.slope < 1),
    }
    for name, s in sides.items():
        if s["tau_below_a"]:
            rep.notes.append(f"{name}: measured thickness {s['tau']:.6g} is below a = {s['a']:.6g}; "
                             f"a/(1+b) = {s['a_eff']:.6g} is the bound the estimate chain supports")
    rep.notes.append("box-counting dimension is used as a proxy for Hausdorff dimension")
    return rep


def theorem_b_from_sets(om1: CantorApprox, om2: CantorApprox, a_min: float, tau0: float,
                        hky_factor: float = 6 / 7) -> tuple:
    """Measured links of the Theorem B estimate chain for two Cantor sets."""
    t1, t2 = thickness(om1).tau, thickness(om2).tau
    inter = intersect(om1, om2)
    measured = {"tau1": t1, "tau2": t2, "intersection_intervals": len(inter)}
    bounds = {"dim_H_lower": 1.0 / (1.0 + 1.0 / np.sqrt(a_min)), "dim_H_upper": 1.0,
              "hky_threshold": hky_factor * np.sqrt(min(t1, t2)),
              "five_sixths_sqrt_a": 5 / 6 * np.sqrt(a_min)}
    verdicts = {"taus_exceed_half_tau0": _verdict(min(t1, t2) > tau0 / 2)}
    try:
        t12 = thickness(inter).tau
    except (InsufficientGaps, IndexError):
        t12 = None
    measured["tau_intersection"] = t12
    if t12 is None:
        verdicts.update({"hky_link": FAILS, "newhouse_link": NA, "dim_H_bounds": NA})
        return measured, bounds, verdicts
    nh = newhouse_dim_lower(t12)
    bd = box_dimension(inter)
    measured["newhouse_dim_lower"] = nh
    measured["intersection_box"] = bd.to_dict()
    verdicts["hky_link"] = _verdict(t12 >= bounds["hky_threshold"])
    verdicts["sqrt_a_link"] = _verdict(bounds["hky_threshold"] > bounds["five_sixths_sqrt_a"])
    verdicts["newhouse_link"] = _verdict(nh > bounds["dim_H_lower"])
    verdicts["dim_H_bounds"] = _verdict(bounds["dim_H_lower"] < bd.slope < 1)
    return measured, bounds, verdicts


def theorem_b_report(sysm: BlockSystem, m: CoupledMap, depth: int = 12, tau0: float = 10.0) -> TheoremReport:
    rep = TheoremReport("B")
    r, k = _common_hypotheses(sysm, rep)
    rep.hypotheses["min_a_gt_tau0"] = NA if k is None else _verdict(min(k.a1, k.a2) > tau0)
    rep.measured["tau0"] = tau0
    rep.notes.append("tau0 is user supplied; the theorem only asserts that some large tau0 exists")
    claims = ("taus_exceed_half_tau0", "hky_link", "sqrt_a_link", "newhouse_link", "dim_H_bounds")
    if not rep.applicable:
        rep.verdicts = {c: NA for c in claims}
        rep.notes.append("hypotheses fail; no claim is tested")
        if k is not None:
            rep.bounds["dim_H_lower"] = 1.0 / (1.0 + 1.0 / np.sqrt(min(k.a1, k.a2)))
        return rep
    om = omega_sets(m, depth)
    measured, bounds, verdicts = theorem_b_from_sets(om.omega1, om.omega2, min(k.a1, k.a2), tau0)
    rep.measured.update(measured)
    rep.measured["depth"] = depth
    rep.bounds = bounds
    rep.verdicts = verdicts
    rep.notes.append("the HKY link is a diagnostic: its perturbation threshold is not quantified")
    return rep
