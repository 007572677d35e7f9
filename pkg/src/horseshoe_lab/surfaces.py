"""Graph-invariant surfaces by graph-transform iteration.

``V^cu`` is the graph ``x_s = phi(x_u, x_c)`` over the (u, c) shadows of A
and D; ``V^cs`` is the graph ``x_u = phi*(x_c, x_s)`` over the (c, s)
shadows of B* and C*.  Both are tabulated on tensor grids and interpolated
bilinearly (coordinates clamped to the rectangle).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import EmptyIntersection, NoConvergence, RootNotFound
from .geometry import DOMAIN_NAMES, dimension_reducible, rates
from .hmap import CoupledMap

NEWTON_TOL = 1e-13
NEWTON_MAXITER = 50

# (kind) -> graph axis, base axes, rectangle blocks, branch names
_LAYOUT = {
    "cu": (2, (0, 1), ("A", "D"), ("A", "D")),
    "cs": (0, (1, 2), ("Bstar", "Cstar"), ("B", "C")),
}


@dataclass
class GridFunction:
    kind: str
    rects: list                 # per rectangle: (lo0, hi0, lo1, hi1)
    values: np.ndarray          # (R, n, n), index [r, i0, i1]
    log: list = field(default_factory=list)
    precondition_ok: bool = True

    @property
    def resolution(self) -> int:
        return self.values.shape[1]

    def nodes(self, r: int) -> tuple:
        lo0, hi0, lo1, hi1 = self.rects[r]
        n = self.resolution
        return np.linspace(lo0, hi0, n), np.linspace(lo1, hi1, n)

    def node_points(self) -> tuple:
        """All nodes as ``(rect index, base coordinates (N, 2))``."""
        ridx, pts = [], []
        for r in range(len(self.rects)):
            a, b = self.nodes(r)
            A, B = np.meshgrid(a, b, indexing="ij")
            pts.append(np.stack([A.ravel(), B.ravel()], 1))
            ridx.append(np.full(A.size, r))
        return np.concatenate(ridx), np.concatenate(pts)

    def evaluate(self, ridx: np.ndarray, q: np.ndarray, grad: bool = False):
        """Bilinear interpolation on rectangle ``ridx`` at base points ``q``."""
        n = self.resolution
        rect = np.asarray(self.rects)[ridx]
        h0 = (rect[:, 1] - rect[:, 0]) / (n - 1)
        h1 = (rect[:, 3] - rect[:, 2]) / (n - 1)
        t0 = np.clip((q[:, 0] - rect[:, 0]) / h0, 0, n - 1)
        t1 = np.clip((q[:, 1] - rect[:, 2]) / h1, 0, n - 1)
        i0 = np.minimum(np.floor(t0).astype(int), n - 2)
        i1 = np.minimum(np.floor(t1).astype(int), n - 2)
        f0, f1 = t0 - i0, t1 - i1
        v = self.values
        v00, v10 = v[ridx, i0, i1], v[ridx, i0 + 1, i1]
        v01, v11 = v[ridx, i0, i1 + 1], v[ridx, i0 + 1, i1 + 1]
        val = (v00 * (1 - f0) * (1 - f1) + v10 * f0 * (1 - f1) + v01 * (1 - f0) * f1 + v11 * f0 * f1)
        if not grad:
            return val
        g0 = ((v10 - v00) * (1 - f1) + (v11 - v01) * f1) / h0
        g1 = ((v01 - v00) * (1 - f0) + (v11 - v10) * f0) / h1
        return val, np.stack([g0, g1], 1)

    def derivatives(self) -> dict:
        """Sup norms of first and second partials (central differences)."""
        out = {"d0": 0.0, "d1": 0.0, "d00": 0.0, "d01": 0.0, "d11": 0.0}
        for r in range(len(self.rects)):
            a, b = self.nodes(r)
            d0, d1 = np.gradient(self.values[r], a, b, edge_order=2)
            d00, d01 = np.gradient(d0, a, b, edge_order=2)
            _, d11 = np.gradient(d1, a, b, edge_order=2)
            for k, arr in (("d0", d0), ("d1", d1), ("d00", d00), ("d01", d01), ("d11", d11)):
                out[k] = max(out[k], float(np.max(np.abs(arr))))
        return out

    def derivative_budget(self) -> float:
        d = self.derivatives()
        # the mixed partial appears twice among multi-indices of order 2
        return d["d0"] + d["d1"] + d["d00"] + 2 * d["d01"] + d["d11"]

    def spread(self) -> float:
        return float(self.values.max() - self.values.min())

    def to_csv(self, path) -> None:
        names = {"cu": ("u", "c", "s"), "cs": ("c", "s", "u")}[self.kind]
        with open(path, "w") as fh:
            fh.write(",".join(("rect",) + names) + "\n")
            ridx, q = self.node_points()
            vals = self.values.reshape(-1)
            for r, (a, b), v in zip(ridx, q, vals):
                fh.write(f"{r},{a!r},{b!r},{v!r}\n")

    def log_json(self) -> str:
        return json.dumps({"kind": self.kind, "iterations": self.log}, indent=2, sort_keys=True)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "resolution": self.resolution, "rects": [list(r) for r in self.rects],
                "iterations": len(self.log), "final_update": self.log[-1]["update"] if self.log else None,
                "derivative_budget": self.derivative_budget(), "derivatives": self.derivatives(),
                "min": float(self.values.min()), "max": float(self.values.max()),
                "precondition_dimension_reducible": self.precondition_ok}


def _rects(m: CoupledMap, kind: str) -> list:
    _, base, blocks, _ = _LAYOUT[kind]
    out = []
    for name in blocks:
        b = m.system.block(name)
        i0, i1 = b.axis(base[0]), b.axis(base[1])
        out.append((i0.lo, i0.hi, i1.lo, i1.hi))
    return out


def _nearest(val: np.ndarray, intervals: list) -> np.ndarray:
    """Index of the interval closest to each value (ties to the first)."""
    d = np.stack([np.maximum(0, np.maximum(iv.lo - val, val - iv.hi)) for iv in intervals], 1)
    return np.argmin(d, axis=1)


def _cu_step(m: CoupledMap, g: GridFunction, ridx, y, x0):
    """One graph-transform update of phi at base points ``y``."""
    sysm = m.system
    # the branch whose image shadow contains y on the c-axis (nearest otherwise)
    k = _nearest(y[:, 1], [sysm.Astar.c, sysm.Dstar.c])
    bidx = np.array([DOMAIN_NAMES.index("A"), DOMAIN_NAMES.index("D")])[k]
    x = x0.copy()
    for _ in range(NEWTON_MAXITER):
        phi, dphi = g.evaluate(k, x, grad=True)
        p = np.column_stack([x, phi])
        F = m.forward(p, bidx)
        r = F[:, :2] - y
        if np.max(np.abs(r)) < NEWTON_TOL:
            break
        J = m.jacobian(p, bidx)
        Jr = J[:, :2, :2] + J[:, :2, 2:3] * dphi[:, None, :]
        x = x - np.linalg.solve(Jr, r[..., None])[..., 0]
    else:
        bad = int(np.argmax(np.max(np.abs(r), axis=1)))
        raise RootNotFound(f"(u, c) inversion failed at base point {y[bad].tolist()}")
    phi = g.evaluate(k, x)
    F = m.forward(np.column_stack([x, phi]), bidx)
    return F[:, 2], x


def _cs_step(m: CoupledMap, g: GridFunction, ridx, y, z0):
    sysm = m.system
    k = _nearest(y[:, 0], [sysm.B.c, sysm.C.c])
    bidx = np.array([DOMAIN_NAMES.index("B"), DOMAIN_NAMES.index("C")])[k]
    zu = z0.copy()
    for _ in range(NEWTON_MAXITER):
        z = np.column_stack([zu, y])
        F = m.forward(z, bidx)
        phi, dphi = g.evaluate(k, F[:, 1:], grad=True)
        h = F[:, 0] - phi
        if np.max(np.abs(h)) < NEWTON_TOL:
            break
        J = m.jacobian(z, bidx)
        dh = J[:, 0, 0] - dphi[:, 0] * J[:, 1, 0] - dphi[:, 1] * J[:, 2, 0]
        zu = zu - h / dh
    else:
        bad = int(np.argmax(np.abs(h)))
        raise RootNotFound(f"u inversion failed at base point {y[bad].tolist()}")
    return zu, zu


def _transform(m: CoupledMap, kind: str, resolution: int, tol: float, max_iter: int,
               initial: Optional[float]) -> GridFunction:
    if resolution < 3:
        raise ValueError("resolution must be at least 3")
    axis, _, blocks, _ = _LAYOUT[kind]
    rects = _rects(m, kind)
    if initial is None:
        initial = 0.5 * sum(m.system.block(blocks[0]).axis(axis).as_list())
    g = GridFunction(kind, rects, np.full((len(rects), resolution, resolution), float(initial)))
    g.precondition_ok = dimension_reducible(rates(m.system))
    ridx, y = g.node_points()
    if kind == "cu":
        guess = y.copy()
    else:
        guess = np.full(len(y), float(initial))
    step = _cu_step if kind == "cu" else _cs_step
    prev = None
    for it in range(1, max_iter + 1):
        new, guess = step(m, g, ridx, y, guess)
        upd = float(np.max(np.abs(new - g.values.reshape(-1))))
        g.values = new.reshape(g.values.shape)
        g.log.append({"iteration": it, "update": upd,
                      "ratio": (upd / prev) if prev else None})
        prev = upd
        if upd < tol:
            return g
    raise NoConvergence(f"graph transform ({kind}) update {upd:.3g} after {max_iter} iterations")


def graph_transform_cu(m: CoupledMap, resolution: int = 129, tol: float = 1e-10,
                       max_iter: int = 200, initial: Optional[float] = None) -> GridFunction:
    return _transform(m, "cu", resolution, tol, max_iter, initial)


def graph_transform_cs(m: CoupledMap, resolution: int = 129, tol: float = 1e-10,
                       max_iter: int = 200, initial: Optional[float] = None) -> GridFunction:
    return _transform(m, "cs", resolution, tol, max_iter, initial)


def invariance_defect(m: CoupledMap, g: GridFunction) -> float:
    """Largest distance (along the graph axis) between the surface and the
    image of its nodes that stay in the relevant region."""
    axis, base, blocks, branches = _LAYOUT[g.kind]
    ridx, q = g.node_points()
    pts = np.zeros((len(q), 3))
    pts[:, list(base)] = q
    pts[:, axis] = g.values.reshape(-1)
    if g.kind == "cu":
        img, idx = m.apply_many(pts)
        keep = np.isin(idx, [0, 3])
    else:
        img, idx = m.apply_inverse_many(pts)
        keep = np.isin(idx, [1, 2])
    if not np.any(keep):
        return 0.0
    img = img[keep]
    shadows = [m.system.block(b) for b in blocks]
    inside = np.full(len(img), -1)
    for r in reversed(range(len(shadows))):
        b = shadows[r]
        ok = np.ones(len(img), dtype=bool)
        for ax in base:
            iv = b.axis(ax)
            ok &= (img[:, ax] >= iv.lo) & (img[:, ax] <= iv.hi)
        inside[ok] = r
    sel = inside >= 0
    if not np.any(sel):
        return 0.0
    val = g.evaluate(inside[sel], img[sel][:, list(base)])
    return float(np.max(np.abs(val - img[sel, axis])))


# ---------------------------------------------------------------------------
# section line

@dataclass
class Segment:
    points: np.ndarray        # (k, 3) polyline ordered by increasing c

    @property
    def arclength(self) -> np.ndarray:
        d = np.linalg.norm(np.diff(self.points, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(d)])

    @property
    def c_range(self) -> tuple:
        return float(self.points[0, 1]), float(self.points[-1, 1])

    def to_dict(self) -> dict:
        return {"c_range": list(self.c_range), "length": float(self.arclength[-1]),
                "start": self.points[0].tolist(), "end": self.points[-1].tolist()}


@dataclass
class SectionLine:
    segments: list
    samples_per_segment: int

    def locate(self, c: np.ndarray) -> np.ndarray:
        """Points of the line at c-parameters ``c`` (interpolated along the polylines)."""
        out = np.full((len(c), 3), np.nan)
        for seg in self.segments:
            lo, hi = seg.c_range
            sel = (c >= lo - 1e-12) & (c <= hi + 1e-12)
            for ax in range(3):
                out[sel, ax] = np.interp(c[sel], seg.points[:, 1], seg.points[:, ax])
        return out

    def arclength_of(self, c: np.ndarray) -> np.ndarray:
        """Arclength coordinate along the line, segments concatenated in c order
        with the gap between them measured along c."""
        out = np.full(len(c), np.nan)
        start = self.segments[0].c_range[0]
        offset = 0.0
        prev_end = start
        for seg in self.segments:
            lo, hi = seg.c_range
            offset += lo - prev_end
            sel = (c >= lo - 1e-12) & (c <= hi + 1e-12)
            out[sel] = offset + start + np.interp(c[sel], seg.points[:, 1], seg.arclength)
            offset += seg.arclength[-1]
            prev_end = hi
        return out

    def to_dict(self) -> dict:
        return {"components": len(self.segments), "segments": [s.to_dict() for s in self.segments]}


def section_line(m: CoupledMap, phi: GridFunction, phistar: GridFunction,
                 samples: int = 257) -> SectionLine:
    """Components of ``f(V^cu) ∩ f^-1(V^cs)``.

    Points of ``f(V^cu)`` over the A*/D* c-ranges satisfy ``x_s = phi(x_u, x_c)``
    by invariance; points of ``f^-1(V^cs)`` satisfy ``x_u = phi*(x_c, x_s)``.
    For each c the pair of equations is solved by fixed-point iteration
    (both graphs are nearly flat).  A component is kept where the solution
    lies in both image blocks (A* or D*) and domain shadows (B or C).
    """
    sysm = m.system
    segs = []
    for img, dom in (("Astar", "B"), ("Dstar", "C")):
        ib, db = sysm.block(img), sysm.block(dom)
        lo = max(ib.c.lo, db.c.lo)
        hi = min(ib.c.hi, db.c.hi)
        if not lo < hi:
            continue
        c = np.linspace(lo, hi, samples)
        u = np.full(samples, 0.5 * (db.u.lo + db.u.hi))
        s = np.full(samples, 0.5 * (ib.s.lo + ib.s.hi))
        for _ in range(200):
            s_new = image_height(m, phi, np.column_stack([u, c]))
            u_new = image_height(m, phistar, np.column_stack([c, s_new]))
            done = max(np.max(np.abs(s_new - s)), np.max(np.abs(u_new - u))) < 1e-14
            u, s = u_new, s_new
            if done:
                break
        pts = np.column_stack([u, c, s])
        ok = ib.contains_points(pts, 1e-9) & db.contains_points(pts, 1e-9)
        if np.all(ok):
            segs.append(Segment(pts))
    if not segs:
        raise EmptyIntersection("the two surfaces do not meet inside the coupling blocks")
    segs.sort(key=lambda sg: sg.c_range[0])
    return SectionLine(segs, samples)


def image_height(m: CoupledMap, g: GridFunction, q: np.ndarray) -> np.ndarray:
    """Height of ``f(V^cu)`` over (u, c) points, or of ``f^-1(V^cs)`` over
    (c, s) points; this is one graph-transform step evaluated off-grid."""
    q = np.atleast_2d(np.asarray(q, dtype=float))
    ridx = np.zeros(len(q), dtype=int)
    if g.kind == "cu":
        return _cu_step(m, g, ridx, q, q.copy())[0]
    guess = np.full(len(q), float(np.mean(g.values)))
    return _cs_step(m, g, ridx, q, guess)[0]
