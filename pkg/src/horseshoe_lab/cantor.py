"""One-dimensional Cantor machinery.

Two-branch affine IFS on a line, their finite-depth cylinder
approximations, Palis-Takens thickness, interleaving, the gap lemma,
intersections and the thick-intersection (HKY) diagnostic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (DegenerateGap, DepthCap, InsufficientGaps, NonPositiveTau, PreconditionViolated)
from .geometry import TOL, BlockSystem, Interval

MAX_DEPTH = 24
MERGE_TOL = 1e-14
GAP_RTOL = 1e-9
# cylinder endpoints are carried in extended precision so that ratios of
# tiny gaps stay accurate at depth 12 and beyond
REAL = np.longdouble


@dataclass(frozen=True)
class IfsPair:
    """Maps ``g_i(x) = scales[i] * x + offsets[i]`` on ``domain``."""
    scales: tuple
    offsets: tuple
    domain: Interval
    labels: tuple = ("0", "1")

    def __post_init__(self):
        for s in self.scales:
            if not 0 < abs(s) < 0.5:
                raise PreconditionViolated(f"|scale| must lie in (0, 1/2), got {s}")

    @classmethod
    def from_intervals(cls, domain: Interval, img0: Interval, img1: Interval,
                       flips: Sequence[int] = (1, 1), labels=("0", "1")) -> "IfsPair":
        scales, offsets = [], []
        for img, sg in zip((img0, img1), flips):
            r = img.length() / domain.length()
            if sg > 0:
                scales.append(r)
                offsets.append(img.lo - r * domain.lo)
            else:
                scales.append(-r)
                offsets.append(img.hi + r * domain.lo)
        return cls(tuple(scales), tuple(offsets), domain, tuple(labels))

    def images(self, lo, hi) -> tuple:
        """Images of ``[lo, hi]`` under both maps, as ``(lo, hi)`` arrays of shape (2, ...)."""
        s = np.asarray(self.scales, dtype=REAL)[:, None]
        o = np.asarray(self.offsets, dtype=REAL)[:, None]
        a = s * np.atleast_1d(np.asarray(lo, dtype=REAL))[None, :] + o
        b = s * np.atleast_1d(np.asarray(hi, dtype=REAL))[None, :] + o
        return np.minimum(a, b), np.maximum(a, b)

    @property
    def equal_scales(self) -> bool:
        return abs(abs(self.scales[0]) - abs(self.scales[1])) <= 1e-12

    def image_intervals(self) -> tuple:
        lo, hi = self.images(self.domain.lo, self.domain.hi)
        return Interval(float(lo[0, 0]), float(hi[0, 0])), Interval(float(lo[1, 0]), float(hi[1, 0]))

    def shape_b(self) -> float:
        """Trim ratio ``(|domain| - |hull of images|) / (|hull of images| - 2 |image|)``
        (the 1D analogue of b1/b2, using the longer image)."""
        i0, i1 = self.image_intervals()
        hull = i0.hull(i1).length()
        den = hull - 2 * max(i0.length(), i1.length())
        if den <= TOL:
            raise DegenerateGap("images touch or overlap")
        return (self.domain.length() - hull) / den

    def transform(self, alpha: float, beta: float) -> "IfsPair":
        """Conjugate by ``x -> alpha x + beta``."""
        d = sorted((alpha * self.domain.lo + beta, alpha * self.domain.hi + beta))
        offs = tuple(alpha * o + beta - s * beta for s, o in zip(self.scales, self.offsets))
        return IfsPair(self.scales, offs, Interval(*d), self.labels)

    def describe(self) -> str:
        parts = [f"g{lab}(x) = {s:.6g} x + {o:.6g}" for lab, s, o in zip(self.labels, self.scales, self.offsets)]
        return "; ".join(parts) + f" on [{self.domain.lo:.6g}, {self.domain.hi:.6g}]"

    def to_dict(self) -> dict:
        return {"scales": list(self.scales), "offsets": list(self.offsets),
                "domain": self.domain.as_list(), "labels": list(self.labels)}


def _c_sign(signs: Optional[dict], name: str) -> int:
    if not signs or name not in signs:
        return 1
    return int(signs[name][1])


def ifs_from_gamma(sys: BlockSystem, signs: Optional[dict] = None) -> IfsPair:
    """c-branches of f on A and D: ``A_c -> A*_c`` and ``A_c -> D*_c``."""
    if sys.Estar.c.length() - 2 * sys.Astar.c.length() <= TOL:
        raise DegenerateGap("A* and D* touch or overlap on the c-axis")
    return IfsPair.from_intervals(sys.A.c, sys.Astar.c, sys.Dstar.c,
                                  (_c_sign(signs, "A"), _c_sign(signs, "D")), ("A", "D"))


def ifs_from_sigma(sys: BlockSystem, signs: Optional[dict] = None) -> IfsPair:
    """c-branches of f^-1 on B* and C*: ``B*_c -> B_c`` and ``C*_c -> C_c``."""
    if sys.F.c.length() - 2 * sys.B.c.length() <= TOL:
        raise DegenerateGap("B and C touch or overlap on the c-axis")
    return IfsPair.from_intervals(sys.Bstar.c, sys.B.c, sys.C.c,
                                  (_c_sign(signs, "B"), _c_sign(signs, "C")), ("B", "C"))


def _hull_step(ifs: IfsPair, lo, hi):
    a, b = ifs.images(lo, hi)
    return a.min(), b.max()


def _hull_candidates(ifs: IfsPair) -> list:
    """Fixed points of all words of length one and two; the hull endpoints
    are among them."""
    s = [REAL(v) for v in ifs.scales]
    o = [REAL(v) for v in ifs.offsets]
    out = [o[i] / (1 - s[i]) for i in range(2)]
    for i in range(2):
        for j in range(2):
            # g_i(g_j(x)) = s_i s_j x + s_i o_j + o_i
            out.append((s[i] * o[j] + o[i]) / (1 - s[i] * s[j]))
    return out


def _attractor_hull_ext(ifs: IfsPair, tol: float = 1e-14, max_iter: int = 100000) -> tuple:
    lo, hi = REAL(ifs.domain.lo), REAL(ifs.domain.hi)
    for _ in range(max_iter):
        nlo, nhi = _hull_step(ifs, lo, hi)
        done = abs(nlo - lo) <= tol and abs(nhi - hi) <= tol
        lo, hi = nlo, nhi
        if done:
            break
    # snap to the exact fixed point when one matches
    cand = _hull_candidates(ifs)
    clo = min(cand, key=lambda c: abs(c - lo))
    chi = min(cand, key=lambda c: abs(c - hi))
    if abs(clo - lo) < 1e-9 and abs(chi - hi) < 1e-9:
        slo, shi = _hull_step(ifs, clo, chi)
        if abs(slo - clo) < 1e-15 and abs(shi - chi) < 1e-15:
            return clo, chi
    return lo, hi


def attractor_hull(ifs: IfsPair, tol: float = 1e-14, max_iter: int = 100000) -> Interval:
    """Fixed interval of ``H -> hull(g0(H) u g1(H))`` iterated from the domain."""
    lo, hi = _attractor_hull_ext(ifs, tol, max_iter)
    return Interval(float(lo), float(hi))


# ---------------------------------------------------------------------------

def merge_intervals(iv: np.ndarray, tol: float = MERGE_TOL) -> np.ndarray:
    """Sort and merge closed intervals that overlap or touch within ``tol``."""
    iv = np.asarray(iv).reshape(-1, 2)
    if iv.dtype != REAL:
        iv = iv.astype(float)
    if len(iv) == 0:
        return iv
    iv = iv[np.argsort(iv[:, 0], kind="stable")]
    run_hi = np.maximum.accumulate(iv[:, 1])
    new = np.ones(len(iv), dtype=bool)
    new[1:] = iv[1:, 0] > run_hi[:-1] + tol
    starts = np.flatnonzero(new)
    ends = np.r_[starts[1:], len(iv)] - 1
    return np.stack([iv[starts, 0], run_hi[ends]], axis=1)


@dataclass
class CantorApprox:
    intervals: np.ndarray
    depth: int
    provenance: str = ""

    def __post_init__(self):
        iv = np.asarray(self.intervals)
        self.intervals = (iv if iv.dtype == REAL else iv.astype(float)).reshape(-1, 2)

    def __len__(self) -> int:
        return len(self.intervals)

    @property
    def empty(self) -> bool:
        return len(self.intervals) == 0

    @property
    def hull(self) -> Interval:
        return Interval(float(self.intervals[0, 0]), float(self.intervals[-1, 1]))

    @property
    def gaps(self) -> np.ndarray:
        return self.intervals[1:, 0] - self.intervals[:-1, 1]

    def total_length(self) -> float:
        return float(np.sum(self.intervals[:, 1] - self.intervals[:, 0]))

    def affine(self, alpha: float, beta: float) -> "CantorApprox":
        iv = np.sort(alpha * self.intervals + beta, axis=1)
        return CantorApprox(iv[np.argsort(iv[:, 0])], self.depth, self.provenance)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"# depth={self.depth} provenance={self.provenance}\n")
            fh.write("lo,hi\n")
            for lo, hi in self.intervals:
                fh.write(f"{lo!r},{hi!r}\n")


def refine(ifs: IfsPair, depth: int) -> CantorApprox:
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if depth > MAX_DEPTH:
        raise DepthCap(f"depth {depth} exceeds the cap {MAX_DEPTH}")
    hlo, hhi = _attractor_hull_ext(ifs)
    lo, hi = np.array([hlo], dtype=REAL), np.array([hhi], dtype=REAL)
    for _ in range(depth):
        a, b = ifs.images(lo, hi)
        lo, hi = a.ravel(), b.ravel()
    order = np.argsort(lo, kind="stable")
    iv = merge_intervals(np.stack([lo[order], hi[order]], axis=1))
    return CantorApprox(iv, depth, ifs.describe())


# ---------------------------------------------------------------------------
# thickness

@dataclass
class ThicknessReport:
    tau: float
    gap: tuple
    bridge: tuple
    per_depth: list = field(default_factory=list)
    stabilized: Optional[bool] = None

    def to_dict(self) -> dict:
        return {"tau": self.tau, "minimizing_gap": list(self.gap), "minimizing_bridge": list(self.bridge),
                "per_depth": self.per_depth, "stabilized": self.stabilized}


def _previous_ge(g: np.ndarray) -> np.ndarray:
    """Index of the nearest gap to the left at least as long (rtol), -1 if none."""
    out = np.full(len(g), -1)
    stack: list = []
    gl = g.tolist()
    for i, x in enumerate(gl):
        thr = x * (1 - GAP_RTOL)
        while stack and gl[stack[-1]] < thr:
            stack.pop()
        if stack:
            out[i] = stack[-1]
        stack.append(i)
    return out


def thickness(S: CantorApprox) -> ThicknessReport:
    """Palis-Takens thickness of the finite-depth set: every bounded gap is
    visible, bridges end at the first gap at least as long or at the hull."""
    if len(S) < 2:
        raise InsufficientGaps("thickness needs at least two intervals")
    iv = S.intervals
    g = S.gaps
    n = len(g)
    left = _previous_ge(g)
    right_rev = _previous_ge(g[::-1])
    right = np.where(right_rev[::-1] >= 0, n - 1 - right_rev[::-1], -1)
    # left bridge of gap i: [lo of interval after gap left[i] (or hull start), hi of interval i]
    lb_lo = np.where(left >= 0, iv[np.maximum(left, 0) + 1, 0], iv[0, 0])
    lb_hi = iv[:-1, 1]
    rb_lo = iv[1:, 0]
    rb_hi = np.where(right >= 0, iv[np.maximum(right, 0), 1], iv[-1, 1])
    ratio_l = (lb_hi - lb_lo) / g
    ratio_r = (rb_hi - rb_lo) / g
    il, ir = int(np.argmin(ratio_l)), int(np.argmin(ratio_r))
    if ratio_l[il] <= ratio_r[ir]:
        i, tau, br = il, float(ratio_l[il]), (float(lb_lo[il]), float(lb_hi[il]))
    else:
        i, tau, br = ir, float(ratio_r[ir]), (float(rb_lo[ir]), float(rb_hi[ir]))
    return ThicknessReport(tau, (float(iv[i, 1]), float(iv[i + 1, 0])), br)


def ifs_thickness(ifs: IfsPair, depth: int, min_depth: int = 2) -> ThicknessReport:
    """Thickness at ``depth`` with the per-depth sequence from ``min_depth``."""
    seq = []
    rep = None
    for d in range(max(1, min(min_depth, depth)), depth + 1):
        rep = thickness(refine(ifs, d))
        seq.append({"depth": d, "tau": rep.tau})
    rep.per_depth = seq
    taus = [s["tau"] for s in seq if s["depth"] >= min_depth]
    rep.stabilized = bool(len(taus) >= 2 and max(taus) - min(taus) <= 1e-9 * max(1.0, abs(taus[-1])))
    return rep


def selfsimilar_thickness(ifs: IfsPair) -> float:
    if not ifs.equal_scales:
        raise PreconditionViolated("branches have different contraction rates")
    lam = abs(ifs.scales[0])
    b = ifs.shape_b()
    if not lam * (1 + b) < 1:
        raise PreconditionViolated(f"gap monotonicity needs lam(1+b) < 1, got {lam * (1 + b):.6g}")
    return lam / (1 - 2 * lam)


def gap_monotone(ifs: IfsPair, depth: int) -> bool:
    """Every gap created at a level is strictly longer than every gap
    created later inside the same cylinder (exhaustive scan)."""
    hlo, hhi = _attractor_hull_ext(ifs)
    lo, hi = np.array([hlo], dtype=REAL), np.array([hhi], dtype=REAL)
    levels = []
    for _ in range(depth):
        a, b = ifs.images(lo, hi)
        a, b = a.ravel(), b.ravel()
        order = np.argsort(a, kind="stable")
        lo, hi = a[order], b[order]
        levels.append(lo[1::2] - hi[0::2])
    for d, gd in enumerate(levels):
        for d2 in range(d + 1, len(levels)):
            blk = levels[d2].reshape(len(gd), -1).max(axis=1)
            if not np.all(gd > blk):
                return False
    return True


# ---------------------------------------------------------------------------
# pairs of Cantor sets

def _inside_gap_closure(S: CantorApprox, a: float, b: float) -> bool:
    """Is ``[a, b]`` inside the closure of a (bounded or unbounded) gap of S?"""
    iv = S.intervals
    if b <= iv[0, 0] or a >= iv[-1, 1]:
        return True
    k = np.searchsorted(iv[:, 1], a, side="right") - 1
    if 0 <= k < len(iv) - 1:
        return bool(iv[k, 1] <= a and b <= iv[k + 1, 0])
    return False


def interleaved(S1: CantorApprox, S2: CantorApprox) -> bool:
    if S1.empty or S2.empty:
        return False
    h1, h2 = S1.hull, S2.hull
    return not (_inside_gap_closure(S1, h2.lo, h2.hi) or _inside_gap_closure(S2, h1.lo, h1.hi))


@dataclass
class GapLemmaVerdict:
    verdict: str
    interleaved: bool
    tau1: float
    tau2: float

    @property
    def product(self) -> float:
        return self.tau1 * self.tau2

    @property
    def applies(self) -> bool:
        return self.verdict == "applies"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "interleaved": self.interleaved, "tau1": self.tau1,
                "tau2": self.tau2, "product": self.product}


def gap_lemma(S1: CantorApprox, S2: CantorApprox) -> GapLemmaVerdict:
    t1, t2 = thickness(S1).tau, thickness(S2).tau
    il = interleaved(S1, S2)
    ok = il and t1 * t2 > 1 + GAP_RTOL
    return GapLemmaVerdict("applies" if ok else "inconclusive", il, t1, t2)


def intersect(S1: CantorApprox, S2: CantorApprox) -> CantorApprox:
    depth = min(S1.depth, S2.depth)
    prov = f"intersection of ({S1.provenance}) and ({S2.provenance})"
    if S1.empty or S2.empty:
        return CantorApprox(np.empty((0, 2)), depth, prov)
    a, b = S1.intervals, S2.intervals
    j0 = np.searchsorted(b[:, 1], a[:, 0], side="left")
    j1 = np.searchsorted(b[:, 0], a[:, 1], side="right")
    cnt = np.maximum(j1 - j0, 0)
    ia = np.repeat(np.arange(len(a)), cnt)
    start = np.repeat(j0, cnt)
    offs = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    ib = start + offs
    lo = np.maximum(a[ia, 0], b[ib, 0])
    hi = np.minimum(a[ia, 1], b[ib, 1])
    keep = lo <= hi
    return CantorApprox(merge_intervals(np.stack([lo[keep], hi[keep]], axis=1)), depth, prov)


@dataclass
class HkyReport:
    tau1: float
    tau2: float
    tau_intersection: float
    threshold: float
    eps: float
    passed: bool
    caveat: str = ("the perturbation threshold delta of the thick-intersection theorem is not "
                   "quantified, so this is a diagnostic, not a test of the theorem")

    def to_dict(self) -> dict:
        return {"tau1": self.tau1, "tau2": self.tau2, "tau_intersection": self.tau_intersection,
                "threshold": self.threshold, "eps": self.eps, "passed": self.passed,
                "caveat": self.caveat}


def hky_check(S1: CantorApprox, S2: CantorApprox, eps: float) -> HkyReport:
    if not interleaved(S1, S2):
        raise PreconditionViolated("sets are not interleaved")
    t1, t2 = thickness(S1).tau, thickness(S2).tau
    t12 = thickness(intersect(S1, S2)).tau
    thr = (1 - eps) * np.sqrt(min(t1, t2))
    return HkyReport(t1, t2, t12, float(thr), eps, bool(t12 >= thr))


def newhouse_dim_lower(tau: float) -> float:
    if not tau > 0:
        raise NonPositiveTau(f"tau must be positive, got {tau}")
    if np.isinf(tau):
        return 1.0
    return float(np.log(2) / np.log(2 + 1 / tau))
