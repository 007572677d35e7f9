"""The coupled horseshoe map: signed affine branches A->A*, B->B*, C->C*,
D->D*, an optional smooth bump perturbation, orbits, itineraries, fixed
saddles and a sampled cone-condition check.

The map is only modelled on A ∪ B ∪ C ∪ D (its inverse on the image
blocks).  Leaving that region is reported, not raised, by the batch
methods; the single-point methods raise :class:`OutOfDomain`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidSigns, InvalidSystem, NewtonDivergence, OutOfDomain, PerturbationTooLarge
from .geometry import (DOMAIN_NAMES, IMAGE_NAMES, Block, BlockSystem, RateSet, epsilon_margin, rates,
                       shape_constants, validate_system)
from .errors import DegenerateGap

NEWTON_TOL = 1e-12
NEWTON_MAXITER = 50

# sup |d/dt (1 - t^2)^3| on [0, 1], attained at t^2 = 1/5
_BUMP_D1 = 6 / np.sqrt(5) * (4 / 5) ** 2
# crude bound on second partials of the bump in scaled coordinates
_BUMP_D2 = 30.0


def philox(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator; ``stream`` picks an independent key."""
    return np.random.Generator(np.random.Philox(key=[int(seed), int(stream)]))


@dataclass(frozen=True)
class AffineBranch:
    name: str
    domain: Block
    image: Block
    signs: tuple = (1, 1, 1)

    @property
    def rates(self) -> np.ndarray:
        return self.image.sides / self.domain.sides

    @property
    def scale(self) -> np.ndarray:
        return np.asarray(self.signs, dtype=float) * self.rates

    @property
    def offset(self) -> np.ndarray:
        r = self.rates
        lo, ilo, ihi = self.domain.lo, self.image.lo, self.image.hi
        sg = np.asarray(self.signs)
        return np.where(sg > 0, ilo - r * lo, ihi + r * lo)

    @property
    def det(self) -> float:
        return float(np.prod(self.scale))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return x * self.scale + self.offset

    def inverse(self, y: np.ndarray) -> np.ndarray:
        return (y - self.offset) / self.scale

    def fixed_point(self) -> np.ndarray:
        return self.offset / (1 - self.scale)


@dataclass(frozen=True)
class Perturbation:
    """Sum of C^2 bumps ``amplitude * direction * w(|(p - center)/width|) e_axis``
    with ``w(t) = (1 - t^2)^3`` on ``|t| <= 1``.  Each term belongs to one
    domain block (``owners``) and only acts on that branch.
    """
    amplitude: float
    centers: np.ndarray
    widths: np.ndarray
    axes: np.ndarray
    directions: np.ndarray
    owners: np.ndarray
    seed: int = 0

    @classmethod
    def generate(cls, sys: BlockSystem, amplitude: float, seed: int = 0,
                 width_fraction: float = 0.3) -> "Perturbation":
        """One term per (domain block, axis).  Centers sit in the middle 30%
        of each side and the support stays strictly inside the block."""
        if amplitude < 0:
            raise ValueError("amplitude must be non-negative")
        rng = philox(seed, 1)
        centers, widths, axes, dirs, owners = [], [], [], [], []
        for k, name in enumerate(DOMAIN_NAMES):
            blk = sys.block(name)
            for ax in range(3):
                centers.append(blk.lo + blk.sides * rng.uniform(0.35, 0.65, size=3))
                widths.append(width_fraction * blk.sides)
                axes.append(ax)
                dirs.append(1.0 if rng.random() < 0.5 else -1.0)
                owners.append(k)
        return cls(float(amplitude), np.array(centers), np.array(widths), np.array(axes),
                   np.array(dirs), np.array(owners), int(seed))

    @classmethod
    def from_dict(cls, sys: BlockSystem, d: dict) -> "Perturbation":
        return cls.generate(sys, float(d.get("amplitude", 0.0)), int(d.get("seed", 0)),
                            float(d.get("width_fraction", 0.3)))

    # Terms owned by different blocks have disjoint supports, so the norms
    # are a max over owners of the per-owner sums.
    def _per_owner(self, per_term: np.ndarray) -> float:
        if len(per_term) == 0:
            return 0.0
        return float(max(per_term[self.owners == k].sum() for k in np.unique(self.owners)))

    def c1_norm_bound(self) -> float:
        inv_w = (1.0 / self.widths).sum(axis=1)
        return self.amplitude * self._per_owner(1.0 + _BUMP_D1 * inv_w)

    def c2_norm_bound(self) -> float:
        inv_w = 1.0 / self.widths
        pair = np.einsum("ki,kj->k", inv_w, inv_w)
        per = 1.0 + _BUMP_D1 * inv_w.sum(axis=1) + _BUMP_D2 * pair
        return self.amplitude * self._per_owner(per)

    def _terms(self, owner: int):
        return np.flatnonzero(self.owners == owner)

    def displacement(self, p: np.ndarray, owner: np.ndarray) -> np.ndarray:
        out = np.zeros_like(p)
        if self.amplitude == 0:
            return out
        for t in range(len(self.axes)):
            sel = owner == self.owners[t]
            if not np.any(sel):
                continue
            z = (p[sel] - self.centers[t]) / self.widths[t]
            q = np.sum(z * z, axis=1)
            w = np.where(q < 1, (1 - np.minimum(q, 1)) ** 3, 0.0)
            out[sel, self.axes[t]] += self.amplitude * self.directions[t] * w
        return out

    def jacobian(self, p: np.ndarray, owner: np.ndarray) -> np.ndarray:
        out = np.zeros(p.shape[:1] + (3, 3))
        if self.amplitude == 0:
            return out
        for t in range(len(self.axes)):
            sel = owner == self.owners[t]
            if not np.any(sel):
                continue
            z = (p[sel] - self.centers[t]) / self.widths[t]
            q = np.sum(z * z, axis=1)
            g1 = np.where(q < 1, -3 * (1 - np.minimum(q, 1)) ** 2, 0.0)
            grad = (g1[:, None] * 2 * z / self.widths[t])
            out[sel, self.axes[t], :] += self.amplitude * self.directions[t] * grad
        return out

    def to_dict(self) -> dict:
        return {"amplitude": self.amplitude, "seed": self.seed, "terms": int(len(self.axes)),
                "c1_norm_bound": self.c1_norm_bound(), "c2_norm_bound": self.c2_norm_bound()}


@dataclass(frozen=True)
class CoupledMap:
    system: BlockSystem
    branches: tuple
    perturbation: Optional[Perturbation] = None

    # ---- batch primitives -------------------------------------------------
    @property
    def perturbed(self) -> bool:
        return self.perturbation is not None and self.perturbation.amplitude > 0

    def branch(self, name: str) -> AffineBranch:
        return self.branches[DOMAIN_NAMES.index(name)]

    def _stack(self, attr):
        return np.array([getattr(b, attr) for b in self.branches])

    def locate_domain(self, pts: np.ndarray) -> np.ndarray:
        """Index of the first domain block (A, B, C, D order) containing each
        point, -1 if none."""
        return self._locate(pts, DOMAIN_NAMES)

    def locate_image(self, pts: np.ndarray) -> np.ndarray:
        return self._locate(pts, IMAGE_NAMES)

    def _locate(self, pts, names):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        idx = np.full(len(pts), -1)
        for k in reversed(range(4)):
            idx[self.system.block(names[k]).contains_points(pts)] = k
        return idx

    def forward(self, pts: np.ndarray, idx: np.ndarray) -> np.ndarray:
        """Branch ``idx`` evaluated at ``pts`` (affine extension outside the block)."""
        scale, offset = self._stack("scale"), self._stack("offset")
        out = pts * scale[idx] + offset[idx]
        if self.perturbed:
            out = out + self.perturbation.displacement(pts, idx)
        return out

    def jacobian(self, pts: np.ndarray, idx: np.ndarray) -> np.ndarray:
        J = np.zeros(pts.shape[:1] + (3, 3))
        sc = self._stack("scale")[idx]
        J[:, [0, 1, 2], [0, 1, 2]] = sc
        if self.perturbed:
            J = J + self.perturbation.jacobian(pts, idx)
        return J

    def backward(self, ys: np.ndarray, idx: np.ndarray) -> np.ndarray:
        """Inverse of branch ``idx`` at ``ys``; Newton when perturbed."""
        scale, offset = self._stack("scale"), self._stack("offset")
        x = (ys - offset[idx]) / scale[idx]
        if not self.perturbed or len(ys) == 0:
            return x
        for _ in range(NEWTON_MAXITER):
            r = self.forward(x, idx) - ys
            if np.max(np.abs(r)) < NEWTON_TOL:
                return x
            x = x - np.linalg.solve(self.jacobian(x, idx), r[..., None])[..., 0]
        r = self.forward(x, idx) - ys
        if np.max(np.abs(r)) < NEWTON_TOL:
            return x
        raise NewtonDivergence(f"inverse residual {np.max(np.abs(r)):.3g} after {NEWTON_MAXITER} iterations")

    def apply_many(self, pts) -> tuple:
        """Returns ``(images, branch_index)``; rows with index -1 are NaN."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        idx = self.locate_domain(pts)
        out = np.full_like(pts, np.nan)
        ok = idx >= 0
        out[ok] = self.forward(pts[ok], idx[ok])
        return out, idx

    def apply_inverse_many(self, pts) -> tuple:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        idx = self.locate_image(pts)
        out = np.full_like(pts, np.nan)
        ok = idx >= 0
        out[ok] = self.backward(pts[ok], idx[ok])
        return out, idx

    # ---- single points -----------------------------------------------------
    def apply(self, p) -> np.ndarray:
        out, idx = self.apply_many(p)
        if idx[0] < 0:
            raise OutOfDomain(f"{list(np.ravel(p))} is outside A, B, C, D")
        return out[0]

    def apply_inverse(self, p) -> np.ndarray:
        out, idx = self.apply_inverse_many(p)
        if idx[0] < 0:
            raise OutOfDomain(f"{list(np.ravel(p))} is outside A*, B*, C*, D*")
        return out[0]

    def determinant_signs(self) -> dict:
        return {b.name: int(np.sign(b.det)) for b in self.branches}


def build_map(sys: BlockSystem, signs: Optional[dict] = None,
              pert: Optional[Perturbation] = None, require_valid: bool = True) -> CoupledMap:
    if require_valid:
        rep = validate_system(sys)
        if not rep.valid:
            bad = [e["clause"] for e in rep.entries if not e["passed"]]
            raise InvalidSystem("block system fails: " + ", ".join(bad))
    signs = dict(signs or {})
    unknown = set(signs) - set(DOMAIN_NAMES)
    if unknown:
        raise InvalidSigns(f"unknown branches {sorted(unknown)}")
    branches = []
    for name, img in zip(DOMAIN_NAMES, IMAGE_NAMES):
        sg = signs.get(name, (1, 1, 1))
        if len(sg) != 3 or any(isinstance(v, bool) or v not in (1, -1) for v in sg):
            raise InvalidSigns(f"sign triple for {name} must be three entries of +1/-1, got {sg!r}")
        branches.append(AffineBranch(name, sys.block(name), sys.block(img), tuple(int(v) for v in sg)))
    if pert is not None and pert.c1_norm_bound() >= 0.5:
        raise PerturbationTooLarge(f"C1 bound {pert.c1_norm_bound():.3g} >= 1/2")
    return CoupledMap(sys, tuple(branches), pert)


# ---------------------------------------------------------------------------
# orbits

@dataclass(frozen=True)
class Itinerary:
    backward: str
    forward: str
    escaped_backward: bool
    escaped_forward: bool


def itinerary(m: CoupledMap, p, n_back: int, n_fwd: int) -> Itinerary:
    letters = "ABCD"
    fwd, x, esc_f = [], np.atleast_2d(np.asarray(p, dtype=float)), False
    for _ in range(n_fwd):
        x, idx = m.apply_many(x)
        if idx[0] < 0:
            esc_f = True
            break
        fwd.append(letters[idx[0]])
    back, y, esc_b = [], np.atleast_2d(np.asarray(p, dtype=float)), False
    for _ in range(n_back):
        y, idx = m.apply_inverse_many(y)
        if idx[0] < 0:
            esc_b = True
            break
        back.append(letters[idx[0]])
    return Itinerary("".join(back), "".join(fwd), esc_b, esc_f)


def _branch_fixed_point(m: CoupledMap, name: str) -> np.ndarray:
    br = m.branch(name)
    x = br.fixed_point()[None, :]
    if not m.perturbed:
        return x[0]
    k = np.array([DOMAIN_NAMES.index(name)])
    eye = np.eye(3)
    for _ in range(NEWTON_MAXITER):
        r = m.forward(x, k) - x
        if np.max(np.abs(r)) < NEWTON_TOL:
            return x[0]
        x = x - np.linalg.solve(m.jacobian(x, k) - eye, r[..., None])[..., 0]
    raise NewtonDivergence(f"fixed point of branch {name} did not converge")


def fixed_saddles(m: CoupledMap) -> tuple:
    """Fixed saddles P in A and Q in C."""
    P = _branch_fixed_point(m, "A")
    Q = _branch_fixed_point(m, "C")
    sysm = m.system
    tol = 1e-9
    if not (sysm.A.contains_points(P, tol) and sysm.Astar.contains_points(P, tol)):
        raise InvalidSystem(f"fixed point of branch A {P} is not in A ∩ A*")
    if not (sysm.C.contains_points(Q, tol) and sysm.Cstar.contains_points(Q, tol)):
        raise InvalidSystem(f"fixed point of branch C {Q} is not in C ∩ C*")
    return P, Q


# ---------------------------------------------------------------------------
# cones

def _cone_boundary(kind: str, theta: float, n: int, rng) -> np.ndarray:
    """Unit vectors on the boundary of a cone, plus its extreme directions."""
    ang = np.concatenate([np.arange(8) * np.pi / 4, rng.uniform(0, 2 * np.pi, n)])
    a, b = np.cos(ang), np.sin(ang)
    one = np.ones_like(a)
    if kind == "u":
        v = np.stack([one, theta * a, theta * b], 1)
        extra = np.array([[1.0, 0, 0]])
    elif kind == "s":
        v = np.stack([theta * a, theta * b, one], 1)
        extra = np.array([[0, 0, 1.0]])
    elif kind == "cu":
        v = np.concatenate([np.stack([a, b, theta * one], 1), np.stack([a, b, -theta * one], 1)])
        extra = np.array([[1.0, 0, 0], [0, 1.0, 0]])
    elif kind == "cs":
        v = np.concatenate([np.stack([theta * one, a, b], 1), np.stack([-theta * one, a, b], 1)])
        extra = np.array([[0, 1.0, 0], [0, 0, 1.0]])
    else:
        raise ValueError(kind)
    v = np.concatenate([v, extra])
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _cone_excess(kind: str, w: np.ndarray, theta: float) -> np.ndarray:
    """Ratio (transverse^2 / theta^2 axial^2); the cone is ratio <= 1."""
    x, y, z = (w[..., i] ** 2 for i in range(3))
    tiny = 1e-300
    if kind == "u":
        return (y + z) / (theta ** 2 * x + tiny)
    if kind == "s":
        return (x + y) / (theta ** 2 * z + tiny)
    if kind == "cu":
        return z / (theta ** 2 * (x + y) + tiny)
    return x / (theta ** 2 * (y + z) + tiny)


@dataclass
class ConeReport:
    theta: float
    eps: float
    margins: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v > 0 for v in self.margins.values())

    def failing(self) -> list:
        return sorted(k for k, v in self.margins.items() if v <= 0)

    def to_dict(self) -> dict:
        return {"theta": self.theta, "eps": self.eps, "passed": self.passed,
                "failing": self.failing(), "margins": self.margins}


def _default_eps(m: CoupledMap) -> float:
    r = rates(m.system)
    try:
        k = shape_constants(m.system)
    except DegenerateGap:
        k = None
    e = epsilon_margin(r, k)
    return 0.0 if e is None else 0.5 * min(e, 1.0)


def _thresholds(r: RateSet, eps: float) -> dict:
    lu, lc, ls = r.lam
    mu, mc, ms = r.mu
    # growth floors; expansion clauses also need the floor above 1
    return {
        "c:Df|Cu": max(lu - eps, 1.0),
        "c:Df|Ccu": lc - eps,
        "c:Dfinv|Cs": max(1.0 / (ls + eps), 1.0),
        "c:Dfinv|Ccs": 1.0 / (lc + eps),
        "c*:Dfinv|Cs": max(1.0 / (ms + eps), 1.0),
        "c*:Dfinv|Ccs": 1.0 / (mc + eps),
        "c*:Df|Cu": max(mu - eps, 1.0),
        "c*:Df|Ccu": mc - eps,
    }


def _clause_table():
    # (clause, side, use inverse, source cone, target cone or None for growth)
    return [
        ("a:Df(Cu)<Cu", 1, False, "u", "u"),
        ("a:Df(Ccu)<Ccu", 1, False, "cu", "cu"),
        ("a:Dfinv(Cs)<Cs", 1, True, "s", "s"),
        ("a:Dfinv(Ccs)<Ccs", 1, True, "cs", "cs"),
        ("a*:Dfinv(Cs)<Cs", 2, True, "s", "s"),
        ("a*:Dfinv(Ccs)<Ccs", 2, True, "cs", "cs"),
        ("a*:Df(Cu)<Cu", 2, False, "u", "u"),
        ("a*:Df(Ccu)<Ccu", 2, False, "cu", "cu"),
        ("c:Df|Cu", 1, False, "u", None),
        ("c:Df|Ccu", 1, False, "cu", None),
        ("c:Dfinv|Cs", 1, True, "s", None),
        ("c:Dfinv|Ccs", 1, True, "cs", None),
        ("c*:Dfinv|Cs", 2, True, "s", None),
        ("c*:Dfinv|Ccs", 2, True, "cs", None),
        ("c*:Df|Cu", 2, False, "u", None),
        ("c*:Df|Ccu", 2, False, "cu", None),
    ]


def cone_check(m: CoupledMap, theta: float, n_samples: int = 2000, seed: int = 0,
               eps: Optional[float] = None) -> ConeReport:
    """Sampled check of the cone-invariance and growth clauses on R1 and R2.

    Invariance margins are ``1 - ratio`` with ``ratio`` the worst image
    cone ratio (cone means ratio <= 1).  Growth margins are the worst
    ``|Df v| / |v|`` (or ``|Df^-1 v|``) minus the required floor.  On R2 the
    forward map preserves the unstable cones (the mirror of R1's clauses).
    """
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    if eps is None:
        eps = _default_eps(m)
    rng = philox(seed, 2)
    sysm = m.system
    # R1 side: domain points of A, D.  R2 side: preimages of B*, C* points.
    jac = {}
    for side, names in ((1, ("A", "D")), (2, ("Bstar", "Cstar"))):
        pts = np.concatenate([sysm.block(n).lo + sysm.block(n).sides * rng.random((n_samples, 3))
                              for n in names])
        if side == 1:
            idx = m.locate_domain(pts)
            idx = np.where(idx < 0, 0, idx)
            x = pts
        else:
            idx = m.locate_image(pts)
            x = m.backward(pts, idx)
        J = m.jacobian(x, idx)
        jac[side] = (J, np.linalg.inv(J))
    floors = _thresholds(rates(sysm), eps)
    rep = ConeReport(theta=theta, eps=eps)
    for clause, side, inv, src, tgt in _clause_table():
        M = jac[side][1 if inv else 0]
        # fixed directions at every point, plus one random direction per point
        v = _cone_boundary(src, theta, 0, rng)
        w = np.einsum("nij,kj->nki", M, v).reshape(-1, 3)
        rnd = _cone_boundary(src, theta, len(M), rng)
        pick = rng.integers(len(rnd), size=len(M))
        w = np.concatenate([w, np.einsum("nij,nj->ni", M, rnd[pick])])
        if tgt is not None:
            rep.margins[clause] = float(1 - np.max(_cone_excess(tgt, w, theta)))
        else:
            rep.margins[clause] = float(np.min(np.linalg.norm(w, axis=1)) - floors[clause])
    return rep


def analytic_cone_margins(r: RateSet, theta: float, eps: float) -> dict:
    """Closed-form worst margins for a diagonal map with rates ``r``
    (orientation signs do not matter)."""
    t2 = theta ** 2
    lam = np.array(r.lam)
    mu = np.array(r.mu)

    def inv_margins(j, tag):
        u, c, s = j ** 2
        return {
            f"{tag}(Cu)<Cu": 1 - max(c, s) / u,
            f"{tag}(Ccu)<Ccu": 1 - s / min(u, c),
        }

    def inv_margins_back(j, tag):
        u, c, s = j ** 2
        return {
            f"{tag}(Cs)<Cs": 1 - max(u, c) / s,
            f"{tag}(Ccs)<Ccs": 1 - u / min(c, s),
        }

    def growth(j):
        u, c, s = j ** 2
        return {
            "Cu": np.sqrt((u + t2 * min(c, s)) / (1 + t2)),
            "Ccu": np.sqrt(min(min(u, c), (min(u, c) + t2 * s) / (1 + t2))),
        }

    def growth_back(j):
        u, c, s = j ** 2
        return {
            "Cs": np.sqrt((s + t2 * min(u, c)) / (1 + t2)),
            "Ccs": np.sqrt(min(min(c, s), (min(c, s) + t2 * u) / (1 + t2))),
        }

    floors = _thresholds(r, eps)
    out = {}
    out.update({k.replace("Df", "a:Df"): v for k, v in inv_margins(lam, "Df").items()})
    out.update({k.replace("Dfinv", "a:Dfinv"): v for k, v in inv_margins_back(1 / lam, "Dfinv").items()})
    out.update({k.replace("Dfinv", "a*:Dfinv"): v for k, v in inv_margins_back(1 / mu, "Dfinv").items()})
    out.update({k.replace("Df", "a*:Df"): v for k, v in inv_margins(mu, "Df").items()})
    g, gb = growth(lam), growth_back(1 / lam)
    out["c:Df|Cu"] = g["Cu"] - floors["c:Df|Cu"]
    out["c:Df|Ccu"] = g["Ccu"] - floors["c:Df|Ccu"]
    out["c:Dfinv|Cs"] = gb["Cs"] - floors["c:Dfinv|Cs"]
    out["c:Dfinv|Ccs"] = gb["Ccs"] - floors["c:Dfinv|Ccs"]
    g, gb = growth(mu), growth_back(1 / mu)
    out["c*:Df|Cu"] = g["Cu"] - floors["c*:Df|Cu"]
    out["c*:Df|Ccu"] = g["Ccu"] - floors["c*:Df|Ccu"]
    out["c*:Dfinv|Cs"] = gb["Cs"] - floors["c*:Dfinv|Cs"]
    out["c*:Dfinv|Ccs"] = gb["Ccs"] - floors["c*:Dfinv|Ccs"]
    return {k: float(v) for k, v in out.items()}
