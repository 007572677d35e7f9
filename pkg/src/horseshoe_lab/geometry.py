"""Blocks, penetration, block-system validation and the scalar constants
derived from a block system (rates, a1/a2/b1/b2, epsilon margin).

Coordinates are ordered ``(u, c, s)``: unstable, center, stable.
"""
from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, DegenerateGap

AXES = ("u", "c", "s")
BLOCK_NAMES = ("A", "B", "C", "D", "Astar", "Bstar", "Cstar", "Dstar")
DOMAIN_NAMES = ("A", "B", "C", "D")
IMAGE_NAMES = ("Astar", "Bstar", "Cstar", "Dstar")

# absolute tolerance for closed/strict interval comparisons
TOL = 1e-12


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"non-finite interval [{self.lo}, {self.hi}]")
        if not self.lo < self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float, tol: float = TOL) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def inside(self, other: "Interval", tol: float = TOL) -> bool:
        """Closed containment ``self ⊆ other``."""
        return other.lo - tol <= self.lo and self.hi <= other.hi + tol

    def strictly_inside(self, other: "Interval", tol: float = TOL) -> bool:
        return other.lo + tol < self.lo and self.hi < other.hi - tol

    def overlaps(self, other: "Interval") -> bool:
        """Closed intervals share at least one point."""
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def as_list(self) -> list:
        return [self.lo, self.hi]


@dataclass(frozen=True)
class Block:
    u: Interval
    c: Interval
    s: Interval

    @classmethod
    def from_lists(cls, spec) -> "Block":
        if len(spec) != 3:
            raise ValueError("a block needs three [lo, hi] pairs")
        return cls(*(Interval(float(a), float(b)) for a, b in spec))

    def axis(self, k: int) -> Interval:
        return (self.u, self.c, self.s)[k]

    @property
    def intervals(self) -> tuple:
        return (self.u, self.c, self.s)

    @property
    def lo(self) -> np.ndarray:
        return np.array([iv.lo for iv in self.intervals])

    @property
    def hi(self) -> np.ndarray:
        return np.array([iv.hi for iv in self.intervals])

    @property
    def sides(self) -> np.ndarray:
        return self.hi - self.lo

    def volume(self) -> float:
        return float(np.prod(self.sides))

    def intersects(self, other: "Block") -> bool:
        return all(a.overlaps(b) for a, b in zip(self.intervals, other.intervals))

    def contains_points(self, pts: np.ndarray, tol: float = 0.0) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.all((pts >= self.lo - tol) & (pts <= self.hi + tol), axis=-1)

    def hull(self, other: "Block") -> "Block":
        return Block(*(a.hull(b) for a, b in zip(self.intervals, other.intervals)))

    def as_lists(self) -> list:
        return [iv.as_list() for iv in self.intervals]


def penetrates(X: Block, Y: Block, strict: bool = False) -> bool:
    """True if X crosses Y completely along exactly one axis and sits inside
    Y on the other two, so that X \\ Y has two components.

    With ``strict=True`` the transverse containment is strict as well, which
    is the literal "X misses the edges of Y" reading.  The default allows X
    to be flush with Y on transverse axes; see README for why.
    """
    spanning = [a.lo < b.lo - TOL and a.hi > b.hi + TOL
                for a, b in zip(X.intervals, Y.intervals)]
    if sum(spanning) != 1:
        return False
    k = spanning.index(True)
    for j in range(3):
        if j == k:
            continue
        a, b = X.axis(j), Y.axis(j)
        ok = a.strictly_inside(b) if strict else a.inside(b)
        if not ok:
            return False
    return True


@dataclass(frozen=True)
class BlockSystem:
    A: Block
    B: Block
    C: Block
    D: Block
    Astar: Block
    Bstar: Block
    Cstar: Block
    Dstar: Block

    @property
    def Estar(self) -> Block:
        """Minimal block containing A* and D*."""
        return self.Astar.hull(self.Dstar)

    @property
    def F(self) -> Block:
        """Minimal block containing B and C."""
        return self.B.hull(self.C)

    def block(self, name: str) -> Block:
        return getattr(self, name)

    @classmethod
    def from_dict(cls, d: dict) -> "BlockSystem":
        missing = [n for n in BLOCK_NAMES if n not in d]
        if missing:
            raise ConfigError(f"missing blocks: {', '.join(missing)}")
        blocks = {}
        for name in BLOCK_NAMES:
            spec = d[name]
            try:
                vals = [[_finite(x) for x in pair] for pair in spec]
                if any(len(p) != 2 for p in vals):
                    raise ValueError("each axis needs [lo, hi]")
                blocks[name] = Block.from_lists(vals)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"block {name}: {exc}") from None
        return cls(**blocks)

    def to_dict(self) -> dict:
        return {n: self.block(n).as_lists() for n in BLOCK_NAMES}

    def map_c_axis(self, alpha: float, beta: float) -> "BlockSystem":
        """Apply ``c -> alpha*c + beta`` (alpha > 0) to every block."""
        def tr(b):
            return Block(b.u, Interval(alpha * b.c.lo + beta, alpha * b.c.hi + beta), b.s)
        return BlockSystem(**{n: tr(self.block(n)) for n in BLOCK_NAMES})


def _finite(x) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValueError(f"not a number: {x!r}")
    v = float(x)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value {x!r}")
    return v


@dataclass
class ValidationReport:
    entries: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def add(self, clause: str, passed: bool, detail: str = ""):
        self.entries.append({"clause": clause, "passed": bool(passed), "detail": detail})

    @property
    def valid(self) -> bool:
        return all(e["passed"] for e in self.entries)

    def passed(self, clause: str) -> bool:
        return next(e["passed"] for e in self.entries if e["clause"] == clause)

    def to_dict(self) -> dict:
        return {"valid": self.valid, "entries": self.entries, "warnings": self.warnings}


def _is_translate(X: Block, Y: Block, axis: int) -> bool:
    for j in range(3):
        a, b = X.axis(j), Y.axis(j)
        if j == axis:
            if abs(a.length() - b.length()) > TOL:
                return False
        elif abs(a.lo - b.lo) > TOL or abs(a.hi - b.hi) > TOL:
            return False
    return True


def validate_system(sys: BlockSystem) -> ValidationReport:
    rep = ValidationReport()
    unit = Block(Interval(0, 1), Interval(0, 1), Interval(0, 1))

    outside = [n for n in BLOCK_NAMES
               if not all(iv.inside(ui) for iv, ui in zip(sys.block(n).intervals, unit.intervals))]
    rep.add("containment", not outside,
            "outside [0,1]^3: " + ", ".join(outside) if outside else "")

    for group, label in ((DOMAIN_NAMES, "disjoint_domains"), (IMAGE_NAMES, "disjoint_images")):
        bad = [f"{a}/{b}" for i, a in enumerate(group) for b in group[i + 1:]
               if sys.block(a).intersects(sys.block(b))]
        rep.add(label, not bad, "intersecting: " + ", ".join(bad) if bad else "")

    for clause, (x, y, ax) in {
        "translate_D_A_u": ("D", "A", 0),
        "translate_C_B_c": ("C", "B", 1),
        "translate_Dstar_Astar_c": ("Dstar", "Astar", 1),
        "translate_Cstar_Bstar_s": ("Cstar", "Bstar", 2),
    }.items():
        rep.add(clause, _is_translate(sys.block(x), sys.block(y), ax))

    def pen(x, y):
        return penetrates(sys.block(x), sys.block(y))

    rep.add("a", all(pen(x, y) for x in ("Astar", "Dstar") for y in ("A", "D")),
            "A*, D* penetrate A and D")
    rep.add("a_star", all(pen(x, y) for x in ("B", "C") for y in ("Bstar", "Cstar")),
            "B, C penetrate B* and C*")
    # (b) is symmetric under relabelling B<->C together with B*<->C*, which
    # leaves the map and every derived constant unchanged.
    literal = pen("Astar", "C") and pen("Dstar", "B")
    mirrored = pen("Astar", "B") and pen("Dstar", "C")
    detail = "A* penetrates C, D* penetrates B" if literal else (
        "holds with B/C labels exchanged (A* penetrates B, D* penetrates C)" if mirrored else "")
    rep.add("b", literal or mirrored, detail)
    rep.add("c", all(pen(x, y) for x in ("A", "D") for y in ("Bstar", "Cstar")),
            "A, D penetrate B* and C*")

    strict_ok = all(penetrates(sys.block(x), sys.block(y), strict=True) for x, y in (
        ("Astar", "A"), ("Astar", "D"), ("Dstar", "A"), ("Dstar", "D"),
        ("B", "Bstar"), ("B", "Cstar"), ("C", "Bstar"), ("C", "Cstar"),
        ("A", "Bstar"), ("A", "Cstar"), ("D", "Bstar"), ("D", "Cstar")))
    if not strict_ok:
        rep.warnings.append("some penetrations are flush with a face (edge contact)")
    return rep


@dataclass(frozen=True)
class RateSet:
    lam_u: float
    lam_c: float
    lam_s: float
    mu_u: float
    mu_c: float
    mu_s: float

    def __post_init__(self):
        if min(self.lam + self.mu) <= 0:
            raise ValueError("rates must be positive")

    @property
    def lam(self) -> tuple:
        return (self.lam_u, self.lam_c, self.lam_s)

    @property
    def mu(self) -> tuple:
        return (self.mu_u, self.mu_c, self.mu_s)

    def is_horseshoe_shaped(self) -> bool:
        return (self.lam_u > 1 > 0.5 > self.lam_c > self.lam_s > 0
                and self.mu_u > self.mu_c > 2 > 1 > self.mu_s > 0)

    def to_dict(self) -> dict:
        return {"lambda": list(self.lam), "mu": list(self.mu),
                "mu_convention": "image-over-domain |B*_j|/|B_j|"}


def rates(sys: BlockSystem) -> RateSet:
    """Per-axis rates of the affine branches A->A* and B->B*.

    Both are image length over domain length, so mu is the expansion of f
    on B.  The reciprocal convention would contradict the horseshoe shape
    conditions (mu_u > 1 > mu_s).
    """
    lam = sys.Astar.sides / sys.A.sides
    mu = sys.Bstar.sides / sys.B.sides
    return RateSet(*map(float, lam), *map(float, mu))


@dataclass(frozen=True)
class ShapeConstants:
    a1: float
    a2: float
    b1: float
    b2: float
    warnings: tuple = ()

    @property
    def a1_eff(self) -> float:
        return self.a1 / (1 + self.b1)

    @property
    def a2_eff(self) -> float:
        return self.a2 / (1 + self.b2)

    def to_dict(self) -> dict:
        return {"a1": self.a1, "a2": self.a2, "b1": self.b1, "b2": self.b2,
                "a1_eff": self.a1_eff, "a2_eff": self.a2_eff,
                "warnings": list(self.warnings)}


def shape_constants(sys: BlockSystem) -> ShapeConstants:
    # exact rationals of the decimal inputs, so that e.g. 0.35/0.1 is exactly 3.5
    Ac, Asc, Ec = _exact_len(sys.A.c), _exact_len(sys.Astar.c), _exact_len(sys.Estar.c)
    Bc, Bsc, Fc = _exact_len(sys.B.c), _exact_len(sys.Bstar.c), _exact_len(sys.F.c)
    g1 = Ec - 2 * Asc
    g2 = Fc - 2 * Bc
    if g1 <= TOL:
        raise DegenerateGap(f"|E*_c| - 2|A*_c| = {float(g1):.3g}: A* and D* touch or overlap on the c-axis")
    if g2 <= TOL:
        raise DegenerateGap(f"|F_c| - 2|B_c| = {float(g2):.3g}: B and C touch or overlap on the c-axis")
    b1 = float((Ac - Ec) / g1)
    b2 = float((Bsc - Fc) / g2)
    warns = tuple(f"{n} = {v:.6g} is negative" for n, v in (("b1", b1), ("b2", b2)) if v < 0)
    return ShapeConstants(a1=float((3 * Asc - Ac) / g1), a2=float((3 * Bc - Bsc) / g2), b1=b1, b2=b2,
                          warnings=warns)


def _exact_len(iv: Interval) -> Fraction:
    return Fraction(repr(float(iv.hi))) - Fraction(repr(float(iv.lo)))


def dimension_reducible(r: RateSet) -> bool:
    return r.lam_c ** 2 > r.lam_s and r.mu_u > r.mu_c ** 2


def _constraints(r: RateSet, b1: float, b2: float) -> dict:
    """Each condition as a polynomial in eps that must be strictly positive.

    Perturbed rates: lam_u-e, lam_c+e, lam_s+e, mu_u-e, mu_c-e, mu_s+e.
    Coefficients are highest degree first (numpy.polyval order).
    """
    lu, lc, ls = r.lam
    mu, mc, ms = r.mu
    return {
        "lam_u>1": [-1.0, lu - 1],
        "lam_c<1/2": [-1.0, 0.5 - lc],
        "lam_c>lam_s": [0.0, lc - ls],
        "lam_s>0": [1.0, ls],
        "mu_u>mu_c": [0.0, mu - mc],
        "mu_c>2": [-1.0, mc - 2],
        "mu_s<1": [-1.0, 1 - ms],
        "mu_s>0": [1.0, ms],
        # lam_c^2 > lam_s
        "lam_c^2>lam_s": [1.0, 2 * lc - 1, lc * lc - ls],
        # mu_u > mu_c^2
        "mu_u>mu_c^2": [-1.0, 2 * mc - 1, mu - mc * mc],
        # lam_c (1+b1) < 1
        "lam_c(1+b1)<1": [-(1 + b1), 1 - lc * (1 + b1)],
        # mu_c^-1 (1+b2) < 1  <=>  mu_c - (1+b2) > 0 while mu_c > 0
        "(1+b2)/mu_c<1": [-1.0, mc - (1 + b2)],
        # lam_c^2 / lam0c < 1
        "lam_c^2<lam0c": [-1.0, -2 * lc, lc - lc * lc],
        # mu_c^-2 mu0c < 1  <=>  mu_c^2 - mu0c > 0
        "mu_c^2>mu0c": [1.0, -2 * mc, mc * mc - mc],
    }


def _first_positive_root(coefs) -> float:
    coefs = np.trim_zeros(np.asarray(coefs, dtype=float), "f")
    if coefs.size <= 1:
        return math.inf
    roots = np.roots(coefs)
    real = [z.real for z in roots if abs(z.imag) < 1e-12 and z.real > 0]
    return min(real) if real else math.inf


def epsilon_margin(r: RateSet, k: Optional[ShapeConstants] = None) -> Optional[float]:
    """Supremum eps* such that every perturbed-rate condition holds on (0, eps*).

    Returns None when some condition already fails as eps -> 0+.  ``k=None``
    means b1 = b2 = 0.
    """
    b1, b2 = (k.b1, k.b2) if k is not None else (0.0, 0.0)
    best = math.inf
    for coefs in _constraints(r, b1, b2).values():
        c = np.asarray(coefs, dtype=float)
        g0 = c[-1]
        slope = c[-2] if c.size >= 2 else 0.0
        if g0 < 0 or (g0 == 0 and slope <= 0):
            return None
        best = min(best, _first_positive_root(c))
    return best


def binding_constraint(r: RateSet, k: Optional[ShapeConstants] = None) -> Optional[str]:
    b1, b2 = (k.b1, k.b2) if k is not None else (0.0, 0.0)
    eps = epsilon_margin(r, k)
    if eps is None or math.isinf(eps):
        return None
    for name, coefs in _constraints(r, b1, b2).items():
        if abs(_first_positive_root(coefs) - eps) < 1e-15:
            return name
    return None
