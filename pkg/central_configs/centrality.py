"""
Centrality tests for N-body configurations.

Two independent routes decide whether a configuration is central: the
pair-space residuals (general cross-product condition and the six four-body
equations) and the acceleration oracle lambda_fit, which fits a single
proportionality constant between every body's acceleration and its offset
from the center of mass. Body indices are 0-based throughout; labels in
reports are 1-based.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from central_configs.config import DEFAULT_TOLERANCES
from central_configs.exceptions import CentralConfigError, InputFormatError
from central_configs.pairspace import (
    Configuration,
    DistanceSet,
    Masses,
    Pair,
    label,
    pairs,
    reduced_masses,
    triplets,
)

logger = logging.getLogger(__name__)

FOUR_BODY_LABELS = tuple(f"4cc:{tag}" for tag in "abcdef")
DZIOBEK_LABELS = tuple(f"dziobek:{tag}" for tag in "abcd")

SHAPE_KINDS = (
    "Tetrahedral",
    "Collinear",
    "EquilateralCentered",
    "KiteConvex",
    "KiteConcave",
    "Rhombus",
    "IsoscelesTrapezium",
    "PlanarOther",
    "NonPlanarOther",
)

# Each side: (mass body, p pair added, p pair subtracted, cross product key), 1-based.
# Cross products: a = q21 x q31, b = q21 x q41, c = q41 x q31, d = q42 x q32
_FOUR_BODY_TERMS = {
    "a": ((3, (3, 1), (3, 2), "a"), (4, (4, 2), (4, 1), "b")),
    "b": ((2, (2, 1), (3, 2), "a"), (4, (4, 3), (4, 1), "c")),
    "c": ((1, (2, 1), (3, 1), "a"), (4, (4, 2), (4, 3), "d")),
    "d": ((2, (4, 2), (2, 1), "b"), (3, (4, 3), (3, 1), "c")),
    "e": ((1, (4, 1), (2, 1), "b"), (3, (2, 3), (4, 3), "d")),
    "f": ((1, (4, 1), (3, 1), "c"), (2, (3, 2), (4, 2), "d")),
}
_CROSS_PAIRS = {
    "a": ((2, 1), (3, 1)),
    "b": ((2, 1), (4, 1)),
    "c": ((4, 1), (3, 1)),
    "d": ((4, 2), (3, 2)),
}


def cross(u: np.ndarray, v: np.ndarray):
    """Cross product; the scalar normal component for planar vectors"""
    if len(u) == 2:
        return float(u[0] * v[1] - u[1] * v[0])
    return np.cross(u, v)


def _magnitude(value) -> float:
    return float(np.linalg.norm(value)) if np.ndim(value) else abs(float(value))


def _normalize(raw, denominator: float) -> Tuple[float, bool]:
    if denominator == 0.0:
        return 0.0, True
    if np.ndim(raw):
        return float(np.linalg.norm(raw)) / denominator, False
    return float(raw) / denominator, False


@dataclass
class ResidualReport:
    """
    Per-equation residuals.

    raw holds lhs - rhs (a scalar for planar input, a vector in 3-D);
    normalized divides by the sum of magnitudes of the individual terms, so
    it is signed in the plane and a nonnegative magnitude in space.
    """
    labels: List[str]
    raw: List[Any]
    normalized: List[float]
    degenerate: List[bool]
    flags: List[str] = field(default_factory=list)

    @property
    def max_normalized(self) -> float:
        return max((abs(v) for v in self.normalized), default=0.0)

    def is_central(self, tol: float = DEFAULT_TOLERANCES.residual) -> bool:
        return self.max_normalized < tol

    def entry(self, name: str) -> Dict[str, Any]:
        k = self.labels.index(name)
        return {"raw": self.raw[k], "normalized": self.normalized[k], "degenerate": self.degenerate[k]}

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {name: self.entry(name) for name in self.labels}
        result["max_normalized"] = self.max_normalized
        result["flags"] = list(self.flags)
        return result


@dataclass
class LambdaFit:
    """Least-squares fit of a_i = -lambda (r_i - R)"""
    lam: float
    max_relative_deviation: float
    per_body_deviation: List[float]
    accelerations: np.ndarray
    center_of_mass: np.ndarray
    tolerance: float = 1e-8

    @property
    def is_central(self) -> bool:
        return self.max_relative_deviation < self.tolerance

    @property
    def omega(self) -> float:
        """Angular rate of the relative equilibrium (nan when lambda <= 0)"""
        return math.sqrt(self.lam) if self.lam > 0 else math.nan

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda": self.lam,
            "max_relative_deviation": self.max_relative_deviation,
            "per_body_deviation": list(self.per_body_deviation),
            "tolerance": self.tolerance,
            "central": self.is_central,
        }


@dataclass
class ShapeClass:
    """
    Geometric class of a four-body configuration.

    canonical_order lists body indices so that config.relabeled(order)
    follows the family labelling (kite axis bodies first and last, centered
    body last, trapezium long base first and last).
    """
    kind: str
    tolerance: float
    equalities: List[str] = field(default_factory=list)
    canonical_order: Optional[Tuple[int, ...]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "tolerance": self.tolerance,
            "equalities": list(self.equalities),
            "canonical_order": [i + 1 for i in self.canonical_order] if self.canonical_order else None,
        }


def _check(config: Configuration, masses: Masses):
    if config.n != masses.n:
        raise InputFormatError(f"{config.n} positions but {masses.n} masses")


def newtonian_accelerations(positions: np.ndarray, masses: Masses) -> np.ndarray:
    """a_i = sum_j G m_j (r_j - r_i) / |r_j - r_i|^3"""
    r = np.asarray(positions, dtype=float)
    diff = r[None, :, :] - r[:, None, :]
    dist = np.linalg.norm(diff, axis=-1)
    np.fill_diagonal(dist, np.inf)
    weights = masses.G * masses.array[None, :] / dist ** 3
    return np.einsum("ij,ijk->ik", weights, diff)


def newtonian_F(config: Configuration, masses: Masses, triplet: Sequence[int]) -> np.ndarray:
    """F_ijk = G M (q_ij/q_ij^3 + q_jk/q_jk^3 + q_ki/q_ki^3)"""
    _check(config, masses)
    i, j, k = triplet
    if len({i, j, k}) != 3:
        raise ValueError(f"triplet indices must be distinct, got {tuple(triplet)}")
    r = config.positions
    total = np.zeros(config.dim)
    for a, b in ((i, j), (j, k), (k, i)):
        q = r[a] - r[b]
        total += q / np.linalg.norm(q) ** 3
    return masses.G * masses.total * total


def J_over_mu(config: Configuration, masses: Masses, pair: Sequence[int]) -> np.ndarray:
    """(1/mu_ij) J_ij = sum over k of (m_k / M) F_ijk"""
    i, j = pair
    result = np.zeros(config.dim)
    for k in range(config.n):
        if k in (i, j):
            continue
        result += masses.m[k] / masses.total * newtonian_F(config, masses, (i, j, k))
    return result


def _is_collinear(config: Configuration, tol: float) -> bool:
    r = config.positions
    scale = config.characteristic_length() ** 2
    for j, k in itertools.combinations(range(1, config.n), 2):
        if _magnitude(cross(r[j] - r[0], r[k] - r[0])) > tol * scale:
            return False
    return True


def cc_residuals_general(config: Configuration, masses: Masses,
                         collinear_tol: float = 1e-12) -> ResidualReport:
    """
    Residual of sum_k m_k (q_ij x q_jk)(p_ik - p_jk) for every pair.

    The condition only characterizes centrality for non-collinear
    configurations; collinear input is flagged as vacuous.
    """
    _check(config, masses)
    if config.n < 3:
        raise InputFormatError("the cross-product condition needs at least three bodies")
    r = config.positions
    dist = config.distance_matrix()
    labels, raws, normalized, degenerate = [], [], [], []
    for i, j in pairs(config.n):
        raw = 0.0 if config.dim == 2 else np.zeros(3)
        denominator = 0.0
        for k in range(config.n):
            if k in (i, j):
                continue
            c = cross(r[i] - r[j], r[j] - r[k])
            p_ik, p_jk = dist[i, k] ** -3, dist[j, k] ** -3
            raw = raw + masses.m[k] * c * (p_ik - p_jk)
            denominator += masses.m[k] * _magnitude(c) * (p_ik + p_jk)
        value, flat = _normalize(raw, denominator)
        labels.append(f"cceq:{label((i, j))}")
        raws.append(raw)
        normalized.append(value)
        degenerate.append(flat)

    flags = []
    if _is_collinear(config, collinear_tol):
        flags.append("collinear: condition vacuous")
        normalized = [0.0] * len(normalized)
    return ResidualReport(labels, raws, normalized, degenerate, flags)


def cc_residuals_four(config: Configuration, masses: Masses,
                      collinear_tol: float = 1e-12) -> ResidualReport:
    """Signed lhs - rhs of the six four-body centrality equations"""
    _check(config, masses)
    if config.n != 4:
        raise InputFormatError(f"four-body residuals need 4 bodies, got {config.n}")
    r = config.positions
    dist = config.distance_matrix()

    def q(a: int, b: int) -> np.ndarray:
        return r[a - 1] - r[b - 1]

    def p(ab: Pair) -> float:
        return dist[ab[0] - 1, ab[1] - 1] ** -3

    crosses = {key: cross(q(*u), q(*v)) for key, (u, v) in _CROSS_PAIRS.items()}
    raws, normalized, degenerate = [], [], []
    for tag in "abcdef":
        sides, denominator = [], 0.0
        for body, plus, minus, key in _FOUR_BODY_TERMS[tag]:
            m_k, c = masses.m[body - 1], crosses[key]
            sides.append(m_k * (p(plus) - p(minus)) * c)
            denominator += m_k * (p(plus) + p(minus)) * _magnitude(c)
        raw = sides[0] - sides[1]
        value, flat = _normalize(raw, denominator)
        raws.append(raw)
        normalized.append(value)
        degenerate.append(flat)

    flags = []
    if _is_collinear(config, collinear_tol):
        flags.append("collinear: condition vacuous")
    return ResidualReport(list(FOUR_BODY_LABELS), raws, normalized, degenerate, flags)


def lambda_fit(config: Configuration, masses: Masses, tol: float = 1e-8,
               acceleration_floor: float = DEFAULT_TOLERANCES.acceleration_floor) -> LambdaFit:
    """
    Acceleration oracle.

    lambda minimizes sum_i m_i |a_i + lambda (r_i - R)|^2. Each body's
    deviation is |a_i + lambda (r_i - R)| relative to |a_i|, floored at
    acceleration_floor times the largest acceleration so that a body resting
    at the center of mass is measured against the system's scale.
    """
    _check(config, masses)
    a = newtonian_accelerations(config.positions, masses)
    R = config.center_of_mass(masses)
    d = config.positions - R
    w = masses.array

    a_norm = np.linalg.norm(a, axis=1)
    if not np.any(a_norm > 0):
        raise CentralConfigError("all accelerations vanish; cannot fit lambda")
    lam = -float(np.sum(w * np.einsum("ij,ij->i", a, d)) / np.sum(w * np.einsum("ij,ij->i", d, d)))

    mismatch = np.linalg.norm(a + lam * d, axis=1)
    reference = np.maximum(a_norm, acceleration_floor * a_norm.max())
    deviation = mismatch / reference
    logger.debug("lambda=%.17g max deviation=%.3e", lam, deviation.max())
    return LambdaFit(
        lam=lam,
        max_relative_deviation=float(deviation.max()),
        per_body_deviation=[float(x) for x in deviation],
        accelerations=a,
        center_of_mass=R,
        tolerance=tol,
    )


def _dziobek_sides(d: DistanceSet) -> List[Tuple[float, float]]:
    if d.n != 4:
        raise InputFormatError(f"mass-independent relations need 4 bodies, got {d.n}")

    def p(ab: int) -> float:
        return d.p_of(ab // 10 - 1, ab % 10 - 1)

    p12, p13, p14, p23, p24, p34 = (p(x) for x in (12, 13, 14, 23, 24, 34))
    return [
        ((p13 - p23) * (p24 - p34) * (p14 - p12), (p24 - p14) * (p12 - p13) * (p23 - p34)),
        ((p12 - p23) * (p13 - p34) * (p14 - p24), (p12 - p24) * (p13 - p23) * (p14 - p34)),
        ((p13 - p14) * (p23 - p12) * (p34 - p24), (p13 - p12) * (p23 - p24) * (p34 - p14)),
        ((p14 - p13) * (p24 - p12) * (p34 - p23), (p14 - p12) * (p24 - p23) * (p34 - p13)),
    ]


def dziobek_residuals(d: DistanceSet) -> ResidualReport:
    """Four mass-independent relations in the p_ij = q_ij^-3 variables"""
    raws, normalized, degenerate = [], [], []
    for lhs, rhs in _dziobek_sides(d):
        raw = lhs - rhs
        value, flat = _normalize(raw, abs(lhs) + abs(rhs))
        raws.append(raw)
        normalized.append(value)
        degenerate.append(flat)
    return ResidualReport(list(DZIOBEK_LABELS), raws, normalized, degenerate)


def dziobek_ratios(d: DistanceSet) -> Tuple[float, float, float, float]:
    """
    lhs / rhs of each mass-independent relation.

    When all p_ij are distinct, ratio_a * ratio_b * ratio_d == ratio_c, so
    relations (a), (b) and (c) holding forces (d).
    """
    ratios = []
    for lhs, rhs in _dziobek_sides(d):
        if rhs != 0.0:
            ratios.append(lhs / rhs)
        else:
            ratios.append(math.inf if lhs != 0.0 else math.nan)
    return tuple(ratios)


def trapezium_massless_residual(d: DistanceSet) -> float:
    """
    Normalized residual of (p31 - p41)(p43 - p23) = (p41 - p21)(p42 - p32).

    Holds for every central isosceles trapezium labelled with the long
    base on bodies 1 and 4, whatever the masses.
    """
    def p(a: int, b: int) -> float:
        return d.p_of(a - 1, b - 1)

    lhs = (p(3, 1) - p(4, 1)) * (p(4, 3) - p(2, 3))
    rhs = (p(4, 1) - p(2, 1)) * (p(4, 2) - p(3, 2))
    value, _ = _normalize(lhs - rhs, abs(lhs) + abs(rhs))
    return value


def pair_angular_momentum(config: Configuration, velocities: np.ndarray,
                          masses: Masses) -> Tuple[Dict[Pair, Any], Any]:
    """
    L_ij = q_ij x mu_ij qdot_ij for every pair, plus the total.

    Scalars for planar input, vectors in 3-D.
    """
    _check(config, masses)
    v = np.asarray(velocities, dtype=float)
    if v.shape != config.positions.shape:
        raise InputFormatError(f"velocities shape {v.shape} does not match positions {config.positions.shape}")
    mu, _ = reduced_masses(masses)
    r = config.positions
    momenta = {(i, j): mu[(i, j)] * cross(r[i] - r[j], v[i] - v[j]) for i, j in pairs(config.n)}
    total = sum(momenta.values(), 0.0 if config.dim == 2 else np.zeros(3))
    return momenta, total


def _planar_coordinates(config: Configuration) -> np.ndarray:
    if config.dim == 2:
        return np.array(config.positions)
    centered = config.positions - config.positions.mean(axis=0)
    _, _, vt = np.linalg.svd(centered)
    return centered @ vt[:2].T


def _side(pts: np.ndarray, c: int, d: int, x: int) -> float:
    return cross(pts[d] - pts[c], pts[x] - pts[c])


def classify(config: Configuration, tol: float = DEFAULT_TOLERANCES.classify) -> ShapeClass:
    """
    Geometric class of a four-body configuration.

    Distances count as equal within tol times the mean distance; collinearity
    and planarity use tol relative to the matching power of the largest
    distance. The first matching class wins in the order Collinear,
    Tetrahedral/NonPlanarOther, EquilateralCentered, Rhombus, kites,
    IsoscelesTrapezium, PlanarOther.
    """
    if config.n != 4:
        raise InputFormatError(f"classification needs 4 bodies, got {config.n}")
    dist = config.distance_matrix()
    length = config.characteristic_length()
    mean = config.distances().mean()

    def eq(x: Pair, y: Pair) -> bool:
        return abs(dist[x] - dist[y]) <= tol * mean

    def names(*items: Pair) -> str:
        return "=".join(f"q{label(p)}" for p in items)

    if _is_collinear(config, tol):
        return ShapeClass("Collinear", tol)

    if config.dim == 3:
        r = config.positions
        volume = abs(np.linalg.det(np.array([r[1] - r[0], r[2] - r[0], r[3] - r[0]])))
        if volume > tol * length ** 3:
            all_pairs = pairs(4)
            if all(eq(all_pairs[0], x) for x in all_pairs[1:]):
                return ShapeClass("Tetrahedral", tol, [names(*all_pairs)], (0, 1, 2, 3))
            return ShapeClass("NonPlanarOther", tol)

    for center in range(4):
        outer = [k for k in range(4) if k != center]
        sides = [(a, b) for a, b in itertools.combinations(outer, 2)]
        spokes = [(min(k, center), max(k, center)) for k in outer]
        if eq(sides[0], sides[1]) and eq(sides[0], sides[2]) and eq(spokes[0], spokes[1]) and eq(spokes[0], spokes[2]):
            return ShapeClass("EquilateralCentered", tol, [names(*sides), names(*spokes)], (*outer, center))

    pts = _planar_coordinates(config)
    matchings = [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))]
    for diag_a, diag_b in matchings:
        (a, b), (c, d) = diag_a, diag_b
        edges = [(min(x, y), max(x, y)) for x in (a, b) for y in (c, d)]
        if all(eq(edges[0], e) for e in edges[1:]):
            return ShapeClass("Rhombus", tol, [names(*edges)], (a, c, d, b))

    for c, d in itertools.combinations(range(4), 2):
        a, b = [k for k in range(4) if k not in (c, d)]
        ac, ad = (min(a, c), max(a, c)), (min(a, d), max(a, d))
        bc, bd = (min(b, c), max(b, c)), (min(b, d), max(b, d))
        if not (eq(ac, ad) and eq(bc, bd)):
            continue
        side_a, side_b = _side(pts, c, d, a), _side(pts, c, d, b)
        if side_a * side_b < 0:
            return ShapeClass("KiteConvex", tol, [names(ac, ad), names(bc, bd)], (a, c, d, b))
        # the axis body nearer to line cd is body 4
        if abs(side_a) < abs(side_b):
            a, b = b, a
            ac, ad, bc, bd = bc, bd, ac, ad
        return ShapeClass("KiteConcave", tol, [names(ac, ad), names(bc, bd)], (a, c, d, b))

    for legs, diagonals, bases in itertools.permutations(matchings, 3):
        if not (eq(*legs) and eq(*diagonals)):
            continue
        (a, b), (c, d) = bases
        parallel = abs(cross(pts[a] - pts[b], pts[c] - pts[d]))
        if parallel > tol * length ** 2:
            continue
        if dist[a, b] < dist[c, d]:
            a, b, c, d = c, d, a, b
        second = c if (min(a, c), max(a, c)) in legs else d
        third = d if second == c else c
        return ShapeClass("IsoscelesTrapezium", tol, [names(*legs), names(*diagonals)],
                          (a, second, third, b))

    return ShapeClass("PlanarOther", tol)


# Mass equalities forced on each family, in canonical labels (0-based)
_MASS_EQUALITIES = {
    "EquilateralCentered": [(0, 1), (0, 2)],
    "KiteConvex": [(1, 2)],
    "KiteConcave": [(1, 2)],
    "Rhombus": [(0, 3), (1, 2)],
    "IsoscelesTrapezium": [(0, 3), (1, 2)],
}


def equal_mass_constraints(config: Configuration, masses: Masses,
                           shape: Optional[ShapeClass] = None,
                           rel_tol: float = 1e-9) -> Dict[str, Any]:
    """
    Check the mass equalities a central configuration of the given shape
    must satisfy, mapped back to the caller's body labels.
    """
    _check(config, masses)
    shape = shape or classify(config)
    order = shape.canonical_order
    constraints = []
    for x, y in _MASS_EQUALITIES.get(shape.kind, []):
        i, j = order[x], order[y]
        mi, mj = masses.m[i], masses.m[j]
        gap = abs(mi - mj) / max(mi, mj)
        constraints.append({
            "relation": f"m{i + 1}=m{j + 1}",
            "relative_gap": gap,
            "holds": gap <= rel_tol,
        })
    return {
        "kind": shape.kind,
        "constraints": constraints,
        "satisfied": all(c["holds"] for c in constraints),
    }
