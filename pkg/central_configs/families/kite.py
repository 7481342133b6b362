"""
Kite families: convex, concave and the rhombus.

Bodies 1 and 4 lie on the symmetry axis, bodies 2 and 3 off it, with
q_12 = q_13 and q_24 = q_34. alpha is the angle between q_12 and q_23,
beta the angle between q_24 and q_23.
"""

import logging
import math
from typing import List, Tuple

import numpy as np
from scipy.optimize import bisect, least_squares

from central_configs.exceptions import DomainError, RootNotBracketedError
from central_configs.pairspace import Configuration

logger = logging.getLogger(__name__)

PI = math.pi
SINGULAR_POINT = (PI / 6, PI / 6)


def _in_quadrant(alpha: float, beta: float) -> List[str]:
    violations = []
    if not 0 < alpha < PI / 2:
        violations.append("requires 0 < alpha < pi/2")
    if not 0 < beta < PI / 2:
        violations.append("requires 0 < beta < pi/2")
    return violations


def kite_convex_violations(alpha: float, beta: float) -> List[str]:
    """Violated region inequalities of the convex kite (empty when admissible)"""
    violations = _in_quadrant(alpha, beta)
    if not alpha < PI / 3:
        violations.append("requires alpha < pi/3")
    if not beta < PI / 3:
        violations.append("requires beta < pi/3")
    if not alpha + 2 * beta > PI / 2:
        violations.append("requires alpha + 2*beta > pi/2")
    if not 2 * alpha + beta > PI / 2:
        violations.append("requires 2*alpha + beta > pi/2")
    return violations


def kite_convex_region(alpha: float, beta: float) -> bool:
    return not kite_convex_violations(alpha, beta)


def kite_concave_violations(alpha: float, beta: float) -> List[str]:
    """Violated region inequalities of the concave kite, beta < alpha branch"""
    violations = _in_quadrant(alpha, beta)
    if not beta < alpha:
        violations.append("requires beta < alpha (swap the angles to relabel bodies 1 and 4)")
    if not beta < PI / 3:
        violations.append("requires beta < pi/3")
    lower = alpha < PI / 3 and 2 * alpha - beta > PI / 2
    upper = alpha > PI / 3 and 2 * alpha - beta < PI / 2
    if not (lower or upper):
        if alpha < PI / 3:
            violations.append("requires 2*alpha - beta > pi/2 when alpha < pi/3")
        elif alpha > PI / 3:
            violations.append("requires 2*alpha - beta < pi/2 when alpha > pi/3")
        else:
            violations.append("requires alpha != pi/3")
    return violations


def kite_concave_region(alpha: float, beta: float) -> bool:
    return not kite_concave_violations(alpha, beta)


def _is_singular(alpha: float, beta: float) -> bool:
    return math.isclose(alpha, SINGULAR_POINT[0], abs_tol=1e-12) and \
        math.isclose(beta, SINGULAR_POINT[1], abs_tol=1e-12)


def _raise_outside(family: str, alpha: float, beta: float, violations: List[str]):
    if _is_singular(alpha, beta):
        raise DomainError(
            "(alpha, beta) = (pi/6, pi/6) is the excluded singular point where the "
            "two diagonal boundary lines meet and m2 vanishes", violations)
    raise DomainError(
        f"(alpha, beta) = ({alpha:.12g}, {beta:.12g}) outside the {family} region: "
        + "; ".join(violations), violations)


def _convex_ratio(alpha: float, beta: float) -> float:
    s = math.sin(alpha + beta)
    numerator = math.sin(beta) * s ** 2 * (8 * math.cos(beta) ** 3 - 1)
    denominator = 4 * math.cos(alpha) ** 2 * (s ** 3 - math.cos(beta) ** 3)
    return numerator / denominator


def kite_convex_mass_ratios(alpha: float, beta: float) -> Tuple[float, float]:
    """(m1/m2, m4/m2) of the convex kite; the second is the first with alpha and beta swapped"""
    violations = kite_convex_violations(alpha, beta)
    if violations:
        _raise_outside("convex kite", alpha, beta, violations)
    return _convex_ratio(alpha, beta), _convex_ratio(beta, alpha)


def _concave_ratios(alpha: float, beta: float) -> Tuple[float, float]:
    s = math.sin(alpha - beta)
    ca, cb = math.cos(alpha), math.cos(beta)
    m1 = math.sin(beta) * s ** 2 * (1 - 8 * cb ** 3) / (4 * ca ** 2 * (s ** 3 - cb ** 3))
    m4 = math.sin(alpha) * s ** 2 * (8 * ca ** 3 - 1) / (4 * cb ** 2 * (s ** 3 - ca ** 3))
    return m1, m4


def kite_concave_mass_ratios(alpha: float, beta: float) -> Tuple[float, float]:
    """(m1/m2, m4/m2) of the concave kite with body 4 inside triangle 123"""
    if math.isclose(alpha, beta, rel_tol=0.0, abs_tol=1e-15):
        raise DomainError("alpha = beta puts bodies 1 and 4 on top of each other", ["requires beta < alpha"])
    violations = kite_concave_violations(alpha, beta)
    if violations:
        _raise_outside("concave kite", alpha, beta, violations)
    return _concave_ratios(alpha, beta)


def kite_coordinates(shape) -> Configuration:
    """
    Planar kite with bodies 2, 3 on the x axis, body 1 above and body 4
    below (convex) or above (concave) the line 2-3, centroid at the origin.
    """
    alpha, beta, q12 = shape.alpha, shape.beta, shape.scale
    if shape.kind == "KiteConcave":
        violations = kite_concave_violations(alpha, beta)
        sign = 1.0
    else:
        violations = kite_convex_violations(alpha, beta)
        if shape.kind == "Rhombus" and not math.isclose(alpha, beta, rel_tol=1e-15, abs_tol=0.0):
            violations.append("requires alpha = beta for a rhombus")
        sign = -1.0
    if violations:
        _raise_outside(shape.kind, alpha, beta, violations)

    half = q12 * math.cos(alpha)
    positions = np.array([
        [0.0, q12 * math.sin(alpha)],
        [-half, 0.0],
        [half, 0.0],
        [0.0, sign * half * math.tan(beta)],
    ])
    return Configuration(positions - positions.mean(axis=0))


def _rhombus_parts(alpha: float) -> Tuple[float, float]:
    return 1 - 1 / (8 * math.cos(alpha) ** 3), 1 - 1 / (8 * math.sin(alpha) ** 3)


def rhombus_ratio(alpha: float) -> float:
    """T(alpha) = m1/m2 of the rhombus, strictly decreasing on (pi/6, pi/3)"""
    if not PI / 6 < alpha < PI / 3:
        raise DomainError(f"rhombus angle must lie in (pi/6, pi/3), got {alpha}",
                          ["requires pi/6 < alpha < pi/3"])
    numerator, denominator = _rhombus_parts(alpha)
    return numerator / denominator


def rhombus_angle(ratio: float) -> float:
    """Inverse of rhombus_ratio by bisection; unique by monotonicity"""
    if not math.isfinite(ratio) or ratio <= 0:
        raise DomainError(f"rhombus mass ratio must be positive and finite, got {ratio}")

    def f(alpha: float) -> float:
        numerator, denominator = _rhombus_parts(alpha)
        return numerator - ratio * denominator

    # f(pi/6) > 0 and f(pi/3) < 0 for every positive ratio
    return bisect(f, PI / 6, PI / 3, xtol=1e-13, maxiter=200)


def kite_convex_angles(m1_ratio: float, m4_ratio: float, grid: int = 200) -> Tuple[float, float]:
    """
    Angles of the convex kite carrying the given mass ratios.

    A region grid supplies the seed with the smallest log-ratio mismatch,
    bounded least squares refines it. Raises RootNotBracketedError when no
    admissible point reproduces both ratios to 1e-10 relative.
    """
    for value in (m1_ratio, m4_ratio):
        if not math.isfinite(value) or value <= 0:
            raise DomainError(f"kite mass ratios must be positive and finite, got {value}")
    target = np.log([m1_ratio, m4_ratio])

    def mismatch(x: np.ndarray) -> np.ndarray:
        a, b = x
        if not kite_convex_region(a, b):
            return np.full(2, 1e3)
        r1, r4 = _convex_ratio(a, b), _convex_ratio(b, a)
        if r1 <= 0 or r4 <= 0:
            return np.full(2, 1e3)
        return np.log([r1, r4]) - target

    axis = np.linspace(PI / 12, PI / 3, grid + 2)[1:-1]
    best, best_cost = None, math.inf
    for a in axis:
        for b in axis:
            if kite_convex_region(a, b):
                cost = float(np.sum(mismatch(np.array([a, b])) ** 2))
                if cost < best_cost:
                    best, best_cost = (a, b), cost
    logger.debug("kite seed %s cost %.3e", best, best_cost)

    fit = least_squares(mismatch, np.array(best), bounds=([PI / 12, PI / 12], [PI / 3, PI / 3]),
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
    alpha, beta = (float(v) for v in fit.x)
    if not kite_convex_region(alpha, beta):
        raise RootNotBracketedError("no admissible convex kite carries these mass ratios")
    r1, r4 = _convex_ratio(alpha, beta), _convex_ratio(beta, alpha)
    if abs(r1 / m1_ratio - 1) > 1e-10 or abs(r4 / m4_ratio - 1) > 1e-10:
        raise RootNotBracketedError(
            f"no convex kite reproduces m1/m2={m1_ratio}, m4/m2={m4_ratio} "
            f"(closest ({alpha:.6g}, {beta:.6g}) gives {r1:.6g}, {r4:.6g})")
    return alpha, beta
