"""
Isosceles trapezium family and the parallelogram check.

Bodies 1 and 4 span the long base, 2 and 3 the short one; q_12 = q_34 are
the legs and q_13 = q_24 the diagonals. alpha is the base angle 214 and
beta the angle 213 between the leg and the diagonal at body 1.
"""

import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from central_configs.centrality import lambda_fit
from central_configs.config import DEFAULT_TOLERANCES
from central_configs.exceptions import DomainError, RootNotBracketedError
from central_configs.pairspace import Configuration, Masses

logger = logging.getLogger(__name__)

PI = math.pi
BRACKET_SHRINK = 1e-9
# Equal masses: the family closes on the unit-leg square
SQUARE_LIMIT = (PI / 2, PI / 4)
SQUARE_RATIO_TOL = 1e-9


def _s3(x: float) -> float:
    return math.sin(x) ** 3


def trapezium_violations(alpha: float, beta: float) -> List[str]:
    """Violated region inequalities (empty when admissible)"""
    violations = []
    if not PI / 3 < alpha < PI / 2:
        violations.append("requires pi/3 < alpha < pi/2")
    if not beta > 0:
        violations.append("requires beta > 0")
    if not beta < alpha / 2:
        violations.append("requires beta < alpha/2")
    if not beta < 3 * alpha - PI:
        violations.append("requires beta < 3*alpha - pi")
    if not beta > (3 * alpha - PI) / 2:
        violations.append("requires beta > (3*alpha - pi)/2")
    return violations


def trapezium_region(alpha: float, beta: float) -> bool:
    return not trapezium_violations(alpha, beta)


def is_square_limit(alpha: float, beta: float) -> bool:
    return math.isclose(alpha, SQUARE_LIMIT[0], rel_tol=0.0, abs_tol=1e-12) and \
        math.isclose(beta, SQUARE_LIMIT[1], rel_tol=0.0, abs_tol=1e-12)


def beta_interval(alpha: float) -> Tuple[float, float]:
    """Open interval of admissible beta for a base angle alpha"""
    if not PI / 3 < alpha < PI / 2:
        raise DomainError(f"trapezium base angle must lie in (pi/3, pi/2), got {alpha}",
                          ["requires pi/3 < alpha < pi/2"])
    return (3 * alpha - PI) / 2, min(alpha / 2, 3 * alpha - PI)


def angle_residual(alpha: float, beta: float) -> float:
    """
    Cross-multiplied angle relation of the trapezium:
    (s3(a) - s3(2a-b))(s3(a-b) - s3(b)) - (s3(2a-b) - s3(a-b))(s3(a) - s3(b))
    """
    return ((_s3(alpha) - _s3(2 * alpha - beta)) * (_s3(alpha - beta) - _s3(beta))
            - (_s3(2 * alpha - beta) - _s3(alpha - beta)) * (_s3(alpha) - _s3(beta)))


def _angle_quotients(alpha: float, beta: float) -> Tuple[float, float]:
    """
    The two sides of the angle relation. Each is m2/m1 times
    sin^2(2a-b)/sin^2(b); they agree on the solution curve.
    """
    first = (_s3(alpha) - _s3(2 * alpha - beta)) / (_s3(alpha) - _s3(beta))
    second = (_s3(2 * alpha - beta) - _s3(alpha - beta)) / (_s3(alpha - beta) - _s3(beta))
    return first, second


def trapezium_brackets(alpha: float, samples: int = 400) -> List[Tuple[float, float]]:
    """Sign-change brackets of angle_residual over the shrunken beta interval"""
    lo, hi = beta_interval(alpha)
    grid = np.linspace(lo + BRACKET_SHRINK, hi - BRACKET_SHRINK, samples + 1)
    values = [angle_residual(alpha, b) for b in grid]
    brackets = []
    for k in range(samples):
        if values[k] == 0.0 or values[k] * values[k + 1] < 0:
            brackets.append((float(grid[k]), float(grid[k + 1])))
    return brackets


def trapezium_beta(alpha: float) -> float:
    """
    beta on the solution curve for base angle alpha, by bisection inside
    the admissible interval. A second sign change is reported as a warning.
    """
    lo, hi = beta_interval(alpha)
    lo, hi = lo + BRACKET_SHRINK, hi - BRACKET_SHRINK
    g_lo, g_hi = angle_residual(alpha, lo), angle_residual(alpha, hi)
    if not g_lo * g_hi < 0:
        raise RootNotBracketedError(
            f"root not bracketed for alpha={alpha:.12g}: residual {g_lo:.3e} at beta={lo:.12g}, "
            f"{g_hi:.3e} at beta={hi:.12g}")

    brackets = trapezium_brackets(alpha)
    if len(brackets) > 1:
        logger.warning("alpha=%.12g has %d sign changes in beta; using the first", alpha, len(brackets))
        lo, hi = brackets[0]
    beta = bisect(lambda b: angle_residual(alpha, b), lo, hi, xtol=1e-13, maxiter=200)
    logger.debug("trapezium alpha=%.12g beta=%.12g", alpha, beta)
    return beta


def trapezium_mass_ratio(alpha: float, beta: float, curve_tol: float = 1e-8) -> float:
    """
    m2/m1 for masses (m1, m2, m2, m1).

    The formula is pointwise; inputs off the solution curve are accepted
    with a warning since the resulting configuration is not central.
    """
    if is_square_limit(alpha, beta):
        return 1.0
    violations = trapezium_violations(alpha, beta)
    if violations:
        raise DomainError(
            f"(alpha, beta) = ({alpha:.12g}, {beta:.12g}) outside the trapezium region: "
            + "; ".join(violations), violations)
    scale = (_s3(alpha) - _s3(beta)) ** 2
    if abs(angle_residual(alpha, beta)) > curve_tol * scale:
        logger.warning("(alpha, beta) = (%.12g, %.12g) is off the trapezium solution curve", alpha, beta)
    first, _ = _angle_quotients(alpha, beta)
    return math.sin(beta) ** 2 / math.sin(2 * alpha - beta) ** 2 * first


def trapezium_coordinates(alpha: float, beta: float, scale: float = 1.0) -> Configuration:
    """
    Long base on the x axis (bodies 1, 4), short base above it (bodies 2, 3),
    centroid at the origin.
    """
    if math.isclose(alpha, beta, rel_tol=0.0, abs_tol=1e-15):
        raise DomainError("alpha = beta makes the trapezium degenerate", ["requires beta < alpha"])
    violations = trapezium_violations(alpha, beta)
    if violations and not is_square_limit(alpha, beta):
        raise DomainError(
            f"(alpha, beta) = ({alpha:.12g}, {beta:.12g}) outside the trapezium region: "
            + "; ".join(violations), violations)
    base = scale * math.sin(2 * alpha - beta) / math.sin(alpha - beta)
    leg = scale * np.array([math.cos(alpha), math.sin(alpha)])
    r1 = np.array([-base / 2, 0.0])
    r4 = np.array([base / 2, 0.0])
    positions = np.array([r1, r1 + leg, r4 + leg * [-1.0, 1.0], r4])
    return Configuration(positions - positions.mean(axis=0))


def trapezium_angles(mass_ratio: float, margin: float = 1e-6) -> Tuple[float, float]:
    """
    (alpha, beta) of the central trapezium with masses (1, r, r, 1).

    Outer bisection on alpha of m2/m1(alpha, beta(alpha)) - r. The ratio runs
    from 0 near alpha = pi/3 towards 1 at the square limit. r = 1 returns that
    limit, (pi/2, pi/4); r > 1 has no solution.
    """
    if not math.isfinite(mass_ratio) or mass_ratio <= 0:
        raise DomainError(f"trapezium mass ratio must be positive and finite, got {mass_ratio}")
    if abs(mass_ratio - 1.0) <= SQUARE_RATIO_TOL:
        logger.info("m2/m1 = 1 is the square limit of the trapezium family")
        return SQUARE_LIMIT

    def mismatch(alpha: float) -> float:
        return trapezium_mass_ratio(alpha, trapezium_beta(alpha)) - mass_ratio

    lo, hi = PI / 3 + margin, PI / 2 - margin
    f_lo, f_hi = mismatch(lo), mismatch(hi)
    if not f_lo * f_hi < 0:
        raise RootNotBracketedError(
            f"m2/m1 = {mass_ratio} outside the reachable range "
            f"({f_lo + mass_ratio:.6g}, {f_hi + mass_ratio:.6g})")
    alpha = bisect(mismatch, lo, hi, xtol=1e-13, maxiter=200)
    return alpha, trapezium_beta(alpha)


def _parallelogram_order(config: Configuration, tol: float) -> Optional[Tuple[int, int, int, int]]:
    """Body order (a, c, b, d) around the parallelogram whose diagonals are ab and cd"""
    r = config.positions
    length = config.characteristic_length()
    for (a, b), (c, d) in (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))):
        if np.linalg.norm((r[a] + r[b]) - (r[c] + r[d])) <= tol * length:
            return a, c, b, d
    return None


def parallelogram_check(config: Configuration, masses: Masses,
                        tol: float = DEFAULT_TOLERANCES.classify,
                        oracle_tol: float = DEFAULT_TOLERANCES.oracle) -> Dict[str, object]:
    """
    Check that a central parallelogram is a rhombus.

    Returns whether the configuration is a parallelogram, a rhombus, central
    by the oracle, and whether these are consistent (central implies rhombus).
    """
    order = _parallelogram_order(config, tol)
    fit = lambda_fit(config, masses, tol=oracle_tol)
    if order is None:
        return {"parallelogram": False, "rhombus": False, "central": fit.is_central,
                "deviation": fit.max_relative_deviation, "consistent": True,
                "note": "not a parallelogram"}
    dist = config.distance_matrix()
    sides = [dist[order[k], order[(k + 1) % 4]] for k in range(4)]
    rhombus = max(sides) - min(sides) <= tol * float(np.mean(sides))
    consistent = rhombus or not fit.is_central
    if consistent:
        note = "central rhombus" if fit.is_central else "parallelogram is not central"
    else:
        note = "central parallelogram that is not a rhombus"
        logger.warning(note)
    return {"parallelogram": True, "rhombus": rhombus, "central": fit.is_central,
            "deviation": fit.max_relative_deviation, "consistent": consistent, "note": note}
