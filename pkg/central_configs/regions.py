"""
Admissible-angle sweeps for the kite and trapezium families.

Grids cover (0, pi/2) x (0, pi/2) at cell centers; rows are
(alpha, beta, allowed, m1_ratio, m4_ratio) with empty ratios outside the
region. The trapezium's masses only make sense on its solution curve, so its
grid rows carry no ratios and trapezium_curve emits (alpha, beta, m2/m1).
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import ndimage

from central_configs.exceptions import DomainError, RootNotBracketedError
from central_configs.families import kite, trapezium

logger = logging.getLogger(__name__)

GRID_HEADER = ("alpha", "beta", "allowed", "m1_ratio", "m4_ratio")
CURVE_HEADER = ("alpha", "beta", "mass_ratio")

Row = Tuple[float, float, int, Optional[float], Optional[float]]

_REGIONS: Dict[str, Callable[[float, float], bool]] = {
    "kite-convex": kite.kite_convex_region,
    "kite-concave": kite.kite_concave_region,
    "trapezium": trapezium.trapezium_region,
}
_RATIOS: Dict[str, Callable[[float, float], Tuple[float, float]]] = {
    "kite-convex": kite.kite_convex_mass_ratios,
    "kite-concave": kite.kite_concave_mass_ratios,
}


def grid_axis(resolution: int) -> np.ndarray:
    """Cell-center angles of a uniform grid over (0, pi/2)"""
    if resolution < 2:
        raise DomainError(f"grid resolution must be at least 2, got {resolution}")
    step = (math.pi / 2) / resolution
    return (np.arange(resolution) + 0.5) * step


def _region(family: str) -> Callable[[float, float], bool]:
    if family not in _REGIONS:
        raise DomainError(f"no region for family '{family}'. Choose from {', '.join(_REGIONS)}")
    return _REGIONS[family]


def allowed_mask(family: str, resolution: int) -> np.ndarray:
    """Boolean grid indexed [beta, alpha]"""
    region = _region(family)
    axis = grid_axis(resolution)
    return np.array([[region(a, b) for a in axis] for b in axis], dtype=bool)


def region_grid(family: str, resolution: int) -> List[Row]:
    """CSV rows of the admissible-angle grid, alpha varying fastest"""
    region = _region(family)
    ratios = _RATIOS.get(family)
    axis = grid_axis(resolution)
    rows: List[Row] = []
    for b in axis:
        for a in axis:
            a, b = float(a), float(b)
            allowed = region(a, b)
            m1 = m4 = None
            if allowed and ratios is not None:
                m1, m4 = ratios(a, b)
            rows.append((a, b, int(allowed), m1, m4))
    logger.info("%s grid %dx%d: %d admissible cells", family, resolution, resolution,
                sum(row[2] for row in rows))
    return rows


def allowed_fraction(family: str, resolution: int) -> float:
    """Share of the quadrant (0, pi/2)^2 that is admissible"""
    return float(allowed_mask(family, resolution).mean())


def count_components(mask: np.ndarray) -> int:
    """Number of 4-connected admissible areas"""
    _, count = ndimage.label(np.asarray(mask, dtype=bool))
    return int(count)


def trapezium_curve(n: int, margin: float = 1e-3) -> List[Tuple[float, float, float]]:
    """
    Solution curve beta(alpha) with its mass ratio m2/m1 for n base angles
    in (pi/3 + margin, pi/2 - margin). Angles without a bracketed root are
    skipped with a warning.
    """
    if n < 2:
        raise DomainError(f"curve needs at least 2 points, got {n}")
    rows = []
    for alpha in np.linspace(math.pi / 3 + margin, math.pi / 2 - margin, n):
        alpha = float(alpha)
        try:
            beta = trapezium.trapezium_beta(alpha)
        except RootNotBracketedError as e:
            logger.warning("skipping alpha=%.12g: %s", alpha, e)
            continue
        rows.append((alpha, beta, trapezium.trapezium_mass_ratio(alpha, beta)))
    return rows
