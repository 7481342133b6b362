"""
Family shape descriptors and the single construction entry point.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from central_configs.exceptions import DomainError, InvalidMassError
from central_configs.pairspace import Configuration, Masses, system_to_dict

logger = logging.getLogger(__name__)

FAMILY_KINDS = (
    "Tetrahedron",
    "EquilateralCentered",
    "KiteConvex",
    "KiteConcave",
    "Rhombus",
    "IsoscelesTrapezium",
)

# Command-line spellings
FAMILY_ALIASES = {
    "tetrahedron": "Tetrahedron",
    "equilateral": "EquilateralCentered",
    "kite-convex": "KiteConvex",
    "kite-concave": "KiteConcave",
    "rhombus": "Rhombus",
    "trapezium": "IsoscelesTrapezium",
}


@dataclass
class FamilyShape:
    """
    A parameterized family member.

    alpha and beta are radians; scale is the length q_12. mass_ratios holds
    the family's defining ratios (m1/m2 and m4/m2 for kites, m2/m1 for the
    trapezium, m4/m1 for the centered triangle).
    """
    kind: str
    alpha: Optional[float] = None
    beta: Optional[float] = None
    scale: float = 1.0
    mass_ratios: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind in FAMILY_ALIASES:
            self.kind = FAMILY_ALIASES[self.kind]
        if self.kind not in FAMILY_KINDS:
            raise DomainError(f"Unknown family: {self.kind}. Choose from {', '.join(FAMILY_ALIASES)}")
        if not math.isfinite(self.scale) or self.scale <= 0:
            raise DomainError(f"scale must be positive, got {self.scale}")
        for name, value in self.mass_ratios.items():
            if not math.isfinite(value) or value <= 0:
                raise InvalidMassError(f"mass ratio {name} must be positive and finite, got {value}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "alpha": self.alpha,
            "beta": self.beta,
            "scale": self.scale,
            "mass_ratios": dict(self.mass_ratios),
        }


@dataclass
class TrapeziumShape(FamilyShape):
    """Isosceles trapezium with long base on bodies 1 and 4"""
    kind: str = "IsoscelesTrapezium"
    limit: Optional[str] = None

    @property
    def heights(self):
        """(h1, h2) = (q21 sin alpha, q21 sin beta)"""
        return self.scale * math.sin(self.alpha), self.scale * math.sin(self.beta)

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        if self.limit:
            data["limit"] = self.limit
        return data


@dataclass
class FamilyInstance:
    """A built family member: shape, positions and masses"""
    shape: FamilyShape
    configuration: Configuration
    masses: Masses

    def to_dict(self) -> Dict[str, Any]:
        data = system_to_dict(self.configuration, self.masses)
        data["family"] = self.shape.to_dict()
        return data


def build_family(shape: FamilyShape, masses: Optional[Masses] = None) -> FamilyInstance:
    """
    Build positions and masses for a family shape.

    Tetrahedron uses the given masses (default all 1). The centered triangle
    reads m4/m1 from mass_ratios (default 1). Kites and the trapezium derive
    their masses from the angles; a trapezium without beta solves for it, a
    rhombus without alpha inverts mass_ratios['m1/m2']. A concave kite with
    alpha < beta is built at (beta, alpha) and bodies 1 and 4 are swapped.
    """
    from central_configs.families import kite, simplex, trapezium

    kind = shape.kind
    logger.info("Building %s", kind)

    if kind == "Tetrahedron":
        masses = masses or Masses((1.0, 1.0, 1.0, 1.0))
        config = simplex.build_tetrahedron(masses, shape.scale)
        return FamilyInstance(shape, config, masses)

    if kind == "EquilateralCentered":
        m4 = shape.mass_ratios.get("m4/m1", 1.0)
        config = simplex.build_equilateral_centered(1.0, m4, shape.scale)
        shape.mass_ratios = {"m4/m1": m4}
        return FamilyInstance(shape, config, Masses((1.0, 1.0, 1.0, m4)))

    if kind == "Rhombus":
        if shape.alpha is None:
            if "m1/m2" not in shape.mass_ratios:
                raise DomainError("rhombus needs alpha or the mass ratio m1/m2")
            shape.alpha = kite.rhombus_angle(shape.mass_ratios["m1/m2"])
        shape.beta = shape.alpha
        ratio = kite.rhombus_ratio(shape.alpha)
        shape.mass_ratios = {"m1/m2": ratio, "m4/m2": ratio}
        config = kite.kite_coordinates(shape)
        return FamilyInstance(shape, config, Masses((ratio, 1.0, 1.0, ratio)))

    if kind == "KiteConvex":
        _require_angles(shape)
        m1, m4 = kite.kite_convex_mass_ratios(shape.alpha, shape.beta)
        shape.mass_ratios = {"m1/m2": m1, "m4/m2": m4}
        config = kite.kite_coordinates(shape)
        return FamilyInstance(shape, config, Masses((m1, 1.0, 1.0, m4)))

    if kind == "KiteConcave":
        _require_angles(shape)
        if shape.alpha < shape.beta:
            mirrored = FamilyShape("KiteConcave", shape.beta, shape.alpha, shape.scale)
            inner = build_family(mirrored)
            m1, m4 = inner.shape.mass_ratios["m1/m2"], inner.shape.mass_ratios["m4/m2"]
            shape.mass_ratios = {"m1/m2": m4, "m4/m2": m1}
            config = inner.configuration.relabeled((3, 1, 2, 0))
            return FamilyInstance(shape, config, Masses((m4, 1.0, 1.0, m1)))
        m1, m4 = kite.kite_concave_mass_ratios(shape.alpha, shape.beta)
        shape.mass_ratios = {"m1/m2": m1, "m4/m2": m4}
        config = kite.kite_coordinates(shape)
        return FamilyInstance(shape, config, Masses((m1, 1.0, 1.0, m4)))

    # IsoscelesTrapezium
    if shape.alpha is None:
        if "m2/m1" not in shape.mass_ratios:
            raise DomainError("trapezium needs alpha or the mass ratio m2/m1")
        shape.alpha, shape.beta = trapezium.trapezium_angles(shape.mass_ratios["m2/m1"])
    elif shape.beta is None:
        shape.beta = trapezium.trapezium_beta(shape.alpha)
    ratio = trapezium.trapezium_mass_ratio(shape.alpha, shape.beta)
    limit = None
    if trapezium.is_square_limit(shape.alpha, shape.beta):
        logger.info("equal masses: building the square that closes the trapezium family")
        limit = "square"
    shape = TrapeziumShape(alpha=shape.alpha, beta=shape.beta, scale=shape.scale,
                           mass_ratios={"m2/m1": ratio}, limit=limit)
    config = trapezium.trapezium_coordinates(shape.alpha, shape.beta, shape.scale)
    return FamilyInstance(shape, config, Masses((1.0, ratio, ratio, 1.0)))


def _require_angles(shape: FamilyShape):
    if shape.alpha is None or shape.beta is None:
        raise DomainError(f"{shape.kind} needs both alpha and beta")
