"""Closed-form constructors, mass ratios and admissible regions of the four-body families."""

from central_configs.families.shapes import (
    FAMILY_ALIASES,
    FAMILY_KINDS,
    FamilyInstance,
    FamilyShape,
    TrapeziumShape,
    build_family,
)
