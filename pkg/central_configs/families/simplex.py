"""
Regular constructions: the tetrahedron and the centered equilateral triangle.
"""

import math

import numpy as np

from central_configs.exceptions import DomainError
from central_configs.pairspace import Configuration, Masses

# Alternate cube corners, edge 2*sqrt(2), centroid at the origin
_TETRAHEDRON = np.array([
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
])


def build_tetrahedron(masses: Masses, edge: float = 1.0) -> Configuration:
    """Regular tetrahedron with every |q_ij| = edge; central for any masses"""
    if masses.n != 4:
        raise DomainError(f"tetrahedron needs 4 masses, got {masses.n}")
    if not edge > 0:
        raise DomainError(f"edge must be positive, got {edge}")
    return Configuration(_TETRAHEDRON * (edge / (2.0 * math.sqrt(2.0))))


def build_equilateral_centered(m: float, m4: float, side: float = 1.0) -> Configuration:
    """
    Bodies 1-3 (common mass m) on an equilateral triangle of the given side,
    body 4 (mass m4, arbitrary) at its centroid.
    """
    Masses((m, m, m, m4))  # raises InvalidMassError
    if not side > 0:
        raise DomainError(f"side must be positive, got {side}")
    radius = side / math.sqrt(3.0)
    angles = np.radians([90.0, 210.0, 330.0])
    outer = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    return Configuration(np.vstack([outer, np.zeros(2)]))
