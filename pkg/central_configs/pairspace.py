"""
Pair-space geometry substrate.

Positions are the ground truth; pair vectors follow q_ij = r_i - r_j and
distance sets are a secondary view that must pass a realizability check
before any geometric claim is made about them.
"""

import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, TextIO, Tuple

import numpy as np

from central_configs.config import DEFAULT_TOLERANCES
from central_configs.exceptions import (
    CollisionError,
    InputFormatError,
    InvalidMassError,
    RealizabilityError,
)
from central_configs.utils import read_csv_rows, write_csv

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]
Triplet = Tuple[int, int, int]


def pairs(n: int) -> List[Pair]:
    """All index pairs i < j (0-based)"""
    return list(itertools.combinations(range(n), 2))


def triplets(n: int) -> List[Triplet]:
    """All index triplets i < j < k (0-based)"""
    return list(itertools.combinations(range(n), 3))


def label(indices: Sequence[int]) -> str:
    """1-based label of a pair or triplet, e.g. (0, 1) -> '12'"""
    return "".join(str(i + 1) for i in indices)


@dataclass(frozen=True)
class Masses:
    """Positive point masses with the gravitational constant"""
    m: Tuple[float, ...]
    G: float = 1.0

    def __post_init__(self):
        try:
            values = tuple(float(x) for x in self.m)
        except (TypeError, ValueError):
            raise InvalidMassError("masses must be a list of numbers")
        if len(values) < 2:
            raise InvalidMassError("at least two masses are required")
        for i, value in enumerate(values):
            if not math.isfinite(value) or value <= 0:
                raise InvalidMassError(f"mass must be positive (body {i + 1}: {value})")
        if not math.isfinite(self.G) or self.G <= 0:
            raise InvalidMassError(f"G must be positive, got {self.G}")
        object.__setattr__(self, "m", values)
        object.__setattr__(self, "G", float(self.G))

    @property
    def n(self) -> int:
        return len(self.m)

    @property
    def total(self) -> float:
        return math.fsum(self.m)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.m)

    def scaled(self, factor: float) -> "Masses":
        return Masses(tuple(factor * x for x in self.m), self.G)


@dataclass(frozen=True, eq=False)
class Configuration:
    """
    Body positions in two or three dimensions.

    Construction rejects collisions: any distance below
    collision_tol times the largest distance.
    """
    positions: np.ndarray
    collision_tol: float = field(default=DEFAULT_TOLERANCES.collision, repr=False)

    def __post_init__(self):
        r = np.array(self.positions, dtype=float)
        if r.ndim != 2 or r.shape[1] not in (2, 3):
            raise InputFormatError("positions must be a list of 2-D or 3-D points")
        if r.shape[0] < 2:
            raise InputFormatError("at least two bodies are required")
        if not np.all(np.isfinite(r)):
            raise InputFormatError("positions must be finite")
        r.setflags(write=False)
        object.__setattr__(self, "positions", r)

        dist = self.distance_matrix()
        largest = dist.max()
        for i, j in pairs(self.n):
            if dist[i, j] <= self.collision_tol * largest:
                raise CollisionError(
                    f"collision: bodies {i + 1} and {j + 1} coincide "
                    f"(distance {dist[i, j]:.3e})", pair=(i, j))

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def distance_matrix(self) -> np.ndarray:
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        return np.linalg.norm(diff, axis=-1)

    def distances(self) -> "DistanceSet":
        dist = self.distance_matrix()
        return DistanceSet({(i, j): float(dist[i, j]) for i, j in pairs(self.n)})

    def characteristic_length(self) -> float:
        return float(self.distance_matrix().max())

    def center_of_mass(self, masses: Masses) -> np.ndarray:
        _check_body_count(self, masses)
        w = masses.array
        return w @ self.positions / w.sum()

    def scaled(self, factor: float) -> "Configuration":
        return Configuration(self.positions * factor, self.collision_tol)

    def transformed(self, matrix: np.ndarray, offset: Optional[np.ndarray] = None) -> "Configuration":
        """Apply r -> matrix @ r + offset to every body"""
        moved = self.positions @ np.asarray(matrix, dtype=float).T
        if offset is not None:
            moved = moved + np.asarray(offset, dtype=float)
        return Configuration(moved, self.collision_tol)

    def relabeled(self, order: Sequence[int]) -> "Configuration":
        """New configuration whose body k is this configuration's body order[k]"""
        return Configuration(self.positions[list(order)], self.collision_tol)

    def lifted(self) -> np.ndarray:
        """Positions as 3-vectors (z = 0 for planar input)"""
        if self.dim == 3:
            return np.array(self.positions)
        return np.hstack([self.positions, np.zeros((self.n, 1))])


def _check_body_count(config: Configuration, masses: Masses):
    if config.n != masses.n:
        raise InputFormatError(f"{config.n} positions but {masses.n} masses")


@dataclass(frozen=True)
class DistanceSet:
    """Mutual distances q_ij (keys i < j, 0-based); p_ij = q_ij^-3"""
    q: Mapping[Pair, float]

    def __post_init__(self):
        normalized: Dict[Pair, float] = {}
        for (i, j), value in dict(self.q).items():
            if i == j:
                raise InputFormatError(f"pair ({i + 1},{j + 1}) repeats a body")
            value = float(value)
            if not math.isfinite(value) or value <= 0:
                raise InputFormatError(f"distance q_{label(sorted((i, j)))} must be positive, got {value}")
            normalized[(min(i, j), max(i, j))] = value
        n = max(max(p) for p in normalized) + 1 if normalized else 0
        missing = [p for p in pairs(n) if p not in normalized]
        if n < 2 or missing:
            raise InputFormatError(
                "distance set incomplete: missing " + ", ".join(label(p) for p in missing))
        object.__setattr__(self, "q", normalized)

    @property
    def n(self) -> int:
        return max(j for _, j in self.q) + 1

    def q_of(self, i: int, j: int) -> float:
        return self.q[(min(i, j), max(i, j))]

    def p_of(self, i: int, j: int) -> float:
        return self.q_of(i, j) ** -3

    @property
    def p(self) -> Dict[Pair, float]:
        return {key: value ** -3 for key, value in self.q.items()}

    @classmethod
    def from_p(cls, p: Mapping[Pair, float]) -> "DistanceSet":
        return cls({key: float(value) ** (-1.0 / 3.0) for key, value in p.items()})

    def mean(self) -> float:
        return float(np.mean(list(self.q.values())))


def pair_vectors(config: Configuration) -> Dict[Pair, np.ndarray]:
    """Pair vectors q_ij = r_i - r_j for every i < j"""
    r = config.positions
    return {(i, j): r[i] - r[j] for i, j in pairs(config.n)}


def _lookup(q: Mapping[Pair, np.ndarray], a: int, b: int) -> np.ndarray:
    if (a, b) in q:
        return np.asarray(q[(a, b)], dtype=float)
    return -np.asarray(q[(b, a)], dtype=float)


def triangle_residual(q: Mapping[Pair, np.ndarray]) -> float:
    """
    Largest violation of q_ij + q_jk + q_ki = 0 over all triplets.

    Ordered keys present in the map are used as given; a missing (a, b)
    is taken as -q[(b, a)].
    """
    n = max(max(key) for key in q) + 1
    worst = 0.0
    for i, j, k in triplets(n):
        total = _lookup(q, i, j) + _lookup(q, j, k) + _lookup(q, k, i)
        worst = max(worst, float(np.linalg.norm(total)))
    return worst


def cayley_menger(d: DistanceSet, indices: Sequence[int]) -> float:
    """Bordered squared-distance determinant of the sub-simplex on indices"""
    k = len(indices)
    cm = np.ones((k + 1, k + 1))
    cm[0, 0] = 0.0
    for a, ia in enumerate(indices):
        for b, ib in enumerate(indices):
            cm[a + 1, b + 1] = 0.0 if ia == ib else d.q_of(ia, ib) ** 2
    return float(np.linalg.det(cm))


def simplex_volume_squared(d: DistanceSet, indices: Sequence[int]) -> float:
    """Squared k-volume of the simplex on indices (k = len(indices) - 1)"""
    k = len(indices) - 1
    return (-1) ** (k + 1) * cayley_menger(d, indices) / (2 ** k * math.factorial(k) ** 2)


@dataclass(frozen=True)
class Realization:
    """Outcome of a realizability check"""
    realizable: bool
    degenerate: bool
    embedding_dim: Optional[int]
    witness: Optional[Configuration]
    volumes_squared: Dict[Tuple[int, ...], float]
    reason: str = ""

    def __bool__(self) -> bool:
        return self.realizable

    def require(self) -> Configuration:
        """Witness configuration; raises RealizabilityError when there is none"""
        if not self.realizable:
            raise RealizabilityError(self.reason or "distances are not realizable")
        return self.witness


def _canonical_embedding(d: DistanceSet, tol: float) -> Tuple[Optional[np.ndarray], int]:
    """
    Body 1 at the origin, body 2 on the positive first axis, body 3 in the
    upper half-plane, body 4 on the positive third axis side.
    Returns (coordinates, dimension used) or (None, dimension) when the
    distances are inconsistent with any embedding in three dimensions.
    """
    n = d.n
    scale = max(d.q.values())
    q0 = np.array([0.0] + [d.q_of(0, k) for k in range(1, n)])
    gram = np.zeros((n, n))
    for a in range(1, n):
        for b in range(1, n):
            qab = 0.0 if a == b else d.q_of(a, b)
            gram[a, b] = 0.5 * (q0[a] ** 2 + q0[b] ** 2 - qab ** 2)

    coords = np.zeros((n, 3))
    pivots: List[int] = []
    for k in range(1, n):
        m = len(pivots)
        x = np.zeros(0)
        if m:
            A = coords[pivots, :m]
            x = np.linalg.solve(A, gram[k, pivots])
            coords[k, :m] = x
        remainder = gram[k, k] - float(x @ x)
        if remainder > tol * scale ** 2:
            if m == 3:
                return None, 4
            coords[k, m] = math.sqrt(remainder)
            pivots.append(k)
    return coords, len(pivots)


def realizable(d: DistanceSet, dim: int, tol: float = 1e-10) -> Realization:
    """
    Decide whether distances embed in dimension <= dim.

    Sub-simplex Cayley-Menger signs rule out impossible triangles and
    tetrahedra; a canonical embedding is then built and must reproduce every
    distance. A set that embeds only in lower dimension is flagged degenerate.
    """
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    n = d.n
    scale = max(d.q.values())
    volumes: Dict[Tuple[int, ...], float] = {}
    for size in range(3, min(n, 4) + 1):
        for idx in itertools.combinations(range(n), size):
            v2 = simplex_volume_squared(d, idx)
            volumes[idx] = v2
            if v2 < -tol * scale ** (2 * (size - 1)):
                reason = f"Cayley-Menger sign violated for bodies {label(idx)}"
                logger.debug(reason)
                return Realization(False, False, None, None, volumes, reason)

    coords, used = _canonical_embedding(d, tol)
    if coords is None:
        return Realization(False, False, None, None, volumes,
                           "distances need more than three dimensions")
    for i, j in pairs(n):
        rebuilt = float(np.linalg.norm(coords[i] - coords[j]))
        if abs(rebuilt - d.q_of(i, j)) > 1e-8 * scale:
            reason = f"distance q_{label((i, j))} not reproduced by any embedding"
            logger.debug(reason)
            return Realization(False, False, None, None, volumes, reason)
    if used > dim:
        return Realization(False, False, used, None, volumes,
                           f"distances need dimension {used}, requested {dim}")

    witness = coords[:, :dim]
    witness = witness - witness.mean(axis=0)
    return Realization(True, used < dim, used, Configuration(witness), volumes,
                       "degenerate" if used < dim else "")


def reduced_masses(masses: Masses) -> Tuple[Dict[Pair, float], Dict[Triplet, float]]:
    """Pair and triplet reduced masses mu_ij = m_i m_j / M, mu_ijk = m_i m_j m_k / M^2"""
    m, total = masses.m, masses.total
    mu_pair = {(i, j): m[i] * m[j] / total for i, j in pairs(masses.n)}
    mu_triplet = {(i, j, k): m[i] * m[j] * m[k] / total ** 2 for i, j, k in triplets(masses.n)}
    return mu_pair, mu_triplet


def parse_system(data: Mapping[str, Any]) -> Tuple[Configuration, Masses]:
    """Build (Configuration, Masses) from the configuration JSON schema"""
    if not isinstance(data, Mapping):
        raise InputFormatError("malformed configuration JSON: top level must be an object")
    for key in ("positions", "masses"):
        if key not in data:
            raise InputFormatError(f"malformed configuration JSON: missing '{key}'")
    try:
        positions = np.array(data["positions"], dtype=float)
        values = tuple(data["masses"])
        G = float(data.get("G", 1.0))
    except (TypeError, ValueError) as e:
        raise InputFormatError(f"malformed configuration JSON: {e}") from e
    config = Configuration(positions)
    dim = data.get("dim", config.dim)
    if dim != config.dim:
        raise InputFormatError(f"dim is {dim} but positions are {config.dim}-D")
    masses = Masses(values, G)
    _check_body_count(config, masses)
    return config, masses


def read_system_json(path: str) -> Tuple[Configuration, Masses]:
    """Load a configuration JSON file"""
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise InputFormatError(f"malformed configuration JSON: {e}") from e
    return parse_system(data)


def system_to_dict(config: Configuration, masses: Masses) -> Dict[str, Any]:
    """Configuration JSON document"""
    _check_body_count(config, masses)
    return {
        "dim": config.dim,
        "positions": config.positions.tolist(),
        "masses": list(masses.m),
        "G": masses.G,
    }


def read_distances_csv(path: str) -> DistanceSet:
    """Read a distances CSV with header i,j,q and 1-based indices"""
    rows = read_csv_rows(path)
    try:
        return DistanceSet({(int(row["i"]) - 1, int(row["j"]) - 1): float(row["q"]) for row in rows})
    except (KeyError, ValueError) as e:
        raise InputFormatError(f"malformed distances CSV: {e}") from e


def write_distances_csv(d: DistanceSet, stream: Optional[TextIO] = None, path: Optional[str] = None):
    """Write a distances CSV with header i,j,q and 1-based indices"""
    rows = [(i + 1, j + 1, q) for (i, j), q in sorted(d.q.items())]
    write_csv(("i", "j", "q"), rows, stream=stream, path=path)
