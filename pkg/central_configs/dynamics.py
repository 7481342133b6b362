"""
Position-space integration used to verify homographic motions.

Trajectories are integrated in ordinary coordinates so the triangle
conditions hold exactly; pair-space quantities (pair angular momenta,
pair-space kinetic energy, lambda) are derived from the samples.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, TextIO

import numpy as np
from scipy.integrate import solve_ivp

from central_configs.centrality import (
    LambdaFit,
    lambda_fit,
    newtonian_accelerations,
    pair_angular_momentum,
)
from central_configs.config import DEFAULT_TOLERANCES
from central_configs.exceptions import (
    DomainError,
    InputFormatError,
    IntegrationError,
    NotCentralError,
)
from central_configs.pairspace import (
    Configuration,
    Masses,
    Pair,
    label,
    pairs,
    reduced_masses,
)
from central_configs.utils import write_csv, write_json

logger = logging.getLogger(__name__)

METHODS = ("rk4", "dopri")


@dataclass
class DynamicState:
    """Positions and velocities of every body at one instant"""
    time: float
    positions: np.ndarray
    velocities: np.ndarray
    masses: Masses

    def __post_init__(self):
        self.positions = np.array(self.positions, dtype=float)
        self.velocities = np.array(self.velocities, dtype=float)
        if self.positions.shape != self.velocities.shape:
            raise InputFormatError(
                f"velocities shape {self.velocities.shape} does not match positions {self.positions.shape}")
        if self.positions.shape[0] != self.masses.n:
            raise InputFormatError(f"{self.positions.shape[0]} positions but {self.masses.n} masses")

    @property
    def config(self) -> Configuration:
        return Configuration(self.positions)

    @property
    def center_of_mass_velocity(self) -> np.ndarray:
        w = self.masses.array
        return w @ self.velocities / w.sum()


@dataclass
class TrajectoryDiagnostics:
    """Homography and conservation checks over the sampled states"""
    max_shape_deviation: float
    pair_momentum_drift: Dict[Pair, float]
    total_momentum_drift: float
    energy_drift: float
    lambda_history: List[float]
    kinetic_identity_error: float
    lambda_scaling_deviation: float
    max_ray_deviation: float
    shape_deviation_history: List[float] = field(default_factory=list, repr=False)

    @property
    def max_pair_momentum_drift(self) -> float:
        return max(self.pair_momentum_drift.values(), default=0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "max_shape_deviation": self.max_shape_deviation,
            "pair_momentum_drift": {label(p): v for p, v in self.pair_momentum_drift.items()},
            "max_pair_momentum_drift": self.max_pair_momentum_drift,
            "total_momentum_drift": self.total_momentum_drift,
            "energy_drift": self.energy_drift,
            "kinetic_identity_error": self.kinetic_identity_error,
            "lambda_scaling_deviation": self.lambda_scaling_deviation,
            "max_ray_deviation": self.max_ray_deviation,
            "lambda_history": list(self.lambda_history),
        }


@dataclass
class Trajectory:
    """Sampled states of one integration run"""
    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    masses: Masses
    method: str
    termination: str = "completed"
    diagnostics: Optional[TrajectoryDiagnostics] = None

    def __len__(self) -> int:
        return len(self.times)

    def state(self, k: int) -> DynamicState:
        return DynamicState(float(self.times[k]), self.positions[k], self.velocities[k], self.masses)

    @property
    def final_state(self) -> DynamicState:
        return self.state(len(self) - 1)


def accelerations(state: DynamicState) -> np.ndarray:
    """Newtonian accelerations; raises CollisionError for coincident bodies"""
    return newtonian_accelerations(state.config.positions, state.masses)


def kinetic_energy_standard(state: DynamicState) -> float:
    """sum_i m_i |v_i|^2 / 2"""
    speeds = np.einsum("ij,ij->i", state.velocities, state.velocities)
    return 0.5 * float(state.masses.array @ speeds)


def kinetic_energy_pairspace(state: DynamicState) -> float:
    """
    M |Rdot|^2 / 2 + sum mu_ij |qdot_ij|^2 / 2
    - sum mu_ijk |qdot_ij + qdot_jk + qdot_ki|^2 / 2
    """
    v = state.velocities
    mu_pair, mu_triplet = reduced_masses(state.masses)
    Rdot = state.center_of_mass_velocity
    energy = 0.5 * state.masses.total * float(Rdot @ Rdot)
    for (i, j), mu in mu_pair.items():
        qdot = v[i] - v[j]
        energy += 0.5 * mu * float(qdot @ qdot)
    for (i, j, k), mu in mu_triplet.items():
        loop = (v[i] - v[j]) + (v[j] - v[k]) + (v[k] - v[i])
        energy -= 0.5 * mu * float(loop @ loop)
    return energy


def potential_energy(state: DynamicState) -> float:
    """-sum G m_i m_j / q_ij"""
    dist = state.config.distance_matrix()
    m, G = state.masses.m, state.masses.G
    return -sum(G * m[i] * m[j] / dist[i, j] for i, j in pairs(state.masses.n))


def total_energy(state: DynamicState) -> float:
    return kinetic_energy_standard(state) + potential_energy(state)


def _min_distance(r: np.ndarray) -> float:
    diff = r[:, None, :] - r[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    np.fill_diagonal(dist, np.inf)
    return float(dist.min())


def _rk4_step(r: np.ndarray, v: np.ndarray, dt: float, masses: Masses):
    k1r, k1v = v, newtonian_accelerations(r, masses)
    k2r, k2v = v + 0.5 * dt * k1v, newtonian_accelerations(r + 0.5 * dt * k1r, masses)
    k3r, k3v = v + 0.5 * dt * k2v, newtonian_accelerations(r + 0.5 * dt * k2r, masses)
    k4r, k4v = v + dt * k3v, newtonian_accelerations(r + dt * k3r, masses)
    return (r + dt / 6.0 * (k1r + 2 * k2r + 2 * k3r + k4r),
            v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v))


def integrate(state: DynamicState, dt: float, n_steps: int, method: str = "rk4",
              sample_every: int = 100, rtol: float = 1e-12, atol: float = 1e-14,
              stop_min_distance: Optional[float] = None,
              collision_tol: float = DEFAULT_TOLERANCES.collision) -> Trajectory:
    """
    Integrate n_steps of length dt, sampling every sample_every steps.

    rk4 takes fixed steps; dopri uses the adaptive DOP853 pair and treats dt
    as the output spacing. The run stops early ("min_distance") once the
    closest pair falls below stop_min_distance, and aborts ("collision") when
    it falls below collision_tol times the initial largest distance; the
    samples gathered so far are kept and diagnosed.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if n_steps < 1 or sample_every < 1:
        raise ValueError("n_steps and sample_every must be at least 1")
    if method not in METHODS:
        raise ValueError(f"Unknown method: {method}. Choose from {', '.join(METHODS)}")

    shape = state.positions.shape
    collision_distance = collision_tol * state.config.characteristic_length()
    logger.info("Integrating %d steps of %.3e with %s", n_steps, dt, method)

    if method == "rk4":
        times, rs, vs, termination = _integrate_rk4(
            state, dt, n_steps, sample_every, stop_min_distance, collision_distance)
    else:
        times, rs, vs, termination = _integrate_dopri(
            state, dt, n_steps, sample_every, rtol, atol, stop_min_distance, collision_distance)

    if termination == "collision":
        logger.warning("Collision at t=%.6g; keeping %d samples", times[-1], len(times))
    trajectory = Trajectory(np.array(times), np.array(rs).reshape((-1,) + shape),
                            np.array(vs).reshape((-1,) + shape), state.masses, method, termination)
    trajectory.diagnostics = compute_diagnostics(trajectory)
    return trajectory


def _integrate_rk4(state, dt, n_steps, sample_every, stop_min_distance, collision_distance):
    r, v, t = state.positions.copy(), state.velocities.copy(), state.time
    times, rs, vs = [t], [r.copy()], [v.copy()]
    termination = "completed"
    for step in range(1, n_steps + 1):
        r, v = _rk4_step(r, v, dt, state.masses)
        t = state.time + step * dt
        closest = _min_distance(r)
        if not np.all(np.isfinite(r)) or closest <= collision_distance:
            termination = "collision"
        elif stop_min_distance is not None and closest < stop_min_distance:
            termination = "min_distance"
        if termination != "completed" or step % sample_every == 0 or step == n_steps:
            if termination != "collision":
                times.append(t)
                rs.append(r.copy())
                vs.append(v.copy())
        if termination != "completed":
            break
    return times, rs, vs, termination


def _integrate_dopri(state, dt, n_steps, sample_every, rtol, atol, stop_min_distance, collision_distance):
    shape = state.positions.shape
    size = state.positions.size
    masses = state.masses

    def rhs(_t, y):
        r = y[:size].reshape(shape)
        return np.concatenate([y[size:], newtonian_accelerations(r, masses).ravel()])

    def collision(_t, y):
        return _min_distance(y[:size].reshape(shape)) - collision_distance
    collision.terminal = True
    collision.direction = -1

    events = [collision]
    if stop_min_distance is not None:
        def closest_approach(_t, y):
            return _min_distance(y[:size].reshape(shape)) - stop_min_distance
        closest_approach.terminal = True
        closest_approach.direction = -1
        events.append(closest_approach)

    t0 = state.time
    t_end = t0 + dt * n_steps
    t_eval = t0 + dt * np.arange(0, n_steps + 1, sample_every)
    if t_eval[-1] < t_end:
        t_eval = np.append(t_eval, t_end)
    y0 = np.concatenate([state.positions.ravel(), state.velocities.ravel()])
    sol = solve_ivp(rhs, (t0, t_end), y0, method="DOP853", t_eval=t_eval,
                    rtol=rtol, atol=atol, events=events)
    if sol.status == -1:
        raise IntegrationError(f"integration failed at t={sol.t[-1] if len(sol.t) else t0:.6g}: {sol.message}")

    times = list(sol.t)
    ys = [sol.y[:, k] for k in range(sol.y.shape[1])]
    termination = "completed"
    if sol.status == 1:
        if len(sol.t_events[0]):
            termination = "collision"
        else:
            termination = "min_distance"
            times.append(float(sol.t_events[1][0]))
            ys.append(sol.y_events[1][0])
    rs = [y[:size].reshape(shape) for y in ys]
    vs = [y[size:].reshape(shape) for y in ys]
    return times, rs, vs, termination


def _shape_deviation(d0: np.ndarray, d: np.ndarray) -> float:
    ratio0 = d0[:, None] / d0[None, :]
    ratio = d[:, None] / d[None, :]
    return float(np.max(np.abs(ratio - ratio0) / ratio0))


def _momentum_floor(trajectory: Trajectory) -> float:
    """1e-12 times sum_ij mu_ij |q_ij| |qdot_ij| at the first sample (1e-12 when that vanishes)"""
    mu, _ = reduced_masses(trajectory.masses)
    r, v = trajectory.positions[0], trajectory.velocities[0]
    scale = sum(m * float(np.linalg.norm(r[i] - r[j]) * np.linalg.norm(v[i] - v[j])) for (i, j), m in mu.items())
    return 1e-12 * (scale if scale > 0 else 1.0)


def pair_momentum_drift(trajectory: Trajectory) -> Dict[Pair, float]:
    """
    max_t |L_ij(t) - L_ij(0)| / (|L_ij(0)| + floor) for every pair.

    The floor keeps pairs with no initial angular momentum (radial motion)
    from dividing rounding noise by zero.
    """
    history = [pair_angular_momentum(Configuration(r), v, trajectory.masses)
               for r, v in zip(trajectory.positions, trajectory.velocities)]
    initial, _ = history[0]
    floor = _momentum_floor(trajectory)
    drift = {}
    for p, L0 in initial.items():
        worst = max(float(np.linalg.norm(np.asarray(momenta[p]) - L0)) for momenta, _ in history)
        drift[p] = worst / (float(np.linalg.norm(L0)) + floor)
    return drift


def compute_diagnostics(trajectory: Trajectory) -> TrajectoryDiagnostics:
    """Diagnose a trajectory from its samples"""
    masses = trajectory.masses
    index = pairs(masses.n)
    configs = [Configuration(r) for r in trajectory.positions]
    states = [trajectory.state(k) for k in range(len(trajectory))]

    d0 = configs[0].distance_matrix()[tuple(zip(*index))]
    shape_history = [_shape_deviation(d0, c.distance_matrix()[tuple(zip(*index))]) for c in configs]

    momenta = [pair_angular_momentum(c, s.velocities, masses)[1] for c, s in zip(configs, states)]
    total0 = float(np.linalg.norm(momenta[0]))
    total_drift = (max(float(np.linalg.norm(np.asarray(L) - momenta[0])) for L in momenta)
                   / max(total0, _momentum_floor(trajectory)))

    energies = [total_energy(s) for s in states]
    energy_drift = max(abs(e - energies[0]) for e in energies) / abs(energies[0])

    kinetic_error = 0.0
    for s in states:
        standard, pairspace = kinetic_energy_standard(s), kinetic_energy_pairspace(s)
        if standard > 0:
            kinetic_error = max(kinetic_error, abs(pairspace - standard) / standard)
        else:
            kinetic_error = max(kinetic_error, abs(pairspace))

    fits: List[LambdaFit] = [lambda_fit(c, masses) for c in configs]
    lambdas = [f.lam for f in fits]
    q12 = [c.distance_matrix()[0, 1] for c in configs]
    scaled = [lam * (q / q12[0]) ** 3 for lam, q in zip(lambdas, q12)]
    lambda_scaling = max(abs(x - scaled[0]) for x in scaled) / abs(scaled[0])

    rays0 = configs[0].positions - configs[0].center_of_mass(masses)
    norms0 = np.linalg.norm(rays0, axis=1)
    moving = norms0 > 1e-12 * configs[0].characteristic_length()
    ray_deviation = 0.0
    for c in configs:
        rays = c.positions - c.center_of_mass(masses)
        for k in np.flatnonzero(moving):
            unit = rays[k] / np.linalg.norm(rays[k])
            ray_deviation = max(ray_deviation, float(np.linalg.norm(unit - rays0[k] / norms0[k])))

    return TrajectoryDiagnostics(
        max_shape_deviation=max(shape_history),
        pair_momentum_drift=pair_momentum_drift(trajectory),
        total_momentum_drift=total_drift,
        energy_drift=energy_drift,
        lambda_history=lambdas,
        kinetic_identity_error=kinetic_error,
        lambda_scaling_deviation=lambda_scaling,
        max_ray_deviation=ray_deviation,
        shape_deviation_history=shape_history,
    )


def _rotation_normal(config: Configuration) -> np.ndarray:
    if config.dim == 2:
        return np.array([0.0, 0.0, 1.0])
    centered = config.positions - config.positions.mean(axis=0)
    _, singular, vt = np.linalg.svd(centered)
    if singular[-1] > 1e-10 * singular[0]:
        raise DomainError("a spatial configuration cannot rotate rigidly; use homothetic motion")
    return vt[-1]


def homographic_init(config: Configuration, masses: Masses, speed_factor: float = 1.0,
                     tol: float = DEFAULT_TOLERANCES.oracle) -> DynamicState:
    """
    Initial state of a homographic motion of a central configuration.

    Velocities are speed_factor * omega * n x (r_i - R) with omega = sqrt(lambda)
    and n the plane normal: 1 gives the rigid rotation, 0 the homothetic
    collapse, anything else a motion in which each body follows a Kepler
    conic and the shape stays similar. Positions are shifted to the
    center-of-mass frame.
    """
    fit = lambda_fit(config, masses, tol=tol)
    if not fit.is_central:
        raise NotCentralError(
            f"configuration is not central (oracle deviation {fit.max_relative_deviation:.3e} "
            f">= {tol:g})", fit.max_relative_deviation)
    offsets = config.positions - fit.center_of_mass
    velocities = np.zeros_like(offsets)
    if speed_factor != 0.0:
        normal = _rotation_normal(config)
        lifted = np.cross(normal, Configuration(offsets).lifted())
        velocities = speed_factor * fit.omega * lifted[:, :config.dim]
        w = masses.array
        velocities = velocities - w @ velocities / w.sum()
    return DynamicState(0.0, offsets, velocities, masses)


def rigid_rotation_init(config: Configuration, masses: Masses,
                        tol: float = DEFAULT_TOLERANCES.oracle) -> DynamicState:
    """Relative equilibrium: uniform rotation at omega = sqrt(lambda)"""
    return homographic_init(config, masses, 1.0, tol)


def homothetic_init(config: Configuration, masses: Masses,
                    tol: float = DEFAULT_TOLERANCES.oracle) -> DynamicState:
    """Release from rest; the bodies fall along fixed rays through the center of mass"""
    return homographic_init(config, masses, 0.0, tol)


def rotation_period(config: Configuration, masses: Masses) -> float:
    """2 pi / sqrt(lambda)"""
    return 2 * math.pi / lambda_fit(config, masses).omega


def collapse_time(config: Configuration, masses: Masses) -> float:
    """Time for a homothetic release from rest to reach total collapse"""
    return math.pi / (2 * math.sqrt(2 * lambda_fit(config, masses).lam))


def trajectory_rows(trajectory: Trajectory) -> List[List[float]]:
    shapes = trajectory.diagnostics.shape_deviation_history
    lambdas = trajectory.diagnostics.lambda_history
    return [[float(t)] + [float(x) for x in r.ravel()] + [shapes[k], lambdas[k]]
            for k, (t, r) in enumerate(zip(trajectory.times, trajectory.positions))]


def trajectory_header(trajectory: Trajectory) -> List[str]:
    n, dim = trajectory.positions.shape[1:]
    axes = "xyz"[:dim]
    return ["t"] + [f"{axis}{i + 1}" for i in range(n) for axis in axes] + ["shape_deviation", "lambda"]


def write_trajectory_csv(trajectory: Trajectory, stream: Optional[TextIO] = None, path: Optional[str] = None):
    """Sampled positions with per-sample shape deviation and lambda"""
    write_csv(trajectory_header(trajectory), trajectory_rows(trajectory), stream=stream, path=path)


def write_diagnostics_json(trajectory: Trajectory, stream: Optional[TextIO] = None, path: Optional[str] = None):
    """JSON summary of the trajectory diagnostics"""
    summary = {
        "method": trajectory.method,
        "termination": trajectory.termination,
        "samples": len(trajectory),
        "t_final": float(trajectory.times[-1]),
    }
    summary.update(trajectory.diagnostics.to_dict())
    write_json(summary, stream=stream, path=path)
