"""
Command-line front end.

Data (JSON/CSV) goes to stdout or --out; logs and progress go to stderr.
Exit codes: 0 central / pass, 2 not central / fail, 1 input or usage error.
"""

import functools
import json
import logging
import math
import sys
from pathlib import Path
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Tuple

import click

from central_configs import centrality, dynamics, regions
from central_configs.config import RunConfig, ToleranceConfig, load_run_config
from central_configs.exceptions import CentralConfigError, InputFormatError, NotCentralError
from central_configs.families import FAMILY_ALIASES, FamilyShape, build_family
from central_configs.families import kite, trapezium
from central_configs.pairspace import (
    Configuration,
    Masses,
    parse_system,
    read_distances_csv,
    read_system_json,
    realizable,
)
from central_configs.utils import configure_logging, parse_angle, show_progress, write_csv, write_json

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
DEFAULT_CURVE_FILE = "trapezium_curve.csv"


class CliUsageError(click.UsageError):
    """Usage error reported with the input-error exit code"""
    exit_code = EXIT_ERROR


@dataclass
class RunSpec:
    """One parsed invocation: command, inputs, outputs and tolerances"""
    command: str
    settings: RunConfig
    input_path: Optional[str] = None
    inline: Optional[str] = None
    output: Optional[str] = None
    fmt: str = "json"
    degrees: bool = False

    def __post_init__(self):
        if self.input_path and self.inline:
            raise CliUsageError("give either a configuration file or --inline, not both")

    @property
    def tolerances(self) -> ToleranceConfig:
        return self.settings.tolerances

    def angle(self, text: Optional[str]) -> Optional[float]:
        if text is None:
            return None
        return parse_angle(text, degrees=self.degrees or self.settings.region.angle_unit == "deg")

    def load_system(self) -> Tuple[Configuration, Masses]:
        if self.inline:
            try:
                data = json.loads(self.inline)
            except json.JSONDecodeError as e:
                raise InputFormatError(f"malformed configuration JSON: {e}") from e
            return parse_system(data)
        if not self.input_path:
            raise CliUsageError("a configuration file or --inline JSON is required")
        return read_system_json(self.input_path)


def _handle_errors(func):
    """Turn library errors into exit code 1 with a one-line message"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (CentralConfigError, OSError, ValueError) as e:
            raise click.ClickException(str(e)) from e
    return wrapper


def _spec(ctx: click.Context, **kwargs) -> RunSpec:
    return RunSpec(command=ctx.command.name, settings=ctx.obj, **kwargs)


def _override(settings: RunConfig, **values) -> None:
    updates = {k: v for k, v in values.items() if v is not None}
    if updates:
        settings.tolerances = replace(settings.tolerances, **updates)


@click.group()
@click.option("--settings", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Settings YAML (defaults to $CC_SETTINGS)")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging on stderr")
@click.pass_context
def cli(ctx: click.Context, settings: Optional[str], verbose: bool):
    """Construct, classify and verify four-body central configurations."""
    try:
        ctx.obj = load_run_config(settings)
    except (OSError, ValueError) as e:
        raise click.ClickException(f"cannot load settings: {e}") from e
    configure_logging("DEBUG" if verbose else ctx.obj.log_level)


@cli.command()
@click.argument("config_file", required=False, type=click.Path(dir_okay=False))
@click.option("--inline", default=None, help="Configuration JSON given on the command line")
@click.option("--distances", "distances_csv", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Check a distances CSV (i,j,q) for realizability and the mass-independent relations")
@click.option("--dim", type=click.IntRange(2, 3), default=2, show_default=True,
              help="Embedding dimension for --distances")
@click.option("--tol", type=float, default=None, help="Oracle deviation threshold")
@click.option("--residual-tol", type=float, default=None, help="Normalized residual threshold")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@_handle_errors
def check(ctx, config_file, inline, distances_csv, dim, tol, residual_tol, fmt, out):
    """Residuals, oracle and shape of a configuration."""
    _override(ctx.obj, oracle=tol, residual=residual_tol)
    spec = _spec(ctx, input_path=config_file, inline=inline, output=out, fmt=fmt)
    if distances_csv:
        if config_file or inline:
            raise CliUsageError("--distances cannot be combined with a configuration")
        ctx.exit(_check_distances(spec, distances_csv, dim))

    config, masses = spec.load_system()
    tols = spec.tolerances
    show_progress(f"Checking {config.n} bodies in {config.dim}-D")
    fit = centrality.lambda_fit(config, masses, tol=tols.oracle, acceleration_floor=tols.acceleration_floor)
    general = centrality.cc_residuals_general(config, masses) if config.n >= 3 else None
    report: Dict[str, Any] = {"central": fit.is_central, "oracle": fit.to_dict()}
    reports = []
    if general is not None:
        report["cceq"] = general.to_dict()
        reports.append(general)
    if config.n == 4:
        four = centrality.cc_residuals_four(config, masses)
        dziobek = centrality.dziobek_residuals(config.distances())
        shape = centrality.classify(config, tols.classify)
        report["4cc"] = four.to_dict()
        report["dziobek"] = dziobek.to_dict()
        report["shape"] = shape.to_dict()
        report["mass_constraints"] = centrality.equal_mass_constraints(config, masses, shape)
        reports += [four, dziobek]
        logger.info("shape %s, max 4cc residual %.3e", shape.kind, four.max_normalized)

    if fmt == "csv":
        rows = [(name, _scalar(r.raw[k]), r.normalized[k], int(r.degenerate[k]))
                for r in reports for k, name in enumerate(r.labels)]
        write_csv(("equation", "raw", "normalized", "degenerate"), rows, path=out)
    else:
        write_json(report, path=out)

    if not fit.is_central:
        worst = max((r.max_normalized for r in reports), default=math.nan)
        click.echo(f"not central: oracle deviation {fit.max_relative_deviation:.3e}, "
                   f"max normalized residual {worst:.3e}", err=True)
        ctx.exit(EXIT_FAIL)
    ctx.exit(EXIT_OK)


def _scalar(raw) -> float:
    return float(raw) if not hasattr(raw, "__len__") else float(sum(x * x for x in raw) ** 0.5)


def _check_distances(spec: RunSpec, path: str, dim: int) -> int:
    distances = read_distances_csv(path)
    outcome = realizable(distances, dim)
    report: Dict[str, Any] = {
        "realizable": outcome.realizable,
        "degenerate": outcome.degenerate,
        "embedding_dim": outcome.embedding_dim,
        "reason": outcome.reason,
    }
    if outcome.witness is not None:
        report["witness"] = outcome.witness.positions.tolist()
    passed = outcome.realizable
    if distances.n == 4:
        dziobek = centrality.dziobek_residuals(distances)
        report["dziobek"] = dziobek.to_dict()
        passed = passed and dziobek.is_central(spec.tolerances.dziobek)
    write_json(report, path=spec.output)
    return EXIT_OK if passed else EXIT_FAIL


@cli.command()
@click.argument("family", type=click.Choice(sorted(FAMILY_ALIASES)))
@click.option("--alpha", default=None, help="Angle, e.g. 75deg or 1.309")
@click.option("--beta", default=None, help="Angle, e.g. 40deg or 0.698")
@click.option("--scale", type=float, default=1.0, show_default=True, help="Length of q_12 (edge for tetrahedron)")
@click.option("--ratio", type=float, default=None,
              help="Mass ratio: m1/m2 for rhombus, m2/m1 for trapezium, m4/m1 for equilateral")
@click.option("--masses", "mass_list", default=None, help="Comma-separated masses for the tetrahedron")
@click.option("--deg", "degrees", is_flag=True, help="Bare angle numbers are degrees")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@_handle_errors
def build(ctx, family, alpha, beta, scale, ratio, mass_list, degrees, out):
    """Build a family member and emit its configuration JSON."""
    spec = _spec(ctx, output=out, degrees=degrees)
    kind = FAMILY_ALIASES[family]
    mass_ratios = {}
    if ratio is not None:
        key = {"Rhombus": "m1/m2", "IsoscelesTrapezium": "m2/m1", "EquilateralCentered": "m4/m1"}.get(kind)
        if key is None:
            raise CliUsageError(f"--ratio does not apply to {family}")
        mass_ratios[key] = ratio
    masses = None
    if mass_list:
        if kind != "Tetrahedron":
            raise CliUsageError("--masses only applies to tetrahedron")
        masses = Masses(tuple(float(x) for x in mass_list.split(",")))

    shape = FamilyShape(kind, spec.angle(alpha), spec.angle(beta), scale, mass_ratios)
    show_progress(f"Building {kind}")
    instance = build_family(shape, masses)
    fit = centrality.lambda_fit(instance.configuration, instance.masses, tol=spec.tolerances.oracle)
    logger.info("oracle deviation %.3e", fit.max_relative_deviation)
    write_json(instance.to_dict(), path=out)


@cli.command()
@click.argument("family", type=click.Choice(["rhombus", "trapezium", "kite-convex"]))
@click.option("--ratio", type=float, required=True,
              help="m1/m2 (rhombus, kite-convex), m2/m1 (trapezium)")
@click.option("--m4-ratio", type=float, default=None, help="m4/m2 for kite-convex")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@_handle_errors
def invert(ctx, family, ratio, m4_ratio, out):
    """Angles of the family member carrying a given mass ratio."""
    show_progress(f"Inverting {family} mass ratio {ratio}")
    if family == "rhombus":
        alpha = kite.rhombus_angle(ratio)
        result = {"family": family, "alpha": alpha, "beta": alpha, "mass_ratios": {"m1/m2": ratio}}
    elif family == "trapezium":
        alpha, beta = trapezium.trapezium_angles(ratio)
        result = {"family": family, "alpha": alpha, "beta": beta, "mass_ratios": {"m2/m1": ratio}}
    else:
        if m4_ratio is None:
            raise CliUsageError("kite-convex needs --m4-ratio")
        alpha, beta = kite.kite_convex_angles(ratio, m4_ratio)
        result = {"family": family, "alpha": alpha, "beta": beta,
                  "mass_ratios": {"m1/m2": ratio, "m4/m2": m4_ratio}}
    write_json(result, path=out)


@cli.command()
@click.argument("family", type=click.Choice(["kite-convex", "kite-concave", "trapezium"]))
@click.option("--grid", type=int, default=None, help="Grid resolution per axis (settings default 256)")
@click.option("--curve", is_flag=True, help="Emit the trapezium solution curve instead of the grid")
@click.option("--curve-out", type=click.Path(dir_okay=False), default=None,
              help="Trapezium curve file next to the grid (default <out stem>_curve.csv)")
@click.option("--no-curve", is_flag=True, help="Skip the trapezium curve that accompanies the grid")
@click.option("--points", type=int, default=None, help="Curve points (settings default 100)")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@_handle_errors
def region(ctx, family, grid, curve, curve_out, no_curve, points, fmt, out):
    """
    Admissible (alpha, beta) grid with mass ratios.

    The trapezium grid comes with its beta(alpha) solution curve, written to
    --curve-out, to <out stem>_curve.csv beside --out, or to
    trapezium_curve.csv when the grid goes to stdout.
    """
    settings: RunConfig = ctx.obj
    resolution = grid or settings.region.grid
    n_points = points or settings.region.curve_points
    if (curve or curve_out) and family != "trapezium":
        raise CliUsageError("the solution curve only exists for the trapezium")

    if curve:
        rows = regions.trapezium_curve(n_points)
        _emit_table(regions.CURVE_HEADER, rows, fmt, out)
        return

    show_progress(f"Sweeping {family} on a {resolution}x{resolution} grid")
    rows = regions.region_grid(family, resolution)
    _emit_table(regions.GRID_HEADER, rows, fmt, out)
    mask = regions.allowed_mask(family, resolution)
    show_progress(f"admissible fraction {mask.mean():.6f}, {regions.count_components(mask)} component(s)")
    if family == "trapezium" and not no_curve:
        curve_path = curve_out or _curve_path(out)
        write_csv(regions.CURVE_HEADER, regions.trapezium_curve(n_points), path=curve_path)
        show_progress(f"solution curve written to {curve_path}")


def _curve_path(out: Optional[str]) -> str:
    if out is None:
        return DEFAULT_CURVE_FILE
    path = Path(out)
    return str(path.with_name(f"{path.stem}_curve.csv"))


def _emit_table(header, rows: List[tuple], fmt: str, out: Optional[str]):
    if fmt == "json":
        write_json({"columns": list(header), "rows": [list(r) for r in rows]}, path=out)
    else:
        write_csv(header, rows, path=out)


@cli.command()
@click.argument("config_file", required=False, type=click.Path(dir_okay=False))
@click.option("--inline", default=None, help="Configuration JSON given on the command line")
@click.option("--mode", type=click.Choice(["rotate", "collapse", "homographic"]), default="rotate",
              show_default=True)
@click.option("--speed-factor", type=float, default=None,
              help="Homographic speed factor (1 rotates, 0 collapses)")
@click.option("--periods", type=float, default=1.0, show_default=True, help="Rotation periods to integrate")
@click.option("--steps", type=int, default=None, help="Steps (per period when rotating)")
@click.option("--dt", type=float, default=None, help="Step length; overrides --steps")
@click.option("--method", type=click.Choice(list(dynamics.METHODS)), default=None)
@click.option("--sample-every", type=int, default=None)
@click.option("--tol", type=float, default=None, help="Oracle deviation threshold")
@click.option("--shape-tol", type=float, default=None, help="Pass threshold on shape deviation")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Trajectory CSV")
@click.option("--summary", type=click.Path(dir_okay=False), default=None,
              help="Diagnostics JSON (stdout when omitted)")
@click.pass_context
@_handle_errors
def simulate(ctx, config_file, inline, mode, speed_factor, periods, steps, dt, method,
             sample_every, tol, shape_tol, out, summary):
    """Integrate a central configuration and check that its shape persists."""
    _override(ctx.obj, oracle=tol, shape=shape_tol)
    spec = _spec(ctx, input_path=config_file, inline=inline, output=out)
    config, masses = spec.load_system()
    integ = spec.settings.integrator
    tols = spec.tolerances

    factor = {"rotate": 1.0, "collapse": 0.0}.get(mode, speed_factor if speed_factor is not None else 1.0)
    try:
        state = dynamics.homographic_init(config, masses, factor, tol=tols.oracle)
    except NotCentralError as e:
        click.echo(f"not central: oracle deviation {e.deviation:.3e}", err=True)
        ctx.exit(EXIT_FAIL)

    stop = None
    if factor == 0.0:
        horizon = dynamics.collapse_time(config, masses)
        n_steps = steps or integ.steps_per_period
        method = method or integ.collapse_method
        stop = integ.collapse_stop_fraction * min(config.distances().q.values())
    else:
        horizon = periods * dynamics.rotation_period(config, masses)
        n_steps = int(round((steps or integ.steps_per_period) * periods))
        method = method or integ.method
    step = dt or horizon / n_steps
    if dt:
        n_steps = max(1, int(math.ceil(horizon / dt)))

    show_progress(f"Simulating {mode} for t={horizon:.6g} ({n_steps} steps, {method})")
    trajectory = dynamics.integrate(state, step, n_steps, method=method,
                                    sample_every=sample_every or integ.sample_every,
                                    rtol=integ.rtol, atol=integ.atol, stop_min_distance=stop)
    if out:
        dynamics.write_trajectory_csv(trajectory, path=out)
    dynamics.write_diagnostics_json(trajectory, path=summary)

    deviation = trajectory.diagnostics.max_shape_deviation
    if deviation >= tols.shape or trajectory.termination == "collision":
        click.echo(f"shape not preserved: deviation {deviation:.3e} ({trajectory.termination})", err=True)
        ctx.exit(EXIT_FAIL)
    ctx.exit(EXIT_OK)


@cli.command()
@click.argument("config_file", required=False, type=click.Path(dir_okay=False))
@click.option("--inline", default=None, help="Configuration JSON given on the command line")
@click.option("--tol", type=float, default=None, help="Oracle deviation threshold")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@_handle_errors
def oracle(ctx, config_file, inline, tol, out):
    """Acceleration oracle only: lambda and per-body deviation."""
    _override(ctx.obj, oracle=tol)
    spec = _spec(ctx, input_path=config_file, inline=inline, output=out)
    config, masses = spec.load_system()
    fit = centrality.lambda_fit(config, masses, tol=spec.tolerances.oracle,
                                acceleration_floor=spec.tolerances.acceleration_floor)
    write_json(fit.to_dict(), path=out)
    ctx.exit(EXIT_OK if fit.is_central else EXIT_FAIL)


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; maps every usage or input error to exit code 1"""
    try:
        code = cli.main(args=argv, prog_name="central-configs", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return EXIT_ERROR
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_ERROR
    return code or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
