"""Command line entry point: figure-ready datasets and time-domain runs.

Exit codes: 0 success, 2 configuration error, 3 numerical budget failure.
"""
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

import click
import numpy as np

from . import dynamics
from .breathing import SCENARIOS, BreathingMotion, Scenario, resonance_scan
from .config import Tolerances
from .coupling import load_trajectory, sensitivities
from .errors import IntegrationError, SpectralError
from .records import ResultRecord, package_version
from .spectrum import MAX_ORDER, ShellGeometry, find_eigenfrequencies

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
DEFAULT_RATIOS = "1.01:10:50"


class ConfigError(click.UsageError):
    """Invalid run configuration; ``field`` names the offending option."""

    def __init__(self, field_name, message):
        label = field_name if field_name.isupper() else "--" + field_name.replace("_", "-")
        super().__init__(f"{label}: {message}")
        self.field = field_name


def parse_ratios(text):
    """``"1.1,2,5"`` or ``"start:stop:count"`` (inclusive linear grid)."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            values = np.linspace(float(start), float(stop), int(count))
        else:
            values = np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise ConfigError("ratio", f"cannot parse {text!r}")
    if values.size == 0 or not np.all(np.isfinite(values)) or np.any(values <= 1):
        raise ConfigError("ratio", "every ratio r_outer / r_inner must be finite and > 1")
    return [float(v) for v in values]


@dataclass
class RunConfig:
    command: str
    r_inner: float = 1.0
    r_outer: Optional[float] = None
    ratios: list = field(default_factory=list)
    c: float = 1.0
    l_max: int = 0
    s_max: int = 1
    scenario: Optional[str] = None
    trajectory: Optional[str] = None
    eps: float = 1e-3
    varpi: Optional[float] = None
    t_final: Optional[float] = None
    steps: int = 50
    method: str = "perturbative"
    s_trunc: int = dynamics.DEFAULT_TRUNCATION
    out: Optional[str] = None
    fmt: str = "csv"

    def validate(self):
        for name in ("r_inner", "c", "eps"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigError(name, "must be finite")
        if self.r_inner <= 0:
            raise ConfigError("r_inner", "must be positive")
        if self.c <= 0:
            raise ConfigError("c", "must be positive")
        if self.r_outer is not None and not (np.isfinite(self.r_outer) and self.r_outer > self.r_inner):
            raise ConfigError("r_outer", "must exceed r_inner")
        if self.l_max > MAX_ORDER:
            raise ConfigError("l_max", f"must not exceed {MAX_ORDER}")
        if self.s_max < 0:
            raise ConfigError("s_max", "must be >= 0")
        if self.varpi is not None and not (np.isfinite(self.varpi) and self.varpi > 0):
            raise ConfigError("varpi", "must be positive")
        if self.t_final is not None and not (np.isfinite(self.t_final) and self.t_final >= 0):
            raise ConfigError("t_final", "must be non-negative")
        if self.steps < 1:
            raise ConfigError("steps", "must be >= 1")
        if self.s_trunc < 2:
            raise ConfigError("s_trunc", "must be >= 2")
        if abs(self.eps) > 0.1:
            raise ConfigError("eps", "amplitude must satisfy |eps| <= 0.1")
        if self.command == "simulate":
            if (self.scenario is None) == (self.trajectory is None):
                raise ConfigError("scenario", "give exactly one of --scenario or --trajectory")
        return self

    def geometries(self):
        if self.ratios:
            return [ShellGeometry(self.r_inner, self.r_inner * q, self.c) for q in self.ratios]
        r_outer = self.r_outer if self.r_outer is not None else 2.0 * self.r_inner
        return [ShellGeometry(self.r_inner, r_outer, self.c)]

    def echo(self):
        data = asdict(self)
        data.pop("out")
        return data


def _provenance(tol, **extra):
    return {
        "version": package_version(),
        "tolerances": tol.as_dict(),
        "printed_prefactor_ratio": dynamics.PRINTED_PREFACTOR_RATIO,
        **extra,
    }


def _emit(record, config):
    if config.out:
        record.write(config.out, config.fmt)
    else:
        click.echo(record.to_json() if config.fmt == "json" else record.to_csv(), nl=False)


def _tolerances():
    try:
        return Tolerances.from_env()
    except ValueError as exc:
        raise ConfigError("DCE_TOL", str(exc))


def _run(builder, config):
    tol = _tolerances()
    try:
        record = builder(config.validate(), tol)
    except (IntegrationError, SpectralError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        report = getattr(exc, "report", None)
        if report:
            click.echo(f"unitarity budget report: {report}", err=True)
        sys.exit(EXIT_NUMERICAL)
    _emit(record, config)


def build_spectrum(config, tol):
    cols = ["ratio", "r_inner", "r_outer", "c", "l", "s", "omega", "normalized"]
    rows = []
    for g in config.geometries():
        for l in range(config.l_max + 1):
            if config.s_max < 1:
                continue
            for s, w in enumerate(find_eigenfrequencies(g, l, config.s_max), start=1):
                rows.append([g.ratio, g.r_inner, g.r_outer, g.c, l, s, float(w), float(w * g.gap / (np.pi * g.c))])
    return ResultRecord("spectrum", config.echo(), cols, rows, _provenance(tol))


def build_coefficients(config, tol):
    cols = ["ratio", "r_inner", "r_outer", "c", "l", "s", "s_prime", "alpha", "c_alpha", "scaled_abs"]
    rows = []
    for g in config.geometries():
        for l in range(config.l_max + 1):
            if config.s_max < 1:
                continue
            sens = sensitivities(g, l, config.s_max, tol=tol.quadrature)
            sym = 0.5 * (sens.coefficients + np.swapaxes(sens.coefficients, 1, 2))
            for sp in range(1, config.s_max + 1):
                for a, alpha in enumerate(("inner", "outer")):
                    value = float(sym[a, 0, sp - 1])
                    rows.append([g.ratio, g.r_inner, g.r_outer, g.c, l, 1, sp, alpha, value, g.gap * abs(value)])
    return ResultRecord("coefficients", config.echo(), cols, rows, _provenance(tol))


def _simulation_motion(config, tol):
    if config.trajectory:
        try:
            motion = load_trajectory(config.trajectory, c=config.c, velocity_rtol=tol.velocity_rtol)
        except (OSError, ValueError) as exc:
            raise ConfigError("trajectory", str(exc))
        return motion, None
    g = config.geometries()[0]
    varpi = config.varpi if config.varpi is not None else 2 * find_eigenfrequencies(g, 0, 1)[0]
    try:
        breathing = BreathingMotion.from_scenario(g, config.scenario, config.eps, varpi)
    except ValueError as exc:
        raise ConfigError("eps", str(exc))
    return breathing.motion, varpi


def build_simulation(config, tol):
    motion, varpi = _simulation_motion(config, tol)
    if config.t_final is not None:
        t_final = config.t_final
    elif varpi is not None and config.eps:
        t_final = 0.05 / abs(config.eps * varpi)
    elif varpi is not None:
        t_final = 20 * np.pi / varpi
    else:
        t_final = motion.time_span
    if motion.time_span is not None and t_final > motion.time_span:
        raise ConfigError("t_final", f"exceeds the trajectory span {motion.time_span:g}")
    times = np.linspace(0.0, t_final, config.steps + 1)
    methods = ["perturbative", "full"] if config.method == "both" else [config.method]
    cols = ["t", "l", "s", "method", "N", "unitarity_deviation"]
    rows = []
    for l in range(config.l_max + 1):
        for method in methods:
            if method == "perturbative":
                curves = [dynamics.perturbative_curve(l, s, motion, times, config.s_trunc)
                          for s in range(1, config.s_max + 1)]
                for s, curve in enumerate(curves, start=1):
                    rows += [[float(t), l, s, method, float(n), float("nan")] for t, n in zip(times, curve)]
            else:
                states = dynamics.evolve_history(
                    l, motion, times, config.s_trunc, steps_per_period=tol.rk4_steps_per_period,
                    unitarity_budget=tol.unitarity)
                for s in range(1, config.s_max + 1):
                    for state in states:
                        dev = float(np.max(np.abs(state.unitarity() - 1)))
                        rows.append([state.t, l, s, method, dynamics.particle_number_full(state, s).value, dev])
    inputs = {**config.echo(), "varpi": varpi, "t_final": t_final}
    return ResultRecord("simulate", inputs, cols, rows, _provenance(tol, motion=motion.descriptor))


def build_scan(config, tol):
    g = config.geometries()[0]
    cols = ["scenario", "l", "s", "s_prime", "abscissa", "coefficient", "r_inner", "r_outer", "eps"]
    scenario = Scenario(config.scenario, config.eps) if config.scenario else None
    if config.eps == 0:
        raise ConfigError("eps", "scan needs a non-zero amplitude")
    rows = [[r.scenario, r.l, r.s, r.s_prime, r.abscissa, r.coefficient, g.r_inner, g.r_outer, config.eps]
            for r in resonance_scan(config.l_max, config.s_max, scenario, g, config.eps)]
    return ResultRecord("scan", config.echo(), cols, rows, _provenance(tol, ordinate="N / (eps varpi t)^2"))


def _geometry_options(fn):
    opts = [
        click.option("--r-inner", type=float, default=1.0, show_default=True, help="Inner shell radius."),
        click.option("--r-outer", type=float, default=None, help="Outer shell radius (default 2 r_inner)."),
        click.option("--c", "c", type=float, default=1.0, show_default=True, help="Wave speed."),
        click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output file (stdout if omitted)."),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


@click.group()
@click.version_option(package_version(), prog_name="shellcasimir")
def main():
    """Mode spectrum, couplings and particle creation between two concentric shells."""


@main.command()
@_geometry_options
@click.option("--ratio", default=DEFAULT_RATIOS, show_default=True, help="r_o/r_i list 'a,b,..' or grid 'start:stop:n'.")
@click.option("--l-max", type=int, default=2, show_default=True)
@click.option("--s-max", type=int, default=3, show_default=True)
def spectrum(r_inner, r_outer, c, out, fmt, ratio, l_max, s_max):
    """Normalised eigenfrequencies omega (r_o - r_i) / (pi c) against r_o / r_i."""
    ratios = [r_outer / r_inner] if r_outer is not None else parse_ratios(ratio)
    config = RunConfig("spectrum", r_inner, r_outer, ratios, c, l_max, s_max, out=out, fmt=fmt)
    _run(build_spectrum, config)


@main.command()
@_geometry_options
@click.option("--ratio", default=DEFAULT_RATIOS, show_default=True)
@click.option("--l-max", type=int, default=1, show_default=True)
@click.option("--s-max", type=int, default=2, show_default=True, help="Largest s' (s is fixed to 1).")
def coefficients(r_inner, r_outer, c, out, fmt, ratio, l_max, s_max):
    """Scaled resonance coefficients (r_o - r_i)|c^alpha_{l1s'}| against r_o / r_i."""
    ratios = [r_outer / r_inner] if r_outer is not None else parse_ratios(ratio)
    config = RunConfig("coefficients", r_inner, r_outer, ratios, c, l_max, s_max, out=out, fmt=fmt)
    _run(build_coefficients, config)


@main.command()
@_geometry_options
@click.option("--ratio", default=None, help="r_o / r_i (alternative to --r-outer).")
@click.option("--l-max", type=int, default=0, show_default=True)
@click.option("--s-max", type=int, default=1, show_default=True, help="Report modes s <= s_max.")
@click.option("--scenario", type=click.Choice(SCENARIOS), default=None)
@click.option("--trajectory", type=click.Path(dir_okay=False), default=None,
              help="Table with columns t r_i r_o v_i v_o.")
@click.option("--eps", type=float, default=1e-3, show_default=True)
@click.option("--varpi", type=float, default=None, help="Drive frequency (default: principal l=0 resonance).")
@click.option("--t-final", type=float, default=None, help="Default: eps varpi t = 0.05.")
@click.option("--steps", type=int, default=50, show_default=True, help="Number of output intervals.")
@click.option("--method", type=click.Choice(["perturbative", "full", "both"]), default="perturbative", show_default=True)
@click.option("--s-trunc", type=int, default=dynamics.DEFAULT_TRUNCATION, show_default=True)
def simulate(r_inner, r_outer, c, out, fmt, ratio, l_max, s_max, scenario, trajectory, eps, varpi,
             t_final, steps, method, s_trunc):
    """Particle number N(t) per mode for a breathing scenario or a tabulated trajectory."""
    if ratio is not None:
        r_outer = r_inner * parse_ratios(ratio)[0]
    config = RunConfig("simulate", r_inner, r_outer, [], c, l_max, s_max, scenario, trajectory, eps, varpi,
                       t_final, steps, method, s_trunc, out, fmt)
    _run(build_simulation, config)


@main.command()
@_geometry_options
@click.option("--ratio", default=None, help="r_o / r_i (default 2).")
@click.option("--l-max", type=int, default=2, show_default=True)
@click.option("--s-max", type=int, default=3, show_default=True)
@click.option("--scenario", type=click.Choice(SCENARIOS), default=None, help="Default: all four.")
@click.option("--eps", type=float, default=1e-3, show_default=True)
def scan(r_inner, r_outer, c, out, fmt, ratio, l_max, s_max, scenario, eps):
    """Resonant abscissae varpi / omega_01 and growth coefficients N / (eps varpi t)^2."""
    if ratio is not None:
        r_outer = r_inner * parse_ratios(ratio)[0]
    config = RunConfig("scan", r_inner, r_outer, [], c, l_max, s_max, scenario, None, eps, out=out, fmt=fmt)
    _run(build_scan, config)


if __name__ == "__main__":
    main()
