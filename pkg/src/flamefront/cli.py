"""Command-line front end.

    flamefront steady-rs --epsilon 0.5 --j 1
    flamefront bifurcation-rs --epsilon 0.05:0.95:40 --j-max 3 --jobs 4
    flamefront catalog-ms --epsilon 0.21
    flamefront --config run.yaml

Exit status: 0 success, 1 failed verification, 2 invalid configuration,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .errors import (
    ConfigError,
    FlameFrontError,
    NoBranchError,
    UnsupportedParameterError,
    WindowError,
)
from .io import (
    CATALOG_HEADER,
    DIAGRAM_HEADER,
    STEADY_HEADER,
    catalog_rows,
    diagram_rows,
    pole_trajectory_header,
    pole_trajectory_rows,
    steady_rows,
    write_csv,
    write_json,
    write_manifest,
)
from .spectral import GridSpec

COMMANDS = ("simulate", "steady-rs", "bifurcation-rs", "stability", "poles", "catalog-ms", "verify")
OUTPUT_ENV = "FLAMEFRONT_OUTPUT_DIR"
EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 1, 2, 3


@dataclass
class RunConfig:
    command: str = "verify"
    epsilon: object = 0.5
    n_modes: int = 256
    n_points: int | None = None
    seed: int = 0
    output_dir: str = "flamefront-out"
    format: str = "csv"
    equation: str = "RS"
    t_end: float = 10.0
    dt: float = 1e-3
    sample_every: int = 100
    amplitude: float = 1e-2
    n_active: int = 10
    j: int = 1
    sign: str = "both"
    j_max: int = 3
    jobs: int = 1
    kind: str = "RS_ABOUT_V"
    n_grid: int = 512
    n0: int = 1
    n_pi: int = 0
    heights: list | None = None
    t_max: float = 1e4
    epsilons: list = field(default_factory=list, repr=False)

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.n_modes, self.n_points)

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("epsilons")
        return d


CONFIG_KEYS = {f.name for f in fields(RunConfig)} - {"epsilons"}


def parse_sweep(spec) -> list[float]:
    """A number, a list, 'start:stop:count[:log]' or {start, stop, count, spacing}."""
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return [float(spec)]
    if isinstance(spec, (list, tuple)):
        return [float(v) for v in spec]
    if isinstance(spec, dict):
        unknown = set(spec) - {"start", "stop", "count", "spacing"}
        if unknown:
            raise ConfigError(f"unknown sweep keys: {sorted(unknown)}")
        try:
            start, stop, count = float(spec["start"]), float(spec["stop"]), int(spec["count"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed sweep {spec!r}") from exc
        spacing = spec.get("spacing", "linear")
    elif isinstance(spec, str):
        parts = spec.split(":")
        if len(parts) == 1:
            try:
                return [float(parts[0])]
            except ValueError as exc:
                raise ConfigError(f"bad epsilon {spec!r}") from exc
        if len(parts) not in (3, 4):
            raise ConfigError(f"sweep must be start:stop:count[:log], got {spec!r}")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"bad sweep {spec!r}") from exc
        spacing = parts[3] if len(parts) == 4 else "linear"
    else:
        raise ConfigError(f"cannot read epsilon from {spec!r}")
    if count < 1:
        raise ConfigError("sweep count must be >= 1")
    if spacing == "log":
        if start <= 0 or stop <= 0:
            raise ConfigError("log sweeps need positive bounds")
        return [float(v) for v in np.geomspace(start, stop, count)]
    if spacing != "linear":
        raise ConfigError(f"sweep spacing must be 'linear' or 'log', not {spacing!r}")
    return [float(v) for v in np.linspace(start, stop, count)]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flamefront", description=__doc__.split("\n")[0])
    p.add_argument("command_pos", nargs="?", choices=COMMANDS, metavar="command",
                   help="one of: " + ", ".join(COMMANDS))
    s = argparse.SUPPRESS
    p.add_argument("--command", choices=COMMANDS, default=s)
    p.add_argument("--config", default=None, help="YAML file with RunConfig keys")
    p.add_argument("--epsilon", default=s, help="value or sweep start:stop:count[:log]")
    p.add_argument("--n-modes", dest="n_modes", type=int, default=s)
    p.add_argument("--n-points", dest="n_points", type=int, default=s)
    p.add_argument("--seed", type=int, default=s)
    p.add_argument("--output-dir", dest="output_dir", default=s)
    p.add_argument("--format", choices=("csv", "json"), default=s)
    p.add_argument("--equation", choices=("RS", "MS", "UFORM"), default=s)
    p.add_argument("--t-end", dest="t_end", type=float, default=s)
    p.add_argument("--dt", type=float, default=s)
    p.add_argument("--sample-every", dest="sample_every", type=int, default=s)
    p.add_argument("--amplitude", type=float, default=s)
    p.add_argument("--n-active", dest="n_active", type=int, default=s)
    p.add_argument("--j", type=int, default=s)
    p.add_argument("--sign", choices=("+", "-", "both"), default=s)
    p.add_argument("--j-max", dest="j_max", type=int, default=s)
    p.add_argument("--jobs", type=int, default=s)
    p.add_argument("--kind", choices=("RS_ABOUT_V", "MS_ABOUT_V", "TRIVIAL_RS", "TRIVIAL_MS"), default=s)
    p.add_argument("--n-grid", dest="n_grid", type=int, default=s)
    p.add_argument("--n0", type=int, default=s)
    p.add_argument("--n-pi", dest="n_pi", type=int, default=s)
    p.add_argument("--heights", type=lambda t: [float(v) for v in t.split(",")], default=s)
    p.add_argument("--t-max", dest="t_max", type=float, default=s)
    p.add_argument("--version", action="version", version=f"flamefront {__version__}")
    return p


def _load_file(path) -> dict:
    try:
        with open(path, encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a mapping of keys to values")
    data = dict(data)
    grid = data.pop("grid", None)
    if grid is not None:
        if not isinstance(grid, dict) or set(grid) - {"n_modes", "n_points"}:
            raise ConfigError("grid must be a mapping with n_modes / n_points")
        data.update(grid)
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def parse_config(argv=None, environ=None) -> RunConfig:
    """Defaults <- config file <- output-dir env var <- command-line flags."""
    environ = os.environ if environ is None else environ
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:
            raise
        raise ConfigError("invalid command-line arguments") from None
    values: dict = {}
    if ns.config:
        values.update(_load_file(ns.config))
    if environ.get(OUTPUT_ENV):
        values["output_dir"] = environ[OUTPUT_ENV]
    flags = {k: v for k, v in vars(ns).items() if k not in ("config", "command_pos")}
    if ns.command_pos is not None:
        if "command" in flags and flags["command"] != ns.command_pos:
            raise ConfigError("positional command and --command disagree")
        flags["command"] = ns.command_pos
    values.update(flags)
    try:
        config = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    validate(config)
    return config


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def validate(config: RunConfig) -> None:
    from .phase_plane import EPS_MIN
    from .poles import CATALOG_EPS_MIN

    c = config
    _require(c.command in COMMANDS, f"unknown command {c.command!r}")
    _require(c.format in ("csv", "json"), "format must be csv or json")
    try:
        c.grid
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    c.epsilons = parse_sweep(c.epsilon)
    eps = c.epsilons
    _require(all(math.isfinite(e) and e > 0 for e in eps), "epsilon must be positive")
    _require(c.seed >= 0 and c.jobs >= 1, "seed must be >= 0 and jobs >= 1")
    single = c.command in ("simulate", "steady-rs", "stability", "poles")
    if single:
        _require(len(eps) == 1, f"{c.command} takes a single epsilon, not a sweep")
    if c.command == "steady-rs" or (c.command == "stability" and c.kind == "RS_ABOUT_V"):
        e = eps[0]
        _require(e < 1.0, f"no nontrivial steady state exists for eps = {e} >= 1")
        _require(e >= EPS_MIN, f"eps = {e} below the supported minimum {EPS_MIN}")
        _require(c.j >= 1 and c.j * c.j * e < 1.0, f"branch j={c.j} needs eps < 1/j^2")
    if c.command == "bifurcation-rs":
        _require(all(EPS_MIN <= e < 1.0 for e in eps), f"bifurcation sweep must lie in [{EPS_MIN}, 1)")
        _require(c.j_max >= 1, "j_max must be >= 1")
    if c.command == "catalog-ms":
        _require(all(CATALOG_EPS_MIN < e < 1.0 for e in eps),
                 f"catalog sweep must lie in ({CATALOG_EPS_MIN}, 1)")
    if c.command == "poles" or (c.command == "stability" and c.kind == "MS_ABOUT_V"):
        _require(c.n0 >= 1 and c.n_pi >= 0, "need n0 >= 1 and n_pi >= 0")
        if c.n_pi == 0:
            _require(eps[0] * (2 * c.n0 - 1) < 1.0,
                     f"{c.n0} coalescent pairs need eps*(2n-1) < 1")
        if c.heights is not None:
            _require(len(c.heights) == c.n0 + c.n_pi, "need one initial height per pair")
    if c.command == "simulate":
        _require(c.equation in ("RS", "MS", "UFORM"), "equation must be RS, MS or UFORM")
        _require(c.t_end > 0 and c.dt > 0 and c.sample_every >= 1, "bad time stepping")
    if c.command == "stability":
        _require(c.n_grid >= 64, "n_grid must be >= 64")
    _require(c.sign in ("+", "-", "both"), "sign must be +, - or both")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

class _Writer:
    def __init__(self, config: RunConfig):
        self.dir = Path(config.output_dir)
        self.format = config.format
        self.outputs: list[Path] = []

    def table(self, name, header, rows):
        if self.format == "json":
            path = write_json(self.dir / f"{name}.json", [dict(zip(header, r)) for r in rows])
        else:
            path = write_csv(self.dir / f"{name}.csv", header, rows)
        self.outputs.append(path)
        return path

    def json(self, name, obj):
        path = write_json(self.dir / f"{name}.json", obj)
        self.outputs.append(path)
        return path


def _signs(config):
    return ("+", "-") if config.sign == "both" else (config.sign,)


def _cmd_simulate(config, out):
    from .evolution import (
        Equation,
        EvolutionProblem,
        front_metrics,
        integrate,
        liapunov_monotone_report,
        phi_from_uform,
        random_initial,
    )
    from .spectral import SpectralField, derivative

    grid = config.grid
    eq = Equation(config.equation)
    init = random_initial(grid, config.seed, config.n_active, config.amplitude)
    if eq is Equation.UFORM:
        init = derivative(init, 1)
    problem = EvolutionProblem(eq, config.epsilons[0], grid, config.t_end, config.dt, config.sample_every)
    traj = integrate(problem, init)
    fronts = phi_from_uform(traj, problem.epsilon) if eq is Equation.UFORM else traj
    rows = []
    for s in fronts:
        m = front_metrics(s)
        rows.append((s.time, m.mean_position, m.tip_x, m.delta_phi, len(m.cusp_xs)))
    out.table("trajectory", ["t", "mean", "tip_x", "delta_phi", "n_cusps"], rows)
    last = traj[-1].field
    out.table("final_profile", ["x", "value"], list(zip(last.x, last.values)))
    summary = {"t_end": traj[-1].time, "samples": len(traj)}
    if eq is Equation.UFORM:
        rep = liapunov_monotone_report(traj, problem.epsilon)
        summary.update(liapunov_monotone=rep.monotone, worst_relative_increase=rep.worst_relative_increase)
    out.json("summary", summary)
    return summary


def _cmd_steady(config, out):
    from .phase_plane import steady_solution

    summary = []
    for sign in _signs(config):
        st = steady_solution(config.j, sign, config.epsilons[0])
        tag = "plus" if sign == "+" else "minus"
        out.table(f"steady_j{config.j}_{tag}", STEADY_HEADER, steady_rows(st))
        summary.append({"j": st.j, "sign": sign, "epsilon": st.epsilon, "w0": st.w0,
                        "log_gap": st.log_gap, "V": st.V, "delta_phi": st.delta_phi,
                        "residual": st.residual, "zero_count": st.zero_count(),
                        "velocity_gap": st.velocity_gap})
    out.json("steady_summary", summary)
    return summary


def _cmd_bifurcation(config, out):
    from .phase_plane import bifurcation_diagram

    rows = bifurcation_diagram(config.epsilons, config.j_max, config.grid, jobs=config.jobs)
    out.table("bifurcation_rs", DIAGRAM_HEADER, diagram_rows(rows))
    return {"rows": len(rows)}


def _cmd_stability(config, out):
    from .phase_plane import steady_solution
    from .poles import coalescent_steady
    from .stability import Kind, LinearizedOperator, comparison_test, discrete_spectrum

    eps = config.epsilons[0]
    kind = Kind(config.kind)
    summary = []
    if kind is Kind.RS_ABOUT_V:
        for sign in _signs(config):
            st = steady_solution(config.j, sign, eps)
            rep = discrete_spectrum(LinearizedOperator(kind, eps, st), config.n_grid)
            verdict = comparison_test(st)
            summary.append({**rep.to_json(), "j": config.j, "sign": sign,
                            "comparison_verdict": verdict.verdict, "first_zero": verdict.first_zero})
    elif kind is Kind.MS_ABOUT_V:
        line = 0.0 if config.sign in ("+", "both") else math.pi
        poles = coalescent_steady(config.n0, eps, line)
        rep = discrete_spectrum(LinearizedOperator(kind, eps, poles), config.n_grid)
        summary.append({**rep.to_json(), "n_pairs": config.n0, "translational": rep.translational})
    else:
        rep = discrete_spectrum(LinearizedOperator(kind, eps), config.n_grid)
        summary.append(rep.to_json())
    out.json("spectrum", summary)
    return {"top_eigenvalues": [s["eigenvalues"][0] for s in summary]}


def _cmd_poles(config, out):
    from .poles import PoleSet, flow_to_steady, hessian_classify, pole_liapunov

    eps = config.epsilons[0]
    lines = [0.0] * config.n0 + [math.pi] * config.n_pi
    if config.heights is None:
        heights = [0.5 * (i + 1) for i in range(config.n0)] + [0.5 * (i + 1) for i in range(config.n_pi)]
    else:
        heights = config.heights
    start = PoleSet.from_arrays(eps, lines, heights)
    final, report = flow_to_steady(start, t_max=config.t_max)
    n = final.n
    out.table("pole_trajectory", pole_trajectory_header(n), pole_trajectory_rows(report))
    summary = {"epsilon": eps, "lines": lines, "start": list(heights),
               "heights": final.heights, "converged": report.converged,
               "final_force_norm": report.final_force_norm, "U": pole_liapunov(final)}
    if report.converged:
        h = hessian_classify(final)
        summary.update(classification=h.classification, hessian_eigenvalues=h.eigenvalues,
                       gershgorin=h.gershgorin, gershgorin_certified=h.certified)
    out.json("poles_summary", summary)
    return {"converged": report.converged, "heights": [float(y) for y in final.heights]}


def _cmd_catalog(config, out):
    from .poles import enumerate_family

    rows = []
    for eps in config.epsilons:
        entries = enumerate_family(eps, jobs=config.jobs)
        rows.extend(catalog_rows(entries, eps))
    out.table("catalog_ms", ["epsilon"] + CATALOG_HEADER, rows)
    return {"rows": len(rows)}


def _cmd_verify(config, out):
    from .verify import format_table, run_checks

    results = run_checks()
    out.table("verify", ["check", "passed", "value", "threshold"],
              [(r.name, r.passed, r.value, r.threshold) for r in results])
    print(format_table(results))
    return {"passed": sum(r.passed for r in results), "total": len(results),
            "all_passed": all(r.passed for r in results)}


DISPATCH = {
    "simulate": _cmd_simulate,
    "steady-rs": _cmd_steady,
    "bifurcation-rs": _cmd_bifurcation,
    "stability": _cmd_stability,
    "poles": _cmd_poles,
    "catalog-ms": _cmd_catalog,
    "verify": _cmd_verify,
}


def run(config: RunConfig) -> tuple[dict, list[Path]]:
    """Dispatch one command; writes outputs plus manifest.json on success."""
    out = _Writer(config)
    start = time.perf_counter()
    try:
        summary = DISPATCH[config.command](config, out)
    except Exception as exc:
        exc.partial_outputs = list(out.outputs)
        raise
    write_manifest(out.dir, config.echo(), out.outputs, __version__, time.perf_counter() - start)
    return summary, out.outputs


def _error(status: int, exc: Exception, output_dir=None, partial=()) -> int:
    report = {"status": "error", "exit_code": status, "error": type(exc).__name__,
              "message": str(exc), "partial_outputs": [str(p) for p in partial]}
    print(json.dumps(report, sort_keys=True), file=sys.stderr)
    if output_dir is not None:
        write_json(Path(output_dir) / "error.json", report)
    return status


def main(argv=None) -> int:
    try:
        config = parse_config(argv)
    except ConfigError as exc:
        return _error(EXIT_CONFIG, exc)
    try:
        summary, _ = run(config)
    except (ConfigError, NoBranchError, WindowError, UnsupportedParameterError) as exc:
        return _error(EXIT_CONFIG, exc, config.output_dir, getattr(exc, "partial_outputs", ()))
    except (FlameFrontError, RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return _error(EXIT_NUMERIC, exc, config.output_dir, getattr(exc, "partial_outputs", ()))
    body = summary if isinstance(summary, dict) else {"result": summary}
    print(json.dumps({"status": "ok", "command": config.command, **_plain(body)}, sort_keys=True))
    if config.command == "verify" and not summary["all_passed"]:
        return EXIT_VERIFY
    return 0


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


if __name__ == "__main__":
    sys.exit(main())
