"""Command-line front end.

    invmeans eval   --pair example31 --x 0 --y 3 --target lo
    invmeans orbit  --pair agm --x 1 --y 2 --format csv --output trace.csv
    invmeans check  invariance --pair example31 --k "(x+y)/2"

Exit codes: 0 converged / check passed, 1 error, 2 approximate result
(an iteration hit its step cap), 3 check failed.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import click
import tomli

from .core import (Grid, Interval, Mean, MeanPair, check_properties, make_builtin,
                   make_example_pair, make_kc)
from .errors import InvariantMeansError
from .expr import parse, parse_mean
from .lab import DEFAULT_TOL, check_phi_decomposition, invariance_residual, ordering_check
from .limitlike import LimitLikeSpec, bo_mean, bo_value, check_two_limit_like
from .orbit import ConvergencePolicy, iterate, lower_upper, trace_rows
from .transfinite import (StagePolicy, probe_continuous_uniqueness, stage_mean, stage_value,
                          transfinite_iterate, transfinite_mean)

EXIT_OK, EXIT_ERROR, EXIT_APPROX, EXIT_FAILED = 0, 1, 2, 3

NAMED_PAIRS = ("example31", "agm")
_PAIR_DOMAINS = {"example31": (0.0, 10.0), "agm": (1.0, 2.0)}
_BUILTINS = ("arithmetic", "geometric", "harmonic", "min", "max")


@dataclass(frozen=True)
class RunConfig:
    pair: str | None = None
    mean_m: str | None = None
    mean_n: str | None = None
    domain: tuple[float, float] | None = None
    gap_tol: float = 1e-12
    max_steps: int = 100_000
    max_limit_stages: int = 64
    window: int | None = None
    grid: int = 101
    random_points: int = 1000
    seed: int = 0
    format: str | None = None
    output: str | None = None

    def __post_init__(self):
        for name in ("gap_tol", "max_steps", "max_limit_stages"):
            if not getattr(self, name) > 0:
                raise click.BadParameter(f"{name} must be positive", param_hint=name)
        if self.window is not None and self.window <= 0:
            raise click.BadParameter("window must be positive", param_hint="window")
        if self.pair is not None and self.pair not in NAMED_PAIRS:
            raise click.BadParameter(f"unknown pair {self.pair!r}; choose from {NAMED_PAIRS}",
                                     param_hint="pair")
        if self.format not in (None, "csv", "json"):
            raise click.BadParameter("format must be csv or json", param_hint="format")
        if self.domain is not None:
            object.__setattr__(self, "domain", tuple(float(v) for v in self.domain))

    @classmethod
    def from_sources(cls, config_path: str | None, flags: dict) -> "RunConfig":
        """File values first, then every flag that was actually given."""
        values = {}
        if config_path:
            with open(config_path, "rb") as fh:
                data = tomli.load(fh)
            known = {f.name for f in fields(cls)}
            unknown = sorted(set(data) - known)
            if unknown:
                raise click.BadParameter(f"unknown config keys {unknown}", param_hint="--config")
            values.update(data)
        values.update({k: v for k, v in flags.items() if v is not None})
        return cls(**values)

    def interval(self) -> Interval:
        if self.domain is not None:
            return Interval(*self.domain)
        return Interval(*_PAIR_DOMAINS.get(self.pair, (0.0, 10.0)))

    def policy(self) -> ConvergencePolicy:
        return ConvergencePolicy(self.gap_tol, self.max_steps)

    def stage_policy(self) -> StagePolicy:
        return StagePolicy(self.policy(), self.max_limit_stages)

    def sample_grid(self) -> Grid:
        return Grid(self.grid, self.random_points, self.seed)

    def build_pair(self) -> MeanPair:
        dom = self.interval()
        if self.pair is not None:
            if self.mean_m or self.mean_n:
                raise click.UsageError("give either --pair or --mean-m/--mean-n, not both")
            if self.pair == "example31":
                return make_example_pair(dom)
            return MeanPair.detect(make_builtin("arithmetic", dom), make_builtin("geometric", dom),
                                   self.sample_grid())
        if not (self.mean_m and self.mean_n):
            raise click.UsageError("a pair needs --pair or both --mean-m and --mean-n")
        grid = self.sample_grid()
        m = resolve_mean(self.mean_m, dom, grid)
        n = resolve_mean(self.mean_n, dom, grid)
        return MeanPair.detect(m, n, grid)


def resolve_mean(text: str, domain: Interval, grid: Grid) -> Mean:
    """A built-in name (``arithmetic``, ``power:2``, ``kc:-1``, ...) or DSL text."""
    key = text.strip()
    if key in _BUILTINS:
        return make_builtin(key, domain)
    head, _, arg = key.partition(":")
    if arg and head in ("power", "kc"):
        try:
            value = float(arg)
        except ValueError:
            raise click.BadParameter(f"bad parameter in {key!r}") from None
        return make_builtin("power", domain, value) if head == "power" else make_kc(value, domain)
    return parse_mean(key, domain, grid)


def resolve_candidate(text: str, pair: MeanPair, cfg: RunConfig) -> Mean:
    """Like :func:`resolve_mean`, plus the pair-derived means
    ``lo``, ``up``, ``tr``, ``bo:SPEC`` and ``stage:K[:a|b]``."""
    key = text.strip()
    policy = cfg.policy()
    if key == "lo":
        return bo_mean(pair, LimitLikeSpec.liminf(), policy, cfg.window)
    if key == "up":
        return bo_mean(pair, LimitLikeSpec.limsup(), policy, cfg.window)
    if key == "tr":
        return transfinite_mean(pair, cfg.stage_policy())
    if key.startswith("bo:"):
        return bo_mean(pair, LimitLikeSpec.from_text(key[3:]), policy, cfg.window)
    if key.startswith("stage:"):
        parts = key.split(":")
        component = parts[2] if len(parts) > 2 else "a"
        return stage_mean(pair, int(parts[1]), cfg.stage_policy(), component)
    return resolve_mean(key, pair.domain, cfg.sample_grid())


# -- output -------------------------------------------------------------------

def _emit(text: str, output: str | None) -> None:
    if output is None:
        click.echo(text, nl=not text.endswith("\n"))
        return
    try:
        Path(output).write_text(text)
    except OSError as exc:
        raise click.FileError(output, hint=exc.strerror) from None


def dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, (int, str)) else "%.17g" % v for v in row])
    return buf.getvalue()


# -- shared options -------------------------------------------------------------

def _pair_options(f):
    opts = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     help="TOML file with RunConfig keys; flags override it."),
        click.option("--pair", default=None, help="Named pair: example31 or agm."),
        click.option("--mean-m", default=None, help="First mean: built-in name or DSL text."),
        click.option("--mean-n", default=None, help="Second mean: built-in name or DSL text."),
        click.option("--domain", nargs=2, type=float, default=None, help="Interval LO HI."),
        click.option("--gap-tol", type=float, default=None, help="Orbit stopping tolerance."),
        click.option("--max-steps", type=int, default=None, help="Orbit step cap."),
        click.option("--max-limit-stages", type=int, default=None, help="Staging cap for Tr."),
        click.option("--window", type=int, default=None, help="Tail window for Bo means."),
        click.option("--grid", type=int, default=None, help="Lattice nodes per axis."),
        click.option("--random-points", type=int, default=None, help="Extra random grid points."),
        click.option("--seed", type=int, default=None, help="Seed for the random grid points."),
        click.option("--format", "format", type=click.Choice(["csv", "json"]), default=None),
        click.option("--output", type=click.Path(dir_okay=False), default=None,
                     help="Write here instead of stdout."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


_CONFIG_KEYS = {f.name for f in fields(RunConfig)}


def _config(kwargs: dict) -> RunConfig:
    flags = {k: kwargs.pop(k) for k in list(kwargs) if k in _CONFIG_KEYS}
    if flags.get("domain") == ():
        flags["domain"] = None
    return RunConfig.from_sources(kwargs.pop("config_path"), flags)


def _report(cfg: RunConfig, pair: MeanPair, body: dict, passed: bool) -> int:
    payload = {"pair": pair.name, "domain": [pair.domain.lo, pair.domain.hi], **body}
    _emit(dump_json(payload), cfg.output)
    return EXIT_OK if passed else EXIT_FAILED


# -- commands -------------------------------------------------------------------

@click.group()
@click.version_option(package_name="artifact")
def cli():
    """Invariant means of mean-type mappings: orbits, Lo/Up/Tr/Bo, checks."""


@cli.command("eval")
@_pair_options
@click.option("--x", "x", type=float, required=True)
@click.option("--y", "y", type=float, required=True)
@click.option("--target", type=click.Choice(["lo", "up", "tr", "bo", "stage"]), required=True)
@click.option("--phi", default="liminf", show_default=True,
              help="For --target bo: liminf, limsup, or a weight expression in x.")
@click.option("--stage", "stage", type=int, default=1, show_default=True)
@click.option("--component", type=click.Choice(["a", "b"]), default="a", show_default=True)
def eval_cmd(x, y, target, phi, stage, component, **kwargs):
    """Print one invariant-mean value at (x, y) with its convergence flag."""
    cfg = _config(kwargs)
    pair = cfg.build_pair()
    pair.domain.require(x, y)
    extra = {}
    if target in ("lo", "up"):
        lu = lower_upper(pair, x, y, cfg.policy())
        value, converged = (lu.lo if target == "lo" else lu.up), lu.converged
        extra["steps"] = lu.steps
    elif target == "tr":
        rep = transfinite_iterate(pair, x, y, cfg.stage_policy())
        value = rep.tr_value
        converged = rep.terminated_diagonal and all(
            n < cfg.max_steps for n in rep.inner_steps)
        extra["limit_stages_used"] = rep.limit_stages_used
        extra["terminated_diagonal"] = rep.terminated_diagonal
    elif target == "bo":
        spec = LimitLikeSpec.from_text(phi)
        value, converged = bo_value(pair, spec, x, y, cfg.policy(), cfg.window)
        extra["phi"] = spec.label
    else:
        value, converged = stage_value(pair, x, y, stage, cfg.stage_policy(), component)
        extra["stage"], extra["component"] = stage, component
    status = "converged" if converged else "approximate"
    if cfg.format == "json":
        text = dump_json({"pair": pair.name, "x": x, "y": y, "target": target,
                          "value": value, "status": status, **extra})
    elif cfg.format == "csv":
        text = rows_to_csv(["target", "x", "y", "value", "status"],
                           [(target, x, y, value, status)])
    else:
        text = f"{value!r}\n{status}\n"
    _emit(text, cfg.output)
    return EXIT_OK if converged else EXIT_APPROX


@cli.command("orbit")
@_pair_options
@click.option("--x", "x", type=float, required=True)
@click.option("--y", "y", type=float, required=True)
def orbit_cmd(x, y, **kwargs):
    """Export the orbit (n, x_n, y_n, gap) as CSV (default) or JSON."""
    cfg = _config(kwargs)
    pair = cfg.build_pair()
    trace = iterate(pair, x, y, cfg.policy())
    rows = trace_rows(trace)
    if cfg.format == "json":
        text = dump_json({"pair": pair.name, "converged": trace.converged, "steps": trace.steps,
                          "columns": ["n", "x_n", "y_n", "gap"],
                          "rows": [list(r) for r in rows]})
    else:
        text = rows_to_csv(["n", "x_n", "y_n", "gap"], rows)
    _emit(text, cfg.output)
    return EXIT_OK if trace.converged else EXIT_APPROX


@cli.group("check")
def check():
    """Grid checks; each writes a JSON report and exits 0 iff it passes."""


@check.command("properties")
@_pair_options
def check_properties_cmd(**kwargs):
    """Mean bounds, symmetry, strictness, M <= N and the weak contraction."""
    cfg = _config(kwargs)
    pair = cfg.build_pair()
    rep = check_properties(pair, cfg.sample_grid())
    return _report(cfg, pair, rep.to_dict(), rep.all_hold)


@check.command("invariance")
@_pair_options
@click.option("--k", "k", required=True, help="Candidate mean (name, DSL, lo/up/tr/bo:SPEC).")
@click.option("--tol", type=float, default=DEFAULT_TOL, show_default=True)
def check_invariance_cmd(k, tol, **kwargs):
    """Residual max |K - K(M, N)| over the grid."""
    cfg = _config(kwargs)
    pair = cfg.build_pair()
    rep = invariance_residual(resolve_candidate(k, pair, cfg), pair, cfg.sample_grid(), tol)
    return _report(cfg, pair, rep.to_dict(), rep.passed)


@check.command("ordering")
@_pair_options
@click.option("--k", "ks", multiple=True,
              help="Candidate mean; repeatable.  Defaults to lo, up, tr.")
@click.option("--tol", type=float, default=DEFAULT_TOL, show_default=True)
def check_ordering_cmd(ks, tol, **kwargs):
    """Lo <= K <= Up for every grid-invariant candidate K."""
    cfg = _config(kwargs)
    pair = cfg.build_pair()
    cands = [resolve_candidate(k, pair, cfg) for k in (ks or ("lo", "up", "tr"))]
    rep = ordering_check(pair, cands, cfg.sample_grid(), cfg.policy(), tol)
    return _report(cfg, pair, rep.to_dict(), rep.passed)


@check.command("phi")
@_pair_options
@click.option("--phi", "phi", required=True, help="DSL text for Phi(x, y).")
@click.option("--tol", type=float, default=DEFAULT_TOL, show_default=True)
def check_phi_cmd(phi, tol, **kwargs):
    """Phi = Phi(M, N) and the factorization Phi = f(Tr)."""
    cfg = _config(kwargs)
    pair = cfg.build_pair()
    rep = check_phi_decomposition(parse(phi), pair, cfg.sample_grid(), cfg.stage_policy(), tol)
    return _report(cfg, pair, {**rep.to_dict(), "phi": phi}, rep.passed)


@check.command("uniqueness")
@_pair_options
@click.option("--jump-tol", type=float, default=1e-6, show_default=True)
def check_uniqueness_cmd(jump_tol, **kwargs):
    """Heuristic: does Tr jump?  A jump rules out continuous invariant means."""
    if kwargs.get("grid") is None:
        kwargs["grid"] = 41
    cfg = _config(kwargs)
    pair = cfg.build_pair()
    rep = probe_continuous_uniqueness(pair, cfg.sample_grid(), cfg.stage_policy(), jump_tol)
    return _report(cfg, pair, rep.to_dict(), not rep.jump_detected)


@check.command("limitlike")
@click.option("--spec", "spec_text", required=True,
              help="liminf, limsup, or a weight expression in x.")
@click.option("--output", type=click.Path(dir_okay=False), default=None)
def check_limitlike_cmd(spec_text, output):
    """Shift-by-two invariance and the liminf/limsup sandwich on test sequences."""
    rep = check_two_limit_like(LimitLikeSpec.from_text(spec_text))
    _emit(dump_json(rep.to_dict()), output)
    return EXIT_OK if rep.passed else EXIT_FAILED


def main(argv: list[str] | None = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        rv = cli.main(args=argv, prog_name="invmeans", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return EXIT_ERROR
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_ERROR
    except (InvariantMeansError, ValueError, ArithmeticError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_ERROR
    return rv if isinstance(rv, int) else EXIT_OK


def console_main() -> None:
    sys.exit(main())
