"""Command-line entry point: experiment recipes plus ad-hoc single runs.

Subcommands
    run             execute a recipe described by a JSON config file
    validate        check a config file without running it
    charge          solve the charge equation for one interaction profile
    evolve          evolve the default test state under the point interaction
    resonance       tune a well shape to zero-energy resonance
    gs-energy       ground-state energies of the rescaled wells (recipe)
    ionize          survival probability of the initial bound state (recipe)
    field-potential potential induced by the quasi-classical field (recipe)
    version         print the package version

Exit codes: 0 success, 1 invalid usage or config, 2 runtime/solver failure.
All interaction strengths on this surface are the physical beta(t); the
internal boundary-condition coefficient b = beta/4 is applied internally.
Files are written only under the output directory (--output-dir, else
TDPI_OUTPUT_DIR, else ./out); stdout carries a human-readable summary.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import BetaProfile, RadialGrid
from .charge import build_forcing, solve_charge
from .experiments import (
    ExperimentConfig,
    RunFailed,
    UnknownRecipe,
    recipe_names,
    run as run_experiment,
    validate as validate_config,
)
from .pointint import default_test_state, evolve_point_interaction
from .resonance import tune_to_resonance

__all__ = ["main"]

_OK, _INVALID, _RUNTIME = 0, 1, 2

# units of the natural system (hbar = 2m = 1) for stdout headers
_UNITS = {
    "h": "time",
    "t": "time",
    "dt": "time",
    "s": "time",
    "sigma": "length",
    "r": "length",
    "energy": "energy",
    "scaled_identity": "energy",
    "target": "energy",
    "v_start": "energy",
    "a_coef": "energy",
    "b_coef": "energy",
    "well_scaled": "energy",
}


class _UsageError(ValueError):
    """Bad flags or config; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we want exit 1
        raise _UsageError(message)


def _say_factory(quiet: bool):
    if quiet:
        return lambda *args: None
    return print


def _fail(operation: str, exc: Exception) -> int:
    print(f"error: {operation} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
    return _RUNTIME


def _output_dir(args, config_value: str | None = None) -> Path:
    flag = getattr(args, "output_dir", None)
    chosen = flag or config_value or os.environ.get("TDPI_OUTPUT_DIR") or "out"
    path = Path(chosen)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise _UsageError(f"expected comma-separated numbers, got {text!r}") from exc


_floats.__name__ = "number list"  # for argparse's "invalid ... value" message


def _profile(args) -> BetaProfile:
    if args.beta is not None:
        return BetaProfile.constant(args.beta, s=args.s)
    return BetaProfile.cosine(args.gamma_a, args.gamma_b, args.kappa, s=args.s)


def _shape_kind(flag_value: str) -> str:
    return flag_value.replace("-", "_")


def _write_csv(path: Path, header: list, rows: list) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format(float(x), ".17g") for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _header_label(column: str) -> str:
    return f"{column} ({_UNITS.get(column, 'dimensionless')})"


def _report_rows(say, columns, rows) -> None:
    say("  ".join(_header_label(c) for c in columns) + "  status")
    for row in rows:
        cells = []
        for c in columns:
            v = row[c]
            cells.append(f"{v:.6g}" if isinstance(v, float) else str(v))
        say("  ".join(cells) + "  " + row["status"])


def _run_and_report(cfg: ExperimentConfig, jobs: int, say) -> int:
    diagnostics = validate_config(cfg)
    if diagnostics:
        for d in diagnostics:
            print(f"invalid config for {cfg.experiment!r}: {d}", file=sys.stderr)
        return _INVALID
    try:
        result = run_experiment(cfg, jobs=jobs)
    except (UnknownRecipe, RunFailed) as exc:
        return _fail("experiments.run", exc)
    columns = [c for c in result.rows[0] if c not in ("status", "error")]
    say(f"experiment: {cfg.experiment}")
    _report_rows(say, columns, result.rows)
    say(f"wrote {result.csv_path}")
    say(f"wrote {result.json_path}")
    failed = [r for r in result.rows if r["status"] == "failed"]
    if failed:
        say(f"{len(failed)} of {len(result.rows)} points failed; see {result.json_path}")
    return _OK


# --------------------------------------------------------------------------
# subcommand handlers


def _cmd_version(args, say) -> int:
    print(__version__)
    return _OK


def _load_config(path_text: str) -> tuple:
    path = Path(path_text)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise _UsageError(f"cannot read config file {path}: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise _UsageError(f"config file {path} is not valid JSON: {exc}") from exc
    try:
        cfg = ExperimentConfig.from_json(raw)
    except ValueError as exc:
        raise _UsageError(f"config file {path}: {exc}") from exc
    return cfg, doc


def _cmd_validate(args, say) -> int:
    cfg, _ = _load_config(args.config)
    diagnostics = validate_config(cfg)
    if diagnostics:
        for d in diagnostics:
            print(f"invalid: {d}", file=sys.stderr)
        return _INVALID
    say(f"config ok: experiment {cfg.experiment!r}")
    return _OK


def _parse_override(text: str):
    if "=" not in text:
        raise _UsageError(f"--param expects KEY=VALUE, got {text!r}")
    key, value = text.split("=", 1)
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value  # bare strings (e.g. shape names) stay strings


def _cmd_run(args, say) -> int:
    cfg, doc = _load_config(args.config)
    overrides = dict(_parse_override(p) for p in args.param or [])
    out_dir = _output_dir(args, config_value=doc.get("output_dir"))
    cfg = ExperimentConfig(
        experiment=cfg.experiment,
        parameters={**cfg.parameters, **overrides},
        output_dir=str(out_dir),
    )
    return _run_and_report(cfg, args.jobs, say)


def _cmd_charge(args, say) -> int:
    out_dir = _output_dir(args)
    profile = _profile(args)
    psi = default_test_state()
    try:
        forcing = build_forcing(psi, args.s, args.t, args.h)
    except Exception as exc:
        return _fail("charge.build_forcing", exc)
    try:
        traj = solve_charge(profile.scaled(0.25), forcing, args.h, scheme=args.scheme)
    except Exception as exc:
        return _fail("charge.solve_charge", exc)
    q = traj.values
    path = out_dir / "charge.csv"
    _write_csv(
        path,
        ["t", "re_q", "im_q", "abs_q"],
        [(tm, z.real, z.imag, abs(z)) for tm, z in zip(traj.times, q)],
    )
    say(f"charge equation on [{args.s}, {args.t}], step h = {args.h} (time)")
    say(f"steps: {q.size - 1}   scheme: {traj.source}")
    say(f"sup |q| (dimensionless): {np.max(np.abs(q)):.12g}")
    say(f"q at t = {args.t}: {q[-1]:.12g}")
    say(f"wrote {path}")
    return _OK


def _cmd_evolve(args, say) -> int:
    out_dir = _output_dir(args)
    profile = _profile(args)
    psi0 = default_test_state()
    try:
        psi_t, traj = evolve_point_interaction(psi0, profile, args.s, args.t, args.h)
    except Exception as exc:
        return _fail("pointint.evolve_point_interaction", exc)
    path = out_dir / "evolve.csv"
    _write_csv(
        path,
        ["r", "re_psi", "im_psi", "abs_psi"],
        [
            (r, z.real, z.imag, abs(z))
            for r, z in zip(psi_t.grid.nodes, psi_t.samples)
        ],
    )
    say(f"point-interaction evolution on [{args.s}, {args.t}], h = {args.h} (time)")
    say(f"L2 norm at t (dimensionless): {psi_t.l2_norm:.12g}")
    say(f"sup |q| on the window (dimensionless): {np.max(np.abs(traj.values)):.12g}")
    say(f"wrote {path}")
    return _OK


def _cmd_resonance(args, say) -> int:
    out_dir = _output_dir(args)
    kind = _shape_kind(args.shape)
    grid = RadialGrid(r_max=1.0, n_points=args.grid_points)
    try:
        cert = tune_to_resonance(kind, grid=grid)
    except Exception as exc:
        return _fail("resonance.tune_to_resonance", exc)
    path = out_dir / f"certificate_{kind}.json"
    path.write_text(cert.to_json() + "\n", encoding="utf-8")
    say(f"shape: {kind}")
    say(f"resonant coupling g* (dimensionless): {cert.potential.coupling:.12g}")
    say(f"bottom Birman-Schwinger eigenvalue (dimensionless): {cert.bs_eigenvalue:.12g}")
    say(f"pairing integral (dimensionless): {cert.pairing:.12g}")
    say(f"simple eigenvalue: {'yes' if cert.simple else 'no'}")
    say(f"wrote {path}")
    return _OK


def _recipe_wrapper(name: str, param_names: dict):
    """Handler factory: build an ExperimentConfig from mirrored flags."""

    def handler(args, say) -> int:
        params = {}
        for flag, key in param_names.items():
            value = getattr(args, flag)
            if value is not None:
                params[key] = value
        cfg = ExperimentConfig(
            experiment=name,
            parameters=params,
            output_dir=str(_output_dir(args)),
        )
        return _run_and_report(cfg, getattr(args, "jobs", 1), say)

    return handler


# --------------------------------------------------------------------------
# parser assembly


def _add_profile_flags(p: _Parser, with_beta: bool = True) -> None:
    if with_beta:
        p.add_argument(
            "--beta",
            type=float,
            default=None,
            help="constant interaction strength; overrides the cosine profile",
        )
    p.add_argument("--gamma-a", type=float, default=-1.0, help="cosine profile mean")
    p.add_argument(
        "--gamma-b", type=float, default=0.5, help="cosine profile amplitude"
    )
    p.add_argument(
        "--kappa", type=float, default=2.0, help="cosine profile angular frequency"
    )
    p.add_argument("--s", type=float, default=0.0, help="window start time")


def _add_common(p: _Parser) -> None:
    p.add_argument("--output-dir", default=None, help="directory for all file output")
    p.add_argument(
        "--quiet", action="store_true", help="suppress the stdout summary"
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="tdpi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("version", help="print the package version")
    p.set_defaults(handler=_cmd_version)

    p = sub.add_parser("run", help="execute a recipe from a JSON config")
    p.add_argument("--config", required=True, help="path to the JSON config file")
    p.add_argument(
        "--param",
        action="append",
        metavar="KEY=VALUE",
        help="override one config parameter (repeatable; value parsed as JSON)",
    )
    p.add_argument("--jobs", type=int, default=1, help="worker pool size")
    _add_common(p)
    p.set_defaults(handler=_cmd_run)

    p = sub.add_parser("validate", help="check a config file without running")
    p.add_argument("--config", required=True, help="path to the JSON config file")
    _add_common(p)
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("charge", help="solve the charge equation once")
    _add_profile_flags(p)
    p.add_argument("--t", type=float, default=1.0, help="window end time")
    p.add_argument("--h", type=float, default=1e-3, help="time step")
    p.add_argument(
        "--scheme",
        choices=("auto", "product", "cq"),
        default="auto",
        help="discretization of the Abel history integral",
    )
    _add_common(p)
    p.set_defaults(handler=_cmd_charge)

    p = sub.add_parser("evolve", help="evolve the default test state once")
    _add_profile_flags(p)
    p.add_argument("--t", type=float, default=1.0, help="window end time")
    p.add_argument("--h", type=float, default=1e-3, help="time step")
    _add_common(p)
    p.set_defaults(handler=_cmd_evolve)

    p = sub.add_parser("resonance", help="tune a well shape to resonance")
    p.add_argument(
        "--shape",
        choices=("square-well", "smooth-bump"),
        default="square-well",
        help="well shape to tune",
    )
    p.add_argument(
        "--grid-points", type=int, default=2001, help="radial grid points on [0,1]"
    )
    _add_common(p)
    p.set_defaults(handler=_cmd_resonance)

    p = sub.add_parser("gs-energy", help="ground-state energies of scaled wells")
    p.add_argument("--beta", type=float, default=None, help="interaction strength")
    p.add_argument(
        "--sigma-list", type=_floats, default=None, help="comma-separated widths"
    )
    p.add_argument(
        "--shape", choices=("square-well", "smooth-bump"), default=None,
        help="well shape",
    )
    p.add_argument(
        "--points-per-sigma", type=int, default=None, help="grid points per width"
    )
    p.add_argument("--r-max", type=float, default=None, help="radial box size")
    p.add_argument("--jobs", type=int, default=1, help="worker pool size")
    _add_common(p)
    p.set_defaults(
        handler=_recipe_wrapper(
            "gs-energy",
            {
                "beta": "beta",
                "sigma_list": "sigma_list",
                "shape": "shape",
                "points_per_sigma": "points_per_sigma",
                "r_max": "r_max",
            },
        )
    )

    p = sub.add_parser("ionize", help="survival probability of the bound state")
    _add_profile_flags(p, with_beta=False)
    p.add_argument("--h", type=float, default=None, help="time step")
    p.add_argument(
        "--t-list", type=_floats, default=None, help="comma-separated sample times"
    )
    _add_common(p)
    p.set_defaults(
        handler=_recipe_wrapper(
            "ionize",
            {
                "gamma_a": "gamma_a",
                "gamma_b": "gamma_b",
                "kappa": "kappa",
                "s": "s",
                "h": "h",
                "t_list": "t_list",
            },
        )
    )

    p = sub.add_parser("field-potential", help="potential induced by the field")
    _add_profile_flags(p, with_beta=False)
    p.add_argument("--sigma", type=float, default=None, help="well width")
    p.add_argument(
        "--shape", choices=("square-well", "smooth-bump"), default=None,
        help="well shape",
    )
    p.add_argument(
        "--form-m", type=float, default=None, help="form factor decay exponent"
    )
    p.add_argument("--r-max", type=float, default=None, help="radial box size")
    p.add_argument("--r-points", type=int, default=None, help="radial output points")
    _add_common(p)
    p.set_defaults(
        handler=_recipe_wrapper(
            "field-potential",
            {
                "gamma_a": "gamma_a",
                "gamma_b": "gamma_b",
                "kappa": "kappa",
                "s": "s",
                "sigma": "sigma",
                "shape": "shape",
                "form_m": "form_m",
                "r_max": "r_max",
                "r_points": "r_points",
            },
        )
    )
    return parser


def _normalize_shape_args(args) -> None:
    if getattr(args, "shape", None) and args.subcommand != "resonance":
        args.shape = _shape_kind(args.shape)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _normalize_shape_args(args)
        say = _say_factory(getattr(args, "quiet", False))
        return args.handler(args, say)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _INVALID
    except Exception as exc:  # pragma: no cover - safety net
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return _RUNTIME


if __name__ == "__main__":
    sys.exit(main())
