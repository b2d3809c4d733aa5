"""Reproducible experiment recipes: parameter sweeps persisted as CSV + JSON.

Each built-in recipe wraps one computation of the package (charge-equation
convergence, step-profile propagator convergence, sigma-convergence of the
well dynamics toward the point interaction, ground-state energies, survival
probability, field-induced potential, resonance tuning) as a sweep over one
declared parameter list.  A run writes <experiment>.csv (header row, floats
with 17 significant digits, '\\n' endings, no timestamps) plus a JSON
sidecar with the config echo, provenance, wall times and per-row status;
identical configs therefore produce byte-identical CSV.

Sweep points execute on a bounded worker pool; a failing point marks its
row failed (metrics nan) and never aborts the siblings.  Rows are written
in declared parameter order regardless of completion order.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .charge import build_forcing, charge_for_step_profile, oracle_constant_beta, solve_charge
from .core import BetaProfile, RadialGrid
from .pointint import (
    DEFAULT_POSITION_GRID,
    boundary_coefficient,
    default_test_state,
    survival_probability,
)
from .qcfield import FormFactor, build_fields, effective_potential
from .regdyn import compare_to_point_interaction, ground_state_energy
from .resonance import evaluate_shape, tune_to_resonance

__all__ = [
    "UnknownRecipe",
    "RunFailed",
    "ExperimentConfig",
    "ExperimentResult",
    "recipe_names",
    "validate",
    "run",
]


class UnknownRecipe(ValueError):
    """Raised when a config names an experiment this package does not have."""


class RunFailed(RuntimeError):
    """Raised when a run cannot produce any successful row."""


@dataclass(frozen=True)
class ExperimentConfig:
    """A named recipe plus its flat scalar/list parameters."""

    experiment: str
    parameters: dict = field(default_factory=dict)
    output_dir: str = "out"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        doc = json.loads(text)
        if not isinstance(doc, dict):
            raise ValueError("config document must be a JSON object")
        unknown = set(doc) - {"experiment", "parameters", "output_dir"}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "experiment" not in doc:
            raise ValueError("config is missing the 'experiment' key")
        return cls(
            experiment=doc["experiment"],
            parameters=dict(doc.get("parameters", {})),
            output_dir=doc.get("output_dir", "out"),
        )

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


@dataclass
class ExperimentResult:
    """Outcome of one run: ordered rows plus file locations and provenance."""

    config: ExperimentConfig
    rows: list
    provenance: dict
    wall_times: list
    csv_path: str
    json_path: str


# --------------------------------------------------------------------------
# recipe definitions


@dataclass(frozen=True)
class _Recipe:
    columns: tuple
    defaults: dict
    sweep_key: str
    prepare: Callable[[dict], Any]
    evaluate: Callable[[Any, dict, Any], dict]
    check: Callable[[dict], list]


def _cosine_profile(p: dict) -> BetaProfile:
    return BetaProfile.cosine(
        gamma_a=p["gamma_a"], gamma_b=p["gamma_b"], kappa=p["kappa"], s=p["s"]
    )


def _common_profile_checks(p: dict) -> list:
    out = []
    for key in ("gamma_a", "gamma_b", "kappa", "s"):
        if key in p and not _finite(p[key]):
            out.append(f"{key} must be a finite number")
    if _finite(p.get("kappa", 2.0)) and p.get("kappa", 2.0) <= 0:
        out.append("kappa must be positive (cosine profile frequency)")
    if p.get("kappa") is None and p.get("gamma_b", 0.0) != 0:
        out.append("missing kappa for cosine profile")
    return out


def _finite(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _check_sigma_list(values: Any) -> list:
    if not isinstance(values, (list, tuple)) or not values:
        return ["sigma_list must be a nonempty list"]
    out = []
    for v in values:
        if not _finite(v) or not (0.0 < v < 1.0):
            out.append(f"sigma out of (0,1): {v!r}")
    return out


# --- charge-converge --------------------------------------------------------


def _charge_prepare(p: dict) -> dict:
    psi = default_test_state()
    return {"psi": psi}


def _charge_evaluate(ctx: dict, p: dict, h: float) -> dict:
    b = boundary_coefficient(p["beta"])
    prof = BetaProfile.constant(b, s=p["s"])
    f = build_forcing(ctx["psi"], p["s"], p["t"], h)
    q = solve_charge(prof, f, h).values
    q_ref = oracle_constant_beta(b, f, h, s=p["s"]).values
    return {
        "h": float(h),
        "sup_error": float(np.max(np.abs(q - q_ref))),
        "sup_charge": float(np.max(np.abs(q))),
    }


def _charge_check(p: dict) -> list:
    out = _common_profile_checks(p)
    if not _finite(p["beta"]):
        out.append("beta must be a finite number")
    if not isinstance(p["h_list"], (list, tuple)) or not p["h_list"]:
        out.append("h_list must be a nonempty list")
    else:
        out += [f"h must be positive: {h!r}" for h in p["h_list"] if not (_finite(h) and h > 0)]
    if _finite(p["t"]) and _finite(p["s"]) and not p["t"] > p["s"]:
        out.append("t must exceed s")
    return out


# --- step-beta-converge -----------------------------------------------------


def _step_prepare(p: dict) -> dict:
    psi = default_test_state()
    prof = _cosine_profile(p).scaled(0.25)
    h = (p["t"] - p["s"]) / p["time_steps"]
    f = build_forcing(psi, p["s"], p["t"], h)
    q = solve_charge(prof, f, h).values
    return {"profile": prof, "forcing": f, "h": h, "q": q,
            "sup_q": float(np.max(np.abs(q)))}


def _step_evaluate(ctx: dict, p: dict, n: int) -> dict:
    qn = charge_for_step_profile(ctx["profile"], int(n), ctx["forcing"], ctx["h"]).values
    return {
        "n": int(n),
        "sup_diff": float(np.max(np.abs(qn - ctx["q"]))),
        "sup_step_charge": float(np.max(np.abs(qn))),
        "sup_charge": ctx["sup_q"],
    }


def _step_check(p: dict) -> list:
    out = _common_profile_checks(p)
    if not isinstance(p["n_list"], (list, tuple)) or not p["n_list"]:
        out.append("n_list must be a nonempty list")
    else:
        out += [
            f"n must be an integer >= 1: {n!r}"
            for n in p["n_list"]
            if not (isinstance(n, int) and not isinstance(n, bool) and n >= 1)
        ]
    if not (isinstance(p["time_steps"], int) and p["time_steps"] >= 100):
        out.append("time_steps must be an integer >= 100")
    return out


# --- sigma-converge ---------------------------------------------------------


def _sigma_prepare(p: dict) -> dict:
    cert = tune_to_resonance(p["shape"])
    grid = RadialGrid(r_max=p["r_max"], n_points=p["grid_points"])
    psi = default_test_state(grid)
    return {"cert": cert, "psi": psi, "profile": _cosine_profile(p)}


def _sigma_evaluate(ctx: dict, p: dict, sigma: float) -> dict:
    rows = compare_to_point_interaction(
        ctx["psi"], ctx["profile"], ctx["cert"], [sigma],
        s=p["s"], t=p["t"], dt=p["dt"], h=p["h"],
    )
    return {"sigma": float(sigma), "l2_error": float(rows[0][1])}


def _sigma_check(p: dict) -> list:
    out = _common_profile_checks(p) + _check_sigma_list(p["sigma_list"])
    for key in ("dt", "h"):
        if not (_finite(p[key]) and p[key] > 0):
            out.append(f"{key} must be positive")
    if not (isinstance(p["grid_points"], int) and p["grid_points"] >= 16):
        out.append("grid_points must be an integer >= 16")
    if not (_finite(p["r_max"]) and p["r_max"] > 0):
        out.append("r_max must be positive")
    if p["shape"] not in ("square_well", "smooth_bump"):
        out.append(f"shape must be square_well or smooth_bump, got {p['shape']!r}")
    return out


# --- gs-energy --------------------------------------------------------------


def _gs_prepare(p: dict) -> dict:
    return {"cert": tune_to_resonance(p["shape"])}


def _gs_evaluate(ctx: dict, p: dict, sigma: float) -> dict:
    beta = p["beta"]
    pps = p["points_per_sigma"]
    n = int(round(p["r_max"] * pps / sigma)) + 1
    grid = RadialGrid(r_max=p["r_max"], n_points=n)
    energy = ground_state_energy(ctx["cert"], sigma, beta, grid)
    paired = RadialGrid(r_max=p["r_max"] / sigma, n_points=n)
    scaled = ground_state_energy(ctx["cert"], 1.0, beta * sigma, paired) / sigma**2
    target = -math.pi**2 * beta**2
    return {
        "sigma": float(sigma),
        "energy": float(energy),
        "scaled_identity": float(scaled),
        "target": float(target),
        "rel_deviation": float(abs(energy - target) / abs(target)),
    }


def _gs_check(p: dict) -> list:
    out = _check_sigma_list(p["sigma_list"])
    if not (_finite(p["beta"]) and p["beta"] < 0):
        out.append("beta must be a finite negative number (bound-state regime)")
    if not (isinstance(p["points_per_sigma"], int) and p["points_per_sigma"] >= 8):
        out.append("points_per_sigma must be an integer >= 8")
    if not (_finite(p["r_max"]) and p["r_max"] > 0):
        out.append("r_max must be positive")
    if p["shape"] not in ("square_well", "smooth_bump"):
        out.append(f"shape must be square_well or smooth_bump, got {p['shape']!r}")
    return out


# --- ionize -----------------------------------------------------------------


def _ionize_prepare(p: dict) -> dict:
    prof = _cosine_profile(p)
    t_values = np.asarray(p["t_list"], dtype=float)
    surv = survival_probability(prof, t_values, h=p["h"])
    return {"survival": {float(t): float(v) for t, v in zip(t_values, surv)}}


def _ionize_evaluate(ctx: dict, p: dict, t: float) -> dict:
    return {"t": float(t), "survival": ctx["survival"][float(t)]}


def _ionize_check(p: dict) -> list:
    out = _common_profile_checks(p)
    if not isinstance(p["t_list"], (list, tuple)) or not p["t_list"]:
        out.append("t_list must be a nonempty list")
    else:
        out += [
            f"t must be finite and >= s: {t!r}"
            for t in p["t_list"]
            if not (_finite(t) and t >= p.get("s", 0.0))
        ]
    if not (_finite(p["h"]) and p["h"] > 0):
        out.append("h must be positive")
    ga, gb = p.get("gamma_a", -1.0), p.get("gamma_b", 0.0)
    if _finite(ga) and _finite(gb) and ga + gb >= 0:
        out.append("profile must start bound: gamma_a + gamma_b < 0 required")
    return out


# --- field-potential --------------------------------------------------------


def _field_prepare(p: dict) -> dict:
    cert = tune_to_resonance(p["shape"])
    ff = FormFactor(m=p["form_m"])
    fields = build_fields(
        cert, ff, p["sigma"], p["gamma_a"], p["gamma_b"], p["kappa"], p["s"]
    )
    r_grid = RadialGrid(r_max=p["r_max"], n_points=p["r_points"])
    kap, s = p["kappa"], p["s"]
    v_0 = effective_potential(fields, ff, s, r_grid)
    v_q = effective_potential(fields, ff, s + math.pi / (2 * kap), r_grid)
    v_h = effective_potential(fields, ff, s + math.pi / kap, r_grid)
    a_coef = v_q
    b_coef = 0.5 * (v_0 - v_h)
    well = cert.potential.coupling * evaluate_shape(
        cert.potential, r_grid.nodes / p["sigma"]
    )
    return {"r": r_grid.nodes, "v_start": v_0, "a": a_coef, "b": b_coef, "well": well}


def _field_evaluate(ctx: dict, p: dict, idx: int) -> dict:
    i = int(idx)
    return {
        "r": float(ctx["r"][i]),
        "v_start": float(ctx["v_start"][i]),
        "a_coef": float(ctx["a"][i]),
        "b_coef": float(ctx["b"][i]),
        "well_scaled": float(ctx["well"][i]),
    }


def _field_check(p: dict) -> list:
    out = _common_profile_checks(p)
    if not (_finite(p["sigma"]) and 0.0 < p["sigma"] < 1.0):
        out.append(f"sigma out of (0,1): {p['sigma']!r}")
    if not (isinstance(p["r_points"], int) and p["r_points"] >= 16):
        out.append("r_points must be an integer >= 16")
    if not (_finite(p["r_max"]) and p["r_max"] > 0):
        out.append("r_max must be positive")
    if not (_finite(p["form_m"]) and p["form_m"] > 0.75):
        out.append("form_m must exceed 3/4 (square-integrable form factor)")
    if p["shape"] not in ("square_well", "smooth_bump"):
        out.append(f"shape must be square_well or smooth_bump, got {p['shape']!r}")
    return out


# --- resonance-tune ---------------------------------------------------------


def _resonance_prepare(p: dict) -> dict:
    return {}


def _resonance_evaluate(ctx: dict, p: dict, shape: str) -> dict:
    cert = tune_to_resonance(shape, grid=RadialGrid(r_max=1.0, n_points=p["grid_points"]))
    return {
        "shape": shape,
        "coupling": float(cert.potential.coupling),
        "bs_eigenvalue": float(cert.bs_eigenvalue),
        "pairing": float(cert.pairing),
        "simple": int(cert.simple),
    }


def _resonance_check(p: dict) -> list:
    out = []
    shapes = p["shape_list"]
    if not isinstance(shapes, (list, tuple)) or not shapes:
        out.append("shape_list must be a nonempty list")
    else:
        out += [
            f"shape must be square_well or smooth_bump, got {sh!r}"
            for sh in shapes
            if sh not in ("square_well", "smooth_bump")
        ]
    if not (isinstance(p["grid_points"], int) and p["grid_points"] >= 64):
        out.append("grid_points must be an integer >= 64")
    return out


_PROFILE_DEFAULTS = {"gamma_a": -1.0, "gamma_b": 0.5, "kappa": 2.0, "s": 0.0}

_RECIPES: dict = {
    "charge-converge": _Recipe(
        columns=("h", "sup_error", "sup_charge"),
        defaults={**_PROFILE_DEFAULTS, "beta": -0.5, "t": 1.0,
                  "h_list": [1e-2, 5e-3, 2.5e-3]},
        sweep_key="h_list",
        prepare=_charge_prepare,
        evaluate=_charge_evaluate,
        check=_charge_check,
    ),
    "step-beta-converge": _Recipe(
        columns=("n", "sup_diff", "sup_step_charge", "sup_charge"),
        defaults={**_PROFILE_DEFAULTS, "t": 1.0, "time_steps": 6400,
                  "n_list": [4, 8, 16, 32]},
        sweep_key="n_list",
        prepare=_step_prepare,
        evaluate=_step_evaluate,
        check=_step_check,
    ),
    "sigma-converge": _Recipe(
        columns=("sigma", "l2_error"),
        defaults={**_PROFILE_DEFAULTS, "t": 1.0, "shape": "square_well",
                  "r_max": 18.0, "grid_points": 5761, "dt": 1.25e-4, "h": 5e-4,
                  "sigma_list": [0.4, 0.2, 0.1, 0.05]},
        sweep_key="sigma_list",
        prepare=_sigma_prepare,
        evaluate=_sigma_evaluate,
        check=_sigma_check,
    ),
    "gs-energy": _Recipe(
        columns=("sigma", "energy", "scaled_identity", "target", "rel_deviation"),
        defaults={"beta": -0.5, "shape": "square_well", "r_max": 18.0,
                  "points_per_sigma": 32, "sigma_list": [0.2, 0.1, 0.05]},
        sweep_key="sigma_list",
        prepare=_gs_prepare,
        evaluate=_gs_evaluate,
        check=_gs_check,
    ),
    "ionize": _Recipe(
        columns=("t", "survival"),
        defaults={**_PROFILE_DEFAULTS, "h": 1e-3,
                  "t_list": [0.0, 2.5, 5.0, 7.5, 10.0]},
        sweep_key="t_list",
        prepare=_ionize_prepare,
        evaluate=_ionize_evaluate,
        check=_ionize_check,
    ),
    "field-potential": _Recipe(
        columns=("r", "v_start", "a_coef", "b_coef", "well_scaled"),
        defaults={**_PROFILE_DEFAULTS, "sigma": 0.1, "shape": "smooth_bump",
                  "form_m": 1.0, "r_max": 1.0, "r_points": 401},
        sweep_key="_row_index",
        prepare=_field_prepare,
        evaluate=_field_evaluate,
        check=_field_check,
    ),
    "resonance-tune": _Recipe(
        columns=("shape", "coupling", "bs_eigenvalue", "pairing", "simple"),
        defaults={"shape_list": ["square_well", "smooth_bump"], "grid_points": 2001},
        sweep_key="shape_list",
        prepare=_resonance_prepare,
        evaluate=_resonance_evaluate,
        check=_resonance_check,
    ),
}


# "status" and "error" are appended to every row by the runner.
for _name, _recipe in _RECIPES.items():
    assert not {"status", "error"} & set(_recipe.columns), _name
del _name, _recipe


def recipe_names() -> list:
    return sorted(_RECIPES)


# --------------------------------------------------------------------------
# validation and execution


def _effective_parameters(recipe: _Recipe, config: ExperimentConfig) -> dict:
    return {**recipe.defaults, **config.parameters}


def validate(config: ExperimentConfig) -> list:
    """Diagnostics preventing a run; empty list iff the config is runnable."""
    if config.experiment not in _RECIPES:
        return [
            f"unknown experiment {config.experiment!r}; "
            f"known: {', '.join(recipe_names())}"
        ]
    recipe = _RECIPES[config.experiment]
    out = []
    unknown = set(config.parameters) - set(recipe.defaults)
    out += [f"unknown parameter key {k!r}" for k in sorted(unknown)]
    if not isinstance(config.output_dir, str) or not config.output_dir:
        out.append("output_dir must be a nonempty path string")
    params = _effective_parameters(recipe, config)
    try:
        out += recipe.check(params)
    except (TypeError, KeyError) as exc:  # malformed values reaching the checks
        out.append(f"malformed parameters: {exc!r}")
    return out


def _sweep_points(recipe: _Recipe, params: dict) -> list:
    if recipe.sweep_key == "_row_index":
        return list(range(params["r_points"]))
    return list(params[recipe.sweep_key])


def _format_cell(value: Any) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def run(config: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    """Execute the named recipe and persist CSV + JSON into output_dir."""
    if config.experiment not in _RECIPES:
        raise UnknownRecipe(
            f"unknown experiment {config.experiment!r}; known: {', '.join(recipe_names())}"
        )
    diagnostics = validate(config)
    if diagnostics:
        raise RunFailed("invalid config: " + "; ".join(diagnostics))
    recipe = _RECIPES[config.experiment]
    params = _effective_parameters(recipe, config)

    started = datetime.now(timezone.utc).isoformat()
    try:
        context = recipe.prepare(params)
    except Exception as exc:
        raise RunFailed(f"{config.experiment}: shared setup failed: {exc}") from exc

    points = _sweep_points(recipe, params)

    def one(point: Any) -> tuple:
        t0 = time.perf_counter()
        try:
            row = recipe.evaluate(context, params, point)
            return row, None, time.perf_counter() - t0
        except Exception as exc:
            return None, f"{type(exc).__name__}: {exc}", time.perf_counter() - t0

    with ThreadPoolExecutor(max_workers=max(1, int(jobs))) as pool:
        outcomes = list(pool.map(one, points))

    rows, wall_times = [], []
    for point, (row, error, wall) in zip(points, outcomes):
        wall_times.append(wall)
        if row is None:
            filler = {c: math.nan for c in recipe.columns}
            key = recipe.columns[0]
            if recipe.sweep_key != "_row_index":
                filler[key] = point
            rows.append({**filler, "status": "failed", "error": error})
        else:
            rows.append({**row, "status": "ok", "error": ""})
    if all(r["status"] == "failed" for r in rows):
        raise RunFailed(
            f"{config.experiment}: every sweep point failed; "
            f"first error: {rows[0]['error']}"
        )

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{config.experiment}.csv"
    json_path = out_dir / f"{config.experiment}.json"

    header = list(recipe.columns) + ["status"]
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_format_cell(row[c]) for c in header))
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")

    provenance = {"version": __version__, "timestamp": started}
    sidecar = {
        "config": {
            "experiment": config.experiment,
            "parameters": params,
            "output_dir": config.output_dir,
        },
        "provenance": provenance,
        "rows": [
            {"status": r["status"], "error": r["error"], "wall_time": w}
            for r, w in zip(rows, wall_times)
        ],
    }
    json_path.write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return ExperimentResult(
        config=config,
        rows=rows,
        provenance=provenance,
        wall_times=wall_times,
        csv_path=str(csv_path),
        json_path=str(json_path),
    )
