"""Command-line runner for the convergence studies.

Examples
--------
    helmuc --problem gaussian --geometry convex --k 10 --out gauss.csv
    helmuc --config sweep.cfg --k 50
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .analysis import LevelFailure, StudyConfig, error_norms, level_mesh, run_convergence_study, star_norm
from .geometries import GEOMETRIES, get_geometry
from .problems import PERTURBATION_LAWS, make_problem
from .solver import StabilizationParams, build_system, solve

logger = logging.getLogger("helmuc")

PROBLEMS = ("gaussian", "hadamard", "wkb")
DEFAULT_LEVELS = (16, 32, 64, 128)
CONFIG_KEYS = ("problem", "geometry", "k", "n", "gamma", "levels", "perturb", "seed", "out")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    geometry: str
    k: float = 10.0
    n: int | None = None
    gamma: float = 1e-5
    levels: tuple[int, ...] = DEFAULT_LEVELS
    perturb: str = "none"
    seed: int = 0
    out: str = "helmuc_study.csv"

    def study(self) -> StudyConfig:
        return StudyConfig(
            problem=self.problem,
            geometry=self.geometry,
            k=self.k,
            n=self.n,
            gamma=self.gamma,
            levels=self.levels,
            perturb=self.perturb,
            seed=self.seed,
        )


def _parse_levels(text: str) -> tuple[int, ...]:
    try:
        levels = tuple(int(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"malformed levels {text!r}") from None
    if not levels or any(v < 1 for v in levels):
        raise ConfigError("levels must be positive integers")
    return levels


def _coerce(key: str, value):
    if value is None:
        return None
    try:
        if key in ("k", "gamma"):
            v = float(value)
            if not math.isfinite(v):
                raise ValueError
            return v
        if key in ("n", "seed"):
            return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"malformed number for {key}: {value!r}") from None
    if key == "levels":
        return value if isinstance(value, tuple) else _parse_levels(str(value))
    return str(value)


def read_config_file(path: str | Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def validate(values: dict) -> ExperimentConfig:
    unknown = set(values) - set(CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    v = {key: _coerce(key, val) for key, val in values.items() if val is not None}
    if "problem" not in v or "geometry" not in v:
        raise ConfigError("both problem and geometry are required")
    if v["problem"] not in PROBLEMS:
        raise ConfigError(f"unknown problem {v['problem']!r}; choose from {list(PROBLEMS)}")
    if v["geometry"] not in GEOMETRIES:
        raise ConfigError(f"unknown geometry {v['geometry']!r}; choose from {sorted(GEOMETRIES)}")
    if v.get("perturb", "none") not in PERTURBATION_LAWS:
        raise ConfigError(f"unknown perturbation {v['perturb']!r}")
    cfg = ExperimentConfig(**v)
    if not cfg.gamma > 0:
        raise ConfigError("gamma must be positive")
    if cfg.k < 0 or (cfg.problem == "wkb" and cfg.k == 0):
        raise ConfigError("k must be nonnegative (positive for wkb)")
    if cfg.n is not None and cfg.n < 1:
        raise ConfigError("n must be a positive integer")
    domain = make_problem(cfg.problem, max(cfg.k, 1.0), cfg.n).domain
    if get_geometry(cfg.geometry).domain != domain:
        raise ConfigError(f"geometry {cfg.geometry!r} does not live on the domain of problem {cfg.problem!r}")
    if cfg.problem == "hadamard" and cfg.n is None:
        cfg = replace(cfg, n=12)
    return cfg


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="helmuc", description="Stabilized FEM for Helmholtz unique continuation")
    p.add_argument("--config", help="key = value file; command-line flags take precedence")
    p.add_argument("--problem", choices=PROBLEMS)
    p.add_argument("--geometry", choices=sorted(GEOMETRIES))
    p.add_argument("--k", help="wavenumber (default 10)")
    p.add_argument("--n", help="Hadamard frequency (default 12)")
    p.add_argument("--gamma", help="stabilization weight (default 1e-5)")
    p.add_argument("--levels", help="cells per unit length, e.g. 16,32,64,128")
    p.add_argument("--perturb", choices=PERTURBATION_LAWS)
    p.add_argument("--seed")
    p.add_argument("--out", help="CSV path; the summary goes next to it")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def parse_config(argv: list[str] | None = None) -> ExperimentConfig:
    args = build_parser().parse_args(argv)
    values = read_config_file(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        flag = getattr(args, key)
        if flag is not None:
            values[key] = flag
    return validate(values)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def wkb_witness(cfg: ExperimentConfig) -> dict:
    """Solve with zero data on omega and no source signal at the finest level."""
    geom = get_geometry(cfg.geometry)
    case = make_problem("wkb", cfg.k)
    mesh = level_mesh(geom.domain, max(cfg.levels))
    params = StabilizationParams(k=cfg.k, h=mesh.h, gamma=cfg.gamma)
    pts = mesh.barycenters()[geom.omega.contains(mesh.barycenters())]
    q_max = float(np.max(np.abs(case.q(pts[:, 0], pts[:, 1])))) if len(pts) else 0.0
    sol = solve(build_system(mesh, geom.omega, params, None, None))
    hidden = error_norms(mesh, geom.B, np.zeros(mesh.n_vertices), case)
    recovered = error_norms(mesh, geom.B, sol.u, None)
    return {"q_max_on_omega": q_max, "hidden_l2_B": hidden.exact_l2, "uh_l2_B": recovered.l2}


def summarize(cfg: ExperimentConfig, report, extra: dict | None = None) -> str:
    lines = [
        f"problem={cfg.problem} geometry={cfg.geometry} k={cfg.k:g}"
        + (f" n={cfg.n}" if cfg.n is not None else "")
        + f" gamma={cfg.gamma:g} perturb={cfg.perturb} seed={cfg.seed}",
        f"levels={','.join(map(str, cfg.levels))}",
    ]
    if report.levels and report.levels[0].star_norm is not None:
        lines.append(f"star_norm={report.levels[0].star_norm:.6g}")
    lines.append("fitted rates (least squares in log h):")
    for name, rate in report.rates.items():
        lines.append(f"  {name:14s} {rate: .4f}")
    if extra:
        lines.append(f"wkb: q == 0 on omega: {'yes' if extra['q_max_on_omega'] == 0.0 else 'no'}"
                     f" (max |q| = {extra['q_max_on_omega']:.3g})")
        lines.append(f"wkb: hidden solution |u|_L2(B) = {extra['hidden_l2_B']:.6g}")
        lines.append(f"wkb: reconstruction from zero data |u_h|_L2(B) = {extra['uh_l2_B']:.6g}")
    return "\n".join(lines) + "\n"


def run(cfg: ExperimentConfig) -> int:
    study = cfg.study()
    try:
        report = run_convergence_study(study)
    except LevelFailure as exc:
        logger.error("%s", exc)
        return 2
    snorm = star_norm(make_problem(cfg.problem, cfg.k, cfg.n))
    for lv in report.levels:
        lv.star_norm = snorm
    extra = wkb_witness(cfg) if cfg.problem == "wkb" else None
    out = Path(cfg.out)
    summary = summarize(cfg, report, extra)
    _atomic_write(out, report.to_csv())
    _atomic_write(out.with_suffix(out.suffix + ".summary.txt"), summary)
    sys.stdout.write(summary)
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    logging.basicConfig(level=logging.INFO if "-v" in argv or "--verbose" in argv else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(argv)
    except (ConfigError, OSError) as exc:
        print(f"helmuc: error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    raise SystemExit(main())
