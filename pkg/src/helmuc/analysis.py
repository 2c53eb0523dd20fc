"""Error norms, stabilizer diagnostics and convergence-rate fitting."""

from __future__ import annotations

import io
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
import numpy.typing as npt

from . import assembly
from .geometries import get_geometry
from .mesh import Mesh, Region, build_uniform_mesh, classify_elements
from .problems import Perturbation, ProblemCase, make_problem
from .solver import Operators, StabilizationParams, build_system, solve

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("h", "rel_l2_B", "rel_h1_B", "jump", "jump_over_h", "z_norm", "l2_omega_err")
RATE_COLUMNS = CSV_COLUMNS[1:]


@dataclass(frozen=True)
class Norms:
    l2: float
    h1: float
    rel_l2: float
    rel_h1: float
    exact_l2: float
    exact_h1: float


def error_norms(
    mesh: Mesh,
    region: Region,
    u_h: npt.ArrayLike,
    exact: ProblemCase | None,
    quadrature: assembly.Quadrature | None = None,
    elements: npt.ArrayLike | None = None,
) -> Norms:
    """L2 and full H1 errors of ``u_h`` against ``exact`` over the triangles in ``region``.

    ``exact=None`` compares against zero. Relative errors are NaN when the
    exact solution has zero norm on the region.
    """
    quad = quadrature or assembly.quadrature_rule(4)
    elems = classify_elements(mesh, region) if elements is None else np.asarray(elements)
    if elems.size == 0:
        raise ValueError("region contains no mesh elements")
    u_h = np.asarray(u_h, dtype=float)
    x, w = assembly.quadrature_points(mesh, quad, elems)
    tri = mesh.triangles[elems]
    uh_q = np.einsum("qi,ei->eq", quad.barycentric(), u_h[tri])
    g, _ = assembly.basis_gradients(mesh)
    grad_uh = np.einsum("eid,ei->ed", g[elems], u_h[tri])[:, None, :]

    if exact is None:
        ue = np.zeros_like(uh_q)
        ge = np.zeros(uh_q.shape + (2,))
    else:
        ue = exact.u(x[..., 0], x[..., 1])
        gx, gy = exact.grad(x[..., 0], x[..., 1])
        ge = np.stack(np.broadcast_arrays(gx, gy), axis=-1)

    l2_sq = float(np.sum(w * (ue - uh_q) ** 2))
    semi_sq = float(np.sum(w * np.sum((ge - grad_uh) ** 2, axis=-1)))
    ex_l2_sq = float(np.sum(w * ue**2))
    ex_h1_sq = ex_l2_sq + float(np.sum(w * np.sum(ge**2, axis=-1)))
    l2, h1 = np.sqrt(l2_sq), np.sqrt(l2_sq + semi_sq)
    ex_l2, ex_h1 = np.sqrt(ex_l2_sq), np.sqrt(ex_h1_sq)
    if ex_l2 == 0.0:
        if exact is not None:
            logger.info("exact solution vanishes on the region; relative errors undefined")
        rel_l2 = rel_h1 = float("nan")
    else:
        rel_l2, rel_h1 = l2 / ex_l2, h1 / ex_h1
    return Norms(l2, h1, rel_l2, rel_h1, ex_l2, ex_h1)


def star_norm(exact: ProblemCase, n: int = 512) -> float:
    """``|u|_{H^2} + k^2 |u|_{L^2}`` on the problem domain, composite midpoint rule on an n×n grid."""
    x0, x1, y0, y1 = exact.domain
    dx, dy = (x1 - x0) / n, (y1 - y0) / n
    xs = x0 + dx * (np.arange(n) + 0.5)
    ys = y0 + dy * (np.arange(n) + 0.5)
    X, Y = np.meshgrid(xs, ys)
    u = exact.u(X, Y)
    ux, uy = exact.grad(X, Y)
    uxx, uxy, uyy = exact.hessian(X, Y)
    dA = dx * dy
    l2_sq = np.sum(u**2) * dA
    h2_sq = l2_sq + np.sum(ux**2 + uy**2) * dA + np.sum(uxx**2 + 2 * uxy**2 + uyy**2) * dA
    return float(np.sqrt(h2_sq) + exact.k**2 * np.sqrt(l2_sq))


def fit_rate(h: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(h)."""
    h = np.asarray(h, dtype=float)
    e = np.asarray(errors, dtype=float)
    if h.shape != e.shape or h.size < 2:
        raise ValueError("need at least two (h, error) pairs")
    if np.any(h <= 0) or np.any(e <= 0):
        raise ValueError("h and errors must be positive")
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])


@dataclass
class ErrorReport:
    h: float
    rel_l2_B: float
    rel_h1_B: float
    jump: float
    jump_over_h: float
    z_norm: float
    l2_omega_err: float
    star_norm: float | None = None


@dataclass
class ConvergenceReport:
    levels: list[ErrorReport]
    rates: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        hs = [lv.h for lv in self.levels]
        if any(b >= a for a, b in zip(hs, hs[1:])):
            raise ValueError("levels must have strictly decreasing h")
        if not self.rates and len(self.levels) >= 2:
            self.rates = self.fit_rates()

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(lv, name) for lv in self.levels])

    def fit_rates(self) -> dict[str, float]:
        h = self.column("h")
        rates = {}
        for name in RATE_COLUMNS:
            e = self.column(name)
            rates[name] = fit_rate(h, e) if np.all(e > 0) else float("nan")
        return rates

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(", ".join(CSV_COLUMNS) + "\n")
        for lv in self.levels:
            buf.write(", ".join(f"{getattr(lv, c):.17g}" for c in CSV_COLUMNS) + "\n")
        buf.write("# rates: " + ", ".join(f"{c}={self.rates.get(c, float('nan')):.17g}" for c in RATE_COLUMNS) + "\n")
        return buf.getvalue()


@dataclass(frozen=True)
class StudyConfig:
    problem: str = "gaussian"
    geometry: str = "convex"
    k: float = 10.0
    n: int | None = None
    gamma: float = 1e-5
    levels: tuple[int, ...] = (16, 32, 64, 128)
    perturb: str = "none"
    seed: int = 0


@dataclass
class LevelResult:
    mesh: Mesh
    u: np.ndarray
    z: np.ndarray
    report: ErrorReport


def level_mesh(domain, n: int) -> Mesh:
    """Mesh with ``n`` cells per unit length in y and near-square cells in x."""
    x0, x1, y0, y1 = domain
    ny = max(1, int(round(n * (y1 - y0))))
    nx = max(1, int(round(n * (x1 - x0))))
    return build_uniform_mesh(domain, nx, ny)


def run_level(config: StudyConfig, n: int) -> LevelResult:
    geom = get_geometry(config.geometry)
    problem = make_problem(config.problem, config.k, config.n)
    mesh = level_mesh(geom.domain, n)
    params = StabilizationParams(k=config.k, h=mesh.h, gamma=config.gamma)
    ops = Operators.assemble(mesh, geom.omega)
    pert = Perturbation(config.perturb, config.seed)
    system = build_system(mesh, geom.omega, params, problem.q, problem.f, ops=ops, perturbation=pert)
    sol = solve(system)
    b_norms = error_norms(mesh, geom.B, sol.u, problem)
    w_norms = error_norms(mesh, geom.omega, sol.u, problem, elements=ops.omega_elements)
    jump = float(sol.u @ (ops.jump @ sol.u))
    report = ErrorReport(
        h=mesh.h,
        rel_l2_B=b_norms.rel_l2,
        rel_h1_B=b_norms.rel_h1,
        jump=jump,
        jump_over_h=jump / mesh.h,
        z_norm=float(np.sqrt(max(sol.z @ (ops.stiffness @ sol.z), 0.0))),
        l2_omega_err=w_norms.l2,
    )
    return LevelResult(mesh, sol.u, sol.z, report)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("HELMUC_THREADS", "1")))
    except ValueError:
        return 1


class LevelFailure(RuntimeError):
    def __init__(self, n: int, exc: BaseException):
        super().__init__(f"level n={n} failed: {type(exc).__name__}: {exc}")
        self.n = n


def run_convergence_study(config: StudyConfig) -> ConvergenceReport:
    """Solve every refinement level of ``config`` and fit rates over them."""

    def one(n):
        try:
            return run_level(config, n).report
        except Exception as exc:
            raise LevelFailure(n, exc) from exc

    workers = min(_workers(), len(config.levels))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            reports = list(pool.map(one, config.levels))
    else:
        reports = [one(n) for n in config.levels]
    return ConvergenceReport(reports)


def report_dict(report: ConvergenceReport) -> dict:
    return {"levels": [asdict(lv) for lv in report.levels], "rates": dict(report.rates)}
