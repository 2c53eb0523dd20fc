"""Stabilized saddle-point system for Helmholtz unique continuation.

The primal unknown ``u`` lives on all vertices, the dual ``z`` on interior
vertices only (homogeneous Dirichlet by elimination). The system reads::

    [ M_w + s      K_kI  ] [u]   [ (q, v)_w ]
    [ K_kI^T      -K_II  ] [z] = [ <f, w>   ]

with ``s = gamma J + gamma h^2 k^4 M`` and ``K_k = K - k^2 M``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import assembly
from .mesh import Mesh, Region, classify_elements
from .problems import Perturbation, perturb

logger = logging.getLogger(__name__)


class ConfigurationError(ValueError):
    """The requested system cannot be built (e.g. empty data region)."""


class SolverError(RuntimeError):
    """The factorization failed or produced an inaccurate solution."""


@dataclass(frozen=True)
class StabilizationParams:
    k: float
    h: float
    gamma: float = 1e-5

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.k >= 0:
            raise ValueError("k must be nonnegative")
        if not self.h > 0:
            raise ValueError("h must be positive")


@dataclass
class Operators:
    """Assembled P1 operators reused by the system and the diagnostics."""

    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    mass_omega: sp.csr_matrix
    jump: sp.csr_matrix
    omega_elements: npt.NDArray[np.int64]

    @classmethod
    def assemble(cls, mesh: Mesh, omega: Region) -> "Operators":
        elems = classify_elements(mesh, omega)
        if elems.size == 0:
            raise ConfigurationError("data region contains no mesh elements")
        return cls(
            stiffness=assembly.assemble_stiffness(mesh),
            mass=assembly.assemble_mass(mesh),
            mass_omega=assembly.assemble_mass(mesh, elems),
            jump=assembly.assemble_jump(mesh),
            omega_elements=elems,
        )


@dataclass
class LinearSystem:
    matrix: sp.csr_matrix
    rhs: npt.NDArray[np.float64]
    n_primal: int
    interior: npt.NDArray[np.int64]

    @property
    def n_dual(self) -> int:
        return len(self.interior)


@dataclass
class Solution:
    u: npt.NDArray[np.float64]
    z: npt.NDArray[np.float64]
    """Dual variable extended by zero to the boundary vertices."""
    residual: float


def primal_matrix(ops: Operators, params: StabilizationParams) -> sp.csr_matrix:
    """``M_w + gamma J + gamma h^2 k^4 M``."""
    g = params.gamma
    return (ops.mass_omega + g * ops.jump + (g * params.h**2 * params.k**4) * ops.mass).tocsr()


def build_system(
    mesh: Mesh,
    omega: Region,
    params: StabilizationParams,
    q: Callable | None,
    f: Callable | None,
    *,
    ops: Operators | None = None,
    perturbation: Perturbation | None = None,
    quadrature: assembly.Quadrature | None = None,
) -> LinearSystem:
    """Assemble the symmetric indefinite system for ``(u_h, z_h)``.

    ``q`` and ``f`` are callables ``(x, y) -> values``; ``None`` means zero.
    With a perturbation, uniform noise is added to the nodal values of
    ``q`` and ``f`` and enters the load through the P1 mass pairing.
    """
    ops = ops or Operators.assemble(mesh, omega)
    interior = mesh.interior_dofs
    K, M = ops.stiffness, ops.mass
    Kk = (K - params.k**2 * M).tocsr()
    B = Kk[:, interior]
    C = K[interior][:, interior]
    A = sp.bmat([[primal_matrix(ops, params), B], [B.T, -C]], format="csr")
    A.sort_indices()

    bq = np.zeros(mesh.n_vertices)
    bf = np.zeros(mesh.n_vertices)
    if q is not None:
        bq = assembly.assemble_load(mesh, q, quadrature, ops.omega_elements)
    if f is not None:
        bf = assembly.assemble_load(mesh, f, quadrature)
    if perturbation is not None and perturbation.law != "none":
        zeros = np.zeros(mesh.n_vertices)
        bq = bq + ops.mass_omega @ perturb(zeros, perturbation, mesh.h, stream=0)
        bf = bf + M @ perturb(zeros, perturbation, mesh.h, stream=1)
    rhs = np.concatenate([bq, bf[interior]])
    return LinearSystem(A, rhs, mesh.n_vertices, interior)


def solve(system: LinearSystem, rtol: float = 1e-9) -> Solution:
    """Direct sparse LU with partial pivoting; checks the residual bound."""
    A, b = system.matrix, system.rhs
    if not np.any(b):
        x = np.zeros_like(b)
    else:
        try:
            x = spla.splu(A.tocsc(), permc_spec="COLAMD").solve(b)
        except RuntimeError as exc:
            raise SolverError(f"factorization failed: {exc}") from exc
    res = float(np.linalg.norm(A @ x - b))
    norm_a = spla.norm(A, np.inf)
    bound = rtol * (np.linalg.norm(b) + norm_a * np.linalg.norm(x))
    if not np.all(np.isfinite(x)) or res > bound:
        raise SolverError(f"residual {res:.3e} exceeds bound {bound:.3e}; system is numerically singular")
    n = system.n_primal
    z = np.zeros(n)
    z[system.interior] = x[n:]
    logger.debug("solved system of size %d, residual %.3e", len(b), res)
    return Solution(u=x[:n], z=z, residual=res)


def apply_G(mesh: Mesh, k: float, u: npt.ArrayLike, w: npt.ArrayLike, ops: Operators | None = None) -> float:
    """Helmholtz form ``a(u, w) - k^2 (u, w)`` for nodal vectors."""
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if u.shape != (mesh.n_vertices,) or w.shape != (mesh.n_vertices,):
        raise ValueError(f"expected vectors of length {mesh.n_vertices}")
    K = ops.stiffness if ops else assembly.assemble_stiffness(mesh)
    M = ops.mass if ops else assembly.assemble_mass(mesh)
    return float(u @ (K @ w) - k**2 * (u @ (M @ w)))


def bilinear_form(system: LinearSystem, x: np.ndarray, y: np.ndarray) -> float:
    """``A[x, y]`` for stacked ``(u, z_interior)`` vectors."""
    return float(x @ (system.matrix @ y))
