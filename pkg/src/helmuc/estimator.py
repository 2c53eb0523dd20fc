"""scikit-learn style front end for the stabilized unique continuation solver."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import assembly
from .analysis import error_norms, level_mesh
from .geometries import get_geometry
from .mesh import Region, locate
from .problems import Perturbation, ProblemCase
from .solver import Operators, StabilizationParams, build_system, solve


class UniqueContinuationRegressor(RegressorMixin, BaseEstimator):
    """Recover a Helmholtz solution on the whole domain from data on ``omega``.

    Parameters
    ----------
    k : float
        Wavenumber.
    omega : Region or str
        Data region, or the name of a registered geometry (its data region
        and domain are used).
    domain : tuple, optional
        ``(x0, x1, y0, y1)``; taken from the geometry when ``omega`` is a name,
        otherwise defaults to the unit square.
    n_cells : int
        Grid cells per unit length.
    gamma : float
        Primal stabilization weight.
    perturb, seed :
        Optional nodal data pollution (``"none"``, ``"h"`` or ``"h2"``).

    Attributes
    ----------
    mesh_, operators_, system_ : the discretization used by ``fit``
    u_ : nodal values of the reconstruction
    z_ : nodal values of the dual variable (zero on the boundary)

    Examples
    --------
    >>> from helmuc.problems import gaussian_bump
    >>> case = gaussian_bump(10.0)
    >>> est = UniqueContinuationRegressor(k=10.0, omega="convex", n_cells=16)
    >>> est = est.fit(case.q, case.f)
    >>> est.predict([[0.5, 0.5]]).shape
    (1,)
    """

    def __init__(
        self,
        k: float = 1.0,
        omega: Region | str = "convex",
        domain: tuple[float, float, float, float] | None = None,
        n_cells: int = 32,
        gamma: float = 1e-5,
        perturb: str = "none",
        seed: int = 0,
    ):
        self.k = k
        self.omega = omega
        self.domain = domain
        self.n_cells = n_cells
        self.gamma = gamma
        self.perturb = perturb
        self.seed = seed

    def _resolve_region(self):
        if isinstance(self.omega, str):
            geom = get_geometry(self.omega)
            return geom.omega, self.domain or geom.domain
        if not isinstance(self.omega, Region):
            raise TypeError("omega must be a Region or a geometry name")
        return self.omega, self.domain or (0.0, 1.0, 0.0, 1.0)

    def fit(self, q, f=None):
        """Solve for ``u_h`` given data ``q`` on omega and source ``f``.

        ``q`` and ``f`` are callables of ``(x, y)``; ``f=None`` means a
        homogeneous equation. Returns ``self``.
        """
        if not callable(q) or (f is not None and not callable(f)):
            raise TypeError("q and f must be callables of (x, y)")
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise ValueError("n_cells must be a positive integer")
        omega, domain = self._resolve_region()
        mesh = level_mesh(domain, int(self.n_cells))
        params = StabilizationParams(k=float(self.k), h=mesh.h, gamma=float(self.gamma))
        ops = Operators.assemble(mesh, omega)
        system = build_system(
            mesh, omega, params, q, f, ops=ops, perturbation=Perturbation(self.perturb, self.seed)
        )
        sol = solve(system)
        self.mesh_, self.operators_, self.system_ = mesh, ops, system
        self.u_, self.z_ = sol.u, sol.z
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        """Evaluate the P1 reconstruction at points ``X`` of shape (m, 2)."""
        check_is_fitted(self, "u_")
        X = check_array(X, ensure_min_features=2)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 coordinates per point, got {X.shape[1]}")
        tri, lam = locate(self.mesh_, X)
        return np.einsum("mi,mi->m", lam, self.u_[self.mesh_.triangles[tri]])

    def jump_norm(self) -> float:
        """``J(u_h, u_h)`` of the fitted reconstruction."""
        check_is_fitted(self, "u_")
        return float(self.u_ @ (self.operators_.jump @ self.u_))

    def dual_norm(self) -> float:
        check_is_fitted(self, "z_")
        return float(np.sqrt(self.z_ @ (self.operators_.stiffness @ self.z_)))

    def error(self, exact: ProblemCase, region: Region | None = None, quadrature_degree: int = 4):
        """Error norms against ``exact`` over ``region`` (default: the whole domain)."""
        check_is_fitted(self, "u_")
        if region is None:
            x0, x1, y0, y1 = self.mesh_.domain
            region = Region("box", (x0, x1, y0, y1))
        return error_norms(self.mesh_, region, self.u_, exact, assembly.quadrature_rule(quadrature_degree))
