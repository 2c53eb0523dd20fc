"""P1 finite element operators: stiffness, mass, gradient-jump penalty, loads."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mesh import Mesh, face_normals

ScalarField = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Quadrature:
    """Rule on the reference triangle (0,0), (1,0), (0,1).

    Weights sum to the reference area 1/2.
    """

    points: npt.NDArray[np.float64]
    weights: npt.NDArray[np.float64]
    degree: int

    def barycentric(self) -> npt.NDArray[np.float64]:
        p = self.points
        return np.column_stack([1.0 - p[:, 0] - p[:, 1], p[:, 0], p[:, 1]])


def _symmetric_rule(orbits, degree):
    pts, wts = [], []
    for w, a in orbits:
        if a is None:
            pts.append((1 / 3, 1 / 3))
            wts.append(w)
            continue
        b = 1.0 - 2.0 * a
        for lam in ((a, a, b), (a, b, a), (b, a, a)):
            pts.append((lam[1], lam[2]))
            wts.append(w)
    return Quadrature(np.array(pts), 0.5 * np.array(wts), degree)


def _monomial_integral(a: int, b: int) -> float:
    """Exact integral of x^a y^b over the reference triangle: a! b! / (a+b+2)!."""
    from math import factorial

    return factorial(a) * factorial(b) / factorial(a + b + 2)


def quadrature_rule(degree: int = 4) -> Quadrature:
    """Symmetric triangle rule of the requested exactness degree (1, 2 or 4)."""
    if degree == 1:
        return _symmetric_rule([(1.0, None)], 1)
    if degree == 2:
        return _symmetric_rule([(1 / 3, 1 / 6)], 2)
    if degree == 4:
        return _DEGREE4
    raise ValueError(f"no quadrature rule of degree {degree}")


# 6-point degree-4 rule; orbit data from solving the moment equations
# for x^a y^b, (a, b) in {(0,0), (2,0), (4,0), (2,2)}, to double precision
_DEGREE4 = _symmetric_rule(
    [(0.22338158967801158, 0.44594849091596483), (0.10995174365532176, 0.09157621350977066)], 4
)


# ---------------------------------------------------------------- geometry


def basis_gradients(mesh: Mesh) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Constant gradients of the three hat functions on each triangle.

    Returns ``(grads, areas)`` with ``grads`` of shape ``(n_t, 3, 2)``.
    """
    p = mesh.vertices[mesh.triangles]
    area = mesh.signed_areas()
    # grad(lambda_i) = perp(opposite edge) / (2 area)
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    grads = np.stack([-e[..., 1], e[..., 0]], axis=-1) / (2.0 * area[:, None, None])
    return grads, area


def _scatter(mesh: Mesh, local: np.ndarray, elems: np.ndarray) -> sp.csr_matrix:
    n = mesh.n_vertices
    t = mesh.triangles[elems]
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    A = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    A.sum_duplicates()
    return A


def local_stiffness(mesh: Mesh) -> npt.NDArray[np.float64]:
    g, area = basis_gradients(mesh)
    return np.einsum("tid,tjd->tij", g, g) * area[:, None, None]


def local_mass(mesh: Mesh) -> npt.NDArray[np.float64]:
    area = mesh.signed_areas()
    ref = (np.ones((3, 3)) + np.eye(3)) / 12.0
    return area[:, None, None] * ref


def assemble_stiffness(mesh: Mesh) -> sp.csr_matrix:
    """Matrix of ``(grad u, grad v)`` over the whole mesh."""
    return _symmetrize(_scatter(mesh, local_stiffness(mesh), np.arange(mesh.n_triangles)))


def assemble_mass(mesh: Mesh, elements: npt.ArrayLike | None = None) -> sp.csr_matrix:
    """Consistent P1 mass matrix, optionally restricted to a subset of triangles."""
    if elements is None:
        elems = np.arange(mesh.n_triangles)
    else:
        elems = np.asarray(elements, dtype=np.int64).ravel()
        if elems.size and (elems.min() < 0 or elems.max() >= mesh.n_triangles):
            raise IndexError("element index out of range")
    local = local_mass(mesh)[elems]
    return _symmetrize(_scatter(mesh, local, elems))


def face_jump_coefficients(mesh: Mesh) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """Per face, the six dofs and coefficients giving the normal-gradient jump.

    ``jump = coeffs @ u[dofs]`` row-wise, and the face weight is
    ``h_F * |F|`` with ``h_F`` the face length.
    """
    g, _ = basis_gradients(mesh)
    f = mesh.interior_faces
    n = face_normals(mesh)
    left, right = f[:, 2], f[:, 3]
    cl = np.einsum("fid,fd->fi", g[left], n)
    cr = -np.einsum("fid,fd->fi", g[right], n)
    dofs = np.hstack([mesh.triangles[left], mesh.triangles[right]])
    coeffs = np.hstack([cl, cr])
    length = np.linalg.norm(mesh.vertices[f[:, 1]] - mesh.vertices[f[:, 0]], axis=1)
    return dofs, coeffs, length * length


def assemble_jump(mesh: Mesh) -> sp.csr_matrix:
    """Continuous interior penalty matrix: sum over interior faces of h_F |F| [n.grad u]^2."""
    dofs, c, weight = face_jump_coefficients(mesh)
    local = weight[:, None, None] * c[:, :, None] * c[:, None, :]
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    n = mesh.n_vertices
    J = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    J.sum_duplicates()
    return _symmetrize(J)


def _symmetrize(A: sp.csr_matrix) -> sp.csr_matrix:
    # entries summed in different orders may differ in the last bit
    A = (0.5 * (A + A.T)).tocsr()
    A.sort_indices()
    return A


def quadrature_points(mesh: Mesh, quad: Quadrature, elements=None):
    """Physical quadrature points and weights, shapes ``(n_e, n_q, 2)`` and ``(n_e, n_q)``."""
    elems = np.arange(mesh.n_triangles) if elements is None else np.asarray(elements)
    p = mesh.vertices[mesh.triangles[elems]]
    lam = quad.barycentric()
    x = np.einsum("qi,eid->eqd", lam, p)
    w = 2.0 * np.abs(mesh.signed_areas()[elems])[:, None] * quad.weights[None, :]
    return x, w


def assemble_load(
    mesh: Mesh,
    f: ScalarField,
    quadrature: Quadrature | None = None,
    elements: npt.ArrayLike | None = None,
) -> npt.NDArray[np.float64]:
    """Vector of ``int f phi_i`` using the given rule, optionally over a triangle subset."""
    quad = quadrature or quadrature_rule(4)
    elems = np.arange(mesh.n_triangles) if elements is None else np.asarray(elements, dtype=np.int64)
    x, w = quadrature_points(mesh, quad, elems)
    fx = np.asarray(f(x[..., 0], x[..., 1]), dtype=float)
    fx = np.broadcast_to(fx, w.shape)
    local = np.einsum("eq,qi->ei", fx * w, quad.barycentric())
    b = np.zeros(mesh.n_vertices)
    np.add.at(b, mesh.triangles[elems], local)
    return b


def l2_project(mesh: Mesh, w: ScalarField, quadrature: Quadrature | None = None) -> npt.NDArray[np.float64]:
    """Orthogonal L2 projection of ``w`` onto the P1 space."""
    M = assemble_mass(mesh).tocsc()
    b = assemble_load(mesh, w, quadrature)
    p = spla.spsolve(M, b)
    res = np.linalg.norm(M @ p - b)
    if not np.all(np.isfinite(p)) or res > 1e-10 * max(np.linalg.norm(b), 1e-300):
        if np.linalg.norm(b) == 0.0:
            return np.zeros(mesh.n_vertices)
        raise RuntimeError(f"mass matrix solve failed (residual {res:.3e})")
    return p


def interpolate(mesh: Mesh, w: ScalarField) -> npt.NDArray[np.float64]:
    """Nodal interpolant of ``w``."""
    v = mesh.vertices
    return np.broadcast_to(np.asarray(w(v[:, 0], v[:, 1]), dtype=float), (mesh.n_vertices,)).copy()


def dump_matrix(A: sp.spmatrix, path: str | Path) -> None:
    """Write ``row col value`` lines with 17 significant digits."""
    C = sp.coo_matrix(A)
    with open(path, "w") as fh:
        for r, c, v in zip(C.row, C.col, C.data):
            fh.write(f"{r} {c} {v:.17g}\n")
