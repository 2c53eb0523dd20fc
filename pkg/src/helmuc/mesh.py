"""Structured triangulations of rectangles and geometric regions."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import numpy.typing as npt

Rect = tuple[float, float, float, float]


@dataclass(frozen=True, eq=False)
class Mesh:
    """P1 triangulation of an axis-aligned rectangle.

    Attributes
    ----------
    vertices : (n_v, 2) float array
    triangles : (n_t, 3) int array, counterclockwise
    interior_faces : (n_f, 4) int array of rows ``(a, b, left, right)``
    boundary_vertex : (n_v,) bool array
    domain : ``(x0, x1, y0, y1)``
    h : mesh size reported as ``1/sqrt(n_v)``
    cell_size : geometric diameter of a grid cell
    shape : grid cells ``(nx, ny)``
    """

    vertices: npt.NDArray[np.float64]
    triangles: npt.NDArray[np.int64]
    interior_faces: npt.NDArray[np.int64]
    boundary_vertex: npt.NDArray[np.bool_]
    domain: Rect
    h: float
    cell_size: float
    n_boundary_edges: int = 0
    shape: tuple[int, int] = (0, 0)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_faces(self) -> int:
        return len(self.interior_faces)

    @property
    def n_edges(self) -> int:
        return self.n_faces + self.n_boundary_edges

    @property
    def interior_dofs(self) -> npt.NDArray[np.int64]:
        return np.flatnonzero(~self.boundary_vertex)

    def signed_areas(self) -> npt.NDArray[np.float64]:
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def barycenters(self) -> npt.NDArray[np.float64]:
        return self.vertices[self.triangles].mean(axis=1)

    def dump(self, path: str | Path) -> None:
        """Write the plain-text mesh format (``nv nt nf`` header)."""
        lines = [f"{self.n_vertices} {self.n_triangles} {self.n_faces}"]
        for (x, y), b in zip(self.vertices, self.boundary_vertex):
            lines.append(f"{x:.17g} {y:.17g} {int(b)}")
        lines.extend(" ".join(map(str, t)) for t in self.triangles)
        lines.extend(" ".join(map(str, f)) for f in self.interior_faces)
        Path(path).write_text("\n".join(lines) + "\n")


def _validate_rect(domain: Rect) -> Rect:
    x0, x1, y0, y1 = map(float, domain)
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"degenerate rectangle {domain!r}")
    return x0, x1, y0, y1


def build_uniform_mesh(domain: Rect, nx: int, ny: int) -> Mesh:
    """Triangulate ``domain`` with an ``nx`` by ``ny`` grid of split cells.

    Cell ``(i, j)`` is cut along its SW-NE diagonal when ``i + j`` is even
    and along the NW-SE diagonal otherwise.
    """
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise ValueError(f"subdivision counts must be positive integers, got {nx}, {ny}")
    nx, ny = int(nx), int(ny)
    x0, x1, y0, y1 = _validate_rect(domain)

    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    i, j = i.ravel(), j.ravel()
    sw = j * (nx + 1) + i
    se = sw + 1
    nw = sw + nx + 1
    ne = nw + 1
    even = (i + j) % 2 == 0
    t1 = np.where(even[:, None], np.column_stack([sw, se, ne]), np.column_stack([sw, se, nw]))
    t2 = np.where(even[:, None], np.column_stack([sw, ne, nw]), np.column_stack([se, ne, nw]))
    triangles = np.empty((2 * len(sw), 3), dtype=np.int64)
    triangles[0::2] = t1
    triangles[1::2] = t2

    faces, n_bnd = _interior_faces(triangles)

    tol = 1e-12 * max(x1 - x0, y1 - y0)
    boundary = (
        (np.abs(vertices[:, 0] - x0) < tol)
        | (np.abs(vertices[:, 0] - x1) < tol)
        | (np.abs(vertices[:, 1] - y0) < tol)
        | (np.abs(vertices[:, 1] - y1) < tol)
    )
    cell = float(np.hypot((x1 - x0) / nx, (y1 - y0) / ny))
    return Mesh(
        vertices=vertices,
        triangles=triangles,
        interior_faces=faces,
        boundary_vertex=boundary,
        domain=(x0, x1, y0, y1),
        h=1.0 / np.sqrt(len(vertices)),
        cell_size=cell,
        n_boundary_edges=n_bnd,
        shape=(nx, ny),
    )


def _interior_faces(triangles: npt.NDArray[np.int64]) -> tuple[npt.NDArray[np.int64], int]:
    # local edge e is opposite local vertex e
    loc = np.array([[1, 2], [2, 0], [0, 1]])
    edges = triangles[:, loc].reshape(-1, 2)
    owner = np.repeat(np.arange(len(triangles)), 3)
    key = np.sort(edges, axis=1)
    order = np.lexsort((key[:, 1], key[:, 0]))
    key, owner, edges = key[order], owner[order], edges[order]
    same = np.all(key[1:] == key[:-1], axis=1)
    first = np.flatnonzero(same)
    n_unique = len(key) - len(first)
    n_bnd = n_unique - len(first)
    # edges[first] is oriented counterclockwise in its owner, so the owner
    # lies on the left of (a -> b)
    faces = np.column_stack([edges[first], owner[first], owner[first + 1]])
    return faces.astype(np.int64), int(n_bnd)


def interior_face_normal(mesh: Mesh, face: int) -> npt.NDArray[np.float64]:
    """Unit normal of an interior face, pointing from its left to its right triangle."""
    if not 0 <= face < mesh.n_faces:
        raise IndexError(f"{face} is not an interior face index")
    return face_normals(mesh)[face]


def face_normals(mesh: Mesh) -> npt.NDArray[np.float64]:
    f = mesh.interior_faces
    t = mesh.vertices[f[:, 1]] - mesh.vertices[f[:, 0]]
    n = np.column_stack([t[:, 1], -t[:, 0]])
    return n / np.linalg.norm(n, axis=1)[:, None]


# ---------------------------------------------------------------- regions


@dataclass(frozen=True)
class Region:
    """Open planar region used for the data set and the continuation set.

    ``kind`` is one of ``box``, ``rect_minus_box``, ``disk`` and
    ``box_minus_disk``; ``params`` holds the corresponding coordinates.
    """

    kind: str
    params: tuple[float, ...] = field(default=())

    def contains(self, points: npt.ArrayLike) -> npt.NDArray[np.bool_]:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        x, y = p[:, 0], p[:, 1]
        if self.kind == "box":
            return _in_box(x, y, self.params)
        if self.kind == "rect_minus_box":
            outer, cut = self.params[:4], self.params[4:]
            return _in_box(x, y, outer) & ~_in_closed_box(x, y, cut)
        if self.kind == "disk":
            cx, cy, r = self.params
            return (x - cx) ** 2 + (y - cy) ** 2 < r**2
        if self.kind == "box_minus_disk":
            outer = self.params[:4]
            cx, cy, r = self.params[4:]
            return _in_box(x, y, outer) & ((x - cx) ** 2 + (y - cy) ** 2 > r**2)
        raise ValueError(f"unknown region kind {self.kind!r}")


def box(x0: float, x1: float, y0: float, y1: float) -> Region:
    return Region("box", (x0, x1, y0, y1))


def rect_minus_box(domain: Rect, cut: Rect) -> Region:
    return Region("rect_minus_box", tuple(domain) + tuple(cut))


def disk(center: tuple[float, float], radius: float) -> Region:
    return Region("disk", (center[0], center[1], radius))


def box_minus_disk(domain: Rect, center: tuple[float, float], radius: float) -> Region:
    return Region("box_minus_disk", tuple(domain) + (center[0], center[1], radius))


def _in_box(x, y, b):
    x0, x1, y0, y1 = b
    return (x > x0) & (x < x1) & (y > y0) & (y < y1)


def _in_closed_box(x, y, b):
    x0, x1, y0, y1 = b
    return (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)


def locate(mesh: Mesh, points: npt.ArrayLike) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.float64]]:
    """Containing triangle and barycentric coordinates of each point.

    Points outside the domain are clamped to the nearest cell.
    """
    p = np.atleast_2d(np.asarray(points, dtype=float))
    x0, x1, y0, y1 = mesh.domain
    nx, ny = mesh.shape
    sx = (p[:, 0] - x0) / (x1 - x0) * nx
    sy = (p[:, 1] - y0) / (y1 - y0) * ny
    i = np.clip(np.floor(sx).astype(np.int64), 0, nx - 1)
    j = np.clip(np.floor(sy).astype(np.int64), 0, ny - 1)
    cell = j * nx + i
    cand = np.stack([2 * cell, 2 * cell + 1], axis=1)
    lam = np.stack([_barycentric(mesh, cand[:, c], p) for c in range(2)], axis=1)
    pick = np.argmax(lam.min(axis=2), axis=1)
    rows = np.arange(len(p))
    return cand[rows, pick], lam[rows, pick]


def _barycentric(mesh: Mesh, tri: np.ndarray, p: np.ndarray) -> np.ndarray:
    v = mesh.vertices[mesh.triangles[tri]]
    T = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]], axis=2)
    l12 = np.linalg.solve(T, (p - v[:, 0])[..., None])[..., 0]
    return np.column_stack([1.0 - l12.sum(axis=1), l12])


def classify_elements(mesh: Mesh, region: Region) -> npt.NDArray[np.int64]:
    """Indices of triangles whose barycenter lies in ``region``."""
    return np.flatnonzero(region.contains(mesh.barycenters()))
