"""Named data/continuation region pairs for the benchmark studies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Rect, Region, box, disk, rect_minus_box
from .problems import HADAMARD_DOMAIN, UNIT_SQUARE


@dataclass(frozen=True)
class Geometry:
    name: str
    domain: Rect
    omega: Region
    B: Region


PI = np.pi


def _make() -> dict[str, Geometry]:
    sq, hd = UNIT_SQUARE, HADAMARD_DOMAIN
    wkb_eps = 0.2
    return {
        g.name: g
        for g in [
            Geometry(
                "convex",
                sq,
                rect_minus_box(sq, (0.1, 0.9, 0.25, 1.0)),
                rect_minus_box(sq, (0.1, 0.9, 0.95, 1.0)),
            ),
            Geometry("nonconvex_box", sq, box(0.25, 0.75, 0.0, 0.5), box(0.125, 0.875, 0.0, 0.95)),
            Geometry("nonconvex_disk", sq, disk((0.5, 0.5), 0.25), disk((0.5, 0.5), 0.45)),
            Geometry(
                "hadamard_convex",
                hd,
                rect_minus_box(hd, (PI / 4, 3 * PI / 4, 0.0, 0.25)),
                rect_minus_box(hd, (PI / 4, 3 * PI / 4, 0.0, 0.95)),
            ),
            Geometry(
                "hadamard_nonconvex",
                hd,
                box(PI / 4, 3 * PI / 4, 0.0, 0.5),
                box(PI / 8, 7 * PI / 8, 0.0, 0.95),
            ),
            Geometry("wkb", sq, box(0.0, 1.0, 0.0, wkb_eps), box(0.0, 1.0, 0.0, 1.0 - wkb_eps)),
        ]
    }


GEOMETRIES = _make()


def get_geometry(name: str) -> Geometry:
    try:
        return GEOMETRIES[name]
    except KeyError:
        raise ValueError(f"unknown geometry {name!r}; choose from {sorted(GEOMETRIES)}") from None
