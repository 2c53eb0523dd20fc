"""Manufactured Helmholtz solutions and nodal data perturbations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import numpy.typing as npt

from .mesh import Rect

UNIT_SQUARE: Rect = (0.0, 1.0, 0.0, 1.0)
HADAMARD_DOMAIN: Rect = (0.0, np.pi, 0.0, 1.0)

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ProblemCase:
    """Exact solution of ``Δu + k²u = -f`` with analytic derivatives.

    ``grad`` returns ``(u_x, u_y)`` and ``hessian`` returns
    ``(u_xx, u_xy, u_yy)``.
    """

    name: str
    domain: Rect
    k: float
    u: Field
    grad: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
    hessian: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]
    n: int | None = None
    source: Field | None = None  # closed form for f when one is known

    def laplacian(self, x, y):
        uxx, _, uyy = self.hessian(x, y)
        return uxx + uyy

    def f(self, x, y):
        if self.source is not None:
            return self.source(x, y)
        return -self.laplacian(x, y) - self.k**2 * self.u(x, y)

    def q(self, x, y):
        return self.u(x, y)


def gaussian_bump(k: float, sigma_x: float = 0.01, sigma_y: float = 0.1) -> ProblemCase:
    """Gaussian centred at (0.5, 1) on the top side of the unit square."""
    if k < 0:
        raise ValueError("wavenumber must be nonnegative")

    def u(x, y):
        return np.exp(-((x - 0.5) ** 2) / (2 * sigma_x) - (y - 1.0) ** 2 / (2 * sigma_y))

    def grad(x, y):
        v = u(x, y)
        return -(x - 0.5) / sigma_x * v, -(y - 1.0) / sigma_y * v

    def hessian(x, y):
        v = u(x, y)
        ax = (x - 0.5) / sigma_x
        ay = (y - 1.0) / sigma_y
        return (ax**2 - 1 / sigma_x) * v, ax * ay * v, (ay**2 - 1 / sigma_y) * v

    return ProblemCase("gaussian", UNIT_SQUARE, float(k), u, grad, hessian)


def _zero(x, y):
    return np.zeros(np.broadcast(np.asarray(x, float), np.asarray(y, float)).shape)


def hadamard(k: float, n: int) -> ProblemCase:
    """Solution of the Cauchy problem u(x,0)=0, u_y(x,0)=sin(nx) on (0,π)×(0,1)."""
    if k < 0:
        raise ValueError("wavenumber must be nonnegative")
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    n = int(n)
    d = n * n - k * k

    if d == 0 or abs(d) < 1e-12:

        def u(x, y):
            return np.sin(n * x) * y

        def grad(x, y):
            return n * np.cos(n * x) * y, np.sin(n * x) + 0 * y

        def hessian(x, y):
            return -(n**2) * np.sin(n * x) * y, n * np.cos(n * x) + 0 * y, 0 * x * y

    elif d > 0:
        s = np.sqrt(d)

        def u(x, y):
            return np.sin(n * x) * np.sinh(s * y) / s

        def grad(x, y):
            return n * np.cos(n * x) * np.sinh(s * y) / s, np.sin(n * x) * np.cosh(s * y)

        def hessian(x, y):
            v = u(x, y)
            return -(n**2) * v, n * np.cos(n * x) * np.cosh(s * y), s * s * v

    else:
        s = np.sqrt(-d)

        def u(x, y):
            return np.sin(n * x) * np.sin(s * y) / s

        def grad(x, y):
            return n * np.cos(n * x) * np.sin(s * y) / s, np.sin(n * x) * np.cos(s * y)

        def hessian(x, y):
            v = u(x, y)
            return -(n**2) * v, n * np.cos(n * x) * np.cos(s * y), -s * s * v

    return ProblemCase("hadamard", HADAMARD_DOMAIN, float(k), u, grad, hessian, n=n, source=_zero)


def bump_profile(y, eps: float, order: int = 0):
    """Smooth bump supported in (eps, 1-eps) with peak value 1 at y = 1/2.

    ``order`` selects the derivative (0, 1 or 2) with respect to ``y``.
    """
    y = np.asarray(y, dtype=float)
    c = 2.0 / (1.0 - 2.0 * eps)
    t = (2.0 * y - 1.0) / (1.0 - 2.0 * eps)
    inside = np.abs(t) < 1.0
    ti = np.where(inside, t, 0.0)
    s = 1.0 - ti * ti
    g = np.where(inside, np.exp(1.0 - 1.0 / s), 0.0)
    if order == 0:
        return g
    if order == 1:
        return np.where(inside, c * g * (-2.0 * ti / s**2), 0.0)
    if order == 2:
        gpp = g * (4.0 * ti**2 / s**4 - 2.0 / s**2 - 8.0 * ti**2 / s**3)
        return np.where(inside, c * c * gpp, 0.0)
    raise ValueError("order must be 0, 1 or 2")


def wkb_leading(k: float, epsilon: float = 0.2) -> ProblemCase:
    """Leading WKB term ``cos(kx) a0(y)`` with a0 vanishing near y=0 and y=1."""
    if k <= 0:
        raise ValueError("wavenumber must be positive")
    if not 0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 0.5)")

    def u(x, y):
        return np.cos(k * x) * bump_profile(y, epsilon)

    def grad(x, y):
        return -k * np.sin(k * x) * bump_profile(y, epsilon), np.cos(k * x) * bump_profile(y, epsilon, 1)

    def hessian(x, y):
        return (
            -k * k * u(x, y),
            -k * np.sin(k * x) * bump_profile(y, epsilon, 1),
            np.cos(k * x) * bump_profile(y, epsilon, 2),
        )

    return ProblemCase("wkb", UNIT_SQUARE, float(k), u, grad, hessian)


def make_problem(name: str, k: float, n: int | None = None, epsilon: float = 0.2) -> ProblemCase:
    """Look up a problem case by its CLI name."""
    if name == "gaussian":
        return gaussian_bump(k)
    if name == "hadamard":
        return hadamard(k, 12 if n is None else n)
    if name == "wkb":
        return wkb_leading(k, epsilon)
    raise ValueError(f"unknown problem {name!r}")


# ------------------------------------------------------------ perturbations

PERTURBATION_LAWS = ("none", "h", "h2")


@dataclass(frozen=True)
class Perturbation:
    """Uniform nodal noise of amplitude 0, h or h² (``law`` = none/h/h2)."""

    law: str = "none"
    seed: int = 0

    def __post_init__(self):
        if self.law not in PERTURBATION_LAWS:
            raise ValueError(f"unknown perturbation law {self.law!r}")

    def amplitude(self, h: float) -> float:
        return {"none": 0.0, "h": h, "h2": h * h}[self.law]


def perturb(values: npt.ArrayLike, law: Perturbation, h: float, stream: int = 0) -> npt.NDArray[np.float64]:
    """Add iid uniform noise in ``[-a, a]`` to every entry, ``a`` set by ``law``.

    ``stream`` separates independent noise sequences drawn from one seed
    (e.g. for q and f).
    """
    values = np.asarray(values, dtype=float)
    amp = law.amplitude(h)
    if amp == 0.0:
        return values.copy()
    rng = np.random.default_rng([law.seed, stream])
    return values + rng.uniform(-amp, amp, size=values.shape)
