"""Symbol ``p = xi^2 + k(x, y)[eta, eta] + w(x) - E`` and its Hamilton field.

Coordinates are ``(x, y, xi, eta)`` with ``x`` normal to the interface
``{x = 0}`` and ``y`` tangential (``dim - 1`` components). Phase points are
packed as flat arrays ``[x, y..., xi, eta...]`` for the integrators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import SingularDerivative
from ..potential import ConormalPotential1D, eval_potential, eval_potential_derivative


# --- normal profiles -------------------------------------------------------


@dataclass(frozen=True)
class PowerProfile:
    """``w = x_+^alpha`` with the compact taper of :class:`ConormalPotential1D`."""

    potential: ConormalPotential1D

    @property
    def alpha(self) -> float:
        return self.potential.alpha

    has_interface = True

    def value(self, x: float) -> float:
        return eval_potential(self.potential, x)

    def derivative(self, x: float) -> float:
        return eval_potential_derivative(self.potential, x)

    def describe(self) -> dict:
        return {"type": "power", "alpha": self.alpha, "x0": self.potential.x0, "x1": self.potential.x1}


@dataclass(frozen=True)
class TwoSidedPowerProfile:
    """``w = -c |x|^beta`` on both sides of the interface."""

    c: float = 4.0
    beta: float = 1.5

    @property
    def alpha(self) -> float:
        return self.beta

    has_interface = True

    def value(self, x: float) -> float:
        return -self.c * abs(x) ** self.beta

    def derivative(self, x: float) -> float:
        if x == 0.0:
            if self.beta <= 1.0:
                raise SingularDerivative(f"w' singular at x=0 for beta={self.beta}")
            return 0.0
        return -self.c * self.beta * math.copysign(abs(x) ** (self.beta - 1.0), x)

    def describe(self) -> dict:
        return {"type": "two_sided_power", "c": self.c, "beta": self.beta}


@dataclass(frozen=True)
class ZeroProfile:
    """No potential and therefore no interface."""

    alpha = math.inf
    has_interface = False

    def value(self, x: float) -> float:
        return 0.0

    def derivative(self, x: float) -> float:
        return 0.0

    def describe(self) -> dict:
        return {"type": "zero"}


# --- metrics ---------------------------------------------------------------


class FlatMetric:
    def __init__(self, ndim: int):
        self.ndim = ndim

    def k(self, x, y):
        return np.eye(self.ndim)

    def dk_dx(self, x, y):
        return np.zeros((self.ndim, self.ndim))

    def dk_dy(self, x, y):
        return np.zeros((self.ndim, self.ndim, self.ndim))

    def describe(self) -> dict:
        return {"type": "flat"}


class NormalStretchMetric:
    """``k^{11} = 1 + x``, identity otherwise; a tangential ray bends back off ``{x = 0}``."""

    def __init__(self, ndim: int):
        self.ndim = ndim

    def k(self, x, y):
        m = np.eye(self.ndim)
        m[0, 0] = 1.0 + x
        return m

    def dk_dx(self, x, y):
        m = np.zeros((self.ndim, self.ndim))
        m[0, 0] = 1.0
        return m

    def dk_dy(self, x, y):
        return np.zeros((self.ndim, self.ndim, self.ndim))

    def describe(self) -> dict:
        return {"type": "normal_stretch"}


class CallableMetric:
    """Metric from a user callable; missing derivatives use 4th-order central differences."""

    def __init__(self, ndim: int, k: Callable, dk_dx: Callable | None = None,
                 dk_dy: Callable | None = None, step: float = 1e-5):
        self.ndim = ndim
        self._k = k
        self._dk_dx = dk_dx
        self._dk_dy = dk_dy
        self.step = step

    def k(self, x, y):
        return np.asarray(self._k(x, np.asarray(y, dtype=float)), dtype=float)

    def dk_dx(self, x, y):
        if self._dk_dx is not None:
            return np.asarray(self._dk_dx(x, y), dtype=float)
        d = self.step
        return (-self.k(x + 2 * d, y) + 8 * self.k(x + d, y) - 8 * self.k(x - d, y) + self.k(x - 2 * d, y)) / (12 * d)

    def dk_dy(self, x, y):
        if self._dk_dy is not None:
            return np.asarray(self._dk_dy(x, y), dtype=float)
        d = self.step
        y = np.asarray(y, dtype=float)
        out = np.empty((self.ndim, self.ndim, self.ndim))
        for i in range(self.ndim):
            e = np.zeros(self.ndim)
            e[i] = d
            out[i] = (-self.k(x, y + 2 * e) + 8 * self.k(x, y + e) - 8 * self.k(x, y - e) + self.k(x, y - 2 * e)) / (12 * d)
        return out

    def describe(self) -> dict:
        return {"type": "callable"}


# --- spec and phase points -------------------------------------------------


@dataclass
class HamiltonianSpec:
    dim: int
    profile: object
    energy: float = 1.0
    metric: object = None
    name: str = "custom"
    xi_min: float | None = None
    x_patch: float = 1e-3
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be >= 2")
        if self.metric is None:
            self.metric = FlatMetric(self.dim - 1)
        if self.xi_min is None:
            self.xi_min = 1e-3 * math.sqrt(abs(self.energy)) if self.energy != 0 else 1e-3

    @property
    def alpha(self) -> float:
        return self.profile.alpha

    @property
    def ntan(self) -> int:
        return self.dim - 1

    def describe(self) -> dict:
        return {"name": self.name, "dim": self.dim, "energy": self.energy,
                "profile": self.profile.describe(), "metric": self.metric.describe()}


@dataclass(frozen=True)
class PhasePoint:
    x: float
    y: tuple
    xi: float
    eta: tuple

    def __post_init__(self):
        object.__setattr__(self, "y", tuple(float(v) for v in np.atleast_1d(self.y)))
        object.__setattr__(self, "eta", tuple(float(v) for v in np.atleast_1d(self.eta)))
        vals = (self.x, *self.y, self.xi, *self.eta)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite phase point {vals}")

    def to_array(self) -> np.ndarray:
        return np.array([self.x, *self.y, self.xi, *self.eta], dtype=float)

    @classmethod
    def from_array(cls, z) -> "PhasePoint":
        z = np.asarray(z, dtype=float)
        n = (z.size - 2) // 2
        return cls(float(z[0]), tuple(z[1:1 + n]), float(z[1 + n]), tuple(z[2 + n:]))


def split(z: np.ndarray):
    n = (z.size - 2) // 2
    return z[0], z[1:1 + n], z[1 + n], z[2 + n:]


def _p_array(spec: HamiltonianSpec, z: np.ndarray) -> float:
    x, y, xi, eta = split(z)
    return xi * xi + eta @ spec.metric.k(x, y) @ eta + spec.profile.value(x) - spec.energy


def eval_p(spec: HamiltonianSpec, pt) -> float:
    """Symbol value at a phase point (or packed array)."""
    z = pt.to_array() if isinstance(pt, PhasePoint) else np.asarray(pt, dtype=float)
    return float(_p_array(spec, z))


def field_array(spec: HamiltonianSpec, z: np.ndarray) -> np.ndarray:
    x, y, xi, eta = split(z)
    metric = spec.metric
    k = metric.k(x, y)
    out = np.empty_like(z)
    n = y.size
    out[0] = 2.0 * xi
    out[1:1 + n] = 2.0 * k @ eta
    out[1 + n] = -(eta @ metric.dk_dx(x, y) @ eta) - spec.profile.derivative(x)
    dky = metric.dk_dy(x, y)
    out[2 + n:] = -np.einsum("ijl,j,l->i", dky, eta, eta)
    return out


def eval_hamilton_field(spec: HamiltonianSpec, pt) -> np.ndarray:
    """``(dx, dy, dxi, deta)/ds``; raises :class:`SingularDerivative` on the singular set."""
    z = pt.to_array() if isinstance(pt, PhasePoint) else np.asarray(pt, dtype=float)
    return field_array(spec, z)


# --- boundary classification ----------------------------------------------


@dataclass(frozen=True)
class Elliptic:
    ptilde: float


@dataclass(frozen=True)
class Glancing:
    ptilde: float


@dataclass(frozen=True)
class Hyperbolic:
    xi_plus: float
    ptilde: float = 0.0


PointClass = Elliptic | Glancing | Hyperbolic


def ptilde(spec: HamiltonianSpec, y, eta) -> float:
    y = np.atleast_1d(np.asarray(y, dtype=float))
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    return float(eta @ spec.metric.k(0.0, y) @ eta + spec.profile.value(0.0) - spec.energy)


def classify_boundary_point(spec: HamiltonianSpec, y, eta, tol: float = 1e-10) -> PointClass:
    """Count real normal momenta over ``(y, eta)`` at ``x = 0``: none, one or two."""
    pt = ptilde(spec, y, eta)
    if pt > tol:
        return Elliptic(pt)
    if pt < -tol:
        return Hyperbolic(math.sqrt(-pt), pt)
    return Glancing(pt)
