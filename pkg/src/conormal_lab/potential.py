"""Conormal model potential ``x_+^alpha`` with a smooth compactly supported taper.

The potential equals ``x**alpha`` on ``[0, x0]``, vanishes for ``x <= 0`` and
is cut off between ``x0`` and ``x1`` by a bump that is flat to all orders at
both ends, so the only singularity is the conormal one at the origin.

Scalar kernels are numba-compiled so the ODE solvers can evaluate the potential
inside their inner loops; the dataclasses below wrap them for Python callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import SingularDerivative

# Kernel codes understood by the compiled solvers.
KIND_ZERO = 0
KIND_CONORMAL = 1
KIND_STEP = 2

DEFAULT_X0 = 0.5
# a taper over [0.5, 1.0] reflects visibly at h ~ 1e-2; over [0.5, 1.5] it does not
DEFAULT_X1 = 1.5


@njit(cache=True)
def _taper(t):
    # 1 at t <= 0, 0 at t >= 1, all derivatives vanish at both ends
    if t <= 0.0:
        return 1.0
    if t >= 1.0:
        return 0.0
    z = 1.0 / (1.0 - t) - 1.0 / t
    if z > 700.0:
        return 0.0
    if z < -700.0:
        return 1.0
    return 1.0 / (1.0 + math.exp(z))


@njit(cache=True)
def _taper_derivative(t):
    if t <= 0.0 or t >= 1.0:
        return 0.0
    z = 1.0 / (1.0 - t) - 1.0 / t
    if abs(z) > 700.0:
        return 0.0
    s = 1.0 / (1.0 + math.exp(z))
    dz = 1.0 / (1.0 - t) ** 2 + 1.0 / (t * t)
    return -s * (1.0 - s) * dz


@njit(cache=True)
def conormal_value(alpha, x0, x1, x):
    if x <= 0.0 or x >= x1:
        return 0.0
    v = x**alpha
    if x <= x0:
        return v
    return v * _taper((x - x0) / (x1 - x0))


@njit(cache=True)
def conormal_derivative(alpha, x0, x1, x):
    """Derivative for x != 0; callers handle the origin."""
    if x <= 0.0 or x >= x1:
        return 0.0
    dv = alpha * x ** (alpha - 1.0)
    if x <= x0:
        return dv
    width = x1 - x0
    t = (x - x0) / width
    v = x**alpha
    return dv * _taper(t) + v * _taper_derivative(t) / width


@njit(cache=True)
def kernel_value(kind, params, x, xref):
    """Potential value for the compiled solvers.

    ``xref`` is a point strictly inside the current mesh piece; it resolves
    which side of a jump a piecewise-constant potential is evaluated on.
    """
    if kind == KIND_CONORMAL:
        return conormal_value(params[0], params[1], params[2], x)
    if kind == KIND_STEP:
        if 0.0 < xref < params[1]:
            return params[0]
        return 0.0
    return 0.0


def holder_exponent(alpha: float) -> float:
    """Hölder exponent ``min(1, alpha)`` of ``x_+^alpha`` at the origin."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return min(1.0, float(alpha))


@dataclass(frozen=True)
class ConormalPotential1D:
    """``x_+^alpha`` on ``(-inf, x0]``, tapered to zero on ``[x0, x1]``."""

    alpha: float
    x0: float = DEFAULT_X0
    x1: float = DEFAULT_X1

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0 < self.x0 < 1:
            raise ValueError(f"x0 must lie in (0, 1), got {self.x0}")
        if not self.x1 > self.x0:
            raise ValueError(f"x1 must exceed x0, got x0={self.x0}, x1={self.x1}")
        if self.sup() >= 1.0:
            raise ValueError("sup V must be < 1; shrink x1")

    def __call__(self, x):
        return eval_potential(self, x)

    def derivative(self, x):
        return eval_potential_derivative(self, x)

    def sup(self) -> float:
        # V <= x^alpha on (0, x1) and the taper is monotone, so a dense grid is enough
        grid = np.linspace(self.x0, self.x1, 4001)
        vals = [conormal_value(self.alpha, self.x0, self.x1, float(x)) for x in grid]
        return max(max(vals), self.x0**self.alpha)

    @property
    def support(self) -> tuple[float, float]:
        return 0.0, self.x1

    def nodes(self) -> list[float]:
        return [0.0, self.x0, self.x1]

    def kernel_args(self) -> tuple[int, np.ndarray]:
        return KIND_CONORMAL, np.array([self.alpha, self.x0, self.x1], dtype=float)


@dataclass(frozen=True)
class ZeroPotential:
    """``V = 0``; the free reference problem."""

    alpha: float = 0.0
    x1: float = DEFAULT_X1

    def __call__(self, x):
        return np.zeros(np.shape(x)) if np.ndim(x) else 0.0

    def derivative(self, x):
        return self(x)

    def sup(self) -> float:
        return 0.0

    @property
    def support(self) -> tuple[float, float]:
        return 0.0, self.x1

    def nodes(self) -> list[float]:
        return [0.0, self.x1]

    def kernel_args(self) -> tuple[int, np.ndarray]:
        return KIND_ZERO, np.zeros(3)


@dataclass(frozen=True)
class SquareBarrier:
    """``V0`` on ``[0, width]`` and zero elsewhere; the analytic-oracle case."""

    V0: float
    width: float

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")

    @property
    def x1(self) -> float:
        return self.width

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where((x > 0) & (x < self.width), self.V0, 0.0)
        return float(out) if out.ndim == 0 else out

    def sup(self) -> float:
        return max(self.V0, 0.0)

    @property
    def support(self) -> tuple[float, float]:
        return 0.0, self.width

    def nodes(self) -> list[float]:
        return [0.0, self.width]

    def kernel_args(self) -> tuple[int, np.ndarray]:
        return KIND_STEP, np.array([self.V0, self.width, 0.0])


def eval_potential(pot: ConormalPotential1D, x):
    """Evaluate V at a scalar or array ``x``; ``V(0) = 0`` for every alpha."""
    if np.ndim(x) == 0:
        return conormal_value(pot.alpha, pot.x0, pot.x1, float(x))
    xs = np.asarray(x, dtype=float)
    return np.array([conormal_value(pot.alpha, pot.x0, pot.x1, float(v)) for v in xs.ravel()]).reshape(xs.shape)


def eval_potential_derivative(pot: ConormalPotential1D, x):
    """Evaluate V'. At the origin this is 0 for alpha > 1 and singular otherwise."""
    if np.ndim(x) != 0:
        xs = np.asarray(x, dtype=float)
        return np.array([eval_potential_derivative(pot, float(v)) for v in xs.ravel()]).reshape(xs.shape)
    x = float(x)
    if x == 0.0:
        if pot.alpha <= 1.0:
            raise SingularDerivative(f"V' is singular at x=0 for alpha={pot.alpha} <= 1")
        return 0.0
    return conormal_derivative(pot.alpha, pot.x0, pot.x1, x)
