"""Built-in ray-tracing scenarios.

* ``transverse``: flat metric, ``w = x_+^0.5``, a ray hitting the interface
  transversally and splitting.
* ``glancing``: flat metric, ``w = -4|x|^(3/2)``, seeded at a glancing point
  where bicharacteristics are not unique.
* ``tangency``: ``k = 1 + x`` in the tangential block, ``w = x_+^3``; a ray
  touches ``{x = 0}`` once and leaves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..potential import ConormalPotential1D
from .hamiltonian import (FlatMetric, HamiltonianSpec, NormalStretchMetric, PhasePoint, PowerProfile,
                          TwoSidedPowerProfile)


@dataclass(frozen=True)
class Demo:
    spec: HamiltonianSpec
    seed: PhasePoint
    s_max: float


def demo_transverse(alpha: float = 0.5) -> Demo:
    spec = HamiltonianSpec(2, PowerProfile(ConormalPotential1D(alpha)), 1.0, FlatMetric(1), name="transverse")
    return Demo(spec, PhasePoint(-0.2, (0.0,), 0.6, (0.8,)), 2.0)


def demo_glancing() -> Demo:
    spec = HamiltonianSpec(2, TwoSidedPowerProfile(4.0, 1.5), 1.0, FlatMetric(1), name="glancing")
    return Demo(spec, PhasePoint(0.0, (0.0,), 0.0, (1.0,)), 1.0)


def demo_tangency(alpha: float = 3.0) -> Demo:
    spec = HamiltonianSpec(2, PowerProfile(ConormalPotential1D(alpha)), 1.0, NormalStretchMetric(1), name="tangency")
    return Demo(spec, PhasePoint(-1.0, (-4.0 / 3.0,), 1.0, (1.0,)), 2.0)


DEMOS = {"transverse": demo_transverse, "glancing": demo_glancing, "tangency": demo_tangency,
         "i": demo_transverse, "ii": demo_glancing, "iii": demo_tangency}


def get_demo(name: str, **kw) -> Demo:
    try:
        return DEMOS[name](**kw)
    except KeyError:
        raise ValueError(f"unknown demo {name!r}; choose from {sorted(DEMOS)}") from None


def tangency_exact(s) -> np.ndarray:
    """Closed-form tangency trajectory: ``x = -(s-1)^2``, ``xi = 1-s``, ``eta = 1``."""
    t = np.asarray(s, dtype=float) - 1.0
    return np.stack([-(t**2), 2 * t - 2 * t**3 / 3, -t, np.ones_like(t)], axis=-1)


def matches_remark36(spec: HamiltonianSpec) -> bool:
    prof = spec.profile
    return (isinstance(prof, TwoSidedPowerProfile) and prof.c == 4.0 and prof.beta == 1.5
            and isinstance(spec.metric, FlatMetric) and spec.dim == 2 and spec.energy == 1.0)


def remark36_family(s0: float, s: float) -> PhasePoint:
    """Member of the non-unique family through ``(0, 0, 0, 1)`` for the ``-4|x|^(3/2)`` profile.

    The ray sticks to ``x = 0`` until ``s0`` and then detaches:
    ``x = (s-s0)_+^4``, ``xi = 2 (s-s0)_+^3``, ``y = 2s``, ``eta = 1``.
    ``s0 = inf`` is the ray that never leaves.
    """
    t = 0.0 if math.isinf(s0) else max(s - s0, 0.0)
    return PhasePoint(t**4, (2.0 * s,), 2.0 * t**3, (1.0,))


def remark36_derivative(s0: float, s: float) -> np.ndarray:
    """Analytic ``d/ds`` of :func:`remark36_family`."""
    t = 0.0 if math.isinf(s0) else max(s - s0, 0.0)
    return np.array([4 * t**3, 2.0, 6 * t**2, 0.0])
