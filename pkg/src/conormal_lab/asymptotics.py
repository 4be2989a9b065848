"""Leading-order reflection law for ``V = x_+^alpha``.

    R ~ 2^(-alpha-2) e^(i alpha pi/2) Gamma(alpha+1) h^alpha,   h -> 0,

proven for ``0 < alpha < 1``; for larger alpha the same expression is kept as
a numerically testable conjecture.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import DomainError

# Lanczos coefficients, g = 7, n = 9 (Godfrey's set)
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2 * math.pi)


def gamma_fn(z: float) -> float:
    """Gamma function for positive real ``z`` by the Lanczos approximation."""
    z = float(z)
    if not z > 0:
        raise DomainError(f"gamma_fn is defined here for z > 0 only, got {z}")
    if z < 0.5:
        # Gamma(z) = Gamma(z+1)/z keeps the series in its accurate range
        return gamma_fn(z + 1.0) / z
    z -= 1.0
    acc = _LANCZOS_C[0]
    for i, c in enumerate(_LANCZOS_C[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _SQRT_2PI * math.exp((z + 0.5) * math.log(t) - t) * acc


def gamma_coefficient(alpha: float, sign: int = +1) -> complex:
    """``-2^(-alpha-2) exp(+-i alpha pi/2) Gamma(alpha+1)``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    return -(2.0 ** (-alpha - 2)) * cmath.exp(sign * 0.5j * alpha * math.pi) * gamma_fn(alpha + 1)


def predicted_R(alpha: float, h: float) -> complex:
    return -gamma_coefficient(alpha, +1) * h**alpha


def is_proven_range(alpha: float) -> bool:
    return 0 < alpha < 1


@dataclass(frozen=True)
class LeadingOrderR:
    alpha: float

    @property
    def modulus_constant(self) -> float:
        return 2.0 ** (-self.alpha - 2) * gamma_fn(self.alpha + 1)

    @property
    def phase_constant(self) -> float:
        return self.alpha * math.pi / 2

    @property
    def conjectural(self) -> bool:
        return not is_proven_range(self.alpha)

    def __call__(self, h: float) -> complex:
        return predicted_R(self.alpha, h)
