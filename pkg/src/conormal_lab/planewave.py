"""Second, independent route to R: continue the plane waves ``e^{+-ix/h}`` past
the singularity, then connect them to the outgoing solution with Wronskians.

Near the origin ``u_+ = e^{ix/h}(1 + b)`` where the envelope ``b`` solves

    h^2 b'' + 2ih b' = (1 + b) V,    b(0) = b'(0) = 0,

and ``u_- = conj(u_+)``. The outgoing solution ``v_+`` is integrated in from
the right; at a matching point ``x_m = h^eta`` the identity

    v_+ = A u_+ + B u_-,   A = W(v_+, u_-)/W(u_+, u_-),  B = W(u_+, v_+)/W(u_+, u_-)

yields ``R = B/A`` and ``T = 1/A``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _dopri
from .asymptotics import gamma_coefficient
from .errors import DegenerateIncident, EtaOutOfWindow
from .potential import ConormalPotential1D, ZeroPotential
from .quadrature import gauss_kronrod
from .scatter1d import IntegratorConfig, ScatteringResult, integrate_pieces


@dataclass
class EnvelopeSolution:
    sign: int
    h: float
    x: np.ndarray
    b: np.ndarray
    db: np.ndarray

    def conjugate(self) -> "EnvelopeSolution":
        return EnvelopeSolution(-self.sign, self.h, self.x, np.conj(self.b), np.conj(self.db))

    def plane_wave(self, i: int = -1) -> tuple[complex, complex]:
        """``(u, u')`` at sample ``i`` with ``u = e^{+-ix/h}(1 + b)``."""
        x, b, db, h = self.x[i], self.b[i], self.db[i], self.h
        phase = cmath.exp(self.sign * 1j * x / h)
        return phase * (1 + b), phase * (self.sign * 1j / h * (1 + b) + db)


def solve_envelope_ode(pot: ConormalPotential1D, h: float, x_end: float,
                       cfg: IntegratorConfig | None = None, sign: int = +1) -> EnvelopeSolution:
    """Solve the envelope equation on ``[0, x_end]`` from zero data.

    ``sign=-1`` integrates the conjugate equation directly rather than
    conjugating; ``EnvelopeSolution.conjugate`` gives the cheap route.
    """
    cfg = cfg or IntegratorConfig()
    if not 0 < x_end <= pot.support[1]:
        raise ValueError(f"x_end must lie in (0, {pot.support[1]}], got {x_end}")
    mode = _dopri.MODE_ENVELOPE if sign > 0 else _dopri.MODE_ENVELOPE_MINUS
    nodes = sorted({0.0, x_end, *(n for n in pot.nodes() if 0 < n < x_end)})
    *_, samples = integrate_pieces(mode, pot, 0.0, h, nodes, 0j, 0j, cfg, record=True)
    xs, b, db = samples
    return EnvelopeSolution(1 if sign > 0 else -1, h, xs, b, db)


def born_sigma(alpha: float, h: float, x):
    """``sigma(x) = x^(alpha+1) / ((alpha+1) h)``, the Born-series control on ``[0, x0]``."""
    return np.asarray(x, dtype=float) ** (alpha + 1) / ((alpha + 1) * h)


def compute_b1(alpha: float, y: float, rel_tol: float = 1e-10) -> complex:
    """``h^-alpha b_1`` in the rescaled variable ``y = x/h``.

    Evaluates ``e^{-2iy}/(alpha+1) * int_0^y e^{2is} s^(alpha+1) ds``, which does
    not depend on h.
    """
    if y < 0:
        raise ValueError("y must be nonnegative")
    if y == 0:
        return 0j
    val, _ = gauss_kronrod(lambda s: np.exp(2j * s) * s ** (alpha + 1), 0.0, float(y),
                           rel_tol=rel_tol, max_panel=math.pi / 8)
    return complex(cmath.exp(-2j * y) * val / (alpha + 1))


def b1_expansion(alpha: float, y: float) -> complex:
    """Three explicit large-``y`` terms of ``h^-alpha b_1``; the remainder is ``O(y^(alpha-1))``."""
    if y <= 0:
        raise ValueError("y must be positive")
    return (gamma_coefficient(alpha, +1) * cmath.exp(-2j * y)
            + y ** (alpha + 1) / (2j * (alpha + 1))
            + y**alpha / 4)


@dataclass
class WKBData:
    x: np.ndarray
    phase: np.ndarray
    amplitude: np.ndarray
    c0: float


def wkb_phase(pot, x: float, rel_tol: float = 1e-12) -> float:
    """``phi(x) = int_0^x sqrt(1 - V(s)) ds``."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0:
        return 0.0
    f = lambda s: np.sqrt(1.0 - pot(s))  # noqa: E731
    bps = [n for n in pot.nodes() if 0 < n < x]
    val, _ = gauss_kronrod(f, 0.0, float(x), rel_tol=rel_tol, breakpoints=bps)
    return float(val)


def wkb_c0(pot) -> float:
    """Asymptotic phase shift ``phi(x) - x`` for any ``x`` past the support."""
    x1 = pot.support[1]
    return wkb_phase(pot, x1) - x1


def wkb_data(pot, xs) -> WKBData:
    xs = np.asarray(xs, dtype=float)
    phase = np.array([wkb_phase(pot, float(x)) for x in xs])
    amplitude = (1.0 - pot(xs)) ** -0.25
    return WKBData(xs, phase, amplitude, wkb_c0(pot))


def semiclassical_wronskian(u: complex, du: complex, v: complex, dv: complex, h: float) -> complex:
    """``u (h v') - (h u') v``; equals ``-2i`` for ``(e^{ix/h}, e^{-ix/h})``."""
    return h * (u * dv - du * v)


def eta_window(alpha: float) -> tuple[float, float]:
    return (2 + alpha) / (2 * (alpha + 1)), 1.0


def default_eta(alpha: float) -> float:
    lo, hi = eta_window(alpha)
    return 0.5 * (lo + hi)


@dataclass
class Connection:
    """Everything produced by one matching: coefficients and the Wronskians behind them."""

    R: complex
    T: complex
    A: complex
    B: complex
    x_match: float
    eta: float
    w_pm: complex
    w_plus_v: complex
    w_v_minus: complex


def connect(pot, h: float, eta: float | None = None, cfg: IntegratorConfig | None = None) -> Connection:
    cfg = cfg or IntegratorConfig()
    alpha = pot.alpha
    if isinstance(pot, ZeroPotential):
        eta = 0.95 if eta is None else eta
        x0 = pot.support[1]
    else:
        eta = default_eta(alpha) if eta is None else eta
        lo, hi = eta_window(alpha)
        if not lo < eta < hi:
            raise EtaOutOfWindow(f"eta={eta} outside ({lo:.6g}, {hi:.6g}) for alpha={alpha}")
        x0 = pot.x0
    xm = h**eta
    if not xm < x0:
        raise ValueError(f"matching point h^eta={xm:.4g} must lie below x0={x0}")

    env = solve_envelope_ode(pot, h, xm, cfg)
    up, dup = env.plane_wave(-1)
    um, dum = up.conjugate(), dup.conjugate()

    x_right = pot.support[1] + 0.1
    nodes = sorted({x_right, xm, *(n for n in pot.nodes() if xm < n < x_right)}, reverse=True)
    v = cmath.exp(1j * x_right / h)
    v, dv, *_ = integrate_pieces(_dopri.MODE_SCHRODINGER, pot, 1.0, h, nodes, v, 1j / h * v, cfg)

    w_pm = semiclassical_wronskian(up, dup, um, dum, h)
    w_pv = semiclassical_wronskian(up, dup, v, dv, h)
    w_vm = semiclassical_wronskian(v, dv, um, dum, h)
    A = w_vm / w_pm
    B = w_pv / w_pm
    if abs(A) < 1e-12:
        raise DegenerateIncident(f"|A|={abs(A):.3e}: no incident component")
    # v_+ has unit outgoing amplitude, so T = 1/A (the appendix's c0 is this phase)
    R, T = B / A, 1 / A
    return Connection(R, T, A, B, xm, eta, w_pm, w_pv, w_vm)


def connect_and_extract_R(pot, h: float, eta: float | None = None,
                          cfg: IntegratorConfig | None = None) -> tuple[complex, complex]:
    c = connect(pot, h, eta, cfg)
    return c.R, c.T


def solve_appendix(pot, h: float, eta: float | None = None, cfg: IntegratorConfig | None = None) -> ScatteringResult:
    c = connect(pot, h, eta, cfg)
    return ScatteringResult(h=h, R=c.R, T=c.T, flux_defect=abs(c.R) ** 2 + abs(c.T) ** 2 - 1,
                            method="appendix", extra={"alpha": pot.alpha, "eta": c.eta, "x_match": c.x_match})
