"""Integration of bicharacteristics away from, and across, the interface.

Away from ``{x = 0}`` the Hamilton field is smooth and an adaptive
Dormand-Prince pair integrates in the flow parameter ``s``. The field's
normal component ``-w'(x)`` may blow up like ``|x|^(alpha-1)`` at the
interface, so transverse rays are carried through a thin band
``|x| <= x_patch`` with ``x`` itself as the independent variable:

    d(s, y, xi, eta)/dx = (1, dy/ds, dxi/ds, deta/ds) / (2 xi),

which has an integrable right-hand side for every ``alpha > 0``. Inside the
band ``x = +-x_patch * tau^(1/alpha)`` (``alpha < 1``) so the integrand is
smooth in ``tau`` and the Runge-Kutta order is retained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import SingularDerivative, StepUnderflow, TangentialIncidence
from .hamiltonian import HamiltonianSpec, PhasePoint, field_array, ptilde, split

STEP_FLOOR = 1e-15

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])


@dataclass(frozen=True)
class RayConfig:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-13
    max_step: float = 0.05
    patch_rel_tol: float = 1e-13
    event_tol: float = 1e-12


@dataclass
class RaySegment:
    """Samples ``s[i]`` and packed states ``z[i] = [x, y..., xi, eta...]``."""

    s: np.ndarray
    z: np.ndarray
    status: str = "completed"
    message: str = ""
    glancing_passages: list = field(default_factory=list)

    @property
    def start(self) -> PhasePoint:
        return PhasePoint.from_array(self.z[0])

    @property
    def end(self) -> PhasePoint:
        return PhasePoint.from_array(self.z[-1])

    def points(self) -> list[PhasePoint]:
        return [PhasePoint.from_array(z) for z in self.z]

    def concat(self, other: "RaySegment") -> "RaySegment":
        return RaySegment(np.concatenate([self.s, other.s[1:]]), np.vstack([self.z, other.z[1:]]),
                          other.status, other.message, self.glancing_passages + other.glancing_passages)


def _dp_step(f, t, z, dt, k1):
    ks = [k1]
    for i in range(1, 7):
        zi = z + dt * np.dot(_A[i], ks[:i])
        ks.append(f(t + _C[i] * dt, zi))
    znew = z + dt * np.dot(_B[:6], ks[:6])
    err = dt * np.dot(_E, ks)
    return znew, err, ks[6]


def _err_norm(err, z, znew, rtol, atol):
    sc = atol + rtol * np.maximum(np.abs(z), np.abs(znew))
    return float(np.sqrt(np.mean((err / sc) ** 2)))


def integrate_adaptive(f, t0, z0, t1, rtol, atol, max_step=np.inf, event=None, event_tol=1e-12):
    """Adaptive DP5(4) from ``t0`` to ``t1`` (either direction).

    ``event(t, z) -> float``; integration stops at the first step where the
    event function goes from nonnegative to negative, with the crossing
    located by bisection on the step length. Returns ``(ts, zs, hit)``.
    """
    direction = 1.0 if t1 >= t0 else -1.0
    t = float(t0)
    z = np.asarray(z0, dtype=float).copy()
    ts, zs = [t], [z.copy()]
    if t0 == t1:
        return np.array(ts), np.array(zs), False
    dt = min(max_step, abs(t1 - t0), 1e-2)
    k1 = f(t, z)
    g_prev = event(t, z) if event else None
    while direction * (t1 - t) > 0:
        dt = min(dt, max_step, abs(t1 - t))
        if dt < STEP_FLOOR and abs(t1 - t) > STEP_FLOOR:
            raise StepUnderflow(f"step {dt:.3e} below floor at t={t}")
        znew, err, k7 = _dp_step(f, t, z, direction * dt, k1)
        en = _err_norm(err, z, znew, rtol, atol)
        if en > 1.0 or not np.all(np.isfinite(znew)):
            dt *= 0.2 if not np.isfinite(en) else max(0.2, 0.9 * en ** -0.2)
            continue
        tnew = t + direction * dt if abs(t1 - t) > dt else t1
        if event is not None:
            g_new = event(tnew, znew)
            if g_prev >= 0 and g_new < 0:
                lo, hi = 0.0, abs(tnew - t)
                zhit = znew
                while hi - lo > event_tol:
                    mid = 0.5 * (lo + hi)
                    zm, _, _ = _dp_step(f, t, z, direction * mid, k1)
                    if event(t + direction * mid, zm) >= 0:
                        lo = mid
                    else:
                        hi, zhit = mid, zm
                ts.append(t + direction * hi)
                zs.append(zhit)
                return np.array(ts), np.array(zs), True
            g_prev = g_new
        t, z, k1 = tnew, znew, k7
        ts.append(t)
        zs.append(z.copy())
        dt *= 5.0 if en == 0 else min(5.0, 0.9 * en ** -0.2)
    return np.array(ts), np.array(zs), False


# --- Carathéodory band crossing ---------------------------------------------


def _grading(spec: HamiltonianSpec) -> float:
    return 1.0 / min(spec.alpha, 1.0) if math.isfinite(spec.alpha) else 1.0


def _tau_floor(spec: HamiltonianSpec, grade: float) -> float:
    # keeps x(tau) nonzero in floating point, where w' may be singular
    return max((1e-250 / spec.x_patch) ** (1.0 / grade), 1e-300)


def caratheodory_patch(spec: HamiltonianSpec, s0: float, z0: np.ndarray, x_target: float,
                       cfg: RayConfig | None = None, samples: bool = True):
    """Carry ``(s, y, xi, eta)`` from ``x = z0[0]`` to ``x_target`` with ``x`` as clock.

    Both endpoints lie in ``[-x_patch, x_patch]`` on one side of the interface
    (either may be 0). Returns ``(s_samples, z_samples)``.
    """
    cfg = cfg or RayConfig()
    xa, xb = float(z0[0]), float(x_target)
    side = math.copysign(1.0, xa if xa != 0 else xb)
    if xa * xb < 0:
        raise ValueError("patch endpoints must lie on one side of the interface")
    n = spec.ntan
    grade = _grading(spec)
    xp = spec.x_patch
    tmin = _tau_floor(spec, grade)

    def x_of(tau):
        return side * xp * max(tau, tmin) ** grade

    def rhs(tau, w):
        # w = [s, y..., xi, eta...]
        te = max(tau, tmin)
        x = side * xp * te**grade
        dxdtau = side * xp * grade * te ** (grade - 1.0)
        xi = w[1 + n]
        if abs(xi) < 0.5 * spec.xi_min:
            raise TangentialIncidence(f"|xi|={abs(xi):.3e} inside the crossing band")
        z = np.concatenate([[x], w[1:]])
        fz = field_array(spec, z)
        out = np.empty_like(w)
        out[0] = 1.0
        out[1:] = fz[1:]
        return out * (dxdtau / fz[0])

    ta = (abs(xa) / xp) ** (1.0 / grade)
    tb = (abs(xb) / xp) ** (1.0 / grade)
    w0 = np.concatenate([[s0], z0[1:]])
    taus, ws, _ = integrate_adaptive(rhs, ta, w0, tb, cfg.patch_rel_tol, cfg.abs_tol * 1e-2, max_step=0.05)
    zs = np.column_stack([[x_of(t) if t > 0 else 0.0 for t in taus], ws[:, 1:]])
    zs[0, 0] = xa
    zs[-1, 0] = xb
    ss = ws[:, 0]
    if not samples:
        return ss[[0, -1]], zs[[0, -1]]
    return ss, zs


def cross_interface_caratheodory(spec: HamiltonianSpec, pt: PhasePoint, direction: int,
                                 cfg: RayConfig | None = None, s0: float = 0.0):
    """From ``pt`` on ``{x = 0}`` to ``x = direction * x_patch``.

    Returns ``(PhasePoint, elapsed_s)``. Requires ``|xi| >= xi_min`` with the
    sign of ``xi`` matching ``direction``.
    """
    if abs(pt.xi) < spec.xi_min:
        raise TangentialIncidence(f"|xi|={abs(pt.xi):.3e} < xi_min={spec.xi_min:.3e}")
    if direction * pt.xi <= 0:
        raise ValueError("direction must agree with the sign of xi")
    ss, zs = caratheodory_patch(spec, s0, pt.to_array(), direction * spec.x_patch, cfg, samples=False)
    return PhasePoint.from_array(zs[-1]), float(ss[-1] - ss[0])


# --- s-parametrised segments -----------------------------------------------


def _arrival_kind(spec: HamiltonianSpec, z: np.ndarray) -> str:
    """What happens if the ray at the band edge ``z`` continues to ``x = 0``."""
    _, y, xi, eta = split(z)
    pt = ptilde(spec, y, eta)
    if -pt >= spec.xi_min**2 and abs(xi) >= spec.xi_min:
        return "transverse"
    if pt > spec.xi_min**2:
        return "elliptic"
    return "glancing"


def integrate_bicharacteristic(spec: HamiltonianSpec, pt0: PhasePoint, s_span, cfg: RayConfig | None = None,
                               stop_at_interface: bool = True) -> RaySegment:
    """Integrate ``dz/ds = H_p(z)`` over ``s_span`` until the ray reaches the interface.

    A ray entering the band ``|x| <= x_patch`` transversally is carried to
    ``x = 0`` by :func:`caratheodory_patch` and the segment ends there with
    status ``hit_interface``. Near-tangential arrivals continue through the
    band when ``alpha > 2`` (Lipschitz field) and otherwise end with
    ``glancing_nonunique``.
    """
    cfg = cfg or RayConfig()
    s0, s1 = map(float, s_span)
    z0 = pt0.to_array()
    direction = 1.0 if s1 >= s0 else -1.0
    xp = spec.x_patch
    use_band = stop_at_interface and spec.profile.has_interface

    if use_band and pt0.x == 0.0:
        if abs(pt0.xi) < spec.xi_min:
            if spec.alpha <= 2:
                raise SingularDerivative("start on the interface with |xi| < xi_min; use the glancing policy")
        else:
            side = math.copysign(1.0, pt0.xi * direction)
            ss, zs = caratheodory_patch(spec, s0, z0, side * xp, cfg)
            head = RaySegment(ss, zs, "completed")
            if direction * (s1 - ss[-1]) <= 0:
                return head
            rest = integrate_bicharacteristic(spec, PhasePoint.from_array(zs[-1]), (ss[-1], s1), cfg,
                                              stop_at_interface)
            return head.concat(rest)

    def f(s, z):
        return field_array(spec, z)

    def entering(s, z):
        return abs(z[0]) - xp

    def leaving(s, z):
        return xp - abs(z[0])

    s, z = s0, z0
    seg = RaySegment(np.array([s0]), z0[None, :].copy(), "completed")
    armed = use_band and abs(z0[0]) >= xp
    while direction * (s1 - s) > 0:
        event = (entering if armed else leaving) if use_band else None
        ts, zs, hit = integrate_adaptive(f, s, z, s1, cfg.rel_tol, cfg.abs_tol, cfg.max_step,
                                         event=event, event_tol=cfg.event_tol)
        seg = seg.concat(RaySegment(ts, zs, "completed"))
        s, z = float(ts[-1]), zs[-1]
        if not hit:
            break
        if not armed:
            armed = True
            continue
        kind = _arrival_kind(spec, z)
        if kind == "transverse":
            ss, zp = caratheodory_patch(spec, s, z, 0.0, cfg)
            seg = seg.concat(RaySegment(ss, zp, "hit_interface"))
            break
        if kind == "glancing" and spec.alpha <= 2:
            seg.status = "glancing_nonunique"
            seg.message = f"near-tangential arrival at s={s:.12g} with alpha={spec.alpha} <= 2"
            break
        # elliptic, or glancing with a Lipschitz field: the flow is unique, keep going
        seg.glancing_passages.append(s)
        armed = False
    return seg


def reverse_closure(spec: HamiltonianSpec, seg: RaySegment, cfg: RayConfig | None = None) -> float:
    """Integrate a completed segment back from its end; return the max-norm miss at the start.

    Only the part outside the crossing band is retraced, since the flow
    there is smooth and reversible.
    """
    cfg = cfg or RayConfig()
    k = 0
    if spec.profile.has_interface:
        outside = np.flatnonzero(np.abs(seg.z[:, 0]) >= spec.x_patch * (1 - 1e-12))
        k = int(outside[0]) if outside.size else 0
    back = integrate_bicharacteristic(spec, seg.end, (seg.s[-1], seg.s[k]), cfg, stop_at_interface=False)
    return float(np.max(np.abs(back.z[-1] - seg.z[k])))
