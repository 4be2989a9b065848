"""Compiled Dormand-Prince 5(4) integrator for the two linear 1D systems.

Both systems share the form ``y1' = y2, y2' = a(x) y1 + d y2 + c(x)``:

* mode 0, Schrödinger: ``a = (V - E)/h^2``, ``d = 0``, ``c = 0``
* mode 1, envelope:     ``a = V/h^2``,       ``d = -2i/h``, ``c = V/h^2``
* mode 2, conjugate envelope, as mode 1 with ``d = +2i/h``

The integration runs over one mesh piece ``[xa, xb]`` (either direction);
callers split at forced nodes so a piece never straddles a kink or a jump.
"""

import numpy as np
from numba import njit

from .potential import KIND_CONORMAL, kernel_value

MODE_SCHRODINGER = 0
MODE_ENVELOPE = 1
MODE_ENVELOPE_MINUS = 2

STATUS_OK = 0
STATUS_UNDERFLOW = 1

# Dormand-Prince tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth minus fourth order weights
_E1 = 71 / 57600
_E3 = -71 / 16695
_E4 = 71 / 1920
_E5 = -17253 / 339200
_E6 = 22 / 525
_E7 = -1 / 40


@njit(cache=True)
def _rhs(mode, kind, params, energy, h, x, xref, y1, y2):
    v = kernel_value(kind, params, x, xref)
    if mode == 0:
        return y2, (v - energy) / (h * h) * y1
    if mode == 1:
        return y2, (v * (1.0 + y1) - 2j * h * y2) / (h * h)
    return y2, (v * (1.0 + y1) + 2j * h * y2) / (h * h)


@njit(cache=True)
def integrate_piece(mode, kind, params, energy, h, xa, xb, y1, y2,
                    rtol, atol, max_step, fine_step, fine_radius, step_floor, record):
    """Integrate from ``xa`` to ``xb``.

    Returns ``(y1, y2, n_accepted, n_rejected, err_sum, status, xs, ys1, ys2)``;
    the sample arrays hold accepted step endpoints when ``record`` is true and
    only the start point otherwise.
    """
    direction = 1.0 if xb >= xa else -1.0
    span = abs(xb - xa)
    xref = 0.5 * (xa + xb)
    cap = 64
    xs = np.empty(cap)
    ys1 = np.empty(cap, dtype=np.complex128)
    ys2 = np.empty(cap, dtype=np.complex128)
    xs[0] = xa
    ys1[0] = y1
    ys2[0] = y2
    n_rec = 1
    if span == 0.0:
        return y1, y2, 0, 0, 0.0, STATUS_OK, xs[:1], ys1[:1], ys2[:1]

    x = xa
    step = min(max_step, span)
    n_acc = 0
    n_rej = 0
    err_sum = 0.0
    status = STATUS_OK
    k1a, k1b = _rhs(mode, kind, params, energy, h, x, xref, y1, y2)
    while direction * (xb - x) > 0.0:
        local_cap = max_step
        if kind == KIND_CONORMAL and params[0] < 1.0 and abs(x) <= fine_radius:
            local_cap = fine_step
        if step > local_cap:
            step = local_cap
        remaining = direction * (xb - x)
        last = False
        if step >= remaining:
            step = remaining
            last = True
        if step < step_floor and not last:
            status = STATUS_UNDERFLOW
            break
        dx = direction * step

        s1 = y1 + dx * _A21 * k1a
        s2 = y2 + dx * _A21 * k1b
        k2a, k2b = _rhs(mode, kind, params, energy, h, x + _C2 * dx, xref, s1, s2)
        s1 = y1 + dx * (_A31 * k1a + _A32 * k2a)
        s2 = y2 + dx * (_A31 * k1b + _A32 * k2b)
        k3a, k3b = _rhs(mode, kind, params, energy, h, x + _C3 * dx, xref, s1, s2)
        s1 = y1 + dx * (_A41 * k1a + _A42 * k2a + _A43 * k3a)
        s2 = y2 + dx * (_A41 * k1b + _A42 * k2b + _A43 * k3b)
        k4a, k4b = _rhs(mode, kind, params, energy, h, x + _C4 * dx, xref, s1, s2)
        s1 = y1 + dx * (_A51 * k1a + _A52 * k2a + _A53 * k3a + _A54 * k4a)
        s2 = y2 + dx * (_A51 * k1b + _A52 * k2b + _A53 * k3b + _A54 * k4b)
        k5a, k5b = _rhs(mode, kind, params, energy, h, x + _C5 * dx, xref, s1, s2)
        s1 = y1 + dx * (_A61 * k1a + _A62 * k2a + _A63 * k3a + _A64 * k4a + _A65 * k5a)
        s2 = y2 + dx * (_A61 * k1b + _A62 * k2b + _A63 * k3b + _A64 * k4b + _A65 * k5b)
        k6a, k6b = _rhs(mode, kind, params, energy, h, x + dx, xref, s1, s2)
        n1 = y1 + dx * (_B1 * k1a + _B3 * k3a + _B4 * k4a + _B5 * k5a + _B6 * k6a)
        n2 = y2 + dx * (_B1 * k1b + _B3 * k3b + _B4 * k4b + _B5 * k5b + _B6 * k6b)
        k7a, k7b = _rhs(mode, kind, params, energy, h, x + dx, xref, n1, n2)
        e1 = dx * (_E1 * k1a + _E3 * k3a + _E4 * k4a + _E5 * k5a + _E6 * k6a + _E7 * k7a)
        e2 = dx * (_E1 * k1b + _E3 * k3b + _E4 * k4b + _E5 * k5b + _E6 * k6b + _E7 * k7b)

        # y2 is measured in units of y1/h so both components share one scale
        sc1 = atol + rtol * max(abs(y1), abs(n1))
        sc2 = atol + rtol * h * max(abs(y2), abs(n2))
        r1 = abs(e1) / sc1
        r2 = h * abs(e2) / sc2
        err = np.sqrt(0.5 * (r1 * r1 + r2 * r2))

        if err <= 1.0:
            x = xb if last else x + dx
            y1 = n1
            y2 = n2
            k1a = k7a
            k1b = k7b
            n_acc += 1
            err_sum += abs(e1) + h * abs(e2)
            if record:
                if n_rec == cap:
                    cap *= 2
                    nx = np.empty(cap)
                    n1s = np.empty(cap, dtype=np.complex128)
                    n2s = np.empty(cap, dtype=np.complex128)
                    nx[:n_rec] = xs[:n_rec]
                    n1s[:n_rec] = ys1[:n_rec]
                    n2s[:n_rec] = ys2[:n_rec]
                    xs, ys1, ys2 = nx, n1s, n2s
                xs[n_rec] = x
                ys1[n_rec] = y1
                ys2[n_rec] = y2
                n_rec += 1
            fac = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
            step = step * fac
        else:
            n_rej += 1
            step = step * max(0.2, 0.9 * err ** -0.2)
    return y1, y2, n_acc, n_rej, err_sum, status, xs[:n_rec], ys1[:n_rec], ys2[:n_rec]
