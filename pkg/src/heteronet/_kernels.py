"""Compiled evaluation of factored fields and the explicit 4(5) integrator.

Factors are passed as flat arrays (see ``VectorFieldSpec.packed``). Kind
codes: 0 right parabola, 1 left parabola, 2 circle right of its anchor,
3 circle left of its anchor, 4 wide ellipse.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# termination codes shared with integrate.py
RUNNING = -1
T_MAX = 0
ENTERED = 1
LEFT_DOMAIN = 2
UNDERFLOW = 3
BUDGET = 4


@njit(cache=True)
def factor_value_grad(kind, anchor, a, b, x, y):
    y2 = y * y
    if kind == 0:
        return y2 - x + anchor, -1.0, 2.0 * y
    if kind == 1:
        return -y2 - x + anchor, -1.0, -2.0 * y
    if kind == 2:
        d = x - (anchor + 0.5)
        return y2 + d * d - 0.25, 2.0 * d, 2.0 * y
    if kind == 3:
        d = x - (anchor - 0.5)
        return y2 + d * d - 0.25, 2.0 * d, 2.0 * y
    d = x - anchor
    return a * y2 + d * d - b, 2.0 * d, 2.0 * a * y


@njit(cache=True)
def product_value_grad(kinds, anchors, aa, bb, lo, hi, x, y):
    """Value and gradient of a factor product by forward product rule."""
    v = 1.0
    vx = 0.0
    vy = 0.0
    for i in range(lo, hi):
        t, tx, ty = factor_value_grad(kinds[i], anchors[i], aa[i], bb[i], x, y)
        vx = vx * t + v * tx
        vy = vy * t + v * ty
        v = v * t
    return v, vx, vy


@njit(cache=True)
def product_value(kinds, anchors, aa, bb, lo, hi, x, y):
    v = 1.0
    y2 = y * y
    for i in range(lo, hi):
        k = kinds[i]
        if k == 0:
            t = y2 - x + anchors[i]
        elif k == 1:
            t = -y2 - x + anchors[i]
        elif k == 2:
            d = x - (anchors[i] + 0.5)
            t = y2 + d * d - 0.25
        elif k == 3:
            d = x - (anchors[i] - 0.5)
            t = y2 + d * d - 0.25
        else:
            d = x - anchors[i]
            t = aa[i] * y2 + d * d - bb[i]
        v *= t
    return v


@njit(cache=True)
def axis_value_grad(roots, x):
    v = 1.0
    dv = 0.0
    for r in roots:
        dv = dv * (x - r) + v
        v = v * (x - r)
    return v, dv


@njit(cache=True)
def field(z, eps, roots, fk, fa, fA, fB, foff, gk, ga, gA, gB, goff, sign, mask, out):
    x = z[0]
    axis = 1.0
    for r in roots:
        axis *= x - r
    dx = -eps * axis
    m = sign.shape[0]
    for p in range(m):
        y = z[p + 1]
        if mask[p + 1] and y != 0.0:
            f = product_value(fk, fa, fA, fB, foff[p], foff[p + 1], x, y)
            g = product_value(gk, ga, gA, gB, goff[p], goff[p + 1], x, y)
            dx += y * f
            out[p + 1] = sign[p] * y * g
        else:
            out[p + 1] = 0.0
    out[0] = dx


@njit(cache=True)
def jacobian(z, eps, roots, fk, fa, fA, fB, foff, gk, ga, gA, gB, goff, sign, out):
    x = z[0]
    a, da = axis_value_grad(roots, x)
    out[:, :] = 0.0
    out[0, 0] = -eps * da
    m = sign.shape[0]
    for p in range(m):
        y = z[p + 1]
        f, fx, fy = product_value_grad(fk, fa, fA, fB, foff[p], foff[p + 1], x, y)
        g, gx, gy = product_value_grad(gk, ga, gA, gB, goff[p], goff[p + 1], x, y)
        out[0, 0] += y * fx
        out[0, p + 1] = f + y * fy
        out[p + 1, 0] = sign[p] * y * gx
        out[p + 1, p + 1] = sign[p] * (g + y * gy)


# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (
    9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# fifth minus fourth order weights
E1 = 71.0 / 57600.0
E3 = -71.0 / 16695.0
E4 = 71.0 / 1920.0
E5 = -17253.0 / 339200.0
E6 = 22.0 / 525.0
E7 = -1.0 / 40.0


@njit(cache=True)
def _dp_step(z, h, k1, P, mask, znew, err, k7):
    eps, roots, fk, fa, fA, fB, foff, gk, ga, gA, gB, goff, sign = P
    n = z.shape[0]
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    k5 = np.empty(n)
    k6 = np.empty(n)
    tmp = np.empty(n)
    for i in range(n):
        tmp[i] = z[i] + h * A21 * k1[i]
    field(tmp, eps, roots, fk, fa, fA, fB, foff, gk, ga, gA, gB, goff, sign, mask, k2)
    for i in range(n):
        tmp[i] = z[i] + h * (A31 * k1[i] + A32 * k2[i])
    field(tmp, eps, roots, fk, fa, fA, fB, foff, gk, ga, gA, gB, goff, sign, mask, k3)
    for i in range(n):
        tmp[i] = z[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
    field(tmp, eps, roots, fk, fa, fA, fB, foff, gk, ga, gA, gB, goff, sign, mask, k4)
    for i in range(n):
        tmp[i] = z[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
    field(tmp, eps, roots, fk, fa, fA, fB, foff, gk, ga, gA, gB, goff, sign, mask, k5)
    for i in range(n):
        tmp[i] = z[i] + h * (
            A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]
        )
    field(tmp, eps, roots, fk, fa, fA, fB, foff, gk, ga, gA, gB, goff, sign, mask, k6)
    for i in range(n):
        if mask[i]:
            znew[i] = z[i] + h * (
                B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]
            )
        else:
            znew[i] = z[i]
    field(znew, eps, roots, fk, fa, fA, fB, foff, gk, ga, gA, gB, goff, sign, mask, k7)
    for i in range(n):
        err[i] = h * (
            E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]
        )


@njit(cache=True)
def _err_norm(z, znew, err, mask, rtol, atol):
    s = 0.0
    cnt = 0
    for i in range(z.shape[0]):
        if mask[i]:
            sc = atol + rtol * max(abs(z[i]), abs(znew[i]))
            q = err[i] / sc
            s += q * q
            cnt += 1
    if cnt == 0:
        return 0.0
    return np.sqrt(s / cnt)


@njit(cache=True)
def _initial_step(z, k1, P, mask, rtol, atol, direction_span):
    eps, roots, fk, fa, fA, fB, foff, gk, ga, gA, gB, goff, sign = P
    n = z.shape[0]
    d0 = 0.0
    d1 = 0.0
    cnt = 0
    for i in range(n):
        if mask[i]:
            sc = atol + rtol * abs(z[i])
            d0 += (z[i] / sc) ** 2
            d1 += (k1[i] / sc) ** 2
            cnt += 1
    d0 = np.sqrt(d0 / cnt)
    d1 = np.sqrt(d1 / cnt)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, direction_span)
    z1 = np.empty(n)
    for i in range(n):
        z1[i] = z[i] + h0 * k1[i] if mask[i] else z[i]
    f1 = np.empty(n)
    field(z1, eps, roots, fk, fa, fA, fB, foff, gk, ga, gA, gB, goff, sign, mask, f1)
    d2 = 0.0
    for i in range(n):
        if mask[i]:
            sc = atol + rtol * abs(z[i])
            d2 += ((f1[i] - k1[i]) / sc) ** 2
    d2 = np.sqrt(d2 / cnt) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, direction_span)


@njit(cache=True)
def _outside(z, box, atol):
    x = z[0]
    if not np.isfinite(x) or x < box[0] or x > box[1]:
        return True
    for i in range(1, z.shape[0]):
        y = z[i]
        if not np.isfinite(y) or y < -atol or y > box[3]:
            return True
    return False


@njit(cache=True)
def _dist(z, c):
    s = 0.0
    for i in range(z.shape[0]):
        d = z[i] - c[i]
        s += d * d
    return np.sqrt(s)


@njit(cache=True)
def dopri5(z0, t_max, rtol, atol, P, mask, centers, radii, box, max_steps, h_min):
    """Adaptive 4(5) integration with PI control and ball-entry events.

    Returns ``(ts, zs, count, code, event_index, steps, rejected, nfev)``.
    Sample arrays are oversized; only the first ``count`` rows are valid.
    """
    eps, roots, fk, fa, fA, fB, foff, gk, ga, gA, gB, goff, sign = P
    n = z0.shape[0]
    cap = 1024
    ts = np.empty(cap)
    zs = np.empty((cap, n))
    ts[0] = 0.0
    zs[0, :] = z0
    count = 1

    nev = radii.shape[0]
    armed = np.empty(nev, dtype=np.bool_)
    for e in range(nev):
        armed[e] = _dist(z0, centers[e]) > radii[e]

    z = z0.copy()
    k1 = np.empty(n)
    field(z, eps, roots, fk, fa, fA, fB, foff, gk, ga, gA, gB, goff, sign, mask, k1)
    nfev = 1
    h = _initial_step(z, k1, P, mask, rtol, atol, t_max)
    nfev += 1
    t = 0.0
    znew = np.empty(n)
    err = np.empty(n)
    k7 = np.empty(n)
    zb = np.empty(n)
    eb = np.empty(n)
    kb = np.empty(n)
    err_old = 1e-4
    beta = 0.04
    alpha = 0.2 - 0.75 * beta
    steps = 0
    rejected = 0
    code = RUNNING
    event_index = -1
    last_rejected = False

    while code == RUNNING:
        if steps >= max_steps:
            code = BUDGET
            break
        if h < h_min:
            code = UNDERFLOW
            break
        if t + h > t_max:
            h = t_max - t
        _dp_step(z, h, k1, P, mask, znew, err, k7)
        nfev += 6
        en = _err_norm(z, znew, err, mask, rtol, atol)
        if not np.isfinite(en):
            en = 1e10
        if en <= 1.0:
            # event checks on the accepted step
            hit = -1
            for e in range(nev):
                if armed[e] and _dist(znew, centers[e]) <= radii[e]:
                    hit = e
                    break
            t_acc = t + h
            if hit >= 0:
                lo = 0.0
                hi = h
                c = centers[hit]
                r = radii[hit]
                zb[:] = znew
                for _ in range(200):
                    mid = 0.5 * (lo + hi)
                    _dp_step(z, mid, k1, P, mask, znew, eb, kb)
                    nfev += 6
                    d = _dist(znew, c)
                    if d <= r:
                        hi = mid
                        zb[:] = znew
                        if r - d <= 1e-9 * r:
                            break
                    else:
                        lo = mid
                    if hi - lo <= 1e-15 * max(1.0, abs(t)):
                        break
                znew[:] = zb
                t_acc = t + hi
                code = ENTERED
                event_index = hit
            elif _outside(znew, box, atol):
                code = LEFT_DOMAIN
            elif t_acc >= t_max:
                code = T_MAX
            t = t_acc
            z[:] = znew
            steps += 1
            if count >= cap:
                cap *= 2
                ts2 = np.empty(cap)
                zs2 = np.empty((cap, n))
                ts2[:count] = ts[:count]
                zs2[:count, :] = zs[:count, :]
                ts = ts2
                zs = zs2
            ts[count] = t
            zs[count, :] = z
            count += 1
            for e in range(nev):
                if not armed[e] and _dist(z, centers[e]) > radii[e]:
                    armed[e] = True
            if code != RUNNING:
                break
            field(z, eps, roots, fk, fa, fA, fB, foff, gk, ga, gA, gB, goff, sign, mask, k1)
            nfev += 1
            fac = 0.9 * max(en, 1e-10) ** (-alpha) * err_old**beta
            fac = min(5.0, max(0.2, fac))
            if last_rejected:
                fac = min(1.0, fac)
            err_old = max(en, 1e-4)
            h = h * fac
            last_rejected = False
        else:
            rejected += 1
            fac = max(0.2, 0.9 * en ** (-alpha))
            h = h * fac
            last_rejected = True
    return ts[:count].copy(), zs[:count, :].copy(), count, code, event_index, steps, rejected, nfev
