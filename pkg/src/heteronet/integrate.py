"""Trajectory integration inside the domain box with ball-entry events.

Coordinates that start exactly at zero are never integrated: the explicit
pair only advances the active coordinates and the implicit path works on the
reduced state, so invariant coordinate planes are preserved bit for bit.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import Radau

from . import _kernels as K
from .construct import VectorFieldSpec
from .dynamics import eval_field, jacobian
from .errors import InvalidArgumentError

ENTERED_BALL = "entered-ball"
T_MAX_REACHED = "t-max-reached"
LEFT_DOMAIN = "left-domain"
STEP_UNDERFLOW = "step-underflow"
STEP_BUDGET = "step-budget-exhausted"

_CODE_NAMES = {
    K.T_MAX: T_MAX_REACHED,
    K.ENTERED: ENTERED_BALL,
    K.LEFT_DOMAIN: LEFT_DOMAIN,
    K.UNDERFLOW: STEP_UNDERFLOW,
    K.BUDGET: STEP_BUDGET,
}

H_MIN = 1e-14
DEFAULT_MAX_STEPS = 2_000_000
STIFFNESS_RATIO = 1e3

EventBall = tuple[Sequence[float], float]


@dataclass
class Trajectory:
    times: np.ndarray
    points: np.ndarray
    terminal_event: str
    event_index: int | None = None
    method: str = "dopri5"
    steps: int = 0
    rejected: int = 0
    nfev: int = 0
    pinned: tuple[int, ...] = field(default_factory=tuple)

    @property
    def samples(self) -> list[tuple[float, np.ndarray]]:
        return list(zip(self.times.tolist(), self.points))

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    @property
    def final_point(self) -> np.ndarray:
        return self.points[-1]

    def pinned_drift(self) -> float:
        """Largest magnitude ever reached by a coordinate that started at 0."""
        if not self.pinned:
            return 0.0
        return float(np.max(np.abs(self.points[:, list(self.pinned)])))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        dim = self.points.shape[1]
        w.writerow(["t", "x"] + [f"y{j}" for j in range(1, dim)])
        for t, p in zip(self.times, self.points):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in p])
        return buf.getvalue()


def _check_inputs(spec, start, t_max, rel_tol, abs_tol):
    z0 = np.ascontiguousarray(start, dtype=np.float64)
    if z0.shape != (spec.dim,):
        raise InvalidArgumentError(f"start must have length {spec.dim}, got {z0.shape}")
    if not (0 < rel_tol <= 1e-2 and 0 < abs_tol <= 1e-2):
        raise InvalidArgumentError("tolerances must lie in (0, 1e-2]")
    if not t_max > 0:
        raise InvalidArgumentError(f"t_max must be positive, got {t_max}")
    (xlo, xhi), (ylo, yhi) = spec.domain_box()
    if not (xlo <= z0[0] <= xhi) or np.any(z0[1:] < ylo) or np.any(z0[1:] > yhi):
        raise InvalidArgumentError(f"start {z0} lies outside the domain box")
    return z0


def stiffness_ratio(spec: VectorFieldSpec, points, active: np.ndarray) -> float:
    """Spread of eigenvalue magnitudes of the active Jacobian over ``points``."""
    mags = np.concatenate(
        [np.abs(np.linalg.eigvals(jacobian(spec, p)[np.ix_(active, active)])) for p in points]
    )
    mags = mags[mags > 0]
    if mags.size == 0:
        return 1.0
    return float(mags.max() / mags.min())


def integrate(
    spec: VectorFieldSpec,
    start,
    t_max: float = 1e4,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-12,
    events: Sequence[EventBall] = (),
    method: str = "dopri5",
    max_steps: int = DEFAULT_MAX_STEPS,
    reverse: bool = False,
    stiffness_probes: Sequence = (),
) -> Trajectory:
    """Follow the flow from ``start`` until an event, ``t_max`` or escape.

    Parameters
    ----------
    events
        Balls ``(center, radius)``. A ball counts as entered only when the
        trajectory crosses into it from outside, so a ball containing the
        start point is armed once the trajectory has left it.
    method
        ``"dopri5"`` (explicit 4(5) pair with PI control), ``"radau"``
        (implicit, for stiff fields) or ``"auto"``, which picks ``radau``
        when the active Jacobians at ``start`` and ``stiffness_probes`` have
        eigenvalue magnitudes spread by more than ``STIFFNESS_RATIO``, and
        also retries with ``radau`` if the explicit pair runs out of steps.
    reverse
        Integrate the time-reversed field. Always uses the implicit path.
    """
    z0 = _check_inputs(spec, start, t_max, rel_tol, abs_tol)
    mask = np.ones(spec.dim, dtype=np.bool_)
    mask[1:] = z0[1:] != 0.0
    active = np.flatnonzero(mask)
    pinned = tuple(int(i) for i in np.flatnonzero(~mask))
    centers = np.array([np.asarray(c, dtype=float) for c, _ in events]).reshape(-1, spec.dim)
    radii = np.array([float(r) for _, r in events], dtype=float)
    auto = method == "auto"
    if auto:
        probes = [z0] + [np.asarray(p, dtype=float) for p in stiffness_probes]
        method = "radau" if stiffness_ratio(spec, probes, active) > STIFFNESS_RATIO else "dopri5"
    if reverse:
        method = "radau"
    if method == "dopri5":
        (xlo, xhi), (ylo, yhi) = spec.domain_box()
        box = np.array([xlo, xhi, ylo, yhi])
        ts, zs, _, code, ev, steps, rej, nfev = K.dopri5(
            z0, float(t_max), float(rel_tol), float(abs_tol), spec.packed, mask,
            np.ascontiguousarray(centers), radii, box, int(max_steps), H_MIN,
        )
        if auto and code == K.BUDGET:
            return _integrate_radau(
                spec, z0, active, pinned, t_max, rel_tol, abs_tol, centers, radii, max_steps, 1.0
            )
        return Trajectory(
            times=ts, points=zs, terminal_event=_CODE_NAMES[code],
            event_index=int(ev) if ev >= 0 else None, method="dopri5",
            steps=int(steps), rejected=int(rej), nfev=int(nfev), pinned=pinned,
        )
    if method == "radau":
        return _integrate_radau(
            spec, z0, active, pinned, t_max, rel_tol, abs_tol, centers, radii, max_steps,
            -1.0 if reverse else 1.0,
        )
    raise InvalidArgumentError(f"unknown integration method {method!r}")


def _outside(spec: VectorFieldSpec, z: np.ndarray, abs_tol: float) -> bool:
    (xlo, xhi), (_, yhi) = spec.domain_box()
    if not np.all(np.isfinite(z)):
        return True
    return bool(z[0] < xlo or z[0] > xhi or np.any(z[1:] < -abs_tol) or np.any(z[1:] > yhi))


def _integrate_radau(spec, z0, active, pinned, t_max, rel_tol, abs_tol, centers, radii,
                     max_steps, direction) -> Trajectory:
    dim = spec.dim

    def lift(u):
        z = np.zeros(dim)
        z[active] = u
        return z

    def fun(t, u):
        return direction * eval_field(spec, lift(u))[active]

    def jac(t, u):
        return direction * jacobian(spec, lift(u))[np.ix_(active, active)]

    solver = Radau(fun, 0.0, z0[active], t_bound=float(t_max), rtol=rel_tol, atol=abs_tol, jac=jac)
    armed = np.array([np.linalg.norm(z0 - c) > r for c, r in zip(centers, radii)], dtype=bool)
    times = [0.0]
    points = [z0.copy()]
    code = None
    event_index = None
    steps = 0
    while code is None:
        if steps >= max_steps:
            code = STEP_BUDGET
            break
        t_old = solver.t
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            message = solver.step()
        if solver.status == "failed":
            code = STEP_UNDERFLOW if "step size" in str(message) else LEFT_DOMAIN
            break
        steps += 1
        t_new = solver.t
        z_new = lift(solver.y)
        hit = next(
            (e for e in range(len(radii)) if armed[e] and np.linalg.norm(z_new - centers[e]) <= radii[e]),
            None,
        )
        if hit is not None:
            sol = solver.dense_output()
            c, r = centers[hit], radii[hit]
            lo, hi = t_old, t_new
            z_in = z_new
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                zm = lift(sol(mid))
                d = np.linalg.norm(zm - c)
                if d <= r:
                    hi, z_in = mid, zm
                    if r - d <= 1e-9 * r:
                        break
                else:
                    lo = mid
                if hi - lo <= 1e-15 * max(1.0, abs(hi)):
                    break
            t_new, z_new = hi, z_in
            code, event_index = ENTERED_BALL, int(hit)
        elif _outside(spec, z_new, abs_tol):
            code = LEFT_DOMAIN
        elif solver.status == "finished":
            code = T_MAX_REACHED
        times.append(float(t_new))
        points.append(z_new)
        for e in range(len(radii)):
            if not armed[e] and np.linalg.norm(z_new - centers[e]) > radii[e]:
                armed[e] = True
    return Trajectory(
        times=np.array(times), points=np.array(points), terminal_event=code,
        event_index=event_index, method="radau", steps=steps, rejected=0,
        nfev=int(solver.nfev), pinned=pinned,
    )
