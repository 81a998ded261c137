"""Field evaluation, exact Jacobians, equilibria and their linear stability."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from . import _kernels as K
from .construct import VectorFieldSpec
from .errors import ConstructionViolation, InvalidArgumentError, NonHyperbolicError

log = logging.getLogger(__name__)

HYPERBOLIC_RTOL = 1e-12
MERGE_TOL = 1e-6
OFF_AXIS_GRID = 200
OFF_AXIS_Y_MAX = 2.0


def _point(spec: VectorFieldSpec, point) -> np.ndarray:
    z = np.ascontiguousarray(point, dtype=np.float64)
    if z.shape != (spec.dim,):
        raise InvalidArgumentError(f"expected a point of length {spec.dim}, got shape {z.shape}")
    return z


def eval_field(spec: VectorFieldSpec, point) -> np.ndarray:
    """Field value at ``point``, computed factor by factor."""
    z = _point(spec, point)
    out = np.empty(spec.dim)
    mask = np.ones(spec.dim, dtype=np.bool_)
    K.field(z, *spec.packed, mask, out)
    return out


def jacobian(spec: VectorFieldSpec, point) -> np.ndarray:
    """Analytic Jacobian by product-rule accumulation over the factors."""
    z = _point(spec, point)
    out = np.empty((spec.dim, spec.dim))
    K.jacobian(z, *spec.packed, out)
    return out


def field_scale(spec: VectorFieldSpec, point) -> float:
    """Largest magnitude among the additive terms of the field at ``point``."""
    z = _point(spec, point)
    x = z[0]
    terms = [abs(spec.epsilon * float(spec.axis.evaluate(x)))]
    for idx, p in enumerate(spec.planes, start=1):
        y = z[idx]
        terms.append(abs(y * p.f_value(x, y)))
        terms.append(abs(y * p.g_value(x, y)))
    return float(max(terms))


def axis_derivative(spec: VectorFieldSpec, x: float) -> float:
    _, d = K.axis_value_grad(np.asarray(spec.axis.axis_roots, dtype=np.float64), float(x))
    return d


@dataclass
class Equilibrium:
    coords: np.ndarray
    on_axis: bool
    is_node: bool
    eigenvalues: np.ndarray
    node_index: int | None = None
    plane: int | None = None
    epsilon: float | None = None

    @property
    def x(self) -> float:
        return float(self.coords[0])

    def restricted_eigenvalues(self, plane_slot: int) -> np.ndarray:
        """In-plane pair ``(x, y_j)`` for an on-axis equilibrium."""
        if not self.on_axis:
            raise InvalidArgumentError("restricted eigenvalues are read off on-axis diagonals only")
        return np.array([self.eigenvalues[0], self.eigenvalues[plane_slot]]).real


@dataclass(frozen=True)
class StabilitySignature:
    signs: tuple[int, ...]
    label: str

    def __str__(self) -> str:
        return "(" + ", ".join("+" if s > 0 else "-" for s in self.signs) + f") {self.label}"


def classify(eq: Equilibrium) -> StabilitySignature:
    """Sign of the real part along each direction plus sink/saddle/source."""
    re = np.real(np.asarray(eq.eigenvalues))
    scale = float(np.max(np.abs(re))) if re.size else 0.0
    tiny = np.abs(re) <= HYPERBOLIC_RTOL * max(scale, 1e-300)
    if scale == 0.0 or tiny.any():
        raise NonHyperbolicError(
            f"equilibrium at {np.array2string(np.asarray(eq.coords), precision=6)} has an eigenvalue "
            f"with |Re| below {HYPERBOLIC_RTOL:g} relative to the spectrum (epsilon={eq.epsilon})",
            epsilon=eq.epsilon,
        )
    signs = tuple(1 if v > 0 else -1 for v in re)
    if all(s < 0 for s in signs):
        label = "sink"
    elif all(s > 0 for s in signs):
        label = "source"
    else:
        label = "saddle"
    return StabilitySignature(signs, label)


def _on_axis_equilibrium(spec: VectorFieldSpec, x: float) -> Equilibrium:
    z = np.zeros(spec.dim)
    z[0] = x
    J = jacobian(spec, z)
    eig = np.diag(J).copy()
    k = int(round(x))
    is_node = k % 2 == 1 and abs(x - k) <= 1e-9
    return Equilibrium(
        coords=z,
        on_axis=True,
        is_node=is_node,
        node_index=(k + 1) // 2 if is_node else None,
        eigenvalues=eig,
        epsilon=spec.epsilon,
    )


def node_equilibrium(spec: VectorFieldSpec, k: int) -> Equilibrium:
    """Equilibrium record for node ``k`` built directly at ``x = 2k - 1``."""
    if not 1 <= k <= spec.n:
        raise InvalidArgumentError(f"node index {k} outside 1..{spec.n}")
    return _on_axis_equilibrium(spec, float(2 * k - 1))


def find_axis_equilibria(spec: VectorFieldSpec, points_per_unit: int = 16) -> list[Equilibrium]:
    """Bracket and polish all zeros of the on-axis field over ``[0, 2n]``."""
    lo, hi = 0.0, 2.0 * spec.n
    m = int(points_per_unit * (hi - lo))
    # offset grid keeps sample points away from the integer roots
    xs = lo + (np.arange(m + 1) + 0.5 / math.pi) * (hi - lo) / (m + 1)
    xs = np.concatenate([[lo], xs, [hi]])

    def h(x: float) -> float:
        return -spec.epsilon * float(spec.axis.evaluate(x))

    vals = np.array([h(x) for x in xs])
    roots = []
    for i in range(len(xs) - 1):
        a, b = xs[i], xs[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0:
            roots.append(brentq(h, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
    if vals[-1] == 0.0:
        roots.append(float(xs[-1]))
    roots = sorted(set(roots))
    expected = 2 * spec.n - 1
    if len(roots) != expected:
        raise ConstructionViolation(
            f"found {len(roots)} axis equilibria for n={spec.n}, expected {expected}"
        )
    return [_on_axis_equilibrium(spec, x) for x in roots]


def _plane_slot(spec: VectorFieldSpec, plane: int) -> int:
    for idx, p in enumerate(spec.planes, start=1):
        if p.plane == plane:
            return idx
    raise InvalidArgumentError(f"plane {plane} does not exist for n={spec.n}")


def _plane_residual(spec: VectorFieldSpec, slot: int, x, y, epsilon: float):
    p = spec.planes[slot - 1]
    h1 = -epsilon * spec.axis.evaluate(x) + y * p.f_value(x, y)
    h2 = p.g_value(x, y)
    return h1, h2


def _plane_newton(spec, slot, x, y, epsilon, max_iter=60):
    eps_s, roots, fk, fa, fA, fB, foff, gk, ga, gA, gB, goff, sign = spec.packed
    p = slot - 1
    for _ in range(max_iter):
        a, da = K.axis_value_grad(roots, x)
        f, fx, fy = K.product_value_grad(fk, fa, fA, fB, foff[p], foff[p + 1], x, y)
        g, gx, gy = K.product_value_grad(gk, ga, gA, gB, goff[p], goff[p + 1], x, y)
        r = np.array([-epsilon * a + y * f, sign[p] * g])
        J = np.array([[-epsilon * da + y * fx, f + y * fy], [sign[p] * gx, sign[p] * gy]])
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(step)):
            return None
        x += step[0]
        y += step[1]
        if abs(step[0]) + abs(step[1]) <= 1e-14 * (1.0 + abs(x) + abs(y)):
            return x, y
    return None


def find_plane_equilibria(
    spec: VectorFieldSpec,
    plane: int,
    epsilon: float | None = None,
    grid: int = OFF_AXIS_GRID,
) -> list[Equilibrium]:
    """Off-axis equilibria inside plane ``P_0j`` with ``y_j > 0``.

    Both component residuals are tabulated on a ``grid x grid`` lattice over
    ``[0, 2n] x (0, 2]``; each cell where both change sign seeds a Newton
    solve. ``epsilon`` overrides the field's own value (``0`` gives the reference
    geometry).
    """
    slot = _plane_slot(spec, plane)
    eps = spec.epsilon if epsilon is None else float(epsilon)
    work = spec if epsilon is None else spec.with_epsilon(eps)
    xs = np.linspace(0.0, 2.0 * spec.n, grid + 1)
    ys = np.linspace(0.0, OFF_AXIS_Y_MAX, grid + 1)[1:]
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    H1, H2 = _plane_residual(spec, slot, X, Y, eps)
    s1 = np.sign(H1)
    s2 = np.sign(H2)

    def changes(s):
        c = np.stack([s[:-1, :-1], s[1:, :-1], s[:-1, 1:], s[1:, 1:]])
        return (c.max(axis=0) > 0) & (c.min(axis=0) < 0) | (c == 0).any(axis=0)

    cells = np.argwhere(changes(s1) & changes(s2))
    found: list[tuple[float, float]] = []
    for i, k in cells:
        x0 = 0.5 * (xs[i] + xs[i + 1])
        y0 = 0.5 * (ys[k] + ys[k + 1])
        sol = _plane_newton(spec, slot, x0, y0, eps)
        if sol is None:
            log.debug("plane %d: Newton seed (%.4f, %.4f) did not converge", plane, x0, y0)
            continue
        x, y = sol
        if y < 1e-9 or not (0.0 <= x <= 2.0 * spec.n) or y > OFF_AXIS_Y_MAX:
            continue
        if any(abs(x - a) <= MERGE_TOL and abs(y - b) <= MERGE_TOL for a, b in found):
            continue
        found.append((x, y))
    found.sort()
    out = []
    for x, y in found:
        z = np.zeros(spec.dim)
        z[0] = x
        z[slot] = y
        eig = np.linalg.eigvals(jacobian(work, z))
        if np.all(np.abs(eig.imag) == 0):
            eig = eig.real
        out.append(
            Equilibrium(
                coords=z, on_axis=False, is_node=False, eigenvalues=eig, plane=plane, epsilon=eps
            )
        )
    return out


def find_all_equilibria(spec: VectorFieldSpec) -> list[Equilibrium]:
    eqs = find_axis_equilibria(spec)
    for j in spec.plane_indices:
        eqs.extend(find_plane_equilibria(spec, j))
    return eqs


def equilibria_to_csv(eqs: Sequence[Equilibrium], dim: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = ["x"] + [f"y{j}" for j in range(1, dim)]
    head += ["on_axis", "is_node", "node_index", "plane"]
    head += [f"eig{i}" for i in range(dim)]
    w.writerow(head)
    for e in eqs:
        row = [repr(float(v)) for v in e.coords]
        row += [int(e.on_axis), int(e.is_node), e.node_index or "", e.plane or ""]
        row += [_fmt_eig(v) for v in e.eigenvalues]
        w.writerow(row)
    return buf.getvalue()


def _fmt_eig(v) -> str:
    v = complex(v)
    if v.imag == 0:
        return repr(v.real)
    return f"{v.real!r}{v.imag:+.17g}j"
