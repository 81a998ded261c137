"""Nullcline geometry inside the invariant planes, as polylines, CSV and SVG."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels as K
from .construct import FactorKind, FactorTerm, VectorFieldSpec
from .dynamics import eval_field
from .errors import InvalidArgumentError

EPS_ZERO = "eps-zero"
EPS_ACTUAL = "eps-actual"
Y_MAX = 2.0
DEGENERATE = 1e-10
POLISH_TOL = 1e-8


@dataclass
class NullclineCurve:
    plane: int
    which: str  # "x" or "y"
    source_factor: FactorTerm | None
    points: np.ndarray
    axis_intersections: tuple[float, ...]
    curve_id: str = ""
    epsilon: float = 0.0
    complete: bool = True
    dropped: int = 0


def _slot(spec: VectorFieldSpec, plane: int) -> int:
    if plane not in spec.plane_indices:
        raise InvalidArgumentError(f"plane {plane} does not exist for n={spec.n}")
    return spec.plane_indices.index(plane) + 1


def _in_box(pts: np.ndarray, n: int) -> np.ndarray:
    x, y = pts[:, 0], pts[:, 1]
    return (x >= 0.0) & (x <= 2.0 * n) & (y >= 0.0) & (y <= Y_MAX)


def factor_curve(term: FactorTerm, n: int, samples: int) -> np.ndarray:
    """Closed-form zero set of one factor in the upper half plane, clipped to the box."""
    kind = term.kind
    if kind in (FactorKind.PARABOLA_LEFT, FactorKind.PARABOLA_RIGHT):
        # x = anchor -/+ y^2; sample y up to the box edge or where x leaves [0, 2n]
        if kind is FactorKind.PARABOLA_LEFT:
            ytop = np.sqrt(max(term.anchor, 0.0))
        else:
            ytop = np.sqrt(max(2.0 * n - term.anchor, 0.0))
        y = np.linspace(0.0, min(Y_MAX, ytop), samples)
        x = term.anchor - y * y if kind is FactorKind.PARABOLA_LEFT else term.anchor + y * y
        pts = np.column_stack([x, y])
    elif kind in (FactorKind.CIRCLE_LEFT, FactorKind.CIRCLE_RIGHT):
        th = np.linspace(0.0, np.pi, samples)
        pts = np.column_stack([term.center + 0.5 * np.cos(th), 0.5 * np.sin(th)])
        pts[[0, -1], 1] = 0.0  # sin(pi) is not exactly zero
    elif kind is FactorKind.WIDE_ELLIPSE:
        th = np.linspace(0.0, np.pi, samples)
        rx = np.sqrt(term.b)
        ry = np.sqrt(term.b / term.a)
        pts = np.column_stack([term.anchor + rx * np.cos(th), ry * np.sin(th)])
        pts[[0, -1], 1] = 0.0
    else:
        raise InvalidArgumentError(f"no in-plane curve for factor kind {kind.value}")
    return pts[_in_box(pts, n)]


def _axis_hits(term: FactorTerm, n: int) -> tuple[float, ...]:
    return tuple(r for r in term.axis_intersections() if 0.0 <= r <= 2.0 * n)


def _polish_x(spec: VectorFieldSpec, slot: int, x0: float, y: float, eps: float):
    """Newton in ``x`` at fixed ``y`` onto ``-eps*A(x) + y*f(x, y) = 0``."""
    _, roots, fk, fa, fA, fB, foff, *_ = spec.packed
    p = slot - 1
    x = x0
    for _ in range(50):
        a, da = K.axis_value_grad(roots, x)
        f, fx, _ = K.product_value_grad(fk, fa, fA, fB, foff[p], foff[p + 1], x, y)
        h = -eps * a + y * f
        dh = -eps * da + y * fx
        scale = abs(eps * a) + abs(y * f) + 1e-300
        if abs(h) <= POLISH_TOL * scale or h == 0.0:
            return x
        if dh == 0.0 or not np.isfinite(dh):
            return None
        step = h / dh
        x -= step
        if not np.isfinite(x) or abs(x - x0) > 0.5:
            return None
    a, _ = K.axis_value_grad(roots, x)
    f = K.product_value(fk, fa, fA, fB, foff[p], foff[p + 1], x, y)
    h = -eps * a + y * f
    return x if abs(h) <= POLISH_TOL * (abs(eps * a) + abs(y * f)) else None


def sample_nullclines(
    spec: VectorFieldSpec,
    plane: int,
    samples_per_curve: int = 200,
    mode: str = EPS_ZERO,
) -> list[NullclineCurve]:
    """One curve per factor of ``f_j`` (x-nullclines) and ``g_j`` (y-nullclines).

    The coordinate axis itself, which is a nullcline of both components
    through the explicit ``y_j`` factor, is not emitted. In ``eps-actual``
    mode the x-curves are polished onto the perturbed nullcline and the
    near-axis branch ``y = eps*A(x)/f_j(x, 0)`` is added where it is positive.
    """
    if samples_per_curve < 16:
        raise InvalidArgumentError("samples_per_curve must be at least 16")
    if mode not in (EPS_ZERO, EPS_ACTUAL):
        raise InvalidArgumentError(f"unknown nullcline mode {mode!r}")
    slot = _slot(spec, plane)
    comp = spec.planes[slot - 1]
    eps = 0.0 if mode == EPS_ZERO else spec.epsilon
    curves: list[NullclineCurve] = []
    for i, term in enumerate(comp.f):
        pts = factor_curve(term, spec.n, samples_per_curve)
        dropped = 0
        if mode == EPS_ACTUAL:
            kept = []
            for x0, y in pts:
                if y == 0.0:
                    # the perturbed nullcline leaves the axis; the root stays put
                    kept.append((x0, y))
                    continue
                x = _polish_x(spec, slot, x0, y, eps)
                if x is None:
                    dropped += 1
                else:
                    kept.append((x, y))
            pts = np.array(kept).reshape(-1, 2)
        curves.append(
            NullclineCurve(
                plane, "x", term, pts, _axis_hits(term, spec.n), f"f{plane}.{i}", eps,
                complete=dropped == 0, dropped=dropped,
            )
        )
    if mode == EPS_ACTUAL:
        xs = np.linspace(0.0, 2.0 * spec.n, samples_per_curve * 4)
        f0 = comp.f_value(xs, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ystar = eps * spec.axis.evaluate(xs) / f0
        ok = np.isfinite(ystar) & (ystar > 0) & (ystar <= Y_MAX)
        if ok.any():
            curves.append(
                NullclineCurve(plane, "x", None, np.column_stack([xs[ok], ystar[ok]]), (),
                               f"f{plane}.axis", eps)
            )
    for i, term in enumerate(comp.g):
        pts = factor_curve(term, spec.n, samples_per_curve)
        curves.append(
            NullclineCurve(plane, "y", term, pts, _axis_hits(term, spec.n), f"g{plane}.{i}", eps)
        )
    return curves


def defining_residual(spec: VectorFieldSpec, curve: NullclineCurve) -> np.ndarray:
    """Value of the expression each point is supposed to zero, relative where needed."""
    x, y = curve.points[:, 0], curve.points[:, 1]
    if curve.epsilon == 0.0 or curve.which == "y":
        return np.asarray(curve.source_factor.evaluate(x, y), dtype=float)
    comp = spec.plane(curve.plane)
    a = curve.epsilon * spec.axis.evaluate(x)
    yf = y * comp.f_value(x, y)
    return np.abs(-a + yf) / (np.abs(a) + np.abs(yf) + 1e-300)


def _lift(spec: VectorFieldSpec, plane: int, x: float, y: float) -> np.ndarray:
    z = np.zeros(spec.dim)
    z[0] = x
    z[_slot(spec, plane)] = y
    return z


def crossing_direction(spec: VectorFieldSpec, curve: NullclineCurve, point) -> int:
    """Sign of the field component that crosses ``curve`` at ``point``.

    ``y_j'`` across x-nullclines and ``x'`` across y-nullclines, evaluated at
    the curve's epsilon. Returns 0 when the component is below 1e-10.
    """
    x, y = float(point[0]), float(point[1])
    work = spec.with_epsilon(curve.epsilon)
    v = eval_field(work, _lift(spec, curve.plane, x, y))
    comp = v[_slot(spec, curve.plane)] if curve.which == "x" else v[0]
    if abs(comp) < DEGENERATE:
        return 0
    return 1 if comp > 0 else -1


def axis_flow_sign(spec: VectorFieldSpec, x: float) -> int:
    """Direction of the flow along the x-axis at ``x``."""
    v = -spec.epsilon * float(spec.axis.evaluate(x))
    if abs(v) < DEGENERATE * spec.epsilon:
        return 0
    return 1 if v > 0 else -1


def curve_normal(curve: NullclineCurve, index: int) -> np.ndarray:
    """Unit normal of the factor's zero set at sample ``index``."""
    x, y = curve.points[index]
    gx, gy = curve.source_factor.gradient(x, y)
    g = np.array([gx, gy], dtype=float)
    return g / np.linalg.norm(g)


def curves_to_csv(curves: Sequence[NullclineCurve]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["plane", "curve_id", "which", "x", "y"])
    for c in curves:
        for x, y in c.points:
            w.writerow([c.plane, c.curve_id, c.which, repr(float(x)), repr(float(y))])
    return buf.getvalue()


@dataclass
class SvgStyle:
    width: int = 900
    height: int = 320
    margin: int = 30
    x_color: str = "#1f4fbf"
    y_color: str = "#c62828"
    overlay_color: str = "#555555"


def curves_to_svg(
    spec: VectorFieldSpec,
    plane: int,
    curves: Sequence[NullclineCurve],
    overlays: Sequence[np.ndarray] = (),
    style: SvgStyle | None = None,
) -> str:
    """Single-plane drawing: x-nullclines solid, y-nullclines dashed, nodes as dots."""
    st = style or SvgStyle()
    x_lo, x_hi = -0.5, 2.0 * spec.n + 0.5
    y_lo, y_hi = -0.1, Y_MAX + 0.1
    sx = (st.width - 2 * st.margin) / (x_hi - x_lo)
    sy = (st.height - 2 * st.margin) / (y_hi - y_lo)

    def px(x, y):
        return st.margin + (x - x_lo) * sx, st.height - st.margin - (y - y_lo) * sy

    def path(pts):
        coords = " ".join(f"{a:.2f},{b:.2f}" for a, b in (px(x, y) for x, y in pts))
        return coords

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{st.width}" height="{st.height}" '
        f'viewBox="0 0 {st.width} {st.height}">',
        f'<title>n={spec.n} plane P0{plane}</title>',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    ax0, ay0 = px(x_lo, 0.0)
    ax1, _ = px(x_hi, 0.0)
    out.append(f'<line x1="{ax0:.2f}" y1="{ay0:.2f}" x2="{ax1:.2f}" y2="{ay0:.2f}" stroke="black" stroke-width="1"/>')
    for c in curves:
        if len(c.points) < 2:
            continue
        if c.which == "x":
            attrs = f'stroke="{st.x_color}" stroke-width="1.6"'
        else:
            attrs = f'stroke="{st.y_color}" stroke-width="1.6" stroke-dasharray="6,4"'
        out.append(f'<polyline id="{c.curve_id}" class="{c.which}-nullcline" fill="none" {attrs} points="{path(c.points)}"/>')
    for i, traj in enumerate(overlays):
        out.append(
            f'<polyline id="trajectory{i}" fill="none" stroke="{st.overlay_color}" stroke-width="1" '
            f'points="{path(traj)}"/>'
        )
    for k in range(1, spec.n + 1):
        cx, cy = px(2 * k - 1, 0.0)
        out.append(f'<circle class="node" cx="{cx:.2f}" cy="{cy:.2f}" r="4" fill="black"/>')
        out.append(f'<text x="{cx:.2f}" y="{cy + 16:.2f}" font-size="11" text-anchor="middle">{k}</text>')
    out.append(f'<text x="{st.margin}" y="{st.margin - 10}" font-size="13">P0{plane}, n={spec.n}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
