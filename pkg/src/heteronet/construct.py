"""Factored polynomial vector fields realising DNN graphs.

The field lives on coordinates ``(x, y_1, ..., y_m)`` with ``m <= 5``::

    x'   = -eps * prod_{k=1}^{2n-1} (x - k) + sum_j y_j * f_j(x, y_j)
    y_j' = sign_j * y_j * g_j(x, y_j)

Every ``f_j`` and ``g_j`` is a product of conic factors (parabolas, half-unit
circles, wide ellipses). Nodes sit on the x-axis at ``x = 2k - 1``. Values
are always computed from the factors; nothing is expanded to monomials.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CalibrationError, InvalidArgumentError, UnsupportedError

MAX_NODES = 40
EXPLICIT_NODE_COUNTS = (3, 4, 5, 6)


class FactorKind(str, Enum):
    PARABOLA_RIGHT = "ParabolaRight"
    PARABOLA_LEFT = "ParabolaLeft"
    CIRCLE_RIGHT = "CircleRightCentered"
    CIRCLE_LEFT = "CircleLeftCentered"
    WIDE_ELLIPSE = "WideEllipse"
    AXIS_PRODUCT = "AxisProduct"


# integer codes consumed by the compiled kernels
KIND_CODES = {
    FactorKind.PARABOLA_RIGHT: 0,
    FactorKind.PARABOLA_LEFT: 1,
    FactorKind.CIRCLE_RIGHT: 2,
    FactorKind.CIRCLE_LEFT: 3,
    FactorKind.WIDE_ELLIPSE: 4,
}


@dataclass(frozen=True)
class FactorTerm:
    """One conic factor of a field component, in parameter form.

    ``anchor`` is the x-intercept for parabolas, the node position for the
    half-unit circles (which pass through it), and the centre for wide
    ellipses. ``a`` and ``b`` are only meaningful for wide ellipses and
    ``axis_roots`` only for the axis product.
    """

    kind: FactorKind
    anchor: float = 0.0
    a: float = 0.0
    b: float = 0.0
    axis_roots: tuple[int, ...] = ()

    def evaluate(self, x, y=0.0):
        """Value at ``(x, y)``; broadcasts over numpy arrays."""
        kind = self.kind
        if kind is FactorKind.AXIS_PRODUCT:
            out = np.ones_like(np.asarray(x, dtype=float))
            for k in self.axis_roots:
                out = out * (x - k)
            return out
        y2 = y * y
        if kind is FactorKind.PARABOLA_RIGHT:
            return y2 - x + self.anchor
        if kind is FactorKind.PARABOLA_LEFT:
            return -y2 - x + self.anchor
        if kind is FactorKind.CIRCLE_RIGHT:
            d = x - (self.anchor + 0.5)
            return y2 + d * d - 0.25
        if kind is FactorKind.CIRCLE_LEFT:
            d = x - (self.anchor - 0.5)
            return y2 + d * d - 0.25
        d = x - self.anchor
        return self.a * y2 + d * d - self.b

    def gradient(self, x, y=0.0):
        """Partial derivatives ``(d/dx, d/dy)``."""
        kind = self.kind
        if kind is FactorKind.AXIS_PRODUCT:
            value = 1.0
            deriv = 0.0
            for k in self.axis_roots:
                deriv = deriv * (x - k) + value
                value = value * (x - k)
            return deriv, 0.0 * x
        if kind is FactorKind.PARABOLA_RIGHT:
            return -1.0 + 0.0 * x, 2.0 * y
        if kind is FactorKind.PARABOLA_LEFT:
            return -1.0 + 0.0 * x, -2.0 * y
        if kind is FactorKind.CIRCLE_RIGHT:
            return 2.0 * (x - (self.anchor + 0.5)), 2.0 * y
        if kind is FactorKind.CIRCLE_LEFT:
            return 2.0 * (x - (self.anchor - 0.5)), 2.0 * y
        return 2.0 * (x - self.anchor), 2.0 * self.a * y

    @property
    def center(self) -> float:
        if self.kind is FactorKind.CIRCLE_RIGHT:
            return self.anchor + 0.5
        if self.kind is FactorKind.CIRCLE_LEFT:
            return self.anchor - 0.5
        return self.anchor

    def axis_intersections(self) -> tuple[float, ...]:
        """Real zeros of the factor restricted to ``y = 0``."""
        kind = self.kind
        if kind is FactorKind.AXIS_PRODUCT:
            return tuple(float(k) for k in self.axis_roots)
        if kind in (FactorKind.PARABOLA_LEFT, FactorKind.PARABOLA_RIGHT):
            return (self.anchor,)
        if kind in (FactorKind.CIRCLE_LEFT, FactorKind.CIRCLE_RIGHT):
            return (self.center - 0.5, self.center + 0.5)
        r = math.sqrt(self.b)
        return (self.anchor - r, self.anchor + r)

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind.value, "anchor": self.anchor}
        if self.kind is FactorKind.WIDE_ELLIPSE:
            out["a"] = self.a
            out["b"] = self.b
            out["c"] = self.anchor
        if self.kind is FactorKind.AXIS_PRODUCT:
            out["axis_roots"] = list(self.axis_roots)
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "FactorTerm":
        return cls(
            kind=FactorKind(data["kind"]),
            anchor=float(data.get("anchor", 0.0)),
            a=float(data.get("a", 0.0)),
            b=float(data.get("b", 0.0)),
            axis_roots=tuple(int(k) for k in data.get("axis_roots", ())),
        )

    def describe(self, var: str = "y") -> str:
        kind = self.kind
        if kind is FactorKind.AXIS_PRODUCT:
            lo, hi = min(self.axis_roots), max(self.axis_roots)
            return f"prod_{{k={lo}}}^{{{hi}}} (x-k)"
        if kind is FactorKind.PARABOLA_RIGHT:
            return f"({var}^2 - x + {_num(self.anchor)})"
        if kind is FactorKind.PARABOLA_LEFT:
            return f"(-{var}^2 - x + {_num(self.anchor)})"
        if kind in (FactorKind.CIRCLE_LEFT, FactorKind.CIRCLE_RIGHT):
            return f"({var}^2 + (x - {_num(self.center)})^2 - 1/4)"
        return f"({_num(self.a)}*{var}^2 + (x - {_num(self.anchor)})^2 - {_num(self.b)})"


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def node_x(k: int) -> float:
    """x-coordinate of node ``k`` (1-based)."""
    return float(2 * k - 1)


def parabola_right(anchor: float) -> FactorTerm:
    return FactorTerm(FactorKind.PARABOLA_RIGHT, float(anchor))


def parabola_left(anchor: float) -> FactorTerm:
    return FactorTerm(FactorKind.PARABOLA_LEFT, float(anchor))


def circle_right(k: int) -> FactorTerm:
    """Half-unit circle through node ``k`` and the equilibrium to its right."""
    return FactorTerm(FactorKind.CIRCLE_RIGHT, node_x(k))


def circle_left(k: int) -> FactorTerm:
    """Half-unit circle through node ``k`` and the equilibrium to its left."""
    return FactorTerm(FactorKind.CIRCLE_LEFT, node_x(k))


def wide_ellipse(a: float, b: float, c: float) -> FactorTerm:
    return FactorTerm(FactorKind.WIDE_ELLIPSE, float(c), float(a), float(b))


def axis_product(n: int) -> FactorTerm:
    return FactorTerm(FactorKind.AXIS_PRODUCT, axis_roots=tuple(range(1, 2 * n)))


@dataclass(frozen=True)
class PlaneComponents:
    """The two factor lists attached to plane ``P_0j``.

    ``f`` multiplies ``y_j`` in the x-equation; ``sign * y_j * prod(g)`` is
    the y_j-equation.
    """

    plane: int
    f: tuple[FactorTerm, ...]
    sign: int
    g: tuple[FactorTerm, ...]

    def f_value(self, x, y):
        return _product(self.f, x, y)

    def g_value(self, x, y):
        return self.sign * _product(self.g, x, y)


def _product(factors: Iterable[FactorTerm], x, y):
    out = 1.0
    for t in factors:
        out = out * t.evaluate(x, y)
    return out


@dataclass(frozen=True)
class VectorFieldSpec:
    n: int
    epsilon: float
    axis: FactorTerm
    planes: tuple[PlaneComponents, ...]
    mode: str = "general"

    @property
    def dim(self) -> int:
        return len(self.planes) + 1

    @property
    def node_positions(self) -> tuple[float, ...]:
        return tuple(node_x(k) for k in range(1, self.n + 1))

    @property
    def plane_indices(self) -> tuple[int, ...]:
        return tuple(p.plane for p in self.planes)

    def plane(self, j: int) -> PlaneComponents:
        for p in self.planes:
            if p.plane == j:
                return p
        raise InvalidArgumentError(f"plane {j} does not exist for n={self.n}")

    def node_point(self, k: int) -> np.ndarray:
        pt = np.zeros(self.dim)
        pt[0] = node_x(k)
        return pt

    def domain_box(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """``((x_lo, x_hi), (y_lo, y_hi))`` where trajectories are followed."""
        return (-1.0, 2.0 * self.n + 1.0), (0.0, 4.0)

    def with_epsilon(self, epsilon: float) -> "VectorFieldSpec":
        return replace(self, epsilon=float(epsilon))

    @cached_property
    def packed(self) -> tuple:
        """Flat arrays describing the factors, for the compiled kernels."""
        def flatten(lists):
            kinds, anchors, aa, bb, offsets = [], [], [], [], [0]
            for factors in lists:
                for t in factors:
                    kinds.append(KIND_CODES[t.kind])
                    anchors.append(t.anchor)
                    aa.append(t.a)
                    bb.append(t.b)
                offsets.append(len(kinds))
            return (
                np.array(kinds, dtype=np.int64),
                np.array(anchors, dtype=np.float64),
                np.array(aa, dtype=np.float64),
                np.array(bb, dtype=np.float64),
                np.array(offsets, dtype=np.int64),
            )

        fk, fa, fA, fB, foff = flatten([p.f for p in self.planes])
        gk, ga, gA, gB, goff = flatten([p.g for p in self.planes])
        sign = np.array([float(p.sign) for p in self.planes])
        roots = np.array(self.axis.axis_roots, dtype=np.float64)
        return (float(self.epsilon), roots, fk, fa, fA, fB, foff, gk, ga, gA, gB, goff, sign)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "dim": self.dim,
            "mode": self.mode,
            "epsilon": self.epsilon,
            "node_positions": list(self.node_positions),
            "x_component": {"scale": -self.epsilon, "axis": self.axis.to_dict()},
            "planes": [
                {
                    "plane": p.plane,
                    "f": [t.to_dict() for t in p.f],
                    "sign": p.sign,
                    "g": [t.to_dict() for t in p.g],
                }
                for p in self.planes
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: Mapping) -> "VectorFieldSpec":
        planes = tuple(
            PlaneComponents(
                plane=int(p["plane"]),
                f=tuple(FactorTerm.from_dict(t) for t in p["f"]),
                sign=int(p["sign"]),
                g=tuple(FactorTerm.from_dict(t) for t in p["g"]),
            )
            for p in data["planes"]
        )
        return cls(
            n=int(data["n"]),
            epsilon=float(data["epsilon"]),
            axis=FactorTerm.from_dict(data["x_component"]["axis"]),
            planes=planes,
            mode=str(data.get("mode", "general")),
        )

    @classmethod
    def from_json(cls, text: str) -> "VectorFieldSpec":
        return cls.from_dict(json.loads(text))

    def factor_multisets(self) -> dict[str, Counter]:
        """Per-component factor multisets, for order-free comparison."""
        out: dict[str, Counter] = {"axis": Counter([self.axis])}
        for p in self.planes:
            out[f"f{p.plane}"] = Counter(p.f)
            out[f"g{p.plane}"] = Counter(p.g) + Counter({("sign", p.sign): 1})
        return out

    def equations(self) -> str:
        """Human-readable factored system, one component per block."""
        lines = [f"# DNN field, n={self.n}, dim={self.dim}, mode={self.mode}, eps={self.epsilon!r}"]
        lines.append(f"x' = -eps * {self.axis.describe()}")
        for p in self.planes:
            var = f"y{p.plane}"
            body = " * ".join(t.describe(var) for t in p.f)
            lines.append(f"     + {var} * {body}")
        for p in self.planes:
            var = f"y{p.plane}"
            lead = "" if p.sign > 0 else "-"
            body = " * ".join(t.describe(var) for t in p.g)
            lines.append(f"{var}' = {lead}{var} * {body}")
        return "\n".join(lines) + "\n"


# -- index sets ---------------------------------------------------------------


@dataclass(frozen=True)
class IndexSets:
    """Which node gets which x-nullcline factor in each plane.

    ``I_plus[j]``: nodes with a circle to their right, ``I_minus[j]``: to
    their left; every other node gets a left-opening parabola through it.
    ``I_tilde[j]``: nodes ``k`` whose right neighbour ``x = 2k`` needs its own
    left parabola because no circle passes through it.
    """

    n: int
    I_plus: Mapping[int, frozenset[int]]
    I_minus: Mapping[int, frozenset[int]]
    I_tilde: Mapping[int, frozenset[int]] = field(default_factory=dict)

    def targets(self, j: int) -> frozenset[int]:
        return frozenset(range(1, self.n + 1)) - self.I_plus[j] - self.I_minus[j]


def _residue_targets(j: int, n: int) -> list[int]:
    return list(range(j, n + 1, 3))


def index_sets(n: int) -> IndexSets:
    if n < 4:
        raise UnsupportedError(f"the general construction starts at n=4, got n={n}")
    everything = frozenset(range(1, n + 1))
    plus: dict[int, frozenset[int]] = {
        1: frozenset(),
        2: frozenset({1}),
    }
    minus: dict[int, frozenset[int]] = {
        1: frozenset(range(2, n + 1)),
        2: frozenset(range(3, n + 1)),
    }
    tilde: dict[int, frozenset[int]] = {}
    tail = {
        0: {3: (), 4: (n - 1, n), 5: (n,)},
        1: {3: (n,), 4: (), 5: (n - 1, n)},
        2: {3: (n - 1, n), 4: (n,), 5: ()},
    }[n % 3]
    for j in range(3, 6):
        targets = _residue_targets(j, n)
        minus[j] = frozenset(tail[j])
        plus[j] = everything - frozenset(targets) - minus[j]
        # one extra parabola between consecutive targets; none after the last
        tilde[j] = frozenset(targets[:-1])
    return IndexSets(n=n, I_plus=plus, I_minus=minus, I_tilde=tilde)


# -- ellipse parameters -------------------------------------------------------

_PUBLISHED_ELLIPSES = {1: (4.0, 0.5), 2: (16.0, 3.0), 3: (64.0, 7.0)}


def ellipse_height_width(l: int) -> tuple[float, float]:
    """``(a, b)`` for an ellipse covering ``l`` consecutive half-unit circles.

    Needs ``a > b > (l - 1/2)^2``. The three published choices are reused;
    beyond them ``b`` keeps a fixed 3/4 margin and ``a`` is capped so the
    ellipse does not flatten without bound.
    """
    if l < 1:
        raise InvalidArgumentError(f"ellipse coverage count must be >= 1, got {l}")
    if l in _PUBLISHED_ELLIPSES:
        return _PUBLISHED_ELLIPSES[l]
    b = (l - 0.5) ** 2 + 0.75
    a = float(min(4**l, 2**10))
    return max(a, 2.0 * b), b


def wide_ellipse_params(l: int, plane: int) -> tuple[float, float, float]:
    if plane not in (1, 2):
        raise InvalidArgumentError(f"wide ellipses live in planes 1 and 2, got {plane}")
    a, b = ellipse_height_width(l)
    c = l + (1.5 if plane == 1 else 3.5)
    return a, b, c


def _ellipse(l: int, c: float) -> FactorTerm:
    a, b = ellipse_height_width(l)
    return wide_ellipse(a, b, c)


# -- builders -----------------------------------------------------------------


def _check_size(n: int) -> int:
    if int(n) != n:
        raise InvalidArgumentError(f"n must be an integer, got {n!r}")
    n = int(n)
    if n > MAX_NODES:
        raise InvalidArgumentError(
            f"n={n} exceeds the supported maximum of {MAX_NODES}: the axis "
            "product grows towards floating-point overflow near the domain edges"
        )
    return n


def _check_epsilon(epsilon: float) -> float:
    if not epsilon > 0 or not math.isfinite(epsilon):
        raise InvalidArgumentError(f"epsilon must be a positive finite number, got {epsilon!r}")
    return float(epsilon)


def build_explicit(n: int, epsilon: float) -> VectorFieldSpec:
    """Hand-written systems for ``n`` in 3..6 (dimensions 4, 5, 6, 6)."""
    n = _check_size(n)
    if n not in EXPLICIT_NODE_COUNTS:
        raise InvalidArgumentError(f"explicit systems exist for n in 3..6 only, got n={n}")
    epsilon = _check_epsilon(epsilon)
    xi = node_x
    Pp, Pm, Ep, Em = parabola_right, parabola_left, circle_right, circle_left
    E1 = lambda c: wide_ellipse(4, 0.5, c)  # noqa: E731
    E2 = lambda c: wide_ellipse(16, 3, c)  # noqa: E731
    E3 = lambda c: wide_ellipse(64, 7, c)  # noqa: E731

    if n == 3:
        planes = [
            (1, [Pm(xi(1)), Em(2), Em(3)], -1, [Pp(xi(1) + 0.5)]),
            (2, [Pm(xi(2)), Ep(1), Em(3)], 1, [Pm(xi(2) - 0.5), Pp(xi(2) + 0.5)]),
            (3, [Pm(xi(3)), Ep(1), Ep(2)], 1, [Pm(xi(3) - 0.5)]),
        ]
    elif n == 4:
        planes = [
            (1, [Pm(xi(1)), Em(2), Em(3), Em(4)], -1,
             [Pp(xi(1) + 0.5), E1(xi(2) - 0.5)]),
            (2, [Pm(xi(2)), Ep(1), Em(3), Em(4)], 1,
             [Pm(xi(2) - 0.5), Pp(xi(2) + 0.5), E1(xi(3) - 0.5)]),
            (3, [Pm(xi(3)), Ep(1), Ep(2), Em(4)], 1,
             [Pm(xi(3) - 0.5), Pm(xi(3) + 0.5), E1(xi(4) - 0.5)]),
            (4, [Pm(xi(4)), Ep(1), Ep(2), Ep(3)], 1,
             [Pm(xi(4) - 0.5), E1(xi(1) + 0.5)]),
        ]
    elif n == 5:
        planes = [
            (1, [Pm(xi(1)), Em(2), Em(3), Em(4), Em(5)], -1,
             [Pp(xi(1) + 0.5), E2(xi(2) + 0.5)]),
            (2, [Pm(xi(2)), Ep(1), Em(3), Em(4), Em(5)], 1,
             [Pm(xi(2) - 0.5), Pp(xi(2) + 0.5), E2(xi(3) + 0.5)]),
            (3, [Pm(xi(3)), Ep(1), Ep(2), Em(4), Em(5)], 1,
             [Pm(xi(3) - 0.5), Pm(xi(3) + 0.5), E2(xi(4) + 0.5)]),
            (4, [Pm(xi(4)), Ep(1), Ep(2), Ep(3), Em(5)], 1,
             [Pm(xi(4) - 0.5), Pm(xi(4) + 0.5), E1(xi(1) + 0.5), E1(xi(5) - 0.5)]),
            (5, [Pm(xi(5)), Ep(1), Ep(2), Ep(3), Ep(4)], 1,
             [Pm(xi(5) - 0.5), E2(xi(2) - 0.5)]),
        ]
    else:
        planes = [
            (1, [Pm(xi(1)), Em(2), Em(3), Em(4), Em(5), Em(6)], -1,
             [Pp(xi(1) + 0.5), E3(xi(3) - 0.5)]),
            (2, [Pm(xi(2)), Ep(1), Em(3), Em(4), Em(5), Em(6)], 1,
             [Pm(xi(2) - 0.5), Pp(xi(2) + 0.5), E3(xi(4) - 0.5)]),
            (3, [Pm(xi(3)), Ep(1), Ep(2), Pm(xi(6)), Ep(4), Ep(5), Pm(xi(3) + 1)], 1,
             [Pm(xi(3) - 0.5), Pm(xi(3) + 0.5), Pm(xi(6) - 0.5)]),
            (4, [Pm(xi(4)), Ep(1), Ep(2), Ep(3), Em(5), Em(6)], 1,
             [Pm(xi(4) - 0.5), Pm(xi(4) + 0.5), E1(xi(1) + 0.5), E2(xi(5) + 0.5)]),
            (5, [Pm(xi(5)), Ep(1), Ep(2), Ep(3), Ep(4), Em(6)], 1,
             [Pm(xi(5) - 0.5), Pm(xi(5) + 0.5), E1(xi(6) - 0.5), E2(xi(2) - 0.5)]),
        ]
    return VectorFieldSpec(
        n=n,
        epsilon=epsilon,
        axis=axis_product(n),
        planes=tuple(PlaneComponents(j, tuple(f), s, tuple(g)) for j, f, s, g in planes),
        mode="explicit",
    )


def _general_f(sets: IndexSets, j: int) -> tuple[FactorTerm, ...]:
    out = []
    for k in range(1, sets.n + 1):
        if k in sets.I_plus[j]:
            out.append(circle_right(k))
        elif k in sets.I_minus[j]:
            out.append(circle_left(k))
        else:
            out.append(parabola_left(node_x(k)))
    for k in sorted(sets.I_tilde.get(j, ())):
        out.append(parabola_left(node_x(k) + 1.0))
    return tuple(out)


def _pair(k: int) -> list[FactorTerm]:
    return [parabola_left(node_x(k) - 0.5), parabola_left(node_x(k) + 0.5)]


def _general_g(n: int, j: int) -> tuple[int, tuple[FactorTerm, ...]]:
    xi = node_x
    if j == 1:
        a, b, c = wide_ellipse_params(n - 3, 1)
        return -1, (parabola_right(xi(1) + 0.5), wide_ellipse(a, b, c))
    if j == 2:
        a, b, c = wide_ellipse_params(n - 3, 2)
        return 1, (
            parabola_left(xi(2) - 0.5),
            parabola_right(xi(2) + 0.5),
            wide_ellipse(a, b, c),
        )
    k, r = divmod(n, 3)
    # (leading factors, last m of the paired-parabola product)
    table = {
        3: {
            0: ([parabola_left(xi(n) - 0.5)], k - 1),
            1: ([_ellipse(1, xi(n) - 0.5)], k),
            2: ([_ellipse(2, xi(n) - 1.5)], k),
        },
        4: {
            0: ([_ellipse(1, xi(1) + 0.5), _ellipse(2, xi(n) - 1.5)], k - 1),
            1: ([parabola_left(xi(n) - 0.5), _ellipse(1, xi(1) + 0.5)], k - 1),
            2: ([_ellipse(1, xi(1) + 0.5), _ellipse(1, xi(n) - 0.5)], k),
        },
        5: {
            0: ([_ellipse(2, xi(1) + 1.5), _ellipse(1, xi(n) - 0.5)], k - 1),
            1: ([_ellipse(2, xi(1) + 1.5), _ellipse(2, xi(n) - 1.5)], k - 1),
            2: ([parabola_left(xi(n) - 0.5), _ellipse(2, xi(1) + 1.5)], k - 1),
        },
    }
    lead, m_max = table[j][r]
    factors = list(lead)
    for m in range(1, m_max + 1):
        factors += _pair(3 * m + (j - 3))
    return 1, tuple(factors)


def build_general(n: int, epsilon: float) -> VectorFieldSpec:
    """General construction for ``n >= 4`` from the index-set formulas.

    Always six-dimensional. For ``n = 4`` plane 5 carries no connection and
    every node is a sink inside it.
    """
    n = _check_size(n)
    if n < 4:
        raise UnsupportedError(
            f"general mode is defined for n >= 4 (got n={n}); use explicit mode for n=3"
        )
    epsilon = _check_epsilon(epsilon)
    sets = index_sets(n)
    planes = []
    for j in range(1, 6):
        sign, g = _general_g(n, j)
        planes.append(PlaneComponents(j, _general_f(sets, j), sign, g))
    return VectorFieldSpec(
        n=n, epsilon=epsilon, axis=axis_product(n), planes=tuple(planes), mode="general"
    )


def build(n: int, epsilon: float = 1e-2, mode: str = "auto") -> VectorFieldSpec:
    """Dispatch on ``mode``: ``explicit``, ``general`` or ``auto``."""
    if mode == "auto":
        mode = "explicit" if n in EXPLICIT_NODE_COUNTS else "general"
    if mode == "explicit":
        return build_explicit(n, epsilon)
    if mode == "general":
        return build_general(n, epsilon)
    raise InvalidArgumentError(f"unknown construction mode {mode!r}")


# -- epsilon calibration --------------------------------------------------------

EPSILON_GRID = tuple(float(f"1e-{k}") for k in range(0, 31))


def calibrate_epsilon(spec: VectorFieldSpec, kappa: float = 0.01, grid_points: int = 1000) -> float:
    """Largest decade ``eps`` keeping the axis term a ``kappa``-perturbation.

    Compares ``max |eps * axis(x)|`` against ``kappa`` times the smallest (over
    planes) of ``max |f_j(x, 0)|`` on a uniform grid over ``[0, 2n]``.
    """
    if kappa < 0 or kappa >= 1:
        raise InvalidArgumentError(f"kappa must lie in (0, 1), got {kappa}")
    xs = np.linspace(0.0, 2.0 * spec.n, grid_points)
    axis_max = float(np.max(np.abs(spec.axis.evaluate(xs))))
    plane_max = min(float(np.max(np.abs(p.f_value(xs, 0.0)))) for p in spec.planes)
    bound = kappa * plane_max
    for eps in EPSILON_GRID:
        if eps * axis_max <= bound:
            return eps
    raise CalibrationError(
        f"no epsilon in 1e0..1e-30 satisfies eps*{axis_max:.3e} <= {kappa}*{plane_max:.3e} (n={spec.n})"
    )


def factor_counts(spec: VectorFieldSpec) -> dict[str, int]:
    out = {}
    for p in spec.planes:
        out[f"f{p.plane}"] = len(p.f)
        out[f"g{p.plane}"] = len(p.g)
    return out


def same_factors(a: VectorFieldSpec, b: VectorFieldSpec) -> dict[str, bool]:
    """Per-component multiset equality between two specs."""
    ma, mb = a.factor_multisets(), b.factor_multisets()
    keys: Sequence[str] = sorted(set(ma) | set(mb))
    return {k: ma.get(k) == mb.get(k) for k in keys}
