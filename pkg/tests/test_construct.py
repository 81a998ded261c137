from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heteronet import (
    CalibrationError,
    FactorKind,
    FactorTerm,
    InvalidArgumentError,
    UnsupportedError,
    VectorFieldSpec,
    build,
    build_explicit,
    build_general,
    calibrate_epsilon,
    index_sets,
    wide_ellipse_params,
)
from heteronet.construct import ellipse_height_width, factor_counts, same_factors

PL, PR = FactorKind.PARABOLA_LEFT, FactorKind.PARABOLA_RIGHT
CL, CR = FactorKind.CIRCLE_LEFT, FactorKind.CIRCLE_RIGHT
WE = FactorKind.WIDE_ELLIPSE


# -- factor evaluation --------------------------------------------------------


@given(
    st.floats(-20, 20), st.floats(-3, 3), st.floats(-10, 10),
    st.floats(1.0, 100.0), st.floats(0.1, 10.0),
)
def test_factor_formulas(x, y, anchor, a, b):
    assert FactorTerm(PR, anchor).evaluate(x, y) == pytest.approx(y * y - x + anchor)
    assert FactorTerm(PL, anchor).evaluate(x, y) == pytest.approx(-y * y - x + anchor)
    assert FactorTerm(CR, anchor).evaluate(x, y) == pytest.approx(
        y * y + (x - (anchor + 0.5)) ** 2 - 0.25, abs=1e-9
    )
    assert FactorTerm(CL, anchor).evaluate(x, y) == pytest.approx(
        y * y + (x - (anchor - 0.5)) ** 2 - 0.25, abs=1e-9
    )
    assert FactorTerm(WE, anchor, a, b).evaluate(x, y) == pytest.approx(
        a * y * y + (x - anchor) ** 2 - b, abs=1e-9
    )


def test_axis_product_formula():
    t = build(3, 1.0).axis
    assert t.kind is FactorKind.AXIS_PRODUCT
    assert t.axis_roots == (1, 2, 3, 4, 5)
    assert t.evaluate(0.0) == pytest.approx(-120.0)
    assert t.evaluate(np.arange(1.0, 6.0)).tolist() == [0.0] * 5


@given(st.sampled_from([PL, PR, CL, CR, WE]), st.floats(-5, 5), st.floats(-2, 2), st.floats(0, 10))
def test_factor_gradient_matches_differences(kind, x, y, anchor):
    t = FactorTerm(kind, anchor, 16.0, 3.0)
    h = 1e-6
    gx, gy = t.gradient(x, y)
    assert gx == pytest.approx((t.evaluate(x + h, y) - t.evaluate(x - h, y)) / (2 * h), abs=1e-5)
    assert gy == pytest.approx((t.evaluate(x, y + h) - t.evaluate(x, y - h)) / (2 * h), abs=1e-5)


def test_circle_axis_intersections():
    assert FactorTerm(CL, 3.0).axis_intersections() == (2.0, 3.0)
    assert FactorTerm(CR, 3.0).axis_intersections() == (3.0, 4.0)


# -- explicit systems ---------------------------------------------------------


def test_n3_plane3_g_single_left_parabola():
    g = build_explicit(3, 0.01).plane(3).g
    assert g == (FactorTerm(PL, 4.5),)


def test_n6_plane3_g_three_left_parabolas():
    g = build_explicit(6, 0.01).plane(3).g
    assert sorted((t.kind, t.anchor) for t in g) == [(PL, 4.5), (PL, 5.5), (PL, 10.5)]


def test_n6_plane3_f_has_tilde_parabola_at_six():
    f = build_explicit(6, 0.01).plane(3).f
    assert FactorTerm(PL, 6.0) in f


@pytest.mark.parametrize("n, dim", [(3, 4), (4, 5), (5, 6), (6, 6)])
def test_explicit_dimensions(n, dim):
    assert build_explicit(n, 0.01).dim == dim


@pytest.mark.parametrize("n", [2, 7, 10])
def test_explicit_out_of_range(n):
    with pytest.raises(InvalidArgumentError):
        build_explicit(n, 0.01)


# -- index sets and ellipses --------------------------------------------------


def test_index_sets_planes_one_two():
    for n in (4, 7, 12):
        s = index_sets(n)
        assert s.I_plus[1] == frozenset()
        assert s.I_minus[1] == frozenset(range(2, n + 1))
        assert s.I_plus[2] == frozenset({1})
        assert s.I_minus[2] == frozenset(range(3, n + 1))


@pytest.mark.parametrize(
    "n, j, plus, minus",
    [
        (8, 5, {1, 2, 3, 4, 6, 7}, set()),
        (6, 4, {1, 2, 3}, {5, 6}),
        (7, 3, {1, 2, 4, 5}, {7}),
    ],
)
def test_index_set_examples(n, j, plus, minus):
    s = index_sets(n)
    assert s.I_plus[j] == frozenset(plus)
    assert s.I_minus[j] == frozenset(minus)


@given(st.integers(4, 40))
def test_index_sets_partition(n):
    s = index_sets(n)
    every = frozenset(range(1, n + 1))
    for j in (3, 4, 5):
        targets = frozenset(range(j, n + 1, 3))
        assert s.I_plus[j] | s.I_minus[j] == every - targets
        assert not s.I_plus[j] & s.I_minus[j]
        assert all(t < n for t in s.I_tilde[j])
        assert s.I_tilde[j] == frozenset(sorted(targets)[:-1]) if targets else s.I_tilde[j] == frozenset()


def test_index_sets_reject_small_n():
    with pytest.raises(UnsupportedError):
        index_sets(3)


@pytest.mark.parametrize("l, expected", [(1, (4, 0.5, 2.5)), (2, (16, 3, 3.5)), (3, (64, 7, 4.5))])
def test_wide_ellipse_examples(l, expected):
    assert wide_ellipse_params(l, 1) == expected


@given(st.integers(1, 60))
def test_wide_ellipse_inequalities(l):
    a, b = ellipse_height_width(l)
    assert a > b > (l - 0.5) ** 2


@pytest.mark.parametrize("n", range(4, 41))
def test_emitted_ellipses_respect_bounds(n):
    table = {ellipse_height_width(l): l for l in range(1, 60)}
    spec = build_general(n, 0.01)
    for p in spec.planes:
        for t in p.g:
            if t.kind is WE:
                l = table[(t.a, t.b)]
                assert t.a > t.b > (l - 0.5) ** 2


# -- general mode -------------------------------------------------------------


def test_general_n5_plane4_g():
    g = build_general(5, 0.01).plane(4).g
    expected = [FactorTerm(PL, 6.5), FactorTerm(PL, 7.5), FactorTerm(WE, 1.5, 4, 0.5), FactorTerm(WE, 8.5, 4, 0.5)]
    assert sorted(g, key=repr) == sorted(expected, key=repr)


def test_general_n7_plane4_f():
    f = build_general(7, 0.01).plane(4).f
    kinds = {t.anchor: t.kind for t in f}
    assert kinds[7.0] is PL and kinds[13.0] is PL
    assert kinds[8.0] is PL
    for k in (1, 2, 3, 5, 6):
        assert kinds[2 * k - 1] is CR


@pytest.mark.parametrize("n", [5, 6])
def test_general_equals_explicit(n):
    eq = same_factors(build_general(n, 0.01), build_explicit(n, 0.01))
    assert all(eq.values()), eq


def test_general_n4_extends_explicit():
    gen = build_general(4, 0.01)
    exp = build_explicit(4, 0.01)
    assert gen.dim == 6
    for p in exp.planes:
        q = gen.plane(p.plane)
        assert sorted(q.f, key=repr) == sorted(p.f, key=repr)
        assert sorted(q.g, key=repr) == sorted(p.g, key=repr)
        assert q.sign == p.sign


@given(st.integers(4, 40))
@settings(max_examples=30, deadline=None)
def test_factor_count_law(n):
    spec = build_general(n, 0.01)
    sets = index_sets(n)
    counts = factor_counts(spec)
    for j in range(1, 6):
        assert counts[f"f{j}"] == n + len(sets.I_tilde.get(j, ()))
    assert counts["g1"] == 2
    assert counts["g2"] == 3


@pytest.mark.parametrize("n", [5, 6])
def test_factor_counts_match_explicit(n):
    assert factor_counts(build_general(n, 0.01)) == factor_counts(build_explicit(n, 0.01))


def test_general_rejects_n3():
    with pytest.raises(UnsupportedError):
        build_general(3, 0.01)
    with pytest.raises(UnsupportedError):
        build(3, 0.01, "general")


def test_large_n_guard():
    with pytest.raises(InvalidArgumentError):
        build(41)


@pytest.mark.parametrize("eps", [0.0, -1.0, float("nan"), float("inf")])
def test_bad_epsilon(eps):
    with pytest.raises(InvalidArgumentError):
        build(4, eps)


def test_unknown_mode():
    with pytest.raises(InvalidArgumentError):
        build(4, 0.01, "symbolic")


@given(st.integers(3, 40))
@settings(max_examples=40, deadline=None)
def test_f_axis_identity(n):
    # every x-nullcline meets the axis at the same integers as the axis product
    spec = build(n, 0.01)
    xs = np.linspace(0.0, 2.0 * n, 97) + 0.013
    for p in spec.planes:
        np.testing.assert_allclose(p.f_value(xs, 0.0), -spec.axis.evaluate(xs), rtol=1e-9, atol=1e-9)


# -- serialization ------------------------------------------------------------


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7, 11, 40])
def test_json_round_trip(n):
    spec = build(n, 1e-2)
    text = spec.to_json()
    back = VectorFieldSpec.from_json(text)
    assert back == spec
    assert back.to_json() == text


def test_json_has_factor_kinds():
    data = json.loads(build(3, 0.01).to_json())
    kinds = {t["kind"] for p in data["planes"] for t in p["f"] + p["g"]}
    assert kinds <= {k.value for k in FactorKind}


def test_equations_dump_lists_every_component():
    text = build(4, 0.01).equations()
    for name in ("x'", "y1'", "y2'", "y3'", "y4'"):
        assert name in text


# -- calibration --------------------------------------------------------------


def test_calibrate_n3():
    assert calibrate_epsilon(build(3, 1.0), 0.01) <= 0.1


def test_calibrate_kappa_zero_fails():
    with pytest.raises(CalibrationError):
        calibrate_epsilon(build(3, 1.0), 0.0)


def test_calibrate_monotone_in_n():
    assert calibrate_epsilon(build(10, 1.0)) <= calibrate_epsilon(build(5, 1.0))


@given(st.integers(3, 20), st.floats(1e-6, 0.5))
@settings(max_examples=30, deadline=None)
def test_calibrated_epsilon_satisfies_bound(n, kappa):
    spec = build(n, 1.0)
    eps = calibrate_epsilon(spec, kappa)
    xs = np.linspace(0.0, 2.0 * n, 1000)
    axis_max = np.max(np.abs(spec.axis.evaluate(xs)))
    plane_max = min(np.max(np.abs(p.f_value(xs, 0.0))) for p in spec.planes)
    assert eps * axis_max <= kappa * plane_max
    # the next decade up violates the bound unless eps is already the top of the grid
    assert eps == 1.0 or 10 * eps * axis_max > kappa * plane_max
