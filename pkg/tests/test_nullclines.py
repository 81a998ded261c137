from __future__ import annotations

import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heteronet import FactorKind, InvalidArgumentError, crossing_direction, eval_field, find_plane_equilibria, sample_nullclines
from heteronet.nullclines import (
    EPS_ACTUAL,
    EPS_ZERO,
    axis_flow_sign,
    curve_normal,
    curves_to_csv,
    curves_to_svg,
    defining_residual,
)

from conftest import calibrated

PL, PR = FactorKind.PARABOLA_LEFT, FactorKind.PARABOLA_RIGHT


def kinds(curves, which):
    return sorted((c.source_factor.kind.value, c.source_factor.anchor) for c in curves if c.which == which)


def test_n3_plane1_layout():
    curves = sample_nullclines(calibrated(3), 1)
    assert kinds(curves, "x") == [
        ("CircleLeftCentered", 3.0), ("CircleLeftCentered", 5.0), ("ParabolaLeft", 1.0),
    ]
    assert kinds(curves, "y") == [("ParabolaRight", 1.5)]


def test_n4_plane1_layout():
    curves = sample_nullclines(calibrated(4), 1)
    assert [k for k, _ in kinds(curves, "x")].count("CircleLeftCentered") == 3
    assert [k for k, _ in kinds(curves, "x")].count("ParabolaLeft") == 1
    assert kinds(curves, "y") == [("ParabolaRight", 1.5), ("WideEllipse", 2.5)]


def test_n3_plane2_opposite_parabolas():
    curves = sample_nullclines(calibrated(3), 2)
    assert kinds(curves, "y") == [("ParabolaLeft", 2.5), ("ParabolaRight", 3.5)]


def test_n6_plane3_parabola_at_six():
    curves = sample_nullclines(calibrated(6), 3)
    hit = [c for c in curves if c.which == "x" and c.source_factor.kind is PL and c.source_factor.anchor == 6.0]
    assert len(hit) == 1
    assert hit[0].axis_intersections == (6.0,)


def test_circle_axis_intersections():
    curves = sample_nullclines(calibrated(3), 1)
    circ = next(c for c in curves if c.source_factor.kind is FactorKind.CIRCLE_LEFT and c.source_factor.anchor == 3.0)
    assert circ.axis_intersections == (2.0, 3.0)


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7, 10])
def test_one_curve_per_factor(n):
    spec = calibrated(n)
    for j in spec.plane_indices:
        curves = sample_nullclines(spec, j)
        p = spec.plane(j)
        assert [c.source_factor for c in curves if c.which == "x"] == list(p.f)
        assert [c.source_factor for c in curves if c.which == "y"] == list(p.g)


@pytest.mark.parametrize("n", [3, 4, 6, 8])
@pytest.mark.parametrize("mode", [EPS_ZERO, EPS_ACTUAL])
def test_residuals(n, mode):
    spec = calibrated(n)
    for j in spec.plane_indices:
        for c in sample_nullclines(spec, j, 64, mode):
            if len(c.points):
                assert np.max(np.abs(defining_residual(spec, c))) <= 1e-8


def test_points_inside_plane_box():
    spec = calibrated(5)
    for j in spec.plane_indices:
        for c in sample_nullclines(spec, j):
            assert np.all(c.points[:, 0] >= 0) and np.all(c.points[:, 0] <= 10)
            assert np.all(c.points[:, 1] >= 0) and np.all(c.points[:, 1] <= 2)


def test_eps_actual_has_no_axis_branch():
    spec = calibrated(4)
    for j in spec.plane_indices:
        curves = sample_nullclines(spec, j, mode=EPS_ACTUAL)
        assert all(c.source_factor is not None for c in curves)
        for c in curves:
            # fixed-y polishing has no root at a circle top, where the tangent is horizontal
            assert c.dropped <= 2
            assert c.complete == (c.dropped == 0)


def test_sample_count_floor():
    with pytest.raises(InvalidArgumentError):
        sample_nullclines(calibrated(3), 1, 15)


def test_unknown_plane_and_mode():
    with pytest.raises(InvalidArgumentError):
        sample_nullclines(calibrated(3), 4)
    with pytest.raises(InvalidArgumentError):
        sample_nullclines(calibrated(3), 1, mode="sketch")


def test_crossing_on_circle_points_up():
    spec = calibrated(3)
    circ = next(c for c in sample_nullclines(spec, 1) if c.which == "x" and c.source_factor.anchor == 3.0)
    top = int(np.argmax(circ.points[:, 1]))
    assert crossing_direction(spec, circ, circ.points[top]) == 1


def test_degenerate_crossing_flagged():
    spec = calibrated(3)
    circ = next(c for c in sample_nullclines(spec, 1) if c.which == "x" and c.source_factor.anchor == 3.0)
    # the endpoint at the axis has y = 0, so y_1' vanishes
    assert crossing_direction(spec, circ, circ.points[0]) == 0


def test_axis_flow_alternates():
    spec = calibrated(3)
    signs = [axis_flow_sign(spec, x) for x in (0.5, 1.5, 2.5, 3.5, 4.5, 5.5)]
    assert signs == [1, -1, 1, -1, 1, -1]
    assert axis_flow_sign(spec, 3.0) == 0


@given(st.integers(5, 195), st.sampled_from([1, 2, 3]))
@settings(max_examples=40, deadline=None)
def test_mirrored_points_across_circle(i, plane):
    spec = calibrated(3)
    zero = spec.with_epsilon(0.0)
    slot = spec.plane_indices.index(plane) + 1
    for c in sample_nullclines(spec, plane):
        if c.which != "x" or c.source_factor.kind not in (FactorKind.CIRCLE_LEFT, FactorKind.CIRCLE_RIGHT):
            continue
        p = c.points[i]
        nrm = curve_normal(c, i)
        sides = []
        for s in (1e-4, -1e-4):
            q = p + s * nrm
            z = np.zeros(spec.dim)
            z[0], z[slot] = q
            sides.append(np.sign(eval_field(zero, z)[0]))
        assert sides[0] == -sides[1] != 0


@pytest.mark.parametrize("n", range(3, 11))
def test_parabolas_do_not_meet(n):
    spec = calibrated(n)
    for j in spec.plane_indices:
        curves = sample_nullclines(spec, j, 400)
        xs = [c for c in curves if c.which == "x" and c.source_factor.kind in (PL, PR)]
        ys = [c for c in curves if c.which == "y" and c.source_factor.kind in (PL, PR)]
        for a in xs:
            for b in ys:
                if a.source_factor.kind is not b.source_factor.kind:
                    continue
                if not len(a.points) or not len(b.points):
                    continue
                d = np.linalg.norm(a.points[:, None, :] - b.points[None, :, :], axis=2)
                assert d.min() > 0.1


def test_off_axis_equilibria_on_curve_intersections():
    spec = calibrated(4)
    eqs = find_plane_equilibria(spec, 1, epsilon=0.0)
    p = spec.plane(1)
    assert len(eqs) == 2
    for e in eqs:
        x, y = e.coords[0], e.coords[1]
        assert min(abs(t.evaluate(x, y)) for t in p.f) <= 1e-6
        assert min(abs(t.evaluate(x, y)) for t in p.g) <= 1e-6


def test_csv_columns():
    text = curves_to_csv(sample_nullclines(calibrated(3), 1, 16))
    lines = text.splitlines()
    assert lines[0] == "plane,curve_id,which,x,y"
    assert all(len(line.split(",")) == 5 for line in lines)


def test_svg_structure():
    spec = calibrated(4)
    curves = sample_nullclines(spec, 1)
    svg = curves_to_svg(spec, 1, curves, overlays=[np.array([[7.0, 0.0], [5.0, 0.5], [1.0, 0.0]])])
    root = ET.fromstring(svg)
    ns = {"s": "http://www.w3.org/2000/svg"}
    lines = root.findall("s:polyline", ns)
    solid = [e for e in lines if e.get("class") == "x-nullcline"]
    dashed = [e for e in lines if e.get("class") == "y-nullcline"]
    assert len(solid) == 4 and len(dashed) == 2
    assert all(e.get("stroke-dasharray") for e in dashed)
    assert not any(e.get("stroke-dasharray") for e in solid)
    assert len(root.findall("s:circle", ns)) == 4
    assert any(e.get("id") == "trajectory0" for e in lines)
