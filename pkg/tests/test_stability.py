from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heteronet import (
    CycleSpec,
    InvalidArgumentError,
    analyze_network_cycles,
    build_graph,
    build_transition_matrices,
    classify_cycle,
)
from heteronet.stability import (
    COMPLETELY_UNSTABLE,
    FRAGMENTARILY_STABLE,
    INDETERMINATE,
    NodeRates,
    _classify_section,
    basic_matrix,
    cycle_spec_from_field,
)

from conftest import calibrated


def c13(c11, c33, e13, e31, c32, c14, e12, e34):
    # node 1: in from plane 1, out to plane 3, transverse planes 2 (expanding) and 4 (contracting)
    r1 = NodeRates(1, 1.0, c11, e13, (e12, -c14))
    r3 = NodeRates(3, 1.0, c33, e31, (-c32, e34))
    return CycleSpec((1, 3), (3, 1), (2, 4), (r1, r3))


def test_product_first_column_example():
    td = build_transition_matrices(c13(2, 2, 1, 1, 1, 1, 1, 1))
    M1 = td.products[0]
    np.testing.assert_allclose(M1[:, 0], [4, -1, 1])


def test_c13_basic_matrices_have_displayed_columns():
    cyc = c13(2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0)
    M1, M3 = build_transition_matrices(cyc).basic_matrices
    np.testing.assert_allclose(M1[:, 0], [2 / 5, -17 / 5, 13 / 5])
    np.testing.assert_allclose(M3[:, 0], [3 / 7, 11 / 7, -19 / 7])


def test_unit_rates_indeterminate():
    r = NodeRates(1, 1.0, 1.0, 1.0, (1.0,))
    s = NodeRates(2, 1.0, 1.0, 1.0, (1.0,))
    td = build_transition_matrices(CycleSpec((1, 2), (2, 1), (3,), (r, s)))
    assert abs(td.lambda_max[0] - 1.0) < 1e-12
    assert classify_cycle(td).verdict == INDETERMINATE


def test_two_by_two_eigenvector():
    M = np.array([[2.0, 0.0], [-1.0, 1.0]])
    sec = _classify_section(1, M)
    assert sec.lambda_max == 2.0
    w = np.asarray(sec.w_max)
    w = w / w[0]
    np.testing.assert_allclose(w, [1.0, -1.0], atol=1e-12)
    assert sec.same_sign is False
    assert sec.verdict == COMPLETELY_UNSTABLE


@given(st.floats(1.0 + 1e-6, 1e3), st.floats(-1e3, -1e-6))
@settings(max_examples=1000, deadline=None)
def test_expanding_transverse_breaks_sign_condition(alpha, beta):
    M = np.array([[alpha, 0.0], [beta, 1.0]])
    sec = _classify_section(1, M)
    assert sec.same_sign is False
    assert sec.verdict == COMPLETELY_UNSTABLE


def test_c13_unstable_when_product_small():
    cyc = c13(1.0, 1.0, 2.0, 1.0, 1.0, 1.0, 0.1, 0.1)
    cls = classify_cycle(build_transition_matrices(cyc))
    assert cls.verdict == COMPLETELY_UNSTABLE
    assert all(s.exceeds_one is False for s in cls.sections)


def test_c13_stable_when_all_inequalities_strict():
    # c11 c33 > e13 e31 and every cross term positive
    cyc = c13(c11=3.0, c33=3.0, e13=1.0, e31=1.0, c32=5.0, c14=5.0, e12=0.1, e34=0.1)
    td = build_transition_matrices(cyc)
    for P in td.products:
        assert np.all(P[1:, 0] > 0)
    assert classify_cycle(td).verdict == FRAGMENTARILY_STABLE


@given(
    st.lists(st.floats(0.05, 20.0), min_size=4, max_size=4),
    st.lists(st.floats(-20.0, 20.0).filter(lambda v: abs(v) > 1e-3), min_size=2, max_size=2),
)
@settings(max_examples=200, deadline=None)
def test_both_orders_are_conjugate(rates, trans):
    r1 = NodeRates(1, 1.0, rates[0], rates[1], (trans[0],))
    r2 = NodeRates(2, 1.0, rates[2], rates[3], (trans[1],))
    Ma, Mb = basic_matrix(r1), basic_matrix(r2)
    ev1 = np.sort_complex(np.linalg.eigvals(Ma @ Mb))
    ev2 = np.sort_complex(np.linalg.eigvals(Mb @ Ma))
    np.testing.assert_allclose(ev1, ev2, rtol=1e-9, atol=1e-9)
    sa = _classify_section(1, Ma @ Mb)
    sb = _classify_section(2, Mb @ Ma)
    assert sa.real == sb.real
    assert sa.exceeds_one == sb.exceeds_one


@given(st.lists(st.floats(0.05, 20.0), min_size=3, max_size=3), st.lists(st.floats(-5, 5), min_size=2, max_size=2))
def test_basic_matrix_shape(rates, trans):
    trans = [t if abs(t) > 1e-3 else 1.0 for t in trans]
    M = basic_matrix(NodeRates(1, rates[0], rates[1], rates[2], tuple(trans)))
    assert M.shape == (3, 3)
    np.testing.assert_array_equal(M[:, 1:], np.eye(3)[:, 1:])
    assert M[0, 0] == pytest.approx(rates[1] / rates[2])


@pytest.mark.parametrize("field", ["radial", "contracting", "expanding"])
def test_rates_must_be_positive(field):
    kw = dict(node=1, radial=1.0, contracting=1.0, expanding=1.0)
    kw[field] = 0.0
    with pytest.raises(InvalidArgumentError):
        NodeRates(**kw)


def test_n3_cycles_completely_unstable():
    out = analyze_network_cycles(calibrated(3), build_graph(3))
    assert [a.cycle.nodes for a in out] == [(1, 2), (1, 3), (2, 3)]
    for a in out:
        assert a.verdict == COMPLETELY_UNSTABLE
        assert a.branch == "all-transverse-expanding"
        assert all(t > 0 for r in a.cycle.eigen_data for t in r.transverse)


def test_n4_cycles():
    spec = calibrated(4)
    out = analyze_network_cycles(spec, build_graph(4))
    assert [a.cycle.nodes for a in out] == [(1, 3), (2, 4)]
    a = out[0]
    r1, r3 = a.cycle.eigen_data
    assert a.transition.products[0][0, 0] == pytest.approx(r1.contracting * r3.contracting / (r1.expanding * r3.expanding))
    assert a.verdict == COMPLETELY_UNSTABLE
    d = a.to_dict()
    assert set(d["inequalities"]) == {"section_1", "section_3"}


@pytest.mark.parametrize("n", [6, 7, 9])
def test_no_cycles_for_larger_n(n):
    assert analyze_network_cycles(calibrated(n), build_graph(n)) == []


def test_cycle_spec_reads_jacobian():
    spec = calibrated(3)
    cyc = cycle_spec_from_field(spec, build_graph(3), 1, 2)
    assert cyc.planes == (2, 1)
    assert cyc.transverse_planes == (3,)
    r1 = cyc.eigen_data[0]
    assert r1.contracting == pytest.approx(0.5)
    assert r1.expanding == pytest.approx(3.75)
    assert r1.transverse == pytest.approx((3.5,))


def test_not_a_cycle():
    with pytest.raises(InvalidArgumentError):
        cycle_spec_from_field(calibrated(5), build_graph(5), 1, 2)
