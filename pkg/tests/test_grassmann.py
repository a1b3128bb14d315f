"""Finite Sato-Grassmannian window: transversality, wave operators, flows."""

from fractions import Fraction

import pytest

from kpcm.errors import BigCellError, WindowIndeterminateError
from kpcm.grassmann import (
    FLOW_SIGN,
    FockWindow,
    GrassmannPoint,
    big_cell_test,
    calibrate_flow_sign,
    gamma_flow,
    gamma_minus_act,
    index,
    induced_lax_jet,
    point_to_lax,
    shift_point,
    wave_operator_from_point,
)
from kpcm.kp import LaxOperator, kp_vector_field
from kpcm.mdo import MicroDiffOp
from kpcm.scalars import Scalar
from kpcm.series import TruncatedSeries


def sc(x):
    return Scalar.exact(Fraction(x))


def constant_volterra(tails):
    """1 + sum tails[i] D^-i with constant coefficients."""
    terms = {0: TruncatedSeries.one()}
    for i, c in tails.items():
        terms[-i] = TruncatedSeries.exact_poly([Fraction(c)])
    return MicroDiffOp.from_terms(terms)


WINDOW = FockWindow(5, 6)


def generic_point(window=WINDOW, seed_tails=None):
    """A big-cell point with unrelated echelon tails (not Volterra-generated)."""
    if seed_tails is None:
        seed_tails = {
            (0, -1): Fraction(1, 2), (0, -2): Fraction(-1, 3),
            (1, -1): Fraction(2, 5), (1, -3): Fraction(1, 4),
            (2, -2): Fraction(3, 7), (3, -1): Fraction(-2, 3),
        }
    basis = []
    for k in range(window.M + 1):
        v = {k: sc(1)}
        for (kk, d), c in seed_tails.items():
            if kk == k:
                v[d] = sc(c)
        basis.append(v)
    return GrassmannPoint(window, basis)


# --- transversality and index -------------------------------------------------


def test_base_point_is_in_big_cell():
    P = GrassmannPoint.base_point(WINDOW)
    assert big_cell_test(P)
    assert index(P) == 0


def test_shifted_half_space_fails_big_cell():
    # span{D^k : k >= 1} + {D^-1}: transversality fails, D^-1 lies in the overlap
    basis = [{k: sc(1)} for k in range(1, WINDOW.M + 1)]
    basis.append({-1: sc(1)})
    P = GrassmannPoint(WINDOW, basis)
    assert not big_cell_test(P)
    assert index(P) == 0


def test_tilted_graph_point_in_big_cell():
    # span{D^k + D^(k-2)}: column reduction shows transversality
    basis = []
    for k in range(WINDOW.M + 1):
        v = {k: sc(1)}
        if k - 2 >= -WINDOW.N:
            v[k - 2] = v.get(k - 2, sc(0)) + sc(1)
        basis.append(v)
    P = GrassmannPoint(WINDOW, basis)
    assert big_cell_test(P)


def test_index_examples():
    minus_one = GrassmannPoint(WINDOW, [{k: sc(1)} for k in range(1, WINDOW.M + 1)])
    assert index(minus_one) == -1
    plus_one = GrassmannPoint(WINDOW, [{k: sc(1)} for k in range(-1, WINDOW.M + 1)])
    assert index(plus_one) == 1


def test_index_shift_additivity():
    P = generic_point()
    assert index(P) == 0
    assert index(shift_point(P, -1)) == 1
    assert index(shift_point(P, +1)) == -1


def test_boundary_indeterminacy():
    # the deficient direction lives exactly at the window floor
    basis = [{k: sc(1)} for k in range(1, WINDOW.M + 1)]
    basis.append({-WINDOW.N: sc(1)})
    P = GrassmannPoint(WINDOW, basis)
    with pytest.raises(WindowIndeterminateError):
        big_cell_test(P)


# --- wave operators -------------------------------------------------------------


def test_wave_operator_base_point():
    W = wave_operator_from_point(GrassmannPoint.base_point(WINDOW))
    assert W.agrees_with(MicroDiffOp.one(), floor=-WINDOW.N)


def test_wave_operator_graph_point():
    basis = []
    for k in range(WINDOW.M + 1):
        v = {k: sc(1)}
        if k - 2 >= -WINDOW.N:
            v[k - 2] = v.get(k - 2, sc(0)) + sc(1)
        basis.append(v)
    P = GrassmannPoint(WINDOW, basis)
    W = wave_operator_from_point(P)
    assert W.agrees_with(constant_volterra({2: 1}), floor=-WINDOW.N)


def test_wave_operator_roundtrip():
    W = constant_volterra({1: Fraction(1, 2), 2: Fraction(-2, 3),
                           3: Fraction(1, 5), 4: Fraction(3, 7), 5: Fraction(-1, 6)})
    P = GrassmannPoint.from_volterra(WINDOW, W)
    W2 = wave_operator_from_point(P)
    assert W2.agrees_with(W, floor=-WINDOW.N)


def test_wave_operator_rejects_non_volterra_point():
    P = generic_point()
    with pytest.raises(BigCellError):
        wave_operator_from_point(P)


def test_wave_operator_requires_big_cell():
    basis = [{k: sc(1)} for k in range(1, WINDOW.M + 1)] + [{-1: sc(1)}]
    P = GrassmannPoint(WINDOW, basis)
    with pytest.raises(BigCellError):
        wave_operator_from_point(P)


# --- induced Lax operators -------------------------------------------------------


def test_base_point_gives_pure_derivation():
    L = point_to_lax(GrassmannPoint.base_point(WINDOW), depth=3, t_order=3)
    assert L.op.agrees_with(MicroDiffOp.D_power(1), floor=-3)


def test_constant_volterra_point_gives_pure_derivation():
    W = constant_volterra({1: 1, 2: Fraction(1, 3)})
    P = GrassmannPoint.from_volterra(WINDOW, W)
    L = point_to_lax(P, depth=3, t_order=3)
    assert L.op.agrees_with(MicroDiffOp.D_power(1), floor=-3)


def test_gamma_minus_is_stabilizer():
    P = generic_point()
    c = constant_volterra({1: Fraction(2, 3), 2: Fraction(-1, 4)})
    Q = gamma_minus_act(P, c)
    LP = point_to_lax(P, depth=3, t_order=3)
    LQ = point_to_lax(Q, depth=3, t_order=3)
    assert LP.op.agrees_with(LQ.op, floor=-3, order=3)


def test_flow_fixes_base_point():
    P = GrassmannPoint.base_point(WINDOW)
    jet = gamma_flow(P, (1, 2), 1)
    L = induced_lax_jet(jet, depth=3, t_order=2)
    for alpha, op in L.terms.items():
        if sum(alpha) == 0:
            assert op.agrees_with(MicroDiffOp.D_power(1), floor=-3, order=2)
        else:
            assert op.agrees_with(MicroDiffOp.zero(), floor=-3, order=1)


def test_flow_at_zero_times_is_identity():
    P = generic_point()
    jet = gamma_flow(P, (2,), 1)
    L = induced_lax_jet(jet, depth=3, t_order=2)
    L0 = point_to_lax(P, depth=3, t_order=2)
    assert L.base.agrees_with(L0.op, floor=-3, order=2)


def test_flow_sign_calibration():
    assert calibrate_flow_sign() == FLOW_SIGN


def test_first_flow_matches_bracket_on_generic_point():
    window = FockWindow(5, 8)
    P = generic_point(window)
    jet = gamma_flow(P, (1,), 2)
    L = induced_lax_jet(jet, depth=3, t_order=4)
    base = LaxOperator(L.base)
    lhs = L.time_derivative(1).base
    rhs = kp_vector_field(base, 1, floor=-3)
    assert lhs.agrees_with(rhs, floor=-3, order=3)


@pytest.mark.parametrize("n", [2, 3])
def test_higher_flows_match_bracket(n):
    window = FockWindow(5, 9)
    P = generic_point(window)
    jet = gamma_flow(P, (n,), 1)
    L = induced_lax_jet(jet, depth=3, t_order=4)
    base = LaxOperator(L.base)
    lhs = L.time_derivative(n).base
    rhs = kp_vector_field(base, n, floor=-3)
    assert lhs.agrees_with(rhs, floor=-3, order=2)


def test_window_budget_is_enforced():
    P = generic_point()
    jet = gamma_flow(P, (2,), 1)
    with pytest.raises(WindowIndeterminateError):
        induced_lax_jet(jet, depth=3, t_order=WINDOW.M)
