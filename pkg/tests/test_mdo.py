"""Operator algebra: frozen examples plus the symbol-calculus cross-check."""

from fractions import Fraction

import pytest

from kpcm.errors import (
    EmptySeriesError,
    ScalarModeError,
    TruncationExhaustedError,
    VolterraShapeError,
)
from kpcm.mdo import (
    MicroDiffOp,
    commutator,
    conjugate_derivation,
    is_volterra,
    leibniz_binomial,
    mdo_mul,
    mdo_pow,
    minus_part,
    plus_part,
    volterra_inverse,
)
from kpcm.scalars import Scalar
from kpcm.series import TruncatedSeries, series_derive

from conftest import random_exact_mdo, random_truncated_mdo
from oracles import mdo_to_symbol, sym, sym_equal, sym_mul

D = MicroDiffOp.D_power
T_OP = MicroDiffOp.multiplication_by_t


def op(terms):
    """Exact operator from {degree: poly-coeff-list or int}."""
    built = {}
    for d, v in terms.items():
        if isinstance(v, (int, Fraction)):
            v = [v]
        built[d] = TruncatedSeries.exact_poly(v)
    return MicroDiffOp.from_terms(built)


# --- series -----------------------------------------------------------------


def test_series_derive_polynomial():
    # f = 1 + t + t^2 truncated at T=2 -> 1 + 2t at T=1
    f = TruncatedSeries(
        [Scalar.exact(1), Scalar.exact(1), Scalar.exact(1)], order=2
    )
    df = series_derive(f)
    assert df.order == 1
    assert df.coeffs[0] == Scalar.exact(1)
    assert df.coeffs[1] == Scalar.exact(2)


def test_series_derive_constant_exact():
    f = TruncatedSeries.exact_poly([5])
    assert series_derive(f).is_zero


def test_series_derive_power_rule():
    # t^3/6 at T=3 -> t^2/2 at T=2
    f = TruncatedSeries(
        [Scalar.exact(0)] * 3 + [Scalar.exact(Fraction(1, 6))], order=3
    )
    df = series_derive(f)
    assert df.order == 2
    assert df.coeffs[2] == Scalar.exact(Fraction(1, 2))


def test_series_derive_order_zero_raises():
    f = TruncatedSeries([Scalar.exact(3)], order=0)
    with pytest.raises(EmptySeriesError):
        series_derive(f)


def test_series_mode_mixing_is_an_error():
    f = TruncatedSeries.exact_poly([1])
    g = TruncatedSeries.constant(1.0, mode="approx")
    with pytest.raises(ScalarModeError):
        f + g
    with pytest.raises(ScalarModeError):
        Scalar.exact(1) + Scalar.approx(1.0)


# --- binomials ---------------------------------------------------------------


def test_leibniz_binomials_negative_upper_index():
    assert leibniz_binomial(-1, 0).value.re == 1
    assert leibniz_binomial(-1, 1).value.re == -1
    assert leibniz_binomial(-1, 2).value.re == 1
    assert leibniz_binomial(-2, 3).value.re == -4
    assert leibniz_binomial(3, 2).value.re == 3
    assert leibniz_binomial(2, 5).value.re == 0


# --- composition examples ----------------------------------------------------


def test_D_times_t():
    # D . t = t D + 1
    result = mdo_mul(D(1), T_OP())
    assert result.agrees_with(op({1: [0, 1], 0: 1}))


def test_one_is_identity():
    M = op({3: [1, 2], 0: [5], -2: [0, 0, 7]})
    assert mdo_mul(MicroDiffOp.one(), M).agrees_with(M)
    assert mdo_mul(M, MicroDiffOp.one()).agrees_with(M)


def test_Dinv_times_t():
    # D^-1 . t = t D^-1 - D^-2  (C(-1,0)=1, C(-1,1)=-1, higher derivs of t vanish)
    result = mdo_mul(D(-1), T_OP())
    assert result.agrees_with(op({-1: [0, 1], -2: -1}))


def test_commutator_canonical_relation():
    assert commutator(D(1), T_OP()).agrees_with(op({0: 1}))


def test_commutator_antisymmetry():
    A = op({2: [1, 1], -1: [3]})
    assert commutator(A, A).is_zero


def test_commutator_D2_t():
    assert commutator(mdo_pow(D(1), 2), T_OP()).agrees_with(op({1: 2}))


def test_pow_of_D():
    assert mdo_pow(D(1), 3).agrees_with(D(3))
    L = op({1: 1, -1: [0, 1]})
    assert mdo_pow(L, 1).agrees_with(L)


def test_pow_lax_example():
    # (D + t D^-1)^2 = D^2 + 2t + 1*D^-1 + (t^2 ...) D^-2 ...
    L = op({1: 1, -1: [0, 1]})
    sq = mdo_pow(L, 2)
    assert sq.coeff(2).agrees_with(TruncatedSeries.exact_poly([1]))
    assert sq.coeff(0).agrees_with(TruncatedSeries.exact_poly([0, 2]))
    # independent check via symbol calculus
    sL = mdo_to_symbol(L)
    assert sym_equal(mdo_to_symbol(sq), sym_mul(sL, sL, sq.floor), z_floor=sq.floor)


# --- projections ---------------------------------------------------------------


def test_plus_part_examples():
    M = op({1: 1, -1: [2]})
    assert plus_part(M).agrees_with(D(1))
    assert plus_part(D(-1)).is_zero
    M2 = op({3: [0, 0, 1], 0: 5, -7: 1})
    assert plus_part(M2).agrees_with(op({3: [0, 0, 1], 0: 5}))
    assert minus_part(M2).agrees_with(op({-7: 1}))


def test_projection_split_and_idempotence(rng):
    for _ in range(20):
        M = random_exact_mdo(rng)
        assert (plus_part(M) + minus_part(M)).agrees_with(M)
        assert plus_part(plus_part(M)).agrees_with(plus_part(M))


# --- algebra laws against the oracle -----------------------------------------


def test_mul_matches_symbol_oracle(rng):
    for _ in range(25):
        A = random_exact_mdo(rng, floor=-4, top=2, max_deg=2)
        B = random_exact_mdo(rng, floor=-4, top=2, max_deg=2)
        AB = mdo_mul(A, B)
        want = sym_mul(mdo_to_symbol(A), mdo_to_symbol(B), AB.floor)
        assert sym_equal(mdo_to_symbol(AB), want, z_floor=AB.floor)


def test_associativity_exact(rng):
    for _ in range(15):
        A = random_exact_mdo(rng, floor=-3, top=2, max_deg=2)
        B = random_exact_mdo(rng, floor=-3, top=2, max_deg=2)
        C = random_exact_mdo(rng, floor=-3, top=2, max_deg=2)
        left = mdo_mul(mdo_mul(A, B), C)
        right = mdo_mul(A, mdo_mul(B, C))
        assert left.agrees_with(right)


def test_leibniz_relation_exact(rng):
    # D.f - f.D = f' as multiplication operators
    for _ in range(15):
        coeffs = [Scalar.exact(Fraction(rng.randint(-5, 5), rng.randint(1, 4)))
                  for _ in range(5)]
        f = TruncatedSeries(coeffs, order=None)
        F = MicroDiffOp.from_terms({0: f})
        lhs = commutator(D(1), F)
        assert lhs.agrees_with(MicroDiffOp.from_terms({0: f.derivative()}))


def test_degree_grading_and_principal_symbol(rng):
    for _ in range(15):
        A = random_exact_mdo(rng, floor=-3, top=3)
        B = random_exact_mdo(rng, floor=-2, top=2)
        AB = mdo_mul(A, B)
        assert AB.degree() == A.degree() + B.degree()
        assert AB.principal_symbol().agrees_with(
            A.principal_symbol() * B.principal_symbol()
        )


# --- truncation contract -------------------------------------------------------


def test_truncated_product_bookkeeping(rng):
    A = random_truncated_mdo(rng, floor=-3, top=1, order=6)
    B = random_truncated_mdo(rng, floor=-3, top=1, order=6)
    AB = mdo_mul(A, B)
    # floor: max(A.floor + B.top, A.top + B.floor); order: the Leibniz cost
    assert AB.floor == max(A.floor + B.top, A.top + B.floor)
    assert AB.order == min(6, 6 - (A.top + B.top - AB.floor))
    assert not AB.exact_floor


def test_truncated_associativity_on_common_window(rng):
    for _ in range(10):
        A = random_truncated_mdo(rng, floor=-4, top=1, order=8)
        B = random_truncated_mdo(rng, floor=-4, top=1, order=8)
        C = random_truncated_mdo(rng, floor=-4, top=1, order=8)
        left = mdo_mul(mdo_mul(A, B), C)
        right = mdo_mul(A, mdo_mul(B, C))
        lo = max(left.floor, right.floor)
        order = min(o for o in (left.order, right.order) if o is not None)
        assert left.agrees_with(right, floor=lo, order=order)


def test_window_exhaustion_raises():
    with pytest.raises(TruncationExhaustedError):
        mdo_mul(D(-1), D(-1), floor=0)


# --- Volterra group ------------------------------------------------------------


def test_volterra_identity():
    W = MicroDiffOp.one()
    assert volterra_inverse(W, 4).agrees_with(W)


def test_volterra_constant_geometric_series():
    c = Fraction(3, 2)
    W = op({0: 1, -1: c})
    V = volterra_inverse(W, 4)
    expected = op({0: 1, -1: -c, -2: c * c, -3: -c**3, -4: c**4})
    assert V.agrees_with(expected, floor=-4)


def test_volterra_inverse_t_coefficient():
    W = op({0: 1, -1: [0, 1]})
    V = volterra_inverse(W, 3)
    prod = mdo_mul(W, V, floor=-3)
    assert prod.agrees_with(MicroDiffOp.one(), floor=-3)


def test_volterra_group_law(rng):
    for _ in range(8):
        terms = {0: TruncatedSeries.one()}
        for d in range(1, 4):
            terms[-d] = TruncatedSeries.exact_poly(
                [Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(3)]
            )
        W = MicroDiffOp.from_terms(terms)
        VV = volterra_inverse(volterra_inverse(W, 5), 5)
        assert VV.agrees_with(W, floor=-5)


def test_volterra_shape_error():
    with pytest.raises(VolterraShapeError):
        volterra_inverse(D(1), 3)
    with pytest.raises(VolterraShapeError):
        volterra_inverse(op({0: 2}), 3)


# --- conjugation ----------------------------------------------------------------


def test_conjugate_identity_and_constant():
    assert conjugate_derivation(MicroDiffOp.one(), 4).agrees_with(D(1), floor=-4)
    W = op({0: 1, -1: Fraction(7, 3), -2: -2})
    L = conjugate_derivation(W, 4)
    assert L.agrees_with(D(1), floor=-4)


def test_conjugate_t_coefficient_example():
    # W = 1 + t D^-1:  W D W^-1 = D - D^-1 + t D^-2 + ...
    W = op({0: 1, -1: [0, 1]})
    L = conjugate_derivation(W, 2)
    assert L.coeff(1).agrees_with(TruncatedSeries.exact_poly([1]))
    assert L.coeff(0).is_zero
    assert L.coeff(-1).agrees_with(TruncatedSeries.exact_poly([-1]))
    assert L.coeff(-2).agrees_with(TruncatedSeries.exact_poly([0, 1]))


def test_conjugation_kills_degree_zero(rng):
    for _ in range(8):
        terms = {0: TruncatedSeries.one()}
        for d in range(1, 4):
            terms[-d] = TruncatedSeries.exact_poly(
                [Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(4)]
            )
        W = MicroDiffOp.from_terms(terms)
        L = conjugate_derivation(W, 4)
        assert L.coeff(0).is_zero
        assert L.coeff(1).agrees_with(TruncatedSeries.exact_poly([1]))
        assert is_volterra(W)
