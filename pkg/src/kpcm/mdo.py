"""Microdifferential operators: truncated Laurent series in D = d/dt.

An operator is ``sum_d  a_d(t) D^d`` over a degree window ``[floor, top]``
whose coefficients are :class:`~kpcm.series.TruncatedSeries` sharing one
trunc order.  Composition uses the Leibniz rule

    D^n . f = sum_{i>=0}  C(n, i) f^(i) D^(n-i),

with C(n, i) given by the falling-factorial product, which is the definition
that remains valid for negative n.

Truncation contract
-------------------
Every operation records the tightest ``(floor, order)`` on which its output
is fully determined; consumers must check, not assume.  The i-th Leibniz
term consumes i series orders, and window floors and series orders both
shrink under composition.  Operators whose coefficients are exact
polynomials *and* whose support is genuinely finite (``exact_floor``)
compose exactly, with no information loss.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    ScalarModeError,
    TruncationExhaustedError,
    VolterraShapeError,
)
from .scalars import Scalar
from .series import TruncatedSeries, _min_order


def leibniz_binomial(n: int, i: int, mode="exact"):
    """C(n, i) = n(n-1)...(n-i+1) / i!, valid for all integer n, i >= 0."""
    if i < 0:
        raise ValueError("lower index must be >= 0")
    num = 1
    for k in range(i):
        num *= n - k
    den = 1
    for k in range(2, i + 1):
        den *= k
    if mode == "exact":
        return Scalar.exact(Fraction(num, den))
    return Scalar.approx(num / den)


class MicroDiffOp:
    """Normal-form operator over a degree window.

    ``coeffs`` maps every degree in ``[floor, top]`` to a series (zero series
    are stored, not elided); the top coefficient of a nonzero operator is a
    nonzero series.  ``exact_floor`` records that degrees below ``floor`` are
    known zero rather than unknown.
    """

    __slots__ = ("floor", "top", "coeffs", "order", "mode", "exact_floor")

    def __init__(self, coeffs, floor=None, order="__infer__", exact_floor=False, mode=None):
        """coeffs: dict degree -> TruncatedSeries (missing degrees are zero)."""
        if mode is None:
            mode = "exact"
            for s in coeffs.values():
                mode = s.mode
                break
        if any(s.mode != mode for s in coeffs.values()):
            raise ScalarModeError("operator coefficients mix scalar modes")

        inferred = None
        for s in coeffs.values():
            inferred = _min_order(inferred, s.order)
        if order == "__infer__":
            order = inferred
        else:
            # the reported order may not claim more than the weakest series
            order = _min_order(order, inferred)

        degs = [d for d, s in coeffs.items() if not s.is_zero]
        if floor is None:
            floor = min(degs) if degs else 0
        top = max(degs) if degs else floor - 1

        # individual series keep their own (possibly higher) orders; the
        # operator-level ``order`` is the shared guarantee across the window
        table = {}
        for d in range(floor, top + 1):
            s = coeffs.get(d)
            if s is None:
                s = TruncatedSeries.zero(order=None, mode=mode)
            table[d] = s

        self.coeffs = table
        self.floor = floor
        self.top = top
        self.order = order
        self.mode = mode
        self.exact_floor = exact_floor

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, mode="exact"):
        return cls({}, floor=0, order=None, exact_floor=True, mode=mode)

    @classmethod
    def one(cls, mode="exact"):
        return cls.D_power(0, mode=mode)

    @classmethod
    def D_power(cls, k, coefficient=None, mode="exact"):
        """coefficient * D^k (default coefficient 1), exactly known."""
        if coefficient is None:
            coefficient = TruncatedSeries.one(mode=mode)
        return cls({k: coefficient}, order=coefficient.order,
                   exact_floor=True, mode=coefficient.mode)

    @classmethod
    def from_terms(cls, terms, floor=None, order="__infer__", exact_floor=True, mode=None):
        """Operator from {degree: series}; exact and finite by default."""
        return cls(dict(terms), floor=floor, order=order,
                   exact_floor=exact_floor, mode=mode)

    @classmethod
    def multiplication_by_t(cls, mode="exact"):
        return cls({0: TruncatedSeries.t(mode=mode)}, order=None if mode == "exact" else None,
                   exact_floor=True, mode=mode)

    # -- queries -----------------------------------------------------------

    @property
    def is_zero(self):
        return self.top < self.floor

    @property
    def is_exact(self):
        return self.order is None and self.exact_floor

    def coeff(self, d) -> TruncatedSeries:
        if d > self.top:
            return TruncatedSeries.zero(order=self.order, mode=self.mode)
        if d < self.floor:
            if self.exact_floor:
                return TruncatedSeries.zero(order=self.order, mode=self.mode)
            raise TruncationExhaustedError(
                f"degree {d} is below the valid floor {self.floor}"
            )
        return self.coeffs[d]

    def degrees(self):
        return range(self.floor, self.top + 1)

    def principal_symbol(self):
        """Top-degree coefficient series (None for the zero operator)."""
        if self.is_zero:
            return None
        return self.coeffs[self.top]

    def degree(self):
        if self.is_zero:
            return None
        return self.top

    # -- structural ops ----------------------------------------------------

    def _aligned(self, other):
        if self.mode != other.mode:
            raise ScalarModeError("cannot combine exact and approx operators")
        if self.exact_floor and other.exact_floor:
            floor = min(self.floor, other.floor)
            exact_floor = True
        elif self.exact_floor:
            floor, exact_floor = other.floor, False
        elif other.exact_floor:
            floor, exact_floor = self.floor, False
        else:
            floor, exact_floor = max(self.floor, other.floor), False
        order = _min_order(self.order, other.order)
        return floor, exact_floor, order

    def __add__(self, other):
        if not isinstance(other, MicroDiffOp):
            return NotImplemented
        floor, exact_floor, order = self._aligned(other)
        out = {}
        for d in range(floor, max(self.top, other.top) + 1):
            out[d] = self.coeff(d) + other.coeff(d)
        return MicroDiffOp(out, floor=floor, order=order,
                           exact_floor=exact_floor, mode=self.mode)

    def __sub__(self, other):
        if not isinstance(other, MicroDiffOp):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return MicroDiffOp({d: -s for d, s in self.coeffs.items()},
                           floor=self.floor, order=self.order,
                           exact_floor=self.exact_floor, mode=self.mode)

    def scale(self, s: Scalar):
        return MicroDiffOp({d: c.scale(s) for d, c in self.coeffs.items()},
                           floor=self.floor, order=self.order,
                           exact_floor=self.exact_floor, mode=self.mode)

    def scale_series(self, f: TruncatedSeries):
        """Left multiplication by a plain function f(t)."""
        out = {d: f * c for d, c in self.coeffs.items()}
        return MicroDiffOp(out, floor=self.floor,
                           exact_floor=self.exact_floor, mode=self.mode)

    def with_floor(self, floor):
        """Discard degrees below ``floor`` (weakening: floor becomes inexact
        unless nothing was discarded from an exact-floor operator)."""
        if floor <= self.floor:
            return self
        out = {d: s for d, s in self.coeffs.items() if d >= floor}
        keeps_exact = self.exact_floor and all(
            self.coeffs[d].is_zero for d in range(self.floor, min(floor, self.top + 1))
        )
        return MicroDiffOp(out, floor=floor, order=self.order,
                           exact_floor=keeps_exact, mode=self.mode)

    def truncate_order(self, order):
        if order is None or (self.order is not None and order >= self.order):
            return self
        return MicroDiffOp({d: s.truncate(_min_order(s.order, order))
                            for d, s in self.coeffs.items()},
                           floor=self.floor, order=order,
                           exact_floor=self.exact_floor, mode=self.mode)

    # -- comparisons -------------------------------------------------------

    def agrees_with(self, other, floor=None, order=None):
        """Equality of all coefficients on the common valid window/order."""
        if self.mode != other.mode:
            raise ScalarModeError("cannot compare exact and approx operators")
        lo_candidates = []
        if not self.exact_floor:
            lo_candidates.append(self.floor)
        if not other.exact_floor:
            lo_candidates.append(other.floor)
        if floor is not None:
            lo_candidates.append(floor)
        lo = max(lo_candidates) if lo_candidates else min(self.floor, other.floor)
        hi = max(self.top, other.top)
        for d in range(lo, hi + 1):
            if not self.coeff(d).agrees_with(other.coeff(d), order=order):
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, MicroDiffOp):
            return NotImplemented
        return (self.floor == other.floor and self.order == other.order
                and self.agrees_with(other))

    def __hash__(self):
        raise TypeError("MicroDiffOp is unhashable; compare with agrees_with")

    def __repr__(self):
        try:
            from .opexpr import format_operator

            body = format_operator(self)
        except Exception:
            body = f"degrees {self.floor}..{self.top}"
        return f"<MicroDiffOp {body} | floor={self.floor}, T={self.order}>"


# ---------------------------------------------------------------------------
# composition


def mdo_mul(A: MicroDiffOp, B: MicroDiffOp, floor=None) -> MicroDiffOp:
    """Compose A.B by the Leibniz rule under the truncation contract.

    ``floor`` optionally cuts the result window from below (saves work; the
    cut is recorded as an inexact floor).
    """
    if A.mode != B.mode:
        raise ScalarModeError("cannot compose exact and approx operators")
    mode = A.mode
    if A.is_zero or B.is_zero:
        return MicroDiffOp.zero(mode=mode)

    top = A.top + B.top

    # tightest floor on which every retained coefficient is fully determined:
    # window floors contaminate from below, and Leibniz terms taking more
    # derivatives than a coefficient's trunc order are entirely unknown
    candidates = []
    if not A.exact_floor:
        candidates.append(A.floor + B.top)
    if not B.exact_floor:
        candidates.append(A.top + B.floor)
    for e in B.degrees():
        be = B.coeffs[e]
        To = be.order
        if To is None or be.is_zero:
            continue
        for d in A.degrees():
            if A.coeffs[d].is_zero:
                continue
            # unknown series tails of b_e enter through Leibniz terms with
            # i > To, which only exist for d < 0 (or d > To when d >= 0)
            if d < 0 or d > To:
                candidates.append(d + e - To)

    if candidates:
        g_contract = max(candidates)
    else:
        # fully exact data: support floor of the finite double sum
        g_contract = min(
            d + e - (B.coeffs[e].degree() or 0)
            for d in A.degrees()
            for e in B.degrees()
        )
    g0 = g_contract
    cut = False
    if floor is not None and floor > g0:
        g0 = floor
        cut = True
    if g0 > top:
        raise TruncationExhaustedError(
            "operator product window is empty after truncation"
        )

    out = {g: TruncatedSeries.zero(order=None, mode=mode) for g in range(g0, top + 1)}
    for e in B.degrees():
        b = B.coeffs[e]
        if b.is_zero:
            continue
        # derivatives of b, reused across all degrees of A
        derivs = [b]
        max_i = A.top + e - g0
        if b.order is not None:
            max_i = min(max_i, b.order)
        elif b.coeffs:
            max_i = min(max_i, len(b.coeffs) - 1)
        else:
            max_i = 0
        for _ in range(max_i):
            derivs.append(derivs[-1].derivative())
        for d in A.degrees():
            a = A.coeffs[d]
            if a.is_zero:
                continue
            hi = min(d + e - g0, max_i)
            for i in range(hi + 1):
                g = d + e - i
                if g > top:
                    continue
                c = leibniz_binomial(d, i, mode)
                if c.is_zero:
                    continue
                term = (a * derivs[i]).scale(c)
                out[g] = out[g] + term

    exact = (not candidates) and not cut
    return MicroDiffOp(out, floor=g0, order="__infer__", exact_floor=exact, mode=mode)


def plus_part(M: MicroDiffOp) -> MicroDiffOp:
    """Differential part: degrees >= 0.  Always has an exact floor at 0."""
    out = {d: s for d, s in M.coeffs.items() if d >= 0}
    return MicroDiffOp(out, floor=0, order=M.order, exact_floor=True, mode=M.mode)


def minus_part(M: MicroDiffOp) -> MicroDiffOp:
    """Complement of plus_part: degrees < 0 on the same window."""
    out = {d: s for d, s in M.coeffs.items() if d < 0}
    return MicroDiffOp(out, floor=M.floor, order=M.order,
                       exact_floor=M.exact_floor, mode=M.mode)


def commutator(A: MicroDiffOp, B: MicroDiffOp, floor=None) -> MicroDiffOp:
    """[A, B] = AB - BA under the shared truncation contract."""
    return mdo_mul(A, B, floor=floor) - mdo_mul(B, A, floor=floor)


def mdo_pow(L: MicroDiffOp, n: int, floor=None) -> MicroDiffOp:
    """n-th power by repeated composition (n >= 1)."""
    if n < 1:
        raise ValueError("power must be a positive integer")
    out = L
    for _ in range(n - 1):
        out = mdo_mul(out, L, floor=floor)
    return out


def is_volterra(W: MicroDiffOp) -> bool:
    """1 + w1 D^-1 + w2 D^-2 + ... shape test."""
    if W.is_zero or W.top != 0:
        return False
    c0 = W.coeffs[0]
    one = TruncatedSeries.one(order=c0.order, mode=W.mode)
    return c0.agrees_with(one)


def volterra_inverse(W: MicroDiffOp, depth: int) -> MicroDiffOp:
    """Inverse of a Volterra operator, valid down to degree ``-depth``.

    Fixed-point iteration V <- 1 - (W - 1) V, which gains one degree of
    depth per step.
    """
    if depth < 1:
        raise ValueError("depth must be a positive integer")
    if not is_volterra(W):
        raise VolterraShapeError("operator is not of Volterra form")
    one = MicroDiffOp.one(mode=W.mode)
    tail = (W - one).with_floor(max(W.floor, -depth))
    if tail.is_zero:
        return one
    V = one
    for _ in range(depth):
        try:
            correction = mdo_mul(tail, V, floor=-depth)
        except TruncationExhaustedError:
            # tail.V lives entirely below the requested depth
            break
        V = one - correction
    return V


def conjugate_derivation(W: MicroDiffOp, depth: int) -> MicroDiffOp:
    """W D W^{-1}: monic of degree 1 with zero degree-0 term, to ``-depth``."""
    if not is_volterra(W):
        raise VolterraShapeError("operator is not of Volterra form")
    Winv = volterra_inverse(W, depth + 1)
    WD = mdo_mul(W, MicroDiffOp.D_power(1, mode=W.mode))
    return mdo_mul(WD, Winv, floor=-depth)
