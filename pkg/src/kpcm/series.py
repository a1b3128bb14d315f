"""Truncated power series in the variable t.

A series either carries ``order = T`` (coefficients through degree T are
known, degree > T is *unknown*, not zero) or ``order = None`` for an exact
polynomial (all omitted coefficients are known zero).  Binary operations
report the tightest order that is fully determined: ``min`` of the operand
orders, with ``None`` acting as infinity.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import EmptySeriesError, ScalarModeError
from .scalars import QQi, Scalar, common_mode, zero_like


def _min_order(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class TruncatedSeries:
    """Coefficients ``c[0] + c[1] t + ... `` with an explicit knowledge horizon."""

    __slots__ = ("coeffs", "order", "mode")

    def __init__(self, coeffs, order="__infer__", mode=None):
        coeffs = tuple(coeffs)
        if mode is None:
            mode = common_mode(coeffs)
        else:
            if any(c.mode != mode for c in coeffs):
                raise ScalarModeError("series coefficients disagree with mode")
        if order == "__infer__":
            order = len(coeffs) - 1 if coeffs else None
        if order is None:
            # exact polynomial: trim trailing zeros
            n = len(coeffs)
            while n and coeffs[n - 1].is_zero:
                n -= 1
            coeffs = coeffs[:n]
        else:
            if order < 0:
                raise ValueError("trunc order must be >= 0")
            cs = list(coeffs[: order + 1])
            filler = Scalar.exact(0) if mode == "exact" else Scalar.approx(0.0)
            while len(cs) < order + 1:
                cs.append(filler)
            coeffs = tuple(cs)
        self.coeffs = coeffs
        self.order = order
        self.mode = mode

    # -- constructors ------------------------------------------------------

    @classmethod
    def exact_poly(cls, values):
        """Exact polynomial from ints/Fractions/QQi/Scalars."""
        return cls([_as_scalar(v, "exact") for v in values], order=None)

    @classmethod
    def constant(cls, value, order=None, mode="exact"):
        s = _as_scalar(value, mode)
        return cls([s], order=order, mode=s.mode)

    @classmethod
    def zero(cls, order=None, mode="exact"):
        return cls([], order=order, mode=mode)

    @classmethod
    def one(cls, order=None, mode="exact"):
        return cls.constant(1 if mode == "exact" else 1.0, order=order, mode=mode)

    @classmethod
    def t(cls, order=None, mode="exact"):
        z = 0 if mode == "exact" else 0.0
        o = 1 if mode == "exact" else 1.0
        return cls([_as_scalar(z, mode), _as_scalar(o, mode)], order=order, mode=mode)

    # -- queries -----------------------------------------------------------

    @property
    def is_exact_poly(self):
        return self.order is None

    @property
    def is_zero(self):
        return all(c.is_zero for c in self.coeffs)

    def coeff(self, k):
        """k-th coefficient; raises if k is beyond the knowledge horizon."""
        if self.order is not None and k > self.order:
            raise EmptySeriesError(f"coefficient {k} beyond trunc order {self.order}")
        if k < len(self.coeffs):
            return self.coeffs[k]
        return Scalar.exact(0) if self.mode == "exact" else Scalar.approx(0.0)

    def known_len(self):
        return len(self.coeffs) if self.order is None else self.order + 1

    def degree(self):
        """Degree of an exact polynomial (None for the zero polynomial)."""
        if self.order is not None:
            raise ValueError("degree only defined for exact polynomials")
        return len(self.coeffs) - 1 if self.coeffs else None

    # -- arithmetic --------------------------------------------------------

    def _binary_mode(self, other):
        if self.mode != other.mode:
            raise ScalarModeError("cannot combine exact and approx series")
        return self.mode

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        mode = self._binary_mode(other)
        order = _min_order(self.order, other.order)
        n = max(len(self.coeffs), len(other.coeffs))
        if order is not None:
            n = order + 1
        out = []
        for k in range(n):
            a = self.coeffs[k] if k < len(self.coeffs) else None
            b = other.coeffs[k] if k < len(other.coeffs) else None
            if a is None and b is None:
                out.append(_zero(mode))
            elif a is None:
                out.append(b)
            elif b is None:
                out.append(a)
            else:
                out.append(a + b)
        return TruncatedSeries(out, order=order, mode=mode)

    def __sub__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return TruncatedSeries(
            [-c for c in self.coeffs], order=self.order, mode=self.mode
        )

    def __mul__(self, other):
        if isinstance(other, Scalar):
            return self.scale(other)
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        mode = self._binary_mode(other)
        order = _min_order(self.order, other.order)
        if not self.coeffs or not other.coeffs:
            return TruncatedSeries([], order=order, mode=mode)
        n = len(self.coeffs) + len(other.coeffs) - 1
        if order is not None:
            n = order + 1
        out = [_zero(mode) for _ in range(n)]
        for i, a in enumerate(self.coeffs):
            if a.is_zero or i >= n:
                continue
            jmax = n - i
            for j, b in enumerate(other.coeffs[:jmax]):
                if b.is_zero:
                    continue
                out[i + j] = out[i + j] + a * b
        return TruncatedSeries(out, order=order, mode=mode)

    __rmul__ = __mul__

    def scale(self, s: Scalar):
        if s.mode != self.mode:
            raise ScalarModeError("scalar mode does not match series mode")
        return TruncatedSeries(
            [c * s for c in self.coeffs], order=self.order, mode=self.mode
        )

    def derivative(self):
        """d/dt; a truncated series loses its top coefficient."""
        if self.order is not None:
            if self.order == 0:
                raise EmptySeriesError("derivative of an order-0 series is unknown")
            out = [
                self.coeffs[k] * Scalar.exact(k) if self.mode == "exact"
                else self.coeffs[k] * Scalar.approx(float(k))
                for k in range(1, self.order + 1)
            ]
            return TruncatedSeries(out, order=self.order - 1, mode=self.mode)
        out = []
        for k in range(1, len(self.coeffs)):
            mult = Scalar.exact(k) if self.mode == "exact" else Scalar.approx(float(k))
            out.append(self.coeffs[k] * mult)
        return TruncatedSeries(out, order=None, mode=self.mode)

    def derivative_n(self, i):
        s = self
        for _ in range(i):
            s = s.derivative()
        return s

    def antiderivative(self, constant=None):
        """∫ dt with value ``constant`` at t=0; gains one order of knowledge."""
        if constant is None:
            constant = _zero(self.mode)
        out = [constant]
        for k, c in enumerate(self.coeffs):
            mult = (
                Scalar.exact(Fraction(1, k + 1))
                if self.mode == "exact"
                else Scalar.approx(1.0 / (k + 1))
            )
            out.append(c * mult)
        order = None if self.order is None else self.order + 1
        return TruncatedSeries(out, order=order, mode=self.mode)

    def truncate(self, order):
        """Weaken to a given (smaller or equal) knowledge horizon."""
        if order is None:
            if self.order is not None:
                raise ValueError("cannot promote a truncated series to exact")
            return self
        if self.order is not None and order > self.order:
            raise ValueError("cannot extend knowledge by truncation")
        return TruncatedSeries(self.coeffs[: order + 1], order=order, mode=self.mode)

    def eval(self, point: Scalar):
        """Evaluate the known part at a scalar (Horner)."""
        acc = _zero(self.mode)
        for c in reversed(self.coeffs):
            acc = acc * point + c
        return acc

    # -- comparisons -------------------------------------------------------

    def agrees_with(self, other, order=None):
        """Equality of the known coefficients on the common horizon."""
        if self.mode != other.mode:
            raise ScalarModeError("cannot compare exact and approx series")
        common = _min_order(self.order, other.order)
        common = _min_order(common, order)
        n = (
            max(len(self.coeffs), len(other.coeffs))
            if common is None
            else common + 1
        )
        for k in range(n):
            a = self.coeffs[k] if k < len(self.coeffs) else _zero(self.mode)
            b = other.coeffs[k] if k < len(other.coeffs) else _zero(self.mode)
            if not (a == b):
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.order == other.order and self.agrees_with(other)

    def __hash__(self):
        if self.mode != "exact":
            raise TypeError("approx series are not hashable")
        return hash((self.order, self.coeffs))

    def __repr__(self):
        tag = "exact" if self.order is None else f"T={self.order}"
        return f"TruncatedSeries({list(self.coeffs)!r}, {tag})"


def _zero(mode):
    return Scalar.exact(0) if mode == "exact" else Scalar.approx(0.0)


def _as_scalar(v, mode):
    if isinstance(v, Scalar):
        return v
    if mode == "exact":
        if isinstance(v, QQi):
            return Scalar("exact", v)
        return Scalar.exact(v)
    return Scalar.approx(v)


def series_derive(f: TruncatedSeries) -> TruncatedSeries:
    """Derivative d/dt of a series; top coefficient knowledge is consumed."""
    return f.derivative()
