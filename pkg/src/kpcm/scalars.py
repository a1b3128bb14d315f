"""Coefficient scalars: exact Gaussian rationals and tolerance-tagged complex floats.

Every coefficient in the package is a :class:`Scalar`, which is either

* ``exact``  -- a Gaussian rational (Fraction real and imaginary parts),
  with literal equality, or
* ``approx`` -- a python complex, with equality meaning ``|a - b| <= eps``.

The two modes never mix silently; combining them raises
:class:`~kpcm.errors.ScalarModeError`.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ScalarModeError

DEFAULT_EPS = 1e-9

_ZERO = Fraction(0)


class QQi:
    """Gaussian rational re + im*i with exact arithmetic."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    def __add__(self, other):
        other = _as_qqi(other)
        if other is NotImplemented:
            return NotImplemented
        return QQi(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_qqi(other)
        if other is NotImplemented:
            return NotImplemented
        return QQi(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _as_qqi(other)
        if other is NotImplemented:
            return NotImplemented
        return QQi(other.re - self.re, other.im - self.im)

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __mul__(self, other):
        other = _as_qqi(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.im and not other.im:
            return QQi(self.re * other.re, _ZERO)
        return QQi(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_qqi(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.re and not other.im:
            raise ZeroDivisionError("division by zero Gaussian rational")
        if not self.im and not other.im:
            return QQi(self.re / other.re, _ZERO)
        n = other.re * other.re + other.im * other.im
        return QQi(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    def __rtruediv__(self, other):
        other = _as_qqi(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return QQi(1) / self ** (-n)
        out = QQi(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        other = _as_qqi(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def conjugate(self):
        return QQi(self.re, -self.im)

    def to_complex(self):
        return complex(self.re) + 1j * complex(self.im)

    def __repr__(self):
        if not self.im:
            return f"QQi({self.re})"
        return f"QQi({self.re}, {self.im})"


def _as_qqi(value):
    if isinstance(value, QQi):
        return value
    if isinstance(value, (int, Fraction)):
        return QQi(value)
    return NotImplemented


class Scalar:
    """A field element carrying its arithmetic mode.

    Use :meth:`exact` / :meth:`approx` to build values; ``+ - * / **`` work as
    usual within one mode.
    """

    __slots__ = ("mode", "value", "eps")

    def __init__(self, mode, value, eps=None):
        self.mode = mode
        self.value = value
        self.eps = eps

    @classmethod
    def exact(cls, re=0, im=0):
        if isinstance(re, QQi):
            return cls("exact", re)
        return cls("exact", QQi(re, im))

    @classmethod
    def approx(cls, value, eps=DEFAULT_EPS):
        return cls("approx", complex(value), eps)

    @property
    def is_exact(self):
        return self.mode == "exact"

    def _coerce(self, other):
        """Return ``other`` as a Scalar in our mode, or raise on a mode clash."""
        if isinstance(other, Scalar):
            if other.mode != self.mode:
                raise ScalarModeError(
                    f"cannot combine {self.mode} and {other.mode} scalars"
                )
            return other
        if isinstance(other, (int, Fraction)):
            if self.is_exact:
                return Scalar("exact", QQi(other))
            return Scalar("approx", complex(other), self.eps)
        if isinstance(other, (float, complex)):
            if self.is_exact:
                raise ScalarModeError("cannot combine exact scalar with a float")
            return Scalar("approx", complex(other), self.eps)
        if isinstance(other, QQi):
            if not self.is_exact:
                raise ScalarModeError("cannot combine approx scalar with QQi")
            return Scalar("exact", other)
        return NotImplemented

    def _wrap(self, value, other=None):
        if self.is_exact:
            return Scalar("exact", value)
        eps = self.eps
        if other is not None and other.eps is not None and other.eps > eps:
            eps = other.eps
        return Scalar("approx", value, eps)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._wrap(self.value + other.value, other)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._wrap(self.value - other.value, other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._wrap(other.value - self.value, other)

    def __neg__(self):
        return self._wrap(-self.value)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._wrap(self.value * other.value, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._wrap(self.value / other.value, other)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._wrap(other.value / self.value, other)

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        return self._wrap(self.value ** n)

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except ScalarModeError:
            raise
        if other is NotImplemented:
            return NotImplemented
        if self.is_exact:
            return self.value == other.value
        eps = max(self.eps, other.eps or 0.0)
        return abs(self.value - other.value) <= eps

    def __hash__(self):
        if not self.is_exact:
            raise TypeError("approx scalars are not hashable (tolerant equality)")
        return hash(self.value)

    def __bool__(self):
        return not self.is_zero

    @property
    def is_zero(self):
        if self.is_exact:
            return not self.value
        return abs(self.value) <= self.eps

    def to_complex(self):
        if self.is_exact:
            return self.value.to_complex()
        return self.value

    def inverse(self):
        return self._wrap(
            QQi(1) / self.value if self.is_exact else 1.0 / self.value
        )

    def __repr__(self):
        if self.is_exact:
            v = self.value
            if not v.im:
                return f"Scalar.exact({v.re})"
            return f"Scalar.exact({v.re}, {v.im})"
        return f"Scalar.approx({self.value!r}, eps={self.eps})"


def exact(re=0, im=0):
    """Shorthand for ``Scalar.exact``."""
    return Scalar.exact(re, im)


def approx(value, eps=DEFAULT_EPS):
    """Shorthand for ``Scalar.approx``."""
    return Scalar.approx(value, eps)


def zero_like(s: Scalar) -> Scalar:
    if s.is_exact:
        return Scalar.exact(0)
    return Scalar.approx(0.0, s.eps)


def one_like(s: Scalar) -> Scalar:
    if s.is_exact:
        return Scalar.exact(1)
    return Scalar.approx(1.0, s.eps)


def common_mode(scalars):
    """Check all scalars share one mode and return it ('exact' for empty input)."""
    mode = None
    for s in scalars:
        if mode is None:
            mode = s.mode
        elif s.mode != mode:
            raise ScalarModeError("mixed exact/approx scalars in one container")
    return mode or "exact"
