"""KP hierarchy: Lax operators, flows, Taylor jets in the times, dressing.

The evolution equations are implemented literally as

    dL/dt_n = [L, (L^n)_+].

With this bracket orientation the first flow acts on coefficients as
translation by ``T1_TRANSLATION_SIGN * t_1``; the sign is recorded below and
pinned by a calibration test rather than assumed.  Likewise the combination
of the residue coefficient u_1 that satisfies the scalar KP equation is

    u(t, x, y) = KP_U_FACTOR * u_1(t, KP_TIME_ORIENTATION * x, KP_TIME_ORIENTATION * y),

both constants being measured by the test suite.
"""

from __future__ import annotations

import itertools

from .errors import KpcmError, TruncationExhaustedError
from .mdo import (
    MicroDiffOp,
    commutator,
    conjugate_derivation,
    is_volterra,
    mdo_mul,
    mdo_pow,
    minus_part,
    plus_part,
    volterra_inverse,
)
from .series import TruncatedSeries, _min_order

#: translation direction of the t_1 flow under the literal bracket
T1_TRANSLATION_SIGN = -1

#: scalar-KP field = KP_U_FACTOR * u_1 evaluated at KP_TIME_ORIENTATION-reversed times
KP_U_FACTOR = 2
KP_TIME_ORIENTATION = -1


class CompatibilityError(KpcmError):
    """Mixed jet coefficients disagree; signals an implementation bug."""


class LaxOperator:
    """Normal form D + u_1 D^-1 + u_2 D^-2 + ... over a window (floor, 1)."""

    __slots__ = ("op",)

    def __init__(self, op: MicroDiffOp):
        if op.is_zero or op.top != 1:
            raise ValueError("Lax operator must have top degree exactly 1")
        one = TruncatedSeries.one(order=op.order, mode=op.mode)
        if not op.coeff(1).agrees_with(one):
            raise ValueError("Lax operator must be monic at D^1")
        if not op.coeff(0).is_zero:
            raise ValueError("Lax operator must have zero D^0 coefficient")
        self.op = op

    @classmethod
    def from_tail(cls, tail, floor=None, order="__infer__", mode=None):
        """Build D + sum_i tail[i] D^-i from {i >= 1: series}."""
        terms = {-i: s for i, s in tail.items()}
        probe = next(iter(tail.values()), None)
        mode = mode or (probe.mode if probe is not None else "exact")
        terms[1] = TruncatedSeries.one(mode=mode)
        terms[0] = TruncatedSeries.zero(mode=mode)
        return cls(MicroDiffOp.from_terms(terms, floor=floor, order=order, mode=mode))

    @classmethod
    def pure_derivation(cls, mode="exact"):
        return cls(MicroDiffOp.D_power(1, mode=mode))

    def u(self, i) -> TruncatedSeries:
        """Residue-chain coefficient u_i (at degree -i)."""
        return self.op.coeff(-i)

    @property
    def floor(self):
        return self.op.floor

    @property
    def order(self):
        return self.op.order

    @property
    def mode(self):
        return self.op.mode

    def agrees_with(self, other, floor=None, order=None):
        other_op = other.op if isinstance(other, LaxOperator) else other
        return self.op.agrees_with(other_op, floor=floor, order=order)

    def __repr__(self):
        return f"<LaxOperator {self.op!r}>"


def _as_op(L):
    return L.op if isinstance(L, LaxOperator) else L


def kp_vector_field(L, n: int, floor=None) -> MicroDiffOp:
    """[L, (L^n)_+]; tangent to the space of Lax operators (degrees <= -1)."""
    op = _as_op(L)
    if floor is None:
        floor = op.floor
    Ln = mdo_pow(op, n, floor=floor) if n > 1 else op
    field = commutator(op, plus_part(Ln), floor=floor)
    pos = plus_part(field)
    if op.mode == "exact" and not pos.is_zero:
        raise KpcmError("vector field has nonzero differential part (bug)")
    return minus_part(field)


class OperatorJet:
    """Finite Taylor jet  sum_alpha  C_alpha * prod t_v^alpha_v  of operators.

    ``times`` are the flow indices the jet depends on; ``terms`` maps
    exponent tuples to MicroDiffOp Taylor *coefficients* (not derivatives).
    """

    __slots__ = ("times", "order", "terms", "mode")

    def __init__(self, times, order, terms, mode=None):
        self.times = tuple(times)
        self.order = order
        self.terms = {
            tuple(a): op for a, op in terms.items() if sum(a) <= order and not op.is_zero
        }
        if mode is None:
            mode = next(iter(terms.values())).mode if terms else "exact"
        self.mode = mode

    @classmethod
    def constant(cls, op: MicroDiffOp, times, order):
        zero = (0,) * len(tuple(times))
        return cls(times, order, {zero: op}, mode=op.mode)

    def term(self, alpha) -> MicroDiffOp:
        alpha = tuple(alpha)
        got = self.terms.get(alpha)
        if got is None:
            return MicroDiffOp.zero(mode=self.mode)
        return got

    @property
    def base(self) -> MicroDiffOp:
        return self.term((0,) * len(self.times))

    def _exponents(self):
        return list(self.terms.keys())

    def map_terms(self, fn):
        return OperatorJet(self.times, self.order,
                           {a: fn(op) for a, op in self.terms.items()},
                           mode=self.mode)

    def __add__(self, other):
        out = dict(self.terms)
        for a, op in other.terms.items():
            out[a] = out[a] + op if a in out else op
        return OperatorJet(self.times, self.order, out, mode=self.mode)

    def __sub__(self, other):
        return self + other.map_terms(lambda op: -op)

    def __neg__(self):
        return self.map_terms(lambda op: -op)

    def mul(self, other, floor=None):
        out = {}
        for a, opa in self.terms.items():
            for b, opb in other.terms.items():
                c = tuple(x + y for x, y in zip(a, b))
                if sum(c) > self.order:
                    continue
                try:
                    prod = mdo_mul(opa, opb, floor=floor)
                except TruncationExhaustedError:
                    if floor is not None:
                        continue
                    raise
                out[c] = out[c] + prod if c in out else prod
        return OperatorJet(self.times, self.order, out, mode=self.mode)

    def pow(self, n, floor=None):
        out = self
        for _ in range(n - 1):
            out = out.mul(self, floor=floor)
        return out

    def plus_part(self):
        return self.map_terms(plus_part)

    def minus_part(self):
        return self.map_terms(minus_part)

    def commutator(self, other, floor=None):
        return self.mul(other, floor=floor) - other.mul(self, floor=floor)

    def time_derivative(self, v):
        """d/dt_v as a jet of one lower order."""
        i = self.times.index(v)
        out = {}
        for a, op in self.terms.items():
            if a[i] == 0:
                continue
            b = list(a)
            b[i] -= 1
            out[tuple(b)] = op.scale(_int_scalar(a[i], self.mode))
        return OperatorJet(self.times, max(self.order - 1, 0), out, mode=self.mode)

    def agrees_with(self, other, floor=None, order=None):
        exps = set(self.terms) | set(other.terms)
        for a in exps:
            if sum(a) > min(self.order, other.order):
                continue
            if not self.term(a).agrees_with(other.term(a), floor=floor, order=order):
                return False
        return True


def _int_scalar(k, mode):
    from .scalars import Scalar

    return Scalar.exact(k) if mode == "exact" else Scalar.approx(float(k))


class KPJet:
    """Taylor expansion of a Lax operator in the times t_2..t_K."""

    __slots__ = ("base", "jet", "jet_order")

    def __init__(self, base: LaxOperator, jet: OperatorJet, jet_order: int):
        self.base = base
        self.jet = jet
        self.jet_order = jet_order
        for a, op in jet.terms.items():
            if sum(a) == 0:
                continue
            if not plus_part(op).is_zero:
                raise ValueError("jet partials must have degrees <= -1")

    def partial(self, alpha) -> MicroDiffOp:
        """Taylor coefficient for exponent tuple alpha over (t_2..t_K)."""
        return self.jet.term(alpha)


def kp_jet_extend(L0: LaxOperator, K: int, order: int, floor=None) -> KPJet:
    """Build the Taylor jet of the flows dL/dt_n = [L,(L^n)_+], n = 2..K.

    Every Taylor coefficient of total degree r+1 is produced by each flow
    direction present in its exponent; the routes must agree exactly, which
    is asserted (a failure signals an implementation bug, not a math one).
    """
    times = tuple(range(2, K + 1))
    if floor is None:
        floor = L0.floor
    jet = OperatorJet.constant(L0.op, times, order)
    for r in range(order):
        fields = {}
        for n in times:
            Ln = jet.pow(n, floor=floor)
            fields[n] = jet.commutator(Ln.plus_part(), floor=floor)
        new_terms = dict(jet.terms)
        for alpha in _exponents_of_degree(len(times), r + 1):
            candidates = []
            for i, n in enumerate(times):
                if alpha[i] == 0:
                    continue
                beta = list(alpha)
                beta[i] -= 1
                f = fields[n].term(tuple(beta))
                candidates.append(f.scale(_int_scalar(1, jet.mode) / _int_scalar(alpha[i], jet.mode)))
            first = candidates[0]
            for other in candidates[1:]:
                if jet.mode == "exact" and not first.agrees_with(other):
                    raise CompatibilityError(
                        f"mixed partial {alpha} disagrees between flow routes"
                    )
            new_terms[alpha] = first
        jet = OperatorJet(times, order, new_terms, mode=jet.mode)
    return KPJet(L0, jet, order)


def _exponents_of_degree(nvars, total):
    for alpha in itertools.product(range(total + 1), repeat=nvars):
        if sum(alpha) == total:
            yield alpha


def flows_commute_residual(L: LaxOperator, m: int, n: int, order: int) -> MicroDiffOp:
    """d_m d_n L - d_n d_m L computed through first-order jets.

    ``order`` bounds the window depth of the comparison (floor -order).
    Contract: exactly zero in exact arithmetic.
    """
    floor = min(L.floor, -order)
    Fm = kp_vector_field(L, m, floor=floor)
    Fn = kp_vector_field(L, n, floor=floor)

    def directional(F_dir, k):
        # d/d eps of [J, (J^k)_+] at J = L + eps*F_dir
        J = OperatorJet((0,), 1, {(0,): L.op, (1,): F_dir}, mode=L.mode)
        G = J.commutator(J.pow(k, floor=floor).plus_part(), floor=floor)
        return G.term((1,))

    d_m_Fn = directional(Fm, n)
    d_n_Fm = directional(Fn, m)
    return (d_m_Fn - d_n_Fm).with_floor(-order)


def dress(L: LaxOperator, depth: int) -> MicroDiffOp:
    """Solve W D = L W for Volterra W in the canonical gauge w_i(0) = 0.

    Works order by order in the depth: -w_k' equals the D^{-k} coefficient of
    (L - D) W, which only involves w_1 .. w_{k-1}.
    """
    if depth < 1:
        raise ValueError("depth must be positive")
    L_tail = minus_part(L.op)
    W = MicroDiffOp.one(mode=L.mode)
    if L_tail.is_zero:
        return W
    for k in range(1, depth + 1):
        try:
            R = mdo_mul(L_tail, W, floor=-k)
        except TruncationExhaustedError as exc:
            raise TruncationExhaustedError(
                f"dressing depth {k} exceeds the truncation budget"
            ) from exc
        rk = R.coeff(-k)
        wk = (-rk).antiderivative()
        W = W + MicroDiffOp.from_terms({-k: wk}, mode=L.mode)
    return W


def dressing_gauge_residue(L: LaxOperator, W: MicroDiffOp, depth: int) -> MicroDiffOp:
    """W_canonical^{-1} . W, which must be a constant-coefficient Volterra
    operator when W also dresses D into L."""
    Wc = dress(L, depth)
    return mdo_mul(volterra_inverse(Wc, depth), W, floor=-depth)


def kp_equation_residual(u, grid=None):
    """Residual of  (3/4) u_xx - (u_y - (1/4)(6 u u_t + u_ttt))_t.

    ``u`` is a trivariate polynomial or rational function in (t, x, y) from
    :mod:`kpcm.polytools`.  Returns a RationalFunc; with ``grid`` given, its
    max-abs value on those sample points is returned instead.
    """
    from .polytools import RationalFunc, SparsePoly, qq

    if isinstance(u, SparsePoly):
        u = RationalFunc.from_poly(u)
    u_t = u.derivative("t")
    u_x = u.derivative("x")
    u_xx = u_x.derivative("x")
    u_y = u.derivative("y")
    u_ttt = u_t.derivative("t").derivative("t")
    inner = u_y - (u.mul(u_t).scale(qq(6)) + u_ttt).scale(qq(1, 4))
    residual = u_xx.scale(qq(3, 4)) - inner.derivative("t")
    if grid is None:
        return residual
    return max(abs(residual.eval(*p)) for p in grid)
