"""Finite-window model of the Sato Grassmannian and its flow action.

The ambient space V is spanned by D^k for -N <= k <= M (a :class:`FockWindow`
with depth N and height M); a :class:`GrassmannPoint` is the span of finitely
many window vectors.  Points in the big cell of the index-zero component
carry a column-echelon basis {D^k + negative tails}.

Flows multiply basis vectors by exp(FLOW_SIGN * sum t_k D^k) truncated as a
jet; the induced Lax operator is read off a flowed point order by order,
identifying the series variable t of the operator coefficients with the
first flow direction.  Degrees shifted above the window top are dropped;
every retained jet monomial of weighted degree <= M (weight of t_n is n) is
unaffected by the cut, which is why window height is a hard budget for jet
order: requests beyond it raise :class:`WindowIndeterminateError`.

``FLOW_SIGN`` is the module-level calibration constant: the sign for which
the t_1-flow of the induced Lax operator satisfies the literal bracket
dL/dt_1 = [L, (L)_+].  It is measured by :func:`calibrate_flow_sign` and
asserted in the test suite, not assumed.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .errors import (
    BigCellError,
    LaxPoleError,
    ScalarModeError,
    WindowIndeterminateError,
)
from .kp import LaxOperator, OperatorJet
from .linalg import nullspace, rank
from .mdo import MicroDiffOp, is_volterra
from .scalars import Scalar
from .series import TruncatedSeries

#: calibrated orientation of exp(FLOW_SIGN * sum t_k D^k); see module docstring
FLOW_SIGN = -1

#: reduction pivot tolerance for approx-mode points
DEFAULT_PIVOT_TOL = 1e-12


class FockWindow:
    """Retained degrees D^-N .. D^M of V = C((D^-1))."""

    __slots__ = ("N", "M")

    def __init__(self, N: int, M: int):
        if N < 1 or M < 1:
            raise ValueError("window needs N >= 1 and M >= 1")
        self.N = N
        self.M = M

    def rows(self):
        return range(-self.N, self.M + 1)

    def __eq__(self, other):
        return isinstance(other, FockWindow) and (self.N, self.M) == (other.N, other.M)

    def __repr__(self):
        return f"FockWindow(N={self.N}, M={self.M})"


def _vec_mode(vectors):
    for v in vectors:
        for s in v.values():
            return s.mode
    return "exact"


class GrassmannPoint:
    """Span of window vectors; vectors are dicts {degree: Scalar}."""

    __slots__ = ("window", "basis", "declared_index", "mode")

    def __init__(self, window: FockWindow, basis, declared_index=None):
        self.window = window
        cleaned = []
        for v in basis:
            v = {d: s for d, s in v.items() if not s.is_zero}
            for d in v:
                if d < -window.N or d > window.M:
                    raise ValueError(f"vector entry at degree {d} outside window")
            if v:
                cleaned.append(v)
        self.basis = cleaned
        self.mode = _vec_mode(cleaned)
        if any(s.mode != self.mode for v in cleaned for s in v.values()):
            raise ScalarModeError("basis vectors mix scalar modes")
        mat = self._matrix()
        if mat and rank(mat) < len(cleaned):
            raise ValueError("basis vectors are linearly dependent")
        computed = len(cleaned) - (window.M + 1)
        if declared_index is None:
            declared_index = computed
        elif declared_index != computed:
            raise ValueError(
                f"declared index {declared_index} inconsistent with basis "
                f"(window model gives {computed})"
            )
        self.declared_index = declared_index

    @classmethod
    def base_point(cls, window: FockWindow, mode="exact"):
        """V_+ = span{D^k : k >= 0} inside the window."""
        one = Scalar.exact(1) if mode == "exact" else Scalar.approx(1.0)
        return cls(window, [{k: one} for k in range(window.M + 1)])

    @classmethod
    def from_volterra(cls, window: FockWindow, W: MicroDiffOp):
        """The point W . V_+ for a constant-coefficient Volterra operator."""
        _require_constant_volterra(W)
        vectors = []
        for k in range(window.M + 1):
            vectors.append(_apply_constant_op(W, {k: _one(W.mode)}, window))
        return cls(window, vectors)

    def _matrix(self):
        """Rows indexed by window degree (top row = degree M), columns = basis."""
        rows = []
        for d in range(self.window.M, -self.window.N - 1, -1):
            rows.append([v.get(d, _zero(self.mode)) for v in self.basis])
        return rows

    def _nonneg_block(self):
        rows = []
        for d in range(self.window.M, -1, -1):
            rows.append([v.get(d, _zero(self.mode)) for v in self.basis])
        return rows

    def _boundary_guard(self, kernel):
        """Raise if a kernel witness touches the window floor (undecidable)."""
        for combo in kernel:
            full = {}
            for c, v in zip(combo, self.basis):
                if c.is_zero:
                    continue
                for d, s in v.items():
                    full[d] = full.get(d, _zero(self.mode)) + c * s
            if any(d == -self.window.N and not s.is_zero for d, s in full.items()):
                raise WindowIndeterminateError(
                    "transversality decision touches the window floor; "
                    "enlarge the window"
                )

    def __repr__(self):
        return (f"<GrassmannPoint {len(self.basis)} vectors, {self.window!r}, "
                f"index={self.declared_index}>")


def _zero(mode):
    return Scalar.exact(0) if mode == "exact" else Scalar.approx(0.0)


def _one(mode):
    return Scalar.exact(1) if mode == "exact" else Scalar.approx(1.0)


def _require_constant_volterra(W: MicroDiffOp):
    if not is_volterra(W):
        raise ValueError("operator is not of Volterra form")
    for d in W.degrees():
        s = W.coeff(d)
        if any(not c.is_zero for c in s.coeffs[1:]):
            raise ValueError("operator has non-constant coefficients")


def _apply_constant_op(op: MicroDiffOp, vec, window: FockWindow):
    """Left-multiply a window vector by a constant-coefficient operator.

    Entries pushed below the floor are discarded (the window consumes depth);
    entries above the top are likewise dropped.
    """
    out = {}
    for d in op.degrees():
        c = op.coeff(d).coeff(0)
        if c.is_zero:
            continue
        for row, val in vec.items():
            r = row + d
            if -window.N <= r <= window.M:
                out[r] = out.get(r, _zero(op.mode)) + c * val
    return out


# ---------------------------------------------------------------------------
# transversality and index


def big_cell_test(P: GrassmannPoint) -> bool:
    """True iff span + V_- fills the window (nonnegative block invertible)."""
    b = len(P.basis)
    block = P._nonneg_block()
    if b == 0:
        return False
    r = rank(block)
    if b == P.window.M + 1 and r == b:
        return True
    # failing verdict: make sure the witness is not a window artifact
    kernel = nullspace(block)
    P._boundary_guard(kernel)
    return False


def index(P: GrassmannPoint) -> int:
    """dim ker - dim coker of the projection to V/V_-; index(V_+) = 0.

    In the window model this is (#basis) - (M+1); the convention (shifting a
    point up by D raises the index by one) is fixed here because the index
    orientation is not pinned elsewhere.
    """
    block = P._nonneg_block()
    if P.basis:
        kernel = nullspace(block)
        if kernel:
            P._boundary_guard(kernel)
    return len(P.basis) - (P.window.M + 1)


def shift_point(P: GrassmannPoint, direction: int) -> GrassmannPoint:
    """Multiply a big-cell-type point by D (direction=+1) or D^-1 (-1).

    The convention here follows the rank computations: the index is
    dim ker - dim coker of the projection to V/V_-, so multiplying by D^-1
    raises the index by one and multiplying by D lowers it by one.  The
    window's implicit content {D^k : k > M} is accounted for: shifting down
    pulls D^M into the window, shifting up pushes the top pivot out.
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    cols = _point_echelon_columns(P)
    out = []
    if direction == 1:
        for k, col in enumerate(cols):
            if k == P.window.M:
                continue  # pivot leaves the window at the top
            out.append({d + 1: s for d, s in col.items()})
    else:
        for col in cols:
            shifted = {d - 1: s for d, s in col.items() if d - 1 >= -P.window.N}
            out.append(shifted)
        out.append({P.window.M: _one(P.mode)})  # D^{M+1} descends into view
    return GrassmannPoint(P.window, out)


# ---------------------------------------------------------------------------
# echelon reduction (shared by constant points and jets)


def _echelon_columns(columns, M, ring, pivot_tol=DEFAULT_PIVOT_TOL):
    """Reduce columns (dicts row -> ring poly) to pivots D^M .. D^0.

    Returns {pivot_degree: column}.  Raises BigCellError if some pivot has
    no usable unit entry.
    """
    cols = [dict(c) for c in columns]
    pivot_of = {}
    free = set(range(len(cols)))
    for k in range(M, -1, -1):
        best_j, best_mag = None, -1.0
        for j in sorted(free):
            entry = cols[j].get(k)
            if entry is None:
                continue
            c0 = ring.const(entry)
            if c0.is_exact:
                if not c0.is_zero:
                    best_j = j
                    break
            else:
                mag = abs(c0.value)
                if mag > pivot_tol and mag > best_mag:
                    best_j, best_mag = j, mag
        if best_j is None:
            raise BigCellError(f"no unit pivot available at degree {k}")
        free.discard(best_j)
        col = cols[best_j]
        inv = ring.inv(col[k])
        cols[best_j] = {r: ring.mul(p, inv) for r, p in col.items()}
        for j in range(len(cols)):
            if j == best_j:
                continue
            entry = cols[j].get(k)
            if entry is None or ring.poly_is_zero(entry):
                continue
            cols[j] = _col_axpy(cols[j], ring.neg(entry), cols[best_j], ring)
        pivot_of[k] = best_j
    return {k: cols[j] for k, j in pivot_of.items()}


def _col_axpy(target, factor, source, ring):
    out = dict(target)
    for r, p in source.items():
        add = ring.mul(factor, p)
        if r in out:
            out[r] = ring.add(out[r], add)
        else:
            out[r] = add
    return {r: p for r, p in out.items() if not ring.poly_is_zero(p)}


class JetRing:
    """Truncated polynomials over Scalars in jet variables.

    A monomial survives iff each exponent respects its cap and the weighted
    degree (sum of weight * exponent) stays within ``max_weight``.
    Polynomials are plain dicts {exponent tuple: Scalar}.
    """

    def __init__(self, names, caps, weights, max_weight, mode="exact"):
        self.names = tuple(names)
        self.caps = tuple(caps)
        self.weights = tuple(weights)
        self.max_weight = max_weight
        self.mode = mode
        self._zero_exp = (0,) * len(self.names)

    def keep(self, exps):
        if any(e > c for e, c in zip(exps, self.caps)):
            return False
        if self.max_weight is not None:
            if sum(e * w for e, w in zip(exps, self.weights)) > self.max_weight:
                return False
        return True

    def from_scalar(self, s: Scalar):
        return {self._zero_exp: s} if not s.is_zero else {}

    def const(self, p) -> Scalar:
        return p.get(self._zero_exp, _zero(self.mode))

    def poly_is_zero(self, p):
        return all(s.is_zero for s in p.values())

    def add(self, p, q):
        out = dict(p)
        for e, s in q.items():
            out[e] = out[e] + s if e in out else s
        return {e: s for e, s in out.items() if not s.is_zero}

    def neg(self, p):
        return {e: -s for e, s in p.items()}

    def mul(self, p, q):
        out = {}
        for e1, s1 in p.items():
            for e2, s2 in q.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if not self.keep(e):
                    continue
                prod = s1 * s2
                out[e] = out[e] + prod if e in out else prod
        return {e: s for e, s in out.items() if not s.is_zero}

    def scale(self, p, s: Scalar):
        return {e: c * s for e, c in p.items() if not (c * s).is_zero}

    def inv(self, p):
        """Inverse of a unit (nonzero constant term) by Neumann series."""
        c0 = self.const(p)
        if c0.is_zero:
            raise ZeroDivisionError("jet polynomial is not a unit")
        c0_inv = c0.inverse()
        n = self.scale({e: s for e, s in p.items() if e != self._zero_exp}, c0_inv)
        steps = sum(self.caps) if self.max_weight is None else self.max_weight
        acc = self.from_scalar(c0_inv)
        power = self.from_scalar(c0_inv)
        for _ in range(steps):
            power = self.neg(self.mul(power, n))
            if self.poly_is_zero(power):
                break
            acc = self.add(acc, power)
        return acc

    def monomials(self):
        ranges = [range(c + 1) for c in self.caps]
        for exps in itertools.product(*ranges):
            if self.keep(exps):
                yield exps


_CONSTANT_RING_CACHE = {}


def _constant_ring(mode):
    ring = _CONSTANT_RING_CACHE.get(mode)
    if ring is None:
        ring = JetRing((), (), (), None, mode=mode)
        _CONSTANT_RING_CACHE[mode] = ring
    return ring


class GrassmannJet:
    """Time-jet of a point: basis columns with jet-polynomial entries."""

    __slots__ = ("window", "times", "order", "ring", "columns", "mode")

    def __init__(self, window, times, order, ring, columns, mode):
        self.window = window
        self.times = tuple(times)
        self.order = order
        self.ring = ring
        self.columns = columns
        self.mode = mode


def gamma_flow(P: GrassmannPoint, times, order: int, sign=None) -> GrassmannJet:
    """Jet of exp(sign * sum_n t_n D^n) . P to the given Taylor order.

    ``times`` lists the flow indices (e.g. (1, 2, 3)).  Jet monomials whose
    weighted degree exceeds the window height are outside the trustworthy
    budget and are dropped by the ring.
    """
    if sign is None:
        sign = FLOW_SIGN
    times = tuple(times)
    if any(n < 1 for n in times):
        raise ValueError("flow indices must be >= 1")
    M = P.window.M
    if times and min(times) * 1 > M:
        raise WindowIndeterminateError("window height cannot absorb the flow")
    ring = JetRing(
        tuple(f"t{n}" for n in times),
        (order,) * len(times),
        times,
        max_weight=M,
        mode=P.mode,
    )
    cols = _point_echelon_columns(P)
    flowed = [_flow_column(col, times, order, sign, ring, P.window) for col in cols]
    return GrassmannJet(P.window, times, order, ring, flowed, P.mode)


def _point_echelon_columns(P: GrassmannPoint):
    """Constant echelon form of a big-cell index-0 point."""
    if len(P.basis) != P.window.M + 1:
        raise BigCellError("point does not have index zero in the window model")
    ring = _constant_ring(P.mode)
    columns = [{d: {(): s} for d, s in v.items()} for v in P.basis]
    assigned = _echelon_columns(columns, P.window.M, ring)
    out = []
    for k in range(P.window.M + 1):
        col = assigned[k]
        out.append({d: ring.const(p) for d, p in col.items()})
    return out


def _flow_column(col, times, order, sign, ring, window):
    out = {}
    sign_s = Scalar.exact(sign) if ring.mode == "exact" else Scalar.approx(float(sign))
    for exps in ring.monomials():
        shift = sum(n * e for n, e in zip(times, exps))
        coeff = _one(ring.mode)
        for e in exps:
            for k in range(1, e + 1):
                coeff = coeff * (
                    Scalar.exact(Fraction(1, k)) if ring.mode == "exact"
                    else Scalar.approx(1.0 / k)
                )
        coeff = coeff * sign_s ** sum(exps)
        if coeff.is_zero:
            continue
        for row, val in col.items():
            r = row + shift
            if r > window.M or r < -window.N:
                continue
            entry = out.setdefault(r, {})
            add = coeff * val
            entry[exps] = entry[exps] + add if exps in entry else add
    return {r: {e: s for e, s in p.items() if not s.is_zero} for r, p in out.items()}


# ---------------------------------------------------------------------------
# wave operators and induced Lax operators


def wave_operator_from_point(P: GrassmannPoint, verify=True) -> MicroDiffOp:
    """The constant Volterra W with W . V_+ = span, read from the echelon
    column with pivot D^0.

    For a general big-cell point this constant operator only reproduces the
    span when the point is generated by a constant Volterra operator
    (equivalently, is stable under multiplication by D); with ``verify`` the
    membership W . D^k in span is checked for every k in the window and a
    failure raises.  The t-dependent wave operator of an arbitrary point is
    the business of :func:`induced_lax_jet`.
    """
    if not big_cell_test(P):
        raise BigCellError("point is not in the big cell")
    if index(P) != 0:
        raise BigCellError("wave operator extraction requires index zero")
    cols = _point_echelon_columns(P)
    tails = cols[0]
    terms = {0: TruncatedSeries.one(mode=P.mode)}
    for d, s in tails.items():
        if d < 0 and not s.is_zero:
            terms[d] = TruncatedSeries.constant(s, mode=P.mode)
    W = MicroDiffOp.from_terms(terms, floor=-P.window.N, exact_floor=False, mode=P.mode)
    if verify:
        mat = P._matrix()
        r0 = rank(mat)
        for k in range(P.window.M + 1):
            vec = _apply_constant_op(W, {k: _one(P.mode)}, P.window)
            aug = [row[:] for row in mat]
            for i, d in enumerate(range(P.window.M, -P.window.N - 1, -1)):
                aug[i].append(vec.get(d, _zero(P.mode)))
            if rank(aug) != r0:
                raise BigCellError(
                    "point is not generated by a constant Volterra operator; "
                    "use the flowed extraction for its t-dependent wave operator"
                )
    return W


def gamma_minus_act(P: GrassmannPoint, c: MicroDiffOp) -> GrassmannPoint:
    """Act by a constant Volterra operator; the induced Lax operator is
    unchanged (stabilizer of the quotient to Lax operators)."""
    _require_constant_volterra(c)
    vectors = [_apply_constant_op(c, v, P.window) for v in P.basis]
    return GrassmannPoint(P.window, vectors)


def induced_lax_jet(jet: GrassmannJet, depth=None, t_order=None) -> OperatorJet:
    """Extract the induced Lax operator of a flowed point as an OperatorJet.

    The t-dependence of the coefficients is read from an internal reading
    flow exp(+ s D), identifying s with the series variable t order by
    order; the jet directions of the input survive as jet variables of the
    output.  ``depth`` bounds the D-window of the result (default N-1),
    ``t_order`` the series order (default: what the window budget allows).
    """
    window = jet.window
    if depth is None:
        depth = window.N - 1
    flow_weight = 0
    if jet.times:
        flow_weight = max(
            sum(n * e for n, e in zip(jet.times, exps))
            for exps in jet.ring.monomials()
        )
    budget = window.M - flow_weight
    if t_order is None:
        t_order = budget
    if t_order < 1 or t_order > budget:
        raise WindowIndeterminateError(
            f"window height {window.M} cannot absorb series order {t_order} "
            f"on top of flow weight {flow_weight}"
        )

    ring = JetRing(
        ("s",) + tuple(f"t{n}" for n in jet.times),
        (t_order,) + (jet.order,) * len(jet.times),
        (1,) + jet.times,
        max_weight=window.M,
        mode=jet.mode,
    )
    columns = []
    for col in jet.columns:
        lifted = {r: {(0,) + e: s for e, s in p.items()} for r, p in col.items()}
        columns.append(_flow_reading(lifted, t_order, ring, window))
    try:
        assigned = _echelon_columns(columns, window.M, ring)
    except BigCellError as exc:
        raise LaxPoleError(str(exc), order=0) from exc

    tails = assigned[0]
    times = jet.times
    exps_by_time = {}
    for r, p in tails.items():
        if r >= 0:
            continue
        for e, s in p.items():
            beta = e[1:]
            exps_by_time.setdefault(beta, {}).setdefault(r, {})[e[0]] = s

    zero_beta = (0,) * len(times)
    terms = {}
    for beta, rows in exps_by_time.items():
        op_terms = {}
        for r, series_map in rows.items():
            coeffs = [series_map.get(a, _zero(jet.mode)) for a in range(t_order + 1)]
            op_terms[r] = TruncatedSeries(coeffs, order=t_order, mode=jet.mode)
        if beta == zero_beta:
            op_terms[0] = TruncatedSeries.one(order=t_order, mode=jet.mode)
        terms[beta] = MicroDiffOp.from_terms(
            op_terms, floor=-window.N, order=t_order, exact_floor=False, mode=jet.mode
        )
    if zero_beta not in terms:
        terms[zero_beta] = MicroDiffOp.from_terms(
            {0: TruncatedSeries.one(order=t_order, mode=jet.mode)},
            floor=-window.N, order=t_order, exact_floor=False, mode=jet.mode,
        )
    W = OperatorJet(times, jet.order, terms, mode=jet.mode)
    Winv = _jet_volterra_inverse(W, depth + 1)
    D1 = OperatorJet.constant(MicroDiffOp.D_power(1, mode=jet.mode), times, jet.order)
    L = W.mul(D1).mul(Winv, floor=-depth)
    return L


def _flow_reading(col, order, ring, window):
    """Multiply a lifted column by exp(+ s D) truncated at s^order."""
    out = {}
    for a in range(order + 1):
        coeff = Scalar.exact(Fraction(1, _fact(a))) if ring.mode == "exact" \
            else Scalar.approx(1.0 / _fact(a))
        for row, p in col.items():
            r = row + a
            if r > window.M or r < -window.N:
                continue
            entry = out.setdefault(r, {})
            for e, s in p.items():
                e2 = (e[0] + a,) + e[1:]
                if not ring.keep(e2):
                    continue
                add = s * coeff
                entry[e2] = entry[e2] + add if e2 in entry else add
    return {r: {e: s for e, s in p.items() if not s.is_zero} for r, p in out.items()}


def _fact(n):
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out


def _jet_volterra_inverse(W: OperatorJet, depth: int) -> OperatorJet:
    from .mdo import volterra_inverse

    base_inv = volterra_inverse(W.base, depth)
    times, order, mode = W.times, W.order, W.mode
    zero_beta = (0,) * len(times)
    tail = OperatorJet(times, order,
                       {a: op for a, op in W.terms.items() if a != zero_beta},
                       mode=mode)
    inv0 = OperatorJet.constant(base_inv, times, order)
    acc = inv0
    power = inv0
    for _ in range(order):
        power = inv0.mul(tail.mul(power, floor=-depth), floor=-depth).map_terms(
            lambda op: -op
        )
        if not power.terms:
            break
        acc = acc + power
    return acc


def point_to_lax(P, depth=None, t_order=None) -> LaxOperator:
    """Induced Lax operator W D W^{-1} of a big-cell point (or flowed jet).

    For a plain point the t-dependence comes entirely from the reading flow;
    for a jet the base slot is returned.  Raises LaxPoleError when the point
    leaves the big cell (transversality fails at the base, which is the only
    order a formal window jet can detect).
    """
    if isinstance(P, GrassmannPoint):
        jet = gamma_flow(P, (), 0)
    else:
        jet = P
    L = induced_lax_jet(jet, depth=depth, t_order=t_order)
    base = L.base
    if base.mode == "exact":
        if not base.coeff(0).is_zero:
            raise LaxPoleError("degree-0 coefficient of induced operator is nonzero")
    return LaxOperator(base)


def calibrate_flow_sign(window=None, t_order=3):
    """Measure the sign for which dL/dt_1 from the flow equals [L, (L)_+].

    Returns the calibrated sign; the module constant FLOW_SIGN must match.
    """
    from .kp import kp_vector_field
    from .mdo import commutator, plus_part

    if window is None:
        window = FockWindow(4, 6)
    tails = {
        -1: Fraction(1, 2), -2: Fraction(-1, 3), -3: Fraction(2, 5), -4: Fraction(1, 7)
    }
    basis = []
    for k in range(window.M + 1):
        v = {k: Scalar.exact(1)}
        for d, c in tails.items():
            v[d] = Scalar.exact(c * Fraction(k + 1, k + 2))
        basis.append(v)
    P = GrassmannPoint(window, basis)
    for sign in (-1, 1):
        jet = gamma_flow(P, (1,), 1, sign=sign)
        L = induced_lax_jet(jet, depth=window.N - 1, t_order=t_order)
        base = L.base
        dL_dt1 = L.time_derivative(1).base
        field = kp_vector_field(LaxOperator(base), 1, floor=-(window.N - 1))
        if dL_dt1.agrees_with(field, floor=-(window.N - 1), order=t_order - 1):
            return sign
    raise BigCellError("no flow sign satisfies the first-flow calibration")
