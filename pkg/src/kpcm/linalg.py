"""Small exact linear algebra over Scalar entries (dense, n is small here).

Approximate-mode callers should prefer numpy; these routines exist for the
exact rational paths (rank-one orbit checks, echelon reduction, exact
characteristic polynomials).
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ScalarModeError
from .scalars import Scalar, zero_like


def mat_mode(rows):
    mode = None
    for row in rows:
        for x in row:
            if mode is None:
                mode = x.mode
            elif x.mode != mode:
                raise ScalarModeError("matrix entries mix scalar modes")
    return mode or "exact"


def identity(n, mode="exact"):
    one = Scalar.exact(1) if mode == "exact" else Scalar.approx(1.0)
    zero = Scalar.exact(0) if mode == "exact" else Scalar.approx(0.0)
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def mat_add(A, B):
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_sub(A, B):
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_scale(A, s):
    return [[a * s for a in row] for row in A]


def mat_mul(A, B):
    n, m, p = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = zero_like(A[0][0])
            for k in range(m):
                acc = acc + A[i][k] * B[k][j]
            row.append(acc)
        out.append(row)
    return out


def mat_pow(A, k):
    n = len(A)
    out = identity(n, mat_mode(A))
    for _ in range(k):
        out = mat_mul(out, A)
    return out


def trace(A):
    acc = zero_like(A[0][0])
    for i in range(len(A)):
        acc = acc + A[i][i]
    return acc


def transpose(A):
    return [list(col) for col in zip(*A)]


def _pivot_ok(x, tol):
    if x.is_exact:
        return not x.is_zero
    return abs(x.value) > tol


def rank(A, tol=1e-12):
    """Row-echelon rank (exact pivoting in exact mode)."""
    if not A or not A[0]:
        return 0
    M = [row[:] for row in A]
    nrows, ncols = len(M), len(M[0])
    r = 0
    for c in range(ncols):
        pivot = None
        best = -1.0
        for i in range(r, nrows):
            if _pivot_ok(M[i][c], tol):
                if M[i][c].is_exact:
                    pivot = i
                    break
                mag = abs(M[i][c].value)
                if mag > best:
                    best, pivot = mag, i
        if pivot is None:
            continue
        M[r], M[pivot] = M[pivot], M[r]
        inv = M[r][c].inverse()
        M[r] = [x * inv for x in M[r]]
        for i in range(nrows):
            if i != r and _pivot_ok(M[i][c], 0.0 if M[i][c].is_exact else tol / 10):
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        r += 1
        if r == nrows:
            break
    return r


def solve(A, b, tol=1e-12):
    """Solve A x = b for square invertible A; returns list of Scalars."""
    n = len(A)
    M = [A[i][:] + [b[i]] for i in range(n)]
    for c in range(n):
        pivot = None
        best = -1.0
        for i in range(c, n):
            if _pivot_ok(M[i][c], tol):
                if M[i][c].is_exact:
                    pivot = i
                    break
                mag = abs(M[i][c].value)
                if mag > best:
                    best, pivot = mag, i
        if pivot is None:
            raise ZeroDivisionError("singular matrix in solve")
        M[c], M[pivot] = M[pivot], M[c]
        inv = M[c][c].inverse()
        M[c] = [x * inv for x in M[c]]
        for i in range(n):
            if i != c and not M[i][c].is_zero:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[c])]
    return [M[i][n] for i in range(n)]


def inverse(A, tol=1e-12):
    n = len(A)
    cols = []
    mode = mat_mode(A)
    for j in range(n):
        e = [Scalar.exact(1) if i == j else Scalar.exact(0) for i in range(n)]
        if mode == "approx":
            e = [Scalar.approx(1.0) if i == j else Scalar.approx(0.0) for i in range(n)]
        cols.append(solve(A, e, tol))
    return transpose(cols)


def det(A):
    """Exact determinant by fraction-free-ish Gaussian elimination."""
    n = len(A)
    M = [row[:] for row in A]
    mode = mat_mode(A)
    sign = 1
    acc = Scalar.exact(1) if mode == "exact" else Scalar.approx(1.0)
    for c in range(n):
        pivot = None
        for i in range(c, n):
            if not M[i][c].is_zero:
                pivot = i
                break
        if pivot is None:
            return zero_like(acc)
        if pivot != c:
            M[c], M[pivot] = M[pivot], M[c]
            sign = -sign
        p = M[c][c]
        acc = acc * p
        inv = p.inverse()
        for i in range(c + 1, n):
            if not M[i][c].is_zero:
                f = M[i][c] * inv
                M[i] = [x - f * y for x, y in zip(M[i], M[c])]
    if sign < 0:
        acc = -acc
    return acc


def char_poly(A):
    """Characteristic polynomial of an exact matrix, monic, via
    Faddeev-LeVerrier.  Returns coefficients [c0, c1, ..., cn] with
    p(t) = sum c_k t^k and c_n = 1."""
    n = len(A)
    mode = mat_mode(A)
    one = Scalar.exact(1) if mode == "exact" else Scalar.approx(1.0)
    coeffs = [None] * (n + 1)
    coeffs[n] = one
    M = identity(n, mode)
    for k in range(1, n + 1):
        M = mat_mul(A, M)
        t = trace(M)
        k_scalar = Scalar.exact(k) if mode == "exact" else Scalar.approx(float(k))
        ck = -(t / k_scalar)
        coeffs[n - k] = ck
        for i in range(n):
            M[i][i] = M[i][i] + ck
    return coeffs


def nullspace(A, tol=1e-12):
    """Basis of the kernel of A (list of column vectors)."""
    if not A:
        return []
    M = [row[:] for row in A]
    nrows, ncols = len(M), len(M[0])
    mode = mat_mode(A)
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, nrows):
            if _pivot_ok(M[i][c], tol):
                pivot = i
                break
        if pivot is None:
            continue
        M[r], M[pivot] = M[pivot], M[r]
        inv = M[r][c].inverse()
        M[r] = [x * inv for x in M[r]]
        for i in range(nrows):
            if i != r and not M[i][c].is_zero:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    zero = Scalar.exact(0) if mode == "exact" else Scalar.approx(0.0)
    one = Scalar.exact(1) if mode == "exact" else Scalar.approx(1.0)
    for f in free:
        v = [zero] * ncols
        v[f] = one
        for r_i, c_i in enumerate(pivots):
            v[c_i] = -M[r_i][f]
        basis.append(v)
    return basis


def rational_roots(coeffs):
    """All rational roots (with multiplicity) of an exact polynomial given by
    Scalar coefficients [c0..cn].  Returns (roots, remainder_degree)."""
    poly = [c.value.re for c in coeffs]
    if any(c.value.im for c in coeffs):
        raise ValueError("rational root search requires real rational coefficients")
    while poly and poly[-1] == 0:
        poly.pop()
    roots = []
    # clear denominators -> integer polynomial
    while len(poly) > 1:
        from math import gcd

        den = 1
        for c in poly:
            den = den * c.denominator // gcd(den, c.denominator)
        ints = [int(c * den) for c in poly]
        g = 0
        for c in ints:
            g = gcd(g, c)
        if g > 1:
            ints = [c // g for c in ints]
        # candidate roots p/q, p | ints[0], q | ints[-1]
        a0, an = ints[0], ints[-1]
        if a0 == 0:
            root = Fraction(0)
        else:
            root = None
            for p in _divisors(abs(a0)):
                for q in _divisors(abs(an)):
                    for s in (1, -1):
                        cand = Fraction(s * p, q)
                        if _poly_eval(ints, cand) == 0:
                            root = cand
                            break
                    if root is not None:
                        break
                if root is not None:
                    break
            if root is None:
                break
        roots.append(root)
        poly = _deflate(poly, root)
    return roots, len(poly) - 1


def _divisors(n):
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return sorted(out)


def _poly_eval(coeffs, x):
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _deflate(poly, root):
    """Divide by (x - root); poly given low-to-high."""
    n = len(poly) - 1
    out = [Fraction(0)] * n
    acc = Fraction(0)
    for k in range(n, 0, -1):
        acc = poly[k] + acc * root
        out[k - 1] = acc
    return out
