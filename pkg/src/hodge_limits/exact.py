"""Exact linear algebra over the Gaussian rationals Q(i).

Scalars are `GQ` values backed by gmpy2 rationals.  Matrices are immutable
row-major tables of scalars, subspaces are stored by the reduced row echelon
form of a spanning set (so equal spans compare equal), and filtrations are
nested chains of subspaces that stabilise outside a finite index range.

Pairings follow the convention Q(v, w) = w^H Q v: linear in the first slot and
conjugate-linear in the second.
"""

from fractions import Fraction

import numpy as np
from gmpy2 import mpq

_ZERO_Q = mpq(0)
_ONE_Q = mpq(1)


class GQ:
    """Gaussian rational re + im*i."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _to_mpq(re)
        self.im = _to_mpq(im)

    @staticmethod
    def _raw(re, im):
        s = object.__new__(GQ)
        s.re = re
        s.im = im
        return s

    @staticmethod
    def of(x):
        if isinstance(x, GQ):
            return x
        if isinstance(x, complex):
            raise TypeError("floating point value where an exact scalar is required")
        return GQ(x)

    def __add__(self, o):
        if not isinstance(o, GQ):
            o = GQ.of(o)
        return GQ._raw(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        if not isinstance(o, GQ):
            o = GQ.of(o)
        return GQ._raw(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return GQ.of(o) - self

    def __neg__(self):
        return GQ._raw(-self.re, -self.im)

    def __mul__(self, o):
        if not isinstance(o, GQ):
            o = GQ.of(o)
        a, b, c, d = self.re, self.im, o.re, o.im
        if b == 0 and d == 0:
            return GQ._raw(a * c, _ZERO_Q)
        return GQ._raw(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if not isinstance(o, GQ):
            o = GQ.of(o)
        c, d = o.re, o.im
        if d == 0:
            if c == 0:
                raise ZeroDivisionError("division by zero in Q(i)")
            return GQ._raw(self.re / c, self.im / c)
        den = c * c + d * d
        a, b = self.re, self.im
        return GQ._raw((a * c + b * d) / den, (b * c - a * d) / den)

    def __rtruediv__(self, o):
        return GQ.of(o) / self

    def __pow__(self, k):
        k = int(k)
        if k < 0:
            return (GQ(1) / self) ** (-k)
        out = GQ(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self):
        return GQ._raw(self.re, -self.im)

    def abs2(self):
        return self.re * self.re + self.im * self.im

    def is_zero(self):
        return self.re == 0 and self.im == 0

    def is_real(self):
        return self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, o):
        if isinstance(o, GQ):
            return self.re == o.re and self.im == o.im
        try:
            o = GQ.of(o)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __float__(self):
        if self.im != 0:
            raise TypeError("non-real scalar")
        return float(self.re)

    def to_fraction(self):
        if self.im != 0:
            raise TypeError("non-real scalar")
        return Fraction(int(self.re.numerator), int(self.re.denominator))

    def pair(self):
        """[[re_num, re_den], [im_num, im_den]] with canonical integers."""
        return [[int(self.re.numerator), int(self.re.denominator)],
                [int(self.im.numerator), int(self.im.denominator)]]

    def __repr__(self):
        return "GQ(%s)" % self

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return "%si" % self.im
        sign = "+" if self.im > 0 else "-"
        return "%s%s%si" % (self.re, sign, abs(self.im))


def _to_mpq(x):
    if isinstance(x, float):
        raise TypeError("floating point value where an exact rational is required")
    return mpq(x)


ZERO = GQ(0)
ONE = GQ(1)
I = GQ(0, 1)


def scalar(x):
    return GQ.of(x)


def rationalize(x, max_den=10**6):
    """Nearest Gaussian rational (by continued fractions) and the rounding residual."""
    z = complex(x)
    re = Fraction(z.real).limit_denominator(max_den)
    im = Fraction(z.imag).limit_denominator(max_den)
    approx = GQ(re, im)
    return approx, abs(complex(approx) - z)


# ---------------------------------------------------------------- matrices


class Matrix:
    """Immutable exact matrix; `rows` is a tuple of tuples of GQ."""

    __slots__ = ("rows", "nrows", "ncols", "_hash")

    def __init__(self, rows, ncols=None):
        rows = tuple(tuple(GQ.of(x) for x in r) for r in rows)
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != ncols:
                raise ValueError("ragged matrix rows")
        self.rows = rows
        self.nrows = len(rows)
        self.ncols = ncols
        self._hash = None

    @staticmethod
    def _raw(rows, ncols):
        m = object.__new__(Matrix)
        m.rows = rows
        m.nrows = len(rows)
        m.ncols = ncols
        m._hash = None
        return m

    @staticmethod
    def zeros(r, c=None):
        c = r if c is None else c
        return Matrix._raw(tuple((ZERO,) * c for _ in range(r)), c)

    @staticmethod
    def identity(n):
        return Matrix._raw(tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)), n)

    @staticmethod
    def diag(values):
        vals = [GQ.of(v) for v in values]
        n = len(vals)
        return Matrix._raw(tuple(tuple(vals[i] if i == j else ZERO for j in range(n)) for i in range(n)), n)

    @staticmethod
    def from_columns(cols, nrows=None):
        cols = [tuple(GQ.of(x) for x in c) for c in cols]
        if not cols:
            return Matrix._raw(tuple(() for _ in range(nrows or 0)), 0)
        n = len(cols[0])
        return Matrix._raw(tuple(tuple(c[i] for c in cols) for i in range(n)), len(cols))

    @staticmethod
    def block_diag(blocks):
        n = sum(b.nrows for b in blocks)
        m = sum(b.ncols for b in blocks)
        out = [[ZERO] * m for _ in range(n)]
        r0 = c0 = 0
        for b in blocks:
            for i, row in enumerate(b.rows):
                out[r0 + i][c0:c0 + b.ncols] = row
            r0 += b.nrows
            c0 += b.ncols
        return Matrix._raw(tuple(tuple(r) for r in out), m)

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def column(self, j):
        return tuple(r[j] for r in self.rows)

    def columns(self):
        return [self.column(j) for j in range(self.ncols)]

    def __eq__(self, o):
        return isinstance(o, Matrix) and self.ncols == o.ncols and self.rows == o.rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ncols, self.rows))
        return self._hash

    def _check_shape(self, o):
        if self.shape != o.shape:
            raise ValueError("shape mismatch %s vs %s" % (self.shape, o.shape))

    def __add__(self, o):
        self._check_shape(o)
        return Matrix._raw(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, o.rows)), self.ncols)

    def __sub__(self, o):
        self._check_shape(o)
        return Matrix._raw(tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.rows, o.rows)), self.ncols)

    def __neg__(self):
        return Matrix._raw(tuple(tuple(-a for a in r) for r in self.rows), self.ncols)

    def __mul__(self, c):
        c = GQ.of(c)
        return Matrix._raw(tuple(tuple(a * c for a in r) for r in self.rows), self.ncols)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (ONE / GQ.of(c))

    def __matmul__(self, o):
        if isinstance(o, Matrix):
            if self.ncols != o.nrows:
                raise ValueError("shape mismatch for product %s @ %s" % (self.shape, o.shape))
            cols = o.columns()
            out = []
            for r in self.rows:
                nz = [(k, a) for k, a in enumerate(r) if a]
                row = []
                for c in cols:
                    s = ZERO
                    for k, a in nz:
                        b = c[k]
                        if b:
                            s = s + a * b
                    row.append(s)
                out.append(tuple(row))
            return Matrix._raw(tuple(out), o.ncols)
        return self.apply(o)

    def apply(self, v):
        if len(v) != self.ncols:
            raise ValueError("vector length mismatch")
        out = []
        for r in self.rows:
            s = ZERO
            for a, b in zip(r, v):
                if a and b:
                    s = s + a * b
            out.append(s)
        return tuple(out)

    @property
    def T(self):
        if not self.nrows:
            return Matrix.zeros(self.ncols, 0)
        return Matrix._raw(tuple(zip(*self.rows)), self.nrows)

    @property
    def H(self):
        """Conjugate transpose."""
        if not self.nrows:
            return Matrix.zeros(self.ncols, 0)
        return Matrix._raw(tuple(tuple(a.conj() for a in c) for c in zip(*self.rows)), self.nrows)

    def conj(self):
        return Matrix._raw(tuple(tuple(a.conj() for a in r) for r in self.rows), self.ncols)

    def is_zero(self):
        return all(not a for r in self.rows for a in r)

    def trace(self):
        s = ZERO
        for i in range(min(self.nrows, self.ncols)):
            s = s + self.rows[i][i]
        return s

    def power(self, k):
        out = Matrix.identity(self.nrows)
        for _ in range(k):
            out = out @ self
        return out

    def submatrix(self, rows, cols):
        return Matrix._raw(tuple(tuple(self.rows[i][j] for j in cols) for i in rows), len(cols))

    def vec(self):
        """Row-major flattening, matching kron(e_i, e_j) <-> E_ij."""
        return tuple(a for r in self.rows for a in r)

    @staticmethod
    def unvec(v, n, m=None):
        m = n if m is None else m
        v = tuple(GQ.of(x) for x in v)
        return Matrix._raw(tuple(v[i * m:(i + 1) * m] for i in range(n)), m)

    def to_numpy(self):
        return np.array([[complex(a) for a in r] for r in self.rows], dtype=complex).reshape(self.nrows, self.ncols)

    def tolist(self):
        return [list(r) for r in self.rows]

    def __repr__(self):
        return "Matrix(%s)" % [[str(a) for a in r] for r in self.rows]


def kron(A, B):
    rows = []
    for ra in A.rows:
        for rb in B.rows:
            rows.append(tuple(a * b for a in ra for b in rb))
    return Matrix._raw(tuple(rows), A.ncols * B.ncols)


def commutator(A, B):
    return A @ B - B @ A


def is_nilpotent(A):
    P = A
    for _ in range(A.nrows):
        if P.is_zero():
            return True
        P = P @ A
    return P.is_zero()


def nilpotency_index(A):
    """Largest m with A^m != 0 (0 for the zero matrix)."""
    if not is_nilpotent(A):
        raise ValueError("matrix is not nilpotent")
    m = 0
    P = A
    while not P.is_zero():
        m += 1
        P = P @ A
    return m


def nilpotent_exp(A, scale=1):
    """exp(scale*A) as the finite exponential series; A must be nilpotent."""
    if not is_nilpotent(A):
        raise ValueError("nilpotent_exp: matrix is not nilpotent")
    s = GQ.of(scale)
    B = A * s
    out = Matrix.identity(A.nrows)
    term = Matrix.identity(A.nrows)
    k = 1
    while True:
        term = (term @ B) / k
        if term.is_zero():
            return out
        out = out + term
        k += 1


# ---------------------------------------------------------------- elimination


def rref(rows, ncols):
    """Reduced row echelon form.  Returns (nonzero rows as lists, pivot columns)."""
    m = [list(r) for r in rows]
    pivots = []
    pr = 0
    nr = len(m)
    for c in range(ncols):
        if pr == nr:
            break
        sel = None
        for i in range(pr, nr):
            if m[i][c]:
                sel = i
                break
        if sel is None:
            continue
        if sel != pr:
            m[pr], m[sel] = m[sel], m[pr]
        piv = m[pr][c]
        if piv != ONE:
            inv = ONE / piv
            m[pr] = [x * inv if x else x for x in m[pr]]
        prow = m[pr]
        nzc = [j for j in range(c, ncols) if prow[j]]
        for i in range(nr):
            if i != pr:
                f = m[i][c]
                if f:
                    ri = m[i]
                    for j in nzc:
                        ri[j] = ri[j] - f * prow[j]
        pivots.append(c)
        pr += 1
    return m[:pr], pivots


def kernel_vectors(rows, ncols):
    """Basis of {x : R x = 0} for the matrix with the given rows."""
    red, piv = rref(rows, ncols)
    pivset = set(piv)
    out = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [ZERO] * ncols
        v[f] = ONE
        for r, p in zip(red, piv):
            if r[f]:
                v[p] = -r[f]
        out.append(tuple(v))
    return out


def det(A):
    if A.nrows != A.ncols:
        raise ValueError("det of non-square matrix")
    m = [list(r) for r in A.rows]
    n = A.nrows
    d = ONE
    for c in range(n):
        sel = None
        for i in range(c, n):
            if m[i][c]:
                sel = i
                break
        if sel is None:
            return ZERO
        if sel != c:
            m[c], m[sel] = m[sel], m[c]
            d = -d
        piv = m[c][c]
        d = d * piv
        for i in range(c + 1, n):
            f = m[i][c] / piv
            if f:
                for j in range(c, n):
                    m[i][j] = m[i][j] - f * m[c][j]
    return d


def inverse(A):
    n = A.nrows
    if n != A.ncols:
        raise ValueError("inverse of non-square matrix")
    aug = [list(r) + [ONE if i == j else ZERO for j in range(n)] for i, r in enumerate(A.rows)]
    red, piv = rref(aug, 2 * n)
    if piv[:n] != list(range(n)) or len(red) < n:
        raise ZeroDivisionError("matrix is singular")
    return Matrix._raw(tuple(tuple(r[n:]) for r in red), n)


def solve(A, B):
    """Unique X with A X = B (A may be rectangular); raises if none or not unique."""
    n = A.ncols
    aug = [list(ra) + list(rb) for ra, rb in zip(A.rows, B.rows)]
    red, piv = rref(aug, n + B.ncols)
    if any(p >= n for p in piv):
        raise ValueError("linear system is inconsistent")
    if len(piv) < n:
        raise ValueError("linear system has no unique solution")
    return Matrix._raw(tuple(tuple(r[n:]) for r in red[:n]), B.ncols)


def solve_vector(A, b):
    return solve(A, Matrix.from_columns([b])).column(0)


def leading_minors(M):
    """Leading principal minors, computed by elimination without pivoting."""
    n = M.nrows
    m = [list(r) for r in M.rows]
    minors = []
    d = ONE
    for c in range(n):
        piv = m[c][c]
        if not piv:
            # the minor is the product of pivots so far times this one
            minors.append(ZERO)
            # remaining minors need a general determinant
            for k in range(c + 1, n):
                minors.append(det(M.submatrix(range(k + 1), range(k + 1))))
            return minors
        d = d * piv
        minors.append(d)
        for i in range(c + 1, n):
            f = m[i][c] / piv
            if f:
                for j in range(c, n):
                    m[i][j] = m[i][j] - f * m[c][j]
    return minors


def is_hermitian(M):
    return M.nrows == M.ncols and M == M.H


def is_positive_definite_hermitian(M):
    """Sylvester's criterion with exact minors."""
    if not is_hermitian(M):
        raise ValueError("matrix is not hermitian")
    for d in leading_minors(M):
        if not d.is_real():
            raise ArithmeticError("hermitian minor with imaginary part")
        if d.re <= 0:
            return False
    return True


# ---------------------------------------------------------------- subspaces


class Subspace:
    """Span of vectors in C^n, stored as the reduced row echelon form of a spanning set."""

    __slots__ = ("ambient_dim", "rows", "pivots", "_hash")

    def __init__(self, vectors, ambient_dim):
        vecs = [tuple(GQ.of(x) for x in v) for v in vectors]
        for v in vecs:
            if len(v) != ambient_dim:
                raise ValueError("vector length %d in ambient dimension %d" % (len(v), ambient_dim))
        red, piv = rref(vecs, ambient_dim)
        self.ambient_dim = ambient_dim
        self.rows = tuple(tuple(r) for r in red)
        self.pivots = tuple(piv)
        self._hash = None

    @staticmethod
    def zero(n):
        return Subspace([], n)

    @staticmethod
    def full(n):
        return Subspace(Matrix.identity(n).rows, n)

    @staticmethod
    def span_columns(A):
        return Subspace(A.columns(), A.nrows)

    @property
    def dim(self):
        return len(self.rows)

    def basis(self):
        return list(self.rows)

    def matrix(self):
        """Basis vectors as columns."""
        return Matrix.from_columns(self.rows, self.ambient_dim) if self.rows else Matrix.zeros(self.ambient_dim, 0)

    def is_zero(self):
        return not self.rows

    def is_full(self):
        return len(self.rows) == self.ambient_dim

    def __eq__(self, o):
        return isinstance(o, Subspace) and self.ambient_dim == o.ambient_dim and self.rows == o.rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ambient_dim, self.rows))
        return self._hash

    def _same(self, o):
        if self.ambient_dim != o.ambient_dim:
            raise ValueError("ambient dimension mismatch %d vs %d" % (self.ambient_dim, o.ambient_dim))

    def __add__(self, o):
        self._same(o)
        return Subspace(self.rows + o.rows, self.ambient_dim)

    def annihilator(self):
        """{f : sum_i f_i u_i = 0 for u in self}, bilinear (no conjugation)."""
        return Subspace(kernel_vectors(self.rows, self.ambient_dim), self.ambient_dim)

    def __and__(self, o):
        self._same(o)
        if self.is_zero() or o.is_zero():
            return Subspace.zero(self.ambient_dim)
        if self.is_full():
            return o
        if o.is_full():
            return self
        # Zassenhaus: reduce [u | u], [w | 0]; rows with zero left half span the meet
        n = self.ambient_dim
        zero = (ZERO,) * n
        rows = [u + u for u in self.rows] + [w + zero for w in o.rows]
        red, piv = rref(rows, 2 * n)
        return Subspace([tuple(r[n:]) for r, p in zip(red, piv) if p >= n], n)

    def contains(self, o):
        self._same(o)
        if o.dim > self.dim:
            return False
        return (self + o).dim == self.dim

    def contains_vector(self, v):
        if all(not x for x in v):
            return True
        return Subspace(self.rows + (tuple(v),), self.ambient_dim).dim == self.dim

    def image(self, A):
        return Subspace([A.apply(v) for v in self.rows], A.nrows)

    def preimage(self, A):
        """{v : A v in self}."""
        ann = self.annihilator()
        if ann.is_zero():
            return Subspace.full(A.ncols)
        cond = (ann.matrix().T @ A).rows
        return Subspace(kernel_vectors(cond, A.ncols), A.ncols)

    def coordinates(self, v):
        """Coefficients of v in the stored basis."""
        return solve_vector(self.matrix(), v)

    def complement_in(self, big):
        """Deterministic complement of self inside big: greedy choice among big's basis vectors."""
        if not big.contains(self):
            raise ValueError("subspace is not contained in the ambient piece")
        chosen = []
        cur = self
        for v in big.rows:
            nxt = Subspace(cur.rows + (v,), self.ambient_dim)
            if nxt.dim > cur.dim:
                chosen.append(v)
                cur = nxt
        return Subspace(chosen, self.ambient_dim)

    def __repr__(self):
        return "Subspace(dim=%d, %s)" % (self.dim, [[str(a) for a in r] for r in self.rows])


def span(vectors, n=None):
    vectors = list(vectors)
    if n is None:
        n = len(vectors[0])
    return Subspace(vectors, n)


def subspace_combine(op, U, V):
    if U.ambient_dim != V.ambient_dim:
        raise ValueError("dimension mismatch %d vs %d" % (U.ambient_dim, V.ambient_dim))
    if op == "sum":
        return U + V
    if op == "intersect":
        return U & V
    if op == "contains":
        return U.contains(V)
    raise ValueError("unknown subspace operation %r" % (op,))


def sum_all(spaces, n):
    rows = []
    for s in spaces:
        rows.extend(s.rows)
    return Subspace(rows, n)


def intersect_all(spaces, n):
    out = Subspace.full(n)
    for s in spaces:
        out = out & s
    return out


def rank_kernel_image(A):
    red, piv = rref(A.rows, A.ncols)
    kernel = Subspace(kernel_vectors(A.rows, A.ncols), A.ncols)
    image = Subspace(A.columns(), A.nrows)
    return len(piv), kernel, image


def kernel(A):
    return Subspace(kernel_vectors(A.rows, A.ncols), A.ncols)


def image(A):
    return Subspace(A.columns(), A.nrows)


def rank(A):
    return len(rref(A.rows, A.ncols)[1])


def is_direct_sum(spaces, n):
    return sum(s.dim for s in spaces) == n and sum_all(spaces, n).dim == n


def direct_sum_projections(spaces, n):
    """Projections onto each summand of a direct sum decomposition of C^n."""
    if not is_direct_sum(spaces, n):
        raise ValueError("subspaces do not form a direct sum decomposition")
    cols = []
    blocks = []
    for s in spaces:
        blocks.append(range(len(cols), len(cols) + s.dim))
        cols.extend(s.rows)
    if n == 0:
        return [Matrix.zeros(0) for _ in spaces]
    P = Matrix.from_columns(cols)
    Pinv = inverse(P)
    out = []
    for b in blocks:
        if not len(b):
            out.append(Matrix.zeros(n))
            continue
        out.append(P.submatrix(range(n), b) @ Pinv.submatrix(b, range(n)))
    return out


def eigenspace(A, value):
    return kernel(A - Matrix.identity(A.nrows) * value)


def integer_spectrum(A, bound=None):
    """Eigenspaces of a semisimple matrix whose eigenvalues are integers in [-bound, bound]."""
    n = A.nrows
    bound = n if bound is None else bound
    out = {}
    total = 0
    for k in range(-bound, bound + 1):
        E = eigenspace(A, k)
        if E.dim:
            out[k] = E
            total += E.dim
    if total != n:
        raise ValueError("matrix is not semisimple with integer spectrum in [-%d, %d]" % (bound, bound))
    return out


def rational_spectrum(A, max_den=10**6):
    """Eigenspaces of a semisimple matrix with Gaussian-rational eigenvalues.

    Eigenvalues are located numerically, snapped to rationals and then confirmed
    exactly; the decomposition is rejected unless the exact eigenspaces fill C^n.
    """
    n = A.nrows
    if n == 0:
        return {}
    guesses = np.linalg.eigvals(A.to_numpy())
    cands = []
    for g in guesses:
        lam, _ = rationalize(g, max_den)
        if lam not in cands:
            cands.append(lam)
    out = {}
    total = 0
    for lam in cands:
        E = eigenspace(A, lam)
        if E.dim:
            out[lam] = E
            total += E.dim
    if total != n:
        raise ValueError("matrix is not semisimple with rational spectrum")
    return out


def spectral_projections(spectrum, n):
    """{eigenvalue: projection} for a dict {eigenvalue: eigenspace}."""
    keys = list(spectrum)
    projs = direct_sum_projections([spectrum[k] for k in keys], n)
    return dict(zip(keys, projs))


def grade_components(A, projections):
    """Components of A under the ad-grading of a semisimple operator.

    `projections` maps eigenvalue -> projection; returns {a - b: sum P_a A P_b},
    dropping zero components.  Computed in an eigenbasis: conjugate A there, mask
    the blocks of each degree and conjugate back.
    """
    n = A.nrows
    cols, labels = [], []
    for a, Pa in projections.items():
        for v in Subspace.span_columns(Pa).rows:
            cols.append(v)
            labels.append(a)
    if not cols:
        return {}
    C = Matrix.from_columns(cols)
    Ci = inverse(C)
    Ae = Ci @ A @ C
    masks = {}
    for i, a in enumerate(labels):
        for j, b in enumerate(labels):
            x = Ae.rows[i][j]
            if x:
                masks.setdefault(a - b, {})[(i, j)] = x
    out = {}
    for d, entries in masks.items():
        M = Matrix._raw(tuple(tuple(entries.get((i, j), ZERO) for j in range(n)) for i in range(n)), n)
        out[d] = C @ M @ Ci
    return out


class Pairing:
    """A nondegenerate form Q(v, w) = w^H Q v with its adjoint A -> Q^{-1} A^H Q."""

    def __init__(self, Q):
        if Q.nrows != Q.ncols:
            raise ValueError("pairing matrix must be square")
        self.Q = Q
        self.n = Q.nrows
        try:
            self.Qinv = inverse(Q) if self.n else Q
        except ZeroDivisionError:
            raise ValueError("pairing matrix is singular") from None

    def __call__(self, v, w):
        Qv = self.Q.apply(v)
        s = ZERO
        for a, b in zip(Qv, (GQ.of(x) for x in w)):
            if a and b:
                s = s + a * b.conj()
        return s

    def dagger(self, A):
        return self.Qinv @ A.H @ self.Q

    def perp(self, U):
        """{v : Q(v, x) = 0 for all x in U}."""
        if U.is_zero():
            return Subspace.full(self.n)
        cond = (U.matrix().H @ self.Q).rows
        return Subspace(kernel_vectors(cond, self.n), self.n)

    def gram(self, U):
        """Gram matrix G[i][j] = Q(u_j, u_i) of the stored basis."""
        B = U.matrix()
        return B.H @ self.Q @ B


# ---------------------------------------------------------------- filtrations


class Filtration:
    """Decreasing (F^p) or increasing (W_k) chain of subspaces of C^n.

    For a decreasing filtration F^p = C^n when p <= lo and F^p = 0 when p >= hi;
    for an increasing one W_k = 0 when k <= lo and W_k = C^n when k >= hi.  The
    steps strictly between lo and hi are stored explicitly.
    """

    __slots__ = ("dim", "decreasing", "lo", "hi", "spaces")

    def __init__(self, dim, steps, decreasing=True):
        steps = dict(steps)
        self.dim = dim
        self.decreasing = decreasing
        full = Subspace.full(dim)
        zero = Subspace.zero(dim)
        if not steps:
            raise ValueError("a filtration needs at least one listed step")
        keys = sorted(steps)
        if keys != list(range(keys[0], keys[-1] + 1)):
            raise ValueError("filtration indices must be contiguous")
        below, above = (full, zero) if decreasing else (zero, full)
        seq = [below] + [steps[k] for k in keys] + [above]
        for s in seq:
            if s.ambient_dim != dim:
                raise ValueError("filtration step in wrong ambient dimension")
        for a, b in zip(seq, seq[1:]):
            if decreasing and not a.contains(b):
                raise ValueError("decreasing filtration is not nested")
            if not decreasing and not b.contains(a):
                raise ValueError("increasing filtration is not nested")
        idx = list(range(keys[0] - 1, keys[-1] + 2))
        if dim == 0:
            self.lo, self.hi, self.spaces = 0, 1, ()
            return
        lo = max(i for i, s in zip(idx, seq) if s == below)
        hi = min(i for i, s in zip(idx, seq) if s == above)
        self.lo = lo
        self.hi = hi
        self.spaces = tuple(s for i, s in zip(idx, seq) if lo < i < hi)

    @staticmethod
    def trivial(dim, jump, decreasing=True):
        """F^p = V for p <= jump, 0 above (decreasing); W_k = 0 below jump, V from jump on (increasing)."""
        if decreasing:
            return Filtration(dim, {jump: Subspace.full(dim), jump + 1: Subspace.zero(dim)}, True)
        return Filtration(dim, {jump - 1: Subspace.zero(dim), jump: Subspace.full(dim)}, False)

    def __getitem__(self, p):
        if self.dim == 0:
            return Subspace.zero(0)
        if p <= self.lo:
            return Subspace.full(self.dim) if self.decreasing else Subspace.zero(self.dim)
        if p >= self.hi:
            return Subspace.zero(self.dim) if self.decreasing else Subspace.full(self.dim)
        return self.spaces[p - self.lo - 1]

    def indices(self):
        return range(self.lo, self.hi + 1)

    def as_dict(self):
        return {p: self[p] for p in self.indices()}

    def dims(self):
        return {p: self[p].dim for p in self.indices()}

    def __eq__(self, o):
        return (isinstance(o, Filtration) and self.dim == o.dim and self.decreasing == o.decreasing
                and self.lo == o.lo and self.hi == o.hi and self.spaces == o.spaces)

    def __hash__(self):
        return hash((self.dim, self.decreasing, self.lo, self.hi, self.spaces))

    def apply(self, A):
        """Image filtration A F (A invertible)."""
        return Filtration(self.dim, {p: self[p].image(A) for p in self.indices()}, self.decreasing)

    def shift(self, k):
        """Reindexed filtration G with G[p] = self[p + k]."""
        return Filtration(self.dim, {p - k: self[p] for p in self.indices()}, self.decreasing)

    def is_preserved_by(self, A, shift=0):
        """A F[p] contained in F[p + shift] for all p."""
        lo = self.lo - abs(shift) - 1
        hi = self.hi + abs(shift) + 1
        return all(self[p + shift].contains(self[p].image(A)) for p in range(lo, hi + 1))

    def __repr__(self):
        kind = "decreasing" if self.decreasing else "increasing"
        return "Filtration(%s, %s)" % (kind, self.dims())


def is_commuting(A, B):
    return commutator(A, B).is_zero()


def ad_matrix(A):
    """Matrix of B -> AB - BA on row-major vectorised matrices."""
    n = A.nrows
    Id = Matrix.identity(n)
    return kron(A, Id) - kron(Id, A.T)
