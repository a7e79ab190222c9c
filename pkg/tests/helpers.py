"""Generators and independent oracles shared by the test modules."""

import random
from fractions import Fraction

import mpmath
import numpy as np

from hodge_limits.exact import (
    Filtration, Matrix, Subspace, GQ, inverse, kernel, image, sum_all,
)
from hodge_limits.monodromy import DegenerationDatum
from hodge_limits.mhs import validate_mhs
from hodge_limits.sl2hodge import model_family


def rng(seed=0):
    return random.Random(seed)


def rand_scalar(r, lo=-3, hi=3, gaussian=False):
    re = Fraction(r.randint(lo, hi), r.choice((1, 1, 2, 3)))
    im = Fraction(r.randint(lo, hi), r.choice((1, 2))) if gaussian else 0
    return GQ(re, im)


def rand_matrix(r, rows, cols=None, gaussian=False):
    cols = rows if cols is None else cols
    return Matrix([[rand_scalar(r, gaussian=gaussian) for _ in range(cols)] for _ in range(rows)])


def _unit_entry(r, gaussian):
    return r.choice((GQ(1), GQ(-1), GQ(0, 1), GQ(0, -1)) if gaussian else (GQ(1), GQ(-1)))


def rand_invertible(r, n, gaussian=False, density=1.0):
    """Unit lower times unit upper triangular with a random permutation: det = +-1.

    With density < 1 the triangular factors are sparse with unit entries, which keeps
    exact arithmetic cheap in larger dimensions.
    """
    L = [[0] * n for _ in range(n)]
    U = [[0] * n for _ in range(n)]
    for i in range(n):
        L[i][i] = U[i][i] = 1
        for j in range(i):
            if density >= 1:
                L[i][j] = rand_scalar(r, -2, 2, gaussian)
                U[j][i] = rand_scalar(r, -2, 2, gaussian)
            else:
                if r.random() < density:
                    L[i][j] = _unit_entry(r, gaussian)
                if r.random() < density:
                    U[j][i] = _unit_entry(r, gaussian)
    perm = list(range(n))
    r.shuffle(perm)
    Pm = Matrix([[1 if perm[i] == j else 0 for j in range(n)] for i in range(n)])
    return Pm @ Matrix(L) @ Matrix(U)


def rand_partition(r, n):
    parts = []
    left = n
    while left:
        k = r.randint(1, left)
        parts.append(k)
        left -= k
    return sorted(parts, reverse=True)


def jordan_nilpotent(sizes):
    """Block diagonal of lower Jordan blocks (e_i -> e_{i+1})."""
    n = sum(sizes)
    rows = [[0] * n for _ in range(n)]
    off = 0
    for s in sizes:
        for i in range(s - 1):
            rows[off + i + 1][off + i] = 1
        off += s
    return Matrix(rows)


def rand_nilpotent(r, n, gaussian=False):
    """P J P^{-1} for a random Jordan type J; returns (N, sizes)."""
    sizes = rand_partition(r, n)
    P = rand_invertible(r, n, gaussian)
    return P @ jordan_nilpotent(sizes) @ inverse(P), sizes


def subspaces_equal_numeric(A, B, tol):
    """Span comparison of column bases by projector difference."""
    qa, _ = np.linalg.qr(A)
    qb, _ = np.linalg.qr(B)
    return np.linalg.norm(qa @ qa.conj().T - qb @ qb.conj().T, 2) < tol


# ---------------------------------------------------------------- sl2 family


def partitions(total, largest=None):
    """All multisets of positive parts with sum <= total (including the empty one)."""
    largest = total if largest is None else largest
    yield []
    for part in range(min(total, largest), 0, -1):
        for rest in partitions(total - part, part):
            yield [part] + rest


def family_summands(max_dim=12):
    """Every sum of S_m with sum(m+1) <= max_dim, twisted to the weight of the largest m."""
    out = []
    for parts in partitions(max_dim):
        if not parts:
            continue
        ms = [p - 1 for p in parts]
        top = max(ms)
        out.append([(m, (top - m) // 2, top - m - (top - m) // 2) for m in ms])
    return out


def family_structure(summands):
    return model_family(summands)


def datum_from_structure(s, summands, r, gaussian=True, angles=None, density=None):
    """Degeneration datum (Q', N') = (P^{-H} Q P^{-1}, -P Y P^{-1}) with T_s acting on summands.

    Each summand gets an angle; summands with equal angles share an eigenspace.
    Returns (datum, P).
    """
    n = s.dim
    if density is None:
        density = min(1.0, 2.0 / n)
    P = rand_invertible(r, n, gaussian, density)
    Pi = inverse(P)
    Q = Pi.H @ s.Q @ Pi
    N = P @ (-s.triple.Y) @ Pi
    if angles is None:
        pool = [Fraction(0), Fraction(1, 2), Fraction(1, 3), Fraction(3, 4)]
        angles = [r.choice(pool) for _ in summands]
    groups = {}
    off = 0
    for (m, _, _), a in zip(summands, angles):
        vecs = [P.column(off + i) for i in range(m + 1)]
        groups.setdefault(a, []).extend(vecs)
        off += m + 1
    ts = tuple(sorted((a, Subspace(v, n)) for a, v in groups.items()))
    F = s.F_total.apply(P)
    return DegenerationDatum(n, Q, ts, N, s.weight, F).validate(), P


# ---------------------------------------------------------------- random MHS


def random_mhs(r, dim, gaussian=True, twist=True, types=None):
    """A mixed Hodge structure given by a bigrading I^{p,q} and a twist of the conjugate side.

    In split coordinates e_a of type (p_a, q_a): F^p = span{p_a >= p}, W_n = span{p_a + q_a <= n}
    and Fbar^q = g span{q_a >= q} with g = id + delta, delta lowering both p and q.
    Everything is transported by a random invertible P.  Returns (mhs, P, types).
    """
    if types is None:
        types = [(r.randint(-1, 2), r.randint(-1, 2)) for _ in range(dim)]
    types = sorted(types, key=lambda t: (t[0] + t[1], t))
    delta = [[0] * dim for _ in range(dim)]
    if twist:
        for a, (pa, qa) in enumerate(types):
            for b, (pb, qb) in enumerate(types):
                if pb < pa and qb < qa:
                    delta[b][a] = rand_scalar(r, -2, 2, gaussian)
    g = Matrix.identity(dim) + Matrix(delta)
    P = rand_invertible(r, dim, gaussian)
    E = Matrix.identity(dim).rows

    def span_where(pred, M):
        return Subspace([M.apply(E[a]) for a, t in enumerate(types) if pred(t)], dim)

    ps = [t[0] for t in types]
    qs = [t[1] for t in types]
    ws = [t[0] + t[1] for t in types]
    F = Filtration(dim, {p: span_where(lambda t, p=p: t[0] >= p, P) for p in range(min(ps), max(ps) + 2)})
    Pg = P @ g
    Fb = Filtration(dim, {q: span_where(lambda t, q=q: t[1] >= q, Pg) for q in range(min(qs), max(qs) + 2)})
    W = Filtration(dim, {k: span_where(lambda t, k=k: t[0] + t[1] <= k, P)
                         for k in range(min(ws) - 1, max(ws) + 1)}, decreasing=False)
    return validate_mhs(W, F, Fb), P, types


def direct_sum_mhs(m1, m2):
    """(m1 + m2, inclusion of V1, inclusion of V2, projection to V1, projection to V2)."""
    n1, n2 = m1.dim, m2.dim
    n = n1 + n2

    def emb(S, first):
        if first:
            return Subspace([tuple(v) + (GQ(0),) * n2 for v in S.rows], n)
        return Subspace([(GQ(0),) * n1 + tuple(v) for v in S.rows], n)

    def fil(A, B):
        idx = range(min(A.lo, B.lo) - 1, max(A.hi, B.hi) + 2)
        return Filtration(n, {k: emb(A[k], True) + emb(B[k], False) for k in idx}, A.decreasing)

    m = validate_mhs(fil(m1.W, m2.W), fil(m1.F, m2.F), fil(m1.Fbar, m2.Fbar))
    I = Matrix.identity(n)
    i1 = Matrix([row[:n1] for row in I.rows])
    i2 = Matrix([row[n1:] for row in I.rows])
    return m, i1, i2, i1.T, i2.T


# ---------------------------------------------------------------- oracles


def weight_filtration_oracle(N):
    """Increasing W with N W_k in W_{k-2} and N^k: gr_k ~ gr_{-k}, built by recursion on
    subquotients: given N-stable B in A with W_t = A and W_{-t-1} = B, let l be the largest
    exponent with N^l A not inside B; then W_k = A for k >= l, W_k = B for k <= -l-1,
    W_{l-1} = A & (N^l)^{-1} B, W_{-l} = N^l A + B, and recurse on that pair.
    """
    n = N.nrows
    W = {}
    powers = [Matrix.identity(n)]
    for _ in range(n):
        powers.append(powers[-1] @ N)

    def rec(A, B, top):
        if A == B:
            for k in range(-top - 1, top + 1):
                W[k] = A
            return
        l = max(k for k in range(n + 1) if not B.contains(A.image(powers[k])))
        for k in range(l, top + 1):
            W[k] = A
        for k in range(-top - 1, -l):
            W[k] = B
        if l == 0:
            return
        upper = A & B.preimage(powers[l])
        lower = A.image(powers[l]) + B
        rec(upper, lower, l - 1)

    rec(Subspace.full(n), Subspace.zero(n), n)
    W[n + 1] = Subspace.full(n)
    return Filtration(n, {k: W[k] for k in range(-n - 1, n + 2)}, decreasing=False)


def _lattice(gens):
    """Closure of a set of subspaces under sum and intersection."""
    found = {S.rows: S for S in gens}
    frontier = list(found.values())
    while frontier:
        fresh = []
        for A in frontier:
            for B in list(found.values()):
                for C in (A + B, A & B):
                    if C.rows not in found:
                        found[C.rows] = C
                        fresh.append(C)
        frontier = fresh
    return list(found.values())


def weight_filtration_search(N):
    """Every increasing filtration satisfying the two weight axioms, found by backtracking
    over the lattice spanned by ker N^a and im N^b (any N-stable canonical choice lives there).
    """
    n = N.nrows
    powers = [Matrix.identity(n)]
    for _ in range(n):
        powers.append(powers[-1] @ N)
    top = next(k for k in range(n + 1) if powers[k + 1].is_zero()) if n else 0
    full, zero = Subspace.full(n), Subspace.zero(n)
    if top == 0:
        return [{-1: zero, 0: full}]
    gens = [kernel(P) for P in powers] + [image(P) for P in powers]
    cands = _lattice(gens + [full, zero])

    def iso(W, k):
        # N^k maps W_k onto W_{-k} mod W_{-k-1} with kernel exactly W_{k-1}
        Nk = powers[k]
        if W[k].image(Nk) + W[-k - 1] != W[-k]:
            return False
        return (W[k] & W[-k - 1].preimage(Nk)) == W[k - 1]

    out = []

    def rec(k, W):
        if k < -top:
            if all(W[j - 2].contains(W[j].image(N)) for j in range(-top + 1, top + 1)) and \
                    all(iso(W, j) for j in range(1, top + 1)):
                out.append(dict(W))
            return
        for C in cands:
            if W[k + 1].contains(C) and C.contains(W[k + 2].image(N)):
                W[k] = C
                rec(k - 1, W)
        W.pop(k, None)

    rec(top - 1, {top + 1: full, top: full, -top - 1: zero, -top - 2: zero})
    return out


def semisimple_limit_oracle(eigen, F_sub, x=40, dps=80):
    """Column basis of exp(xS) U computed in high precision; eigen = [(alpha, basis vectors)]."""
    mpmath.mp.dps = dps
    n = F_sub.ambient_dim
    cols = [v for _, vs in eigen for v in vs]
    P = mpmath.matrix([[mpmath.mpc(complex(cols[j][i])) for j in range(n)] for i in range(n)])
    D = mpmath.diag([mpmath.exp(x * mpmath.mpf(a.numerator) / a.denominator)
                     for a, vs in eigen for _ in vs])
    E = P * D * mpmath.inverse(P)
    cols_mp = []
    for v in F_sub.rows:
        w = E * mpmath.matrix([mpmath.mpc(complex(a)) for a in v])
        cols_mp.append(w / mpmath.norm(w))
    if not cols_mp:
        return np.zeros((n, 0), dtype=complex)
    # orthonormalise in high precision to keep the nearly parallel columns apart
    M = mpmath.matrix(n, len(cols_mp))
    for j, w in enumerate(cols_mp):
        for i in range(n):
            M[i, j] = w[i]
    Qm, _ = mpmath.qr(M)
    return np.array([[complex(Qm[i, j]) for j in range(len(cols_mp))] for i in range(n)], dtype=complex)


def columns(S):
    return np.array([[complex(a) for a in v] for v in S.rows], dtype=complex).reshape(-1, S.ambient_dim).T


__all__ = [name for name in dir() if not name.startswith("_")]
