"""Monodromy data: weight filtration of a nilpotent operator, splittings, sl2-triples."""

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, sqrt

from .errors import ConsistencyError, DatumError
from .exact import (
    Filtration, Matrix, Pairing, Subspace, commutator, direct_sum_projections, grade_components,
    integer_spectrum, inverse, is_direct_sum, is_nilpotent, kernel, nilpotency_index, nilpotent_exp,
    solve, spectral_projections, sum_all, eigenspace, GQ,
)


@dataclass(frozen=True)
class Sl2Triple:
    H: Matrix
    X: Matrix
    Y: Matrix

    def relations_hold(self):
        H, X, Y = self.H, self.X, self.Y
        return (commutator(H, X) == X * 2 and commutator(H, Y) == Y * -2
                and commutator(X, Y) == H)

    def casimir(self):
        """2(XY + YX) + H^2 + id, acting as (m+1)^2 on S_m."""
        n = self.H.nrows
        X, Y, H = self.X, self.Y, self.H
        return (X @ Y + Y @ X) * 2 + H @ H + Matrix.identity(n)


@dataclass(frozen=True)
class DegenerationDatum:
    """Pairing, semisimple monodromy (as rational angles with eigenspaces), N and optional F."""

    dim: int
    Q: Matrix
    ts_spectrum: tuple
    N: Matrix
    weight: int = 0
    F: Filtration = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def pairing(self):
        if "pairing" not in self._cache:
            self._cache["pairing"] = Pairing(self.Q)
        return self._cache["pairing"]

    def eigenspaces(self):
        return [E for _, E in self.ts_spectrum]

    def ts_projections(self):
        """{alpha: projection onto the exp(2 pi i alpha)-eigenspace of T_s}."""
        if "proj" not in self._cache:
            projs = direct_sum_projections(self.eigenspaces(), self.dim)
            self._cache["proj"] = {a: P for (a, _), P in zip(self.ts_spectrum, projs)}
        return self._cache["proj"]

    def log_ts(self):
        """S = sum alpha P_alpha, so that T_s = exp(2 pi i S)."""
        S = Matrix.zeros(self.dim)
        for a, P in self.ts_projections().items():
            S = S + P * GQ(a)
        return S

    def validate(self):
        n = self.dim
        if self.Q.shape != (n, n) or self.N.shape != (n, n):
            raise DatumError("matrix shapes do not match dim=%d" % n, "shapes")
        if self.Q != self.Q.H:
            raise DatumError("Q is not hermitian", "Q-hermitian")
        try:
            pairing = self.pairing
        except ValueError:
            raise DatumError("Q is singular", "Q-nondegenerate") from None
        alphas = [a for a, _ in self.ts_spectrum]
        if len(set(alphas)) != len(alphas):
            raise DatumError("repeated monodromy angle", "ts-spectrum")
        for a in alphas:
            if not (0 <= a < 1):
                raise DatumError("monodromy angle %s outside [0,1)" % a, "ts-spectrum")
        if not is_direct_sum(self.eigenspaces(), n):
            raise DatumError("T_s eigenspaces do not decompose V", "ts-spectrum")
        if not is_nilpotent(self.N):
            raise DatumError("N is not nilpotent", "N-nilpotent")
        for _, E in self.ts_spectrum:
            if not E.contains(E.image(self.N)):
                raise DatumError("N does not commute with T_s", "N-Ts-commute")
        if pairing.dagger(self.N) != self.N:
            raise DatumError("N is not Q-selfadjoint", "N-selfadjoint")
        # T_s preserves Q iff distinct eigenspaces are Q-orthogonal
        for i, (_, E) in enumerate(self.ts_spectrum):
            for _, E2 in self.ts_spectrum[i + 1:]:
                if not pairing.perp(E2).contains(E):
                    raise DatumError("T_s does not preserve Q", "Ts-unitary")
        if self.F is not None and (self.F.dim != n or not self.F.decreasing):
            raise DatumError("F must be a decreasing filtration on C^%d" % n, "F-shape")
        return self


def datum_from_matrices(Q, N, weight=0, F=None, ts_spectrum=None):
    """Convenience constructor; unipotent monodromy unless a spectrum is given."""
    n = Q.nrows
    if ts_spectrum is None:
        ts_spectrum = ((Fraction(0), Subspace.full(n)),)
    return DegenerationDatum(n, Q, tuple(ts_spectrum), N, weight, F).validate()


# ---------------------------------------------------------------- weight filtration


def _powers(N, upto):
    out = [Matrix.identity(N.nrows)]
    for _ in range(upto):
        out.append(out[-1] @ N)
    return out


def weight_filtration(N):
    """W_k = sum_{j>=0} N^j ker N^{k+2j+1}, with ker N^m = 0 for m <= 0."""
    if not is_nilpotent(N):
        raise ValueError("weight_filtration: N is not nilpotent")
    n = N.nrows
    if n == 0:
        return Filtration(0, {0: Subspace.zero(0)}, decreasing=False)
    m = nilpotency_index(N)
    P = _powers(N, 2 * m + 2)
    kers = {e: kernel(P[e]) for e in range(1, m + 2)}

    def ker_pow(e):
        if e <= 0:
            return Subspace.zero(n)
        return kers[min(e, m + 1)]

    steps = {}
    for k in range(-m - 1, m + 1):
        parts = []
        j = 0
        while k + 2 * j + 1 <= m + 1 + 2 * j and j <= m:
            K = ker_pow(k + 2 * j + 1)
            if not K.is_zero():
                parts.append(K.image(P[j]))
            j += 1
        steps[k] = sum_all(parts, n)
    return Filtration(n, steps, decreasing=False)


def graded_quotient_map(W, k):
    """(complement basis of W_{k-1} in W_k, coordinates map) for gr_k W.

    Returns a matrix pi of shape (dim gr_k, n) with pi v = class of v for v in W_k.
    """
    n = W.dim
    low, high = W[k - 1], W[k]
    comp = low.complement_in(high)
    rest = high.complement_in(Subspace.full(n))
    cols = list(low.rows) + list(comp.rows) + list(rest.rows)
    if not cols:
        return comp, Matrix.zeros(0, n)
    Pinv = inverse(Matrix.from_columns(cols))
    a = low.dim
    return comp, Pinv.submatrix(range(a, a + comp.dim), range(n))


def check_weight_axioms(N, W):
    """N W_k in W_{k-2}, and N^k induces isomorphisms gr_k -> gr_{-k} for k >= 1."""
    n = N.nrows
    for k in range(W.lo - 1, W.hi + 2):
        if not W[k - 2].contains(W[k].image(N)):
            return False
    top = max(abs(W.lo), abs(W.hi)) + 1
    for k in range(1, top + 1):
        comp_k, _ = graded_quotient_map(W, k)
        comp_mk, pi_mk = graded_quotient_map(W, -k)
        if comp_k.dim != comp_mk.dim:
            return False
        if comp_k.dim == 0:
            continue
        Nk = _powers(N, k)[k]
        img = [pi_mk.apply(Nk.apply(v)) for v in comp_k.rows]
        if Subspace(img, comp_mk.dim).dim != comp_k.dim:
            return False
    return True


# ---------------------------------------------------------------- Jordan chains


def jordan_chains(N):
    """Deterministic Jordan chains [(head, length)], longest first, then by pivot order.

    At each length s the heads are taken greedily from the echelon basis of
    ker N^s, skipping vectors already accounted for by ker N^{s-1} and longer chains.
    """
    n = N.nrows
    if n == 0:
        return []
    L = nilpotency_index(N) + 1
    P = _powers(N, L)
    K = [kernel(P[j]) for j in range(L + 1)]
    chains = []
    for s in range(L, 0, -1):
        covered = [K[s - 1]]
        for v, t in chains:
            covered.append(Subspace([P[t - s].apply(v)], n))
        U = sum_all(covered, n)
        for cand in K[s].rows:
            if not U.contains_vector(cand):
                chains.append((cand, s))
                U = U + Subspace([cand], n)
    return chains


def chain_basis(N, chains):
    """Chain vectors as columns and their initial H-eigenvalues."""
    cols, weights = [], []
    for v, s in chains:
        w = v
        for i in range(s):
            cols.append(w)
            weights.append(s - 1 - 2 * i)
            w = N.apply(w)
    return cols, weights


def _initial_splitting(N):
    cols, weights = chain_basis(N, jordan_chains(N))
    C = Matrix.from_columns(cols)
    return C @ Matrix.diag(weights) @ inverse(C)


def _selfadjoint_correction(H0, N, pairing):
    """Conjugate H0 by exp(B/2) so that H^dagger = -H, following the degree-by-degree solve."""
    n = H0.nrows
    target = -pairing.dagger(H0)
    D = target - H0
    spec = integer_spectrum(H0)
    projs = spectral_projections(spec, n)
    comps = grade_components(D, projs)
    if any(d >= 0 for d in comps):
        raise ConsistencyError("H0 and its adjoint split different weight filtrations", "splitting")
    if not commutator(D, N).is_zero():
        raise ConsistencyError("correction term does not commute with N", "splitting")
    spread = max(spec) - min(spec) if spec else 0
    B = Matrix.zeros(n)
    for k in range(-1, -spread - 1, -1):
        E = nilpotent_exp(B)
        current = E @ H0 @ nilpotent_exp(B, -1) - H0
        corr = grade_components(current, projs).get(k, Matrix.zeros(n))
        Dk = comps.get(k, Matrix.zeros(n))
        Bk = (Dk - corr) / (-k)
        B = B + Bk
    if nilpotent_exp(B) @ H0 @ nilpotent_exp(B, -1) != target:
        raise ConsistencyError("recursive solve for B did not reach -H0^dagger", "splitting")
    if not commutator(B, N).is_zero():
        raise ConsistencyError("recursive solve produced B with [B, N] != 0", "splitting-B-commutes-N")
    half = B / 2
    return nilpotent_exp(half) @ H0 @ nilpotent_exp(half, -1)


def _restrict(A, E):
    """Matrix of A on the invariant subspace E in the stored basis of E."""
    B = E.matrix()
    return solve(B, A @ B)


def grading_splitting(d):
    """Splitting H of W(N): semisimple, integral, [H,N] = -2N, H^dagger = -H, [H,T_s] = 0."""
    n = d.dim
    if n == 0:
        return Matrix.zeros(0)
    pieces = []
    for _, E in d.ts_spectrum:
        if E.dim == 0:
            continue
        B = E.matrix()
        NE = _restrict(d.N, E)
        QE = B.H @ d.Q @ B
        H0 = _initial_splitting(NE)
        HE = _selfadjoint_correction(H0, NE, Pairing(QE))
        pieces.append((B, HE))
    P = Matrix.from_columns([c for B, _ in pieces for c in B.columns()])
    H = P @ Matrix.block_diag([HE for _, HE in pieces]) @ inverse(P)
    failed = [k for k, ok in check_splitting(H, d).items() if not ok]
    if failed:
        raise ConsistencyError("splitting postconditions failed: %s" % ", ".join(failed), "splitting")
    return H


def check_splitting(H, d, W=None):
    """The defining properties of a splitting, each as a named boolean."""
    n = d.dim
    W = weight_filtration(d.N) if W is None else W
    out = {}
    try:
        spec = integer_spectrum(H)
        out["semisimple-integral"] = True
    except ValueError:
        return {"semisimple-integral": False}
    ok = True
    for k in range(W.lo, W.hi + 1):
        Ek = spec.get(k, Subspace.zero(n))
        low = W[k - 1]
        if not (W[k].contains(Ek) and (Ek & low).is_zero() and (Ek + low) == W[k]):
            ok = False
    out["splits-W"] = ok and all(W.lo < k <= W.hi for k in spec)
    out["[H,N]=-2N"] = commutator(H, d.N) == d.N * -2
    out["H-dagger=-H"] = d.pairing.dagger(H) == -H
    out["[H,Ts]=0"] = all(E.contains(E.image(H)) for _, E in d.ts_spectrum)
    return out


# ---------------------------------------------------------------- sl2


def sl2_complete(H, N):
    """The triple (H, X, -N): X solves [H,X] = 2X and [X,Y] = H exactly."""
    n = H.nrows
    Y = -N
    if commutator(H, N) != N * -2:
        raise ValueError("sl2_complete: [H,N] != -2N")
    if n == 0:
        return Sl2Triple(H, H, H)
    try:
        spec = integer_spectrum(H)
    except ValueError:
        raise ValueError("sl2_complete: H is not semisimple with integer eigenvalues") from None
    cols, eig = [], []
    for k in sorted(spec, reverse=True):
        for v in spec[k].rows:
            cols.append(v)
            eig.append(k)
    P = Matrix.from_columns(cols)
    Pinv = inverse(P)
    Yp = Pinv @ Y @ P
    unknowns = [(a, b) for a in range(n) for b in range(n) if eig[a] == eig[b] + 2]
    if not unknowns:
        if not (Matrix.diag(eig)).is_zero():
            raise ValueError("sl2_complete: inconsistent (H, N)")
        return Sl2Triple(H, Matrix.zeros(n), Y)
    # [X', Y'] = diag(eig), linear in the unknown entries of X'
    rows = []
    rhs = []
    for i in range(n):
        for j in range(n):
            row = []
            for a, b in unknowns:
                c = GQ(0)
                if i == a:
                    c = c + Yp[b, j]
                if j == b:
                    c = c - Yp[i, a]
                row.append(c)
            rows.append(row)
            rhs.append([GQ(eig[i]) if i == j else GQ(0)])
    try:
        sol = solve(Matrix(rows, len(unknowns)), Matrix(rhs, 1))
    except ValueError as exc:
        raise ValueError("sl2_complete: inconsistent (H, N): %s" % exc) from None
    Xp = [[GQ(0)] * n for _ in range(n)]
    for (a, b), val in zip(unknowns, sol.column(0)):
        Xp[a][b] = val
    X = P @ Matrix(Xp, n) @ Pinv
    t = Sl2Triple(H, X, Y)
    if not t.relations_hold():
        raise ValueError("sl2_complete: inconsistent (H, N)")
    return t


def isotypical_decompose(t):
    """[(m, S_m-isotypic component)] from the eigenspaces of the Casimir."""
    n = t.H.nrows
    if n == 0:
        return []
    Om = t.casimir()
    out = []
    total = 0
    for m in range(n):
        E = eigenspace(Om, (m + 1) ** 2)
        if E.dim:
            if E.dim % (m + 1):
                raise ValueError("Casimir eigenspace for m=%d has dimension %d" % (m, E.dim))
            for A in (t.H, t.X, t.Y):
                if not E.contains(E.image(A)):
                    raise ValueError("Casimir eigenspace for m=%d is not sl2-stable" % m)
            out.append((m, E))
            total += E.dim
    if total != n:
        raise ValueError("Casimir eigenvalues are not all of the form (m+1)^2")
    return out


def ad_triple(t):
    """The adjoint action of a triple on End(V) (row-major vectorisation)."""
    from .exact import ad_matrix
    return Sl2Triple(ad_matrix(t.H), ad_matrix(t.X), ad_matrix(t.Y))


# ---------------------------------------------------------------- constants


def circular_gap(alphas):
    a = sorted(Fraction(x) for x in alphas)
    if len(a) <= 1:
        return Fraction(1)
    gaps = [b - c for b, c in zip(a[1:], a)]
    gaps.append(1 + a[0] - a[-1])
    return min(gaps)


def higgs_constant(r):
    """C_0 = sqrt(binom(r+1, 3)) / 2."""
    return 0.5 * sqrt(comb(r + 1, 3))


def monodromy_constants(d):
    delta = circular_gap([a for a, E in d.ts_spectrum if E.dim])
    m_N = nilpotency_index(d.N)
    return delta, m_N, higgs_constant(d.dim)
