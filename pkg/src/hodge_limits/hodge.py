"""Polarized Hodge structures given by a Hodge filtration and a hermitian pairing."""

from dataclasses import dataclass, field

from .errors import DecompositionFails, NotPolarized
from .exact import (
    Filtration, Matrix, Pairing, Subspace, direct_sum_projections, is_direct_sum,
    is_positive_definite_hermitian, kron, inverse, GQ,
)


def conjugate_filtration(F, Q, n):
    """Fbar^q = {v : Q(v, x) = 0 for all x in F^{n-q+1}}."""
    pairing = Q if isinstance(Q, Pairing) else Pairing(Q)
    dim = F.dim
    if dim == 0:
        return Filtration(0, {0: Subspace.zero(0)}, True)
    steps = {}
    for q in range(n - F.hi, n - F.lo + 2):
        steps[q] = pairing.perp(F[n - q + 1])
    return Filtration(dim, steps, True)


def hodge_pieces(F, Fbar, n, dim):
    """{(p, n-p): F^p & Fbar^{n-p}} for the nonzero pieces; raises unless they decompose V."""
    pieces = {}
    if dim == 0:
        return pieces
    lo = min(F.lo, n - Fbar.hi)
    hi = max(F.hi, n - Fbar.lo)
    for p in range(lo, hi + 1):
        P = F[p] & Fbar[n - p]
        if P.dim:
            pieces[(p, n - p)] = P
    if not is_direct_sum(list(pieces.values()), dim):
        raise DecompositionFails("F^p and Fbar^q do not give a decomposition of weight %d" % n)
    for p in range(F.lo, F.hi + 1):
        want = Subspace([v for (a, _), P in pieces.items() if a >= p for v in P.rows], dim)
        if want != F[p]:
            raise DecompositionFails("F^%d is not the sum of the pieces V^{a,b}, a >= %d" % (p, p))
    for q in range(Fbar.lo, Fbar.hi + 1):
        want = Subspace([v for (_, b), P in pieces.items() if b >= q for v in P.rows], dim)
        if want != Fbar[q]:
            raise DecompositionFails("Fbar^%d is not the sum of the pieces V^{a,b}, b >= %d" % (q, q))
    return pieces


@dataclass(frozen=True)
class HodgeStructure:
    """Hodge structure of weight n with pieces V^{p,q}; Q is None for unpolarized ones."""

    weight: int
    dim: int
    F: Filtration
    Fbar: Filtration
    pieces: dict
    Q: Matrix = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def projections(self):
        """{(p,q): projection onto V^{p,q} along the other pieces}."""
        if "proj" not in self._cache:
            keys = sorted(self.pieces)
            projs = direct_sum_projections([self.pieces[k] for k in keys], self.dim)
            self._cache["proj"] = dict(zip(keys, projs))
        return self._cache["proj"]

    def weil_operator(self):
        """C = sum (-1)^q P_{p,q}, so that <v,w> = Q(Cv, w)."""
        if "weil" not in self._cache:
            C = Matrix.zeros(self.dim)
            for (p, q), P in self.projections().items():
                C = C + (P if q % 2 == 0 else -P)
            self._cache["weil"] = C
        return self._cache["weil"]

    def gram(self):
        """G with <v, w> = w^H G v, i.e. G[i][j] = <e_j, e_i>."""
        if self.Q is None:
            raise ValueError("unpolarized Hodge structure has no Hodge metric")
        if "gram" not in self._cache:
            self._cache["gram"] = self.Q @ self.weil_operator()
        return self._cache["gram"]

    def inner(self, v, w):
        G = self.gram()
        Gv = G.apply(v)
        s = GQ(0)
        for a, b in zip(Gv, w):
            s = s + a * GQ.of(b).conj()
        return s

    def adjoint(self, A):
        """Adjoint under the Hodge inner product."""
        if "gram_inv" not in self._cache:
            self._cache["gram_inv"] = inverse(self.gram())
        return self._cache["gram_inv"] @ A.H @ self.gram()

    def hodge_numbers(self):
        return {k: P.dim for k, P in sorted(self.pieces.items())}

    def end_component(self, A, j):
        """Component of A in End^{j,-j}: sum_p P_{p+j} A P_p."""
        projs = self.projections()
        out = Matrix.zeros(self.dim)
        for (p, q), Pp in projs.items():
            tgt = (p + j, q - j)
            if tgt in projs:
                out = out + projs[tgt] @ A @ Pp
        return out

    def end_components(self, A):
        js = {a - b for (a, _) in self.pieces for (b, _) in self.pieces}
        out = {}
        for j in sorted(js):
            C = self.end_component(A, j)
            if not C.is_zero():
                out[j] = C
        return out


def check_polarization(pieces, Q, dim):
    """(-1)^q Q positive definite on V^{p,q}, distinct pieces Q-orthogonal."""
    pairing = Pairing(Q)
    keys = sorted(pieces)
    for i, k in enumerate(keys):
        B = pieces[k].matrix()
        for k2 in keys[i + 1:]:
            B2 = pieces[k2].matrix()
            if not (B2.H @ Q @ B).is_zero():
                raise NotPolarized("pieces V^%s and V^%s are not Q-orthogonal" % (k, k2))
        G = pairing.gram(pieces[k])
        if k[1] % 2:
            G = -G
        if not is_positive_definite_hermitian(G):
            raise NotPolarized("(-1)^q Q is not positive definite on V^{%d,%d}" % k)


def build_hodge_structure(F, Q, n, polarized=True):
    """Hodge structure of weight n from F and Q, validated exactly."""
    if Q != Q.H:
        raise ValueError("Q is not hermitian")
    pairing = Pairing(Q)
    Fbar = conjugate_filtration(F, pairing, n)
    pieces = hodge_pieces(F, Fbar, n, F.dim)
    if polarized:
        check_polarization(pieces, Q, F.dim)
    return HodgeStructure(n, F.dim, F, Fbar, pieces, Q)


def unpolarized_hodge_structure(F, Fbar, n):
    return HodgeStructure(n, F.dim, F, Fbar, hodge_pieces(F, Fbar, n, F.dim), None)


def hodge_inner_product(v, w, hs):
    return hs.inner(v, w)


def filtration_from_pieces(pieces, dim, first=True):
    """F^p = sum of pieces with first index >= p (second index when first=False)."""
    if dim == 0:
        return Filtration(0, {0: Subspace.zero(0)}, True)
    idx = [k[0] if first else k[1] for k in pieces]
    lo, hi = min(idx), max(idx)
    steps = {}
    for p in range(lo, hi + 2):
        steps[p] = Subspace([v for k, P in pieces.items() if (k[0] if first else k[1]) >= p
                             for v in P.rows], dim)
    return Filtration(dim, steps, True)


def end_pairing_matrix(Q):
    """Matrix of (A, B) -> tr(A B^dagger) on row-major vectorised endomorphisms."""
    return kron(Q, inverse(Q).T)


def induced_end_structure(hs):
    """Weight-0 Hodge structure on End(V), End^{j,-j} = maps V^{p,q} -> V^{p+j,q-j}."""
    n = hs.dim
    if n == 0:
        F = Filtration(0, {0: Subspace.zero(0)}, True)
        return HodgeStructure(0, 0, F, F, {}, Matrix.zeros(0))
    keys = sorted(hs.pieces)
    cols = [v for k in keys for v in hs.pieces[k].rows]
    Pinv = inverse(Matrix.from_columns(cols))
    dual = {}
    r = 0
    for k in keys:
        d = hs.pieces[k].dim
        dual[k] = Pinv.rows[r:r + d]
        r += d
    vecs = {}
    for src in keys:
        for tgt in keys:
            j = tgt[0] - src[0]
            # x f with x in V^tgt and f vanishing off V^src; vec(x f) = kron(x, f)
            vecs.setdefault(j, []).extend(
                tuple(a * b for a in x for b in f) for x in hs.pieces[tgt].rows for f in dual[src])
    pieces = {(j, -j): Subspace(v, n * n) for j, v in vecs.items()}
    F = filtration_from_pieces(pieces, n * n)
    end = build_hodge_structure(F, end_pairing_matrix(hs.Q), 0)
    if end.pieces != pieces:
        raise DecompositionFails("induced decomposition of End(V) does not match its Hodge filtration")
    return end


def split_tangent(A, hs):
    """A = B + C with B in m (B^dagger = -B, no (0,0) part) and C in F^0 End(V).

    Uses B = sum_{j<0} (A_j - A_j^dagger), C = sum_{j>=0} A_j + sum_{j<0} A_j^dagger.
    """
    pairing = Pairing(hs.Q)
    B = Matrix.zeros(hs.dim)
    for j, Aj in hs.end_components(A).items():
        if j < 0:
            B = B + Aj - pairing.dagger(Aj)
    return B, A - B


def in_m(B, hs):
    """B in m: B^dagger = -B and B has no End^{0,0} component."""
    pairing = Pairing(hs.Q)
    return pairing.dagger(B) == -B and hs.end_component(B, 0).is_zero()


def in_f0_end(C, hs):
    return all(j >= 0 for j in hs.end_components(C))


def period_domain_membership(F, Q, n):
    """'In-D', 'DecompositionFails' or 'NotPolarized'."""
    try:
        build_hodge_structure(F, Q, n)
    except DecompositionFails:
        return "DecompositionFails"
    except NotPolarized:
        return "NotPolarized"
    return "In-D"
