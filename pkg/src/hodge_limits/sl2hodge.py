"""Polarized sl2-Hodge structures, the Weil element and the associated pure structure."""

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .errors import PreconditionFails, RecognitionFails, HodgeError
from .exact import (
    Filtration, Matrix, Pairing, Subspace, commutator, direct_sum_projections, integer_spectrum, inverse,
    is_direct_sum, is_positive_definite_hermitian, kernel, nilpotent_exp, rational_spectrum,
    solve_vector, GQ,
)
from .hodge import build_hodge_structure, conjugate_filtration, filtration_from_pieces
from .monodromy import DegenerationDatum, Sl2Triple, sl2_complete


@dataclass(frozen=True)
class Sl2HodgeStructure:
    """Pieces V_k^{i,j} (i + j = n + k) with a triple (H, X, Y) and pairing Q."""

    weight: int
    dim: int
    triple: Sl2Triple
    Q: Matrix
    pieces: dict
    F_total: Filtration
    Fbar_total: Filtration
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def pairing(self):
        if "pairing" not in self._cache:
            self._cache["pairing"] = Pairing(self.Q)
        return self._cache["pairing"]

    def total_pieces(self):
        """{(i, j): V^{i,j}} forgetting k = i + j - n."""
        return {(i, j): P for (k, i, j), P in self.pieces.items()}

    def weight_space(self, k):
        return Subspace([v for (kk, _, _), P in self.pieces.items() if kk == k for v in P.rows], self.dim)

    def projections(self):
        if "proj" not in self._cache:
            keys = sorted(self.pieces)
            projs = direct_sum_projections([self.pieces[k] for k in keys], self.dim)
            self._cache["proj"] = dict(zip(keys, projs))
        return self._cache["proj"]


def _assemble(weight, triple, Q, pieces):
    dim = Q.nrows
    pieces = {k: P for k, P in pieces.items() if P.dim}
    tp = {(i, j): P for (k, i, j), P in pieces.items()}
    F = filtration_from_pieces(tp, dim, first=True)
    Fbar = filtration_from_pieces(tp, dim, first=False)
    return Sl2HodgeStructure(weight, dim, triple, Q, pieces, F, Fbar)


def irreducible_model(m, p=0, q=0):
    """S_m on v_k = a^{m-k} b^k, twisted so that the primitive vector v_m has type (p, q).

    H v_k = (m-2k) v_k, X v_k = k v_{k-1}, Y v_k = (m-k) v_{k+1},
    Q(v_k, v_{m-k}) = (-1)^q k!(m-k)!/m!, and v_k has type (m-k+p, m-k+q).
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    r = m + 1
    H = Matrix.diag([m - 2 * k for k in range(r)])
    X = [[0] * r for _ in range(r)]
    Y = [[0] * r for _ in range(r)]
    Q = [[0] * r for _ in range(r)]
    sign = -1 if q % 2 else 1
    for k in range(r):
        if k >= 1:
            X[k - 1][k] = k
        if k + 1 < r:
            Y[k + 1][k] = m - k
        # Q(v_k, v_{m-k}) sits in row m-k, column k
        Q[m - k][k] = GQ(Fraction(sign * factorial(k) * factorial(m - k), factorial(m)))
    triple = Sl2Triple(H, Matrix(X), Matrix(Y))
    pieces = {}
    for k in range(r):
        e = [0] * r
        e[k] = 1
        pieces[(m - 2 * k, m - k + p, m - k + q)] = Subspace([e], r)
    return _assemble(m + p + q, triple, Matrix(Q), pieces)


def direct_sum(structures):
    """Orthogonal direct sum of sl2-Hodge structures of one weight."""
    structures = list(structures)
    if not structures:
        raise ValueError("empty direct sum")
    n = structures[0].weight
    if any(s.weight != n for s in structures):
        raise ValueError("direct sum needs a common weight")
    dim = sum(s.dim for s in structures)
    H = Matrix.block_diag([s.triple.H for s in structures])
    X = Matrix.block_diag([s.triple.X for s in structures])
    Y = Matrix.block_diag([s.triple.Y for s in structures])
    Q = Matrix.block_diag([s.Q for s in structures])
    pieces = {}
    off = 0
    for s in structures:
        for key, P in s.pieces.items():
            vecs = [(GQ(0),) * off + v + (GQ(0),) * (dim - off - s.dim) for v in P.rows]
            S = Subspace(vecs, dim)
            pieces[key] = pieces[key] + S if key in pieces else S
        off += s.dim
    return _assemble(n, Sl2Triple(H, X, Y), Q, pieces)


def model_family(summands):
    """Direct sum of twisted S_m for summands [(m, p, q), ...] of common weight m+p+q."""
    return direct_sum([irreducible_model(m, p, q) for m, p, q in summands])


def weil_action(s):
    """w = exp(X) exp(-Y) exp(X)."""
    X, Y = s.triple.X, s.triple.Y
    eX = nilpotent_exp(X)
    return eX @ nilpotent_exp(Y, -1) @ eX


def sl2_inner_gram(s):
    """Gram matrix of <v, w> = sum (-1)^j Q(v^{i,j}, w(w^{i,j}))."""
    w = weil_action(s)
    G = Matrix.zeros(s.dim)
    wQ = w.H @ s.Q
    for (k, i, j), P in s.projections().items():
        term = P.H @ wQ @ P
        G = G + (term if j % 2 == 0 else -term)
    return G


def total_weil_operator(s):
    """C v = (-1)^j v on V^{i,j}."""
    C = Matrix.zeros(s.dim)
    for (k, i, j), P in s.projections().items():
        C = C + (P if j % 2 == 0 else -P)
    return C


def polarization_checks(s):
    """Named booleans for the bigrading and polarization axioms."""
    H, X, Y = s.triple.H, s.triple.X, s.triple.Y
    pairing = s.pairing
    n = s.weight
    w = weil_action(s)
    out = {}
    out["sl2-relations"] = s.triple.relations_hold()
    out["pieces-decompose"] = is_direct_sum(list(s.pieces.values()), s.dim)
    out["weights-match"] = all(i + j == n + k for (k, i, j) in s.pieces)
    out["H-eigenvalues"] = all(P.image(H) == P if k else P.image(H).is_zero()
                               for (k, i, j), P in s.pieces.items())
    bigrade = True
    for (k, i, j), P in s.pieces.items():
        up = s.pieces.get((k + 2, i + 1, j + 1), Subspace.zero(s.dim))
        down = s.pieces.get((k - 2, i - 1, j - 1), Subspace.zero(s.dim))
        if not up.contains(P.image(X)) or not down.contains(P.image(Y)):
            bigrade = False
    out["X-Y-bigraded"] = bigrade
    out["Fbar-from-Q"] = conjugate_filtration(s.F_total, pairing, n) == s.Fbar_total
    out["H-dagger=-H"] = pairing.dagger(H) == -H
    out["X-dagger=X"] = pairing.dagger(X) == X
    out["Y-dagger=Y"] = pairing.dagger(Y) == Y
    out["w-dagger=w"] = pairing.dagger(w) == w
    pol = True
    for k in sorted({k for (k, _, _) in s.pieces}):
        keys = sorted(key for key in s.pieces if key[0] == k)
        for a, ka in enumerate(keys):
            Ba = s.pieces[ka].matrix()
            G = Ba.H @ w.H @ s.Q @ Ba
            if ka[2] % 2:
                G = -G
            if G != G.H or not is_positive_definite_hermitian(G):
                pol = False
            for kb in keys[a + 1:]:
                Bb = s.pieces[kb].matrix()
                if not (Bb.H @ w.H @ s.Q @ Ba).is_zero():
                    pol = False
    out["Q(.,w.)-polarizes-V_k"] = pol
    return out


def validate(s):
    failed = [k for k, ok in polarization_checks(s).items() if not ok]
    if failed:
        raise RecognitionFails("sl2-Hodge structure checks failed: %s" % ", ".join(failed))
    return s


def weil_checks(s):
    """w^2 = (-1)^k on V_k and w V_k^{i,j} = V_{-k}^{i-k,j-k}."""
    w = weil_action(s)
    w2 = w @ w
    sq = True
    moves = True
    for (k, i, j), P in s.pieces.items():
        sign = -1 if k % 2 else 1
        for v in P.rows:
            if w2.apply(v) != tuple(x * sign for x in v):
                sq = False
        tgt = s.pieces.get((-k, i - k, j - k), Subspace.zero(s.dim))
        if P.image(w) != tgt:
            moves = False
    return {"w^2=(-1)^k": sq, "w-moves-pieces": moves}


def associated_pure_structure(s):
    """(F_sharp = e^Y F, its polarized Hodge structure, C_sharp = w C), with checks."""
    Y = s.triple.Y
    F_sharp = s.F_total.apply(nilpotent_exp(Y))
    hs = build_hodge_structure(F_sharp, s.Q, s.weight)
    C_sharp = weil_action(s) @ total_weil_operator(s)
    H, X = s.triple.H, s.triple.X
    checks = {
        "H*=H": hs.adjoint(H) == H,
        "Y*=X": hs.adjoint(Y) == X,
        "C_sharp=wC": hs.weil_operator() == C_sharp,
        "metric-matches-sl2-form": hs.gram() == sl2_inner_gram(s),
    }
    failed = [k for k, ok in checks.items() if not ok]
    if failed:
        raise RecognitionFails("associated Hodge structure checks failed: %s" % ", ".join(failed))
    return F_sharp, hs, C_sharp


def sharp_structure(s):
    if "sharp" not in s._cache:
        s._cache["sharp"] = associated_pure_structure(s)
    return s._cache["sharp"]


def recognize_sl2_filtration(Q, H, Y, F, n):
    """The polarized sl2-Hodge structure with total filtration F, if the data admit one."""
    dim = Q.nrows
    pairing = Pairing(Q)
    if pairing.dagger(H) != -H:
        raise PreconditionFails("H^dagger != -H", "H-dagger=-H")
    if pairing.dagger(Y) != Y:
        raise PreconditionFails("Y^dagger != Y", "Y-dagger=Y")
    if commutator(H, Y) != Y * -2:
        raise PreconditionFails("[H, Y] != -2Y", "[H,Y]=-2Y")
    if not F.is_preserved_by(Y, -1):
        raise PreconditionFails("Y F^p is not contained in F^{p-1}", "Y-transversal")
    if not F.is_preserved_by(H, 0):
        raise PreconditionFails("H does not preserve F", "H-preserves-F")
    try:
        build_hodge_structure(F.apply(nilpotent_exp(Y)), Q, n)
    except HodgeError as exc:
        raise PreconditionFails("e^Y F is not polarized by Q: %s" % exc, "e^Y F polarized") from None
    try:
        spec = integer_spectrum(H)
    except ValueError:
        raise PreconditionFails("H is not semisimple with integer eigenvalues", "H-semisimple") from None
    for k, Ek in spec.items():
        if spec.get(-k) is None or Ek.dim != spec[-k].dim:
            raise RecognitionFails("Y^k: E_k -> E_-k is not an isomorphism for k=%d" % k)
        if k > 0 and Ek.image(Y.power(k)) != spec[-k]:
            raise RecognitionFails("Y^k: E_k -> E_-k is not an isomorphism for k=%d" % k)
    Fbar = conjugate_filtration(F, pairing, n)
    pieces = {}
    for k, Ek in spec.items():
        for i in range(F.lo, F.hi + 1):
            j = n + k - i
            P = Ek & F[i] & Fbar[j]
            if P.dim:
                pieces[(k, i, j)] = P
    if not is_direct_sum(list(pieces.values()), dim):
        raise RecognitionFails("bigraded pieces E_k & F^i & Fbar^j do not decompose V")
    try:
        triple = sl2_complete(H, -Y)
    except ValueError as exc:
        raise RecognitionFails(str(exc)) from None
    s = _assemble(n, triple, Q, pieces)
    if s.F_total != F or s.Fbar_total != Fbar:
        raise RecognitionFails("pieces do not reproduce the filtrations")
    return validate(s)


def hxy_hodge_components(s):
    """(Y_{-1}, Y_0, Y_1) with 4Y_{-1} = Y-H-X, 2Y_0 = Y+X, 4Y_1 = Y+H-X, checked."""
    H, X, Y = s.triple.H, s.triple.X, s.triple.Y
    Ym1 = (Y - H - X) / 4
    Y0 = (Y + X) / 2
    Y1 = (Y + H - X) / 4
    _, hs, _ = sharp_structure(s)
    for j, A in ((-1, Ym1), (0, Y0), (1, Y1)):
        if hs.end_component(A, j) != A:
            raise RecognitionFails("Y_%d is not of type (%d,%d)" % (j, j, -j))
    if Ym1 + Y0 + Y1 != Y:
        raise RecognitionFails("Y components do not sum to Y")
    n = s.dim
    lhs = s.triple.casimir()
    T = Y0 * 2 + Matrix.identity(n)
    if lhs != T @ T - Ym1 @ Y1 * 16:
        raise RecognitionFails("Casimir identity fails")
    return Ym1, Y0, Y1


def lefschetz_decomposition(s, v, k):
    """{j: a_j} with v = sum_j X^j/j! a_j, Y a_j = 0, a_j in E_{k-2j}, for v in E_k.

    Solved as one linear system over bases of the primitive spaces; raises if v
    has no such expansion and returns the unique one otherwise.
    """
    X, Y = s.triple.X, s.triple.Y
    spec = integer_spectrum(s.triple.H)
    cols, labels = [], []
    Xj = Matrix.identity(s.dim)
    j = 0
    while k - 2 * j >= -s.dim:
        low = k - 2 * j
        if j >= max(k, 0) and low in spec:
            prim = spec[low] & kernel(Y)
            for b in prim.rows:
                cols.append(Xj.apply(b))
                labels.append((j, b))
        j += 1
        Xj = (Xj @ X) / j
    if all(not x for x in v):
        return {}
    if not cols:
        raise ValueError("vector has no Lefschetz decomposition")
    coeffs = solve_vector(Matrix.from_columns(cols), v)
    out = {}
    for (jj, b), c in zip(labels, coeffs):
        prev = out.get(jj, tuple(GQ(0) for _ in b))
        out[jj] = tuple(p + c * x for p, x in zip(prev, b))
    return {jj: a for jj, a in out.items() if any(a)}


# ---------------------------------------------------------------- model variations


@dataclass(frozen=True)
class ModelVariation:
    """Phi(z) = exp(-zY) F with monodromy T = exp(2 pi i (S - Y))."""

    base: Sl2HodgeStructure
    S: Matrix
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def N(self):
        return -self.base.triple.Y

    def datum(self):
        if "datum" not in self._cache:
            spec = rational_spectrum(self.S) if self.base.dim else {}
            groups = {}
            for lam, E in spec.items():
                a = lam.to_fraction()
                a = a - (a.numerator // a.denominator)
                groups[a] = groups[a] + E if a in groups else E
            ts = tuple(sorted(groups.items()))
            d = DegenerationDatum(self.base.dim, self.base.Q, ts, self.N, self.base.weight, self.base.F_total)
            self._cache["datum"] = d.validate()
        return self._cache["datum"]


def build_model_variation(s, S=None):
    n = s.dim
    S = Matrix.zeros(n) if S is None else S
    H, Y = s.triple.H, s.triple.Y
    if s.pairing.dagger(S) != S:
        raise PreconditionFails("S^dagger != S", "S-dagger=S")
    if not commutator(H, S).is_zero():
        raise PreconditionFails("[H, S] != 0", "[H,S]=0")
    if not commutator(Y, S).is_zero():
        raise PreconditionFails("[Y, S] != 0", "[Y,S]=0")
    if not s.F_total.is_preserved_by(S, 0):
        raise PreconditionFails("S does not preserve F", "S-preserves-F")
    try:
        spec = rational_spectrum(S) if n else {}
    except ValueError:
        raise PreconditionFails("S is not semisimple with rational spectrum", "S-spectrum") from None
    if any(not lam.is_real() for lam in spec):
        raise PreconditionFails("S has non-real eigenvalues", "S-spectrum")
    mv = ModelVariation(s, S)
    mv.datum()
    return mv


# ---------------------------------------------------------------- Hom(S_m, V)


def equivariant_maps(s, m):
    """{(a, b): [f]} spanning Hom(S_m, V)^{sl2}, f of Hodge type (a, b).

    f is fixed by f(v_0) = u, a primitive vector of H-weight m in V_m^{m+a, m+b},
    via f(v_k) = (m-k)!/m! Y^k u; equivariance is checked exactly.
    """
    H, X, Y = s.triple.H, s.triple.X, s.triple.Y
    model = irreducible_model(m)
    prim = kernel(X)
    out = {}
    for (k, i, j), P in sorted(s.pieces.items()):
        if k != m:
            continue
        for u in (P & prim).rows:
            cols = []
            w = u
            for kk in range(m + 1):
                cols.append(tuple(x * Fraction(factorial(m - kk), factorial(m)) for x in w))
                w = Y.apply(w)
            f = Matrix.from_columns(cols, s.dim)
            for A, B in ((H, model.triple.H), (X, model.triple.X), (Y, model.triple.Y)):
                if A @ f != f @ B:
                    raise RecognitionFails("constructed map S_%d -> V is not equivariant" % m)
            out.setdefault((i - m, j - m), []).append(f)
    return out


def hom_pairing(f, g, s, m):
    """tr(g^dagger f) / (m + 1), with g^dagger: V -> S_m adjoint for Q_V and Q_{S_m}."""
    Qs = irreducible_model(m).Q
    gd = inverse(Qs) @ g.H @ s.Q
    return (gd @ f).trace() / (m + 1)
