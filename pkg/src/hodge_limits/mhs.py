"""Complex mixed Hodge structures (W, F, Fbar): validation, Deligne splitting, operations."""

from dataclasses import dataclass, field

from .errors import ConsistencyError, DecompositionFails, NotMHS, HodgeError
from .exact import (
    Filtration, Matrix, Pairing, Subspace, direct_sum_projections, integer_spectrum, inverse,
    is_direct_sum, kron, sum_all, GQ,
)
from .hodge import unpolarized_hodge_structure
from .monodromy import graded_quotient_map

# above this dimension the End(V)-membership check of the Deligne splitting is skipped
MEMBERSHIP_CHECK_MAX_DIM = 10


@dataclass(frozen=True)
class MixedHodgeStructure:
    dim: int
    W: Filtration
    F: Filtration
    Fbar: Filtration
    gr: dict
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def weights(self):
        return sorted(self.gr)


@dataclass(frozen=True)
class DeligneSplitting:
    pieces: dict
    H: Matrix
    membership_checked: bool = False


def _zero_filtration(decreasing=True):
    return Filtration(0, {0: Subspace.zero(0)}, decreasing)


def induced_on_graded(Fil, W, k):
    """The filtration induced by Fil on gr_k W, in the coordinates of graded_quotient_map."""
    comp, pi = graded_quotient_map(W, k)
    d = comp.dim
    if d == 0:
        return _zero_filtration()
    Wk = W[k]
    steps = {p: (Fil[p] & Wk).image(pi) for p in range(Fil.lo, Fil.hi + 1)}
    return Filtration(d, steps, True)


def validate_mhs(W, F, Fbar):
    """Each gr_n W with the induced filtrations must be a Hodge structure of weight n."""
    dim = W.dim
    if F.dim != dim or Fbar.dim != dim or W.decreasing or not F.decreasing or not Fbar.decreasing:
        raise ValueError("validate_mhs: W increasing and F, Fbar decreasing on one space")
    gr = {}
    for n in range(W.lo + 1, W.hi + 1):
        if W[n].dim == W[n - 1].dim:
            continue
        Fg = induced_on_graded(F, W, n)
        Fbg = induced_on_graded(Fbar, W, n)
        try:
            gr[n] = unpolarized_hodge_structure(Fg, Fbg, n)
        except DecompositionFails as exc:
            raise NotMHS(n, "gr_%d is not a Hodge structure of weight %d: %s" % (n, n, exc)) from None
    m = MixedHodgeStructure(dim, W, F, Fbar, gr)
    if not vanishing_condition(m):
        raise ConsistencyError("graded pieces are Hodge structures but the vanishing condition fails")
    return m


def vanishing_condition(m):
    """F^p W_n & (Fbar^q W_n + Fbar^{q-1} W_{n-1} + ...) = 0 whenever p + q > n."""
    F, Fb, W = m.F, m.Fbar, m.W
    meet = {}

    def fbw(a, b):
        if (a, b) not in meet:
            meet[(a, b)] = Fb[a] & W[b]
        return meet[(a, b)]

    for n in range(W.lo + 1, W.hi + 1):
        for q in range(Fb.lo, Fb.hi + 1):
            # F is decreasing, so the smallest admissible p = n - q + 1 decides
            A = F[n - q + 1] & W[n]
            if A.is_zero():
                continue
            parts = [fbw(q - l, n - l) for l in range(0, n - W.lo + 1)]
            if not (A & sum_all(parts, m.dim)).is_zero():
                return False
    return True


def _deligne_piece(m, i, j):
    F, Fb, W = m.F, m.Fbar, m.W
    n = i + j
    parts = [Fb[j] & W[n]]
    l = 1
    while n - l - 1 > W.lo:
        parts.append(Fb[j - l] & W[n - l - 1])
        l += 1
    return F[i] & W[n] & sum_all(parts, m.dim)


def deligne_splitting(m, check_membership=None):
    """I^{i,j} = F^i & W_{i+j} & (Fbar^j & W_{i+j} + sum_l Fbar^{j-l} & W_{i+j-l-1})."""
    dim = m.dim
    if dim == 0:
        return DeligneSplitting({}, Matrix.zeros(0), True)
    pieces = {}
    for n, hs in m.gr.items():
        for (p, q), P in hs.pieces.items():
            I = _deligne_piece(m, p, q)
            if I.dim != P.dim:
                raise ConsistencyError("I^{%d,%d} has dimension %d, expected %d" % (p, q, I.dim, P.dim))
            pieces[(p, q)] = I
    keys = sorted(pieces)
    if not is_direct_sum([pieces[k] for k in keys], dim):
        raise ConsistencyError("Deligne pieces do not decompose V")
    for n in range(m.W.lo, m.W.hi + 1):
        if sum_all([P for (i, j), P in pieces.items() if i + j <= n], dim) != m.W[n]:
            raise ConsistencyError("W_%d is not the sum of I^{i,j}, i+j <= %d" % (n, n))
    for p in range(m.F.lo, m.F.hi + 1):
        if sum_all([P for (i, j), P in pieces.items() if i >= p], dim) != m.F[p]:
            raise ConsistencyError("F^%d is not the sum of I^{i,j}, i >= %d" % (p, p))
    projs = direct_sum_projections([pieces[k] for k in keys], dim)
    H = Matrix.zeros(dim)
    for (i, j), P in zip(keys, projs):
        H = H + P * (i + j)
    if check_membership is None:
        check_membership = dim <= MEMBERSHIP_CHECK_MAX_DIM
    if check_membership and not characteristic_membership(m, H):
        raise ConsistencyError("Deligne splitting fails its characteristic membership")
    return DeligneSplitting(pieces, H, bool(check_membership))


def characteristic_membership(m, H):
    """H in F^0 W_0 End & (Fbar^0 W_0 End + Fbar^{-1} W_{-2} End + Fbar^{-2} W_{-3} End + ...)."""
    e = end_mhs(m, validate=False)
    v = Subspace([H.vec()], m.dim ** 2)
    if not (e.F[0] & e.W[0]).contains(v):
        return False
    parts = [e.Fbar[0] & e.W[0]]
    l = 1
    while -l - 1 > e.W.lo:
        parts.append(e.Fbar[-l] & e.W[-l - 1])
        l += 1
    return sum_all(parts, m.dim ** 2).contains(v)


def is_split(m):
    """Split iff the Deligne pieces are F^i & Fbar^j & W_{i+j}."""
    d = deligne_splitting(m, check_membership=False)
    return all(P == (m.F[i] & m.Fbar[j] & m.W[i + j]) for (i, j), P in d.pieces.items())


def conjugate_mhs(m):
    return validate_mhs(m.W, m.Fbar, m.F)


# ---------------------------------------------------------------- operations


def _kron_space(U, V):
    return Subspace([tuple(a * b for a in u for b in v) for u in U.rows for v in V.rows],
                    U.ambient_dim * V.ambient_dim)


def _tensor_filtration(A, B):
    n = A.dim * B.dim
    if n == 0:
        return _zero_filtration(A.decreasing)
    steps = {}
    lo, hi = A.lo + B.lo - 1, A.hi + B.hi + 1
    for k in range(lo, hi + 1):
        parts = [_kron_space(A[a], B[k - a]) for a in range(A.lo - 1, A.hi + 2)]
        steps[k] = sum_all(parts, n)
    return Filtration(n, steps, A.decreasing)


def _dual_filtration(Fil, shift):
    """G[k] = annihilator of Fil[shift - k]."""
    n = Fil.dim
    if n == 0:
        return _zero_filtration(Fil.decreasing)
    steps = {}
    for k in range(shift - Fil.hi - 1, shift - Fil.lo + 2):
        steps[k] = Fil[shift - k].annihilator()
    return Filtration(n, steps, Fil.decreasing)


def dual_mhs(m, validate=True):
    """W_n = ann W_{-n-1}, F^p = ann F^{1-p}, Fbar^p = ann Fbar^{1-p}."""
    W = _dual_filtration(m.W, -1)
    F = _dual_filtration(m.F, 1)
    Fb = _dual_filtration(m.Fbar, 1)
    return validate_mhs(W, F, Fb) if validate else MixedHodgeStructure(m.dim, W, F, Fb, {})


def tensor_mhs(m1, m2, validate=True):
    W = _tensor_filtration(m1.W, m2.W)
    F = _tensor_filtration(m1.F, m2.F)
    Fb = _tensor_filtration(m1.Fbar, m2.Fbar)
    return validate_mhs(W, F, Fb) if validate else MixedHodgeStructure(m1.dim * m2.dim, W, F, Fb, {})


def end_mhs(m, validate=True):
    """End(V) = V (x) V^*, matching row-major vectorisation of matrices."""
    if "end" in m._cache and (not validate or m._cache["end"].gr or m.dim == 0):
        return m._cache["end"]
    e = tensor_mhs(m, dual_mhs(m, validate=False), validate=validate)
    m._cache["end"] = e
    return e


def tate_twist(m, k):
    """W_n V(k) = W_{n+2k}, F^p V(k) = F^{p+k}, Fbar^q V(k) = Fbar^{q+k}."""
    return validate_mhs(m.W.shift(2 * k), m.F.shift(k), m.Fbar.shift(k))


def mhs_construct(op, *args):
    if op == "dual":
        return dual_mhs(args[0])
    if op == "tensor":
        return tensor_mhs(args[0], args[1])
    if op == "end":
        return end_mhs(args[0])
    if op == "tate":
        return tate_twist(args[0], args[1])
    raise ValueError("unknown MHS operation %r" % (op,))


def tensor_splitting(H1, H2):
    return kron(H1, Matrix.identity(H2.nrows)) + kron(Matrix.identity(H1.nrows), H2)


def dual_splitting(H):
    return -H.T


def is_morphism(A, m1, m2, r=0):
    """A: V1 -> V2(r)?  i.e. A W_k in W_{k+2r}, A F^p in F^{p+r}, A Fbar^q in Fbar^{q+r}."""
    for k in range(m1.W.lo - 1, m1.W.hi + 2):
        if not m2.W[k + 2 * r].contains(m1.W[k].image(A)):
            return False
    for p in range(m1.F.lo - 1, m1.F.hi + 2):
        if not m2.F[p + r].contains(m1.F[p].image(A)):
            return False
    for q in range(m1.Fbar.lo - 1, m1.Fbar.hi + 2):
        if not m2.Fbar[q + r].contains(m1.Fbar[q].image(A)):
            return False
    return True


# ---------------------------------------------------------------- R and complements


def r_subspace(m, shift=-2):
    """R(W_{-2}) as the sum of Deligne pieces I^{i,j} with i, j <= -1, cross-checked."""
    d = deligne_splitting(m, check_membership=False)
    R = sum_all([P for (i, j), P in d.pieces.items() if i <= -1 and j <= -1], m.dim)
    lhs = []
    rhs = []
    l = 1
    while -l - 1 > m.W.lo:
        lhs.append(m.F[-l] & m.W[-l - 1])
        rhs.append(m.Fbar[-l] & m.W[-l - 1])
        l += 1
    R2 = sum_all(lhs, m.dim) & sum_all(rhs, m.dim)
    if R2 != R:
        raise ConsistencyError("two descriptions of R(W_{-2}) disagree")
    return R


def canonical_complements(m):
    """(R(W_{-2}), sum_n Fbar^{n+1} & W_n) with W_{-1} = F^0W_{-1} + Fbar^0W_{-1} + R and V = F^0 + complement."""
    n = m.dim
    R = r_subspace(m)
    Wm1 = m.W[-1]
    parts = [m.F[0] & Wm1, m.Fbar[0] & Wm1, R]
    if sum(p.dim for p in parts) != Wm1.dim or sum_all(parts, n) != Wm1:
        raise ConsistencyError("W_{-1} is not F^0W_{-1} + Fbar^0W_{-1} + R(W_{-2})")
    comp = sum_all([m.Fbar[k + 1] & m.W[k] for k in range(m.W.lo, m.W.hi + 1)], n)
    if comp.dim + m.F[0].dim != n or (comp + m.F[0]).dim != n:
        raise ConsistencyError("sum of Fbar^{n+1} W_n is not a complement of F^0")
    return R, comp


def splitting_transfer(m):
    """g with Hbar = g H g^{-1}, g acting on E_n(H) by projecting to E_n(Hbar)."""
    H = deligne_splitting(m, check_membership=False).H
    Hb = deligne_splitting(conjugate_mhs(m), check_membership=False).H
    sp = integer_spectrum(H, bound=max(abs(m.W.lo), abs(m.W.hi)) + 1)
    spb = integer_spectrum(Hb, bound=max(abs(m.W.lo), abs(m.W.hi)) + 1)
    keys = sorted(sp)
    P = dict(zip(keys, direct_sum_projections([sp[k] for k in keys], m.dim)))
    keysb = sorted(spb)
    Pb = dict(zip(keysb, direct_sum_projections([spb[k] for k in keysb], m.dim)))
    g = Matrix.zeros(m.dim)
    for k in keys:
        g = g + Pb[k] @ P[k]
    if g @ H @ inverse(g) != Hb:
        raise ConsistencyError("splitting transfer does not conjugate H to Hbar")
    Rend = r_subspace(end_mhs(m))
    if not Rend.contains_vector((g - Matrix.identity(m.dim)).vec()):
        raise ConsistencyError("g - id is not in R(W_{-2} End)")
    return g, H, Hb


def real_splitting(m, Q, n):
    """H_R = (H - H^dagger)/2 for a MHS self-dual under Q up to a twist by n."""
    pairing = Pairing(Q)
    W = m.W
    for k in range(W.lo - 1, W.hi + 2):
        if pairing.perp(W[2 * n - k - 1]) != W[k]:
            raise HodgeError("W_%d is not the Q-annihilator of W_%d" % (k, 2 * n - k - 1), "Q-W-duality")
    from .hodge import conjugate_filtration
    if conjugate_filtration(m.F, pairing, n) != m.Fbar:
        raise HodgeError("Fbar is not the Q-annihilator filtration of F", "Q-F-duality")
    H = deligne_splitting(m).H
    Hd = pairing.dagger(H)
    HR = (H - Hd) / 2
    dim = m.dim
    Id = Matrix.identity(dim)
    if pairing.dagger(HR) != -HR:
        raise ConsistencyError("H_R is not in g")
    Hb = deligne_splitting(conjugate_mhs(m), check_membership=False).H
    if Hb != Id * (2 * n) - Hd:
        raise ConsistencyError("conjugate splitting differs from 2n - H^dagger")
    spec = integer_spectrum(HR, bound=max(abs(W.lo - n), abs(W.hi - n)) + 1)
    for k in range(W.lo - n, W.hi - n + 1):
        Ek = spec.get(k, Subspace.zero(dim))
        low = W[n + k - 1]
        if Ek.dim + low.dim != W[n + k].dim or (Ek + low) != W[n + k]:
            raise ConsistencyError("H_R does not split the shifted weight filtration")
    Rend = r_subspace(end_mhs(m))
    if not Rend.contains_vector((HR - (H - Id * n)).vec()):
        raise ConsistencyError("H_R - (H - n) is not in R(W_{-2} End)")
    return HR
