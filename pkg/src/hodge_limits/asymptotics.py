"""Limit filtrations, the SL(2)-orbit series and numeric checks of norm estimates."""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import comb, factorial

import numpy as np
from scipy.linalg import expm

from .errors import ConsistencyError, HodgeError, InvalidLimitDatum, PreconditionFails
from .exact import (
    Filtration, Matrix, Subspace, direct_sum_projections, inverse, grade_components, integer_spectrum,
    nilpotency_index, nilpotent_exp, rationalize, solve_vector, sum_all, GQ,
)
from .hodge import build_hodge_structure, conjugate_filtration, in_f0_end, in_m, period_domain_membership, split_tangent
from .mhs import deligne_splitting, is_morphism, validate_mhs
from .monodromy import DegenerationDatum, ad_triple, grading_splitting, isotypical_decompose, higgs_constant, weight_filtration
from .sl2hodge import ModelVariation, hxy_hodge_components, recognize_sl2_filtration, sharp_structure

DEFAULT_X_GRID = tuple(float(x) for x in np.logspace(2, 6, 25))
DEFAULT_Y_VALUES = (0.0, 1.0, float(np.pi))


def thread_count():
    try:
        return max(1, int(os.environ.get("HODGE_LIMITS_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Order-preserving map, fanned out over HODGE_LIMITS_THREADS workers."""
    items = list(items)
    k = thread_count()
    if k == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------- exact limits


def _sort_key(a):
    if isinstance(a, GQ):
        if not a.is_real():
            raise ValueError("semisimple_limit needs real eigenvalues")
        return a.to_fraction()
    return Fraction(a)


def semisimple_limit(spectrum, F, sign="+"):
    """lim_{x -> oo} exp(+-xS) F for S = sum alpha P_alpha, computed exactly.

    Sign '+': the limit of U is the sum over alpha of P_alpha(U & W_alpha), with
    W_alpha the sum of eigenspaces with eigenvalue <= alpha (>= alpha for '-').
    """
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    n = F.dim
    spectrum = sorted(((_sort_key(a), E) for a, E in spectrum), key=lambda t: t[0])
    if sign == "-":
        spectrum = spectrum[::-1]
    spaces = [E for _, E in spectrum]
    try:
        projs = direct_sum_projections(spaces, n)
    except ValueError:
        raise ValueError("semisimple_limit: eigenspaces do not decompose V") from None
    partial = []
    acc = Subspace.zero(n)
    for E in spaces:
        acc = acc + E
        partial.append(acc)

    def limit_of(U):
        return sum_all([(U & Wa).image(P) for Wa, P in zip(partial, projs)], n)

    if n == 0:
        return F
    return Filtration(n, {p: limit_of(F[p]) for p in F.indices()}, True)


@dataclass(frozen=True)
class LimitPackage:
    datum: DegenerationDatum
    F_lim: Filtration
    F_H: Filtration
    F_sharp: Filtration
    H: Matrix
    sl2: object = None
    mhs: object = None
    h_coeffs: dict = field(default_factory=dict)
    B_coeffs: dict = field(default_factory=dict)
    C_coeffs: dict = field(default_factory=dict)
    order: int = 0
    checks: dict = field(default_factory=dict)

    @property
    def Q(self):
        return self.datum.Q

    @property
    def N(self):
        return self.datum.N

    @property
    def weight(self):
        return self.datum.weight

    def sharp(self):
        """Polarized Hodge structure of F_sharp."""
        return sharp_structure(self.sl2)[1]


def _h_spectrum(H):
    return sorted(integer_spectrum(H).items())


def limit_filtrations(source, H=None):
    """F_lim, F_H = lim exp(tH) F_lim, F_sharp = exp(-N) F_H and the limiting structures."""
    if isinstance(source, ModelVariation):
        d = source.datum()
        H = source.base.triple.H if H is None else H
    else:
        d = source.validate()
    if d.F is None:
        raise InvalidLimitDatum("no limiting filtration supplied")
    F, N, Q, n = d.F, d.N, d.Q, d.weight
    pre = {
        "N F^p in F^{p-1}": F.is_preserved_by(N, -1),
        "T_s F^p in F^p": all(F.is_preserved_by(P, 0) for P in d.ts_projections().values()),
    }
    failed = [k for k, ok in pre.items() if not ok]
    if failed:
        raise InvalidLimitDatum("limit filtration fails: %s" % ", ".join(failed), failed[0])
    if H is None:
        H = grading_splitting(d)
    F_H = semisimple_limit(_h_spectrum(H), F, "+") if d.dim else F
    F_sharp = F_H.apply(nilpotent_exp(N, -1))
    try:
        build_hodge_structure(F_sharp, Q, n)
    except HodgeError as exc:
        raise InvalidLimitDatum("exp(-N) F_H is not a polarized Hodge structure: %s" % exc,
                                "F_sharp-polarized") from None
    checks = dict(pre)
    checks["N F_H^p in F_H^{p-1}"] = F_H.is_preserved_by(N, -1)
    checks["H F_H^p in F_H^p"] = F_H.is_preserved_by(H, 0)
    checks["T_s F_H^p in F_H^p"] = all(F_H.is_preserved_by(P, 0) for P in d.ts_projections().values())
    bad = [k for k, ok in checks.items() if not ok]
    if bad:
        raise ConsistencyError("F_H stability fails: %s" % ", ".join(bad), bad[0])
    s = recognize_sl2_filtration(Q, H, -N, F_H, n)
    checks["sl2-recognition"] = True
    mhs = limiting_mhs(d, F)
    checks["limiting-MHS"] = True
    checks["N-morphism(-1,-1)"] = is_morphism(N, mhs, mhs, -1)
    checks["T_s-morphism"] = all(is_morphism(P, mhs, mhs, 0) for P in d.ts_projections().values())
    bad = [k for k in ("N-morphism(-1,-1)", "T_s-morphism") if not checks[k]]
    if bad:
        raise ConsistencyError("limiting MHS morphism check fails: %s" % ", ".join(bad), bad[0])
    return LimitPackage(d, F, F_H, F_sharp, H, s, mhs, checks=checks)


def limiting_mhs(d, F_lim=None):
    """(W(N)_{. - n}, F_lim, Fbar_lim) validated as a mixed Hodge structure."""
    F = d.F if F_lim is None else F_lim
    W = weight_filtration(d.N).shift(-d.weight)
    Fbar = conjugate_filtration(F, d.pairing, d.weight)
    return validate_mhs(W, F, Fbar)


# ---------------------------------------------------------------- SL(2) series


def _series_mul(a, b, order, n):
    """Product of truncated series {k: Matrix} up to order."""
    out = {}
    for i, A in a.items():
        for j, B in b.items():
            if i + j <= order:
                out[i + j] = out[i + j] + A @ B if i + j in out else A @ B
    return out


def series_exp(terms, order, n):
    """Coefficients of exp(sum_k u^k X_k) up to u^order; terms has keys >= 1."""
    out = {0: Matrix.identity(n)}
    power = {0: Matrix.identity(n)}
    for j in range(1, order + 1):
        power = _series_mul(power, terms, order, n)
        if not power:
            break
        for k, A in power.items():
            A = A / factorial(j)
            out[k] = out[k] + A if k in out else A
    return out


def limit_transfer(pkg):
    """h with h V_k^{i,j} = I_lim^{i,j} and hv - v in W_{k-1}."""
    d = pkg.datum
    n = d.dim
    W = weight_filtration(d.N)
    I = deligne_splitting(pkg.mhs).pieces
    cols_src, cols_dst = [], []
    for (k, i, j), P in sorted(pkg.sl2.pieces.items()):
        target = I.get((i, j))
        if target is None or target.dim != P.dim:
            raise ConsistencyError("Deligne piece I^{%d,%d} does not match V_%d^{%d,%d}" % (i, j, k, i, j))
        low = W[k - 1]
        basis = list(target.rows) + list(low.rows)
        M = Matrix.from_columns(basis)
        for v in P.rows:
            c = solve_vector(M, v)
            u = [GQ(0)] * n
            for coef, b in zip(c[:target.dim], target.rows):
                u = [x + coef * y for x, y in zip(u, b)]
            cols_src.append(v)
            cols_dst.append(tuple(u))
    return Matrix.from_columns(cols_dst) @ inverse(Matrix.from_columns(cols_src))


def cheap_sl2_series(pkg, order=None):
    """h_{-k}, B_{-k}, C_{-k} from (id + sum u^k h_{-k}) exp(C(u)) = exp(B(u))."""
    d = pkg.datum
    n = d.dim
    if order is None:
        order = default_order(d.N)
    if order < 1:
        raise ValueError("order must be positive")
    if n == 0:
        return replace(pkg, order=order)
    h = limit_transfer(pkg)
    if pkg.F_H.apply(h) != pkg.F_lim:
        raise ConsistencyError("h F_H != F_lim", "h-F_H=F_lim")
    spec = _h_spectrum(pkg.H)
    projs = dict(zip([k for k, _ in spec], direct_sum_projections([E for _, E in spec], n)))
    comps = grade_components(h - Matrix.identity(n), projs)
    h_coeffs = {}
    for j, A in comps.items():
        if A.is_zero():
            continue
        if j >= 0:
            raise ConsistencyError("h - id has a component of ad H-degree %d >= 0" % j, "h-lowering")
        if not (A @ d.N - d.N @ A).is_zero():
            raise ConsistencyError("h_{%d} does not commute with N" % j, "h-commutes-N")
        h_coeffs[-j] = A
    hs = sharp_structure(pkg.sl2)[1]
    B, C = {}, {}
    hser = dict(h_coeffs)
    for k in range(1, order + 1):
        EC = series_exp(C, k, n)
        EB = series_exp(B, k, n)
        zero = Matrix.zeros(n)
        R = hser.get(k, zero) + EC.get(k, zero) - EB.get(k, zero)
        for a in range(1, k):
            if a in hser and (k - a) in EC:
                R = R + hser[a] @ EC[k - a]
        Bk, Ck = split_tangent(R, hs)
        if not (in_m(Bk, hs) and in_f0_end(Ck, hs)):
            raise ConsistencyError("m + F^0 End split fails at order %d" % k, "m-F0-split")
        if not Bk.is_zero():
            B[k] = Bk
        if not Ck.is_zero():
            C[k] = -Ck
    out = replace(pkg, h_coeffs=h_coeffs, B_coeffs=B, C_coeffs=C, order=order)
    checks = dict(pkg.checks)
    checks["series-identity"] = series_identity_holds(out)
    checks["B_-1=h_-1+C_-1"] = (B.get(1, Matrix.zeros(n)) ==
                               h_coeffs.get(1, Matrix.zeros(n)) + C.get(1, Matrix.zeros(n)))
    iso = isotypical_membership(out)
    checks["isotypical-membership"] = all(iso.values())
    bad = [k for k in ("series-identity", "B_-1=h_-1+C_-1", "isotypical-membership") if not checks[k]]
    if bad:
        raise ConsistencyError("SL(2) series check fails: %s" % ", ".join(bad), bad[0])
    return replace(out, checks=checks)


def default_order(N):
    return 2 * nilpotency_index(N) + 2


def series_identity_holds(pkg):
    """(id + sum u^k h_{-k}) exp(C(u)) and exp(B(u)) agree up to u^order."""
    n = pkg.datum.dim
    K = pkg.order
    hser = {0: Matrix.identity(n)}
    hser.update({k: A for k, A in pkg.h_coeffs.items() if k <= K})
    lhs = _series_mul(hser, series_exp(pkg.C_coeffs, K, n), K, n)
    rhs = series_exp(pkg.B_coeffs, K, n)
    zero = Matrix.zeros(n)
    return all(lhs.get(k, zero) == rhs.get(k, zero) for k in range(K + 1))


def isotypical_membership(pkg):
    """{('B'|'C', k): coefficient lies in the sum of S_{k-2i}-isotypic parts of End(V)}."""
    n = pkg.datum.dim
    comps = dict(isotypical_decompose(ad_triple(pkg.sl2.triple)))
    out = {}
    for name, coeffs in (("B", pkg.B_coeffs), ("C", pkg.C_coeffs)):
        for k, A in coeffs.items():
            allowed = sum_all([comps[m] for m in range(k % 2, k + 1, 2) if m in comps], n * n)
            out[(name, k)] = allowed.contains_vector(A.vec())
    return out


# ---------------------------------------------------------------- numerics


def numeric(A):
    return A.to_numpy()


def _scaled(projs, scale):
    """sum_k scale(k) P_k for exact eigenprojections P_k of a semisimple operator."""
    out = None
    for k, P in projs.items():
        term = scale(k) * P
        out = term if out is None else out + term
    return out


def _h_projections(H):
    spec = _h_spectrum(H)
    projs = direct_sum_projections([E for _, E in spec], H.nrows)
    return {k: numeric(P) for (k, _), P in zip(spec, projs)}


def _nil_exp(A, c):
    """exp(cA) for nilpotent A by its finite series."""
    n = A.shape[0]
    out = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for j in range(1, n + 1):
        term = term @ A * (c / j)
        out = out + term
    return out


def metric_at(model, z):
    """Gram matrix G(z) with <v, w>_{Phi(z)} = w^H G(z) v, Phi(z) = exp(zN) F."""
    z = complex(z)
    if z.real >= 0:
        raise ValueError("metric_at needs Re z < 0")
    c = model._cache
    if "metric" not in c:
        s = model.base
        G = numeric(sharp_structure(s)[1].gram())
        c["metric"] = (G, _h_projections(s.triple.H), numeric(s.triple.X), numeric(s.triple.Y))
    G, projs, X, Y = c["metric"]
    x, y = abs(z.real), z.imag
    M = _nil_exp(X, -1j * y) @ _scaled(projs, lambda k: x ** k) @ _nil_exp(Y, 1j * y)
    return G @ M


def norm_squared(G, v):
    v = np.asarray(v, dtype=complex)
    return float(np.real(np.conj(v) @ G @ v))


@dataclass
class Fit:
    slope: float
    residual: float
    xs: list
    values: list


def _check_grid(grid, decades=3.0):
    grid = np.abs(np.asarray(grid, dtype=float))
    if len(grid) < 3 or np.any(grid == 0) or np.log10(grid.max() / grid.min()) < decades - 1e-9:
        raise ValueError("degenerate grid: need >= 3 points spanning >= %g decades" % decades)
    return grid


def _loglog_fit(xs, values):
    lx, ly = np.log(xs), np.log(values)
    coef, res, *_ = np.polyfit(lx, ly, 1, full=True)
    residual = float(np.sqrt(res[0] / len(xs))) if len(res) else 0.0
    return float(coef[0]), residual


def growth_exponent(model, v, x_grid=DEFAULT_X_GRID, y=0.0):
    """Least-squares slope of log ||v||^2_{Phi(x+iy)} against log |x|."""
    if not np.any(np.asarray(v, dtype=complex)):
        raise ValueError("growth_exponent needs v != 0")
    xs = _check_grid(x_grid)
    values = parallel_map(lambda x: norm_squared(metric_at(model, complex(-x, y)), v), xs)
    slope, residual = _loglog_fit(xs, values)
    return Fit(slope, residual, list(xs), values)


def leading_norm(model, v, ell, x, y):
    """sum_k y^{2k}/(k!)^2 |x|^{ell-2k} ||Y^k v||_sharp^2 for v of H-weight ell."""
    s = model.base
    G = numeric(sharp_structure(s)[1].gram())
    Y = numeric(s.triple.Y)
    w = np.asarray(v, dtype=complex)
    total = 0.0
    for k in range(s.dim + 1):
        total += y ** (2 * k) / factorial(k) ** 2 * abs(x) ** (ell - 2 * k) * norm_squared(G, w)
        w = Y @ w
    return total


def hodge_norm_squared_end(A, G):
    """tr(A A*) with A* = G^{-1} A^H G."""
    Astar = np.linalg.solve(G, A.conj().T @ G)
    return float(np.real(np.trace(A @ Astar)))


def higgs_norm_check(model, z):
    """(|x|^-2 ||Y_{-1}||^2 at Phi(-1), C_0^2/x^2, bound - value)."""
    z = complex(z)
    if z.real >= 0:
        raise ValueError("higgs_norm_check needs Re z < 0")
    s = model.base
    x2 = z.real ** 2
    bound = higgs_constant(s.dim) ** 2 / x2
    if s.dim == 0:
        return 0.0, bound, bound
    Ym1 = hxy_hodge_components(s)[0]
    hs = sharp_structure(s)[1]
    exact = (Ym1 @ hs.adjoint(Ym1)).trace()
    value = float(exact.to_fraction()) / x2
    return value, bound, bound - value


def _numeric_rref(B, tol=1e-12):
    """Row-reduced basis (rows) of the row space of B with partial pivoting."""
    A = np.array(B, dtype=complex)
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = r + int(np.argmax(np.abs(A[r:, c])))
        if abs(A[piv, c]) < tol:
            continue
        A[[r, piv]] = A[[piv, r]]
        A[r] = A[r] / A[r, c]
        for i in range(rows):
            if i != r:
                A[i] = A[i] - A[i, c] * A[r]
        r += 1
    return A[:r]


def rationalize_subspace(basis_rows, dim, tol=1e-7, max_den=10**6):
    """(Subspace, worst residual) from a numeric basis, or (None, residual) past tol."""
    R = _numeric_rref(basis_rows) if len(basis_rows) else np.zeros((0, dim))
    worst = 0.0
    vecs = []
    for row in R:
        out = []
        for x in row:
            q, res = rationalize(x, max_den)
            worst = max(worst, res)
            out.append(q)
        vecs.append(tuple(out))
    if worst > tol:
        return None, worst
    return Subspace(vecs, dim), worst


def nilpotent_orbit_scan(F_lim, N, Q, n, x_grid, y_grid):
    """[(x, y, verdict, residual)] for exp(zN) F_lim, verdict In-D / DecompositionFails /
    NotPolarized / Indeterminate."""
    dim = F_lim.dim
    Nn = numeric(N)
    bases = {p: np.array([[complex(a) for a in v] for v in F_lim[p].rows], dtype=complex).reshape(-1, dim)
             for p in F_lim.indices()}

    def one(point):
        x, y = point
        E = _nil_exp(Nn, complex(x, y))
        steps = {}
        worst = 0.0
        for p, B in bases.items():
            S, res = rationalize_subspace((E @ B.T).T if len(B) else B, dim)
            worst = max(worst, res)
            if S is None:
                return (x, y, "Indeterminate", worst)
            steps[p] = S
        try:
            F = Filtration(dim, steps, True)
        except ValueError:
            return (x, y, "Indeterminate", worst)
        return (x, y, period_domain_membership(F, Q, n), worst)

    return parallel_map(one, [(float(x), float(y)) for x in x_grid for y in y_grid])


def series_numeric(coeffs, u):
    out = None
    for k, A in coeffs.items():
        term = numeric(A) * u ** k
        out = term if out is None else out + term
    return out


def g_of_u(pkg, u):
    """g(u) = exp(-B(u)) from the truncated series."""
    n = pkg.datum.dim
    B = series_numeric(pkg.B_coeffs, u)
    if B is None:
        return np.eye(n, dtype=complex)
    return expm(-B)


def span_distance(A, B):
    """Spectral norm of the difference of orthogonal projectors onto the column spans."""
    if A.shape[1] != B.shape[1]:
        return float("inf")
    if A.shape[1] == 0:
        return 0.0
    qa, _ = np.linalg.qr(A)
    qb, _ = np.linalg.qr(B)
    return float(np.linalg.norm(qa @ qa.conj().T - qb @ qb.conj().T, 2))


def _columns(S):
    return np.array([[complex(a) for a in v] for v in S.rows], dtype=complex).reshape(-1, S.ambient_dim).T


def sl2_orbit_identity_error(pkg, u):
    """max_p span distance between exp(-N)exp(-(log u)H) F_lim^p and exp(B(u)) F_sharp^p."""
    n = pkg.datum.dim
    projs = _h_projections(pkg.H)
    lhs_op = _nil_exp(numeric(pkg.N), -1.0) @ _scaled(projs, lambda k: u ** (-k))
    B = series_numeric(pkg.B_coeffs, u)
    rhs_op = np.eye(n, dtype=complex) if B is None else expm(B)
    worst = 0.0
    for p in pkg.F_lim.indices():
        a = lhs_op @ _columns(pkg.F_lim[p])
        b = rhs_op @ _columns(pkg.F_sharp[p])
        worst = max(worst, span_distance(a, b))
    return worst


@dataclass
class DecayFit:
    slope: float
    residual: float
    identically_zero: bool
    us: list
    values: list


def rescaled_decay_check(pkg, v, w, u_grid=None):
    """Fit log |<g(u)v, g(u)w>_sharp| against log u."""
    if u_grid is None:
        u_grid = np.logspace(-4, -2, 15)
    us = np.asarray(u_grid, dtype=float)
    if len(us) < 3 or np.any(us <= 0) or us.max() / us.min() < 10:
        raise ValueError("degenerate grid: need >= 3 positive points spanning a decade")
    G = numeric(pkg.sharp().gram())
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)

    def one(u):
        g = g_of_u(pkg, u)
        return abs(np.conj(g @ w) @ G @ (g @ v))

    values = parallel_map(one, us)
    scale = max(1.0, float(np.linalg.norm(v) * np.linalg.norm(w) * np.linalg.norm(G)))
    if max(values) <= 1e-14 * scale:
        return DecayFit(float("inf"), 0.0, True, list(us), values)
    slope, residual = _loglog_fit(us, values)
    return DecayFit(slope, residual, False, list(us), values)


def commutator_inequality_check(A, assert_nilpotent=True, tol=1e-9):
    """(||[A*,A]||^2, 2||A||^4, binom(r+1,3) ||[A*,A]||^2) with A* = conjugate transpose."""
    A = np.asarray(A, dtype=complex)
    r = A.shape[0]
    norm = np.linalg.norm(A)
    if assert_nilpotent and norm > 0:
        if np.linalg.norm(np.linalg.matrix_power(A / norm, r)) > 1e-8:
            raise PreconditionFails("matrix is not nilpotent", "nilpotent")
    comm = A.conj().T @ A - A @ A.conj().T
    c2 = float(np.linalg.norm(comm) ** 2)
    lhs, mid, rhs = c2, 2 * float(norm) ** 4, comb(r + 1, 3) * c2
    return lhs, mid, rhs


def commutator_inequalities_hold(triple, tol=1e-9):
    lhs, mid, rhs = triple
    scale = max(abs(mid), 1e-300)
    return lhs <= mid + tol * scale and mid <= rhs + tol * scale


def equality_matrix(r):
    """r x r with |a_{k,k+1}|^2 = k(r-k)."""
    A = np.zeros((r, r), dtype=complex)
    for k in range(1, r):
        A[k - 1, k] = np.sqrt(k * (r - k))
    return A


def monodromy_matrix(model):
    """T = exp(2 pi i S) exp(2 pi i N)."""
    S = numeric(model.S)
    N = numeric(model.N)
    return expm(2j * np.pi * S) @ _nil_exp(N, 2j * np.pi)


def twisted_datum(m=2, eps=1):
    """S_m data with F_lim = (id + eps N) F_total: a non-split limiting MHS when eps != 0."""
    from .sl2hodge import irreducible_model
    s = irreducible_model(m)
    N = -s.triple.Y
    F = s.F_total.apply(Matrix.identity(s.dim) + N * GQ.of(eps))
    d = DegenerationDatum(s.dim, s.Q, ((Fraction(0), Subspace.full(s.dim)),), N, s.weight, F)
    return d.validate()
