import pytest

from hodge_limits.asymptotics import limit_filtrations, limiting_mhs, twisted_datum
from hodge_limits.errors import NotMHS
from hodge_limits.exact import Filtration, GQ, Matrix, Subspace, sum_all
from hodge_limits.mhs import (
    canonical_complements, conjugate_mhs, deligne_splitting, dual_mhs, dual_splitting, end_mhs, is_morphism,
    is_split, mhs_construct, r_subspace, real_splitting, splitting_transfer, tate_twist, tensor_mhs,
    tensor_splitting, validate_mhs,
)
from hodge_limits.monodromy import graded_quotient_map
from hodge_limits.sl2hodge import build_model_variation, irreducible_model, model_family, sharp_structure

from helpers import direct_sum_mhs, random_mhs, rng


def sub(*vecs, n=2):
    return Subspace(list(vecs), n)


def inc(n, steps):
    return Filtration(n, steps, decreasing=False)


def dec(n, steps):
    return Filtration(n, steps, decreasing=True)


def pure_mhs(hs):
    W = Filtration.trivial(hs.dim, hs.weight, decreasing=False)
    return validate_mhs(W, hs.F, hs.Fbar)


def nonsplit_example():
    e1, e2 = (1, 0), (0, 1)
    W = inc(2, {-3: sub(n=2), -2: sub(e2), -1: sub(e2), 0: Subspace.full(2)})
    F = dec(2, {-1: Subspace.full(2), 0: sub(e1), 1: sub(n=2)})
    Fb = dec(2, {-1: Subspace.full(2), 0: sub((1, 1)), 1: sub(n=2)})
    return validate_mhs(W, F, Fb)


# ---------------------------------------------------------------- validation


def test_pure_structure_is_mhs():
    hs = sharp_structure(irreducible_model(1))[1]
    m = pure_mhs(hs)
    d = deligne_splitting(m)
    assert d.H == Matrix.identity(2) * 1
    assert d.pieces == hs.pieces
    assert is_split(m)


def test_not_mhs_is_reported_with_weight():
    W = inc(2, {-1: sub(n=2), 0: Subspace.full(2)})
    flag = dec(2, {0: Subspace.full(2), 1: sub((1, 0)), 2: sub(n=2)})
    with pytest.raises(NotMHS) as exc:
        validate_mhs(W, flag, flag)
    assert exc.value.weight == 0


def test_literal_adjacent_weight_example_is_rejected():
    e1, e2 = (1, 0), (0, 1)
    W = inc(2, {-2: sub(n=2), -1: sub(e2), 0: Subspace.full(2)})
    F = dec(2, {-1: Subspace.full(2), 0: sub(e1), 1: sub(n=2)})
    Fb = dec(2, {-1: Subspace.full(2), 0: sub((1, 1)), 1: sub(n=2)})
    with pytest.raises(NotMHS) as exc:
        validate_mhs(W, F, Fb)
    assert exc.value.weight == -1


def test_zero_dimensional_mhs():
    z = Filtration(0, {0: Subspace.zero(0)})
    m = validate_mhs(Filtration(0, {0: Subspace.zero(0)}, False), z, z)
    assert deligne_splitting(m).pieces == {}


# ---------------------------------------------------------------- Deligne splitting


def test_nonsplit_example():
    m = nonsplit_example()
    d = deligne_splitting(m)
    assert d.pieces == {(0, 0): sub((1, 0)), (-1, -1): sub((0, 1))}
    assert d.H == Matrix.diag([0, -2])
    assert d.membership_checked
    assert not is_split(m)
    # v in F^p & W_{p+q} & Fbar^q gives Hv = (p+q)v
    for p in range(-1, 2):
        for q in range(-1, 2):
            for v in (m.F[p] & m.W[p + q] & m.Fbar[q]).rows:
                assert d.H.apply(v) == tuple(x * (p + q) for x in v)
    g, H, Hb = splitting_transfer(m)
    assert g == Matrix([[1, 0], [1, 1]])
    assert Hb == Matrix([[0, 0], [2, -2]])


def test_split_case_formula():
    m, _, _ = random_mhs(rng(4), 5, twist=False)
    d = deligne_splitting(m)
    for (i, j), P in d.pieces.items():
        assert P == m.F[i] & m.W[i + j] & m.Fbar[j]
    assert is_split(m)


@pytest.mark.parametrize("seed", range(8))
def test_decomposition_identities_and_rank(seed):
    r = rng(seed)
    m, _, _ = random_mhs(r, r.randint(1, 6))
    d = deligne_splitting(m)
    n = m.dim
    for k in range(m.W.lo, m.W.hi + 1):
        assert sum_all([P for (i, j), P in d.pieces.items() if i + j <= k], n) == m.W[k]
    for p in range(m.F.lo, m.F.hi + 1):
        assert sum_all([P for (i, j), P in d.pieces.items() if i >= p], n) == m.F[p]
    for (i, j), P in d.pieces.items():
        for v in P.rows:
            assert d.H.apply(v) == tuple(x * (i + j) for x in v)
        # I^{i,j} maps isomorphically onto the (i,j) piece of gr_{i+j}
        comp, pi = graded_quotient_map(m.W, i + j)
        assert P.image(pi) == m.gr[i + j].pieces[(i, j)]
        assert P.image(pi).dim == P.dim


@pytest.mark.parametrize("seed", range(8))
def test_conjugate_splitting(seed):
    r = rng(100 + seed)
    m, _, _ = random_mhs(r, r.randint(2, 5))
    H = deligne_splitting(m).H
    Hb = deligne_splitting(conjugate_mhs(m)).H
    R = r_subspace(end_mhs(m))
    assert R.contains_vector((Hb - H).vec())
    assert (H == Hb) == is_split(m)


# ---------------------------------------------------------------- operations


@pytest.mark.parametrize("seed", range(5))
def test_functoriality_small(seed):
    r = rng(200 + seed)
    m1, _, _ = random_mhs(r, r.randint(1, 3))
    m2, _, _ = random_mhs(r, r.randint(1, 3))
    H1, H2 = deligne_splitting(m1).H, deligne_splitting(m2).H
    assert deligne_splitting(tensor_mhs(m1, m2)).H == tensor_splitting(H1, H2)
    assert deligne_splitting(dual_mhs(m1)).H == dual_splitting(H1)
    s, i1, i2, p1, p2 = direct_sum_mhs(m1, m2)
    Hs = deligne_splitting(s).H
    for f, src, tgt in ((i1, H1, Hs), (i2, H2, Hs), (p1, Hs, H1), (p2, Hs, H2)):
        assert f @ src == tgt @ f


def test_constructions():
    m = nonsplit_example()
    t0 = tate_twist(m, 0)
    assert (t0.W, t0.F, t0.Fbar) == (m.W, m.F, m.Fbar)
    t1 = mhs_construct("tate", m, 1)
    assert t1.weights() == [w - 2 for w in m.weights()]
    assert deligne_splitting(t1).H == deligne_splitting(m).H - Matrix.identity(2) * 2
    dd = mhs_construct("dual", mhs_construct("dual", m))
    assert (dd.W, dd.F, dd.Fbar) == (m.W, m.F, m.Fbar)
    pure = pure_mhs(sharp_structure(irreducible_model(2))[1])
    e = mhs_construct("end", pure)
    assert e.weights() == [0]
    with pytest.raises(ValueError):
        mhs_construct("cone", m)


def test_limiting_mhs_morphisms():
    pkg = limit_filtrations(twisted_datum(2, 1))
    m = pkg.mhs
    H = deligne_splitting(m).H
    N = pkg.N
    assert is_morphism(N, m, m, -1)
    assert H @ N == N @ H - N * 2


# ---------------------------------------------------------------- real splitting and complements


def test_real_splitting_examples():
    s = irreducible_model(2)
    hs = sharp_structure(s)[1]
    assert real_splitting(pure_mhs(hs), s.Q, 2).is_zero()
    # split self-dual: the limiting MHS of a model
    pkg = limit_filtrations(build_model_variation(s))
    m = pkg.mhs
    H = deligne_splitting(m).H
    assert real_splitting(m, s.Q, 2) == H - Matrix.identity(3) * 2
    # eps-twisted datum: postconditions are asserted inside
    d = twisted_datum(2, 1)
    mt = limiting_mhs(d)
    HR = real_splitting(mt, d.Q, d.weight)
    assert d.pairing.dagger(HR) == -HR
    assert not is_split(mt)


def test_real_splitting_rejects_incompatible_pairing():
    from hodge_limits.errors import HodgeError
    d = twisted_datum(2, 1)
    with pytest.raises(HodgeError):
        real_splitting(limiting_mhs(d), Matrix.identity(3), d.weight)


def test_complements_examples():
    R, comp = canonical_complements(pure_mhs(sharp_structure(irreducible_model(1))[1]))
    assert R.is_zero()
    m, P, types = random_mhs(rng(9), 4, twist=False, types=[(0, 0), (1, 0), (0, 1), (2, 1)])
    R, comp = canonical_complements(m)
    assert R.is_zero() and comp.is_zero()
    m = nonsplit_example()
    R, comp = canonical_complements(m)
    assert R == sub((0, 1))


def test_q_complement_for_model_end():
    s = model_family([(2, 0, 0), (0, 1, 1)])
    pkg = limit_filtrations(build_model_variation(s))
    e = end_mhs(pkg.mhs)
    R, q = canonical_complements(e)
    n = e.dim
    assert q.dim + e.F[0].dim == n
    assert (q & e.F[0]).is_zero()
