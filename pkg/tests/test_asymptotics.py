from fractions import Fraction
from math import comb, factorial

import numpy as np
import pytest

from hodge_limits.asymptotics import (
    DEFAULT_Y_VALUES, cheap_sl2_series, commutator_inequalities_hold, commutator_inequality_check, equality_matrix,
    growth_exponent, higgs_norm_check, leading_norm, limit_filtrations, metric_at, monodromy_matrix,
    nilpotent_orbit_scan, rescaled_decay_check, semisimple_limit, sl2_orbit_identity_error, span_distance,
    twisted_datum,
)
from hodge_limits.errors import InvalidLimitDatum, PreconditionFails
from hodge_limits.exact import Filtration, GQ, Matrix, Subspace, integer_spectrum, nilpotent_exp
from hodge_limits.monodromy import datum_from_matrices
from hodge_limits.sl2hodge import build_model_variation, irreducible_model, model_family

from helpers import columns, rand_invertible, rng, semisimple_limit_oracle


def model(m):
    return build_model_variation(irreducible_model(m))


# ---------------------------------------------------------------- semisimple limits


def test_semisimple_limit_examples():
    F = Filtration(2, {1: Subspace([(1, 1)], 2)})
    assert semisimple_limit([(0, Subspace.full(2))], F) == F
    spec = [(0, Subspace([(1, 0)], 2)), (1, Subspace([(0, 1)], 2))]
    assert semisimple_limit(spec, F, "+")[1] == Subspace([(0, 1)], 2)
    assert semisimple_limit(spec, F, "-")[1] == Subspace([(1, 0)], 2)
    with pytest.raises(ValueError):
        semisimple_limit(spec, F, "*")


@pytest.mark.parametrize("seed", range(8))
def test_semisimple_limit_against_high_precision(seed):
    r = rng(seed)
    n = r.randint(3, 5)
    P = rand_invertible(r, n, gaussian=True)
    cols = [tuple(P.column(j)) for j in range(n)]
    alphas = [r.randint(0, 2) for _ in range(n)]
    eigen = {}
    for a, v in zip(alphas, cols):
        eigen.setdefault(a, []).append(v)
    spectrum = [(a, Subspace(vs, n)) for a, vs in eigen.items()]
    B = rand_invertible(r, n, gaussian=True)
    d1, d2 = sorted(r.sample(range(1, n), 2)) if n > 2 else (1, 1)
    F = Filtration(n, {1: Subspace([tuple(B.column(i)) for i in range(d2)], n),
                       2: Subspace([tuple(B.column(i)) for i in range(d1)], n)})
    for sign in ("+", "-"):
        lim = semisimple_limit(spectrum, F, sign)
        scale = 1 if sign == "+" else -1
        oracle_eigen = [(Fraction(a * scale), vs) for a, vs in eigen.items()]
        for p in (1, 2):
            num = semisimple_limit_oracle(oracle_eigen, F[p])
            assert span_distance(columns(lim[p]), num) < 1e-10
        assert semisimple_limit(spectrum, lim, sign) == lim


# ---------------------------------------------------------------- limit filtrations


@pytest.mark.parametrize("summands", [[(1, 0, 0)], [(2, 0, 0)], [(2, 0, 0), (0, 1, 1)], [(3, 0, 0), (1, 1, 1)]])
def test_limits_of_model_variations(summands):
    s = model_family(summands)
    pkg = limit_filtrations(build_model_variation(s))
    assert pkg.F_lim == s.F_total and pkg.F_H == s.F_total
    assert pkg.F_sharp == s.F_total.apply(nilpotent_exp(s.triple.Y))
    assert all(pkg.checks.values())


def test_pure_case_limits():
    Q = Matrix([[0, 1], [1, 0]])
    F = Filtration(2, {1: Subspace([(1, 1)], 2)})
    pkg = limit_filtrations(datum_from_matrices(Q, Matrix.zeros(2), 1, F))
    assert pkg.F_H == F and pkg.F_sharp == F
    series = cheap_sl2_series(pkg)
    assert not (series.h_coeffs or series.B_coeffs or series.C_coeffs)


def test_pure_case_needs_a_polarized_filtration():
    Q = Matrix([[0, 1], [1, 0]])
    F = Filtration(2, {1: Subspace([(1, -1)], 2)})
    with pytest.raises(InvalidLimitDatum):
        limit_filtrations(datum_from_matrices(Q, Matrix.zeros(2), 1, F))


@pytest.mark.parametrize("eps", [1, Fraction(1, 2), GQ(0, 1)])
def test_twisted_datum_recovers_total_filtration(eps):
    d = twisted_datum(2, eps)
    pkg = limit_filtrations(d)
    assert pkg.F_H == irreducible_model(2).F_total
    series = cheap_sl2_series(pkg)
    assert set(series.h_coeffs) == {2}
    h2 = series.h_coeffs[2]
    assert h2 == d.N * GQ.of(eps)
    # h_{-2} commutes with N and lowers H-weight by 2
    assert h2 @ d.N == d.N @ h2
    assert pkg.H @ h2 - h2 @ pkg.H == h2 * -2


# ---------------------------------------------------------------- SL(2) series


def test_split_case_series_is_empty():
    pkg = cheap_sl2_series(limit_filtrations(model(2)))
    assert not (pkg.h_coeffs or pkg.B_coeffs or pkg.C_coeffs)
    assert sl2_orbit_identity_error(pkg, 0.1) < 1e-12


def test_twisted_series_relations():
    pkg = cheap_sl2_series(limit_filtrations(twisted_datum(2, 1)))
    zero = Matrix.zeros(3)
    assert pkg.B_coeffs.get(1, zero) == pkg.h_coeffs.get(1, zero) + pkg.C_coeffs.get(1, zero)
    assert 2 in pkg.B_coeffs
    assert pkg.checks["series-identity"] and pkg.checks["isotypical-membership"]
    with pytest.raises(ValueError):
        cheap_sl2_series(pkg, order=0)


def test_orbit_identity_numerically():
    pkg = cheap_sl2_series(limit_filtrations(twisted_datum(2, 1)))
    for u in (0.1, 0.05, 0.01):
        assert sl2_orbit_identity_error(pkg, u) < 1e-8


# ---------------------------------------------------------------- Hodge metric


def test_metric_closed_form_on_s1():
    mv = model(1)
    assert np.allclose(metric_at(mv, -1), np.eye(2), atol=1e-12)
    for z in (-3 + 2j, -0.5 - 1j, -100 + np.pi * 1j, -1e4 + 1j):
        x, y = abs(z.real), z.imag
        ref = np.array([[x + y * y / x, -1j * y / x], [1j * y / x, 1 / x]])
        assert np.abs(metric_at(mv, z) - ref).max() <= 1e-12 * max(1.0, x)
    with pytest.raises(ValueError):
        metric_at(mv, 1 + 1j)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_metric_matches_leading_norm(m):
    mv = model(m)
    H = irreducible_model(m).triple.H
    for ell, E in integer_spectrum(H).items():
        v = np.array([complex(a) for a in E.rows[0]])
        for x, y in ((-2.0, 0.5), (-30.0, 3.0)):
            G = metric_at(mv, complex(x, y))
            direct = float(np.real(np.conj(v) @ G @ v))
            assert direct == pytest.approx(leading_norm(mv, v, ell, x, y), rel=1e-10)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_gram_is_positive_and_monodromy_equivariant(m):
    mv = model(m)
    T = monodromy_matrix(mv)
    Ti = np.linalg.inv(T)
    for z in (-2 + 0.3j, -0.7 - 1.5j):
        G = metric_at(mv, z)
        assert np.allclose(G, G.conj().T) and np.linalg.eigvalsh(G).min() > 0
        G2 = metric_at(mv, z + 2j * np.pi)
        assert np.abs(G2 - Ti.conj().T @ G @ Ti).max() <= 1e-9 * np.abs(G2).max()


def test_growth_examples():
    s1 = model(1)
    assert growth_exponent(s1, [1, 0]).slope == pytest.approx(1, abs=0.01)
    assert growth_exponent(s1, [0, 1]).slope == pytest.approx(-1, abs=0.01)
    s2 = model(2)
    for y in DEFAULT_Y_VALUES:
        assert growth_exponent(s2, [1, 0, 1], y=y).slope == pytest.approx(2, abs=0.05)
    with pytest.raises(ValueError):
        growth_exponent(s1, [0, 0])
    with pytest.raises(ValueError):
        growth_exponent(s1, [1, 0], x_grid=[10, 100])


def test_higgs_equality():
    for m in range(6):
        x = 7.0
        value, bound, gap = higgs_norm_check(model(m), complex(-x, 1))
        assert value * x * x == pytest.approx(comb(m + 2, 3) / 4, rel=1e-10, abs=1e-12)
        assert gap == pytest.approx(0, abs=1e-10 * max(bound, 1))
    # trivial representation: theta = 0
    v, b, g = higgs_norm_check(build_model_variation(model_family([(0, 0, 0), (0, 0, 0)])), -2)
    assert v == 0 and g == b
    with pytest.raises(ValueError):
        higgs_norm_check(model(1), 1)


# ---------------------------------------------------------------- orbit scan and decay


def test_orbit_scan_examples():
    Q = Matrix([[0, 1], [1, 0]])
    F = Filtration(2, {1: Subspace([(1, 1)], 2)})
    table = nilpotent_orbit_scan(F, Matrix.zeros(2), Q, 1, [-100, -1, -0.5], [0, 1])
    assert {v for _, _, v, _ in table} == {"In-D"}
    s = irreducible_model(1)
    table = nilpotent_orbit_scan(s.F_total, -s.triple.Y, s.Q, 1, [-1000, -10, -1, -0.1], [0, 1, 2.5])
    assert all(v == "In-D" for _, _, v, _ in table)
    assert len(table) == 12


def test_decay_examples():
    pkg = cheap_sl2_series(limit_filtrations(model(2)))
    e = np.eye(3)
    same = rescaled_decay_check(pkg, e[1], e[1])
    assert abs(same.slope) < 1e-6
    assert rescaled_decay_check(pkg, e[0], e[2]).identically_zero
    tw = cheap_sl2_series(limit_filtrations(twisted_datum(2, 1)))
    fit = rescaled_decay_check(tw, e[0], e[1])
    assert fit.slope >= 2 - 0.1
    with pytest.raises(ValueError):
        rescaled_decay_check(tw, e[0], e[1], u_grid=[0.01, 0.02])


# ---------------------------------------------------------------- commutator inequalities


def test_commutator_examples():
    assert commutator_inequality_check(np.zeros((3, 3))) == (0.0, 0.0, 0.0)
    for r in range(2, 9):
        _, mid, rhs = commutator_inequality_check(equality_matrix(r))
        assert mid == pytest.approx(rhs, rel=1e-10)
    g = np.random.default_rng(5)
    A = np.triu(g.standard_normal((5, 5)), 1)
    assert commutator_inequalities_hold(commutator_inequality_check(A))
    with pytest.raises(PreconditionFails):
        commutator_inequality_check(np.eye(2))
