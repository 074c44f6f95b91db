"""The rank measure, restrictions, the closed-form bound, and the
large-parameter ratio calculators."""

import math
from fractions import Fraction

import pytest

from helpers import fcircuit, bounded_support_poly, brute_phi, make_mon, random_poly
from fewvar.algebra import SparsePolynomial
from fewvar.circuit import FactorPoly, FewVarCircuit
from fewvar.measure import (
    DerivedMeasure,
    MeasureParams,
    appendix_ratios,
    approx_check,
    bad_support_monomials,
    depth4_upper_bound,
    derive_measure_params,
    lr1_closed_form,
    psd_dimension,
    rank_exact,
    rank_mod,
    sample_restriction,
    subadditivity_check,
    survival_experiment,
)
from fewvar.nw import NWParams
from fewvar.rng import named_rng


def ml(num_vars, *supports):
    return SparsePolynomial.from_terms(
        num_vars, [(1, [(v, 1) for v in supp]) for supp in supports])


# ---------------------------------------------------------------------------
# the measure itself

def test_phi_worked_example():
    # P = x0*x1 over 3 variables, derivatives {x0}, shift degree 1:
    # rows sigma(x_i * x1) for i in {0,1,2} span {x0*x1, x1*x2}
    P = ml(3, (0, 1))
    rep = psd_dimension(P, MeasureParams(r=1, m=1, monomials=(make_mon((0, 1)),)))
    assert rep.phi == 2
    assert rep.rows == 3
    assert rep.exact


def test_phi_zero_polynomial():
    rep = psd_dimension(SparsePolynomial.zero(3), MeasureParams(r=1, m=1))
    assert rep.phi == 0


def test_phi_disjoint_quadratics():
    P = ml(4, (0, 1), (2, 3))
    params = MeasureParams(r=1, m=0,
                           monomials=(make_mon((0, 1)), make_mon((2, 1))))
    assert psd_dimension(P, params).phi == 2


def test_phi_matches_brute_force_on_random_polys():
    rng = named_rng(23, "phi-brute")
    for _ in range(15):
        P = random_poly(rng, 5, max_terms=5, max_exp=2)
        for r, m in ((1, 1), (1, 2), (2, 1)):
            got = psd_dimension(P, MeasureParams(r=r, m=m)).phi
            assert got == brute_phi(P, r, m)


def test_phi_monotone_under_monomial_subsets():
    rng = named_rng(29, "phi-monotone")
    P = random_poly(rng, 5, max_terms=6, max_exp=2)
    from fewvar.algebra import multilinear_monomials
    all_mons = tuple(multilinear_monomials(5, 1))
    full = psd_dimension(P, MeasureParams(r=1, m=1, monomials=all_mons)).phi
    for i in range(len(all_mons)):
        part = psd_dimension(
            P, MeasureParams(r=1, m=1, monomials=all_mons[:i + 1])).phi
        assert part <= full


def test_phi_row_cap():
    P = ml(6, (0, 1))
    with pytest.raises(ValueError, match="cap"):
        psd_dimension(P, MeasureParams(r=1, m=2), row_cap=10)


def test_phi_rejects_prime_field_input():
    from fewvar.algebra import GFElem
    P = SparsePolynomial.from_terms(2, [(GFElem(1, 5), [(0, 1)])], 5)
    with pytest.raises(ValueError):
        psd_dimension(P, MeasureParams(r=0, m=0))


def test_rank_mod_lower_bounds_exact_rank():
    rng = named_rng(31, "rank-cross")
    for _ in range(10):
        P = random_poly(rng, 5, max_terms=6, max_exp=2)
        params = MeasureParams(r=1, m=1)
        exact = psd_dimension(P, params).phi
        modular = psd_dimension(
            P, MeasureParams(r=1, m=1, rank_prime=(1 << 61) - 1))
        assert not modular.exact
        assert modular.phi <= exact
        assert modular.phi == exact   # no collisions at this scale


def test_rank_helpers_agree():
    rows = [{0: Fraction(1), 1: Fraction(2)},
            {0: Fraction(2), 1: Fraction(4)},
            {2: Fraction(1)}]
    assert rank_exact(rows) == 2
    int_rows = [{0: 1, 1: 2}, {0: 2, 1: 4}, {2: 1}]
    assert rank_mod(int_rows, 97) == 2


def test_subadditivity_cancellation_and_random_pairs():
    P = ml(4, (0, 1))
    params = MeasureParams(r=1, m=1)
    assert subadditivity_check(P, P, Fraction(1), Fraction(-1), params)
    assert subadditivity_check(P, SparsePolynomial.zero(4), Fraction(1),
                               Fraction(1), params)
    rng = named_rng(37, "subadd")
    for _ in range(20):
        A = random_poly(rng, 5, max_terms=4, max_exp=2)
        B = random_poly(rng, 5, max_terms=4, max_exp=2)
        alpha = Fraction(int(rng.integers(-3, 4)))
        beta = Fraction(int(rng.integers(-3, 4)))
        assert subadditivity_check(A, B, alpha, beta, params)


# ---------------------------------------------------------------------------
# restrictions

def test_sample_restriction_extremes():
    assert sample_restriction(10, 1.0, 0).alive == frozenset(range(10))
    assert sample_restriction(10, 0.0, 0).alive == frozenset()


def test_sample_restriction_reproducible():
    a = sample_restriction(50, 0.3, 99)
    b = sample_restriction(50, 0.3, 99)
    assert a == b
    c = sample_restriction(50, 0.3, 100)
    assert a != c       # astronomically unlikely to collide


def test_sample_restriction_binomial_statistics():
    N, p, seeds = 10 ** 4, 0.5, 100
    sizes = [len(sample_restriction(N, p, s).alive) for s in range(seeds)]
    mean = sum(sizes) / seeds
    sigma = math.sqrt(N * p * (1 - p))        # 50 per draw
    assert abs(mean - N * p) <= 3 * sigma / math.sqrt(seeds)
    assert all(abs(x - N * p) <= 6 * sigma for x in sizes)


def test_bad_support_monomials_single_factor():
    C = fcircuit(3, 3, [(0, 1, 2)])
    rep = bad_support_monomials(C, 2)
    assert rep.count == 3
    assert rep.bound == 1 * 1 * 3
    assert rep.ok


def test_bad_support_monomials_oversized_s():
    C = fcircuit(3, 2, [(0, 1)])
    assert bad_support_monomials(C, 3).count == 0


def test_bad_support_bound_on_random_circuits():
    from fewvar.circuit import random_circuit
    rng = named_rng(41, "bad-support")
    for _ in range(20):
        C = random_circuit(rng, num_vars=8, max_terms=3, max_factors=3,
                           max_support=3, max_k=2)
        for s in (1, 2, 3):
            assert bad_support_monomials(C, s).ok


def test_survival_extremes():
    C = fcircuit(4, 2, [(0, 1)], [(2, 3)])
    dead = survival_experiment(C, 1, 0.0, 20, 5)
    assert dead.empirical_rate == 0.0
    alive = survival_experiment(C, 1, 1.0, 20, 5)
    assert alive.empirical_rate == 1.0
    assert alive.markov_bound == 1.0


def test_survival_against_exact_expectation():
    C = fcircuit(6, 2, [(0, 1), (2, 3)], [(4, 5)])
    rep = survival_experiment(C, 2, 0.4, 400, 13)
    # E[|B_V|] = |B| p^2 exactly; the Monte-Carlo mean sits within 3 sigma
    assert rep.expected_survivors == rep.bad_count * 0.4 ** 2
    assert abs(rep.mean_survivors - rep.expected_survivors) \
        <= 3 * rep.stderr_survivors + 1e-9
    assert rep.empirical_rate <= rep.markov_bound + 3 * rep.stderr_survivors


# ---------------------------------------------------------------------------
# the closed-form bound

def test_depth4_upper_bound_examples():
    assert depth4_upper_bound(2, 2, 1, 1, 4, 1) == 36
    assert depth4_upper_bound(7, 3, 0, 2, 10, 0) == 7
    with pytest.raises(ValueError, match="regime"):
        depth4_upper_bound(1, 2, 2, 3, 10, 0)


def test_depth4_bound_dominates_measured_phi():
    rng = named_rng(43, "depth4-dominate")
    for _ in range(10):
        N, c, n, s = 8, 2, 3, 2
        P, c, n = bounded_support_poly(rng, N, c, n, s)
        for r, m in ((1, 1), (1, 2)):
            assert m + r * s <= N // 2
            phi = psd_dimension(P, MeasureParams(r=r, m=m)).phi
            assert phi <= depth4_upper_bound(c, n, r, s, N, m)


# ---------------------------------------------------------------------------
# parameter derivation and ratios

def test_derive_measure_params_regime():
    for n in (4, 16, 100, 10 ** 4):
        d = derive_measure_params(0, n)
        assert d.r == d.s == int(math.sqrt(0.001) * math.sqrt(n))
        assert d.r * d.s / n <= 0.001 + 1e-12
        assert 2 * d.m <= d.nw.N
        # p * N^(mu+delta) = 1 in log space
        assert abs(d.log_p + float(0 + d.nw.delta) * math.log(d.nw.N)) < 1e-9


def test_derive_measure_params_epsilon_overrides():
    d = derive_measure_params(0, 100, eps1=0.1)
    assert d.eps2 == pytest.approx(0.01)
    assert d.r == 1 and d.s == 0


def test_ratios_positive_at_desk_scale():
    rep = appendix_ratios(10 ** 4, 0)
    assert rep.log_ratio_1 > 0
    assert rep.log_ratio_2 > 0
    assert not rep.exact     # N is astronomically large here


def fake_derived(N, n, r, s, m, p=0.5):
    nw = NWParams(mu=Fraction(0), n=n, delta=Fraction(1, 2), gamma=Fraction(4),
                  psi=max(n, 3), N=N, rho=1.0, D_raw=1.0, D=1)
    return DerivedMeasure(nw=nw, r=r, s=s, m=m, p=p, log_p=math.log(p),
                          eps1=0.0, eps2=0.0)


def test_ratios_degenerate_r0():
    # r = 0 and m + n <= N/2: ratio 1 is log(C(N, m+n) / C(N, m)) > 0
    d = fake_derived(N=100, n=10, r=0, s=3, m=20)
    rep = appendix_ratios(10, 0, derived=d)
    assert rep.exact
    want = math.log(math.comb(100, 30) / math.comb(100, 20))
    assert rep.log_ratio_1 == pytest.approx(want, rel=1e-12)
    assert rep.log_ratio_1 > 0


def test_ratios_exact_path_agrees_with_loggamma():
    import mpmath
    d = fake_derived(N=5000, n=40, r=2, s=3, m=700)
    rep = appendix_ratios(40, 0, derived=d)
    assert rep.exact
    with mpmath.workdps(60):
        lg = mpmath.loggamma
        lnC = lambda a, b: lg(a + 1) - lg(b + 1) - lg(a - b + 1)
        est = float(lnC(5000, 700 + 40 - 2) - lnC(5000, 700 + 6)
                    - lnC(42, 2))
    assert rep.log_ratio_1 == pytest.approx(est, rel=1e-6)


def test_ratios_out_of_regime():
    d = fake_derived(N=50, n=40, r=0, s=1, m=30)
    with pytest.raises(ValueError, match="regime"):
        appendix_ratios(40, 0, derived=d)


def test_lr1_closed_form_formula():
    n, r, s = 10 ** 6, 31, 31
    want = 31 * math.log(10 ** 6) * ((10 ** 6 - 31 - 961) / 10 ** 6 - 0.5)
    assert lr1_closed_form(n, r, s) == pytest.approx(want)


def test_approx_check_degenerate():
    exact, est, err = approx_check(100, 0, 0)
    assert exact == est == err == 0.0


def test_approx_check_error_bounds():
    for a, f, g in ((10 ** 4, 10, 10), (10 ** 6, 50, 50)):
        exact, est, err = approx_check(a, f, g)
        assert err <= 2 * (f + g) ** 2 / a


def test_approx_check_regime_violation():
    with pytest.raises(ValueError, match="regime"):
        approx_check(10, 8, 8)


def test_measure_params_validation():
    with pytest.raises(ValueError):
        MeasureParams(r=-1, m=0)
    with pytest.raises(ValueError):
        MeasureParams(r=1, m=0, monomials=(make_mon((0, 2)),))
