import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cdgwalk import (
    DistVector,
    ModulusSpec,
    StepDistribution,
    b0_equivalence_triple,
    case1_upper_bound,
    dft_coefficient,
    distribution_at,
    evolve_step,
    hat_p_n,
    mixing_time,
    tv_curve,
    tv_to_uniform,
    validate_step,
)
from cdgwalk.exact import BudgetExceededError, b0_processes, dft_all, evolve_offsets
from cdgwalk.model import CDGError

from oracles import enumerate_law, linear_scan_mixing, synthesize_from_hat

THIRD = validate_step(1 / 3, 1 / 3, 1 / 3)
PM = validate_step(0.5, 0.0, 0.5)


def test_evolve_step_examples():
    P = evolve_step(DistVector.point_mass(ModulusSpec(3)), PM)
    np.testing.assert_allclose(P.mass, [0, 0.5, 0.5], atol=1e-16)
    P = evolve_step(DistVector.point_mass(ModulusSpec(5)), THIRD)
    np.testing.assert_allclose(P.mass, [1 / 3, 1 / 3, 0, 0, 1 / 3], atol=1e-16)
    P = evolve_step(evolve_step(DistVector.point_mass(ModulusSpec(7)), THIRD), THIRD)
    # 2 b0 + b1 over the 9 sequences: -3..3 with 0 once and +-1 twice
    want = np.array([1, 2, 1, 1, 1, 1, 2]) / 9
    np.testing.assert_allclose(P.mass, want, atol=1e-15)
    np.testing.assert_allclose(P.mass, enumerate_law(THIRD, 7, 2), atol=1e-15)


def test_distribution_at_examples():
    m7 = ModulusSpec(7)
    assert distribution_at(THIRD, m7, 0).mass.tolist() == [1, 0, 0, 0, 0, 0, 0]
    # 4 b0 + 2 b1 + b2 with signs: 0 twice (+-7), 1..6 once each
    np.testing.assert_allclose(distribution_at(PM, m7, 3).mass, [2 / 8] + [1 / 8] * 6, atol=1e-16)
    np.testing.assert_allclose(
        distribution_at(validate_step(0.25, 0.5, 0.25), ModulusSpec(3), 1).mass, [0.5, 0.25, 0.25], atol=1e-16
    )


@pytest.mark.parametrize("p", [3, 5, 7, 15, 31])
@pytest.mark.parametrize("abc", [(1 / 3, 1 / 3, 1 / 3), (0.2, 0.5, 0.3), (0.6, 0.0, 0.4), (0.05, 0.15, 0.8)])
def test_matches_enumeration(p, abc):
    step = validate_step(*abc)
    for n in (1, 4, 9):
        np.testing.assert_allclose(distribution_at(step, ModulusSpec(p), n).mass,
                                   enumerate_law(step, p, n), atol=1e-10)


def test_budget():
    m = ModulusSpec.mersenne(10)
    with pytest.raises(BudgetExceededError, match="Monte Carlo"):
        distribution_at(THIRD, m, 100, budget=1000)
    with pytest.raises(BudgetExceededError):
        tv_curve(THIRD, m, 100, budget=1000)
    distribution_at(THIRD, m, 100, budget=1023 * 100)


def test_budget_env(monkeypatch):
    monkeypatch.setenv("CDG_BUDGET", "500")
    with pytest.raises(BudgetExceededError):
        distribution_at(THIRD, ModulusSpec(31), 20)


def test_tv_curve_examples():
    c = tv_curve(THIRD, ModulusSpec(7), 0)
    assert c.points == ((0, pytest.approx(6 / 7)),)
    c = tv_curve(THIRD, ModulusSpec(31), 50, stride=25)
    assert c.n == [0, 25, 50]
    assert c.tv[2] <= c.tv[1]


def test_tv_curve_against_dft_synthesis():
    m = ModulusSpec(31)
    P = distribution_at(THIRD, m, 25)
    hat = np.array([hat_p_n(THIRD, m, 25, k) for k in range(31)])
    law = synthesize_from_hat(hat, 31)
    want = 0.5 * np.abs(law - 1 / 31).sum()
    assert tv_curve(THIRD, m, 25, stride=25).tv[-1] == pytest.approx(want, abs=1e-10)
    assert tv_to_uniform(P) == pytest.approx(want, abs=1e-10)


@given(st.integers(1, 511).map(lambda k: 2 * k + 1),
       st.tuples(st.floats(0.01, 1), st.floats(0, 1), st.floats(0.01, 1)))
@settings(max_examples=40, deadline=None)
def test_monotone_and_mass_conserving(p, w):
    s = sum(w)
    step = validate_step(w[0] / s, w[1] / s, 1 - w[0] / s - w[1] / s)
    c = tv_curve(step, ModulusSpec(p), 60)
    tv = np.array(c.tv)
    assert np.all(np.diff(tv) <= 1e-12)
    assert abs(distribution_at(step, ModulusSpec(p), 60).total() - 1) <= 1e-9


def test_mixing_time_examples():
    m5 = ModulusSpec(5)
    rep = mixing_time(THIRD, m5, 1 - 1 / 5)
    assert rep.n_star == 0
    rep = mixing_time(PM, m5, 0.25)
    n_lin, tv_lin = linear_scan_mixing(PM, 5, 0.25)
    assert (rep.n_star, rep.tv_at_n_star) == (n_lin, pytest.approx(tv_lin, abs=1e-15))
    m31 = ModulusSpec.mersenne(5)
    assert mixing_time(THIRD, m31, 0.1).n_star >= mixing_time(PM, m31, 0.1).n_star


@pytest.mark.parametrize("p", [7, 31, 101, 127, 1023])
@pytest.mark.parametrize("abc", [(1 / 3, 1 / 3, 1 / 3), (0.25, 0.5, 0.25), (0.1, 0.8, 0.1), (0.7, 0.0, 0.3)])
@pytest.mark.parametrize("eps", [0.5, 0.25, 0.01])
def test_mixing_time_matches_linear_scan(p, abc, eps):
    step = validate_step(*abc)
    rep = mixing_time(step, ModulusSpec(p), eps)
    n_lin, tv_lin = linear_scan_mixing(step, p, eps)
    assert rep.n_star == n_lin
    assert rep.tv_at_n_star == pytest.approx(tv_lin, abs=1e-12)
    assert rep.tv_at_n_star <= eps


def test_mixing_time_unresolved():
    rep = mixing_time(validate_step(0.01, 0.98, 0.01), ModulusSpec(1023), 0.01, budget=1023 * 40)
    assert not rep.resolved and rep.n_star is None
    assert rep.largest_n <= 40 and rep.largest_tv > 0.01
    with pytest.raises(CDGError):
        mixing_time(THIRD, ModulusSpec(7), 1.0)


def test_case1_bound_examples():
    tight, weak = case1_upper_bound(ModulusSpec(7), 3)
    assert tight == 0.75 and weak == 7 / 8
    tight, weak = case1_upper_bound(ModulusSpec(7), 30)
    assert tight <= 7 / 2**30 and weak == 7 / 2**30
    m = ModulusSpec(31)
    assert tv_to_uniform(distribution_at(validate_step(0.25, 0.5, 0.25), m, 10)) <= case1_upper_bound(m, 10)[0]
    assert case1_upper_bound(ModulusSpec(31), 5000)[0] == 0.0 or case1_upper_bound(ModulusSpec(31), 5000)[0] < 1e-300


@pytest.mark.parametrize("p", [7, 31, 127, 255])
@pytest.mark.parametrize("ac", [(0.25, 0.25), (0.1, 0.4), (0.5, 0.0), (0.0, 0.5)])
def test_case1_inequality(p, ac):
    step = validate_step(ac[0], 0.5, ac[1])
    m = ModulusSpec(p)
    for n, tv in tv_curve(step, m, 40).points:
        assert tv <= case1_upper_bound(m, n)[0] + 1e-12


def test_b0_triple_examples():
    assert b0_equivalence_triple(0.3, ModulusSpec(7), 0) == pytest.approx((6 / 7,) * 3)
    x, y, z = b0_equivalence_triple(1 / 3, ModulusSpec(7), 5)
    assert abs(x - y) <= 1e-10 and abs(y - z) <= 1e-10
    bound = case1_upper_bound(ModulusSpec(31), 20)[0]
    assert max(b0_equivalence_triple(0.5, ModulusSpec(31), 20)) <= bound + 1e-12


@pytest.mark.parametrize("a", [0.1, 1 / 3, 0.5, 0.9])
@pytest.mark.parametrize("p", [7, 31, 127])
def test_b0_couplings(a, p):
    m = ModulusSpec(p)
    for n in (1, 3, 8):
        P, Q, R = b0_processes(a, m, n)
        # Y_n = 2 Z_n
        pushed = np.zeros(p)
        np.add.at(pushed, (2 * np.arange(p)) % p, R.mass)
        np.testing.assert_allclose(Q.mass, pushed, atol=1e-14)
        # X_n = Y_n - (2^n - 1)
        shift = (2**n - 1) % p
        np.testing.assert_allclose(P.mass, np.roll(Q.mass, -shift), atol=1e-14)
        np.testing.assert_allclose(Q.mass, enumerate_law(None, p, n, {2: a, 0: 1 - a}), atol=1e-12)


def test_evolve_offsets_matches_three_point_kernel():
    rng = np.random.default_rng(3)
    x = rng.random(127)
    x /= x.sum()
    got = evolve_offsets(x, {1: 0.2, 0: 0.5, -1: 0.3}, 4)
    step = validate_step(0.2, 0.5, 0.3)
    P = DistVector(ModulusSpec(127), x)
    for _ in range(4):
        P = evolve_step(P, step)
    np.testing.assert_allclose(got, P.mass, atol=1e-15)


def test_dft_coefficient_examples():
    m = ModulusSpec(31)
    P = distribution_at(THIRD, m, 6)
    assert dft_coefficient(P, 0) == pytest.approx(1 + 0j, abs=1e-15)
    U = DistVector.uniform(m)
    for k in range(1, 31):
        assert abs(dft_coefficient(U, k)) <= 1e-12
    P1 = distribution_at(PM, m, 1)
    for k in range(31):
        assert dft_coefficient(P1, k) == pytest.approx(np.cos(2 * np.pi * k / 31), abs=1e-15)
    with pytest.raises(CDGError):
        dft_coefficient(P, 31)
    np.testing.assert_allclose(dft_all(P), [dft_coefficient(P, k) for k in range(31)], atol=1e-13)
