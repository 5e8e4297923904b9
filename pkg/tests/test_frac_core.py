import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import rel_err
from seqfrac.errors import FracDomainError, KernelBudgetError, SequenceLengthError
from seqfrac.frac_core import (
    FracOrderPair,
    KernelTable,
    SampledSequence,
    StepGrid,
    caputo_diff,
    caputo_diff_all,
    forward_diff,
    frac_sum,
    frac_sum_all,
    gen_binomial,
    h_factorial,
    h_sum,
    kernel_table,
    log_gamma_ratio,
    phi,
    phi_tilde,
    sum_weights,
)

orders_st = st.floats(min_value=0.05, max_value=1.0)
steps_st = st.sampled_from([0.1, 0.25, 0.5, 1.0, 2.0])


def seq(values, h=1.0, a=0.0):
    return SampledSequence.from_values(values, h, a)


# ---------------------------------------------------------------- h_factorial


def test_h_factorial_zero_order():
    assert h_factorial(3.7, 0.0, 0.5) == 1.0


def test_h_factorial_integer_case():
    assert h_factorial(2.0, 1.0, 1.0) == pytest.approx(2.0, rel=1e-15)


def test_h_factorial_denominator_pole_is_exact_zero():
    assert h_factorial(0.0, 2.0, 1.0) == 0.0


@given(
    m=st.integers(min_value=0, max_value=30),
    order=st.floats(min_value=0.0, max_value=10.0),
    h=steps_st,
)
def test_pole_convention(m, order, h):
    # choose t so that t/h + 1 - order = -m
    t = (order - 1.0 - m) * h
    if abs(t / h + 1.0 - round(t / h + 1.0)) < 1e-9 and round(t / h + 1.0) <= 0:
        with pytest.raises(FracDomainError):
            h_factorial(t, order, h)
    else:
        assert h_factorial(t, order, h) == 0.0


def test_h_factorial_numerator_pole_raises():
    with pytest.raises(FracDomainError):
        h_factorial(-2.0, 0.5, 1.0)


def test_h_factorial_rejects_bad_step():
    with pytest.raises(FracDomainError):
        h_factorial(1.0, 0.5, 0.0)


@given(x=st.floats(min_value=0.0, max_value=500.0), nu=st.floats(min_value=-3.0, max_value=6.0))
def test_h_factorial_matches_lgamma(x, nu):
    ref_log = math.lgamma(x + 1.0) - math.lgamma(x + 1.0 - nu) if x + 1.0 - nu > 0 else None
    if ref_log is None:
        return
    assert h_factorial(x, nu, 1.0) == pytest.approx(math.exp(ref_log), rel=1e-11)


def test_log_gamma_ratio_large_arguments():
    # Gamma(1e6 + 0.5) / Gamma(1e6) ~ sqrt(1e6) (1 - 1/(8e6))
    got = math.exp(log_gamma_ratio(1e6, 0.5))
    assert got == pytest.approx(1e3 * (1 - 1 / 8e6), rel=1e-13)


# ---------------------------------------------------------------- gen_binomial


@given(alpha=st.floats(min_value=-0.99, max_value=50.0))
def test_gen_binomial_zero_lower(alpha):
    assert gen_binomial(alpha, 0.0) == pytest.approx(1.0, rel=1e-13)


def test_gen_binomial_examples():
    assert gen_binomial(1.5, 1.0) == pytest.approx(1.5, rel=1e-14)
    assert gen_binomial(2.5, 2.0) == pytest.approx(1.875, rel=1e-14)


def test_gen_binomial_pole_zero():
    # binom(2, 3): Gamma(0) in the denominator
    assert gen_binomial(2.0, 3.0) == 0.0


def test_sum_weights_match_gen_binomial():
    w = sum_weights(0.37, 60)
    ref = [gen_binomial(j + 0.37 - 1.0, j) for j in range(60)]
    assert rel_err(w, ref) < 1e-13


# ---------------------------------------------------------------- sequences


def test_forward_diff_examples():
    assert np.all(forward_diff(seq([4.0] * 5)).values == 0)
    t = 0.5 * np.arange(8)
    assert np.allclose(forward_diff(seq(t, h=0.5)).values, 1.0, rtol=0, atol=1e-15)
    assert list(forward_diff(seq([1.0, 3.0, 7.0], h=2.0)).values) == [1.0, 2.0]


def test_forward_diff_too_short():
    with pytest.raises(SequenceLengthError):
        forward_diff(seq([1.0]))


def test_h_sum_examples():
    assert h_sum(seq([3.0, 4.0]), 0) == 0
    assert h_sum(seq(np.ones(6), h=0.5), 4) == 2.0
    assert h_sum(seq([2.0, -2.0]), 2) == 0


def test_frac_sum_constant_sequence():
    h, a = 0.5, 0.3
    x = seq(np.ones(40), h=h)
    for n in range(40):
        assert frac_sum(x, a, n) == pytest.approx(gen_binomial(n + a, n) * h**a, rel=1e-12)


def test_frac_sum_order_one_matches_h_sum(rng):
    v = rng.uniform(-1, 1, 30)
    x = seq(v, h=0.25)
    for n in range(30):
        assert frac_sum(x, 1.0, n) == pytest.approx(h_sum(x, n + 1), rel=1e-13, abs=1e-15)


def test_frac_sum_single_term():
    x = seq([3.0, 9.0], h=2.0)
    assert frac_sum(x, 0.4, 0) == pytest.approx(2.0**0.4 * 3.0, rel=1e-15)


def test_frac_sum_rejects_order_zero():
    with pytest.raises(FracDomainError):
        frac_sum(seq([1.0, 2.0]), 0.0, 1)


def test_frac_sum_all_matches_pointwise(rng):
    v = rng.uniform(-1, 1, (25, 3))
    x = seq(v, h=0.5)
    allv = frac_sum_all(v, 0.6, 0.5)
    for n in range(25):
        assert np.allclose(allv[n], frac_sum(x, 0.6, n), rtol=1e-13, atol=1e-15)


@given(order=orders_st, h=steps_st, n=st.integers(min_value=0, max_value=60))
def test_constant_power_rule(order, h, n):
    ones = np.ones(n + 1)
    got = frac_sum_all(ones, order, h)[n]
    assert got == pytest.approx(gen_binomial(n + order, n) * h**order, rel=1e-12)


def test_composition_of_sums(rng):
    h = 0.5
    for alpha in (0.3, 0.5, 0.7, 1.0):
        for beta in (0.3, 0.5, 0.7, 1.0):
            v = rng.uniform(-1, 1, 100)
            two = frac_sum_all(frac_sum_all(v, beta, h), alpha, h)
            one = frac_sum_all(v, alpha + beta, h)
            assert rel_err(two, one) < 1e-10


# ---------------------------------------------------------------- Caputo


def test_caputo_constant_is_zero():
    x = seq(np.full(12, 2.5), h=0.5)
    for n in range(10):
        assert caputo_diff(x, 0.4, n) == 0.0


def test_caputo_order_one_is_forward_difference(rng):
    v = rng.uniform(-1, 1, 10)
    x = seq(v, h=0.25)
    for n in range(9):
        assert caputo_diff(x, 1.0, n) == pytest.approx((v[n + 1] - v[n]) / 0.25)


def test_caputo_of_identity():
    h, alpha = 0.5, 0.3
    t = h * np.arange(30)
    x = seq(t, h=h)
    for n in range(28):
        ref = gen_binomial(n + 1 - alpha, n) * h ** (1 - alpha)
        assert caputo_diff(x, alpha, n) == pytest.approx(ref, rel=1e-12)


def test_caputo_inversion(rng):
    for alpha in (0.3, 0.5, 0.7, 1.0):
        for h in (0.5, 1.0, 2.0):
            v = rng.uniform(-1, 1, 101)
            back = frac_sum_all(caputo_diff_all(v, alpha, h), alpha, h)
            # index n - 1 of the sum is the point nh + a
            assert rel_err(back, v[1:] - v[0]) < 1e-10


def test_caputo_rejects_bad_order():
    with pytest.raises(FracDomainError):
        caputo_diff(seq([1.0, 2.0, 3.0]), 1.5, 0)


# ---------------------------------------------------------------- kernels


def test_phi_examples():
    o = FracOrderPair(0.5, 0.5)
    assert all(phi(0, 0, n, o, 0.7) == 1.0 for n in range(20))
    assert phi(2, 1, 1, o, 1.0) == 0.0
    assert phi(1, 0, 2, o, 0.25) == pytest.approx(0.75, rel=1e-14)


def test_phi_tilde_examples():
    o = FracOrderPair(0.3, 0.6)
    assert phi_tilde(1, 1, 0, o, 0.5) == pytest.approx(0.5**0.9, rel=1e-14)
    assert phi_tilde(1, 1, -1, o, 0.5) == 0.0
    assert phi_tilde(1, 1, 1, FracOrderPair(0.5, 0.5), 1.0) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(FracDomainError):
        phi_tilde(0, 0, 3, o, 1.0)


def test_kernel_table_example():
    t = kernel_table(FracOrderPair(0.5, 0.5), 1.0, 3, 10)
    assert t.phi(1, 1, 2) == pytest.approx(2.0, rel=1e-14)


def test_zero_branch_is_exact():
    o = FracOrderPair(0.37, 0.81)
    table = KernelTable(o, 0.5, 50, 60)
    for k in range(51):
        for n in range(k):
            assert phi(k, 3, n, o, 0.5) == 0.0
            assert table.phi(k, 3, n) == 0.0


@pytest.mark.parametrize("alpha,beta,h", [(0.3, 0.5, 0.5), (1.0, 0.7, 2.0), (0.9, 0.2, 0.1)])
def test_binomial_and_gamma_ratio_forms_agree(alpha, beta, h):
    o = FracOrderPair(alpha, beta)
    table = KernelTable(o, h, 10, 200)
    for k in range(11):
        for s in range(11):
            mu = o.mu(k, s)
            row = table.phi_row(k, s)
            ref = [
                h_factorial((n - k + mu) * h, mu, h) / math.gamma(mu + 1.0) if n >= k else 0.0
                for n in range(201)
            ]
            assert rel_err(row, ref) <= 1e-12, (k, s)


def test_kernel_semigroup():
    o = FracOrderPair(0.4, 0.7)
    h = 0.5
    table = KernelTable(o, h, 6, 100)
    pairs = [(k, s) for k in range(4) for s in range(4) if k + s >= 1]
    for k1, s1 in pairs:
        for k2, s2 in pairs:
            if o.mu(k1 + k2, s1 + s2) > 6:
                continue
            conv = np.convolve(table.phi_tilde_row(k1, s1), table.phi_tilde_row(k2, s2))[:101]
            ref = table.phi_tilde_row(k1 + k2, s1 + s2)
            assert rel_err(conv, ref) <= 1e-10


@given(alpha=orders_st, beta=orders_st, h=steps_st)
@settings(max_examples=30)
def test_kernels_nonnegative(alpha, beta, h):
    table = KernelTable(FracOrderPair(alpha, beta), h, 4, 10_000)
    assert np.all(table.phi_row(1, 0) >= 0)
    assert np.all(table.phi_tilde_row(1, 1) >= 0)
    assert np.all(table.phi_row(3, 2) >= 0)


def test_table_rows_are_read_only():
    table = KernelTable(FracOrderPair(0.5, 0.5), 1.0, 2, 5)
    row = table.phi_row(1, 1)
    with pytest.raises(ValueError):
        row[0] = 3.0
    assert table.phi_row(1, 1) is row


def test_table_budget():
    table = KernelTable(FracOrderPair(0.5, 0.5), 1.0, 5, 99, budget=250)
    table.phi_row(0, 1)
    table.phi_row(0, 2)
    with pytest.raises(KernelBudgetError):
        table.phi_row(0, 3)


def test_table_bounds():
    table = KernelTable(FracOrderPair(0.5, 0.5), 1.0, 2, 5)
    with pytest.raises(IndexError):
        table.phi_row(3, 0)


def test_order_pair_validation():
    with pytest.raises(ValueError):
        FracOrderPair(0.0, 0.5)
    with pytest.raises(ValueError):
        FracOrderPair(0.5, 1.2)
    assert FracOrderPair(0.5, 0.25).offsets(2.0) == (-1.0, -1.5)


def test_step_grid_times():
    g = StepGrid(0.5, -0.25, 3)
    assert list(g.times()) == [-0.25, 0.25, 0.75, 1.25]
    assert g.sigma(0.25) == 0.75
