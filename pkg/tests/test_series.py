from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, strategies as st

from padiclab import (
    InvalidInputError,
    PrimeContext,
    TruncatedSeries,
    binomial_power,
    frobenius_substitute,
    log_one_plus_x,
    teichmuller,
)


def series_residual(a, b):
    return min((x - y).min_valuation() for x, y in zip(a.coeffs, b.coeffs))


def test_binomial_power_one():
    ctx = PrimeContext(5, 16)
    f = binomial_power(ctx.one(), 6)
    assert (f.coeff(0) - 1).is_zero
    assert (f.coeff(1) - 1).is_zero
    assert all(f.coeff(i).is_zero for i in range(2, 7))


def test_binomial_power_minus_one_is_geometric():
    ctx = PrimeContext(5, 16)
    f = binomial_power(ctx.scalar(-1), 8)
    for m in range(9):
        assert (f.coeff(m) - (-1) ** m).is_zero


def test_binomial_power_integer_matches_comb():
    ctx = PrimeContext(3, 16)
    f = binomial_power(ctx.scalar(7), 9)
    for m in range(10):
        assert (f.coeff(m) - comb(7, m)).is_zero


def test_binomial_power_teichmuller_linear_coeff():
    ctx = PrimeContext(5, 16)
    f = binomial_power(teichmuller(2, ctx), 4)
    assert f.coeff(1).lift() % 25 == 7


def test_binomial_power_rejects_negative_valuation():
    ctx = PrimeContext(5, 16)
    with pytest.raises(InvalidInputError):
        binomial_power(ctx.scalar(Fraction(1, 5)), 4)


@given(a=st.integers(-40, 40), b=st.integers(-40, 40))
def test_binomial_power_additive(a, b):
    ctx = PrimeContext(3, 12)
    order = 8
    lhs = binomial_power(ctx.scalar(a + b), order)
    rhs = binomial_power(ctx.scalar(a), order) * binomial_power(ctx.scalar(b), order)
    assert series_residual(lhs, rhs.truncate(order)) >= ctx.prec


def test_frobenius_on_x():
    ctx = PrimeContext(3, 16)
    f = frobenius_substitute(TruncatedSeries.x(ctx, 6))
    expected = TruncatedSeries.from_rationals(ctx, [0, 3, 3, 1, 0, 0, 0])
    assert series_residual(f, expected) >= ctx.prec


def test_frobenius_on_log_is_multiplication_by_p():
    ctx = PrimeContext(3, 16)
    f = log_one_plus_x(ctx, 24)
    assert series_residual(frobenius_substitute(f), f.scale(3)) >= ctx.prec


def test_frobenius_on_constant():
    ctx = PrimeContext(3, 16)
    one = TruncatedSeries.one(ctx, 5)
    assert series_residual(frobenius_substitute(one), one) >= ctx.prec


def test_frobenius_is_ring_homomorphism():
    ctx = PrimeContext(5, 14)
    f = TruncatedSeries.from_rationals(ctx, [1, 2, 0, 3, 1, 0, 0, 2, 1])
    g = TruncatedSeries.from_rationals(ctx, [0, 1, 5, 0, 2, 1, 3, 0, 1])
    lhs = frobenius_substitute(f * g)
    rhs = frobenius_substitute(f) * frobenius_substitute(g)
    assert series_residual(lhs, rhs) >= ctx.prec


def test_series_log_exp_roundtrip():
    ctx = PrimeContext(3, 16)
    one_plus_x = TruncatedSeries.from_rationals(ctx, [1, 1] + [0] * 14)
    assert series_residual(one_plus_x.log().exp(), one_plus_x) >= ctx.prec - 2


def test_log_series_quadratic_coefficient():
    ctx = PrimeContext(3, 16)
    f = log_one_plus_x(ctx, 8)
    assert (f.coeff(2) + ctx.scalar(Fraction(1, 2))).is_zero


def test_compose_with_identity():
    ctx = PrimeContext(3, 16)
    f = TruncatedSeries.from_rationals(ctx, [2, 1, 4, 0, 1])
    assert series_residual(f.compose(TruncatedSeries.x(ctx, 4)), f) >= ctx.prec


def test_compose_polynomial_example():
    ctx = PrimeContext(3, 16)
    f = TruncatedSeries.from_rationals(ctx, [0, 0, 1, 0, 0])  # X^2
    g = TruncatedSeries.from_rationals(ctx, [0, 1, 1, 0, 0])  # X + X^2
    expected = TruncatedSeries.from_rationals(ctx, [0, 0, 1, 2, 1])
    assert series_residual(f.compose(g), expected) >= ctx.prec


def test_compose_requires_zero_constant():
    ctx = PrimeContext(3, 16)
    f = TruncatedSeries.x(ctx, 4)
    with pytest.raises(InvalidInputError):
        f.compose(TruncatedSeries.one(ctx, 4))


def test_reversion_roundtrip():
    ctx = PrimeContext(5, 16)
    f = TruncatedSeries.from_rationals(ctx, [0, 1, 3, 1, 0, 2, 0, 0, 1, 0, 0, 4, 1])
    g = f.reversion()
    assert series_residual(
        f.compose(g), TruncatedSeries.x(ctx, f.order)
    ) >= ctx.prec - 2


def test_ring_axioms_sampled():
    ctx = PrimeContext(3, 14)
    f = TruncatedSeries.from_rationals(ctx, [1, 4, 2, 0, 5])
    g = TruncatedSeries.from_rationals(ctx, [2, 1, 0, 3, 1])
    h = TruncatedSeries.from_rationals(ctx, [0, 2, 2, 1, 0])
    assert series_residual(f * (g + h), f * g + f * h) >= ctx.prec
    assert series_residual((f * g) * h, f * (g * h)) >= ctx.prec
    assert series_residual(f * g, g * f) >= ctx.prec


def test_eval_scalar_needs_positive_valuation():
    ctx = PrimeContext(3, 16)
    f = log_one_plus_x(ctx, 12)
    with pytest.raises(InvalidInputError):
        f.eval_scalar(ctx.one())
