from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from padiclab import (
    ConvergenceError,
    InvalidInputError,
    PrimeContext,
    hensel_root,
    iwasawa_log,
    padic_exp,
    teichmuller,
)

settings.register_profile("lab", deadline=None, max_examples=25)
settings.load_profile("lab")


def test_context_rejects_bad_primes():
    with pytest.raises(InvalidInputError):
        PrimeContext(2, 20)
    with pytest.raises(InvalidInputError):
        PrimeContext(9, 20)
    with pytest.raises(InvalidInputError):
        PrimeContext(5, 3)


def test_scalar_roundtrip_and_repr():
    ctx = PrimeContext(5, 20)
    x = ctx.scalar(Fraction(7, 10))
    assert x.valuation == -1
    y = x * 10
    assert (y - 7).is_zero
    assert "5^" in repr(x)


def test_division_lowers_valuation_instead_of_erroring():
    ctx = PrimeContext(3, 20)
    x = ctx.scalar(2) / 3
    assert x.valuation == -1
    assert ((x * 3) - 2).is_zero


def test_teichmuller_identity_root():
    ctx = PrimeContext(5, 20)
    assert (teichmuller(1, ctx) - 1).is_zero


def test_teichmuller_frozen_value_p5():
    # oracle: iterate a -> a^p mod 25 to its fixed point; 2^5 = 32 = 7 mod 25
    ctx = PrimeContext(5, 20)
    w = teichmuller(2, ctx)
    assert w.lift() % 25 == 7
    assert ((w ** 4) - 1).is_zero


def test_teichmuller_minus_one_p3():
    ctx = PrimeContext(3, 20)
    w = teichmuller(2, ctx)
    assert (w + 1).is_zero


def test_teichmuller_rejects_multiples_of_p():
    ctx = PrimeContext(3, 20)
    with pytest.raises(InvalidInputError):
        teichmuller(6, ctx)


@given(a=st.integers(1, 10**6), b=st.integers(1, 10**6))
def test_teichmuller_multiplicative(a, b):
    ctx = PrimeContext(7, 16)
    if a % 7 == 0 or b % 7 == 0:
        return
    lhs = teichmuller(a, ctx) * teichmuller(b, ctx)
    rhs = teichmuller(a * b % 7, ctx)
    assert (lhs - rhs).is_zero


def test_log_of_one_and_p_are_zero():
    ctx = PrimeContext(3, 20)
    assert iwasawa_log(ctx.one()).is_zero
    assert iwasawa_log(ctx.scalar(3)).is_zero
    assert iwasawa_log(ctx.scalar(9)).is_zero


def test_log_frozen_value():
    # truncated series 3 - 9/2 + 9 mod 27, with 1/2 = 14 mod 27
    ctx = PrimeContext(3, 20)
    assert iwasawa_log(ctx.scalar(4)).lift() % 27 == 21


def test_log_kills_torsion():
    ctx = PrimeContext(5, 20)
    assert iwasawa_log(teichmuller(3, ctx)).is_zero


def test_log_rejects_zero():
    ctx = PrimeContext(5, 20)
    with pytest.raises(InvalidInputError):
        iwasawa_log(ctx.zero())


@given(u=st.integers(1, 10**9), v=st.integers(1, 10**9))
def test_log_additivity(u, v):
    ctx = PrimeContext(3, 16)
    if u % 3 == 0 or v % 3 == 0:
        return
    lhs = iwasawa_log(ctx.scalar(u * v))
    rhs = iwasawa_log(ctx.scalar(u)) + iwasawa_log(ctx.scalar(v))
    assert (lhs - rhs).min_valuation() >= ctx.prec


def test_exp_log_roundtrip():
    ctx = PrimeContext(3, 20)
    x = ctx.scalar(1 + 3 + 2 * 9)
    assert (padic_exp(iwasawa_log(x)) - x).min_valuation() >= ctx.prec


def test_exp_rejects_small_valuation():
    ctx = PrimeContext(3, 20)
    with pytest.raises(InvalidInputError):
        padic_exp(ctx.scalar(1))


def test_hensel_square_root_of_one():
    ctx = PrimeContext(5, 20)
    root = hensel_root(lambda x: x * x - 1, lambda x: x * 2, ctx.one())
    assert (root - 1).is_zero


def test_hensel_teichmuller_oracle():
    # same fixed point as the Teichmuller iteration
    ctx = PrimeContext(5, 20)
    root = hensel_root(
        lambda x: x ** 4 - 1, lambda x: (x ** 3) * 4, ctx.scalar(2)
    )
    assert root.lift() % 25 == 7


def test_hensel_reports_failed_criterion():
    ctx = PrimeContext(5, 20)
    with pytest.raises(ConvergenceError):
        hensel_root(lambda x: x * x - 5, lambda x: x * 2, ctx.scalar(1))


def test_precision_bookkeeping_truncation_consistency():
    # recomputing at higher precision and truncating reproduces the result
    for build in (
        lambda c: iwasawa_log(c.scalar(4)),
        lambda c: teichmuller(2, c),
        lambda c: c.scalar(Fraction(5, 7)) * c.scalar(11) + c.scalar(3) / 9,
    ):
        lo = build(PrimeContext(3, 12))
        hi = build(PrimeContext(3, 16))
        assert (lo - hi.reduce_absprec(lo.absprec)).min_valuation() >= min(
            lo.absprec, 12
        )


def test_arithmetic_never_overclaims():
    ctx = PrimeContext(3, 8)
    a = ctx.scalar(1, 10)
    b = ctx.scalar(1, 5)
    assert (a + b).absprec == 5
    assert (a * b).absprec <= 5
    # cancellation detected: result is an honest zero at precision
    d = a - ctx.scalar(1, 10)
    assert d.is_zero and d.absprec == 10
