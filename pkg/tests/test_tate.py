from fractions import Fraction

import pytest

from padiclab import (
    InvalidInputError,
    PrimeContext,
    TateParameter,
    a_invariants,
    a_series_coefficients,
    iwasawa_log,
    mtt_report,
    sk_coefficients,
    sk_value,
    uniformize_point,
    verify_formal_iso,
    weierstrass_residual,
)
from padiclab.series import TruncatedSeries
from padiclab.tate import formal_log_weierstrass, multiplicative_parameter_series


def test_divisor_sum_series():
    assert sk_coefficients(1, 5) == [0, 1, 3, 4, 7, 6]
    assert sk_coefficients(3, 2)[2] == 9  # 1 + 2^3
    assert sk_coefficients(5, 1) == [0, 1]


def test_a_series_leading_coefficients():
    a4s, a6s = a_series_coefficients(30)
    assert a4s[1] == -5
    assert a6s[1] == -1  # -(5 + 7)/12
    assert a4s[0] == 0 and a6s[0] == 0


def test_a_series_twelve_divides_exactly():
    # integrality of -(5 s_3 + 7 s_5)/12 in every degree
    a4s, a6s = a_series_coefficients(60)
    assert all(isinstance(c, int) for c in a6s)


def test_a_invariants_integral_on_grid(ctx3):
    from padiclab.tate import default_grid

    qs, _ = default_grid(ctx3)
    for q in qs:
        a4, a6 = a_invariants(q.value())
        assert a4.min_valuation() >= 1
        assert a6.min_valuation() >= 1


def test_uniformization_exact_rational_at_q_zero():
    # q = 0: X = u/(1-u)^2, Y = u^2/(1-u)^3 on y^2 + xy = x^3, exactly
    u = Fraction(2)
    X = u / (1 - u) ** 2
    Y = u * u / (1 - u) ** 3
    assert Y * Y + X * Y - X**3 == 0


def test_uniformization_residual(ctx5):
    q = TateParameter.make(ctx5, 1, 1)  # q = 5
    u = ctx5.scalar(2)
    X, Y, resid = uniformize_point(u, q)
    assert resid.min_valuation() >= ctx5.prec


def test_uniformization_oracle_doubled_precision():
    # independent resummation at doubled precision reproduces the values
    lo = PrimeContext(5, 12)
    hi = PrimeContext(5, 24)
    Xl, Yl, _ = uniformize_point(lo.scalar(2), TateParameter.make(lo, 1, 1))
    Xh, Yh, _ = uniformize_point(hi.scalar(2), TateParameter.make(hi, 1, 1))
    assert (Xl - Xh.reduce_absprec(Xl.absprec)).min_valuation() >= lo.prec
    assert (Yl - Yh.reduce_absprec(Yl.absprec)).min_valuation() >= lo.prec


def test_uniformization_inversion_symmetry(ctx3):
    q = TateParameter.make(ctx3, 1, 4)
    u = ctx3.scalar(2)
    X1, Y1, _ = uniformize_point(u, q)
    X2, Y2, _ = uniformize_point(u.inverse(), q)
    assert (X1 - X2).min_valuation() >= ctx3.prec


def test_uniformization_point_at_infinity(ctx3):
    q = TateParameter.make(ctx3, 1, 4)
    with pytest.raises(InvalidInputError):
        uniformize_point(ctx3.one(), q)


def test_uniformization_rejects_nonunits(ctx3):
    q = TateParameter.make(ctx3, 1, 4)
    with pytest.raises(InvalidInputError):
        uniformize_point(ctx3.scalar(3), q)


def test_stated_a4_coefficient_contradicts_uniformization(ctx3):
    # with a4 = -s_3 (q-coefficient -1) the Weierstrass identity fails at
    # valuation ~1; the uniformization forces the q-coefficient -5
    q = TateParameter.make(ctx3, 1, 4)
    _, a6 = a_invariants(q.value())
    s3 = sk_value(3, q.value())
    X, Y, _ = uniformize_point(ctx3.scalar(2), q)
    resid_wrong = weierstrass_residual(X, Y, -s3, a6)
    assert resid_wrong.min_valuation() <= 3
    resid_right = weierstrass_residual(X, Y, -(s3 * 5), a6)
    assert resid_right.min_valuation() >= ctx3.prec


def test_formal_iso_grid(ctx3):
    from padiclab.tate import default_grid

    qs, _ = default_grid(ctx3)
    for q in qs:
        rep = verify_formal_iso(ctx3, q, order=40)
        assert rep["roundtrip_residual"] >= ctx3.prec - 2
        assert rep["pullback_residual"] >= ctx3.prec - 2
        assert rep["t_integral_floor"] >= 0


def test_formal_iso_p5(ctx5):
    q = TateParameter.make(ctx5, 1, 6)
    rep = verify_formal_iso(ctx5, q, order=40)
    assert rep["roundtrip_residual"] >= ctx5.prec - 2


def test_degenerate_parameter_series_frozen():
    # a4 = a6 = 0: w = t^3/(1-t) gives lambda = -log(1-t) and the
    # uniformizing series t(X) = X/(1+X) (checked by hand from t = -x/y)
    ctx = PrimeContext(3, 14)
    zero = ctx.scalar(0, 80)
    lam, omega = formal_log_weierstrass(ctx, zero, zero, 20)
    minus_log_one_minus = TruncatedSeries.from_rationals(
        ctx, [0] + [Fraction(1, m) for m in range(1, 21)], 80
    )
    resid = min(
        (a - b).min_valuation() for a, b in zip(lam.coeffs, minus_log_one_minus.coeffs)
    )
    assert resid >= ctx.prec
    t = multiplicative_parameter_series(ctx, omega, 20)
    x_over_one_plus_x = TruncatedSeries.from_rationals(
        ctx, [0] + [(-1) ** (m - 1) for m in range(1, 21)], 80
    )
    resid_t = min(
        (a - b).min_valuation() for a, b in zip(t.coeffs, x_over_one_plus_x.coeffs)
    )
    assert resid_t >= ctx.prec


def test_mtt_canonical_cancellation(ctx3):
    # q = p(1+p): log q / ord q = log(1+p), so ds = log(1+p) * lratio
    q = TateParameter.make(ctx3, 1, 4)
    rep = mtt_report(ctx3, q, 7)
    expected = iwasawa_log(ctx3.scalar(4)) * 7
    assert (rep["ds_prediction"] - expected).min_valuation() >= ctx3.prec - 2
    # the dX-form carries 1/log kappa
    back = rep["dX_prediction"] * iwasawa_log(ctx3.scalar(4))
    assert (back - expected).min_valuation() >= ctx3.prec - 2


def test_mtt_euler_factor_normalization(ctx3):
    q = TateParameter.make(ctx3, 1, 4)
    rep = mtt_report(ctx3, q, 7)
    # ds = log(1+p) (1 - 1/p) lratio * p/(p-1)
    euler = ctx3.scalar(Fraction(2, 3))
    normalization = ctx3.scalar(Fraction(3, 2))
    expected = iwasawa_log(ctx3.scalar(4)) * euler * 7 * normalization
    assert (rep["ds_prediction"] - expected).min_valuation() >= ctx3.prec - 2


def test_mtt_zero_l_value(ctx3):
    q = TateParameter.make(ctx3, 1, 4)
    rep = mtt_report(ctx3, q, 0)
    assert rep["ds_prediction"].is_zero
    assert rep["dX_prediction"].is_zero


def test_mtt_generator_invariance(ctx3):
    q = TateParameter.make(ctx3, 1, 4)
    r1 = mtt_report(ctx3, q, 5, kappa_gamma=4)
    r2 = mtt_report(ctx3, q, 5, kappa_gamma=16)
    assert (r1["ds_prediction"] - r2["ds_prediction"]).min_valuation() >= ctx3.prec - 2
    # dX halves when log kappa doubles
    ratio_check = r2["dX_prediction"] * 2 - r1["dX_prediction"]
    assert ratio_check.min_valuation() >= ctx3.prec - 4


def test_mtt_squaring_covariance(ctx3):
    q = TateParameter.make(ctx3, 1, 4)
    q2 = TateParameter.make(ctx3, 2, 16)
    r1 = mtt_report(ctx3, q, 3)
    r2 = mtt_report(ctx3, q2, 3)
    assert (r1["ds_prediction"] - r2["ds_prediction"]).min_valuation() >= ctx3.prec - 2


def test_mtt_slope_with_iwasawa_branch(ctx3):
    # q = p has log q = 0: the prediction degenerates to zero
    q = TateParameter.make(ctx3, 1, 1)
    rep = mtt_report(ctx3, q, 9)
    assert rep["ds_prediction"].is_zero or rep["ds_prediction"].min_valuation() >= 10
