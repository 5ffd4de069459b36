"""Tate curve q-expansions, the multiplicative uniformization, the
identification of the curve's formal group with the multiplicative one,
and the derivative bookkeeping for the split-multiplicative L-value
prediction.
"""

from __future__ import annotations

from fractions import Fraction

from .core import (
    InvalidInputError,
    PadicScalar,
    PrimeContext,
    PropertyFailure,
    factorial_valuation,
    iwasawa_log,
    teichmuller,
)
from .series import TruncatedSeries, geometric_inverse, log_one_plus_x
from .coleman import TateParameter


def sigma_k(n: int, k: int) -> int:
    return sum(d**k for d in range(1, n + 1) if n % d == 0)


def sk_coefficients(k: int, order: int):
    """Integer q-expansion of s_k: coefficient of q^n is sigma_k(n)."""
    if k not in (1, 3, 5):
        raise InvalidInputError("only s_1, s_3, s_5 are used")
    out = [0] * (order + 1)
    for d in range(1, order + 1):
        dk = d**k
        for n in range(d, order + 1, d):
            out[n] += dk
    return out


def a_series_coefficients(order: int):
    """Exact integer q-expansions of the two curve coefficients.

    a4 = -5 s_3 and a6 = -(5 s_3 + 7 s_5)/12; the division by 12 is exact
    in every degree, which is asserted.
    """
    s3 = sk_coefficients(3, order)
    s5 = sk_coefficients(5, order)
    a4 = [-5 * c for c in s3]
    a6 = []
    for c3, c5 in zip(s3, s5):
        num = -(5 * c3 + 7 * c5)
        if num % 12:
            raise PropertyFailure("5 s_3 + 7 s_5 is not divisible by 12")
        a6.append(num // 12)
    return a4, a6


def sk_value(k: int, q: PadicScalar) -> PadicScalar:
    """s_k(q) = sum_{n>=1} n^k q^n/(1-q^n), summed to working precision."""
    ctx = q.ctx
    if q.is_zero:
        return ctx.zero(q.absprec)
    if q.v < 1:
        raise InvalidInputError("s_k needs v(q) >= 1")
    target = q.absprec
    acc = ctx.zero(target)
    qn = ctx.one(target)
    n = 1
    while (n * q.v) < target:
        qn = qn * q
        acc = acc + qn * (n**k) / (1 - qn)
        n += 1
    return acc


def a_invariants(q: PadicScalar):
    """(a4, a6) of the split multiplicative curve with parameter q.

    The q-coefficients are -5 and -1; both values are p-integral, which
    is asserted.
    """
    ctx = q.ctx
    s3 = sk_value(3, q)
    s5 = sk_value(5, q)
    a4 = -(s3 * 5)
    a6 = -(s3 * 5 + s5 * 7) / 12
    for name, val in (("a4", a4), ("a6", a6)):
        if val.min_valuation() < 0:
            raise PropertyFailure(f"{name} is not integral (valuation {val.min_valuation()})")
    return a4, a6


def weierstrass_residual(x, y, a4, a6):
    """y^2 + xy - x^3 - a4 x - a6."""
    return y * y + x * y - x * x * x - a4 * x - a6


def uniformize_point(u: PadicScalar, q, a_inv=None):
    """(X(u,q), Y(u,q), residual) for a unit u not congruent to 1.

    The two-sided sums are folded to positive powers of q via the
    u <-> 1/u symmetry, so every summand converges; the tail is cut when
    q^m drops below working precision.
    """
    if isinstance(q, TateParameter):
        q = q.value()
    ctx = u.ctx
    if u.is_zero or u.v != 0:
        raise InvalidInputError("uniformization expects a unit u")
    if q.is_zero or q.v < 1:
        raise InvalidInputError("the parameter must have positive valuation")
    if (u - 1).is_zero:
        raise InvalidInputError("u lies in q^Z: the point at infinity")
    target = min(u.absprec, q.absprec)
    uinv = u.inverse()
    one = ctx.one(target)

    def x_term(w):
        return w / ((1 - w) ** 2)

    def y_term_pos(w):
        return w * w / ((1 - w) ** 3)

    def y_term_neg(w):
        return -(w / ((1 - w) ** 3))

    X = x_term(u)
    Y = y_term_pos(u)
    qm = one
    m = 1
    while m * q.v < target + 2:
        qm = qm * q
        wp = qm * u
        wn = qm * uinv
        X = X + x_term(wp) + x_term(wn)
        Y = Y + y_term_pos(wp) + y_term_neg(wn)
        m += 1
    s1 = sk_value(1, q)
    X = X - s1 * 2
    Y = Y + s1
    if a_inv is None:
        a_inv = a_invariants(q)
    a4, a6 = a_inv
    return X, Y, weierstrass_residual(X, Y, a4, a6)


# -- the formal group of the curve ---------------------------------------------------


def formal_log_weierstrass(ctx: PrimeContext, a4, a6, order: int) -> TruncatedSeries:
    """Formal logarithm of y^2 + xy = x^3 + a4 x + a6 in t = -x/y.

    The standard expansion w = t^3 + t w + a4 t w^2 + a6 w^3 (w = -1/y) is
    solved coefficient by coefficient, then the invariant differential
    dx/(2y + x) = (2W + tW')/(W (2 - t)) dt with w = t^3 W is integrated.
    """
    absprec = min(a4.absprec, a6.absprec)
    zero = ctx.zero(absprec)
    n = order + 3
    w = [zero] * (n + 1)
    sq = [zero] * (n + 4)
    cube = [zero] * (n + 1)
    w[3] = ctx.one(absprec)
    if 6 <= n + 3:
        sq[6] = ctx.one(absprec)
    if 9 <= n:
        cube[9] = ctx.one(absprec)
    for m in range(4, n + 1):
        val = w[m - 1] + a4 * sq[m - 1] + a6 * cube[m]
        w[m] = val
        s = m + 3
        if s <= n + 3:
            acc = zero
            for i in range(3, m + 1):
                j = s - i
                if 3 <= j <= m:
                    acc = acc + w[i] * w[j]
            sq[s] = acc
        s = m + 6
        if s <= n:
            acc = zero
            for i in range(3, m + 1):
                j = s - i
                if 6 <= j <= m + 3:
                    acc = acc + w[i] * sq[j]
            cube[s] = acc
    big_w = TruncatedSeries(ctx, w[3:]).truncate(order)  # w = t^3 W, W(0) = 1
    num = big_w.scale(2) + TruncatedSeries(
        ctx, (zero,) + big_w.derivative().coeffs
    )
    two_minus_t = TruncatedSeries.from_rationals(
        ctx, [2, -1] + [0] * (order - 1), absprec
    )
    omega = (num * big_w.reciprocal() * two_minus_t.reciprocal()).truncate(order - 1)
    lam = omega.integrate().truncate(order)
    return lam, omega


def multiplicative_parameter_series(ctx, omega: TruncatedSeries, order: int) -> TruncatedSeries:
    """The series t(X) with lambda(t(X)) = log(1+X), solved from the
    differential form (1+X) omega(t(X)) t'(X) = 1.

    omega = lambda' is integral with unit constant term, so every
    intermediate stays integral and only the final division by the
    degree sheds precision.  Integrality of the result is a verified
    output, not an assumption.
    """
    absprec = min(c.absprec for c in omega.coeffs)
    zero = ctx.zero(absprec)
    t = [zero, ctx.one(absprec)]
    for m in range(2, order + 1):
        part = TruncatedSeries(ctx, t + [zero] * (m - 1 - len(t) + 1))
        F = omega.truncate(m - 1).compose(part.truncate(m - 1))
        # G = (1+X) omega(t); identity [G t']_(m-1) = 0 for m >= 2
        s = zero
        for i in range(1, m):
            g_i = F.coeff(i) + (F.coeff(i - 1) if i >= 1 else zero)
            if not g_i.is_zero:
                s = s + g_i * (m - i) * t[m - i]
        t.append(-s / m)
    return TruncatedSeries(ctx, t)


def _series_residual(a: TruncatedSeries, b: TruncatedSeries):
    return min((x - y).min_valuation() for x, y in zip(a.coeffs, b.coeffs))


def verify_formal_iso(ctx: PrimeContext, q, order: int = 64) -> dict:
    """t(X) = exp of the curve log composed with log(1+X): integral
    coefficients, inverse composition back to log(1+X), and the
    differential pullback identity d/dX [lambda(t(X))] = 1/(1+X).

    The reversion divides by factorials, so the parameter is re-embedded
    with enough headroom for the checks to land at precision N.
    """
    if isinstance(q, TateParameter):
        q_int = q.unit * ctx.p**q.ord
    else:
        q_int = q.lift()
    headroom = ctx.wprec + factorial_valuation(order, ctx.p) + 8
    q = ctx.scalar(q_int, headroom)
    a4, a6 = a_invariants(q)
    lam, omega = formal_log_weierstrass(ctx, a4, a6, order)
    t_of_x = multiplicative_parameter_series(ctx, omega, order)
    ok, worst = t_of_x.is_integral()
    if not ok:
        raise PropertyFailure(
            f"uniformizing series has a non-integral coefficient ({worst})"
        )
    lead = (t_of_x.coeff(1) - 1).min_valuation()
    thr = ctx.prec - 2
    if lead < thr or not t_of_x.coeff(0).is_zero:
        raise PropertyFailure("uniformizing series does not start at X")
    logx = log_one_plus_x(ctx, order, min(c.absprec for c in lam.coeffs))
    roundtrip = lam.compose(t_of_x)
    rt_resid = _series_residual(roundtrip, logx)
    if rt_resid < thr:
        raise PropertyFailure(
            f"log roundtrip fails (valuation {rt_resid})"
        )
    # pullback of dx/(2y+x): both through the composed derivative and the
    # chain rule, against 1/(1+X)
    geo = geometric_inverse(ctx, order - 1)
    d_composed = roundtrip.derivative()
    pull1 = _series_residual(d_composed, geo)
    chain = t_of_x.derivative() * omega.compose(t_of_x).truncate(order - 1)
    pull2 = _series_residual(chain.truncate(order - 1), geo)
    if min(pull1, pull2) < thr:
        raise PropertyFailure(
            f"differential pullback fails (valuations {pull1}, {pull2})"
        )
    return {
        "order": order,
        "t_integral_floor": worst,
        "roundtrip_residual": rt_resid,
        "pullback_residual": min(pull1, pull2),
    }


def default_grid(ctx: PrimeContext):
    """Sampling grid: q in {p, p(1+p), p^2(1+p)}, u in {2, 1+p, omega(2)}."""
    p = ctx.p
    qs = [
        TateParameter.make(ctx, 1, 1),
        TateParameter.make(ctx, 1, 1 + p),
        TateParameter.make(ctx, 2, 1 + p),
    ]
    us = [ctx.scalar(2), ctx.scalar(1 + p), teichmuller(2, ctx)]
    return qs, us


def mtt_report(ctx: PrimeContext, q: TateParameter, lratio, kappa_gamma: int | None = None) -> dict:
    """Predictions for the two derivative normalisations given the ratio
    of the global L-value to the real period.

    The interpolation input at the trivial character carries the Euler
    factor (1 - 1/p); the slope-form prediction is independent of the
    choice of topological generator, which is checked by recomputation.
    """
    if q.ord < 1:
        raise InvalidInputError("not split multiplicative: ord(q) = 0")
    lratio = lratio if isinstance(lratio, PadicScalar) else ctx.scalar(lratio)
    kg = (1 + ctx.p) if kappa_gamma is None else kappa_gamma
    euler = ctx.scalar(Fraction(ctx.p - 1, ctx.p))
    e0 = euler * lratio
    log_kappa = iwasawa_log(ctx.scalar(kg))
    lead_factor = ctx.scalar(ctx.p) / (log_kappa * (ctx.p - 1))
    dX = lead_factor * q.slope() * e0
    ds = log_kappa * dX
    # generator independence of the s-normalisation
    kg2 = kg * kg
    log_kappa2 = iwasawa_log(ctx.scalar(kg2))
    dX2 = ctx.scalar(ctx.p) / (log_kappa2 * (ctx.p - 1)) * q.slope() * e0
    ds2 = log_kappa2 * dX2
    invariance = (ds - ds2).min_valuation()
    if invariance < ctx.prec - 2:
        raise PropertyFailure(
            f"s-derivative depends on the generator (valuation {invariance})"
        )
    slope_times_l = q.slope() * lratio
    cancel = (ds - slope_times_l).min_valuation()
    if cancel < ctx.prec - 2:
        raise PropertyFailure(
            f"Euler-factor cancellation fails (valuation {cancel})"
        )
    return {
        "euler_factor": euler,
        "interpolation_input": e0,
        "l_invariant": q.slope(),
        "dX_prediction": dX,
        "ds_prediction": ds,
        "kappa_gamma": kg,
        "generator_invariance_residual": invariance,
        "normalization": "ds = slope * lratio; dX = ds / log kappa(gamma)",
    }
