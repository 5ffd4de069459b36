"""The logarithm ell with p-typical Frobenius property, its exponential
counterpart iota onto the multiplicative formal group, and the element
epsilon with ell(epsilon) = p.

ell(X) = log(1+X) + sum_{k>=0} sum_{delta in mu_{p-1}} ((X+1)^(p^k delta) - 1)/p^k

The k-tail converges because averaging over mu_{p-1} kills the low
powers of the exponent; each coefficient is accumulated until its
k-contribution is provably and measurably below the target precision.
"""

from __future__ import annotations

from fractions import Fraction

from .core import (
    ConvergenceError,
    InvalidInputError,
    PadicScalar,
    PrimeContext,
    PropertyFailure,
    hensel_root,
    mpz,
    vp,
)
from .series import TruncatedSeries, frobenius_substitute


def default_truncation(ctx: PrimeContext, n_max: int) -> int:
    """Order needed to evaluate at points of valuation 1/(p^n_max (p-1)).

    The naive ceil(prec/valuation) undershoots because the coefficients
    carry 1/m denominators; the extra d*(log_p M + 4) terms cover that.
    """
    d = ctx.p**n_max * (ctx.p - 1)
    logterm = 1
    while ctx.p**logterm < d * (ctx.prec + 8):
        logterm += 1
    return d * (ctx.prec + logterm + 4) + 8


def build_ell(ctx: PrimeContext, order: int, coeff_prec: int | None = None) -> TruncatedSeries:
    """The degree-m coefficient is the p-adic limit over k of the averaged
    binomial contributions plus the log coefficient; every coefficient is
    required to stabilise (two consecutive negligible terms and the proven
    geometric tail bound) before it is accepted.
    """
    p = ctx.p
    vfact = [0] * (order + 1)
    for m in range(1, order + 1):
        vfact[m] = vfact[m - 1] + (vp(m, p) if m % p == 0 else 0)
    target = ctx.wprec + vfact[order] if coeff_prec is None else coeff_prec
    vf_top = vfact[order]
    # proven tail bound: the k-term at degree m has valuation
    # >= k(p-2) - v_p(m!), so k past (target + v_p(m!))/(p-2) cannot matter
    k_need = [(target + vfact[m]) // (p - 2) + 1 for m in range(order + 1)]
    k_cap = k_need[order] + 8
    w_int = target + vf_top + k_cap + 2
    big_modulus = ctx.pk(w_int)

    # inverse unit parts of m!, so the inner loop divides by a single multiply
    inv_fact_unit = [1] * (order + 1)
    unit_fact = 1
    for m in range(1, order + 1):
        unit_fact = unit_fact * (m // p ** vp(m, p)) % big_modulus
        inv_fact_unit[m] = unit_fact
    inv_fact_unit = [pow(u, -1, big_modulus) for u in inv_fact_unit]

    d_acc = vf_top // p + 4  # worst denominator of an individual k-term
    e_acc = target + d_acc
    m_acc = ctx.pk(e_acc)
    acc = [0] * (order + 1)

    teich_full = [ctx.teichmuller_int(r, w_int) for r in range(1, p)]
    small_streak = [0] * (order + 1)
    done = [True] + [False] * order
    open_count = order
    max_active = order

    k = 0
    pk_int = mpz(1)
    zero_int = mpz(0)
    teich_full = [mpz(t) for t in teich_full]
    inv_fact_unit = [mpz(u) for u in inv_fact_unit]
    while open_count:
        if k > k_cap:
            raise ConvergenceError(
                f"k-sum failed to stabilise within budget {k_cap}"
            )
        # iteration k only needs the term mod p^target after shedding
        # v_p(m!) + k digits, so the working modulus grows with k
        w_k = min(w_int, target + vf_top + k + 2)
        modulus = mpz(ctx.pk(w_k))
        sums = [zero_int] * (max_active + 1)
        for t in teich_full:
            a = t * pk_int % modulus
            num = mpz(1)
            for m in range(1, max_active + 1):
                num = num * (a - m + 1) % modulus
                if not done[m]:
                    sums[m] += num
        for m in range(1, max_active + 1):
            if done[m]:
                continue
            tshift = vfact[m] + k
            raw = sums[m] * inv_fact_unit[m] % modulus
            # value of this k-term is raw / p^tshift; record at scale d_acc
            shift = d_acc - tshift
            if shift >= 0:
                contrib = raw * ctx.pk(shift) % m_acc
            else:
                qd = ctx.pk(-shift)
                if raw % qd:
                    raise ConvergenceError(
                        f"term at degree {m}, k={k} is not p-integral as expected"
                    )
                contrib = raw // qd % m_acc
            acc[m] = (acc[m] + contrib) % m_acc
            # measure stabilisation only near the proven cutoff
            if k >= k_need[m] - 1:
                if contrib == 0:
                    term_val = e_acc - d_acc
                else:
                    term_val = vp(contrib, p) - d_acc
                if term_val >= target:
                    small_streak[m] += 1
                else:
                    small_streak[m] = 0
                if small_streak[m] >= 2 and k >= k_need[m]:
                    done[m] = True
                    open_count -= 1
        while max_active and done[max_active]:
            max_active -= 1
        k += 1
        pk_int = pk_int * p % big_modulus

    coeffs = [ctx.zero(target)]
    for m in range(1, order + 1):
        tail = PadicScalar._make(ctx, -d_acc, int(acc[m]), target)
        logc = ctx.scalar(Fraction((-1) ** (m - 1), m), target)
        coeffs.append(tail + logc)
    return TruncatedSeries(ctx, coeffs)


def check_honda(ell: TruncatedSeries) -> dict:
    """Verify ell(0) = 0, ell' in 1 + X Z_p[[X]] and (phi - p) ell in p Z_p[[X]].

    Returns the minimal valuations found; raises PropertyFailure naming
    the offending degree otherwise.
    """
    ctx = ell.ctx
    report = {}
    if not ell.coeff(0).is_zero:
        raise PropertyFailure("constant term of ell is nonzero")
    report["const_term_valuation"] = ell.coeff(0).min_valuation()

    deriv = ell.derivative()
    lead = deriv.coeff(0) - 1
    if not lead.is_zero:
        raise PropertyFailure(
            f"ell'(0) - 1 has valuation {lead.min_valuation()}, expected zero"
        )
    report["deriv_unit_residual"] = lead.min_valuation()
    worst = None
    for m in range(1, deriv.order + 1):
        v = deriv.coeff(m).min_valuation()
        if v < 0:
            raise PropertyFailure(f"ell' has a non-integral coefficient at degree {m}")
        worst = v if worst is None else min(worst, v)
    report["deriv_min_valuation"] = worst

    frob = frobenius_substitute(ell) - ell.scale(ctx.p)
    worst = None
    for m in range(0, frob.order + 1):
        v = frob.coeff(m).min_valuation()
        if v < 1:
            raise PropertyFailure(
                f"(phi - p) ell has valuation {v} < 1 at degree {m}"
            )
        worst = v if worst is None else min(worst, v)
    report["frobenius_min_valuation"] = worst
    return report


def _exp_minus_one_integral(ell: TruncatedSeries) -> TruncatedSeries:
    """exp(ell) - 1 by the ODE u' = ell' u on plain integer residues.

    ell' must be integral (the Honda property); each degree divides by
    its index exactly, and a failed exact division is precisely a
    non-integral coefficient of the result.
    """
    ctx = ell.ctx
    p = ctx.p
    order = ell.order
    base = min(c.absprec for c in ell.coeffs)
    mod = mpz(ctx.pk(base))
    lp = []
    for j in range(order):
        c = ell.coeff(j + 1) * (j + 1)
        if not c.is_zero and c.v < 0:
            raise PropertyFailure(f"ell' is non-integral at degree {j}")
        lp.append(mpz(c.lift()) % mod)
    u = [mpz(1)] + [mpz(0)] * order
    for m in range(order):
        s = mpz(0)
        for j in range(m + 1):
            cj = lp[j]
            if cj:
                s += cj * u[m - j]
        s %= mod
        v1 = vp(m + 1, p) if (m + 1) % p == 0 else 0
        unit = (m + 1) // p**v1
        if unit != 1:
            s = s * pow(unit, -1, mod) % mod
        if v1:
            if s % ctx.pk(v1):
                raise PropertyFailure(
                    f"exp(ell) has a non-integral coefficient at degree {m + 1}"
                )
            s //= ctx.pk(v1)
        u[m + 1] = s
    vloss = 0
    coeffs = [ctx.zero(base)]
    for m in range(1, order + 1):
        if m % p == 0:
            vloss += vp(m, p)
        coeffs.append(PadicScalar._make(ctx, 0, int(u[m]), base - vloss))
    return TruncatedSeries(ctx, coeffs)


def build_iota(ell: TruncatedSeries, inverse_order: int = 160) -> tuple:
    """iota = exp(ell) - 1, certified integral coefficientwise, with its
    compositional inverse (checked integral to ``inverse_order``)."""
    iota = _exp_minus_one_integral(ell)
    ok, worst = iota.is_integral()
    if not ok:
        raise PropertyFailure(
            f"iota has a non-integral coefficient (valuation {worst})"
        )
    inv = iota.truncate(min(inverse_order, iota.order)).reversion()
    ok, worst_inv = inv.is_integral()
    if not ok:
        raise PropertyFailure(
            f"inverse of iota has a non-integral coefficient (valuation {worst_inv})"
        )
    return iota, inv


def solve_epsilon(ell: TruncatedSeries, ctx: PrimeContext) -> PadicScalar:
    """The element of pZ_p with ell(epsilon) = p, by Newton from x0 = p."""
    target = min(c.absprec for c in ell.coeffs)
    x0 = ctx.scalar(ctx.p, target)
    deriv = ell.derivative()
    eps = hensel_root(
        lambda x: ell.eval_scalar(x) - ctx.p,
        deriv.eval_scalar,
        x0,
        target=min(ctx.wprec, target - 2),
    )
    if eps.is_zero or eps.v < 1:
        raise ConvergenceError("epsilon left pZ_p during the iteration")
    return eps


class HondaData:
    """ell, iota, iota^{<-1>} and epsilon at a fixed truncation order."""

    def __init__(self, ctx, ell, iota, iota_inv, epsilon):
        self.ctx = ctx
        self.ell = ell
        self.ell_prime = ell.derivative()
        self.iota = iota
        self.iota_prime = iota.derivative()
        self.iota_inv = iota_inv
        self.epsilon = epsilon

    @classmethod
    def build(cls, ctx: PrimeContext, order: int, inverse_order: int = 160) -> "HondaData":
        ell = build_ell(ctx, order)
        check_honda(ell)
        iota, iota_inv = build_iota(ell, inverse_order)
        epsilon = solve_epsilon(ell, ctx)
        return cls(ctx, ell, iota, iota_inv, epsilon)

    @property
    def order(self) -> int:
        return self.ell.order


def formal_add(x, y, honda: HondaData, tower):
    """x [+] y = iota^{<-1>}((1 + iota(x))(1 + iota(y)) - 1) on points of
    positive valuation, with the inversion done by Newton in the field
    (the bivariate group law is never materialised)."""
    for t in (x, y):
        v = t.valuation()
        if v is not None and v <= 0:
            raise InvalidInputError("formal addition needs points of positive valuation")
    ix = tower.eval_series(honda.iota, x)
    iy = tower.eval_series(honda.iota, y)
    target = ix + iy + ix * iy
    w = target
    ctx = honda.ctx
    degree = w.field.degree
    max_iter = 8 + (ctx.wprec * degree).bit_length()
    for _ in range(max_iter):
        resid = tower.eval_series(honda.iota, w) - target
        if resid.min_valuation() >= ctx.wprec - 2:
            return w
        w = w - resid * tower.eval_series(honda.iota_prime, w).inverse()
    raise ConvergenceError("formal addition did not converge")
