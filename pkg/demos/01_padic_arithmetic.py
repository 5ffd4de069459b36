#!/usr/bin/env python3
"""A quick tour of the exact p-adic scalar layer.

Every value carries its own absolute precision; arithmetic never claims
more digits than the inputs justify, and the Iwasawa logarithm uses the
branch with log(p) = 0.
"""

from fractions import Fraction

from padiclab import PrimeContext, hensel_root, iwasawa_log, padic_exp, teichmuller

ctx = PrimeContext(3, prec=20)

print("== scalars ==")
x = ctx.scalar(Fraction(7, 12))
print("7/12 in Q_3:", x, " valuation:", x.valuation)
print("(7/12) * 12 - 7 is zero at precision:", ((x * 12) - 7).is_zero)

print()
print("== Teichmuller lifts ==")
ctx5 = PrimeContext(5, prec=20)
w = teichmuller(2, ctx5)
print("omega(2) mod 25:", w.lift() % 25, "  (the fixed point of a -> a^5)")
print("omega(2)^4 = 1:", ((w**4) - 1).is_zero)

print()
print("== Iwasawa logarithm ==")
print("log_3(3) =", iwasawa_log(ctx.scalar(3)))
print("log_3(4) mod 27 =", iwasawa_log(ctx.scalar(4)).lift() % 27, " (= 3 - 9/2 + 9)")
u, v = ctx.scalar(4), ctx.scalar(7)
additive = iwasawa_log(u * v) - iwasawa_log(u) - iwasawa_log(v)
print("log(uv) - log(u) - log(v) vanishes to valuation", additive.min_valuation())

print()
print("== exp/log on the convergence disc ==")
t = ctx.scalar(1 + 3 + 9)
print("exp(log(1+3+9)) recovers the unit:",
      (padic_exp(iwasawa_log(t)) - t).min_valuation() >= ctx.prec)

print()
print("== Hensel / Newton root finding ==")
root = hensel_root(lambda s: s * s - 1, lambda s: s * 2, ctx5.scalar(6))
print("square root of 1 near 6 (mod 5):", root.lift() % 25)
