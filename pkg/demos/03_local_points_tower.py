#!/usr/bin/env python3
"""The canonical norm-compatible points of the cyclotomic layers.

Includes the torsion subtlety this laboratory surfaced: the raw value
(1 + iota(zeta - 1))(1 + iota(epsilon)) is off from the canonical point
by a p-power root of unity (at level 0 it is exactly zeta_3), and the
Delta-symmetrisation repairs it without touching the logarithm.
"""

from padiclab import (
    CycloTower,
    HondaData,
    PrimeContext,
    build_points,
    solve_h90,
    verify_generation,
    verify_log_formula,
    verify_norm_tower,
    verify_prop2,
)
from padiclab.honda import default_truncation

ctx = PrimeContext(3, prec=14)
tower = CycloTower(ctx, 1)
honda = HondaData.build(ctx, default_truncation(ctx, 1))
fam = build_points(honda, tower, 1)

print("== the torsion defect of the raw product ==")
defect = fam.raw_delta_defect(0)
f0 = tower.field(0)
print("delta(raw)/raw - zeta_3 vanishes:",
      (defect - f0.zeta()).min_valuation() >= ctx.prec)
print("after symmetrisation d_0 = 1:",
      (fam.d[0] - f0.one()).min_valuation() >= ctx.prec)

print()
print("== tower compatibilities ==")
rep = verify_norm_tower(fam)
print("norm residual at level 1:", rep["norm_residuals"][1])
print("log trace residual at level 1:", rep["trace_residuals"][1])

print()
print("== the closed-form logarithm ==")
rep = verify_log_formula(fam, 1)
print("field log of d_1 matches p + sum (zeta^delta - 1)/p^k:",
      rep["log_residual"])
f1 = tower.field(1)
frozen = f1.zeta_power(1) + f1.zeta_power(8)
print("log d_1 = zeta_9 + zeta_9^(-1) to valuation",
      (fam.log_d(1) - frozen).min_valuation())

print()
print("== the points generate the principal units ==")
gen = verify_generation(fam, 1)
print("rank:", gen["rank"], " index valuation:", gen["index_valuation"],
      " elementary divisors:", gen["divisors"])

print()
print("== Hilbert 90 and the exponent congruence ==")
sol = solve_h90(fam, 1)
print("searched residue classes:", sol.searched, " found e_1 =", sol.e)
print("x^gamma / x = d_1 to valuation", sol.residual_valuation)
print("N(u_1) = 1 to valuation", sol.norm_residual)
p2 = verify_prop2(sol, tower)
print("p = e_1 (p-1) log kappa(gamma) mod p^2, residual valuation:",
      p2["residual_valuation"])
