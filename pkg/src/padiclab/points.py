"""The canonical local points d_n = 1 + c_n, their tower compatibilities,
the generation of the principal units, and the Hilbert-90 decomposition
d_n = (pi_n^{e_n} u_n)^{gamma - 1} with the congruence that pins e_n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .core import (
    InvalidInputError,
    PrecisionError,
    PropertyFailure,
    iwasawa_log,
    padic_exp,
)
from .cyclotomic import CycloElement, CycloTower
from .honda import HondaData


class PointFamily:
    """c_n and d_n = 1 + c_n for levels 0..n_max, with cached logarithms.

    The raw formal-group value (1 + iota(zeta-1))(1 + iota(epsilon)) is
    only the canonical point up to a p-power root of unity: its Delta
    conjugates differ by torsion with the same logarithm.  The canonical
    point is the unique Delta-fixed representative, realised by the
    multiplicative Delta-symmetrisation: the product of the conjugates
    has the torsion cancel exactly (the Teichmuller lifts sum to zero
    mod p^(n+1)), and the (p-1)-st principal root recovers the point.
    """

    def __init__(self, honda: HondaData, tower: CycloTower, n_max: int):
        self.honda = honda
        self.tower = tower
        self.n_max = n_max
        self.c = []
        self.d = []
        self.raw_d = []
        self._log_d = {}
        iota_eps = honda.iota.eval_scalar(honda.epsilon)
        self.one_plus_iota_eps = 1 + iota_eps
        for n in range(n_max + 1):
            f = tower.field(n)
            z = f.zeta() - f.one()
            iz = tower.eval_series(honda.iota, z)
            raw = f.one() + iz + f.from_scalar(iota_eps) + iz.scale(iota_eps)
            self.raw_d.append(raw)
            prod = None
            for a in f.delta_exponents():
                t = raw.galois(a) if a != 1 else raw
                prod = t if prod is None else prod * t
            d = tower.principal_power(prod, Fraction(1, tower.ctx.p - 1))
            self.d.append(d)
            self.c.append(d - f.one())

    def log_d(self, n: int) -> CycloElement:
        if n not in self._log_d:
            self._log_d[n] = self.tower.log_element(self.d[n])
        return self._log_d[n]

    def raw_delta_defect(self, n: int) -> CycloElement:
        """delta(raw)/raw for a generator of Delta: a p-power root of unity."""
        f = self.tower.field(n)
        gen = next(a for a in f.delta_exponents() if a != 1)
        return self.raw_d[n].galois(gen) / self.raw_d[n]


def build_points(honda: HondaData, tower: CycloTower, n_max: int) -> PointFamily:
    fam = PointFamily(honda, tower, n_max)
    thr = tower.ctx.prec - 2
    for n in range(n_max + 1):
        if not tower.is_delta_fixed(fam.c[n], thr):
            raise PropertyFailure(f"c_{n} is not Delta-fixed at precision {thr}")
    return fam


def verify_norm_tower(fam: PointFamily) -> dict:
    """N_{k_n/k_(n-1)}(d_n) = d_(n-1), and the trace compatibility of the
    logarithms; returns the residual valuations per level."""
    tower = fam.tower
    thr = tower.ctx.prec - 2
    report = {"norm_residuals": {}, "trace_residuals": {}}
    for n in range(1, fam.n_max + 1):
        norm = tower.norm(fam.d[n], n - 1)
        resid = (norm - fam.d[n - 1]).min_valuation()
        if resid < thr:
            raise PropertyFailure(
                f"norm compatibility fails at level {n} (residual valuation {resid})"
            )
        report["norm_residuals"][n] = resid
        tr = tower.trace(fam.log_d(n), n - 1)
        tresid = (tr - fam.log_d(n - 1)).min_valuation()
        if tresid < thr:
            raise PropertyFailure(
                f"log trace compatibility fails at level {n} (valuation {tresid})"
            )
        report["trace_residuals"][n] = tresid
    d0_resid = (fam.d[0] - fam.tower.field(0).one()).min_valuation()
    if d0_resid < thr:
        raise PropertyFailure(f"d_0 differs from 1 (valuation {d0_resid})")
    report["d0_residual"] = d0_resid
    return report


def closed_form_log(tower: CycloTower, n: int) -> CycloElement:
    """p + sum_{k<=n} sum_delta (zeta_{p^(n+1-k)}^delta - 1)/p^k."""
    f = tower.field(n)
    acc = f.from_scalar(tower.ctx.p)
    one = f.one()
    deltas = f.delta_exponents()
    pk = 1
    for k in range(n + 1):
        layer = f.zero()
        for delta in deltas:
            layer = layer + (f.zeta_power(pk * delta) - one)
        acc = acc + layer.scale(Fraction(1, tower.ctx.p**k))
        pk *= tower.ctx.p
    return acc


def verify_log_formula(fam: PointFamily, n: int) -> dict:
    """Field logarithm of d_n against the closed form, plus the split of
    the closed form into the two formal-group summands."""
    tower = fam.tower
    thr = tower.ctx.prec - 2
    closed = closed_form_log(tower, n)
    direct = fam.log_d(n)
    resid = (direct - closed).min_valuation()
    if resid < thr:
        raise PropertyFailure(
            f"closed-form logarithm fails at level {n} (valuation {resid})"
        )
    # the epsilon summand evaluates to p, the zeta summand to the k-sum
    f = tower.field(n)
    z = f.zeta() - f.one()
    ell_at_z = tower.eval_series(fam.honda.ell, z)
    ksum = closed - f.from_scalar(tower.ctx.p)
    split_resid = (ell_at_z - ksum).min_valuation()
    if split_resid < thr:
        raise PropertyFailure(
            f"ell(zeta - 1) differs from its closed form (valuation {split_resid})"
        )
    return {"level": n, "log_residual": resid, "summand_residual": split_resid}


def verify_two_routes(fam: PointFamily) -> dict:
    """1 + iota(epsilon) must agree with exp(p): the two descriptions of
    the epsilon-part of d_n."""
    ctx = fam.tower.ctx
    via_exp = padic_exp(ctx.scalar(ctx.p))
    resid = (fam.one_plus_iota_eps - via_exp).min_valuation()
    if resid < ctx.prec - 2:
        raise PropertyFailure(
            f"iota(epsilon) + 1 differs from exp(p) (valuation {resid})"
        )
    return {"exp_route_residual": resid}


# -- the unit logarithm lattice ------------------------------------------------------


class UnitLogLattice:
    """log U^1_n as an explicit Z_p-lattice in pi-power coordinates.

    Generators: the units 1 + pi^i for 1 <= i < j0 + p^n, with
    j0 = floor(p^n/(p-1)) + 1.  Below j0 they generate the graded pieces
    of the unit filtration; from j0 on, log(1 + pi^i) = pi^i mod m^(i+1),
    so their logs form a unipotent-triangular basis of m^(j0) = log U^(j0).
    """

    def __init__(self, tower: CycloTower, n: int):
        self.tower = tower
        self.n = n
        ctx = tower.ctx
        p = ctx.p
        self.dim = p**n
        self.j0 = self.dim // (p - 1) + 1
        pi = tower.uniformizer(n)
        f = tower.field(n)
        self.generators = []  # pi-power index i of the unit 1 + pi^i
        vectors = []
        pipow = f.one()
        pi_powers = [f.one()]
        for _ in range(self.j0 + self.dim):
            pipow = pipow * pi
            pi_powers.append(pipow)
        for i in range(1, self.j0 + self.dim):
            vec = tower.log_element(f.one() + pi_powers[i])
            self.generators.append(i)
            vectors.append(tower.to_pi_coords(vec))
        self._pi_powers = pi_powers
        self.basis, self.basis_expr = _column_hnf(ctx, vectors, self.dim)

    def membership(self, y_coords):
        """Integral coordinates of y in the lattice, or None.

        Returns (coords_in_basis, exponents_over_generators).
        """
        ctx = self.tower.ctx
        res = list(y_coords)
        coeffs = []
        for r in range(self.dim):
            col = self.basis[r]
            piv = col[r]
            c = res[r] / piv
            coeffs.append(c)
            res = [res[j] - c * col[j] for j in range(self.dim)]
        floor = min(s.min_valuation() for s in res)
        if floor < ctx.prec - 4:
            raise PrecisionError(
                f"membership residual only reaches valuation {floor}",
                achieved=floor,
            )
        for c in coeffs:
            if not c.is_zero and c.v < 0:
                return None
        exps = [ctx.zero() for _ in self.generators]
        for c, expr in zip(coeffs, self.basis_expr):
            for g, e in enumerate(expr):
                exps[g] = exps[g] + c * e
        return coeffs, exps

    def unit_from_exponents(self, exps):
        """Reconstruct the principal unit prod (1 + pi^i)^(e_i), e_i in Z_p.

        Exponents are truncated modulo p^wprec; the discarded part moves
        the unit by a p^(wprec - n - 1)-th power of a principal unit,
        which is below every claimed precision.
        """
        tower = self.tower
        ctx = tower.ctx
        f = tower.field(self.n)
        acc = f.one()
        cap = ctx.pk(ctx.wprec)
        for i, e in zip(self.generators, exps):
            if e.is_zero:
                continue
            if e.v < 0:
                raise InvalidInputError("unit reconstruction needs integral exponents")
            g = f.one() + self._pi_powers[i]
            acc = acc * g ** (e.lift() % cap)
        return acc

    def coords_matrix(self, vectors):
        """Express vectors in the lattice basis (forward substitution)."""
        out = []
        for y in vectors:
            res = list(y)
            coeffs = []
            for r in range(self.dim):
                col = self.basis[r]
                c = res[r] / col[r]
                coeffs.append(c)
                res = [res[j] - c * col[j] for j in range(self.dim)]
            out.append(coeffs)
        return out


def _column_hnf(ctx, vectors, dim):
    """Valuation-pivoted column reduction with generator bookkeeping.

    Returns (basis columns indexed by pivot row, expressions of each
    basis column over the original generators).  Leftover columns must
    vanish at working precision.
    """
    ngen = len(vectors)
    cols = []
    for g, vec in enumerate(vectors):
        expr = [ctx.zero() for _ in range(ngen)]
        expr[g] = ctx.one()
        cols.append((list(vec), expr))
    basis = [None] * dim
    basis_expr = [None] * dim
    remaining = list(range(ngen))
    for r in range(dim):
        best, bestval = None, None
        for idx in remaining:
            entry = cols[idx][0][r]
            if entry.is_zero:
                continue
            if bestval is None or entry.v < bestval:
                best, bestval = idx, entry.v
        if best is None:
            raise PropertyFailure(f"unit lattice is rank-deficient at row {r}")
        pv, pe = cols[best]
        remaining.remove(best)
        piv = pv[r]
        for idx in remaining:
            cv, ce = cols[idx]
            fac = cv[r] / piv
            if fac.is_zero:
                continue
            cols[idx] = (
                [cv[j] - fac * pv[j] for j in range(dim)],
                [ce[g] - fac * pe[g] for g in range(ngen)],
            )
        basis[r] = pv
        basis_expr[r] = pe
    for idx in remaining:
        floor = min(s.min_valuation() for s in cols[idx][0])
        if floor < ctx.prec - 4:
            raise PrecisionError(
                f"redundant lattice generator fails to reduce (valuation {floor})",
                achieved=floor,
            )
    return basis, basis_expr


def smith_valuations(ctx, rows):
    """Elementary-divisor valuations of a matrix over Z_p."""
    mat = [list(r) for r in rows]
    nr, nc = len(mat), len(mat[0])
    divisors = []
    used_r, used_c = set(), set()
    while True:
        best = None
        for i in range(nr):
            if i in used_r:
                continue
            for j in range(nc):
                if j in used_c:
                    continue
                e = mat[i][j]
                if e.is_zero:
                    continue
                if best is None or e.v < best[2]:
                    best = (i, j, e.v)
        if best is None:
            break
        i0, j0, v0 = best
        piv = mat[i0][j0]
        for i in range(nr):
            if i == i0 or mat[i][j0].is_zero:
                continue
            fac = mat[i][j0] / piv
            mat[i] = [mat[i][j] - fac * mat[i0][j] for j in range(nc)]
        used_r.add(i0)
        used_c.add(j0)
        divisors.append(v0)
    return sorted(divisors)


def verify_generation(fam: PointFamily, n: int, u: int | None = None) -> dict:
    """The Z_p[Gamma_n]-span of d_n together with u must be all of U^1_n:
    compare log-lattices by elementary divisors."""
    tower = fam.tower
    ctx = tower.ctx
    u_val = (1 + ctx.p) if u is None else u
    lattice = UnitLogLattice(tower, n)
    vectors = []
    logd = fam.log_d(n)
    for a in tower.gamma_orbit_exponents(n):
        conj = logd.galois(a) if a != 1 else logd
        vectors.append(tower.to_pi_coords(conj))
    log_u = iwasawa_log(ctx.scalar(u_val))
    vectors.append([log_u] + [ctx.zero()] * (lattice.dim - 1))
    coords = lattice.coords_matrix(vectors)
    for row in coords:
        for c in row:
            if not c.is_zero and c.v < 0:
                raise PropertyFailure(
                    "span of the points leaves the unit lattice; "
                    f"coordinate valuation {c.v}"
                )
    divisors = smith_valuations(ctx, coords)
    rank = len(divisors)
    if rank != lattice.dim:
        raise PropertyFailure(
            f"span has rank {rank}, expected {lattice.dim}"
        )
    index_val = sum(divisors)
    if index_val != 0:
        raise PropertyFailure(
            f"span has index p^{index_val} in the unit lattice"
        )
    return {
        "level": n,
        "rank": rank,
        "index_valuation": index_val,
        "divisors": divisors,
    }


# -- Hilbert 90 -----------------------------------------------------------------------


@dataclass
class H90Solution:
    n: int
    e: int
    u_n: CycloElement
    x_n: CycloElement
    pi_ratio_log: CycloElement
    residual_valuation: Fraction
    norm_residual: Fraction
    searched: tuple = field(default=())

    def e_class(self, modulus: int) -> int:
        return self.e % modulus


def solve_h90(fam: PointFamily, n: int, lattice: UnitLogLattice | None = None) -> H90Solution:
    """Find e in {0..p^n-1} and a norm-one principal unit u_n with
    d_n = (pi_n^e u_n)^(gamma-1).

    Brute force over the p^n residue classes: for each candidate the
    additive equation (gamma - 1) y = log(d_n pi^((1-gamma)e)) is solved
    and y (trace-normalised) is tested for membership in log U^1_n.  The
    candidate e is never taken from the congruence it later certifies.
    """
    tower = fam.tower
    ctx = tower.ctx
    p = ctx.p
    if n == 0:
        f = tower.field(0)
        return H90Solution(
            0, 0, f.one(), f.one(), f.zero(),
            Fraction(ctx.wprec), Fraction(ctx.wprec),
        )
    lattice = UnitLogLattice(tower, n) if lattice is None else lattice
    f = tower.field(n)
    pi = tower.uniformizer(n)
    ratio = pi / tower.gamma_apply(pi)  # pi^(1 - gamma)
    if ratio.residue() != 1:
        raise PropertyFailure("pi^(1-gamma) is not a principal unit")
    log_ratio = tower.log_element(ratio)
    log_d = fam.log_d(n)
    pn = p**n
    hits = []
    searched = []
    for e in range(pn):
        log_Ae = log_d + log_ratio.scale(e)
        y = tower.gamma_solve(log_Ae)
        tr = tower.trace_kn_to_qp(y)
        y0 = y - f.from_scalar(tr / pn)
        member = lattice.membership(tower.to_pi_coords(y0))
        searched.append(e)
        if member is not None:
            hits.append((e, y0, member))
    if not hits:
        raise PropertyFailure(
            "no residue class admits a norm-one Hilbert-90 solution"
        )
    if len(hits) > 1:
        raise PrecisionError(
            f"multiple candidate classes {[h[0] for h in hits]};"
            " raise the working precision",
            achieved=ctx.prec,
        )
    e, y0, (coeffs, exps) = hits[0]
    u_n = lattice.unit_from_exponents(exps)
    log_match = (tower.log_element(u_n) - y0).min_valuation()
    if log_match < ctx.prec - 4:
        raise PrecisionError(
            f"reconstructed unit log matches only to valuation {log_match}",
            achieved=log_match,
        )
    x_n = pi**e * u_n
    # division-free form of x^gamma / x = d: gamma(x) - x d must vanish
    cert = (tower.gamma_apply(x_n) - x_n * fam.d[n]).min_valuation()
    if cert < ctx.prec - 4:
        raise PropertyFailure(
            f"x_n^gamma / x_n differs from d_n (valuation {cert})"
        )
    norm_res = (tower.norm_kn_to_qp(u_n) - 1).min_valuation()
    if norm_res < ctx.prec - 4:
        raise PropertyFailure(
            f"N(u_n) differs from 1 (valuation {norm_res})"
        )
    return H90Solution(n, e, u_n, x_n, log_ratio, Fraction(cert), Fraction(norm_res), tuple(searched))


def verify_prop2(sol: H90Solution, tower: CycloTower) -> dict:
    """p = e_n (p-1) log kappa(gamma) mod p^(n+1), with e_n from the solve."""
    ctx = tower.ctx
    n = sol.n
    log_kappa = iwasawa_log(ctx.scalar(tower.kappa_gamma))
    lhs = ctx.scalar(ctx.p)
    rhs = log_kappa * (ctx.p - 1) * sol.e
    diff = lhs - rhs
    modulus = n + 1
    if not diff.congruent_to(0, modulus):
        raise PropertyFailure(
            f"congruence fails at level {n}: difference has valuation "
            f"{diff.min_valuation()}, needed >= {modulus}"
        )
    # normalised form e_n = p / ((p-1) log kappa) mod p^n
    target_e = ctx.scalar(ctx.p) / (log_kappa * (ctx.p - 1))
    norm_diff = target_e - sol.e
    if n > 0 and not norm_diff.congruent_to(0, n):
        raise PropertyFailure("normalised e_n congruence fails")
    return {
        "level": n,
        "residual_valuation": diff.min_valuation(),
        "modulus_exponent": modulus,
        "e_class": sol.e,
        "normalised_e": target_e.lift() % ctx.p ** max(n, 1),
    }
