"""Finite-level Coleman maps in a local-reciprocity functional model.

A cohomology class is modelled by a functional on k_m^x per level:
x -> Tr_{k_m/Q_p}(log_p(x) E_m) + alpha v(x), with trace-compatible
densities E_m and a valuation slope alpha.  Cup products become
functional evaluation; the density at level 0 plays the role of the
dual-exponential value, and admissibility pins alpha so that the
functional kills the Tate period.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .core import (
    InvalidInputError,
    PadicScalar,
    PrimeContext,
    PropertyFailure,
    iwasawa_log,
    teichmuller,
)
from .cyclotomic import CycloElement, CycloTower
from .points import H90Solution, PointFamily


@dataclass(frozen=True)
class TateParameter:
    """q = p^ord * rho * u_q with rho in mu_{p-1} and u_q = 1 mod p."""

    ctx: PrimeContext
    ord: int
    unit: int
    rho: PadicScalar
    u_q: PadicScalar
    log: PadicScalar  # log_p(q) = log_p(u_q)

    @classmethod
    def make(cls, ctx: PrimeContext, ord: int, unit: int) -> "TateParameter":
        if ord < 1:
            raise InvalidInputError("the parameter must have positive valuation")
        if unit % ctx.p == 0:
            raise InvalidInputError("unit part must be prime to p")
        rho = teichmuller(unit, ctx)
        u_q = ctx.scalar(unit) / rho
        return cls(ctx, ord, unit, rho, u_q, iwasawa_log(ctx.scalar(unit)))

    def value(self) -> PadicScalar:
        return self.ctx.scalar(self.unit) * self.ctx.scalar(self.ctx.p) ** self.ord

    def slope(self) -> PadicScalar:
        """log_p(q)/ord_p(q), the quantity the derivative formula outputs."""
        return self.log / self.ord


class UnitFunctional:
    """Trace densities E_0..E_n plus the valuation slope alpha."""

    def __init__(self, tower: CycloTower, densities, alpha: PadicScalar):
        self.tower = tower
        self.densities = list(densities)
        self.n = len(densities) - 1
        self.alpha = alpha

    # -- constructors ----------------------------------------------------------

    @classmethod
    def from_top_density(cls, tower: CycloTower, top: CycloElement, q: TateParameter):
        """Back-propagate partial traces from the level-n density, then fix
        alpha by the admissibility constraint w_0(q) = 0."""
        n = top.field.n
        densities = [None] * (n + 1)
        densities[n] = top
        for m in range(n - 1, -1, -1):
            densities[m] = tower.trace(densities[m + 1], m)
        e0 = densities[0].scalar_part()
        alpha = -(e0 * q.log) / q.ord
        return cls(tower, densities, alpha)

    @classmethod
    def seeded(cls, tower: CycloTower, n: int, q: TateParameter, seed: int):
        rng = random.Random(seed)
        ctx = tower.ctx
        span = ctx.pk(ctx.prec)
        coords = [rng.randrange(span) for _ in range(ctx.p**n)]
        top = tower.from_pi_coords(n, coords)
        return cls.from_top_density(tower, top, q)

    @classmethod
    def trace_type(cls, tower: CycloTower, n: int, e0, q: TateParameter):
        """The pure trace-compatible family E_m = E_0 / p^m (constants)."""
        ctx = tower.ctx
        e0 = e0 if isinstance(e0, PadicScalar) else ctx.scalar(e0)
        densities = []
        for m in range(n + 1):
            densities.append(
                tower.field(m).from_scalar(e0 * ctx.scalar(Fraction(1, ctx.p**m)))
            )
        alpha = -(e0 * q.log) / q.ord
        return cls(tower, densities, alpha)

    @classmethod
    def zero(cls, tower: CycloTower, n: int):
        ctx = tower.ctx
        return cls(
            tower,
            [tower.field(m).zero() for m in range(n + 1)],
            ctx.zero(),
        )

    # -- views -------------------------------------------------------------------

    def density(self, m: int) -> CycloElement:
        return self.densities[m]

    def e0(self) -> PadicScalar:
        return self.densities[0].scalar_part()

    def fingerprint(self):
        """Bit-exact content, for determinism contracts."""
        out = []
        for d in self.densities:
            out.append(tuple((c.v, c.unit, c.absprec) for c in d.coords))
        a = self.alpha
        return (tuple(out), (a.v, a.unit, a.absprec))

    def check_tower_compatibility(self, threshold=None):
        thr = self.tower.ctx.prec - 2 if threshold is None else threshold
        for m in range(1, self.n + 1):
            resid = (self.tower.trace(self.densities[m], m - 1) - self.densities[m - 1]).min_valuation()
            if resid < thr:
                raise InvalidInputError(
                    f"densities are not trace-compatible at level {m}"
                    f" (valuation {resid})"
                )
        return True


def pair(x: CycloElement, w: UnitFunctional, m: int) -> PadicScalar:
    """w_m(x) = Tr_{k_m/Q_p}(log_p(x) E_m) + alpha v(x), v(p) = 1."""
    tower = w.tower
    ctx = tower.ctx
    v = tower.exact_valuation(x)
    if v is None:
        raise InvalidInputError("pairing against zero")
    logx = tower.log_element(x)
    out = tower.trace_kn_to_qp(logx * w.density(m))
    if v != 0:
        out = out + w.alpha * ctx.scalar(v)
    return out


def pair_qp(y: PadicScalar, w: UnitFunctional) -> PadicScalar:
    """The level-0 pairing on Q_p^x."""
    ctx = w.tower.ctx
    e0 = w.e0()
    out = e0 * iwasawa_log(y)
    if y.v != 0:
        out = out + w.alpha * y.v
    return out


class GroupRingElement:
    """An element of Z_p[Gamma_n]; index i stands for gamma^i."""

    __slots__ = ("tower", "n", "coeffs")

    def __init__(self, tower: CycloTower, n: int, coeffs):
        self.tower = tower
        self.n = n
        self.coeffs = list(coeffs)
        assert len(self.coeffs) == tower.ctx.p**n

    def __add__(self, other):
        return GroupRingElement(
            self.tower, self.n, [a + b for a, b in zip(self.coeffs, other.coeffs)]
        )

    def __sub__(self, other):
        return GroupRingElement(
            self.tower, self.n, [a - b for a, b in zip(self.coeffs, other.coeffs)]
        )

    def __mul__(self, other):
        pn = len(self.coeffs)
        out = [self.tower.ctx.zero() for _ in range(pn)]
        for i, a in enumerate(self.coeffs):
            if a.is_zero:
                continue
            for j, b in enumerate(other.coeffs):
                if not b.is_zero:
                    k = (i + j) % pn
                    out[k] = out[k] + a * b
        return GroupRingElement(self.tower, self.n, out)

    def scale(self, s):
        return GroupRingElement(self.tower, self.n, [c * s for c in self.coeffs])

    def gamma_shift(self, t: int):
        """Multiplication by gamma^t."""
        pn = len(self.coeffs)
        return GroupRingElement(
            self.tower, self.n, [self.coeffs[(i - t) % pn] for i in range(pn)]
        )

    def augmentation(self) -> PadicScalar:
        acc = self.tower.ctx.zero()
        for c in self.coeffs:
            acc = acc + c
        return acc

    def project(self, m: int) -> "GroupRingElement":
        """Push along Gamma_n -> Gamma_m."""
        if m > self.n:
            raise InvalidInputError("cannot project upwards")
        pm = self.tower.ctx.p**m
        out = [self.tower.ctx.zero() for _ in range(pm)]
        for i, c in enumerate(self.coeffs):
            out[i % pm] = out[i % pm] + c
        return GroupRingElement(self.tower, m, out)

    def to_polynomial(self):
        """Coefficients of sum_i c_i (1+X)^i, the canonical lift of degree
        < p^n under gamma -> 1 + X."""
        pn = len(self.coeffs)
        out = [self.tower.ctx.zero() for _ in range(pn)]
        for i, c in enumerate(self.coeffs):
            if c.is_zero:
                continue
            for j in range(i + 1):
                out[j] = out[j] + c * comb(i, j)
        return out

    def polynomial_derivative_at_zero(self) -> PadicScalar:
        """P'(0) for the canonical polynomial lift: sum_i i c_i."""
        acc = self.tower.ctx.zero()
        for i, c in enumerate(self.coeffs):
            if i and not c.is_zero:
                acc = acc + c * i
        return acc

    def residual_against(self, other) -> Fraction:
        return min(
            (a - b).min_valuation() for a, b in zip(self.coeffs, other.coeffs)
        )


def coleman_level(w: UnitFunctional, fam: PointFamily, n: int) -> GroupRingElement:
    """sum_sigma (d_n^sigma, w) sigma over Gamma_n."""
    tower = w.tower
    logd = fam.log_d(n)
    dens = w.density(n)
    coeffs = []
    for a in tower.gamma_orbit_exponents(n):
        conj = logd.galois(a) if a != 1 else logd
        coeffs.append(tower.trace_kn_to_qp(conj * dens))
    return GroupRingElement(tower, n, coeffs)


def verify_trivial_zero(col: GroupRingElement, threshold=None) -> Fraction:
    thr = col.tower.ctx.prec - 2 if threshold is None else threshold
    aug = col.augmentation()
    v = aug.min_valuation()
    if v < thr:
        raise PropertyFailure(f"augmentation has valuation {v}, expected zero")
    return v


def verify_level_compatibility(w: UnitFunctional, fam: PointFamily, n: int) -> Fraction:
    """Pushing the level-n map to Gamma_(n-1) recovers the level-(n-1) map."""
    upper = coleman_level(w, fam, n).project(n - 1)
    lower = coleman_level(w, fam, n - 1)
    resid = upper.residual_against(lower)
    thr = w.tower.ctx.prec - 2
    if resid < thr:
        raise PropertyFailure(
            f"level compatibility fails at {n} -> {n - 1} (valuation {resid})"
        )
    return resid


def verify_convolution(w: UnitFunctional, fam: PointFamily, n: int) -> Fraction:
    """The map equals the convolution of sum log(d^sigma) sigma with
    sum sigma(E_n) sigma^(-1): each product coefficient collapses to the
    corresponding trace value."""
    tower = w.tower
    ctx = tower.ctx
    pn = ctx.p**n
    logd = fam.log_d(n)
    dens = w.density(n)
    exps = tower.gamma_orbit_exponents(n)
    A = [logd.galois(a) if a != 1 else logd for a in exps]
    B = [dens.galois(a) if a != 1 else dens for a in exps]
    col = coleman_level(w, fam, n)
    worst = None
    f = tower.field(n)
    for i in range(pn):
        acc = f.zero()
        for j in range(pn):
            acc = acc + A[j] * B[(j - i) % pn]
        resid = (acc - f.from_scalar(col.coeffs[i])).min_valuation()
        worst = resid if worst is None else min(worst, resid)
    thr = ctx.prec - 2
    if worst < thr:
        raise PropertyFailure(
            f"convolution identity fails at level {n} (valuation {worst})"
        )
    return worst


# -- characters and Gauss sums ------------------------------------------------------


@dataclass(frozen=True)
class CharacterData:
    """A character of the level-n layer group, trivial on Delta, with
    chi(gamma) = zeta_{p^j}^a; conductor p^(j+1) when j >= 1."""

    tower: CycloTower
    n: int
    j: int
    a: int

    def __post_init__(self):
        p = self.tower.ctx.p
        if self.j > self.n:
            raise InvalidInputError("character order exceeds the layer")
        if self.j > 0 and self.a % p == 0:
            raise InvalidInputError("chi(gamma) must have exact order p^j")

    @property
    def order(self) -> int:
        return self.tower.ctx.p**self.j

    @property
    def conductor_exponent(self) -> int:
        return self.j + 1 if self.j >= 1 else 0

    def is_trivial(self) -> bool:
        return self.j == 0

    def value_on_gamma_power(self, i: int) -> CycloElement:
        """chi(gamma^i) as an element of K_n."""
        f = self.tower.field(self.n)
        p = self.tower.ctx.p
        if self.j == 0:
            return f.one()
        step = p ** (self.n + 1 - self.j)  # zeta_{p^j} = zeta^(step)
        return f.zeta_power(step * (self.a * i % p**self.j))

    def value_on_exponent(self, b: int) -> CycloElement:
        """chi(sigma_b) through the Delta-Gamma factorisation."""
        g = self.tower.galois_element(self.n, b)
        return self.value_on_gamma_power(g.gamma_index)

    def conjugate(self) -> "CharacterData":
        return CharacterData(self.tower, self.n, self.j, (-self.a) % self.order if self.j else 0)


def gauss_sum(chi: CharacterData) -> CycloElement:
    """tau(chi) = sum over the full level group of chi(sigma) zeta^sigma;
    the character must have exact conductor p^(n+1)."""
    if chi.j != chi.n:
        raise InvalidInputError(
            f"conductor p^{chi.conductor_exponent} does not match level {chi.n}"
        )
    tower = chi.tower
    f = tower.field(chi.n)
    acc = f.zero()
    p = tower.ctx.p
    for b in range(1, f.modulus_order):
        if b % p == 0:
            continue
        acc = acc + chi.value_on_exponent(b) * f.zeta_power(b)
    return acc


def verify_gauss_product(chi: CharacterData) -> Fraction:
    """tau(chi) tau(chi-bar) = p^(n+1) (chi trivial on Delta has chi(-1)=1)."""
    tower = chi.tower
    ctx = tower.ctx
    t1 = gauss_sum(chi)
    t2 = gauss_sum(chi.conjugate())
    expected = tower.field(chi.n).from_scalar(ctx.pk(chi.n + 1))
    resid = (t1 * t2 - expected).min_valuation()
    if resid < ctx.prec - 2:
        raise PropertyFailure(
            f"Gauss product fails (valuation {resid})"
        )
    return resid


def verify_char_sum(fam: PointFamily, chi: CharacterData) -> Fraction:
    """sum_sigma log(d_n^sigma) chi(sigma) = tau(chi), or 0 for trivial chi."""
    tower = fam.tower
    ctx = tower.ctx
    n = chi.n
    logd = fam.log_d(n)
    f = tower.field(n)
    acc = f.zero()
    for i, a in enumerate(tower.gamma_orbit_exponents(n)):
        conj = logd.galois(a) if a != 1 else logd
        acc = acc + conj * chi.value_on_gamma_power(i)
    if chi.is_trivial():
        resid = acc.min_valuation()
        label = "trivial-character sum"
    else:
        resid = (acc - gauss_sum(chi)).min_valuation()
        label = "Gauss-sum evaluation"
    if resid < ctx.prec - 2:
        raise PropertyFailure(f"{label} fails at level {n} (valuation {resid})")
    return resid


def measure_gauss_valuation(chi: CharacterData) -> Fraction:
    """Measured (not asserted) valuation of tau(chi)."""
    return gauss_sum(chi).valuation()


def primitive_characters(tower: CycloTower, n: int):
    """All characters of exact conductor p^(n+1), trivial on Delta."""
    p = tower.ctx.p
    return [
        CharacterData(tower, n, n, a)
        for a in range(1, p**n)
        if a % p != 0
    ]


# -- the derivative chain --------------------------------------------------------------


def derivative_rep(w: UnitFunctional, sol: H90Solution, fam: PointFamily, n: int):
    """(a) the exact group-ring identity
            coleman_level(w) = (gamma^(-1) - 1) sum_sigma (x_n^sigma, w) sigma
        which holds for every functional, admissible or not; and
       (b) the derivative representative D_n = -w_0(N x_n) = -e_n alpha.

    Returns (D_n, report)."""
    tower = w.tower
    ctx = tower.ctx
    pn = ctx.p**n
    logx = tower.log_element(sol.x_n)
    vx = tower.exact_valuation(sol.x_n)
    dens = w.density(n)
    alpha_v = w.alpha * ctx.scalar(vx)
    S = []
    for a in tower.gamma_orbit_exponents(n):
        conj = logx.galois(a) if a != 1 else logx
        S.append(tower.trace_kn_to_qp(conj * dens) + alpha_v)
    rhs = GroupRingElement(
        tower, n, [S[(i + 1) % pn] - S[i] for i in range(pn)]
    )
    col = coleman_level(w, fam, n)
    resid = col.residual_against(rhs)
    thr = ctx.prec - 2
    if resid < thr:
        raise PropertyFailure(
            f"Abel summation identity fails at level {n} (valuation {resid})"
        )
    norm_x = tower.norm_kn_to_qp(sol.x_n)
    d_n = -pair_qp(norm_x, w)
    closed = -(w.alpha * sol.e)
    closed_resid = (d_n - closed).min_valuation()
    report = {
        "level": n,
        "abel_residual": resid,
        "derivative": d_n,
        "closed_form_residual": closed_resid,
    }
    return d_n, report


def verify_key2(w: UnitFunctional, q: TateParameter) -> Fraction:
    """(p, w)_0 = -(log q / ord q) E_0 exactly (the admissibility constraint
    composed with the decomposition of the Tate period)."""
    ctx = w.tower.ctx
    lhs = pair_qp(ctx.scalar(ctx.p), w)
    rhs = -(q.slope() * w.e0())
    resid = (lhs - rhs).min_valuation()
    if resid < ctx.prec - 2:
        raise PropertyFailure(f"valuation-slope identity fails ({resid})")
    return resid


def verify_dcol(
    w: UnitFunctional,
    sol: H90Solution,
    q: TateParameter,
    fam: PointFamily,
    n: int,
) -> dict:
    """D_n = [p/((p-1) log kappa(gamma))] (log q / ord q) E_0
    mod p^(n + v(alpha)): the assembled derivative congruence."""
    tower = w.tower
    ctx = tower.ctx
    d_n, rep = derivative_rep(w, sol, fam, n)
    log_kappa = iwasawa_log(ctx.scalar(tower.kappa_gamma))
    factor = ctx.scalar(ctx.p) / (log_kappa * (ctx.p - 1))
    rhs = factor * q.slope() * w.e0()
    if w.alpha.is_zero:
        # zero slope: both sides must vanish at precision
        lhs_v = d_n.min_valuation()
        rhs_v = rhs.min_valuation()
        thr = ctx.prec - 4
        if lhs_v < thr or rhs_v < thr:
            raise PropertyFailure(
                f"degenerate case fails: valuations {lhs_v}, {rhs_v}"
            )
        return {"level": n, "modulus_exponent": None, "residual_valuation": min(lhs_v, rhs_v), **rep}
    modulus = n + w.alpha.v
    diff = d_n - rhs
    if not diff.congruent_to(0, modulus):
        raise PropertyFailure(
            f"derivative congruence fails at level {n}: valuation "
            f"{diff.min_valuation()}, needed >= {modulus}"
        )
    return {
        "level": n,
        "modulus_exponent": modulus,
        "residual_valuation": diff.min_valuation(),
        **rep,
    }


def negative_control(
    fam: PointFamily,
    sol: H90Solution,
    q: TateParameter,
    n: int = 2,
    e0=1,
) -> dict:
    """The pure trace-type family is admissible levelwise yet fails the
    mod-p^2 comparison between the polynomial lift's derivative and D_n;
    the violation is asserted to occur.

    Levelwise admissibility is therefore strictly weaker than membership
    in the image of the compatible-family map.
    """
    tower = fam.tower
    ctx = tower.ctx
    w = UnitFunctional.trace_type(tower, n, e0, q)
    w.check_tower_compatibility()
    col = coleman_level(w, fam, n)
    col_floor = min(c.min_valuation() for c in col.coeffs)
    if col_floor < ctx.prec - 4:
        raise PropertyFailure(
            f"trace-type image unexpectedly nonzero (valuation {col_floor})"
        )
    d_n, rep = derivative_rep(w, sol, fam, n)
    p_prime_zero = col.polynomial_derivative_at_zero()
    diff = p_prime_zero - d_n
    if diff.congruent_to(0, 2):
        raise PropertyFailure(
            "negative control failed to fail: the finite-level lift"
            " derivative matched D_n mod p^2"
        )
    return {
        "level": n,
        "violated": True,
        "difference_valuation": diff.min_valuation(),
        "lift_derivative": p_prime_zero,
        "derivative": d_n,
        "abel_residual": rep["abel_residual"],
    }
