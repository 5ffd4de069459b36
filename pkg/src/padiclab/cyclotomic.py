"""Arithmetic in the cyclotomic tower K_n = Q_p(zeta_{p^(n+1)}).

Elements are coefficient vectors over the power basis zeta^0..zeta^(d-1),
d = p^n (p-1).  The n-th layer k_n of the Z_p-extension sits inside K_n
as the subspace fixed by the torsion subgroup Delta = mu_{p-1}; it is
detected by Galois invariance and coordinatised by powers of the
canonical uniformizer pi_n.
"""

from __future__ import annotations

from fractions import Fraction

from .core import (
    ConvergenceError,
    InvalidInputError,
    PadicScalar,
    PrecisionError,
    PrimeContext,
    mpz,
)
from .series import TruncatedSeries, _pack


class CycloField:
    """The field Q_p(zeta_{p^level}) with level = n + 1."""

    def __init__(self, ctx: PrimeContext, n: int):
        self.ctx = ctx
        self.n = n
        self.level = n + 1
        p = ctx.p
        self.modulus_order = p**self.level
        self.degree = p**n * (p - 1)
        self._reduction = self._build_reduction()
        self._trace_table = self._build_trace_table()

    def _build_reduction(self):
        """zeta^k as a signed sum of basis monomials, k in [0, p^(level))."""
        p, d = self.ctx.p, self.degree
        pn = p**self.n
        rows = []
        for k in range(self.modulus_order):
            if k < d:
                rows.append(((k, 1),))
            else:
                # zeta^((p-1)p^n) = -(1 + zeta^(p^n) + ... + zeta^((p-2)p^n))
                r = k - d
                rows.append(tuple((r + j * pn, -1) for j in range(p - 1)))
        return rows

    def _build_trace_table(self):
        """Tr_{K_n/Q_p}(zeta^j): d at j=0, -p^n on exact order p, else 0."""
        p, d = self.ctx.p, self.degree
        pn = p**self.n
        table = [0] * d
        table[0] = d
        for j in range(pn, d, pn):
            # zeta^j has exact order p iff p^n | j (and j != 0 in range)
            table[j] = -(p**self.n)
        return table

    # -- constructors -------------------------------------------------------

    def zero(self, absprec=None) -> "CycloElement":
        z = self.ctx.zero(absprec)
        return CycloElement(self, (z,) * self.degree)

    def one(self, absprec=None) -> "CycloElement":
        return self.from_scalar(self.ctx.one(absprec))

    def from_scalar(self, s) -> "CycloElement":
        s = s if isinstance(s, PadicScalar) else self.ctx.scalar(s)
        z = self.ctx.zero(s.absprec)
        return CycloElement(self, (s,) + (z,) * (self.degree - 1))

    def from_coords(self, coords) -> "CycloElement":
        if len(coords) != self.degree:
            raise InvalidInputError("coordinate vector has wrong length")
        return CycloElement(self, tuple(coords))

    def from_int_coords(self, ints, absprec=None) -> "CycloElement":
        return CycloElement(
            self, tuple(self.ctx.scalar(c, absprec) for c in ints)
        )

    def zeta(self, absprec=None) -> "CycloElement":
        z = self.ctx.zero(absprec)
        o = self.ctx.one(absprec)
        coords = [z] * self.degree
        coords[1] = o
        return CycloElement(self, tuple(coords))

    def zeta_power(self, k: int, absprec=None) -> "CycloElement":
        z = self.ctx.zero(absprec)
        coords = [z] * self.degree
        o = self.ctx.one(absprec)
        for idx, sign in self._reduction[k % self.modulus_order]:
            coords[idx] = o if sign > 0 else -o
        return CycloElement(self, tuple(coords))

    def delta_exponents(self):
        """Teichmuller lifts of 1..p-1 reduced mod p^level."""
        ctx = self.ctx
        return tuple(
            ctx.teichmuller_int(r, self.level) % self.modulus_order
            for r in range(1, ctx.p)
        )

    # -- packed kernels -------------------------------------------------------

    def mul_packed(self, A, B):
        ctx = self.ctx
        da, ea, ia = A
        db, eb, ib = B
        value_prec = min(ea - da - db, eb - db - da)
        d = da + db
        e = value_prec + d
        if e <= 0:
            raise PrecisionError("product below zero precision", achieved=value_prec)
        m = ctx.pk(e)
        n = len(ia) + len(ib) - 1
        zero = mpz(0)
        conv = [zero] * n
        for i, ci in enumerate(ia):
            if ci == 0:
                continue
            for j, cj in enumerate(ib):
                if cj:
                    conv[i + j] += ci * cj
        out = [zero] * self.degree
        red = self._reduction
        mo = self.modulus_order
        for k, c in enumerate(conv):
            if c == 0:
                continue
            for idx, sign in red[k % mo]:
                out[idx] += c if sign > 0 else -c
        return d, e, [c % m for c in out]

    def galois_packed(self, A, a: int):
        d, e, ints = A
        m = self.ctx.pk(e)
        out = [mpz(0)] * self.degree
        red = self._reduction
        mo = self.modulus_order
        for j, c in enumerate(ints):
            if c == 0:
                continue
            for idx, sign in red[a * j % mo]:
                out[idx] += c if sign > 0 else -c
        return d, e, [c % m for c in out]


class CycloElement:
    __slots__ = ("field", "coords")

    def __init__(self, field: CycloField, coords):
        self.field = field
        self.coords = tuple(coords)

    @property
    def ctx(self) -> PrimeContext:
        return self.field.ctx

    # -- linear structure -----------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        return CycloElement(
            self.field, tuple(a + b for a, b in zip(self.coords, other.coords))
        )

    def __sub__(self, other):
        other = self._coerce(other)
        return CycloElement(
            self.field, tuple(a - b for a, b in zip(self.coords, other.coords))
        )

    def __neg__(self):
        return CycloElement(self.field, tuple(-a for a in self.coords))

    def scale(self, s) -> "CycloElement":
        return CycloElement(self.field, tuple(a * s for a in self.coords))

    def _coerce(self, other):
        if isinstance(other, CycloElement):
            if other.field.level != self.field.level:
                raise InvalidInputError("level mismatch between cyclotomic elements")
            return other
        return self.field.from_scalar(
            other if isinstance(other, PadicScalar) else self.ctx.scalar(other)
        )

    # -- multiplicative structure ------------------------------------------------

    def __mul__(self, other):
        other = self._coerce(other)
        packed = self.field.mul_packed(_pack(self.coords), _pack(other.coords))
        return self.field.from_coords(_unpack_coords(self.ctx, packed))

    def __pow__(self, k: int):
        if k < 0:
            return (self.inverse()) ** (-k)
        result = self.field.one(max(c.absprec for c in self.coords))
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def inverse(self) -> "CycloElement":
        """x^(-1) = (product of the other conjugates) / N(x)."""
        others = None
        for a in _unit_exponents(self.field):
            if a == 1:
                continue
            conj = self.galois(a)
            others = conj if others is None else others * conj
        full = others * self
        norm = full.coords[0]
        floor = min(c.min_valuation() for c in full.coords[1:])
        if not norm.is_zero and floor < norm.v + self.ctx.prec - 4:
            raise PrecisionError(
                "norm did not collapse to Q_p at working precision",
                achieved=floor,
            )
        return others.scale(norm.inverse())

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    # -- Galois action -------------------------------------------------------------

    def galois(self, a: int) -> "CycloElement":
        """The automorphism zeta -> zeta^a applied coefficientwise."""
        if a % self.ctx.p == 0:
            raise InvalidInputError("Galois exponent must be prime to p")
        packed = self.field.galois_packed(_pack(self.coords), a)
        return self.field.from_coords(_unpack_coords(self.ctx, packed))

    # -- invariants ------------------------------------------------------------------

    def trace_to_qp(self) -> PadicScalar:
        """Absolute trace from K_n, by the exact basis trace table."""
        acc = self.ctx.zero(max(c.absprec for c in self.coords))
        for c, t in zip(self.coords, self.field._trace_table):
            if t:
                acc = acc + c * t
        return acc

    def residue(self) -> int:
        """Image in the residue field F_p (the tower is totally ramified)."""
        r = 0
        for c in self.coords:
            r += c.residue()
        return r % self.ctx.p

    def min_valuation(self):
        """Lower bound for the valuation, v(p) = 1 (cheap, coordinatewise)."""
        return Fraction(min(c.min_valuation() for c in self.coords))

    def reduce_absprec(self, absprec) -> "CycloElement":
        return CycloElement(
            self.field, tuple(c.reduce_absprec(absprec) for c in self.coords)
        )

    def valuation(self):
        """Exact valuation as a Fraction, or None for zero at precision."""
        norm = self
        for a in _unit_exponents(self.field):
            if a != 1:
                norm = norm * self.galois(a)
        c0 = norm.coords[0]
        if c0.is_zero:
            return None
        return Fraction(c0.v, self.field.degree)

    def is_zero_at(self, threshold) -> bool:
        return self.min_valuation() >= threshold

    def residual_valuation(self, other=None):
        d = self if other is None else self - other
        return d.min_valuation()

    def scalar_part(self, threshold=None) -> PadicScalar:
        """Extract the Q_p value of an element supported on zeta^0."""
        thr = self.ctx.prec - 2 if threshold is None else threshold
        for c in self.coords[1:]:
            if c.min_valuation() < thr:
                raise PrecisionError(
                    f"element is not rational at precision {thr}",
                    achieved=c.min_valuation(),
                )
        return self.coords[0]

    def __repr__(self):
        nz = [(i, c) for i, c in enumerate(self.coords) if not c.is_zero]
        body = " + ".join(f"({c!r})*z^{i}" for i, c in nz[:3])
        more = " + ..." if len(nz) > 3 else ""
        return f"CycloElement(level={self.field.level}; {body or '0'}{more})"


def _unpack_coords(ctx, packed):
    d, e, ints = packed
    absprec = e - d
    return tuple(PadicScalar._make(ctx, -d, c % ctx.pk(e), absprec) for c in ints)


def _unit_exponents(field: CycloField):
    p = field.ctx.p
    return tuple(a for a in range(1, field.modulus_order) if a % p)


class GaloisElement:
    """An automorphism sigma_a with its Delta/Gamma factorisation."""

    __slots__ = ("field", "a", "omega_part", "gamma_part", "gamma_index")

    def __init__(self, field: CycloField, a: int, gamma_exponent: int):
        a %= field.modulus_order
        if a % field.ctx.p == 0:
            raise InvalidInputError("exponent must be a unit mod p^(n+1)")
        self.field = field
        self.a = a
        ctx = field.ctx
        mo = field.modulus_order
        self.omega_part = ctx.teichmuller_int(a, field.level) % mo
        self.gamma_part = a * pow(self.omega_part, -1, mo) % mo
        self.gamma_index = _discrete_gamma_log(ctx, self.gamma_part, gamma_exponent, field.n)

    def apply(self, x: CycloElement) -> CycloElement:
        return x.galois(self.a)


def _discrete_gamma_log(ctx, b: int, g: int, n: int) -> int:
    """i with g^i = b in (1 + pZ)/(1 + p^(n+1)Z), via the scalar logarithm."""
    if n == 0:
        return 0
    absprec = n + 4
    lb = iwasawa_log_int(ctx, b, absprec)
    lg = iwasawa_log_int(ctx, g, absprec)
    ratio = lb / lg
    return ratio.lift() % ctx.p**n


def iwasawa_log_int(ctx, u: int, absprec: int) -> PadicScalar:
    from .core import iwasawa_log

    return iwasawa_log(ctx.scalar(u, absprec + 2))


class CycloTower:
    """Shared context for levels 0..n_max and the k_n-layer machinery."""

    def __init__(self, ctx: PrimeContext, n_max: int, kappa_gamma: int | None = None):
        self.ctx = ctx
        self.n_max = n_max
        kg = (1 + ctx.p) if kappa_gamma is None else kappa_gamma
        if kg % ctx.p != 1 or kg == 1:
            raise InvalidInputError(
                "kappa(gamma) must lie in 1 + pZ_p and generate topologically"
            )
        if iwasawa_log_int(ctx, kg, 6).valuation != 1:
            raise InvalidInputError("kappa(gamma) must be a topological generator")
        self.kappa_gamma = kg
        self._fields = {}
        self._pi = {}
        self._pi_basis = {}
        self._log_cache = {}

    def field(self, n: int) -> CycloField:
        if n not in self._fields:
            self._fields[n] = CycloField(self.ctx, n)
        return self._fields[n]

    # -- Galois --------------------------------------------------------------------

    def gamma_exponent(self, n: int, power: int = 1) -> int:
        mo = self.field(n).modulus_order
        return pow(self.kappa_gamma, power, mo)

    def gamma_apply(self, x: CycloElement, power: int = 1) -> CycloElement:
        return x.galois(self.gamma_exponent(x.field.n, power))

    def gamma_orbit_exponents(self, n: int):
        """kappa(gamma)^i mod p^(n+1) for i = 0..p^n - 1 (coset reps of Delta)."""
        mo = self.field(n).modulus_order
        out = []
        a = 1
        for _ in range(self.ctx.p**n):
            out.append(a)
            a = a * self.kappa_gamma % mo
        return out

    def galois_element(self, n: int, a: int) -> GaloisElement:
        return GaloisElement(self.field(n), a, self.kappa_gamma)

    def delta_project(self, x: CycloElement) -> CycloElement:
        f = x.field
        acc = None
        for a in f.delta_exponents():
            t = x.galois(a)
            acc = t if acc is None else acc + t
        return acc.scale(Fraction(1, self.ctx.p - 1))

    def is_delta_fixed(self, x: CycloElement, threshold=None) -> bool:
        thr = self.ctx.prec - 2 if threshold is None else threshold
        for a in x.field.delta_exponents():
            if a == 1:
                continue
            if (x.galois(a) - x).min_valuation() < thr:
                return False
        return True

    # -- embeddings and relative maps --------------------------------------------------

    def embed(self, x: CycloElement, n: int) -> CycloElement:
        """Include K_m into K_n via zeta_{p^(m+1)} = zeta^(p^(n-m))."""
        m = x.field.n
        if m == n:
            return x
        if m > n:
            raise InvalidInputError("cannot embed downwards")
        f = self.field(n)
        step = self.ctx.p ** (n - m)
        z = self.ctx.zero(min(c.absprec for c in x.coords))
        coords = [z] * f.degree
        for j, c in enumerate(x.coords):
            coords[j * step] = c
        return CycloElement(f, tuple(coords))

    def restrict(self, x: CycloElement, m: int, threshold=None) -> CycloElement:
        """Extract an element supported on the level-m subfield."""
        n = x.field.n
        if m == n:
            return x
        step = self.ctx.p ** (n - m)
        thr = self.ctx.prec - 2 if threshold is None else threshold
        fm = self.field(m)
        coords = []
        for j, c in enumerate(x.coords):
            if j % step == 0:
                coords.append(c)
            elif c.min_valuation() < thr:
                raise PrecisionError(
                    f"element does not descend to level {m}"
                    f" (coord {j} has valuation {c.min_valuation()})",
                    achieved=c.min_valuation(),
                )
        return fm.from_coords(coords[: fm.degree])

    def rel_exponents(self, n: int, m: int):
        """Exponents of Gal(K_n/K_m): a = 1 mod p^(m+1)."""
        mo = self.field(n).modulus_order
        step = self.ctx.p ** (m + 1)
        return tuple((1 + s * step) % mo for s in range(self.ctx.p ** (n - m)))

    def trace(self, x: CycloElement, m: int) -> CycloElement:
        """Tr_{K_n/K_m} (= Tr_{k_n/k_m} on Delta-fixed elements)."""
        n = x.field.n
        if m > n:
            raise InvalidInputError("target level above source level")
        acc = None
        for a in self.rel_exponents(n, m):
            t = x.galois(a) if a != 1 else x
            acc = t if acc is None else acc + t
        return self.restrict(acc, m)

    def norm(self, x: CycloElement, m: int) -> CycloElement:
        n = x.field.n
        if m > n:
            raise InvalidInputError("target level above source level")
        acc = None
        for a in self.rel_exponents(n, m):
            t = x.galois(a) if a != 1 else x
            acc = t if acc is None else acc * t
        return self.restrict(acc, m)

    def trace_kn_to_qp(self, x: CycloElement) -> PadicScalar:
        """Tr_{k_n/Q_p} for Delta-fixed x: absolute trace divided by p-1."""
        return x.trace_to_qp() / (self.ctx.p - 1)

    def norm_kn_to_qp(self, x: CycloElement) -> PadicScalar:
        """N_{k_n/Q_p}: product over the Gamma_n coset representatives."""
        acc = None
        for a in self.gamma_orbit_exponents(x.field.n):
            t = x.galois(a) if a != 1 else x
            acc = t if acc is None else acc * t
        return acc.scalar_part()

    # -- the canonical uniformizer and k_n coordinates -----------------------------------

    def uniformizer(self, n: int) -> CycloElement:
        """pi_n = prod_{delta in Delta} (zeta^delta - 1), a uniformizer of k_n."""
        if n not in self._pi:
            f = self.field(n)
            one = f.one()
            acc = None
            for a in f.delta_exponents():
                t = f.zeta_power(a) - one
                acc = t if acc is None else acc * t
            self._pi[n] = acc
        return self._pi[n]

    def pi_basis(self, n: int):
        """Powers pi^0..pi^(p^n - 1): a Z_p-basis of O_{k_n}."""
        if n not in self._pi_basis:
            pi = self.uniformizer(n)
            f = self.field(n)
            basis = [f.one()]
            for _ in range(self.ctx.p**n - 1):
                basis.append(basis[-1] * pi)
            self._pi_basis[n] = basis
        return self._pi_basis[n]

    def to_pi_coords(self, x: CycloElement):
        """Coordinates of x in the pi-power basis of k_n (x must lie in k_n)."""
        n = x.field.n
        basis = self.pi_basis(n)
        cols = [b.coords for b in basis]
        return solve_columns(self.ctx, cols, x.coords)

    def from_pi_coords(self, n: int, coeffs) -> CycloElement:
        basis = self.pi_basis(n)
        acc = self.field(n).zero()
        for c, b in zip(coeffs, basis):
            c = c if isinstance(c, PadicScalar) else self.ctx.scalar(c)
            acc = acc + b.scale(c)
        return acc

    # -- logarithm and exponential -----------------------------------------------------

    def exact_valuation(self, x: CycloElement):
        """Exact valuation, robust against norm underflow.

        The norm route resolves v whenever the conjugate product is
        nonzero at precision; otherwise the pi-adic expansion is used
        for members of k_n, where the candidate valuations i/p^n + v_p(c_i)
        are pairwise distinct so their minimum is exact.
        """
        v = x.valuation()
        if v is not None:
            return v
        try:
            coords = self.to_pi_coords(x)
        except PrecisionError:
            return None
        pn = self.ctx.p ** x.field.n
        best = None
        unresolved = None
        for i, c in enumerate(coords):
            if c.is_zero:
                bound = Fraction(i, pn) + c.absprec
                unresolved = bound if unresolved is None else min(unresolved, bound)
            else:
                cand = Fraction(i, pn) + c.v
                best = cand if best is None else min(best, cand)
        if best is None or (unresolved is not None and unresolved <= best):
            return None
        return best

    def log_zeta_minus_one(self, n: int) -> CycloElement:
        """log(zeta - 1) = log((zeta-1)^d / p) / d: the peeled-off part of
        every logarithm on K_n^x (log p = 0 on the Iwasawa branch)."""
        key = ("log_z1", n)
        if key not in self._log_cache:
            f = self.field(n)
            z1 = f.zeta() - f.one()
            u0 = (z1**f.degree).scale(Fraction(1, self.ctx.p))
            self._log_cache[key] = self._log_unit(u0).scale(Fraction(1, f.degree))
        return self._log_cache[key]

    def log_element(self, x: CycloElement) -> CycloElement:
        """Iwasawa logarithm on K_n^x: kills torsion, log(p) = 0.

        The (zeta-1)-power carrying the valuation is peeled off first, so
        precision never pays for large valuations; the unit part is
        handled by Teichmuller stripping and the contracted log series.
        """
        v = self.exact_valuation(x)
        if v is None:
            raise InvalidInputError("log of zero at working precision")
        f = x.field
        if v == 0:
            return self._log_unit(x)
        k = v * f.degree
        assert k.denominator == 1, "valuation denominator must divide the degree"
        k = int(k)
        z1 = f.zeta() - f.one()
        if k > 0:
            unit_part = x * (z1.inverse() ** k)
        else:
            unit_part = x * z1 ** (-k)
        return self._log_unit(unit_part) + self.log_zeta_minus_one(f.n).scale(k)

    def _log_unit(self, y: CycloElement) -> CycloElement:
        """log on units: strip the Teichmuller part, contract into 1 + pO
        by p-powerings, run the series, divide the powers back out."""
        r = y.residue()
        if r == 0:
            raise PrecisionError("unit part collapsed; raise working precision")
        omega = self.ctx.teichmuller_int(r, min(c.absprec for c in y.coords))
        y = y.scale(self.ctx.scalar(1) / self.ctx.scalar(omega))
        j = 0
        max_j = 3 * (y.field.n + 4)
        one = y.field.one()
        while (y - one).min_valuation() < 1:
            y = y**self.ctx.p
            j += 1
            if j > max_j:
                raise ConvergenceError("principal part failed to contract")
        s = self.ctx.p**j
        h = y - one
        # log(1+h) with v(h) >= 1: term k has valuation >= k v(h) - v_p(k)
        target = min(c.absprec for c in h.coords)
        vh = h.min_valuation()
        kmax = int(Fraction(target + 8) / vh) + 4
        acc = y.field.zero(target)
        power = h
        for k in range(1, kmax + 1):
            acc = acc + power.scale(Fraction((-1) ** (k - 1), k))
            if power.min_valuation() >= target:
                break
            power = power * h
        # the skipped tail is below target only up to the 1/k denominators
        return acc.scale(Fraction(1, s)).reduce_absprec(
            target - _vbound(kmax, self.ctx.p) - j
        )

    def principal_power(self, x: CycloElement, exponent) -> CycloElement:
        """x^a for a principal unit x and a in Z_p, by the binomial series
        sum C(a, m) (x-1)^m (the unique principal-unit root/power)."""
        if x.residue() != 1:
            raise InvalidInputError("principal power needs x = 1 mod the maximal ideal")
        ctx = self.ctx
        h = x - x.field.one()
        v = h.valuation()
        if v is None:
            return x.field.one()
        target = min(c.absprec for c in x.coords)
        acc = x.field.one()
        term = x.field.one()
        bound = int(target / v) + 8
        # the multiply/divide chain for C(a, m) sheds v_p(m!) digits, so an
        # exact exponent is embedded with that much headroom up front
        from .core import factorial_valuation

        elevated = target + factorial_valuation(bound + 16, ctx.p) + 16
        if isinstance(exponent, PadicScalar):
            a = exponent
        else:
            a = ctx.scalar(exponent, elevated)
        if not a.is_zero and a.v < 0:
            raise InvalidInputError("exponent must lie in Z_p")
        binom = ctx.scalar(1, elevated)
        m = 1
        while True:
            binom = binom * (a - (m - 1)) / m
            term = term * h
            if m * v >= target:
                break
            acc = acc + term.scale(binom)
            m += 1
            if m > bound + 16:
                raise ConvergenceError("binomial power failed to converge")
        return acc

    def exp_element(self, x: CycloElement) -> CycloElement:
        """exp on the region v(x) > 1/(p-1).

        exp is 1-Lipschitz there, so the series is run on an exact lift
        of the coordinates with factorial headroom and the result is
        truncated back to the input precision.
        """
        v = self.exact_valuation(x)
        if v is None:
            return x.field.one()
        margin = v - Fraction(1, self.ctx.p - 1)
        if margin <= 0:
            raise InvalidInputError(
                f"exp needs v(x) > 1/(p-1); got v = {v}"
            )
        from .core import factorial_valuation

        honest = min(c.absprec for c in x.coords)
        bound = int(Fraction(honest + 8) / margin) + 8
        elevated = honest + factorial_valuation(bound + 16, self.ctx.p) + 16
        lifted = x.field.from_coords(
            tuple(self.ctx.scalar(c.lift(), elevated) for c in x.coords)
        )
        target = honest + 4
        acc = lifted.field.one(elevated)
        term = lifted.field.one(elevated)
        k = 1
        while True:
            term = (term * lifted).scale(Fraction(1, k))
            if term.min_valuation() >= target:
                break
            acc = acc + term
            k += 1
            if k > bound + 16:
                raise ConvergenceError("element exp failed to converge")
        return acc.reduce_absprec(honest - 1)

    # -- series evaluation ----------------------------------------------------------------

    def eval_series(self, f: TruncatedSeries, x: CycloElement) -> CycloElement:
        """sum f_m x^m with the truncation adequacy check M v(x) >= prec."""
        v = x.valuation()
        if v is None:
            return x.field.from_scalar(f.constant_term())
        if v <= 0:
            raise InvalidInputError("series evaluation needs v(x) > 0")
        needed = int(self.ctx.prec / v) + 1
        if f.order < needed:
            raise PrecisionError(
                f"truncation order {f.order} insufficient at v = {v};"
                f" need at least {needed}",
                achieved=f.order,
            )
        field = x.field
        xp = _pack(x.coords)
        dx = xp[0]
        if dx != 0:
            raise InvalidInputError("series evaluation needs an integral point")
        denom = 0
        for c in f.coeffs:
            if c.unit != 0 and c.v < -denom:
                denom = -c.v
        coeff_prec = min(c.absprec for c in f.coeffs)
        e = coeff_prec + denom
        m = self.ctx.pk(e)

        def coeff_int(c):
            if c.unit == 0:
                return mpz(0)
            return mpz(c.unit) * self.ctx.pk(c.v + denom) % m

        acc = (denom, e, [coeff_int(f.coeffs[-1])] + [mpz(0)] * (field.degree - 1))
        for i in range(f.order - 1, -1, -1):
            acc = field.mul_packed(acc, xp)
            da, ea, ints = acc
            ma = self.ctx.pk(ea)
            c = f.coeffs[i]
            if c.unit != 0:
                shift = c.v + da
                if shift < 0:
                    raise PrecisionError("coefficient scale underflow")
                ints[0] = (ints[0] + c.unit * self.ctx.pk(shift)) % ma
            acc = (da, ea, ints)
        return field.from_coords(_unpack_coords(self.ctx, acc))

    # -- Gamma-equivariant linear solving ---------------------------------------------------

    def gamma_solve(self, v: CycloElement) -> CycloElement:
        """Solve (gamma - 1) y = v in k_n; needs Tr_{k_n/Q_p}(v) = 0.

        The kernel of gamma - 1 is Q_p, so the solution is normalised to
        have zero coefficient on pi^0.
        """
        n = v.field.n
        tr = self.trace_kn_to_qp(v)
        if not tr.is_zero and tr.v < self.ctx.prec - 2:
            raise InvalidInputError(
                f"gamma_solve needs trace zero; got valuation {tr.min_valuation()}"
            )
        basis = self.pi_basis(n)[1:]
        cols = []
        for b in basis:
            cols.append((self.gamma_apply(b) - b).coords)
        sol = solve_columns(self.ctx, cols, v.coords)
        y = self.field(n).zero()
        for c, b in zip(sol, basis):
            y = y + b.scale(c)
        resid = (self.gamma_apply(y) - y - v).min_valuation()
        if resid < self.ctx.prec - 2:
            raise PrecisionError(
                f"gamma_solve residual only reaches valuation {resid}",
                achieved=resid,
            )
        return y


def _vbound(k: int, p: int) -> int:
    b = 0
    q = p
    while q <= k + 1:
        b += 1
        q *= p
    return b


def _int_vp(s: int, p: int) -> int:
    v = 0
    while s % p == 0:
        s //= p
        v += 1
    return v


def solve_columns(ctx, cols, rhs, consistency_threshold=None):
    """Solve sum_c x_c * cols[c] = rhs by exact Gauss-Jordan elimination.

    Pivots on minimal valuation; raises PrecisionError when the system
    is inconsistent at the achievable precision.  Returns the PadicScalar
    coefficient list.
    """
    rows = len(rhs)
    ncols = len(cols)
    A = [[cols[c][r] for c in range(ncols)] + [rhs[r]] for r in range(rows)]
    thr = ctx.prec - 2 if consistency_threshold is None else consistency_threshold
    pivot_of_col = {}
    used = set()
    for c in range(ncols):
        best, bestval = None, None
        for r in range(rows):
            if r in used:
                continue
            entry = A[r][c]
            if entry.is_zero:
                continue
            if bestval is None or entry.v < bestval:
                best, bestval = r, entry.v
        if best is None:
            continue
        used.add(best)
        pivot_of_col[c] = best
        prow = A[best]
        pivot = prow[c]
        for r in range(rows):
            if r == best:
                continue
            factor = A[r][c] / pivot
            if factor.is_zero:
                continue
            A[r] = [
                A[r][j] - factor * prow[j] if (not prow[j].is_zero) else A[r][j]
                for j in range(ncols + 1)
            ]
    # consistency on rows without pivots
    for r in range(rows):
        if r in used:
            continue
        if A[r][ncols].min_valuation() < thr:
            raise PrecisionError(
                "linear system inconsistent at precision"
                f" (residual valuation {A[r][ncols].min_valuation()})",
                achieved=A[r][ncols].min_valuation(),
            )
    out = []
    for c in range(ncols):
        r = pivot_of_col.get(c)
        if r is None:
            out.append(ctx.zero())
        else:
            out.append(A[r][ncols] / A[r][c])
    return out
