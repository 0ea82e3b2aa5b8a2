"""
subfield.py

Construction of the function field the codes live on: the subfield
E = F_q(T)(mu) of the M-torsion cyclotomic function field fixed by
H = F_q^* x (F_r[T]/M)^*, together with everything the encoder and
decoder need from it:

 - the minimal polynomial h(Z) of mu over R_T = F_q[T] (monic, degree b,
   Eisenstein at M),
 - the automorphism action sigma_A(mu), stored as a mu-polynomial
   numerator over a common denominator in F_q[T] (the denominator is 1
   whenever R_T[mu] is integrally closed, e.g. for binomial M; for
   general M the power basis of mu can fail to span the integral closure
   and honest denominators appear),
 - the table of values of mu at the degree-one places above T - beta,
   ordered by the inverse automorphism orbit,
 - the residue field at the unique place above A.

The build never expands the conjugate products symbolically.  Instead it
specializes (T, lam) at points t0 in an extension F_{q^K} whose minimal
polynomial P over F_q is congruent to 1 mod M.  At such points the
residue Frobenius acts trivially on the M-torsion, so the specialized
torsion polynomial splits into linear factors and a torsion root lam0 is
a nullspace vector of the F_q-linear specialized Carlitz map.  All
conjugates, the grouped products Gamma^j, and h's coefficients become
scalar computations per point.  Every target coefficient lies in F_q(T),
so its value at t0 determines it modulo the whole degree-K minimal
polynomial P: expressing the value in the power basis of t0 (one small
linear solve per point, shared by all coefficients) yields a residue in
F_q[T]/(P), and the coefficients are then rebuilt by CRT entirely in
F_q[T] where arithmetic is cheap.

h is reconstructed from enough residues to cover a proven degree bound
(each conjugate product has pole order at most (r^d-1)/(r-1) at every
infinite place, so the Z^k coefficient has T-degree at most b-k times
that) and re-verified against spare residues.  The sigma_A coordinates
have no useful a priori bound, so they are reconstructed adaptively
(polynomial fit first, then rational reconstruction with a growing
denominator budget), verified against withheld residues, and certified
exactly downstream: the place rows must reproduce the beta-evaluated h
as a product of linear factors, and the image at the inert place must
satisfy the q^D-power congruence.

The degenerate folded Reed-Solomon field (M = T, E = the full torsion
field, h = Z^(q-1) + T) is produced by build_folded_rs_field and drives
the same downstream machinery.
"""

from __future__ import annotations

from typing import Iterator, List, Optional, Sequence, Tuple

from .gf import FieldCtx, factorize
from .linalg import nullspace, rref, solve_unique
from .carlitz import carlitz_op, TorsionRing, torsion_apply
from .polys import (LaurentSeries, Poly, crt_combine, divrem,
                    eval_poly_series, find_roots, gcd, irreducible_test,
                    pmod, rational_reconstruct, series_roots_at,
                    taylor_shift)

FEASIBILITY_CAP = 1 << 18

# withheld values used only to re-verify each interpolated coefficient
SPARE_VALUES = 12


def extend_field(K: FieldCtx, degree: int, verify: Optional[bool] = None
                 ) -> Tuple[FieldCtx, Poly]:
    """Extend the top level of K by the first monic irreducible of the
    given degree (candidates in ascending packed order)."""
    q = K.order
    for c in range(q**degree):
        cand = Poly(K, [(c // q**i) % q for i in range(degree)] + [1])
        if irreducible_test(cand):
            return K.extend(cand.coeffs, verify=False if verify is None else verify), cand
    raise AssertionError("no irreducible of degree %d" % degree)


class ResidueFieldCtx:
    """The residue field at the place above A: F_{q^D}[mu(A')] with
    modulus h mod A; elements are raw ints of `field` (two more tower
    levels on top of F_q).  mu(A') is the formal generator of the top
    level, never an explicit root."""

    __slots__ = ("field", "base", "order", "D", "b", "gen")

    def __init__(self, field: FieldCtx, base: FieldCtx, D: int, b: int):
        self.field = field
        self.base = base
        self.D = D
        self.b = b
        self.order = field.order
        self.gen = base.order        # encoding of the class of mu(A')


class SubfieldElem:
    """sum coeffs[i] * mu^i with coeffs Poly in T; exactly b slots."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: "SubfieldCtx", coeffs: Sequence[Poly]):
        cs = list(coeffs)
        if len(cs) > ctx.b:
            raise ValueError("too many mu-coordinates")
        zero = Poly(ctx.K, [])
        while len(cs) < ctx.b:
            cs.append(zero)
        self.ctx = ctx
        self.coeffs = cs

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def __eq__(self, other):
        return (isinstance(other, SubfieldElem) and self.ctx is other.ctx
                and self.coeffs == other.coeffs)

    def __add__(self, other: "SubfieldElem") -> "SubfieldElem":
        return SubfieldElem(self.ctx, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> "SubfieldElem":
        return SubfieldElem(self.ctx, [-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "SubfieldElem") -> "SubfieldElem":
        ctx = self.ctx
        K = ctx.K
        b = ctx.b
        prod = [Poly(K, []) for _ in range(2 * b - 1)]
        for i, a in enumerate(self.coeffs):
            if not a.is_zero():
                for j, c in enumerate(other.coeffs):
                    if not c.is_zero():
                        prod[i + j] = prod[i + j] + a * c
        return SubfieldElem(ctx, ctx.reduce_mu_poly(prod))

    def scale(self, p: Poly) -> "SubfieldElem":
        return SubfieldElem(self.ctx, [c * p for c in self.coeffs])

    def pow(self, e: int) -> "SubfieldElem":
        r = self.ctx.one()
        base = self
        while e:
            if e & 1:
                r = r * base
            base = base * base
            e >>= 1
        return r

    def __repr__(self):
        return "SubfieldElem(%s)" % "; ".join(c.render() for c in self.coeffs)


class SubfieldCtx:
    """Everything about E = F_q(T)(mu) needed downstream; immutable."""

    __slots__ = ("kind", "K", "r_level", "r", "q", "M", "d", "b", "genus",
                 "A", "D", "h", "sigmaA_mu", "sigma_den", "betas",
                 "place_table", "residue", "build_meta", "_sig_pows",
                 "_den_pows", "_series_cache")

    def __init__(self, kind, K, r_level, M, A, h, sigmaA_coeffs, sigma_den,
                 betas, place_table, residue, build_meta):
        self.kind = kind
        self.K = K
        self.r_level = r_level
        self.r = K.order_at(r_level)
        self.q = K.order
        self.M = M
        self.d = M.degree
        self.b = len(h) - 1
        self.genus = self.d * (self.b - 1) // 2 + 1 if kind == "cyclotomic" else 0
        self.A = A
        self.D = A.degree
        self.h = h
        self.sigma_den = sigma_den
        self.betas = betas
        self.place_table = place_table
        self.residue = residue
        self.build_meta = build_meta
        self._sig_pows = None
        self._den_pows = None
        self._series_cache = {}
        self.sigmaA_mu = SubfieldElem(self, sigmaA_coeffs)

    # --- element constructors ---

    def zero(self) -> SubfieldElem:
        return SubfieldElem(self, [])

    def one(self) -> SubfieldElem:
        return SubfieldElem(self, [Poly.const(self.K, 1)])

    def mu(self) -> SubfieldElem:
        return SubfieldElem(self, [Poly(self.K, []), Poly.const(self.K, 1)])

    def from_T(self, p: Poly) -> SubfieldElem:
        return SubfieldElem(self, [p])

    def reduce_mu_poly(self, coeffs: List[Poly]) -> List[Poly]:
        """Reduce a mu-polynomial of any degree by the monic h."""
        cs = list(coeffs)
        b = self.b
        for i in range(len(cs) - 1, b - 1, -1):
            c = cs[i]
            if not c.is_zero():
                for j in range(b):
                    hj = self.h[j]
                    if not hj.is_zero():
                        cs[i - b + j] = cs[i - b + j] - c * hj
            cs[i] = Poly(self.K, [])
        return cs[:b]

    # --- automorphism ---

    def sigma_den_is_one(self) -> bool:
        return self.sigma_den.coeffs == [1]

    def _sigma_powers(self) -> Tuple[List[SubfieldElem], List[Poly]]:
        if self._sig_pows is None:
            pows = [self.one()]
            for _ in range(self.b - 1):
                pows.append(pows[-1] * self.sigmaA_mu)
            self._sig_pows = pows
            dens = [Poly.const(self.K, 1)]
            for _ in range(self.b - 1):
                dens.append(dens[-1] * self.sigma_den)
            self._den_pows = dens
        return self._sig_pows, self._den_pows

    def sigmaA(self, x: SubfieldElem) -> SubfieldElem:
        """sigma_A(x): substitute mu -> sigma_A(mu), T fixed.  Raises if
        the image does not lie in the polynomial model R_T[mu] (possible
        only when sigma_den is nontrivial)."""
        pows, dens = self._sigma_powers()
        b = self.b
        if self.sigma_den_is_one():
            out = self.zero()
            for i, a in enumerate(x.coeffs):
                if not a.is_zero():
                    out = out + pows[i].scale(a)
            return out
        acc = self.zero()
        for i, a in enumerate(x.coeffs):
            if not a.is_zero():
                acc = acc + pows[i].scale(a * dens[b - 1 - i])
        out = []
        for c in acc.coeffs:
            quo, rem = divrem(c, dens[b - 1])
            if not rem.is_zero():
                raise ValueError("automorphism image leaves the polynomial "
                                 "model R_T[mu]")
            out.append(quo)
        return SubfieldElem(self, out)

    def sigmaA_pow(self, x: SubfieldElem, j: int) -> SubfieldElem:
        if j < 0:
            raise ValueError("negative power")
        for _ in range(j % self.b):
            x = self.sigmaA(x)
        return x

    # --- evaluations ---

    def eval_at_place(self, x: SubfieldElem, beta: int, j: int) -> int:
        """Value of x at the j-th degree-one place above T - beta."""
        if beta not in self.place_table:
            raise ValueError("no place table for this evaluation point")
        if not 0 <= j < self.b:
            raise ValueError("place index out of range")
        K = self.K
        v = self.place_table[beta][j]
        acc = 0
        for c in reversed(x.coeffs):
            acc = K.add(K.mul(acc, v), c.eval(beta))
        return acc

    def eval_at_Aprime(self, x: SubfieldElem) -> int:
        """Image of x in the residue field at the place above A."""
        R = self.residue.field
        gen = self.residue.gen
        acc = 0
        for c in reversed(x.coeffs):
            acc = R.add(R.mul(acc, gen), self.reduce_mod_A(c))
        return acc

    def reduce_mod_A(self, p: Poly) -> int:
        """Poly in T -> element of F_{q^D} = F_q[T]/(A), packed encoding."""
        return _pack_mod(self.K, pmod(p, self.A))

    def M_inv_at_Aprime(self) -> int:
        """Inverse of (M mod A) in the residue field."""
        return self.residue.field.inv(self.reduce_mod_A(self.M))


# ---------------------------------------------------------------------------
# main construction

def build_subfield(K: FieldCtx, r_level: int, M: Poly, A: Poly,
                   feasibility_cap: int = FEASIBILITY_CAP,
                   allow_odd_char: bool = False,
                   cross_validate: Optional[bool] = None) -> SubfieldCtx:
    """Build E = fixed field of H inside the M-torsion field.

    K: the field tower with F_q on top; r_level: tower level of F_r;
    M: monic in F_r[T], irreducible over F_q, degree d;
    A: monic irreducible over F_q whose class generates (F_q[T]/M)^*.
    """
    q = K.order
    r = K.order_at(r_level)
    p = K.characteristic
    if p != 2 and not allow_odd_char:
        raise ValueError("odd characteristic requires allow_odd_char=True")
    if not M.is_monic() or M.degree < 1:
        raise ValueError("M must be monic of degree >= 1")
    if any(not K.in_level(c, r_level) for c in M.coeffs):
        raise ValueError("M must have coefficients in the r-level subfield")
    d = M.degree
    Q = q**d
    if Q > feasibility_cap:
        raise ValueError("q^d = %d exceeds the feasibility cap %d" % (Q, feasibility_cap))
    if not irreducible_test(M):
        raise ValueError("M is reducible over the full field")
    num = (Q - 1) * (r - 1)
    den = (r**d - 1) * (q - 1)
    if num % den:
        raise ValueError("non-integral subfield degree b")
    b = num // den
    if d * (b - 1) % 2:
        raise ValueError("non-integral genus")
    D = A.degree
    if not A.is_monic() or not irreducible_test(A):
        raise ValueError("A must be monic irreducible")
    _check_A_primitive(K, M, A)

    # pole order of each conjugate product at every infinite place
    colmax = (r**d - 1) // (r - 1)
    bound_h = (b - 1) * colmax + d

    Amod = pmod(A, M)
    opA = carlitz_op(Amod)
    opM = carlitz_op(M)

    Kd = d + 1
    while q**(Kd - d) < 2 * (bound_h + 1 + SPARE_VALUES):
        Kd += 1
    built = None
    while built is None:
        big, ext_mod = extend_field(K, Kd)
        built = _build_h_and_sigma(K, big, M, opM, opA, b, q, Q, d, Kd, bound_h)
        if built is None:
            Kd += 1      # point supply exhausted before convergence
    h, sig_coeffs, sigma_den, meta = built
    meta["ext_degree"] = Kd
    meta["ext_modulus"] = ext_mod.render()

    _verify_h_invariants(K, M, h, b, q, Q)

    # --- residue field at A' ---
    FqD = K.extend(A.coeffs, verify=False)
    hbar = Poly(FqD, [_pack_mod(K, pmod(c, A)) for c in h])
    if not irreducible_test(hbar):
        raise AssertionError("h mod A is reducible: A is not inert")
    KAp = FqD.extend(hbar.coeffs, verify=False)
    residue = ResidueFieldCtx(KAp, FqD, D, b)

    betas = list(range(r))
    ctx = SubfieldCtx("cyclotomic", K, r_level, M, A, h, sig_coeffs,
                      sigma_den, betas, {}, residue, meta)
    _verify_artin(ctx)
    _build_place_table(ctx)
    if ctx.sigma_den_is_one() and b <= 16:
        _verify_sigma_symbolic(ctx)
    if cross_validate is None:
        cross_validate = Q <= 1 << 7
    if cross_validate:
        _cross_validate_symbolic(ctx)
    return ctx


def _build_h_and_sigma(K: FieldCtx, big: FieldCtx, M: Poly, opM, opA,
                       b: int, q: int, Q: int, d: int, Kd: int,
                       bound_h: int):
    """One attempt at the pointwise build inside F_{q^Kd}; returns
    (h, sigma numerator coeffs, sigma denominator, meta) or None when the
    extension runs out of specialization points."""
    stream = _point_stream(K, big, M, Kd)
    data: List[Tuple[Poly, List[List[int]], List[int]]] = []

    def extend_to(nbase: int) -> None:
        while len(data) < nbase:
            t0, P = next(stream)
            lam0 = _torsion_root(K, big, opM, t0, d)
            conj = _conjugates(K, big, opA, t0, lam0, Q - 1)
            gammas = []
            for j in range(b):
                acc = 1
                for i in range(j, Q - 1, b):
                    acc = big.mul(acc, conj[i])
                gammas.append(acc)
            data.append((P, _power_basis_inverse(K, big, t0, Kd), gammas))

    spare_mods = -(SPARE_VALUES // -Kd) + 1
    try:
        # --- h: sound degree bound + spare-residue re-verification ---
        mh = -((bound_h + 1) // -Kd)
        extend_to(mh + spare_mods)
        hmods = [P for P, _, _ in data]
        hres: List[List[Poly]] = [[] for _ in range(b)]
        for P, inv_pb, gammas in data:
            vals = _expand_from_roots(big, gammas)
            for k in range(b):
                hres[k].append(_residue_poly(K, big, inv_pb, vals[k]))
        h: List[Poly] = []
        for k in range(b):
            ck, _ = crt_combine(hres[k][:mh], hmods[:mh])
            if ck.degree > bound_h:
                raise AssertionError("h coefficient %d exceeds its "
                                     "reconstruction bound" % k)
            for res, P in zip(hres[k][mh:], hmods[mh:]):
                if pmod(ck, P) != res:
                    raise AssertionError("h reconstruction fails "
                                         "re-verification")
            h.append(ck)
        h.append(Poly.const(K, 1))

        # --- sigma_A coordinates: adaptive rational reconstruction ---
        smods: List[Poly] = []
        sres: List[List[Poly]] = [[] for _ in range(b)]
        seen = 0
        while True:
            while seen < len(data):
                P, inv_pb, gammas = data[seen]
                seen += 1
                if len(set(gammas)) != b:
                    continue        # specialized discriminant vanished
                rows = []
                rhs = []
                for j in range(b):
                    g = gammas[j]
                    row = [1]
                    for _ in range(b - 1):
                        row.append(big.mul(row[-1], g))
                    rows.append(row)
                    rhs.append(gammas[(j + 1) % b])
                sol = solve_unique(big, rows, rhs)
                if sol is None:
                    continue
                smods.append(P)
                for l in range(b):
                    sres[l].append(_residue_poly(K, big, inv_pb, sol[l]))
            fit = _fit_sigma(K, sres, smods, b, spare_mods)
            if fit is not None:
                sig_coeffs, sigma_den = fit
                return h, sig_coeffs, sigma_den, {
                    "base_points": len(data),
                    "h_moduli": mh,
                    "sigma_moduli": len(smods),
                }
            extend_to(2 * len(data))
    except StopIteration:
        return None


def _fit_sigma(K: FieldCtx, sres: List[List[Poly]], smods: List[Poly],
               b: int, spare_mods: int):
    """Fit every sigma coordinate as num/den in F_q(T) from its residues,
    withholding spare moduli for verification; None if some coordinate
    has not converged yet."""
    m = len(smods)
    slack = 4
    if m < 2 * spare_mods + 1:
        return None
    mfit = m - spare_mods
    fmods, vmods = smods[:mfit], smods[mfit:]
    n = sum(P.degree for P in fmods)
    nums: List[Poly] = []
    dens: List[Poly] = []
    for l in range(b):
        F, Pi = crt_combine(sres[l][:mfit], fmods)
        got = None
        for dd in (0, 8, (n - 2) // 2):
            if not 0 <= dd < n:
                continue
            res = rational_reconstruct(F, Pi, n - 1 - dd)
            if res is None:
                continue
            numc, denc = res
            if numc.degree + denc.degree > n - 1 - slack:
                continue      # saturated: cannot distinguish from noise
            ok = all(not pmod(denc, P).is_zero()
                     and pmod(numc - rv * denc, P).is_zero()
                     for rv, P in zip(sres[l][mfit:], vmods))
            if ok:
                got = res
                break
        if got is None:
            return None
        nums.append(got[0])
        dens.append(got[1])
    # rewrite all coordinates over the common (lcm) denominator
    lcm = Poly.const(K, 1)
    for dn in dens:
        g = gcd(lcm, dn)
        quo, _ = divrem(dn, g)
        lcm = lcm * quo
    coeffs = []
    for numc, denc in zip(nums, dens):
        mult, _ = divrem(lcm, denc)
        coeffs.append(numc * mult)
    return coeffs, lcm


def _check_A_primitive(K: FieldCtx, M: Poly, A: Poly) -> None:
    Q = K.order**M.degree
    FqD = K.extend(M.coeffs, verify=False)
    tcls = K.order          # class of T in F_q[T]/(M)
    abar = 0
    for c in reversed(A.coeffs):
        abar = FqD.add(FqD.mul(abar, tcls), c)
    if abar == 0:
        raise ValueError("A vanishes mod M")
    order = Q - 1
    for pr in factorize(Q - 1):
        if FqD.pow(abar, (Q - 1) // pr) == 1:
            while order % pr == 0 and FqD.pow(abar, order // pr) == 1:
                order //= pr
            raise ValueError("A is not primitive mod M (order divides %d, "
                             "needs %d)" % (order, Q - 1))


def _point_stream(K: FieldCtx, big: FieldCtx, M: Poly, Kd: int
                  ) -> Iterator[Tuple[int, Poly]]:
    """Points t0 in the extension with min-poly P = 1 + M*s, P irreducible
    over F_q: the residue Frobenius fixes the torsion module pointwise, so
    the specialized torsion polynomial splits linearly there.  One root
    per P; the information of its conjugates is carried by P itself."""
    q = K.order
    d = M.degree
    for sidx in range(q**(Kd - d)):
        s = Poly(K, [(sidx // q**i) % q for i in range(Kd - d)] + [1])
        P = Poly(K, [1]) + M * s
        if P.degree != Kd or not irreducible_test(P):
            continue
        roots = find_roots(Poly(big, P.coeffs))
        if roots:
            yield min(roots), P


def _specialization_points(K: FieldCtx, big: FieldCtx, M: Poly, Kd: int,
                           count: int) -> List[int]:
    pts = []
    for t0, _ in _point_stream(K, big, M, Kd):
        pts.append(t0)
        if len(pts) >= count:
            return pts
    raise AssertionError("insufficient specialization points at extension "
                         "degree %d (found %d of %d)" % (Kd, len(pts), count))


def _power_basis_inverse(K: FieldCtx, big: FieldCtx, t0: int, n: int
                         ) -> List[List[int]]:
    """Matrix over F_q sending the digit vector of y to the coordinates
    of y in the power basis 1, t0, ..., t0^(n-1)."""
    cols = []
    pw = 1
    for _ in range(n):
        cols.append(big.digits(pw))
        pw = big.mul(pw, t0)
    aug = [[cols[c][r] for c in range(n)]
           + [1 if c == r else 0 for c in range(n)] for r in range(n)]
    red, pivots = rref(K, aug)
    if pivots != list(range(n)):
        raise AssertionError("degenerate power basis at a specialization point")
    return [row[n:] for row in red]


def _residue_poly(K: FieldCtx, big: FieldCtx, inv_pb: List[List[int]],
                  y: int) -> Poly:
    """The image of a value y = c(t0) as c mod P, i.e. y rewritten in the
    power basis of t0."""
    dg = big.digits(y)
    out = []
    for row in inv_pb:
        acc = 0
        for ri, di in zip(row, dg):
            if ri and di:
                acc = K.add(acc, K.mul(ri, di))
        out.append(acc)
    return Poly(K, out)


def _torsion_root(K: FieldCtx, big: FieldCtx, opM, t0: int, d: int) -> int:
    """A nonzero kernel vector of the specialized Carlitz map for M: a
    primitive M-torsion point (M irreducible makes them all primitive)."""
    spec = opM.specialize(big, t0)
    n = 1
    o = K.order
    while o**n < big.order:
        n += 1
    cols = [big.digits(spec(o**i)) for i in range(n)]
    mat = [[cols[c][r] for c in range(n)] for r in range(n)]
    kern = nullspace(K, mat, n)
    if len(kern) != d:
        raise AssertionError("torsion kernel has dimension %d, expected %d"
                             % (len(kern), d))
    lam0 = big.undigits(kern[0])
    if lam0 == 0 or spec(lam0) != 0:
        raise AssertionError("bad torsion root")
    return lam0


def _conjugates(K: FieldCtx, big: FieldCtx, opA, t0: int, lam0: int,
                count: int) -> List[int]:
    """conj[i] = C_{A^i}(lam0): iterate the specialized C_A applied as an
    F_q-linear matrix on digit vectors (the hot loop of the build)."""
    q = K.order
    spec = opA.specialize(big, t0)
    n = 1
    while q**n < big.order:
        n += 1
    cols = [big.digits(spec(q**i)) for i in range(n)]
    mat = [[cols[c][r] for c in range(n)] for r in range(n)]
    conj = [lam0]
    v = big.digits(lam0)
    lv = K._lv(-1)
    rng_n = range(n)
    if K.characteristic == 2 and lv.order <= 1 << 18:
        # table-multiply inline; char-2 addition is xor
        lv.mul(1, 1)
        exps, logs = lv.exps, lv.logs
        o1 = lv.order - 1
        logmat = [[logs[x] if x else None for x in row] for row in mat]
        for _ in range(count - 1):
            w = []
            for r in rng_n:
                acc = 0
                lr = logmat[r]
                for c in rng_n:
                    x = v[c]
                    if x:
                        lg = lr[c]
                        if lg is not None:
                            acc ^= exps[(lg + logs[x]) % o1]
                w.append(acc)
            v = w
            conj.append(big.undigits(v))
    else:
        for _ in range(count - 1):
            w = []
            for r in rng_n:
                acc = 0
                row = mat[r]
                for c in rng_n:
                    x = v[c]
                    if x and row[c]:
                        acc = K.add(acc, K.mul(row[c], x))
                w.append(acc)
            v = w
            conj.append(big.undigits(v))
    return conj


def _expand_from_roots(big: FieldCtx, roots: Sequence[int]) -> List[int]:
    """Coefficients 0..len-1 of the monic prod (Z - r)."""
    coeffs = [1]
    for rt in roots:
        nr = big.neg(rt)
        nxt = [0] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] = big.add(nxt[i + 1], c)
            nxt[i] = big.add(nxt[i], big.mul(c, nr))
        coeffs = nxt
    return coeffs[:-1]


def _pack_mod(K: FieldCtx, rem: Poly) -> int:
    v = 0
    for i, c in enumerate(rem.coeffs):
        v += c * K.order**i
    return v


def _verify_h_invariants(K: FieldCtx, M: Poly, h: List[Poly], b: int,
                         q: int, Q: int) -> None:
    if h[-1].coeffs != [1]:
        raise AssertionError("h is not monic")
    if h[0] != M:
        raise AssertionError("constant term of h is not exactly M")
    colmax = -((Q - 1) // -(b * (q - 1)))
    for k in range(b):
        quo, rem = divrem(h[k], M)
        if not rem.is_zero():
            raise AssertionError("coefficient %d of h not divisible by M" % k)
        # the Z^k coefficient is the elementary symmetric function of
        # degree b-k in the conjugate products
        if h[k].degree > (b - k) * colmax + M.degree:
            raise AssertionError("coefficient %d of h exceeds its degree bound" % k)
    # constant term not divisible by M^2
    quo, rem = divrem(h[0], M)
    if pmod(quo, M).is_zero():
        raise AssertionError("constant term of h divisible by M^2")


def _verify_artin(ctx: SubfieldCtx) -> None:
    """sigma_A must act as the q^D power map modulo the place above A."""
    R = ctx.residue.field
    den_img = ctx.reduce_mod_A(ctx.sigma_den)
    if den_img == 0:
        raise AssertionError("sigma denominator vanishes at the inert place")
    num_img = ctx.eval_at_Aprime(ctx.sigmaA_mu)
    want = R.pow(ctx.residue.gen, ctx.q**ctx.D)
    if num_img != R.mul(den_img, want):
        raise AssertionError("automorphism image fails the power congruence "
                             "at the inert place")


def _build_place_table(ctx: SubfieldCtx) -> None:
    """Values of mu at the places above T - beta, ordered so that entry
    j+1 is the sigma_A-image of entry j; certified by reproducing the
    beta-evaluated h as prod (Z - entry)."""
    K = ctx.K
    for beta in ctx.betas:
        hb = Poly(K, [c.eval(beta) for c in ctx.h])
        roots = find_roots(hb)
        if not roots:
            raise AssertionError("no rational values above T - beta")
        dv = ctx.sigma_den.eval(beta)
        if dv != 0:
            root0 = min(roots)      # smallest canonical rendering
            num_at = [c.eval(beta) for c in ctx.sigmaA_mu.coeffs]
            dinv = K.inv(dv)
            row = [root0]
            for _ in range(ctx.b - 1):
                v = row[-1]
                acc = 0
                for c in reversed(num_at):
                    acc = K.add(K.mul(acc, v), c)
                row.append(K.mul(acc, dinv))
        elif len(roots) == 1:
            # mu does not separate the places here; all entries coincide
            row = [roots[0]] * ctx.b
        else:
            raise AssertionError("cannot order the places above this point: "
                                 "the automorphism denominator vanishes")
        prod = _expand_from_roots(K, row)
        if prod != hb.coeffs[:ctx.b]:
            raise AssertionError("place row does not reproduce the "
                                 "beta-evaluated minimal polynomial")
        ctx.place_table[beta] = row


def place_series(ctx: SubfieldCtx, beta: int, precision: int
                 ) -> List[LaurentSeries]:
    """Power-series expansions of mu at the b places above T - beta, in
    the local parameter t = T - beta, ordered so that entry j+1 is the
    expansion at the inverse-automorphism image of place j (the same
    ordering as place_table, which holds the constant terms).

    The places are distinct but mu may take the same VALUE at all of
    them (the b series share constant terms and separate at positive
    depth); the series carry the information plug-in evaluation loses,
    which message functions with denominators at T - beta need.
    """
    key = (beta, precision)
    got = ctx._series_cache.get(key)
    if got is not None:
        return got
    if beta not in ctx.place_table:
        raise ValueError("no places tabulated above this evaluation point")
    K = ctx.K
    b = ctx.b
    if b == 1:
        ordered = series_roots_at(ctx.h, beta, b, precision)
    else:
        den_sh = taylor_shift(ctx.sigma_den, beta)
        w = next(i for i, c in enumerate(den_sh.coeffs) if c)
        # dividing by the denominator (vanishing to order w at beta) costs w
        # digits, so match the automorphism images at a raised working
        # precision; the shifted coefficients are exact and can carry it
        wp = precision + w
        roots = series_roots_at(ctx.h, beta, b, wp)
        den_inv = LaurentSeries(K, 0, den_sh.coeffs, wp).inv()
        num_s = [LaurentSeries(K, 0, taylor_shift(c, beta).coeffs, wp)
                 for c in ctx.sigmaA_mu.coeffs]
        perm = []
        for s in roots:
            img_num = eval_poly_series(num_s, s)
            if not img_num.is_zero() and img_num.valuation < w:
                raise AssertionError("automorphism image of a place series "
                                     "has a pole")
            img = img_num * den_inv
            hits = [k for k, rt in enumerate(roots) if _series_agree(img, rt)]
            if len(hits) != 1:
                raise AssertionError("series precision %d too low to order "
                                     "the places above T - %s"
                                     % (precision, K.render(beta)))
            perm.append(hits[0])
        start = min(range(b), key=lambda k: _series_key(roots[k], precision))
        order = [start]
        while True:
            nxt = perm[order[-1]]
            if nxt == start:
                break
            if nxt in order:
                raise AssertionError("automorphism orbit on the places is "
                                     "not a single cycle")
            order.append(nxt)
        if len(order) != b:
            raise AssertionError("automorphism orbit on the places is not "
                                 "a single cycle")
        ordered = [LaurentSeries(K, roots[k].valuation,
                                 roots[k].coeffs[:precision - roots[k].valuation],
                                 precision) for k in order]
    # certificates: constant terms match the scalar table, and the product
    # of the linear factors reproduces the shifted minimal polynomial
    for s, v in zip(ordered, ctx.place_table[beta]):
        if s.coeff(0) != v:
            raise AssertionError("series constant term disagrees with the "
                                 "tabulated place value")
    prod = [LaurentSeries.one(K, precision)]
    for s in ordered:
        nxt = [LaurentSeries(K, precision, [], precision)
               for _ in range(len(prod) + 1)]
        for i, c in enumerate(prod):
            nxt[i + 1] = nxt[i + 1] + c
            nxt[i] = nxt[i] - c * s
        prod = nxt
    for k, c in enumerate(prod):
        want = LaurentSeries(K, 0, taylor_shift(ctx.h[k], beta).coeffs,
                             precision)
        if not _series_agree(c, want):
            raise AssertionError("ordered place series do not reproduce "
                                 "the minimal polynomial")
    ctx._series_cache[key] = ordered
    return ordered


def _series_agree(a: LaurentSeries, b: LaurentSeries) -> bool:
    prec = min(a.precision, b.precision)
    lo = min(a.valuation, b.valuation, prec)
    for e in range(lo, prec):
        av = a.coeff(e) if e < a.precision else 0
        bv = b.coeff(e) if e < b.precision else 0
        if av != bv:
            return False
    return True


def _series_key(s: LaurentSeries, precision: int):
    return tuple(s.coeff(e) for e in range(min(s.precision, precision)))


def _verify_sigma_symbolic(ctx: SubfieldCtx) -> None:
    """Exact whole-field certificates, affordable at small b with trivial
    denominator: sigma_A(mu) is a root of h and has orbit order b."""
    s1 = ctx.sigmaA(ctx.mu())
    acc = ctx.zero()
    for k in range(ctx.b, -1, -1):
        acc = acc * s1
        acc = acc + ctx.from_T(ctx.h[k])
    if not acc.is_zero():
        raise AssertionError("sigma_A(mu) is not a root of h")
    x = ctx.mu()
    for _ in range(ctx.b):
        x = ctx.sigmaA(x)
    if x != ctx.mu():
        raise AssertionError("sigma_A does not have orbit order b on mu")


def _cross_validate_symbolic(ctx: SubfieldCtx) -> None:
    """Independent oracle for small instances: expand the conjugate
    products symbolically in the torsion ring and compare h and the
    sigma_A coordinates; also checks that every h coefficient collapses
    to lam-degree 0."""
    K = ctx.K
    ring = TorsionRing(ctx.M)
    Q = ring.Q
    b = ctx.b
    Amod = pmod(ctx.A, ctx.M)
    conj = [ring.lam()]
    for _ in range(Q - 2):
        conj.append(torsion_apply(ring, Amod, conj[-1]))
    gammas = []
    for j in range(b):
        acc = ring.one()
        for i in range(j, Q - 1, b):
            acc = acc * conj[i]
        gammas.append(acc)
    coeffs = [ring.one()]
    for g in gammas:
        nxt = [ring.zero() for _ in range(len(coeffs) + 1)]
        for i, c in enumerate(coeffs):
            nxt[i + 1] = nxt[i + 1] + c
            nxt[i] = nxt[i] - c * g
        coeffs = nxt
    for k in range(b):
        terms = coeffs[k].terms
        if any(e != 0 for e in terms):
            raise AssertionError("h coefficient %d does not collapse to "
                                 "lam-degree 0" % k)
        val = terms.get(0, Poly(K, []))
        if val != ctx.h[k]:
            raise AssertionError("symbolic torsion-ring h disagrees at "
                                 "coefficient %d" % k)
    # den * Gamma^1 = sum num_l * (Gamma^0)^l in the torsion ring
    acc = ring.zero()
    mupow = ring.one()
    for l in range(b):
        acc = acc + mupow.scale(ctx.sigmaA_mu.coeffs[l])
        mupow = mupow * gammas[0]
    if acc != gammas[1 % b].scale(ctx.sigma_den):
        raise AssertionError("symbolic sigma_A(mu) disagrees")


def subfield_from_parts(K: FieldCtx, r_level: int, M: Poly, A: Poly,
                        h: List[Poly], sigma_coeffs: List[Poly],
                        sigma_den: Poly, betas: List[int],
                        meta: Optional[dict] = None) -> SubfieldCtx:
    """Reassemble a SubfieldCtx from stored components, re-running the
    cheap certificates (h shape, Artin congruence at the inert place,
    place-table reproduction) but not the interpolation build."""
    q = K.order
    r = K.order_at(r_level)
    d = M.degree
    Q = q**d
    if not M.is_monic() or not irreducible_test(M):
        raise ValueError("stored M is not monic irreducible")
    if not A.is_monic() or not irreducible_test(A):
        raise ValueError("stored A is not monic irreducible")
    _check_A_primitive(K, M, A)
    b = len(h) - 1
    if b != (Q - 1) * (r - 1) // ((r**d - 1) * (q - 1)):
        raise ValueError("stored h has the wrong degree")
    _verify_h_invariants(K, M, h, b, q, Q)
    FqD = K.extend(A.coeffs, verify=False)
    hbar = Poly(FqD, [_pack_mod(K, pmod(c, A)) for c in h])
    if not irreducible_test(hbar):
        raise AssertionError("h mod A is reducible: A is not inert")
    KAp = FqD.extend(hbar.coeffs, verify=False)
    residue = ResidueFieldCtx(KAp, FqD, A.degree, b)
    ctx = SubfieldCtx("cyclotomic", K, r_level, M, A, h, sigma_coeffs,
                      sigma_den, list(betas), {}, residue,
                      dict(meta or {}))
    _verify_artin(ctx)
    _build_place_table(ctx)
    if ctx.sigma_den_is_one() and b <= 16:
        _verify_sigma_symbolic(ctx)
    return ctx


# ---------------------------------------------------------------------------
# folded Reed-Solomon field: M = T, E = the whole torsion field

def build_folded_rs_field(K: FieldCtx, gamma: int) -> SubfieldCtx:
    """The torsion field for M = T with A = T + gamma (gamma primitive):
    h = Z^(q-1) + T, sigma_A(mu) = gamma*mu, evaluation places above T - 1."""
    q = K.order
    p = K.characteristic
    M = Poly.x(K)
    b = q - 1
    for pr in factorize(q - 1):
        if K.pow(gamma, (q - 1) // pr) == 1:
            raise ValueError("gamma is not primitive")
    A = Poly(K, [gamma, 1])
    if p != 2:
        raise ValueError("folded RS field is built in characteristic 2")
    h: List[Poly] = [Poly.x(K)] + [Poly(K, [])] * (b - 1) + [Poly.const(K, 1)]
    sig = [Poly(K, [])] * b
    sig[1] = Poly.const(K, gamma)
    one = Poly.const(K, 1)
    FqD = K.extend(A.coeffs, verify=False)
    hbar = Poly(FqD, [_pack_mod(K, pmod(c, A)) for c in h])
    if not irreducible_test(hbar):
        raise AssertionError("Z^(q-1) + gamma reducible: gamma not primitive?")
    KAp = FqD.extend(hbar.coeffs, verify=False)
    residue = ResidueFieldCtx(KAp, FqD, 1, b)
    ctx = SubfieldCtx("folded_rs", K, K.levels - 1, M, A, h, sig, one, [1],
                      {}, residue, {"gamma": gamma})
    _verify_artin(ctx)
    _build_place_table(ctx)
    return ctx
