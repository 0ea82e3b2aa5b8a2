"""
decoder.py

List decoding for code instances built by codec.py.  The pipeline is

    choose_params -> interpolate -> build_phi -> find_candidates -> filter

interpolate finds a nonzero s-variate polynomial Q with coefficients in
the message space whose windowed shifts vanish to order w at the
evaluation places of every received symbol.  Any message whose encoding
agrees with enough received symbols makes Q(f, sigma_A f, ...,
sigma_A^(s-1) f) vanish identically, so its image at the distinguished
residue place is a root of the univariate trace Phi of Q.

find_candidates recovers those messages by coefficient peeling at the
totally ramified place above M: every message function has a power
series expansion in mu there, with coefficients in F_q[T]/(M) fixed by
sigma_A, and sigma_A acts on expansions by substituting the expansion of
sigma_A(mu).  Peeling the identity Q(f, sigma_A f, ...) = 0 one series
coefficient at a time turns root finding into a chain of small
univariate root extractions over F_q[T]/(M), each branch pinned against
the F_q-span of the basis expansions.  Survivors are confirmed as roots
of Phi by direct evaluation and the caller filters by agreement count.

A literal root search over the residue field (gcd of Phi with the field
equation) is also provided for cross-checks, but its modular
exponentiation is hopeless at production sizes, so it is opt-in.
"""

from __future__ import annotations

import math
import random
import time
from typing import Dict, List, Optional, Sequence, Tuple

from .codec import CodeInstance, FoldedWord, encode, message_at_Aprime
from .gf import FieldCtx
from .linalg import nullspace, rank, solve, nullspace_vector
from .polys import (LaurentSeries, Poly, eval_poly_series, find_roots, gcd,
                    modexp, taylor_shift)
from .rrspace import MessageFunction, rr_basis
from .subfield import place_series

# enumeration bound used when a peeling equation vanishes identically
# and leaves a whole affine set of coefficient choices open
PEEL_BRANCH_CAP = 4096
# safety bound on peeling depth past the first unknown
PEEL_MAX_STEPS = 4096


class DecoderParams:
    """Interpolation arity s, multiplicity w, total degree delta, slack
    zeta, target error count e, and the derived honest maximum max_e.

    ellq bounds the pole order of the interpolation coefficient space
    (at least the message space bound ell, usually larger so a nonzero Q
    is guaranteed to exist) and kq is that space's dimension.  certified
    says whether unknowns > rows, the unconditional existence count; when
    the residue-injectivity cap ellq*d < D*b forbids enough unknowns, the
    params are still usable but existence is empirical."""

    __slots__ = ("s", "w", "delta", "zeta", "e", "max_e", "unknowns",
                 "constraints", "rows", "ellq", "kq", "certified")

    def __init__(self, s, w, delta, zeta, e, max_e, unknowns, constraints,
                 rows, ellq, kq, certified):
        self.s = s
        self.w = w
        self.delta = delta
        self.zeta = zeta
        self.e = e
        self.max_e = max_e
        self.unknowns = unknowns
        self.constraints = constraints
        self.rows = rows
        self.ellq = ellq
        self.kq = kq
        self.certified = certified

    def __repr__(self):
        return ("DecoderParams(s=%d, w=%d, delta=%d, e=%d, max_e=%d, "
                "unknowns=%d, constraints=%d, rows=%d, ellq=%d, kq=%d, "
                "certified=%s)" % (
                    self.s, self.w, self.delta, self.e, self.max_e,
                    self.unknowns, self.constraints, self.rows,
                    self.ellq, self.kq, self.certified))


def choose_params(inst: CodeInstance, s: int, zeta: Optional[float] = None,
                  w: Optional[int] = None, delta: Optional[int] = None,
                  e: Optional[int] = None) -> DecoderParams:
    """Derive interpolation parameters for the instance.

    w defaults to ceil(s/zeta) and delta to the smallest total degree
    whose unknown count provably exceeds the recorded constraint count.
    The interpolation coefficient space is then widened (ellq >= ell)
    until the unknowns exceed the true number of vanishing rows, within
    the residue-injectivity cap.  The maximum correctable e is reported
    honestly; it may be negative, meaning no error count satisfies the
    success condition.
    """
    m, N, k = inst.m, inst.N, inst.k
    ctx = inst.ctx
    if not 2 <= s <= m:
        raise ValueError("need 2 <= s <= folding parameter m")
    if w is None:
        if zeta is None:
            raise ValueError("give either zeta or an explicit w")
        if zeta <= 0:
            raise ValueError("zeta must be positive")
        w = math.ceil(s / zeta)
    if w < 1:
        raise ValueError("multiplicity must be at least 1")
    qD = ctx.q ** ctx.D
    constraints = N * (m - s + 1) * math.comb(w + s - 1, s)
    rows = N * (m - s + 1) * math.comb(w + s, s + 1)

    def _feasible(dd: int) -> bool:
        return k * math.comb(dd + s, s) > constraints

    if delta is None:
        # smallest t with t^s * k >= N(m-s+1)(w+s-1)^s, then delta = t-1
        target = N * (m - s + 1) * (w + s - 1) ** s
        t = 1
        while t ** s * k < target:
            t += 1
        delta = t - 1
        while not _feasible(delta):
            delta += 1
    elif not _feasible(delta):
        raise ValueError("explicit delta leaves no free unknowns")
    if delta >= qD:
        raise ValueError("infeasible: no total degree below the residue "
                         "field degree bound %d leaves free unknowns" % qD)
    nmono = math.comb(delta + s, s)
    ellq, kq = _widen_coefficient_space(inst, rows, nmono)
    certified = kq * nmono > rows
    # largest e with (N - e)(m - s + 1) w > pole bound d(ellq + ell*delta)
    pole = ctx.d * (ellq + inst.ell * delta)
    max_e = N - math.ceil((pole + 1) / ((m - s + 1) * w))
    if e is None:
        e = max_e
    unknowns = kq * nmono
    return DecoderParams(s, w, delta, zeta, e, max_e, unknowns, constraints,
                         rows, ellq, kq, certified)


def _space_dim(inst: CodeInstance, ellq: int) -> int:
    """Dimension of the pole-bounded space used for interpolation
    coefficients."""
    if ellq == inst.ell:
        return inst.k
    return ellq * inst.ctx.d - inst.ctx.genus + 1


def _widen_coefficient_space(inst: CodeInstance, rows: int, nmono: int
                             ) -> Tuple[int, int]:
    """Smallest coefficient-space pole bound ellq >= ell whose dimension
    kq gives kq*nmono > rows, respecting the cap ellq*d < D*b that keeps
    residue evaluation injective.  At the cap, returns the capped space
    even when existence is not certified."""
    ctx = inst.ctx
    ellq = inst.ell
    while _space_dim(inst, ellq) * nmono <= rows:
        if (ellq + 1) * ctx.d >= ctx.D * ctx.b:
            break
        ellq += 1
    return ellq, _space_dim(inst, ellq)


# ---------------------------------------------------------------------------
# interpolation

class InterpolationPoly:
    """Q(Z_1..Z_s) = sum over exponent vectors nvec of q_nvec * Z^nvec,
    each coefficient q_nvec given by its kq coordinates over the
    interpolation coefficient basis (pole bound ellq, which may exceed
    the message space bound ell)."""

    __slots__ = ("s", "delta", "kq", "ellq", "coeffs", "basis",
                 "basis_at_aprime")

    def __init__(self, s: int, delta: int, kq: int, ellq: int,
                 coeffs: Dict[Tuple[int, ...], List[int]],
                 basis: List[MessageFunction],
                 basis_at_aprime: List[int]):
        self.s = s
        self.delta = delta
        self.kq = kq
        self.ellq = ellq
        self.coeffs = coeffs
        self.basis = basis
        self.basis_at_aprime = basis_at_aprime

    def is_zero(self) -> bool:
        return not self.coeffs

    def __repr__(self):
        return "InterpolationPoly(s=%d, delta=%d, kq=%d, terms=%d)" % (
            self.s, self.delta, self.kq, len(self.coeffs))


# interpolation coefficient bases, keyed by (context id, pole bound);
# contexts are immutable, so reusing the computed basis is safe
_COEFF_BASIS_CACHE: Dict[Tuple[int, int], List[MessageFunction]] = {}


def _coefficient_basis(inst: CodeInstance, ellq: int
                       ) -> List[MessageFunction]:
    """Basis of the interpolation coefficient space with pole bound
    ellq.  Equals the message basis when ellq == ell."""
    if ellq == inst.ell:
        return inst.basis
    key = (id(inst.ctx), ellq)
    got = _COEFF_BASIS_CACHE.get(key)
    if got is None:
        if inst.kind == "folded_rs":
            got = [MessageFunction(inst.ctx, 0, 1, [0] * t + [1])
                   for t in range(ellq + 1)]
        else:
            got = rr_basis(inst.ctx, ellq).members
        _COEFF_BASIS_CACHE[key] = got
    return got


def _monomials(s: int, bound: int, strict: bool = False
               ) -> List[Tuple[int, ...]]:
    """Exponent vectors of total degree <= bound (< bound when strict),
    sorted by (total degree, lex)."""
    out: List[Tuple[int, ...]] = []

    def rec(prefix, left):
        if len(prefix) == s:
            out.append(tuple(prefix))
            return
        for v in range(left + 1):
            rec(prefix + [v], left - v)

    top = bound - 1 if strict else bound
    rec([], top)
    out.sort(key=lambda t: (sum(t), t))
    return out


def _constraint_blocks(inst: CodeInstance, s: int,
                       sets: Sequence[Sequence[Sequence[int]]]
                       ) -> List[Tuple[int, Tuple[int, ...]]]:
    """(anchor column, window values) pairs, one per symbol candidate and
    window offset."""
    blocks: List[Tuple[int, Tuple[int, ...]]] = []
    for pos, cands in enumerate(sets):
        for sym in cands:
            if len(sym) != inst.m:
                raise ValueError("symbol arity mismatch")
            for jp in range(inst.m - s + 1):
                blocks.append((inst.m * pos + jp, tuple(sym[jp:jp + s])))
    return blocks


def _local_expansions(inst: CodeInstance, members: List[MessageFunction],
                      depth: int) -> List[List[List[int]]]:
    """First `depth` local-parameter coefficients of every member at
    every used place, indexed [column][member][order].  Order 0 is the
    plain evaluation."""
    ctx = inst.ctx
    K = ctx.K
    per = inst.used_per_group
    out: List[List[List[int]]] = []
    for beta in ctx.betas:
        # denominators may vanish at beta (the function itself stays
        # regular), eating precision; retry with more when it runs out
        prec = depth + 2
        while True:
            try:
                out.extend(_group_expansions(inst, members, beta, per,
                                             depth, prec))
                break
            except (AssertionError, ValueError, ZeroDivisionError):
                if prec > 1 << 12:
                    raise
                prec *= 2
    return out


def _group_expansions(inst: CodeInstance, members: List[MessageFunction],
                      beta: int, per: int, depth: int, prec: int
                      ) -> List[List[List[int]]]:
    K = inst.ctx.K
    series = place_series(inst.ctx, beta, prec)
    mexp = LaurentSeries(K, 0, taylor_shift(inst.ctx.M, beta).coeffs, prec)
    cache = {}
    cols: List[List[List[int]]] = []
    for j in range(per):
        col: List[List[int]] = []
        for t, f in enumerate(members):
            if t not in cache:
                cs = [LaurentSeries(K, 0, taylor_shift(c, beta).coeffs,
                                    prec) for c in f.coeffs]
                den = LaurentSeries(K, 0,
                                    taylor_shift(f.den, beta).coeffs,
                                    prec)
                cache[t] = (cs, den.inv(),
                            mexp.pow(-f.e) if f.e else None)
            cs, deninv, minv = cache[t]
            ser = eval_poly_series(cs, series[j]) * deninv
            if minv is not None:
                ser = ser * minv
            if not ser.is_zero() and ser.valuation < 0:
                raise AssertionError("coefficient basis member has a "
                                     "pole at an evaluation place")
            col.append([ser.coeff(o) for o in range(depth)])
        cols.append(col)
    return cols


def _interpolate_blocks(inst: CodeInstance, params: DecoderParams,
                        blocks: Sequence[Tuple[int, Tuple[int, ...]]]
                        ) -> InterpolationPoly:
    """Solve for Q: at each block the shifted coefficient of Z^mvec must
    vanish to order w - |mvec| at the anchor place.  (Plain vanishing of
    the shifted coefficients is not enough for multiplicity w >= 2: the
    low-degree coefficient functions would only contribute one zero
    each to Q(f, sigma_A f, ...), which breaks the zero count that the
    error-correction guarantee rests on.)"""
    K = inst.ctx.K
    p = K.characteristic
    s, w, delta = params.s, params.w, params.delta
    members = _coefficient_basis(inst, params.ellq)
    kq = len(members)
    monos = _monomials(s, delta)
    subs = _monomials(s, w, strict=True)
    nunk = len(monos) * kq
    colexp = _local_expansions(inst, members, w)
    rows: List[List[int]] = []
    for anchor, window in blocks:
        exps = colexp[anchor]
        # powers of the window values, reused across constraint rows
        ypow = [[1] * (delta + 1) for _ in range(s)]
        for i in range(s):
            for a in range(1, delta + 1):
                ypow[i][a] = K.mul(ypow[i][a - 1], window[i])
        for mvec in subs:
            depth = w - sum(mvec)
            pieces = []
            for mi, nvec in enumerate(monos):
                if any(n < mm for n, mm in zip(nvec, mvec)):
                    continue
                cb = 1
                for n, mm in zip(nvec, mvec):
                    cb = cb * math.comb(n, mm)
                cb %= p
                if cb == 0:
                    continue
                coef = cb
                for i in range(s):
                    coef = K.mul(coef, ypow[i][nvec[i] - mvec[i]])
                if coef:
                    pieces.append((mi, coef))
            for o in range(depth):
                row = [0] * nunk
                for mi, coef in pieces:
                    base = mi * kq
                    for t in range(kq):
                        ev = exps[t][o]
                        if ev:
                            row[base + t] = K.mul(coef, ev)
                rows.append(row)
    vec = nullspace_vector(K, rows, nunk)
    if vec is None:
        raise ValueError("interpolation admits only the zero solution")
    coeffs: Dict[Tuple[int, ...], List[int]] = {}
    for mi, nvec in enumerate(monos):
        chunk = vec[mi * kq:(mi + 1) * kq]
        if any(chunk):
            coeffs[nvec] = chunk
    if params.ellq == inst.ell:
        at_ap = list(inst.basis_at_Aprime)
    else:
        at_ap = [message_at_Aprime(inst.ctx, f) for f in members]
    Q = InterpolationPoly(s, delta, kq, params.ellq, coeffs, members, at_ap)
    _recheck_rows(inst, params, blocks, Q, colexp)
    return Q


def _shifted_coefficient(inst: CodeInstance, Q: InterpolationPoly,
                         anchor: int, window: Sequence[int],
                         mvec: Tuple[int, ...], order: int,
                         colexp: Sequence[Sequence[Sequence[int]]]) -> int:
    """order-th local expansion coefficient at the anchor place of the
    Z^mvec coefficient of Q(Z_1 + y_1, ..., Z_s + y_s)."""
    K = inst.ctx.K
    p = K.characteristic
    exps = colexp[anchor]
    acc = 0
    for nvec, chunk in Q.coeffs.items():
        if any(n < mm for n, mm in zip(nvec, mvec)):
            continue
        cb = 1
        for n, mm in zip(nvec, mvec):
            cb = cb * math.comb(n, mm)
        cb %= p
        if cb == 0:
            continue
        coef = cb
        for i, (n, mm) in enumerate(zip(nvec, mvec)):
            coef = K.mul(coef, K.pow(window[i], n - mm))
        if coef == 0:
            continue
        val = 0
        for t, x in enumerate(chunk):
            if x:
                val = K.add(val, K.mul(x, exps[t][order]))
        acc = K.add(acc, K.mul(coef, val))
    return acc


def _recheck_rows(inst: CodeInstance, params: DecoderParams,
                  blocks: Sequence[Tuple[int, Tuple[int, ...]]],
                  Q: InterpolationPoly,
                  colexp: Sequence[Sequence[Sequence[int]]],
                  samples: int = 10) -> None:
    """Spot-check the solved system: random constraint rows must vanish."""
    rng = random.Random(0)
    subs = _monomials(params.s, params.w, strict=True)
    for _ in range(samples):
        anchor, window = blocks[rng.randrange(len(blocks))]
        mvec = subs[rng.randrange(len(subs))]
        order = rng.randrange(params.w - sum(mvec))
        if _shifted_coefficient(inst, Q, anchor, window, mvec, order, colexp):
            raise AssertionError("interpolation constraint fails post-solve")


def interpolate(inst: CodeInstance, params: DecoderParams,
                received: FoldedWord) -> InterpolationPoly:
    """Nonzero Q whose shift by each received window vanishes to order w
    at the window's anchor place."""
    if len(received) != inst.N or received.m != inst.m:
        raise ValueError("received word shape mismatch")
    blocks = _constraint_blocks(inst, params.s,
                                [[sym] for sym in received.symbols])
    return _interpolate_blocks(inst, params, blocks)


# ---------------------------------------------------------------------------
# the univariate trace of Q at the distinguished residue place

class PhiPoly:
    """Sparse Phi(Y) = Qbar(Y, Y^(q^D), ..., Y^(q^D(s-1))) over the
    residue field; at most one term per monomial of Q."""

    __slots__ = ("terms", "degree", "Q")

    def __init__(self, terms: Dict[int, int], Q: InterpolationPoly):
        self.terms = terms
        self.degree = max(terms)
        self.Q = Q

    def __repr__(self):
        return "PhiPoly(degree=%d, terms=%d)" % (self.degree, len(self.terms))


def build_phi(inst: CodeInstance, Q: InterpolationPoly) -> PhiPoly:
    """Map each coefficient of Q to the residue field and substitute
    Z_i -> Y^(q^D(i-1)).  Distinct monomials of total degree < q^D land
    on distinct exponents, so the result is a sparse univariate."""
    ctx = inst.ctx
    R = ctx.residue.field
    qD = ctx.q ** ctx.D
    if Q.is_zero():
        raise ValueError("zero interpolation polynomial")
    if Q.delta >= qD:
        raise ValueError("total degree must stay below q^D")
    terms: Dict[int, int] = {}
    for nvec, chunk in Q.coeffs.items():
        c = 0
        for t, x in enumerate(chunk):
            if x:
                c = R.add(c, R.mul(x, Q.basis_at_aprime[t]))
        if c:
            exp = 0
            for i, n in enumerate(nvec):
                exp += n * qD ** i
            if exp in terms:
                raise AssertionError("monomial exponent collision")
            terms[exp] = c
    if not terms:
        raise AssertionError("Phi is identically zero: residue evaluation "
                             "lost the interpolation polynomial")
    return PhiPoly(terms, Q)


def phi_eval(inst: CodeInstance, phi: PhiPoly, y: int) -> int:
    """Phi at a residue field element, by ascending sparse exponents."""
    R = inst.ctx.residue.field
    acc = 0
    cur = 1
    prev = 0
    for exp in sorted(phi.terms):
        if exp != prev:
            cur = R.mul(cur, R.pow(y, exp - prev))
            prev = exp
        acc = R.add(acc, R.mul(phi.terms[exp], cur))
    return acc


def _residue_coords(inst: CodeInstance, v: int) -> List[int]:
    """F_q coordinates of a residue field element (D*b of them)."""
    R = inst.ctx.residue.field
    B = inst.ctx.residue.base
    out: List[int] = []
    for digit in R.digits(v):
        out.extend(B.digits(digit))
    return out


def invert_evaluation(inst: CodeInstance, y: int) -> Optional[List[int]]:
    """Message coordinates whose basis combination evaluates to y at the
    distinguished residue place, or None when y is not in the image."""
    K = inst.ctx.K
    cols = [_residue_coords(inst, u) for u in inst.basis_at_Aprime]
    nrows = len(cols[0])
    rows = [[cols[t][i] for t in range(inst.k)] for i in range(nrows)]
    return solve(K, rows, _residue_coords(inst, y))


# ---------------------------------------------------------------------------
# series expansions at the totally ramified place above M

class PlaceExpansion:
    """mu-adic expansion data at the place above M.

    Fd is F_q[T]/(M) (the residue field there), Tser the expansion of T,
    S[i] the expansion of sigma_A^i(mu), and basis the expansions of the
    instance's message basis.  All expansion coefficients are fixed by
    sigma_A, so sigma_A^i acts on a series by substituting S[i]."""

    __slots__ = ("Fd", "Tser", "S", "basis", "prec")

    def __init__(self, Fd, Tser, S, basis, prec):
        self.Fd = Fd
        self.Tser = Tser
        self.S = S
        self.basis = basis
        self.prec = prec


class _PrecisionShort(Exception):
    pass


def _hornered(Fd: FieldCtx, pol: Poly, z: LaurentSeries, prec: int
              ) -> LaurentSeries:
    """pol(z) for a polynomial over F_q, coefficients lifted into Fd."""
    acc = LaurentSeries(Fd, prec, [], prec)
    for c in reversed(pol.coeffs):
        acc = acc * z
        if c:
            acc = acc + LaurentSeries(Fd, 0, [c], prec)
    return acc


def _xshift(ser: LaurentSeries, j: int) -> LaurentSeries:
    """Multiply a series by mu^j exactly."""
    return LaurentSeries(ser.ctx, ser.valuation + j, ser.coeffs,
                         ser.precision + j)


def _compose(outer: LaurentSeries, inner: LaurentSeries) -> LaurentSeries:
    """outer(inner) for outer with nonnegative valuation and inner with
    valuation >= 1."""
    if outer.is_zero():
        return outer
    if outer.valuation < 0:
        raise ValueError("composition needs a power series")
    Fd = outer.ctx
    prec = min(outer.precision, inner.precision)
    acc = LaurentSeries(Fd, prec, [], prec)
    for c in reversed(outer.coeffs):
        acc = acc * inner
        if c:
            acc = acc + LaurentSeries(Fd, 0, [c], prec)
    return acc * inner.pow(outer.valuation) if outer.valuation else acc


def build_expansion(inst: CodeInstance, s: int, prec: int) -> PlaceExpansion:
    """Expand T, sigma powers of mu, and the message basis at the
    ramified place, to absolute mu-exponent precision prec."""
    ctx = inst.ctx
    K = ctx.K
    d = ctx.d
    Fd = K.extend(ctx.M.coeffs, verify=False)
    t0 = K.order if d > 1 else K.neg(ctx.M.coeffs[0])
    # Newton: solve sum h_i(T) mu^i = 0 for T as a series in mu
    if t0:
        Tser = LaurentSeries(Fd, 0, [t0], prec)
    else:
        Tser = LaurentSeries(Fd, prec, [], prec)

    def _h_at(T: LaurentSeries, derive: bool) -> LaurentSeries:
        acc = LaurentSeries(Fd, prec, [], prec)
        for i, hi in enumerate(ctx.h):
            pol = hi.derivative() if derive else hi
            if not pol.is_zero():
                acc = acc + _xshift(_hornered(Fd, pol, T, prec), i)
        return acc

    for _ in range(prec.bit_length() + 2):
        F = _h_at(Tser, False)
        if F.is_zero():
            break
        Tser = Tser - F * _h_at(Tser, True).inv()
    if not _h_at(Tser, False).is_zero():
        raise AssertionError("Newton expansion of T did not converge")
    Mser = _hornered(Fd, ctx.M, Tser, prec)
    if Mser.valuation != ctx.b:
        raise AssertionError("M does not vanish to order b at the "
                             "ramified place")
    # sigma_A(mu) and its iterates
    mu = LaurentSeries(Fd, 1, [1], prec)
    S = [mu]
    if s > 1:
        S1 = LaurentSeries(Fd, prec, [], prec)
        for j, c in enumerate(ctx.sigmaA_mu.coeffs):
            if not c.is_zero():
                S1 = S1 + _xshift(_hornered(Fd, c, Tser, prec), j)
        if not ctx.sigma_den_is_one():
            S1 = S1 * _hornered(Fd, ctx.sigma_den, Tser, prec).inv()
        if S1.valuation != 1:
            raise AssertionError("sigma_A(mu) is not a local parameter")
        S.append(S1)
        for _ in range(2, s):
            S.append(_compose(S[-1], S1))
    # message basis
    basis: List[LaurentSeries] = []
    for f in inst.basis:
        ser = LaurentSeries(Fd, prec, [], prec)
        for j, c in enumerate(f.coeffs):
            if not c.is_zero():
                ser = ser + _xshift(_hornered(Fd, c, Tser, prec), j)
        if f.den.degree > 0 or f.den.coeffs != [1]:
            ser = ser * _hornered(Fd, f.den, Tser, prec).inv()
        if f.e:
            ser = ser * Mser.pow(-f.e)
        if not ser.is_zero() and ser.valuation < -inst.ell:
            raise AssertionError("basis expansion has too deep a pole")
        basis.append(ser)
    return PlaceExpansion(Fd, Tser, S, basis, prec)


def expand_message(exp: PlaceExpansion, inst: CodeInstance,
                   f: MessageFunction) -> LaurentSeries:
    """Expansion of an arbitrary message function at the ramified place."""
    Fd = exp.Fd
    prec = exp.prec
    ser = LaurentSeries(Fd, prec, [], prec)
    for j, c in enumerate(f.coeffs):
        if not c.is_zero():
            ser = ser + _xshift(_hornered(Fd, c, exp.Tser, prec), j)
    if f.den.degree > 0 or f.den.coeffs != [1]:
        ser = ser * _hornered(Fd, f.den, exp.Tser, prec).inv()
    if f.e:
        Mser = _hornered(Fd, inst.ctx.M, exp.Tser, prec)
        ser = ser * Mser.pow(-f.e)
    return ser


# ---------------------------------------------------------------------------
# candidate recovery by coefficient peeling

def _coeff_of_product(Fd: FieldCtx, A: LaurentSeries, B: LaurentSeries,
                      e: int) -> int:
    """Coefficient of mu^e in A*B without forming the product."""
    if A.is_zero() or B.is_zero():
        if e >= A.precision + B.valuation or e >= B.precision + A.valuation:
            raise _PrecisionShort()
        return 0
    if e >= A.precision + B.valuation or e >= B.precision + A.valuation:
        raise _PrecisionShort()
    lo = max(A.valuation, e - B.valuation - len(B.coeffs) + 1)
    hi = min(A.valuation + len(A.coeffs) - 1, e - B.valuation)
    acc = 0
    for x in range(lo, hi + 1):
        a = A.coeffs[x - A.valuation]
        if a:
            bb = B.coeffs[e - x - B.valuation]
            if bb:
                acc = Fd.add(acc, Fd.mul(a, bb))
    return acc


def _monomial_products(W: List[LaurentSeries], keys: List[Tuple[int, ...]],
                       one: LaurentSeries) -> Dict[Tuple[int, ...], LaurentSeries]:
    """Products prod_i W[i]^n_i for every needed exponent vector, built
    over the decrement tree so each costs one multiplication."""
    need = set()
    for nvec in keys:
        cur = nvec
        while any(cur):
            need.add(cur)
            i = next(ix for ix, v in enumerate(cur) if v)
            cur = cur[:i] + (cur[i] - 1,) + cur[i + 1:]
    out: Dict[Tuple[int, ...], LaurentSeries] = {tuple([0] * len(W)): one}
    for nvec in sorted(need, key=lambda t: (sum(t), t)):
        i = next(ix for ix, v in enumerate(nvec) if v)
        pred = nvec[:i] + (nvec[i] - 1,) + nvec[i + 1:]
        out[nvec] = out[pred] * W[i]
    return out


def _shift_qsub(qsub: Dict[Tuple[int, ...], LaurentSeries], u: int,
                W: List[LaurentSeries], p: int
                ) -> Dict[Tuple[int, ...], LaurentSeries]:
    """Substitute Z_i -> Z_i + u * W[i] one variable at a time."""
    s = len(W)
    cur = qsub
    for i in range(s):
        wser = W[i].scale(u)
        if wser.is_zero():
            continue
        top = max((nvec[i] for nvec in cur), default=0)
        wpow = [None, wser]
        for _ in range(2, top + 1):
            wpow.append(wpow[-1] * wser)
        new: Dict[Tuple[int, ...], LaurentSeries] = {}
        for nvec, ser in cur.items():
            ni = nvec[i]
            for mi in range(ni + 1):
                cb = math.comb(ni, mi) % p
                if cb == 0:
                    continue
                term = ser if mi == ni else ser * wpow[ni - mi]
                if cb != 1:
                    term = term.scale(cb)
                key = nvec[:i] + (mi,) + nvec[i + 1:]
                got = new.get(key)
                new[key] = term if got is None else got + term
        cur = new
    return {k: v for k, v in cur.items() if not v.is_zero()}


def _coeff_rows(exp: PlaceExpansion, k: int, j: int
                ) -> Tuple[List[List[int]], List[int]]:
    """F_q-linear map from message coordinates to the mu^j expansion
    coefficient, as d rows, plus the Fd values per basis member."""
    Fd = exp.Fd
    vals = []
    for t in range(k):
        ser = exp.basis[t]
        if j >= ser.precision:
            raise _PrecisionShort()
        vals.append(ser.coeff(j))
    digs = [Fd.digits(v) for v in vals]
    d = len(digs[0])
    rows = [[digs[t][dd] for t in range(k)] for dd in range(d)]
    return rows, vals


def _reachable_values(K: FieldCtx, Fd: FieldCtx, rows: List[List[int]],
                      rhs: List[int], vals: List[int], k: int) -> List[int]:
    """All values the next expansion coefficient can take on the affine
    set cut out by the constraints so far."""
    if rows:
        x0 = solve(K, rows, rhs)
        if x0 is None:
            return []
        null = nullspace(K, rows, k)
    else:
        x0 = [0] * k
        null = [[1 if i == t else 0 for i in range(k)] for t in range(k)]

    def image(vec):
        acc = 0
        for t, c in enumerate(vec):
            if c and vals[t]:
                acc = Fd.add(acc, Fd.mul(c, vals[t]))
        return acc

    base = image(x0)
    span = {0}
    for v in null:
        g = image(v)
        if g in span:
            continue
        add = set()
        for w in span:
            for c in range(1, K.order):
                add.add(Fd.add(w, Fd.mul(c, g)))
        span |= add
        if len(span) > PEEL_BRANCH_CAP:
            raise RuntimeError("unconstrained peeling step fans out past "
                               "the branch cap")
    return sorted(Fd.add(base, w) for w in span)


def find_candidates(inst: CodeInstance, phi: PhiPoly, seed: int = 0
                    ) -> List[List[int]]:
    """All messages f with Q(f, sigma_A f, ..., sigma_A^(s-1) f) = 0,
    confirmed as roots of Phi at the residue place.

    The seed only affects root-finding randomness inside a step; the
    output is sorted canonically.
    """
    ctx = inst.ctx
    prec = (phi.Q.delta + 1) * (max(phi.Q.ellq, inst.ell, inst.k) + 2) + 32
    for _ in range(4):
        try:
            return _peel(inst, phi, prec, seed)
        except _PrecisionShort:
            prec *= 2
    raise RuntimeError("peeling precision did not stabilize")


def _peel(inst: CodeInstance, phi: PhiPoly, prec: int, seed: int
          ) -> List[List[int]]:
    ctx = inst.ctx
    K = ctx.K
    p = K.characteristic
    Q = phi.Q
    s, k = Q.s, inst.k
    exp = build_expansion(inst, s, prec)
    Fd = exp.Fd
    one = LaurentSeries(Fd, 0, [1], prec)
    zvec = tuple([0] * s)
    if Q.basis is inst.basis:
        qexp = exp.basis
    else:
        qexp = [expand_message(exp, inst, f) for f in Q.basis]
    qsub0: Dict[Tuple[int, ...], LaurentSeries] = {}
    for nvec, chunk in Q.coeffs.items():
        ser = LaurentSeries(Fd, prec, [], prec)
        for t, x in enumerate(chunk):
            if x:
                ser = ser + qexp[t].scale(x)
        if not ser.is_zero():
            qsub0[nvec] = ser
    vmin = min((b.valuation for b in exp.basis if not b.is_zero()),
               default=0)
    W0 = [ser.pow(vmin) for ser in exp.S]
    found: Dict[Tuple[int, ...], bool] = {}

    def emit(x: List[int]) -> None:
        y = 0
        R = ctx.residue.field
        for t, c in enumerate(x):
            if c:
                y = R.add(y, R.mul(c, inst.basis_at_Aprime[t]))
        if phi_eval(inst, phi, y) == 0:
            found[tuple(x)] = True

    def emit_affine(rows: List[List[int]], rhs: List[int]) -> None:
        x0 = solve(K, rows, rhs) if rows else [0] * k
        if x0 is None:
            return
        null = nullspace(K, rows, k) if rows else \
            [[1 if i == t else 0 for i in range(k)] for t in range(k)]
        total = K.order ** len(null)
        if total > PEEL_BRANCH_CAP:
            raise RuntimeError("terminal peeling state is unconstrained "
                               "past the branch cap")
        stack = [x0]
        for v in null:
            nxt = []
            for base in stack:
                for c in range(K.order):
                    nxt.append([K.add(bb, K.mul(c, vv))
                                for bb, vv in zip(base, v)])
            stack = nxt
        for x in stack:
            emit(x)

    # depth-first peeling; each state owns its substituted polynomial
    stack = [(qsub0, [], [], vmin, W0, -(1 << 60))]
    while stack:
        qsub, rows, rhs, jn, W, checked = stack.pop()
        if rows and len(rows) >= k and rank(K, rows) == k:
            x = solve(K, rows, rhs)
            if x is not None:
                emit(x)
            continue
        if jn - vmin > PEEL_MAX_STEPS:
            raise RuntimeError("peeling did not pin the message "
                               "coordinates")
        zser = qsub.get(zvec)
        tail = [(nvec, ser) for nvec, ser in qsub.items() if any(nvec)]
        if not tail:
            if zser is not None and not zser.is_zero():
                continue
            emit_affine(rows, rhs)
            continue
        estar = min(ser.valuation + sum(nvec) * jn for nvec, ser in tail)
        if any(ser.precision <= estar for _, ser in tail):
            raise _PrecisionShort()
        # coefficients of the tail below estar are impossible; the value
        # series must vanish up to estar on a live branch
        if zser is not None and not zser.is_zero() and \
                zser.valuation < estar:
            continue
        prods = _monomial_products(W, [nvec for nvec, _ in tail], one)
        rc = [0] * (Q.delta + 1)
        if zser is not None:
            rc[0] = _coeff_of_product(Fd, zser, one, estar)
        for nvec, ser in tail:
            c = _coeff_of_product(Fd, ser, prods[nvec], estar)
            m = sum(nvec)
            rc[m] = Fd.add(rc[m], c)
        crows, vals = _coeff_rows(exp, k, jn)
        rpoly = Poly(Fd, rc)
        if rpoly.is_zero():
            cands = _reachable_values(K, Fd, rows, rhs, vals, k)
        else:
            roots = find_roots(rpoly, seed=seed, order=Fd.order)
            cands = []
            for u in roots:
                nrows = rows + crows
                nrhs = rhs + Fd.digits(u)
                if solve(K, nrows, nrhs) is not None:
                    cands.append(u)
        Wnext = [w * sig for w, sig in zip(W, exp.S)]
        for u in cands:
            stack.append((_shift_qsub(qsub, u, W, p),
                          rows + crows, rhs + Fd.digits(u),
                          jn + 1, Wnext, estar + 1))
    msgs = sorted(found, key=lambda x: tuple(K.render(c) for c in x))
    return [list(x) for x in msgs]


def find_candidates_bigfield(inst: CodeInstance, phi: PhiPoly,
                             seed: int = 0) -> List[List[int]]:
    """Literal root search: gcd of the dense Phi with the residue field
    equation, then equal-degree splitting and evaluation inversion.

    The modular exponentiation walks the full field order, so this is
    only usable when q^(D*b) is small; it exists as a cross-check."""
    ctx = inst.ctx
    R = ctx.residue.field
    order = R.order
    dense = [0] * (phi.degree + 1)
    for e, c in phi.terms.items():
        dense[e] = c
    f = Poly(R, dense).monic()
    xq = modexp(Poly(R, [0, 1]), order, f)
    g = gcd(xq - Poly(R, [0, 1]), f)
    roots: List[int] = []
    if f.coeffs[0] == 0:
        roots.append(0)
    roots.extend(find_roots(g, seed=seed, order=order) if g.degree > 0
                 else [])
    out = []
    for y in sorted(set(roots)):
        x = invert_evaluation(inst, y)
        if x is not None:
            out.append(x)
    K = ctx.K
    out.sort(key=lambda x: tuple(K.render(c) for c in x))
    return out


# ---------------------------------------------------------------------------
# the full pipeline

def decode(inst: CodeInstance, params: DecoderParams, received: FoldedWord,
           seed: int = 0, bigfield: bool = False
           ) -> Tuple[List[Tuple[List[int], int]], Dict[str, object]]:
    """List decode: messages whose encodings agree with the received
    word in at least N - e positions, with their agreement counts,
    sorted canonically, plus a diagnostics mapping."""
    t0 = time.time()
    Q = interpolate(inst, params, received)
    t1 = time.time()
    phi = build_phi(inst, Q)
    if bigfield:
        cands = find_candidates_bigfield(inst, phi, seed=seed)
    else:
        cands = find_candidates(inst, phi, seed=seed)
    t2 = time.time()
    qDs = (inst.ctx.q ** inst.ctx.D) ** params.s
    if len(cands) > qDs:
        raise AssertionError("candidate list exceeds the degree bound")
    need = inst.N - params.e
    out: List[Tuple[List[int], int]] = []
    for msg in cands:
        word = encode(inst, msg)
        agree = sum(1 for a, b in zip(word.symbols, received.symbols)
                    if a == b)
        if agree >= need:
            out.append((msg, agree))
    K = inst.ctx.K
    out.sort(key=lambda mx: tuple(K.render(c) for c in mx[0]))
    diag = {
        "constraints": params.constraints,
        "rows": params.rows,
        "unknowns": params.unknowns,
        "q_terms": len(Q.coeffs),
        "deg_phi": phi.degree,
        "phi_terms": len(phi.terms),
        "candidates": len(cands),
        "list_size": len(out),
        "interpolate_seconds": round(t1 - t0, 3),
        "rootfind_seconds": round(t2 - t1, 3),
    }
    return out, diag


def list_recover(inst: CodeInstance, params: DecoderParams,
                 sets: Sequence[Sequence[Sequence[int]]], seed: int = 0
                 ) -> Tuple[List[Tuple[List[int], int]], Dict[str, object]]:
    """decode with per-position candidate sets: one constraint block per
    (position, set element); agreement counts a position when the
    encoded symbol lies in its set.  Empty sets contribute nothing."""
    if len(sets) != inst.N:
        raise ValueError("need one candidate set per folded position")
    s, w, delta = params.s, params.w, params.delta
    blocks = _constraint_blocks(inst, s, sets)
    nconstraints = len(blocks) * math.comb(w + s - 1, s)
    nrows = len(blocks) * math.comb(w + s, s + 1)
    nmono = math.comb(delta + s, s)
    # re-widen the coefficient space for the multiplied block count
    ellq, kq = _widen_coefficient_space(inst, nrows, nmono)
    if kq * nmono <= nrows:
        raise ValueError("infeasible: candidate sets add more constraints "
                         "than free unknowns")
    pole = inst.ctx.d * (ellq + inst.ell * delta)
    max_e = inst.N - math.ceil((pole + 1) / ((inst.m - s + 1) * w))
    params = DecoderParams(s, w, delta, params.zeta, params.e, max_e,
                           kq * nmono, nconstraints, nrows, ellq, kq, True)
    Q = _interpolate_blocks(inst, params, blocks)
    phi = build_phi(inst, Q)
    cands = find_candidates(inst, phi, seed=seed)
    need = inst.N - params.e
    out: List[Tuple[List[int], int]] = []
    for msg in cands:
        word = encode(inst, msg)
        agree = sum(1 for sym, cset in zip(word.symbols, sets)
                    if any(tuple(sym) == tuple(c) for c in cset))
        if agree >= need:
            out.append((msg, agree))
    K = inst.ctx.K
    out.sort(key=lambda mx: tuple(K.render(c) for c in mx[0]))
    diag = {
        "constraints": nconstraints,
        "rows": len(blocks) * math.comb(params.w + params.s, params.s + 1),
        "unknowns": params.unknowns,
        "deg_phi": phi.degree,
        "candidates": len(cands),
        "list_size": len(out),
    }
    return out, diag


def report(diag: Dict[str, object]) -> str:
    """key=value diagnostics block for harness logs."""
    return "\n".join("%s=%s" % (kk, diag[kk]) for kk in sorted(diag))
