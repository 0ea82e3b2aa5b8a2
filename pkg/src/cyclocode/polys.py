"""
polys.py

Univariate polynomials and Laurent series over a FieldCtx: the arithmetic
substrate for everything else in the package.

Polynomials are coefficient lists of raw field ints (see gf.py for the
element encoding), ascending degree, with no trailing zeros; the zero
polynomial is the empty list.  Laurent series live in the completion at
the infinite place of F_q(T): the series variable x is 1/T, so v(T) = -1,
and a series carries an explicit precision (exponents >= precision are
unknown).
"""

from __future__ import annotations

import random
from typing import List, Optional, Sequence, Tuple

from .gf import FieldCtx, factorize

KARATSUBA_THRESHOLD = 48
PACKED_THRESHOLD = 16


class Poly:
    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: FieldCtx, coeffs: Sequence[int]):
        cs = list(coeffs)
        while cs and cs[-1] == 0:
            cs.pop()
        self.ctx = ctx
        self.coeffs = cs

    # degree of 0 is the sentinel -1 (every real degree is >= 0)
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def __eq__(self, other):
        return (isinstance(other, Poly) and self.ctx == other.ctx
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def __repr__(self):
        return "Poly(%s)" % ",".join(self.ctx.render(c) for c in self.coeffs) if self.coeffs else "Poly(0)"

    def __add__(self, other: "Poly") -> "Poly":
        a, b, K = self.coeffs, other.coeffs, self.ctx
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = K.add(out[i], c)
        return Poly(K, out)

    def __neg__(self) -> "Poly":
        K = self.ctx
        return Poly(K, [K.neg(c) for c in self.coeffs])

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        K = self.ctx
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly(K, [])
        return Poly(K, _mul_lists(K, a, b))

    def scale(self, c: int) -> "Poly":
        K = self.ctx
        if c == 0:
            return Poly(K, [])
        return Poly(K, [K.mul(c, x) for x in self.coeffs])

    def shift(self, k: int) -> "Poly":
        """Multiply by x^k."""
        if self.is_zero():
            return self
        return Poly(self.ctx, [0] * k + self.coeffs)

    def monic(self) -> "Poly":
        if self.is_zero() or self.is_monic():
            return self
        return self.scale(self.ctx.inv(self.coeffs[-1]))

    def eval(self, x: int) -> int:
        K = self.ctx
        acc = 0
        for c in reversed(self.coeffs):
            acc = K.add(K.mul(acc, x), c)
        return acc

    def derivative(self) -> "Poly":
        K = self.ctx
        p = K.characteristic
        out = []
        for i in range(1, len(self.coeffs)):
            c = self.coeffs[i]
            k = i % p
            acc = 0
            for _ in range(k):
                acc = K.add(acc, c)
            out.append(acc)
        return Poly(K, out)

    def render(self) -> str:
        return ",".join(self.ctx.render(c) for c in self.coeffs)

    @classmethod
    def parse(cls, ctx: FieldCtx, text: str) -> "Poly":
        text = text.strip()
        if not text:
            return cls(ctx, [])
        return cls(ctx, [ctx.parse(t) for t in text.split(",")])

    @classmethod
    def x(cls, ctx: FieldCtx) -> "Poly":
        return cls(ctx, [0, 1])

    @classmethod
    def const(cls, ctx: FieldCtx, c: int) -> "Poly":
        return cls(ctx, [c])


def _mul_lists(K: FieldCtx, a: List[int], b: List[int]) -> List[int]:
    n, m = len(a), len(b)
    if K.characteristic == 2 and min(n, m) >= PACKED_THRESHOLD:
        return _mul_lists_packed(K, a, b)
    if min(n, m) < KARATSUBA_THRESHOLD:
        out = [0] * (n + m - 1)
        mul, add = K.mul, K.add
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        out[i + j] = add(out[i + j], mul(ai, bj))
        return out
    h = min(n, m) // 2
    a0, a1 = a[:h], a[h:]
    b0, b1 = b[:h], b[h:]
    z0 = _mul_lists(K, a0, b0)
    z2 = _mul_lists(K, a1, b1)
    s1 = _add_lists(K, a0, a1)
    s2 = _add_lists(K, b0, b1)
    z1 = _mul_lists(K, s1, s2)
    z1 = _sub_lists(K, _sub_lists(K, z1, z0), z2)
    out = [0] * (n + m - 1)
    for i, c in enumerate(z0):
        out[i] = K.add(out[i], c)
    for i, c in enumerate(z1):
        out[i + h] = K.add(out[i + h], c)
    for i, c in enumerate(z2):
        out[i + 2 * h] = K.add(out[i + 2 * h], c)
    return out


_STRUCTURE_CACHE: dict = {}


def _mul_lists_packed(K: FieldCtx, a: List[int], b: List[int]) -> List[int]:
    """Convolution over a characteristic-2 tower via native big-integer
    multiplication.  Field elements are F_2 coordinate vectors, so the
    product's component t2 is an F_2-bilinear form: split both operands
    into component bit sequences, pack each into an integer with 32-bit
    lanes, multiply (lanes collect coefficient-pair counts), and combine
    the pair products through the field's structure constants; the F_2
    answer is each lane's parity."""
    mm = (K.order - 1).bit_length()
    key = id(K)
    struct = _STRUCTURE_CACHE.get(key)
    if struct is None:
        struct = [[K.mul(1 << t, 1 << u) for u in range(mm)] for t in range(mm)]
        _STRUCTURE_CACHE[key] = (K, struct)
    else:
        struct = struct[1]
    lane = 4  # bytes per lane; counts stay far below 2^32
    apack = []
    for t in range(mm):
        buf = bytearray(len(a) * lane)
        for i, ai in enumerate(a):
            if (ai >> t) & 1:
                buf[i * lane] = 1
        apack.append(int.from_bytes(buf, "little"))
    bpack = []
    for u in range(mm):
        buf = bytearray(len(b) * lane)
        for j, bj in enumerate(b):
            if (bj >> u) & 1:
                buf[j * lane] = 1
        bpack.append(int.from_bytes(buf, "little"))
    nout = len(a) + len(b) - 1
    acc = [0] * mm
    for t in range(mm):
        at = apack[t]
        if not at:
            continue
        for u in range(mm):
            bu = bpack[u]
            if not bu:
                continue
            g = struct[t][u]
            if not g:
                continue
            prod = at * bu
            for t2 in range(mm):
                if (g >> t2) & 1:
                    acc[t2] += prod
    out = [0] * nout
    for t2 in range(mm):
        if not acc[t2]:
            continue
        data = acc[t2].to_bytes(nout * lane + lane, "little")
        for i in range(nout):
            if data[i * lane] & 1:
                out[i] |= 1 << t2
    return out


def _add_lists(K, a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] = K.add(out[i], c)
    return out


def _sub_lists(K, a, b):
    out = list(a) + [0] * max(0, len(b) - len(a))
    for i, c in enumerate(b):
        out[i] = K.sub(out[i], c)
    return out


def divrem(a: Poly, b: Poly) -> Tuple[Poly, Poly]:
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    K = a.ctx
    if K != b.ctx:
        raise ValueError("coefficient field mismatch")
    r = list(a.coeffs)
    db = b.degree
    if a.degree < db:
        return Poly(K, []), a
    inv_lead = K.inv(b.coeffs[-1])
    q = [0] * (a.degree - db + 1)
    bc = b.coeffs
    for i in range(len(r) - 1, db - 1, -1):
        c = r[i]
        if c:
            c = K.mul(c, inv_lead)
            q[i - db] = c
            for j in range(db + 1):
                if bc[j]:
                    r[i - db + j] = K.sub(r[i - db + j], K.mul(c, bc[j]))
    return Poly(K, q), Poly(K, r[:db])


def pmod(a: Poly, m: Poly) -> Poly:
    return divrem(a, m)[1]


def gcd(a: Poly, b: Poly) -> Poly:
    while not b.is_zero():
        a, b = b, pmod(a, b)
    return a.monic()


def xgcd(a: Poly, b: Poly) -> Tuple[Poly, Poly, Poly]:
    """(g, u, v) with u*a + v*b = g, g monic."""
    K = a.ctx
    r0, r1 = a, b
    u0, u1 = Poly.const(K, 1), Poly(K, [])
    v0, v1 = Poly(K, []), Poly.const(K, 1)
    while not r1.is_zero():
        q, r = divrem(r0, r1)
        r0, r1 = r1, r
        u0, u1 = u1, u0 - q * u1
        v0, v1 = v1, v0 - q * v1
    if r0.is_zero():
        return r0, u0, v0
    c = K.inv(r0.coeffs[-1])
    return r0.scale(c), u0.scale(c), v0.scale(c)


def modmul(a: Poly, b: Poly, m: Poly) -> Poly:
    return pmod(a * b, m)


def modexp(a: Poly, e: int, m: Poly) -> Poly:
    """a^e mod m by square-and-multiply over the big-integer exponent."""
    if e < 0:
        raise ValueError("negative exponent")
    K = a.ctx
    r = Poly.const(K, 1)
    a = pmod(a, m)
    while e:
        if e & 1:
            r = modmul(r, a, m)
        a = modmul(a, a, m)
        e >>= 1
    return r


def modinv(a: Poly, m: Poly) -> Poly:
    g, u, _ = xgcd(pmod(a, m), m)
    if g.degree != 0:
        raise ZeroDivisionError("not invertible modulo m")
    return pmod(u, m)


def poly_arith(a: Poly, b: Poly, op: str, e: Optional[int] = None,
               modulus: Optional[Poly] = None):
    """Dispatcher kept for symmetry with the operation-style API."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "divrem":
        return divrem(a, b)
    if op == "gcd":
        return gcd(a, b)
    if op == "modexp":
        return modexp(a, e, modulus)
    raise ValueError("unknown op %r" % op)


# ---------------------------------------------------------------------------
# irreducibility and roots

def irreducible_test(f: Poly) -> bool:
    """Rabin's criterion: x^(s^n) = x mod f and gcd(x^(s^(n/p)) - x, f) = 1
    for every prime p | n, where s is the coefficient field order."""
    if not f.is_monic():
        raise ValueError("irreducible_test wants a monic polynomial")
    n = f.degree
    if n < 1:
        raise ValueError("degree must be >= 1")
    if n == 1:
        return True
    K = f.ctx
    s = K.order
    x = Poly.x(K)
    if modexp(x, s**n, f) != pmod(x, f):
        return False
    for p in factorize(n):
        g = modexp(x, s**(n // p), f) - x
        if gcd(g, f).degree != 0:
            return False
    return True


def _frobenius_image(f: Poly, order: int) -> Poly:
    """x^order mod f (order = exact field size, may be astronomically big)."""
    return modexp(Poly.x(f.ctx), order, f)


def _split_equal(f: Poly, d: int, order: int, rng: random.Random) -> List[Poly]:
    """Split f, a product of distinct irreducibles of degree d, into those
    irreducibles (Cantor-Zassenhaus; characteristic 2 uses the trace map)."""
    K = f.ctx
    if f.degree == d:
        return [f.monic()]
    n_ext = order**d
    out: List[Poly] = []
    stack = [f.monic()]
    while stack:
        g = stack.pop()
        if g.degree == d:
            out.append(g)
            continue
        while True:
            u = Poly(K, [rng.randrange(K.order) for _ in range(g.degree)])
            if u.is_zero():
                continue
            if K.characteristic == 2:
                # additive trace of u over F_2 down from the degree-d factor field
                tbits = n_ext.bit_length() - 1
                tr = Poly(K, [])
                v = pmod(u, g)
                for _ in range(tbits):
                    tr = tr + v
                    v = modmul(v, v, g)
                h = gcd(tr, g)
            else:
                h = gcd(modexp(u, (n_ext - 1) // 2, g) - Poly.const(K, 1), g)
            if 0 < h.degree < g.degree:
                stack.append(h)
                stack.append(divrem(g, h)[0])
                break
    return out


def equal_degree_split(f: Poly, d: int, seed: int = 0,
                       order: Optional[int] = None) -> List[Poly]:
    if f.is_zero():
        raise ValueError("zero polynomial")
    if order is None:
        order = f.ctx.order
    return _split_equal(f, d, order, random.Random(seed))


def find_roots(f: Poly, seed: int = 0, order: Optional[int] = None) -> List[int]:
    """All distinct roots of f in its coefficient field, sorted.

    order: exact field size; pass it explicitly for towers whose top level
    is too large for ctx introspection shortcuts (it defaults to ctx.order).
    """
    if f.is_zero():
        raise ValueError("zero polynomial")
    K = f.ctx
    if order is None:
        order = K.order
    f = f.monic()
    if f.degree == 0:
        return []
    # strip x | f
    roots = []
    if f.coeffs[0] == 0:
        roots.append(0)
        k = 0
        while f.coeffs[k] == 0:
            k += 1
        f = Poly(K, f.coeffs[k:])
    if f.degree == 0:
        return roots
    # fully-split squarefree part: gcd(f, x^order - x)
    xq = _frobenius_image(f, order)
    g = gcd(xq - Poly.x(K), f)
    if g.degree == 0:
        return sorted(roots)
    for lin in _split_equal(g, 1, order, random.Random(seed)):
        roots.append(K.neg(lin.coeffs[0]))
    return sorted(roots)


def master_poly(ctx: FieldCtx, points: Sequence[int]) -> Poly:
    """prod (x - p) over the points."""
    master = Poly.const(ctx, 1)
    for xj in points:
        master = master * Poly(ctx, [ctx.neg(xj), 1])
    return master


def interpolate(ctx: FieldCtx, points: Sequence[int], values: Sequence[int]) -> Poly:
    """Lagrange interpolation; points must be distinct."""
    if len(points) != len(values):
        raise ValueError("points/values length mismatch")
    K = ctx
    master = master_poly(ctx, points)
    result = Poly(K, [])
    for xi, yi in zip(points, values):
        if yi == 0:
            continue
        # master / (x - xi) by synthetic division
        num = [0] * (len(master.coeffs) - 1)
        carry = 0
        for j in range(len(master.coeffs) - 1, 0, -1):
            carry = K.add(master.coeffs[j], K.mul(carry, xi))
            num[j - 1] = carry
        numpoly = Poly(K, num)
        den = numpoly.eval(xi)
        result = result + numpoly.scale(K.mul(yi, K.inv(den)))
    return result


def rational_reconstruct(F: Poly, Pi: Poly, num_bound: int
                         ) -> Optional[Tuple[Poly, Poly]]:
    """The reduced num/den with monic den, deg num <= num_bound,
    deg den <= deg Pi - num_bound - 1, and num = F * den (mod Pi), or
    None if the extended Euclidean cutoff yields no valid pair."""
    ctx = F.ctx
    den_bound = Pi.degree - num_bound - 1
    if den_bound < 0 or num_bound < 0:
        raise ValueError("reconstruction bounds out of range")
    r0, r1 = Pi, pmod(F, Pi)
    s0, s1 = Poly.const(ctx, 0), Poly.const(ctx, 1)
    while r1.degree > num_bound:
        if r1.is_zero():
            return None
        qq, rr = divrem(r0, r1)
        r0, r1 = r1, rr
        s0, s1 = s1, s0 - qq * s1
    num, den = r1, s1
    if den.is_zero():
        return None
    g = gcd(num, den)
    if g.degree > 0:
        num, _ = divrem(num, g)
        den, _ = divrem(den, g)
    lc = den.coeffs[-1]
    if lc != 1:
        inv = ctx.inv(lc)
        num = num.scale(inv)
        den = den.scale(inv)
    if den.degree > den_bound:
        return None
    if not pmod(num - F * den, Pi).is_zero():
        return None
    return num, den


def rational_interpolate(ctx: FieldCtx, points: Sequence[int],
                         values: Sequence[int], den_bound: int
                         ) -> Optional[Tuple[Poly, Poly]]:
    """Cauchy interpolation: the unique num/den with deg den <= den_bound
    and deg num <= len(points)-1-den_bound matching all the values, as a
    reduced pair with monic den, or None if no such function exists.
    The denominator must not vanish at any of the points."""
    n = len(points)
    if not 0 <= den_bound < n:
        raise ValueError("denominator bound out of range")
    F = interpolate(ctx, points, values)
    Pi = master_poly(ctx, points)
    got = rational_reconstruct(F, Pi, n - 1 - den_bound)
    if got is None:
        return None
    num, den = got
    for x0, y0 in zip(points, values):
        dv = den.eval(x0)
        if dv == 0 or num.eval(x0) != ctx.mul(y0, dv):
            return None
    return num, den


def crt_combine(residues: Sequence[Poly], moduli: Sequence[Poly]
                ) -> Tuple[Poly, Poly]:
    """The unique F with F = residues[i] (mod moduli[i]) and
    deg F < sum of moduli degrees, plus the product of the moduli.
    Moduli must be pairwise coprime."""
    G = residues[0]
    Pi = moduli[0]
    for res, P in zip(residues[1:], moduli[1:]):
        delta = pmod(res - G, P)
        if not delta.is_zero():
            corr = pmod(delta * modinv(pmod(Pi, P), P), P)
            G = G + Pi * corr
        Pi = Pi * P
    return G, Pi


# ---------------------------------------------------------------------------
# Laurent series at the infinite place (series in x = 1/T, v(T) = -1)

class LaurentSeries:
    """coeffs[i] is the coefficient of x^(valuation + i); exponents >=
    precision are unknown.  A series that is 0 to its precision has empty
    coeffs and valuation == precision."""

    __slots__ = ("ctx", "valuation", "coeffs", "precision")

    def __init__(self, ctx: FieldCtx, valuation: int, coeffs: Sequence[int],
                 precision: int):
        cs = list(coeffs)
        while cs and cs[0] == 0:
            cs.pop(0)
            valuation += 1
        if valuation >= precision:
            cs = []
            valuation = precision
        elif len(cs) > precision - valuation:
            cs = cs[:precision - valuation]
        while cs and cs[-1] == 0:
            cs.pop()
        if not cs:
            valuation = precision
        self.ctx = ctx
        self.valuation = valuation
        self.coeffs = cs
        self.precision = precision

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, e: int) -> int:
        if e >= self.precision:
            raise ValueError("coefficient beyond precision")
        i = e - self.valuation
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return 0

    def __eq__(self, other):
        return (isinstance(other, LaurentSeries) and self.ctx == other.ctx
                and self.valuation == other.valuation
                and self.coeffs == other.coeffs
                and self.precision == other.precision)

    def __repr__(self):
        return "LaurentSeries(v=%d, prec=%d, %s)" % (
            self.valuation, self.precision,
            ",".join(self.ctx.render(c) for c in self.coeffs[:8]))

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        K = self.ctx
        prec = min(self.precision, other.precision)
        v = min(self.valuation, other.valuation, prec)
        out = [0] * (prec - v)
        for s in (self, other):
            for i, c in enumerate(s.coeffs):
                e = s.valuation + i
                if e < prec:
                    out[e - v] = K.add(out[e - v], c)
        return LaurentSeries(K, v, out, prec)

    def __neg__(self) -> "LaurentSeries":
        K = self.ctx
        return LaurentSeries(K, self.valuation, [K.neg(c) for c in self.coeffs],
                             self.precision)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "LaurentSeries") -> "LaurentSeries":
        K = self.ctx
        if self.is_zero() or other.is_zero():
            # 0*x: known to be 0 out to the best provable precision
            prec = min(self.precision + other.valuation,
                       other.precision + self.valuation)
            return LaurentSeries(K, prec, [], prec)
        prec = min(self.precision + other.valuation,
                   other.precision + self.valuation)
        v = self.valuation + other.valuation
        keep = prec - v
        a = self.coeffs[:keep]
        b = other.coeffs[:keep]
        out = _mul_lists(K, a, b)[:keep]
        return LaurentSeries(K, v, out, prec)

    def scale(self, c: int) -> "LaurentSeries":
        K = self.ctx
        if c == 0:
            return LaurentSeries(K, self.precision, [], self.precision)
        return LaurentSeries(K, self.valuation,
                             [K.mul(c, x) for x in self.coeffs], self.precision)

    def inv(self) -> "LaurentSeries":
        if self.is_zero():
            raise ZeroDivisionError("inverse of a series that is 0 to precision")
        K = self.ctx
        v = self.valuation
        rel = self.precision - v          # relative precision
        a = self.coeffs + [0] * (rel - len(self.coeffs))
        lead_inv = K.inv(a[0])
        out = [0] * rel
        out[0] = lead_inv
        for i in range(1, rel):
            acc = 0
            for j in range(1, i + 1):
                if j < len(a) and a[j] and out[i - j]:
                    acc = K.add(acc, K.mul(a[j], out[i - j]))
            out[i] = K.neg(K.mul(acc, lead_inv))
        return LaurentSeries(K, -v, out, -v + rel)

    def pow(self, e: int) -> "LaurentSeries":
        if e < 0:
            return self.inv().pow(-e)
        K = self.ctx
        r = LaurentSeries.one(K, self.precision - self.valuation)
        base = self
        # keep 'one' at compatible precision: multiply adjusts automatically
        first = True
        while e:
            if e & 1:
                r = base if first else r * base
                first = False
            base = base * base
            e >>= 1
        if first:
            return LaurentSeries(K, 0, [1], self.precision - self.valuation)
        return r

    @classmethod
    def one(cls, ctx: FieldCtx, precision: int) -> "LaurentSeries":
        return cls(ctx, 0, [1], precision)

    @classmethod
    def from_T_poly(cls, p: Poly, precision: int) -> "LaurentSeries":
        """Embed a polynomial in T: T^j = x^(-j)."""
        if p.is_zero():
            return cls(p.ctx, precision, [], precision)
        d = p.degree
        return cls(p.ctx, -d, list(reversed(p.coeffs)), precision)


def eval_poly_series(coeffs: Sequence[LaurentSeries], z: LaurentSeries) -> LaurentSeries:
    """Horner evaluation of a polynomial whose coefficients are series."""
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * z + c
    return acc


# ---------------------------------------------------------------------------
# series roots of a T-polynomial in Z at the infinite place

def laurent_roots(h_coeffs: Sequence[Poly], count: int, precision: int,
                  ) -> List[LaurentSeries]:
    """The `count` distinct Laurent-series roots of the monic polynomial
    h(Z) = sum h_coeffs[i] Z^i (coefficients in F_q[T]), computed to the
    requested precision.

    Initial segments come from the Newton polygon with respect to v(T) = -1
    (integral slopes are required; the residual equation at each slope is
    solved over F_q), recursing on repeated residual roots until the roots
    separate; simple roots are then lifted by quadratically convergent
    Newton iteration.
    """
    K = h_coeffs[0].ctx
    if h_coeffs[-1].coeffs != [1]:
        raise ValueError("leading coefficient must be 1")
    # exact Laurent-polynomial coefficients: dict exponent-of-x -> field int
    hexact = []
    for p in h_coeffs:
        dd = {}
        for j, c in enumerate(p.coeffs):
            if c:
                dd[-j] = c
        hexact.append(dd)
    return _series_roots_core(K, hexact, count, precision)


def taylor_shift(p: Poly, beta: int) -> Poly:
    """Coefficients of p(beta + t) as a polynomial in t (synthetic
    division by T - beta, repeatedly)."""
    K = p.ctx
    cs = list(p.coeffs)
    out = []
    while cs:
        quo = []
        rem = 0
        for c in reversed(cs):
            rem = K.add(K.mul(rem, beta), c)
            quo.append(rem)
        out.append(rem)
        quo.pop()
        cs = list(reversed(quo))
    return Poly(K, out)


def series_roots_at(h_coeffs: Sequence[Poly], beta: int, count: int,
                    precision: int) -> List[LaurentSeries]:
    """The `count` distinct power-series roots of the monic h(Z) over
    F_q[[t]] at the finite point T = beta + t, to the requested precision.
    Same engine as laurent_roots after the Taylor shift."""
    K = h_coeffs[0].ctx
    if h_coeffs[-1].coeffs != [1]:
        raise ValueError("leading coefficient must be 1")
    hexact = []
    for p in h_coeffs:
        sh = taylor_shift(p, beta)
        hexact.append({j: c for j, c in enumerate(sh.coeffs) if c})
    return _series_roots_core(K, hexact, count, precision)


def _series_roots_core(K, hexact: List[dict], count: int, precision: int
                       ) -> List[LaurentSeries]:
    b = len(hexact) - 1
    roots = _puiseux(K, hexact)
    if len(roots) != count:
        raise ValueError("expected %d series roots, found %d" % (count, len(roots)))
    # The prefixes give the exact pairwise divergence exponents, hence for
    # each root the exact valuation of h' there (sep = sum of the distances
    # to the other roots) and the largest single distance dmax.  A Newton
    # step from a point accurate to a > dmax digits is accurate to
    # 2a - dmax, and evaluating h there leaves sep digits of slack, so the
    # working precision carries guard digits for both; evaluating at series
    # of negative valuation v additionally loses about b*|v| digits.
    maxpole = max(0, -min((min(d) for d in hexact if d), default=0))
    dist_table = _prefix_distances(roots)
    out = []
    for idx, prefix in enumerate(roots):
        dists = dist_table[idx]
        sep = sum(dists)
        dmax = max(dists) if dists else 0
        work = precision + 2 * max(0, sep) + (b + 2) * maxpole + 8
        hp = [LaurentSeries(K, min(d) if d else work,
                            _dict_to_list(K, d, work), work) for d in hexact]
        dh = _series_poly_derivative(K, hp)
        z = LaurentSeries(K, min(prefix) if prefix else work,
                          _dict_to_list(K, prefix, work), work)
        acc = (max(prefix) + 1) if prefix else work
        z = _newton_lift(K, hp, dh, z, work, acc, dmax, precision)
        # defining property and prefix retention, before truncation; the bar
        # precision + sep certifies the digits below precision are exact
        val = eval_poly_series(hp, z)
        if not (val.is_zero() or val.valuation >= precision + sep):
            raise AssertionError("series root fails to kill h to precision")
        for e, c in prefix.items():
            if e < z.precision and z.coeff(e) != c:
                raise AssertionError("Newton lifting drifted off its branch")
        vz = z.valuation
        out.append(LaurentSeries(K, vz, z.coeffs[:precision - vz], precision))
    if len(set((z.valuation, tuple(z.coeffs)) for z in out)) != count:
        raise AssertionError("series roots not distinct at the computed digits")
    return out


def _prefix_distances(prefixes: List[dict]) -> List[List[int]]:
    """dist_table[i] lists, for each other prefix, the first exponent where
    the two roots differ; the branch refinement guarantees every divergence
    is recorded inside both prefixes, so these are exact."""
    n = len(prefixes)
    table: List[List[int]] = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            keys = [e for e in set(prefixes[i]) | set(prefixes[j])
                    if prefixes[i].get(e, 0) != prefixes[j].get(e, 0)]
            if not keys:
                raise AssertionError("two series roots share their full "
                                     "computed prefix")
            d = min(keys)
            table[i].append(d)
            table[j].append(d)
    return table


def _dict_to_list(K, d: dict, precision: int) -> List[int]:
    if not d:
        return []
    v = min(d)
    out = [0] * (min(precision, max(d) + 1) - v)
    for e, c in d.items():
        if e < precision:
            out[e - v] = c
    return out


def _series_poly_derivative(K, hp: List[LaurentSeries]) -> List[LaurentSeries]:
    out = []
    p = K.characteristic
    for i in range(1, len(hp)):
        k = i % p
        acc = hp[i].scale(0)
        for _ in range(k):
            acc = acc + hp[i]
        out.append(acc)
    return out


def _newton_lift(K, hp, dh, z: LaurentSeries, work: int, acc: int,
                 dmax: int, target: int) -> LaurentSeries:
    """Lift z, accurate to acc digits past its prefix (acc > dmax, the
    largest divergence exponent toward another root), until it is accurate
    to target digits.  Precision tags erode through the division by h'(z),
    so each step re-claims the full working precision (the iterate is an
    exact series either way) and the true accuracy is tracked explicitly."""
    guard = 0
    while acc < target:
        fz = eval_poly_series(hp, z)
        if fz.is_zero():
            return z
        dz = eval_poly_series(dh, z)
        step = fz * dz.inv()
        if step.is_zero():
            acc = max(acc, step.precision)
            if acc < target:
                raise AssertionError("Newton lifting stalled short of the "
                                     "requested precision")
            return z
        z2 = z - step
        gained = min(2 * acc - dmax, step.precision)
        if gained <= acc:
            raise AssertionError("Newton lifting stalled short of the "
                                 "requested precision")
        acc = gained
        z = LaurentSeries(K, z2.valuation, z2.coeffs, work)
        guard += 1
        if guard > work + 64:
            raise AssertionError("Newton lifting failed to converge")
    return z


def _puiseux(K, hexact: List[dict]) -> List[dict]:
    """Initial segments (as exact exponent->coeff dicts) of all roots of the
    monic h given by exact Laurent-polynomial coefficient dicts.  Branches
    with multiple residual roots are refined on an explicit worklist (the
    common prefix of a cluster of roots can be very long, so recursion is
    out), and a continuation only inspects the positive-slope part of its
    Newton polygon: the sibling roots split off at an earlier level and
    re-deriving them at every depth would repeat the whole tree's work."""
    results: List[dict] = []
    # (prefix, its polynomial in local coordinates, exponent offset of the
    #  local coordinates, roots the branch must yield, positive slopes only)
    work = [({}, hexact, 0, len(hexact) - 1, False)]
    while work:
        prefix, hcur, off, want, cont = work.pop()
        found = 0
        # exact root Z = 0: the branch root is exactly the prefix
        while not hcur[0] and len(hcur) > 1:
            results.append(dict(prefix))
            found += 1
            hcur = hcur[1:]
        if len(hcur) > 1:
            # Newton polygon: lower hull of (i, v(c_i)) for nonzero c_i
            pts = [(i, min(d)) for i, d in enumerate(hcur) if d]
            hull = _lower_hull(pts)
            for (i1, v1), (i2, v2) in zip(hull, hull[1:]):
                num, den = v1 - v2, i2 - i1
                if cont and num <= 0:
                    continue    # sibling roots, already found at an
                                # earlier level
                if num % den != 0:
                    raise ValueError("non-integral Newton polygon slope")
                w = num // den  # valuation of the i2-i1 roots on this edge
                # residual equation over the residue field
                res = [0] * (i2 - i1 + 1)
                for i in range(i1, i2 + 1):
                    res[i - i1] = hcur[i].get(v1 - w * (i - i1), 0)
                rp = Poly(K, res)
                edge_roots = 0
                for alpha in find_roots(rp):
                    if alpha == 0:
                        continue
                    # multiplicity by repeated division
                    mult = 0
                    g = rp
                    lin = Poly(K, [K.neg(alpha), 1])
                    while True:
                        qt, rm = divrem(g, lin)
                        if not rm.is_zero():
                            break
                        g = qt
                        mult += 1
                    ext = dict(prefix)
                    ext[off + w] = alpha
                    if mult == 1:
                        results.append(ext)
                    else:
                        # shift h(Z) -> h(x^w (alpha + Z)), normalized; the
                        # branch continues along roots of positive valuation
                        work.append((ext, _shift_scale(K, hcur, w, alpha),
                                     off + w, mult, True))
                    edge_roots += mult
                if edge_roots != i2 - i1:
                    raise ValueError("residual equation short of roots; "
                                     "roots are not all in the Laurent field")
                found += edge_roots
        if cont and found != want:
            raise AssertionError("branch continuation count mismatch")
    return results


def _lower_hull(pts: List[Tuple[int, int]]) -> List[Tuple[int, int]]:
    pts = sorted(pts)
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # keep hull lower-convex: remove if p makes hull[-1] non-extreme
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _shift_scale(K, hexact: List[dict], w: int, alpha: int) -> List[dict]:
    """Coefficients of g(Z) = h(x^w * (alpha + Z)) / x^(w*b), exactly."""
    b = len(hexact) - 1
    # scale: coefficient i picks up x^(w*i - w*b) relative normalization
    scaled = []
    for i, d in enumerate(hexact):
        scaled.append({e + w * i - w * b: c for e, c in d.items()})
    # Taylor shift by alpha: g(Z) = sum_i scaled_i (alpha + Z)^i
    out = [dict() for _ in range(b + 1)]
    # binomial expansion with field binomials (characteristic-reduced)
    from math import comb
    p = K.characteristic
    for i, d in enumerate(scaled):
        if not d:
            continue
        apow = 1
        for k in range(i, -1, -1):
            # coefficient of Z^k gets C(i,k) alpha^(i-k) * d
            cbin = comb(i, k) % p
            if cbin:
                factor = apow
                for _ in range(cbin - 1):
                    factor = K.add(factor, apow)
                if factor:
                    tgt = out[k]
                    for e, c in d.items():
                        val = K.mul(c, factor)
                        acc = K.add(tgt.get(e, 0), val)
                        if acc:
                            tgt[e] = acc
                        elif e in tgt:
                            del tgt[e]
            apow = K.mul(apow, alpha)
    return out
