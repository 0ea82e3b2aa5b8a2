"""
gf.py

Exact arithmetic for finite field towers F_p = L_0 <= L_1 <= ... <= L_k,
where each level is a simple extension of the previous one by a monic
irreducible modulus.

Representation convention: an element of level j is a plain Python int in
[0, order_j).  The int is the little-endian digit vector of the element's
coordinates over level j-1, in base order_{j-1}; since level j-1 elements
use the same convention, the flat int is simultaneously the full
coefficient vector over the prime field in base p.  Consequences:

 - the embedding of level i into level j > i is the identity on ints, and
   the image is exactly the set of ints below order_i (zero top coords);
 - in characteristic 2 addition is XOR at every level;
 - equality of elements is equality of ints.

Levels whose order is at most LOG_TABLE_CAP get discrete exp/log tables
(built lazily on first multiplication) so that mul and inv are table
lookups; larger levels use schoolbook polynomial arithmetic over the
sublevel and Fermat inversion.

NOT a general-purpose crypto library: orders are assumed to be at desk
scale except for the top residue-field level, which is only ever driven
through mul/pow/inv.
"""

from __future__ import annotations

from typing import List, Optional, Sequence

LOG_TABLE_CAP = 1 << 18


# ---------------------------------------------------------------------------
# integer factorization (needed for primitive-element search)

def _pollard_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    x0 = 2
    c = 1
    while True:
        x = y = x0
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = _gcd(abs(x - y), n)
        if d != n:
            return d
        c += 1

def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a

def _is_prime_int(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True

def factorize(n: int) -> dict:
    """Prime factorization {prime: multiplicity} by trial division with a
    Pollard-rho fallback.  Deterministic."""
    if n <= 0:
        raise ValueError("factorize wants a positive integer")
    out: dict = {}
    for p in (2, 3, 5):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 7
    while f * f <= n and f < 100000:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += 2
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if _is_prime_int(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_rho(m)
        stack.append(d)
        stack.append(m // d)
    return out


# ---------------------------------------------------------------------------
# tower levels

class _Level:
    __slots__ = ("index", "p", "sub", "degree", "modulus", "order",
                 "suborder", "exps", "logs")

    def __init__(self, index, p, sub, degree, modulus):
        self.index = index
        self.p = p
        self.sub = sub                # _Level below, or None for the prime field
        self.degree = degree          # extension degree over sub (1 for prime)
        self.modulus = modulus        # monic, list of sub-ints, len degree+1; None for prime
        self.suborder = sub.order if sub else p
        self.order = self.suborder ** degree if sub else p
        self.exps: Optional[List[int]] = None
        self.logs: Optional[List[int]] = None

    # --- digit plumbing ---

    def digits(self, a: int) -> List[int]:
        s = self.suborder
        return [(a // s**i) % s for i in range(self.degree)]

    def undigits(self, ds: Sequence[int]) -> int:
        s = self.suborder
        v = 0
        for i, d in enumerate(ds):
            v += d * s**i
        return v

    # --- arithmetic ---

    def add(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        s = self.suborder
        if self.sub is None:
            return (a + b) % self.p
        v = 0
        m = 1
        for _ in range(self.degree):
            v += self.sub.add(a % s, b % s) * m
            a //= s
            b //= s
            m *= s
        return v

    def neg(self, a: int) -> int:
        if self.p == 2:
            return a
        if self.sub is None:
            return (-a) % self.p
        s = self.suborder
        v = 0
        m = 1
        for _ in range(self.degree):
            v += self.sub.neg(a % s) * m
            a //= s
            m *= s
        return v

    def sub_(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self.order <= LOG_TABLE_CAP:
            if self.exps is None:
                self._build_tables()
            return self.exps[(self.logs[a] + self.logs[b]) % (self.order - 1)]
        return self._mul_generic(a, b)

    def _mul_generic(self, a: int, b: int) -> int:
        if self.sub is None:
            return a * b % self.p
        sub = self.sub
        n = self.degree
        A = self.digits(a)
        B = self.digits(b)
        prod = [0] * (2 * n - 1)
        for i, ai in enumerate(A):
            if ai:
                for j, bj in enumerate(B):
                    if bj:
                        prod[i + j] = sub.add(prod[i + j], sub.mul(ai, bj))
        # reduce by the monic modulus
        mod = self.modulus
        for i in range(2 * n - 2, n - 1, -1):
            c = prod[i]
            if c:
                prod[i] = 0
                for j in range(n):
                    mj = mod[j]
                    if mj:
                        prod[i - n + j] = sub.sub_(prod[i - n + j], sub.mul(c, mj))
        return self.undigits(prod[:n])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.order <= LOG_TABLE_CAP:
            if self.exps is None:
                self._build_tables()
            return self.exps[(self.order - 1 - self.logs[a]) % (self.order - 1)]
        return self.pow(a, self.order - 2)

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(a), -e)
        if a == 0:
            return 0 if e else 1
        if self.order <= LOG_TABLE_CAP:
            if self.exps is None:
                self._build_tables()
            return self.exps[self.logs[a] * (e % (self.order - 1)) % (self.order - 1)]
        r = 1
        while e:
            if e & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            e >>= 1
        return r

    # --- discrete-log tables ---

    def _build_tables(self):
        n = self.order
        g = self._find_generator()
        exps = [1] * (n - 1)
        x = 1
        for i in range(1, n - 1):
            x = self._mul_generic(x, g) if self.sub else (x * g % self.p)
            exps[i] = x
        logs = [0] * n
        for i, v in enumerate(exps):
            logs[v] = i
        self.exps = exps
        self.logs = logs

    def _find_generator(self) -> int:
        n1 = self.order - 1
        if n1 == 1:
            return 1
        primes = list(factorize(n1))
        mul = self._mul_generic if self.sub else (lambda a, b: a * b % self.p)
        def rawpow(a, e):
            r = 1
            while e:
                if e & 1:
                    r = mul(r, a)
                a = mul(a, a)
                e >>= 1
            return r
        for g in range(1, self.order):
            if all(rawpow(g, n1 // p) != 1 for p in primes):
                return g
        raise AssertionError("no generator found")


# ---------------------------------------------------------------------------
# internal polynomial helpers over a level (digit lists, ascending degree),
# used only for modulus search/verification at construction time

def _ptrim(f):
    while f and f[-1] == 0:
        f.pop()
    return f

def _pmulmod(lv: _Level, f, g, m):
    out = [0] * (len(f) + len(g) - 1) if f and g else []
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                if b:
                    out[i + j] = lv.add(out[i + j], lv.mul(a, b))
    return _pmodp(lv, out, m)

def _pmodp(lv: _Level, f, m):
    f = list(f)
    dm = len(m) - 1
    lead_inv = lv.inv(m[-1])
    while len(f) > dm:
        c = f[-1]
        if c:
            c = lv.mul(c, lead_inv)
            off = len(f) - 1 - dm
            for j in range(dm):
                if m[j]:
                    f[off + j] = lv.sub_(f[off + j], lv.mul(c, m[j]))
        f.pop()
    return _ptrim(f)

def _pmodexp(lv: _Level, f, e: int, m):
    r = [1]
    f = _pmodp(lv, f, m)
    while e:
        if e & 1:
            r = _pmulmod(lv, r, f, m)
        f = _pmulmod(lv, f, f, m)
        e >>= 1
    return r

def _pgcd(lv: _Level, f, g):
    f, g = _ptrim(list(f)), _ptrim(list(g))
    while g:
        f, g = g, _pmodp(lv, f, g)
    if f:
        c = lv.inv(f[-1])
        f = [lv.mul(c, a) for a in f]
    return f

def _irreducible_over(lv: _Level, m) -> bool:
    """Rabin test for a monic polynomial m over the field of level lv."""
    n = len(m) - 1
    if n <= 0:
        return False
    s = lv.order
    primes = list(factorize(n))
    x = [0, 1]
    if _pmodexp(lv, x, s**n, m) != _pmodp(lv, x, m):
        return False
    for p in primes:
        h = _pmodexp(lv, x, s**(n // p), m)
        diff = list(h)
        while len(diff) < 2:
            diff.append(0)
        diff[1] = lv.sub_(diff[1], 1)
        if _pgcd(lv, _ptrim(diff), m) != [1]:
            return False
    return True

def _search_modulus(lv: _Level, degree: int) -> List[int]:
    """First monic irreducible of the given degree over lv, candidates
    ordered by their packed little-endian integer.  Deterministic."""
    s = lv.order
    for c in range(s**degree):
        cand = [(c // s**i) % s for i in range(degree)] + [1]
        if _irreducible_over(lv, cand):
            return cand
    raise AssertionError("no irreducible modulus of degree %d" % degree)


# ---------------------------------------------------------------------------
# public context

_IRRED_VERIFY_CAP = 1 << 20

class FieldCtx:
    """A tower of finite fields; all state immutable after construction."""

    __slots__ = ("characteristic", "degrees", "moduli", "order", "_levels")

    def __init__(self, levels: List[_Level]):
        self._levels = levels
        self.characteristic = levels[0].p
        self.degrees = tuple(lv.degree for lv in levels[1:])
        self.moduli = tuple(tuple(lv.modulus) for lv in levels[1:])
        self.order = levels[-1].order

    # level -1 (default) = top of the tower; 0 = prime field
    def _lv(self, level: int) -> _Level:
        return self._levels[level]

    @property
    def levels(self) -> int:
        return len(self._levels)

    def order_at(self, level: int) -> int:
        return self._levels[level].order

    def add(self, a, b, level=-1):
        return self._levels[level].add(a, b)

    def sub(self, a, b, level=-1):
        return self._levels[level].sub_(a, b)

    def neg(self, a, level=-1):
        return self._levels[level].neg(a)

    def mul(self, a, b, level=-1):
        return self._levels[level].mul(a, b)

    def inv(self, a, level=-1):
        return self._levels[level].inv(a)

    def pow(self, a, e, level=-1):
        return self._levels[level].pow(a, e)

    def embed(self, a, from_level, to_level=-1):
        """Embedding between levels is positional: the identity on ints."""
        src = self._levels[from_level].order
        dst = self._levels[to_level].order
        if not (0 <= a < src <= dst):
            raise ValueError("not an element of the source level")
        return a

    def in_level(self, a, level) -> bool:
        return 0 <= a < self._levels[level].order

    def digits(self, a, level=-1):
        return self._levels[level].digits(a)

    def undigits(self, ds, level=-1):
        return self._levels[level].undigits(ds)

    def extend(self, modulus: Sequence[int], verify: Optional[bool] = None) -> "FieldCtx":
        """New tower with one more level on top, sharing the lower levels.

        modulus: monic, coefficients as top-level ints, ascending degree.
        """
        top = self._levels[-1]
        mod = list(modulus)
        if not mod or mod[-1] != 1:
            raise ValueError("modulus must be monic")
        degree = len(mod) - 1
        if degree < 1:
            raise ValueError("degree 0 extension")
        neworder = top.order ** degree
        if verify is None:
            verify = neworder <= _IRRED_VERIFY_CAP
        if verify and not _irreducible_over(top, mod):
            raise ValueError("reducible extension modulus")
        lv = _Level(len(self._levels), top.p, top, degree, mod)
        return FieldCtx(self._levels + [lv])

    # --- canonical text ---

    def render(self, a, level=-1) -> str:
        """Lowercase hex of the flat coefficient vector, fixed width."""
        lv = self._levels[level]
        width = max(1, (lv.order - 1).bit_length() + 3 >> 2)
        if self.characteristic == 2:
            return format(a, "0%dx" % width)
        return format(a, "0%dx" % max(1, len(format(lv.order - 1, "x"))))

    def parse(self, s: str, level=-1) -> int:
        v = int(s, 16)
        if not self.in_level(v, level):
            raise ValueError("element out of range: %r" % s)
        return v

    def tower_text(self) -> str:
        """Canonical tower rendering: characteristic, then one modulus per
        level, levels separated by ':'.  Each modulus is the comma-joined
        hex of its coefficients, ascending degree."""
        parts = [str(self.characteristic)]
        for i, lv in enumerate(self._levels[1:], start=1):
            sub = self._levels[i - 1]
            swidth = max(1, (sub.order - 1).bit_length() + 3 >> 2)
            parts.append(",".join(format(c, "0%dx" % swidth) for c in lv.modulus))
        return ":".join(parts)

    def elem(self, v: int) -> "FieldElem":
        return FieldElem(self, v)

    def __eq__(self, other):
        return (isinstance(other, FieldCtx)
                and self.characteristic == other.characteristic
                and self.degrees == other.degrees
                and self.moduli == other.moduli)

    def __hash__(self):
        return hash((self.characteristic, self.degrees, self.moduli))

    def __repr__(self):
        return "FieldCtx(p=%d, degrees=%s, order=%d)" % (
            self.characteristic, list(self.degrees), self.order)


class FieldElem:
    """Convenience wrapper around a top-level int with operator syntax."""

    __slots__ = ("ctx", "val")

    def __init__(self, ctx: FieldCtx, val: int):
        if not 0 <= val < ctx.order:
            raise ValueError("value out of range")
        self.ctx = ctx
        self.val = val

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElem):
            assert other.ctx == self.ctx
            return other.val
        return int(other)

    def __add__(self, other):
        return FieldElem(self.ctx, self.ctx.add(self.val, self._coerce(other)))

    def __sub__(self, other):
        return FieldElem(self.ctx, self.ctx.sub(self.val, self._coerce(other)))

    def __mul__(self, other):
        return FieldElem(self.ctx, self.ctx.mul(self.val, self._coerce(other)))

    def __truediv__(self, other):
        return FieldElem(self.ctx, self.ctx.mul(self.val, self.ctx.inv(self._coerce(other))))

    def __neg__(self):
        return FieldElem(self.ctx, self.ctx.neg(self.val))

    def __pow__(self, e):
        return FieldElem(self.ctx, self.ctx.pow(self.val, e))

    def inv(self):
        return FieldElem(self.ctx, self.ctx.inv(self.val))

    def __eq__(self, other):
        if isinstance(other, FieldElem):
            return self.ctx == other.ctx and self.val == other.val
        return self.val == other

    def __hash__(self):
        return hash(self.val)

    def __repr__(self):
        return "FieldElem(%s)" % self.ctx.render(self.val)


# ---------------------------------------------------------------------------
# construction

def field_build(p: int, degrees: Sequence[int],
                moduli: Optional[Sequence[Sequence[int]]] = None) -> FieldCtx:
    """Build the tower F_p <= F_{p^d1} <= F_{p^{d1 d2}} <= ...

    When moduli are omitted each level's modulus is found by deterministic
    search (candidates in ascending packed-integer order, first irreducible
    wins), so rebuilds are reproducible.
    """
    if not _is_prime_int(p):
        raise ValueError("characteristic must be prime")
    if not degrees:
        raise ValueError("need at least one extension degree")
    if any(d < 1 for d in degrees):
        raise ValueError("degree 0 step")
    levels = [_Level(0, p, None, 1, None)]
    for k, d in enumerate(degrees):
        top = levels[-1]
        if moduli is not None:
            mod = list(moduli[k])
            if len(mod) != d + 1 or mod[-1] != 1:
                raise ValueError("explicit modulus must be monic of the stated degree")
            if top.order ** d <= _IRRED_VERIFY_CAP and not _irreducible_over(top, mod):
                raise ValueError("explicit modulus is reducible")
        else:
            mod = _search_modulus(top, d)
        levels.append(_Level(len(levels), p, top, d, mod))
    return FieldCtx(levels)


def field_primitive(ctx: FieldCtx, level: int = -1,
                    factors: Optional[dict] = None) -> int:
    """Smallest (in packed-int order) element of full multiplicative order."""
    lv = ctx._lv(level)
    n1 = lv.order - 1
    if n1 == 1:
        return 1
    if factors is None:
        if lv.order > 1 << 30:
            raise ValueError("supply the factorization of order-1 for large fields")
        factors = factorize(n1)
    for g in range(1, lv.order):
        if all(lv.pow(g, n1 // q) != 1 for q in factors):
            return g
    raise AssertionError("no primitive element found")


def frobenius(ctx: FieldCtx, x: int, iterations: int = 1, level: int = -1) -> int:
    """x ** (p^iterations); a field automorphism fixing the prime field."""
    lv = ctx._lv(level)
    return lv.pow(x, pow(ctx.characteristic, iterations, lv.order - 1) if lv.order > 2 else 1)
