"""
carlitz.py

The Carlitz module action of R_T = F_q[T] on F_q-algebras, and exact
arithmetic in the torsion ring R_T[lam]/(psi_M).

For B in R_T the Carlitz operator is the additive q-polynomial
C_B(z) = sum_i [B,i] z^(q^i), 0 <= i <= deg B, built from the recursion
C_c = c*id for constants, C_T(z) = z^q + T*z, C_{T*B} = C_T o C_B, and
additivity in B.  For monic irreducible M of degree d, psi_M(Z) = C_M(Z)/Z
is monic of degree q^d - 1 with d+1 terms, and the quotient ring
R_T[lam]/(psi_M) is where the subfield generator is assembled.

Torsion-ring elements are sparse maps {lam-exponent: Poly in T}; only the
small instances are ever driven through this ring symbolically (the large
builds specialize first, see subfield.py), so the arithmetic here favors
clarity over throughput.
"""

from __future__ import annotations

from typing import Dict, List, Sequence

from .gf import FieldCtx
from .polys import Poly, pmod


class CarlitzOp:
    """C_B(z) = sum coeffs[i] * z^(q^i); coeffs are Poly in T."""

    __slots__ = ("B", "coeffs", "q")

    def __init__(self, B: Poly, coeffs: List[Poly]):
        self.B = B
        self.coeffs = coeffs
        self.q = B.ctx.order

    def apply_series_exponents(self):
        """(exponent, coefficient) terms with exponent = q^i."""
        return [(self.q**i, c) for i, c in enumerate(self.coeffs) if not c.is_zero()]

    def specialize(self, big: FieldCtx, t0: int) -> "SpecializedCarlitzOp":
        """Fix T = t0 in a field containing F_q (positional embedding)."""
        K = self.B.ctx
        vals = []
        for c in self.coeffs:
            acc = 0
            for cf in reversed(c.coeffs):
                acc = big.add(big.mul(acc, t0), cf)
            vals.append(acc)
        return SpecializedCarlitzOp(big, K.order, vals)


class SpecializedCarlitzOp:
    """A Carlitz operator with T evaluated: z -> sum vals[i] * z^(q^i)."""

    __slots__ = ("big", "q", "vals")

    def __init__(self, big: FieldCtx, q: int, vals: List[int]):
        self.big = big
        self.q = q
        self.vals = vals

    def __call__(self, z: int) -> int:
        big = self.big
        acc = 0
        zp = z
        for i, v in enumerate(self.vals):
            if i:
                zp = big.pow(zp, self.q)
            if v:
                acc = big.add(acc, big.mul(v, zp))
        return acc


def carlitz_op(B: Poly) -> CarlitzOp:
    """Carlitz operator coefficients [B,0..deg B] by the T-recursion."""
    if B.is_zero():
        raise ValueError("Carlitz operator of 0")
    K = B.ctx
    q = K.order
    T = Poly.x(K)
    # tk = coefficients of C_{T^k}; start with C_1 = id
    tk: List[Poly] = [Poly.const(K, 1)]
    total: List[Poly] = [Poly(K, [])] * (B.degree + 1)
    for k, c in enumerate(B.coeffs):
        if c:
            for i, ci in enumerate(tk):
                total[i] = total[i] + ci.scale(c)
        if k < B.degree:
            # C_{T^{k+1}}[i] = C_{T^k}[i-1]^q + T * C_{T^k}[i]
            nxt = []
            for i in range(len(tk) + 1):
                term = T * tk[i] if i < len(tk) else Poly(K, [])
                if i > 0:
                    term = term + _poly_q_power(tk[i - 1], q)
                nxt.append(term)
            tk = nxt
    return CarlitzOp(B, total)


def _poly_q_power(p: Poly, q: int) -> Poly:
    """p(T)^q for q a power of the characteristic: coefficients^q, T^(jq)."""
    K = p.ctx
    out = [0] * (q * p.degree + 1) if not p.is_zero() else []
    for j, c in enumerate(p.coeffs):
        if c:
            out[j * q] = K.pow(c, q)
    return Poly(K, out)


class TorsionRing:
    """R_T[lam]/(psi_M) for M monic irreducible of degree d over F_q."""

    __slots__ = ("K", "M", "d", "q", "Q", "op_M", "psi_terms", "_op_cache")

    def __init__(self, M: Poly):
        if not M.is_monic() or M.degree < 1:
            raise ValueError("M must be monic of degree >= 1")
        self.K = M.ctx
        self.M = M
        self.d = M.degree
        self.q = self.K.order
        self.Q = self.q**self.d
        self.op_M = carlitz_op(M)
        # psi_M(Z) = C_M(Z)/Z = sum [M,i] Z^(q^i - 1); sparse terms
        self.psi_terms = [(self.q**i - 1, c)
                          for i, c in enumerate(self.op_M.coeffs) if not c.is_zero()]
        self._op_cache: Dict[tuple, CarlitzOp] = {}

    def zero(self) -> "TorsionRingElem":
        return TorsionRingElem(self, {})

    def one(self) -> "TorsionRingElem":
        return TorsionRingElem(self, {0: Poly.const(self.K, 1)})

    def lam(self) -> "TorsionRingElem":
        return TorsionRingElem(self, {1: Poly.const(self.K, 1)})

    def from_terms(self, terms: Dict[int, Poly]) -> "TorsionRingElem":
        return TorsionRingElem(self, dict(terms))

    def op_for(self, B: Poly) -> CarlitzOp:
        """Carlitz operator for B mod M (valid on ring elements), cached."""
        Bred = pmod(B, self.M)
        key = tuple(Bred.coeffs)
        if key not in self._op_cache:
            if Bred.is_zero():
                self._op_cache[key] = CarlitzOp(Bred, [])
            else:
                self._op_cache[key] = carlitz_op(Bred)
        return self._op_cache[key]

    def _reduce(self, terms: Dict[int, Poly]) -> Dict[int, Poly]:
        """Rewrite lam^e for e >= Q-1 via psi_M(lam) = 0, i.e.
        lam^(Q-1) = -sum_{i<d} [M,i] lam^(q^i - 1)."""
        lead = self.Q - 1
        low = [(e, c) for e, c in self.psi_terms if e != lead]
        pending = dict(terms)
        out: Dict[int, Poly] = {}
        while pending:
            e = max(pending)
            c = pending.pop(e)
            if c.is_zero():
                continue
            if e < lead:
                acc = out.get(e)
                s = c if acc is None else acc + c
                if s.is_zero():
                    out.pop(e, None)
                else:
                    out[e] = s
                continue
            for e2, m in low:
                ne = e - lead + e2
                nc = -(c * m)
                acc = pending.get(ne)
                s = nc if acc is None else acc + nc
                if s.is_zero():
                    pending.pop(ne, None)
                else:
                    pending[ne] = s
        return out


class TorsionRingElem:
    """Sparse element: {lam-exponent: nonzero Poly in T}."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: TorsionRing, terms: Dict[int, Poly]):
        self.ring = ring
        self.terms = {e: c for e, c in terms.items() if not c.is_zero()}

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return (isinstance(other, TorsionRingElem) and self.ring is other.ring
                and self.terms == other.terms)

    def __repr__(self):
        items = sorted(self.terms.items())[:6]
        return "TorsionRingElem(%s)" % ", ".join(
            "lam^%d*(%s)" % (e, c.render()) for e, c in items)

    def __add__(self, other: "TorsionRingElem") -> "TorsionRingElem":
        if self.ring is not other.ring:
            raise ValueError("ring mismatch")
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            s = c if s is None else s + c
            if s.is_zero():
                out.pop(e, None)
            else:
                out[e] = s
        return TorsionRingElem(self.ring, out)

    def __neg__(self) -> "TorsionRingElem":
        return TorsionRingElem(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "TorsionRingElem") -> "TorsionRingElem":
        if self.ring is not other.ring:
            raise ValueError("ring mismatch")
        raw: Dict[int, Poly] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = e1 + e2
                p = c1 * c2
                acc = raw.get(e)
                s = p if acc is None else acc + p
                raw[e] = s
        return TorsionRingElem(self.ring, self.ring._reduce(raw))

    def scale(self, c: Poly) -> "TorsionRingElem":
        return TorsionRingElem(self.ring, {e: p * c for e, p in self.terms.items()})

    def pow_q(self) -> "TorsionRingElem":
        """q-th power: a ring endomorphism; coefficients and exponents map
        through the q-power Frobenius."""
        q = self.ring.q
        raw = {e * q: _poly_q_power(c, q) for e, c in self.terms.items()}
        return TorsionRingElem(self.ring, self.ring._reduce(raw))


def torsion_apply(ring: TorsionRing, B: Poly, x: TorsionRingElem) -> TorsionRingElem:
    """C_{B mod M}(x) in the torsion ring."""
    op = ring.op_for(B)
    if not op.coeffs:
        return ring.zero()
    out = ring.zero()
    xp = x
    for i, c in enumerate(op.coeffs):
        if i:
            xp = _pow_q_iter(xp, ring.K.order)
        if not c.is_zero():
            out = out + xp.scale(c)
    return out


def _pow_q_iter(x: TorsionRingElem, q: int) -> TorsionRingElem:
    return x.pow_q()


def torsion_arith(x: TorsionRingElem, y: TorsionRingElem, op: str) -> TorsionRingElem:
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    raise ValueError("unknown op %r" % op)
