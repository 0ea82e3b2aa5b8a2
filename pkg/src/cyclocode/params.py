"""
params.py

Parameter planning and the searches the construction needs: certified
binomial irreducibility, degree-D irreducibles whose residue generates
the full unit group mod M, and the capacity-style plan that picks a
whole parameter family from a target rate and slack.  The planner only
does exact integer arithmetic and never builds anything; feasibility
against a build cap is reported, not enforced.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Dict, Optional, Tuple

from .gf import FieldCtx, factorize
from .polys import Poly, irreducible_test, modexp

# instances with q^d above this are planned but flagged as not buildable
# on a desk machine (the torsion ring has q^d - 1 conjugates to expand)
DEFAULT_BUILD_CAP = 1 << 20

# pinned constants behind the asymptotic parameter choices; the source
# analysis leaves them unspecified, so they are configuration here
S_EXTRA = 2            # s = ceil(ln(1/R0)/eps) + S_EXTRA
M_FACTOR = 2           # m = ceil(M_FACTOR * s / eps)
ZETA_DIVISOR = 20      # zeta = eps / ZETA_DIVISOR


def _euler_phi(n: int) -> int:
    out = n
    for p in factorize(n):
        out -= out // p
    return out


def validate_binomial(d: int, r: int, q: int) -> Tuple[bool, str]:
    """Whether T^d - gamma (gamma primitive in F_r) is certified
    irreducible over F_q: d odd, every prime factor of d divides r - 1,
    and gcd(d, (q - 1) // (r - 1)) = 1.  Returns (ok, reason)."""
    if (q - 1) % (r - 1):
        raise ValueError("r - 1 must divide q - 1 for subfield orders")
    if d % 2 == 0:
        return False, "d is even"
    for p in factorize(d):
        if (r - 1) % p:
            return False, "prime factor %d of d does not divide r-1" % p
    if math.gcd(d, (q - 1) // (r - 1)) != 1:
        return False, "d shares a factor with (q-1)/(r-1)"
    return True, "ok"


def find_A(K: FieldCtx, M: Poly, D: int, seed: int = 0,
           ell: Optional[int] = None, b: Optional[int] = None,
           budget: int = 10000) -> Tuple[Poly, int]:
    """Seeded search for a monic irreducible A of degree D over F_q whose
    residue mod M generates the full unit group (order q^d - 1).  Returns
    (A, attempts).  When ell and the subfield degree b are both given,
    D*b <= ell*d is rejected up front because the residue map could not
    separate messages."""
    q = K.order
    d = M.degree
    if D < 1:
        raise ValueError("degree must be positive")
    if ell is not None and b is not None and D * b <= ell * d:
        raise ValueError("evaluation degree %d cannot separate a message "
                         "space of degree %d (need D*b > ell*d)" % (D, ell))
    group = q ** d - 1
    fac = factorize(group)
    rng = random.Random(seed)
    for attempt in range(1, budget + 1):
        coeffs = [rng.randrange(q) for _ in range(D)] + [1]
        A = Poly(K, coeffs)
        if A.degree != D or not irreducible_test(A):
            continue
        if modexp(A, group, M).coeffs != [1]:
            continue
        ok = True
        for p in fac:
            if modexp(A, group // p, M).coeffs == [1]:
                ok = False
                break
        if ok:
            return A, attempt
    density = Fraction(_euler_phi(group), D * group)
    raise ValueError("no primitive A of degree %d found in %d attempts "
                     "(predicted success density %s per attempt)"
                     % (D, budget, density))


class Plan:
    """Exact-integer parameter family derived from a target rate R0 and
    slack eps: the tower sizes (r, q), modulus degree d, subfield degree
    b, folding and decoding parameters (m, s, zeta), message degree ell,
    and the required evaluation degree D.  feasible_now says whether q^d
    fits under the build cap; degenerate flags d = 1 (the subfield
    collapses to a single place group)."""

    __slots__ = ("R0", "eps", "c", "x", "u", "r", "q", "d", "b",
                 "m", "s", "zeta", "ell", "D", "rate",
                 "feasible_now", "degenerate")

    def __init__(self, **kw):
        for f in self.__slots__:
            setattr(self, f, kw[f])

    def report(self) -> str:
        lines = []
        for f in self.__slots__:
            v = getattr(self, f)
            lines.append("%s=%s" % (f, v))
        return "\n".join(lines)

    def __repr__(self):
        return ("Plan(r=%d, q=%d, d=%d, b=%d, ell=%d, m=%d, s=%d, D=%d, "
                "feasible_now=%s)" % (self.r, self.q, self.d, self.b,
                                      self.ell, self.m, self.s, self.D,
                                      self.feasible_now))


def plan(R0, eps, u: int = 1, cap: int = DEFAULT_BUILD_CAP) -> Plan:
    """Plan a parameter family of rate >= R0 with slack eps.  Exact
    arithmetic throughout (R0 and eps are taken as fractions); raises
    when the derived modulus degree is not integral."""
    R0 = Fraction(R0)
    eps = Fraction(eps)
    if not 0 < R0 < 1:
        raise ValueError("target rate must lie in (0, 1)")
    if eps <= 0:
        raise ValueError("slack must be positive")
    if u < 1:
        raise ValueError("u must be >= 1")
    c = 2 * int(Fraction(10) / (R0 * eps)) + 1
    x = _euler_phi(c) * u
    r = 1 << x
    q = r * r
    if (r - 1) % c:
        raise ValueError("2^x - 1 is not divisible by c; "
                         "no integral modulus degree for u=%d" % u)
    d = (r - 1) // c
    num = q ** d - 1
    den = (r ** d - 1) * ((q - 1) // (r - 1))
    if num % den:
        raise AssertionError("subfield degree is not integral")
    b = num // den
    s = math.ceil(math.log(1 / float(R0)) / float(eps)) + S_EXTRA
    m = math.ceil(M_FACTOR * s / float(eps))
    zeta = eps / ZETA_DIVISOR
    ell = math.ceil(Fraction(b, 2) + R0 * r * b / d)
    D = (ell * d) // b + 1
    # the dimension the message space will have at this ell
    dim = d * ell - (d * (b - 1) // 2 + 1) + 1
    rate = Fraction(dim, r * b)
    degenerate = (d == 1) or (b == 1)
    if not degenerate:
        if not Fraction(d, r) < Fraction(1, c):
            raise AssertionError("modulus degree too large for the tower")
        if not D * b > ell * d:
            raise AssertionError("evaluation degree does not separate "
                                 "the message space")
        if rate < R0:
            raise AssertionError("planned rate falls below the target")
    return Plan(R0=R0, eps=eps, c=c, x=x, u=u, r=r, q=q, d=d, b=b,
                m=m, s=s, zeta=zeta, ell=ell, D=D, rate=rate,
                feasible_now=(q ** d <= cap), degenerate=degenerate)
