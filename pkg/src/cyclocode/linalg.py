"""
linalg.py

Dense exact linear algebra over a FieldCtx: reduced row echelon form,
rank, nullspace, and square/overdetermined solves.  Rows are plain lists
of raw field ints; everything is Gaussian elimination with deterministic
pivoting (first nonzero column, first usable row), so downstream outputs
are reproducible.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

from .gf import FieldCtx


def rref(K: FieldCtx, rows: List[List[int]]) -> Tuple[List[List[int]], List[int]]:
    """Reduced row echelon form (in place on a copy) and pivot columns."""
    rows = [list(r) for r in rows]
    if not rows:
        return rows, []
    ncols = len(rows[0])
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, len(rows)):
            if rows[i][c]:
                pr = i
                break
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = K.inv(rows[r][c])
        if inv != 1:
            rows[r] = [K.mul(inv, x) for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                ri, rr = rows[i], rows[r]
                rows[i] = [K.sub(ri[j], K.mul(f, rr[j])) for j in range(ncols)]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def rank(K: FieldCtx, rows: Sequence[Sequence[int]]) -> int:
    return len(rref(K, [list(r) for r in rows])[1])


def nullspace(K: FieldCtx, rows: Sequence[Sequence[int]], ncols: int) -> List[List[int]]:
    """Basis of {x : A x = 0}, echelonized, deterministic order (free
    columns ascending)."""
    red, pivots = rref(K, [list(r) for r in rows]) if rows else ([], [])
    pivset = set(pivots)
    free = [c for c in range(ncols) if c not in pivset]
    basis = []
    for fc in free:
        v = [0] * ncols
        v[fc] = 1
        for i, pc in enumerate(pivots):
            # x_pc = -sum over free columns of row coefficient
            v[pc] = K.neg(red[i][fc])
        basis.append(v)
    return basis


def solve(K: FieldCtx, rows: Sequence[Sequence[int]], rhs: Sequence[int]
          ) -> Optional[List[int]]:
    """One solution of A x = b, or None if inconsistent.  Free variables
    are set to 0."""
    aug = [list(r) + [y] for r, y in zip(rows, rhs)]
    ncols = len(rows[0]) if rows else 0
    red, pivots = rref(K, aug)
    x = [0] * ncols
    for i, pc in enumerate(pivots):
        if pc == ncols:
            return None     # pivot in the rhs column: inconsistent
        x[pc] = red[i][ncols]
    return x


def solve_unique(K: FieldCtx, rows: Sequence[Sequence[int]], rhs: Sequence[int]
                 ) -> Optional[List[int]]:
    """Solution of a square full-rank system, or None if singular or
    inconsistent."""
    n = len(rows[0]) if rows else 0
    aug = [list(r) + [y] for r, y in zip(rows, rhs)]
    red, pivots = rref(K, aug)
    if len(pivots) != n or (pivots and pivots[-1] == n):
        return None
    return [red[i][n] for i in range(n)]

# ---------------------------------------------------------------------------
# packed elimination in characteristic 2
#
# An F_q system (q = 2^mm) expands into an F_2 system on the mm
# components of each unknown; field addition is xor on the packed
# representation, so whole F_2 rows can live in single big ints and
# elimination is bit twiddling.

def _f2_eliminate(K: FieldCtx, rows: Sequence[Sequence[int]], nunk: int,
                  back: bool = True) -> Tuple[Dict[int, int], List[int], int]:
    """Expand an F_q system over F_2, eliminate, and back-substitute.
    Returns (pivot row per pivot column, free columns ascending, mm)."""
    if K.characteristic != 2:
        raise ValueError("packed elimination needs characteristic 2")
    mm = (K.order - 1).bit_length()
    ncols2 = nunk * mm
    nbytes = (ncols2 + 7) // 8 + 3
    # patterns[v][t2]: bit t is component t2 of v * x^t
    patterns: Dict[int, List[int]] = {}

    def _pats(v: int) -> List[int]:
        got = patterns.get(v)
        if got is None:
            prods = [K.mul(v, 1 << t) for t in range(mm)]
            got = []
            for t2 in range(mm):
                bits = 0
                for t, pv in enumerate(prods):
                    if (pv >> t2) & 1:
                        bits |= 1 << t
                got.append(bits)
            patterns[v] = got
        return got

    piv: Dict[int, int] = {}
    for row in rows:
        nz = [(u * mm, _pats(v)) for u, v in enumerate(row) if v]
        if not nz:
            continue
        for t2 in range(mm):
            buf = bytearray(nbytes)
            for bitpos, pats in nz:
                pat = pats[t2]
                if not pat:
                    continue
                byi = bitpos >> 3
                chunk = pat << (bitpos & 7)
                buf[byi] |= chunk & 255
                if chunk > 255:
                    buf[byi + 1] |= (chunk >> 8) & 255
                    if chunk > 65535:
                        buf[byi + 2] |= chunk >> 16
            x = int.from_bytes(buf, "little")
            while x:
                p = x.bit_length() - 1
                other = piv.get(p)
                if other is None:
                    piv[p] = x
                    break
                x ^= other
    if not back:
        free = [c for c in range(ncols2) if c not in piv]
        return piv, free, mm
    # back-eliminate ascending so lower pivot rows are already reduced
    for p in sorted(piv):
        x = piv[p]
        rest = x ^ (1 << p)
        while rest:
            pq = rest.bit_length() - 1
            if pq in piv:
                x ^= piv[pq]
            rest = (x ^ (1 << p)) & ((1 << pq) - 1)
        piv[p] = x
    free = [c for c in range(ncols2) if c not in piv]
    return piv, free, mm


def _f2_free_vector(piv: Dict[int, int], fc: int, mm: int, nunk: int
                    ) -> List[int]:
    """The nullspace vector with free column fc set, regrouped to F_q."""
    vec = 1 << fc
    for p, x in piv.items():
        if (x >> fc) & 1:
            vec |= 1 << p
    mask = (1 << mm) - 1
    return [(vec >> (u * mm)) & mask for u in range(nunk)]


def nullspace_fast(K: FieldCtx, rows: Sequence[Sequence[int]], nunk: int
                   ) -> List[List[int]]:
    """Nullspace basis in the same canonical form as rref(nullspace(..)),
    via packed F_2 elimination in characteristic 2 and the generic path
    otherwise."""
    if K.characteristic != 2:
        sols = nullspace(K, rows, nunk)
        red, pivots = rref(K, sols)
        return red[:len(pivots)]
    piv, free, mm = _f2_eliminate(K, rows, nunk)
    if len(free) % mm:
        raise AssertionError("solution space is not F_q-linear")
    qrows = [_f2_free_vector(piv, fc, mm, nunk) for fc in free]
    red, pivots = rref(K, qrows)
    out = red[:len(pivots)]
    if len(out) != len(free) // mm:
        raise AssertionError("solution space is not F_q-linear")
    return out


def nullspace_vector(K: FieldCtx, rows: Sequence[Sequence[int]], nunk: int
                     ) -> Optional[List[int]]:
    """One deterministic nonzero nullspace vector, or None when the
    system has full column rank.  Avoids materializing the whole
    nullspace basis of very underdetermined systems.  Large
    characteristic-2 systems go through the vectorized bit-plane path;
    the cutoff is a pure function of the input shape, so results stay
    reproducible."""
    if K.characteristic == 2 and len(rows) * nunk >= 1 << 20:
        return _nullspace_vector_planes(K, rows, nunk)
    if K.characteristic != 2:
        sols = nullspace(K, rows, nunk)
        return sols[0] if sols else None
    piv, free, mm = _f2_eliminate(K, rows, nunk, back=False)
    if not free:
        return None
    # forward-substitute ascending: each pivot row has its pivot as the
    # highest set bit, so all dependencies are already decided
    vec = 1 << free[0]
    for p in sorted(piv):
        if (piv[p] & vec).bit_count() & 1:
            vec |= 1 << p
    mask = (1 << mm) - 1
    return [(vec >> (u * mm)) & mask for u in range(nunk)]


def _nullspace_vector_planes(K: FieldCtx, rows: Sequence[Sequence[int]],
                             nunk: int) -> Optional[List[int]]:
    """Column-major Gaussian elimination over F_q (q = 2^mm) with rows
    held as mm packed bit planes of their entry values, so adding a
    constant multiple of the pivot row to a whole group of rows is a
    handful of vectorized xors.  Field addition is plane-wise xor and
    multiplication by a constant is an F_2-linear map on the planes."""
    import numpy as np

    q = K.order
    mm = (q - 1).bit_length()
    n = len(rows)
    if n == 0:
        out = [0] * nunk
        out[0] = 1
        return out
    words = (nunk + 63) >> 6
    V = np.array(rows, dtype=np.uint8)
    # plane j of a row packs bit j of each entry, 64 columns per word
    A = np.zeros((n, mm, words), dtype=np.uint64)
    pad = words * 64 - nunk
    for j in range(mm):
        bits = (V >> j) & 1
        if pad:
            bits = np.concatenate(
                [bits, np.zeros((n, pad), dtype=np.uint8)], axis=1)
        A[:, j, :] = np.packbits(bits, axis=1, bitorder="little") \
            .view(np.uint64).reshape(n, words)
    del V
    # mulmask[v][j] = input-plane combination giving output plane j of
    # multiplication by the constant v
    mulmask = [[0] * mm for _ in range(q)]
    for v in range(q):
        for i in range(mm):
            pv = K.mul(v, 1 << i)
            for j in range(mm):
                if (pv >> j) & 1:
                    mulmask[v][j] |= 1 << i

    def _scaled(planes, v):
        out = np.zeros_like(planes)
        for j in range(mm):
            msk = mulmask[v][j]
            while msk:
                i = (msk & -msk).bit_length() - 1
                out[j] ^= planes[i]
                msk &= msk - 1
        return out

    live = np.ones(n, dtype=bool)
    pivots: List[Tuple[int, int]] = []
    for c in range(nunk):
        wc, bc = c >> 6, np.uint64(c & 63)
        col = (A[:, :, wc] >> bc) & np.uint64(1)
        vals = np.zeros(n, dtype=np.uint8)
        for j in range(mm):
            vals |= col[:, j].astype(np.uint8) << j
        vals[~live] = 0
        nz = np.flatnonzero(vals)
        if nz.size == 0:
            continue
        pr = int(nz[0])
        v = int(vals[pr])
        if v != 1:
            A[pr] = _scaled(A[pr], K.inv(v))
        live[pr] = False
        pivots.append((c, pr))
        others = nz[1:]
        if others.size:
            f = vals[others]
            for val in np.unique(f):
                idx = others[f == val]
                A[idx] ^= _scaled(A[pr], int(val))[None, :, :]
        if not live.any():
            break
    if len(pivots) >= nunk:
        return None
    pivcols = {c for c, _ in pivots}
    fc = next(u for u in range(nunk) if u not in pivcols)
    # back-substitute against the echelon rows, highest pivot first
    x = np.zeros(nunk, dtype=np.uint8)
    x[fc] = 1
    log = [0] * q
    exp = [0] * (q - 1)
    acc = 1
    gen = _plane_generator(K)
    for i in range(q - 1):
        log[acc] = i
        exp[i] = acc
        acc = K.mul(acc, gen)
    lognp = np.array(log, dtype=np.int64)
    expnp = np.array(exp + exp, dtype=np.uint8)
    for c, pr in reversed(pivots):
        raw = np.unpackbits(A[pr].view(np.uint8), bitorder="little")
        raw = raw.reshape(mm, words * 64)[:, :nunk]
        rv = np.zeros(nunk, dtype=np.uint8)
        for j in range(mm):
            rv |= raw[j] << j
        sel = (rv != 0) & (x != 0)
        sel[c] = False
        prods = expnp[lognp[rv[sel]] + lognp[x[sel]]]
        x[c] = np.bitwise_xor.reduce(prods) if prods.size else 0
    return [int(t) for t in x]


_GEN_CACHE: Dict[Tuple[int, int], int] = {}


def _plane_generator(K: FieldCtx) -> int:
    """A multiplicative generator of the top field, found by order
    check; cached per context."""
    key = (id(K), K.order)
    got = _GEN_CACHE.get(key)
    if got is not None:
        return got
    q = K.order
    if q == 2:
        return 1
    fac = {}
    m = q - 1
    p = 2
    while p * p <= m:
        while m % p == 0:
            fac[p] = 1
            m //= p
        p += 1
    if m > 1:
        fac[m] = 1
    for g in range(2, q):
        if all(K.pow(g, (q - 1) // pf) != 1 for pf in fac):
            _GEN_CACHE[key] = g
            return g
    raise AssertionError("no multiplicative generator found")
