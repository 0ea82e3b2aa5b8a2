"""
codec.py

Code instances over a torsion subfield: the general construction
(message functions evaluated at the degree-one places above T - beta,
bundled into m-tuples) and its folded Reed-Solomon specialization
(M = T, messages are polynomials in the torsion generator, evaluated
along the automorphism orbit).  Both kinds share the evaluation,
folding, and encoding machinery.

Place evaluation is denominator-aware: a message function can have a
denominator vanishing at T - beta while the function itself is regular
at every place above it, so evaluation falls back to power-series
division in the local parameter whenever plug-in evaluation would
divide by zero.

Instances serialize to a line-oriented UTF-8 text format (sections
[meta], [subfield], [basis], [genmatrix], [residue]; see
docs/FORMAT.md) with a trailing content hash; deserialization re-runs
the structural certificates and recomputes the generator matrix and
residue images from the basis, refusing files that disagree.
"""

from __future__ import annotations

import hashlib
import random
from typing import Dict, List, Optional, Sequence, Tuple

from .gf import FieldCtx, field_build
from .linalg import rank
from .polys import LaurentSeries, Poly, eval_poly_series, taylor_shift
from .rrspace import MessageFunction, RRBasis, rr_basis
from .subfield import (SubfieldCtx, build_folded_rs_field, place_series,
                       subfield_from_parts)

FORMAT_VERSION = 1
_HEADER = "cyclocode instance v%d" % FORMAT_VERSION


class FoldedWord:
    """A codeword (or received word) of N symbols, each an m-tuple of
    field elements, in the instance's fixed (beta, iota) order."""

    __slots__ = ("m", "symbols")

    def __init__(self, m: int, symbols: Sequence[Sequence[int]]):
        syms = [tuple(s) for s in symbols]
        if any(len(s) != m for s in syms):
            raise ValueError("symbol arity mismatch")
        self.m = m
        self.symbols = syms

    def __len__(self) -> int:
        return len(self.symbols)

    def __eq__(self, other):
        return (isinstance(other, FoldedWord) and self.m == other.m
                and self.symbols == other.symbols)

    def __repr__(self):
        return "FoldedWord(m=%d, N=%d)" % (self.m, len(self.symbols))


def fold(values: Sequence[int], m: int) -> FoldedWord:
    if len(values) % m:
        raise ValueError("length not a multiple of the folding parameter")
    return FoldedWord(m, [tuple(values[i:i + m])
                          for i in range(0, len(values), m)])


def unfold(word: FoldedWord) -> List[int]:
    out: List[int] = []
    for s in word.symbols:
        out.extend(s)
    return out


class CodeInstance:
    """An immutable built code: basis of message functions, generator
    matrix over the used places, and the residue-field images the
    decoder inverts through.

    columns lists the used places as (beta, j) pairs: beta ascending in
    canonical field order, j ascending within each group, with the
    trailing b mod m places of every group discarded so each group
    folds into whole m-tuples.
    """

    __slots__ = ("kind", "ctx", "ell", "m", "k", "n", "used_per_group",
                 "N", "columns", "basis", "genmatrix", "basis_at_Aprime",
                 "meta")

    def __init__(self, kind: str, ctx: SubfieldCtx, ell: int, m: int,
                 basis: List[MessageFunction], columns: List[Tuple[int, int]],
                 genmatrix: List[List[int]], basis_at_Aprime: List[int],
                 meta: Dict):
        self.kind = kind
        self.ctx = ctx
        self.ell = ell
        self.m = m
        self.k = len(basis)
        self.n = len(ctx.betas) * ctx.b
        self.used_per_group = len(columns) // len(ctx.betas)
        self.N = len(columns) // m
        self.columns = columns
        self.basis = basis
        self.genmatrix = genmatrix
        self.basis_at_Aprime = basis_at_Aprime
        self.meta = meta

    @property
    def n_used(self) -> int:
        return len(self.columns)

    def design_distance(self) -> int:
        return self.n - self.ell * self.ctx.d

    def __repr__(self):
        return ("CodeInstance(kind=%s, n=%d, k=%d, m=%d, N=%d)"
                % (self.kind, self.n, self.k, self.m, self.N))


# ---------------------------------------------------------------------------
# evaluation

def evaluate_message(ctx: SubfieldCtx, f: MessageFunction, beta: int,
                     j: int) -> int:
    """Value of f at the j-th degree-one place above T - beta.

    Plug-in evaluation when the denominator is nonzero at beta;
    otherwise series division in the local parameter t = T - beta,
    which is well defined because message functions have no poles at
    these places.
    """
    K = ctx.K
    mb = ctx.M.eval(beta)
    if mb == 0:
        raise ValueError("evaluation point lies under the ramified place")
    scale = K.inv(K.pow(mb, f.e)) if f.e else 1
    db = f.den.eval(beta)
    if db != 0:
        num = ctx.eval_at_place(f.numerator(), beta, j)
        return K.mul(num, K.mul(K.inv(db), scale) if f.den.degree else scale)
    den_sh = taylor_shift(f.den, beta)
    w = next(i for i, c in enumerate(den_sh.coeffs) if c)
    # ordering the places may need more depth than the division itself
    prec = w + 2
    while True:
        try:
            s = place_series(ctx, beta, prec)[j]
            break
        except AssertionError:
            if prec > 1 << 12:
                raise
            prec *= 2
    coeff_series = [LaurentSeries(K, 0, taylor_shift(c, beta).coeffs, prec)
                    for c in f.coeffs]
    num = eval_poly_series(coeff_series, s)
    quot = num * LaurentSeries(K, 0, den_sh.coeffs, prec).inv()
    if not quot.is_zero() and quot.valuation < 0:
        raise AssertionError("message function has a pole at a place "
                             "above T - %s" % K.render(beta))
    return K.mul(quot.coeff(0), scale) if scale != 1 else quot.coeff(0)


def message_at_Aprime(ctx: SubfieldCtx, f: MessageFunction) -> int:
    """Image of f in the residue field at the place above A."""
    R = ctx.residue.field
    num = ctx.eval_at_Aprime(f.numerator())
    dv = ctx.reduce_mod_A(f.den)
    if dv == 0:
        raise ValueError("denominator vanishes modulo A")
    acc = dv
    if f.e:
        acc = R.mul(acc, R.pow(ctx.reduce_mod_A(ctx.M), f.e))
    if acc == 1:
        return num
    return R.mul(num, R.inv(acc))


# ---------------------------------------------------------------------------
# construction

def _used_columns(ctx: SubfieldCtx, m: int) -> List[Tuple[int, int]]:
    per = m * (ctx.b // m)
    if per == 0:
        raise ValueError("folding parameter exceeds the places per group")
    cols: List[Tuple[int, int]] = []
    for beta in ctx.betas:
        for j in range(per):
            cols.append((beta, j))
    return cols


def build_code(kind: str, *, ctx: Optional[SubfieldCtx] = None,
               ell: Optional[int] = None, m: int = 1,
               K: Optional[FieldCtx] = None, gamma: Optional[int] = None,
               k: Optional[int] = None, force: bool = False,
               basis: Optional[RRBasis] = None, seed: int = 0
               ) -> CodeInstance:
    """Build a code instance.

    kind "cyclotomic": needs ctx (a cyclotomic SubfieldCtx) and ell;
    the message basis comes from rr_basis (or a precomputed `basis`),
    and uncertified bases are refused unless force is set.

    kind "folded_rs": needs K (with F_q on top), a primitive gamma and
    the dimension k; the message basis is the monomials
    1, mu, ..., mu^(k-1) and the code unfolds to classical
    Reed-Solomon evaluation along the orbit 1, gamma, gamma^2, ...
    """
    if m < 1:
        raise ValueError("folding parameter must be >= 1")
    meta: Dict = {"seed": seed}
    if kind == "cyclotomic":
        if ctx is None or ell is None:
            raise ValueError("cyclotomic build needs ctx and ell")
        if ctx.kind != "cyclotomic":
            raise ValueError("context is not cyclotomic")
        if ctx.D * ctx.b <= ell * ctx.d:
            raise ValueError("degree of A times b must exceed ell*d for "
                             "the residue map to be injective")
        if basis is None:
            basis = rr_basis(ctx, ell)
        if basis.ell != ell:
            raise ValueError("basis was computed for a different ell")
        if not basis.certified and not force:
            raise ValueError("uncertified basis dimension; pass force=True "
                             "to build anyway")
        members = basis.members
        meta["certified"] = basis.certified
    elif kind == "folded_rs":
        if K is None or gamma is None or k is None:
            raise ValueError("folded_rs build needs K, gamma and k")
        if not 1 <= k < K.order - 1:
            raise ValueError("dimension must satisfy 1 <= k < q-1")
        ctx = build_folded_rs_field(K, gamma)
        ell = k - 1
        members = [MessageFunction(ctx, 0, 1, [0] * t + [1])
                   for t in range(k)]
        meta["gamma"] = gamma
        meta["certified"] = True
    else:
        raise ValueError("unknown code kind %r" % kind)
    if ctx.D * ctx.b <= ell * ctx.d:
        raise ValueError("degree of A times b must exceed ell*d")
    columns = _used_columns(ctx, m)
    genmatrix = [[evaluate_message(ctx, f, beta, j) for beta, j in columns]
                 for f in members]
    if rank(ctx.K, genmatrix) != len(members):
        raise AssertionError("generator matrix is rank deficient")
    images = [message_at_Aprime(ctx, f) for f in members]
    meta["discarded_per_group"] = ctx.b % m
    return CodeInstance(kind, ctx, ell, m, list(members), columns,
                        genmatrix, images, meta)


# ---------------------------------------------------------------------------
# encoding

def encode_unfolded(inst: CodeInstance, msg: Sequence[int]) -> List[int]:
    if len(msg) != inst.k:
        raise ValueError("message length %d, expected %d"
                         % (len(msg), inst.k))
    K = inst.ctx.K
    out = [0] * inst.n_used
    for t, c in enumerate(msg):
        if not c:
            continue
        row = inst.genmatrix[t]
        for i in range(inst.n_used):
            if row[i]:
                out[i] = K.add(out[i], K.mul(c, row[i]))
    return out


def encode(inst: CodeInstance, msg: Sequence[int]) -> FoldedWord:
    """Fold the generator-matrix image of msg into N m-tuples."""
    return fold(encode_unfolded(inst, msg), inst.m)


def message_function(inst: CodeInstance, msg: Sequence[int]
                     ) -> MessageFunction:
    """The message function sum msg[t] * basis[t]."""
    if len(msg) != inst.k:
        raise ValueError("message length mismatch")
    acc = MessageFunction(inst.ctx, 0, 1, [])
    for c, f in zip(msg, inst.basis):
        if c:
            acc = acc + f.scale(c)
    return acc


def code_stats(inst: CodeInstance, samples: int = 1000, seed: int = 0
               ) -> Dict:
    """Sampled distance report: random nonzero messages must have
    unfolded weight at least n_used - ell*d (the places a nonzero
    message function can vanish at are bounded by its pole degree)."""
    rng = random.Random(seed)
    q = inst.ctx.K.order
    floor = inst.n_used - inst.ell * inst.ctx.d
    minw = inst.n_used
    for _ in range(samples):
        msg = [0] * inst.k
        while all(c == 0 for c in msg):
            msg = [rng.randrange(q) for _ in range(inst.k)]
        w = sum(1 for v in encode_unfolded(inst, msg) if v)
        if w < floor:
            raise AssertionError("sampled codeword weight %d below the "
                                 "pole-degree floor %d" % (w, floor))
        minw = min(minw, w)
    return {"k": inst.k, "n": inst.n, "n_used": inst.n_used, "N": inst.N,
            "m": inst.m, "design_distance": inst.design_distance(),
            "weight_floor": floor, "min_weight_observed": minw,
            "samples": samples}


# ---------------------------------------------------------------------------
# serialization

def _field_text(K: FieldCtx) -> str:
    return K.tower_text()


def _field_from_text(text: str) -> FieldCtx:
    parts = text.split(":")
    p = int(parts[0])
    moduli = [[int(c, 16) for c in part.split(",")] for part in parts[1:]]
    degrees = [len(m) - 1 for m in moduli]
    return field_build(p, degrees, moduli)


def _member_line(f: MessageFunction) -> str:
    return "; ".join([str(f.e), f.den.render()]
                     + [c.render() for c in f.coeffs])


def _member_parse(ctx: SubfieldCtx, line: str) -> MessageFunction:
    parts = [p.strip() for p in line.split(";")]
    if len(parts) != ctx.b + 2:
        raise ValueError("malformed basis member line")
    e = int(parts[0])
    den = Poly.parse(ctx.K, parts[1])
    coeffs = [Poly.parse(ctx.K, p) for p in parts[2:]]
    return MessageFunction(ctx, e, den, coeffs)


def serialize_text(inst: CodeInstance) -> str:
    ctx = inst.ctx
    K = ctx.K
    lines = [_HEADER, "[meta]"]
    lines.append("kind = %s" % inst.kind)
    lines.append("seed = %d" % inst.meta.get("seed", 0))
    lines.append("tower = %s" % _field_text(K))
    lines.append("r_level = %d" % ctx.r_level)
    lines.append("m = %d" % inst.m)
    lines.append("ell = %d" % inst.ell)
    lines.append("k = %d" % inst.k)
    if inst.kind == "folded_rs":
        lines.append("gamma = %s" % K.render(inst.meta["gamma"]))
    lines.append("discarded_per_group = %d"
                 % inst.meta.get("discarded_per_group", 0))
    lines.append("[subfield]")
    lines.append("M = %s" % ctx.M.render())
    lines.append("A = %s" % ctx.A.render())
    lines.append("sigma_den = %s" % ctx.sigma_den.render())
    lines.append("h = %s" % "; ".join(c.render() for c in ctx.h))
    lines.append("sigma = %s"
                 % "; ".join(c.render() for c in ctx.sigmaA_mu.coeffs))
    lines.append("betas = %s" % ",".join(K.render(b) for b in ctx.betas))
    lines.append("[basis]")
    lines.append("ell = %d" % inst.ell)
    lines.append("dim = %d" % inst.k)
    lines.append("certified = %d" % (1 if inst.meta.get("certified") else 0))
    for f in inst.basis:
        lines.append("member = %s" % _member_line(f))
    lines.append("[genmatrix]")
    for row in inst.genmatrix:
        lines.append("row = %s" % " ".join(K.render(v) for v in row))
    lines.append("[residue]")
    R = ctx.residue.field
    lines.append("eval = %s"
                 % " ".join(R.render(v) for v in inst.basis_at_Aprime))
    body = "\n".join(lines) + "\n"
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    return body + "checksum = %s\n" % digest


def serialize(inst: CodeInstance, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_text(inst))


def _parse_sections(text: str) -> Tuple[Dict[str, List[Tuple[str, str]]],
                                        str]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != _HEADER:
        raise ValueError("unrecognized header or format version")
    if not lines[-1].startswith("checksum = "):
        raise ValueError("missing checksum")
    digest = lines[-1].split("=", 1)[1].strip()
    body = "\n".join(lines[:-1]) + "\n"
    if hashlib.sha256(body.encode("utf-8")).hexdigest() != digest:
        raise ValueError("checksum mismatch: corrupted instance file")
    sections: Dict[str, List[Tuple[str, str]]] = {}
    current: Optional[str] = None
    for line in lines[1:-1]:
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            sections[current] = []
            continue
        if current is None or " = " not in line:
            raise ValueError("malformed line outside any section")
        key, val = line.split(" = ", 1)
        sections[current].append((key, val))
    return sections, digest


def _section_dict(pairs: List[Tuple[str, str]]) -> Dict[str, str]:
    return dict(pairs)


def deserialize(path: str) -> CodeInstance:
    """Load an instance, re-verifying the checksum, the subfield
    certificates, and that the stored generator matrix and residue
    images are reproduced from the stored basis."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    sections, _ = _parse_sections(text)
    for name in ("meta", "subfield", "basis", "genmatrix", "residue"):
        if name not in sections:
            raise ValueError("missing section [%s]" % name)
    meta = _section_dict(sections["meta"])
    sub = _section_dict(sections["subfield"])
    kind = meta["kind"]
    K = _field_from_text(meta["tower"])
    m = int(meta["m"])
    ell = int(meta["ell"])
    k = int(meta["k"])
    M = Poly.parse(K, sub["M"])
    A = Poly.parse(K, sub["A"])
    sigma_den = Poly.parse(K, sub["sigma_den"])
    h = [Poly.parse(K, p) for p in sub["h"].split(";")]
    sigma = [Poly.parse(K, p) for p in sub["sigma"].split(";")]
    betas = [K.parse(x) for x in sub["betas"].split(",")]
    if kind == "cyclotomic":
        ctx = subfield_from_parts(K, int(meta["r_level"]), M, A, h, sigma,
                                  sigma_den, betas)
    elif kind == "folded_rs":
        ctx = build_folded_rs_field(K, K.parse(meta["gamma"]))
        if ctx.h != h or ctx.A != A:
            raise ValueError("stored folded-RS field disagrees with its "
                             "parameters")
    else:
        raise ValueError("unknown code kind %r" % kind)
    bas = _section_dict([(kk, v) for kk, v in sections["basis"]
                         if kk != "member"])
    members = [_member_parse(ctx, v) for kk, v in sections["basis"]
               if kk == "member"]
    if len(members) != k or int(bas["dim"]) != k or int(bas["ell"]) != ell:
        raise ValueError("basis section disagrees with the metadata")
    columns = _used_columns(ctx, m)
    stored_rows = [[K.parse(x) for x in v.split()]
                   for kk, v in sections["genmatrix"] if kk == "row"]
    genmatrix = [[evaluate_message(ctx, f, beta, j) for beta, j in columns]
                 for f in members]
    if stored_rows != genmatrix:
        raise ValueError("stored generator matrix is not reproduced by "
                         "the stored basis")
    if rank(K, genmatrix) != k:
        raise AssertionError("generator matrix is rank deficient")
    R = ctx.residue.field
    res = _section_dict(sections["residue"])
    stored_images = [R.parse(x) for x in res["eval"].split()]
    images = [message_at_Aprime(ctx, f) for f in members]
    if stored_images != images:
        raise ValueError("stored residue images are not reproduced by "
                         "the stored basis")
    inst_meta = {"seed": int(meta["seed"]),
                 "certified": bool(int(bas.get("certified", "1"))),
                 "discarded_per_group": int(meta.get("discarded_per_group",
                                                     "0"))}
    if kind == "folded_rs":
        inst_meta["gamma"] = K.parse(meta["gamma"])
    return CodeInstance(kind, ctx, ell, m, members, columns, genmatrix,
                        images, inst_meta)
