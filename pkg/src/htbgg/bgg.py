"""The functors L and R, complexes of line-bundle sums, and global sections.

Polynomials in ``x_0..x_n`` are dicts from packed exponent vectors to
coefficients; the exponent of ``x_i`` occupies bits ``8i..8i+7`` so that
monomial multiplication is integer addition.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb

import numpy as np

from .exactla import QQ, Mat, SparseMat
from .lamcomplex import ComplexError, DegreewiseComplex, FreeComplex
from .lammod import FreeModule, GradedLambdaModule, ModMorphism
from .exterior import ExtElement

BITS = 8


class BGGError(ValueError):
    pass


# ----------------------------------------------------------------- polynomials

def var(i):
    return 1 << (BITS * i)


def mono_degree(m, nv):
    return sum((m >> (BITS * i)) & 0xFF for i in range(nv))


def mono_exponents(m, nv):
    return [(m >> (BITS * i)) & 0xFF for i in range(nv)]


@lru_cache(maxsize=None)
def mono_basis(nv, k):
    """Sorted packed monomials of degree ``k`` in ``nv`` variables."""
    if k < 0:
        return np.zeros(0, dtype=np.int64)
    out = sorted(sum(var(i) for i in c) for c in combinations_with_replacement(range(nv), k))
    return np.array(out, dtype=np.int64)


def poly_add(f, g, field):
    out = dict(f)
    for m, c in g.items():
        x = field.norm(out.get(m, 0) + c)
        if x:
            out[m] = x
        else:
            out.pop(m, None)
    return out


def poly_mul(f, g, field):
    out = {}
    for m1, a in f.items():
        for m2, b in g.items():
            m = m1 + m2
            out[m] = field.norm(out.get(m, 0) + a * b)
    return {m: c for m, c in out.items() if c}


def poly_scale(f, c, field):
    if not c:
        return {}
    return {m: field.norm(c * x) for m, x in f.items()}


def poly_str(f, nv, field=QQ):
    if not f:
        return "0"
    parts = []
    for m in sorted(f, reverse=True):
        c = f[m]
        if field.char and c > field.p // 2:
            c -= field.p
        ex = mono_exponents(m, nv)
        mono = "*".join(f"x{i}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(ex) if e)
        if not mono:
            s = str(c)
        elif c == 1:
            s = mono
        elif c == -1:
            s = "-" + mono
        else:
            s = f"{c}*{mono}"
        parts.append(s)
    out = parts[0]
    for s in parts[1:]:
        out += s if s.startswith("-") else "+" + s
    return out


@dataclass
class SPoly:
    """Homogeneous polynomial; thin wrapper used at API boundaries."""

    nv: int
    terms: dict
    field: object = QQ

    @property
    def degree(self):
        if not self.terms:
            return None
        return mono_degree(next(iter(self.terms)), self.nv)

    def __str__(self):
        return poly_str(self.terms, self.nv, self.field)


class PolyMatrix:
    """Sparse matrix of homogeneous polynomials: ``(row, col) -> poly dict``."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows, cols, entries=None):
        self.rows, self.cols = rows, cols
        self.entries = {k: v for k, v in (entries or {}).items() if v}

    def matmul(self, other, field):
        if self.cols != other.rows:
            raise BGGError("shape mismatch in polynomial matrix product")
        by_row = {}
        for (k, c), g in other.entries.items():
            by_row.setdefault(k, []).append((c, g))
        out = {}
        for (r, k), f in self.entries.items():
            for c, g in by_row.get(k, ()):
                h = poly_mul(f, g, field)
                if h:
                    out[(r, c)] = poly_add(out.get((r, c), {}), h, field)
        return PolyMatrix(self.rows, other.cols, out)

    def transpose(self):
        return PolyMatrix(self.cols, self.rows, {(c, r): f for (r, c), f in self.entries.items()})

    def is_zero(self):
        return not self.entries

    def constant_block(self, field):
        """Matrix of constant entries."""
        M = Mat.zeros(field, self.rows, self.cols)
        for (r, c), f in self.entries.items():
            if 0 in f:
                M.a[r, c] = f[0]
        return M

    def __eq__(self, other):
        return (isinstance(other, PolyMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)


class SComplex:
    """Complex of sums of line bundles ``O(m)`` with polynomial differentials.

    ``terms[s]`` lists twists; ``labels[s]`` gives a provenance tag per summand;
    ``diffs[s]`` maps term ``s`` to term ``s + 1`` (rows index the target).
    """

    def __init__(self, n, terms, diffs=None, labels=None, field=QQ):
        self.n, self.field = n, field
        self.terms = {int(s): list(t) for s, t in terms.items() if len(t)}
        self.labels = {s: list((labels or {}).get(s, [None] * len(t))) for s, t in self.terms.items()}
        self.diffs = {}
        for s, D in (diffs or {}).items():
            if D.is_zero():
                continue
            if D.cols != len(self.term(s)) or D.rows != len(self.term(s + 1)):
                raise BGGError(f"differential at {s} has shape {D.rows}x{D.cols}")
            self.diffs[s] = D

    @property
    def nv(self):
        return self.n + 1

    def term(self, s):
        return self.terms.get(s, [])

    def diff(self, s):
        return self.diffs.get(s) or PolyMatrix(len(self.term(s + 1)), len(self.term(s)))

    def positions(self):
        return sorted(self.terms)

    def ranks(self):
        return {s: len(t) for s, t in self.terms.items()}

    def twist_multisets(self):
        return {s: Counter(t) for s, t in self.terms.items()}

    def check_degrees(self):
        bad = []
        for s, D in self.diffs.items():
            for (r, c), f in D.entries.items():
                want = self.terms[s + 1][r] - self.terms[s][c]
                for m in f:
                    if mono_degree(m, self.nv) != want:
                        bad.append((s, r, c))
                        break
        return bad

    def verify(self):
        """Degree typing and ``d o d = 0``."""
        failures = [{"position": s, "row": r, "col": c, "problem": "degree"}
                    for s, r, c in self.check_degrees()]
        for s in self.positions():
            if s in self.diffs and (s + 1) in self.diffs:
                prod = self.diffs[s + 1].matmul(self.diffs[s], self.field)
                for (r, c) in prod.entries:
                    failures.append({"position": s, "row": r, "col": c, "problem": "d^2"})
        return {"ok": not failures, "failures": failures}

    def twisted(self, k):
        return SComplex(self.n, {s: [m + k for m in t] for s, t in self.terms.items()},
                        self.diffs, self.labels, self.field)

    def dual(self):
        """Dual complex: term ``-s`` carries the negated twists of term ``s``."""
        terms = {-s: [-m for m in t] for s, t in self.terms.items()}
        diffs = {-s - 1: D.transpose() for s, D in self.diffs.items()}
        return SComplex(self.n, terms, diffs, None, self.field)

    def constant_part(self, s):
        return self.diff(s).constant_block(self.field)

    def is_minimal(self):
        return all(0 not in f for D in self.diffs.values() for f in D.entries.values())

    def __repr__(self):
        body = ", ".join(f"{s}: {sorted(Counter(t).items(), reverse=True)}" for s, t in sorted(self.terms.items()))
        return f"SComplex(n={self.n}, {{{body}}})"

    def describe(self):
        """Readable summary of the terms, e.g. ``O(-1)^3 + O^2``."""
        out = {}
        for s, t in sorted(self.terms.items()):
            parts = []
            for m, k in sorted(Counter(t).items(), reverse=True):
                b = "O" if m == 0 else f"O({m})"
                parts.append(b if k == 1 else f"{b}^{k}")
            out[s] = " + ".join(parts)
        return out


# ------------------------------------------------------------------ functor L

def _as_degreewise(K):
    if isinstance(K, FreeComplex):
        return K.degreewise()
    if isinstance(K, DegreewiseComplex):
        return K
    if isinstance(K, FreeModule):
        return FreeComplex({0: K}, {}, K.n).degreewise()
    if isinstance(K, GradedLambdaModule):
        return DegreewiseComplex(K.n, {0: K}, {}, K.field)
    raise TypeError(f"cannot apply L to {type(K).__name__}")


def L_of_module(N, field=None):
    """``L(N)``: term ``p`` is ``N_p (x) O(p)``, differential induced by the action."""
    if isinstance(N, FreeModule):
        N = GradedLambdaModule.from_free(N, field or QQ)
    return L_of_complex(DegreewiseComplex(N.n, {0: N}, {}, N.field))


def L_of_complex(K):
    """Total complex: term ``s`` is the sum over ``p`` of ``K^p_{s-p} (x) O(s-p)``.

    Summands are ordered by ``p`` then by basis vector.  The part coming from
    the differential of ``K`` is multiplied by ``(-1)^q`` with ``q`` the
    internal degree of its source.
    """
    D = _as_degreewise(K)
    n, F = D.n, D.field
    slots = {}  # s -> list of (p, q, k)
    for p in D.positions():
        M = D.module(p)
        for q in M.degrees():
            for k in range(M.dim(q)):
                slots.setdefault(p + q, []).append((p, q, k))
    for s in slots:
        slots[s].sort()
    index = {s: {lab: j for j, lab in enumerate(lst)} for s, lst in slots.items()}
    first = {s: {} for s in slots}
    for s, lst in slots.items():
        for j, (p, q, k) in enumerate(lst):
            first[s].setdefault((p, q), j)
    terms = {s: [q for (_, q, _) in lst] for s, lst in slots.items()}
    diffs = {}
    for s, lst in slots.items():
        if s + 1 not in slots:
            continue
        ent = {}
        tgt_first = first[s + 1]
        for (p, q), c0 in first[s].items():
            M = D.module(p)
            # horizontal: module action
            if (p, q + 1) in tgt_first:
                r0 = tgt_first[(p, q + 1)]
                for i in range(n + 1):
                    A = M.act(i, q)
                    for l, k in zip(*np.nonzero(A.a)):
                        key = (r0 + int(l), c0 + int(k))
                        poly = ent.setdefault(key, {})
                        poly[var(i)] = F.norm(poly.get(var(i), 0) + A.a[l, k])
            # vertical: differential of K
            if (p + 1, q) in tgt_first:
                r0 = tgt_first[(p + 1, q)]
                B = D.map(p, q)
                sgn = -1 if q & 1 else 1
                for l, k in zip(*np.nonzero(B.a)):
                    key = (r0 + int(l), c0 + int(k))
                    ent[key] = {0: F.norm(sgn * B.a[l, k])}
        ent = {k: {m: c for m, c in v.items() if c} for k, v in ent.items()}
        diffs[s] = PolyMatrix(len(slots[s + 1]), len(lst), ent)
    return SComplex(n, terms, diffs, slots, F)


def closed_form_terms(G):
    """Twist multiset of ``L(G)`` term ``s``: ``H^i_d (x) Lambda^{i-s} V* (x) O(s-i-d)``."""
    n = G.n
    out = {}
    for (i, d), mult in G.strand_table().items():
        for s in range(-n - 2 + i, i + 1):
            k = i - s
            if 0 <= k <= n + 1:
                out.setdefault(s, Counter())[s - i - d] += mult * comb(n + 1, k)
    return {s: c for s, c in out.items() if c}


# ------------------------------------------------------------------ functor R

@dataclass
class SModule:
    """Finite graded module over the polynomial ring.

    ``dims[p] = dim M_p``; ``mult[(i, p)]`` is multiplication by ``x_i``
    from ``M_p`` to ``M_{p+1}`` (missing means zero).
    """

    n: int
    dims: dict
    mult: dict = dc_field(default_factory=dict)
    field: object = QQ

    def dim(self, p):
        return self.dims.get(p, 0)

    def degrees(self):
        return sorted(p for p, k in self.dims.items() if k)

    def mul(self, i, p):
        m = self.mult.get((i, p))
        if m is None:
            return Mat.zeros(self.field, self.dim(p + 1), self.dim(p))
        return m

    def check_commuting(self):
        bad = []
        for p in self.degrees():
            for i in range(self.n + 1):
                for j in range(i + 1, self.n + 1):
                    if self.mul(j, p + 1) @ self.mul(i, p) != self.mul(i, p + 1) @ self.mul(j, p):
                        bad.append((i, j, p))
        return bad

    @classmethod
    def residue_field(cls, n, field=QQ):
        return cls(n, {0: 1}, {}, field)

    @classmethod
    def truncated_polynomials(cls, n, field=QQ):
        """``S / m^2``: ``k`` in degree 0 and ``V*`` in degree 1."""
        mult = {}
        for i in range(n + 1):
            m = Mat.zeros(field, n + 1, 1)
            m.a[i, 0] = 1
            mult[(i, 0)] = m
        return cls(n, {0: 1, 1: n + 1}, mult, field)


def R_of_module(M, twist=0):
    """``R(M)(twist)``: term ``p`` is ``M_p (x) Lambda^vee(p + twist)``."""
    bad = M.check_commuting()
    if bad:
        i, j, p = bad[0]
        raise BGGError(f"multiplications by x{i} and x{j} do not commute on degree {p}")
    n, F = M.n, M.field
    terms = {p: FreeModule([p + twist] * M.dim(p), n) for p in M.degrees()}
    diffs = {}
    for p in M.degrees():
        if not M.dim(p + 1):
            continue
        ent = {}
        for i in range(n + 1):
            A = M.mul(i, p)
            for l, k in zip(*np.nonzero(A.a)):
                e = ExtElement("V", n, 1, {1 << i: A.a[l, k]}, F)
                key = (int(l), int(k))
                ent[key] = ent[key] + e if key in ent else e
        diffs[p] = ModMorphism(terms[p], terms[p + 1], ent, F)
    return FreeComplex(terms, diffs, n, F)


# --------------------------------------------------------- global sections

def _block_coo(D, src_twists, tgt_twists, d, nv, field):
    """COO data of multiplication ``Gamma(src(d)) -> Gamma(tgt(d))`` for PolyMatrix ``D``."""
    src_off, acc = [], 0
    for m in src_twists:
        src_off.append(acc)
        acc += len(mono_basis(nv, m + d))
    ncols = acc
    tgt_off, acc = [], 0
    for m in tgt_twists:
        tgt_off.append(acc)
        acc += len(mono_basis(nv, m + d))
    nrows = acc
    R, C, V = [], [], []
    for (r, c), f in D.entries.items():
        src = mono_basis(nv, src_twists[c] + d)
        if not len(src):
            continue
        tgt = mono_basis(nv, tgt_twists[r] + d)
        if not len(tgt):
            continue
        cols = np.arange(len(src), dtype=np.int64) + src_off[c]
        for mono, coef in f.items():
            pos = np.searchsorted(tgt, src + mono)
            R.append(pos + tgt_off[r])
            C.append(cols)
            V.append(np.full(len(src), coef, dtype=object))
    if R:
        R, C, V = np.concatenate(R), np.concatenate(C), np.concatenate(V)
    else:
        R = C = np.zeros(0, dtype=np.int64)
        V = np.zeros(0, dtype=object)
    return SparseMat(field, (nrows, ncols), R, C, V)


def section_dim(nv, k):
    return comb(k + nv - 1, nv - 1) if k >= 0 else 0


@dataclass
class SectionComplex:
    """Degree-``d`` global sections: term dims and sparse maps."""

    d: int
    dims: dict
    maps: dict

    def rank(self, s):
        m = self.maps.get(s)
        return m.rank() if m is not None else 0

    def homology(self):
        ranks = {s: self.rank(s) for s in self.dims}
        return {s: self.dims[s] - ranks.get(s, 0) - ranks.get(s - 1, 0) for s in self.dims}


def gamma_sections(C, d, positions=None):
    nv = C.nv
    pos = C.positions() if positions is None else [s for s in positions if s in C.terms]
    dims = {s: sum(section_dim(nv, m + d) for m in C.term(s)) for s in pos}
    maps = {}
    for s in pos:
        if s in C.diffs and (positions is None or (s + 1) in pos):
            maps[s] = _block_coo(C.diffs[s], C.term(s), C.term(s + 1), d, nv, C.field)
    return SectionComplex(d, dims, maps)


def h0_kernel_dim(C, s, d):
    """``dim ker Gamma(C^s(d)) -> Gamma(C^{s+1}(d))``."""
    nv = C.nv
    dim = sum(section_dim(nv, m + d) for m in C.term(s))
    if dim == 0 or s not in C.diffs:
        return dim
    return dim - _block_coo(C.diffs[s], C.term(s), C.term(s + 1), d, nv, C.field).rank()


def _chi_line(k, n):
    """Euler characteristic of ``O(k)`` on ``P^n`` (the polynomial ``binom(k+n, n)``)."""
    num = Fraction(1)
    for j in range(1, n + 1):
        num *= Fraction(k + j, j)
    return num


def check_acyclic(C, d_range, fiber_points=0, rng=None):
    """Bookkeeping and section-level exactness checks for a complex of line-bundle sums."""
    n = C.n
    failures = []
    alt = sum((-1) ** (s & 1) * len(t) for s, t in C.terms.items())
    if alt != 0:
        failures.append({"check": "rank", "value": alt})
    for d in range(n + 1):
        chi = sum((-1) ** (s & 1) * _chi_line(m + d, n) for s, t in C.terms.items() for m in t)
        if chi != 0:
            failures.append({"check": "euler", "d": d, "value": str(chi)})
            break
    checked = []
    all_twists = [m for t in C.terms.values() for m in t]
    for d in d_range:
        if all_twists and min(all_twists) + d < -n:
            continue
        h = gamma_sections(C, d).homology()
        checked.append(d)
        for s, x in sorted(h.items()):
            if x:
                failures.append({"check": "sections", "d": d, "position": s, "homology": x})
    if fiber_points:
        failures += _fiber_failures(C, fiber_points, rng)
    bad = C.verify()
    if not bad["ok"]:
        failures += [dict(f, check="complex") for f in bad["failures"][:5]]
    return {"ok": not failures, "failures": failures, "degrees_checked": checked}


def evaluate_poly(f, point, field):
    total = 0
    nv = len(point)
    for m, c in f.items():
        t = c
        for i, e in enumerate(mono_exponents(m, nv)):
            if e:
                t = t * point[i] ** e
        total += t
    return field.norm(total) if field.char else total


def fiber_matrix(D, point, field):
    M = Mat.zeros(field, D.rows, D.cols)
    for (r, c), f in D.entries.items():
        M.a[r, c] = evaluate_poly(f, point, field)
    return M


def _fiber_failures(C, count, rng):
    rng = rng or np.random.default_rng(0)
    F = C.field
    out = []
    for _ in range(count):
        pt = [F.random_element(rng) for _ in range(C.nv)]
        if not any(pt):
            continue
        ranks = {s: fiber_matrix(C.diffs[s], pt, F).rank() for s in C.diffs}
        for s, t in C.terms.items():
            h = len(t) - ranks.get(s, 0) - ranks.get(s - 1, 0)
            if h:
                out.append({"check": "fiber", "point": [str(x) for x in pt], "position": s, "homology": h})
    return out


# ------------------------------------------------------------------ invariants

def z0_rank(G):
    """Rank of the bundle ``Z^0 L(G)`` from the strand table."""
    if not G.is_ht():
        raise BGGError("z0_rank needs an HT-complex")
    return sum(comb(G.n, i) * k for (i, _), k in G.strand_table().items())


@dataclass
class CohomologyTable:
    """``values[(i, d)] = dim H^i(E(d))``; ``None`` marks an unknown entry."""

    n: int
    degrees: list
    values: dict

    def get(self, i, d):
        return self.values.get((i, d))

    def row(self, i):
        return [self.values.get((i, d)) for d in self.degrees]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i"] + list(self.degrees))
        for i in range(self.n, -1, -1):
            w.writerow([i] + ["?" if x is None else x for x in self.row(i)])
        return buf.getvalue()

    def to_markdown(self):
        head = "| i \\ d | " + " | ".join(str(d) for d in self.degrees) + " |"
        sep = "|---" * (len(self.degrees) + 1) + "|"
        lines = [head, sep]
        for i in range(self.n, -1, -1):
            cells = ["?" if x is None else ("." if x == 0 else str(x)) for x in self.row(i)]
            lines.append(f"| {i} | " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"

    def to_json(self):
        return {"n": self.n, "degrees": list(self.degrees),
                "rows": {str(i): self.row(i) for i in range(self.n + 1)}}


def cohomology_table(G, degrees, minimal=None, middle="strands"):
    """Cohomology table of ``E = Z^0 L(G)`` for an HT-complex ``G``.

    Rows ``0 < i < n`` come from the strand table (``middle="strands"``) or from
    section-level homology of the minimized complex (``middle="sections"``).
    Row 0 is a kernel of global sections; row ``n`` uses Serre duality on
    the dual of the left half of the minimized complex.
    """
    if not G.is_ht():
        raise BGGError("cohomology_table needs an HT-complex")
    from .minimize import minimize_complex

    n = G.n
    degrees = list(degrees)
    if minimal is None:
        minimal = minimize_complex(L_of_complex(G))
    table = G.strand_table()
    values = {}
    dual = minimal.dual()
    for d in degrees:
        values[(0, d)] = h0_kernel_dim(minimal, 0, d)
        # H^n E(d) = H^0(E^dual(-d-n-1)); E^dual = ker(dual term 1 -> dual term 2)
        values[(n, d)] = h0_kernel_dim(dual, 1, -d - n - 1)
        if middle == "strands":
            for i in range(1, n):
                values[(i, d)] = table.get((i, d), 0)
    if middle == "sections":
        for d in degrees:
            sec = gamma_sections(minimal, d, positions=range(0, n + 1))
            h = sec.homology()
            for i in range(1, n):
                values[(i, d)] = h.get(i, 0)
    return CohomologyTable(n, degrees, values)
