"""Bounded complexes of free modules over the exterior algebra.

A summand ``Lambda^vee(a)`` sitting at position ``p`` belongs to strand
``i = p - a``; its label in the strand table is ``(i, a)``.  Strands are a
function of position and twist, so they are recomputed on demand rather
than stored.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field as dc_field

import numpy as np

from .exactla import QQ, Mat
from .exterior import ExtElement, basis_masks
from .lammod import (FreeModule, GradedLambdaModule, ModMorphism, ModuleError,
                     hom_space_basis)


class ComplexError(ValueError):
    pass


class FreeComplex:
    """Complex ``G^p -> G^{p+1}`` of free modules; positions without a term are zero."""

    def __init__(self, terms, diffs=None, n=None, field=QQ):
        terms = {int(p): M for p, M in terms.items()}
        if n is None:
            if not terms:
                raise ComplexError("ambient dimension needed for an empty complex")
            n = next(iter(terms.values())).n
        self.n, self.field = n, field
        self.terms = {p: M for p, M in terms.items() if len(M)}
        for M in self.terms.values():
            if M.n != n:
                raise ComplexError("terms have different ambient dimensions")
        self.diffs = {}
        for p, f in (diffs or {}).items():
            p = int(p)
            if f.source != self.term(p) or f.target != self.term(p + 1):
                raise ComplexError(f"differential at position {p} has wrong source or target")
            if f.field != field:
                raise ComplexError("differential field mismatch")
            if not f.is_zero():
                self.diffs[p] = f

    # -- access
    def term(self, p):
        return self.terms.get(p, FreeModule((), self.n))

    def diff(self, p):
        f = self.diffs.get(p)
        if f is None:
            return ModMorphism.zero(self.term(p), self.term(p + 1), self.field)
        return f

    def positions(self):
        return sorted(self.terms)

    def support(self):
        ps = self.positions()
        return (ps[0], ps[-1]) if ps else None

    def is_zero(self):
        return not self.terms

    def strands(self, p):
        return [p - a for a in self.term(p).twists]

    def strand_table(self):
        table = Counter()
        for p, M in self.terms.items():
            for a in M.twists:
                table[(p - a, a)] += 1
        return dict(table)

    def summands(self):
        """``(p, j, twist, strand)`` for every summand."""
        return [(p, j, a, p - a) for p in self.positions() for j, a in enumerate(self.terms[p].twists)]

    def __eq__(self, other):
        if not isinstance(other, FreeComplex):
            return NotImplemented
        return (self.n == other.n and self.field == other.field and self.terms == other.terms
                and self.diffs == other.diffs)

    def __repr__(self):
        body = ", ".join(f"{p}: {list(M.twists)}" for p, M in sorted(self.terms.items()))
        return f"FreeComplex(n={self.n}, {{{body}}})"

    # -- checks
    def verify_complex(self):
        failures = []
        for p in self.positions():
            f, g = self.diffs.get(p), self.diffs.get(p + 1)
            if f is None or g is None:
                continue
            gf = g.compose(f)
            for (r, c), w in gf.entries.items():
                failures.append({"position": p, "row": r, "col": c, "entry": w})
        return {"ok": not failures, "failures": failures}

    def is_minimal(self):
        return all(w.degree > 0 for f in self.diffs.values() for w in f.entries.values())

    def is_ht(self):
        if not self.is_minimal() or not self.verify_complex()["ok"]:
            return False
        return all(0 < i < self.n for p in self.terms for i in self.strands(p))

    # -- strand operations
    def restrict(self, keep):
        """Sub-quotient keeping summands for which ``keep(p, strand)`` holds."""
        idx = {p: [j for j, a in enumerate(M.twists) if keep(p, p - a)] for p, M in self.terms.items()}
        terms = {p: FreeModule([self.terms[p].twists[j] for j in js], self.n) for p, js in idx.items()}
        diffs = {}
        for p, f in self.diffs.items():
            diffs[p] = f.submatrix(idx.get(p + 1, []), idx.get(p, []))
        terms = {p: M for p, M in terms.items() if len(M)}
        diffs = {p: f for p, f in diffs.items() if len(f.source) and len(f.target)}
        return FreeComplex(terms, diffs, self.n, self.field)

    def _require_minimal(self, what):
        if not self.is_minimal():
            raise ComplexError(f"{what} needs a minimal complex")

    def filtration(self, j):
        self._require_minimal("filtration")
        return self.restrict(lambda p, i: i <= j)

    def quotient_F(self):
        self._require_minimal("quotient_F")
        return self.restrict(lambda p, i: 0 < i < self.n)

    def linear_part(self):
        self._require_minimal("linear_part")
        diffs = {p: ModMorphism(f.source, f.target,
                                {k: w for k, w in f.entries.items() if w.degree == 1}, self.field)
                 for p, f in self.diffs.items()}
        return FreeComplex(self.terms, diffs, self.n, self.field)

    def shift_twist(self, t):
        """Twist every summand by ``t`` (``G(t)``)."""
        terms = {p: FreeModule([a + t for a in M.twists], self.n) for p, M in self.terms.items()}
        diffs = {p: ModMorphism(terms[p], terms[p + 1], f.entries, self.field)
                 for p, f in self.diffs.items()}
        return FreeComplex(terms, diffs, self.n, self.field)

    # -- degree-wise views
    def evaluate(self, p, d):
        return self.diff(p).evaluate_degree(d)

    def degreewise(self, cutoff=None):
        """Degree-wise representation; with ``cutoff`` keep only degrees ``d >= cutoff(p)``."""
        mods, maps = {}, {}
        for p, M in self.terms.items():
            full = GradedLambdaModule.from_free(M, self.field)
            if cutoff is not None:
                lo = cutoff(p)
                dims = {d: k for d, k in full.dims.items() if d >= lo}
                action = {key: m for key, m in full.action.items() if key[1] >= lo}
                full = GradedLambdaModule(self.n, dims, action, self.field)
            mods[p] = full
        for p in self.diffs:
            for d in mods.get(p, GradedLambdaModule(self.n, {})).degrees():
                if mods.get(p + 1) is None or not mods[p + 1].dim(d):
                    continue
                m = self.evaluate(p, d)
                if not m.is_zero():
                    maps[(p, d)] = m
        return DegreewiseComplex(self.n, mods, maps, self.field)

    def sigma_truncate(self):
        """Sub-complex with pieces in degrees ``d >= -p`` at position ``p``."""
        return self.degreewise(cutoff=lambda p: -p)


def filtration(G, j):
    return G.filtration(j)


def quotient_F(G):
    return G.quotient_F()


def linear_part(G):
    return G.linear_part()


def is_ht(G):
    return G.is_ht()


def is_minimal(G):
    return G.is_minimal()


def verify_complex(G):
    return G.verify_complex()


def sigma_truncate(G):
    return G.sigma_truncate()


def strand_table(G):
    return G.strand_table()


@dataclass
class DegreewiseComplex:
    """Complex of graded modules given by pieces, actions and degree-wise differentials.

    ``maps[(p, d)]`` is the differential ``N^p_d -> N^{p+1}_d``; missing maps are zero.
    """

    n: int
    modules: dict
    maps: dict = dc_field(default_factory=dict)
    field: object = QQ

    def module(self, p):
        return self.modules.get(p) or GradedLambdaModule(self.n, {}, {}, self.field)

    def map(self, p, d):
        m = self.maps.get((p, d))
        if m is None:
            return Mat.zeros(self.field, self.module(p + 1).dim(d), self.module(p).dim(d))
        return m

    def positions(self):
        return sorted(p for p, M in self.modules.items() if M.total_dim())


# ------------------------------------------------------------------ Hom complex

def _hom_index(N, L):
    idx = {}
    k = 0
    for c, a in enumerate(N.twists):
        for r, b in enumerate(L.twists):
            for T in basis_masks(N.n, b - a):
                idx[(r, c, T)] = k
                k += 1
    return idx, k


def morphism_coords(f, index):
    out = {}
    for (r, c), w in f.entries.items():
        for T, x in w.coeffs.items():
            out[index[(r, c, T)]] = x
    return out


class HomComplex:
    """``Hom^q = prod_p Hom(K^p, G^{p+q})`` with
    ``d(a)_p = a^{p+1} d_K^p + (-1)^{q+1} d_G^{p+q} a^p``."""

    def __init__(self, K, G):
        if K.n != G.n or K.field != G.field:
            raise ComplexError("incompatible complexes")
        self.K, self.G, self.n, self.field = K, G, K.n, K.field
        self._bases = {}

    def degree_range(self):
        if K_empty(self.K) or K_empty(self.G):
            return range(0)
        klo, khi = self.K.support()
        glo, ghi = self.G.support()
        return range(glo - khi - 1, ghi - klo + 2)

    def basis(self, q):
        got = self._bases.get(q)
        if got is None:
            blocks, offset = {}, 0
            for p in self.K.positions():
                N, L = self.K.term(p), self.G.term(p + q)
                idx, size = _hom_index(N, L)
                if size:
                    blocks[p] = (offset, idx, size)
                    offset += size
            got = (blocks, offset)
            self._bases[q] = got
        return got

    def dim(self, q):
        return self.basis(q)[1]

    def differential(self, q):
        """Matrix of ``d^q: Hom^q -> Hom^{q+1}``."""
        src_blocks, src_dim = self.basis(q)
        tgt_blocks, tgt_dim = self.basis(q + 1)
        F = self.field
        D = Mat.zeros(F, tgt_dim, src_dim)
        sgn = -1 if (q + 1) & 1 else 1
        col = 0
        for p in sorted(src_blocks):
            off, idx, size = src_blocks[p]
            N, L = self.K.term(p), self.G.term(p + q)
            for a in hom_space_basis(N, L, F):
                j = off + morphism_coords(a, idx).popitem()[0]
                # a sits at position p; contributes to (d a)_{p-1} and (d a)_p
                if (p - 1) in tgt_blocks and (p - 1) in self.K.diffs:
                    toff, tidx, _ = tgt_blocks[p - 1]
                    img = a.compose(self.K.diffs[p - 1])
                    for i, x in morphism_coords(img, tidx).items():
                        D.a[toff + i, j] = F.norm(D.a[toff + i, j] + x)
                if p in tgt_blocks and (p + q) in self.G.diffs:
                    toff, tidx, _ = tgt_blocks[p]
                    img = self.G.diffs[p + q].compose(a)
                    for i, x in morphism_coords(img, tidx).items():
                        D.a[toff + i, j] = F.norm(D.a[toff + i, j] + sgn * x)
                col += 1
        return D

    def cycles_dim(self, q):
        D = self.differential(q)
        return D.cols - D.rank()

    def homology_dim(self, q):
        return self.cycles_dim(q) - self.differential(q - 1).rank()

    def homology_basis(self, q):
        """Cycles of ``Hom^q`` (columns) together with the homology dimension."""
        Z = self.differential(q).kernel_basis()
        return Z, self.homology_dim(q)


def K_empty(C):
    return C.is_zero()


def hom_complex_homology(K, G, q=0):
    return HomComplex(K, G).homology_dim(q)


def chain_map_dimension(K, G):
    """``dim Hom_C(K, G)``: degree-0 cycles of the Hom complex."""
    return HomComplex(K, G).cycles_dim(0)


def homotopy_class_dimension(K, G):
    return HomComplex(K, G).homology_dim(0)


# ---------------------------------------- Hom out of a degree-wise complex

def _vec_index(shapes):
    offs, total = {}, 0
    for key, (r, c) in shapes.items():
        offs[key] = total
        total += r * c
    return offs, total


def _add_block(rows_acc, M, row_off, col_off):
    """Accumulate the nonzeros of ``M`` into COO lists."""
    nz = np.nonzero(M.a)
    for i, j in zip(*nz):
        rows_acc.append((row_off + int(i), col_off + int(j), M.a[i, j]))


def _linear_maps_space(S, T, shift, n, field):
    """Constraint data for families ``f^p_d: S^p_d -> T^{p+shift}_d`` commuting with the action."""
    shapes = {}
    for p in S.positions():
        Sp, Tp = S.module(p), T.module(p + shift)
        for d in Sp.degrees():
            if Tp.dim(d):
                shapes[(p, d)] = (Tp.dim(d), Sp.dim(d))
    offs, total = _vec_index(shapes)
    entries, nrows = [], 0
    for p in S.positions():
        Sp, Tp = S.module(p), T.module(p + shift)
        for d in Sp.degrees():
            a_d, a_d1 = Sp.dim(d), Sp.dim(d + 1)
            b_d1 = Tp.dim(d + 1)
            if not (a_d and b_d1):
                continue
            for v in range(n + 1):
                # rho^T_v f_d - f_{d+1} rho^S_v = 0 as a map S_d -> T_{d+1}
                if (p, d) in offs:
                    _add_block(entries, Mat.identity(field, a_d).kron(Tp.act(v, d)), nrows, offs[(p, d)])
                if (p, d + 1) in offs:
                    _add_block(entries, Sp.act(v, d).T.kron(Mat.identity(field, b_d1)).scale(-1),
                               nrows, offs[(p, d + 1)])
                nrows += a_d * b_d1
    return shapes, offs, total, entries, nrows


def _to_mat(field, entries, nrows, ncols):
    M = Mat.zeros(field, nrows, ncols)
    for i, j, x in entries:
        M.a[i, j] = field.norm(M.a[i, j] + x)
    return M


def _vec(offs, total, key, M, field):
    """Column-major vectorisation of block ``M`` at ``key``."""
    out = Mat.zeros(field, total, 1)
    if key in offs:
        out.a[offs[key]:offs[key] + M.rows * M.cols, 0] = M.a.T.reshape(-1)
    return out


def chain_maps_from_degreewise(S, G):
    """Basis (columns) of ``Hom_C(S, G)`` for a degree-wise complex ``S`` and free ``G``.

    Unknowns are the matrices ``f^p_d``; they must commute with every ``rho_v``
    and with the differentials.  Returns ``(basis, offs, shapes)``.
    """
    n, field = S.n, S.field
    T = G.degreewise()
    shapes, offs, total, entries, nrows = _linear_maps_space(S, T, 0, n, field)
    for p in S.positions():
        Sp = S.module(p)
        for d in Sp.degrees():
            tgt = T.module(p + 1).dim(d)
            src = Sp.dim(d)
            if not (src and tgt):
                continue
            # d_G f^p_d - f^{p+1}_d d_S = 0 : S^p_d -> G^{p+1}_d
            if (p, d) in offs:
                _add_block(entries, Mat.identity(field, src).kron(T.map(p, d)), nrows, offs[(p, d)])
            if (p + 1, d) in offs:
                _add_block(entries, S.map(p, d).T.kron(Mat.identity(field, tgt)).scale(-1),
                           nrows, offs[(p + 1, d)])
            nrows += src * tgt
    A = _to_mat(field, entries, nrows, total)
    return A.kernel_basis(), offs, shapes


def homotopy_image_from_degreewise(S, G, chain_basis, offs):
    """Rank of null-homotopic maps ``d h + h d`` inside the chain-map space."""
    n, field = S.n, S.field
    T = G.degreewise()
    hshapes, hoffs, htotal, entries, nrows = _linear_maps_space(S, T, -1, n, field)
    if htotal == 0:
        return 0
    A = _to_mat(field, entries, nrows, htotal)
    H = A.kernel_basis()
    total = chain_basis.rows
    cols = []
    for t in range(H.cols):
        h = H.a[:, t]
        img = Mat.zeros(field, total, 1)
        for (p, d), (r, c) in hshapes.items():
            blk = Mat(field, h[hoffs[(p, d)]:hoffs[(p, d)] + r * c].reshape(c, r).T.copy())
            if blk.is_zero():
                continue
            # d_G^{p-1} h^p lands in f^p ; h^{p+1} d_S^p lands in f^{p}... per degree
            dg = T.map(p - 1, d)
            img = img + _vec(offs, total, (p, d), dg @ blk, field)
        for (p, d), (r, c) in hshapes.items():
            blk = Mat(field, h[hoffs[(p, d)]:hoffs[(p, d)] + r * c].reshape(c, r).T.copy())
            if blk.is_zero():
                continue
            ds = S.map(p - 1, d)
            if (p - 1, d) in offs:
                img = img + _vec(offs, total, (p - 1, d), blk @ ds, field)
        cols.append(img)
    if not cols:
        return 0
    return cols[0].hstack(*cols[1:]).rank()


def sigma_hom_dimensions(K, G):
    """``(dim Hom_C(sigma K, G), dim Hom_K(sigma K, G))`` computed degree-wise."""
    S = K.sigma_truncate()
    basis, offs, _ = chain_maps_from_degreewise(S, G)
    dim_c = basis.cols
    return dim_c, dim_c - homotopy_image_from_degreewise(S, G, basis, offs)


# ------------------------------------------------------------ random complexes

def _random_twists(rng, positions, strands, max_mult, n):
    terms = {}
    for p in positions:
        tw = []
        for i in strands:
            tw += [p - i] * int(rng.integers(0, max_mult + 1))
        if tw:
            terms[p] = FreeModule(sorted(tw, reverse=True), n)
    return terms


def random_differential(rng, src, tgt, prev, field, min_degree=1, density=1.0):
    """Random ``g: src -> tgt`` with entries of degree >= ``min_degree`` and ``g o prev = 0``."""
    basis = [b for b in hom_space_basis(src, tgt, field)
             if next(iter(b.entries.values())).degree >= min_degree]
    if not basis:
        return ModMorphism.zero(src, tgt, field)
    if prev is not None and not prev.is_zero():
        idx, size = _hom_index(prev.source, tgt)
        cols = []
        for b in basis:
            v = [0] * size
            for i, x in morphism_coords(b.compose(prev), idx).items():
                v[i] = x
            cols.append(v)
        A = Mat.from_columns(field, cols, size) if size else Mat.zeros(field, 0, len(basis))
        Kb = A.kernel_basis()
        coeffs = [0] * len(basis)
        for t in range(Kb.cols):
            c = field.random_element(rng)
            for i in range(len(basis)):
                if Kb.a[i, t]:
                    coeffs[i] = field.norm(coeffs[i] + c * Kb.a[i, t])
    else:
        coeffs = [field.random_element(rng) if rng.random() < density else 0 for _ in basis]
    out = ModMorphism.zero(src, tgt, field)
    for c, b in zip(coeffs, basis):
        if c:
            out = out + b.scale(c)
    return out


def random_complex(rng, n, positions, strands, max_mult=2, field=QQ, minimal=True):
    """Random bounded complex with the given strand range.

    Differentials are built left to right, each a random solution of
    ``d^p o d^{p-1} = 0``; with ``minimal`` all entries have positive degree.
    """
    terms = _random_twists(rng, positions, strands, max_mult, n)
    if not terms:
        p0 = positions[0]
        terms = {p0: FreeModule([p0 - strands[0]], n)}
    diffs, prev = {}, None
    lo, hi = min(terms), max(terms)
    for p in range(lo, hi):
        src = terms.get(p, FreeModule((), n))
        tgt = terms.get(p + 1, FreeModule((), n))
        if not len(src) or not len(tgt):
            prev = None
            continue
        g = random_differential(rng, src, tgt, prev, field, 1 if minimal else 0)
        diffs[p] = g
        prev = g
    return FreeComplex(terms, diffs, n, field)


def random_ht_complex(rng, n, max_strands=3, max_mult=3, length=3, field=QQ):
    """Random HT-complex: strands in ``1..n-1``, at most ``max_strands`` of them."""
    if n < 2:
        raise ComplexError("HT-complexes need n >= 2")
    pool = list(range(1, n))
    k = int(rng.integers(1, min(max_strands, len(pool)) + 1))
    strands = sorted(rng.choice(pool, size=k, replace=False).tolist())
    start = int(rng.integers(-2, 1))
    positions = list(range(start, start + length))
    return random_complex(rng, n, positions, strands, max_mult, field, minimal=True)


def _random_element(rng, n, degree, field):
    coeffs = {}
    for S in basis_masks(n, degree):
        c = field.random_element(rng)
        if c:
            coeffs[S] = c
    return ExtElement("V", n, degree, coeffs, field)


def random_automorphism(rng, M, field=QQ):
    """Random automorphism ``phi = D + N`` of a free module and its inverse.

    ``D`` is block diagonal and invertible on equal twists, ``N`` has entries
    of positive degree, so ``phi^{-1} = (1 + D^{-1}N)^{-1} D^{-1}`` is a finite sum.
    """
    tw = M.twists
    ent = {}
    for t in set(tw):
        idx = [k for k, a in enumerate(tw) if a == t]
        while True:
            B = Mat.from_rows(field, [[field.random_element(rng) for _ in idx] for _ in idx])
            if B.rank() == len(idx):
                break
        for i, r in enumerate(idx):
            for j, c in enumerate(idx):
                if B.a[i, j]:
                    ent[(r, c)] = ExtElement.one("V", M.n, field).scale(B.a[i, j])
    D = ModMorphism(M, M, ent, field)
    Dinv_ent = {}
    for t in set(tw):
        idx = [k for k, a in enumerate(tw) if a == t]
        Bi = D.submatrix(idx, idx).constant_part().inverse()
        for i, r in enumerate(idx):
            for j, c in enumerate(idx):
                if Bi.a[i, j]:
                    Dinv_ent[(r, c)] = ExtElement.one("V", M.n, field).scale(Bi.a[i, j])
    Dinv = ModMorphism(M, M, Dinv_ent, field)
    nil = {}
    for r, a in enumerate(tw):
        for c, b in enumerate(tw):
            if 0 < a - b <= M.n + 1 and rng.random() < 0.7:
                nil[(r, c)] = _random_element(rng, M.n, a - b, field)
    N = ModMorphism(M, M, nil, field)
    phi = D + N
    X = Dinv.compose(N)
    one = ModMorphism.identity(M, field)
    inv, power = one, one
    for _ in range(M.n + 1):
        power = -(X.compose(power))
        if power.is_zero():
            break
        inv = inv + power
    return phi, inv.compose(Dinv)


def conjugate(G, rng, field=None):
    """Isomorphic copy ``d'_p = phi_{p+1} d_p phi_p^{-1}`` with random automorphisms; returns (G', phi)."""
    F = field or G.field
    phis, invs = {}, {}
    for p in G.positions():
        phis[p], invs[p] = random_automorphism(rng, G.term(p), F)
    diffs = {p: phis[p + 1].compose(f).compose(invs[p]) for p, f in G.diffs.items()}
    return FreeComplex(dict(G.terms), diffs, G.n, F), phis
