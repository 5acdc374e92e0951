"""Free resolutions over the exterior algebra, Tate windows and isomorphism search."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from math import comb

import numpy as np

from .bgg import (BGGError, L_of_complex, R_of_module, SModule, cohomology_table,
                  mono_basis, section_dim, var, _block_coo)
from .exactla import QQ, Mat
from .exterior import ExtElement, basis_index, basis_masks, contract_basis, mask_to_list
from .lamcomplex import ComplexError, FreeComplex, HomComplex
from .lammod import FreeModule, GradedLambdaModule, ModMorphism
from .minimize import complex_cohomology_dims, minimize_complex


class TateError(ValueError):
    pass


# ------------------------------------------------------------ free covers

def _coords(K, V):
    """Coordinates of the columns of ``V`` in the column basis ``K``."""
    x = K.solve(V)
    if x is None:
        raise TateError("vector outside the expected subspace")
    return x


def _independent_extension(span, cand, field):
    """Columns of ``cand`` extending the column space of ``span`` (leftmost choice)."""
    M = span.hstack(cand) if span.cols else cand
    if M.rows == 0:
        return []
    _, piv = M.rref()
    return [j - span.cols for j in piv if j >= span.cols]


def _hom_entry_from_generator(n, a, b, coeffs, field):
    """Entry ``w`` of ``Lambda^vee(a) -> Lambda^vee(b)`` sending ``X_all`` to ``sum coeffs[U] X_U``."""
    full = (1 << (n + 1)) - 1
    k = b - a
    sg = -1 if ((n + 1) * k) & 1 else 1
    out = {}
    for U, c in coeffs.items():
        T = full & ~U
        sgn, _ = contract_basis(full, T)
        out[T] = field.norm(sg * sgn * c)
    return ExtElement("V", n, k, out, field)


def cover_embedded(P, K, field=QQ):
    """Minimal free module mapping onto a submodule ``K`` of the free module ``P``.

    ``K[d]`` is a matrix whose columns span ``K_d`` inside ``P_d``.  Returns
    ``(F, phi)`` with ``phi: F -> P`` a morphism with image ``K``.
    """
    n = P.n
    A = GradedLambdaModule.from_free(P, field)
    gens = []  # (degree, vector in P_d)
    for d in sorted(K):
        Kd = K[d]
        if Kd.cols == 0:
            continue
        imgs = []
        if (d - 1) in K and K[d - 1].cols:
            for i in range(n + 1):
                imgs.append(A.act(i, d - 1) @ K[d - 1])
        span = imgs[0].hstack(*imgs[1:]) if imgs else Mat.zeros(field, Kd.rows, 0)
        for j in _independent_extension(span, Kd, field):
            gens.append((d, Kd[:, j:j + 1]))
    twists = [-d - n - 1 for d, _ in gens]
    F = FreeModule(twists, n)
    ent = {}
    for c, (d, g) in enumerate(gens):
        off, _ = P.offsets(d)
        for r, b in enumerate(P.twists):
            p = -d - b
            if p < 0 or p > n + 1:
                continue
            masks = basis_masks(n, p)
            coeffs = {U: g.a[off[r] + t, 0] for t, U in enumerate(masks) if g.a[off[r] + t, 0]}
            if coeffs:
                ent[(r, c)] = _hom_entry_from_generator(n, twists[c], b, coeffs, field)
    return F, ModMorphism(F, P, ent, field)


def kernel_pieces(f):
    """Degree-wise kernel of a morphism of free modules."""
    out = {}
    for d in f.source.support():
        M = f.evaluate_degree(d)
        out[d] = M.kernel_basis() if M.rows else Mat.identity(f.field, M.cols)
    return out


def _image_pieces(f):
    out = {}
    for d in f.source.support():
        M = f.evaluate_degree(d)
        if M.rows:
            out[d] = M
    return out


def _cover_abstract(M):
    """Free cover of an abstract module: generators map via products of actions."""
    n, field = M.n, M.field
    gens = []
    for d in M.degrees():
        dim = M.dim(d)
        imgs = [M.act(i, d - 1) for i in range(n + 1)] if M.dim(d - 1) else []
        span = imgs[0].hstack(*imgs[1:]) if imgs else Mat.zeros(field, dim, 0)
        for j in _independent_extension(span, Mat.identity(field, dim), field):
            gens.append((d, j))
    F = FreeModule([-d - n - 1 for d, _ in gens], n)
    full = (1 << (n + 1)) - 1
    maps = {}
    for e in F.support():
        off, tot = F.offsets(e)
        Me = Mat.zeros(field, M.dim(e), tot)
        for c, (d, j) in enumerate(gens):
            p = -e - F.twists[c]
            for t, U in enumerate(basis_masks(n, p)):
                T = full & ~U
                sgn, _ = contract_basis(full, T)
                v = Mat.zeros(field, M.dim(d), 1)
                v.a[j, 0] = 1
                deg = d
                for i in mask_to_list(T):
                    v = M.act(i, deg) @ v
                    deg += 1
                if M.dim(e):
                    Me.a[:, off[c] + t] = (v.scale(sgn)).a[:, 0]
        maps[e] = Me
    return F, maps


def minimal_free_resolution(M, steps):
    """Leftward minimal free resolution ``F_steps -> ... -> F_0 -> M``.

    ``M`` is a free module or a :class:`GradedLambdaModule`.  The result is a
    complex with ``F_k`` at position ``-k`` and the augmentation matrices
    ``F_0 -> M`` per degree.
    """
    if steps < 0:
        raise TateError("steps must be nonnegative")
    if isinstance(M, FreeModule):
        return FreeComplex({0: M}, {}, M.n), None
    n, field = M.n, M.field
    F0, aug = _cover_abstract(M)
    terms, diffs = {0: F0}, {}
    K = {}
    for d in F0.support():
        A = aug.get(d)
        K[d] = A.kernel_basis() if A is not None and A.rows else Mat.identity(field, F0.dim(d))
    cur = F0
    for k in range(1, steps + 1):
        if all(m.cols == 0 for m in K.values()):
            break
        F, phi = cover_embedded(cur, K, field)
        if not len(F):
            break
        terms[-k] = F
        diffs[-k] = phi
        K = kernel_pieces(phi)
        cur = F
    return FreeComplex(terms, diffs, n, field), aug


# ------------------------------------------------------------------ Tate window

def _section_shift(twists, d, i, nv):
    """Index map ``Gamma(O(m)(d)) -> Gamma(O(m)(d+1))`` for multiplication by ``x_i``."""
    rows, cols, off_s, off_t = [], [], 0, 0
    for m in twists:
        src = mono_basis(nv, m + d)
        tgt = mono_basis(nv, m + d + 1)
        if len(src):
            pos = np.searchsorted(tgt, src + var(i))
            rows.append(pos + off_t)
            cols.append(np.arange(len(src)) + off_s)
        off_s += len(src)
        off_t += len(tgt)
    if rows:
        return np.concatenate(rows), np.concatenate(cols), off_t, off_s
    return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), off_t, off_s


def sections_module(C, lo, hi):
    """``SModule`` of ``H^0(E(d))`` for ``lo <= d <= hi`` where ``E = Z^0`` of ``C``."""
    nv, F = C.nv, C.field
    kers, pivrows = {}, {}
    for d in range(lo, hi + 1):
        dim = sum(section_dim(nv, m + d) for m in C.term(0))
        if 0 in C.diffs:
            K = _block_coo(C.diffs[0], C.term(0), C.term(1), d, nv, F).kernel_basis()
        else:
            K = Mat.identity(F, dim)
        kers[d] = K
        _, piv = K.T.rref() if K.cols else (None, [])
        pivrows[d] = list(piv)
    dims = {d: kers[d].cols for d in kers}
    mult = {}
    for d in range(lo, hi):
        if not dims[d] or not dims[d + 1]:
            continue
        K1 = kers[d + 1]
        sub_inv = Mat(F, K1.a[pivrows[d + 1]].copy()).inverse()
        for i in range(nv):
            r, c, nt, ns = _section_shift(C.term(0), d, i, nv)
            shifted = Mat.zeros(F, nt, dims[d])
            shifted.a[r, :] = kers[d].a[c, :]
            x = sub_inv @ Mat(F, shifted.a[pivrows[d + 1]].copy())
            mult[(i, d)] = x
    return SModule(C.n, dims, mult, F)


def regularity(G, minimal):
    """Castelnuovo-Mumford regularity of the bundle ``Z^0`` of ``minimal``."""
    from .bgg import h0_kernel_dim

    n = G.n
    reg = None
    for (i, d) in G.strand_table():
        reg = d + i + 1 if reg is None else max(reg, d + i + 1)
    tw = minimal.term(-1)
    if tw:
        dual = minimal.dual()
        d = -n - 1 - min(tw)
        for _ in range(4 * n + 8):
            if h0_kernel_dim(dual, 1, -d - n - 1):
                reg = d + n + 1 if reg is None else max(reg, d + n + 1)
                break
            d -= 1
    return 0 if reg is None else reg


@dataclass
class TateWindow:
    complex: FreeComplex
    lo: int
    hi: int
    r: int
    table: object
    exact_ok: bool
    failures: list = dc_field(default_factory=list)

    def strand_table(self):
        return self.complex.strand_table()

    def middle_positions(self):
        return sorted({i + d for (i, d), v in self.table.values.items()
                       if 0 < i < self.table.n and v})


def _interior_exactness(C, lo, hi):
    bad = []
    for p in range(lo + 1, hi):
        degs = set(C.term(p).support())
        for d in sorted(degs):
            dim = C.term(p).dim(d)
            r_out = C.evaluate(p, d).rank() if p in C.diffs else 0
            r_in = C.evaluate(p - 1, d).rank() if (p - 1) in C.diffs else 0
            if dim - r_out - r_in:
                bad.append({"position": p, "degree": d, "homology": dim - r_out - r_in})
    return bad


def tate_window(G, lo=None, hi=None, margin=1, minimal=None):
    """Window ``[lo, hi]`` of the Tate resolution of the bundle of an HT-complex.

    The sections module of the bundle is truncated at ``r`` (regularity plus
    ``margin``), turned into a linear complex by ``R`` and resolved to the left.
    """
    if not G.is_ht():
        raise TateError("tate_window needs an HT-complex")
    n, F = G.n, G.field
    if minimal is None:
        minimal = minimize_complex(L_of_complex(G))
    st = G.strand_table()
    mids = [i + d for (i, d) in st]
    lo = (min(mids) - 1 if mids else -1) if lo is None else lo
    hi = (max(mids) + 1 if mids else 1) if hi is None else hi
    if lo > hi:
        raise TateError("empty window")
    table = cohomology_table(G, range(lo - n, hi + 1), minimal=minimal)
    r = max(regularity(G, minimal) + margin - 1, lo + 1)
    top = max(hi, r) + 1
    M = sections_module(minimal, r, top)
    right = R_of_module(M)
    terms = {p: right.term(p) for p in range(r, top + 1) if len(right.term(p))}
    diffs = {p: right.diffs[p] for p in right.diffs if p + 1 <= top}
    if r not in terms:
        raise TateError("sections module vanishes at the truncation degree")
    cur_p, cur = r, terms[r]
    K = kernel_pieces(diffs[r]) if r in diffs else {d: Mat.identity(F, cur.dim(d)) for d in cur.support()}
    while cur_p > lo:
        Fm, phi = cover_embedded(cur, K, F)
        cur_p -= 1
        if not len(Fm):
            break
        terms[cur_p] = Fm
        diffs[cur_p] = phi
        K = kernel_pieces(phi)
        cur = Fm
    full = FreeComplex(terms, diffs, n, F)
    if not full.is_minimal():
        raise TateError("constructed window is not minimal")
    window = full.restrict(lambda p, i: lo <= p <= hi)
    bad = _interior_exactness(full, lo, min(hi, top))
    return TateWindow(window, lo, hi, r, table, not bad, bad)


def extract_ht(W):
    """``F_{n-1} / F_0`` of a Tate window; all middle strands must fit inside."""
    outside = [p for p in W.middle_positions() if not (W.lo <= p <= W.hi)]
    if outside:
        raise TateError(f"window [{W.lo}, {W.hi}] misses middle strands at positions {outside}")
    return W.complex.quotient_F()


# ------------------------------------------------------------ isomorphism search

@dataclass
class IsoResult:
    status: str  # "isomorphic", "not_isomorphic" or "undetermined"
    maps: dict = None
    reason: str = ""

    def __bool__(self):
        return self.status == "isomorphic"


def _chain_map_from_vector(H, vec):
    maps = {}
    blocks, _ = H.basis(0)
    for p, (off, idx, size) in blocks.items():
        ent = {}
        N, L = H.K.term(p), H.G.term(p)
        for (r, c, T), k in idx.items():
            x = vec[off + k]
            if x:
                deg = L.twists[r] - N.twists[c]
                e = ExtElement("V", H.n, deg, {T: x}, H.field)
                ent[(r, c)] = ent[(r, c)] + e if (r, c) in ent else e
        maps[p] = ModMorphism(N, L, ent, H.field)
    return maps


def is_chain_map(f, G, G2):
    for p in set(G.positions()) | set(G2.positions()):
        lhs_src = f.get(p)
        nxt = f.get(p + 1)
        a = G2.diff(p).compose(lhs_src) if lhs_src is not None else None
        b = nxt.compose(G.diff(p)) if nxt is not None else None
        if a is None and b is None:
            continue
        if a is None:
            if not b.is_zero():
                return False
        elif b is None:
            if not a.is_zero():
                return False
        elif a != b:
            return False
    return True


def _diagonal_invertible(f):
    for p, m in f.items():
        const = m.constant_part()
        for t in set(m.source.twists):
            ci = [c for c, a in enumerate(m.source.twists) if a == t]
            ri = [r for r, a in enumerate(m.target.twists) if a == t]
            if len(ci) != len(ri):
                return False
            blk = Mat(m.field, const.a[ri][:, ci].copy())
            if blk.rank() != len(ci):
                return False
    return True


def is_isomorphic_minimal(G, G2, tries=32, seed=0):
    """Search for a chain isomorphism between two minimal bounded complexes."""
    if not (G.is_minimal() and G2.is_minimal()):
        raise ComplexError("is_isomorphic_minimal needs minimal complexes")
    if G.strand_table() != G2.strand_table():
        return IsoResult("not_isomorphic", None, "strand tables differ")
    if G.is_zero():
        return IsoResult("isomorphic", {}, "zero complexes")
    F = G.field
    H = HomComplex(G, G2)
    Z = H.differential(0).kernel_basis()
    if Z.cols == 0:
        return IsoResult("not_isomorphic", None, "no nonzero chain maps")
    rng = np.random.default_rng(seed)
    for _ in range(tries):
        c = [F.random_element(rng, 50) if F.char == 0 else F.random_element(rng) for _ in range(Z.cols)]
        vec = [0] * Z.rows
        for t, ct in enumerate(c):
            if ct:
                col = Z.a[:, t]
                for i in np.flatnonzero(col):
                    vec[i] = F.norm(vec[i] + ct * col[i])
        f = _chain_map_from_vector(H, vec)
        for p in G.positions():
            f.setdefault(p, ModMorphism.zero(G.term(p), G2.term(p), F))
        if _diagonal_invertible(f) and is_chain_map(f, G, G2):
            return IsoResult("isomorphic", f, "diagonal blocks invertible")
    return IsoResult("undetermined", None, f"no invertible member in {tries} samples")


# ------------------------------------------------------------------ Beilinson

def omega_name(k, n):
    if k == 0:
        return "O"
    if k == n:
        return "O(-1)"
    return f"Omega^{k}({k})"


def beilinson_terms(G):
    """Terms ``C^p = sum_i H^i_{p-i} (x) Omega^{i-p}(i-p)`` of the Beilinson monad."""
    if not G.is_ht():
        raise TateError("beilinson_terms needs an HT-complex")
    n = G.n
    coh = complex_cohomology_dims(G)
    for (p, q), h in sorted(coh.items()):
        if (p < 0 and q == -1 - p) or (p > 0 and q == -p):
            raise TateError(f"hypothesis fails: H^{p}(G)_{q} has dimension {h}")
    terms = {}
    for (i, d), mult in sorted(G.strand_table().items()):
        p = i + d
        k = i - p
        if not 0 <= k <= n:
            raise TateError(f"strand {i} at position {p} gives no Omega term")
        terms.setdefault(p, []).append((i, mult))
    rank = sum((-1) ** (p & 1) * mult * comb(n, i - p) for p, lst in terms.items() for i, mult in lst)
    names = {p: [(omega_name(i - p, n), mult) for i, mult in lst] for p, lst in terms.items()}
    return {"terms": terms, "names": names, "rank": rank, "maps": dict(G.diffs)}
