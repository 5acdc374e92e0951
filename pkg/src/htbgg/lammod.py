"""Graded right modules over the exterior algebra.

A free module is a list of twists ``a_1..a_m`` standing for the sum of
``Lambda^vee(a_j)``; its degree ``d`` piece in summand ``a`` is
``Lambda^{-d-a} V*`` with the monomial basis ordered by bitmask.

A morphism ``Lambda^vee(a) -> Lambda^vee(b)`` is an element ``w`` of
``Lambda^{b-a} V``; it acts on ``x`` of exterior degree ``p`` by
``x -> (-1)^{p deg w} x . w``.  With this sign the action is right linear and
composition of matrices is computed entrywise by ``(g f)[r, c] = sum g[r, k] ^ f[k, c]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from math import comb

from .exactla import QQ, Mat
from .exterior import (ExtElement, basis_index, basis_masks, contract_basis,
                       popcount, wedge)


class ModuleError(ValueError):
    pass


@dataclass(frozen=True)
class FreeModule:
    twists: tuple
    n: int

    def __init__(self, twists, n):
        object.__setattr__(self, "twists", tuple(int(a) for a in twists))
        object.__setattr__(self, "n", int(n))

    def __len__(self):
        return len(self.twists)

    def rank(self):
        return len(self.twists)

    def piece_degree(self, j, d):
        """Exterior degree of summand ``j`` in internal degree ``d``."""
        return -d - self.twists[j]

    def summand_dim(self, j, d):
        p = -d - self.twists[j]
        return comb(self.n + 1, p) if 0 <= p <= self.n + 1 else 0

    def dim(self, d):
        return sum(self.summand_dim(j, d) for j in range(len(self.twists)))

    def offsets(self, d):
        out, acc = [], 0
        for j in range(len(self.twists)):
            out.append(acc)
            acc += self.summand_dim(j, d)
        return out, acc

    def support(self):
        """Internal degrees with a nonzero piece."""
        if not self.twists:
            return range(0)
        return range(-max(self.twists) - self.n - 1, -min(self.twists) + 1)

    def __add__(self, other):
        if self.n != other.n:
            raise ModuleError("ambient dimension mismatch")
        return FreeModule(self.twists + other.twists, self.n)


def graded_dimension(M, d):
    return M.dim(d)


class ModMorphism:
    """Degree-zero morphism of free modules given by a matrix of exterior elements."""

    __slots__ = ("source", "target", "entries", "field", "_cache")

    def __init__(self, source, target, entries=None, field=QQ):
        if source.n != target.n:
            raise ModuleError("ambient dimension mismatch")
        self.source, self.target, self.field = source, target, field
        clean = {}
        for (r, c), w in (entries or {}).items():
            if not (0 <= r < len(target) and 0 <= c < len(source)):
                raise ModuleError(f"entry ({r},{c}) out of range")
            if w.variance != "V" or w.n != source.n:
                raise ModuleError(f"entry ({r},{c}) must lie in Lambda V with n={source.n}")
            if w.field != field:
                raise ModuleError("entry field mismatch")
            if not w:
                continue
            k = target.twists[r] - source.twists[c]
            if w.degree != k:
                raise ModuleError(
                    f"entry ({r},{c}) has degree {w.degree}, twist gap is {k}")
            clean[(r, c)] = w
        self.entries = clean
        self._cache = {}

    @property
    def n(self):
        return self.source.n

    @classmethod
    def zero(cls, source, target, field=QQ):
        return cls(source, target, {}, field)

    @classmethod
    def identity(cls, M, field=QQ):
        return cls(M, M, {(j, j): ExtElement.one("V", M.n, field) for j in range(len(M))}, field)

    def entry(self, r, c):
        w = self.entries.get((r, c))
        if w is None:
            k = self.target.twists[r] - self.source.twists[c]
            return ExtElement.zero("V", self.n, max(k, 0), self.field)
        return w

    def is_zero(self):
        return not self.entries

    def __eq__(self, other):
        if not isinstance(other, ModMorphism):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and self.entries == other.entries)

    def __add__(self, other):
        self._same_shape(other)
        out = dict(self.entries)
        for key, w in other.entries.items():
            out[key] = out[key] + w if key in out else w
        return ModMorphism(self.source, self.target, out, self.field)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return ModMorphism(self.source, self.target,
                           {k: w.scale(c) for k, w in self.entries.items()}, self.field)

    def _same_shape(self, other):
        if self.source != other.source or self.target != other.target:
            raise ModuleError("morphisms have different source/target")

    def compose(self, first):
        """``self o first``."""
        if first.target != self.source:
            raise ModuleError("morphisms are not composable")
        by_row = {}
        for (k, c), w in first.entries.items():
            by_row.setdefault(k, []).append((c, w))
        out = {}
        for (r, k), g in self.entries.items():
            for c, f in by_row.get(k, ()):
                prod = wedge(g, f)
                if prod:
                    out[(r, c)] = out[(r, c)] + prod if (r, c) in out else prod
        return ModMorphism(first.source, self.target, out, self.field)

    __matmul__ = compose

    def evaluate_degree(self, d):
        """Matrix of the k-linear map ``source_d -> target_d`` in monomial bases."""
        got = self._cache.get(d)
        if got is not None:
            return got
        F, n = self.field, self.n
        src_off, src_dim = self.source.offsets(d)
        tgt_off, tgt_dim = self.target.offsets(d)
        M = Mat.zeros(F, tgt_dim, src_dim)
        a = M.a
        for (r, c), w in self.entries.items():
            p = -d - self.source.twists[c]
            if p < 0 or p > n + 1 or p - w.degree < 0:
                continue
            src = basis_masks(n, p)
            tidx = basis_index(n, p - w.degree)
            sgn0 = -1 if (p * w.degree) & 1 else 1
            r0, c0 = tgt_off[r], src_off[c]
            for j, S in enumerate(src):
                for T, coef in w.coeffs.items():
                    got_c = contract_basis(S, T)
                    if got_c is None:
                        continue
                    sgn, U = got_c
                    i = r0 + tidx[U]
                    a[i, c0 + j] = F.norm(a[i, c0 + j] + sgn0 * sgn * coef)
        self._cache[d] = M
        return M

    def constant_part(self):
        """Scalars on entries between equal twists, as a matrix over the summands."""
        M = Mat.zeros(self.field, len(self.target), len(self.source))
        for (r, c), w in self.entries.items():
            if w.degree == 0:
                M.a[r, c] = w.coeffs.get(0, 0)
        return M

    def submatrix(self, rows, cols):
        rows, cols = list(rows), list(cols)
        rpos = {r: i for i, r in enumerate(rows)}
        cpos = {c: j for j, c in enumerate(cols)}
        src = FreeModule([self.source.twists[c] for c in cols], self.n)
        tgt = FreeModule([self.target.twists[r] for r in rows], self.n)
        out = {(rpos[r], cpos[c]): w for (r, c), w in self.entries.items()
               if r in rpos and c in cpos}
        return ModMorphism(src, tgt, out, self.field)

    def __repr__(self):
        return (f"ModMorphism({list(self.source.twists)} -> {list(self.target.twists)}, "
                f"{len(self.entries)} nonzero entries)")


def hom_space_basis(N, L, field=QQ):
    """Basis of degree-0 morphisms ``N -> L``: one basis monomial in one entry."""
    out = []
    for c, a in enumerate(N.twists):
        for r, b in enumerate(L.twists):
            k = b - a
            for T in basis_masks(N.n, k):
                w = ExtElement("V", N.n, k, {T: 1}, field)
                out.append(ModMorphism(N, L, {(r, c): w}, field))
    return out


def hom_dimension(N, L):
    return sum(comb(N.n + 1, b - a) for a in N.twists for b in L.twists
               if 0 <= b - a <= N.n + 1)


def _sign_dual(k):
    return -1 if (k * (k - 1) // 2) & 1 else 1


def dualize(obj):
    """Dual of a free module or of a morphism (reverses arrows)."""
    if isinstance(obj, FreeModule):
        return FreeModule([-a - obj.n - 1 for a in obj.twists], obj.n)
    if isinstance(obj, ModMorphism):
        src, tgt = dualize(obj.target), dualize(obj.source)
        out = {(c, r): w.scale(_sign_dual(w.degree)) for (r, c), w in obj.entries.items()}
        return ModMorphism(src, tgt, out, obj.field)
    raise TypeError(f"cannot dualize {type(obj).__name__}")


# --------------------------------------------------------------- general modules

@dataclass
class GradedLambdaModule:
    """Finite-dimensional graded right module given degree-wise.

    ``dims[d]`` is ``dim N_d``; ``action[(i, d)]`` is the matrix of
    right multiplication by ``e_i`` from ``N_d`` to ``N_{d+1}``.
    Missing actions are zero.
    """

    n: int
    dims: dict
    action: dict = dc_field(default_factory=dict)
    field: object = QQ

    def dim(self, d):
        return self.dims.get(d, 0)

    def degrees(self):
        return sorted(d for d, k in self.dims.items() if k)

    def act(self, i, d):
        m = self.action.get((i, d))
        if m is None:
            return Mat.zeros(self.field, self.dim(d + 1), self.dim(d))
        return m

    def total_dim(self):
        return sum(self.dims.values())

    @classmethod
    def from_free(cls, M, field=QQ):
        """Free module as a degree-wise module, acting by contraction."""
        dims = {d: M.dim(d) for d in M.support()}
        action = {}
        for i in range(M.n + 1):
            e = ExtElement("V", M.n, 1, {1 << i: 1}, field)
            for d in M.support():
                action[(i, d)] = _contract_all(M, e, d, field)
        return cls(M.n, dims, action, field)

    @classmethod
    def trivial(cls, n, degree=0, field=QQ):
        return cls(n, {degree: 1}, {}, field)


def _contract_all(M, e, d, field):
    """Plain right action ``x -> x . e`` on ``M_d -> M_{d+1}`` (no hom sign)."""
    n = M.n
    src_off, src_dim = M.offsets(d)
    tgt_off, tgt_dim = M.offsets(d + 1)
    out = Mat.zeros(field, tgt_dim, src_dim)
    (T, c), = e.coeffs.items()
    for j in range(len(M)):
        p = -d - M.twists[j]
        if p < 1 or p > n + 1:
            continue
        tidx = basis_index(n, p - 1)
        for k, S in enumerate(basis_masks(n, p)):
            got = contract_basis(S, T)
            if got is not None:
                sgn, U = got
                out.a[tgt_off[j] + tidx[U], src_off[j] + k] = field.norm(sgn * c)
    return out


def check_module_axioms(N):
    """Check ``rho_v^2 = 0`` and anticommutativity on basis vectors."""
    failures = []
    n = N.n
    for d in N.degrees():
        for v in range(n + 1):
            for w in range(v, n + 1):
                a = N.act(w, d + 1) @ N.act(v, d)
                if v == w:
                    if not a.is_zero():
                        failures.append({"v": v, "w": w, "d": d, "relation": "square"})
                else:
                    b = N.act(v, d + 1) @ N.act(w, d)
                    if not (a + b).is_zero():
                        failures.append({"v": v, "w": w, "d": d, "relation": "anticommute"})
    return {"ok": not failures, "failures": failures}


def brute_force_hom_dimension(N, L, field=QQ):
    """Dimension of degree-0 linear maps ``N -> L`` commuting with every ``rho_v``.

    Solves the linear system degree by degree; used as an independent oracle.
    """
    A = GradedLambdaModule.from_free(N, field)
    B = GradedLambdaModule.from_free(L, field)
    degs = sorted(set(A.degrees()) & set(B.degrees()) | set(A.degrees()))
    degs = [d for d in degs if A.dim(d) and B.dim(d)]
    offs, total = {}, 0
    for d in degs:
        offs[d] = total
        total += A.dim(d) * B.dim(d)
    if total == 0:
        return 0
    rows = []
    n = N.n
    for d in A.degrees():
        for v in range(n + 1):
            # rho^B_v f_d - f_{d+1} rho^A_v = 0 as a map A_d -> B_{d+1}
            ra, rb = A.act(v, d), B.act(v, d)
            a_d, a_d1 = A.dim(d), A.dim(d + 1)
            b_d, b_d1 = B.dim(d), B.dim(d + 1)
            if a_d == 0 or b_d1 == 0:
                continue
            for i in range(b_d1):
                for j in range(a_d):
                    row = [0] * total
                    if d in offs:
                        for k in range(b_d):
                            if rb.a[i, k]:
                                row[offs[d] + k * a_d + j] += rb.a[i, k]
                    if (d + 1) in offs:
                        for k in range(a_d1):
                            if ra.a[k, j]:
                                row[offs[d + 1] + i * a_d1 + k] -= ra.a[k, j]
                    if any(row):
                        rows.append(row)
    if not rows:
        return total
    return total - Mat.from_rows(field, rows, total).rank()
