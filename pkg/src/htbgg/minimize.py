"""Cancellation of constant blocks in complexes of line-bundle sums."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field as dc_field

from .bgg import BGGError, L_of_complex, PolyMatrix, SComplex, poly_add, poly_mul, z0_rank
from .exactla import Mat


def constant_part(C, s):
    return C.constant_part(s)


def _const_poly(M, field):
    return PolyMatrix(M.rows, M.cols, {(i, j): {0: M.a[i, j]} for i in range(M.rows)
                                       for j in range(M.cols) if M.a[i, j]})


def _sub(D, rows, cols):
    rpos = {r: i for i, r in enumerate(rows)}
    cpos = {c: j for j, c in enumerate(cols)}
    return PolyMatrix(len(rows), len(cols),
                      {(rpos[r], cpos[c]): f for (r, c), f in D.entries.items() if r in rpos and c in cpos})


def _identity(k):
    return PolyMatrix(k, k, {(i, i): {0: 1} for i in range(k)})


def _embed(D, rows, cols, nrows, ncols):
    """Place ``D`` at rows/cols of a bigger zero matrix."""
    return PolyMatrix(nrows, ncols, {(rows[i], cols[j]): f for (i, j), f in D.entries.items()})


def _minus(A, B, field):
    out = dict(A.entries)
    for k, f in B.entries.items():
        out[k] = poly_add(out.get(k, {}), {m: field.norm(-c) for m, c in f.items()}, field)
    return PolyMatrix(A.rows, A.cols, out)


def _pick_pivots(A):
    """Rows and columns of ``A`` carrying an invertible square block."""
    _, cols = A.rref()
    _, rows = A[:, cols].T.rref() if cols else (None, [])
    return list(rows), list(cols)


@dataclass
class Tracking:
    """Chain maps between the original complex and the current one.

    ``incl[s]`` maps current term ``s`` into original term ``s``; ``proj[s]``
    goes the other way.  Both are homotopy equivalences.
    """

    incl: dict
    proj: dict

    @classmethod
    def identity(cls, C):
        return cls({s: _identity(len(t)) for s, t in C.terms.items()},
                   {s: _identity(len(t)) for s, t in C.terms.items()})


def cancel_step(C, s, twist=None, tracking=None, cancelled=None):
    """Cancel the constant block of ``d^s`` between summands of one twist.

    Returns the reduced complex; ``tracking`` and ``cancelled`` (a Counter of
    ``(s, twist) -> rank``) are updated in place when given.
    """
    F = C.field
    D = C.diff(s)
    src, tgt = C.term(s), C.term(s + 1)
    const = D.constant_block(F)
    if const.is_zero():
        return C
    if twist is None:
        nz = [(r, c) for r in range(const.rows) for c in range(const.cols) if const.a[r, c]]
        twist = src[nz[0][1]]
    ci = [c for c, m in enumerate(src) if m == twist]
    ri = [r for r, m in enumerate(tgt) if m == twist]
    A = Mat(F, const.a[ri][:, ci].copy()) if ri and ci else Mat.zeros(F, len(ri), len(ci))
    prow, pcol = _pick_pivots(A)
    if not pcol:
        return C
    Yi = [ci[j] for j in pcol]
    Bi = [ri[i] for i in prow]
    Zi = [c for c in range(len(src)) if c not in set(Yi)]
    Ci = [r for r in range(len(tgt)) if r not in set(Bi)]
    alpha = Mat(F, const.a[Bi][:, Yi].copy())
    ainv = _const_poly(alpha.inverse(), F)
    beta = _sub(D, Bi, Zi)
    gamma = _sub(D, Ci, Yi)
    delta = _sub(D, Ci, Zi)
    g_ainv = gamma.matmul(ainv, F)
    new_d = _minus(delta, g_ainv.matmul(beta, F), F)

    terms = dict(C.terms)
    labels = dict(C.labels)
    terms[s] = [src[c] for c in Zi]
    terms[s + 1] = [tgt[r] for r in Ci]
    labels[s] = [C.labels[s][c] for c in Zi]
    labels[s + 1] = [C.labels[s + 1][r] for r in Ci]
    diffs = dict(C.diffs)
    diffs[s] = new_d
    if (s - 1) in C.diffs:
        diffs[s - 1] = _sub(C.diffs[s - 1], Zi, range(len(C.term(s - 1))))
    if (s + 1) in C.diffs:
        diffs[s + 1] = _sub(C.diffs[s + 1], range(len(C.term(s + 2))), Ci)
    out = SComplex(C.n, terms, diffs, labels, F)

    if cancelled is not None:
        cancelled[(s, twist)] += len(Yi)
    if tracking is not None:
        # incl_s(z) = (-a^-1 b z, z); incl_{s+1}(c) = (0, c)
        ainv_beta = ainv.matmul(beta, F)
        inc_s = _embed(_identity(len(Zi)), Zi, list(range(len(Zi))), len(src), len(Zi))
        neg = PolyMatrix(ainv_beta.rows, ainv_beta.cols,
                         {k: {m: F.norm(-c) for m, c in f.items()} for k, f in ainv_beta.entries.items()})
        inc_s = PolyMatrix(len(src), len(Zi), {**inc_s.entries,
                                               **_embed(neg, Yi, list(range(len(Zi))), len(src), len(Zi)).entries})
        inc_s1 = _embed(_identity(len(Ci)), Ci, list(range(len(Ci))), len(tgt), len(Ci))
        # proj_s(y, z) = z; proj_{s+1}(b, c) = c - g a^-1 b
        pr_s = _embed(_identity(len(Zi)), list(range(len(Zi))), Zi, len(Zi), len(src))
        pr_s1 = PolyMatrix(len(Ci), len(tgt), {
            **_embed(_identity(len(Ci)), list(range(len(Ci))), Ci, len(Ci), len(tgt)).entries,
            **_embed(PolyMatrix(g_ainv.rows, g_ainv.cols,
                                {k: {m: F.norm(-c) for m, c in f.items()} for k, f in g_ainv.entries.items()}),
                     list(range(len(Ci))), Bi, len(Ci), len(tgt)).entries})
        for pos, inc, pr in ((s, inc_s, pr_s), (s + 1, inc_s1, pr_s1)):
            tracking.incl[pos] = tracking.incl[pos].matmul(inc, F)
            tracking.proj[pos] = pr.matmul(tracking.proj[pos], F)
    return out


def minimize_complex(C, track=False, order="left"):
    """Cancel constants until none remain.

    With ``track`` returns ``(minimal, tracking, cancelled)``; otherwise just
    the minimal complex.  ``order`` (``"left"`` or ``"right"``) only changes
    the sweep direction.
    """
    tracking = Tracking.identity(C) if track else None
    cancelled = Counter()
    cur = C
    while True:
        pos = sorted(cur.diffs, reverse=(order == "right"))
        hit = next((s for s in pos if not cur.constant_part(s).is_zero()), None)
        if hit is None:
            break
        cur = cancel_step(cur, hit, tracking=tracking, cancelled=cancelled)
    if track:
        return cur, tracking, cancelled
    return cur


def complex_cohomology_dims(G):
    """``{(p, q): dim H^p(G)_q}`` for nonzero values."""
    out = {}
    degs = set()
    for M in G.terms.values():
        degs.update(M.support())
    for q in sorted(degs):
        for p in G.positions():
            dim = G.term(p).dim(q)
            if not dim:
                continue
            r_out = G.evaluate(p, q).rank() if p in G.diffs else 0
            r_in = G.evaluate(p - 1, q).rank() if (p - 1) in G.diffs else 0
            h = dim - r_out - r_in
            if h:
                out[(p, q)] = h
    return out


def predicted_minimal_terms(G):
    """Twist multisets ``L^m = sum_p H^p(G)_{m-p} (x) O(m-p)``."""
    out = {}
    for (p, q), h in complex_cohomology_dims(G).items():
        out.setdefault(p + q, Counter())[q] += h
    return out


@dataclass
class DecompositionReport:
    r: dict
    minimal_complex: SComplex
    bundle_rank: int
    z0_rank: int
    euler_rank: int
    bundle_twist_profile: dict
    cancelled: dict = dc_field(default_factory=dict)

    def to_json(self):
        return {
            "r": {str(p): k for p, k in sorted(self.r.items())},
            "z0_rank": self.z0_rank,
            "bundle_rank": self.bundle_rank,
            "euler_rank": self.euler_rank,
            "minimal_complex": {str(s): t for s, t in self.minimal_complex.describe().items()},
            "bundle_twist_profile": {str(s): {str(m): k for m, k in sorted(c.items())}
                                     for s, c in sorted(self.bundle_twist_profile.items())},
        }


def decompose_bundle(G, minimal=None):
    """Split ``Z^0 L(G)`` into ``E`` plus trivial line-bundle summands."""
    if not G.is_ht():
        raise BGGError("decompose_bundle needs an HT-complex")
    r = {}
    for p in G.positions() + [max(G.positions()) + 1] if G.terms else []:
        if (p - 1) in G.diffs:
            k = G.evaluate(p - 1, -p).rank()
            if k:
                r[p] = k
    total = z0_rank(G)
    if minimal is None:
        minimal = minimize_complex(L_of_complex(G))
    euler = sum((-1) ** ((s + 1) & 1) * len(t) for s, t in minimal.terms.items() if s <= -1)
    return DecompositionReport(r, minimal, total - sum(r.values()), total, euler,
                               minimal.twist_multisets())
