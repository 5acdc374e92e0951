"""Named HT-complexes and checks for monads built from two-term complexes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

import numpy as np

from .bgg import L_of_complex, PolyMatrix, R_of_module, SComplex, SModule, fiber_matrix
from .exactla import QQ, Mat
from .exterior import (ExtElement, Sl2Triple, basis_index, contract, contraction_matrix,
                       divided_power, dual_iso, pairing, symplectic_pair, wedge)
from .lamcomplex import FreeComplex
from .lammod import FreeModule, GradedLambdaModule, ModMorphism
from .minimize import decompose_bundle, minimize_complex


class GalleryError(ValueError):
    pass


@dataclass
class MonadSpec:
    """Monad data on a two-term HT-complex ``G^{-1} -> G^0``.

    ``H``: columns in ``G^0_{-1}`` lifting a subspace of ``H^0(G)_{-1}``.
    ``K``: rows, a quotient map on ``G^0_0`` vanishing on boundaries.
    ``Q``: rows, functionals on ``G^{-1}_1`` (restricted to cycles).
    """

    G: FreeComplex
    H: Mat = None
    K: Mat = None
    Q: Mat = None

    @property
    def field(self):
        return self.G.field

    @property
    def n(self):
        return self.G.n

    def __post_init__(self):
        F, G = self.G.field, self.G
        if set(G.positions()) - {-1, 0}:
            raise GalleryError("monad construction needs terms only at positions -1 and 0")
        d0 = G.evaluate(-1, 0)
        if d0.cols and d0.rank() != d0.cols:
            raise GalleryError("d^{-1} in degree 0 must be injective")
        if self.H is None:
            self.H = Mat.zeros(F, G.term(0).dim(-1), 0)
        if self.K is None:
            self.K = Mat.zeros(F, 0, G.term(0).dim(0))
        if self.Q is None:
            self.Q = Mat.zeros(F, 0, G.term(-1).dim(1))


@dataclass
class Example:
    name: str
    G: FreeComplex
    spec: MonadSpec = None
    payload: dict = dc_field(default_factory=dict)


# ------------------------------------------------------------------ builders

def _single(n, twist, field):
    return FreeComplex({0: FreeModule([twist], n)}, {}, n, field)


def koszul(n, j, field=QQ):
    if not 0 < j < n:
        raise GalleryError("koszul example needs 0 < j < n")
    return Example("koszul", _single(n, -j, field), payload={"bundle": f"Omega^{j}({j})"})


def eilenberg_maclane(n, j, module="k", field=QQ):
    if not 0 < j < n:
        raise GalleryError("eilenberg_maclane needs 0 < j < n")
    if module == "k":
        M = SModule.residue_field(n, field)
    elif module in ("m2", "S/m^2"):
        M = SModule.truncated_polynomials(n, field)
    else:
        raise GalleryError(f"unknown module {module!r}")
    return Example("eilenberg_maclane", R_of_module(M, -j), payload={"module": module})


def two_term(n, a0, a1, w, field=QQ):
    G0, G1 = FreeModule([a0], n), FreeModule([a1], n)
    return FreeComplex({-1: G1, 0: G0}, {-1: ModMorphism(G1, G0, {(0, 0): w}, field)}, n, field)


def null_correlation(n, i=1, field=QQ):
    if n % 2 == 0 or n < 3:
        raise GalleryError("null_correlation needs odd n >= 3")
    m = (n + 1) // 2
    if not 0 < i < m:
        raise GalleryError(f"null_correlation needs 0 < i < {m}")
    j = 2 * m - i - 1
    alpha, beta = symplectic_pair(m, field)
    w = divided_power(alpha, m - i)
    G = two_term(n, -i, -j - 1, w, field)
    return Example("null_correlation", G, MonadSpec(G),
                   {"alpha": alpha, "beta": beta, "omega": w, "i": i, "j": j, "m": m})


def tango_elements(n, field=QQ):
    out = []
    for i in range(1, n):
        for j in range(i + 1, n):
            a = ExtElement.basis("V", n, [i, j], 1, field)
            if i + j <= n:
                b = ExtElement.basis("V", n, [0, i + j], 1, field)
            else:
                b = ExtElement.basis("V", n, [i + j - n, n], 1, field)
            out.append(a - b)
    return out


def _columns(elems, n, degree, field):
    idx = basis_index(n, degree)
    M = Mat.zeros(field, len(idx), len(elems))
    for t, x in enumerate(elems):
        for S, c in x.coeffs.items():
            M.a[idx[S], t] = c
    return M


def tango_vetter(n, field=QQ):
    if n < 3:
        raise GalleryError("tango_vetter needs n >= 3")
    j = n - 2
    G = _single(n, -j, field)
    ws = tango_elements(n, field)
    H = _columns([dual_iso(w) for w in ws], n, j + 1, field)
    return Example("tango_vetter", G, MonadSpec(G, H=H), {"w": ws, "j": j})


def horrocks_p5(field=QQ):
    if field.char == 2:
        raise GalleryError("horrocks_p5 needs characteristic different from 2")
    ex = null_correlation(5, 2, field)
    n = 5
    eta0 = ExtElement.basis("V*", n, [0, 1, 2], 1, field) + ExtElement.basis("V*", n, [3, 4, 5], 1, field)
    lam = ExtElement.basis("V", n, [0, 1, 2], 1, field) + ExtElement.basis("V", n, [3, 4, 5], 1, field)
    H = _columns([eta0], n, 3, field)
    Q = _columns([ExtElement("V*", n, 3, dict(lam.coeffs), field)], n, 3, field).T
    G = ex.G
    payload = dict(ex.payload, eta0=eta0, lam=lam)
    return Example("horrocks_p5", G, MonadSpec(G, H=H, Q=Q), payload)


def horrocks_mumford_seed(field=QQ):
    n = 4
    G = FreeComplex({0: FreeModule([-2, -2], n)}, {}, n, field)
    return Example("horrocks_mumford_seed", G, None, {})


BUILDERS = {
    "koszul": koszul,
    "eilenberg_maclane": eilenberg_maclane,
    "null_correlation": null_correlation,
    "tango_vetter": tango_vetter,
    "horrocks_p5": horrocks_p5,
    "horrocks_mumford_seed": horrocks_mumford_seed,
}


def build_example(name, **params):
    try:
        fn = BUILDERS[name]
    except KeyError:
        raise GalleryError(f"unknown example {name!r}; choose from {sorted(BUILDERS)}") from None
    ex = fn(**params)
    if not ex.G.is_ht():
        raise GalleryError(f"{name} did not produce an HT-complex")
    return ex


def standard_gallery(field=QQ):
    """Small examples used by the consistency suites."""
    return [
        koszul(2, 1, field), koszul(3, 1, field), koszul(3, 2, field), koszul(4, 2, field),
        eilenberg_maclane(3, 1, "k", field), eilenberg_maclane(3, 1, "m2", field),
        eilenberg_maclane(3, 2, "m2", field),
        null_correlation(3, 1, field), null_correlation(5, 1, field), null_correlation(5, 2, field),
        tango_vetter(4, field), horrocks_mumford_seed(field),
    ]


# ------------------------------------------------------------------ points

def projective_points(n, p):
    """Points of ``P^n(GF(p))`` with first nonzero coordinate 1."""
    for lead in range(n + 1):
        for rest in itertools.product(range(p), repeat=n - lead):
            yield (0,) * lead + (1,) + rest


def _points(spec, exhaustive, samples, seed):
    F = spec.field
    n = spec.n
    if F.char and exhaustive:
        return projective_points(n, F.p), True
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < samples:
        v = tuple(F.random_element(rng, 5) for _ in range(n + 1))
        if any(v):
            pts.append(v)
    return pts, False


def _act_matrices(M, d, field):
    A = GradedLambdaModule.from_free(M, field)
    return [A.act(i, d) for i in range(M.n + 1)]


def _combo(mats, v, field):
    acc = mats[0].scale(v[0])
    for m, c in zip(mats[1:], v[1:]):
        if c:
            acc = acc + m.scale(c)
    return acc


@dataclass
class Verdict:
    ok: bool
    mode: str  # "exhaustive" or "probable"
    points: int
    witness: tuple = None
    detail: str = ""

    def to_json(self):
        return {"ok": self.ok, "mode": self.mode, "points": self.points,
                "witness": None if self.witness is None else [str(x) for x in self.witness],
                "detail": self.detail}


def check_mono(spec, exhaustive=True, samples=200, seed=0):
    """Fiberwise injectivity of ``H (x) O(-1) -> E``."""
    F, G = spec.field, spec.G
    Ht = spec.H
    if Ht.cols == 0:
        return Verdict(True, "exhaustive", 0, detail="H = 0")
    B = G.evaluate(-1, -1) if -1 in G.diffs else Mat.zeros(F, Ht.rows, 0)
    rB = B.rank()
    if Ht.hstack(B).rank() - rB != Ht.cols:
        raise GalleryError("H lifts are dependent modulo boundaries")
    rhos = _act_matrices(G.term(0), -2, F)
    pts, exh = _points(spec, exhaustive, samples, seed)
    count = 0
    for v in pts:
        count += 1
        W = B.hstack(_combo(rhos, v, F))
        if Ht.hstack(W).rank() != Ht.cols + W.rank():
            return Verdict(False, "exhaustive" if exh else "probable", count, v, "H meets the image")
    return Verdict(True, "exhaustive" if exh else "probable", count)


def check_epi(spec, exhaustive=True, samples=200, seed=0):
    """Fiberwise surjectivity of ``E -> K (x) O``."""
    F, G = spec.field, spec.G
    kappa = spec.K
    if kappa.rows == 0:
        return Verdict(True, "exhaustive", 0, detail="K = 0")
    if -1 in G.diffs and not (kappa @ G.evaluate(-1, 0)).is_zero():
        raise GalleryError("quotient map does not vanish on boundaries")
    rhos = _act_matrices(G.term(0), -1, F)
    pts, exh = _points(spec, exhaustive, samples, seed)
    count = 0
    for v in pts:
        count += 1
        if (kappa @ _combo(rhos, v, F)).rank() != kappa.rows:
            return Verdict(False, "exhaustive" if exh else "probable", count, v, "not onto K")
    return Verdict(True, "exhaustive" if exh else "probable", count)


def check_epi_dual(spec, exhaustive=True, samples=200, seed=0):
    """Fiberwise surjectivity of ``E -> Q (x) O(1)`` via the dual intersection condition."""
    F, G = spec.field, spec.G
    Qm = spec.Q
    if Qm.rows == 0:
        return Verdict(True, "exhaustive", 0, detail="Q = 0")
    d0 = G.evaluate(-1, 0)
    if d0.rows != d0.cols or d0.rank() != d0.rows:
        raise GalleryError("dual epimorphism test needs d^{-1} in degree 0 to be an isomorphism")
    Z1 = G.evaluate(-1, 1).kernel_basis()
    if (Qm @ Z1).rank() != Qm.rows:
        raise GalleryError("Q functionals are dependent on cycles")
    rhos = _act_matrices(G.term(-1), 1, F)
    pts, exh = _points(spec, exhaustive, samples, seed)
    count = 0
    for v in pts:
        count += 1
        R = _combo(rhos, v, F) @ Z1
        Kv = R.kernel_basis()
        if (Qm @ Z1 @ Kv).rank() != Qm.rows:
            return Verdict(False, "exhaustive" if exh else "probable", count, v, "Q* meets the image")
    return Verdict(True, "exhaustive" if exh else "probable", count)


def check_monad_maps(spec, **kw):
    return {"mono": check_mono(spec, **kw), "epi": check_epi(spec, **kw),
            "epi_dual": check_epi_dual(spec, **kw)}


# ----------------------------------------------------------- compositions

def composition_zero(spec):
    """``eps o mu = 0`` iff ``H (x) V -> H^0(G)_0 -> K`` vanishes."""
    F, G = spec.field, spec.G
    if spec.H.cols == 0 or spec.K.rows == 0:
        return True
    rhos = _act_matrices(G.term(0), -1, F)
    return all((spec.K @ r @ spec.H).is_zero() for r in rhos)


def pi_mu_on_minimal(spec, minimal=None):
    """Composite ``O(-1)^h -> L^{-1} -> L^0 -> O(1)^q`` through the minimized complex.

    Uses the chain maps recorded while cancelling constants; returns the
    polynomial matrix (``q x h``) of the composite.
    """
    F, G = spec.field, spec.G
    L = L_of_complex(G)
    if minimal is None:
        minimal = minimize_complex(L, track=True)
    Lmin, tr, _ = minimal
    src_lab = {lab: k for k, lab in enumerate(L.labels[-1])}
    tgt_lab = {lab: k for k, lab in enumerate(L.labels[0])}
    h, q = spec.H.cols, spec.Q.rows
    # mu: H -> original L^{-1} (summands (0, -1, k)) -> minimal via proj
    mu0 = {}
    for t in range(h):
        for k in range(spec.H.rows):
            c = spec.H.a[k, t]
            if c:
                mu0[(src_lab[(0, -1, k)], t)] = {0: c}
    mu = tr.proj[-1].matmul(PolyMatrix(len(L.term(-1)), h, mu0), F)
    # pi: minimal L^0 -> original L^0 via incl, then Q on summands (-1, 1, k)
    pi0 = {}
    for r in range(q):
        for k in range(spec.Q.cols):
            c = spec.Q.a[r, k]
            if c:
                pi0[(r, tgt_lab[(-1, 1, k)])] = {0: c}
    pi = PolyMatrix(q, len(L.term(0)), pi0).matmul(tr.incl[0], F)
    comp = pi.matmul(Lmin.diff(-1), F).matmul(mu, F)
    return comp


def quadratic_form_pi_mu(ex):
    """Coefficients of ``v -> lam((beta . v) ^ (eta0 . v))``; all zero when the composite vanishes."""
    p = ex.payload
    n, F = ex.G.n, ex.G.field
    beta, eta0, lam = p["beta"], p["eta0"], p["lam"]
    coeff = {}
    for a in range(n + 1):
        ea = ExtElement.basis("V", n, [a], 1, F)
        for b in range(n + 1):
            eb = ExtElement.basis("V", n, [b], 1, F)
            x = pairing(wedge(contract(beta, ea), contract(eta0, eb)), lam)
            key = (min(a, b), max(a, b))
            coeff[key] = F.norm(coeff.get(key, 0) + x)
    return {k: c for k, c in coeff.items() if c}


def primitive_check(ex):
    """For ``eta`` in the primitive space ``P`` and basis ``v``: ``AB(eta . v) = eta . v``."""
    n, F, m = ex.G.n, ex.G.field, ex.payload["m"]
    t = Sl2Triple.build(m, F)
    P = t.A[3].kernel_basis()
    con = []
    for i in range(n + 1):
        e = ExtElement.basis("V", n, [i], 1, F)
        con.append(contraction_matrix(e, 3))
    AB = t.A[4] @ t.B[2]
    bad = 0
    for c in con:
        X = c @ P
        if AB @ X != X:
            bad += 1
    return {"ok": bad == 0, "dim_P": P.cols, "failures": bad}


def tango_resolution(ex):
    """Resolution of the cokernel of ``H (x) O(-1) -> Omega^{n-2}(n-2)``, minimized."""
    F, G, n = ex.G.field, ex.G, ex.G.n
    L = L_of_complex(G)
    H = ex.spec.H
    terms = {s: list(L.term(s)) for s in (-3, -2, -1)}
    labels = {s: list(L.labels[s]) for s in (-3, -2, -1)}
    base = len(terms[-2])
    terms[-2] += [-1] * H.cols
    labels[-2] += [("H", t) for t in range(H.cols)]
    d2 = dict(L.diff(-2).entries)
    for t in range(H.cols):
        for k in range(H.rows):
            if H.a[k, t]:
                d2[(k, base + t)] = {0: H.a[k, t]}
    diffs = {-3: PolyMatrix(len(terms[-2]), len(terms[-3]), L.diff(-3).entries),
             -2: PolyMatrix(len(terms[-1]), len(terms[-2]), d2)}
    C = SComplex(n, terms, diffs, labels, F)
    return C, minimize_complex(C)


def fiber_resolution_ranks(C, exhaustive=True, samples=100, seed=0):
    """Check that ``C`` is fiberwise a resolution of a bundle; returns the cokernel rank."""
    F = C.field
    pos = C.positions()
    top = pos[-1]
    if F.char and exhaustive:
        pts = projective_points(C.n, F.p)
    else:
        rng = np.random.default_rng(seed)
        pts = [tuple(F.random_element(rng, 5) for _ in range(C.nv)) for _ in range(samples)]
        pts = [p for p in pts if any(p)]
    coker = None
    for v in pts:
        ranks = {s: fiber_matrix(C.diffs[s], v, F).rank() for s in C.diffs}
        for s in pos[:-1]:
            h = len(C.term(s)) - ranks.get(s, 0) - ranks.get(s - 1, 0)
            if h:
                return {"ok": False, "point": v, "position": s}
        ck = len(C.term(top)) - ranks.get(top - 1, 0)
        if coker is None:
            coker = ck
        elif ck != coker:
            return {"ok": False, "point": v, "position": top, "detail": "cokernel rank jumps"}
    return {"ok": True, "cokernel_rank": coker}


def monad_report(ex, exhaustive=True, samples=200, seed=0):
    spec = ex.spec
    dec = decompose_bundle(ex.G)
    out = {"example": ex.name, "field": ex.G.field.descriptor, "n": ex.G.n,
           "z0_rank": dec.z0_rank, "r": {str(p): k for p, k in dec.r.items()},
           "bundle_rank": dec.bundle_rank}
    if spec is None:
        return out
    kw = dict(exhaustive=exhaustive, samples=samples, seed=seed)
    h, k, q = spec.H.cols, spec.K.rows, spec.Q.rows
    out.update({"dim_H": h, "dim_K": k, "dim_Q": q})
    out["mono"] = check_mono(spec, **kw).to_json()
    out["epi"] = check_epi(spec, **kw).to_json()
    out["composition_zero"] = composition_zero(spec)
    if q:
        out["epi_dual"] = check_epi_dual(spec, **kw).to_json()
        comp = pi_mu_on_minimal(spec)
        out["pi_mu_zero_minimal"] = comp.is_zero()
        if ex.name == "horrocks_p5":
            out["pi_mu_zero_formula"] = not quadratic_form_pi_mu(ex)
            out["primitive"] = primitive_check(ex)
    out["cohomology_rank"] = dec.bundle_rank - h - k - q
    checks = [out["mono"]["ok"], out["epi"]["ok"], out["composition_zero"]]
    if q:
        checks += [out["epi_dual"]["ok"], out["pi_mu_zero_minimal"]]
    out["is_monad"] = all(checks)
    return out
