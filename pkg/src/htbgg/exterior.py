"""Arithmetic in the exterior algebras of V and V*.

Basis monomials ``e_S`` (of V) and ``X_S`` (of V*) are indexed by bitmasks
over ``{0..n}``.  The right action of V on V* (the contraction) follows the
convention

    <eta . omega, u> = <eta, omega ^ u>,   <X_S, e_T> = delta_{S,T},

so ``X_S . e_T = sign(T, S \\ T) X_{S \\ T}`` when ``T`` is a subset of ``S``.
With this choice ``(eta . w) . w' = eta . (w ^ w')``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from .exactla import QQ, Mat

VARIANCES = ("V", "V*")


def popcount(x):
    return bin(x).count("1")


@lru_cache(maxsize=1 << 16)
def shuffle_sign(S, T):
    """Sign of ``e_S ^ e_T`` relative to ``e_{S|T}`` (assumes disjoint masks)."""
    inv = 0
    t = T
    while t:
        low = t & -t
        inv += popcount(S & ~((low << 1) - 1))
        t ^= low
    return -1 if inv & 1 else 1


@lru_cache(maxsize=None)
def basis_masks(n, d):
    """Masks of ``d``-subsets of ``{0..n}`` ordered by value."""
    if d < 0 or d > n + 1:
        return ()
    return tuple(sorted(sum(1 << i for i in c) for c in combinations(range(n + 1), d)))


@lru_cache(maxsize=None)
def basis_index(n, d):
    return {m: k for k, m in enumerate(basis_masks(n, d))}


def mask_to_list(mask):
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def list_to_mask(idx):
    m = 0
    for i in idx:
        if m & (1 << i):
            return None
        m |= 1 << i
    return m


class ExteriorError(ValueError):
    pass


@dataclass
class ExtElement:
    """Homogeneous element of Lambda^d V or Lambda^d V*."""

    variance: str
    n: int
    degree: int
    coeffs: dict = dc_field(default_factory=dict)
    field: object = QQ

    def __post_init__(self):
        if self.variance not in VARIANCES:
            raise ExteriorError(f"unknown variance {self.variance!r}")
        clean = {}
        for m, c in self.coeffs.items():
            if popcount(m) != self.degree or m >> (self.n + 1):
                raise ExteriorError(f"mask {m:b} is not a {self.degree}-subset of 0..{self.n}")
            c = self.field(c)
            if c:
                clean[m] = c
        self.coeffs = clean

    # constructors
    @classmethod
    def zero(cls, variance, n, degree, field=QQ):
        return cls(variance, n, degree, {}, field)

    @classmethod
    def one(cls, variance, n, field=QQ):
        return cls(variance, n, 0, {0: 1}, field)

    @classmethod
    def basis(cls, variance, n, idx, coeff=1, field=QQ):
        idx = list(idx)
        mask = list_to_mask(idx)
        if mask is None:
            return cls.zero(variance, n, len(idx), field)
        sign = 1
        # sort the indices, tracking the permutation sign
        arr = list(idx)
        for i in range(len(arr)):
            for j in range(len(arr) - 1 - i):
                if arr[j] > arr[j + 1]:
                    arr[j], arr[j + 1] = arr[j + 1], arr[j]
                    sign = -sign
        return cls(variance, n, len(idx), {mask: sign * field(coeff)}, field)

    def is_zero(self):
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def _compatible(self, other):
        if self.variance != other.variance:
            raise ExteriorError("variance mismatch")
        if self.n != other.n:
            raise ExteriorError("ambient dimension mismatch")
        if self.field != other.field:
            raise ExteriorError("field mismatch")

    def __add__(self, other):
        self._compatible(other)
        if self.degree != other.degree and self.coeffs and other.coeffs:
            raise ExteriorError("adding elements of different degrees")
        deg = self.degree if self.coeffs or not other.coeffs else other.degree
        out = dict(self.coeffs)
        norm = self.field.norm
        for m, c in other.coeffs.items():
            out[m] = norm(out.get(m, 0) + c)
        return ExtElement(self.variance, self.n, deg, out, self.field)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = self.field(c)
        norm = self.field.norm
        return ExtElement(self.variance, self.n, self.degree,
                          {m: norm(c * x) for m, x in self.coeffs.items()}, self.field)

    def __eq__(self, other):
        if not isinstance(other, ExtElement):
            return NotImplemented
        if self.coeffs or other.coeffs:
            return (self.variance == other.variance and self.n == other.n
                    and self.degree == other.degree and self.coeffs == other.coeffs)
        return self.variance == other.variance and self.n == other.n

    def __hash__(self):
        return hash((self.variance, self.n, self.degree, frozenset(self.coeffs.items())))

    def __repr__(self):
        return f"ExtElement({format_element(self)!r}, n={self.n})"

    def wedge(self, other):
        return wedge(self, other)

    __xor__ = wedge

    def coefficient(self, idx):
        mask = list_to_mask(idx) if not isinstance(idx, int) else idx
        return self.coeffs.get(mask, 0)


def wedge(x, y):
    """Exterior product ``x ^ y`` (same variance)."""
    x._compatible(y)
    deg = x.degree + y.degree
    out = {}
    norm = x.field.norm
    if deg <= x.n + 1:
        for S, a in x.coeffs.items():
            for T, b in y.coeffs.items():
                if S & T:
                    continue
                U = S | T
                out[U] = norm(out.get(U, 0) + shuffle_sign(S, T) * a * b)
    return ExtElement(x.variance, x.n, deg, out, x.field)


def contract(eta, omega):
    """Right action ``eta . omega`` of Lambda V on Lambda V*."""
    if eta.variance != "V*" or omega.variance != "V":
        raise ExteriorError("contract expects (element of Lambda V*, element of Lambda V)")
    if eta.n != omega.n or eta.field != omega.field:
        raise ExteriorError("incompatible operands")
    out = {}
    norm = eta.field.norm
    deg = eta.degree - omega.degree
    if deg >= 0:
        for S, a in eta.coeffs.items():
            for T, b in omega.coeffs.items():
                if T & ~S:
                    continue
                U = S & ~T
                out[U] = norm(out.get(U, 0) + shuffle_sign(T, U) * a * b)
    return ExtElement("V*", eta.n, max(deg, 0) if not out else deg, out, eta.field)


def contract_basis(S, T):
    """``X_S . e_T`` as ``(sign, mask)`` or ``None``."""
    if T & ~S:
        return None
    U = S & ~T
    return shuffle_sign(T, U), U


def pairing(eta, omega):
    """Natural pairing <X_S, e_T> = delta."""
    if eta.variance == omega.variance:
        raise ExteriorError("pairing needs one element of each variance")
    if eta.variance == "V":
        eta, omega = omega, eta
    norm = eta.field.norm
    return norm(sum(c * omega.coeffs.get(m, 0) for m, c in eta.coeffs.items()))


def dual_iso(omega):
    """Lambda^p V -> Lambda^{n+1-p} V*,  omega -> (-1)^p (u -> coeff of e_{0..n} in u ^ omega)."""
    if omega.variance != "V":
        raise ExteriorError("dual_iso expects an element of Lambda V")
    n = omega.n
    full = (1 << (n + 1)) - 1
    p = omega.degree
    sgn = -1 if p & 1 else 1
    out = {}
    for T, c in omega.coeffs.items():
        U = full & ~T
        out[U] = omega.field.norm(sgn * shuffle_sign(U, T) * c)
    return ExtElement("V*", n, n + 1 - p, out, omega.field)


def divided_power(alpha, i):
    """``alpha^(i)`` for a 2-form, via the sum over i-subsets of its terms."""
    if i < 0:
        raise ExteriorError("divided power with negative exponent")
    if alpha.degree != 2:
        raise ExteriorError("divided powers are defined here for 2-forms")
    F = alpha.field
    if i == 0:
        return ExtElement.one(alpha.variance, alpha.n, F)
    terms = [ExtElement(alpha.variance, alpha.n, 2, {m: c}, F) for m, c in sorted(alpha.coeffs.items())]
    acc = ExtElement.zero(alpha.variance, alpha.n, 2 * i, F)
    for sub in combinations(terms, i):
        prod = sub[0]
        for t in sub[1:]:
            prod = wedge(prod, t)
        acc = acc + prod
    return acc


# ------------------------------------------------------------------ text format

_TERM = re.compile(
    r"\s*([+-])?\s*(?:(\d+(?:/\d+)?)\s*\*?\s*)?([ex])\s*\[\s*([0-9,\s]*)\]\s*")


def format_element(x):
    letter = "e" if x.variance == "V" else "x"
    if not x.coeffs:
        return "0"
    parts = []
    for m in sorted(x.coeffs):
        c = x.coeffs[m]
        if x.field.char and c > x.field.p // 2:
            c = c - x.field.p
        idx = ",".join(str(i) for i in mask_to_list(m))
        if c == 1:
            s = f"{letter}[{idx}]"
        elif c == -1:
            s = f"-{letter}[{idx}]"
        else:
            s = f"{c}*{letter}[{idx}]"
        parts.append(s)
    out = parts[0]
    for s in parts[1:]:
        out += s if s.startswith("-") else "+" + s
    return out


def parse_element(text, n, field=QQ, variance=None, degree=None):
    """Parse ``"e[0,2]+e[1,3]"``, ``"-2*x[1]"``, ``"3/2*e[]"`` or ``"0"``."""
    s = text.strip()
    if s in ("0", ""):
        if variance is None or degree is None:
            raise ExteriorError("zero element needs explicit variance and degree")
        return ExtElement.zero(variance, n, degree, field)
    pos = 0
    acc = None
    while pos < len(s):
        mt = _TERM.match(s, pos)
        if not mt or mt.end() == pos:
            raise ExteriorError(f"cannot parse exterior element at column {pos + 1}: {s[pos:]!r}")
        sign, coeff, letter, idx = mt.groups()
        if acc is not None and sign is None:
            raise ExteriorError(f"missing '+' or '-' at column {pos + 1}")
        var = "V" if letter == "e" else "V*"
        if variance is not None and var != variance:
            raise ExteriorError(f"expected {'e' if variance == 'V' else 'x'}[...] terms")
        c = Fraction(coeff) if coeff else Fraction(1)
        if sign == "-":
            c = -c
        indices = [int(t) for t in idx.replace(" ", "").split(",") if t != ""]
        if any(i > n for i in indices):
            raise ExteriorError(f"index out of range 0..{n} in {mt.group(0).strip()!r}")
        term = ExtElement.basis(var, n, indices, field(c), field)
        if acc is not None and term.degree != acc.degree:
            raise ExteriorError("inhomogeneous exterior element")
        acc = term if acc is None else acc + term
        pos = mt.end()
    if degree is not None and acc.degree != degree:
        raise ExteriorError(f"element {text!r} has degree {acc.degree}, expected {degree}")
    return acc


# ------------------------------------------------------------------- sl2 action

def symplectic_pair(m, field=QQ):
    """``alpha = sum e_i ^ e_{m+i}`` and ``beta = sum X_i ^ X_{m+i}`` for n = 2m - 1."""
    n = 2 * m - 1
    alpha = ExtElement.zero("V", n, 2, field)
    beta = ExtElement.zero("V*", n, 2, field)
    for i in range(m):
        alpha = alpha + ExtElement.basis("V", n, [i, m + i], 1, field)
        beta = beta + ExtElement.basis("V*", n, [i, m + i], 1, field)
    return alpha, beta


def contraction_matrix(omega, p):
    """Matrix of ``eta -> eta . omega`` from Lambda^p V* to Lambda^{p-deg} V*."""
    n, F = omega.n, omega.field
    q = p - omega.degree
    src = basis_masks(n, p)
    tgt_idx = basis_index(n, q)
    M = Mat.zeros(F, len(basis_masks(n, q)), len(src))
    for j, S in enumerate(src):
        for T, c in omega.coeffs.items():
            r = contract_basis(S, T)
            if r is not None:
                sgn, U = r
                i = tgt_idx[U]
                M.a[i, j] = F.norm(M.a[i, j] + sgn * c)
    return M


def wedge_matrix(beta, p):
    """Matrix of ``eta -> beta ^ eta`` from Lambda^p V* to Lambda^{p+deg} V*."""
    n, F = beta.n, beta.field
    q = p + beta.degree
    src = basis_masks(n, p)
    tgt_idx = basis_index(n, q)
    M = Mat.zeros(F, len(basis_masks(n, q)), len(src))
    for j, S in enumerate(src):
        for T, c in beta.coeffs.items():
            if S & T:
                continue
            i = tgt_idx[S | T]
            M.a[i, j] = F.norm(M.a[i, j] + shuffle_sign(T, S) * c)
    return M


@dataclass
class Sl2Triple:
    """Per-degree matrices of A = (. alpha), B = (beta ^ .) and C = AB - BA on Lambda V*."""

    m: int
    A: dict
    B: dict
    C: dict
    field: object = QQ

    @classmethod
    def build(cls, m, field=QQ):
        alpha, beta = symplectic_pair(m, field)
        n = 2 * m - 1
        A = {p: contraction_matrix(alpha, p) for p in range(n + 2)}
        B = {p: wedge_matrix(beta, p) for p in range(n + 2)}
        C = {}
        for p in range(n + 2):
            dim = len(basis_masks(n, p))
            zero = Mat.zeros(field, dim, dim)
            ab = A[p + 2] @ B[p] if p + 2 <= n + 1 else zero
            ba = B[p - 2] @ A[p] if p >= 2 else zero
            C[p] = ab - ba
        return cls(m, A, B, C, field)

    def power_A(self, i, p):
        """A^i restricted to Lambda^p V*."""
        n = 2 * self.m - 1
        M = Mat.identity(self.field, len(basis_masks(n, p)))
        q = p
        for _ in range(i):
            M = self.A[q] @ M
            q -= 2
        return M


def sl2_check(m, field=QQ):
    """Verify the sl2 relations on Lambda V* for n = 2m - 1; returns a report dict."""
    if m < 1:
        raise ExteriorError("half-dimension m must be positive")
    n = 2 * m - 1
    t = Sl2Triple.build(m, field)
    failures = []
    for p in range(n + 2):
        dim = len(basis_masks(n, p))
        want = Mat.identity(field, dim).scale(m - p)
        if t.C[p] != want:
            failures.append({"identity": "C eta = (m-p) eta", "p": p})
    for p in range(n + 2):
        # [C, A] = 2A on Lambda^p:  C_{p-2} A_p - A_p C_p
        if p >= 2:
            lhs = t.C[p - 2] @ t.A[p] - t.A[p] @ t.C[p]
            if lhs != t.A[p].scale(2):
                failures.append({"identity": "[C,A] = 2A", "p": p})
        if p + 2 <= n + 1:
            lhs = t.C[p + 2] @ t.B[p] - t.B[p] @ t.C[p]
            if lhs != t.B[p].scale(-2):
                failures.append({"identity": "[C,B] = -2B", "p": p})
    isos = {}
    for i in range(m + 1):
        M = t.power_A(i, m + i)
        ok = M.rows == M.cols and M.rank() == M.rows
        isos[i] = {"shape": M.shape, "invertible": ok}
        if not ok:
            failures.append({"identity": f"A^{i}: Lambda^{m + i} -> Lambda^{m - i} iso", "p": m + i})
    return {"m": m, "n": n, "field": field.descriptor, "ok": not failures,
            "failures": failures, "A_powers": isos}
