"""Exact scalar fields and dense linear algebra over Q and GF(p).

Matrices are thin wrappers around numpy arrays: ``int64`` entries in
``[0, p)`` for prime fields and ``object`` entries (``int`` or
``fractions.Fraction``) for the rationals.  Row reduction over GF(p) goes
through :mod:`htbgg._kernels` when the compiled extension is available and
falls back to a numpy implementation otherwise.
"""

from __future__ import annotations

import os
from collections import namedtuple
from fractions import Fraction
from functools import lru_cache

import numpy as np

if os.environ.get("HTBGG_PURE"):
    from . import _kernels_py as _kern
    HAVE_EXTENSION = False
else:
    try:
        from . import _kernels as _kern
        HAVE_EXTENSION = True
    except ImportError:  # pragma: no cover - depends on the build
        from . import _kernels_py as _kern
        HAVE_EXTENSION = False

__all__ = [
    "Field", "Rationals", "PrimeField", "QQ", "GF", "parse_field",
    "FieldMismatchError", "Mat", "SparseMat", "SplitIso",
    "rank", "kernel_basis", "solve_linear", "split_off_iso",
    "HAVE_EXTENSION",
]

_INT64_LIMIT = 2 ** 63 - 1


class FieldMismatchError(ValueError):
    """Raised when operands live over different fields."""


class Field:
    """Base class for the two supported ground fields."""

    descriptor = "?"
    char = 0
    dtype = object

    def __eq__(self, other):
        return isinstance(other, Field) and other.descriptor == self.descriptor

    def __hash__(self):
        return hash(self.descriptor)

    def __repr__(self):
        return f"Field({self.descriptor})"

    zero = 0
    one = 1


class Rationals(Field):
    descriptor = "Q"
    char = 0
    dtype = object

    def __call__(self, x):
        if isinstance(x, (int, np.integer)):
            return int(x)
        if isinstance(x, Fraction):
            return int(x) if x.denominator == 1 else x
        if isinstance(x, str):
            return self(Fraction(x))
        return self(Fraction(x))

    @staticmethod
    def norm(x):
        return x

    @staticmethod
    def inv(x):
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        if isinstance(x, int):
            return 1 if x == 1 else (-1 if x == -1 else Fraction(1, x))
        return 1 / x

    def random_element(self, rng, bound=3):
        return int(rng.integers(-bound, bound + 1))


class PrimeField(Field):
    dtype = np.int64

    def __init__(self, p):
        p = int(p)
        if p < 2 or not _is_prime(p):
            raise ValueError(f"GF(p) requires p prime, got {p}")
        if p >= 2 ** 31:
            raise ValueError("GF(p) supported for p < 2**31")
        self.p = p
        self.char = p
        self.descriptor = f"GF:{p}"

    def __call__(self, x):
        if isinstance(x, str):
            x = Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise ZeroDivisionError(f"{x} has no image in GF({self.p})")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return int(x) % self.p

    def norm(self, x):
        return x % self.p

    def inv(self, x):
        if x % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(int(x), -1, self.p)

    def random_element(self, rng, bound=None):
        return int(rng.integers(0, self.p))


def _is_prime(p):
    if p < 4:
        return p >= 2
    if p % 2 == 0:
        return False
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


QQ = Rationals()


@lru_cache(maxsize=None)
def GF(p):
    return PrimeField(p)


def parse_field(desc):
    """``"Q"`` or ``"GF:p"`` -> field."""
    if isinstance(desc, Field):
        return desc
    s = str(desc).strip()
    if s.upper() in ("Q", "QQ"):
        return QQ
    if s.upper().startswith("GF:") or s.upper().startswith("GF("):
        return GF(int(s[3:].strip(")")))
    raise ValueError(f"unknown field descriptor {desc!r}")


def _check_same(f1, f2):
    if f1 != f2:
        raise FieldMismatchError(f"field mismatch: {f1.descriptor} vs {f2.descriptor}")


# ---------------------------------------------------------------- rref helpers

def _rref_q(rows, ncols):
    """Reduced row echelon form of a list-of-lists over Q, in place."""
    pivots = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        k = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if k is None:
            continue
        rows[r], rows[k] = rows[k], rows[r]
        pr = rows[r]
        lead = pr[c]
        if lead != 1:
            inv = QQ.inv(lead)
            pr = [x * inv if x else 0 for x in pr]
            rows[r] = pr
        nzc = [j for j in range(c, ncols) if pr[j] != 0]
        for i in range(nrows):
            if i == r:
                continue
            row = rows[i]
            f = row[c]
            if f == 0:
                continue
            for j in nzc:
                row[j] = row[j] - f * pr[j]
        pivots.append(c)
        r += 1
    for row in rows:
        for j, x in enumerate(row):
            if type(x) is Fraction and x.denominator == 1:
                row[j] = x.numerator
    return pivots


def _object_matmul(a, b):
    """Product of object arrays, skipping zeros when one factor is sparse.

    Contraction and evaluation matrices are mostly zero, and a dense object
    ``dot`` pays a Python multiplication for every one of the ``m*k*n`` terms.
    """
    m, k = a.shape
    n = b.shape[1]
    ra, ca = np.nonzero(a != 0)
    rb, cb = np.nonzero(b != 0)
    dense = m * k * n
    cost_a, cost_b = ra.size * n, rb.size * m
    if min(cost_a, cost_b) * 4 >= dense:
        return a.dot(b)
    out = np.zeros((m, n), dtype=object)
    if cost_a <= cost_b:
        for i, j in zip(ra.tolist(), ca.tolist()):
            out[i] += a[i, j] * b[j]
    else:
        for i, j in zip(rb.tolist(), cb.tolist()):
            out[:, j] += a[:, i] * b[i, j]
    return out


class Mat:
    """Dense matrix over an exact field."""

    __slots__ = ("field", "a")

    def __init__(self, field, a):
        self.field = field
        self.a = a

    # construction
    @classmethod
    def zeros(cls, field, rows, cols):
        return cls(field, np.zeros((rows, cols), dtype=field.dtype) if field.dtype is not object
                   else np.zeros((rows, cols), dtype=object))

    @classmethod
    def identity(cls, field, n):
        m = cls.zeros(field, n, n)
        for i in range(n):
            m.a[i, i] = 1
        return m

    @classmethod
    def from_rows(cls, field, rows, ncols=None):
        rows = [list(r) for r in rows]
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        m = cls.zeros(field, len(rows), ncols)
        for i, r in enumerate(rows):
            for j, x in enumerate(r):
                m.a[i, j] = field(x)
        return m

    @classmethod
    def from_columns(cls, field, cols, nrows):
        m = cls.zeros(field, nrows, len(cols))
        for j, c in enumerate(cols):
            for i, x in enumerate(c):
                m.a[i, j] = field(x)
        return m

    @property
    def rows(self):
        return self.a.shape[0]

    @property
    def cols(self):
        return self.a.shape[1]

    @property
    def shape(self):
        return self.a.shape

    @property
    def T(self):
        return Mat(self.field, self.a.T.copy())

    def copy(self):
        return Mat(self.field, self.a.copy())

    def __repr__(self):
        return f"Mat({self.field.descriptor}, {self.a.tolist()})"

    def tolist(self):
        return [[x for x in row] for row in self.a.tolist()]

    def __getitem__(self, idx):
        sub = self.a[idx]
        if isinstance(sub, np.ndarray) and sub.ndim == 2:
            return Mat(self.field, sub)
        return sub

    def __eq__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        return (self.field == other.field and self.shape == other.shape
                and bool(np.all(self.a == other.a)))

    def is_zero(self):
        return not np.any(self.a != 0)

    # arithmetic
    def _wrap(self, arr):
        if self.field.char:
            arr %= self.field.p
        return Mat(self.field, arr)

    def __add__(self, other):
        _check_same(self.field, other.field)
        return self._wrap(self.a + other.a)

    def __sub__(self, other):
        _check_same(self.field, other.field)
        return self._wrap(self.a - other.a)

    def __neg__(self):
        return self._wrap(-self.a)

    def scale(self, c):
        c = self.field(c)
        return self._wrap(self.a * c)

    def __matmul__(self, other):
        _check_same(self.field, other.field)
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        F = self.field
        if F.char:
            k = max(self.cols, 1)
            if k * (F.p - 1) ** 2 < _INT64_LIMIT:
                return Mat(F, (self.a @ other.a) % F.p)
            out = (self.a.astype(object) @ other.a.astype(object)) % F.p
            return Mat(F, out.astype(np.int64))
        if self.rows == 0 or other.cols == 0 or self.cols == 0:
            return Mat.zeros(F, self.rows, other.cols)
        return Mat(F, _object_matmul(self.a, other.a))

    def hstack(self, *others):
        for o in others:
            _check_same(self.field, o.field)
        return Mat(self.field, np.hstack([self.a] + [o.a for o in others]))

    def vstack(self, *others):
        for o in others:
            _check_same(self.field, o.field)
        return Mat(self.field, np.vstack([self.a] + [o.a for o in others]))

    def kron(self, other):
        _check_same(self.field, other.field)
        return self._wrap(np.kron(self.a, other.a))

    # elimination
    def rref(self):
        """Return ``(R, pivots)`` with ``R`` the reduced row echelon form."""
        F = self.field
        if F.char:
            arr = np.ascontiguousarray(self.a, dtype=np.int64).copy()
            pivots = list(_kern.rref_modp(arr, F.p)) if arr.size else []
            return Mat(F, arr), pivots
        rows = [list(r) for r in self.a.tolist()]
        pivots = _rref_q(rows, self.cols)
        out = Mat.zeros(F, self.rows, self.cols)
        for i, r in enumerate(rows):
            out.a[i, :] = r
        return out, pivots

    def rank(self):
        if self.rows == 0 or self.cols == 0:
            return 0
        # eliminate along the shorter side
        m = self if self.rows <= self.cols else self.T
        return len(m.rref()[1])

    def kernel_basis(self):
        """Columns spanning the right null space (shape ``cols x k``)."""
        F = self.field
        n = self.cols
        R, piv = self.rref()
        free = [j for j in range(n) if j not in set(piv)]
        K = Mat.zeros(F, n, len(free))
        for t, f in enumerate(free):
            K.a[f, t] = 1
            for i, pc in enumerate(piv):
                x = R.a[i, f]
                if x:
                    K.a[pc, t] = F.norm(-x)
        return K

    def image_basis(self):
        """Pivot columns of ``self`` (a basis of the column space)."""
        _, piv = self.rref()
        return Mat(self.field, self.a[:, piv].copy()), piv

    def solve(self, b):
        """Some ``x`` with ``self @ x == b`` or ``None``; ``b`` is a Mat with matching rows."""
        if b.rows != self.rows:
            raise ValueError(f"dimension mismatch {self.shape} vs rhs {b.shape}")
        _check_same(self.field, b.field)
        n = self.cols
        R, piv = self.hstack(b).rref()
        x = Mat.zeros(self.field, n, b.cols)
        for i, pc in enumerate(piv):
            if pc >= n:
                return None
            x.a[pc, :] = R.a[i, n:]
        return x

    def inverse(self):
        if self.rows != self.cols:
            raise ValueError("inverse of a non-square matrix")
        x = self.solve(Mat.identity(self.field, self.rows))
        if x is None or self.rank() != self.rows:
            raise ZeroDivisionError("matrix is singular")
        return x


class SparseMat:
    """Coordinate-format matrix used for the large, very sparse section-level maps.

    Rank and kernel computations split the matrix into the connected
    components of its row/column incidence graph and eliminate each block
    densely.
    """

    def __init__(self, field, shape, rows, cols, vals):
        self.field = field
        self.shape = tuple(shape)
        self.r = np.asarray(rows, dtype=np.int64)
        self.c = np.asarray(cols, dtype=np.int64)
        self.v = np.asarray(vals, dtype=object if field.dtype is object else np.int64)

    def blocks(self):
        """Yield ``(row_idx, col_idx, Mat)`` for every connected block with nonzeros."""
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import connected_components

        m, n = self.shape
        keep = self.v != 0
        r, c, v = self.r[keep], self.c[keep], self.v[keep]
        if r.size == 0:
            return
        g = coo_matrix((np.ones(r.size), (r, m + c)), shape=(m + n, m + n))
        _, labels = connected_components(g, directed=False)
        row_lab = labels[:m]
        col_lab = labels[m:]
        touched = np.unique(labels[r])
        for lab in touched:
            ri = np.flatnonzero(row_lab == lab)
            ci = np.flatnonzero(col_lab == lab)
            rpos = {int(x): k for k, x in enumerate(ri)}
            cpos = {int(x): k for k, x in enumerate(ci)}
            sel = np.flatnonzero(labels[r] == lab)
            blk = Mat.zeros(self.field, ri.size, ci.size)
            for t in sel:
                i, j = rpos[int(r[t])], cpos[int(c[t])]
                blk.a[i, j] = self.field.norm(blk.a[i, j] + v[t])
            yield ri, ci, blk

    def rank(self):
        return sum(b.rank() for _, _, b in self.blocks())

    def kernel_basis(self):
        m, n = self.shape
        F = self.field
        vecs = []
        used = np.zeros(n, dtype=bool)
        for ri, ci, blk in self.blocks():
            used[ci] = True
            K = blk.kernel_basis()
            for t in range(K.cols):
                vecs.append((ci, K.a[:, t]))
        for j in np.flatnonzero(~used):
            vecs.append((np.array([j]), np.array([1], dtype=object)))
        out = Mat.zeros(F, n, len(vecs))
        for t, (idx, col) in enumerate(vecs):
            out.a[idx, t] = col
        return out

    def to_dense(self):
        out = Mat.zeros(self.field, *self.shape)
        for i, j, x in zip(self.r, self.c, self.v):
            out.a[i, j] = self.field.norm(out.a[i, j] + x)
        return out


# ------------------------------------------------------------- module-level API

def rank(m):
    return m.rank()


def kernel_basis(m):
    """List of column vectors (tuples) spanning the right null space."""
    K = m.kernel_basis()
    return [tuple(K.a[:, j].tolist()) for j in range(K.cols)]


def solve_linear(m, b):
    """Exact solution of ``m x = b`` as a tuple, or ``None`` if inconsistent."""
    if not isinstance(b, Mat):
        b = Mat.from_columns(m.field, [list(b)], len(b)) if len(b) else Mat.zeros(m.field, 0, 1)
    x = m.solve(b)
    return None if x is None else tuple(x.a[:, 0].tolist())


SplitIso = namedtuple("SplitIso", "Y Z B C")


def split_off_iso(f):
    """Split source = Y + Z and target = B + C with Z = ker f and f: Y -> B invertible.

    Complements follow the leftmost-pivot order of Gaussian elimination, so
    Y and C consist of standard basis vectors.  All four are returned as
    matrices whose columns are the basis vectors.
    """
    F = f.field
    _, piv = f.rref()
    Y = Mat.zeros(F, f.cols, len(piv))
    for t, c in enumerate(piv):
        Y.a[c, t] = 1
    Z = f.kernel_basis()
    B = Mat(F, f.a[:, piv].copy())
    _, piv2 = B.hstack(Mat.identity(F, f.rows)).rref()
    extra = [c - B.cols for c in piv2 if c >= B.cols]
    C = Mat.zeros(F, f.rows, len(extra))
    for t, c in enumerate(extra):
        C.a[c, t] = 1
    return SplitIso(Y, Z, B, C)
