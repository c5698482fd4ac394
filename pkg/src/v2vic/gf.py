"""Exact linear algebra over small finite fields.

Elements of GF(q), q a prime power <= 256, are stored as ``np.uint8``.
Arithmetic is table driven; characteristic-2 fields add by XOR.

Over GF(2) a payload byte is treated as eight parallel binary symbols, so
payload arrays handed to :meth:`GF.scale`, :meth:`GF.matmul` (right operand)
and :func:`solve` (right-hand side) may hold any byte value.  Coefficient
arrays must always hold genuine field elements.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


class NoSolution(ValueError):
    """The right-hand side is not in the column space of the system."""


def _prime_power(q: int) -> tuple[int, int]:
    if q < 2:
        raise ValueError(f"field order must be >= 2, got {q}")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    m, rest = 0, q
    while rest % p == 0:
        rest //= p
        m += 1
    if rest != 1:
        raise ValueError(f"field order {q} is not a prime power")
    return p, m


class GF:
    """The finite field with ``q`` elements (prime power, ``q <= 256``).

    Elements are the integers ``0..q-1``; for ``q = p**m`` with ``m > 1`` an
    element is read as the base-``p`` digit vector of a polynomial reduced
    modulo the lexicographically first primitive polynomial of degree ``m``
    (for GF(256) that is x^8 + x^4 + x^3 + x^2 + 1).
    """

    def __init__(self, q: int):
        if q > 256:
            raise ValueError(f"fields beyond GF(256) are not supported, got q={q}")
        self.q = q
        self.p, self.m = _prime_power(q)
        self.char2 = self.p == 2
        a = np.arange(q)
        if self.m == 1:
            add = (a[:, None] + a[None, :]) % q
            mul = (a[:, None] * a[None, :]) % q
            self.modulus = None
        else:
            digits = self._digits(a)
            add = self._from_digits((digits[:, None, :] + digits[None, :, :]) % self.p)
            self.modulus, exp = self._primitive_modulus()
            log = np.zeros(q, dtype=np.int64)
            log[exp] = np.arange(q - 1)
            mul = exp[(log[:, None] + log[None, :]) % (q - 1)]
            mul[0, :] = 0
            mul[:, 0] = 0
        self.add_table = add.astype(np.uint8)
        self.mul_table = mul.astype(np.uint8)
        self.neg_table = np.argmin(self.add_table, axis=1).astype(np.uint8)
        inv = np.zeros(q, dtype=np.uint8)
        rows, cols = np.nonzero(self.mul_table == 1)
        inv[rows] = cols
        self.inv_table = inv

    def __repr__(self) -> str:
        return f"GF({self.q})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GF) and other.q == self.q

    def __hash__(self) -> int:
        return hash(("GF", self.q))

    # -- construction helpers -------------------------------------------------

    def _digits(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.int64)
        return np.stack([(values // self.p**k) % self.p for k in range(self.m)], axis=-1)

    def _from_digits(self, digits: np.ndarray) -> np.ndarray:
        weights = self.p ** np.arange(self.m)
        return (digits * weights).sum(axis=-1)

    def _primitive_modulus(self) -> tuple[tuple[int, ...], np.ndarray]:
        # Try monic f = x^m + g(x) with g enumerated in increasing integer order;
        # accept the first whose root x has multiplicative order q - 1.
        p, m, q = self.p, self.m, self.q
        for g in range(1, p**m):
            low = [(g // p**k) % p for k in range(m)]
            if low[0] == 0:
                continue
            exp = np.zeros(q - 1, dtype=np.int64)
            elem = [1] + [0] * (m - 1)
            ok = True
            for t in range(q - 1):
                value = sum(d * p**k for k, d in enumerate(elem))
                if t > 0 and value == 1:
                    ok = False
                    break
                exp[t] = value
                top = elem[-1]
                elem = [0] + elem[:-1]
                if top:
                    elem = [(e - top * c) % p for e, c in zip(elem, low)]
            if ok and len(set(exp.tolist())) == q - 1:
                return tuple(low) + (1,), exp
        raise RuntimeError(f"no primitive polynomial found for GF({q})")

    # -- elementwise arithmetic -----------------------------------------------

    def add(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.uint8)
        b = np.asarray(b, dtype=np.uint8)
        if self.char2:
            return np.bitwise_xor(a, b)
        return self.add_table[a, b]

    def neg(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.uint8)
        return a.copy() if self.char2 else self.neg_table[a]

    def sub(self, a, b) -> np.ndarray:
        if self.char2:
            return self.add(a, b)
        return self.add(a, self.neg(b))

    def mul(self, a, b) -> np.ndarray:
        return self.mul_table[np.asarray(a, dtype=np.uint8), np.asarray(b, dtype=np.uint8)]

    def inv(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.uint8)
        if np.any(a == 0):
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return self.inv_table[a]

    def scale(self, c: int, arr) -> np.ndarray:
        """Multiply every entry of ``arr`` by the scalar ``c``."""
        arr = np.asarray(arr, dtype=np.uint8)
        if self.q == 2:
            return arr.copy() if c else np.zeros_like(arr)
        return self.mul_table[int(c), arr]

    def outer(self, coeffs, row) -> np.ndarray:
        """``result[k] = coeffs[k] * row``; ``row`` may carry payload bytes for q=2."""
        coeffs = np.asarray(coeffs, dtype=np.uint8)
        row = np.asarray(row, dtype=np.uint8)
        shape = (len(coeffs),) + (1,) * row.ndim
        if self.q == 2:
            return np.where(coeffs.reshape(shape) != 0, row[None, ...], np.uint8(0))
        return self.mul_table[coeffs.reshape(shape), row[None, ...]]

    def weighted(self, coeffs, rows) -> np.ndarray:
        """``result[k] = coeffs[k] * rows[k]``."""
        coeffs = np.asarray(coeffs, dtype=np.uint8)
        rows = np.asarray(rows, dtype=np.uint8)
        shape = (len(coeffs),) + (1,) * (rows.ndim - 1)
        if self.q == 2:
            return np.where(coeffs.reshape(shape) != 0, rows, np.uint8(0))
        return self.mul_table[coeffs.reshape(shape), rows]

    def sum(self, arr, axis: int = 0) -> np.ndarray:
        arr = np.asarray(arr, dtype=np.uint8)
        if self.char2:
            return np.bitwise_xor.reduce(arr, axis=axis)
        if self.m == 1:
            return (arr.astype(np.int64).sum(axis=axis) % self.p).astype(np.uint8)
        arr = np.moveaxis(arr, axis, 0)
        out = np.zeros(arr.shape[1:], dtype=np.uint8)
        for part in arr:
            out = self.add_table[out, part]
        return out

    def matmul(self, A, B) -> np.ndarray:
        """Matrix product ``A @ B`` over the field (``B`` may be 1-D)."""
        A = np.atleast_2d(np.asarray(A, dtype=np.uint8))
        B = np.asarray(B, dtype=np.uint8)
        vector = B.ndim == 1
        if vector:
            B = B[:, None]
        if A.shape[1] != B.shape[0]:
            raise ValueError(f"shape mismatch: {A.shape} @ {B.shape}")
        if self.m == 1 and self.p > 2:
            out = (A.astype(np.int64) @ B.astype(np.int64)) % self.p
            out = out.astype(np.uint8)
        else:
            out = np.empty((A.shape[0],) + B.shape[1:], dtype=np.uint8)
            for r, row in enumerate(A):
                out[r] = self.sum(self.weighted(row, B), axis=0) if len(row) else 0
        return out[:, 0] if vector else out

    def random(self, shape, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, self.q, size=shape, dtype=np.uint8)


@lru_cache(maxsize=None)
def field(q: int = 2) -> GF:
    """Shared :class:`GF` instance for order ``q``."""
    return GF(q)


GF2 = field(2)


def _as_field(f: GF | int | None) -> GF:
    if f is None:
        return GF2
    if isinstance(f, GF):
        return f
    return field(int(f))


# -- dense linear algebra -------------------------------------------------------


def _eliminate(A, Y, f: GF):
    """Gauss-Jordan on ``A`` applying the same row operations to ``Y``.

    Pivot choice: leftmost nonzero column, topmost candidate row.
    """
    R = np.array(A, dtype=np.uint8, copy=True)
    if R.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    Z = None if Y is None else np.array(Y, dtype=np.uint8, copy=True)
    rows, cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(R[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            R[[r, k]] = R[[k, r]]
            if Z is not None:
                Z[[r, k]] = Z[[k, r]]
        lead = int(R[r, c])
        if lead != 1:
            factor = int(f.inv_table[lead])
            R[r] = f.scale(factor, R[r])
            if Z is not None:
                Z[r] = f.scale(factor, Z[r])
        others = np.nonzero(R[:, c])[0]
        others = others[others != r]
        if others.size:
            coeffs = R[others, c].copy()
            R[others] = f.sub(R[others], f.outer(coeffs, R[r]))
            if Z is not None:
                Z[others] = f.sub(Z[others], f.outer(coeffs, Z[r]))
        pivots.append(c)
        r += 1
    return R, Z, pivots


def rref_with_rank(M, f: GF | int | None = None) -> tuple[np.ndarray, int]:
    """Reduced row-echelon form of ``M`` and its rank."""
    R, _, pivots = _eliminate(M, None, _as_field(f))
    return R, len(pivots)


def rref(M, f: GF | int | None = None) -> np.ndarray:
    return rref_with_rank(M, f)[0]


def rank(M, f: GF | int | None = None) -> int:
    M = np.asarray(M, dtype=np.uint8)
    if M.size == 0:
        return 0
    return rref_with_rank(M, f)[1]


def solve(A, y, f: GF | int | None = None) -> np.ndarray:
    """Return ``x`` with ``A @ x = y``.

    ``y`` may be a vector or a matrix (one column per symbol position).  When
    ``A`` is rank deficient the free variables are set to zero.  Raises
    :class:`NoSolution` when the system is inconsistent.
    """
    f = _as_field(f)
    A = np.asarray(A, dtype=np.uint8)
    y = np.asarray(y, dtype=np.uint8)
    if A.ndim != 2 or y.shape[0] != A.shape[0]:
        raise ValueError(f"incompatible shapes {A.shape} and {y.shape}")
    _, Z, pivots = _eliminate(A, y, f)
    r = len(pivots)
    if np.any(Z[r:]):
        raise NoSolution("right-hand side is not in the column space")
    x = np.zeros((A.shape[1],) + y.shape[1:], dtype=np.uint8)
    for k, c in enumerate(pivots):
        x[c] = Z[k]
    return x


def span_membership(v, basis, f: GF | int | None = None) -> bool:
    """True iff ``v`` lies in the row space of ``basis``."""
    v = np.asarray(v, dtype=np.uint8)
    basis = np.asarray(basis, dtype=np.uint8).reshape(-1, v.shape[0])
    if not np.any(v):
        return True
    if basis.shape[0] == 0:
        return False
    f = _as_field(f)
    return rank(basis, f) == rank(np.vstack([basis, v]), f)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.uint8)


# -- bit-packed GF(2) -----------------------------------------------------------


def pack_bits(v) -> int:
    """Pack a 0/1 vector into an int, entry ``j`` at bit ``j``."""
    out = 0
    for j in np.nonzero(np.asarray(v))[0]:
        out |= 1 << int(j)
    return out


def unpack_bits(x: int, n: int) -> np.ndarray:
    return np.array([(x >> j) & 1 for j in range(n)], dtype=np.uint8)


def gf2_rank_bits(rows) -> int:
    """Rank over GF(2) of bit-packed rows."""
    pivots: dict[int, int] = {}
    for row in rows:
        for p, prow in pivots.items():
            if (row >> p) & 1:
                row ^= prow
        if row:
            pivots[(row & -row).bit_length() - 1] = row
    return len(pivots)


class Subspace:
    """An incrementally grown subspace of GF(q)^n kept in reduced echelon form.

    Over GF(2) rows are bit-packed ints keyed by pivot; elsewhere the basis
    is a single uint8 matrix with a parallel pivot list.  Two subspaces
    compare equal iff they are the same subspace.
    """

    def __init__(self, n: int, f: GF | int | None = None, vectors=()):
        self.n = n
        self.field = _as_field(f)
        self._bits = self.field.q == 2
        self._rows: dict[int, int] = {}
        self._piv: list[int] = []
        self._mat = np.zeros((0, n), dtype=np.uint8)
        for v in vectors:
            self.add(v)

    @property
    def dim(self) -> int:
        return len(self._rows) if self._bits else len(self._piv)

    def __len__(self) -> int:
        return self.dim

    def copy(self) -> Subspace:
        out = Subspace(self.n, self.field)
        out._rows = dict(self._rows)
        out._piv = list(self._piv)
        out._mat = self._mat.copy()
        return out

    def _internal(self, v):
        if self._bits:
            if isinstance(v, (int, np.integer)):
                return int(v)
            return pack_bits(v)
        v = np.asarray(v, dtype=np.uint8)
        if v.shape != (self.n,):
            raise ValueError(f"expected a vector of length {self.n}")
        return v

    def _reduce(self, v):
        if self._bits:
            for p, row in self._rows.items():
                if (v >> p) & 1:
                    v ^= row
            return v
        if not self._piv:
            return v.copy()
        coeffs = v[self._piv]
        if not np.any(coeffs):
            return v.copy()
        f = self.field
        return f.sub(v, f.sum(f.weighted(coeffs, self._mat), axis=0))

    def residual(self, v) -> np.ndarray:
        """``v`` reduced against the basis (zero iff ``v`` is in the subspace)."""
        r = self._reduce(self._internal(v))
        return unpack_bits(r, self.n) if self._bits else r

    def contains(self, v) -> bool:
        r = self._reduce(self._internal(v))
        return (r == 0) if self._bits else not np.any(r)

    __contains__ = contains

    def add(self, v) -> bool:
        """Insert ``v``; return True iff the dimension grew."""
        r = self._reduce(self._internal(v))
        if self._bits:
            if not r:
                return False
            p = (r & -r).bit_length() - 1
            for q_, row in self._rows.items():
                if (row >> p) & 1:
                    self._rows[q_] = row ^ r
            self._rows[p] = r
            return True
        nz = np.flatnonzero(r)
        if nz.size == 0:
            return False
        f = self.field
        p = int(nz[0])
        if r[p] != 1:
            r = f.scale(int(f.inv_table[r[p]]), r)
        if self._piv:
            col = self._mat[:, p]
            if np.any(col):
                self._mat = f.sub(self._mat, f.mul_table[col[:, None], r[None, :]])
        self._mat = np.vstack([self._mat, r[None, :]])
        self._piv.append(p)
        return True

    def basis(self) -> np.ndarray:
        """Reduced row-echelon basis, rows ordered by pivot column."""
        if self._bits:
            keys = sorted(self._rows)
            if not keys:
                return np.zeros((0, self.n), dtype=np.uint8)
            return np.stack([unpack_bits(self._rows[k], self.n) for k in keys])
        return self._mat[np.argsort(self._piv, kind="stable")].copy()

    def support(self) -> list[int]:
        """Coordinates where some element of the subspace is nonzero."""
        if self._bits:
            acc = 0
            for row in self._rows.values():
                acc |= row
            return [j for j in range(self.n) if (acc >> j) & 1]
        return np.flatnonzero(np.any(self._mat != 0, axis=0)).tolist()

    def canonical(self) -> tuple:
        if self._bits:
            return tuple(sorted(self._rows.items()))
        B = self.basis()
        return (tuple(sorted(self._piv)), B.tobytes())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.n == other.n and self.field == other.field and self.canonical() == other.canonical()

    def __hash__(self) -> int:
        return hash((self.n, self.field.q, self.canonical()))

    def lift(self, f: GF | int) -> Subspace:
        """The same span viewed over an extension field of GF(2)."""
        f = _as_field(f)
        if self.field == f:
            return self.copy()
        if self.field.q != 2 or not f.char2:
            raise ValueError(f"cannot lift a subspace over {self.field} to {f}")
        return Subspace(self.n, f, list(self.basis()))

    def __repr__(self) -> str:
        return f"Subspace(n={self.n}, dim={self.dim}, field={self.field!r})"
