"""Finite-field arithmetic and linear algebra over GF(2^8) and GF(2^16).

Symbols are unsigned integers whose bits are the coefficients of a
polynomial over GF(2); products are reduced modulo a fixed irreducible
polynomial.  Addition is XOR.  Multiplication goes through log/exp tables
built once at import; GF(2^8) additionally gets a full 256x256 product
table so that vectorized packet operations are a single numpy gather.

Vectors and matrices are plain numpy arrays (uint8 for GF(2^8), uint16
for GF(2^16)); a :class:`GaloisField` instance supplies the arithmetic.
Row reduction uses exact arithmetic, so the pivot is always the first
nonzero entry in column order and results are deterministic.

Module singletons ``GF256`` (poly 0x11B) and ``GF65536`` (poly 0x1100B)
cover the two supported symbol widths.
"""

from __future__ import annotations

import numpy as np

GF256_POLY = 0x11B        # x^8 + x^4 + x^3 + x + 1
GF65536_POLY = 0x1100B    # x^16 + x^12 + x^3 + x + 1


class ZeroInverseError(ZeroDivisionError):
    """Multiplicative inverse of zero was requested."""


class DimensionMismatchError(ValueError):
    """Operands have incompatible shapes or belong to different fields."""


class SingularMatrixError(ValueError):
    """Matrix inversion or solving was attempted on a rank-deficient matrix."""


class OpCounter:
    """Running tally of field multiplications performed by instrumented ops."""

    __slots__ = ("mults",)

    def __init__(self):
        self.mults = 0

    def __repr__(self):
        return f"OpCounter(mults={self.mults})"


def _tick(counter, n):
    if counter is not None:
        counter.mults += int(n)


class GaloisField:
    """GF(2^bits) with table-backed scalar and vectorized array operations.

    Parameters
    ----------
    symbol_bits : int
        Symbol width; 8 or 16.
    reduction_poly : int
        Bit pattern of the irreducible reduction polynomial, degree
        ``symbol_bits``.  Verified at table build: the exp table must
        enumerate every nonzero element exactly once, which holds iff the
        polynomial is irreducible (a reducible modulus has zero divisors
        and no element of full multiplicative order).
    """

    def __init__(self, symbol_bits: int, reduction_poly: int):
        if symbol_bits not in (8, 16):
            raise ValueError(f"unsupported symbol width {symbol_bits}; use 8 or 16")
        self.symbol_bits = symbol_bits
        self.symbol_bytes = symbol_bits // 8
        self.order = 1 << symbol_bits
        self.reduction_poly = reduction_poly
        self.dtype = np.uint8 if symbol_bits == 8 else np.uint16
        self.field_id = 0 if symbol_bits == 8 else 1
        self.name = f"gf{self.order}"
        self._build_tables()

    def __repr__(self):
        return f"GaloisField(bits={self.symbol_bits}, poly={self.reduction_poly:#x})"

    # -- table construction ------------------------------------------------

    def _mul_slow(self, a: int, b: int) -> int:
        """Shift-and-xor product mod the reduction polynomial (no tables)."""
        p = 0
        for _ in range(self.symbol_bits):
            if b & 1:
                p ^= a
            a <<= 1
            if a & self.order:
                a ^= self.reduction_poly
            b >>= 1
        return p

    def _build_tables(self):
        n = self.order - 1
        for gen in range(2, self.order):
            log = np.zeros(self.order, dtype=np.int32)
            exp = np.zeros(2 * n, dtype=np.int64)
            val = 1
            ok = True
            for i in range(n):
                exp[i] = val
                log[val] = i
                val = self._mul_slow(val, gen)
                if val == 1 and i < n - 1:
                    ok = False
                    break
            if ok and val == 1:
                break
        else:
            raise ValueError(
                f"polynomial {self.reduction_poly:#x} is not irreducible over GF(2)"
            )
        # full-order cycle => every nonzero element appeared exactly once
        assert len(np.unique(exp[:n])) == n
        exp[n:] = exp[:n]
        self.generator = gen
        self._log = log
        self._exp = exp.astype(self.dtype)
        if self.symbol_bits == 8:
            la = log[np.arange(256)]
            table = self._exp[la[:, None] + la[None, :]]
            table[0, :] = 0
            table[:, 0] = 0
            self._mul_table = table
        else:
            self._mul_table = None

    # -- scalar arithmetic ---------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self._exp[int(self._log[a]) + int(self._log[b])])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroInverseError("0 has no multiplicative inverse")
        return int(self._exp[self.order - 1 - int(self._log[a])])

    # -- array constructors ----------------------------------------------

    def array(self, data) -> np.ndarray:
        """Coerce to this field's dtype, rejecting out-of-range values."""
        arr = np.asarray(data)
        if arr.size and (arr.min() < 0 or arr.max() >= self.order):
            raise ValueError(f"symbol out of range for {self.name}")
        return arr.astype(self.dtype)

    def zeros(self, shape) -> np.ndarray:
        return np.zeros(shape, dtype=self.dtype)

    def identity(self, n: int) -> np.ndarray:
        return np.eye(n, dtype=self.dtype)

    def random(self, rng: np.random.Generator, shape) -> np.ndarray:
        """Uniform symbols, zero included."""
        return rng.integers(0, self.order, size=shape, dtype=self.dtype)

    # -- vectorized arithmetic ---------------------------------------------

    def mul_vec(self, a, b) -> np.ndarray:
        """Elementwise product with numpy broadcasting."""
        a = np.asarray(a, dtype=self.dtype)
        b = np.asarray(b, dtype=self.dtype)
        if self._mul_table is not None:
            return self._mul_table[a, b]
        out = self._exp[self._log[a] + self._log[b]]
        return np.where((a == 0) | (b == 0), self.dtype(0), out)

    def scale(self, alpha: int, x) -> np.ndarray:
        return self.mul_vec(self.dtype(alpha), x)

    def axpy(self, alpha: int, x, y) -> np.ndarray:
        """alpha*x + y elementwise."""
        x = np.asarray(x, dtype=self.dtype)
        y = np.asarray(y, dtype=self.dtype)
        if x.shape != y.shape:
            raise DimensionMismatchError(f"axpy shapes {x.shape} vs {y.shape}")
        return self.scale(alpha, x) ^ y

    def combine(self, coeffs, rows, counter: OpCounter | None = None) -> np.ndarray:
        """Linear combination sum_i coeffs[i] * rows[i] of an (n, w) row stack."""
        coeffs = np.asarray(coeffs, dtype=self.dtype)
        rows = np.asarray(rows, dtype=self.dtype)
        if rows.ndim != 2 or coeffs.shape != (rows.shape[0],):
            raise DimensionMismatchError(
                f"combine needs (n,) coefficients against (n, w) rows; "
                f"got {coeffs.shape} and {rows.shape}"
            )
        _tick(counter, coeffs.size * rows.shape[1])
        prods = self.mul_vec(coeffs[:, None], rows)
        return np.bitwise_xor.reduce(prods, axis=0)

    def matmul(self, A, B, counter: OpCounter | None = None) -> np.ndarray:
        """Naive-cubic matrix product (r*k*c scalar multiplications)."""
        A = np.asarray(A, dtype=self.dtype)
        B = np.asarray(B, dtype=self.dtype)
        if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
            raise DimensionMismatchError(f"matmul shapes {A.shape} x {B.shape}")
        _tick(counter, A.shape[0] * A.shape[1] * B.shape[1])
        prods = self.mul_vec(A[:, :, None], B[None, :, :])
        return np.bitwise_xor.reduce(prods, axis=1)

    # -- row reduction -------------------------------------------------------

    def _reduce(self, M, split, cleft=None, cright=None):
        """Gauss-Jordan on M in place; pivots searched in columns [0, split).

        Multiplications are tallied per processed entry, split at column
        ``split`` between the two counters.
        """
        rows, total = M.shape
        rank = 0
        pivots = []
        for col in range(split):
            nz = np.nonzero(M[rank:, col])[0]
            if nz.size == 0:
                continue
            p = rank + int(nz[0])
            if p != rank:
                M[[rank, p]] = M[[p, rank]]
            pivot = int(M[rank, col])
            if pivot != 1:
                M[rank, col:] = self.scale(self.inv(pivot), M[rank, col:])
                _tick(cleft, split - col)
                _tick(cright, total - split)
            colvals = M[:, col].copy()
            colvals[rank] = 0
            nzr = np.nonzero(colvals)[0]
            if nzr.size:
                factors = M[nzr, col]
                M[nzr, col:] ^= self.mul_vec(factors[:, None], M[rank, col:][None, :])
                _tick(cleft, nzr.size * (split - col))
                _tick(cright, nzr.size * (total - split))
            pivots.append(col)
            rank += 1
            if rank == rows:
                break
        return M, rank, pivots

    def rref(self, A, counter: OpCounter | None = None):
        """Reduced row echelon form.

        Returns ``(R, rank, pivot_cols)``.  Pivot choice is the first
        nonzero entry in column order, so the result is deterministic.
        """
        A = np.asarray(A, dtype=self.dtype)
        if A.ndim != 2 or A.size == 0:
            raise DimensionMismatchError("rref needs a non-empty 2-D matrix")
        R, rank, pivots = self._reduce(A.copy(), A.shape[1], counter, None)
        return R, rank, tuple(pivots)

    def rank(self, A) -> int:
        return self.rref(A)[1]

    def inverse(self, A, counter: OpCounter | None = None) -> np.ndarray:
        """Inverse via elimination of [A | I]; raises SingularMatrixError."""
        A = np.asarray(A, dtype=self.dtype)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionMismatchError(f"inverse needs a square matrix, got {A.shape}")
        n = A.shape[0]
        aug = np.hstack([A, self.identity(n)])
        aug, rank, _ = self._reduce(aug, n, counter, counter)
        if rank < n:
            raise SingularMatrixError(f"rank {rank} < {n}")
        return aug[:, n:]

    def solve(
        self,
        A,
        Y,
        counter: OpCounter | None = None,
        rhs_counter: OpCounter | None = None,
    ) -> np.ndarray:
        """Solve A @ W = Y by elimination of [A | Y]; A must be invertible.

        Multiplications touching the coefficient block go to ``counter``,
        those touching the right-hand side to ``rhs_counter``.
        """
        A = np.asarray(A, dtype=self.dtype)
        Y = np.asarray(Y, dtype=self.dtype)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionMismatchError(f"solve needs a square matrix, got {A.shape}")
        if Y.ndim != 2 or Y.shape[0] != A.shape[0]:
            raise DimensionMismatchError(f"solve rhs shape {Y.shape} vs {A.shape}")
        n = A.shape[0]
        aug = np.hstack([A, Y])
        aug, rank, _ = self._reduce(aug, n, counter, rhs_counter)
        if rank < n:
            raise SingularMatrixError(f"rank {rank} < {n}")
        return aug[:, n:]


GF256 = GaloisField(8, GF256_POLY)
GF65536 = GaloisField(16, GF65536_POLY)

FIELDS_BY_ID = {f.field_id: f for f in (GF256, GF65536)}
FIELDS_BY_BITS = {f.symbol_bits: f for f in (GF256, GF65536)}
