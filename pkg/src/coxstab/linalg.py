"""Exact sparse linear algebra: integer Smith normal form and GF(p) ranks.

Python integers make overflow a non-issue for the Smith normal form; the
fraction-free concern reduces to keeping fill-in low via pivot choice.

For GF(2) there are two paths: small dense matrices use numpy arrays of
bits, while very wide matrices (bar-resolution boundaries) are handled by
`KernelAccumulator`, which maintains a basis of the left kernel while
streaming the columns, so memory is quadratic in the number of rows only.
"""
from __future__ import annotations

import numpy as np

from .errors import BudgetExceeded


class SparseMatrix:
    """Sparse matrix over Z or F_p with dict-of-dict storage.

    Entries are normalized: zeros are dropped, and over F_p values live in
    [1, p-1].
    """

    def __init__(self, rows, cols, entries=(), ring="Z"):
        self.rows = rows
        self.cols = cols
        self.ring = ring
        self.p = int(ring[1:]) if ring.startswith("F") else None
        self.row_data: dict[int, dict[int, int]] = {}
        if hasattr(entries, "items"):
            entries = ((i, j, v) for (i, j), v in entries.items())
        for i, j, v in entries:
            self.add(i, j, v)

    def _norm(self, v):
        return v % self.p if self.p else v

    def add(self, i, j, v):
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"entry ({i},{j}) outside {self.rows}x{self.cols}")
        row = self.row_data.setdefault(i, {})
        v = self._norm(row.get(j, 0) + v)
        if v:
            row[j] = v
        else:
            row.pop(j, None)
            if not row:
                del self.row_data[i]

    def set(self, i, j, v):
        v = self._norm(v)
        row = self.row_data.setdefault(i, {})
        if v:
            row[j] = v
        else:
            row.pop(j, None)
            if not row:
                del self.row_data[i]

    def get(self, i, j):
        return self.row_data.get(i, {}).get(j, 0)

    def nnz(self):
        return sum(len(r) for r in self.row_data.values())

    def entries(self):
        for i, row in self.row_data.items():
            for j, v in row.items():
                yield i, j, v

    def transpose(self):
        out = SparseMatrix(self.cols, self.rows, ring=self.ring)
        for i, j, v in self.entries():
            out.set(j, i, v)
        return out

    def to_dense(self):
        m = np.zeros((self.rows, self.cols), dtype=np.int64)
        for i, j, v in self.entries():
            m[i, j] = v
        return m

    def matmul(self, other):
        if self.cols != other.rows or self.ring != other.ring:
            raise ValueError("shape or ring mismatch")
        out = SparseMatrix(self.rows, other.cols, ring=self.ring)
        for i, row in self.row_data.items():
            for k, v in row.items():
                for j, w in other.row_data.get(k, {}).items():
                    out.add(i, j, v * w)
        return out

    def is_zero(self):
        return not self.row_data

    def rank(self):
        if self.ring == "Z":
            return rank_over_q(self)
        return gfp_rank(self.to_dense(), self.p)

    def copy(self):
        out = SparseMatrix(self.rows, self.cols, ring=self.ring)
        for i, j, v in self.entries():
            out.set(i, j, v)
        return out


# ---------------------------------------------------------------------------
# Smith normal form over Z
# ---------------------------------------------------------------------------

def smith_normal_form(matrix):
    """Invariant factors of an integer matrix.

    Returns (diag, rank): the nonzero invariant factors d_1 | d_2 | ... and
    their count.  Pivoting is deterministic: minimal |value|, then minimal
    estimated fill, then position.
    """
    if matrix.ring != "Z":
        raise ValueError("Smith normal form needs integer entries")
    rows = {i: dict(r) for i, r in matrix.row_data.items()}
    col_index: dict[int, set[int]] = {}
    for i, r in rows.items():
        for j in r:
            col_index.setdefault(j, set()).add(i)

    def set_entry(i, j, v):
        row = rows.setdefault(i, {})
        if v:
            if j not in row:
                col_index.setdefault(j, set()).add(i)
            row[j] = v
        else:
            if j in row:
                del row[j]
                col_index[j].discard(i)
                if not col_index[j]:
                    del col_index[j]
            if not row:
                rows.pop(i, None)

    def add_row_multiple(dst, src, factor):
        # row_dst += factor * row_src
        for j, v in list(rows.get(src, {}).items()):
            set_entry(dst, j, rows.get(dst, {}).get(j, 0) + factor * v)

    def add_col_multiple(dst, src, factor):
        for i in list(col_index.get(src, set())):
            v = rows.get(i, {}).get(src, 0)
            set_entry(i, dst, rows.get(i, {}).get(dst, 0) + factor * v)

    diag = []
    while rows:
        # deterministic pivot: min(|v|, fill, i, j)
        best = None
        for i, r in rows.items():
            for j, v in r.items():
                fill = (len(r) - 1) * (len(col_index[j]) - 1)
                key = (abs(v), fill, i, j)
                if best is None or key < best[0]:
                    best = (key, i, j)
        _, pi, pj = best

        while True:
            pivot = rows[pi][pj]
            # clear the pivot column by remainder steps
            moved = False
            for i in list(col_index.get(pj, set())):
                if i == pi:
                    continue
                v = rows[i][pj]
                q = v // pivot
                if q:
                    add_row_multiple(i, pi, -q)
                if rows.get(i, {}).get(pj, 0):
                    # remainder is smaller than the pivot: swap roles
                    pi = i
                    moved = True
                    break
            if moved:
                continue
            pivot = rows[pi][pj]
            for j in list(rows.get(pi, {}).keys()):
                if j == pj:
                    continue
                v = rows[pi][j]
                q = v // pivot
                if q:
                    add_col_multiple(j, pj, -q)
                if rows.get(pi, {}).get(j, 0):
                    pj = j
                    moved = True
                    break
            if moved:
                continue
            # pivot row and column are clear; enforce divisibility of the rest
            pivot = rows[pi][pj]
            offender = None
            for i, r in rows.items():
                if i == pi:
                    continue
                for j, v in r.items():
                    if v % pivot:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            add_row_multiple(pi, offender, 1)

        diag.append(abs(rows[pi][pj]))
        set_entry(pi, pj, 0)

    diag.sort()
    return diag, len(diag)


def rank_over_q(matrix):
    """Rank of an integer matrix over the rationals (fraction-free Bareiss)."""
    m = [row.copy() for row in matrix.to_dense().astype(object)]
    nrows, ncols = len(m), matrix.cols
    rank = 0
    prev = 1
    row = 0
    for col in range(ncols):
        pivot_row = None
        for r in range(row, nrows):
            if m[r][col]:
                pivot_row = r
                break
        if pivot_row is None:
            continue
        m[row], m[pivot_row] = m[pivot_row], m[row]
        for r in range(row + 1, nrows):
            for c in range(col + 1, ncols):
                m[r][c] = (m[row][col] * m[r][c] - m[r][col] * m[row][c]) // prev
            m[r][col] = 0
        prev = m[row][col]
        rank += 1
        row += 1
        if row == nrows:
            break
    return rank


# ---------------------------------------------------------------------------
# Dense GF(p)
# ---------------------------------------------------------------------------

def gfp_rank(dense, p):
    m = np.array(dense, dtype=np.int64) % p
    nrows, ncols = m.shape
    rank = 0
    row = 0
    for col in range(ncols):
        pivot = None
        for r in range(row, nrows):
            if m[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        m[[row, pivot]] = m[[pivot, row]]
        inv = pow(int(m[row, col]), p - 2, p)
        m[row] = (m[row] * inv) % p
        mask = m[:, col] != 0
        mask[row] = False
        if mask.any():
            m[mask] = (m[mask] - np.outer(m[mask, col], m[row])) % p
        rank += 1
        row += 1
        if row == nrows:
            break
    return rank


# ---------------------------------------------------------------------------
# Packed GF(2)
# ---------------------------------------------------------------------------

def _pack(vectors, width):
    words = (width + 63) // 64
    out = np.zeros((len(vectors), words), dtype=np.uint64)
    for r, vec in enumerate(vectors):
        for j in vec:
            out[r, j >> 6] ^= np.uint64(1) << np.uint64(j & 63)
    return out


class BitRows:
    """Row-echelon accumulator of packed GF(2) vectors of a fixed width."""

    def __init__(self, width):
        self.width = width
        self.words = (width + 63) // 64
        self.pivot_of: dict[int, int] = {}  # leading bit -> row index
        self.data = np.zeros((0, self.words), dtype=np.uint64)

    @staticmethod
    def _leading(vec):
        nz = np.nonzero(vec)[0]
        if len(nz) == 0:
            return -1
        w = int(nz[0])
        return (w << 6) + _lowest_bit(int(vec[w]))

    def reduce_vector(self, vec):
        """Reduce a packed vector against the accumulated rows (in place)."""
        while True:
            lead = self._leading(vec)
            if lead == -1 or lead not in self.pivot_of:
                return vec, lead
            vec ^= self.data[self.pivot_of[lead]]

    def insert(self, vec):
        """Insert a packed vector; returns True if it increased the rank."""
        vec = vec.copy()
        vec, lead = self.reduce_vector(vec)
        if lead == -1:
            return False
        self.pivot_of[lead] = len(self.data)
        self.data = np.vstack([self.data, vec[None, :]])
        return True

    def insert_sparse(self, indices):
        vec = _pack([indices], self.width)[0]
        return self.insert(vec)

    @property
    def rank(self):
        return len(self.data)

    def contains(self, vec):
        reduced, lead = self.reduce_vector(vec.copy())
        return lead == -1


def _lowest_bit(x):
    return (x & -x).bit_length() - 1


def gf2_rank_dense(rows_iterable, width):
    acc = BitRows(width)
    for row in rows_iterable:
        acc.insert_sparse(row)
    return acc.rank


class KernelAccumulator:
    """Left-kernel basis of a streamed sparse GF(2) matrix.

    Maintains a basis of {y : y . col = 0 for all columns seen} as packed
    rows of length `dim` (the number of matrix rows).  Feeding every column
    of a matrix M yields ker(M^T); the rank of M is dim - nullity.  Memory
    is O(dim^2) bits regardless of the number of columns.
    """

    def __init__(self, dim, max_dim_bits=2_400_000_000):
        if dim * dim > max_dim_bits:
            raise BudgetExceeded(
                f"kernel accumulator needs {dim}^2 bits", needed=dim * dim, budget=max_dim_bits
            )
        self.dim = dim
        self.words = (dim + 63) // 64
        self.basis = np.zeros((dim, self.words), dtype=np.uint64)
        for i in range(dim):
            self.basis[i, i >> 6] = np.uint64(1) << np.uint64(i & 63)
        self.nullity = dim

    def _parities(self, col):
        # parity of each basis row against a sparse column (row indices);
        # repeated indices cancel, as they should over GF(2)
        n = self.nullity
        col = np.asarray(col, dtype=np.int64)
        acc = np.zeros(n, dtype=np.uint64)
        for j in col:
            acc ^= (self.basis[:n, j >> 6] >> np.uint64(j & 63)) & np.uint64(1)
        return acc

    def feed(self, col):
        """Impose orthogonality with one sparse column (row indices)."""
        if len(col) == 0:
            return False
        s = self._parities(col)
        bad = np.nonzero(s)[0]
        if len(bad) == 0:
            return False
        self._shrink(bad)
        return True

    def _shrink(self, bad):
        keep = int(bad[0])
        rest = bad[1:]
        if len(rest):
            self.basis[rest] ^= self.basis[keep]
        last = self.nullity - 1
        if keep != last:
            self.basis[keep] = self.basis[last]
        self.basis[last] = 0
        self.nullity = last

    def feed_batch(self, cols):
        """Impose orthogonality with many columns: int array (n, terms) with
        -1 for absent terms.  Returns the number of rank increments.

        Blocks whose parity plane is clean cost one vectorized pass; a block
        with violations falls back to per-column processing, which is the
        right mode while the basis is still shrinking fast.
        """
        cols = np.asarray(cols, dtype=np.int64)
        if cols.size == 0:
            return 0
        hits = 0
        n = cols.shape[0]
        start = 0
        while start < n:
            stop = min(n, start + self._batch_rows())
            block = cols[start:stop]
            par = self._block_parities(block)
            bad_cols = np.nonzero(par.any(axis=0))[0]
            if len(bad_cols) == 0:
                start = stop
                continue
            first = int(bad_cols[0])
            self._shrink(np.nonzero(par[:, first])[0])
            hits += 1
            for row in block[first + 1:]:
                idx = row[row >= 0]
                if idx.size and self.feed(idx):
                    hits += 1
            start = stop
        return hits

    def _batch_rows(self):
        # keep the (nullity x batch) parity plane around 32 MB
        return max(64, min(65536, (32 << 20) // max(self.nullity, 1)))

    def _block_parities(self, block):
        n = self.nullity
        par = np.zeros((n, block.shape[0]), dtype=np.uint8)
        for t in range(block.shape[1]):
            idx = block[:, t]
            valid = idx >= 0
            if not valid.any():
                continue
            cols = idx[valid]
            bits = (self.basis[:n, cols >> 6] >> (cols & 63).astype(np.uint64)) & np.uint64(1)
            par[:, valid] ^= bits.astype(np.uint8)
        return par

    def kernel_rows(self):
        return self.basis[: self.nullity].copy()


def bit_get(vec, j):
    return int((vec[j >> 6] >> np.uint64(j & 63)) & np.uint64(1))


def pack_sparse(indices, width):
    return _pack([indices], width)[0]


def sparse_dot_packed(packed, indices):
    acc = 0
    for j in indices:
        acc ^= bit_get(packed, j)
    return acc
