"""Dense bit-matrix algebra over GF(2).

Rows are packed into Python integers (bit k of ``row_words[i]`` is the
entry in row i, column k), so row elimination is a single XOR. This is
plenty fast for the desk-scale matrices used by the correlation models.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BitVector",
    "BitMatrix",
    "matvec",
    "matmul",
    "determinant",
    "invert",
    "build_recursive_matrix",
    "build_circulant",
    "circulant_invertible",
    "random_toeplitz",
    "toeplitz_nonsingular_fraction",
]


@dataclass(frozen=True)
class BitVector:
    """Binary vector of length ``n`` packed into one integer (bit k = entry k)."""

    n: int
    word: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"vector length must be >= 1, got {self.n}")
        if not 0 <= self.word < (1 << self.n):
            raise ValueError("packed word has bits outside the vector length")

    @classmethod
    def from_bits(cls, bits) -> "BitVector":
        word = 0
        count = 0
        for k, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError(f"entry {k} is {b!r}, expected 0 or 1")
            word |= int(b) << k
            count += 1
        return cls(count, word)

    @classmethod
    def from_string(cls, s: str) -> "BitVector":
        """Parse e.g. ``"101"``; the leftmost character is entry 0."""
        return cls.from_bits(int(c) for c in s)

    def bit(self, k: int) -> int:
        if not 0 <= k < self.n:
            raise IndexError(f"index {k} out of range for length {self.n}")
        return (self.word >> k) & 1

    def to_bits(self) -> list[int]:
        return [(self.word >> k) & 1 for k in range(self.n)]

    def to_array(self) -> np.ndarray:
        return np.array(self.to_bits(), dtype=np.uint8)

    def to_string(self) -> str:
        return "".join(str(b) for b in self.to_bits())

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self.n != other.n:
            raise ValueError(f"length mismatch: {self.n} vs {other.n}")
        return BitVector(self.n, self.word ^ other.word)


@dataclass(frozen=True)
class BitMatrix:
    """Dense binary matrix with packed rows (bit k of ``row_words[i]`` = entry i,k)."""

    rows: int
    cols: int
    row_words: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"matrix must be at least 1x1, got {self.rows}x{self.cols}")
        if len(self.row_words) != self.rows:
            raise ValueError("row_words length does not match the row count")
        limit = 1 << self.cols
        for w in self.row_words:
            if not 0 <= w < limit:
                raise ValueError("packed row has bits outside the column range")

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def from_rows(cls, rows) -> "BitMatrix":
        vecs = [BitVector.from_bits(r) for r in rows]
        if not vecs:
            raise ValueError("matrix needs at least one row")
        cols = vecs[0].n
        if any(v.n != cols for v in vecs):
            raise ValueError("rows have inconsistent lengths")
        return cls(len(vecs), cols, tuple(v.word for v in vecs))

    @classmethod
    def from_strings(cls, rows) -> "BitMatrix":
        """Build from row bit-strings, e.g. ``["110", "011"]`` (leftmost = column 0)."""
        return cls.from_rows([int(c) for c in r] for r in rows)

    def entry(self, i: int, k: int) -> int:
        if not (0 <= i < self.rows and 0 <= k < self.cols):
            raise IndexError(f"entry ({i},{k}) out of range for {self.rows}x{self.cols}")
        return (self.row_words[i] >> k) & 1

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, self.row_words[i])

    def transpose(self) -> "BitMatrix":
        words = [0] * self.cols
        for i, w in enumerate(self.row_words):
            while w:
                k = (w & -w).bit_length() - 1
                words[k] |= 1 << i
                w &= w - 1
        return BitMatrix(self.cols, self.rows, tuple(words))

    def to_lists(self) -> list[list[int]]:
        return [[(w >> k) & 1 for k in range(self.cols)] for w in self.row_words]

    def to_array(self) -> np.ndarray:
        return np.array(self.to_lists(), dtype=np.uint8)

    def to_strings(self) -> list[str]:
        return ["".join(str((w >> k) & 1) for k in range(self.cols)) for w in self.row_words]


def matvec(a: BitMatrix, x: BitVector) -> BitVector:
    """Matrix-vector product over GF(2): result[i] = XOR_k a[i,k] & x[k]."""
    if a.cols != x.n:
        raise ValueError(f"shape mismatch: matrix is {a.rows}x{a.cols}, vector has length {x.n}")
    word = 0
    for i, row in enumerate(a.row_words):
        word |= ((row & x.word).bit_count() & 1) << i
    return BitVector(a.rows, word)


def matmul(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """Matrix product over GF(2)."""
    if a.cols != b.rows:
        raise ValueError(
            f"shape mismatch: {a.rows}x{a.cols} cannot multiply {b.rows}x{b.cols}"
        )
    words = []
    for row in a.row_words:
        acc = 0
        w = row
        while w:
            k = (w & -w).bit_length() - 1
            acc ^= b.row_words[k]
            w &= w - 1
        words.append(acc)
    return BitMatrix(a.rows, b.cols, tuple(words))


def _require_square(a: BitMatrix, op: str) -> int:
    if a.rows != a.cols:
        raise ValueError(f"{op} requires a square matrix, got {a.rows}x{a.cols}")
    return a.rows


def determinant(a: BitMatrix) -> int:
    """GF(2) determinant (0 or 1) by Gaussian elimination on packed rows."""
    n = _require_square(a, "determinant")
    rows = list(a.row_words)
    for c in range(n):
        mask = 1 << c
        pivot = next((i for i in range(c, n) if rows[i] & mask), None)
        if pivot is None:
            return 0
        rows[c], rows[pivot] = rows[pivot], rows[c]
        for i in range(c + 1, n):
            if rows[i] & mask:
                rows[i] ^= rows[c]
    return 1


def invert(a: BitMatrix) -> BitMatrix | None:
    """Inverse over GF(2) by Gauss-Jordan elimination, or None if singular."""
    n = _require_square(a, "invert")
    rows = list(a.row_words)
    inv = [1 << i for i in range(n)]
    for c in range(n):
        mask = 1 << c
        pivot = next((i for i in range(c, n) if rows[i] & mask), None)
        if pivot is None:
            return None
        rows[c], rows[pivot] = rows[pivot], rows[c]
        inv[c], inv[pivot] = inv[pivot], inv[c]
        for i in range(n):
            if i != c and rows[i] & mask:
                rows[i] ^= rows[c]
                inv[i] ^= inv[c]
    return BitMatrix(n, n, tuple(inv))


def build_recursive_matrix(n: int, depth: int, taps) -> BitMatrix:
    """Unit-lower-triangular banded matrix of a recursive binary filter.

    Row l (1-based) has a 1 on the diagonal and configurable entries on the
    band of columns l-min(depth, l-1) .. l-1.

    Parameters
    ----------
    n, depth : int
        Matrix size and recursion depth (both >= 1).
    taps : sequence
        Either a flat sequence of ``depth`` bits applied to every row
        (``taps[i-1]`` is the coefficient at column offset i, giving a
        Toeplitz band), or one sequence per row with exactly
        ``min(depth, l-1)`` bits for row l, ordered by ascending column.
    """
    if n < 1:
        raise ValueError(f"matrix size must be >= 1, got {n}")
    if depth < 1:
        raise ValueError(f"recursion depth must be >= 1, got {depth}")
    taps = list(taps)
    nested = bool(taps) and hasattr(taps[0], "__iter__")
    if nested:
        if len(taps) != n:
            raise ValueError(f"per-row taps must supply {n} rows, got {len(taps)}")
        rows_taps = [list(t) for t in taps]
        for l, t in enumerate(rows_taps, start=1):
            band = min(depth, l - 1)
            if len(t) != band:
                raise ValueError(
                    f"row {l} band holds {band} taps (columns {l - band}..{l - 1}), got {len(t)}"
                )
            if any(b not in (0, 1) for b in t):
                raise ValueError(f"row {l} taps must be 0 or 1")
    else:
        if len(taps) != depth:
            raise ValueError(
                f"flat taps must have length {depth} (one per band offset), got {len(taps)}"
            )
        if any(t not in (0, 1) for t in taps):
            raise ValueError("taps must be 0 or 1")
        rows_taps = None

    words = []
    for l in range(1, n + 1):
        band = min(depth, l - 1)
        w = 1 << (l - 1)
        if rows_taps is None:
            for i in range(1, band + 1):  # column l-i, tap index i-1
                w |= int(taps[i - 1]) << (l - 1 - i)
        else:
            start = l - band  # 1-based first band column
            for j, b in enumerate(rows_taps[l - 1]):
                w |= int(b) << (start - 1 + j)
        words.append(w)
    return BitMatrix(n, n, tuple(words))


def build_circulant(n: int, d: int) -> BitMatrix:
    """Circulant matrix whose row l has ones at columns l..l+d-1 (mod n)."""
    if n < 1:
        raise ValueError(f"matrix size must be >= 1, got {n}")
    if not 1 <= d <= n:
        raise ValueError(f"run length d must satisfy 1 <= d <= n, got d={d}, n={n}")
    base = 0
    for t in range(d):
        base |= 1 << t
    words = []
    mask = (1 << n) - 1
    for i in range(n):
        w = ((base << i) | (base >> (n - i))) & mask if i else base
        words.append(w)
    return BitMatrix(n, n, tuple(words))


def _is_prime(d: int) -> bool:
    if d < 2:
        return False
    if d % 2 == 0:
        return d == 2
    f = 3
    while f * f <= d:
        if d % f == 0:
            return False
        f += 2
    return True


def circulant_invertible(n: int, d: int) -> bool:
    """Invertibility of ``build_circulant(n, d)``.

    Uses the closed-form rule for prime d (invertible iff d is odd and does
    not divide n); any other d falls back to elimination.
    """
    if not 1 <= d <= n:
        raise ValueError(f"run length d must satisfy 1 <= d <= n, got d={d}, n={n}")
    if _is_prime(d):
        if n % d == 0:
            return False
        return d % 2 == 1
    return determinant(build_circulant(n, d)) == 1


def _toeplitz_from_word(n: int, w: int) -> BitMatrix:
    # bit j of w is the diagonal k - i = j - (n - 1)
    mask = (1 << n) - 1
    return BitMatrix(n, n, tuple(((w >> (n - 1 - i)) & mask) for i in range(n)))


def random_toeplitz(n: int, rng: np.random.Generator) -> BitMatrix:
    """Uniformly random binary Toeplitz matrix (its 2n-1 diagonals are i.i.d. bits)."""
    if n < 1:
        raise ValueError(f"matrix size must be >= 1, got {n}")
    bits = rng.integers(0, 2, size=2 * n - 1)
    word = 0
    for j, b in enumerate(bits):
        word |= int(b) << j
    return _toeplitz_from_word(n, word)


def toeplitz_nonsingular_fraction(n: int, trials: int, seed: int) -> float:
    """Fraction of uniformly random binary Toeplitz matrices that are non-singular.

    Enumerates all 2^(2n-1) Toeplitz matrices exactly whenever that count
    does not exceed ``trials``; otherwise draws ``trials`` matrices from a
    generator seeded with ``seed``.
    """
    if n < 1:
        raise ValueError(f"matrix size must be >= 1, got {n}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if seed < 0:
        raise ValueError(f"seed must be >= 0, got {seed}")
    nbits = 2 * n - 1
    space = 1 << nbits
    if space <= trials:
        hits = sum(determinant(_toeplitz_from_word(n, w)) for w in range(space))
        return hits / space
    rng = np.random.default_rng(seed)
    hits = 0
    chunk = 1 << 14
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        if nbits <= 63:
            words = rng.integers(0, space, size=size, dtype=np.uint64)
            hits += sum(determinant(_toeplitz_from_word(n, int(w))) for w in words)
        else:
            bits = rng.integers(0, 2, size=(size, nbits), dtype=np.uint8)
            for row in bits:
                word = 0
                for j, b in enumerate(row):
                    word |= int(b) << j
                hits += determinant(_toeplitz_from_word(n, word))
        done += size
    return hits / trials
