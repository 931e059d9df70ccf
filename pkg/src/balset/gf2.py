"""GF(2) words, linear codes, and generator-matrix utilities.

A word of length n lives in F_2^n and is stored as a Python integer:
coordinate j (1-based) sits at bit position j - 1, so coordinate 1 is the
least-significant bit.  Text renderings (and the matrix file format) put
coordinate 1 leftmost.  Integers are arbitrary precision, so n is only
limited by the caps of the exhaustive algorithms built on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

__all__ = [
    "CapExceededError",
    "LinearCode",
    "SPAN_CAP",
    "Word",
    "distance",
    "enumerate_span",
    "load_generator_matrix",
    "parse_generator_matrix",
    "row_reduce",
    "bulk_syndromes",
    "parity_limb_tables",
    "save_generator_matrix",
    "span_array",
    "syndrome_bits",
    "syndrome_tables",
    "weight",
    "weight_words",
    "weight_words_chunks",
]

# enumerate_span / span_array refuse codes with more basis rows than this
SPAN_CAP = 30


class CapExceededError(ValueError):
    """An operation was asked to enumerate more state than its cap allows."""


@dataclass(frozen=True)
class Word:
    """An element of F_2^n.

    Attributes:
        n: number of coordinates.
        bits: packed value; bit j - 1 stores coordinate j.
    """

    n: int
    bits: int

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError(f"negative word length {self.n}")
        if not 0 <= self.bits < (1 << self.n):
            raise ValueError(f"bits 0x{self.bits:x} out of range for length {self.n}")

    @classmethod
    def from_string(cls, text: str) -> "Word":
        """Parse a '0'/'1' string, leftmost character = coordinate 1."""
        if text and set(text) - {"0", "1"}:
            raise ValueError(f"illegal characters in row {text!r}")
        return cls(len(text), int(text[::-1], 2) if text else 0)

    def weight(self) -> int:
        return self.bits.bit_count()

    def __xor__(self, other: "Word") -> "Word":
        if self.n != other.n:
            raise ValueError(f"length mismatch: {self.n} != {other.n}")
        return Word(self.n, self.bits ^ other.bits)

    # addition over F_2 is XOR
    __add__ = __xor__

    def __str__(self) -> str:
        return format(self.bits, f"0{self.n}b")[::-1] if self.n else ""


def weight(w: Word) -> int:
    """Hamming weight of a word."""
    return w.weight()


def distance(a: Word, b: Word) -> int:
    """Hamming distance; equals weight(a + b)."""
    return (a + b).weight()


def row_reduce(rows: Iterable[Word]) -> tuple[tuple[Word, ...], int]:
    """Bring generator rows to reduced row-echelon form.

    The pivot of a row is its lowest-index set coordinate; pivots come out
    strictly ascending and each pivot coordinate is set in exactly one basis
    row, so the output is the canonical RREF of the row space (idempotent,
    independent of input order up to that canonical form).

    Returns:
        (basis, rank): basis rows sorted by ascending pivot, and their count.
    """
    rows = tuple(rows)
    if not rows:
        return (), 0
    n = rows[0].n
    for r in rows:
        if r.n != n:
            raise ValueError(f"row length mismatch: {r.n} != {n}")
    basis, pivots = _reduce_ints([r.bits for r in rows])
    return tuple(Word(n, b) for b in basis), len(basis)


def _reduce_ints(rows: Iterable[int]) -> tuple[list[int], list[int]]:
    """RREF on integer-packed rows; returns (basis, pivots), both ascending."""
    basis: list[int] = []
    pivots: list[int] = []
    for row in rows:
        for p, b in zip(pivots, basis):
            if (row >> p) & 1:
                row ^= b
        if row == 0:
            continue
        p = (row & -row).bit_length() - 1
        pos = next((i for i, q in enumerate(pivots) if q > p), len(pivots))
        # clear the new pivot coordinate from the rows already in the basis
        for i, b in enumerate(basis):
            if (b >> p) & 1:
                basis[i] = b ^ row
        basis.insert(pos, row)
        pivots.insert(pos, p)
    return basis, pivots


@dataclass(frozen=True)
class LinearCode:
    """A binary linear code presented by (possibly dependent) generator rows.

    The original rows are retained verbatim; dimension claims always go
    through the row-reduced basis.
    """

    n: int
    rows: tuple[Word, ...]

    def __post_init__(self) -> None:
        for r in self.rows:
            if r.n != self.n:
                raise ValueError(f"row length {r.n} != code length {self.n}")

    @classmethod
    def from_strings(cls, rows: Iterable[str]) -> "LinearCode":
        words = tuple(Word.from_string(r) for r in rows)
        if not words:
            return cls(0, ())
        return cls(words[0].n, words)

    @classmethod
    def from_ints(cls, n: int, rows: Iterable[int]) -> "LinearCode":
        return cls(n, tuple(Word(n, b) for b in rows))

    @cached_property
    def _reduced(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        basis, pivots = _reduce_ints([r.bits for r in self.rows])
        return tuple(basis), tuple(pivots)

    @property
    def basis(self) -> tuple[Word, ...]:
        return tuple(Word(self.n, b) for b in self._reduced[0])

    @property
    def pivots(self) -> tuple[int, ...]:
        """Pivot coordinates (0-based bit positions) of the RREF basis."""
        return self._reduced[1]

    @property
    def k(self) -> int:
        return len(self._reduced[0])

    def reduce_bits(self, bits: int) -> int:
        """Canonical coset representative: XOR out every matching pivot."""
        for p, b in zip(self._reduced[1], self._reduced[0]):
            if (bits >> p) & 1:
                bits ^= b
        return bits

    def contains(self, w: Word) -> bool:
        if w.n != self.n:
            raise ValueError(f"length mismatch: {w.n} != {self.n}")
        return self.reduce_bits(w.bits) == 0

    def extended(self, x: Word) -> "LinearCode":
        """The code C + Fx (rows keep their order, x appended)."""
        if x.n != self.n:
            raise ValueError(f"length mismatch: {x.n} != {self.n}")
        return LinearCode(self.n, self.rows + (x,))

    def dual_basis(self) -> tuple[Word, ...]:
        """A basis of the dual code (words orthogonal to every codeword).

        One dual row per non-pivot coordinate f: bit f set, plus, for every
        basis row carrying a 1 at f, a 1 at that row's pivot coordinate.
        """
        basis, pivots = self._reduced
        pivot_set = set(pivots)
        out = []
        for f in range(self.n):
            if f in pivot_set:
                continue
            h = 1 << f
            for p, b in zip(pivots, basis):
                if (b >> f) & 1:
                    h |= 1 << p
            out.append(Word(self.n, h))
        return tuple(out)


def enumerate_span(code: LinearCode, cap: int = SPAN_CAP) -> Iterator[Word]:
    """Yield all 2^k codewords, successive words differing by one basis row.

    Walks the basis combinations in reflected Gray order so each step is a
    single XOR.
    """
    basis = [b.bits for b in code.basis]
    k = len(basis)
    if k > cap:
        raise CapExceededError(f"span of dimension {k} exceeds cap {cap}")
    acc = 0
    yield Word(code.n, 0)
    for i in range(1, 1 << k):
        acc ^= basis[(i & -i).bit_length() - 1]
        yield Word(code.n, acc)


def span_array(code: LinearCode, cap: int = SPAN_CAP) -> np.ndarray:
    """All 2^k codewords as a uint64 array (binary-counter order)."""
    basis = code.basis
    if len(basis) > cap:
        raise CapExceededError(f"span of dimension {len(basis)} exceeds cap {cap}")
    out = np.zeros(1, dtype=np.uint64)
    for b in basis:
        out = np.concatenate([out, out ^ np.uint64(b.bits)])
    return out


def syndrome_bits(code: LinearCode, bits: int) -> int:
    """Syndrome of a word w.r.t. the code's dual basis: bit j is the parity
    of the overlap with dual row j; zero exactly on codewords."""
    return sum(
        ((h.bits & bits).bit_count() & 1) << j
        for j, h in enumerate(code.dual_basis())
    )


def parity_limb_tables(rows: Iterable[int], n: int) -> list[np.ndarray]:
    """Per-16-bit-limb lookup tables for bulk parity checks against `rows`.

    tables[i][v] is the check-bit contribution of limb i holding value v
    (bit j = parity of the overlap with rows[j]), so the full check vector
    of a word array is the XOR of one table lookup per limb.
    """
    rows = list(rows)
    if len(rows) > 32:
        raise CapExceededError(f"check width {len(rows)} exceeds 32 bits")
    col_syn = [
        sum(((h >> c) & 1) << j for j, h in enumerate(rows)) for c in range(n)
    ]
    tables = []
    for limb in range((n + 15) // 16):
        width = min(16, n - 16 * limb)
        t = np.zeros(1 << width, dtype=np.uint32)
        for v in range(1, 1 << width):
            low = (v & -v).bit_length() - 1
            t[v] = t[v & (v - 1)] ^ col_syn[16 * limb + low]
        tables.append(t)
    return tables


def syndrome_tables(code: LinearCode) -> tuple[list[np.ndarray], int]:
    """parity_limb_tables against the code's dual basis, plus the syndrome
    width r = n - k."""
    duals = [h.bits for h in code.dual_basis()]
    return parity_limb_tables(duals, code.n), len(duals)


def bulk_syndromes(tables: list[np.ndarray], words: np.ndarray) -> np.ndarray:
    """Apply syndrome_tables output to a uint64 word array."""
    mask = np.uint64(0xFFFF)
    syn = tables[0][words & mask]
    for limb in range(1, len(tables)):
        syn ^= tables[limb][(words >> np.uint64(16 * limb)) & mask]
    return syn


def parse_generator_matrix(text: str) -> LinearCode:
    """Parse the shared matrix format: '0'/'1' rows, '#' comment lines."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if set(line) - {"0", "1"}:
            raise ValueError(f"line {lineno}: illegal characters in {line!r}")
        rows.append(line)
    if not rows:
        return LinearCode(0, ())
    width = len(rows[0])
    for lineno, r in enumerate(rows, start=1):
        if len(r) != width:
            raise ValueError(f"ragged matrix: row of length {len(r)} vs {width}")
    return LinearCode.from_strings(rows)


def load_generator_matrix(path) -> LinearCode:
    with open(path, "r", encoding="ascii") as fh:
        return parse_generator_matrix(fh.read())


def save_generator_matrix(
    code: LinearCode | Iterable[Word], path, header: str | Iterable[str] | None = None
) -> None:
    """Write rows in the shared matrix format (round-trips bit-exactly)."""
    rows = code.rows if isinstance(code, LinearCode) else tuple(code)
    with open(path, "w", encoding="ascii") as fh:
        if header:
            lines = header.splitlines() if isinstance(header, str) else header
            for line in lines:
                fh.write(f"# {line}\n")
        for r in rows:
            fh.write(f"{r}\n")


# ---------------------------------------------------------------------------
# constant-weight enumeration
#
# Words of fixed weight w are produced in ascending integer order with a
# lane-parallel Gosper step: the rank range is split into lanes, each lane
# start is unranked combinatorially, and all lanes advance one word per
# vectorized step.  This keeps generation fast without materializing more
# than a chunk at a time.

def _unrank_weight_word(n: int, w: int, rank: int) -> int:
    """The rank-th (0-based) smallest n-bit integer with w bits set."""
    bits = 0
    for p in range(n - 1, -1, -1):
        if w == 0:
            break
        c = math.comb(p, w)
        if c <= rank:
            bits |= 1 << p
            rank -= c
            w -= 1
    return bits


def _gosper_step(v: np.ndarray) -> np.ndarray:
    """Next same-weight word for every lane (none may be at the last word)."""
    c = v & (~v + np.uint64(1))
    r = v + c
    shift = np.bitwise_count(c - np.uint64(1)) + np.uint64(2)
    return r | ((v ^ r) >> shift)


def weight_words_chunks(n: int, w: int, chunk: int = 1 << 22) -> Iterator[np.ndarray]:
    """Yield all C(n, w) weight-w words in ascending order, chunk by chunk."""
    if not 0 <= w <= n:
        raise ValueError(f"weight {w} out of range for length {n}")
    total = math.comb(n, w)
    done = 0
    while done < total:
        cnt = min(chunk, total - done)
        yield _fill_weight_words(n, w, done, cnt)
        done += cnt


def weight_words(n: int, w: int) -> np.ndarray:
    """All C(n, w) weight-w words of length n, ascending (uint64)."""
    if not 0 <= w <= n:
        raise ValueError(f"weight {w} out of range for length {n}")
    return _fill_weight_words(n, w, 0, math.comb(n, w))


def _fill_weight_words(n: int, w: int, start_rank: int, count: int) -> np.ndarray:
    out = np.empty(count, dtype=np.uint64)
    if count == 0:
        return out
    if w == 0:
        out[0] = 0
        return out
    lanes = min(count, 4096)
    bounds = [start_rank + (count * i) // lanes for i in range(lanes + 1)]
    v = np.array([_unrank_weight_word(n, w, b) for b in bounds[:-1]], dtype=np.uint64)
    pos = np.array(bounds[:-1], dtype=np.int64) - start_rank
    remaining = np.diff(bounds)
    step = 0
    max_len = int(remaining.max())
    while step < max_len:
        active = remaining > step
        out[pos[active] + step] = v[active]
        # advance only lanes that still need another word after this one
        more = remaining > step + 1
        if more.any():
            v[more] = _gosper_step(v[more])
        step += 1
    return out
