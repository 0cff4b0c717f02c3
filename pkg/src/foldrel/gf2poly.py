"""Mod-2 polynomials in (x, t) and in Stiefel-Whitney generators, plus GF(2) row spaces.

Bit-vectors are Python ints: bit ``i`` is coordinate ``i``.  An :class:`XtPoly`
stores one int per power of ``x``; bit ``j`` of ``rows[i]`` is the coefficient
of ``x**i * t**j``.  Total degree is ``xweight * i + j`` and every polynomial
carries a mandatory degree cap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np


def clmul(a: int, b: int) -> int:
    """Carry-less product of two GF(2)[t] polynomials packed into ints."""
    if a.bit_count() < b.bit_count():
        a, b = b, a
    out = 0
    while b:
        low = b & -b
        out ^= a << (low.bit_length() - 1)
        b ^= low
    return out


def _mask(nbits: int) -> int:
    return (1 << nbits) - 1 if nbits > 0 else 0


# (x, t) polynomials ------------------------------------------------------------

@dataclass(frozen=True)
class XtPoly:
    xweight: int
    cap: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if self.xweight < 1 or self.cap < 0:
            raise ValueError("xweight must be >= 1 and cap >= 0")
        xmax = self.cap // self.xweight
        rows = list(self.rows[: xmax + 1])
        for i, r in enumerate(rows):
            rows[i] = r & _mask(self.cap - self.xweight * i + 1)
        while rows and not rows[-1]:
            rows.pop()
        object.__setattr__(self, "rows", tuple(rows))

    @classmethod
    def zero(cls, xweight: int, cap: int) -> "XtPoly":
        return cls(xweight, cap, ())

    @classmethod
    def one(cls, xweight: int, cap: int) -> "XtPoly":
        return cls(xweight, cap, (1,))

    @classmethod
    def from_terms(cls, xweight: int, cap: int, terms: Iterable[tuple[int, int]]) -> "XtPoly":
        """Sum of monomials ``x**i t**j`` (repeated terms cancel)."""
        rows: dict[int, int] = {}
        for i, j in terms:
            rows[i] = rows.get(i, 0) ^ (1 << j)
        width = max(rows, default=-1) + 1
        return cls(xweight, cap, tuple(rows.get(i, 0) for i in range(width)))

    @classmethod
    def from_t(cls, xweight: int, cap: int, tpoly: int, xpow: int = 0) -> "XtPoly":
        """``x**xpow`` times the t-polynomial packed in ``tpoly``."""
        return cls(xweight, cap, (0,) * xpow + (tpoly,))

    @property
    def xcap(self) -> int:
        return self.cap // self.xweight

    def is_zero(self) -> bool:
        return not self.rows

    def coeff(self, i: int, j: int) -> int:
        if i < 0 or j < 0 or i >= len(self.rows):
            return 0
        return (self.rows[i] >> j) & 1

    def terms(self) -> list[tuple[int, int]]:
        out = []
        for i, r in enumerate(self.rows):
            while r:
                low = r & -r
                out.append((i, low.bit_length() - 1))
                r ^= low
        return out

    def _check(self, other: "XtPoly") -> None:
        if self.xweight != other.xweight or self.cap != other.cap:
            raise ValueError(
                f"mismatched XtPoly shapes: ({self.xweight}, {self.cap}) vs "
                f"({other.xweight}, {other.cap})"
            )

    def __add__(self, other: "XtPoly") -> "XtPoly":
        self._check(other)
        a, b = self.rows, other.rows
        if len(a) < len(b):
            a, b = b, a
        return XtPoly(self.xweight, self.cap, tuple(r ^ (b[i] if i < len(b) else 0) for i, r in enumerate(a)))

    __sub__ = __add__

    def __mul__(self, other: "XtPoly") -> "XtPoly":
        return xt_mul(self, other)

    def __pow__(self, e: int) -> "XtPoly":
        out = XtPoly.one(self.xweight, self.cap)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def slice(self, n: int) -> int:
        return xt_slice(self, n)

    def __repr__(self) -> str:
        if not self.rows:
            return "0"
        parts = []
        for i, j in sorted(self.terms(), key=lambda ij: (self.xweight * ij[0] + ij[1], ij[0])):
            xs = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            ts = "" if j == 0 else ("t" if j == 1 else f"t^{j}")
            parts.append(xs + ts or "1")
        return " + ".join(parts)


def xt_mul(p: XtPoly, q: XtPoly) -> XtPoly:
    """Truncated product of two polynomials with equal x-weight and cap."""
    p._check(q)
    w, cap = p.xweight, p.cap
    xmax = cap // w
    out = [0] * min(len(p.rows) + len(q.rows) - 1, xmax + 1) if p.rows and q.rows else []
    for i, a in enumerate(p.rows):
        if not a:
            continue
        for j, b in enumerate(q.rows):
            if i + j > xmax:
                break
            if b:
                out[i + j] ^= clmul(a, b) & _mask(cap - w * (i + j) + 1)
    return XtPoly(w, cap, tuple(out))


def xt_series_inv(p: XtPoly) -> XtPoly:
    """Inverse of ``p`` up to the degree cap; ``p`` must have constant term 1.

    Newton iteration ``q <- p * q**2``: if ``p q = 1 + e`` then the next error
    is ``e**2``, so the valuation doubles every step.
    """
    if p.coeff(0, 0) != 1:
        raise ValueError("xt_series_inv needs constant term 1")
    one = XtPoly.one(p.xweight, p.cap)
    q = one
    while True:
        if p * q == one:
            return q
        q = p * (q * q)


def xt_slice(p: XtPoly, n: int) -> int:
    """Degree-``n`` part as a bit-vector over ``x t^(n-w), x^2 t^(n-2w), ...``.

    Bit ``i - 1`` holds the coefficient of ``x**i t**(n - w i)``; the pure
    ``t**n`` term lies outside this basis and is dropped.
    """
    if n > p.cap:
        raise ValueError(f"slice degree {n} exceeds cap {p.cap}")
    out = 0
    for i in range(1, min(len(p.rows), n // p.xweight + 1)):
        if (p.rows[i] >> (n - p.xweight * i)) & 1:
            out |= 1 << (i - 1)
    return out


def slice_basis(n: int, xweight: int) -> list[tuple[int, int]]:
    """Exponents ``(i, n - xweight*i)`` for ``i = 1 .. n // xweight``."""
    return [(i, n - xweight * i) for i in range(1, n // xweight + 1)]


# Stiefel-Whitney polynomials ---------------------------------------------------
#
# A monomial w_{p1} w_{p2} ... is a non-decreasing tuple of positive indices;
# the empty tuple is the unit.

def mono_mul(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(sorted(a + b))


@dataclass(frozen=True)
class WPoly:
    terms: frozenset
    cap: int

    def __post_init__(self):
        object.__setattr__(self, "terms", frozenset(m for m in self.terms if sum(m) <= self.cap))

    @classmethod
    def one(cls, cap: int) -> "WPoly":
        return cls(frozenset([()]), cap)

    @classmethod
    def from_monomials(cls, monos: Iterable[Sequence[int]], cap: int) -> "WPoly":
        """Mod-2 sum: repeated monomials cancel in pairs."""
        acc: set = set()
        for m in monos:
            acc ^= {tuple(sorted(m))}
        return cls(frozenset(acc), cap)

    def __add__(self, other: "WPoly") -> "WPoly":
        return WPoly(self.terms ^ other.terms, min(self.cap, other.cap))

    def __mul__(self, other: "WPoly") -> "WPoly":
        cap = min(self.cap, other.cap)
        acc: set = set()
        for a in self.terms:
            da = sum(a)
            for b in other.terms:
                if da + sum(b) <= cap:
                    acc ^= {mono_mul(a, b)}
        return WPoly(frozenset(acc), cap)

    def degree_part(self, d: int) -> "WPoly":
        return WPoly(frozenset(m for m in self.terms if sum(m) == d), self.cap)

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        def fmt(m):
            return "*".join(f"w{i}" for i in m) or "1"
        return " + ".join(fmt(m) for m in sorted(self.terms, key=lambda m: (sum(m), len(m), m)))


def partitions(n: int, min_part: int = 1, fixed_length: int | None = None,
               max_part: int | None = None) -> Iterator[tuple[int, ...]]:
    """Partitions of ``n`` as non-decreasing tuples, in lexicographic order.

    ``partitions(0)`` yields the empty tuple (the unit monomial).
    """
    if n < 0:
        return
    top = n if max_part is None else max_part

    def rec(rem: int, lo: int, slots: int | None) -> Iterator[tuple[int, ...]]:
        if rem == 0:
            if slots in (None, 0):
                yield ()
            return
        if slots == 0:
            return
        hi = min(rem, top)
        if slots is not None:
            # every remaining part is >= p, so p * slots <= rem
            hi = min(hi, rem // slots)
        for p in range(lo, hi + 1):
            rest = rem - p
            nxt = None if slots is None else slots - 1
            if rest and rest < p:
                continue
            for tail in rec(rest, p, nxt):
                yield (p,) + tail

    yield from rec(n, max(min_part, 1), fixed_length)


# GF(2) row spaces --------------------------------------------------------------

def _pack_rows(bits: np.ndarray) -> np.ndarray:
    """Pack an (r, c) 0/1 array into (r, ceil(c/64)) little-endian uint64 words."""
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    packed = np.packbits(bits, axis=1, bitorder="little")
    pad = (-packed.shape[1]) % 8 or (8 if packed.shape[1] == 0 else 0)
    if pad:
        packed = np.pad(packed, ((0, 0), (0, pad)))
    return np.ascontiguousarray(packed).view("<u8")


def _words_to_int(words: np.ndarray) -> int:
    return int.from_bytes(words.astype("<u8").tobytes(), "little")


def _int_to_words(v: int, nwords: int) -> np.ndarray:
    return np.frombuffer(v.to_bytes(8 * nwords, "little"), dtype="<u8").copy()


class Gf2Matrix:
    """Row space over GF(2) kept in fully reduced row-echelon form.

    The pivot of a row is its lowest set bit (first basis element in order);
    no other stored row has that bit set.
    """

    def __init__(self, ncols: int, labels: Sequence | None = None):
        if labels is not None and len(labels) != ncols:
            raise ValueError("labels must match ncols")
        self.ncols = ncols
        self.labels = list(labels) if labels is not None else None
        self._piv: dict[int, int] = {}

    @property
    def rank(self) -> int:
        return len(self._piv)

    @property
    def full(self) -> bool:
        return len(self._piv) == self.ncols

    def _check(self, row: int) -> None:
        if row < 0 or row >> self.ncols:
            raise ValueError(f"row does not fit in {self.ncols} columns")

    def reduce(self, row: int) -> int:
        """Normal form of ``row`` modulo the row space."""
        self._check(row)
        r = row
        for c, prow in self._piv.items():
            if (r >> c) & 1:
                r ^= prow
        return r

    def contains(self, row: int) -> bool:
        return self.reduce(row) == 0

    def insert(self, row: int) -> bool:
        """Add ``row``; returns True iff it was independent (the rank grew)."""
        r = self.reduce(row)
        if not r:
            return False
        c = (r & -r).bit_length() - 1
        for pc, prow in self._piv.items():
            if (prow >> c) & 1:
                self._piv[pc] = prow ^ r
        self._piv[c] = r
        return True

    def insert_many(self, bits: np.ndarray) -> int:
        """Insert the rows of a 0/1 array of shape (r, ncols); returns rank gained."""
        bits = np.asarray(bits)
        if bits.ndim != 2 or bits.shape[1] != self.ncols:
            raise ValueError(f"expected shape (r, {self.ncols}), got {bits.shape}")
        if not bits.shape[0] or self.full:
            return 0
        block = _pack_rows(bits & 1)
        block = block[block.any(axis=1)]
        nw = block.shape[1]
        for c, prow in self._piv.items():
            if not block.shape[0]:
                return 0
            w, b = divmod(c, 64)
            hit = ((block[:, w] >> np.uint64(b)) & np.uint64(1)).astype(bool)
            if hit.any():
                block[hit] ^= _int_to_words(prow, nw)
        gained = 0
        block = block[block.any(axis=1)]
        while block.shape[0] and not self.full:
            r = _words_to_int(block[0])
            c = (r & -r).bit_length() - 1
            w, b = divmod(c, 64)
            hit = ((block[:, w] >> np.uint64(b)) & np.uint64(1)).astype(bool)
            block[hit] ^= block[0]
            block = block[block.any(axis=1)]
            for pc, prow in self._piv.items():
                if (prow >> c) & 1:
                    self._piv[pc] = prow ^ r
            self._piv[c] = r
            gained += 1
        return gained

    def rows(self) -> list[int]:
        return [self._piv[c] for c in sorted(self._piv)]

    def pivots(self) -> list[int]:
        return sorted(self._piv)

    def complement(self) -> list[int]:
        """Non-pivot columns; their basis vectors represent a basis of the quotient."""
        return [c for c in range(self.ncols) if c not in self._piv]

    def copy(self) -> "Gf2Matrix":
        m = Gf2Matrix(self.ncols, self.labels)
        m._piv = dict(self._piv)
        return m

    def same_space(self, other: "Gf2Matrix") -> bool:
        """Row-space equality, checked as containment in both directions."""
        if self.ncols != other.ncols:
            return False
        return all(other.contains(r) for r in self.rows()) and all(
            self.contains(r) for r in other.rows())

    def to_array(self) -> np.ndarray:
        rows = self.rows()
        out = np.zeros((len(rows), self.ncols), dtype=np.uint8)
        for i, r in enumerate(rows):
            for c in range(self.ncols):
                out[i, c] = (r >> c) & 1
        return out
