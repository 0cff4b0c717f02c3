"""Steenrod squares of Stiefel-Whitney classes and the image of the Dold relations.

The Dold relations in degree ``n`` are the degree-``n`` parts of
``w^{-1} Sq(p)`` for monomials ``p`` of degree at most ``n - 1``, where
``w = 1 + w_1 + w_2 + ...``.  The collapse map ``rho_k`` kills ``w_1..w_k`` and
sends ``w_s`` to ``x t^(s-k-1)`` (with ``deg x = k + 1``, ``deg t = 1``); its
degree-``n`` image has basis ``x^j t^(n-(k+1)j)``, ``1 <= j <= n // (k+1)``.

:func:`dold_image` builds the span of ``rho_k`` of all Dold relations in four
independent ways; see its docstring.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .gf2poly import (
    Gf2Matrix,
    WPoly,
    XtPoly,
    clmul,
    partitions,
    slice_basis,
    xt_series_inv,
    xt_slice,
)
from .parity2 import binom_parity, binom_parity_int


# Stiefel-Whitney side ----------------------------------------------------------

def sq_w(u: int, cap: int) -> WPoly:
    """Total square of ``w_u`` by the Wu formula, truncated at degree ``cap``.

    Sq^d(w_u) = sum_j C(u-d+j-1, j) w_{u+j} w_{d-j}.  The only negative upper
    index is C(-1, 0) (at d = u, j = 0, giving Sq^u w_u = w_u^2); it is 1, so
    the analytic binomial is used.
    """
    if u < 1:
        raise ValueError("sq_w needs u >= 1")
    monos = []
    for d in range(u + 1):
        for j in range(d + 1):
            if binom_parity_int(u - d + j - 1, j):
                monos.append((u + j,) if d == j else (d - j, u + j))
    return WPoly.from_monomials(monos, cap)


def sq_monomial(p: tuple[int, ...], cap: int) -> WPoly:
    """Total square of a monomial, using multiplicativity (Cartan formula)."""
    if sum(p) > cap:
        raise ValueError("monomial degree exceeds cap")
    out = WPoly.one(cap)
    for u in p:
        out = out * sq_w(u, cap)
    return out


@lru_cache(maxsize=None)
def w_inverse(cap: int) -> WPoly:
    """Formal inverse of 1 + w_1 + w_2 + ... up to degree ``cap``.

    Degree parts satisfy ``v_d = sum_{i=1..d} w_i v_{d-i}`` (signs vanish mod 2).
    """
    parts = [frozenset([()])]
    for d in range(1, cap + 1):
        acc: set = set()
        for i in range(1, d + 1):
            for m in parts[d - i]:
                acc ^= {tuple(sorted(m + (i,)))}
        parts.append(frozenset(acc))
    return WPoly(frozenset().union(*parts), cap)


def total_w(cap: int) -> WPoly:
    return WPoly(frozenset([()] + [(i,) for i in range(1, cap + 1)]), cap)


def dold_element(p: tuple[int, ...], n: int) -> WPoly:
    """Degree-``n`` part of ``w^{-1} Sq(p)`` for a monomial ``p`` of degree < n."""
    p = tuple(sorted(p))
    if sum(p) >= n:
        raise ValueError(f"deg p = {sum(p)} must be at most n - 1 = {n - 1}")
    sq = sq_monomial(p, n)
    inv = _inverse_by_degree(n)
    acc: set = set()
    for a in sq.terms:
        for b in inv[n - sum(a)]:
            acc ^= {tuple(sorted(a + b))}
    return WPoly(frozenset(acc), n)


@lru_cache(maxsize=8)
def _inverse_by_degree(cap: int) -> list[list[tuple[int, ...]]]:
    out: list[list[tuple[int, ...]]] = [[] for _ in range(cap + 1)]
    for m in w_inverse(cap).terms:
        out[sum(m)].append(m)
    return out


# rho_k -------------------------------------------------------------------------

@dataclass(frozen=True)
class RhoK:
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("rho_k needs k >= 1")

    @property
    def xweight(self) -> int:
        return self.k + 1

    def monomial(self, m: tuple[int, ...]) -> tuple[int, int] | None:
        """Exponents (i, j) of rho_k(m) = x^i t^j, or None when m is killed."""
        if any(part <= self.k for part in m):
            return None
        return len(m), sum(m) - self.xweight * len(m)


def rho(rk: RhoK, wp: WPoly) -> XtPoly:
    images = (rk.monomial(m) for m in wp.terms)
    return XtPoly.from_terms(rk.xweight, wp.cap, (e for e in images if e is not None))


def rho_sq_w(u: int, k: int, cap: int) -> XtPoly:
    """rho_k(Sq w_u), computed from the Wu formula monomial by monomial."""
    return rho(RhoK(k), sq_w(u, cap))


def small_factor(u: int, k: int) -> int:
    """The t-polynomial h with rho_k(Sq w_u) = x h(t) for 1 <= u <= k."""
    h = 0
    for d in range(max(0, k + 1 - u), u):
        if binom_parity(u - 1, d):
            h ^= 1 << (u + d - k - 1)
    return h


def rho_sq_w_closed(u: int, k: int, cap: int) -> XtPoly:
    """Closed form of rho_k(Sq w_u).

    For u >= k+1, with c = u - k - 1, it is ``x (t(1+t))^c ((1+t)^k + x)``;
    for u <= k it is ``x h(t)`` with ``h`` from :func:`small_factor`.
    """
    w = k + 1
    if u <= k:
        return XtPoly.from_t(w, cap, small_factor(u, k), xpow=1)
    c = u - w
    tt = _tpow(0b110, c)
    one_t_k = _tpow(0b11, k)
    return XtPoly(w, cap, (0, clmul(tt, one_t_k), tt))


def rho_w_inverse(k: int, cap: int) -> XtPoly:
    """rho_k(w^{-1}) = (1+t)/(1+t+x) as a truncated series."""
    return xt_series_inv(rho(RhoK(k), total_w(cap)))


def _tpow(base: int, e: int) -> int:
    out = 1
    while e:
        if e & 1:
            out = clmul(out, base)
        base = clmul(base, base)
        e >>= 1
    return out


# k = 1 closed-form relations ---------------------------------------------------

def VR(n: int) -> list[tuple[int, int]]:
    """All (s, m) with s, m >= 0 and s + 2m + 2 <= n - 1."""
    return [(s, m) for m in range(max(0, (n - 3) // 2 + 1)) for s in range(n - 2 * m - 2)]


def R_sm(n: int, s: int, m: int) -> int:
    """Degree-n slice of (t+1)^(s+1) t^s (x+t+1)^m x^(m+1), as a slice bit-vector.

    The coefficient of x^(m+1+i) t^(n-2m-2i-2) is C(m, i) C(s+1+m-i, n-2m-2i-2-s).
    """
    if s < 0 or m < 0 or s + 2 * m + 2 > n - 1:
        raise ValueError(f"(s, m) = ({s}, {m}) is outside V_R for n = {n}")
    out = 0
    for i in range(m + 1):
        if binom_parity(m, i) and binom_parity(s + 1 + m - i, n - 2 * m - 2 * i - 2 - s):
            out |= 1 << (m + i)
    return out


def R_0(n: int) -> int:
    """Slice of rho(w^{-1}): coefficient of x^j t^(n-2j) is C(n-j-1, n-2j)."""
    if n < 2:
        raise ValueError("R_0 needs n >= 2")
    out = 0
    for j in range(1, n // 2 + 1):
        if binom_parity(n - j - 1, n - 2 * j):
            out |= 1 << (j - 1)
    return out


def _bits_ge(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise parity of C(a, b) under the truncating convention."""
    return (b >= 0) & (b <= a) & ((b & ~a) == 0)


def r_sm_rows(n: int) -> np.ndarray:
    """All R(s, m), (s, m) in V_R, as a 0/1 array of shape (|V_R|, n // 2)."""
    J = n // 2
    blocks = []
    for m in range(max(0, (n - 3) // 2 + 1)):
        s = np.arange(n - 2 * m - 2)[:, None]
        i = np.arange(m + 1)[None, :]
        bit = _bits_ge(np.full_like(i, m), i) & _bits_ge(s + 1 + m - i, n - 2 * m - 2 * i - 2 - s)
        block = np.zeros((s.shape[0], J), dtype=np.uint8)
        block[:, m: 2 * m + 1] = bit[:, : J - m]
        blocks.append(block)
    if not blocks:
        return np.zeros((0, J), dtype=np.uint8)
    return np.vstack(blocks)


# span builders -----------------------------------------------------------------

def _int_to_bits(v: int, width: int) -> np.ndarray:
    raw = np.frombuffer(v.to_bytes((width + 7) // 8 or 1, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:width]


def _span_closed(n: int, mat: Gf2Matrix, include_r0: bool) -> None:
    if include_r0:
        mat.insert(R_0(n))
    rows = r_sm_rows(n)
    if rows.shape[0]:
        mat.insert_many(rows)


def _span_symbolic(n: int, k: int, mat: Gf2Matrix, include_r0: bool) -> None:
    """Enumerate every monomial p of degree <= n-1 and push rho_k of its relation.

    rho_k(w^{-1} Sq p) is assembled as rho_k(w^{-1}) times the product of the
    rho_k(Sq w_u) over the parts of p, each taken from the Wu formula.  A zero
    partial product stays zero, so that branch of the enumeration is cut.
    """
    w = k + 1
    A = rho_w_inverse(k, n)
    gens = {u: rho_sq_w(u, k, n) for u in range(1, n)}
    seen: set = set()

    def walk(prod: XtPoly, last: int, rem: int) -> None:
        for u in range(last, rem + 1):
            nxt = prod * gens[u]
            if nxt.is_zero():
                continue
            seen.add(nxt)
            walk(nxt, u, rem - u)

    walk(XtPoly.one(w, n), 1, n - 1)
    if include_r0:
        mat.insert(xt_slice(A, n))
    for prod in sorted(seen, key=lambda p: p.rows):
        mat.insert(xt_slice(A * prod, n))


def _flat(p: XtPoly, stride: int) -> int:
    out = 0
    for i, r in enumerate(p.rows):
        out |= r << (i * stride)
    return out


def _span_dp(n: int, k: int, mat: Gf2Matrix, include_r0: bool) -> None:
    """Degree-budget recursion W_d = sum_u G_u W_{d-u}, W_0 = span{1}, G_u = rho_k(Sq w_u)."""
    w = k + 1
    A = rho_w_inverse(k, n)
    gens = {u: rho_sq_w(u, k, n) for u in range(1, n)}
    W = {0: [XtPoly.one(w, n)]}
    if include_r0:
        mat.insert(xt_slice(A, n))
    for d in range(1, n):
        space = Gf2Matrix((n // w + 1) * (n + 1))
        basis = []
        for u in range(1, d + 1):
            for f in W[d - u]:
                g = f * gens[u]
                if not g.is_zero() and space.insert(_flat(g, n + 1)):
                    basis.append(g)
        W[d] = basis
        for f in basis:
            mat.insert(xt_slice(A * f, n))
        if mat.full:
            return


def _filtered_basis(cands: list[tuple[int, int]], tmax: int) -> list[tuple[int, int]]:
    """Greedy basis of (marker, t-poly) candidates in marker order.

    The kept vectors with marker <= b span every candidate with marker <= b.
    """
    cands.sort(key=lambda mv: mv[0])
    piv: dict[int, int] = {}
    kept = []
    mask = (1 << (tmax + 1)) - 1
    for marker, v in cands:
        r = v & mask
        while r:
            c = r.bit_length() - 1
            if c in piv:
                r ^= piv[c]
            else:
                piv[c] = r
                kept.append((marker, v & mask))
                break
    return kept


def _span_factored(n: int, k: int, mat: Gf2Matrix, include_r0: bool) -> None:
    """Factored span for general k.

    Parts u >= k+1 contribute x (t(1+t))^c ((1+t)^k + x) with c = u - k - 1,
    so a monomial with L2 such parts and small parts u_1..u_L1 maps to
    x^(L1+L2) ((1+t)^k + x)^L2 (t(1+t))^C h_{u_1}...h_{u_L1}, where C is the
    sum of the c's.  For fixed (L1, L2) the t-polynomial factors span a
    subspace S that is built once per L1 (filtered by weight), then pushed
    through the linear map s -> slice_n(rho(w^{-1}) x^L ((1+t)^k + x)^L2 s).
    """
    w = k + 1
    J = n // w
    if J == 0:
        return
    smalls = [(u, h) for u in range(1, k + 1) if (h := small_factor(u, k))]

    # rho(w^{-1}) = sum_j x^j (1+t)^(-j); the t^i coefficient of (1+t)^(-j) is C(i+j-1, i).
    i = np.arange(n + 1)[None, :]
    j = np.arange(J + 1)[:, None]
    A = _bits_ge(i + j - 1, np.broadcast_to(i, (J + 1, n + 1))).astype(np.uint8)
    A[0] = 0
    A[0, 0] = 1

    # Filtered bases, markers = weight budget used.  P: small parts only.
    # S: small parts plus any (t(1+t))^c, used once at least one large part is present.
    tt = 0b110
    S = [_filtered_basis([(c, _tpow(tt, c)) for c in range(n)], n)]
    P = [[(0, 1)]]
    for L1 in range(1, J + 1):
        if not smalls:
            break
        tmax = n - w * L1
        nxt_S = [(m + u, clmul(h, v)) for m, v in S[-1] for u, h in smalls if m + u <= n - 1]
        nxt_P = [(m + u, clmul(h, v)) for m, v in P[-1] for u, h in smalls if m + u <= n - 1]
        S.append(_filtered_basis(nxt_S, tmax))
        P.append(_filtered_basis(nxt_P, tmax))

    def as_bits(basis):
        if not basis:
            return np.zeros(0, dtype=np.int64), np.zeros((0, n + 1), dtype=np.uint8)
        markers = np.array([m for m, _ in basis], dtype=np.int64)
        return markers, np.vstack([_int_to_bits(v, n + 1) for _, v in basis])

    S_bits = [as_bits(b) for b in S]
    P_bits = [as_bits(b) for b in P]
    one_t_k = [e for e in range(k + 1) if binom_parity(k, e)]

    F = A.copy()
    for L2 in range(0, J + 1):
        if L2:
            G = np.zeros_like(F)
            G[1:] ^= F[:-1]
            for e in one_t_k:
                G[:, e:] ^= F[:, : n + 1 - e]
            F = G
            budget = n - 1 - w * L2
            if budget < 0:
                break
        for L1 in range(0, J - L2 + 1):
            L = L1 + L2
            if L2 == 0:
                if L1 >= len(P_bits):
                    break
                if L1 == 0 and not include_r0:
                    continue
                markers, bits = P_bits[L1]
                take = bits
            else:
                if L1 >= len(S_bits):
                    break
                markers, bits = S_bits[L1]
                take = bits[markers <= budget]
            if not take.shape[0]:
                continue
            T = n - w * L
            jj = np.arange(L, J + 1)
            aa = np.arange(T + 1)
            idx = n - w * jj[None, :] - aa[:, None]
            M = np.where(idx >= 0, F[(jj - L)[None, :], np.clip(idx, 0, None)], 0)
            prod = take[:, : T + 1].astype(np.float32) @ M.astype(np.float32)
            out = np.zeros((take.shape[0], J), dtype=np.uint8)
            out[:, L - 1 if L else 0:] = (prod.astype(np.int64) & 1)[:, (0 if L else 1):]
            mat.insert_many(out)
            if mat.full:
                return


METHODS = ("auto", "closed", "factored", "dp", "symbolic")


def dold_image(n: int, k: int = 1, include_r0: bool = True, method: str = "auto") -> Gf2Matrix:
    """Span of rho_k([w^{-1} Sq p]_n) over all monomials p of degree <= n - 1.

    Columns are the basis x^j t^(n-(k+1)j), j = 1..n // (k+1) (column j-1).

    Methods:
      ``closed``   -- k = 1 only: the families R(s, m) over V_R plus R_0.
      ``factored`` -- any k: closed forms of rho_k(Sq w_u), grouped by the
                      number of small and large parts (the fast path).
      ``dp``       -- any k: subspaces W_d of products of rho_k(Sq w_u) of
                      weight d, built by a degree-budget recursion.
      ``symbolic`` -- any k: every monomial p enumerated, each Sq w_u from the
                      Wu formula; exponential, meant for n <= 40.
    ``auto`` picks ``closed`` for k = 1 and ``factored`` otherwise.
    ``include_r0`` toggles the relation of p = 1.
    """
    if not n > k >= 1:
        raise ValueError(f"dold_image needs n > k >= 1, got n={n}, k={k}")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        method = "closed" if k == 1 else "factored"
    if method == "closed" and k != 1:
        raise ValueError("the closed-form families exist only for k = 1")
    labels = slice_basis(n, k + 1)
    mat = Gf2Matrix(len(labels), labels)
    if not labels:
        return mat
    if method == "closed":
        _span_closed(n, mat, include_r0)
    elif method == "factored":
        _span_factored(n, k, mat, include_r0)
    elif method == "dp":
        _span_dp(n, k, mat, include_r0)
    else:
        _span_symbolic(n, k, mat, include_r0)
    return mat
