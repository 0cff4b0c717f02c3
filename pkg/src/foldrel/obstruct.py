"""Obstruction verdicts for fold, cusp, Morin and corank-1 maps.

Everything here is a decision procedure over GF(2) (or, for Pontryagin
classes, over exact integers).  Each :class:`Verdict` carries the side
conditions it checked, and an obstruction is only ever reported together with
an explicit witness.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .dold import dold_element, dold_image
from .gf2poly import Gf2Matrix, partitions
from .parity2 import (
    binom_parity,
    binom_parity_int,
    is_power_of_two,
    r_exp,
    two_power_pair,
)


class MapClass(str, enum.Enum):
    FOLD = "fold"
    CUSP = "cusp"
    MORIN = "morin"
    TAME_CORANK1 = "tame-corank1"
    CORANK1 = "corank1"

    @property
    def delta(self) -> int:
        """0 for fold maps, 1 for every other class."""
        return 0 if self is MapClass.FOLD else 1


OBSTRUCTED = "obstructed"
NOT_OBSTRUCTED = "not-obstructed"
INCONCLUSIVE = "inconclusive"

# Results proved elsewhere; attached to reports as text, never recomputed.
EXTERNAL_NOTES = {
    "codim1-top-number": "w_n[M] != 0 is excluded by an external result unless n is 2, 4 or 8",
    "fold-top-number": "w_n[M] != 0 is excluded by an external result unless n - k is 1, 3 or 7",
    "morin-top-number": "w_n[M] != 0 is excluded by external results when n - k is 5 or 6 or at least 9",
    "generic-existence": "corank-1 maps exist by transversality since the source dimension is below 2(k+2)",
}


@dataclass(frozen=True)
class Hypothesis:
    name: str
    ok: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "ok": self.ok, "detail": self.detail}


@dataclass(frozen=True)
class Verdict:
    map_class: MapClass
    source: str
    target: str
    status: str
    rule: str
    hypotheses: tuple[Hypothesis, ...] = ()
    witness: dict | None = None
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.status == OBSTRUCTED and not self.witness:
            raise ValueError("an obstruction needs a witness")
        if self.status == OBSTRUCTED and not all(h.ok for h in self.hypotheses):
            raise ValueError("an obstruction cannot rest on a failed hypothesis")

    @property
    def obstructed(self) -> bool:
        return self.status == OBSTRUCTED

    def to_dict(self) -> dict:
        return {
            "map_class": self.map_class.value,
            "source": self.source,
            "target": self.target,
            "status": self.status,
            "rule": self.rule,
            "hypotheses": [h.to_dict() for h in self.hypotheses],
            "witness": self.witness,
            "notes": list(self.notes),
        }


def _guarded(mc, source, target, rule, hyps, witness=None, notes=()) -> Verdict:
    """Build a verdict; any failed hypothesis downgrades to inconclusive."""
    hyps = tuple(hyps)
    if not all(h.ok for h in hyps):
        status = INCONCLUSIVE
        witness = None
    else:
        status = OBSTRUCTED if witness else NOT_OBSTRUCTED
    return Verdict(mc, source, target, status, rule, hyps, witness, tuple(notes))


# Rings and characteristic numbers -----------------------------------------------

@dataclass(frozen=True)
class OneGenRing:
    """Cohomology Z_2[g]/(g^(N+1)) with the total Stiefel-Whitney class spelled out.

    ``coeff[d-1]`` is the coefficient c_d of w_d = c_d g^(d / gen_degree); it
    must vanish unless gen_degree divides d.  ``dim`` is the manifold dimension.
    """

    dim: int
    coeff: tuple[int, ...]
    orientable: bool
    gen_degree: int = 1
    name: str = "M"

    def __post_init__(self):
        if len(self.coeff) != self.dim:
            raise ValueError("need one coefficient per degree 1..dim")
        for d, c in enumerate(self.coeff, start=1):
            if c not in (0, 1):
                raise ValueError("coefficients are bits")
            if c and d % self.gen_degree:
                raise ValueError(f"no class in degree {d}")

    @classmethod
    def rp(cls, n: int) -> "OneGenRing":
        """H*(RP^n) with w_j = C(n+1, j) x^j; orientable iff n is odd."""
        if n < 1:
            raise ValueError("RP^n needs n >= 1")
        return cls(n, tuple(binom_parity(n + 1, j) for j in range(1, n + 1)), n % 2 == 1, 1, f"RP^{n}")

    @classmethod
    def cp(cls, n: int) -> "OneGenRing":
        """H*(CP^n; Z_2) with w_2j = C(n+1, j) y^j and no odd classes."""
        if n < 1:
            raise ValueError("CP^n needs n >= 1")
        coeff = tuple(binom_parity(n + 1, d // 2) if d % 2 == 0 else 0 for d in range(1, 2 * n + 1))
        return cls(2 * n, coeff, True, 2, f"CP^{n}")

    def w(self, d: int) -> int:
        if d == 0:
            return 1
        if d < 0 or d > self.dim:
            return 0
        return self.coeff[d - 1]

    def product(self, parts: Iterable[int]) -> int:
        parts = tuple(parts)
        if sum(parts) > self.dim:
            return 0
        return int(all(self.w(d) for d in parts))


@dataclass(frozen=True)
class CharNumbers:
    """The functional w_I -> w_I[M] on all partitions I of n."""

    n: int
    values: dict

    def __post_init__(self):
        expected = set(partitions(self.n))
        got = set(self.values)
        if got != expected:
            missing = sorted(expected - got)[:3]
            extra = sorted(got - expected)[:3]
            raise ValueError(f"incomplete characteristic numbers: missing {missing}, unexpected {extra}")
        if any(v not in (0, 1) for v in self.values.values()):
            raise ValueError("values must be 0 or 1")

    def __call__(self, part: tuple[int, ...]) -> int:
        return self.values[tuple(sorted(part))]

    def pair(self, terms) -> int:
        """Value on a mod-2 sum of monomials."""
        out = 0
        for m in terms:
            out ^= self(m)
        return out

    @classmethod
    def from_doc(cls, doc: dict) -> "CharNumbers":
        n = doc["n"]
        values: dict = {}
        for entry in doc["numbers"]:
            key = tuple(sorted(int(v) for v in entry["partition"]))
            if key in values:
                raise ValueError(f"partition {list(key)} listed twice")
            values[key] = int(entry["value"])
        return cls(n, values)

    @classmethod
    def load(cls, path: str | Path) -> "CharNumbers":
        return cls.from_doc(json.loads(Path(path).read_text()))

    @classmethod
    def from_ring(cls, ring: OneGenRing) -> "CharNumbers":
        return cls(ring.dim, {p: ring.product(p) for p in partitions(ring.dim)})

    @classmethod
    def zero(cls, n: int) -> "CharNumbers":
        return cls(n, {p: 0 for p in partitions(n)})

    def to_doc(self) -> dict:
        return {
            "n": self.n,
            "numbers": [{"partition": list(p), "value": v} for p, v in sorted(self.values.items())],
        }


# Quotient dimensions -------------------------------------------------------------

@dataclass(frozen=True)
class QuotientReport:
    n: int
    k: int
    dim_im_rho: int
    dim_relations: int
    quotient_dim: int
    complement: tuple[tuple[int, int], ...]
    quotient_dim_without_r0: int | None = None

    def __post_init__(self):
        if self.quotient_dim != self.dim_im_rho - self.dim_relations or self.quotient_dim < 0:
            raise ValueError("inconsistent quotient report")

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "k": self.k,
            "dim_im_rho": self.dim_im_rho,
            "dim_relations": self.dim_relations,
            "quotient_dim": self.quotient_dim,
            "complement": [list(c) for c in self.complement],
        }
        if self.quotient_dim_without_r0 is not None:
            out["quotient_dim_without_r0"] = self.quotient_dim_without_r0
        return out


def _report(n: int, k: int, mat: Gf2Matrix, without_r0: int | None = None) -> QuotientReport:
    comp = tuple(mat.labels[c] for c in mat.complement())
    return QuotientReport(n, k, mat.ncols, mat.rank, mat.ncols - mat.rank, comp, without_r0)


def quotient_dim(n: int, k: int = 1, *, method: str = "auto", compare_r0: bool = False) -> QuotientReport:
    """dim im rho_k,n - dim rho_k(Dold relations), with coset representatives.

    With ``compare_r0`` the dimension without the p = 1 relation is also
    recorded.
    """
    if n < 2 or not 1 <= k < n:
        raise ValueError(f"quotient_dim needs n >= 2 and 1 <= k < n, got n={n}, k={k}")
    mat = dold_image(n, k, method=method)
    without = None
    if compare_r0:
        alt = dold_image(n, k, include_r0=False, method=method)
        without = alt.ncols - alt.rank
    return _report(n, k, mat, without)


class Codim1Class(str, enum.Enum):
    NULL_COBORDANT = "null-cobordant"
    A1 = "A1"
    B1 = "B1"
    C2 = "C2"


_EXPECTED_DIM = {Codim1Class.NULL_COBORDANT: 0, Codim1Class.A1: 1, Codim1Class.B1: 1, Codim1Class.C2: 2}


def codim1_pattern(n: int) -> Codim1Class:
    """Class predicted from the binary shape of n alone."""
    if n >= 4 and is_power_of_two(n):
        return Codim1Class.A1
    ab = two_power_pair(n)
    if ab is not None:
        a, b = ab
        if b >= 1 and a == b + 1:
            return Codim1Class.B1
        if b >= 1 and a >= b + 2:
            return Codim1Class.C2
    return Codim1Class.NULL_COBORDANT


@dataclass(frozen=True)
class Codim1Report:
    n: int
    cls: Codim1Class
    quotient: QuotientReport
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"n": self.n, "class": self.cls.value, "quotient": self.quotient.to_dict(), "notes": list(self.notes)}


def classify_codim1(n: int) -> Codim1Report:
    """Classify oriented sources of fold maps into stably parallelizable (n-1)-manifolds.

    The class read off from the shape of n is checked against the computed
    quotient dimension; a mismatch raises.
    """
    if n < 2:
        raise ValueError("classify_codim1 needs n >= 2")
    rep = quotient_dim(n, 1)
    cls = codim1_pattern(n)
    if rep.quotient_dim != _EXPECTED_DIM[cls]:
        raise AssertionError(f"n={n}: pattern {cls.value} but quotient dimension {rep.quotient_dim}")
    notes = []
    if cls is Codim1Class.NULL_COBORDANT:
        notes.append("unoriented null-cobordant; for n divisible by 4 only a p_1-power number can survive")
    if cls is Codim1Class.A1:
        notes.append(EXTERNAL_NOTES["codim1-top-number"])
    return Codim1Report(n, cls, rep, tuple(notes))


# Relations among high-degree classes ----------------------------------------------

def _violation(ring: OneGenRing, thr: int):
    """Find two equal-length, equal-degree products with parts >= thr that differ.

    Returns (I, J) with prod_I = 1 and prod_J = 0, or None.  Degree sets are
    tracked as int bitmasks per length.
    """
    N = ring.dim
    if thr > N:
        return None
    mask = (1 << (N + 1)) - 1
    ones = [d for d in range(thr, N + 1) if ring.w(d)]
    zeros = [d for d in range(thr, N + 1) if not ring.w(d)]
    allp = list(range(thr, N + 1))
    one_l, zero_l, any_l = [1], [0], [1]
    L = 0
    while True:
        L += 1
        o = z = a = 0
        for p in ones:
            o |= one_l[-1] << p
            z |= zero_l[-1] << p
        for p in zeros:
            z |= any_l[-1] << p
        for p in allp:
            a |= any_l[-1] << p
        o, z, a = o & mask, z & mask, a & mask
        one_l.append(o)
        zero_l.append(z)
        any_l.append(a)
        both = o & z
        if both:
            D = (both & -both).bit_length() - 1
            return _trace_one(one_l, ones, L, D), _trace_zero(one_l, zero_l, any_l, ones, zeros, allp, L, D)
        if not a:
            return None


def _bit(v: int, i: int) -> bool:
    return i >= 0 and (v >> i) & 1 == 1


def _trace_one(one_l, ones, L, D):
    out = []
    for level in range(L, 0, -1):
        p = next(p for p in ones if _bit(one_l[level - 1], D - p))
        out.append(p)
        D -= p
    return tuple(sorted(out))


def _trace_any(any_l, allp, L, D):
    out = []
    for level in range(L, 0, -1):
        p = next(p for p in allp if _bit(any_l[level - 1], D - p))
        out.append(p)
        D -= p
    return out


def _trace_zero(one_l, zero_l, any_l, ones, zeros, allp, L, D):
    out = []
    for level in range(L, 0, -1):
        p = next((p for p in zeros if _bit(any_l[level - 1], D - p)), None)
        if p is not None:
            out.append(p)
            out.extend(_trace_any(any_l, allp, level - 1, D - p))
            return tuple(sorted(out))
        p = next(p for p in ones if _bit(zero_l[level - 1], D - p))
        out.append(p)
        D -= p
    raise AssertionError("unreachable")


def min_relation_threshold(ring: OneGenRing) -> int:
    """Least l such that all equal-length, equal-degree products with parts >= l agree."""
    lo, hi = 1, ring.dim + 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _violation(ring, mid) is None:
            hi = mid
        else:
            lo = mid + 1
    return lo


def relation_check(
    ring: OneGenRing, k: int, K: int, mc: MapClass, *, target: str | None = None
) -> Verdict:
    """Check the class equalities forced by a map of ``ring``'s manifold into Q^(dim-k).

    ``K`` is such that w_i(TQ) = 0 for i > K (0 for a stably parallelizable
    target).  Fold maps force prod w_r = prod w_s for equal-length,
    equal-degree index lists with all indices >= k+2+K; cusp and Morin maps
    need indices >= k+3+K.  Tame corank-1 maps into stably parallelizable
    targets kill every w_i with i >= k+2.
    """
    target = target or f"Q^{ring.dim - k}"
    src = ring.name
    hyps = [Hypothesis("k >= 0", k >= 0, f"k={k}"), Hypothesis("K >= 0", K >= 0, f"K={K}")]
    if mc is MapClass.TAME_CORANK1:
        hyps.append(Hypothesis("target stably parallelizable", K == 0, f"K={K}"))
        hit = next((d for d in range(k + 2, ring.dim + 1) if ring.w(d)), None)
        wit = {"nonzero_class": f"w_{hit}", "degree_bound": k + 2} if hit else None
        return _guarded(mc, src, target, "tame-w-vanishing", hyps, wit)
    if mc is MapClass.CORANK1:
        hyps.append(Hypothesis("class has mod-2 relations", False, "general corank-1 maps force none"))
        return _guarded(mc, src, target, "class-equalities", hyps)
    if mc is MapClass.FOLD:
        thr = k + 2 + K
        if k % 2 == 0:
            hyps.append(Hypothesis("k even: fold classes vanish above k+1+K", True))
        else:
            hyps.append(Hypothesis("k odd", True))
            hyps.append(Hypothesis("orientability", True, "fold maps are cusp maps, no orientability needed"))
    else:
        thr = k + 3 + K
        hyps.append(Hypothesis("k odd", k % 2 == 1, f"k={k}"))
        if mc is MapClass.MORIN:
            hyps.append(Hypothesis("source orientable", ring.orientable, src))
    viol = _violation(ring, thr)
    wit = None
    if viol:
        I, J = viol
        wit = {
            "threshold": thr,
            "nonzero": [f"w_{i}" for i in I],
            "zero": [f"w_{j}" for j in J],
            "degree": sum(I),
            "length": len(I),
        }
    return _guarded(mc, src, target, "class-equalities", hyps, wit, (f"threshold {thr}",))


# Projective spaces ------------------------------------------------------------------

def _binary_split(n: int) -> tuple[int, int]:
    """(d, c) with n = 2^d + c and 0 <= c < 2^d."""
    d = n.bit_length() - 1
    return d, n - (1 << d)


@dataclass(frozen=True)
class RpReport:
    n: int
    target_dim: int
    k: int
    verdicts: tuple[Verdict, ...]
    min_threshold: int
    notes: tuple[str, ...]

    def obstructed(self, mc: MapClass) -> bool:
        return any(v.obstructed for v in self.verdicts if v.map_class is mc)

    @property
    def any_obstructed(self) -> bool:
        return any(v.obstructed for v in self.verdicts)

    def summary(self) -> dict:
        out = {}
        for mc in MapClass:
            vs = [v for v in self.verdicts if v.map_class is mc]
            if not vs:
                continue
            if any(v.obstructed for v in vs):
                out[mc.value] = OBSTRUCTED
            elif any(v.status == NOT_OBSTRUCTED for v in vs):
                out[mc.value] = NOT_OBSTRUCTED
            else:
                out[mc.value] = INCONCLUSIVE
        return out

    def to_dict(self) -> dict:
        return {
            "source": f"RP^{self.n}",
            "target": f"R^{self.target_dim}",
            "k": self.k,
            "summary": self.summary(),
            "min_threshold": self.min_threshold,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "notes": list(self.notes),
        }


def rp_verdict(n: int, target_dim: int) -> RpReport:
    """All verdicts for maps RP^n -> R^target_dim (k = n - target_dim >= 0)."""
    k = n - target_dim
    if k < 0 or target_dim < 1:
        raise ValueError(f"need 1 <= target_dim <= n, got n={n}, target={target_dim}")
    ring = OneGenRing.rp(n)
    src, tgt = ring.name, f"R^{target_dim}"
    vs: list[Verdict] = []

    for mc in (MapClass.FOLD, MapClass.CUSP, MapClass.MORIN, MapClass.TAME_CORANK1):
        vs.append(relation_check(ring, k, 0, mc, target=tgt))

    # Closed-form family statement for n = 2^d + c, c odd, 0 <= c < 2^d - 2.
    d, c = _binary_split(n)
    shape = Hypothesis("n = 2^d + c, c odd, 0 <= c < 2^d - 2", c % 2 == 1 and c < (1 << d) - 2, f"d={d}, c={c}")
    fold_hit = {"c": c, "condition": "k + 1 < c"} if k + 1 < c else None
    vs.append(_guarded(MapClass.FOLD, src, tgt, "projective-family", [shape], fold_hit))
    morin_hit = {"c": c, "condition": "k + 2 < c"} if k + 2 < c else None
    vs.append(_guarded(
        MapClass.MORIN, src, tgt, "projective-family", [shape, Hypothesis("k odd", k % 2 == 1, f"k={k}")], morin_hit
    ))

    # Gamma operations: gamma^i of the reduced tangent class is nonzero up to i = r_exp(n).
    r = r_exp(n)
    gam_hit = {"r_exp": r, "nonzero_gamma_degree": r, "condition": "k <= r_exp - 2"} if k <= r - 2 else None
    vs.append(_guarded(MapClass.TAME_CORANK1, src, tgt, "gamma-vanishing", [], gam_hit))
    vs.append(_guarded(
        MapClass.FOLD, src, tgt, "gamma-vanishing",
        [Hypothesis("k even: fold maps are tame", k % 2 == 0, f"k={k}")], gam_hit,
    ))

    # Rational Pontryagin classes of RP^n are all zero.
    vs.append(_guarded(MapClass.CORANK1, src, tgt, "pontryagin-vanishing", [], None,
                       ("rational Pontryagin classes of RP^n vanish",)))

    notes = []
    if n < 2 * (k + 2):
        notes.append(EXTERNAL_NOTES["generic-existence"])
    return RpReport(n, target_dim, k, tuple(vs), min_relation_threshold(ring), tuple(notes))


def cp_verdict(n: int, target_dim: int, *, stably_parallelizable: bool = True) -> Verdict:
    """Corank-1 maps CP^n -> Q^target_dim via rational Pontryagin classes.

    p_i(CP^n) = C(n+1, i) y^(2i) is nonzero for i <= n/2, so the top one,
    i = floor(n/2), witnesses an obstruction as soon as 2i > k+1.
    """
    k = 2 * n - target_dim
    if k < 0 or n < 1:
        raise ValueError(f"need target_dim <= 2n, got n={n}, target={target_dim}")
    i = n // 2
    hyps = [Hypothesis("target stably parallelizable", stably_parallelizable)]
    wit = None
    if i >= 1 and 2 * i > k + 1:
        wit = {"pontryagin_index": i, "coefficient": _comb(n + 1, i), "condition": "2i > k + 1"}
    notes = ["covers fold, cusp and Morin maps, which have corank 1"]
    if 2 * n < 2 * (k + 2):
        notes.append(EXTERNAL_NOTES["generic-existence"])
    return _guarded(MapClass.CORANK1, f"CP^{n}", f"Q^{target_dim}", "pontryagin-vanishing", hyps, wit, notes)


def _comb(a: int, b: int) -> int:
    from math import comb

    return comb(a, b)


# Characteristic-number checks --------------------------------------------------------

def _extend_vanishing(v: int) -> int:
    """If w_1..w_v vanish, the first nonzero class sits in a power-of-2 degree."""
    if v <= 0:
        return max(v, 0)
    while not is_power_of_two(v + 1):
        v += 1
    return v


def _length_rep(n: int, kk: int, L: int) -> tuple[int, ...]:
    return tuple(sorted((kk + 1,) * (L - 1) + (n - (kk + 1) * (L - 1),)))


@dataclass(frozen=True)
class NumbersResult:
    verdict: Verdict
    residual: dict

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.to_dict(), "residual": self.residual}


def numbers_check(
    cn: CharNumbers,
    k: int,
    mc: MapClass,
    vanishing_hyp: int,
    *,
    stably_parallelizable: bool = True,
    route: str = "auto",
) -> NumbersResult:
    """Test a characteristic-number functional against the relations a map would force.

    Relations used: the Dold relations; monomials containing some w_i with
    i <= v, where v = vanishing_hyp extended up to the next 2^a - 1; for fold,
    cusp and Morin maps, equality of numbers of equal length whose indices
    all exceed k + delta; for tame corank-1 maps, vanishing of every w_i with
    i >= k + 2.  Whenever v >= k + delta the check runs in the collapsed
    (x, t) picture, otherwise on the full partition basis; ``route`` may force
    ``"direct"``.
    """
    if route not in ("auto", "direct"):
        raise ValueError(f"unknown route {route!r}")
    n = cn.n
    src, tgt = "M", f"Q^{n - k}"
    hyps = [
        Hypothesis("target stably parallelizable", stably_parallelizable),
        Hypothesis("map class has number relations", mc is not MapClass.CORANK1, mc.value),
        Hypothesis("1 <= k < n", 1 <= k < n, f"k={k}"),
    ]
    if mc in (MapClass.CUSP, MapClass.MORIN):
        hyps.append(Hypothesis("k odd", k % 2 == 1, f"k={k}"))
    if not all(h.ok for h in hyps):
        return NumbersResult(_guarded(mc, src, tgt, "number-relations", hyps), {})
    v = _extend_vanishing(vanishing_hyp)
    notes = [f"w_1..w_{v} assumed zero"] if v else []
    if mc is MapClass.MORIN:
        notes.append("Morin maps are first perturbed to cusp maps")
    if mc in (MapClass.FOLD, MapClass.CUSP, MapClass.MORIN):
        if v >= n - 1:
            notes.append(EXTERNAL_NOTES["morin-top-number" if mc.delta else "fold-top-number"])
    kk = k + mc.delta

    if route == "auto" and mc is not MapClass.TAME_CORANK1 and v >= kk:
        wit, residual = _numbers_collapsed(cn, kk, v)
    else:
        wit, residual = _numbers_direct(cn, kk, v, mc)
    return NumbersResult(_guarded(mc, src, tgt, "number-relations", hyps, wit, notes), residual)


def _label(p: tuple[int, ...]) -> str:
    return "*".join(f"w{i}" for i in p) if p else "1"


def _numbers_collapsed(cn: CharNumbers, kk: int, v: int):
    n = cn.n
    groups: dict[int, list] = {}
    for p in partitions(n):
        if p[0] <= v:
            if cn(p):
                return {"relation": "vanishing class", "monomial": _label(p)}, {}
        elif p[0] > kk:
            groups.setdefault(len(p), []).append(p)
    lam = {}
    for L, ps in groups.items():
        first = ps[0]
        for q in ps[1:]:
            if cn(q) != cn(first):
                return {"relation": "equal length", "monomials": [_label(first), _label(q)]}, {}
        lam[L] = cn(first)
    mat = dold_image(n, kk) if n > kk else Gf2Matrix(0, [])
    for row in mat.rows():
        val = 0
        for c in range(mat.ncols):
            if row >> c & 1:
                val ^= lam.get(c + 1, 0)
        if val:
            terms = [_label(_length_rep(n, kk, c + 1)) for c in range(mat.ncols) if row >> c & 1]
            return {"relation": "dold", "collapsed_terms": terms}, {}
    # Lengths with no partition into parts > v are forced to zero.
    forced = mat.copy()
    for L in range(1, mat.ncols + 1):
        if L not in groups:
            forced.insert(1 << (L - 1))
    residual = {_label(_length_rep(n, kk, c + 1)): lam.get(c + 1, 0) for c in forced.complement()}
    return None, residual


def _numbers_direct(cn: CharNumbers, kk: int, v: int, mc: MapClass):
    n = cn.n
    basis = list(partitions(n))
    index = {p: i for i, p in enumerate(basis)}
    mat = Gf2Matrix(len(basis), basis)

    def vec(terms) -> int:
        out = 0
        for m in terms:
            out ^= 1 << index[m]
        return out

    for p in basis:
        if p[0] <= v or (mc is MapClass.TAME_CORANK1 and p[-1] >= kk + 1):
            if cn(p):
                return {"relation": "vanishing class", "monomial": _label(p)}, {}
            mat.insert(vec([p]))
    if mc is not MapClass.TAME_CORANK1:
        groups: dict[int, list] = {}
        for p in basis:
            if p[0] > kk:
                groups.setdefault(len(p), []).append(p)
        for ps in groups.values():
            for q in ps[1:]:
                if cn(q) != cn(ps[0]):
                    return {"relation": "equal length", "monomials": [_label(ps[0]), _label(q)]}, {}
                mat.insert(vec([ps[0], q]))
    for d in range(n):
        for p in partitions(d):
            rel = dold_element(p, n)
            if cn.pair(rel.terms):
                return {"relation": "dold", "from_monomial": _label(p)}, {}
            mat.insert(vec(rel.terms))
    return None, {_label(basis[c]): cn(basis[c]) for c in mat.complement()}


# Rank-two reduction ------------------------------------------------------------------

@dataclass(frozen=True)
class Rank2Report:
    n: int
    basis: tuple[tuple[int, int], ...]
    rank: int
    quotient_dim: int
    representative: tuple[int, int] | None
    reductions: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "basis": [list(b) for b in self.basis],
            "rank": self.rank,
            "quotient_dim": self.quotient_dim,
            "representative": list(self.representative) if self.representative else None,
            "reductions": list(self.reductions),
        }


def rank2_rows(n: int) -> list[int]:
    """Relations from w_1^(n-2m) for 0 < m <= n/2 over the basis w_1^(n-2j) w_2^j (bit j).

    The w_1^(n-2j) w_2^j coefficient is C(n-2m-1-j, 2m-2j) with the analytic binomial.
    """
    rows = []
    for m in range(1, n // 2 + 1):
        r = 0
        for j in range(m + 1):
            if binom_parity_int(n - 2 * m - 1 - j, 2 * m - 2 * j):
                r |= 1 << j
        rows.append(r)
    return rows


def rank2_reduction(n: int) -> Rank2Report:
    """Reduce every w_1^(n-2m) w_2^m to a multiple of w_1^n.

    Row m has its top bit at j = m, so eliminating from the top expresses each
    basis monomial as c_m w_1^n; ``reductions[m]`` is c_m.
    """
    if n < 2:
        raise ValueError("rank2_reduction needs n >= 2")
    rows = rank2_rows(n)
    for m, r in enumerate(rows, start=1):
        if r.bit_length() - 1 != m:
            raise AssertionError(f"relation {m} has leading bit {r.bit_length() - 1}")
    red = [1]
    for m, r in enumerate(rows, start=1):
        c = 0
        for j in range(m):
            if r >> j & 1:
                c ^= red[j]
        red.append(c)
    mat = Gf2Matrix(n // 2 + 1)
    for r in rows:
        mat.insert(r)
    q = mat.ncols - mat.rank
    rep = (n, 0) if q == 1 and not mat.contains(1) else None
    basis = tuple((n - 2 * j, j) for j in range(n // 2 + 1))
    return Rank2Report(n, basis, mat.rank, q, rep, tuple(red))


# Conjecture sweep --------------------------------------------------------------------

def mersenne_exponent(k: int) -> int | None:
    """a with k = 2^a - 1 and a >= 2, else None."""
    if k >= 3 and is_power_of_two(k + 1):
        return (k + 1).bit_length() - 1
    return None


def auto_k_values(n: int, k_max: int = 1023) -> list[int]:
    return [(1 << a) - 1 for a in range(2, 11) if (1 << a) - 1 < n and (1 << a) - 1 <= k_max]


def conforms(n: int, k: int, dim: int) -> bool:
    """Expected shape: dim 0, or dim 1 at n = 2^s or 2^s + 1 with s >= a + 1."""
    if dim == 0:
        return True
    if dim != 1:
        return False
    a = mersenne_exponent(k)
    for m in (n, n - 1):
        if m >= 1 and is_power_of_two(m) and m.bit_length() - 1 >= a + 1:
            return True
    return False


@dataclass(frozen=True)
class SweepRecord:
    report: QuotientReport
    conforming: bool

    def to_dict(self) -> dict:
        d = self.report.to_dict()
        d["conforming"] = self.conforming
        return d


def sweep_one(n: int, k: int, compare_r0: bool = False) -> SweepRecord:
    if mersenne_exponent(k) is None:
        raise ValueError(f"k = {k} is not of the form 2^a - 1 with a >= 2")
    rep = quotient_dim(n, k, compare_r0=compare_r0)
    return SweepRecord(rep, conforms(n, k, rep.quotient_dim))


def sweep_grid(n_max: int, k_set: Iterable[int] | None = None, n_min: int = 2) -> list[tuple[int, int]]:
    """All (n, k) with k < n <= n_max; ``None`` means every 2^a - 1 up to 1023."""
    ks = sorted(set(k_set)) if k_set is not None else auto_k_values(n_max + 1)
    for k in ks:
        if mersenne_exponent(k) is None:
            raise ValueError(f"k = {k} is not of the form 2^a - 1 with a >= 2")
    return [(n, k) for k in ks for n in range(max(n_min, k + 1), n_max + 1)]


def conjecture_sweep(n_max: int, k_set: Iterable[int] | None = None, n_min: int = 2) -> Iterator[SweepRecord]:
    """Serial sweep in (k, n) order; the CLI runs the same grid on a process pool."""
    for n, k in sweep_grid(n_max, k_set, n_min):
        yield sweep_one(n, k)
