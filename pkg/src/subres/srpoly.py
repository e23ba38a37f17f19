"""Subresonant polynomial maps between weighted spaces.

A polynomial map is stored as a sparse table {(output coordinate, multi-index)
-> coefficient}.  Each stored term has an exact weight

    wt(j, alpha) = tgt[j] - sum_i alpha_i * src[i],

and the weight of the map is the max over stored terms.  A map is subresonant
when that max is <= 0, strictly subresonant when every term weight is < 0,
and in the star class when it is subresonant with a strictly weight-decreasing
linear part.  Composition, translation and inversion are implemented by
direct multi-index expansion; polarized homogeneous components (the symmetric
coefficient tensors) are extracted with the standard multinomial factors and
feed the polynomial norm.

PolyMap values are immutable; all operations are pure functions.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .weights import NEG_INF, Weight, WeightSpec, compatible

__all__ = [
    "DROP_TOL",
    "ROUNDTRIP_TOL",
    "SRKind",
    "SRClass",
    "PolyMap",
    "SingularLinearPartError",
    "InversionError",
    "MembershipError",
    "NotSubresonantError",
    "classify",
    "max_degree",
    "compose",
    "translate",
    "invert",
    "poly_norm",
    "polarization",
    "group_op",
    "group_defect",
]

# Absolute tolerance for dropping coefficients when building maps.
DROP_TOL = 1e-12
# Max-abs coefficient tolerance accepted for inversion round trips.
ROUNDTRIP_TOL = 1e-9


class SingularLinearPartError(ValueError):
    """The linear part is numerically singular."""


class InversionError(ValueError):
    """The inverse round trip left a residual above tolerance."""


class MembershipError(ValueError):
    """A map is not in the requested group, with the offending term."""


class NotSubresonantError(ValueError):
    """A subresonant map was required."""


class SRKind(enum.Enum):
    STRICTLY_SUBRESONANT = "STRICTLY_SUBRESONANT"
    STAR = "STAR"
    SUBRESONANT = "SUBRESONANT"
    NOT_SUBRESONANT = "NOT_SUBRESONANT"


@dataclass(frozen=True)
class SRClass:
    """Resonance classification of a map together with its weight."""

    kind: SRKind
    weight: Weight

    @property
    def is_subresonant(self) -> bool:
        return self.kind is not SRKind.NOT_SUBRESONANT


Term = tuple[int, tuple[int, ...]]


class PolyMap:
    """Polynomial map between weighted spaces as a sparse coefficient table.

    Coefficients with magnitude <= ``drop_tol`` (absolute) are dropped at
    construction; pass ``drop_tol=0.0`` to keep everything.
    """

    __slots__ = ("src", "tgt", "_terms")

    def __init__(
        self,
        src: WeightSpec,
        tgt: WeightSpec,
        terms: Mapping[Term, float] | Iterable[tuple[Term, float]],
        *,
        drop_tol: float = DROP_TOL,
    ):
        items = terms.items() if isinstance(terms, Mapping) else terms
        table: dict[Term, float] = {}
        for (j, alpha), coeff in items:
            alpha = tuple(int(a) for a in alpha)
            j = int(j)
            if not 0 <= j < tgt.dim:
                raise ValueError(f"output coordinate {j} out of range for dim {tgt.dim}")
            if len(alpha) != src.dim:
                raise ValueError(f"multi-index {alpha} does not match source dim {src.dim}")
            if any(a < 0 for a in alpha):
                raise ValueError(f"multi-index {alpha} has negative exponents")
            c = float(coeff) + table.get((j, alpha), 0.0)
            table[(j, alpha)] = c
        if drop_tol > 0.0:
            table = {k: v for k, v in table.items() if abs(v) > drop_tol}
        else:
            table = {k: v for k, v in table.items() if v != 0.0}
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "tgt", tgt)
        object.__setattr__(self, "_terms", table)

    def __setattr__(self, *_):
        raise AttributeError("PolyMap is immutable")

    @property
    def terms(self) -> Mapping[Term, float]:
        return MappingProxyType(self._terms)

    # ----- constructors -------------------------------------------------

    @classmethod
    def zero(cls, src: WeightSpec, tgt: WeightSpec) -> "PolyMap":
        return cls(src, tgt, {})

    @classmethod
    def identity(cls, ws: WeightSpec) -> "PolyMap":
        return cls.linear(ws, ws, np.eye(ws.dim))

    @classmethod
    def linear(cls, src: WeightSpec, tgt: WeightSpec, matrix, const=None) -> "PolyMap":
        """The affine map x -> matrix @ x + const."""
        a = np.asarray(matrix, dtype=float)
        if a.shape != (tgt.dim, src.dim):
            raise ValueError(f"matrix shape {a.shape} does not match {(tgt.dim, src.dim)}")
        terms: dict[Term, float] = {}
        for j in range(tgt.dim):
            for i in range(src.dim):
                if a[j, i] != 0.0:
                    alpha = tuple(1 if t == i else 0 for t in range(src.dim))
                    terms[(j, alpha)] = a[j, i]
        if const is not None:
            c = np.asarray(const, dtype=float)
            zero = (0,) * src.dim
            for j in range(tgt.dim):
                if c[j] != 0.0:
                    terms[(j, zero)] = c[j]
        return cls(src, tgt, terms)

    @classmethod
    def translation(cls, ws: WeightSpec, v) -> "PolyMap":
        return cls.linear(ws, ws, np.eye(ws.dim), const=v)

    # ----- basic views ---------------------------------------------------

    def component(self, j: int) -> dict[tuple[int, ...], float]:
        """Coefficient table of the j-th output coordinate."""
        return {alpha: c for (out, alpha), c in self._terms.items() if out == j}

    def constant_vector(self) -> np.ndarray:
        zero = (0,) * self.src.dim
        out = np.zeros(self.tgt.dim)
        for j in range(self.tgt.dim):
            out[j] = self._terms.get((j, zero), 0.0)
        return out

    def linear_matrix(self) -> np.ndarray:
        """The derivative at zero as a matrix."""
        a = np.zeros((self.tgt.dim, self.src.dim))
        for (j, alpha), c in self._terms.items():
            if sum(alpha) == 1:
                a[j, alpha.index(1)] = c
        return a

    def degree(self) -> int:
        return max((sum(alpha) for (_, alpha) in self._terms), default=0)

    def term_weight(self, j: int, alpha: tuple[int, ...]) -> Weight:
        return self.tgt.weights[j] - self.src.alpha_weight(alpha)

    def weight(self) -> Weight:
        """Max term weight; NEG_INF for the zero map."""
        return max(
            (self.term_weight(j, alpha) for (j, alpha) in self._terms),
            default=NEG_INF,
        )

    def homogeneous_part(self, k: int) -> "PolyMap":
        return PolyMap(
            self.src,
            self.tgt,
            {t: c for t, c in self._terms.items() if sum(t[1]) == k},
            drop_tol=0.0,
        )

    def without_constant(self) -> "PolyMap":
        return PolyMap(
            self.src,
            self.tgt,
            {t: c for t, c in self._terms.items() if sum(t[1]) > 0},
            drop_tol=0.0,
        )

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.src.dim,):
            raise ValueError(f"point of shape {x.shape} does not match dim {self.src.dim}")
        out = np.zeros(self.tgt.dim)
        for (j, alpha), c in self._terms.items():
            val = c
            for i, a in enumerate(alpha):
                if a:
                    val *= x[i] ** a
            out[j] += val
        return out

    __call__ = evaluate

    # ----- serialization --------------------------------------------------

    def to_json(self) -> dict:
        terms = sorted(self._terms.items())
        return {
            "src": self.src.to_json(),
            "tgt": self.tgt.to_json(),
            "terms": [
                {"out": j + 1, "alpha": list(alpha), "coeff": c}
                for (j, alpha), c in terms
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PolyMap":
        try:
            src = WeightSpec.from_json(obj["src"])
            tgt = WeightSpec.from_json(obj["tgt"])
            terms = {
                (int(t["out"]) - 1, tuple(t["alpha"])): float(t["coeff"])
                for t in obj["terms"]
            }
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed polynomial map JSON: {exc}") from exc
        return cls(src, tgt, terms)

    def __repr__(self):
        return f"PolyMap({self.src} -> {self.tgt}, {len(self._terms)} terms)"


# ----- scalar polynomial helpers (multi-index dicts) -----------------------

Poly = dict[tuple[int, ...], float]


def _poly_mul(p: Poly, q: Poly, max_deg: int | None = None) -> Poly:
    out: Poly = {}
    for a, ca in p.items():
        da = sum(a)
        for b, cb in q.items():
            if max_deg is not None and da + sum(b) > max_deg:
                continue
            key = tuple(x + y for x, y in zip(a, b))
            out[key] = out.get(key, 0.0) + ca * cb
    return out


def _poly_pow(p: Poly, n: int, dim: int, max_deg: int | None = None) -> Poly:
    out: Poly = {(0,) * dim: 1.0}
    for _ in range(n):
        out = _poly_mul(out, p, max_deg)
    return out


def _combine(f: PolyMap, g: PolyMap, cf: float, cg: float) -> PolyMap:
    """The linear combination cf*f + cg*g between identical specs."""
    if f.src != g.src or f.tgt != g.tgt:
        raise ValueError("maps must share source and target specs")
    terms = {t: cf * c for t, c in f.terms.items()}
    for t, c in g.terms.items():
        terms[t] = terms.get(t, 0.0) + cg * c
    return PolyMap(f.src, f.tgt, terms, drop_tol=0.0)


# ----- classification -------------------------------------------------------


def classify(f: PolyMap) -> SRClass:
    """Resonance class of a map between negative-weight spaces.

    The map weight is the exact max over term weights; the star class
    additionally requires every degree-1 term weight to be < 0.
    """
    f.src.require_negative()
    f.tgt.require_negative()
    total = NEG_INF
    linear = NEG_INF
    for (j, alpha) in f.terms:
        w = f.term_weight(j, alpha)
        if w > total:
            total = w
        if sum(alpha) == 1 and w > linear:
            linear = w
    if total > 0:
        kind = SRKind.NOT_SUBRESONANT
    elif total < 0:
        kind = SRKind.STRICTLY_SUBRESONANT
    elif linear < 0:
        kind = SRKind.STAR
    else:
        kind = SRKind.SUBRESONANT
    return SRClass(kind, total)


def max_degree(src: WeightSpec, tgt: WeightSpec, kappa: Weight | int = 0) -> int:
    """Degree bound floor((eta_1 - kappa) / lambda_ell) for weight <= kappa maps."""
    src.require_negative()
    k = kappa if isinstance(kappa, Weight) else Weight(kappa)
    return math.floor((tgt.values[0].fraction - k.fraction) / src.values[-1].fraction)


# ----- composition, translation, inversion ----------------------------------


def compose(
    g: PolyMap,
    f: PolyMap,
    *,
    drop_tol: float = DROP_TOL,
    max_deg: int | None = None,
) -> PolyMap:
    """Exact polynomial composition g(f(x)) by multi-index expansion.

    ``max_deg`` truncates the expansion; leave it None for the exact result.
    """
    if f.tgt != g.src:
        raise ValueError(f"specs do not chain: {f.tgt} vs {g.src}")
    dim = f.src.dim
    comps = [f.component(i) for i in range(f.tgt.dim)]
    pow_cache: list[dict[int, Poly]] = [dict() for _ in comps]

    def power(i: int, n: int) -> Poly:
        cache = pow_cache[i]
        if n not in cache:
            cache[n] = _poly_pow(comps[i], n, dim, max_deg)
        return cache[n]

    out: dict[Term, float] = {}
    one: Poly = {(0,) * dim: 1.0}
    for (j, alpha), c in g.terms.items():
        poly = one
        for i, a in enumerate(alpha):
            if a:
                poly = _poly_mul(poly, power(i, a), max_deg)
        for beta, coeff in poly.items():
            key = (j, beta)
            out[key] = out.get(key, 0.0) + c * coeff
    return PolyMap(f.src, g.tgt, out, drop_tol=drop_tol)


def translate(f: PolyMap, v, *, drop_tol: float = DROP_TOL) -> PolyMap:
    """The map x -> f(x + v), expanded with binomial coefficients."""
    v = np.asarray(v, dtype=float)
    if v.shape != (f.src.dim,):
        raise ValueError(f"vector of shape {v.shape} does not match dim {f.src.dim}")
    out: dict[Term, float] = {}
    for (j, alpha), c in f.terms.items():
        for beta in itertools.product(*(range(a + 1) for a in alpha)):
            coeff = c
            for a, b, vi in zip(alpha, beta, v):
                if a > b:
                    coeff *= math.comb(a, b) * vi ** (a - b)
            key = (j, tuple(beta))
            out[key] = out.get(key, 0.0) + coeff
    return PolyMap(f.src, f.tgt, out, drop_tol=drop_tol)


def invert(
    f: PolyMap,
    *,
    roundtrip_tol: float = ROUNDTRIP_TOL,
    det_tol: float = 1e-12,
    drop_tol: float = DROP_TOL,
) -> PolyMap:
    """Two-sided polynomial inverse of a subresonant map.

    The inverse is built degree by degree through the fixed-point iteration
    g <- A^{-1} (id - higher(f) o g) truncated at the subresonant degree
    bound, then verified: both round trips must match the identity to
    ``roundtrip_tol`` in max-abs coefficient, which catches misuse on maps
    that are not genuinely subresonant.  A nonzero value at the origin is
    handled by inverting the centered map and translating the result.
    """
    if not compatible(f.src, f.tgt):
        raise ValueError(f"specs are not compatible: {f.src} vs {f.tgt}")
    cls = classify(f)
    if not cls.is_subresonant:
        raise NotSubresonantError(f"cannot invert a map of weight {cls.weight}")
    a = f.linear_matrix()
    det = float(np.linalg.det(a))
    if abs(det) < det_tol:
        raise SingularLinearPartError(f"|det D0 f| = {abs(det):.3e} is below {det_tol:g}")
    f0 = f.constant_vector()
    centered = f.without_constant()
    d0 = f.src.d0
    a_inv = np.linalg.inv(a)
    a_inv_map = PolyMap.linear(f.tgt, f.src, a_inv)
    higher = _combine(centered, PolyMap.linear(f.src, f.tgt, a), 1.0, -1.0)
    g = PolyMap.linear(f.tgt, f.src, a_inv)
    ident = PolyMap.identity(f.tgt)
    for _ in range(max(d0 - 1, 0)):
        hg = compose(higher, g, drop_tol=0.0, max_deg=d0)
        g = compose(a_inv_map, _combine(ident, hg, 1.0, -1.0), drop_tol=0.0, max_deg=d0)
    if np.any(f0 != 0.0):
        g = translate(g, -f0, drop_tol=0.0)
    g = PolyMap(g.src, g.tgt, g.terms, drop_tol=drop_tol)
    for left, right, ref in ((g, f, f.src), (f, g, f.tgt)):
        residual = _combine(compose(left, right, drop_tol=0.0), PolyMap.identity(ref), 1.0, -1.0)
        worst = residual.max_abs_coeff()
        if worst > roundtrip_tol:
            raise InversionError(
                f"round trip residual {worst:.3e} exceeds {roundtrip_tol:g}; "
                "the map may not be subresonant"
            )
    return g


# ----- polarizations and norms ----------------------------------------------


def polarization(f: PolyMap, k: int) -> np.ndarray:
    """Symmetric coefficient tensor of the degree-k homogeneous component.

    Shape (dim_tgt, dim_src, ..., dim_src) with k source axes; contracting it
    with x in every source slot reproduces the degree-k part of f at x.  Each
    monomial coefficient is spread evenly over the distinct orderings of its
    index multiset.  For k = 0 the result is the value at the origin.
    """
    if k < 0:
        raise ValueError("degree must be nonnegative")
    dt, ds = f.tgt.dim, f.src.dim
    t = np.zeros((dt,) + (ds,) * k)
    for (j, alpha), c in f.terms.items():
        if sum(alpha) != k:
            continue
        slots = tuple(i for i, a in enumerate(alpha) for _ in range(a))
        perms = set(itertools.permutations(slots))
        share = c / len(perms) if perms else c
        if k == 0:
            t[j] = c
        else:
            for p in perms:
                t[(j,) + p] = share
    return t


def poly_norm(f: PolyMap) -> float:
    """Sum over degrees of the spectral norm of the polarized component.

    Each polarized component is viewed as a linear map from the tensor power
    of the source (standard inner products in adapted coordinates) to the
    target, and its operator norm is the spectral norm of the reshaped
    coefficient matrix.
    """
    total = 0.0
    degrees = {sum(alpha) for (_, alpha) in f.terms}
    for k in sorted(degrees):
        mat = polarization(f, k).reshape(f.tgt.dim, f.src.dim ** k)
        total += float(np.linalg.norm(mat, 2))
    return total


# ----- groups of invertible subresonant maps --------------------------------

_GROUPS = ("SR", "SSR", "STAR")


def group_defect(f: PolyMap, which: str, *, det_tol: float = 1e-12) -> str | None:
    """None when f is in the named group, else a description of the failure.

    SR is the subresonant maps with invertible linear part; SSR and STAR are
    the maps id + p with p strictly subresonant (resp. p subresonant with
    strictly weight-decreasing linear part).
    """
    if which not in _GROUPS:
        raise ValueError(f"unknown group {which!r}, expected one of {_GROUPS}")
    if f.src != f.tgt:
        return f"source and target specs differ: {f.src} vs {f.tgt}"
    if which == "SR":
        for (j, alpha) in f.terms:
            w = f.term_weight(j, alpha)
            if w > 0:
                return f"term out={j} alpha={alpha} has weight {w} > 0"
        det = float(np.linalg.det(f.linear_matrix()))
        if abs(det) < det_tol:
            return f"|det D0 f| = {abs(det):.3e} is below {det_tol:g}"
        return None
    p = _combine(f, PolyMap.identity(f.src), 1.0, -1.0)
    for (j, alpha) in p.terms:
        w = p.term_weight(j, alpha)
        if which == "SSR" and not w < 0:
            return f"term out={j} alpha={alpha} of f - id has weight {w} >= 0"
        if which == "STAR":
            if w > 0:
                return f"term out={j} alpha={alpha} of f - id has weight {w} > 0"
            if sum(alpha) == 1 and not w < 0:
                return f"linear term out={j} alpha={alpha} of f - id has weight {w} >= 0"
    return None


def group_op(f: PolyMap, g: PolyMap, which: str = "SR") -> PolyMap:
    """Composition f o g inside the named group, with membership enforced.

    Both operands and the result are checked; a violation raises
    MembershipError naming the offending term.
    """
    for name, m in (("left operand", f), ("right operand", g)):
        defect = group_defect(m, which)
        if defect is not None:
            raise MembershipError(f"{name} is not in G^{which}: {defect}")
    result = compose(f, g)
    defect = group_defect(result, which)
    if defect is not None:
        raise MembershipError(f"composition left G^{which}: {defect}")
    return result
