"""Exact weights on finite-dimensional vector spaces in adapted coordinates.

A weight assigns a rational contraction rate to every nonzero vector and
``-inf`` to the zero vector.  In adapted coordinates a weight is described by
a nondecreasing list of per-coordinate rational values, so every subspace of
the induced filtration is a coordinate prefix and every induced construction
(tensor, dual, quotient, spaces of multilinear maps) is again described by
per-coordinate data plus a sorting permutation.

Weight arithmetic is exact: values are `fractions.Fraction` under the hood
and are never compared through floating point.  Floats enter only through the
numeric coefficients whose support is being measured, guarded by a relative
zero tolerance (a numeric tensor's weight is discontinuous in its entries;
the tolerance makes it deterministic).

All types here are immutable values and all operations are pure functions,
so everything is safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, NamedTuple, Union

import numpy as np

__all__ = [
    "ZERO_REL_TOL",
    "NEG_INF",
    "Weight",
    "WeightSpec",
    "Flag",
    "SortedSpec",
    "weight_of_vector",
    "tensor_weight",
    "dual_weight",
    "quotient_weight",
    "multilinear_weight",
    "flag_of",
    "compatible",
]

# Relative threshold below which a numeric coefficient counts as zero.
ZERO_REL_TOL = 1e-12

WeightLike = Union["Weight", int, str, Fraction]


@total_ordering
class Weight:
    """A weight value: an exact rational rate, or the ``-inf`` sentinel.

    ``-inf`` is reserved for the zero vector; construct it via the module
    constant :data:`NEG_INF`.  Floats are rejected on purpose: resonance
    conditions are exact (in)equalities between rationals.
    """

    __slots__ = ("_frac",)

    def __init__(self, value: WeightLike):
        if isinstance(value, Weight):
            self._frac = value._frac
        elif isinstance(value, bool):
            raise TypeError("cannot make a weight from a bool")
        elif isinstance(value, (int, str, Fraction)):
            self._frac = Fraction(value)
        elif isinstance(value, float):
            raise TypeError("weights are exact: pass an int, Fraction, or 'p/q' string")
        else:
            raise TypeError(f"cannot make a weight from {type(value).__name__}")

    @classmethod
    def _make_neg_inf(cls) -> "Weight":
        w = object.__new__(cls)
        w._frac = None
        return w

    @property
    def is_neg_inf(self) -> bool:
        return self._frac is None

    @property
    def fraction(self) -> Fraction:
        if self._frac is None:
            raise ValueError("the -inf weight has no rational value")
        return self._frac

    def _key(self):
        return (0, Fraction(0)) if self._frac is None else (1, self._frac)

    @staticmethod
    def _coerce(other) -> "Weight | None":
        if isinstance(other, Weight):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return Weight(other)
        return None

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._key() == o._key()

    def __lt__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._key() < o._key()

    def __hash__(self):
        return hash(self._key())

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self._frac is None or o._frac is None:
            return NEG_INF
        return Weight(self._frac + o._frac)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o._frac is None:
            raise ValueError("cannot subtract the -inf weight")
        if self._frac is None:
            return NEG_INF
        return Weight(self._frac - o._frac)

    def __neg__(self):
        if self._frac is None:
            raise ValueError("the -inf weight cannot be negated")
        return Weight(-self._frac)

    def __mul__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            if other <= 0:
                raise ValueError("weights scale by positive integers only")
            if self._frac is None:
                return NEG_INF
            return Weight(self._frac * other)
        return NotImplemented

    __rmul__ = __mul__

    def __float__(self):
        return float("-inf") if self._frac is None else float(self._frac)

    def __str__(self):
        return "-inf" if self._frac is None else str(self._frac)

    def __repr__(self):
        return f"Weight({self})"


NEG_INF = Weight._make_neg_inf()


@dataclass(frozen=True, init=False)
class WeightSpec:
    """Per-coordinate weight values in adapted (nondecreasing) order.

    The distinct values are the weights of the space, their run lengths the
    multiplicities; prefixes of the coordinate list span the filtration.
    """

    weights: tuple[Weight, ...]

    def __init__(self, weights: Iterable[WeightLike]):
        ws = tuple(w if isinstance(w, Weight) else Weight(w) for w in weights)
        if not ws:
            raise ValueError("a weight spec needs at least one coordinate")
        if any(w.is_neg_inf for w in ws):
            raise ValueError("coordinate weights must be finite")
        if any(ws[i] > ws[i + 1] for i in range(len(ws) - 1)):
            raise ValueError("coordinate weights must be nondecreasing (adapted order)")
        object.__setattr__(self, "weights", ws)

    @property
    def dim(self) -> int:
        return len(self.weights)

    @property
    def values(self) -> tuple[Weight, ...]:
        """Distinct weight values, strictly ascending."""
        out: list[Weight] = []
        for w in self.weights:
            if not out or w != out[-1]:
                out.append(w)
        return tuple(out)

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(sum(1 for w in self.weights if w == v) for v in self.values)

    @property
    def is_negative(self) -> bool:
        return all(w < 0 for w in self.weights)

    def require_negative(self) -> None:
        if not self.is_negative:
            raise ValueError(f"weights must all be negative, got {self}")

    @property
    def d0(self) -> int:
        """Degree bound floor(lambda_1 / lambda_ell) for negative weights."""
        self.require_negative()
        return math.floor(self.values[0].fraction / self.values[-1].fraction)

    def alpha_weight(self, alpha: Iterable[int]) -> Weight:
        """Exact sum alpha_i * lambda_i over the coordinates."""
        total = Fraction(0)
        for a, w in zip(alpha, self.weights):
            if a:
                total += a * w.fraction
        return Weight(total)

    def blocks(self) -> tuple[tuple[int, int, Weight], ...]:
        """(start, stop, value) coordinate ranges of the weight levels."""
        out = []
        start = 0
        for v, m in zip(self.values, self.multiplicities):
            out.append((start, start + m, v))
            start += m
        return tuple(out)

    def floats(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights])

    def to_json(self) -> dict:
        return {"weights": [str(w) for w in self.weights]}

    @classmethod
    def from_json(cls, obj: dict) -> "WeightSpec":
        if not isinstance(obj, dict) or "weights" not in obj:
            raise ValueError('weight spec JSON must look like {"weights": ["-3", "-2", "-1"]}')
        return cls(obj["weights"])

    def __str__(self):
        return "(" + ", ".join(str(w) for w in self.weights) + ")"


class SortedSpec(NamedTuple):
    """An induced spec re-sorted to adapted order, with the permutation used.

    ``perm[k]`` is the raw (pre-sort) coordinate index that landed at sorted
    position ``k``.
    """

    spec: WeightSpec
    perm: tuple[int, ...]


@dataclass(frozen=True)
class Flag:
    """The weight filtration as nested coordinate prefixes.

    ``levels[i] = (value, prefix)`` means the vectors of weight <= value are
    spanned by the first ``prefix`` adapted coordinates.  Leaves of the
    associated linear foliations are cosets ``v + <prefix coordinates>``.
    """

    levels: tuple[tuple[Weight, int], ...]

    @property
    def depth(self) -> int:
        return len(self.levels)

    def prefix(self, i: int) -> int:
        return self.levels[i][1]

    def index_set(self, i: int) -> frozenset[int]:
        return frozenset(range(self.levels[i][1]))

    def same_leaf(self, i: int, v, w, *, atol: float = 1e-9) -> bool:
        """Whether v and w lie on the same leaf of the level-i foliation."""
        d = np.asarray(v, dtype=float) - np.asarray(w, dtype=float)
        return bool(np.all(np.abs(d[self.prefix(i):]) <= atol))


def weight_of_vector(ws: WeightSpec, v, *, rel_tol: float = ZERO_REL_TOL) -> Weight:
    """Weight of a coordinate vector: the max coordinate weight on its support.

    Entries of magnitude below ``rel_tol`` times the largest entry are
    treated as zero; the zero vector gets ``NEG_INF``.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (ws.dim,):
        raise ValueError(f"vector of length {v.shape} does not match dim {ws.dim}")
    mags = np.abs(v)
    top = mags.max()
    if top == 0.0:
        return NEG_INF
    support = mags >= rel_tol * top
    return max(w for w, s in zip(ws.weights, support) if s)


def tensor_weight(ws1: WeightSpec, ws2: WeightSpec) -> SortedSpec:
    """Induced weight on the tensor product, re-sorted to adapted order.

    Raw coordinate (i, j) of the product (row-major) carries weight
    ``ws1[i] + ws2[j]``.
    """
    raw = [w1 + w2 for w1 in ws1.weights for w2 in ws2.weights]
    perm = tuple(sorted(range(len(raw)), key=lambda k: raw[k].fraction))
    return SortedSpec(WeightSpec(raw[k] for k in perm), perm)


def dual_weight(ws: WeightSpec) -> SortedSpec:
    """Induced weight on the dual space: dual coordinate i carries -ws[i]."""
    raw = [-w for w in ws.weights]
    perm = tuple(sorted(range(len(raw)), key=lambda k: raw[k].fraction))
    return SortedSpec(WeightSpec(raw[k] for k in perm), perm)


def quotient_weight(ws: WeightSpec, kept: Iterable[int]) -> WeightSpec:
    """Weight on the quotient by the complement of the kept coordinates.

    Any coordinate subset splits each filtration level, so the quotient is
    the restriction of the coordinate weights to ``kept`` (0-based indices).
    The per-level dimension count is still verified explicitly.
    """
    idx = sorted(set(kept))
    if not idx:
        raise ValueError("kept index set must be nonempty")
    if idx[0] < 0 or idx[-1] >= ws.dim:
        raise ValueError(f"kept indices out of range for dim {ws.dim}")
    if len(idx) != len(list(kept)):
        raise ValueError("kept indices must be distinct")
    comp = [i for i in range(ws.dim) if i not in set(idx)]
    for value, prefix in flag_of(ws).levels:
        in_kept = sum(1 for i in idx if i < prefix)
        in_comp = sum(1 for i in comp if i < prefix)
        if in_kept + in_comp != prefix:
            raise ValueError(
                f"kept set does not split the level <= {value}: "
                f"{in_kept} + {in_comp} != {prefix}"
            )
    return WeightSpec(ws.weights[i] for i in idx)


def multilinear_weight(
    ws_src: WeightSpec,
    ws_tgt: WeightSpec,
    k: int,
    tensor,
    *,
    rel_tol: float = ZERO_REL_TOL,
) -> Weight:
    """Weight of a k-multilinear map given by its coefficient tensor.

    ``tensor`` has shape (dim_tgt, dim_src, ..., dim_src) with k source axes;
    the weight is the max of ``tgt[i] - sum(src[j_1..j_k])`` over coefficients
    above the zero tolerance, or ``NEG_INF`` for the zero map.
    """
    if k < 0:
        raise ValueError("arity must be nonnegative")
    t = np.asarray(tensor, dtype=float)
    expect = (ws_tgt.dim,) + (ws_src.dim,) * k
    if t.shape != expect:
        raise ValueError(f"tensor shape {t.shape} does not match {expect}")
    mags = np.abs(t)
    top = mags.max()
    if top == 0.0:
        return NEG_INF
    best: Weight | None = None
    for idx in np.argwhere(mags >= rel_tol * top):
        i, rest = int(idx[0]), idx[1:]
        w = ws_tgt.weights[i].fraction - sum(ws_src.weights[int(j)].fraction for j in rest)
        cand = Weight(w)
        if best is None or cand > best:
            best = cand
    return best


def flag_of(ws: WeightSpec) -> Flag:
    """The nested filtration of a spec as coordinate prefixes."""
    levels = []
    prefix = 0
    for v, m in zip(ws.values, ws.multiplicities):
        prefix += m
        levels.append((v, prefix))
    return Flag(tuple(levels))


def compatible(ws1: WeightSpec, ws2: WeightSpec) -> bool:
    """Whether two specs take the same values with the same multiplicities."""
    return ws1.values == ws2.values and ws1.multiplicities == ws2.multiplicities
