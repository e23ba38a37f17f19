"""Canonical linearization of subresonant polynomial maps.

Scalar polynomials of weight at most ``-lambda_1`` on a negative-weight space
form a finite-dimensional space with a monomial basis.  Every subresonant map
f acts on that space by pullback h -> h o f; expressing the pullback in the
monomial bases (ordered by weight, then degree) yields a matrix whose
transpose is the linearization Lf on the dual space V.  The evaluation
embedding sends a point v to the vector of monomial values at v, its last
coordinate (the constant monomial) always 1, and satisfies

    embed(f(v)) = Lf @ embed(v),       L(g o f) = Lg @ Lf.

The monomial basis is declared orthonormal, which is the inner-product
convention under which the embedded origin is a unit vector orthogonal to
the strictly-negative-weight subspace and the derivative of the embedding at
the origin is an isometry.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .srpoly import (
    NotSubresonantError,
    PolyMap,
    classify,
    _poly_mul,
    _poly_pow,
)
from .weights import Weight, WeightSpec, compatible

__all__ = [
    "MonomialBasis",
    "LinearizedMap",
    "StructureReport",
    "monomial_basis",
    "pullback_matrix",
    "linearize",
    "embed",
    "project",
    "check_structure",
    "golden_334_matrix",
    "golden_334_check",
]


@dataclass(frozen=True, init=False)
class MonomialBasis:
    """Ordered monomial basis of the scalar polynomials of weight <= -lambda_1.

    Entries are the multi-indices alpha with sum(alpha_i * lambda_i) >=
    lambda_1, ordered by descending monomial weight, then ascending degree,
    then ascending lexicographic multi-index; the constant monomial comes
    last.  Coordinate k of the dual space carries the nonpositive weight
    sum(alpha_i * lambda_i) of entry k, so the ordering is adapted for the
    dual space as well.
    """

    space: WeightSpec
    entries: tuple[tuple[int, ...], ...]

    def __init__(self, space: WeightSpec):
        space.require_negative()
        lam1 = space.values[0].fraction
        caps = [math.floor(lam1 / w.fraction) for w in space.weights]
        found = []
        for alpha in itertools.product(*(range(c + 1) for c in caps)):
            s = space.alpha_weight(alpha).fraction
            if s >= lam1:
                found.append((alpha, s))
        found.sort(key=lambda item: (item[1], sum(item[0]), item[0]))
        entries = tuple(alpha for alpha, _ in found)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_index", {a: k for k, a in enumerate(entries)})

    @property
    def dim(self) -> int:
        return len(self.entries)

    @property
    def const_index(self) -> int:
        return self.dim - 1

    def index_of(self, alpha: tuple[int, ...]) -> int:
        return self._index[alpha]

    def degrees(self) -> tuple[int, ...]:
        return tuple(sum(a) for a in self.entries)

    def dual_weights(self) -> tuple[Weight, ...]:
        """Weight of each basis monomial as a scalar polynomial (>= 0)."""
        return tuple(-self.space.alpha_weight(a) for a in self.entries)

    def vector_weights(self) -> tuple[Weight, ...]:
        """Induced weight of each dual coordinate (<= 0, nondecreasing)."""
        return tuple(self.space.alpha_weight(a) for a in self.entries)

    def degree_one_indices(self) -> tuple[int, ...]:
        """Basis position of the coordinate monomial x_i, for each i."""
        out = []
        for i in range(self.space.dim):
            unit = tuple(1 if t == i else 0 for t in range(self.space.dim))
            out.append(self._index[unit])
        return tuple(out)

    def monomial_values(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.space.dim,):
            raise ValueError(f"point of shape {v.shape} does not match dim {self.space.dim}")
        out = np.empty(self.dim)
        for k, alpha in enumerate(self.entries):
            val = 1.0
            for i, a in enumerate(alpha):
                if a:
                    val *= v[i] ** a
            out[k] = val
        return out


@lru_cache(maxsize=None)
def monomial_basis(ws: WeightSpec) -> MonomialBasis:
    return MonomialBasis(ws)


@dataclass(frozen=True, eq=False)
class LinearizedMap:
    """The linearization Lf in the fixed monomial bases.

    ``matrix`` is the transpose of the pullback matrix, of shape
    (target basis dim, source basis dim).
    """

    basis_src: MonomialBasis
    basis_tgt: MonomialBasis
    matrix: np.ndarray


def pullback_matrix(f: PolyMap, *, leak_tol: float = 1e-9) -> np.ndarray:
    """Matrix of h -> h o f from the target to the source monomial basis.

    Column c holds the expansion of the c-th target monomial composed with f
    over the source monomials.  Subresonance keeps every generated monomial
    inside the source basis; anything outside above ``leak_tol`` (relative)
    is an error.
    """
    if not compatible(f.src, f.tgt):
        raise ValueError(f"specs are not compatible: {f.src} vs {f.tgt}")
    cls = classify(f)
    if not cls.is_subresonant:
        raise NotSubresonantError(f"pullback needs a subresonant map, got weight {cls.weight}")
    bs = monomial_basis(f.src)
    bt = monomial_basis(f.tgt)
    dim = f.src.dim
    comps = [f.component(i) for i in range(f.tgt.dim)]
    pow_cache: list[dict[int, dict]] = [dict() for _ in comps]

    def power(i: int, n: int):
        cache = pow_cache[i]
        if n not in cache:
            cache[n] = _poly_pow(comps[i], n, dim)
        return cache[n]

    m = np.zeros((bs.dim, bt.dim))
    one = {(0,) * dim: 1.0}
    scale = max(f.max_abs_coeff(), 1.0)
    for c, alpha in enumerate(bt.entries):
        poly = one
        for i, a in enumerate(alpha):
            if a:
                poly = _poly_mul(poly, power(i, a))
        for beta, coeff in poly.items():
            try:
                r = bs.index_of(beta)
            except KeyError:
                if abs(coeff) > leak_tol * scale ** max(sum(alpha), 1):
                    raise ValueError(
                        f"monomial {beta} of weight outside the basis appeared "
                        f"with coefficient {coeff:.3e}; the map is not subresonant"
                    ) from None
                continue
            m[r, c] += coeff
    return m


def linearize(f: PolyMap) -> LinearizedMap:
    """The linear action of f on the dual of the bounded-weight polynomials."""
    m = pullback_matrix(f)
    return LinearizedMap(monomial_basis(f.src), monomial_basis(f.tgt), m.T)


def embed(ws: WeightSpec, v) -> np.ndarray:
    """Evaluation embedding: the monomial values at v, constant slot 1."""
    return monomial_basis(ws).monomial_values(v)


def project(ws: WeightSpec, xi) -> np.ndarray:
    """Extract the degree-1 monomial coordinates; a left inverse of embed."""
    basis = monomial_basis(ws)
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (basis.dim,):
        raise ValueError(f"vector of shape {xi.shape} does not match basis dim {basis.dim}")
    return xi[list(basis.degree_one_indices())]


@dataclass(frozen=True, eq=False)
class StructureReport:
    """Structural diagnostics of a linearized map.

    ``triangular_violations`` lists (row, col, value) entries of the pullback
    matrix above the (weight, degree) staircase: entries whose source
    monomial has larger weight than the target monomial, or equal weight and
    strictly smaller degree.  ``nilpotency_defect`` is the max-abs entry of
    (Lf - I)^dim (None for non-square maps).  ``constant_row_defect``
    measures how far the constant-monomial row of Lf is from the unit vector
    that pins embedded points to the affine slice; ``constant_column_defect``
    compares the constant column of Lf against the embedded image of the
    origin when the generating map is supplied.
    """

    matrix_max: float
    triangular_max_violation: float
    triangular_violations: tuple[tuple[int, int, float], ...]
    constant_row_defect: float
    nilpotency_defect: float | None
    constant_column_defect: float | None


def check_structure(
    lin: LinearizedMap,
    f: PolyMap | None = None,
    *,
    report_tol: float = 0.0,
) -> StructureReport:
    """Verify block triangularity, unipotence data, and the constant slots."""
    pull = lin.matrix.T
    ws = lin.basis_src.dual_weights()
    wt = lin.basis_tgt.dual_weights()
    ds = lin.basis_src.degrees()
    dt = lin.basis_tgt.degrees()
    violations = []
    worst = 0.0
    for r in range(pull.shape[0]):
        for c in range(pull.shape[1]):
            bad = ws[r] > wt[c] or (ws[r] == wt[c] and ds[r] < dt[c])
            if bad and abs(pull[r, c]) > report_tol:
                violations.append((r, c, float(pull[r, c])))
                worst = max(worst, abs(pull[r, c]))
    const_row = lin.matrix[lin.basis_tgt.const_index, :].copy()
    const_row[lin.basis_src.const_index] -= 1.0
    row_defect = float(np.max(np.abs(const_row)))
    nil = None
    if lin.matrix.shape[0] == lin.matrix.shape[1]:
        p = lin.matrix - np.eye(lin.matrix.shape[0])
        q = np.eye(lin.matrix.shape[0])
        for _ in range(lin.matrix.shape[0]):
            q = q @ p
        nil = float(np.max(np.abs(q)))
    col_defect = None
    if f is not None:
        expected = embed(f.tgt, f.constant_vector())
        col = lin.matrix[:, lin.basis_src.const_index]
        col_defect = float(np.max(np.abs(col - expected)))
    return StructureReport(
        matrix_max=float(np.max(np.abs(lin.matrix))),
        triangular_max_violation=worst,
        triangular_violations=tuple(violations),
        constant_row_defect=row_defect,
        nilpotency_defect=nil,
        constant_column_defect=col_defect,
    )


# ----- built-in worked example on weights (-3, -2, -1) ----------------------

_SPEC_334 = WeightSpec([-3, -2, -1])

_COEFF_SLOTS_334 = {
    "a0": (0, (0, 0, 0)), "a1": (0, (1, 0, 0)), "a2": (0, (0, 1, 0)),
    "a3": (0, (0, 0, 1)), "a4": (0, (0, 1, 1)), "a5": (0, (0, 0, 2)),
    "a6": (0, (0, 0, 3)),
    "b0": (1, (0, 0, 0)), "b1": (1, (0, 1, 0)), "b2": (1, (0, 0, 1)),
    "b3": (1, (0, 0, 2)),
    "c0": (2, (0, 0, 0)), "c1": (2, (0, 0, 1)),
}


def golden_334_matrix(f: PolyMap) -> np.ndarray:
    """Closed-form pullback matrix of the general self-map on (-3, -2, -1).

    The general subresonant self-map of the 3-variable space has 13 free
    coefficients; this evaluates the known entry formulas directly, giving
    an oracle independent of the expansion code path.
    """
    if f.src != _SPEC_334 or f.tgt != _SPEC_334:
        raise ValueError("the built-in example lives on weights (-3, -2, -1)")
    legal = set(_COEFF_SLOTS_334.values())
    extra = [t for t in f.terms if t not in legal]
    if extra:
        raise ValueError(f"terms outside the general subresonant form: {extra}")
    k = {name: f.terms.get(slot, 0.0) for name, slot in _COEFF_SLOTS_334.items()}
    a0, a1, a2, a3, a4, a5, a6 = (k[f"a{i}"] for i in range(7))
    b0, b1, b2, b3 = (k[f"b{i}"] for i in range(4))
    c0, c1 = k["c0"], k["c1"]
    return np.array([
        [a1, 0.0,               0.0,            0.0, 0.0,         0.0, 0.0],
        [a4, b1 * c1,           0.0,            0.0, 0.0,         0.0, 0.0],
        [a6, b3 * c1,           c1 ** 3,        0.0, 0.0,         0.0, 0.0],
        [a2, b1 * c0,           0.0,            b1,  0.0,         0.0, 0.0],
        [a5, b2 * c1 + b3 * c0, 3 * c0 * c1 ** 2, b3, c1 ** 2,    0.0, 0.0],
        [a3, b0 * c1 + b2 * c0, 3 * c0 ** 2 * c1, b2, 2 * c0 * c1, c1, 0.0],
        [a0, b0 * c0,           c0 ** 3,        b0,  c0 ** 2,     c0,  1.0],
    ])


def golden_334_check(f: PolyMap, *, rel_tol: float = 1e-12) -> dict:
    """Compare the computed pullback against the closed form, entrywise.

    Returns a report dict with the max relative deviation, the transpose
    consistency of the linearization, and the structural diagnostics.
    """
    expected = golden_334_matrix(f)
    actual = pullback_matrix(f)
    scale = np.maximum(np.abs(expected), 1.0)
    rel = float(np.max(np.abs(actual - expected) / scale))
    lin = linearize(f)
    transpose_defect = float(np.max(np.abs(lin.matrix - actual.T)))
    report = check_structure(lin, f)
    return {
        "max_rel_error": rel,
        "transpose_defect": transpose_defect,
        "triangular_max_violation": report.triangular_max_violation,
        "constant_row_defect": report.constant_row_defect,
        "ok": bool(
            rel <= rel_tol
            and transpose_defect == 0.0
            and report.triangular_max_violation <= rel_tol
        ),
    }
