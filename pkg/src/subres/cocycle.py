"""Cocycle sequences over weighted spaces and their quantitative diagnostics.

Provides seeded generators of linear and subresonant polynomial cocycles
whose design exponents are the spec weights, finite-horizon Lyapunov weight
and spectrum estimators (QR renormalization), the forwards-regularity
defect, the one-sided Lyapunov metric built from the discounted Gram series,
exponent merging for block-triangular sequences with the explicit correction
coefficients, verification of the polarized growth bounds under repeated
composition, and the equivariance-transport harness that makes the growth
dichotomy between subresonant and super-resonant data observable.

All long products are renormalized step by step (log norms are accumulated
instead of raw products) so that horizons in the thousands neither overflow
nor underflow.  Generators are deterministic given (seed, parameters).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .srpoly import PolyMap, SRKind, classify, compose, invert, poly_norm, polarization
from .weights import Weight, WeightSpec, weight_of_vector

__all__ = [
    "CocycleSequence",
    "LyapunovSpectrum",
    "LyapunovMetric",
    "MetricReport",
    "MergeResult",
    "GrowthReport",
    "WeightEstimate",
    "generate_sequence",
    "lyapunov_weight",
    "estimate_exponents",
    "forward_regularity",
    "lyapunov_metric",
    "metric_report",
    "triangular_merge",
    "growth_check",
    "equivariance_transport",
    "transport_norm_series",
    "norm_growth_rate",
]

_MODES = ("diagonal_model", "perturbed", "polynomial")


@dataclass(frozen=True, eq=False)
class CocycleSequence:
    """A stored sequence of invertible steps over a fixed weighted space.

    ``matrices`` holds the linear parts, shape (N, d, d); for polynomial
    sequences ``polys`` holds the full maps (vanishing at the origin) and
    ``matrices`` their derivatives at zero.
    """

    spec: WeightSpec
    mode: str
    eps: float
    seed: int | None
    matrices: np.ndarray
    polys: tuple[PolyMap, ...] | None = None

    def __len__(self) -> int:
        return self.matrices.shape[0]

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def is_polynomial(self) -> bool:
        return self.polys is not None

    def poly_maps(self) -> tuple[PolyMap, ...]:
        """The steps as polynomial maps (linear steps are wrapped)."""
        if self.polys is not None:
            return self.polys
        return tuple(
            PolyMap.linear(self.spec, self.spec, a) for a in self.matrices
        )

    @classmethod
    def from_matrices(
        cls,
        spec: WeightSpec,
        matrices,
        *,
        det_tol: float = 1e-300,
        mode: str = "user",
        eps: float = 0.0,
        seed: int | None = None,
    ) -> "CocycleSequence":
        a = np.asarray(matrices, dtype=float)
        if a.ndim != 3 or a.shape[1:] != (spec.dim, spec.dim):
            raise ValueError(f"expected shape (N, {spec.dim}, {spec.dim}), got {a.shape}")
        dets = np.linalg.det(a)
        if np.any(np.abs(dets) < det_tol):
            bad = int(np.argmin(np.abs(dets)))
            raise ValueError(f"step {bad} is singular: |det| = {abs(dets[bad]):.3e}")
        return cls(spec=spec, mode=mode, eps=eps, seed=seed, matrices=a)


def _legal_higher_terms(spec: WeightSpec) -> list[tuple[int, tuple[int, ...]]]:
    """All (output, multi-index) slots of degree >= 2 and weight <= 0."""
    import itertools

    d0 = spec.d0
    lam1 = spec.values[0].fraction
    caps = [min(d0, int(lam1 // w.fraction)) for w in spec.weights]
    out = []
    for alpha in itertools.product(*(range(c + 1) for c in caps)):
        deg = sum(alpha)
        if deg < 2 or deg > d0:
            continue
        s = spec.alpha_weight(alpha)
        for j in range(spec.dim):
            if spec.weights[j] - s <= 0:
                out.append((j, alpha))
    return sorted(out)


def _block_orthogonal(rng: np.random.Generator, spec: WeightSpec) -> np.ndarray:
    """Haar-ish orthogonal matrix preserving each weight block."""
    d = spec.dim
    r = np.zeros((d, d))
    for start, stop, _ in spec.blocks():
        m = stop - start
        if m == 1:
            r[start, start] = rng.choice([-1.0, 1.0])
        else:
            g = rng.standard_normal((m, m))
            q, rr = np.linalg.qr(g)
            q = q * np.sign(np.diag(rr))
            r[start:stop, start:stop] = q
    return r


def generate_sequence(
    spec: WeightSpec,
    mode: str,
    eps: float,
    seed: int,
    n_steps: int,
    *,
    higher_scale: float = 0.5,
    extra_term: tuple[int, tuple[int, ...], float] | None = None,
) -> CocycleSequence:
    """Deterministic model sequences whose design exponents are the weights.

    Parameters
    ----------
    spec : WeightSpec
        Negative weights; coordinate i contracts at design rate spec[i].
    mode : str
        'diagonal_model': per step an orthogonal mixing inside each weight
        block times the block scale e^(lambda_j + u) with per-block jitter
        |u| <= eps.  With eps = 0 the steps are exact block isometries
        scaled by the design rates.
        'perturbed': the diagonal model plus strictly weight-decreasing
        off-diagonal entries of magnitude O(eps), so the per-step norms stay
        bounded and the norm growth rate is zero.
        'polynomial': subresonant polynomial steps vanishing at the origin,
        linear part from the diagonal model, higher-degree coefficients of
        size <= higher_scale * eps * e^(eps * i).
    eps : float
        Rate slack; the generated steps satisfy |D0 f_i v| <= e^(w(v)+eps)|v|
        and |f_i|_P <= C e^(eps * i).
    seed, n_steps : int
        RNG seed and horizon.
    extra_term : optional (out, alpha, coeff)
        A fixed extra polynomial term added to every step, e.g. a
        super-resonant marker for negative controls.
    """
    if mode not in _MODES:
        raise ValueError(f"unknown mode {mode!r}, expected one of {_MODES}")
    spec.require_negative()
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    rng = np.random.default_rng(seed)
    d = spec.dim
    blocks = spec.blocks()
    lam = spec.floats()
    mats = np.empty((n_steps, d, d))
    for i in range(n_steps):
        r = _block_orthogonal(rng, spec)
        scale = np.empty(d)
        for start, stop, value in blocks:
            u = rng.uniform(-eps, eps) if eps > 0 else 0.0
            scale[start:stop] = np.exp(float(value) + u)
        mats[i] = r * scale[:, None]
        if mode == "perturbed" and eps > 0:
            for r_i in range(d):
                for c_i in range(d):
                    if lam[r_i] < lam[c_i]:
                        mats[i, r_i, c_i] += 0.5 * eps * rng.uniform(-1.0, 1.0)
    if mode != "polynomial":
        return CocycleSequence(spec=spec, mode=mode, eps=eps, seed=seed, matrices=mats)
    slots = _legal_higher_terms(spec)
    polys = []
    for i in range(n_steps):
        terms: dict = {}
        for j in range(d):
            for c in range(d):
                if mats[i, j, c] != 0.0:
                    alpha = tuple(1 if t == c else 0 for t in range(d))
                    terms[(j, alpha)] = mats[i, j, c]
        amp = higher_scale * eps * np.exp(eps * i)
        for j, alpha in slots:
            coeff = amp * rng.uniform(-1.0, 1.0)
            if coeff != 0.0:
                terms[(j, alpha)] = terms.get((j, alpha), 0.0) + coeff
        if extra_term is not None:
            j, alpha, coeff = extra_term
            terms[(j, tuple(alpha))] = terms.get((j, tuple(alpha)), 0.0) + coeff
        polys.append(PolyMap(spec, spec, terms, drop_tol=0.0))
    return CocycleSequence(
        spec=spec, mode=mode, eps=eps, seed=seed, matrices=mats, polys=tuple(polys)
    )


@dataclass(frozen=True)
class WeightEstimate:
    """Finite-horizon Lyapunov weight with its per-step partial estimates."""

    value: float
    partials: np.ndarray


def lyapunov_weight(seq: CocycleSequence, v) -> WeightEstimate:
    """Estimate limsup (1/n) log |A_0^(n) v| at the stored horizon.

    The running product is renormalized every step; the partials array holds
    the estimate after each step for convergence diagnostics.
    """
    x = np.asarray(v, dtype=float).copy()
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        raise ValueError("the zero vector has no Lyapunov weight")
    acc = 0.0
    base = np.log(norm)
    x /= norm
    n = len(seq)
    partials = np.empty(n)
    for i in range(n):
        x = seq.matrices[i] @ x
        step = float(np.linalg.norm(x))
        acc += np.log(step)
        x /= step
        partials[i] = (acc + base) / (i + 1)
    return WeightEstimate(value=float(partials[-1]), partials=partials)


def estimate_exponents(matrices, *, with_series: bool = False):
    """QR-renormalized estimate of the full exponent list, ascending.

    ``matrices`` is the (N, d, d) stack (or a CocycleSequence); returns the
    averaged log diagonal of the R factors, optionally with the running
    estimates (N, d) used for convergence plots.
    """
    if isinstance(matrices, CocycleSequence):
        matrices = matrices.matrices
    a = np.asarray(matrices, dtype=float)
    n, d = a.shape[0], a.shape[1]
    q = np.eye(d)
    sums = np.zeros(d)
    series = np.empty((n, d)) if with_series else None
    for i in range(n):
        z = a[i] @ q
        q, r = np.linalg.qr(z)
        diag = np.abs(np.diag(r))
        sign = np.sign(np.diag(r))
        sign[sign == 0] = 1.0
        q = q * sign
        sums += np.log(diag)
        if with_series:
            series[i] = np.sort(sums / (i + 1))
    est = np.sort(sums / n)
    if with_series:
        return est, series
    return est


@dataclass(frozen=True)
class LyapunovSpectrum:
    """Exponents with multiplicities, ascending, plus the regularity defect."""

    exponents: tuple[tuple[float, int], ...]
    regularity_defect: float | None = None

    def __post_init__(self):
        vals = [v for v, _ in self.exponents]
        if any(vals[i] >= vals[i + 1] for i in range(len(vals) - 1)):
            raise ValueError("exponents must be strictly increasing")
        if any(m < 1 for _, m in self.exponents):
            raise ValueError("multiplicities must be positive")

    @property
    def dim(self) -> int:
        return sum(m for _, m in self.exponents)

    def flat(self) -> np.ndarray:
        return np.array([v for v, m in self.exponents for _ in range(m)])

    def weighted_sum(self) -> float:
        return float(sum(v * m for v, m in self.exponents))

    @classmethod
    def from_spec(cls, ws: WeightSpec) -> "LyapunovSpectrum":
        return cls(
            tuple((float(v), m) for v, m in zip(ws.values, ws.multiplicities))
        )


def forward_regularity(seq: CocycleSequence, claimed: LyapunovSpectrum | WeightSpec) -> float:
    """Defect |(1/N) log |det A_0^(N)| - sum(m_i lambda_i)| at the horizon."""
    if isinstance(claimed, WeightSpec):
        claimed = LyapunovSpectrum.from_spec(claimed)
    if claimed.dim != seq.dim:
        raise ValueError(f"spectrum dim {claimed.dim} does not match {seq.dim}")
    logdet = float(np.sum(np.log(np.abs(np.linalg.det(seq.matrices)))))
    return abs(logdet / len(seq) - claimed.weighted_sum())


@dataclass(frozen=True, eq=False)
class LyapunovMetric:
    """One-sided Lyapunov inner products as per-step Gram matrices.

    ``grams[k]`` is the Gram matrix of the step-k inner product on the
    adapted coordinate basis: the discounted series of pushed-forward inner
    products, truncated at the stored horizon.  ``tail_terms`` and
    ``tail_ratios`` record the final summand norm and its geometric ratio per
    step, giving the reported remainder bounds; a tail ratio >= 1 marks the
    series as non-convergent (hypothesis failure, not an exception).
    """

    spec: WeightSpec
    eps: float
    grams: np.ndarray
    tail_terms: np.ndarray
    tail_ratios: np.ndarray
    remainder_bounds: np.ndarray
    convergent: bool
    regularity_defect: float

    def norm(self, k: int, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(np.sqrt(v @ self.grams[k] @ v))


def lyapunov_metric(
    seq: CocycleSequence,
    eps: float,
    *,
    regularity_tol: float = 0.25,
) -> LyapunovMetric:
    """Build the discounted Gram series metric for every step of a sequence.

    The basis vector of design weight w evolved m steps from k enters the
    step-k Gram scaled by e^(-m (eps + w)), so the accumulated matrices stay
    O(1) and the series converges geometrically whenever the sequence tracks
    its design exponents to within eps.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    defect = forward_regularity(seq, seq.spec)
    if defect > regularity_tol:
        raise ValueError(
            f"sequence is not forwards regular within {regularity_tol}: defect {defect:.3f}"
        )
    n, d = len(seq), seq.dim
    a = seq.matrices
    col_scale = np.exp(-(eps + seq.spec.floats()))
    z = np.tile(np.eye(d), (n + 1, 1, 1))
    grams = np.tile(np.eye(d), (n + 1, 1, 1))
    tail = np.zeros(n + 1)
    prev = np.zeros(n + 1)
    ratios = np.full(n + 1, np.nan)
    tail[n] = 1.0
    for m in range(1, n + 1):
        active = n - m + 1
        z[:active] = (a[m - 1: m - 1 + active] @ z[:active]) * col_scale
        term = np.transpose(z[:active], (0, 2, 1)) @ z[:active]
        grams[:active] += term
        norms = np.sqrt(np.sum(term * term, axis=(1, 2)))
        k_exit = active - 1
        tail[k_exit] = norms[k_exit]
        if prev[k_exit] > 0:
            ratios[k_exit] = norms[k_exit] / prev[k_exit]
        prev[:active] = norms
    with np.errstate(invalid="ignore", divide="ignore"):
        rem = np.where(
            (ratios < 1.0) & np.isfinite(ratios),
            tail * ratios / (1.0 - ratios),
            np.inf,
        )
    rem[n] = 0.0
    enough = np.arange(n + 1) <= n - 10
    convergent = bool(np.all(ratios[enough & np.isfinite(ratios)] < 1.0)) if n >= 10 else True
    return LyapunovMetric(
        spec=seq.spec,
        eps=eps,
        grams=grams,
        tail_terms=tail,
        tail_ratios=ratios,
        remainder_bounds=rem,
        convergent=convergent,
        regularity_defect=defect,
    )


@dataclass(frozen=True, eq=False)
class MetricReport:
    """Log-scale margins of the one-sided metric inequalities.

    Conclusion 1 is the per-step contraction bound |A v|'_n <=
    e^(n (w(v)+eps)) |v|'_0; its violation is max(0, lhs - rhs) in logs over
    all test vectors and every stored step, and the margin is the smallest
    slack over steps n >= 1 (at n = 0 the bound is an identity).  Conclusion
    2's lower bound |v| <= |v|'_n is checked for all v at once through the
    smallest eigenvalue of G_n - I; its upper bound is summarized by the
    discounted operator-norm envelope L_eps with the tail margin showing the
    envelope is not attained near the horizon.  Conclusion 3 is the
    asymptotic lower bound, reported as the worst defect over the second
    half of the horizon.
    """

    eps: float
    conclusion1_max_violation: float
    conclusion1_min_margin: float
    conclusion2_lower_max_violation: float
    l_eps: float
    conclusion2_tail_margin: float
    conclusion3_max_defect: float
    convergent: bool
    regularity_defect: float


def metric_report(
    seq: CocycleSequence,
    eps: float,
    *,
    metric: LyapunovMetric | None = None,
    n_random: int = 4,
    seed: int = 0,
) -> MetricReport:
    """Check the metric's contraction and comparability bounds on a sequence."""
    if metric is None:
        metric = lyapunov_metric(seq, eps)
    n, d = len(seq), seq.dim
    rng = np.random.default_rng(seed)
    vectors = [np.eye(d)[i] for i in range(d)]
    for _ in range(n_random):
        v = rng.standard_normal(d)
        vectors.append(v / np.linalg.norm(v))
    worst1 = -np.inf
    margin1 = np.inf
    worst3 = -np.inf
    for v in vectors:
        w = float(weight_of_vector(seq.spec, v))
        x = np.asarray(v, dtype=float).copy()
        acc = 0.0
        lhs0 = np.log(metric.norm(0, x))
        slack0 = None
        for step in range(1, n + 1):
            x = seq.matrices[step - 1] @ x
            nrm = float(np.linalg.norm(x))
            acc += np.log(nrm)
            x /= nrm
            lhs = acc + np.log(metric.norm(step, x))
            rhs = step * (w + eps) + lhs0
            slack = rhs - lhs
            worst1 = max(worst1, -slack)
            margin1 = min(margin1, slack)
            if step >= n // 2:
                lower = step * (w - eps) + lhs0
                worst3 = max(worst3, lower - lhs)
    eigs = np.linalg.eigvalsh(metric.grams)
    worst2 = float(np.max(np.maximum(0.0, 1.0 - eigs[:, 0])))
    ceil = np.sqrt(eigs[:, -1])
    discounted = np.log(ceil) - 0.5 * eps * np.arange(n + 1)
    l_eps = float(np.exp(np.max(discounted)))
    head = discounted[: max(1, (3 * (n + 1)) // 4)]
    tail = discounted[max(1, (3 * (n + 1)) // 4):]
    tail_margin = float(np.max(head) - np.max(tail)) if tail.size else np.inf
    return MetricReport(
        eps=eps,
        conclusion1_max_violation=float(max(worst1, 0.0)),
        conclusion1_min_margin=float(margin1),
        conclusion2_lower_max_violation=worst2,
        l_eps=l_eps,
        conclusion2_tail_margin=tail_margin,
        conclusion3_max_defect=float(max(worst3, 0.0)),
        convergent=metric.convergent,
        regularity_defect=metric.regularity_defect,
    )


@dataclass(frozen=True, eq=False)
class MergeResult:
    """Outcome of merging two regular blocks across a triangular coupling.

    ``coefficients[i, j]`` is the truncated correction series c_ij (zero
    where the upper-block rate does not dominate), ``corrected[:, j]`` the
    corrected vector whose forward rate recovers the lower-block exponent,
    and ``remainder_bounds`` the geometric tail estimate of the truncation.
    """

    spectrum: LyapunovSpectrum
    coefficients: np.ndarray
    remainder_bounds: np.ndarray
    corrected: np.ndarray
    corrected_exponents: np.ndarray
    uncorrected_exponents: np.ndarray
    expected_exponents: np.ndarray
    det_defect: float


def triangular_merge(
    seq_a: CocycleSequence,
    seq_b: CocycleSequence,
    u_mats,
    *,
    u_growth_tol: float = 0.05,
) -> MergeResult:
    """Exponents of the block-triangular sequence [[A, U], [0, B]].

    The off-diagonal blocks must grow subexponentially; the lower-block
    basis vectors are corrected by the explicit series over the moving upper
    frame so that their forward rates drop from the dominating upper
    exponents back to the lower ones.
    """
    n = len(seq_a)
    if len(seq_b) != n:
        raise ValueError("block sequences must have equal length")
    p, q = seq_a.dim, seq_b.dim
    u = np.asarray(u_mats, dtype=float)
    if u.shape != (n, p, q):
        raise ValueError(f"expected U of shape {(n, p, q)}, got {u.shape}")
    norms = np.linalg.norm(u, axis=(1, 2))
    log_plus = np.log(np.maximum(norms, 1.0))
    start = max(1, (3 * n) // 4)
    rates = log_plus[start:] / np.arange(start + 1, n + 1)
    if rates.size and float(np.max(rates)) > u_growth_tol:
        raise ValueError(
            f"off-diagonal growth rate {float(np.max(rates)):.4f} exceeds {u_growth_tol}"
        )
    lam = seq_a.spec.floats()
    eta = seq_b.spec.floats()
    dominated = lam[:, None] > eta[None, :]

    e_frame = np.eye(p)
    a_logs = np.zeros(p)
    f_frame = np.eye(q)
    b_logs = np.zeros(q)
    coeff = np.zeros((p, q))
    window: list[np.ndarray] = []
    for k in range(1, n + 1):
        # coordinates of U_{k-1} applied to the moving lower frame, expanded
        # on the moving upper frame (both frames carry k-1 steps here)
        u_on_frame = np.linalg.solve(e_frame, u[k - 1] @ f_frame)
        e_frame = seq_a.matrices[k - 1] @ e_frame
        step_norms = np.linalg.norm(e_frame, axis=0)
        a_logs += np.log(step_norms)
        e_frame /= step_norms
        term = np.exp(b_logs[None, :] - a_logs[:, None]) * u_on_frame
        coeff += np.where(dominated, term, 0.0)
        window.append(np.abs(term))
        if len(window) > 8:
            window.pop(0)
        f_frame = seq_b.matrices[k - 1] @ f_frame
        step_norms = np.linalg.norm(f_frame, axis=0)
        b_logs += np.log(step_norms)
        f_frame /= step_norms
    tail = window[-1]
    first = window[0]
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = (tail / first) ** (1.0 / max(len(window) - 1, 1))
        rem = np.where((ratio < 1.0) & np.isfinite(ratio), tail * ratio / (1.0 - ratio), np.inf)
    rem = np.where(tail == 0.0, 0.0, rem)
    rem = np.where(dominated, rem, 0.0)

    big = np.zeros((n, p + q, p + q))
    big[:, :p, :p] = seq_a.matrices
    big[:, p:, p:] = seq_b.matrices
    big[:, :p, p:] = u
    merged = CocycleSequence(
        spec=seq_a.spec, mode="merged", eps=0.0, seed=None,
        matrices=big,
    )
    corrected = np.zeros((p + q, q))
    corrected_exp = np.empty(q)
    uncorrected_exp = np.empty(q)
    for j in range(q):
        vec = np.zeros(p + q)
        vec[p + j] = 1.0
        uncorrected_exp[j] = lyapunov_weight(merged, vec).value
        vec[:p] = -np.where(dominated[:, j], coeff[:, j], 0.0)
        corrected[:, j] = vec
        corrected_exp[j] = lyapunov_weight(merged, vec).value
    exp_a = estimate_exponents(seq_a)
    exp_b = estimate_exponents(seq_b)
    union = np.sort(np.concatenate([exp_a, exp_b]))
    logdet_a = float(np.sum(np.log(np.abs(np.linalg.det(seq_a.matrices)))))
    logdet_b = float(np.sum(np.log(np.abs(np.linalg.det(seq_b.matrices)))))
    logdet_l = float(np.sum(np.log(np.abs(np.linalg.det(big)))))
    det_defect = abs(logdet_l - logdet_a - logdet_b)
    eps_sep = 1e-9
    grouped: list[list[float]] = []
    for v in union:
        if grouped and abs(v - grouped[-1][-1]) <= eps_sep:
            grouped[-1].append(float(v))
        else:
            grouped.append([float(v)])
    spectrum = LyapunovSpectrum(
        tuple((float(np.mean(g)), len(g)) for g in grouped),
        regularity_defect=abs(logdet_l / n - float(union.sum())),
    )
    return MergeResult(
        spectrum=spectrum,
        coefficients=np.where(dominated, coeff, 0.0),
        remainder_bounds=rem,
        corrected=corrected,
        corrected_exponents=corrected_exp,
        uncorrected_exponents=uncorrected_exp,
        expected_exponents=eta.copy(),
        det_defect=det_defect,
    )


@dataclass(frozen=True, eq=False)
class GrowthReport:
    """Smallest constants for the polarized growth bounds, with stability.

    ``c_hat[k]`` is the smallest constant making the degree-k polarized
    bound hold over every stored step for the sampled pure tensors;
    ``c_hat_half[k]`` the same over the first half.  A ratio above the
    stability threshold flags that degree as DIVERGING.  The orbit bounds
    report the analogous constants for points of the unit ball, and the
    lower bound is only evaluated where its norm hypothesis is observed.
    """

    eps: float
    degree_bound: int
    c_hat: dict[int, float]
    c_hat_half: dict[int, float]
    status: dict[int, str]
    upper_c: float
    upper_c_half: float
    upper_status: str
    lower_n0: tuple[int, ...]
    lower_c: float | None
    warnings: tuple[str, ...]


def growth_check(
    seq: CocycleSequence,
    eps: float,
    *,
    seed: int = 0,
    n_tensors: int = 4,
    n_points: int = 4,
    ratio_threshold: float = 1.5,
) -> GrowthReport:
    """Measure the constants in the composed-growth bounds of a sequence.

    For each degree k up to the subresonant bound, the polarized component
    of the running composition is contracted against sampled pure tensors
    and the smallest admissible constant for the bound with slack 3 k eps is
    recorded, along with its value at half horizon; super-resonant data
    makes the constant blow up with the horizon and is flagged DIVERGING.
    """
    if not seq.is_polynomial:
        raise ValueError("growth_check needs a polynomial-mode sequence")
    warnings: list[str] = []
    spec = seq.spec
    d0 = spec.d0
    bound = float(-spec.values[-1].fraction) / (10 * d0)
    if not 0 < eps:
        raise ValueError("eps must be positive")
    if eps >= bound:
        warnings.append(f"eps {eps} is not below the admissible bound {bound:.4g}")
    rng = np.random.default_rng(seed)
    n, d = len(seq), seq.dim
    w_float = spec.floats()

    samples: dict[int, list[tuple[list[np.ndarray], float, float]]] = {}
    for k in range(1, d0 + 1):
        entries = []
        for t in range(n_tensors):
            if t % 2 == 0:
                idx = rng.integers(0, d, size=k)
                vecs = [np.eye(d)[i] for i in idx]
            else:
                vecs = []
                for _ in range(k):
                    v = rng.standard_normal(d)
                    vecs.append(v / np.linalg.norm(v))
            wsum = float(sum(float(weight_of_vector(spec, v)) for v in vecs))
            lognrm = float(sum(np.log(np.linalg.norm(v)) for v in vecs))
            entries.append((vecs, wsum, lognrm))
        samples[k] = entries

    log_c = {k: -np.inf for k in range(1, d0 + 1)}
    log_c_half = {k: -np.inf for k in range(1, d0 + 1)}
    current = PolyMap.identity(spec)
    half = n // 2
    for step in range(n + 1):
        for k in range(1, d0 + 1):
            t = polarization(current, k)
            for vecs, wsum, lognrm in samples[k]:
                out = t
                for v in vecs:
                    out = np.tensordot(out, v, axes=([1], [0]))
                nrm = float(np.linalg.norm(out))
                if nrm <= 0.0:
                    continue
                val = np.log(nrm) - step * (wsum + 3 * k * eps) - lognrm
                if val > log_c[k]:
                    log_c[k] = val
                if step <= half and val > log_c_half[k]:
                    log_c_half[k] = val
        if step < n:
            current = compose(seq.polys[step], current, drop_tol=0.0, max_deg=d0)
            if current.max_abs_coeff() > 1e280:
                warnings.append(f"composition coefficients overflow guard hit at step {step}")
                n = step + 1
                break

    status = {}
    for k in log_c:
        ratio = np.exp(log_c[k] - log_c_half[k]) if np.isfinite(log_c_half[k]) else np.inf
        finite = np.isfinite(log_c[k]) and ratio <= ratio_threshold
        status[k] = "FINITE" if (finite or not np.isfinite(log_c[k])) else "DIVERGING"

    points = []
    for _ in range(n_points):
        x = rng.standard_normal(d)
        x *= rng.uniform(0.2, 1.0) / np.linalg.norm(x)
        points.append(x)
    up = -np.inf
    up_half = -np.inf
    for x0 in points:
        w0 = float(weight_of_vector(spec, x0))
        base = np.log(np.linalg.norm(x0))
        x = x0.copy()
        for step in range(1, n + 1):
            x = seq.polys[step - 1](x)
            nrm = float(np.linalg.norm(x))
            if nrm < 1e-280:
                break
            val = np.log(nrm) - step * (w0 + eps) - base
            up = max(up, val)
            if step <= half:
                up_half = max(up_half, val)
    up_ratio = np.exp(up - up_half) if np.isfinite(up_half) else np.inf
    upper_status = "FINITE" if up_ratio <= ratio_threshold else "DIVERGING"

    lower_n0 = []
    hypothesis_ok = True
    for x0 in points:
        w0 = float(weight_of_vector(spec, x0))
        x = x0 / np.linalg.norm(x0)
        acc = 0.0
        good_from = 0
        for step in range(1, n + 1):
            x = seq.matrices[step - 1] @ x
            nrm = float(np.linalg.norm(x))
            acc += np.log(nrm)
            x /= nrm
            if acc < step * (w0 - eps):
                good_from = step + 1
        lower_n0.append(good_from)
        if good_from > n // 2:
            hypothesis_ok = False
    if hypothesis_ok:
        low = -np.inf
        for x0 in points:
            w0 = float(weight_of_vector(spec, x0))
            base = np.log(np.linalg.norm(x0))
            x = x0.copy()
            for step in range(1, n + 1):
                x = seq.polys[step - 1](x)
                nrm = float(np.linalg.norm(x))
                if nrm < 1e-280:
                    break
                low = max(low, step * (w0 - eps) + base - np.log(nrm))
        lower_c = float(np.exp(low))
    else:
        lower_c = None
        warnings.append("lower-bound norm hypothesis not observed on sampled vectors")

    return GrowthReport(
        eps=eps,
        degree_bound=d0,
        c_hat={k: float(np.exp(v)) for k, v in log_c.items()},
        c_hat_half={k: float(np.exp(v)) for k, v in log_c_half.items()},
        status=status,
        upper_c=float(np.exp(up)),
        upper_c_half=float(np.exp(up_half)),
        upper_status=upper_status,
        lower_n0=tuple(lower_n0),
        lower_c=lower_c,
        warnings=tuple(warnings),
    )


def _transport_steps(f_seq: CocycleSequence, g_seq: CocycleSequence, h0: PolyMap, n_steps: int):
    if n_steps > min(len(f_seq), len(g_seq)):
        raise ValueError("not enough stored steps for the requested horizon")
    if h0.src != g_seq.spec or h0.tgt != f_seq.spec:
        raise ValueError("h0 must map the g-space into the f-space")
    f_polys = f_seq.poly_maps()
    g_polys = g_seq.poly_maps()
    for name, polys in (("f", f_polys[:n_steps]), ("g", g_polys[:n_steps])):
        for i, p in enumerate(polys):
            if float(np.max(np.abs(p.constant_vector()))) != 0.0:
                raise ValueError(f"{name}-sequence step {i} does not fix the origin")
    return f_polys, g_polys


def equivariance_transport(
    f_seq: CocycleSequence,
    g_seq: CocycleSequence,
    h0: PolyMap,
    n_steps: int,
    *,
    max_deg: int | None = None,
) -> PolyMap:
    """Transport h0 along the pair of sequences: h_n = f^(n) o h0 o (g^(n))^-1.

    When h0 is subresonant the transported maps remain subresonant with
    bounded norms; a super-resonant term in h0 is amplified at the exact
    rate of its term weight, which is the observable mechanism forcing
    equivariant functions to be subresonant.
    """
    f_polys, g_polys = _transport_steps(f_seq, g_seq, h0, n_steps)
    h = h0
    for i in range(n_steps):
        g_inv = invert(g_polys[i])
        h = compose(f_polys[i], compose(h, g_inv, max_deg=max_deg), max_deg=max_deg)
        if h.max_abs_coeff() > 1e290:
            raise OverflowError(
                f"transported coefficients exceeded the float range at step {i}; "
                "use a shorter horizon"
            )
    return h


def transport_norm_series(
    f_seq: CocycleSequence,
    g_seq: CocycleSequence,
    h0: PolyMap,
    n_steps: int,
    *,
    max_deg: int | None = None,
) -> np.ndarray:
    """log |h_n|_P for n = 0..n_steps along the transport iteration."""
    f_polys, g_polys = _transport_steps(f_seq, g_seq, h0, n_steps)
    out = np.empty(n_steps + 1)
    h = h0
    out[0] = np.log(poly_norm(h))
    for i in range(n_steps):
        g_inv = invert(g_polys[i])
        h = compose(f_polys[i], compose(h, g_inv, max_deg=max_deg), max_deg=max_deg)
        if h.max_abs_coeff() > 1e290:
            raise OverflowError(
                f"transported coefficients exceeded the float range at step {i}; "
                "use a shorter horizon"
            )
        out[i + 1] = np.log(poly_norm(h))
    return out


def norm_growth_rate(seq: CocycleSequence) -> float:
    """Finite-horizon estimate of limsup (1/n) log |A_n| (should be ~0)."""
    norms = np.linalg.norm(seq.matrices, ord=2, axis=(1, 2))
    n = len(seq)
    start = max(1, (3 * n) // 4)
    vals = np.log(np.maximum(norms[start:], 1.0)) / np.arange(start + 1, n + 1)
    return float(np.max(vals)) if vals.size else 0.0
