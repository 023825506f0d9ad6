"""Detection of suspicious structure at a perturbed parameter point.

Four detectors: points with small homogenizing coordinates (near infinity),
near-solutions of the original system among witness-superset endpoints,
witness subsets whose summed second-order slice derivatives have near-zero
trace, and points where the Macaulay matrices are nearly rank-deficient
(local Hilbert function).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    AUXILIARY,
    PARAMETER,
    VARIABLE,
    PolySystem,
    concat_systems,
    generic_slice,
    randomize,
    seeded_rng,
    unit_complex,
)
from .numlin import (
    SingularMatrixError,
    null_space,
    nullity,
    singular_values,
    solve_square,
)
from .tracker import TrackingOptions, newton_refine, solve_total_degree

NEAR_SOLUTION_TOL = 1e-4
NONSOLUTION_TOL = 1e-1
INFINITY_NEAR_TOL = 1e-2
INFINITY_AT_TOL = 1e-10

NONSOLUTION = "nonsolution"
NEAR_SOLUTION = "near-solution"
AMBIGUOUS = "ambiguous"
FINITE = "finite"


def near_infinity_label(group):
    return f"near-infinity({group})"


@dataclass
class ClassifiedPoint:
    point: np.ndarray
    residual_full_system: float = np.inf
    homogenizing_magnitudes: list = field(default_factory=list)
    cluster_id: int = None
    labels: set = field(default_factory=set)
    thresholds: dict = field(default_factory=dict)
    track_status: str = None

    def is_near_infinity(self, group=None):
        if group is not None:
            return near_infinity_label(group) in self.labels
        return any(lbl.startswith("near-infinity") for lbl in self.labels)


@dataclass
class WitnessSupersetResult:
    """Witness-superset endpoints together with the system that produced them."""

    points: list
    sliced_system: PolySystem  # randomized f rows followed by slice rows
    slice_rows: int
    randomized_rows: int
    original: PolySystem  # f at the queried parameters
    seed: int

    def near_solutions(self):
        return [p for p in self.points if NEAR_SOLUTION in p.labels]


def solution_residual(f, x):
    """Scale-invariant residual ‖f(x)‖ / (1 + ‖x‖^maxdeg)."""
    deg = max([p.degree() for p in f.polynomials], default=1)
    return float(np.linalg.norm(f.evaluate(x))) / (1.0 + np.linalg.norm(x) ** deg)


def classify_residual(f, x, near_tol=NEAR_SOLUTION_TOL, far_tol=NONSOLUTION_TOL):
    res = solution_residual(f, x)
    if res < near_tol:
        label = NEAR_SOLUTION
    elif res > far_tol:
        label = NONSOLUTION
    else:
        label = AMBIGUOUS
    return res, label


def witness_superset(f, p, dim_D, seed=0, opts=None):
    """Solve ``{R_{n-D} f, L_D}`` ab initio and classify endpoints against f.

    ``f`` has variable and parameter roles; ``p`` fixes the parameters.
    Returns a :class:`WitnessSupersetResult` so downstream condition builders
    can reuse the realized slice and randomization.
    """
    fp = f.substitute_params(p) if f.indices(PARAMETER) else f
    var = fp.indices(VARIABLE, AUXILIARY)
    n = len(var)
    if n - dim_D < 1:
        raise ValueError(f"n - D = {n - dim_D} must be at least 1")
    rand = randomize(fp, n - dim_D, seed=seed) if len(fp.polynomials) != n - dim_D else fp
    if dim_D > 0:
        sl = generic_slice(n, dim_D, seed=seed + 1)
        sl_polys = [q.remap(fp.arity, var) for q in sl.polynomials]
        sliced = fp.with_polynomials(rand.polynomials + sl_polys)
    else:
        sliced = rand
    results = solve_total_degree(sliced, seed=seed + 2, opts=opts)
    points = []
    for r in results:
        cp = ClassifiedPoint(point=r.endpoint, track_status=r.status)
        if r.success:
            cp.residual_full_system, label = classify_residual(fp, r.endpoint)
            cp.labels.add(label)
            cp.thresholds = {"near": NEAR_SOLUTION_TOL, "far": NONSOLUTION_TOL}
        else:
            cp.labels.add("track-" + r.status)
        points.append(cp)
    return WitnessSupersetResult(
        points=points,
        sliced_system=sliced,
        slice_rows=dim_D,
        randomized_rows=n - dim_D,
        original=fp,
        seed=seed,
    )


def classify_infinity(points, scheme, threshold=INFINITY_NEAR_TOL, positions=None):
    """Label points whose homogenizing coordinates are small relative to ‖x‖.

    ``positions`` gives the index of each group's homogenizing coordinate
    within the point vectors; it defaults to ``scheme.hom_indices`` (valid
    when the points live over the full homogenized indeterminate list).
    """
    positions = list(positions) if positions is not None else list(scheme.hom_indices)
    out = []
    for item in points:
        x = item.point if isinstance(item, ClassifiedPoint) else np.asarray(item, dtype=complex)
        cp = item if isinstance(item, ClassifiedPoint) else ClassifiedPoint(point=x)
        norm = max(np.linalg.norm(x), 1e-300)
        mags = []
        for g, hi in enumerate(positions):
            mag = abs(x[hi]) / norm
            mags.append(mag)
            if mag < threshold:
                cp.labels.add(near_infinity_label(g))
            else:
                cp.labels.add(FINITE)
        cp.homogenizing_magnitudes = mags
        cp.thresholds = dict(cp.thresholds, infinity=threshold)
        out.append(cp)
    return out


def cluster_points(points, radius):
    """Single-linkage clustering; returns a cluster index per point."""
    pts = [p.point if isinstance(p, ClassifiedPoint) else np.asarray(p) for p in points]
    n = len(pts)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(pts[i] - pts[j]) <= radius:
                parent[find(i)] = find(j)
    labels = {}
    out = []
    for i in range(n):
        r = find(i)
        if r not in labels:
            labels[r] = len(labels)
        out.append(labels[r])
        if isinstance(points[i], ClassifiedPoint):
            points[i].cluster_id = labels[r]
    return out


@dataclass
class TraceData:
    points: list  # w_j
    first_derivs: list  # dw_j/ds as the moving form translates
    second_derivs: list  # d^2 w_j/ds^2
    alpha: np.ndarray
    subset_traces: dict  # frozenset of indices -> complex trace value
    move_index: int

    def trace(self, subset):
        return self.subset_traces[frozenset(subset)]

    def full_trace(self):
        return self.trace(range(len(self.points)))


def _hessian_quadratic_form(poly, var, w, wdot):
    """ẇᵀ · Hess(poly) · ẇ at w, over the indeterminates listed in ``var``."""
    total = 0.0 + 0.0j
    first = {a: poly.diff(a) for a in var}
    for ia, a in enumerate(var):
        da = first[a]
        if da.is_zero():
            continue
        for ib, b in enumerate(var):
            if wdot[ia] == 0 or wdot[ib] == 0:
                continue
            dab = da.diff(b)
            if dab.is_zero():
                continue
            total += wdot[ia] * wdot[ib] * dab.evaluate(w)
    return total


def trace_data(f_sliced, witness, move_index, alpha_seed=0, subset_cap=4):
    """First/second derivatives of witness points as one slice form moves.

    ``f_sliced`` is the square sliced system; row ``move_index`` is the affine
    form whose constant translates.  ẇ solves ``J ẇ = e_move``; ẅ solves
    ``J ẅ = -(ẇᵀ Hess(row_i) ẇ)_i`` (linear rows contribute zero).  Subset
    traces are ``α · Σ_{j∈S} ẅ_j``.
    """
    var = f_sliced.indices(VARIABLE, AUXILIARY)
    n = len(var)
    if len(f_sliced.polynomials) != n:
        raise ValueError("sliced system must be square")
    rng = seeded_rng(alpha_seed, 7)
    alpha = unit_complex(rng, n)
    pts, wdots, wddots = [], [], []
    e_move = np.zeros(n, dtype=complex)
    e_move[move_index] = 1.0
    for j, w in enumerate(witness):
        w = np.asarray(w, dtype=complex)
        J = f_sliced.jacobian(w, cols=var)
        try:
            wd = solve_square(J, e_move)
            rhs = np.array(
                [-_hessian_quadratic_form(p, var, w, wd) for p in f_sliced.polynomials]
            )
            wdd = solve_square(J, rhs)
        except SingularMatrixError as exc:
            raise SingularMatrixError(
                f"witness point {j} is singular on the slice: {exc}"
            ) from exc
        pts.append(w)
        wdots.append(wd)
        wddots.append(wdd)
    r = len(pts)
    traces = {}
    if r <= 8:
        index_subsets = [
            s for size in range(1, r + 1) for s in itertools.combinations(range(r), size)
        ]
    else:
        index_subsets = [
            s for size in range(1, subset_cap + 1)
            for s in itertools.combinations(range(r), size)
        ]
        index_subsets.append(tuple(range(r)))
    for s in index_subsets:
        traces[frozenset(s)] = complex(alpha @ sum(wddots[j] for j in s))
    return TraceData(pts, wdots, wddots, alpha, traces, move_index)


# -- Macaulay matrices and the local Hilbert function -----------------------


def _graded_lex(n, dmax):
    """All exponent vectors of length n with total degree ≤ dmax, graded lex."""
    out = []
    for d in range(dmax + 1):
        level = []

        def rec(prefix, remaining, slots):
            if slots == 1:
                level.append(tuple(prefix) + (remaining,))
                return
            for k in range(remaining, -1, -1):
                rec(prefix + [k], remaining - k, slots - 1)

        rec([], d, n)
        out.extend(level)
    return out


def _partial(cache, poly, alpha):
    """Cached iterated partial derivative ∂^alpha of ``poly``."""
    if alpha in cache:
        return cache[alpha]
    for i, k in enumerate(alpha):
        if k:
            lower = list(alpha)
            lower[i] -= 1
            lower = tuple(lower)
            result = _partial(cache, poly, lower).diff(i)
            cache[alpha] = result
            return result
    cache[alpha] = poly
    return poly


def _factorial_multi(alpha):
    out = 1
    for k in alpha:
        for j in range(2, k + 1):
            out *= j
    return out


def macaulay_matrix(f, x_star, d):
    """The d-th Macaulay matrix of ``f`` at ``x_star``.

    Rows are indexed by (β, j) with |β| ≤ max(0, d−1) in graded-lex order;
    columns by α with |α| ≤ d.  The ((β,j), α) entry is
    ∂^{α−β} f_j (x*) / (α−β)! whenever β ≤ α, else 0.
    """
    if d < 0:
        raise ValueError("d must be nonnegative")
    x_star = np.asarray(x_star, dtype=complex)
    n = f.arity
    m = len(f.polynomials)
    cols = _graded_lex(n, d)
    rows_beta = _graded_lex(n, max(0, d - 1))
    caches = [dict() for _ in range(m)]
    M = np.zeros((len(rows_beta) * m, len(cols)), dtype=complex)
    col_of = {a: i for i, a in enumerate(cols)}
    for bi, beta in enumerate(rows_beta):
        for j in range(m):
            row = bi * m + j
            for alpha in cols:
                diff = tuple(a - b for a, b in zip(alpha, beta))
                if any(x < 0 for x in diff):
                    continue
                deriv = _partial(caches[j], f.polynomials[j], diff)
                if deriv.is_zero():
                    continue
                M[row, col_of[alpha]] = deriv.evaluate(x_star) / _factorial_multi(diff)
    return M


@dataclass
class MacaulayProfile:
    matrices: list
    null_dims: list
    hilbert: list
    stabilized: bool
    multiplicity: int = None


def local_hilbert(f, x_star, d_max=8, tol=1e-8):
    """Local Hilbert function h(d) = nulldim M_d − nulldim M_{d−1}.

    Stops as soon as h hits 0 (stabilized); multiplicity is Σh then.
    """
    x_star = np.asarray(x_star, dtype=complex)
    mats, nulls, h = [], [], []
    prev = 0
    stabilized = False
    # absolute scale: near a solution M_0 = f(x*) is a near-zero vector, so a
    # threshold relative to the matrix's own norm would call it full rank
    deg = max(p.degree() for p in f.polynomials)
    scale = max(f.coefficient_norm(), 1.0) * (1.0 + np.linalg.norm(x_star)) ** deg
    for d in range(d_max + 1):
        M = macaulay_matrix(f, x_star, d)
        s = singular_values(M)
        cutoff = tol * max(s[0] if s.size else 0.0, scale)
        nd = M.shape[1] - int(np.count_nonzero(s > cutoff))
        mats.append(M)
        nulls.append(nd)
        h.append(nd - prev)
        prev = nd
        if d == 0 and h[0] != 1:
            raise ValueError(
                f"h(0) = {h[0]}: point is not on the set at tolerance {tol:g}"
            )
        if h[-1] <= 0:
            stabilized = True
            break
    mult = sum(h) if stabilized else None
    return MacaulayProfile(mats, nulls, h, stabilized, mult)
