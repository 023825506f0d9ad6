"""Condition systems and their fiber products over a shared parameter block.

Each structural feature (a solution at infinity, a witness point on a
positive-dimensional set, a vanishing trace, a prescribed local Hilbert
function) is encoded as a :class:`ConditionSystem`: polynomials over one
fresh block of unknowns plus the shared parameters, with an approximate
start block at the perturbed parameters.  Stacking several condition systems
that share the parameters gives a :class:`FiberProductSystem`, whose image
dimension in parameter space is measured by local linear algebra and driven
down by the stabilization loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    AUXILIARY,
    PARAMETER,
    VARIABLE,
    Polynomial,
    PolySystem,
    generic_slice,
    randomize,
    seeded_rng,
    slice_coefficient_rows,
    unit_complex,
)
from .numlin import DEFAULT_RANK_TOL, lstsq, null_space, numerical_rank
from .structure import (
    ClassifiedPoint,
    TraceData,
    WitnessSupersetResult,
    near_infinity_label,
    trace_data,
)
from .tracker import Homotopy, TrackingOptions, track_path

INFINITY = "infinity"
WITNESS = "witness"
TRACE = "trace"
HILBERT = "hilbert"


@dataclass
class ConditionSystem:
    """One structural condition: polynomials over (own block, shared params)."""

    kind: str
    system: PolySystem  # block indeterminates first, parameters last
    constants: dict
    start_block: np.ndarray
    start_residual: float = None

    @property
    def block_size(self):
        return len(self.system.indices(VARIABLE, AUXILIARY))

    @property
    def n_equations(self):
        return len(self.system.polynomials)


class FiberProductSystem:
    """Stacked condition systems sharing one parameter block."""

    def __init__(self, components, param_names, p_hat):
        self.components = list(components)
        self.param_names = list(param_names)
        self.p_hat = np.asarray(p_hat, dtype=complex)
        self._assemble()

    def _assemble(self):
        n_par = len(self.param_names)
        n_block = sum(c.block_size for c in self.components)
        roles, names = [], []
        self.block_slices = []
        offset = 0
        for k, comp in enumerate(self.components):
            blk = comp.system.indices(VARIABLE, AUXILIARY)
            for i in blk:
                roles.append(comp.system.roles[i])
                names.append(f"{comp.system.names[i]}_{k}")
            self.block_slices.append((offset, offset + len(blk)))
            offset += len(blk)
        roles += [PARAMETER] * n_par
        names += self.param_names
        polys = []
        for k, comp in enumerate(self.components):
            blk = comp.system.indices(VARIABLE, AUXILIARY)
            par = comp.system.indices(PARAMETER)
            start, _ = self.block_slices[k]
            imap = [0] * comp.system.arity
            for j, i in enumerate(blk):
                imap[i] = start + j
            for j, i in enumerate(par):
                imap[i] = n_block + j
            polys.extend(p.remap(len(roles), imap) for p in comp.system.polynomials)
        self.full_system = PolySystem(polys, roles, names)
        self.n_block_unknowns = n_block

    @property
    def n_equations(self):
        return len(self.full_system.polynomials)

    @property
    def n_parameters(self):
        return len(self.param_names)

    def system_size(self):
        """Equations plus primal unknowns (blocks and parameters)."""
        return self.n_equations + self.n_block_unknowns + self.n_parameters

    def with_component(self, comp):
        return FiberProductSystem(self.components + [comp], self.param_names, self.p_hat)

    def start_point(self):
        blocks = [np.asarray(c.start_block, dtype=complex) for c in self.components]
        return np.concatenate(blocks + [self.p_hat])

    def param_indices(self):
        n = self.full_system.arity
        return list(range(n - self.n_parameters, n))

    def extract_params(self, point):
        return np.asarray(point)[self.param_indices()]


def _reorder_block_first(sys):
    """Permute indeterminates so blocks (vars/aux) precede parameters."""
    blk = sys.indices(VARIABLE, AUXILIARY)
    par = sys.indices(PARAMETER)
    order = blk + par
    imap = [0] * sys.arity
    for new, old in enumerate(order):
        imap[old] = new
    return PolySystem(
        [p.remap(sys.arity, imap) for p in sys.polynomials],
        [sys.roles[i] for i in order],
        [sys.names[i] for i in order],
    )


def build_infinity_condition(hom, scheme, group, suspect):
    """Condition: the suspect solution lies on ``x_h = 0`` for its group.

    ``hom`` is the homogenized-and-patched system; the condition appends the
    group's homogenizing coordinate as an equation.  No random constants and
    no auxiliary unknowns are introduced.
    """
    if isinstance(suspect, ClassifiedPoint):
        if not suspect.is_near_infinity(group):
            raise ValueError(
                f"suspect is not flagged near infinity for group {group}: {suspect.labels}"
            )
        start = suspect.point
    else:
        start = np.asarray(suspect, dtype=complex)
    hi = scheme.hom_indices[group]
    coord = Polynomial.variable(hi, hom.arity)
    sys = _reorder_block_first(hom.with_polynomials(hom.polynomials + [coord]))
    blk = hom.indices(VARIABLE, AUXILIARY)
    return ConditionSystem(
        kind=INFINITY,
        system=sys,
        constants={"group": group},
        start_block=np.asarray(start, dtype=complex),
        start_residual=float(abs(start[blk.index(hi)])),
    )


def move_to_slice(detection, points, new_coeffs, opts=None):
    """Track witness points from the detection slice onto a new slice.

    The homotopy keeps the randomized rows fixed and interpolates the slice
    rows linearly from the detection slice (t=1) to the new one (t=0).
    """
    sliced = detection.sliced_system
    n = sliced.arity
    D = detection.slice_rows
    if D == 0:
        return [np.asarray(p, dtype=complex) for p in points]
    old_rows = slice_coefficient_rows(
        sliced.with_polynomials(sliced.polynomials[-D:])
    )
    new_coeffs = np.asarray(new_coeffs, dtype=complex).reshape(D, n + 1)
    t = Polynomial.variable(n, n + 1)
    one_minus_t = Polynomial.constant(1.0, n + 1) - t
    polys = [p.remap(n + 1, list(range(n))) for p in sliced.polynomials[:-D]]
    for r in range(D):
        terms = {}
        for i in range(n):
            e = [0] * (n + 1)
            e[i] = 1
            terms[tuple(e)] = 0.0
        lin_old = sum(
            (Polynomial.variable(i, n + 1) * old_rows[r, i] for i in range(n)),
            Polynomial.constant(old_rows[r, n], n + 1),
        )
        lin_new = sum(
            (Polynomial.variable(i, n + 1) * new_coeffs[r, i] for i in range(n)),
            Polynomial.constant(new_coeffs[r, n], n + 1),
        )
        polys.append(t * lin_old + one_minus_t * lin_new)
    hsys = PolySystem(polys, sliced.roles + [PARAMETER], sliced.names + ["_t"])
    h = Homotopy(hsys, list(range(n)), n)
    out = []
    for p in points:
        res = track_path(h, np.asarray(p, dtype=complex), opts)
        if not res.success:
            raise RuntimeError(f"slice-moving homotopy failed: {res.status}")
        out.append(res.endpoint)
    return out


def build_witness_condition(f, dim_D, points, seed=0, detection=None):
    """Condition: d points of a degree-d component on one shared generic slice.

    ``f`` is the original parameterized system; each of the d copies carries
    ``f(x_j; p)`` and the shared fresh slice ``L_c(x_j)``.  Suspects are
    tracked from the detection slice onto the fresh slice for the start block.
    """
    d = len(points)
    if d == 0:
        raise ValueError("need at least one witness point")
    var = f.indices(VARIABLE, AUXILIARY)
    par = f.indices(PARAMETER)
    n = len(var)
    rng = seeded_rng(seed, 11)
    coeffs = unit_complex(rng, (dim_D, n + 1))
    pts = [p.point if isinstance(p, ClassifiedPoint) else np.asarray(p) for p in points]
    if detection is not None:
        pts = move_to_slice(detection, pts, coeffs)
    arity = d * n + len(par)
    roles, names = [], []
    for j in range(d):
        roles += [f.roles[i] for i in var]
        names += [f"{f.names[i]}_w{j}" for i in var]
    roles += [PARAMETER] * len(par)
    names += [f.names[i] for i in par]
    polys = []
    for j in range(d):
        imap = [0] * f.arity
        for a, i in enumerate(var):
            imap[i] = j * n + a
        for a, i in enumerate(par):
            imap[i] = d * n + a
        polys.extend(p.remap(arity, imap) for p in f.polynomials)
        for r in range(dim_D):
            terms = {(0,) * arity: coeffs[r, n]}
            for a in range(n):
                e = [0] * arity
                e[j * n + a] = 1
                terms[tuple(e)] = coeffs[r, a]
            polys.append(Polynomial(terms, arity))
    sys = PolySystem(polys, roles, names)
    return ConditionSystem(
        kind=WITNESS,
        system=sys,
        constants={"slice": coeffs},
        start_block=np.concatenate([np.asarray(p, dtype=complex) for p in pts]),
    )


def build_trace_condition(f, dim_D, subset, seed=0, detection=None, p_hat=None):
    """Condition: the second-derivative trace over ``subset`` vanishes.

    r copies of {f, shared slice, first- and second-order bordered systems}
    plus one scalar trace equation.  Requires ``f`` to already have n−D
    equations (randomize beforehand if not).  Start auxiliaries are the
    bordered solves at the perturbed parameters on the fresh slice.
    """
    r = len(subset)
    if r == 0:
        raise ValueError("empty witness subset")
    var = f.indices(VARIABLE, AUXILIARY)
    par = f.indices(PARAMETER)
    n = len(var)
    m = len(f.polynomials)
    if m != n - dim_D:
        raise ValueError(
            f"trace condition needs n-D = {n - dim_D} equations, got {m}; randomize first"
        )
    if dim_D != 1:
        raise ValueError("trace conditions are implemented for curves (D=1) only")
    rng = seeded_rng(seed, 13)
    coeffs = unit_complex(rng, (dim_D, n + 1))
    alpha = unit_complex(rng, n)
    pts = [p.point if isinstance(p, ClassifiedPoint) else np.asarray(p) for p in subset]
    if detection is not None:
        pts = move_to_slice(detection, pts, coeffs)
    if p_hat is None:
        raise ValueError("p_hat is required to initialize the bordered auxiliaries")

    # start auxiliaries: bordered solves on the fresh slice at p_hat
    fp = f.substitute_params(p_hat)
    slice_terms = {(0,) * n: coeffs[0, n]}
    for a in range(n):
        e = [0] * n
        e[a] = 1
        slice_terms[tuple(e)] = coeffs[0, a]
    f_sliced = PolySystem(
        [p for p in fp.polynomials] + [Polynomial(slice_terms, n)],
        fp.roles,
        fp.names,
    )
    td = trace_data(f_sliced, pts, move_index=n - dim_D, alpha_seed=seed)

    block_per = 3 * n  # x_j, xdot_j, xddot_j
    arity = r * block_per + len(par)
    roles, names = [], []
    for j in range(r):
        roles += [VARIABLE] * n + [AUXILIARY] * (2 * n)
        names += (
            [f"{f.names[i]}_t{j}" for i in var]
            + [f"{f.names[i]}_d{j}" for i in var]
            + [f"{f.names[i]}_dd{j}" for i in var]
        )
    roles += [PARAMETER] * len(par)
    names += [f.names[i] for i in par]

    first_partials = [[f.polynomials[i].diff(var[a]) for a in range(n)] for i in range(m)]
    second_partials = [
        [[first_partials[i][a].diff(var[b]) for b in range(n)] for a in range(n)]
        for i in range(m)
    ]

    def emb(poly, j, shift):
        """Remap a poly over f's arity into copy j with block offset shift·n."""
        imap = [0] * f.arity
        for a, i in enumerate(var):
            imap[i] = j * block_per + shift * n + a
        for a, i in enumerate(par):
            imap[i] = r * block_per + a
        return poly.remap(arity, imap)

    def block_var(j, shift, a):
        return Polynomial.variable(j * block_per + shift * n + a, arity)

    polys = []
    for j in range(r):
        # f(x_j; p) and L_c(x_j)
        polys.extend(emb(p, j, 0) for p in f.polynomials)
        terms = {(0,) * arity: coeffs[0, n]}
        for a in range(n):
            e = [0] * arity
            e[j * block_per + a] = 1
            terms[tuple(e)] = coeffs[0, a]
        polys.append(Polynomial(terms, arity))
        # first-order bordered rows: J f · xdot = 0, c · xdot = 1
        for i in range(m):
            row = Polynomial.zero(arity)
            for a in range(n):
                row = row + emb(first_partials[i][a], j, 0) * block_var(j, 1, a)
            polys.append(row)
        row = Polynomial.constant(-1.0, arity)
        for a in range(n):
            row = row + coeffs[0, a] * block_var(j, 1, a)
        polys.append(row)
        # second-order bordered rows: J f · xddot + xdotᵀ·Hess·xdot = 0, c · xddot = 0
        for i in range(m):
            row = Polynomial.zero(arity)
            for a in range(n):
                row = row + emb(first_partials[i][a], j, 0) * block_var(j, 2, a)
            for a in range(n):
                for b in range(n):
                    q = second_partials[i][a][b]
                    if q.is_zero():
                        continue
                    row = row + emb(q, j, 0) * block_var(j, 1, a) * block_var(j, 1, b)
            polys.append(row)
        row = Polynomial.zero(arity)
        for a in range(n):
            row = row + coeffs[0, a] * block_var(j, 2, a)
        polys.append(row)
    # trace row
    row = Polynomial.zero(arity)
    for j in range(r):
        for a in range(n):
            row = row + alpha[a] * block_var(j, 2, a)
    polys.append(row)

    start = np.concatenate(
        [np.concatenate([td.points[j], td.first_derivs[j], td.second_derivs[j]])
         for j in range(r)]
    )
    sys = PolySystem(polys, roles, names)
    return ConditionSystem(
        kind=TRACE,
        system=sys,
        constants={"slice": coeffs, "alpha": alpha},
        start_block=start,
        start_residual=float(abs(td.full_trace())),
    )


def build_hilbert_condition(f_sliced, point, hilbert_prefix, seed=0, p_hat=None):
    """Condition: a rank-deficient Jacobian of the sliced system (prefix (1,1)).

    For the local Hilbert function prefix (1, 1) the null-space condition
    collapses to ``J f_sliced(x;p) · R₁ · [λ; 1] = 0`` with a generic unitary
    R₁ and auxiliary λ.  Longer prefixes are not supported.
    """
    prefix = list(hilbert_prefix)
    if not prefix or prefix[0] != 1:
        raise ValueError("local Hilbert prefix must start with h(0)=1")
    if prefix[1:] != [1]:
        raise ValueError("only the multiplicity-two prefix (1, 1) is supported")
    var = f_sliced.indices(VARIABLE, AUXILIARY)
    par = f_sliced.indices(PARAMETER)
    n = len(var)
    if len(f_sliced.polynomials) != n:
        raise ValueError("sliced system must be square in its variables")
    if prefix[1] > n:
        raise ValueError(f"h(1)={prefix[1]} exceeds the variable count {n}")
    rng = seeded_rng(seed, 17)
    # random unitary via QR of a complex Gaussian matrix
    Z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    R1, _ = np.linalg.qr(Z)
    x0 = point.point if isinstance(point, ClassifiedPoint) else np.asarray(point, dtype=complex)

    arity = n + (n - 1) + len(par)
    roles = [f_sliced.roles[i] for i in var] + [AUXILIARY] * (n - 1) + [PARAMETER] * len(par)
    names = (
        [f_sliced.names[i] for i in var]
        + [f"lam{a}" for a in range(n - 1)]
        + [f_sliced.names[i] for i in par]
    )
    imap = [0] * f_sliced.arity
    for a, i in enumerate(var):
        imap[i] = a
    for a, i in enumerate(par):
        imap[i] = n + (n - 1) + a
    polys = [p.remap(arity, imap) for p in f_sliced.polynomials]
    # J f_sliced · R1 · [λ; 1] = 0  (row per equation)
    lam_vec = [Polynomial.variable(n + a, arity) for a in range(n - 1)]
    lam_vec.append(Polynomial.constant(1.0, arity))
    for i in range(n):
        row = Polynomial.zero(arity)
        for a in range(n):
            dia = f_sliced.polynomials[i].diff(var[a]).remap(arity, imap)
            if dia.is_zero():
                continue
            combo = Polynomial.zero(arity)
            for b in range(n):
                if R1[a, b] != 0:
                    combo = combo + R1[a, b] * lam_vec[b]
            row = row + dia * combo
        polys.append(row)
    sys = PolySystem(polys, roles, names)

    # start λ from the closest-to-null vector of J·R1, rescaled so the last
    # coordinate of R1⁻¹·v is 1
    if p_hat is None:
        raise ValueError("p_hat is required to initialize the start block")
    full = np.empty(f_sliced.arity, dtype=complex)
    full[var] = x0[: n]
    full[par] = np.asarray(p_hat, dtype=complex)
    J = f_sliced.compiled.jacobian(full)[:, var]
    _, _, Vh = np.linalg.svd(J @ R1)
    v = Vh[-1].conj()  # right singular vector of the smallest singular value
    if abs(v[-1]) < 1e-12:
        raise ValueError("degenerate null direction: cannot normalize the multiplier")
    lam = (v / v[-1])[:-1]
    return ConditionSystem(
        kind=HILBERT,
        system=sys,
        constants={"R1": R1},
        start_block=np.concatenate([x0[:n], lam]),
    )


def image_dimension(F, point=None, tol=DEFAULT_RANK_TOL, refine_tol=1e-9, max_refine=60):
    """Dimension of the local projection of V(𝓕) onto parameter space.

    Gauss–Newton refines ``point`` onto V(𝓕); the parameter rows of a
    null-space basis of the full Jacobian there span the tangent directions
    visible in parameter space, and their rank is the local image dimension.
    """
    sys = F.full_system
    x = np.asarray(F.start_point() if point is None else point, dtype=complex).copy()
    cols = list(range(sys.arity))
    res = np.linalg.norm(sys.evaluate(x))
    scale = 1.0 + sys.coefficient_norm()
    for _ in range(max_refine):
        if res <= refine_tol * scale:
            break
        J = sys.jacobian(x)
        dx = lstsq(J, -sys.evaluate(x))
        x_new = x + dx
        res_new = np.linalg.norm(sys.evaluate(x_new))
        if not np.isfinite(res_new):
            break
        x, res = x_new, res_new
    else:
        if res > refine_tol * scale:
            raise RuntimeError(
                f"could not refine the start point onto the fiber product "
                f"(residual {res:.3e})"
            )
    N = null_space(sys.jacobian(x), tol)
    p_rows = N[F.param_indices(), :]
    return numerical_rank(p_rows, tol), x


@dataclass
class StabilizeResult:
    fiber_product: FiberProductSystem
    dims: list  # image dimension after each tried append
    sizes: list  # system size of each tried assembly
    accepted: list  # whether each candidate was kept
    refined_point: np.ndarray = None


def stabilize(builder, candidates, param_names, p_hat, tol=DEFAULT_RANK_TOL,
              seed=0, stop_on_plateau=True, cumulative=False):
    """Assemble conditions while the image dimension keeps dropping.

    ``builder(index, candidate, seed)`` returns a fresh ConditionSystem
    (fresh random constants per call).  Candidates are tried in order and
    the image dimension and size of each trial assembly are recorded.

    With ``cumulative`` (the mode for repeated copies of one condition) every
    tried copy stays in the assembly while scanning, so the recorded sizes
    grow by one component per row; the returned fiber product is the shortest
    prefix achieving the stabilized dimension.  Without it (distinct suspect
    points, each carrying its own condition) an append that does not strictly
    drop the dimension is discarded as a dependent condition before moving
    on.  With ``stop_on_plateau`` the scan ends at the first non-dropping
    append; otherwise every candidate is tried.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("no candidates to impose")
    current = None
    current_dim = None
    refined = None
    dims, sizes, accepted = [], [], []
    chain = []
    kept = 0
    for i, cand in enumerate(candidates):
        comp = builder(i, cand, seed + 1000 * (i + 1))
        if cumulative:
            chain.append(comp)
            trial = FiberProductSystem(list(chain), param_names, p_hat)
        else:
            trial = (
                FiberProductSystem([comp], param_names, p_hat)
                if current is None
                else current.with_component(comp)
            )
        dim, pt = image_dimension(trial, tol=tol)
        dims.append(dim)
        sizes.append(trial.system_size())
        dropped = current_dim is None or dim < current_dim
        accepted.append(dropped)
        if dropped:
            current_dim, refined = dim, pt
            if cumulative:
                kept = len(chain)
            else:
                current = trial
        elif stop_on_plateau:
            break
    if cumulative:
        current = FiberProductSystem(chain[:kept], param_names, p_hat)
    if current is None or not current.components:
        raise RuntimeError("no candidate dropped the image dimension")
    return StabilizeResult(current, dims, sizes, accepted, refined)
