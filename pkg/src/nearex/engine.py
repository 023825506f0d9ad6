"""End-to-end pipelines: detect suspicious structure, stabilize a fiber
product, descend to the nearest parameters, and validate the result.

One pipeline per structure kind:

* :func:`recover_infinity` — push near-infinity solutions onto the
  hyperplane(s) at infinity of a (multi)homogenization;
* :func:`recover_positive_dim` — turn near-solutions of the original system
  among witness-superset points into exact witness points;
* :func:`recover_factor` — make a near-zero second-derivative trace over a
  witness subset exactly zero (component splits off);
* :func:`recover_multiplicity` — impose a rank-deficient Jacobian of the
  sliced system (local Hilbert function prefix (1, 1), multiplicity two).

Validation re-runs the detection at the recovered parameters with thresholds
100× tighter than detection and reports pass/fail alongside the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    AUXILIARY,
    PARAMETER,
    VARIABLE,
    HomogenizationScheme,
    PolySystem,
    generic_slice,
    homogenize,
    randomize,
    seeded_rng,
    unit_complex,
)
from .fiberprod import (
    FiberProductSystem,
    StabilizeResult,
    build_hilbert_condition,
    build_infinity_condition,
    build_trace_condition,
    build_witness_condition,
    image_dimension,
    stabilize,
)
from .numlin import SingularMatrixError
from .recover import RecoveryResult, build_lagrange, descend
from .structure import (
    AMBIGUOUS,
    INFINITY_NEAR_TOL,
    NEAR_SOLUTION,
    NEAR_SOLUTION_TOL,
    ClassifiedPoint,
    classify_infinity,
    cluster_points,
    local_hilbert,
    solution_residual,
    trace_data,
    witness_superset,
)
from .tracker import SINGULAR_ENDPOINT, parameter_homotopy, solve_total_degree

VALIDATION_TIGHTENING = 100.0


class StructureNotFoundError(RuntimeError):
    """Detection found nothing suspicious to impose."""


@dataclass
class RunOutcome:
    structure: str
    result: RecoveryResult
    fiber: FiberProductSystem
    stabilization: StabilizeResult = None
    detection: dict = None

    @property
    def validated(self):
        return bool(self.result.success and self.result.validation
                    and self.result.validation.get("passed"))


def _dedupe(points, radius=1e-8):
    ids = cluster_points(points, radius)
    out = []
    seen = set()
    for cp, cid in zip(points, ids):
        if cid not in seen:
            seen.add(cid)
            out.append(cp)
    return out


def parameterized_sliced_system(f, dim_D, seed):
    """The randomized-and-sliced system with parameters left symbolic.

    Uses the same seeds as :func:`nearex.structure.witness_superset`, so the
    random constants agree with the detection run.
    """
    var = f.indices(VARIABLE, AUXILIARY)
    n = len(var)
    rand = randomize(f, n - dim_D, seed=seed) if len(f.polynomials) != n - dim_D else f
    if dim_D == 0:
        return rand
    sl = generic_slice(n, dim_D, seed=seed + 1)
    sl_polys = [q.remap(f.arity, var) for q in sl.polynomials]
    return f.with_polynomials(rand.polynomials + sl_polys)


# -- solutions at infinity ---------------------------------------------------


def _converged(results):
    """Endpoints that finished tracking, including salvaged singular ones."""
    return [r for r in results if r.success or r.status == SINGULAR_ENDPOINT]


def _infinity_counts(endpoints, positions, tol):
    counts = [0] * len(positions)
    for x in endpoints:
        norm = max(np.linalg.norm(x), 1e-300)
        for g, hi in enumerate(positions):
            if abs(x[hi]) / norm < tol:
                counts[g] += 1
    return counts


def recover_infinity(f, p_hat, groups=None, seed=0, infinity_tol=INFINITY_NEAR_TOL,
                     n_trials=None, rank_tol=None):
    """Detect near-infinity solutions and push them onto infinity exactly."""
    p_hat = np.asarray(p_hat, dtype=complex)
    param_names = [f.names[i] for i in f.indices(PARAMETER)]
    var_idx = f.indices(VARIABLE)
    if groups is None:
        groups = [list(var_idx)]
    else:
        groups = [
            [f.index_of(g) if isinstance(g, str) else int(g) for g in grp]
            for grp in groups
        ]
    scheme = HomogenizationScheme(groups=groups)
    hom, realized = homogenize(f, scheme, seed=seed)
    homp = hom.substitute_params(p_hat)
    positions = [homp.index_of(nm) for nm in realized.hom_names]

    results = solve_total_degree(homp, seed=seed + 1)
    good = _converged(results)
    points = classify_infinity(
        [ClassifiedPoint(point=r.endpoint) for r in good],
        realized, threshold=infinity_tol, positions=positions,
    )

    # base-point screen: a point that stays at infinity for generic
    # parameters imposes no condition; track each suspect to a generic p
    rng = seeded_rng(seed, 41)
    p_generic = p_hat + 0.5 * unit_complex(rng, p_hat.shape[0])
    suspects = []
    raw = [cp for cp in points if cp.is_near_infinity()]
    if raw:
        moved = parameter_homotopy(hom, p_hat, p_generic, [cp.point for cp in raw])
        for cp, mv in zip(raw, moved):
            if not mv.success:
                continue
            norm = max(np.linalg.norm(mv.endpoint), 1e-300)
            generic_mags = [abs(mv.endpoint[hi]) / norm for hi in positions]
            if all(
                m > infinity_tol / 10.0
                for g, m in enumerate(generic_mags)
                if cp.is_near_infinity(g)
            ):
                suspects.append(cp)
    suspects = _dedupe(suspects)
    if not suspects:
        raise StructureNotFoundError("no non-base solutions near infinity")

    groups_of = []
    for cp in suspects:
        g = min(
            (g for g in range(len(groups)) if cp.is_near_infinity(g)),
            key=lambda g: cp.homogenizing_magnitudes[g],
        )
        groups_of.append(g)

    def builder(i, cand, s):
        g, cp = cand
        return build_infinity_condition(hom, realized, g, cp)

    candidates = sorted(
        zip(groups_of, suspects),
        key=lambda it: it[1].homogenizing_magnitudes[it[0]],
    )
    stab = None
    if len(candidates) == 1:
        fiber = FiberProductSystem(
            [builder(0, candidates[0], seed)], param_names, p_hat
        )
    else:
        stab = stabilize(
            builder, candidates, param_names, p_hat, seed=seed,
            stop_on_plateau=False,
            **({"tol": rank_tol} if rank_tol else {}),
        )
        fiber = stab.fiber_product
    counts_hat = _infinity_counts(
        [r.endpoint for r in good], positions, infinity_tol / VALIDATION_TIGHTENING
    )

    G = build_lagrange(fiber, patch_seed=seed)
    res = descend(G)
    if res.success:
        res.validation = _validate_infinity(
            hom, fiber, res, positions, counts_hat, seed,
            infinity_tol / VALIDATION_TIGHTENING,
        )
    return RunOutcome(
        structure="infinity", result=res, fiber=fiber, stabilization=stab,
        detection={"points": points, "suspects": suspects,
                   "homogenized": hom, "scheme": realized, "positions": positions},
    )


def _validate_infinity(hom, fiber, res, positions, counts_hat, seed, tight_tol):
    p_star = res.p_star
    results = solve_total_degree(hom.substitute_params(p_star), seed=seed + 1)
    endpoints = [r.endpoint for r in _converged(results)]
    counts_star = _infinity_counts(endpoints, positions, tight_tol)
    imposed = [0] * len(positions)
    for comp in fiber.components:
        imposed[comp.constants["group"]] += 1
    passed = all(
        cs >= ch + im for cs, ch, im in zip(counts_star, counts_hat, imposed)
    )
    return {
        "passed": bool(passed),
        "at_infinity_before": counts_hat,
        "at_infinity_after": counts_star,
        "imposed": imposed,
        "threshold": tight_tol,
    }


# -- positive-dimensional components ----------------------------------------


def _witness_candidates(ws):
    # keep every finite endpoint, nearest-to-solving first; validation (not
    # the residual labels, which get unreliable at large perturbations)
    # decides which picks survive
    cands = [
        cp for cp in ws.points
        if np.all(np.isfinite(cp.point))
        and np.isfinite(cp.residual_full_system)
    ]
    cands.sort(key=lambda cp: cp.residual_full_system)
    return _dedupe(cands)


def recover_positive_dim(f, p_hat, dim_D, degree_d, seed=0, n_trials=None,
                         rank_tol=None):
    """Impose that degree_d witness points of a D-dimensional set are exact."""
    p_hat = np.asarray(p_hat, dtype=complex)
    param_names = [f.names[i] for i in f.indices(PARAMETER)]
    ws = witness_superset(f, p_hat, dim_D, seed=seed)
    candidates = _witness_candidates(ws)
    if len(candidates) < degree_d:
        raise StructureNotFoundError(
            f"found {len(candidates)} candidate witness points, need {degree_d}"
        )

    last = None
    for attempt in range(3):  # a failed descent retries with fresh slices
        for shift in range(len(candidates) - degree_d + 1):
            chosen = candidates[shift: shift + degree_d]
            s0 = seed + 97 * shift + 1013 * attempt

            def builder(i, cand, s):
                return build_witness_condition(f, dim_D, chosen, seed=s,
                                               detection=ws)

            if n_trials is not None:
                trials, plateau = range(n_trials), False
            else:
                trials, plateau = range(len(param_names) + 1), True
            try:
                stab = stabilize(
                    builder, trials, param_names, p_hat, seed=s0,
                    stop_on_plateau=plateau, cumulative=True,
                    **({"tol": rank_tol} if rank_tol else {}),
                )
            except (RuntimeError, SingularMatrixError):
                continue
            G = build_lagrange(stab.fiber_product, patch_seed=s0)
            res = descend(G)
            # a positive-dimensional witness recovery ends at a regular point
            # of the critical system; a salvaged singular endpoint means the
            # path strayed onto a branch of the parameter projection
            if res.status == "recovered":
                res.validation = _validate_positive_dim(f, res, dim_D, degree_d,
                                                        seed)
            out = RunOutcome(
                structure="positive_dim", result=res, fiber=stab.fiber_product,
                stabilization=stab,
                detection={"points": ws.points, "chosen": chosen, "witness": ws},
            )
            if out.validated:
                return out
            last = out
    if last is None:
        raise StructureNotFoundError(
            "no candidate witness subset produced a stabilizing condition"
        )
    return last


def _validate_positive_dim(f, res, dim_D, degree_d, seed):
    tight = NEAR_SOLUTION_TOL / VALIDATION_TIGHTENING
    ws = witness_superset(f, res.p_star, dim_D, seed=seed)
    residuals = sorted(
        cp.residual_full_system for cp in ws.points if np.isfinite(cp.residual_full_system)
    )
    exact = [r for r in residuals if r < tight]
    return {
        "passed": len(exact) >= degree_d,
        "exact_witness_points": len(exact),
        "required": degree_d,
        "best_residuals": residuals[: degree_d + 1],
        "threshold": tight,
    }


# -- trace test / factorization ---------------------------------------------


def recover_factor(f, p_hat, dim_D=1, subset_size=None, seed=0, n_trials=None,
                   trace_tol=1e-2, rank_tol=None):
    """Impose a vanishing second-derivative trace over a witness subset."""
    p_hat = np.asarray(p_hat, dtype=complex)
    param_names = [f.names[i] for i in f.indices(PARAMETER)]
    var = f.indices(VARIABLE, AUXILIARY)
    n = len(var)
    if len(f.polynomials) != n - dim_D:
        raise ValueError("factor pipeline expects an (n-D)-equation system")
    ws = witness_superset(f, p_hat, dim_D, seed=seed)
    witness = [cp for cp in ws.points
               if cp.labels & {NEAR_SOLUTION, AMBIGUOUS}]
    witness = _dedupe(witness)
    if len(witness) < 2:
        raise StructureNotFoundError("fewer than two witness points; nothing to split")
    wpts = [cp.point for cp in witness]
    td = trace_data(ws.sliced_system, wpts, move_index=n - dim_D, alpha_seed=seed)
    scale = max(np.linalg.norm(w) for w in td.second_derivs)
    r_total = len(wpts)
    best_subset = None
    for s, val in sorted(td.subset_traces.items(), key=lambda kv: (len(kv[0]), abs(kv[1]))):
        if len(s) == r_total:
            continue  # full-set trace always vanishes; imposes nothing
        if subset_size is not None and len(s) != subset_size:
            continue
        if abs(val) < trace_tol * scale:
            best_subset = sorted(s)
            break
    if best_subset is None:
        raise StructureNotFoundError(
            f"no witness subset has a trace below {trace_tol:g} of scale {scale:g}"
        )
    subset_pts = [wpts[j] for j in best_subset]

    def builder(i, cand, s):
        return build_trace_condition(
            f, dim_D, subset_pts, seed=s, detection=ws, p_hat=p_hat
        )

    if n_trials is not None:
        trials, plateau = range(n_trials), False
    else:
        trials, plateau = range(len(param_names) + 1), True
    stab = stabilize(
        builder, trials, param_names, p_hat, seed=seed,
        stop_on_plateau=plateau, cumulative=True,
        **({"tol": rank_tol} if rank_tol else {}),
    )
    G = build_lagrange(stab.fiber_product, patch_seed=seed)
    res = descend(G)
    if res.status == "recovered":
        res.validation = _validate_factor(
            f, p_hat, res, ws, wpts, best_subset, dim_D, seed, trace_tol
        )
    return RunOutcome(
        structure="factor", result=res, fiber=stab.fiber_product,
        stabilization=stab,
        detection={"points": ws.points, "trace": td, "subset": best_subset,
                   "witness": ws},
    )


def _validate_factor(f, p_hat, res, ws, wpts, subset, dim_D, seed, trace_tol):
    # track the witness points from p_hat to p_star on the detection slice,
    # then recompute the trace there: it must vanish to working precision
    n = len(f.indices(VARIABLE, AUXILIARY))
    sliced_param = parameterized_sliced_system(f, dim_D, seed)
    tracked = parameter_homotopy(sliced_param, p_hat, res.p_star, wpts)
    if not all(r.success for r in tracked):
        return {"passed": False, "error": "witness tracking to p_star failed"}
    moved = [r.endpoint for r in tracked]
    fstar = sliced_param.substitute_params(res.p_star)
    td = trace_data(fstar, moved, move_index=n - dim_D, alpha_seed=seed)
    scale = max(np.linalg.norm(w) for w in td.second_derivs)
    value = abs(td.trace(subset))
    tight = trace_tol / VALIDATION_TIGHTENING ** 2 * scale
    return {
        "passed": value <= tight,
        "subset_trace": value,
        "scale": scale,
        "threshold": tight,
        "subset": list(subset),
    }


# -- multiplicity ------------------------------------------------------------


def recover_multiplicity(f, p_hat, prefix=(1, 1), dim_D=1, seed=0, n_trials=1,
                         rank_tol=None):
    """Impose a multiplicity-two component via a rank-deficient Jacobian."""
    p_hat = np.asarray(p_hat, dtype=complex)
    param_names = [f.names[i] for i in f.indices(PARAMETER)]
    ws = witness_superset(f, p_hat, dim_D, seed=seed)
    sliced_param = parameterized_sliced_system(f, dim_D, seed)
    var = sliced_param.indices(VARIABLE, AUXILIARY)

    # candidates ordered by how nearly the original system vanishes; the
    # persistence check in validation rejects wrong picks, so this order
    # only decides how many descents are attempted
    scored = [cp for cp in ws.points if np.all(np.isfinite(cp.point))]
    scored.sort(key=lambda cp: cp.residual_full_system)
    if not scored:
        raise StructureNotFoundError("no witness points to examine")

    last = None
    for cand in scored:
        def builder(i, c, s):
            return build_hilbert_condition(
                sliced_param, cand, prefix, seed=s, p_hat=p_hat
            )

        stab = stabilize(
            builder, range(n_trials), param_names, p_hat, seed=seed,
            stop_on_plateau=False, cumulative=True,
            **({"tol": rank_tol} if rank_tol else {}),
        )
        G = build_lagrange(stab.fiber_product, patch_seed=seed)
        res = descend(G)
        if res.status == "recovered":
            res.validation = _validate_multiplicity(
                f, sliced_param, res, prefix, stab.fiber_product, dim_D, seed
            )
        out = RunOutcome(
            structure="multiplicity", result=res, fiber=stab.fiber_product,
            stabilization=stab,
            detection={"points": ws.points, "witness": ws},
        )
        if out.validated:
            return out
        last = out
    return last


def _validate_multiplicity(f, sliced_param, res, prefix, fiber, dim_D, seed):
    # the first n coordinates of the first block are the witness point at p*
    blk_start, _ = fiber.block_slices[0]
    n_x = len(sliced_param.indices(VARIABLE, AUXILIARY))
    x_star = res.endpoint[blk_start: blk_start + n_x]
    fp = sliced_param.substitute_params(res.p_star)
    try:
        prof = local_hilbert(fp, x_star, d_max=len(prefix) + 1)
    except ValueError as exc:
        return {"passed": False, "error": str(exc)}
    expected = list(prefix) + [0]

    # persistence: a true multiple component stays singular on a fresh,
    # independent slice; a mere slice tangency does not
    ws2 = witness_superset(f, res.p_star, dim_D, seed=seed + 501)
    ratios = []
    for cp in ws2.points:
        if not np.all(np.isfinite(cp.point)):
            continue
        s = np.linalg.svd(ws2.sliced_system.jacobian(cp.point), compute_uv=False)
        if len(s) > 1:
            ratios.append(s[-1] / s[0])
        else:
            # a 1x1 Jacobian has no second singular value to compare with,
            # so measure the derivative against the coefficient scale instead
            deg = max(p.degree() for p in ws2.sliced_system.polynomials)
            scale = max(ws2.sliced_system.coefficient_norm(), 1.0) * deg
            scale *= (1.0 + np.linalg.norm(cp.point)) ** max(deg - 1, 0)
            ratios.append(s[0] / max(s[0], scale))
    # the double witness point splits like the square root of the endpoint
    # precision, so the singular-value ratio bottoms out near sqrt(eps_track)
    fresh_ratio = min(ratios) if ratios else np.inf
    persists = fresh_ratio < NEAR_SOLUTION_TOL
    return {
        "passed": prof.hilbert == expected and persists,
        "hilbert": prof.hilbert,
        "expected": expected,
        "multiplicity": prof.multiplicity,
        "fresh_slice_ratio": fresh_ratio,
    }
