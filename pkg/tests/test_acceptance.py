"""End-to-end acceptance checks, one test per shipped guarantee.

Every test exercises a full pipeline on a shipped fixture and asserts the
published reference values at their stated tolerances, plus a wall-clock
budget.  The long Stewart-Gough recovery is marked ``extended`` and only
runs with ``pytest --run-extended``.
"""

import dataclasses
import math
import time
from pathlib import Path

import numpy as np
import pytest

from nearex.algebra import Polynomial, PolySystem, parse_system, seeded_rng
from nearex.engine import (
    recover_factor,
    recover_infinity,
    recover_multiplicity,
    recover_positive_dim,
)
from nearex.fiberprod import (
    FiberProductSystem,
    build_witness_condition,
    image_dimension,
)
from nearex.fixtures import (
    DOUBLE_ROOT_ONE_PARAM,
    DOUBLE_ROOT_P_HAT,
    DOUBLE_ROOT_SOURCE,
    DOUBLE_ROOT_TWO_PARAM,
    ZEKE_P_HAT,
    ZEKE_SOURCE,
    load,
)
from nearex.problem import ProblemFile
from nearex.recover import build_lagrange, descend, sample_study
from nearex.structure import (
    NEAR_SOLUTION,
    cluster_points,
    local_hilbert,
    macaulay_matrix,
    trace_data,
    witness_superset,
)
from nearex.tracker import newton_refine, solve_total_degree

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def _elapsed(t0):
    return time.monotonic() - t0


# -- double-root warm-up -----------------------------------------------------


def test_double_root_newton_and_two_parameter_descent():
    t0 = time.monotonic()
    f = parse_system(DOUBLE_ROOT_SOURCE)
    df = f.polynomials[0].diff(0)
    both = f.with_polynomials([f.polynomials[0], df])

    # one free parameter: Newton on {f, f'} in the unknowns (x, p1)
    fixed = both.substitute({2: DOUBLE_ROOT_P_HAT[1]})
    start = np.array([-np.sqrt(2.0), DOUBLE_ROOT_P_HAT[0]], dtype=complex)
    refined, ok = newton_refine(fixed, start, tol=1e-14, unknowns=[0, 1])
    assert ok
    assert refined[0] == pytest.approx(DOUBLE_ROOT_ONE_PARAM[0], abs=1e-12)
    assert refined[1] == pytest.approx(DOUBLE_ROOT_ONE_PARAM[1], abs=1e-12)

    # both parameters free: nearest point on the double-root locus
    from nearex.fiberprod import ConditionSystem

    comp = ConditionSystem(kind="witness", system=both, constants={},
                           start_block=np.array([-np.sqrt(2.0) + 0j]))
    F = FiberProductSystem([comp], ["p1", "p2"], DOUBLE_ROOT_P_HAT)
    res = descend(build_lagrange(F, patch_seed=0))
    assert res.success
    assert res.endpoint[0] == pytest.approx(DOUBLE_ROOT_TWO_PARAM[0], abs=1e-6)
    assert res.p_star[0] == pytest.approx(DOUBLE_ROOT_TWO_PARAM[1], abs=1e-6)
    assert res.p_star[1] == pytest.approx(DOUBLE_ROOT_TWO_PARAM[2], abs=1e-6)
    assert _elapsed(t0) < 1.0


# -- solutions at infinity ---------------------------------------------------


def test_infinity_recovery_matches_reference_and_homogenizations_agree():
    t0 = time.monotonic()
    f, _, p_hat, p_star = load("infinity_example")
    o1 = recover_infinity(f, p_hat, seed=0)
    o2 = recover_infinity(f, p_hat, groups=[["x1"], ["x2"]], seed=0)
    assert o1.validated and o2.validated
    for out in (o1, o2):
        p = np.real(out.result.p_star)
        assert np.max(np.abs(p - p_star)) < 1e-4
        # membership in the exceptional set of the quadratic at infinity
        assert abs(p[2] ** 2 - p[0] * p[2] + p[1]) <= 1e-6
    assert np.max(np.abs(o1.result.p_star - o2.result.p_star)) < 1e-6
    assert _elapsed(t0) < 10.0


# -- positive-dimensional component ------------------------------------------


def test_positive_dim_recovery_matches_reference_with_exact_witness():
    t0 = time.monotonic()
    f, _, p_hat, p_star = load("posdim")
    out = recover_positive_dim(f, p_hat, dim_D=1, degree_d=1, seed=0)
    assert out.validated
    p = np.real(out.result.p_star)
    assert np.max(np.abs(p - p_star)) < 1e-3
    assert abs(2 * p[0] + p[1]) <= 1e-8
    # re-solving at p* classifies one witness point as an exact solution
    v = out.result.validation
    assert v["exact_witness_points"] == 1
    assert _elapsed(t0) < 10.0


# -- factorization via the second-derivative trace ---------------------------


def test_factor_recovery_dimension_table_second_derivatives_and_parameters():
    t0 = time.monotonic()
    f, _, p_hat, p_star = load("zeke_quartic")

    # the four published curve second derivatives on the fixed slice
    sq_src = parse_system(ZEKE_SOURCE).substitute_params(ZEKE_P_HAT)
    n = sq_src.arity
    sl = (Polynomial.variable(0, n, 2.0) + Polynomial.variable(1, n, -3.0)
          + Polynomial.constant(-1.0, n))
    sq = PolySystem(sq_src.polynomials + [sl], sq_src.roles, sq_src.names)
    pts = [r.endpoint for r in solve_total_degree(sq, seed=0) if r.success]
    assert len(pts) == 4
    td = trace_data(sq, pts, move_index=1, alpha_seed=0)
    expected_wddot = [
        (0.13416408, 0.08944272),
        (-0.13416415, -0.08944277),
        (0.00546655, 0.00364437),
        (-0.00546648, -0.00364432),
    ]
    unmatched = list(range(4))
    for expect in expected_wddot:
        errs = [np.max(np.abs(td.second_derivs[j] - np.array(expect)))
                for j in unmatched]
        k = unmatched[int(np.argmin(errs))]
        assert min(errs) < 1e-5
        unmatched.remove(k)

    out = recover_factor(f, p_hat, dim_D=1, subset_size=2, n_trials=5, seed=0)
    assert out.validated
    assert out.stabilization.dims == [9, 8, 7, 6, 6]
    assert out.stabilization.sizes == [35, 60, 85, 110, 135]
    assert np.max(np.abs(np.real(out.result.p_star) - p_star)) < 1e-5
    assert _elapsed(t0) < 120.0


# -- multiplicity ------------------------------------------------------------


def test_multiplicity_recovery_matches_reference_and_hilbert_function():
    t0 = time.monotonic()
    f, _, p_hat, p_star = load("multiplicity_line")
    out = recover_multiplicity(f, p_hat, prefix=(1, 1), dim_D=1, seed=0)
    assert out.validated
    p = np.real(out.result.p_star)
    assert np.max(np.abs(p - p_star)) < 1e-3
    assert abs(p[0] ** 2 - p[1]) <= 1e-8
    v = out.result.validation
    assert list(v["hilbert"]) == [1, 1, 0]
    assert v["multiplicity"] == 2
    assert _elapsed(t0) < 10.0


# -- four-bar path synthesis -------------------------------------------------


def test_fourbar_recovery_dimension_table_and_coupled_parameters():
    t0 = time.monotonic()
    f, _, p_hat, p_star = load("fourbar")
    out = recover_factor(f, p_hat, dim_D=1, subset_size=2, n_trials=4, seed=0)
    assert out.validated
    assert out.stabilization.dims == [3, 2, 2, 2]
    assert out.stabilization.sizes == [53, 102, 151, 200]
    p = np.real(out.result.p_star)
    assert np.max(np.abs(p - p_star)) < 1e-3
    assert abs(p[0] - p[2]) <= 1e-6
    assert abs(p[1] - p[3]) <= 1e-6
    assert _elapsed(t0) < 300.0


# -- Stewart-Gough platform (extended) ---------------------------------------


@pytest.mark.extended
def test_stewart_gough_recovery_matches_reference():
    t0 = time.monotonic()
    f, _, p_hat, p_star = load("stewart_gough")
    ws = witness_superset(f, np.asarray(p_hat, dtype=complex), 1, seed=0)
    # distinct endpoints of the paths that completed tracking
    done = [cp for cp in ws.points
            if "track-step-failure" not in cp.labels]
    ids = cluster_points([cp.point for cp in done], radius=1e-6)
    assert len(set(ids)) == 40
    near = [cp for cp in ws.points if NEAR_SOLUTION in cp.labels]
    assert len(near) == 2
    out = recover_positive_dim(f, p_hat, dim_D=1, degree_d=2, n_trials=5,
                               seed=0)
    assert out.validated
    assert out.stabilization.dims == [40, 38, 36, 35, 35]
    assert out.stabilization.sizes == [72, 102, 132, 162, 192]
    assert np.max(np.abs(np.real(out.result.p_star) - p_star)) < 1e-8
    assert _elapsed(t0) < 1800.0


# -- sampling studies --------------------------------------------------------


def _run_study(fixture, exceptional_residual):
    prob = ProblemFile.load(str(FIXTURES / f"{fixture}.json"))

    def run_one(p_hat, seed):
        return dataclasses.replace(prob, p_hat=tuple(p_hat)).run(seed=seed).result

    rows = sample_study(run_one, np.array(prob.p_tilde, float), 0.1, 500, 0)
    ok = [r for r in rows if str(r["status"]).startswith("recovered")]
    rate = len(ok) / len(rows)
    chi2 = float(np.mean([r["chi2stat"] for r in ok]))
    worst = max(exceptional_residual(np.real(r["p_star"])) for r in ok)
    return rate, chi2, worst


def test_sampling_studies_have_chi_square_statistics():
    t0 = time.monotonic()
    rate, chi2, worst = _run_study(
        "posdim", lambda p: abs(2 * p[0] + p[1]))
    assert rate >= 0.95
    assert worst <= 1e-6
    assert 0.7 <= chi2 <= 1.4
    rate, chi2, worst = _run_study(
        "multiplicity_line", lambda p: abs(p[0] ** 2 - p[1]))
    assert rate >= 0.95
    assert worst <= 1e-6
    assert 0.7 <= chi2 <= 1.4
    assert _elapsed(t0) < 600.0


# -- structural property bundle ----------------------------------------------


def test_path_counts_derivative_tables_monotonicity_and_determinism():
    # total-degree path counts are exactly the product of the degrees
    sq = parse_system("vars x, y; poly x^2 + y - 3; poly x*y - 1;")
    assert len(solve_total_degree(sq, seed=0)) == 4
    cubic = parse_system("vars x; poly x^3 - 2*x + 1;")
    assert len(solve_total_degree(cubic, seed=0)) == 3

    # derivative-table entries match symbolic derivatives divided by alpha!
    f = parse_system("vars x, y; poly x^2*y + 3*y^2 - 2*x; poly x*y - 1;")
    rng = seeded_rng(5)
    x_star = rng.normal(size=2) + 1j * rng.normal(size=2)
    M = macaulay_matrix(f, x_star, 2)
    cols = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    for j, p in enumerate(f.polynomials):
        for ci, alpha in enumerate(cols):
            d = p
            for i, k in enumerate(alpha):
                for _ in range(k):
                    d = d.diff(i)
            fact = math.factorial(alpha[0]) * math.factorial(alpha[1])
            assert M[j, ci] == pytest.approx(d.evaluate(x_star) / fact,
                                             abs=1e-12)

    # gradient rows of the critical-point system match finite differences
    from nearex.fiberprod import ConditionSystem

    base = parse_system(DOUBLE_ROOT_SOURCE)
    both = base.with_polynomials([base.polynomials[0],
                                  base.polynomials[0].diff(0)])
    comp = ConditionSystem(kind="witness", system=both, constants={},
                           start_block=np.array([-np.sqrt(2.0) + 0j]))
    F = FiberProductSystem([comp], ["p1", "p2"], DOUBLE_ROOT_P_HAT)
    G = build_lagrange(F, patch_seed=0)
    rng = seeded_rng(11)
    z = rng.normal(size=G.system.arity) + 1j * rng.normal(size=G.system.arity)
    m = len(G.lambda_indices) - 1
    lam = z[G.lambda_indices]

    def L(primal):
        fvals = F.full_system.evaluate(primal)
        d = primal[F.param_indices()] - F.p_hat
        return lam[0] * np.sum(d * d) + np.sum(lam[1:] * fvals)

    h = 1e-7
    primal = z[: F.full_system.arity]
    grad_rows = G.system.evaluate(z)[m: m + len(primal)]
    for a in range(len(primal)):
        e = np.zeros_like(primal)
        e[a] = h
        fd = (L(primal + e) - L(primal - e)) / (2 * h)
        assert abs(grad_rows[a] - fd) / max(1.0, abs(fd)) < 1e-6

    # the image dimension never grows as conditions are appended
    fpos, _, p_hat, _ = load("posdim")
    p_hat = np.asarray(p_hat, dtype=complex)
    ws = witness_superset(fpos, p_hat, 1, seed=0)
    cands = sorted((cp for cp in ws.points if np.all(np.isfinite(cp.point))),
                   key=lambda cp: cp.residual_full_system)
    prev, comps = None, []
    for k in range(3):
        comps.append(build_witness_condition(fpos, 1, [cands[0]], seed=k,
                                             detection=ws))
        dim, _ = image_dimension(
            FiberProductSystem(list(comps), ["p1", "p2"], p_hat))
        if prev is not None:
            assert dim <= prev
        prev = dim

    # fixed seeds give bit-for-bit identical endpoints
    a = recover_positive_dim(fpos, p_hat, dim_D=1, degree_d=1, seed=0)
    b = recover_positive_dim(fpos, p_hat, dim_D=1, degree_d=1, seed=0)
    assert np.array_equal(a.result.endpoint, b.result.endpoint)


def test_detection_splits_the_6r_start_solutions_into_three_clusters():
    t0 = time.monotonic()
    f, _, p_hat, _ = load("sixR")
    results = solve_total_degree(f.substitute_params(p_hat), seed=0)
    assert len(results) == 256
    good = [r.endpoint for r in results if r.success]
    ids = cluster_points(good, radius=1e-6)
    reps = {}
    for pt, i in zip(good, ids):
        reps.setdefault(i, pt)
    pts = list(reps.values())
    assert len(pts) == 64
    i0, i9 = f.names.index("x0"), f.names.index("x9")
    th = 1e-4
    small = [(abs(p[i0]) / np.linalg.norm(p) < th,
              abs(p[i9]) / np.linalg.norm(p) < th) for p in pts]
    assert sum(1 for a, b in small if a and not b) == 16
    assert sum(1 for a, b in small if b and not a) == 16
    assert sum(1 for a, b in small if not a and not b) == 32
    assert _elapsed(t0) < 120.0
