"""Predictor–corrector path tracking for polynomial homotopies.

A :class:`Homotopy` is just a :class:`~nearex.algebra.PolySystem` with one
distinguished path indeterminate ``t``; the remaining indeterminates are the
tracked unknowns.  Prediction is fourth-order Runge–Kutta on the Davidenko
equation ``J_x dx/dt = -dH/dt``, correction is plain Newton at fixed ``t``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    AUXILIARY,
    MULTIPLIER,
    PARAMETER,
    VARIABLE,
    Polynomial,
    PolySystem,
    seeded_rng,
    unit_complex,
)
from .numlin import SingularMatrixError, solve_square

SUCCESS = "success"
DIVERGED = "diverged"
SINGULAR_ENDPOINT = "singular-endpoint"
STEP_FAILURE = "step-failure"


@dataclass
class TrackingOptions:
    initial_step: float = 0.05
    min_step: float = 1e-14
    max_step: float = 0.1
    corrector_tol: float = 1e-10
    corrector_steps: int = 3
    growth_after: int = 5
    divergence_bound: float = 1e12
    endgame_t: float = 1e-6
    salvage_t: float = 1e-3  # below this t, step failure defers to the endpoint polish
    start_tol: float = 1e-8
    polish_iters: int = 10


class Homotopy:
    """A square-along-the-path system ``H(x, t)`` with unknowns at ``unknowns``."""

    def __init__(self, system, unknowns, t_index):
        if len(system.polynomials) != len(unknowns):
            raise ValueError(
                f"{len(system.polynomials)} equations for {len(unknowns)} unknowns"
            )
        if t_index in unknowns:
            raise ValueError("path indeterminate cannot be an unknown")
        self.system = system
        self.unknowns = list(unknowns)
        self.t_index = t_index
        if sorted(self.unknowns + [t_index]) != list(range(system.arity)):
            raise ValueError("unknowns plus t must cover all indeterminates")

    def _full(self, x, t):
        full = np.empty(self.system.arity, dtype=complex)
        full[self.unknowns] = x
        full[self.t_index] = t
        return full

    def evaluate(self, x, t):
        return self.system.evaluate(self._full(x, t))

    def jacobians(self, x, t):
        """(J_x, H_t) at (x, t)."""
        J = self.system.compiled.jacobian(self._full(x, t))
        return J[:, self.unknowns], J[:, self.t_index]

    @property
    def n_unknowns(self):
        return len(self.unknowns)


@dataclass
class TrackResult:
    endpoint: np.ndarray
    status: str
    residual: float
    steps: int
    final_t: float

    @property
    def success(self):
        return self.status == SUCCESS


def _newton_correct(h, x, t, tol, max_steps):
    """Newton at fixed t. Returns (x, residual, converged)."""
    res = float(np.linalg.norm(h.evaluate(x, t)))
    for _ in range(max_steps):
        Jx, _ = h.jacobians(x, t)
        try:
            dx = solve_square(Jx, -h.evaluate(x, t))
        except SingularMatrixError:
            return x, res, False
        x = x + dx
        res = float(np.linalg.norm(h.evaluate(x, t)))
        if np.linalg.norm(dx) <= tol:
            return x, res, True
    return x, res, res <= tol


def _predict_rk4(h, x, t, dt):
    """One RK4 step of the Davidenko ODE from t to t+dt (dt < 0)."""

    def slope(xv, tv):
        Jx, Ht = h.jacobians(xv, tv)
        return solve_square(Jx, -Ht)

    k1 = slope(x, t)
    k2 = slope(x + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = slope(x + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = slope(x + dt * k3, t + dt)
    return x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def track_path(h, start, opts=None):
    """Track one solution path of ``h`` from t=1 down to t=0."""
    opts = opts or TrackingOptions()
    x = np.asarray(start, dtype=complex).copy()
    t = 1.0
    start_res = float(np.linalg.norm(h.evaluate(x, t)))
    if start_res > opts.start_tol:
        raise ValueError(
            f"start point residual {start_res:.3e} exceeds tolerance {opts.start_tol:.3e}"
        )
    dt = opts.initial_step
    steps = 0
    run = 0
    while t > opts.endgame_t:
        dt = min(dt, t - 0.0)  # never step past t=0
        step = min(dt, t)
        try:
            x_pred = _predict_rk4(h, x, t, -step)
            x_new, res, ok = _newton_correct(
                h, x_pred, t - step, opts.corrector_tol, opts.corrector_steps
            )
        except SingularMatrixError:
            ok = False
            x_new, res = x, np.inf
        steps += 1
        if ok and np.all(np.isfinite(x_new)):
            x, t = x_new, t - step
            if np.linalg.norm(x) > opts.divergence_bound:
                return TrackResult(x, DIVERGED, res, steps, t)
            run += 1
            if run >= opts.growth_after:
                dt = min(dt * 2.0, opts.max_step)
                run = 0
        else:
            run = 0
            dt *= 0.5
            if dt < opts.min_step:
                if t <= opts.salvage_t:
                    break  # close enough: let the endpoint polish have a go
                res_here = float(np.linalg.norm(h.evaluate(x, t)))
                return TrackResult(x, STEP_FAILURE, res_here, steps, t)

    # final polish at t=0
    x, res, ok = _newton_correct(h, x, 0.0, opts.corrector_tol, opts.polish_iters)
    if not ok:
        x, res = _gauss_newton_polish(h, x, opts)
    if np.linalg.norm(x) > opts.divergence_bound or not np.all(np.isfinite(x)):
        return TrackResult(x, DIVERGED, res, steps, 0.0)
    if not ok or res > opts.corrector_tol * (1.0 + np.linalg.norm(x)):
        return TrackResult(x, SINGULAR_ENDPOINT, res, steps, 0.0)
    return TrackResult(x, SUCCESS, res, steps, 0.0)


def _gauss_newton_polish(h, x, opts, iters=40):
    """Least-squares fallback at t=0 for singular endpoints."""
    from .numlin import lstsq  # local import to avoid a cycle at module load

    best, best_res = x, float(np.linalg.norm(h.evaluate(x, 0.0)))
    for _ in range(iters):
        Jx, _ = h.jacobians(x, 0.0)
        x = x + lstsq(Jx, -h.evaluate(x, 0.0))
        res = float(np.linalg.norm(h.evaluate(x, 0.0)))
        if not np.isfinite(res):
            break
        if res < best_res:
            best, best_res = x, res
        if res < 1e-14 * (1.0 + np.linalg.norm(x)):
            break
    return best, best_res


def _square_check(sys):
    unk = sys.indices(VARIABLE, AUXILIARY, MULTIPLIER)
    if len(sys.polynomials) != len(unk):
        raise ValueError(
            f"system is not square: {len(sys.polynomials)} equations, {len(unk)} unknowns"
        )
    return unk


def _with_t(sys, polys):
    """Append a path indeterminate t and return (system, t_index)."""
    arity = sys.arity
    return (
        PolySystem(
            [p.remap(arity + 1, list(range(arity))) for p in polys],
            sys.roles + [PARAMETER],
            sys.names + ["_t"],
        ),
        arity,
    )


def linear_homotopy(target, start_sys, gamma):
    """``H = t*gamma*G + (1-t)*F`` over the shared indeterminates of ``target``.

    Both systems must be square in the non-parameter indeterminates of
    ``target`` (which must have no free parameters).
    """
    unk = _square_check(target)
    arity = target.arity
    t = Polynomial.variable(arity, arity + 1)
    one_minus_t = Polynomial.constant(1.0, arity + 1) - t
    polys = []
    for F, G in zip(target.polynomials, start_sys.polynomials):
        F1 = F.remap(arity + 1, list(range(arity)))
        G1 = G.remap(arity + 1, list(range(arity)))
        polys.append(one_minus_t * F1 + (gamma * t) * G1)
    hsys = PolySystem(polys, target.roles + [PARAMETER], target.names + ["_t"])
    return Homotopy(hsys, unk, arity)


def total_degree_start(sys, seed=0):
    """Start system ``x_i^{d_i} - b_i`` with unit-modulus b, plus all its roots."""
    unk = _square_check(sys)
    degs = [max(1, p.degree(unk)) for p in sys.polynomials]
    rng = seeded_rng(seed, 1)
    b = unit_complex(rng, len(unk))
    polys = []
    for i, (d, ui) in enumerate(zip(degs, unk)):
        polys.append(
            Polynomial.variable(ui, sys.arity) ** d - Polynomial.constant(b[i], sys.arity)
        )
    start_sys = sys.with_polynomials(polys)
    roots_per = [b[i] ** (1.0 / d) * np.exp(2j * np.pi * np.arange(d) / d)
                 for i, d in enumerate(degs)]
    starts = []
    for combo in np.ndindex(*degs):
        x = np.array([roots_per[i][k] for i, k in enumerate(combo)])
        starts.append(x)
    return start_sys, starts


def solve_total_degree(sys, params=None, seed=0, opts=None):
    """Solve a parameter-free square system ab initio by a total-degree homotopy.

    ``params`` (if given) is substituted for the parameter indeterminates
    first.  Returns one :class:`TrackResult` per Bézout path, in a
    deterministic order for a fixed seed.
    """
    if params is not None:
        sys = sys.substitute_params(params)
    elif sys.indices(PARAMETER):
        raise ValueError("system has free parameters; pass their values")
    start_sys, starts = total_degree_start(sys, seed)
    gamma = complex(unit_complex(seeded_rng(seed, 2)))
    h = linear_homotopy(sys, start_sys, gamma)
    opts = opts or TrackingOptions()
    return [track_path(h, x, opts) for x in starts]


def parameter_homotopy(sys, p1, p0, starts, opts=None):
    """Track solutions of ``sys`` from parameters ``p1`` (t=1) to ``p0`` (t=0)."""
    unk = _square_check(sys)
    par = sys.indices(PARAMETER)
    p1 = np.asarray(p1, dtype=complex)
    p0 = np.asarray(p0, dtype=complex)
    if len(par) != p1.shape[0] or len(par) != p0.shape[0]:
        raise ValueError(f"expected {len(par)} parameter values")
    arity = sys.arity
    # substitute p_i -> p0_i + t*(p1_i - p0_i); keeps the homotopy polynomial in t
    args = []
    t = Polynomial.variable(arity, arity + 1)
    for i in range(arity):
        if i in par:
            k = par.index(i)
            args.append(Polynomial.constant(p0[k], arity + 1) + t * (p1[k] - p0[k]))
        else:
            args.append(Polynomial.variable(i, arity + 1))
    polys = [p.compose(args, arity + 1) for p in sys.polynomials]
    hsys = PolySystem(polys, sys.roles + [PARAMETER], sys.names + ["_t"])
    # drop the now-constant parameter columns from the unknown list
    keep = [i for i in range(arity) if i not in par]
    sub = hsys.substitute({i: 0.0 for i in par})  # params no longer appear
    unk_new = [keep.index(i) for i in unk]
    h = Homotopy(sub, unk_new, len(keep))
    opts = opts or TrackingOptions()
    return [track_path(h, np.asarray(x, dtype=complex), opts) for x in starts]


def newton_refine(sys, point, tol=1e-12, max_iter=20, params=None, unknowns=None):
    """Newton's method on a square system; returns (point, converged).

    When ``unknowns`` is omitted, every indeterminate is treated as unknown
    (parameters must be substituted or listed explicitly).
    """
    if params is not None:
        sys = sys.substitute_params(params)
    if unknowns is None:
        unk = _square_check(sys)
        if len(unk) != sys.arity:
            raise ValueError("system has non-unknown indeterminates; substitute them first")
    else:
        unk = list(unknowns)
        if len(unk) != len(sys.polynomials) or len(unk) != sys.arity:
            raise ValueError("unknown list must cover all indeterminates of a square system")
    x = np.asarray(point, dtype=complex).copy()
    for _ in range(max_iter):
        try:
            dx = solve_square(sys.jacobian(x), -sys.evaluate(x))
        except SingularMatrixError:
            return x, False
        x = x + dx
        if np.linalg.norm(dx) <= tol * (1.0 + np.linalg.norm(x)):
            return x, True
    return x, False
