"""Branch-and-bound with root cutting planes and bi-objective support.

Best-first search on the LP bound with most-fractional branching and a
depth tie-break that plunges after branching. Before the search starts,
a reduction pass substitutes pinned columns out of every row, turns
singleton rows into bounds and propagates activity bounds to a fixed
point, so a heavily fixed model really shrinks. LP relaxations go
through the built-in dense simplex on small problems (which also feeds
the Gomory separator its tableau) and through scipy's HiGHS interface
above a size threshold; both paths are deterministic, so a given
problem and configuration always reproduce the same solution and node
count.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from . import cuts as cutmod
from .problem import (
    BINARY,
    EQ,
    GE,
    INFEASIBLE,
    INT_TOL,
    INTEGER,
    LE,
    MAX,
    MIN,
    OPTIMAL,
    TIME_LIMIT,
    UNBOUNDED,
    MipError,
    MipProblem,
    Objective,
    Solution,
)
from .simplex import LpResult, solve_lp_dense

BOUND_EPS = 1e-9
FIX_EPS = 1e-9


@dataclass
class SolveConfig:
    """Knobs for the solver; defaults follow double-precision practice."""

    gap_tol: float = 1e-6  # relative optimality gap
    time_limit: float | None = None
    branching: str = "most-fractional"  # or "lowest-index"
    gomory: bool = False
    cover: bool = False
    max_cut_rounds: int = 10  # per family, root node only
    cuts_per_round: int = 8
    lex_slack_rel: float = 1e-6  # stage-2 slack as a fraction of |g*|
    seed: int | None = None  # optional tie randomization, off by default
    lp_backend: str = "auto"  # "auto" | "simplex" | "highs"
    simplex_size_limit: int = 20_000  # rows*cols above which auto picks highs
    propagate: bool = True
    node_limit: int | None = None


def _propagate(rows, lb, ub, int_mask, max_passes=4):
    """Activity-based bound tightening; returns False on infeasibility."""
    for _ in range(max_passes):
        changed = False
        for coeffs, rel, rhs in rows:
            idx = list(coeffs.keys())
            if not idx:
                if (rel == LE and rhs < -1e-9) or (rel == GE and rhs > 1e-9) or (
                    rel == EQ and abs(rhs) > 1e-9
                ):
                    return False
                continue
            a = np.array([coeffs[j] for j in idx])
            lo = np.where(a > 0, lb[idx], ub[idx])
            hi = np.where(a > 0, ub[idx], lb[idx])
            minact = float(np.sum(a * lo))
            maxact = float(np.sum(a * hi))
            if rel in (LE, EQ):
                if minact > rhs + 1e-7:
                    return False
                if np.isfinite(minact):
                    for pos, j in enumerate(idx):
                        slack = rhs - minact + a[pos] * lo[pos]
                        newb = slack / a[pos]
                        if a[pos] > 0 and newb < ub[j] - 1e-9:
                            ub[j] = newb
                            changed = True
                        elif a[pos] < 0 and newb > lb[j] + 1e-9:
                            lb[j] = newb
                            changed = True
            if rel in (GE, EQ):
                if maxact < rhs - 1e-7:
                    return False
                if np.isfinite(maxact):
                    for pos, j in enumerate(idx):
                        slack = rhs - maxact + a[pos] * hi[pos]
                        newb = slack / a[pos]
                        if a[pos] > 0 and newb > lb[j] + 1e-9:
                            lb[j] = newb
                            changed = True
                        elif a[pos] < 0 and newb < ub[j] - 1e-9:
                            ub[j] = newb
                            changed = True
        if np.any(int_mask):
            lb[int_mask] = np.ceil(lb[int_mask] - INT_TOL)
            ub[int_mask] = np.floor(ub[int_mask] + INT_TOL)
        if np.any(lb > ub + 1e-7):
            return False
        if not changed:
            break
    return True


@dataclass
class _Reduced:
    """Problem after substitution of pinned columns; reduced index space."""

    keep: np.ndarray  # original column index per reduced column
    lb: np.ndarray
    ub: np.ndarray
    kinds: list[str]
    int_mask: np.ndarray
    rows: list[tuple[dict[int, float], str, float]]
    obj_coeffs: dict[int, float]
    obj_constant: float
    full_values: np.ndarray  # original-length template with fixed values
    feasible: bool = True


def _reduce(problem: MipProblem, objective: Objective, propagate: bool) -> _Reduced:
    n = problem.n_vars
    lb, ub = problem.bounds_arrays()
    kinds_full = [v.kind for v in problem.variables]
    int_mask_full = np.array(
        [k in (INTEGER, BINARY) for k in kinds_full], dtype=bool
    )
    rows = [(dict(c.coeffs), c.relation, c.rhs) for c in problem.constraints]

    def fail():
        red = _Reduced(
            keep=np.zeros(0, dtype=int), lb=lb, ub=ub, kinds=[],
            int_mask=np.zeros(0, dtype=bool), rows=[], obj_coeffs={},
            obj_constant=0.0, full_values=np.zeros(n), feasible=False,
        )
        return red

    if propagate and not _propagate(rows, lb, ub, int_mask_full, max_passes=6):
        return fail()

    # substitute pinned columns and absorb singleton rows into bounds
    for _ in range(20):
        fixed = (ub - lb) <= FIX_EPS
        new_rows = []
        changed = False
        for coeffs, rel, rhs in rows:
            kept = {}
            r = rhs
            for j, a in coeffs.items():
                if fixed[j]:
                    r -= a * lb[j]
                else:
                    kept[j] = a
            if len(kept) < len(coeffs):
                changed = True
            if not kept:
                if (rel == LE and r < -1e-7) or (rel == GE and r > 1e-7) or (
                    rel == EQ and abs(r) > 1e-7
                ):
                    return fail()
                continue
            if len(kept) == 1:
                (j, a), = kept.items()
                if rel in (LE, EQ):
                    if a > 0:
                        ub[j] = min(ub[j], r / a)
                    else:
                        lb[j] = max(lb[j], r / a)
                if rel in (GE, EQ):
                    if a > 0:
                        lb[j] = max(lb[j], r / a)
                    else:
                        ub[j] = min(ub[j], r / a)
                changed = True
                continue
            new_rows.append((kept, rel, r))
        rows = new_rows
        if np.any(int_mask_full):
            lb[int_mask_full] = np.ceil(lb[int_mask_full] - INT_TOL)
            ub[int_mask_full] = np.floor(ub[int_mask_full] + INT_TOL)
        if np.any(lb > ub + 1e-7):
            return fail()
        if propagate and changed:
            if not _propagate(rows, lb, ub, int_mask_full, max_passes=2):
                return fail()
        if not changed:
            break

    fixed = (ub - lb) <= FIX_EPS
    keep = np.where(~fixed)[0]
    pos_of = {int(j): p for p, j in enumerate(keep)}
    full_values = np.where(fixed, lb, 0.0)
    for j in range(n):
        if fixed[j] and int_mask_full[j]:
            full_values[j] = round(full_values[j])

    red_rows = []
    for coeffs, rel, rhs in rows:
        red_rows.append(({pos_of[j]: a for j, a in coeffs.items()}, rel, rhs))
    obj_coeffs = {}
    obj_constant = objective.constant
    for j, c in objective.coeffs.items():
        if fixed[j]:
            obj_constant += c * full_values[j]
        else:
            obj_coeffs[pos_of[j]] = obj_coeffs.get(pos_of[j], 0.0) + c
    return _Reduced(
        keep=keep,
        lb=lb[keep].copy(),
        ub=ub[keep].copy(),
        kinds=[kinds_full[j] for j in keep],
        int_mask=int_mask_full[keep].copy(),
        rows=red_rows,
        obj_coeffs=obj_coeffs,
        obj_constant=obj_constant,
        full_values=full_values,
    )


class _Relaxation:
    """LP relaxation engine over reduced rows plus added cuts."""

    def __init__(self, red: _Reduced, cfg: SolveConfig):
        self.red = red
        self.cfg = cfg
        self.n = len(red.keep)
        self.rows = list(red.rows)
        self.iterations = 0
        self._matrix_cache = None

    def add_rows(self, rows) -> None:
        self.rows.extend(rows)
        self._matrix_cache = None

    def backend(self) -> str:
        if self.cfg.lp_backend in ("simplex", "highs"):
            return self.cfg.lp_backend
        size = max(1, len(self.rows)) * max(1, self.n)
        return "simplex" if size <= self.cfg.simplex_size_limit else "highs"

    def solve(self, sense: str, lb, ub, want_tableau=False) -> LpResult:
        use = self.backend()
        if want_tableau:
            use = "simplex"
        if self.n == 0:
            return LpResult(status=OPTIMAL, x=np.zeros(0), objective=0.0)
        if use == "simplex":
            res = solve_lp_dense(
                self.n, self.rows, self.red.obj_coeffs, sense, lb, ub,
                integer_mask=self.red.int_mask,
            )
            self.iterations += res.iterations
            return res
        return self._solve_highs(sense, lb, ub)

    def _matrices(self):
        if self._matrix_cache is None:
            data_ub, ri_ub, ci_ub, b_ub = [], [], [], []
            data_eq, ri_eq, ci_eq, b_eq = [], [], [], []
            for coeffs, rel, rhs in self.rows:
                if rel == EQ:
                    r = len(b_eq)
                    for j, a in coeffs.items():
                        ri_eq.append(r), ci_eq.append(j), data_eq.append(a)
                    b_eq.append(rhs)
                else:
                    sgn = 1.0 if rel == LE else -1.0
                    r = len(b_ub)
                    for j, a in coeffs.items():
                        ri_ub.append(r), ci_ub.append(j), data_ub.append(sgn * a)
                    b_ub.append(sgn * rhs)
            A_ub = (
                sparse.csr_matrix((data_ub, (ri_ub, ci_ub)), shape=(len(b_ub), self.n))
                if b_ub
                else None
            )
            A_eq = (
                sparse.csr_matrix((data_eq, (ri_eq, ci_eq)), shape=(len(b_eq), self.n))
                if b_eq
                else None
            )
            self._matrix_cache = (A_ub, np.array(b_ub), A_eq, np.array(b_eq))
        return self._matrix_cache

    def _solve_highs(self, sense: str, lb, ub) -> LpResult:
        A_ub, b_ub, A_eq, b_eq = self._matrices()
        c = np.zeros(self.n)
        for j, a in self.red.obj_coeffs.items():
            c[j] = a
        sign = 1.0 if sense == MIN else -1.0
        res = linprog(
            sign * c,
            A_ub=A_ub,
            b_ub=b_ub if A_ub is not None else None,
            A_eq=A_eq,
            b_eq=b_eq if A_eq is not None else None,
            bounds=np.column_stack([lb, ub]),
            method="highs",
        )
        self.iterations += int(res.nit) if res.nit is not None else 0
        if res.status == 2:
            return LpResult(status=INFEASIBLE)
        if res.status == 3:
            return LpResult(status=UNBOUNDED)
        if res.status != 0:
            raise MipError(f"LP backend failure: {res.message}")
        return LpResult(status=OPTIMAL, x=np.asarray(res.x), objective=sign * res.fun)


def _fractional_index(x, int_indices, rule: str, rng=None) -> int | None:
    best = None
    best_score = -1.0
    ties: list[int] = []
    for j in int_indices:
        f = x[j] - np.floor(x[j])
        dist = min(f, 1.0 - f)
        if dist <= INT_TOL:
            continue
        if rule == "lowest-index":
            return j
        if dist > best_score + 1e-12:
            best_score = dist
            best = j
            ties = [j]
        elif rng is not None and dist > best_score - 1e-12:
            ties.append(j)
    if rng is not None and len(ties) > 1:
        return int(ties[rng.integers(0, len(ties))])
    return best


def branch_and_bound(
    problem: MipProblem,
    cfg: SolveConfig | None = None,
    objective: Objective | None = None,
    warm_values: dict[str, float] | None = None,
) -> Solution:
    """Solve a MIP to proven optimality within the configured gap.

    Reduction first, then root-only cut rounds for the enabled
    families, then best-first branch and bound. ``objective`` overrides
    the problem's primary objective (the lexicographic driver uses it).
    ``warm_values`` seeds the incumbent with a known integer-feasible
    point, which only prunes; it never changes the optimum.
    """
    cfg = cfg or SolveConfig()
    obj = objective or problem.objective
    if obj is None:
        obj = Objective(MAX, {})
    t0 = time.perf_counter()
    maximize = obj.sense == MAX
    cut_counts = {"gomory": 0, "cover": 0}
    tie_rng = np.random.default_rng(cfg.seed) if cfg.seed is not None else None
    red = _reduce(problem, obj, cfg.propagate)

    def out_of_time():
        return cfg.time_limit is not None and time.perf_counter() - t0 > cfg.time_limit

    def make_solution(status, red_values=None, obj_value=None, bound=None,
                      nodes=0, iters=0):
        sol = Solution(
            status=status,
            node_count=nodes,
            lp_iterations=iters,
            cut_counts=dict(cut_counts),
            wall_time=time.perf_counter() - t0,
        )
        if red_values is not None:
            full = red.full_values.copy()
            full[red.keep] = red_values
            sol.values = {
                v.name: float(full[i]) for i, v in enumerate(problem.variables)
            }
            sol.objective_value = obj_value
        sol.best_bound = bound
        return sol

    if not red.feasible:
        return make_solution(INFEASIBLE)
    if len(red.keep) == 0:
        return make_solution(OPTIMAL, np.zeros(0), red.obj_constant,
                             bound=red.obj_constant)

    rel = _Relaxation(red, cfg)
    int_indices = [p for p in range(len(red.keep)) if red.int_mask[p]]
    lb, ub = red.lb.copy(), red.ub.copy()

    def lp(sense_lb, sense_ub, want_tableau=False):
        res = rel.solve(obj.sense, sense_lb, sense_ub, want_tableau=want_tableau)
        if res.objective is not None:
            res.objective += red.obj_constant
        return res

    root = lp(lb, ub, want_tableau=cfg.gomory and rel.backend() == "simplex")
    if root.status == INFEASIBLE:
        return make_solution(INFEASIBLE, iters=rel.iterations)
    if root.status == UNBOUNDED:
        return make_solution(UNBOUNDED, iters=rel.iterations)

    if cfg.gomory or cfg.cover:
        for _ in range(cfg.max_cut_rounds):
            added = 0
            if cfg.gomory:
                g = cutmod.gomory_cuts(root.state, max_cuts=cfg.cuts_per_round)
                if g:
                    rel.add_rows(g)
                    cut_counts["gomory"] += len(g)
                    added += len(g)
            if cfg.cover:
                cv = cutmod.cover_cuts_raw(
                    rel.rows, red.kinds, root.x, max_cuts=cfg.cuts_per_round
                )
                if cv:
                    rel.add_rows(cv)
                    cut_counts["cover"] += len(cv)
                    added += len(cv)
            if added == 0:
                break
            root = lp(lb, ub, want_tableau=cfg.gomory and rel.backend() == "simplex")
            if root.status != OPTIMAL:
                break
        if root.status == INFEASIBLE:
            return make_solution(INFEASIBLE, iters=rel.iterations)
        if root.status == UNBOUNDED:
            return make_solution(UNBOUNDED, iters=rel.iterations)

    incumbent = None
    incumbent_value = -np.inf if maximize else np.inf

    def better(a, b):
        return a > b + 1e-12 if maximize else a < b - 1e-12

    if warm_values is not None:
        full = np.array([warm_values[v.name] for v in problem.variables])
        warm_red = full[red.keep].copy()
        for p in range(len(red.keep)):
            if red.int_mask[p]:
                warm_red[p] = round(warm_red[p])
        if np.all(warm_red >= red.lb - 1e-6) and np.all(warm_red <= red.ub + 1e-6):
            incumbent = warm_red
            incumbent_value = red.obj_constant + sum(
                c * warm_red[j] for j, c in red.obj_coeffs.items()
            )

    def integral(x):
        return all(abs(x[j] - round(x[j])) <= INT_TOL for j in int_indices)

    def exact_value(x):
        x = x.copy()
        for j in int_indices:
            x[j] = round(x[j])
        val = red.obj_constant + sum(c * x[j] for j, c in red.obj_coeffs.items())
        return val, x

    heap = []
    seq = 0
    node_count = 0

    def push(bound, depth, lb, ub):
        nonlocal seq
        prio = -bound if maximize else bound
        heapq.heappush(heap, (prio, -depth, seq, bound, lb, ub))
        seq += 1

    if integral(root.x):
        val, xr = exact_value(root.x)
        return make_solution(OPTIMAL, xr, val, bound=root.objective, nodes=0,
                             iters=rel.iterations)
    push(root.objective, 0, lb, ub)

    status = OPTIMAL
    while heap:
        if out_of_time():
            status = TIME_LIMIT
            break
        if cfg.node_limit is not None and node_count >= cfg.node_limit:
            status = TIME_LIMIT
            break
        prio, negdepth, _, bound, lb_n, ub_n = heapq.heappop(heap)
        if incumbent is not None:
            gap = abs(bound - incumbent_value)
            if not better(bound, incumbent_value) or gap <= cfg.gap_tol * max(
                1.0, abs(incumbent_value)
            ):
                continue
        node_lb, node_ub = lb_n.copy(), ub_n.copy()
        if cfg.propagate and not _propagate(
            rel.rows, node_lb, node_ub, red.int_mask, max_passes=1
        ):
            node_count += 1
            continue
        res = lp(node_lb, node_ub)
        node_count += 1
        if res.status != OPTIMAL:
            continue
        if incumbent is not None and not better(res.objective, incumbent_value):
            continue
        if integral(res.x):
            val, xr = exact_value(res.x)
            if incumbent is None or better(val, incumbent_value):
                incumbent, incumbent_value = xr, val
            continue
        j = _fractional_index(res.x, int_indices, cfg.branching, rng=tie_rng)
        if j is None:  # numerically integral after all
            val, xr = exact_value(res.x)
            if incumbent is None or better(val, incumbent_value):
                incumbent, incumbent_value = xr, val
            continue
        v = res.x[j]
        depth = -negdepth + 1
        left_ub = node_ub.copy()
        left_ub[j] = np.floor(v)
        if node_lb[j] <= left_ub[j] + BOUND_EPS:
            push(res.objective, depth, node_lb, left_ub)
        right_lb = node_lb.copy()
        right_lb[j] = np.ceil(v)
        if right_lb[j] <= node_ub[j] + BOUND_EPS:
            push(res.objective, depth, right_lb, node_ub)

    remaining = [item[3] for item in heap]
    if incumbent is not None:
        if maximize:
            best_bound = max(remaining + [incumbent_value])
        else:
            best_bound = min(remaining + [incumbent_value])
    else:
        best_bound = (max if maximize else min)(remaining, default=None)

    if incumbent is None:
        if status == TIME_LIMIT:
            return make_solution(TIME_LIMIT, bound=best_bound, nodes=node_count,
                                 iters=rel.iterations)
        return make_solution(INFEASIBLE, nodes=node_count, iters=rel.iterations)
    return make_solution(
        status if status == TIME_LIMIT else OPTIMAL,
        incumbent,
        incumbent_value,
        bound=float(best_bound),
        nodes=node_count,
        iters=rel.iterations,
    )


def lp_solve(problem: MipProblem, cfg: SolveConfig | None = None) -> Solution:
    """Solve the LP relaxation (integrality dropped) of a problem.

    The solution carries variable values and the relaxation objective.
    The reduction pass is skipped so the relaxation is solved exactly
    as stated.
    """
    cfg = cfg or SolveConfig()
    obj = problem.objective or Objective(MAX, {})
    lb, ub = problem.bounds_arrays()
    rows = [(dict(c.coeffs), c.relation, c.rhs) for c in problem.constraints]
    int_mask = np.zeros(problem.n_vars, dtype=bool)
    sol = Solution(status=INFEASIBLE)
    if problem.n_vars == 0:
        sol.status = OPTIMAL
        sol.objective_value = obj.constant
        return sol
    use_simplex = cfg.lp_backend != "highs" and (
        cfg.lp_backend == "simplex"
        or max(1, len(rows)) * problem.n_vars <= cfg.simplex_size_limit
    )
    if use_simplex:
        res = solve_lp_dense(
            problem.n_vars, rows, obj.coeffs, obj.sense, lb, ub, integer_mask=int_mask
        )
        sol.lp_iterations = res.iterations
        if res.status == OPTIMAL:
            sol.status = OPTIMAL
            sol.values = {
                v.name: float(res.x[i]) for i, v in enumerate(problem.variables)
            }
            sol.objective_value = res.objective + obj.constant
            sol.best_bound = sol.objective_value
            if res.state is not None:
                sol.basis = [
                    problem.variables[res.state.columns[c].var].name
                    if res.state.columns[c].kind == "struct"
                    else f"{res.state.columns[c].kind}[{c}]"
                    for c in res.basis
                ]
        else:
            sol.status = res.status
        return sol
    red = _Reduced(
        keep=np.arange(problem.n_vars),
        lb=lb, ub=ub,
        kinds=[v.kind for v in problem.variables],
        int_mask=int_mask,
        rows=rows,
        obj_coeffs=dict(obj.coeffs),
        obj_constant=obj.constant,
        full_values=np.zeros(problem.n_vars),
    )
    rel = _Relaxation(red, cfg)
    res = rel.solve(obj.sense, lb, ub)
    sol.lp_iterations = rel.iterations
    if res.status == OPTIMAL:
        sol.status = OPTIMAL
        sol.values = {v.name: float(res.x[i]) for i, v in enumerate(problem.variables)}
        sol.objective_value = res.objective + obj.constant
        sol.best_bound = sol.objective_value
    else:
        sol.status = res.status
    return sol


def fix_variables(problem: MipProblem, assignments: dict[str, float]) -> MipProblem:
    """Pin variables to values by collapsing their bounds.

    Names that map to composite affine expressions (through
    ``expr_map``) are fixed with an equality row instead. Out-of-bounds
    values or fractional values for integer variables raise.
    """
    fixed = problem.copy()
    for name, value in assignments.items():
        value = float(value)
        if name in fixed._index:
            idx = fixed._index[name]
            var = fixed.variables[idx]
            if value < var.lb - 1e-9 or value > var.ub + 1e-9:
                raise MipError(
                    f"fix of {name!r} to {value} violates bounds [{var.lb}, {var.ub}]"
                )
            if var.kind in (INTEGER, BINARY) and abs(value - round(value)) > INT_TOL:
                raise MipError(f"fix of integer variable {name!r} to fractional {value}")
            if var.kind in (INTEGER, BINARY):
                value = float(round(value))
            var.lb = var.ub = value
        elif name in fixed.expr_map:
            expr = fixed.expr_map[name]
            fixed.add_constraint(
                dict(expr.terms), EQ, value - expr.constant, name=f"fix:{name}"
            )
        else:
            raise MipError(f"unknown variable {name!r}")
    return fixed


def lexicographic_solve(
    problem: MipProblem, cfg: SolveConfig | None = None
) -> Solution:
    """Two-stage solve: optimize the primary objective, then the
    secondary subject to near-retention of the primary optimum.

    Stage 2 adds ``g >= g* - eps`` (or ``<= g* + eps`` when minimizing)
    with ``eps = lex_slack_rel * |g*|``; exact retention is numerically
    brittle, so a relative slack is used instead.
    """
    cfg = cfg or SolveConfig()
    if problem.objective is None or problem.secondary is None:
        raise MipError("lexicographic solve needs a primary and a secondary objective")
    stage1 = branch_and_bound(problem, cfg)
    if stage1.status not in (OPTIMAL, TIME_LIMIT) or stage1.objective_value is None:
        return stage1
    g_star = stage1.objective_value
    eps = cfg.lex_slack_rel * abs(g_star) + 1e-9
    stage2_problem = problem.copy()
    g = problem.objective
    if g.sense == MAX:
        stage2_problem.add_constraint(
            dict(g.coeffs), GE, g_star - eps - g.constant, name="lex:retain"
        )
    else:
        stage2_problem.add_constraint(
            dict(g.coeffs), LE, g_star + eps - g.constant, name="lex:retain"
        )
    stage2 = branch_and_bound(
        stage2_problem, cfg, objective=problem.secondary, warm_values=stage1.values
    )
    if stage2.status not in (OPTIMAL, TIME_LIMIT) or not stage2.values:
        # retention row plus solver tolerance squeezed stage 2 dry;
        # fall back to the stage-1 solution
        x1 = stage1.value_array(problem)
        stage1.secondary_value = problem.secondary.value(x1)
        return stage1
    x2 = stage2.value_array(problem)
    return Solution(
        status=stage2.status if stage1.status == OPTIMAL else stage1.status,
        values=stage2.values,
        objective_value=g.value(x2),
        secondary_value=problem.secondary.value(x2),
        best_bound=stage1.best_bound,
        node_count=stage1.node_count + stage2.node_count,
        lp_iterations=stage1.lp_iterations + stage2.lp_iterations,
        cut_counts={
            k: stage1.cut_counts.get(k, 0) + stage2.cut_counts.get(k, 0)
            for k in set(stage1.cut_counts) | set(stage2.cut_counts)
        },
        wall_time=stage1.wall_time + stage2.wall_time,
    )
