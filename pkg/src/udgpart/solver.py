"""Solvers for the partition programs: exact enumeration and branch and bound.

Both solvers exploit the shared shape of the programs: every node picks one
admissible portfolio of means (a single mean, a k-subset, or a cost-exact
subset), and coverage auxiliaries follow from the picks.  The oracle
enumerates whole assignments; the branch-and-bound search fixes nodes one at
a time and prunes with a combinatorial per-node coverage cap that is exact on
leaves, so its bound never undercuts a completion of the current partial
assignment.
"""

import itertools
import time
from dataclasses import dataclass

import numpy as np

from .graphs import GeometricGraph
from .ilp import (
    CAP_EXACTLY_ONE,
    CAP_FIXED_K,
    KIND_FEASIBILITY,
    KIND_MAXIMAL_SOFT,
    KIND_OPTIMAL_SOFT,
    IlpModel,
    PartitionAssignment,
)

STATUS_OPTIMAL = "optimal"
STATUS_TIME_LIMIT = "feasible-time-limit"
STATUS_INFEASIBLE = "infeasible"
STATUS_ERROR = "error"


class OracleCapError(RuntimeError):
    """The enumeration space exceeds what the oracle is allowed to walk."""


@dataclass(frozen=True)
class SolveLimits:
    time_limit: float = 1200.0
    node_limit: int | None = None
    threads: int = 1

    def __post_init__(self):
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass(frozen=True)
class SolveReport:
    status: str
    assignment: PartitionAssignment | None
    objective: float | None
    best_bound: float | None
    wall_time: float
    explored_nodes: int


def portfolio_domain(model: IlpModel) -> tuple[frozenset[int], ...]:
    """Admissible per-node mean portfolios, identical for every node."""
    means = range(1, model.n + 1)
    if model.capacity == CAP_EXACTLY_ONE:
        return tuple(frozenset((i,)) for i in means)
    if model.capacity == CAP_FIXED_K:
        return tuple(
            frozenset(c) for c in itertools.combinations(means, model.k)
        )
    out = []
    for mask in range(1, 2 ** model.n):
        subset = [i for i in means if mask >> (i - 1) & 1]
        total = sum(model.costs[i - 1] for i in subset)
        if abs(total - 1.0) <= 1e-9:
            out.append(frozenset(subset))
    return tuple(out)


def _assignment_from_rows(domain, row, n):
    return PartitionAssignment(tuple(domain[int(i)] for i in row), n)


def brute_force(model: IlpModel, cap: int = 10_000_000) -> SolveReport:
    """True optimum by chunked enumeration of all admissible assignments.

    Ties resolve to the first optimum in enumeration order (nodes ascending,
    portfolio index ascending).  Raises :class:`OracleCapError` when the
    space exceeds ``cap``.
    """
    start = time.perf_counter()
    domain = portfolio_domain(model)
    nc, n = model.node_count, model.n
    if not domain:
        return SolveReport(
            STATUS_INFEASIBLE, None, None, None, time.perf_counter() - start, 0
        )
    total = len(domain) ** nc
    if total > cap:
        raise OracleCapError(
            f"{len(domain)}^{nc} = {total} assignments exceed the oracle cap {cap}"
        )
    has_table = np.array(
        [[(i in p) for i in range(1, n + 1)] for p in domain], dtype=bool
    )
    nbrs = [np.array(ws, dtype=np.intp) for ws in model.closed_neighbourhoods]

    best_val = None
    best_row = None
    feasible_found = False
    chunk_size = 1 << 14
    combos = itertools.product(range(len(domain)), repeat=nc)
    explored = 0
    while True:
        rows = list(itertools.islice(combos, chunk_size))
        if not rows:
            break
        labels = np.array(rows, dtype=np.intp)
        holds = has_table[labels]  # (C, nc, n)
        covered = np.empty_like(holds)
        for v in range(nc):
            covered[:, v, :] = holds[:, nbrs[v], :].any(axis=1)
        if model.kind == KIND_FEASIBILITY:
            ok = covered.all(axis=(1, 2))
            hits = np.flatnonzero(ok)
            if hits.size:
                best_row = labels[hits[0]]
                best_val = 0.0
                feasible_found = True
                explored += int(hits[0]) + 1
                break
            explored += len(rows)
        else:
            vals = (
                covered.sum(axis=(1, 2))
                if model.kind == KIND_OPTIMAL_SOFT
                else covered.all(axis=2).sum(axis=1)
            )
            top = int(vals.argmax())
            if best_val is None or vals[top] > best_val:
                best_val = float(vals[top])
                best_row = labels[top]
            explored += len(rows)
    wall = time.perf_counter() - start
    if model.kind == KIND_FEASIBILITY and not feasible_found:
        return SolveReport(STATUS_INFEASIBLE, None, None, None, wall, explored)
    assignment = _assignment_from_rows(domain, best_row, n)
    return SolveReport(
        STATUS_OPTIMAL,
        assignment,
        float(best_val),
        float(best_val),
        wall,
        explored,
    )


def greedy_incumbent(g: GeometricGraph, n: int, objective_kind: str = "optimal") -> PartitionAssignment:
    """Valid one-mean-per-node start: highest degree first, rarest mean locally.

    The policy is identical for both soft objectives; ``objective_kind`` is
    accepted for symmetry with the solver interface.
    """
    nbrs = tuple(
        tuple(sorted(g.closed_neighbourhood(v))) for v in range(g.node_count)
    )
    return _greedy_from_neighbourhoods(nbrs, n)


def _greedy_from_neighbourhoods(nbrs, n) -> PartitionAssignment:
    nc = len(nbrs)
    order = sorted(range(nc), key=lambda v: (-len(nbrs[v]), v))
    label = [0] * nc
    for v in order:
        counts = [0] * (n + 1)
        for w in nbrs[v]:
            if label[w]:
                counts[label[w]] += 1
        label[v] = min(range(1, n + 1), key=lambda i: (counts[i], i))
    return PartitionAssignment.from_labels(label, n)


class _Search:
    """Depth-first branch and bound over per-node portfolio choices."""

    def __init__(self, model, domain, limits):
        self.model = model
        self.domain = domain
        self.limits = limits
        self.n = model.n
        self.nc = model.node_count
        self.nbrs = model.closed_neighbourhoods
        self.smax = max(len(p) for p in domain)
        self.possible = [
            any(i in p for p in domain) for i in range(1, self.n + 1)
        ]
        self.order = self._branch_order()
        self.fixed = [-1] * self.nc
        self.cover_cnt = [[0] * self.n for _ in range(self.nc)]
        self.distinct = [0] * self.nc
        self.unfixed_cnt = [len(self.nbrs[v]) for v in range(self.nc)]
        self.contrib = [0] * self.nc
        self.bound = 0
        for v in range(self.nc):
            c = self._node_contrib(v)
            self.contrib[v] = c
            self.bound += c
        self.root_bound = self.bound
        self.incumbent_row = None
        self.incumbent_val = None
        self.explored = 0
        self.deadline = None
        self.timed_out = False
        self.node_limited = False

    def _branch_order(self):
        """Fix nodes in a connectivity-clustered order.

        Starting from the tightest closed neighbourhood, always branch next
        on the node with the most already-branched neighbours.  Completing
        neighbourhoods early makes the coverage cap bite near the top of the
        tree; a degree-sorted order leaves it slack until the very bottom
        and can be slower by orders of magnitude.
        """
        fixed_adj = [0] * self.nc
        out = []
        remaining = set(range(self.nc))
        while remaining:
            v = min(
                remaining,
                key=lambda w: (-fixed_adj[w], len(self.nbrs[w]), w),
            )
            out.append(v)
            remaining.discard(v)
            for w in self.nbrs[v]:
                fixed_adj[w] += 1
        return out

    # target value a feasibility search must reach to be satisfiable
    @property
    def feasibility_target(self):
        return self.nc

    def _node_contrib(self, v):
        u = self.unfixed_cnt[v]
        cc = self.cover_cnt[v]
        d = self.distinct[v]
        kind = self.model.kind
        if kind == KIND_OPTIMAL_SOFT:
            if u == 0:
                return d
            ach = sum(
                1
                for i in range(self.n)
                if cc[i] > 0 or self.possible[i]
            )
            return min(self.n, ach, d + self.smax * u)
        reachable = all(
            cc[i] > 0 or (u > 0 and self.possible[i]) for i in range(self.n)
        )
        full = reachable and (d + self.smax * u >= self.n)
        return 1 if full else 0

    def _apply(self, v, portfolio, sign):
        # sign +1 fixes, -1 unfixes; refresh the cap of every neighbourhood
        # the node participates in
        for w in self.nbrs[v]:
            cc = self.cover_cnt[w]
            for i in portfolio:
                before = cc[i - 1]
                cc[i - 1] = before + sign
                if sign > 0 and before == 0:
                    self.distinct[w] += 1
                elif sign < 0 and before == 1:
                    self.distinct[w] -= 1
            self.unfixed_cnt[w] -= sign
            c = self._node_contrib(w)
            self.bound += c - self.contrib[w]
            self.contrib[w] = c

    def _check_limits(self):
        if self.limits.node_limit is not None and self.explored >= self.limits.node_limit:
            self.node_limited = True
            return True
        if (self.explored & 0xFF) == 0 and time.perf_counter() >= self.deadline:
            self.timed_out = True
            return True
        return False

    def run(self, time_budget):
        self.deadline = time.perf_counter() + time_budget
        kind = self.model.kind
        target = self.feasibility_target if kind == KIND_FEASIBILITY else None
        # permuting mean labels maps solutions to solutions unless costs
        # break the symmetry, so the first branched node needs one child only
        first_domain = (
            self.domain[:1]
            if self.model.capacity in (CAP_EXACTLY_ONE, CAP_FIXED_K)
            else self.domain
        )

        def dfs(depth):
            if self.timed_out or self.node_limited:
                return False
            if depth == self.nc:
                val = self.bound
                if kind == KIND_FEASIBILITY:
                    self.incumbent_row = list(self.fixed)
                    self.incumbent_val = 0.0
                    return True  # first satisfying leaf ends the search
                if self.incumbent_val is None or val > self.incumbent_val:
                    self.incumbent_val = val
                    self.incumbent_row = list(self.fixed)
                return False
            v = self.order[depth]
            children = first_domain if depth == 0 else self.domain
            for idx, portfolio in enumerate(children):
                self.explored += 1
                if self._check_limits():
                    return False
                self.fixed[v] = idx
                self._apply(v, portfolio, +1)
                if kind == KIND_FEASIBILITY:
                    keep = self.bound >= target
                else:
                    keep = (
                        self.incumbent_val is None
                        or self.bound > self.incumbent_val
                    )
                if keep and dfs(depth + 1):
                    self._apply(v, portfolio, -1)
                    self.fixed[v] = -1
                    return True
                self._apply(v, portfolio, -1)
                self.fixed[v] = -1
            return False

        dfs(0)


def solve(model: IlpModel, limits: SolveLimits = SolveLimits()) -> SolveReport:
    """Branch and bound with warm start, time limit and proof of optimality.

    Returns status ``optimal`` with objective == best bound when the search
    space is exhausted, ``feasible-time-limit`` with the incumbent and the
    root bound when interrupted, and ``infeasible`` when no admissible
    assignment exists.
    """
    start = time.perf_counter()
    if model.kind not in (KIND_FEASIBILITY, KIND_OPTIMAL_SOFT, KIND_MAXIMAL_SOFT):
        return SolveReport(STATUS_ERROR, None, None, None, 0.0, 0)
    domain = portfolio_domain(model)
    if not domain:
        return SolveReport(
            STATUS_INFEASIBLE, None, None, None, time.perf_counter() - start, 0
        )
    search = _Search(model, domain, limits)

    if model.kind != KIND_FEASIBILITY and model.capacity == CAP_EXACTLY_ONE:
        warm = _greedy_from_neighbourhoods(model.closed_neighbourhoods, model.n)
        warm = _polish(model, warm)
        warm_row = [
            next(k for k, p in enumerate(domain) if p == means)
            for means in warm.assign
        ]
        search.incumbent_row = warm_row
        search.incumbent_val = _soft_objective(model, warm)

    remaining = limits.time_limit - (time.perf_counter() - start)
    search.run(max(remaining, 1e-3))
    wall = time.perf_counter() - start

    interrupted = search.timed_out or search.node_limited
    if search.incumbent_row is None:
        if interrupted:
            return SolveReport(
                STATUS_TIME_LIMIT, None, None, float(search.root_bound), wall,
                search.explored,
            )
        return SolveReport(
            STATUS_INFEASIBLE, None, None, None, wall, search.explored
        )

    assignment = PartitionAssignment(
        tuple(domain[k] for k in search.incumbent_row), model.n
    )
    values = model.assignment_to_values(assignment)
    if model.violated_constraints(values):
        return SolveReport(STATUS_ERROR, None, None, None, wall, search.explored)
    objective = float(search.incumbent_val)
    if interrupted:
        return SolveReport(
            STATUS_TIME_LIMIT,
            assignment,
            objective,
            float(max(search.root_bound, objective)),
            wall,
            search.explored,
        )
    return SolveReport(
        STATUS_OPTIMAL, assignment, objective, objective, wall, search.explored
    )


def _soft_objective(model: IlpModel, assignment: PartitionAssignment) -> float:
    values = model.assignment_to_values(assignment)
    return model.objective_value(values)


def _polish(model: IlpModel, assignment: PartitionAssignment, max_rounds: int = 20):
    """Single-node label moves until no move improves the soft objective."""
    labels = list(assignment.labels())
    nc, n = model.node_count, model.n
    best = _soft_objective(model, PartitionAssignment.from_labels(labels, n))
    for _ in range(max_rounds):
        improved = False
        for v in range(nc):
            original = labels[v]
            for i in range(1, n + 1):
                if i == original:
                    continue
                labels[v] = i
                val = _soft_objective(
                    model, PartitionAssignment.from_labels(labels, n)
                )
                if val > best:
                    best = val
                    original = i
                    improved = True
                else:
                    labels[v] = original
            labels[v] = original
        if not improved:
            break
    return PartitionAssignment.from_labels(labels, n)
