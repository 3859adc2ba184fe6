"""0-1 linear programs for domatic and soft domatic partitions of a graph.

Six formulations share the binary variables x_v_i ("node v holds mean i").
The feasibility family constrains every closed neighbourhood to contain every
mean; the soft family drops those constraints and instead maximises coverage
through auxiliary variables: y_v_i flags mean i as reachable from v, z_v
flags v as completely covered.  The per-node capacity rule is one of
exactly-one, exactly-k, or cost-weighted (unit budget).
"""

import io
from dataclasses import dataclass

from .graphs import GeometricGraph

KIND_FEASIBILITY = "feasibility"
KIND_OPTIMAL_SOFT = "optimal-soft"
KIND_MAXIMAL_SOFT = "maximal-soft"

CAP_EXACTLY_ONE = "exactly-one"
CAP_FIXED_K = "fixed-k"
CAP_COST = "cost"


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[int, float], ...]  # (variable index, coefficient)
    relation: str  # "<=", "=" or ">="
    bound: float


@dataclass(frozen=True)
class PartitionAssignment:
    """Which partition sets (means, 1-based) each node holds."""

    assign: tuple[frozenset[int], ...]
    n: int

    def __post_init__(self):
        for v, means in enumerate(self.assign):
            if not means:
                raise ValueError(f"node {v} holds no mean")
            if not all(1 <= i <= self.n for i in means):
                raise ValueError(f"node {v} holds a mean outside 1..{self.n}")

    @classmethod
    def from_labels(cls, labels, n):
        return cls(tuple(frozenset((int(i),)) for i in labels), n)

    def labels(self) -> tuple[int, ...]:
        if any(len(m) != 1 for m in self.assign):
            raise ValueError("not a single-mean assignment")
        return tuple(next(iter(m)) for m in self.assign)


@dataclass(frozen=True)
class IlpModel:
    kind: str
    capacity: str
    n: int
    node_count: int
    closed_neighbourhoods: tuple[tuple[int, ...], ...]
    variables: tuple[str, ...]
    constraints: tuple[Constraint, ...]
    objective: tuple[tuple[int, float], ...] | None  # maximisation sense
    k: int | None = None
    costs: tuple[float, ...] | None = None

    # -- variable index layout: x block, then y block, then z block --------

    def x_index(self, v: int, i: int) -> int:
        return v * self.n + (i - 1)

    def y_index(self, v: int, i: int) -> int:
        return self.node_count * self.n + v * self.n + (i - 1)

    def z_index(self, v: int) -> int:
        return 2 * self.node_count * self.n + v

    @property
    def has_y(self) -> bool:
        return self.kind in (KIND_OPTIMAL_SOFT, KIND_MAXIMAL_SOFT)

    @property
    def has_z(self) -> bool:
        return self.kind == KIND_MAXIMAL_SOFT

    def assignment_to_values(self, assignment: PartitionAssignment) -> dict[int, int]:
        """Binary values for all variables, auxiliaries at their maximal setting."""
        values = {}
        for v, means in enumerate(assignment.assign):
            for i in range(1, self.n + 1):
                values[self.x_index(v, i)] = 1 if i in means else 0
        if self.has_y:
            for v in range(self.node_count):
                for i in range(1, self.n + 1):
                    covered = any(
                        i in assignment.assign[w]
                        for w in self.closed_neighbourhoods[v]
                    )
                    values[self.y_index(v, i)] = 1 if covered else 0
        if self.has_z:
            for v in range(self.node_count):
                values[self.z_index(v)] = min(
                    values[self.y_index(v, i)] for i in range(1, self.n + 1)
                )
        return values

    def violated_constraints(self, values: dict[int, int]) -> list[str]:
        """Names of constraints the given variable values break."""
        bad = []
        for c in self.constraints:
            total = sum(coef * values[idx] for idx, coef in c.terms)
            ok = (
                total <= c.bound + 1e-9
                if c.relation == "<="
                else total >= c.bound - 1e-9
                if c.relation == ">="
                else abs(total - c.bound) <= 1e-9
            )
            if not ok:
                bad.append(c.name)
        return bad

    def objective_value(self, values: dict[int, int]) -> float:
        if self.objective is None:
            return 0.0
        return float(sum(coef * values[idx] for idx, coef in self.objective))


def _closed_neighbourhoods(g: GeometricGraph) -> tuple[tuple[int, ...], ...]:
    return tuple(
        tuple(sorted(g.closed_neighbourhood(v))) for v in range(g.node_count)
    )


def _capacity_constraints(model_n, node_count, x_index, capacity, k, costs):
    out = []
    for v in range(node_count):
        if capacity == CAP_EXACTLY_ONE:
            terms = tuple((x_index(v, i), 1.0) for i in range(1, model_n + 1))
            out.append(Constraint(f"assign_{v}", terms, "=", 1.0))
        elif capacity == CAP_FIXED_K:
            terms = tuple((x_index(v, i), 1.0) for i in range(1, model_n + 1))
            out.append(Constraint(f"assign_{v}", terms, "=", float(k)))
        else:
            terms = tuple(
                (x_index(v, i), float(costs[i - 1])) for i in range(1, model_n + 1)
            )
            out.append(Constraint(f"assign_{v}", terms, "=", 1.0))
    return out


def _validate_costs(costs, n):
    costs = tuple(float(c) for c in costs)
    if len(costs) != n:
        raise ValueError(f"need {n} cost components, got {len(costs)}")
    if not all(0.0 < c <= 1.0 for c in costs):
        raise ValueError("cost components must lie in (0, 1]")
    return costs


def _validate_k(k, n):
    if not (1 <= k <= n):
        raise ValueError(f"k must satisfy 1 <= k <= n, got k={k}, n={n}")
    return int(k)


def _build(g, n, kind, capacity, k=None, costs=None):
    if n < 1:
        raise ValueError("n must be >= 1")
    if g.node_count < 1:
        raise ValueError("graph must have at least one node")
    nbrs = _closed_neighbourhoods(g)
    nc = g.node_count

    def x_index(v, i):
        return v * n + (i - 1)

    def y_index(v, i):
        return nc * n + v * n + (i - 1)

    def z_index(v):
        return 2 * nc * n + v

    variables = [f"x_{v}_{i}" for v in range(nc) for i in range(1, n + 1)]
    constraints = _capacity_constraints(n, nc, x_index, capacity, k, costs)
    objective = None

    if kind == KIND_FEASIBILITY:
        for v in range(nc):
            for i in range(1, n + 1):
                terms = tuple((x_index(w, i), 1.0) for w in nbrs[v])
                constraints.append(Constraint(f"cover_{v}_{i}", terms, ">=", 1.0))
    else:
        variables += [f"y_{v}_{i}" for v in range(nc) for i in range(1, n + 1)]
        for v in range(nc):
            for i in range(1, n + 1):
                terms = ((y_index(v, i), 1.0),) + tuple(
                    (x_index(w, i), -1.0) for w in nbrs[v]
                )
                constraints.append(Constraint(f"cover_{v}_{i}", terms, "<=", 0.0))
        if kind == KIND_OPTIMAL_SOFT:
            objective = tuple(
                (y_index(v, i), 1.0) for v in range(nc) for i in range(1, n + 1)
            )
        else:
            variables += [f"z_{v}" for v in range(nc)]
            for v in range(nc):
                for i in range(1, n + 1):
                    constraints.append(
                        Constraint(
                            f"full_{v}_{i}",
                            ((z_index(v), 1.0), (y_index(v, i), -1.0)),
                            "<=",
                            0.0,
                        )
                    )
            objective = tuple((z_index(v), 1.0) for v in range(nc))

    return IlpModel(
        kind=kind,
        capacity=capacity,
        n=n,
        node_count=nc,
        closed_neighbourhoods=nbrs,
        variables=tuple(variables),
        constraints=tuple(constraints),
        objective=objective,
        k=k,
        costs=costs,
    )


def build_domatic_feasibility(g: GeometricGraph, n: int) -> IlpModel:
    """Satisfiability program: is there a domatic partition of size n?"""
    return _build(g, n, KIND_FEASIBILITY, CAP_EXACTLY_ONE)


def build_fixed_k(g: GeometricGraph, n: int, k: int) -> IlpModel:
    """Feasibility variant with exactly k means implemented per node."""
    return _build(g, n, KIND_FEASIBILITY, CAP_FIXED_K, k=_validate_k(k, n))


def build_cost_based(g: GeometricGraph, n: int, costs) -> IlpModel:
    """Feasibility variant where each node spends its unit budget exactly."""
    return _build(g, n, KIND_FEASIBILITY, CAP_COST, costs=_validate_costs(costs, n))


def build_optimal_soft(g: GeometricGraph, n: int) -> IlpModel:
    """Maximise reachable (node, mean) pairs; |V|*n - optimum = missing coverages."""
    return _build(g, n, KIND_OPTIMAL_SOFT, CAP_EXACTLY_ONE)


def build_maximal_soft(g: GeometricGraph, n: int) -> IlpModel:
    """Maximise completely covered nodes; |V| - optimum = incompletely covered."""
    return _build(g, n, KIND_MAXIMAL_SOFT, CAP_EXACTLY_ONE)


def build_soft_variant(g: GeometricGraph, n: int, base: str, k=None, costs=None) -> IlpModel:
    """Soft objective with the per-node capacity swapped for fixed-k or costs."""
    if base not in ("optimal", "maximal"):
        raise ValueError("base must be 'optimal' or 'maximal'")
    if (k is None) == (costs is None):
        raise ValueError("give exactly one of k or costs")
    kind = KIND_OPTIMAL_SOFT if base == "optimal" else KIND_MAXIMAL_SOFT
    if k is not None:
        return _build(g, n, kind, CAP_FIXED_K, k=_validate_k(k, n))
    return _build(g, n, kind, CAP_COST, costs=_validate_costs(costs, n))


# -- LP text export ---------------------------------------------------------


def _fmt_coef(value: float) -> str:
    if value == int(value):
        return str(int(value))
    return repr(value)


def _fmt_expr(terms, variables) -> str:
    parts = []
    for idx, coef in terms:
        name = variables[idx]
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = name if mag == 1.0 else f"{_fmt_coef(mag)} {name}"
        parts.append((sign, body))
    first_sign, first_body = parts[0]
    text = (first_sign + " " if first_sign == "-" else "") + first_body
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


def export_lp(model: IlpModel) -> str:
    """Model as LP-format text with a stable variable and constraint order.

    Feasibility programs get a constant-zero objective so any LP consumer
    accepts the file.
    """
    out = io.StringIO()
    out.write("Maximize\n")
    if model.objective:
        out.write(f" obj: {_fmt_expr(model.objective, model.variables)}\n")
    else:
        out.write(f" obj: 0 {model.variables[0]}\n")
    out.write("Subject To\n")
    for c in model.constraints:
        rel = c.relation if c.relation != "=" else "="
        out.write(f" {c.name}: {_fmt_expr(c.terms, model.variables)} {rel} {_fmt_coef(c.bound)}\n")
    out.write("Binary\n")
    for name in model.variables:
        out.write(f" {name}\n")
    out.write("End\n")
    return out.getvalue()
