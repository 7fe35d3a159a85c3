"""Control instances built from hard source problems, and brute-force deciders for the sources.

Each generator writes out a known reduction literally, calibration dummies included, so the
score differences it promises can be checked on the result. The deciders answer the source
question by exhaustive search and serve as the other side of soundness checks.
"""

import logging
from enum import StrEnum
from itertools import combinations, product
from math import comb

import networkx as nx
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from bundle_control.control import (
    CONS_ADD,
    CONS_DEL,
    DES_ADD,
    DES_DEL,
    Budget,
    ControlInstance,
    Variant,
)
from bundle_control.election import BundlingFunction, CandidateId, Election, Voter, VoterId
from bundle_control.errors import InstanceFormatError, ParameterRangeError

logger = logging.getLogger(__name__)


class HardnessSource(StrEnum):
    INDEPENDENT_SET = "is"
    DOMINATING_SET_DISJOINT = "ds-disjoint"
    DOMINATING_SET_W2 = "ds-w2"
    CLIQUE_W1 = "clique-w1"
    SAT223 = "sat223"
    CLIQUE_UNLIMITED = "clique-unlim"


TARGETS: dict[HardnessSource, tuple[Variant, ...]] = {
    HardnessSource.INDEPENDENT_SET: (CONS_ADD,),
    HardnessSource.DOMINATING_SET_DISJOINT: (CONS_DEL,),
    HardnessSource.DOMINATING_SET_W2: (CONS_ADD, CONS_DEL, DES_ADD, DES_DEL),
    HardnessSource.CLIQUE_W1: (CONS_ADD, CONS_DEL, DES_ADD, DES_DEL),
    HardnessSource.SAT223: (CONS_DEL,),
    HardnessSource.CLIQUE_UNLIMITED: (CONS_ADD,),
}


class Formula(BaseModel):
    """CNF over variables 1..variables; literal i is x_i and -i its negation.

    Every clause has two or three literals over distinct variables, and every variable
    occurs exactly twice positively and twice negatively.
    """

    model_config = ConfigDict(frozen=True)

    variables: int
    clauses: tuple[tuple[int, ...], ...]

    @field_validator("clauses")
    @classmethod
    def clauses_have_two_or_three_literals(
        cls, v: tuple[tuple[int, ...], ...]
    ) -> tuple[tuple[int, ...], ...]:
        for index, clause in enumerate(v, start=1):
            if len(clause) not in (2, 3):
                raise ValueError(f"clause {index} has {len(clause)} literals, expected 2 or 3")
            if len({abs(literal) for literal in clause}) != len(clause) or 0 in clause:
                raise ValueError(f"clause {index} must use distinct, non-zero variables")
        return v

    @model_validator(mode="after")
    def every_variable_occurs_twice_each_way(self) -> "Formula":
        for variable in range(1, self.variables + 1):
            positive = sum(clause.count(variable) for clause in self.clauses)
            negative = sum(clause.count(-variable) for clause in self.clauses)
            if positive != 2 or negative != 2:
                raise ValueError(
                    f"variable {variable} occurs {positive}x positively and {negative}x "
                    "negatively, expected 2 and 2"
                )
        stray = {abs(lit) for clause in self.clauses for lit in clause} - set(
            range(1, self.variables + 1)
        )
        if stray:
            raise ValueError(f"clauses use undeclared variables {sorted(stray)}")
        return self

    def satisfied_by(self, assignment: dict[int, bool]) -> bool:
        return all(
            any(assignment[abs(lit)] == (lit > 0) for lit in clause) for clause in self.clauses
        )


def _indexed(graph: nx.Graph) -> tuple[list[str], list[tuple[int, int]]]:
    """Vertex names sorted as strings, and edges as sorted index pairs."""
    names = sorted(str(node) for node in graph.nodes)
    index = {name: i for i, name in enumerate(names)}
    edges = set()
    for u, v in graph.edges:
        if u == v:
            raise InstanceFormatError(f"self-loop at vertex {u!r}")
        a, b = sorted((index[str(u)], index[str(v)]))
        edges.add((a, b))
    return names, sorted(edges)


def _width(count: int) -> int:
    return len(str(max(count, 1)))


class _Builder:
    """Collects voters and bundles for one construction."""

    def __init__(self) -> None:
        self.registered: list[Voter] = []
        self.pool: list[Voter] = []
        self.bundles: dict[VoterId, frozenset[VoterId]] = {}

    def voter(self, voter_id: VoterId, favorite: CandidateId, registered: bool) -> VoterId:
        (self.registered if registered else self.pool).append(Voter(id=voter_id, favorite=favorite))
        return voter_id

    def bundle(self, leader: VoterId, *members: VoterId) -> None:
        self.bundles[leader] = frozenset((leader, *members))

    def group(self, members: list[VoterId]) -> None:
        together = frozenset(members)
        self.bundles.update(dict.fromkeys(members, together))

    def build(
        self, variant: Variant, candidates: list[CandidateId], budget: Budget
    ) -> ControlInstance:
        return ControlInstance(
            variant=variant,
            election=Election(candidates=tuple(candidates), voters=tuple(self.registered)),
            pool=tuple(self.pool),
            kappa=BundlingFunction(bundles=self.bundles),
            preferred="p",
            budget=budget,
        )


def _independent_set(graph: nx.Graph, h: int) -> ControlInstance:
    names, edges = _indexed(graph)
    if not edges:
        raise ParameterRangeError("the independent set construction needs at least one edge")
    if any(graph.degree(node) == 0 for node in graph.nodes):
        raise ParameterRangeError("the independent set construction needs no isolated vertices")
    if h < 1:
        raise ParameterRangeError("h must be at least 1")
    ew, vw = _width(len(edges)), _width(len(names))
    candidates = ["p"] + [f"g{j:0{ew}d}" for j in range(1, len(edges) + 1)]
    builder = _Builder()
    for j in range(1, len(edges) + 1):
        for t in range(1, h):
            builder.voter(f"r{j:0{ew}d}_{t}", candidates[j], registered=True)
    for i in range(len(names)):
        members = [builder.voter(f"p{i + 1:0{vw}d}", "p", registered=False)]
        for j, edge in enumerate(edges, start=1):
            if i in edge:
                members.append(
                    builder.voter(f"a{j:0{ew}d}_{i + 1:0{vw}d}", candidates[j], registered=False)
                )
        builder.group(members)
    return builder.build(CONS_ADD, candidates, Budget.of(h))


def _dominating_set_disjoint(graph: nx.Graph, h: int) -> ControlInstance:
    names, edges = _indexed(graph)
    if not names:
        raise ParameterRangeError("the dominating set construction needs at least one vertex")
    n = len(names)
    closed = [{i} for i in range(n)]
    for a, b in edges:
        closed[a].add(b)
        closed[b].add(a)
    top = max(len(around) for around in closed) - 1
    vw = _width(n)
    candidates = ["p"] + [f"g{i:0{vw}d}" for i in range(1, n + 1)]
    builder = _Builder()
    for i in range(n):
        builder.group(
            [
                builder.voter(f"b{i + 1:0{vw}d}_{j + 1:0{vw}d}", candidates[j + 1], registered=True)
                for j in sorted(closed[i])
            ]
        )
    dummies = [builder.voter(f"dp{t}", "p", registered=True) for t in range(1, top + 1)]
    for j in range(n):
        dummies.extend(
            builder.voter(f"dg{j + 1:0{vw}d}_{t}", candidates[j + 1], registered=True)
            for t in range(1, top + 2 - len(closed[j]))
        )
    if dummies:
        builder.group(dummies)
    return builder.build(CONS_DEL, candidates, Budget.of(h))


def _dominating_set_w2(graph: nx.Graph, h: int, target: Variant) -> ControlInstance:
    names, edges = _indexed(graph)
    if not names:
        raise ParameterRangeError("the dominating set construction needs at least one vertex")
    n = len(names)
    vw = _width(n)
    adding = target in (CONS_ADD, DES_ADD)
    favorite = "p" if target in (CONS_ADD, DES_DEL) else "g"
    builder = _Builder()
    ids = [builder.voter(f"w{i + 1:0{vw}d}", favorite, registered=not adding) for i in range(n)]
    neighbours: list[list[VoterId]] = [[] for _ in range(n)]
    for a, b in edges:
        neighbours[a].append(ids[b])
        neighbours[b].append(ids[a])
    for i in range(n):
        builder.bundle(ids[i], *neighbours[i])
    if target == CONS_ADD:
        for t in range(1, n + 1):
            builder.voter(f"r{t:0{vw}d}", "g", registered=True)
    elif target == DES_ADD:
        for t in range(1, n):
            builder.voter(f"r{t:0{vw}d}", "p", registered=True)
    elif target == DES_DEL:
        builder.bundle(builder.voter("x", "g", registered=True))
    return builder.build(target, ["p", "g"], Budget.of(h))


def _clique_dummies(edges: int, vertices: int, h: int, target: Variant) -> tuple[int, int]:
    """Sizes (D_p, D_g) of the calibration dummies for the deletion targets."""
    base = edges - vertices
    if target == CONS_DEL:
        goal = comb(h, 2) - h
        return max(0, base - goal), max(0, goal - base)
    goal = comb(h, 2) - h - 1
    return max(0, goal - base), max(0, base - goal)


def _clique_w1(graph: nx.Graph, h: int, target: Variant) -> ControlInstance:
    if h <= 3:
        raise ParameterRangeError(f"the clique construction assumes h > 3, got {h}")
    names, edges = _indexed(graph)
    vw, ew = _width(len(names)), _width(len(edges))
    deleting = target in (CONS_DEL, DES_DEL)
    vertex_favorite = "p" if target in (CONS_DEL, DES_ADD) else "g"
    edge_favorite = "g" if vertex_favorite == "p" else "p"
    builder = _Builder()
    vertex_ids = [
        builder.voter(f"u{i + 1:0{vw}d}", vertex_favorite, registered=deleting)
        for i in range(len(names))
    ]
    for vertex_id in vertex_ids:
        builder.bundle(vertex_id)
    for j, (a, b) in enumerate(edges, start=1):
        edge_id = builder.voter(f"e{j:0{ew}d}", edge_favorite, registered=deleting)
        builder.bundle(edge_id, vertex_ids[a], vertex_ids[b])

    threshold = comb(h, 2) - h
    if target == CONS_ADD:
        for t in range(1, threshold + 1):
            builder.voter(f"r{t}", "g", registered=True)
    elif target == DES_ADD:
        for t in range(1, threshold):
            builder.voter(f"r{t}", "p", registered=True)
    else:
        d_p, d_g = _clique_dummies(len(edges), len(names), h, target)
        for t in range(1, d_p + 1):
            builder.bundle(builder.voter(f"dp{t}", "p", registered=True))
        for t in range(1, d_g + 1):
            builder.bundle(builder.voter(f"dg{t}", "g", registered=True))
    return builder.build(target, ["p", "g"], Budget.of(comb(h, 2)))


def _sat223(formula: Formula) -> ControlInstance:
    clause_width = _width(len(formula.clauses))
    variable_width = _width(formula.variables)
    candidates = ["p", "d"] + [
        f"c{j:0{clause_width}d}" for j in range(1, len(formula.clauses) + 1)
    ]
    builder = _Builder()
    for i in range(1, formula.variables + 1):
        positive = [j for j, clause in enumerate(formula.clauses, start=1) if i in clause]
        negative = [j for j, clause in enumerate(formula.clauses, start=1) if -i in clause]
        j, r = positive
        s, t = negative
        ring: list[VoterId] = []
        for clause in (j, s, r, t):
            tag = f"{i:0{variable_width}d}_{clause:0{clause_width}d}"
            ring.append(builder.voter(f"u{tag}", candidates[clause + 1], registered=True))
            ring.append(builder.voter(f"v{tag}", "d", registered=True))
        # u^j v^s u^s v^r u^r v^t u^t v^j
        order = [ring[0], ring[3], ring[2], ring[5], ring[4], ring[7], ring[6], ring[1]]
        for q, leader in enumerate(order):
            builder.bundle(leader, order[q - 1], order[(q + 1) % len(order)])
    for j, clause in enumerate(formula.clauses, start=1):
        if len(clause) == 2:
            singleton = builder.voter(f"c{j:0{clause_width}d}", candidates[j + 1], registered=True)
            builder.bundle(singleton)
    for side in ("+", "-"):
        p_voter = builder.voter(f"w{side}", "p", registered=True)
        d_voter = builder.voter(f"z{side}", "d", registered=True)
        builder.group([p_voter, d_voter])
    return builder.build(CONS_DEL, candidates, Budget.of(2 * formula.variables))


def _clique_unlimited(graph: nx.Graph, h: int) -> ControlInstance:
    if h < 4:
        raise ParameterRangeError(f"the unlimited clique construction assumes h >= 4, got {h}")
    names, edges = _indexed(graph)
    vw, ew = _width(len(names)), _width(len(edges))
    pairs = comb(h, 2)
    builder = _Builder()
    for t in range(1, pairs + 1):
        builder.voter(f"rp{t}", "p", registered=True)
    for t in range(1, 2 * pairs - h + 1):
        builder.voter(f"rg{t}", "g", registered=True)
    vertex_ids = [
        builder.voter(f"u{i + 1:0{vw}d}", "g", registered=False) for i in range(len(names))
    ]
    for vertex_id in vertex_ids:
        builder.bundle(vertex_id)
    for j, (a, b) in enumerate(edges, start=1):
        tag = f"{j:0{ew}d}"
        extras = [builder.voter(f"x{tag}_{side}", "x", registered=False) for side in (1, 2)]
        for extra in extras:
            builder.bundle(extra)
        edge_id = builder.voter(f"e{tag}", "p", registered=False)
        builder.bundle(edge_id, vertex_ids[a], vertex_ids[b], *extras)
    return builder.build(CONS_ADD, ["p", "g", "x"], Budget())


def is_reduction_exact(
    source: HardnessSource, graph: nx.Graph | None, h: int, target: Variant | None = None
) -> bool:
    """False when calibration dummies can be deleted to the controller's advantage.

    Only the clique deletion targets can need such dummies: g-dummies for constructive
    deletion and p-dummies for destructive deletion.
    """
    if source is not HardnessSource.CLIQUE_W1 or target not in (CONS_DEL, DES_DEL):
        return True
    if graph is None:
        raise ParameterRangeError("the clique construction needs a graph")
    d_p, d_g = _clique_dummies(graph.number_of_edges(), graph.number_of_nodes(), h, target)
    return d_g == 0 if target == CONS_DEL else d_p == 0


def generate_hardness_instance(
    source: HardnessSource,
    data: nx.Graph | Formula,
    h: int | None = None,
    target: Variant | None = None,
) -> ControlInstance:
    """Build the control instance a reduction produces from a source instance.

    Args:
        source: Which reduction to apply
        data: Graph for the graph problems, Formula for sat223
        h: Solution size of the source problem; unused for sat223
        target: Control variant, for sources with more than one; defaults to the first

    Returns:
        The constructed instance
    """
    supported = TARGETS[source]
    target = target or supported[0]
    if target not in supported:
        raise ParameterRangeError(
            f"{source} targets {', '.join(v.tag for v in supported)}, not {target}"
        )
    if source is HardnessSource.SAT223:
        if not isinstance(data, Formula):
            raise InstanceFormatError("sat223 needs a formula")
        return _sat223(data)
    if not isinstance(data, nx.Graph):
        raise InstanceFormatError(f"{source} needs a graph")
    if h is None or h < 0:
        raise ParameterRangeError(f"{source} needs a non-negative h")

    if not is_reduction_exact(source, data, h, target):
        logger.warning(
            f"{source} to {target} with h={h} needs deletable dummies that help the controller; "
            "the generated instance may answer differently from the source"
        )
    match source:
        case HardnessSource.INDEPENDENT_SET:
            return _independent_set(data, h)
        case HardnessSource.DOMINATING_SET_DISJOINT:
            return _dominating_set_disjoint(data, h)
        case HardnessSource.DOMINATING_SET_W2:
            return _dominating_set_w2(data, h, target)
        case HardnessSource.CLIQUE_W1:
            return _clique_w1(data, h, target)
        case HardnessSource.CLIQUE_UNLIMITED:
            return _clique_unlimited(data, h)
    raise ParameterRangeError(f"unknown source {source}")


def has_independent_set(graph: nx.Graph, h: int) -> bool:
    return any(
        graph.subgraph(nodes).number_of_edges() == 0 for nodes in combinations(graph.nodes, h)
    )


def has_dominating_set(graph: nx.Graph, h: int) -> bool:
    size = min(h, graph.number_of_nodes())
    return any(nx.is_dominating_set(graph, nodes) for nodes in combinations(graph.nodes, size))


def has_clique(graph: nx.Graph, h: int) -> bool:
    return any(
        graph.subgraph(nodes).number_of_edges() == comb(h, 2)
        for nodes in combinations(graph.nodes, h)
    )


def is_satisfiable(formula: Formula) -> bool:
    variables = range(1, formula.variables + 1)
    return any(
        formula.satisfied_by(dict(zip(variables, values, strict=True)))
        for values in product((False, True), repeat=formula.variables)
    )
