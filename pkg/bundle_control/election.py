"""Elections, Plurality scores, bundling functions and bundling graphs.

Every voter carries a single favorite candidate, which is all Plurality looks at. A bundling
function maps each voter x in its domain to the bundle kappa(x) that joins or leaves the
election together with x. Bundle unions are single-level: selecting x brings in kappa(x) and
nothing from the bundles of the voters inside it.
"""

import logging
from collections.abc import Iterable, Mapping
from enum import StrEnum
from typing import Any

import networkx as nx
from pydantic import BaseModel, ConfigDict, PrivateAttr, field_validator, model_validator

from bundle_control.errors import NotSymmetricError, UnknownVoterError

logger = logging.getLogger(__name__)

CandidateId = str
VoterId = str


class Voter(BaseModel):
    """A voter together with the candidate they rank first."""

    model_config = ConfigDict(frozen=True)

    id: VoterId
    favorite: CandidateId


def sort_voters(voters: Iterable[Voter]) -> tuple[Voter, ...]:
    return tuple(sorted(voters, key=lambda voter: voter.id))


class Election(BaseModel):
    """A candidate set and the voters taking part.

    Candidates and voters are kept sorted by id so every derived output is deterministic.
    """

    model_config = ConfigDict(frozen=True)

    candidates: tuple[CandidateId, ...]
    voters: tuple[Voter, ...] = ()

    _favorites: dict[VoterId, CandidateId] = PrivateAttr(default_factory=dict)

    @field_validator("candidates")
    @classmethod
    def candidates_are_distinct(cls, v: tuple[CandidateId, ...]) -> tuple[CandidateId, ...]:
        if not v:
            raise ValueError("an election needs at least one candidate")
        if len(set(v)) != len(v):
            raise ValueError("candidate ids must be distinct")
        return tuple(sorted(v))

    @field_validator("voters")
    @classmethod
    def voters_sorted(cls, v: tuple[Voter, ...]) -> tuple[Voter, ...]:
        return sort_voters(v)

    @model_validator(mode="after")
    def voters_are_consistent(self) -> "Election":
        known = set(self.candidates)
        seen: set[VoterId] = set()
        for voter in self.voters:
            if voter.id in seen:
                raise ValueError(f"duplicate voter id {voter.id!r}")
            seen.add(voter.id)
            if voter.favorite not in known:
                raise ValueError(f"voter {voter.id!r} favors unknown candidate {voter.favorite!r}")
        return self

    def model_post_init(self, context: Any, /) -> None:
        self._favorites = {voter.id: voter.favorite for voter in self.voters}

    @property
    def voter_ids(self) -> tuple[VoterId, ...]:
        return tuple(voter.id for voter in self.voters)

    def has_voter(self, voter_id: VoterId) -> bool:
        return voter_id in self._favorites

    def favorite_of(self, voter_id: VoterId) -> CandidateId:
        try:
            return self._favorites[voter_id]
        except KeyError:
            raise UnknownVoterError(f"voter {voter_id!r} is not part of the election") from None

    def with_voters(self, extra: Iterable[Voter]) -> "Election":
        """Return the election with extra voters joined in."""
        return Election(candidates=self.candidates, voters=self.voters + tuple(extra))

    def restricted_to(self, voter_ids: Iterable[VoterId]) -> "Election":
        """Return the election keeping only the given voters; unknown ids are an error."""
        kept = set(voter_ids)
        for voter_id in kept:
            self.favorite_of(voter_id)
        return Election(
            candidates=self.candidates,
            voters=tuple(voter for voter in self.voters if voter.id in kept),
        )

    def without(self, voter_ids: Iterable[VoterId]) -> "Election":
        """Return the election with the given voters removed."""
        removed = set(voter_ids)
        return Election(
            candidates=self.candidates,
            voters=tuple(voter for voter in self.voters if voter.id not in removed),
        )


def plurality_scores(
    election: Election, subset: Iterable[VoterId] | None = None
) -> dict[CandidateId, int]:
    """Count, per candidate, the voters in subset that favor it.

    Args:
        election: Election the voters belong to
        subset: Voter ids to count, each once however often it is listed; all voters when omitted

    Returns:
        Score per candidate, zero for candidates nobody in subset favors
    """
    scores = dict.fromkeys(election.candidates, 0)
    ids = election.voter_ids if subset is None else set(subset)
    for voter_id in ids:
        scores[election.favorite_of(voter_id)] += 1
    return scores


def co_winners(election: Election) -> tuple[CandidateId, ...]:
    """Candidates no other candidate strictly beats. Without voters, every candidate."""
    scores = plurality_scores(election)
    top = max(scores.values())
    return tuple(candidate for candidate, score in scores.items() if score == top)


class BundlingFunction(BaseModel):
    """kappa: voter id -> bundle, with every bundle inside the domain and containing its leader."""

    model_config = ConfigDict(frozen=True)

    bundles: dict[VoterId, frozenset[VoterId]]

    @model_validator(mode="after")
    def bundles_are_reflexive_and_closed(self) -> "BundlingFunction":
        domain = self.bundles.keys()
        for leader, members in self.bundles.items():
            if leader not in members:
                raise ValueError(f"bundle of {leader!r} does not contain its leader")
            stray = members - domain
            if stray:
                raise ValueError(
                    f"bundle of {leader!r} names voters outside the domain: {sorted(stray)}"
                )
        return self

    @classmethod
    def singletons(cls, voter_ids: Iterable[VoterId]) -> "BundlingFunction":
        return cls(bundles={voter_id: frozenset({voter_id}) for voter_id in voter_ids})

    @property
    def domain(self) -> frozenset[VoterId]:
        return frozenset(self.bundles)

    @property
    def max_bundle_size(self) -> int:
        return max((len(members) for members in self.bundles.values()), default=0)

    def bundle(self, leader: VoterId) -> frozenset[VoterId]:
        try:
            return self.bundles[leader]
        except KeyError:
            raise UnknownVoterError(f"voter {leader!r} is not in the bundling domain") from None

    def distinct_bundles(self) -> list[tuple[VoterId, frozenset[VoterId]]]:
        """One (leader, bundle) pair per distinct bundle, using the smallest leader id."""
        leaders: dict[frozenset[VoterId], VoterId] = {}
        for leader in sorted(self.bundles):
            leaders.setdefault(self.bundles[leader], leader)
        return sorted(((leader, members) for members, leader in leaders.items()))


def bundle_union(kappa: BundlingFunction, leaders: Iterable[VoterId]) -> frozenset[VoterId]:
    """kappa(X') as the union of the leaders' own bundles, never a transitive closure."""
    union: set[VoterId] = set()
    for leader in leaders:
        union |= kappa.bundle(leader)
    return frozenset(union)


class BundlingProfile(BaseModel):
    """Structural class of a bundling function."""

    model_config = ConfigDict(frozen=True)

    max_bundle_size: int
    symmetric: bool
    disjoint: bool
    anonymous: bool

    @model_validator(mode="after")
    def disjoint_implies_symmetric(self) -> "BundlingProfile":
        if self.disjoint and not self.symmetric:
            raise ValueError("a disjoint bundling function is always symmetric")
        return self

    def describe(self) -> str:
        flags = [
            name
            for name, present in (
                ("disjoint", self.disjoint),
                ("symmetric", self.symmetric),
                ("anonymous", self.anonymous),
            )
            if present
        ]
        if not flags:
            flags.append("arbitrary")
        return f"{' '.join(flags)} b={self.max_bundle_size}"


def classify_bundling(
    kappa: BundlingFunction, favorites: Mapping[VoterId, CandidateId]
) -> BundlingProfile:
    """Report which of the symmetric, disjoint and anonymous classes kappa falls into.

    Args:
        kappa: Bundling function to classify
        favorites: Favorite candidate of every domain voter

    Returns:
        Profile with exact flags and the maximum bundle size
    """
    bundles = kappa.bundles
    missing = [voter_id for voter_id in bundles if voter_id not in favorites]
    if missing:
        raise UnknownVoterError(f"no favorite known for voters {sorted(missing)}")

    symmetric = all(
        leader in bundles[member] for leader, group in bundles.items() for member in group
    )
    disjoint = all(bundles[member] == group for group in bundles.values() for member in group)

    classes: dict[CandidateId, set[VoterId]] = {}
    for voter_id in bundles:
        classes.setdefault(favorites[voter_id], set()).add(voter_id)
    anonymous = all(
        len({bundles[member] for member in members}) == 1 for members in classes.values()
    ) and all(
        not (group & members) or members <= group
        for group in bundles.values()
        for members in classes.values()
    )

    return BundlingProfile(
        max_bundle_size=kappa.max_bundle_size,
        symmetric=symmetric,
        disjoint=disjoint,
        anonymous=anonymous,
    )


class BundlingGraph(BaseModel):
    """Directed graph with an arc (y, z) whenever z is in kappa(y) and z differs from y."""

    model_config = ConfigDict(frozen=True)

    vertices: tuple[VoterId, ...]
    arcs: frozenset[tuple[VoterId, VoterId]]

    @model_validator(mode="after")
    def arcs_are_proper(self) -> "BundlingGraph":
        known = set(self.vertices)
        for tail, head in self.arcs:
            if tail == head:
                raise ValueError(f"self-loop at {tail!r}")
            if tail not in known or head not in known:
                raise ValueError(f"arc ({tail!r}, {head!r}) leaves the vertex set")
        return self

    @classmethod
    def from_bundling(cls, kappa: BundlingFunction) -> "BundlingGraph":
        arcs = {
            (leader, member)
            for leader, members in kappa.bundles.items()
            for member in members
            if member != leader
        }
        return cls(vertices=tuple(sorted(kappa.bundles)), arcs=frozenset(arcs))

    @property
    def symmetric(self) -> bool:
        return all((head, tail) in self.arcs for tail, head in self.arcs)

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(self.vertices)
        graph.add_edges_from(self.arcs)
        return graph

    def undirected(self) -> nx.Graph:
        if not self.symmetric:
            raise NotSymmetricError("the undirected view needs a symmetric bundling function")
        graph = nx.Graph()
        graph.add_nodes_from(self.vertices)
        graph.add_edges_from(self.arcs)
        return graph


class ComponentShape(StrEnum):
    PATH = "path"
    CYCLE = "cycle"
    OTHER = "other"


class Component(BaseModel):
    """A connected component of an undirected bundling graph.

    Path vertices run from the endpoint with the smaller id; cycle vertices start at the
    smallest id and continue towards its smaller neighbour. Other shapes are sorted.
    """

    model_config = ConfigDict(frozen=True)

    shape: ComponentShape
    vertices: tuple[VoterId, ...]


def _walk(graph: nx.Graph, start: VoterId, first: VoterId) -> tuple[VoterId, ...]:
    order = [start]
    previous, current = start, first
    while current != start:
        order.append(current)
        onward = [vertex for vertex in graph.neighbors(current) if vertex != previous]
        if not onward:
            break
        previous, current = current, onward[0]
    return tuple(order)


def _shape_of(graph: nx.Graph) -> Component:
    size = graph.number_of_nodes()
    edges = graph.number_of_edges()
    degrees = dict(graph.degree())
    if size == 1:
        return Component(shape=ComponentShape.PATH, vertices=tuple(graph.nodes))
    if edges == size - 1 and max(degrees.values()) <= 2:
        start = min(vertex for vertex, degree in degrees.items() if degree == 1)
        return Component(
            shape=ComponentShape.PATH, vertices=_walk(graph, start, next(iter(graph[start])))
        )
    if edges == size and all(degree == 2 for degree in degrees.values()):
        start = min(graph.nodes)
        return Component(
            shape=ComponentShape.CYCLE, vertices=_walk(graph, start, min(graph[start]))
        )
    return Component(shape=ComponentShape.OTHER, vertices=tuple(sorted(graph.nodes)))


def connected_components(graph: BundlingGraph) -> list[Component]:
    """Split a symmetric bundling graph into components tagged path, cycle or other."""
    undirected = graph.undirected()
    components = [
        _shape_of(undirected.subgraph(nodes)) for nodes in nx.connected_components(undirected)
    ]
    components.sort(key=lambda component: min(component.vertices))
    logger.debug(
        f"{len(components)} components: "
        f"{sum(c.shape == ComponentShape.PATH for c in components)} paths, "
        f"{sum(c.shape == ComponentShape.CYCLE for c in components)} cycles"
    )
    return components
