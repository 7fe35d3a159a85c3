"""Maximum-cardinality b-matching on multigraphs with loops."""

import logging

import networkx as nx
from pydantic import BaseModel, ConfigDict, NonNegativeInt, model_validator

logger = logging.getLogger(__name__)


class Multigraph(BaseModel):
    """Vertices with degree capacities and a list of edges; (v, v) is a loop of degree two."""

    model_config = ConfigDict(frozen=True)

    capacities: dict[str, NonNegativeInt]
    edges: tuple[tuple[str, str], ...] = ()

    @model_validator(mode="after")
    def edges_use_known_vertices(self) -> "Multigraph":
        for u, v in self.edges:
            if u not in self.capacities or v not in self.capacities:
                raise ValueError(f"edge ({u!r}, {v!r}) has an endpoint without a capacity")
        return self

    def degrees(self, chosen: list[int] | None = None) -> dict[str, int]:
        degree = dict.fromkeys(self.capacities, 0)
        indices = range(len(self.edges)) if chosen is None else chosen
        for index in indices:
            u, v = self.edges[index]
            degree[u] += 1
            degree[v] += 1
        return degree


def max_bmatching(graph: Multigraph) -> list[int]:
    """Largest edge subset with deg(v) <= cap(v) everywhere.

    Each vertex v becomes min(cap(v), deg(v)) copies. Each edge e = {u, v} becomes two
    adjacent nodes e_u and e_v, with e_u joined to every copy of u and e_v to every copy of v.
    A maximum matching of that graph has |E| + (maximum b-matching) edges, and e belongs to
    the b-matching exactly when both of its nodes are matched to copies.

    Args:
        graph: Multigraph with capacities

    Returns:
        Sorted indices into graph.edges
    """
    degree = graph.degrees()
    gadget = nx.Graph()
    for vertex, capacity in graph.capacities.items():
        gadget.add_nodes_from(("copy", vertex, i) for i in range(min(capacity, degree[vertex])))
    for index, (u, v) in enumerate(graph.edges):
        ends = (("edge", index, 0), ("edge", index, 1))
        gadget.add_edge(*ends)
        for end, vertex in zip(ends, (u, v), strict=True):
            copies = min(graph.capacities[vertex], degree[vertex])
            gadget.add_edges_from((end, ("copy", vertex, i)) for i in range(copies))
    logger.debug(
        f"b-matching gadget: {gadget.number_of_nodes()} nodes, {gadget.number_of_edges()} edges"
    )

    mate: dict[tuple[str, object, int], tuple[str, object, int]] = {}
    for a, b in nx.max_weight_matching(gadget, maxcardinality=True):
        mate[a] = b
        mate[b] = a

    def matched_to_copy(node: tuple[str, object, int]) -> bool:
        partner = mate.get(node)
        return partner is not None and partner[0] == "copy"

    return [
        index
        for index in range(len(graph.edges))
        if matched_to_copy(("edge", index, 0)) and matched_to_copy(("edge", index, 1))
    ]
