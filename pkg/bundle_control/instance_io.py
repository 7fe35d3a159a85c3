"""Instance documents on disk, plus the edge-list and DIMACS inputs of the generators.

An instance file is one JSON object with the keys candidates, registered, unregistered,
bundles, variant, preferred and budget, in that order. Serialization is canonical: ids are
sorted everywhere, so a parsed and re-serialized file is byte-identical.
"""

import logging
from pathlib import Path

import networkx as nx
from pydantic import BaseModel, ConfigDict, NonNegativeInt, ValidationError, field_validator

from bundle_control.control import Budget, ControlInstance, Variant
from bundle_control.election import BundlingFunction, CandidateId, Election, Voter, VoterId
from bundle_control.errors import InstanceFormatError
from bundle_control.hardness import Formula

logger = logging.getLogger(__name__)


class VoterRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: VoterId
    favorite: CandidateId


class InstanceDocument(BaseModel):
    """On-disk form of a control instance. budget is null for an unlimited budget."""

    model_config = ConfigDict(extra="forbid")

    candidates: list[CandidateId]
    registered: list[VoterRecord]
    unregistered: list[VoterRecord] = []
    bundles: dict[VoterId, list[VoterId]]
    variant: str
    preferred: CandidateId
    budget: NonNegativeInt | None

    @field_validator("variant")
    @classmethod
    def variant_is_known(cls, v: str) -> str:
        return Variant.from_tag(v).tag

    @field_validator("bundles")
    @classmethod
    def bundles_contain_leader(
        cls, v: dict[VoterId, list[VoterId]]
    ) -> dict[VoterId, list[VoterId]]:
        for leader, members in v.items():
            if leader not in members:
                raise ValueError(f"bundle of {leader!r} must list {leader!r} itself")
        return v


def to_instance(document: InstanceDocument) -> ControlInstance:
    return ControlInstance(
        variant=Variant.from_tag(document.variant),
        election=Election(
            candidates=tuple(document.candidates),
            voters=tuple(Voter(id=r.id, favorite=r.favorite) for r in document.registered),
        ),
        pool=tuple(Voter(id=r.id, favorite=r.favorite) for r in document.unregistered),
        kappa=BundlingFunction(
            bundles={leader: frozenset(members) for leader, members in document.bundles.items()}
        ),
        preferred=document.preferred,
        budget=Budget.of(document.budget),
    )


def from_instance(instance: ControlInstance) -> InstanceDocument:
    return InstanceDocument(
        candidates=sorted(instance.candidates),
        registered=[VoterRecord(id=v.id, favorite=v.favorite) for v in instance.election.voters],
        unregistered=[VoterRecord(id=v.id, favorite=v.favorite) for v in instance.pool],
        bundles={
            leader: sorted(members) for leader, members in sorted(instance.kappa.bundles.items())
        },
        variant=instance.variant.tag,
        preferred=instance.preferred,
        budget=instance.budget.limit,
    )


def parse_instance(text: str | bytes) -> ControlInstance:
    """Parse a JSON instance document.

    Raises:
        InstanceFormatError: The document is not valid JSON or does not describe an instance
    """
    try:
        return to_instance(InstanceDocument.model_validate_json(text))
    except ValueError as e:
        raise InstanceFormatError(f"Invalid instance: {e}") from e


def serialize_instance(instance: ControlInstance) -> str:
    return from_instance(instance).model_dump_json(indent=2) + "\n"


def read_instance(path: Path) -> ControlInstance:
    logger.debug(f"Reading instance from {path}")
    return parse_instance(path.read_bytes())


def write_instance(instance: ControlInstance, path: Path) -> None:
    path.write_text(serialize_instance(instance), encoding="utf-8")
    logger.debug(f"Wrote instance to {path}")


def _content_lines(text: str) -> list[str]:
    lines = (line.split("#", 1)[0].strip() for line in text.splitlines())
    return [line for line in lines if line]


def parse_edge_list(text: str) -> nx.Graph:
    """Read a graph from 'u v' lines; a line with a single name adds an isolated vertex.

    Text after '#' is ignored.
    """
    graph = nx.Graph()
    pairs = []
    for number, line in enumerate(_content_lines(text), start=1):
        tokens = line.split()
        if len(tokens) == 1:
            graph.add_node(tokens[0])
        elif len(tokens) == 2:
            pairs.append(line)
        else:
            raise InstanceFormatError(f"edge list line {number}: expected 'u v', got {line!r}")
    graph.add_edges_from(nx.parse_edgelist(pairs, nodetype=str, data=False).edges)
    return graph


def parse_dimacs(text: str) -> Formula:
    """Read a formula from DIMACS CNF: 'c' comments, a 'p cnf n m' header, one clause per line.

    Raises:
        InstanceFormatError: Bad header, clause count mismatch or a formula of the wrong shape
    """
    header: tuple[int, int] | None = None
    clauses: list[tuple[int, ...]] = []
    for line in text.splitlines():
        tokens = line.split()
        if not tokens or tokens[0] == "c":
            continue
        if tokens[0] == "p":
            if len(tokens) != 4 or tokens[1] != "cnf" or header is not None:
                raise InstanceFormatError(f"bad DIMACS header {line.strip()!r}")
            header = (_integer(tokens[2]), _integer(tokens[3]))
            continue
        if header is None:
            raise InstanceFormatError("clause before the 'p cnf' header")
        literals = [_integer(token) for token in tokens]
        if literals[-1] != 0:
            raise InstanceFormatError(f"clause {line.strip()!r} is not terminated by 0")
        clauses.append(tuple(literals[:-1]))
    if header is None:
        raise InstanceFormatError("missing 'p cnf' header")
    if len(clauses) != header[1]:
        raise InstanceFormatError(f"header announces {header[1]} clauses, found {len(clauses)}")
    try:
        return Formula(variables=header[0], clauses=tuple(clauses))
    except ValidationError as e:
        raise InstanceFormatError(f"Invalid formula: {e}") from e


def _integer(token: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise InstanceFormatError(f"expected an integer, got {token!r}") from None
