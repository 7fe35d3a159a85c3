"""Control problems, budgets, solutions and their verification."""

import logging
from collections.abc import Iterable
from enum import StrEnum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from bundle_control.election import (
    BundlingFunction,
    BundlingProfile,
    CandidateId,
    Election,
    Voter,
    VoterId,
    bundle_union,
    classify_bundling,
    co_winners,
    plurality_scores,
    sort_voters,
)
from bundle_control.errors import UnknownVoterError

logger = logging.getLogger(__name__)


class Goal(StrEnum):
    CONSTRUCTIVE = "cons"
    DESTRUCTIVE = "des"


class Mode(StrEnum):
    ADD = "add"
    DELETE = "del"


class Variant(BaseModel):
    """One of cons-add, cons-del, des-add and des-del."""

    model_config = ConfigDict(frozen=True)

    goal: Goal
    mode: Mode

    @classmethod
    def from_tag(cls, tag: str) -> "Variant":
        goal, _, mode = tag.strip().lower().partition("-")
        try:
            return cls(goal=Goal(goal), mode=Mode(mode))
        except ValueError:
            raise ValueError(
                f"unknown variant {tag!r}; expected cons-add, cons-del, des-add or des-del"
            ) from None

    @property
    def tag(self) -> str:
        return f"{self.goal.value}-{self.mode.value}"

    @property
    def constructive(self) -> bool:
        return self.goal is Goal.CONSTRUCTIVE

    def __str__(self) -> str:
        return self.tag


CONS_ADD = Variant(goal=Goal.CONSTRUCTIVE, mode=Mode.ADD)
CONS_DEL = Variant(goal=Goal.CONSTRUCTIVE, mode=Mode.DELETE)
DES_ADD = Variant(goal=Goal.DESTRUCTIVE, mode=Mode.ADD)
DES_DEL = Variant(goal=Goal.DESTRUCTIVE, mode=Mode.DELETE)
VARIANTS = (CONS_ADD, CONS_DEL, DES_ADD, DES_DEL)


class Budget(BaseModel):
    """Maximum number of leaders; None means unlimited."""

    model_config = ConfigDict(frozen=True)

    limit: int | None = Field(default=None, ge=0)

    @classmethod
    def of(cls, limit: int | None) -> "Budget":
        return cls(limit=limit)

    @property
    def unlimited(self) -> bool:
        return self.limit is None

    def allows(self, size: int) -> bool:
        return self.limit is None or size <= self.limit

    def effective_limit(self, domain_size: int) -> int:
        if self.limit is None:
            return domain_size
        return min(self.limit, domain_size)

    def __str__(self) -> str:
        return "unlimited" if self.limit is None else str(self.limit)


class ControlInstance(BaseModel):
    """A control problem: registered election, optional pool, bundles, target and budget.

    kappa ranges over the pool for add variants and over the registered voters for delete
    variants.
    """

    model_config = ConfigDict(frozen=True)

    variant: Variant
    election: Election
    pool: tuple[Voter, ...] = ()
    kappa: BundlingFunction
    preferred: CandidateId
    budget: Budget

    _favorites: dict[VoterId, CandidateId] = PrivateAttr(default_factory=dict)

    @field_validator("pool")
    @classmethod
    def pool_sorted(cls, v: tuple[Voter, ...]) -> tuple[Voter, ...]:
        return sort_voters(v)

    @model_validator(mode="after")
    def parts_fit_together(self) -> "ControlInstance":
        candidates = set(self.election.candidates)
        if self.preferred not in candidates:
            raise ValueError(f"preferred candidate {self.preferred!r} is not running")
        if self.variant.mode is Mode.DELETE and self.pool:
            raise ValueError("delete variants take no unregistered voters")
        pool_ids: set[VoterId] = set()
        for voter in self.pool:
            if voter.id in pool_ids:
                raise ValueError(f"duplicate unregistered voter id {voter.id!r}")
            if self.election.has_voter(voter.id):
                raise ValueError(f"voter {voter.id!r} is both registered and unregistered")
            if voter.favorite not in candidates:
                raise ValueError(f"voter {voter.id!r} favors unknown candidate {voter.favorite!r}")
            pool_ids.add(voter.id)
        expected = pool_ids if self.variant.mode is Mode.ADD else set(self.election.voter_ids)
        if set(self.kappa.domain) != expected:
            side = "unregistered" if self.variant.mode is Mode.ADD else "registered"
            raise ValueError(f"bundling domain must equal the {side} voters")
        return self

    def model_post_init(self, context: Any, /) -> None:
        self._favorites = {voter.id: voter.favorite for voter in self.election.voters}
        self._favorites.update((voter.id, voter.favorite) for voter in self.pool)

    @property
    def candidates(self) -> tuple[CandidateId, ...]:
        return self.election.candidates

    @property
    def rivals(self) -> tuple[CandidateId, ...]:
        return tuple(c for c in self.election.candidates if c != self.preferred)

    @property
    def domain_voters(self) -> tuple[Voter, ...]:
        return self.pool if self.variant.mode is Mode.ADD else self.election.voters

    @property
    def domain_ids(self) -> tuple[VoterId, ...]:
        return tuple(voter.id for voter in self.domain_voters)

    @property
    def favorites(self) -> dict[VoterId, CandidateId]:
        return dict(self._favorites)

    def favorite_of(self, voter_id: VoterId) -> CandidateId:
        try:
            return self._favorites[voter_id]
        except KeyError:
            raise UnknownVoterError(f"voter {voter_id!r} is not part of the instance") from None

    def profile(self) -> BundlingProfile:
        return classify_bundling(self.kappa, self._favorites)

    def with_budget(self, budget: Budget) -> "ControlInstance":
        return self.model_copy(update={"budget": budget})


class Solution(BaseModel):
    """A set of bundle leaders, kept sorted and free of duplicates."""

    model_config = ConfigDict(frozen=True)

    leaders: tuple[VoterId, ...] = ()

    @field_validator("leaders")
    @classmethod
    def leaders_sorted(cls, v: tuple[VoterId, ...]) -> tuple[VoterId, ...]:
        return tuple(sorted(set(v)))

    @classmethod
    def of(cls, leaders: Iterable[VoterId] = ()) -> "Solution":
        return cls(leaders=tuple(leaders))

    @property
    def size(self) -> int:
        return len(self.leaders)


def apply_solution(instance: ControlInstance, solution: Solution) -> Election:
    """Return the election after adding or deleting the leaders' bundles."""
    affected = bundle_union(instance.kappa, solution.leaders)
    if instance.variant.mode is Mode.ADD:
        return instance.election.with_voters(v for v in instance.pool if v.id in affected)
    return instance.election.without(affected)


class VerdictReason(StrEnum):
    OK = "ok"
    OUTSIDE_DOMAIN = "outside-domain"
    BUDGET_EXCEEDED = "budget-exceeded"
    WINNER_CONDITION = "winner-condition"


class Verdict(BaseModel):
    """Outcome of verifying a solution; truthy when it verifies."""

    model_config = ConfigDict(frozen=True)

    ok: bool
    reason: VerdictReason
    detail: str = ""
    scores: dict[CandidateId, int] = Field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok


def verify_solution(instance: ControlInstance, solution: Solution) -> Verdict:
    """Check a solution against the budget and the winner condition.

    Constructive goals need the preferred candidate among the co-winners afterwards;
    destructive goals need some candidate strictly ahead of it.

    Args:
        instance: Control problem
        solution: Leaders to select

    Returns:
        Verdict with a reason code; never raises for malformed solutions
    """
    outside = [leader for leader in solution.leaders if leader not in instance.kappa.bundles]
    if outside:
        return Verdict(
            ok=False,
            reason=VerdictReason.OUTSIDE_DOMAIN,
            detail=f"leaders outside the bundling domain: {', '.join(outside)}",
        )
    if not instance.budget.allows(solution.size):
        return Verdict(
            ok=False,
            reason=VerdictReason.BUDGET_EXCEEDED,
            detail=f"{solution.size} leaders exceed the budget of {instance.budget}",
        )

    final = apply_solution(instance, solution)
    scores = plurality_scores(final)
    wins = instance.preferred in co_winners(final)
    if wins == instance.variant.constructive:
        return Verdict(ok=True, reason=VerdictReason.OK, scores=scores)

    expectation = "a co-winner" if instance.variant.constructive else "strictly beaten"
    return Verdict(
        ok=False,
        reason=VerdictReason.WINNER_CONDITION,
        detail=f"{instance.preferred} is not {expectation} afterwards",
        scores=scores,
    )


def already_solved(instance: ControlInstance) -> bool:
    """True when selecting nothing already meets the goal."""
    return verify_solution(instance, Solution()).ok
