"""Reductions between control variants and seeded random instances."""

import logging
import random
from collections.abc import Iterable
from enum import StrEnum
from itertools import combinations

from pydantic import BaseModel, ConfigDict, Field, model_validator

from bundle_control.control import (
    CONS_ADD,
    Budget,
    ControlInstance,
    Mode,
    Variant,
)
from bundle_control.election import (
    BundlingFunction,
    CandidateId,
    Election,
    Voter,
    VoterId,
    plurality_scores,
)
from bundle_control.errors import PreconditionError, TooManyCandidatesError

logger = logging.getLogger(__name__)

INERT_CANDIDATE = "⊥"


def fresh_prefix(ids: Iterable[str]) -> str:
    """Shortest run of '~' that starts none of the given ids."""
    taken = list(ids)
    prefix = "~"
    while any(voter_id.startswith(prefix) for voter_id in taken):
        prefix += "~"
    return prefix


def _fresh_candidate(candidates: Iterable[CandidateId]) -> CandidateId:
    taken = set(candidates)
    name = INERT_CANDIDATE
    while name in taken:
        name += "'"
    return name


def _other_candidate(instance: ControlInstance) -> CandidateId:
    if len(instance.candidates) != 2:
        raise TooManyCandidatesError(
            f"expected exactly two candidates, found {len(instance.candidates)}"
        )
    return instance.rivals[0]


def complement_del_to_add(instance: ControlInstance) -> ControlInstance:
    """Turn a two-candidate deletion instance into an equivalent addition instance.

    The registered voters keep their favorites under fresh ids. The pool reuses the original
    ids with p and g swapped, so deleting kappa(V') from V moves the score difference exactly
    as adding the swapped kappa(V') does. The goal is kept and leader sets map one-to-one.
    """
    if instance.variant.mode is not Mode.DELETE:
        raise PreconditionError(f"complement needs a delete variant, got {instance.variant}")
    p = instance.preferred
    g = _other_candidate(instance)
    prefix = fresh_prefix(instance.election.voter_ids)
    swap = {p: g, g: p}
    registered = [Voter(id=prefix + v.id, favorite=v.favorite) for v in instance.election.voters]
    pool = [Voter(id=v.id, favorite=swap[v.favorite]) for v in instance.election.voters]
    return ControlInstance(
        variant=Variant(goal=instance.variant.goal, mode=Mode.ADD),
        election=Election(candidates=instance.candidates, voters=tuple(registered)),
        pool=tuple(pool),
        kappa=instance.kappa,
        preferred=p,
        budget=instance.budget,
    )


def split_destructive_to_constructive(instance: ControlInstance) -> list[ControlInstance]:
    """One constructive-add instance J_g per rival g, in candidate order.

    J_g asks g to co-win against p, which holds after a selection exactly when g strictly
    beats p in the original, thanks to the extra registered p-voter v_d. Voters of every
    other candidate are recoloured to an inert candidate, and matching p- and g-voters are
    padded in so that the inert candidate can never reach p's registered score. Deletion
    instances are complemented along the way: the pool is V with p and g swapped, and v_d
    sits among the registered voters where it cannot be deleted. kappa and the budget are
    unchanged, so leader sets carry over as they are.

    The padding is max(0, inert - s_p - 1) extra p-voters and as many extra g-voters, where
    inert counts the recoloured pool voters and s_p is p's registered score. It is nonzero only
    when the recoloured voters outnumber s_p by two or more; J_g then has the inert candidate as a
    third candidate and more registered voters than the p- and g-voters plus v_d.
    """
    if instance.variant.constructive:
        raise PreconditionError(f"split needs a destructive variant, got {instance.variant}")
    p = instance.preferred
    adding = instance.variant.mode is Mode.ADD
    prefix = fresh_prefix(list(instance.election.voter_ids) + [v.id for v in instance.pool])
    scores = plurality_scores(instance.election)
    inert = _fresh_candidate(instance.candidates)

    parts = []
    for g in instance.rivals:
        contenders = {p, g}
        if adding:
            registered = [v for v in instance.election.voters if v.favorite in contenders]
            pool = [
                v if v.favorite in contenders else Voter(id=v.id, favorite=inert)
                for v in instance.pool
            ]
        else:
            swap = {p: g, g: p}
            registered = [
                Voter(id=f"{prefix}v:{v.id}", favorite=v.favorite)
                for v in instance.election.voters
                if v.favorite in contenders
            ]
            pool = [
                Voter(id=v.id, favorite=swap.get(v.favorite, inert))
                for v in instance.election.voters
            ]
        inert_voters = sum(v.favorite == inert for v in pool)
        pad = max(0, inert_voters - scores[p] - 1)
        registered.append(Voter(id=f"{prefix}d:0", favorite=p))
        registered.extend(Voter(id=f"{prefix}p:{j}", favorite=p) for j in range(pad))
        registered.extend(Voter(id=f"{prefix}g:{j}", favorite=g) for j in range(pad))
        candidates = (p, g, inert) if inert_voters else (p, g)
        parts.append(
            ControlInstance(
                variant=CONS_ADD,
                election=Election(candidates=candidates, voters=tuple(registered)),
                pool=tuple(pool),
                kappa=instance.kappa,
                preferred=g,
                budget=instance.budget,
            )
        )
        logger.debug(
            f"sub-instance for {g}: {len(registered)} registered, {len(pool)} pool, pad {pad}"
        )
    return parts


class SymmetryClass(StrEnum):
    ARBITRARY = "arbitrary"
    SYMMETRIC = "symmetric"
    DISJOINT = "disjoint"
    ANONYMOUS = "anonymous"


class RandomInstanceParams(BaseModel):
    """Shape of a random instance.

    The first candidate is always the preferred one, p. For anonymous bundles
    max_bundle_size is not used, since bundles are unions of whole favorite classes.
    """

    model_config = ConfigDict(frozen=True)

    candidates: int = Field(default=2, ge=1)
    registered: int = Field(default=6, ge=0)
    pool: int = Field(default=6, ge=0)
    max_bundle_size: int = Field(default=3, ge=1)
    symmetry: SymmetryClass = SymmetryClass.SYMMETRIC
    variant: Variant = CONS_ADD
    budget: int | None = Field(default=None, ge=0)
    unlimited: bool = False
    seed: int = 0

    @model_validator(mode="after")
    def shape_fits_variant(self) -> "RandomInstanceParams":
        if self.variant.mode is Mode.DELETE and self.pool:
            raise ValueError("delete variants take no unregistered voters; set pool to 0")
        if self.unlimited and self.budget is not None:
            raise ValueError("an unlimited instance cannot also fix a budget")
        return self


def _ids(letter: str, count: int, width: int) -> list[VoterId]:
    return [f"{letter}{i:0{width}d}" for i in range(1, count + 1)]


def _random_bundles(
    rng: random.Random,
    domain: list[VoterId],
    favorites: dict[VoterId, CandidateId],
    params: RandomInstanceParams,
) -> dict[VoterId, frozenset[VoterId]]:
    b = params.max_bundle_size
    bundles: dict[VoterId, frozenset[VoterId]] = {}
    match params.symmetry:
        case SymmetryClass.ARBITRARY:
            for voter_id in domain:
                others = [other for other in domain if other != voter_id]
                extra = rng.sample(others, rng.randint(0, min(b - 1, len(others))))
                bundles[voter_id] = frozenset([voter_id, *extra])
            return bundles
        case SymmetryClass.SYMMETRIC:
            neighbours: dict[VoterId, set[VoterId]] = {voter_id: set() for voter_id in domain}
            pairs = list(combinations(domain, 2))
            rng.shuffle(pairs)
            for x, y in pairs:
                if len(neighbours[x]) < b - 1 and len(neighbours[y]) < b - 1 and rng.random() < 0.5:
                    neighbours[x].add(y)
                    neighbours[y].add(x)
            return {voter_id: frozenset({voter_id} | neighbours[voter_id]) for voter_id in domain}
        case SymmetryClass.DISJOINT:
            order = list(domain)
            rng.shuffle(order)
            while order:
                chunk = frozenset(order[: rng.randint(1, b)])
                del order[: len(chunk)]
                bundles.update(dict.fromkeys(chunk, chunk))
            return bundles
        case SymmetryClass.ANONYMOUS:
            classes: dict[CandidateId, list[VoterId]] = {}
            for voter_id in domain:
                classes.setdefault(favorites[voter_id], []).append(voter_id)
            names = sorted(classes)
            for name in names:
                joined = [other for other in names if other != name and rng.random() < 0.4]
                members = frozenset(
                    voter_id for cls in (name, *joined) for voter_id in classes[cls]
                )
                bundles.update(dict.fromkeys(classes[name], members))
            return bundles


def random_instance(params: RandomInstanceParams) -> ControlInstance:
    """Build a reproducible random instance; the same params always give the same instance."""
    rng = random.Random(params.seed)
    candidates = ["p"] + [f"c{i}" for i in range(1, params.candidates)]
    width = len(str(max(params.registered, params.pool, 1)))
    registered = [
        Voter(id=v, favorite=rng.choice(candidates)) for v in _ids("v", params.registered, width)
    ]
    pool = [Voter(id=w, favorite=rng.choice(candidates)) for w in _ids("w", params.pool, width)]

    domain_voters = pool if params.variant.mode is Mode.ADD else registered
    favorites = {voter.id: voter.favorite for voter in domain_voters}
    bundles = _random_bundles(rng, [voter.id for voter in domain_voters], favorites, params)

    if params.unlimited:
        budget = Budget()
    elif params.budget is not None:
        budget = Budget.of(params.budget)
    else:
        budget = Budget.of(rng.randint(0, len(domain_voters)))

    return ControlInstance(
        variant=params.variant,
        election=Election(candidates=tuple(candidates), voters=tuple(registered)),
        pool=tuple(pool),
        kappa=BundlingFunction(bundles=bundles),
        preferred="p",
        budget=budget,
    )


def random_path_instance(size: int, budget: int, seed: int = 0) -> ControlInstance:
    """Two-candidate constructive-add instance whose bundling graph is a single path.

    Pool voters w1..w<size> lie on the path in id order with closed-neighbourhood bundles;
    the registered g-voters leave p a deficit of about a quarter of the pool.
    """
    if size < 1:
        raise ValueError("a path needs at least one voter")
    rng = random.Random(seed)
    ids = _ids("w", size, len(str(size)))
    pool = [Voter(id=voter_id, favorite=rng.choice(("p", "g"))) for voter_id in ids]
    bundles = {
        voter_id: frozenset(ids[max(0, i - 1) : i + 2]) for i, voter_id in enumerate(ids)
    }
    registered = [Voter(id=v, favorite="g") for v in _ids("v", size // 4, len(str(size)))]
    return ControlInstance(
        variant=CONS_ADD,
        election=Election(candidates=("g", "p"), voters=tuple(registered)),
        pool=tuple(pool),
        kappa=BundlingFunction(bundles=bundles),
        preferred="p",
        budget=Budget.of(budget),
    )
