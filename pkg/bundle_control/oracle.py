"""Exhaustive search over leader sets.

Leader sets are enumerated by increasing size in lexicographic order, so the first verifying
set is a minimum one and the lexicographically smallest among those. Voters sharing a bundle
are interchangeable, so only the smallest leader of each distinct bundle is tried. Bundles are
integer bitmasks over the sorted domain; sets whose bundle union was already examined are
skipped, since verification only depends on the union.
"""

import logging
from collections.abc import Callable
from itertools import combinations

from bundle_control.control import CONS_DEL, ControlInstance, Mode, Solution
from bundle_control.election import plurality_scores
from bundle_control.errors import OracleCapExceededError, PreconditionError

logger = logging.getLogger(__name__)

DEFAULT_ORACLE_CAP = 22


def _winner_test(instance: ControlInstance, index: dict[str, int]) -> Callable[[int], bool]:
    base = plurality_scores(instance.election)
    masks = dict.fromkeys(instance.candidates, 0)
    for voter in instance.domain_voters:
        masks[voter.favorite] |= 1 << index[voter.id]
    sign = 1 if instance.variant.mode is Mode.ADD else -1
    p = instance.preferred
    p_base, p_mask = base[p], masks[p]
    rivals = [(base[c], masks[c]) for c in instance.rivals]

    if instance.variant.constructive:

        def wins(union: int) -> bool:
            p_score = p_base + sign * (union & p_mask).bit_count()
            return all(
                score + sign * (union & mask).bit_count() <= p_score for score, mask in rivals
            )

        return wins

    def loses(union: int) -> bool:
        p_score = p_base + sign * (union & p_mask).bit_count()
        return any(score + sign * (union & mask).bit_count() > p_score for score, mask in rivals)

    return loses


def _search(instance: ControlInstance, max_size: int, cap: int) -> Solution | None:
    domain = sorted(instance.kappa.bundles)
    if len(domain) > cap:
        raise OracleCapExceededError(
            f"bundling domain has {len(domain)} voters, above the oracle cap of {cap}"
        )
    index = {voter_id: position for position, voter_id in enumerate(domain)}
    # one leader per distinct bundle, the smallest id carrying it
    distinct = instance.kappa.distinct_bundles()
    ids = [leader for leader, _ in distinct]
    masks = [sum(1 << index[member] for member in members) for _, members in distinct]
    succeeds = _winner_test(instance, index)

    seen: set[int] = set()
    for size in range(min(max_size, len(ids)) + 1):
        before = len(seen)
        for combo in combinations(range(len(ids)), size):
            union = 0
            for position in combo:
                union |= masks[position]
            if union in seen:
                continue
            seen.add(union)
            if succeeds(union):
                logger.debug(f"oracle found a solution of size {size}")
                return Solution.of(ids[position] for position in combo)
        logger.debug(f"oracle layer {size}: {len(seen) - before} new unions, none verify")
    return None


def solve_exact(instance: ControlInstance, cap: int | None = None) -> Solution | None:
    """Minimum-size solution within the budget, or None.

    Args:
        instance: Control problem with a limited budget
        cap: Largest bundling domain to search; DEFAULT_ORACLE_CAP when omitted

    Returns:
        Lexicographically smallest minimum-size solution, or None
    """
    if instance.budget.limit is None:
        raise PreconditionError("solve_exact needs a limited budget; use solve_unlimited")
    return _search(instance, instance.budget.limit, cap or DEFAULT_ORACLE_CAP)


def solve_unlimited(instance: ControlInstance, cap: int | None = None) -> Solution | None:
    """Solve with no bound on the number of leaders.

    Constructive deletion always succeeds by deleting every registered voter, which leaves
    all candidates tied at zero.
    """
    if instance.variant == CONS_DEL:
        return Solution.of(instance.election.voter_ids)
    return _search(instance, len(instance.kappa.bundles), cap or DEFAULT_ORACLE_CAP)


def solve_oracle(instance: ControlInstance, cap: int | None = None) -> Solution | None:
    """Oracle entry point for either kind of budget."""
    if instance.budget.unlimited:
        return solve_unlimited(instance, cap)
    return solve_exact(instance, cap)
