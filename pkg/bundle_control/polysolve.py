"""Polynomial-time solvers for the tractable special cases, and routing between them.

Every solver returns a minimum-size Solution within the budget, or None when no solution
fits. Unlimited budgets are handled by letting k be the size of the bundling domain.
"""

import logging
import time
from collections import Counter
from collections.abc import Callable
from functools import partial

from pydantic import BaseModel, ConfigDict

from bundle_control.bmatching import Multigraph, max_bmatching
from bundle_control.control import (
    CONS_ADD,
    CONS_DEL,
    ControlInstance,
    Mode,
    Solution,
    Variant,
    already_solved,
)
from bundle_control.election import (
    BundlingGraph,
    BundlingProfile,
    CandidateId,
    ComponentShape,
    VoterId,
    connected_components,
    plurality_scores,
)
from bundle_control.errors import (
    ComponentShapeError,
    NotSymmetricError,
    PreconditionError,
    TooManyCandidatesError,
    UnsupportedInstanceError,
)
from bundle_control.ilp import solve_ilp
from bundle_control.oracle import DEFAULT_ORACLE_CAP, solve_oracle
from bundle_control.pathdp import (
    ComponentTable,
    GapEntry,
    SplitMode,
    max_gap_cycle,
    max_gap_path,
)
from bundle_control.reductions import (
    complement_del_to_add,
    fresh_prefix,
    split_destructive_to_constructive,
)

logger = logging.getLogger(__name__)

SolverFn = Callable[[ControlInstance], Solution | None]


def _require_variant(instance: ControlInstance, *variants: Variant) -> None:
    if instance.variant not in variants:
        expected = " or ".join(v.tag for v in variants)
        raise PreconditionError(f"solver handles {expected}, got {instance.variant}")


def _require_symmetric(instance: ControlInstance, max_bundle_size: int) -> BundlingProfile:
    profile = instance.profile()
    if not profile.symmetric:
        raise NotSymmetricError("solver needs a symmetric bundling function")
    if profile.max_bundle_size > max_bundle_size:
        raise ComponentShapeError(
            f"solver needs bundles of size at most {max_bundle_size}, "
            f"found {profile.max_bundle_size}"
        )
    return profile


def _budget(instance: ControlInstance) -> int:
    return instance.budget.effective_limit(len(instance.kappa.bundles))


def _totals(instance: ControlInstance) -> dict[CandidateId, int]:
    totals = plurality_scores(instance.election)
    for voter in instance.pool:
        totals[voter.favorite] += 1
    return totals


def contending_rival(instance: ControlInstance) -> CandidateId | None:
    """The only rival that can finish ahead of p, if there is one.

    r qualifies when every other candidate c has s_c(V) + s_c(W) <= s_r(V): such c can never
    overtake r, and p has to catch r anyway. With two candidates the single rival qualifies.
    """
    registered = plurality_scores(instance.election)
    totals = _totals(instance)
    for r in instance.rivals:
        if all(totals[c] <= registered[r] for c in instance.rivals if c != r):
            return r
    if instance.rivals:
        raise TooManyCandidatesError(
            f"more than one rival can finish ahead of {instance.preferred}"
        )
    return None


def _has_two_contenders(instance: ControlInstance) -> bool:
    try:
        contending_rival(instance)
    except TooManyCandidatesError:
        return False
    return True


def component_table(
    instance: ControlInstance, rival: CandidateId | None, k: int, splits: SplitMode = "leading"
) -> ComponentTable:
    """Per-component gap tables of a symmetric b <= 3 instance, combined."""
    voters = {voter.id: voter for voter in instance.domain_voters}
    rows: list[list[GapEntry]] = []
    for component in connected_components(BundlingGraph.from_bundling(instance.kappa)):
        members = [voters[voter_id] for voter_id in component.vertices]
        limit = min(k, len(members))
        match component.shape:
            case ComponentShape.PATH:
                table = max_gap_path(
                    members, instance.kappa, instance.preferred, limit, rival, splits
                )
                rows.append(table.best_by_size())
            case ComponentShape.CYCLE:
                rows.append(
                    max_gap_cycle(members, instance.kappa, instance.preferred, limit, rival)
                )
            case ComponentShape.OTHER:
                raise ComponentShapeError(
                    f"component at {component.vertices[0]!r} is neither a path nor a cycle"
                )
    logger.debug(f"combining {len(rows)} component tables up to {k} leaders")
    return ComponentTable(rows, k)


def solve_cons_add_m2_sym_b3(
    instance: ControlInstance, splits: SplitMode = "leading"
) -> Solution | None:
    """Constructive addition with symmetric bundles of size at most three.

    Works for two-contender instances: p against one rival r, with any further candidates
    unable to pass r. The smallest r' whose best combined gap covers s_r(V) - s_p(V) wins.
    """
    _require_variant(instance, CONS_ADD)
    _require_symmetric(instance, 3)
    if already_solved(instance):
        return Solution()
    rival = contending_rival(instance)
    scores = plurality_scores(instance.election)
    deficit = scores[rival] - scores[instance.preferred] if rival else 0
    k = _budget(instance)
    table = component_table(instance, rival, k, splits)
    for r in range(k + 1):
        entry = table.best(r)
        if entry.gap >= deficit:
            return Solution.of(entry.leaders)
    return None


def solve_cons_del_m2_sym_b3(
    instance: ControlInstance, splits: SplitMode = "leading"
) -> Solution | None:
    """Constructive deletion with two candidates, through the equivalent addition instance."""
    _require_variant(instance, CONS_DEL)
    if len(instance.candidates) > 2:
        raise TooManyCandidatesError(
            f"solver handles two candidates, found {len(instance.candidates)}"
        )
    _require_symmetric(instance, 3)
    if already_solved(instance):
        return Solution()
    return solve_cons_add_m2_sym_b3(complement_del_to_add(instance), splits)


def solve_cons_add_sym_b2(instance: ControlInstance) -> Solution | None:
    """Constructive addition with bundles that are singletons or pairs, any number of candidates.

    Only bundles with a p-voter help: {p,p}, {p} and {p,c}. For each size q and each number T
    of {p,c} bundles, p's final score is largest when {p,p} bundles come first and singles
    second. The T mixed bundles are then spread over the rivals with the most slack.
    """
    _require_variant(instance, CONS_ADD)
    _require_symmetric(instance, 2)
    if already_solved(instance):
        return Solution()
    p = instance.preferred
    doubles: list[VoterId] = []
    singles: list[VoterId] = []
    mixed: dict[CandidateId, list[VoterId]] = {c: [] for c in instance.rivals}
    for leader, members in instance.kappa.distinct_bundles():
        favorites = sorted(instance.favorite_of(m) for m in members)
        if favorites == [p, p]:
            doubles.append(leader)
        elif favorites == [p]:
            singles.append(leader)
        elif p in favorites:
            rival = next(c for c in favorites if c != p)
            mixed[rival].append(leader)

    scores = plurality_scores(instance.election)
    available_mixed = sum(len(leaders) for leaders in mixed.values())
    for q in range(_budget(instance) + 1):
        for t in range(min(q, available_mixed) + 1):
            a = min(len(doubles), q - t)
            b = min(len(singles), q - t - a)
            if a + b + t < q:
                continue
            final = scores[p] + 2 * a + b + t
            slack = {c: final - scores[c] for c in instance.rivals}
            if any(room < 0 for room in slack.values()):
                continue
            if sum(min(len(mixed[c]), slack[c]) for c in instance.rivals) < t:
                continue
            chosen = doubles[:a] + singles[:b]
            remaining = t
            for c in sorted(instance.rivals, key=lambda c: (-slack[c], c)):
                take = min(len(mixed[c]), slack[c], remaining)
                chosen.extend(mixed[c][:take])
                remaining -= take
            return Solution.of(chosen)
    return None


class DeficitVector(BaseModel):
    """d_c = s_c(V) - s_p(V) per rival; only positive entries constrain the deletion."""

    model_config = ConfigDict(frozen=True)

    deficits: dict[CandidateId, int]

    @classmethod
    def of(cls, instance: ControlInstance) -> "DeficitVector":
        scores = plurality_scores(instance.election)
        p_score = scores[instance.preferred]
        return cls(deficits={c: scores[c] - p_score for c in instance.rivals})

    def capacity(self, candidate: CandidateId, degree: int) -> int:
        """Edges at candidate that may survive the deletion."""
        return degree - max(0, self.deficits[candidate])


def solve_cons_del_sym_b2(instance: ControlInstance) -> Solution | None:
    """Constructive deletion with bundles that are singletons or pairs, any number of candidates.

    Bundles with a p-voter are never worth deleting. Every other bundle is an edge between the
    favorites of its voters (a loop for {c,c}; a singleton {c} is an edge to a private dummy
    vertex). The deleted edges must meet every rival at least d_c times, so the kept edges form
    a b-matching with cap(c) = deg(c) - d_c, and a maximum one leaves the fewest deletions.
    """
    _require_variant(instance, CONS_DEL)
    _require_symmetric(instance, 2)
    if already_solved(instance):
        return Solution()
    p = instance.preferred
    bundles = instance.kappa.distinct_bundles()
    k = _budget(instance)
    scores = plurality_scores(instance.election)
    if scores[p] == 0:
        if len(bundles) > k:
            return None
        return Solution.of(leader for leader, _ in bundles)

    prefix = fresh_prefix(instance.candidates)
    leaders: list[VoterId] = []
    edges: list[tuple[str, str]] = []
    dummies: list[str] = []
    for leader, members in bundles:
        favorites = sorted(instance.favorite_of(m) for m in members)
        if p in favorites:
            continue
        if len(favorites) == 1:
            dummy = f"{prefix}{leader}"
            dummies.append(dummy)
            edges.append((favorites[0], dummy))
        else:
            edges.append((favorites[0], favorites[1]))
        leaders.append(leader)

    degree = Counter(vertex for edge in edges for vertex in edge)
    deficits = DeficitVector.of(instance)
    capacities = {c: deficits.capacity(c, degree[c]) for c in instance.rivals}
    if any(cap < 0 for cap in capacities.values()):
        return None
    graph = Multigraph(capacities=capacities | dict.fromkeys(dummies, 1), edges=tuple(edges))
    kept = set(max_bmatching(graph))
    deleted = [leaders[i] for i in range(len(edges)) if i not in kept]
    logger.debug(f"{len(edges)} deletable bundles, {len(kept)} kept by the b-matching")
    if len(deleted) > k:
        return None
    return Solution.of(deleted)


def solve_destructive(instance: ControlInstance, sub_solver: SolverFn) -> Solution | None:
    """Destructive control through one constructive sub-instance per rival.

    Returns the smallest sub-solution, preferring the earliest rival on ties.
    """
    if instance.variant.constructive:
        raise PreconditionError(f"solver handles destructive variants, got {instance.variant}")
    if already_solved(instance):
        return Solution()
    best: Solution | None = None
    for part in split_destructive_to_constructive(instance):
        solution = sub_solver(part)
        if solution is not None and (best is None or solution.size < best.size):
            best = solution
    return best


def solve_des_disjoint(instance: ControlInstance) -> Solution | None:
    """Destructive control with disjoint bundles, by guessing the defeater.

    Disjoint bundles act independently, so for a defeater c the bundles that improve
    c's standing against p are taken in order of decreasing gain.
    """
    if instance.variant.constructive:
        raise PreconditionError(f"solver handles destructive variants, got {instance.variant}")
    if not instance.profile().disjoint:
        raise PreconditionError("solver needs a disjoint bundling function")
    if already_solved(instance):
        return Solution()
    p = instance.preferred
    adding = instance.variant.mode is Mode.ADD
    k = _budget(instance)
    scores = plurality_scores(instance.election)
    counts = [
        (leader, Counter(instance.favorite_of(m) for m in members))
        for leader, members in instance.kappa.distinct_bundles()
    ]

    best: Solution | None = None
    for c in instance.rivals:
        need = scores[p] - scores[c] + 1
        gains = []
        for leader, favorites in counts:
            gain = favorites[c] - favorites[p] if adding else favorites[p] - favorites[c]
            if gain > 0:
                gains.append((-gain, leader))
        gains.sort()
        chosen: list[VoterId] = []
        total = 0
        for negative, leader in gains:
            if total >= need or len(chosen) >= k:
                break
            chosen.append(leader)
            total -= negative
        if total >= need and (best is None or len(chosen) < best.size):
            best = Solution.of(chosen)
    return best


solve_destructive_sym_b3: SolverFn = partial(
    solve_destructive, sub_solver=solve_cons_add_m2_sym_b3
)

SOLVERS: dict[str, SolverFn] = {
    "cons-add-sym-b2": solve_cons_add_sym_b2,
    "cons-add-m2-sym-b3": solve_cons_add_m2_sym_b3,
    "cons-del-sym-b2": solve_cons_del_sym_b2,
    "cons-del-m2-sym-b3": solve_cons_del_m2_sym_b3,
    "des-disjoint": solve_des_disjoint,
    "destructive-sym-b3": solve_destructive_sym_b3,
    "ilp-anon": solve_ilp,
    "oracle": solve_oracle,
}


def choose_solver(
    instance: ControlInstance, profile: BundlingProfile | None = None, cap: int | None = None
) -> str:
    """Name of the most specific solver whose preconditions the instance meets."""
    profile = profile or instance.profile()
    b = profile.max_bundle_size
    variant = instance.variant
    if profile.symmetric:
        if variant == CONS_ADD:
            if b <= 2:
                return "cons-add-sym-b2"
            if b <= 3 and _has_two_contenders(instance):
                return "cons-add-m2-sym-b3"
        elif variant == CONS_DEL:
            if b <= 2:
                return "cons-del-sym-b2"
            if b <= 3 and len(instance.candidates) <= 2:
                return "cons-del-m2-sym-b3"
        else:
            if profile.disjoint:
                return "des-disjoint"
            if b <= 3:
                return "destructive-sym-b3"
    if profile.anonymous:
        return "ilp-anon"
    if variant == CONS_DEL and instance.budget.unlimited:
        return "oracle"
    if len(instance.kappa.bundles) <= (cap or DEFAULT_ORACLE_CAP):
        return "oracle"
    raise UnsupportedInstanceError(
        f"no solver applies to {variant} with {profile.describe()} bundles and "
        f"{len(instance.kappa.bundles)} domain voters"
    )


class Routed(BaseModel):
    """Answer of dispatch together with the solver that produced it."""

    model_config = ConfigDict(frozen=True)

    solver: str
    profile: BundlingProfile
    solution: Solution | None
    elapsed_ms: float

    @property
    def found(self) -> bool:
        return self.solution is not None


def dispatch(instance: ControlInstance, solver: str = "auto", cap: int | None = None) -> Routed:
    """Classify the instance, run the chosen solver and report the routing.

    Args:
        instance: Control problem
        solver: Registry name, or "auto" to pick the most specific applicable one
        cap: Oracle cap, used for routing and by the oracle itself

    Returns:
        Routed record with the solver name, bundling profile, answer and timing
    """
    profile = instance.profile()
    name = choose_solver(instance, profile, cap) if solver == "auto" else solver
    if name not in SOLVERS:
        raise UnsupportedInstanceError(
            f"unknown solver {name!r}; choose from auto, {', '.join(SOLVERS)}"
        )
    logger.debug(f"routing {instance.variant} with {profile.describe()} bundles to {name}")
    started = time.perf_counter()
    solution = solve_oracle(instance, cap) if name == "oracle" else SOLVERS[name](instance)
    elapsed_ms = (time.perf_counter() - started) * 1000
    return Routed(solver=name, profile=profile, solution=solution, elapsed_ms=elapsed_ms)
