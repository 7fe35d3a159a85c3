"""0-1 programs for anonymous bundling functions.

With anonymous bundles every voter of the same favorite carries the same bundle, and each
bundle is a union of whole favorite classes. Selecting one leader from a class is as good as
selecting all of them, so a control problem collapses to choosing classes: x_i says some
class-i voter leads, y_j says class j ends up inside the selected bundles.
"""

import logging
from collections.abc import Mapping
from typing import Literal

from pydantic import BaseModel, ConfigDict, model_validator

from bundle_control.control import ControlInstance, Mode, Solution, Variant
from bundle_control.election import CandidateId, VoterId, plurality_scores
from bundle_control.errors import PreconditionError

logger = logging.getLogger(__name__)

Sense = Literal["<=", ">="]
Assignment = dict[str, int]


class VoterClass(BaseModel):
    model_config = ConfigDict(frozen=True)

    favorite: CandidateId
    members: tuple[VoterId, ...]
    bundle_classes: frozenset[int]

    @property
    def count(self) -> int:
        return len(self.members)


class ClassModel(BaseModel):
    """Favorite classes of the bundling domain plus the registered scores s(a)."""

    model_config = ConfigDict(frozen=True)

    classes: tuple[VoterClass, ...]
    initial_scores: dict[CandidateId, int]
    candidates: tuple[CandidateId, ...]

    @model_validator(mode="after")
    def classes_are_well_formed(self) -> "ClassModel":
        for i, voter_class in enumerate(self.classes):
            if not voter_class.members:
                raise ValueError(f"class {i} has no voters")
            if i not in voter_class.bundle_classes:
                raise ValueError(f"class {i} is missing from its own bundle")
            stray = [j for j in voter_class.bundle_classes if not 0 <= j < len(self.classes)]
            if stray:
                raise ValueError(f"class {i} bundles unknown classes {sorted(stray)}")
        return self

    def first_ranked(self, candidate: CandidateId) -> list[int]:
        """F(a): indices of the classes whose voters favor candidate."""
        return [i for i, c in enumerate(self.classes) if c.favorite == candidate]

    def covering(self, j: int) -> list[int]:
        """Indices of the classes whose bundle contains class j."""
        return [i for i, c in enumerate(self.classes) if j in c.bundle_classes]

    @property
    def domain_size(self) -> int:
        return sum(c.count for c in self.classes)


def collapse_to_classes(instance: ControlInstance) -> ClassModel:
    """Group the bundling domain by favorite candidate."""
    if not instance.profile().anonymous:
        raise PreconditionError("the class model needs an anonymous bundling function")
    members: dict[CandidateId, list[VoterId]] = {}
    for voter in instance.domain_voters:
        members.setdefault(voter.favorite, []).append(voter.id)
    favorites = sorted(members)
    index = {favorite: i for i, favorite in enumerate(favorites)}
    classes = []
    for favorite in favorites:
        ids = sorted(members[favorite])
        bundle = instance.kappa.bundle(ids[0])
        classes.append(
            VoterClass(
                favorite=favorite,
                members=tuple(ids),
                bundle_classes=frozenset(index[instance.favorite_of(m)] for m in bundle),
            )
        )
    return ClassModel(
        classes=tuple(classes),
        initial_scores=plurality_scores(instance.election),
        candidates=instance.candidates,
    )


class LinearConstraint(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    coefficients: dict[str, int]
    sense: Sense
    rhs: int

    def holds(self, assignment: Mapping[str, int]) -> bool:
        lhs = sum(c * assignment.get(name, 0) for name, c in self.coefficients.items())
        return lhs <= self.rhs if self.sense == "<=" else lhs >= self.rhs


def _terms(coefficients: Mapping[str, int]) -> str:
    parts = []
    for name, c in coefficients.items():
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        magnitude = "" if abs(c) == 1 else f"{abs(c)} "
        parts.append(f"{sign} {magnitude}{name}")
    if not parts:
        return "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


class BinaryProgram(BaseModel):
    """Feasibility program over binary variables."""

    model_config = ConfigDict(frozen=True)

    variables: tuple[str, ...]
    constraints: tuple[LinearConstraint, ...] = ()

    def holds(self, assignment: Mapping[str, int]) -> bool:
        return all(constraint.holds(assignment) for constraint in self.constraints)

    def to_lp(self) -> str:
        """LP-format text, for inspection or an external solver."""
        lines = ["Minimize", " obj: 0", "Subject To"]
        lines.extend(
            f" {c.label}: {_terms(c.coefficients)} {c.sense} {c.rhs}" for c in self.constraints
        )
        lines.append("Binary")
        lines.extend(f" {name}" for name in self.variables)
        lines.append("End")
        return "\n".join(lines) + "\n"


def _score_terms(model: ClassModel, candidate: CandidateId, factor: int) -> dict[str, int]:
    return {f"y{j + 1}": factor * model.classes[j].count for j in model.first_ranked(candidate)}


def _difference(
    model: ClassModel, gaining: CandidateId, losing: CandidateId, sign: int
) -> dict[str, int]:
    """Coefficients of sign * (score change of gaining - score change of losing)."""
    terms = _score_terms(model, gaining, sign)
    for name, c in _score_terms(model, losing, -sign).items():
        terms[name] = terms.get(name, 0) + c
    return {name: c for name, c in terms.items() if c}


def build_program(model: ClassModel, variant: Variant, p: CandidateId, k: int) -> BinaryProgram:
    """Constraint system deciding the variant with at most k leaders.

    Constraints, in order: the budget, support x_i <= 1, the two linking rows per class with
    M = number of classes, and then either one winning row per rival (constructive) or the
    defeater rows (destructive). A defeater row reads alpha_a = 1 => a strictly ahead of p,
    written with a big-M equal to the number of voters involved plus one.
    """
    sign = 1 if variant.mode is Mode.ADD else -1
    count = len(model.classes)
    xs = [f"x{i + 1}" for i in range(count)]
    ys = [f"y{j + 1}" for j in range(count)]
    rivals = [c for c in model.candidates if c != p]
    alphas: list[str] = [] if variant.constructive else [f"alpha_{a}" for a in rivals]

    constraints = [
        LinearConstraint(label="budget", coefficients=dict.fromkeys(xs, 1), sense="<=", rhs=k)
    ]
    constraints.extend(
        LinearConstraint(label=f"support_{x}", coefficients={x: 1}, sense="<=", rhs=1) for x in xs
    )
    for j, y in enumerate(ys):
        cover = {xs[i]: 1 for i in model.covering(j)}
        constraints.append(
            LinearConstraint(
                label=f"link_upper_{y}", coefficients={**cover, y: -count}, sense="<=", rhs=0
            )
        )
        constraints.append(
            LinearConstraint(
                label=f"link_lower_{y}", coefficients={**cover, y: -1}, sense=">=", rhs=0
            )
        )

    s = model.initial_scores
    if variant.constructive:
        constraints.extend(
            LinearConstraint(
                label=f"win_{a}",
                coefficients=_difference(model, p, a, sign),
                sense=">=",
                rhs=s[a] - s[p],
            )
            for a in rivals
        )
    else:
        big_m = sum(s.values()) + (model.domain_size if variant.mode is Mode.ADD else 0) + 1
        constraints.append(
            LinearConstraint(
                label="defeater", coefficients=dict.fromkeys(alphas, 1), sense=">=", rhs=1
            )
        )
        for a, alpha in zip(rivals, alphas, strict=True):
            coefficients = _difference(model, a, p, sign)
            coefficients[alpha] = -big_m
            constraints.append(
                LinearConstraint(
                    label=f"beat_{a}",
                    coefficients=coefficients,
                    sense=">=",
                    rhs=s[p] - s[a] + 1 - big_m,
                )
            )

    return BinaryProgram(variables=tuple(xs + ys + alphas), constraints=tuple(constraints))


def _bounds(constraint: LinearConstraint, assignment: Mapping[str, int]) -> tuple[int, int]:
    low = high = 0
    for name, c in constraint.coefficients.items():
        value = assignment.get(name)
        if value is not None:
            low += c * value
            high += c * value
        elif c > 0:
            high += c
        else:
            low += c
    return low, high


def _propagate(program: BinaryProgram, assignment: Assignment) -> bool:
    """Fix variables forced by bounds; False once some constraint cannot hold."""
    changed = True
    while changed:
        changed = False
        for constraint in program.constraints:
            low, high = _bounds(constraint, assignment)
            if constraint.sense == "<=" and low > constraint.rhs:
                return False
            if constraint.sense == ">=" and high < constraint.rhs:
                return False
            for name, c in constraint.coefficients.items():
                if name in assignment or c == 0:
                    continue
                if constraint.sense == "<=" and low + abs(c) > constraint.rhs:
                    forced = 0 if c > 0 else 1
                elif constraint.sense == ">=" and high - abs(c) < constraint.rhs:
                    forced = 1 if c > 0 else 0
                else:
                    continue
                assignment[name] = forced
                low, high = _bounds(constraint, assignment)
                changed = True
    return True


def solve_feasibility(program: BinaryProgram) -> Assignment | None:
    """Depth-first branch and bound over the variables in order, trying 0 before 1.

    Bounds propagation runs at every node, so a branch is cut as soon as one constraint can
    no longer hold. The result is deterministic for a given program.
    """
    nodes = 0

    def branch(assignment: Assignment) -> Assignment | None:
        nonlocal nodes
        nodes += 1
        if not _propagate(program, assignment):
            return None
        free = [name for name in program.variables if name not in assignment]
        if not free:
            return assignment if program.holds(assignment) else None
        for value in (0, 1):
            found = branch({**assignment, free[0]: value})
            if found is not None:
                return found
        return None

    result = branch({})
    logger.debug(f"0-1 search visited {nodes} nodes, {'feasible' if result else 'infeasible'}")
    if result is None:
        return None
    return {name: result[name] for name in program.variables}


def lift_solution(
    model: ClassModel, assignment: Mapping[str, int], instance: ControlInstance
) -> Solution:
    """Pick the smallest voter of every class with x_i = 1 as its leader."""
    leaders = []
    for i, voter_class in enumerate(model.classes):
        if assignment.get(f"x{i + 1}", 0) != 1:
            continue
        if not voter_class.members:
            raise PreconditionError(f"class {i} is selected but has no voters")
        leaders.append(voter_class.members[0])
    return Solution.of(leaders)


def solve_ilp(instance: ControlInstance) -> Solution | None:
    """Minimum-size solution for an anonymous instance.

    Programs are solved for budgets 0, 1, ... up to the instance budget (capped at the
    number of classes); the first feasible one gives a minimum solution.
    """
    model = collapse_to_classes(instance)
    limit = instance.budget.effective_limit(len(model.classes))
    for k in range(limit + 1):
        program = build_program(model, instance.variant, instance.preferred, k)
        assignment = solve_feasibility(program)
        if assignment is not None:
            logger.debug(f"class program feasible at budget {k}")
            return lift_solution(model, assignment, instance)
    return None
