"""Tests for the class model and 0-1 programs of anonymous instances."""

import pytest

from bundle_control.control import VARIANTS, Solution, Variant, verify_solution
from bundle_control.errors import PreconditionError
from bundle_control.ilp import (
    BinaryProgram,
    LinearConstraint,
    build_program,
    collapse_to_classes,
    lift_solution,
    solve_feasibility,
    solve_ilp,
)
from bundle_control.reductions import RandomInstanceParams, SymmetryClass, random_instance
from tests.factories import make_instance, oracle_size


@pytest.fixture
def p_bundle_with_g():
    """V = [g]; two p-voters whose shared bundle also holds the single g-voter of the pool."""
    return make_instance(
        "cons-add",
        {"v1": "g"},
        {"w1": "p", "w2": "p", "w3": "g"},
        bundles={"w1": ["w1", "w2", "w3"], "w2": ["w1", "w2", "w3"], "w3": ["w3"]},
    )


class TestCollapseToClasses:
    """Test grouping the domain by favorite."""

    def test_singleton_bundles(self):
        """Test singleton bundles give classes that only bundle themselves."""
        instance = make_instance("cons-del", {"a": "p", "b": "g", "c": "h"})
        model = collapse_to_classes(instance)
        for i, voter_class in enumerate(model.classes):
            assert voter_class.bundle_classes == {i}

    def test_bundle_reaching_another_class(self, p_bundle_with_g):
        """Test a bundle holding a g-voter covers the whole g class."""
        model = collapse_to_classes(p_bundle_with_g)
        g_class, p_class = model.first_ranked("g")[0], model.first_ranked("p")[0]
        assert model.classes[p_class].bundle_classes == {p_class, g_class}
        assert model.classes[g_class].bundle_classes == {g_class}
        assert model.covering(g_class) == sorted([g_class, p_class])

    def test_counts(self):
        """Test class sizes count the voters of each favorite."""
        instance = make_instance(
            "cons-del",
            {"a": "p", "b": "p", "c": "p", "d": "g", "e": "g"},
            bundles={
                "a": ["a", "b", "c"],
                "b": ["a", "b", "c"],
                "c": ["a", "b", "c"],
                "d": ["d", "e"],
                "e": ["d", "e"],
            },
        )
        model = collapse_to_classes(instance)
        counts = {c.favorite: c.count for c in model.classes}
        assert counts == {"p": 3, "g": 2}
        assert model.domain_size == 5

    def test_needs_anonymous_bundles(self):
        """Test bundles splitting a class are refused."""
        instance = make_instance(
            "cons-add",
            {"v": "g"},
            {"w1": "p", "w2": "p"},
            bundles={"w1": ["w1", "w2"], "w2": ["w2"]},
        )
        with pytest.raises(PreconditionError, match="anonymous"):
            collapse_to_classes(instance)


class TestBuildProgram:
    """Test program layout."""

    def test_constructive_deletion_rows(self):
        """Test two classes give budget, support, linking and one winning row."""
        instance = make_instance(
            "cons-del",
            {"a": "p", "b": "g", "c": "g"},
            bundles={"a": ["a"], "b": ["b", "c"], "c": ["b", "c"]},
        )
        program = build_program(collapse_to_classes(instance), instance.variant, "p", 1)
        labels = [c.label for c in program.constraints]
        assert len(labels) == 1 + 2 + 4 + 1
        assert labels[0] == "budget"
        assert labels[-1] == "win_g"
        assert program.variables == ("x1", "x2", "y1", "y2")

    def test_destructive_adds_defeaters(self):
        """Test destructive programs carry one defeater variable per rival."""
        instance = make_instance("des-add", {"v": "p"}, {"w1": "g", "w2": "h"})
        program = build_program(collapse_to_classes(instance), instance.variant, "p", 1)
        assert {"alpha_g", "alpha_h"} <= set(program.variables)
        assert [c.label for c in program.constraints][-3:] == ["defeater", "beat_g", "beat_h"]

    def test_lp_text(self):
        """Test the LP rendering lists constraints and binaries."""
        program = BinaryProgram(
            variables=("x1", "y1"),
            constraints=(
                LinearConstraint(label="budget", coefficients={"x1": 1}, sense="<=", rhs=1),
                LinearConstraint(
                    label="link", coefficients={"x1": 1, "y1": -2}, sense="<=", rhs=0
                ),
            ),
        )
        text = program.to_lp()
        assert text.startswith("Minimize\n obj: 0\nSubject To\n")
        assert " budget: x1 <= 1\n" in text
        assert " link: x1 - 2 y1 <= 0\n" in text
        assert text.endswith("Binary\n x1\n y1\nEnd\n")


class TestSolveFeasibility:
    """Test the 0-1 search."""

    def test_no_constraints(self):
        """Test an empty system is solved by all zeros."""
        program = BinaryProgram(variables=("x1", "x2"))
        assert solve_feasibility(program) == {"x1": 0, "x2": 0}

    def test_contradiction(self):
        """Test x1 <= 0 and x1 >= 1 is infeasible."""
        program = BinaryProgram(
            variables=("x1",),
            constraints=(
                LinearConstraint(label="low", coefficients={"x1": 1}, sense="<=", rhs=0),
                LinearConstraint(label="high", coefficients={"x1": 1}, sense=">=", rhs=1),
            ),
        )
        assert solve_feasibility(program) is None

    def test_forced_values(self):
        """Test a covering row forces at least one variable to one."""
        program = BinaryProgram(
            variables=("x1", "x2"),
            constraints=(
                LinearConstraint(label="cover", coefficients={"x1": 1, "x2": 1}, sense=">=", rhs=2),
            ),
        )
        assert solve_feasibility(program) == {"x1": 1, "x2": 1}


class TestLiftSolution:
    """Test mapping class choices back to voters."""

    def test_selected_class_uses_smallest_voter(self, p_bundle_with_g):
        """Test the smallest member of a selected class becomes the leader."""
        model = collapse_to_classes(p_bundle_with_g)
        p_class = model.first_ranked("p")[0]
        assignment = {f"x{i + 1}": int(i == p_class) for i in range(len(model.classes))}
        assert lift_solution(model, assignment, p_bundle_with_g) == Solution.of(["w1"])

    def test_nothing_selected(self, p_bundle_with_g):
        """Test all-zero choices give the empty solution."""
        model = collapse_to_classes(p_bundle_with_g)
        assert lift_solution(model, {}, p_bundle_with_g) == Solution()


class TestSolveIlp:
    """Test end-to-end answers."""

    def test_example(self, p_bundle_with_g):
        """Test the shared p bundle ties p with g."""
        solution = solve_ilp(p_bundle_with_g)
        assert solution == Solution.of(["w1"])
        assert verify_solution(p_bundle_with_g, solution)

    @pytest.mark.slow
    @pytest.mark.parametrize("variant", VARIANTS, ids=lambda v: v.tag)
    def test_matches_oracle(self, variant: Variant):
        """Test minimum sizes against the oracle on anonymous instances."""
        pool = 0 if variant.tag.endswith("del") else 9
        for seed in range(50):
            params = RandomInstanceParams(
                variant=variant,
                candidates=4,
                registered=9,
                pool=pool,
                symmetry=SymmetryClass.ANONYMOUS,
                seed=seed,
            )
            instance = random_instance(params)
            solution = solve_ilp(instance)
            expected = oracle_size(instance)
            if expected is None:
                assert solution is None
            else:
                assert solution is not None
                assert solution.size == expected
                assert verify_solution(instance, solution)
