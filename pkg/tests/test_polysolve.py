"""Tests for the polynomial-time solvers and routing."""

import math
import statistics

import pytest

from bundle_control.control import (
    CONS_DEL,
    DES_ADD,
    DES_DEL,
    Budget,
    Solution,
    verify_solution,
)
from bundle_control.errors import (
    ComponentShapeError,
    NotSymmetricError,
    PreconditionError,
    TooManyCandidatesError,
    UnsupportedInstanceError,
)
from bundle_control.polysolve import (
    SOLVERS,
    DeficitVector,
    choose_solver,
    contending_rival,
    dispatch,
    solve_cons_add_m2_sym_b3,
    solve_cons_add_sym_b2,
    solve_cons_del_m2_sym_b3,
    solve_cons_del_sym_b2,
    solve_des_disjoint,
    solve_destructive,
    solve_destructive_sym_b3,
)
from bundle_control.reductions import (
    RandomInstanceParams,
    SymmetryClass,
    random_instance,
    random_path_instance,
)
from tests.factories import make_instance, oracle_size, path_bundles


def assert_matches_oracle(instance, solution):
    expected = oracle_size(instance)
    if expected is None:
        assert solution is None
    else:
        assert solution is not None
        assert solution.size == expected
        assert verify_solution(instance, solution)


def sweep(count, **shape):
    base = RandomInstanceParams(**shape)
    for seed in range(count):
        yield random_instance(base.model_copy(update={"seed": seed}))


@pytest.fixture
def pp_pair():
    """V = [g, g]; a {p, p} bundle and a lone g in the pool."""
    return make_instance(
        "cons-add",
        {"v1": "g", "v2": "g"},
        {"w1": "p", "w2": "p", "w3": "g"},
        bundles={"w1": ["w1", "w2"], "w2": ["w1", "w2"], "w3": ["w3"]},
        budget=2,
    )


class TestContendingRival:
    """Test the two-contender check."""

    def test_two_candidates(self, pp_pair):
        """Test the single rival always contends."""
        assert contending_rival(pp_pair) == "g"

    def test_third_candidate_that_cannot_pass(self):
        """Test a rival with too few voters overall does not count."""
        instance = make_instance("cons-add", {"v1": "g", "v2": "g", "v3": "h"}, {"w": "p"})
        assert contending_rival(instance) == "g"

    def test_two_live_rivals(self):
        """Test two rivals that can both finish on top are refused."""
        instance = make_instance(
            "cons-add", {"v1": "g", "v2": "h"}, {"w1": "g", "w2": "h", "w3": "p"}
        )
        with pytest.raises(TooManyCandidatesError):
            contending_rival(instance)


class TestConsAddM2SymB3:
    """Test constructive addition over paths and cycles."""

    def test_already_winning(self):
        """Test p already co-winning gives the empty solution."""
        instance = make_instance("cons-add", {"v": "p"}, {"w": "g"})
        assert solve_cons_add_m2_sym_b3(instance) == Solution()

    def test_path_example(self):
        """Test the middle of a p-p-p path closes a deficit of three."""
        ids = ["w1", "w2", "w3"]
        instance = make_instance(
            "cons-add",
            {"v1": "g", "v2": "g", "v3": "g"},
            dict.fromkeys(ids, "p"),
            bundles=path_bundles(ids),
        )
        assert solve_cons_add_m2_sym_b3(instance) == Solution.of(["w2"])

    def test_deficit_too_large(self):
        """Test no leader set reaches a deficit above the total gap."""
        instance = make_instance(
            "cons-add", {"v1": "g", "v2": "g", "v3": "g"}, {"w": "p"}, budget=1
        )
        assert solve_cons_add_m2_sym_b3(instance) is None

    def test_wrong_variant(self):
        """Test deletion instances are refused."""
        instance = make_instance("cons-del", {"v": "g"})
        with pytest.raises(PreconditionError, match="cons-add"):
            solve_cons_add_m2_sym_b3(instance)

    def test_large_bundles_refused(self):
        """Test bundles of four voters fall outside the solver."""
        ids = ["w1", "w2", "w3", "w4"]
        instance = make_instance(
            "cons-add", {"v": "g"}, dict.fromkeys(ids, "p"), bundles=dict.fromkeys(ids, ids)
        )
        with pytest.raises(ComponentShapeError, match="at most 3"):
            solve_cons_add_m2_sym_b3(instance)

    def test_leading_and_full_splits_agree(self):
        """Test both split strategies find solutions of equal size on long paths."""
        for seed in range(8):
            instance = random_path_instance(30, budget=10, seed=seed)
            leading = solve_cons_add_m2_sym_b3(instance)
            full = solve_cons_add_m2_sym_b3(instance, splits="full")
            assert (leading is None) == (full is None)
            if leading is not None and full is not None:
                assert leading.size == full.size
                assert verify_solution(instance, leading)

    @pytest.mark.slow
    def test_matches_oracle(self):
        """Test solution sizes against the oracle on random path and cycle instances."""
        for instance in sweep(500, candidates=2, registered=7, pool=10, max_bundle_size=3):
            assert_matches_oracle(instance, solve_cons_add_m2_sym_b3(instance))


class TestConsDelM2SymB3:
    """Test constructive deletion through the complement."""

    def test_already_winning(self):
        """Test p already co-winning gives the empty solution."""
        instance = make_instance("cons-del", {"v1": "p", "v2": "g"})
        assert solve_cons_del_m2_sym_b3(instance) == Solution()

    def test_three_candidates_refused(self):
        """Test more than two candidates are refused."""
        instance = make_instance("cons-del", {"v1": "g", "v2": "h"})
        with pytest.raises(TooManyCandidatesError):
            solve_cons_del_m2_sym_b3(instance)

    @pytest.mark.slow
    def test_matches_oracle(self):
        """Test solution sizes against the oracle."""
        for instance in sweep(
            500, variant=CONS_DEL, candidates=2, registered=10, pool=0, max_bundle_size=3
        ):
            assert_matches_oracle(instance, solve_cons_del_m2_sym_b3(instance))


class TestConsAddSymB2:
    """Test the pair-bundle greedy."""

    def test_pp_bundle_closes_deficit_of_two(self, pp_pair):
        """Test one {p, p} bundle closes a deficit of two."""
        assert solve_cons_add_sym_b2(pp_pair) == Solution.of(["w1"])

    def test_only_rival_bundles(self):
        """Test {g, g} bundles never help p."""
        instance = make_instance(
            "cons-add",
            {"v": "g"},
            {"w1": "g", "w2": "g"},
            bundles={"w1": ["w1", "w2"], "w2": ["w1", "w2"]},
            candidates=["p"],
        )
        assert solve_cons_add_sym_b2(instance) is None

    def test_not_symmetric(self):
        """Test an asymmetric bundling function is refused."""
        instance = make_instance(
            "cons-add",
            {"v": "g"},
            {"w1": "p", "w2": "p"},
            bundles={"w1": ["w1", "w2"], "w2": ["w2"]},
        )
        with pytest.raises(NotSymmetricError):
            solve_cons_add_sym_b2(instance)

    def test_mixed_bundles_spread_over_rivals(self):
        """Test {p, c} bundles are only taken where c has slack."""
        instance = make_instance(
            "cons-add",
            {"v1": "g", "v2": "h"},
            {"w1": "p", "w2": "g", "w3": "p", "w4": "h"},
            bundles={
                "w1": ["w1", "w2"],
                "w2": ["w1", "w2"],
                "w3": ["w3", "w4"],
                "w4": ["w3", "w4"],
            },
            budget=1,
        )
        assert solve_cons_add_sym_b2(instance) is None
        wider = instance.with_budget(Budget.of(2))
        assert solve_cons_add_sym_b2(wider) == Solution.of(["w1", "w3"])

    @pytest.mark.slow
    @pytest.mark.parametrize("candidates", [2, 3, 4])
    def test_matches_oracle(self, candidates):
        """Test solution sizes against the oracle."""
        for instance in sweep(
            170, candidates=candidates, registered=6, pool=10, max_bundle_size=2
        ):
            assert_matches_oracle(instance, solve_cons_add_sym_b2(instance))


class TestConsDelSymB2:
    """Test deletion through b-matching."""

    def test_delete_the_g_pair(self):
        """Test deleting one {g, g} bundle brings p level."""
        instance = make_instance(
            "cons-del",
            {"a": "p", "b": "g", "c": "g", "d": "g"},
            bundles={"a": ["a"], "b": ["b", "c"], "c": ["b", "c"], "d": ["d"]},
            budget=2,
        )
        solution = solve_cons_del_sym_b2(instance)
        assert solution == Solution.of(["b"])
        assert verify_solution(instance, solution).scores == {"g": 1, "p": 1}

    def test_no_p_voters_deletes_everything(self):
        """Test with s_p = 0 every bundle has to go."""
        instance = make_instance(
            "cons-del",
            {"b": "g", "c": "g", "d": "h"},
            bundles={"b": ["b", "c"], "c": ["b", "c"], "d": ["d"]},
            budget=2,
        )
        assert solve_cons_del_sym_b2(instance) == Solution.of(["b", "d"])
        assert solve_cons_del_sym_b2(instance.with_budget(Budget.of(1))) is None

    def test_already_winning(self):
        """Test p already co-winning gives the empty solution."""
        instance = make_instance("cons-del", {"a": "p", "b": "g"})
        assert solve_cons_del_sym_b2(instance) == Solution()

    def test_deficit_vector(self):
        """Test per-rival deficits and surviving capacity."""
        instance = make_instance("cons-del", {"a": "p", "b": "g", "c": "g", "d": "h"})
        deficits = DeficitVector.of(instance)
        assert deficits.deficits == {"g": 1, "h": 0}
        assert deficits.capacity("g", 2) == 1
        assert deficits.capacity("h", 1) == 1

    @pytest.mark.slow
    @pytest.mark.parametrize("candidates", [2, 3, 4])
    def test_matches_oracle(self, candidates):
        """Test solution sizes against the oracle."""
        for instance in sweep(
            170, variant=CONS_DEL, candidates=candidates, registered=10, pool=0, max_bundle_size=2
        ):
            assert_matches_oracle(instance, solve_cons_del_sym_b2(instance))


class TestDestructive:
    """Test the destructive solvers."""

    def test_already_losing(self):
        """Test p strictly behind already gives the empty solution."""
        instance = make_instance("des-add", {"v1": "g", "v2": "g", "v3": "p"}, {"w": "p"})
        assert solve_destructive(instance, solve_cons_add_m2_sym_b3) == Solution()
        assert solve_des_disjoint(instance) == Solution()

    def test_disjoint_pair_of_rival_voters(self):
        """Test one bundle with two c-voters defeats p."""
        instance = make_instance(
            "des-add",
            {"v": "p"},
            {"w1": "c", "w2": "c"},
            bundles={"w1": ["w1", "w2"], "w2": ["w1", "w2"]},
        )
        assert solve_des_disjoint(instance) == Solution.of(["w1"])

    def test_nothing_helps(self):
        """Test no bundle moves any rival past p."""
        instance = make_instance("des-add", {"v": "p"}, {"w": "p"}, candidates=["c"])
        assert solve_des_disjoint(instance) is None

    def test_constructive_refused(self, pp_pair):
        """Test constructive instances are refused."""
        with pytest.raises(PreconditionError, match="destructive"):
            solve_des_disjoint(pp_pair)
        with pytest.raises(PreconditionError, match="destructive"):
            solve_destructive(pp_pair, solve_cons_add_sym_b2)

    def test_overlapping_bundles_refused(self):
        """Test the disjoint greedy needs disjoint bundles."""
        ids = ["w1", "w2", "w3"]
        instance = make_instance("des-add", {"v": "p"}, dict.fromkeys(ids, "c"), path_bundles(ids))
        with pytest.raises(PreconditionError, match="disjoint"):
            solve_des_disjoint(instance)

    @pytest.mark.slow
    @pytest.mark.parametrize("variant", [DES_ADD, DES_DEL])
    @pytest.mark.parametrize("candidates", [2, 3, 4])
    def test_matches_oracle(self, variant, candidates):
        """Test both destructive solvers against the oracle."""
        pool = 0 if variant == DES_DEL else 9
        for instance in sweep(
            75, variant=variant, candidates=candidates, registered=8, pool=pool, max_bundle_size=3
        ):
            assert_matches_oracle(instance, solve_destructive_sym_b3(instance))
        for instance in sweep(
            75,
            variant=variant,
            candidates=candidates,
            registered=8,
            pool=pool,
            max_bundle_size=3,
            symmetry=SymmetryClass.DISJOINT,
        ):
            assert_matches_oracle(instance, solve_des_disjoint(instance))


class TestDispatch:
    """Test routing between solvers."""

    def test_pairs_route_to_b2_greedy(self, pp_pair):
        """Test symmetric b = 2 constructive addition."""
        assert choose_solver(pp_pair) == "cons-add-sym-b2"

    def test_paths_route_to_gap_tables(self):
        """Test two-candidate symmetric b = 3 constructive addition."""
        ids = ["w1", "w2", "w3"]
        instance = make_instance("cons-add", {"v": "g"}, dict.fromkeys(ids, "p"), path_bundles(ids))
        routed = dispatch(instance)
        assert routed.solver == "cons-add-m2-sym-b3"
        assert routed.found
        assert routed.profile.describe() == "symmetric b=3"

    def test_arbitrary_bundles_route_to_oracle(self):
        """Test twelve voters with chained bundles go to the oracle."""
        ids = [f"w{i:02d}" for i in range(1, 13)]
        pool = {w: ("p" if i % 2 else "g") for i, w in enumerate(ids)}
        bundles = {w: ids[i : i + 2] for i, w in enumerate(ids)}
        instance = make_instance("cons-add", {"v": "g"}, pool, bundles)
        assert dispatch(instance).solver == "oracle"
        with pytest.raises(UnsupportedInstanceError, match="no solver applies"):
            dispatch(instance, cap=5)

    def test_anonymous_routes_to_ilp(self):
        """Test asymmetric anonymous bundles go to the ILP."""
        instance = make_instance(
            "cons-add",
            {"v": "g"},
            {"w1": "p", "w2": "p", "w3": "g"},
            bundles={"w1": ["w1", "w2", "w3"], "w2": ["w1", "w2", "w3"], "w3": ["w3"]},
        )
        assert choose_solver(instance) == "ilp-anon"

    def test_destructive_routing(self):
        """Test disjoint and path-shaped destructive instances."""
        ids = ["w1", "w2", "w3"]
        paths = make_instance("des-add", {"v": "p"}, dict.fromkeys(ids, "c"), path_bundles(ids))
        assert choose_solver(paths) == "destructive-sym-b3"
        singles = make_instance("des-add", {"v": "p"}, {"w": "c"})
        assert choose_solver(singles) == "des-disjoint"

    def test_unlimited_constructive_deletion(self):
        """Test unlimited constructive deletion is always answered."""
        ids = [f"v{i:02d}" for i in range(40)]
        instance = make_instance(
            "cons-del",
            dict.fromkeys(ids, "g") | {"v00": "p"},
            bundles={v: ids[i : i + 2] for i, v in enumerate(ids)},
            budget=None,
        )
        routed = dispatch(instance)
        assert routed.solver == "oracle"
        assert routed.solution is not None
        assert routed.solution.size == 40

    def test_explicit_solver(self, pp_pair):
        """Test a named solver is used as given."""
        routed = dispatch(pp_pair, solver="oracle")
        assert routed.solver == "oracle"
        assert routed.solution == Solution.of(["w1"])

    def test_unknown_solver(self, pp_pair):
        """Test unknown solver names list the registry."""
        with pytest.raises(UnsupportedInstanceError, match="choose from auto"):
            dispatch(pp_pair, solver="simplex")

    def test_registry_names(self):
        """Test every routed name is registered."""
        assert {"oracle", "ilp-anon", "cons-add-sym-b2", "des-disjoint"} <= set(SOLVERS)


class TestPathScaling:
    """Test running time of the path DP over the bench grid."""

    SIZES = (50, 100, 150, 200)

    def best_of(self, size, repeats=3):
        times = []
        for seed in range(repeats):
            routed = dispatch(random_path_instance(size, budget=20, seed=seed))
            assert routed.solver == "cons-add-m2-sym-b3"
            times.append(routed.elapsed_ms)
        return min(times)

    @pytest.mark.slow
    def test_largest_size_within_ten_seconds(self):
        """Test 200 pool voters with 20 leaders solve in under 10 s."""
        assert self.best_of(200) < 10_000

    @pytest.mark.slow
    def test_log_log_slope(self):
        """Test time grows at most like n^5.5 across the grid."""
        xs = [math.log(size) for size in self.SIZES]
        ys = [math.log(max(self.best_of(size), 1e-3)) for size in self.SIZES]
        slope, _ = statistics.linear_regression(xs, ys)
        assert slope <= 5.5
