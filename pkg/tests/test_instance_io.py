"""Tests for instance documents, edge lists and DIMACS input."""

import json

import pytest

from bundle_control.control import DES_DEL, Budget
from bundle_control.errors import InstanceFormatError
from bundle_control.instance_io import (
    InstanceDocument,
    parse_dimacs,
    parse_edge_list,
    parse_instance,
    read_instance,
    serialize_instance,
    write_instance,
)
from bundle_control.reductions import RandomInstanceParams, SymmetryClass, random_instance
from tests.factories import make_instance

DOCUMENT = {
    "candidates": ["g", "p"],
    "registered": [{"id": "v1", "favorite": "g"}, {"id": "v2", "favorite": "g"}],
    "unregistered": [{"id": "w1", "favorite": "p"}, {"id": "w2", "favorite": "p"}],
    "bundles": {"w1": ["w1", "w2"], "w2": ["w2"]},
    "variant": "cons-add",
    "preferred": "p",
    "budget": 1,
}


class TestInstanceDocument:
    """Test parsing and writing instance files."""

    def test_parse(self):
        """Test a document becomes the matching instance."""
        instance = parse_instance(json.dumps(DOCUMENT))
        assert instance.budget == Budget.of(1)
        assert instance.kappa.bundle("w1") == {"w1", "w2"}
        assert instance.domain_ids == ("w1", "w2")

    def test_canonical_text_is_stable(self):
        """Test serializing a parsed canonical document gives the same bytes."""
        for seed in range(10):
            params = RandomInstanceParams(
                candidates=3, symmetry=SymmetryClass.ARBITRARY, seed=seed
            )
            text = serialize_instance(random_instance(params))
            assert serialize_instance(parse_instance(text)) == text

    def test_key_order(self):
        """Test keys are written in document order."""
        text = serialize_instance(parse_instance(json.dumps(DOCUMENT)))
        assert list(json.loads(text)) == [
            "candidates",
            "registered",
            "unregistered",
            "bundles",
            "variant",
            "preferred",
            "budget",
        ]

    def test_unlimited_budget_is_null(self):
        """Test an unlimited budget is written as null."""
        instance = make_instance("cons-del", {"a": "p", "b": "g"}, budget=None)
        assert json.loads(serialize_instance(instance))["budget"] is None

    def test_unregistered_defaults_to_empty(self):
        """Test delete documents may leave out the pool."""
        document = dict(DOCUMENT, variant="DES-DEL", bundles={"v1": ["v1"], "v2": ["v2"]})
        del document["unregistered"]
        instance = parse_instance(json.dumps(document))
        assert instance.variant == DES_DEL
        assert instance.pool == ()

    def test_variant_is_normalised(self):
        """Test variant tags are stored in lower case."""
        document = InstanceDocument.model_validate(dict(DOCUMENT, variant=" Cons-Add "))
        assert document.variant == "cons-add"

    @pytest.mark.parametrize(
        ("change", "message"),
        [
            ({"bundles": {"w1": ["w2"], "w2": ["w2"]}}, "must list 'w1' itself"),
            ({"variant": "cons-swap"}, "unknown variant"),
            ({"budget": -1}, "budget"),
            ({"preferred": "q"}, "is not running"),
            ({"bundles": {"w1": ["w1"]}}, "bundling domain"),
            ({"extra": 1}, "extra"),
        ],
    )
    def test_invalid_documents(self, change, message):
        """Test malformed documents raise InstanceFormatError."""
        with pytest.raises(InstanceFormatError, match=message):
            parse_instance(json.dumps(DOCUMENT | change))

    def test_missing_budget(self):
        """Test budget must be given, even if null."""
        document = dict(DOCUMENT)
        del document["budget"]
        with pytest.raises(InstanceFormatError, match="budget"):
            parse_instance(json.dumps(document))

    def test_not_json(self):
        """Test plain text is refused."""
        with pytest.raises(InstanceFormatError, match="Invalid instance"):
            parse_instance("candidates: [p]")

    def test_file_round_trip(self, tmp_path):
        """Test write_instance and read_instance agree."""
        instance = parse_instance(json.dumps(DOCUMENT))
        path = tmp_path / "instance.json"
        write_instance(instance, path)
        assert read_instance(path) == instance
        assert path.read_text(encoding="utf-8").endswith("}\n")


class TestParseEdgeList:
    """Test edge-list input."""

    def test_edges_comments_and_isolated_vertices(self):
        """Test pairs, comments and single-name lines."""
        graph = parse_edge_list("# triangle\na b\nb c  # closing\nc a\n\nd\n")
        assert sorted(graph.nodes) == ["a", "b", "c", "d"]
        assert graph.number_of_edges() == 3
        assert graph.degree("d") == 0

    def test_too_many_tokens(self):
        """Test lines with three names are refused."""
        with pytest.raises(InstanceFormatError, match="line 2"):
            parse_edge_list("a b\na b c\n")


class TestParseDimacs:
    """Test DIMACS CNF input."""

    def test_formula(self):
        """Test a header, comments and four clauses."""
        text = "c two variables\np cnf 2 4\n1 2 0\n1 -2 0\n-1 2 0\n-1 -2 0\n"
        formula = parse_dimacs(text)
        assert formula.variables == 2
        assert formula.clauses[1] == (1, -2)

    @pytest.mark.parametrize(
        ("text", "message"),
        [
            ("1 2 0\n", "before the 'p cnf' header"),
            ("c nothing\n", "missing 'p cnf' header"),
            ("p cnf 2\n", "bad DIMACS header"),
            ("p cnf 2 4\n1 2\n", "not terminated by 0"),
            ("p cnf 2 4\n1 2 0\n", "announces 4 clauses, found 1"),
            ("p cnf 2 x\n", "expected an integer"),
            ("p cnf 1 2\n1 0\n-1 0\n", "Invalid formula"),
        ],
    )
    def test_errors(self, text, message):
        """Test malformed DIMACS raises InstanceFormatError."""
        with pytest.raises(InstanceFormatError, match=message):
            parse_dimacs(text)
