"""
test_descriptors module
=======================

Tests for ``oscillation_lab.descriptors``.

Covers:
- Instance documents written and read back, exact and floating
- Table and catalog function descriptors, unbounded points
- Field paths reported for malformed documents
- JSON syntax errors with line and column
"""

import json
from fractions import Fraction

import numpy as np
import pytest

from oscillation_lab.catalog import build_cross
from oscillation_lab.descriptors import (
    dump_instance,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    parse_function,
    parse_space,
)
from oscillation_lab.errors import DescriptorError
from oscillation_lab.metric_core import MatrixSpace, SupSequenceSpace


def _line_doc(**extra):
    doc = {"name": "line", "space": {"metric": "euclidean", "points": [[0.0], [1.0], [2.0]], "resolution_h": 0.5}}
    doc.update(extra)
    return doc


def test_float_instance_survives_a_file_round_trip(tmp_path):
    inst = build_cross(4, 0.5)
    path = tmp_path / "instances" / "cross.json"
    dump_instance(inst, str(path))
    loaded = load_instance(str(path))
    assert loaded.name == inst.name
    assert np.array_equal(loaded.space.points, inst.space.points)
    assert loaded.space.resolution_h == inst.space.resolution_h
    assert set(loaded.subsets) == set(inst.subsets)
    for key, S in inst.subsets.items():
        assert loaded.subset(key).indices.tolist() == S.indices.tolist()
    assert np.array_equal(loaded.function("f").values, inst.function("f").values)
    assert loaded.function("f").space is loaded.space


def test_exact_instance_with_product_net(bumps12):
    doc = json.loads(json.dumps(instance_to_dict(bumps12), default=str))
    loaded = instance_from_dict(doc)
    assert isinstance(loaded.space, SupSequenceSpace)
    assert loaded.space.points == bumps12.space.points
    net, original = loaded.product_net, bumps12.product_net
    assert (net.K, net.Nmax, net.origin) == (original.K, original.Nmax, original.origin)
    assert net.table[(3, 2)].values.tolist() == original.table[(3, 2)].values.tolist()
    assert net.table[(3, 2)](1 + 3 * ((3 - 1) * 12 + (2 - 1))) == 1
    assert len(loaded.sequences["diagonal"]) == len(bumps12.sequences["diagonal"])


def test_set_sequences_round_trip(comb8):
    loaded = instance_from_dict(instance_to_dict(comb8))
    seq = loaded.set_sequences["columns"]
    assert len(seq) == len(comb8.set_sequences["columns"])
    assert seq.term(2).indices.tolist() == comb8.subset("column_2").indices.tolist()
    assert seq.limit_candidate == loaded.subset("axis")


def test_table_values_are_exact_when_any_literal_is():
    space = parse_space(_line_doc()["space"])
    f = parse_function(space, {"type": "table", "values": [0, "1/2", 2]}, "functions.f")
    assert f.values.tolist() == [Fraction(0), Fraction(1, 2), Fraction(2)]
    assert f.values.dtype == object


def test_unbounded_and_vector_values():
    space = parse_space(_line_doc()["space"])
    f = parse_function(space, {"type": "table", "values": [0.0, "inf", 1.0]}, "functions.f")
    assert f.unbounded.tolist() == [False, True, False]
    assert f(1) == float("inf")
    g = parse_function(space, {"type": "table", "values": [[0, 1], [1, 1], [2, 1]]}, "functions.g")
    assert g.target == "euclidean"


def test_catalog_function_descriptor():
    space = parse_space(_line_doc()["space"])
    f = parse_function(space, {"type": "catalog", "name": "square"}, "functions.f")
    assert f.values.tolist() == [0.0, 1.0, 4.0]


def test_matrix_space_descriptor():
    space = parse_space({"metric": "matrix", "points": [[0, 1], [1, 0]]})
    assert isinstance(space, MatrixSpace)
    assert space.resolution_h == 0.0


@pytest.mark.parametrize(
    "doc,path",
    [
        ({"name": "empty"}, "space"),
        (_line_doc(space={"metric": "taxicab", "points": [[0.0]]}), "space.metric"),
        (_line_doc(space={"metric": "euclidean", "points": [[0.0]], "resolution_h": "fine"}), "space.resolution_h"),
        (_line_doc(space={"metric": "matrix", "points": [[0, 1]]}), "space.points"),
        (_line_doc(subsets={"A": [0, 5]}), "subsets.A"),
        (_line_doc(subsets={"A": [0, "1"]}), "subsets.A"),
        (_line_doc(functions={"f": {"type": "table", "values": [0.0, 1.0]}}), "functions.f.values"),
        (_line_doc(functions={"f": {"type": "table", "values": [0.0, "1/0", 1.0]}}), "functions.f.values[1]"),
        (_line_doc(functions={"f": {"type": "table", "values": [True, 0.0, 1.0]}}), "functions.f.values[0]"),
        (_line_doc(functions={"f": {"type": "spline"}}), "functions.f.type"),
        (_line_doc(functions={"f": {"type": "catalog", "name": "cube"}}), "functions.f.name"),
        (_line_doc(functions={"f": [0.0, 1.0, 2.0]}), "functions.f"),
        (_line_doc(sequences={"s": {"terms": []}}), "sequences.s.limit"),
        (_line_doc(set_sequences={"s": {"terms": [[0]], "limit": [9]}}), "set_sequences.s.limit"),
        (
            _line_doc(
                product_net={
                    "K": 1,
                    "Nmax": 1,
                    "limit": {"type": "catalog", "name": "zero"},
                    "table": {"1-1": {"type": "catalog", "name": "zero"}},
                }
            ),
            "product_net.table",
        ),
    ],
    ids=[
        "missing-space",
        "unknown-metric",
        "resolution",
        "ragged-matrix",
        "subset-range",
        "subset-type",
        "value-count",
        "literal",
        "boolean",
        "function-type",
        "unknown-catalog-function",
        "function-shape",
        "sequence-limit",
        "set-sequence-limit",
        "net-key",
    ],
)
def test_malformed_documents_name_the_field(doc, path):
    with pytest.raises(DescriptorError) as exc_info:
        instance_from_dict(doc)
    assert exc_info.value.path == path


def test_load_instance_reports_the_json_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "space": {"metric": "euclidean",,}\n}\n', encoding="utf-8")
    with pytest.raises(DescriptorError, match="at line 2, column 35"):
        load_instance(str(path))


def test_load_instance_errors(tmp_path):
    with pytest.raises(DescriptorError, match="cannot read"):
        load_instance(str(tmp_path / "missing.json"))
    path = tmp_path / "list.json"
    path.write_text("[]", encoding="utf-8")
    with pytest.raises(DescriptorError, match="must be a JSON object"):
        load_instance(str(path))
