"""
descriptors module
JSON documents for catalog instances: the space, named subsets, functions,
function and set sequences, and the bump net. Every command reads its inputs
from these documents.

Document layout::

    {
      "name": "comb",
      "parameters": {...},
      "space": {"metric": "euclidean", "points": [[0.0, 0.0], ...], "resolution_h": 0.01},
      "subsets": {"axis": [0, 1, 2]},
      "functions": {"f": {"type": "table", "values": [0.0, "1/2", "inf"]},
                    "g": {"type": "catalog", "name": "square"}},
      "sequences": {"tents": {"terms": [<function>, ...], "limit": <function>}},
      "set_sequences": {"columns": {"terms": [[...], ...], "limit": [...]}},
      "product_net": {"K": 2, "Nmax": 2, "origin": 0, "limit": <function>,
                      "table": {"1,1": <function>, ...}}
    }
"""

from __future__ import annotations

import json
import logging
from fractions import Fraction
from pathlib import Path

import numpy as np

from oscillation_lab.catalog import CatalogInstance
from oscillation_lab.convergence import FunctionSequence, ProductNet
from oscillation_lab.errors import ArgumentError, DescriptorError, StructuralError
from oscillation_lab.exporters import dump_to_json
from oscillation_lab.functions import FunctionOracle, named_function
from oscillation_lab.hyperspace import SetSequence
from oscillation_lab.metric_core import EuclideanSpace, MatrixSpace, MetricSpace, SubsetRef, SupSequenceSpace
from oscillation_lab.utils.extraction import jmes_get, jmes_require

SPACE_TYPES = {
    EuclideanSpace.METRIC: EuclideanSpace,
    MatrixSpace.METRIC: MatrixSpace,
    SupSequenceSpace.METRIC: SupSequenceSpace,
}


def _number(value, path: str, exact: bool):
    if isinstance(value, bool):
        raise DescriptorError("expected a number, got a boolean", path=path)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise DescriptorError(f"not a number or p/q literal: {value!r}", path=path) from exc
    if isinstance(value, (int, float)):
        return Fraction(str(value)) if exact else value
    raise DescriptorError(f"expected a number, got {type(value).__name__}", path=path)


def parse_space(doc: dict, where: str = "space") -> MetricSpace:
    """
    Build a space from its descriptor.

    :param doc: ``{"metric", "points", "resolution_h"}``.
    :type doc: dict
    :param where: Path prefix used in error messages.
    :type where: str
    :returns: The space.
    :rtype: MetricSpace
    :raises DescriptorError: On a missing field, an unknown metric or invalid
        coordinates.
    """
    metric = jmes_require("metric", doc, str, where)
    if metric not in SPACE_TYPES:
        raise DescriptorError(f"unknown metric {metric!r}; known: {sorted(SPACE_TYPES)}", path=f"{where}.metric")
    points = jmes_require("points", doc, list, where)
    h = jmes_get("resolution_h", doc, 0.0)
    if isinstance(h, bool) or not isinstance(h, (int, float)):
        raise DescriptorError("expected a number", path=f"{where}.resolution_h")
    try:
        if metric == SupSequenceSpace.METRIC:
            rows = [
                [_number(c, f"{where}.points[{i}][{j}]", exact=True) for j, c in enumerate(p)]
                for i, p in enumerate(points)
            ]
            return SupSequenceSpace(rows, resolution_h=h)
        return SPACE_TYPES[metric](points, resolution_h=h)
    except (ArgumentError, StructuralError, ValueError, TypeError) as exc:
        raise DescriptorError(f"invalid {metric} space: {exc}", path=f"{where}.points") from exc


def parse_subset(space: MetricSpace, ids, where: str) -> SubsetRef:
    if not isinstance(ids, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in ids):
        raise DescriptorError("expected a list of PointIds", path=where)
    try:
        return SubsetRef(space, ids)
    except StructuralError as exc:
        raise DescriptorError(str(exc), path=where) from exc


def parse_function(space: MetricSpace, doc, where: str, name: str = "f") -> FunctionOracle:
    """
    Build a function from a ``table`` or ``catalog`` descriptor.

    Table values are numbers, ``"p/q"`` literals, ``"inf"`` (declared
    unbounded) or, for euclidean targets, lists of numbers. Any ``p/q``
    literal, or an exact space, makes the whole table exact.

    :raises DescriptorError: On an unknown type, a bad value or a length
        mismatch.
    """
    if not isinstance(doc, dict):
        raise DescriptorError("expected a function descriptor object", path=where)
    kind = jmes_require("type", doc, str, where)
    if kind == "catalog":
        fname = jmes_require("name", doc, str, where)
        try:
            return named_function(space, fname)
        except ArgumentError as exc:
            raise DescriptorError(str(exc), path=f"{where}.name") from exc
    if kind != "table":
        raise DescriptorError(f"unknown function type {kind!r}; expected 'table' or 'catalog'", path=f"{where}.type")
    raw = jmes_require("values", doc, list, where)
    if len(raw) != len(space):
        raise DescriptorError(f"{len(raw)} values for {len(space)} points", path=f"{where}.values")
    unbounded = [v == "inf" for v in raw]
    exact = space.exact or any(isinstance(v, str) and v != "inf" for v in raw)
    values = []
    for i, v in enumerate(raw):
        path = f"{where}.values[{i}]"
        if unbounded[i]:
            values.append(Fraction(0) if exact else 0.0)
        elif isinstance(v, list):
            values.append([float(_number(c, f"{path}[{j}]", exact=False)) for j, c in enumerate(v)])
        else:
            values.append(_number(v, path, exact))
    try:
        arr = np.array(values, dtype=object) if exact else np.array(values, dtype=float)
        return FunctionOracle(space, arr, name=jmes_get("name", doc, name), unbounded=unbounded)
    except (ArgumentError, StructuralError, ValueError) as exc:
        raise DescriptorError(str(exc), path=f"{where}.values") from exc


def function_descriptor(f: FunctionOracle) -> dict:
    return {**f.to_descriptor(), "name": f.name}


def _parse_sequence(space, doc, where: str) -> FunctionSequence:
    terms = jmes_require("terms", doc, list, where)
    limit = parse_function(space, jmes_require("limit", doc, dict, where), f"{where}.limit", "limit")
    parsed = tuple(parse_function(space, t, f"{where}.terms[{i}]", f"term_{i + 1}") for i, t in enumerate(terms))
    try:
        return FunctionSequence(parsed, limit)
    except (ArgumentError, StructuralError) as exc:
        raise DescriptorError(str(exc), path=where) from exc


def _parse_set_sequence(space, doc, where: str) -> SetSequence:
    terms = jmes_require("terms", doc, list, where)
    limit = parse_subset(space, jmes_require("limit", doc, list, where), f"{where}.limit")
    parsed = tuple(parse_subset(space, t, f"{where}.terms[{i}]") for i, t in enumerate(terms))
    try:
        return SetSequence(space, parsed, limit)
    except (ArgumentError, StructuralError) as exc:
        raise DescriptorError(str(exc), path=where) from exc


def _parse_net(space, doc, where: str) -> ProductNet:
    K = jmes_require("K", doc, int, where)
    Nmax = jmes_require("Nmax", doc, int, where)
    table = {}
    for key, fdoc in jmes_require("table", doc, dict, where).items():
        try:
            k, n = (int(p) for p in key.split(","))
        except ValueError as exc:
            raise DescriptorError(f"net keys are 'k,n', got {key!r}", path=f"{where}.table") from exc
        table[(k, n)] = parse_function(space, fdoc, f'{where}.table."{key}"', f"f_{k}_{n}")
    limit = parse_function(space, jmes_require("limit", doc, dict, where), f"{where}.limit", "limit")
    try:
        return ProductNet(K, Nmax, table, limit, origin=jmes_get("origin", doc, 0))
    except StructuralError as exc:
        raise DescriptorError(str(exc), path=where) from exc


def instance_from_dict(doc: dict) -> CatalogInstance:
    """
    Build a :class:`CatalogInstance` from a parsed document.

    :param doc: The document.
    :type doc: dict
    :returns: The instance.
    :rtype: CatalogInstance
    :raises DescriptorError: With the field path of the first problem found.
    """
    if not isinstance(doc, dict):
        raise DescriptorError("instance document must be a JSON object")
    space = parse_space(jmes_require("space", doc, dict))
    subsets = {k: parse_subset(space, v, f"subsets.{k}") for k, v in (jmes_get("subsets", doc) or {}).items()}
    functions = {k: parse_function(space, v, f"functions.{k}", k) for k, v in (jmes_get("functions", doc) or {}).items()}
    sequences = {k: _parse_sequence(space, v, f"sequences.{k}") for k, v in (jmes_get("sequences", doc) or {}).items()}
    set_sequences = {
        k: _parse_set_sequence(space, v, f"set_sequences.{k}") for k, v in (jmes_get("set_sequences", doc) or {}).items()
    }
    net_doc = jmes_get("product_net", doc)
    return CatalogInstance(
        name=jmes_get("name", doc, "instance"),
        parameters=jmes_get("parameters", doc, {}),
        space=space,
        subsets=subsets,
        functions=functions,
        sequences=sequences,
        set_sequences=set_sequences,
        product_net=_parse_net(space, net_doc, "product_net") if net_doc is not None else None,
    )


def instance_to_dict(inst: CatalogInstance) -> dict:
    """
    The document of an instance; :func:`instance_from_dict` inverts it.
    """
    doc = {
        "name": inst.name,
        "parameters": inst.parameters,
        "space": inst.space.to_descriptor(),
        "subsets": {k: S.to_descriptor() for k, S in inst.subsets.items()},
        "functions": {k: function_descriptor(f) for k, f in inst.functions.items()},
        "sequences": {
            k: {"terms": [function_descriptor(t) for t in fs.terms], "limit": function_descriptor(fs.limit)}
            for k, fs in inst.sequences.items()
        },
        "set_sequences": {
            k: {"terms": [t.to_descriptor() for t in seq.terms], "limit": seq.limit_candidate.to_descriptor()}
            for k, seq in inst.set_sequences.items()
        },
    }
    if inst.product_net is not None:
        pn = inst.product_net
        doc["product_net"] = {
            "K": pn.K,
            "Nmax": pn.Nmax,
            "origin": pn.origin,
            "limit": function_descriptor(pn.limit),
            "table": {f"{k},{n}": function_descriptor(f) for (k, n), f in sorted(pn.table.items())},
        }
    return doc


def load_instance(filepath: str) -> CatalogInstance:
    """
    Read an instance document from disk.

    :param filepath: Path of the JSON file.
    :type filepath: str
    :returns: The instance.
    :rtype: CatalogInstance
    :raises DescriptorError: On unreadable files, JSON syntax errors (with
        line and column) or invalid fields.
    """
    path = Path(filepath)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DescriptorError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DescriptorError(f"invalid JSON in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    inst = instance_from_dict(doc)
    logging.info(f"loaded instance {inst.name!r} from {path}: {len(inst.space)} points")
    return inst


def dump_instance(inst: CatalogInstance, filepath: str) -> None:
    dump_to_json(instance_to_dict(inst), filepath)
    logging.info(f"wrote instance {inst.name!r} to {filepath}")
