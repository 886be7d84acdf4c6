"""
utils.extraction module
Provides utility functions for reading fields out of JSON descriptors.
"""

import jmespath
from jmespath.exceptions import JMESPathError

from oscillation_lab.errors import DescriptorError

_MISSING = object()


def jmes_get(pattern, data, default=None):
    """
    Extract a value from a data structure using a JMESPath expression.

    :param pattern: JMESPath expression to apply.
    :type pattern: str
    :param data: The data to search (typically a dict or list).
    :type data: Any
    :param default: Value to return if the expression yields None.
    :type default: Any, optional
    :returns: The result of the JMESPath search, or `default` if no match is found.
    :rtype: Any
    :raises DescriptorError: If the expression itself is invalid.
    """
    try:
        result = jmespath.search(pattern, data)
    except JMESPathError as exc:
        raise DescriptorError(f"invalid field expression: {exc}", path=pattern) from exc
    if result is None and default is not None:
        return default
    return result


def jmes_require(pattern, data, kind=None, where=None):
    """
    Like :func:`jmes_get`, but a missing field or a value of the wrong type is
    a descriptor error naming the field path.

    :param pattern: JMESPath expression to apply.
    :type pattern: str
    :param data: The data to search.
    :type data: Any
    :param kind: Expected type or tuple of types.
    :type kind: type or tuple[type, ...] or None
    :param where: Prefix for the reported path (e.g. ``functions.f``).
    :type where: str or None
    :returns: The value found.
    :rtype: Any
    :raises DescriptorError: If the field is absent or mistyped.
    """
    path = f"{where}.{pattern}" if where else pattern
    result = jmes_get(pattern, data, _MISSING)
    if result is _MISSING or result is None:
        raise DescriptorError("required field is missing", path=path)
    if kind is not None and (not isinstance(result, kind) or (isinstance(result, bool) and bool not in _as_tuple(kind))):
        raise DescriptorError(f"expected {_kind_name(kind)}, got {type(result).__name__}", path=path)
    return result


def _as_tuple(kind):
    return kind if isinstance(kind, tuple) else (kind,)


def _kind_name(kind):
    return " or ".join(k.__name__ for k in _as_tuple(kind))
