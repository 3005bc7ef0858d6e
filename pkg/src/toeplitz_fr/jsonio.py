"""Complex-number JSON conventions: every complex value is ``[re, im]``."""
from __future__ import annotations

import hashlib
import json
from typing import Any

import numpy as np

from .errors import InputFormatError


def encode_complex_array(a) -> list:
    """Nested lists of ``[re, im]`` pairs, preserving the array shape."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 0:
        return [float(arr.real), float(arr.imag)]
    return [encode_complex_array(x) for x in arr]


def decode_complex_array(obj, ndim: int) -> np.ndarray:
    """Inverse of :func:`encode_complex_array` for an ``ndim``-dimensional array."""
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputFormatError(f"not a numeric array: {exc}") from None
    if arr.ndim != ndim + 1 or arr.shape[-1] != 2:
        raise InputFormatError(
            f"expected a {ndim}-dimensional array of [re, im] pairs, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise InputFormatError("non-finite entries")
    return arr[..., 0] + 1j * arr[..., 1]


def require(doc: dict, key: str, kind=None) -> Any:
    if not isinstance(doc, dict) or key not in doc:
        raise InputFormatError(f"missing field {key!r}")
    value = doc[key]
    if kind is not None and not isinstance(value, kind):
        raise InputFormatError(f"field {key!r} has the wrong type")
    if kind is int and isinstance(value, bool):
        raise InputFormatError(f"field {key!r} has the wrong type")
    return value


def canonical_dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def sha256_hex(doc: Any) -> str:
    return hashlib.sha256(canonical_dumps(doc).encode()).hexdigest()
