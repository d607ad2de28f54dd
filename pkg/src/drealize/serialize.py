"""JSON codecs for colligations, pairs, multipliers and interpolation specs.

Complex scalars are ``[re, im]`` pairs and matrices are lists of rows.  Floats
are written with :func:`repr`, so emit -> parse -> emit is byte-identical.
"""
from __future__ import annotations

import json
from typing import Any

import numpy as np

from . import mindex
from .beurling import InterpolationSpec
from .charfun import RowContraction
from .colligation import Colligation, OutputPair
from .errors import InputError


def dumps(obj: Any) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n"


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from None


def enc_scalar(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def dec_scalar(v) -> complex:
    if not (isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v)):
        raise InputError(f"expected a [re, im] pair, got {v!r}")
    return complex(float(v[0]), float(v[1]))


def enc_vector(v) -> list:
    return [enc_scalar(z) for z in np.asarray(v).reshape(-1)]


def dec_vector(v, length: int | None = None) -> np.ndarray:
    if not isinstance(v, list):
        raise InputError("expected a list of [re, im] pairs")
    out = np.array([dec_scalar(z) for z in v], dtype=complex)
    if length is not None and out.shape[0] != length:
        raise InputError(f"expected {length} entries, got {out.shape[0]}")
    return out


def enc_matrix(M) -> list:
    M = np.asarray(M)
    return [enc_vector(row) for row in M]


def dec_matrix(v, rows: int, cols: int) -> np.ndarray:
    if not isinstance(v, list) or len(v) != rows:
        raise InputError(f"expected a matrix with {rows} rows")
    if rows == 0:
        return np.zeros((0, cols), dtype=complex)
    return np.array([dec_vector(r, cols) for r in v], dtype=complex).reshape(rows, cols)


def _field(obj: dict, key: str):
    if not isinstance(obj, dict):
        raise InputError(f"expected an object with field {key!r}, got {type(obj).__name__}")
    if key not in obj:
        raise InputError(f"missing field {key!r}")
    return obj[key]


def _int_field(obj: dict, key: str, minimum: int = 0) -> int:
    v = _field(obj, key)
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        raise InputError(f"field {key!r} must be an integer >= {minimum}")
    return v


def colligation_to_obj(col: Colligation) -> dict:
    return {
        "d": col.d,
        "dim_state": col.dim_state,
        "dim_input": col.dim_input,
        "dim_output": col.dim_output,
        "A": [enc_matrix(Aj) for Aj in col.A],
        "B": [enc_matrix(Bj) for Bj in col.B],
        "C": enc_matrix(col.C),
        "D": enc_matrix(col.D),
    }


def colligation_from_obj(obj: dict) -> Colligation:
    d = _int_field(obj, "d", 1)
    p = _int_field(obj, "dim_state")
    q = _int_field(obj, "dim_input")
    r = _int_field(obj, "dim_output")
    A, B = _field(obj, "A"), _field(obj, "B")
    if not isinstance(A, list) or len(A) != d or not isinstance(B, list) or len(B) != d:
        raise InputError(f"A and B must each list {d} matrices")
    return Colligation(
        np.array([dec_matrix(Aj, p, p) for Aj in A]).reshape(d, p, p),
        np.array([dec_matrix(Bj, p, q) for Bj in B]).reshape(d, p, q),
        dec_matrix(_field(obj, "C"), r, p),
        dec_matrix(_field(obj, "D"), r, q),
    )


def pair_to_obj(pair: OutputPair) -> dict:
    return {
        "d": pair.d,
        "dim_state": pair.dim_state,
        "dim_output": pair.dim_output,
        "A": [enc_matrix(Aj) for Aj in pair.A],
        "C": enc_matrix(pair.C),
    }


def pair_from_obj(obj: dict) -> OutputPair:
    d = _int_field(obj, "d", 1)
    p = _int_field(obj, "dim_state")
    r = _int_field(obj, "dim_output")
    A = _field(obj, "A")
    if not isinstance(A, list) or len(A) != d:
        raise InputError(f"A must list {d} matrices")
    return OutputPair(dec_matrix(_field(obj, "C"), r, p),
                      np.array([dec_matrix(Aj, p, p) for Aj in A]).reshape(d, p, p))


def multiplier_to_obj(S: mindex.TruncatedSeries) -> dict:
    return {
        "d": S.d,
        "dim_input": S.shape[1],
        "dim_output": S.shape[0],
        "coefficients": [
            {"index": list(n), "value": enc_matrix(c)} for n, c in S.items() if np.any(c)
        ],
    }


def multiplier_from_obj(obj: dict) -> mindex.TruncatedSeries:
    d = _int_field(obj, "d", 1)
    q = _int_field(obj, "dim_input")
    r = _int_field(obj, "dim_output")
    coeffs = {}
    for entry in _field(obj, "coefficients"):
        n = mindex.check_index(_field(entry, "index"), d)
        if n in coeffs:
            raise InputError(f"index {n} listed twice")
        coeffs[n] = dec_matrix(_field(entry, "value"), r, q)
    cap = max((sum(n) for n in coeffs), default=0)
    return mindex.TruncatedSeries.build(d, cap, (r, q), coeffs)


def row_contraction_to_obj(T: RowContraction) -> dict:
    return {"d": T.d, "dim_state": T.dim, "T": [enc_matrix(Tj) for Tj in T.T]}


def row_contraction_from_obj(obj: dict) -> RowContraction:
    d = _int_field(obj, "d", 1)
    p = _int_field(obj, "dim_state")
    T = _field(obj, "T")
    if not isinstance(T, list) or len(T) != d:
        raise InputError(f"T must list {d} matrices")
    return RowContraction(np.array([dec_matrix(Tj, p, p) for Tj in T]).reshape(d, p, p))


def spec_to_obj(spec: InterpolationSpec) -> dict:
    obj: dict = {"variant": spec.variant, "d": spec.d}
    if spec.variant == "points":
        obj["conditions"] = [
            {"omega": enc_vector(w), "x": enc_vector(x)}
            for w, x in zip(spec.omegas, spec.functionals)
        ]
    elif spec.variant == "jet_chain":
        obj["omega"] = enc_vector(spec.omegas[0])
        obj["conditions"] = [{"x": enc_vector(x)} for x in spec.functionals]
    else:
        obj["omega"] = enc_vector(spec.omegas[0])
        obj["conditions"] = [
            {"index": list(n), "x": enc_vector(x)} for n, x in zip(spec.indices, spec.functionals)
        ]
    return obj


def spec_from_obj(obj: dict) -> InterpolationSpec:
    variant = _field(obj, "variant")
    d = _int_field(obj, "d", 1)
    conds = _field(obj, "conditions")
    if not isinstance(conds, list) or not conds:
        raise InputError("conditions must be a non-empty list")
    xs = [dec_vector(_field(c, "x")) for c in conds]
    r = xs[0].shape[0]
    if any(x.shape[0] != r for x in xs):
        raise InputError("all functionals must have the same length")
    if variant == "points":
        omegas = [dec_vector(_field(c, "omega"), d) for c in conds]
        return InterpolationSpec(variant, d, np.array(omegas), np.array(xs))
    omega = dec_vector(_field(obj, "omega"), d)
    if variant == "jet_chain":
        return InterpolationSpec(variant, d, omega[None, :], np.array(xs))
    if variant == "lower_inclusive":
        idx = [tuple(_field(c, "index")) for c in conds]
        return InterpolationSpec(variant, d, omega[None, :], np.array(xs), tuple(idx))
    raise InputError(f"unknown variant {variant!r}")
