"""JSON layouts for matrices, algebras, states, bases, and factorizations.

A matrix is {"rows": n, "cols": m, "data": [[re, im], ...]} with the entries
row-major.  Doubles go through Python's shortest-roundtrip float formatting,
so decoding returns bit-identical values.  Composite objects reference each
other by section name inside one bundle document rather than by nesting.

Generator lists double as stored bases: every encoder writes an
HS-orthonormal family, and the decoder keeps that family, in order, as the
basis of the rebuilt object.  Stacks elsewhere in a bundle are aligned with
those generator orders, which is why decoding refuses non-orthonormal
generators instead of silently re-orthonormalizing.
"""
from __future__ import annotations

import json

import numpy as np

from .cbase import CStarBase
from .cfact import Factorization
from .errors import FormatError
from .gns import State
from .linalg import DEFAULT_TOL, OperatorSubspace, Tolerance, dagger, mat_norm
from .staralg import StarAlgebra

FORMAT_NAME = "qgw-bundle"
FORMAT_VERSION = 1


def canonical_dumps(obj) -> str:
    """Key-sorted, indented JSON with a trailing newline; rejects NaN and
    infinities so output stays strictly standard."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def encode_matrix(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise FormatError(f"matrix must be 2-dimensional, got shape {m.shape}")
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[float(x.real), float(x.imag)] for x in m.reshape(-1)],
    }


def decode_matrix(obj, where: str = "matrix") -> np.ndarray:
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object, got {type(obj).__name__}")
    try:
        rows, cols, data = obj["rows"], obj["cols"], obj["data"]
    except KeyError as exc:
        raise FormatError(f"{where}: missing key {exc}") from None
    if not isinstance(rows, int) or not isinstance(cols, int) \
            or rows < 0 or cols < 0:
        raise FormatError(f"{where}: rows/cols must be nonnegative integers")
    if not isinstance(data, list) or len(data) != rows * cols:
        raise FormatError(
            f"{where}: data must hold {rows * cols} entries, "
            f"got {len(data) if isinstance(data, list) else 'non-list'}"
        )
    out = np.empty(rows * cols, dtype=complex)
    for i, entry in enumerate(data):
        if (
            not isinstance(entry, list) or len(entry) != 2
            or not all(isinstance(x, (int, float)) for x in entry)
        ):
            raise FormatError(f"{where}: data[{i}] must be [re, im]")
        out[i] = complex(entry[0], entry[1])
    return out.reshape(rows, cols)


def decode_vector(obj, where: str = "vector") -> np.ndarray:
    m = decode_matrix(obj, where)
    if 1 not in m.shape and 0 not in m.shape:
        raise FormatError(f"{where}: expected a single row or column")
    return m.reshape(-1)


def encode_stack(mats) -> list:
    return [encode_matrix(m) for m in mats]


def decode_stack(obj, where: str = "stack") -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise FormatError(f"{where}: expected a nonempty list of matrices")
    mats = [decode_matrix(m, f"{where}[{i}]") for i, m in enumerate(obj)]
    shape = mats[0].shape
    for i, m in enumerate(mats):
        if m.shape != shape:
            raise FormatError(f"{where}[{i}]: shape {m.shape} differs from {shape}")
    return np.stack(mats)


def encode_algebra(alg: StarAlgebra) -> dict:
    return {
        "dim_H": int(alg.space_dim),
        "generators": encode_stack(alg.basis()),
        "unital": True,
    }


def decode_algebra(obj, where: str = "algebra",
                   tol: Tolerance = DEFAULT_TOL) -> StarAlgebra:
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object")
    for key in ("dim_H", "generators"):
        if key not in obj:
            raise FormatError(f"{where}: missing key '{key}'")
    n = obj["dim_H"]
    if not isinstance(n, int) or n <= 0:
        raise FormatError(f"{where}: dim_H must be a positive integer")
    gens = decode_stack(obj["generators"], f"{where}.generators")
    if gens.shape[1:] != (n, n):
        raise FormatError(
            f"{where}: generators are {gens.shape[1:]} but dim_H is {n}"
        )
    flat = gens.reshape(gens.shape[0], -1)
    gram = flat.conj() @ flat.T
    if mat_norm(gram - np.eye(gens.shape[0])) > tol.check:
        raise FormatError(
            f"{where}: generators must be HS-orthonormal; they double as the "
            "stored basis that stacks elsewhere in the bundle are aligned with"
        )
    return StarAlgebra(n, OperatorSubspace(n, n, gens), tol)


def encode_state(state: State) -> dict:
    """Density-matrix form; the density is the sum of conjugate-transposed
    basis elements weighted by the stored values."""
    d = np.zeros((state.algebra.space_dim,) * 2, dtype=complex)
    for v, b in zip(state.values, state.algebra.basis()):
        d += v * dagger(b)
    d = 0.5 * (d + dagger(d))
    return {"algebra": encode_algebra(state.algebra), "rho": encode_matrix(d)}


def decode_state(obj, where: str = "state",
                 tol: Tolerance = DEFAULT_TOL) -> State:
    if not isinstance(obj, dict) or "rho" not in obj or "algebra" not in obj:
        raise FormatError(f"{where}: expected keys 'algebra' and 'rho'")
    alg = decode_algebra(obj["algebra"], f"{where}.algebra", tol)
    density = decode_matrix(obj["rho"], f"{where}.rho")
    return State.from_density(alg, density)


def encode_base(base: CStarBase) -> dict:
    out = {
        "frak_H_dim": int(base.space_dim),
        "B": encode_algebra(base.algebra),
        "B_dag": encode_algebra(base.partner),
    }
    if base.cyclic_vector is not None:
        out["zeta"] = encode_matrix(base.cyclic_vector)
    return out


def decode_base(obj, where: str = "base",
                tol: Tolerance = DEFAULT_TOL) -> CStarBase:
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object")
    for key in ("frak_H_dim", "B", "B_dag"):
        if key not in obj:
            raise FormatError(f"{where}: missing key '{key}'")
    alg = decode_algebra(obj["B"], f"{where}.B", tol)
    partner = decode_algebra(obj["B_dag"], f"{where}.B_dag", tol)
    if alg.space_dim != obj["frak_H_dim"]:
        raise FormatError(f"{where}: frak_H_dim disagrees with B")
    zeta = None
    if obj.get("zeta") is not None:
        zeta = decode_vector(obj["zeta"], f"{where}.zeta")
    return CStarBase(alg, partner, zeta, tol)


def encode_factorization(fact: Factorization, base_ref: str) -> dict:
    return {
        "base": base_ref,
        "H_dim": int(fact.target_dim),
        "alpha_basis": encode_stack(fact.basis()),
        "flipped": bool(fact.flipped),
    }


def decode_factorization(obj, base: CStarBase, where: str = "factorization",
                         tol: Tolerance = DEFAULT_TOL,
                         certify: bool = True) -> Factorization:
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object")
    for key in ("H_dim", "alpha_basis"):
        if key not in obj:
            raise FormatError(f"{where}: missing key '{key}'")
    mats = decode_stack(obj["alpha_basis"], f"{where}.alpha_basis")
    if mats.shape[1:] != (obj["H_dim"], base.space_dim):
        raise FormatError(
            f"{where}: basis elements are {mats.shape[1:]}, expected "
            f"({obj['H_dim']}, {base.space_dim})"
        )
    flat = mats.reshape(mats.shape[0], -1)
    gram = flat.conj() @ flat.T
    if mat_norm(gram - np.eye(mats.shape[0])) > tol.check:
        raise FormatError(f"{where}: alpha_basis must be HS-orthonormal")
    sub = OperatorSubspace(int(obj["H_dim"]), base.space_dim, mats)
    return Factorization(
        base, int(obj["H_dim"]), sub,
        flipped=bool(obj.get("flipped", False)), tol=tol, certify=certify,
    )


def encode_morphism(image_stack, source_ref: str, target_ref: str) -> dict:
    """Linear map out of an algebra: column i is the flattened image of the
    i-th generator of the source section."""
    images = np.stack([np.asarray(m, dtype=complex) for m in image_stack])
    k, a, b = images.shape
    return {
        "matrix_on_basis": encode_matrix(images.reshape(k, a * b).T),
        "image_shape": [int(a), int(b)],
        "source": source_ref,
        "target": target_ref,
    }


def decode_morphism(obj, generator_stack, where: str = "morphism"):
    """Rebuild the map as a callable on the source algebra's span.

    generator_stack must be the decoded generators of the source section, in
    stored order; the returned callable accepts any element of their span.
    """
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object")
    for key in ("matrix_on_basis", "image_shape"):
        if key not in obj:
            raise FormatError(f"{where}: missing key '{key}'")
    mat = decode_matrix(obj["matrix_on_basis"], f"{where}.matrix_on_basis")
    shape = obj["image_shape"]
    if (
        not isinstance(shape, list) or len(shape) != 2
        or mat.shape[0] != shape[0] * shape[1]
    ):
        raise FormatError(f"{where}: image_shape disagrees with the matrix")
    gens = np.asarray(generator_stack, dtype=complex)
    if mat.shape[1] != gens.shape[0]:
        raise FormatError(
            f"{where}: {mat.shape[1]} columns for {gens.shape[0]} generators"
        )
    flat = gens.reshape(gens.shape[0], -1)

    def morphism(x):
        coeffs = flat.conj() @ np.asarray(x, dtype=complex).reshape(-1)
        return (mat @ coeffs).reshape(shape[0], shape[1])

    return morphism


def bundle_skeleton(kind: str, source: dict, tol: Tolerance) -> dict:
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": kind,
        "source": source,
        "tolerance": float(tol.eps),
    }


def check_bundle(obj, where: str = "bundle") -> dict:
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected a JSON object")
    if obj.get("format") != FORMAT_NAME:
        raise FormatError(
            f"{where}: format is {obj.get('format')!r}, expected '{FORMAT_NAME}'"
        )
    if obj.get("version") != FORMAT_VERSION:
        raise FormatError(
            f"{where}: version {obj.get('version')!r} not supported"
        )
    return obj
