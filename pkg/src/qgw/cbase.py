"""Commuting algebra pairs with a joint cyclic vector.

A base is a Hilbert space carrying two commuting unital *-algebras.  The
standard ones admit a vector cyclic for both algebras at once, with the
partner algebra equal to the commutant of the first; those reproduce, up to a
canonical unitary, the cyclic representation of the vector state.  All
comparisons here return residuals; throwing is reserved for malformed input.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionError, PreconditionError
from .linalg import (
    DEFAULT_TOL,
    AntilinearMap,
    Tolerance,
    dagger,
    mat_norm,
    rank,
    span,
    subspace_equal,
    subspace_residual,
    unitary_residual,
)
from .gns import GnsTriple, State, gns
from .staralg import StarAlgebra, commute_residual


class CStarBase:
    """Space with two commuting unital *-algebras and an optional joint
    cyclic vector."""

    def __init__(self, algebra: StarAlgebra, partner: StarAlgebra,
                 cyclic_vector: np.ndarray | None = None,
                 tol: Tolerance = DEFAULT_TOL):
        if algebra.space_dim != partner.space_dim:
            raise DimensionError("the two algebras must act on the same space")
        res = commute_residual(algebra.basis(), partner.basis())
        if res > tol.check:
            raise PreconditionError(
                f"algebras do not commute: residual {res:.3e}"
            )
        self.space_dim = algebra.space_dim
        self.algebra = algebra
        self.partner = partner
        self.tol = tol
        if cyclic_vector is not None:
            cyclic_vector = np.asarray(cyclic_vector, dtype=complex).reshape(-1)
            if cyclic_vector.shape != (self.space_dim,):
                raise DimensionError("cyclic vector has wrong length")
        self.cyclic_vector = cyclic_vector

    def orbit_rank(self, alg: StarAlgebra, v: np.ndarray) -> int:
        orbit = np.stack([b @ v for b in alg.basis()])
        return rank(orbit, self.tol)

    def is_bicyclic(self, v: np.ndarray) -> bool:
        return (
            self.orbit_rank(self.algebra, v) == self.space_dim
            and self.orbit_rank(self.partner, v) == self.space_dim
        )

    def standard_report(self) -> dict:
        """Residuals and rank defects for the standardness properties."""
        out = {}
        if self.cyclic_vector is None:
            out["has_cyclic_vector"] = 1.0
            return out
        out["has_cyclic_vector"] = 0.0
        v = self.cyclic_vector
        out["cyclic_defect"] = float(
            self.space_dim - self.orbit_rank(self.algebra, v)
        )
        out["partner_cyclic_defect"] = float(
            self.space_dim - self.orbit_rank(self.partner, v)
        )
        com = self.algebra.commutant()
        out["partner_is_commutant"] = subspace_residual(
            com.subspace, self.partner.subspace
        ) + abs(com.dim - self.partner.dim)
        return out

    def is_standard(self) -> bool:
        rep = self.standard_report()
        return all(v <= self.tol.check for v in rep.values())


def find_bicyclic(base: CStarBase, attempts: int = 16) -> np.ndarray | None:
    """Search for a joint cyclic vector; None if the attempts all fail."""
    n = base.space_dim
    for seed in range(attempts):
        gen = np.random.default_rng(seed)
        v = gen.standard_normal(n) + 1j * gen.standard_normal(n)
        v /= np.linalg.norm(v)
        if base.is_bicyclic(v):
            return v
    return None


def cbase_from_state(triple: GnsTriple) -> CStarBase:
    """The base carried by a cyclic representation: left algebra, right
    algebra, cyclic vector."""
    n = triple.dim
    left = StarAlgebra(
        n, span(triple.rep_stack(), n, n, triple.tol), triple.tol, certify=False
    )
    right = StarAlgebra(
        n, span(triple.rep_op_stack(), n, n, triple.tol), triple.tol,
        certify=False,
    )
    return CStarBase(left, right, triple.cyclic_vector, triple.tol)


class BaseEquivalence:
    """Canonical unitary between a standard base and the cyclic
    representation of its vector state."""

    def __init__(self, base: CStarBase, triple: GnsTriple, state: State,
                 unitary: np.ndarray, residuals: dict):
        self.base = base
        self.triple = triple
        self.state = state
        self.unitary = unitary
        self.residuals = residuals

    def ok(self, threshold: float) -> bool:
        return all(v <= threshold for v in self.residuals.values())


def base_equivalence(base: CStarBase) -> BaseEquivalence:
    """Rebuild the cyclic representation from the vector state and link it
    back to the base by a unitary.

    The unitary sends b zeta to rep(b) applied to the new cyclic vector; both
    families have the same Gram matrix, so the map is well defined and
    unitary whenever the base is standard.
    """
    if base.cyclic_vector is None:
        raise PreconditionError("base has no cyclic vector")
    zeta = base.cyclic_vector
    state = State.from_vector(base.algebra, zeta)
    triple = gns(base.algebra, state, base.tol)
    cols_base = np.stack([b @ zeta for b in base.algebra.basis()], axis=1)
    cols_rep = np.stack(
        [triple.rep(b) @ triple.cyclic_vector for b in base.algebra.basis()],
        axis=1,
    )
    u = cols_rep @ np.linalg.pinv(cols_base)
    res = {
        "unitary": unitary_residual(u),
        "maps_cyclic_vector": float(
            np.linalg.norm(u @ zeta - triple.cyclic_vector)
        ),
    }
    worst = 0.0
    for b in base.algebra.basis():
        worst = max(worst, mat_norm(u @ b @ dagger(u) - triple.rep(b)))
    res["conjugates_algebra"] = worst
    moved_partner = span(
        [u @ b @ dagger(u) for b in base.partner.basis()],
        triple.dim, triple.dim, base.tol,
    )
    op_span = span(triple.rep_op_stack(), triple.dim, triple.dim, base.tol)
    res["partner_matches_opposite"] = subspace_residual(moved_partner, op_span)
    return BaseEquivalence(base, triple, state, u, res)


class BaseConjugation:
    """Antiunitary of a standard base exchanging the two algebras."""

    def __init__(self, j: AntilinearMap, residuals: dict):
        self.j = j
        self.residuals = residuals


def modular_conjugation_of_base(base: CStarBase) -> BaseConjugation:
    """Polar part of b zeta -> b* zeta; conjugation exchanges the algebra
    with its partner, reversing products."""
    if base.cyclic_vector is None:
        raise PreconditionError("base has no cyclic vector")
    zeta = base.cyclic_vector
    cols = np.stack([b @ zeta for b in base.algebra.basis()], axis=1)
    cols_star = np.stack(
        [dagger(b) @ zeta for b in base.algebra.basis()], axis=1
    )
    k = cols_star @ np.conj(np.linalg.pinv(cols))
    j = AntilinearMap(k).polar_part()
    res = {
        "involution": j.involution_residual(),
        "antiunitary": j.antiunitary_residual(),
        "fixes_cyclic_vector": float(np.linalg.norm(j.apply(zeta) - zeta)),
    }
    mapped = [j.sandwich(dagger(b)) for b in base.algebra.basis()]
    worst = max(base.partner.residual(m) for m in mapped)
    res["lands_in_partner"] = worst
    mapped_span = span(mapped, base.space_dim, base.space_dim, base.tol)
    res["onto_partner"] = subspace_residual(mapped_span, base.partner.subspace)
    worst_anti = 0.0
    for a in base.algebra.basis():
        fa = j.sandwich(dagger(a))
        for b in base.algebra.basis():
            fab = j.sandwich(dagger(a @ b))
            worst_anti = max(
                worst_anti, mat_norm(fab - j.sandwich(dagger(b)) @ fa)
            )
    res["reverses_products"] = worst_anti
    return BaseConjugation(j, res)
