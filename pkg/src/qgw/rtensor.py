"""Relative tensor products, realized as quotients of plain tensor products.

Both flavors produce the same kind of object: a Gram matrix on the plain
tensor product of the factors, together with the quotient it induces.  The
state flavor contracts the two actions through a cyclic representation; the
operator flavor contracts two factorizations through the base cyclic vector.
Keeping every space realized over the same plain tensor product is what makes
maps between differently bracketed iterates directly comparable.
"""
from __future__ import annotations

import numpy as np

from .errors import (
    DimensionError,
    NotWellDefinedError,
    PreconditionError,
)
from .cfact import Factorization
from .gns import GnsTriple
from .linalg import (
    DEFAULT_TOL,
    QuotientRealization,
    Tolerance,
    dagger,
    induced_between,
    mat_norm,
    span,
    unitary_residual,
)
from .staralg import rep_report


def gram_from_r_stacks(rh: np.ndarray, rk: np.ndarray) -> np.ndarray:
    """Shared Gram kernel.

    rh[c] is the reconstruction operator of the c-th left basis vector,
    rk[b] that of the b-th right basis vector; both map a common middle
    space into their factor.  The entry at ((a, b), (a', b')) is
    sum_t rh[a'][a, t] conj(rk[b][b', t]).
    """
    g4 = np.einsum("cat,bdt->abcd", rh, np.conj(rk))
    n = rh.shape[0] * rk.shape[0]
    return g4.reshape(n, n)


class RelativeTensorSpace:
    """Quotient of a plain tensor product under a relative Gram matrix."""

    def __init__(self, flavor: str, plain_dims: tuple, gram: np.ndarray,
                 tol: Tolerance = DEFAULT_TOL, meta: dict | None = None):
        total = int(np.prod(plain_dims))
        if gram.shape != (total, total):
            raise DimensionError("gram does not match the plain dimensions")
        self.flavor = flavor
        self.plain_dims = tuple(int(d) for d in plain_dims)
        self.quotient = QuotientRealization(gram, tol)
        self.tol = tol
        self.meta = meta or {}

    @property
    def dim(self) -> int:
        return self.quotient.dim

    @property
    def plain_dim(self) -> int:
        return self.quotient.plain_dim

    @property
    def gram(self) -> np.ndarray:
        return self.quotient.gram

    @property
    def class_map(self) -> np.ndarray:
        return self.quotient.class_map

    @property
    def section(self) -> np.ndarray:
        return self.quotient.section

    @property
    def support(self) -> np.ndarray:
        return self.quotient.support

    def to_quotient(self, v: np.ndarray) -> np.ndarray:
        return self.quotient.to_quotient(v)

    def pairing(self, v: np.ndarray, w: np.ndarray) -> complex:
        """Relative inner product of two plain tensors."""
        return complex(np.conj(v) @ self.gram @ w)

    def lift(self, ops, require: bool = True):
        """Descend a leg-wise operator tuple to the quotient.

        ops has one square matrix per plain factor (identity legs may be
        given as None).  Returns (matrix, residual); residual measures
        failure to preserve the null space.
        """
        ops = list(ops)
        if len(ops) != len(self.plain_dims):
            raise DimensionError("one operator per tensor leg required")
        plain = np.eye(1, dtype=complex)
        for op, d in zip(ops, self.plain_dims):
            if op is None:
                op = np.eye(d)
            op = np.asarray(op, dtype=complex)
            if op.shape != (d, d):
                raise DimensionError(f"leg operator has shape {op.shape}, wants {(d, d)}")
            plain = np.kron(plain, op)
        mat, res = self.quotient.induced(plain)
        if require and res > self.tol.check:
            raise NotWellDefinedError(
                f"operator does not descend to the quotient: residual {res:.3e}"
            )
        return mat, res

    def lifted_rep(self, stack, leg: int, require: bool = True):
        """Lift a one-leg family; returns (stack on the quotient, worst
        residual)."""
        mats = []
        worst = 0.0
        for x in np.asarray(stack, dtype=complex):
            ops = [None] * len(self.plain_dims)
            ops[leg] = x
            m, r = self.lift(ops, require=require)
            mats.append(m)
            worst = max(worst, r)
        return np.stack(mats), worst


def rtp_state(triple: GnsTriple, rho_stack, sigma_stack, *,
              over_opposite: bool = False,
              tol: Tolerance | None = None) -> RelativeTensorSpace:
    """State-flavor relative tensor product of two represented spaces.

    rho_stack gives the right action on the left factor (a representation of
    the opposite algebra, values on underlying basis elements); sigma_stack
    the left action on the right factor.  over_opposite builds instead over
    the opposite algebra with the same cyclic data, so the roles of the two
    canonical actions swap.
    """
    tol = tol or triple.tol
    rho_stack = np.asarray(rho_stack, dtype=complex)
    sigma_stack = np.asarray(sigma_stack, dtype=complex)
    alg = triple.algebra
    rep_left = rep_report(alg, rho_stack, anti=not over_opposite)
    rep_right = rep_report(alg, sigma_stack, anti=over_opposite)
    for name, rep in (("left", rep_left), ("right", rep_right)):
        bad = {k: v for k, v in rep.items() if v > tol.check}
        if bad:
            raise PreconditionError(f"{name} action is not a *-representation: {bad}")
    zeta = triple.cyclic_vector
    cols_rep = np.stack([triple.rep(b) @ zeta for b in alg.basis()], axis=1)
    cols_op = np.stack([triple.rep_op(b) @ zeta for b in alg.basis()], axis=1)
    z_left = cols_rep if over_opposite else cols_op
    z_right = cols_op if over_opposite else cols_rep
    z_left_inv = np.linalg.inv(z_left)
    z_right_inv = np.linalg.inv(z_right)
    nh = rho_stack.shape[1]
    nk = sigma_stack.shape[1]
    # reconstruction operators of the basis vectors of each factor
    # rh[c] maps the cyclic representation into the left factor
    rh = np.einsum("ihc,it->cht", rho_stack, z_left_inv)
    rk = np.einsum("ikb,it->bkt", sigma_stack, z_right_inv)
    gram = gram_from_r_stacks(rh, rk)
    meta = {
        "triple": triple,
        "rho_stack": rho_stack,
        "sigma_stack": sigma_stack,
        "over_opposite": over_opposite,
        "r_left": rh,
        "r_right": rk,
    }
    return RelativeTensorSpace("state", (nh, nk), gram, tol, meta)


def rtp_cstar(left_fact: Factorization, right_fact: Factorization,
              tol: Tolerance | None = None) -> RelativeTensorSpace:
    """Operator-flavor relative tensor product of two factorized spaces.

    The left factorization's products must land in the base algebra and the
    right one's in the partner; their reconstruction operators contract
    through the base cyclic vector.
    """
    tol = tol or left_fact.tol
    if left_fact.base is not right_fact.base:
        if (
            left_fact.base.space_dim != right_fact.base.space_dim
            or not left_fact.base.algebra.equal(right_fact.base.algebra)
            or not left_fact.base.partner.equal(right_fact.base.partner)
        ):
            raise PreconditionError("factorizations live over different bases")
    if left_fact.flipped or not right_fact.flipped:
        raise PreconditionError(
            "left factorization must pair with the algebra, right with the partner"
        )
    nh, nk = left_fact.target_dim, right_fact.target_dim
    rh = np.stack([left_fact.r_operator(np.eye(nh)[a]) for a in range(nh)])
    rk = np.stack([right_fact.r_operator(np.eye(nk)[b]) for b in range(nk)])
    gram = gram_from_r_stacks(rh, rk)
    meta = {
        "left_fact": left_fact,
        "right_fact": right_fact,
        "base": left_fact.base,
        "r_left": rh,
        "r_right": rk,
    }
    return RelativeTensorSpace("cstar", (nh, nk), gram, tol, meta)


def ket_left(space: RelativeTensorSpace, xi: np.ndarray) -> np.ndarray:
    """Insertion of a left-factorization element: right factor -> quotient."""
    if space.flavor != "cstar":
        raise PreconditionError("kets need the operator flavor")
    base = space.meta["base"]
    col = (np.asarray(xi, dtype=complex) @ base.cyclic_vector).reshape(-1, 1)
    nk = space.plain_dims[1]
    return space.class_map @ np.kron(col, np.eye(nk))


def ket_right(space: RelativeTensorSpace, eta: np.ndarray) -> np.ndarray:
    """Insertion of a right-factorization element: left factor -> quotient."""
    if space.flavor != "cstar":
        raise PreconditionError("kets need the operator flavor")
    base = space.meta["base"]
    col = (np.asarray(eta, dtype=complex) @ base.cyclic_vector).reshape(-1, 1)
    nh = space.plain_dims[0]
    return space.class_map @ np.kron(np.eye(nh), col)


def ket_factorization(space: RelativeTensorSpace, ket_fact: Factorization,
                      tail_fact: Factorization, leg: int, flipped: bool,
                      tol: Tolerance | None = None) -> Factorization:
    """Factorization of the operator-flavor quotient spanned by insertions
    of one factorization composed with elements of another.

    leg selects which plain factor the insertions fill; the tail supplies the
    maps from the base space into the remaining factor.  The result is
    certified like any factorization.
    """
    if space.flavor != "cstar":
        raise PreconditionError("insertion factorizations need the operator flavor")
    tol = tol or space.tol
    base = space.meta["base"]
    insert = ket_left if leg == 0 else ket_right
    mats = [
        insert(space, x) @ t
        for x in ket_fact.basis()
        for t in tail_fact.basis()
    ]
    sub = span(mats, space.dim, base.space_dim, tol)
    return Factorization(base, space.dim, sub, flipped=flipped, tol=tol)


def nest_left(inner: RelativeTensorSpace,
              pair: RelativeTensorSpace) -> RelativeTensorSpace:
    """Three-factor space bracketed as (inner) tensored with a new right leg.

    pair must be built over (inner's quotient, new leg); the result is
    realized over the full plain tensor product of all three factors.
    """
    if len(pair.plain_dims) != 2 or pair.plain_dims[0] != inner.dim:
        raise DimensionError("pair space must have the inner quotient as left leg")
    right = pair.plain_dims[1]
    m = np.kron(inner.class_map, np.eye(right))
    gram = dagger(m) @ pair.gram @ m
    return RelativeTensorSpace(
        pair.flavor, inner.plain_dims + (right,), gram, inner.tol,
        {"inner": inner, "pair": pair, "bracket": "left"},
    )


def nest_right(inner: RelativeTensorSpace,
               pair: RelativeTensorSpace) -> RelativeTensorSpace:
    """Three-factor space bracketed as a new left leg tensored with (inner)."""
    if len(pair.plain_dims) != 2 or pair.plain_dims[1] != inner.dim:
        raise DimensionError("pair space must have the inner quotient as right leg")
    left = pair.plain_dims[0]
    m = np.kron(np.eye(left), inner.class_map)
    gram = dagger(m) @ pair.gram @ m
    return RelativeTensorSpace(
        pair.flavor, (left,) + inner.plain_dims, gram, inner.tol,
        {"inner": inner, "pair": pair, "bracket": "right"},
    )


def descend(src: RelativeTensorSpace, dst: RelativeTensorSpace,
            plain_map: np.ndarray):
    """Induce a plain-space map between two quotients of the same plain
    space; returns (matrix, well-definedness residual)."""
    if src.plain_dim != plain_map.shape[1] or dst.plain_dim != plain_map.shape[0]:
        raise DimensionError("plain map does not connect the two spaces")
    return induced_between(src.quotient, dst.quotient, plain_map)


class PhiResult:
    """Unitary comparison between the two flavors on the same plain space."""

    def __init__(self, matrix: np.ndarray, residuals: dict):
        self.matrix = matrix
        self.residuals = residuals

    def ok(self, threshold: float) -> bool:
        return all(v <= threshold for v in self.residuals.values())


def phi_unitary(state_space: RelativeTensorSpace,
                cstar_space: RelativeTensorSpace) -> PhiResult:
    """Canonical map from the state-flavor space to the operator-flavor
    space over the same plain tensor product.

    Sends the class of a plain tensor to the class of the same plain tensor.
    When the actions are linked through the base, the two Gram matrices
    coincide and the map is unitary.
    """
    if state_space.flavor != "state" or cstar_space.flavor != "cstar":
        raise PreconditionError("arguments must be the two flavors in order")
    if state_space.plain_dims != cstar_space.plain_dims:
        raise PreconditionError("flavors realized over different plain spaces")
    xi = cstar_space.class_map @ state_space.section
    res = {
        "unitary": unitary_residual(xi) if state_space.dim == cstar_space.dim
        else float("inf"),
        "dimension_defect": float(abs(state_space.dim - cstar_space.dim)),
        "transports_classes": mat_norm(
            xi @ state_space.class_map - cstar_space.class_map
        ),
        "gram_match": mat_norm(state_space.gram - cstar_space.gram),
    }
    return PhiResult(xi, res)
