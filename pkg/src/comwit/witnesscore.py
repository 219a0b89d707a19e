"""Witness operators: construction, evaluation and product-state validation.

A witness is stored as ``base - param * shift`` with the scalar offset
(``eps`` or ``k``) kept separate, so the same construction can be
re-evaluated at several offsets with :meth:`Witness.at`.

Decomposability is tagged by construction only. An operator assembled as
``P + Q^T`` with PSD ``P, Q`` and zero offset is decomposable; anything with
a positive offset is merely a candidate for non-decomposability (deciding
membership in the decomposable cone is not attempted).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import productopt
from .opcore import (
    TensorOperator,
    as_operator,
    eigh,
    identity,
    partial_transpose,
    projector,
    zero,
)
from .statezoo import max_entangled_vector

DECOMPOSABLE = "decomposable-by-construction"
NONDECOMPOSABLE_CANDIDATE = "nondecomposable-candidate"

KINDS = ("pt-eigvec", "edge", "w1", "tripartite", "schmidt", "projector-minus-eps")

WITNESS_TOL = 1e-8
TRACE_IMAG_TOL = 1e-10


class NotNPTError(ValueError):
    """Raised when a witness needs a negative partial-transpose eigenvector and there is none."""


@dataclass(frozen=True, eq=False)
class Witness:
    base: TensorOperator
    shift: Optional[TensorOperator]
    kind: str
    eps: Optional[float] = None
    k: Optional[float] = None
    schmidt_class: Optional[int] = None
    decomposability: str = NONDECOMPOSABLE_CANDIDATE
    subsystem: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown witness kind {self.kind!r}")
        if self.param > 0:
            w = np.linalg.eigvalsh(self.op.mat)
            if w[0] >= -1e-12 * max(1.0, np.abs(w).max()):
                raise ValueError(
                    f"{self.kind} operator has no negative eigenvalue at offset {self.param}; not a witness"
                )

    @property
    def param(self) -> float:
        if self.eps is not None:
            return self.eps
        if self.k is not None:
            return self.k
        return 0.0

    @property
    def op(self) -> TensorOperator:
        if self.shift is None or self.param == 0:
            return self.base
        return self.base - self.param * self.shift

    @property
    def dims(self):
        return self.base.dims

    def at(self, value: float) -> "Witness":
        """Same construction with the offset replaced by ``value``."""
        if self.shift is None:
            raise ValueError(f"{self.kind} witness has no adjustable offset")
        if self.eps is not None:
            return replace(self, eps=float(value))
        return replace(self, k=float(value))


@dataclass(frozen=True, eq=False)
class ValidationReport:
    min_product_expectation: float
    argmin: productopt.ProductVector
    is_def3_witness: bool
    restarts_used: int

    def to_json(self) -> dict:
        return {
            "min": self.min_product_expectation,
            "argmin_local_vectors": self.argmin.to_json(),
            "is_witness": self.is_def3_witness,
            "restarts": self.restarts_used,
        }


def _check_psd(op: TensorOperator, name: str):
    w = np.linalg.eigvalsh(op.mat)
    if w[0] < -1e-10 * max(1.0, np.abs(w).max()):
        raise ValueError(f"{name} must be positive semidefinite (min eigenvalue {w[0]:.3e})")


def witness_from_npt_eigvec(rho, subsystem: int = 0, tol: float = 1e-9) -> Witness:
    """``(|e><e|)^T`` for the normalized most-negative eigenvector of ``rho^T``."""
    rho = as_operator(rho)
    spectrum = eigh(partial_transpose(rho, subsystem))
    if spectrum.eigenvalues[0] >= -tol:
        raise NotNPTError(
            f"no NPT eigenvector: partial transpose minimum eigenvalue is {spectrum.eigenvalues[0]:.3e}"
        )
    e = spectrum.eigenvectors[:, 0]
    return pt_projector_witness(e, rho.dims, subsystem)


def pt_projector_witness(vec, dims, subsystem: int = 0) -> Witness:
    u = projector([vec], dims, normalize=True)
    return Witness(partial_transpose(u, subsystem), None, "pt-eigvec",
                   decomposability=DECOMPOSABLE, subsystem=subsystem)


def edge_witness(P, Q, eps: float, subsystem: int = 0) -> Witness:
    """``P + Q^T - eps I`` with ``P, Q`` PSD and ``eps >= 0``.

    ``Q=None`` gives the projector-minus-offset form ``P - eps I``.
    """
    P = as_operator(P)
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    _check_psd(P, "P")
    kind = "edge"
    if Q is None:
        Q = zero(P.dims)
        kind = "projector-minus-eps"
    Q = as_operator(Q)
    _check_psd(Q, "Q")
    base = P + partial_transpose(Q, subsystem)
    tag = DECOMPOSABLE if eps == 0 else NONDECOMPOSABLE_CANDIDATE
    return Witness(base, identity(P.dims), kind, eps=float(eps), decomposability=tag, subsystem=subsystem)


def projector_minus_eps(P, eps: float) -> Witness:
    return edge_witness(P, None, eps)


def w1_witness(Q, P, k: float, subsystem: int = 0) -> Witness:
    """``Q^T - k (I - P)`` with ``k > 0``; tagged ``tripartite`` on three or more factors."""
    Q, P = as_operator(Q), as_operator(P)
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    _check_psd(Q, "Q")
    _check_psd(P, "P")
    kind = "tripartite" if len(Q.dims) >= 3 else "w1"
    return Witness(partial_transpose(Q, subsystem), identity(P.dims) - P, kind, k=float(k),
                   decomposability=NONDECOMPOSABLE_CANDIDATE, subsystem=subsystem)


def schmidt_witness(m: int, k: int) -> Witness:
    """Class-``k`` Schmidt witness ``I - m/(k-1) |psi+><psi+|`` on ``m x m``."""
    if not 2 <= k <= m:
        raise ValueError(f"Schmidt class must satisfy 2 <= k <= m, got k={k}, m={m}")
    v = max_entangled_vector(m)
    P = projector([v], (m, m))
    op = identity((m, m)) - (m / (k - 1)) * P
    return Witness(op, None, "schmidt", schmidt_class=int(k), decomposability=NONDECOMPOSABLE_CANDIDATE)


def evaluate(W, rho) -> float:
    """``Tr(W rho)``; the imaginary residue must stay below ``1e-10``."""
    w = W.op if isinstance(W, Witness) else as_operator(W)
    r = as_operator(rho)
    if w.space != r.space:
        raise ValueError(f"space mismatch: witness {w.dims} vs state {r.dims}")
    tr = np.einsum("ij,ji->", w.mat, r.mat)
    if abs(tr.imag) > TRACE_IMAG_TOL:
        raise ArithmeticError(f"trace has imaginary part {tr.imag:.3e}; inputs not Hermitian?")
    return float(tr.real)


def validate_witness(W, restarts: int = productopt.DEFAULT_RESTARTS, seed: int = 0) -> ValidationReport:
    """Check ``Tr(W sigma) >= 0`` on separable states by minimizing over product vectors."""
    op = W.op if isinstance(W, Witness) else as_operator(W)
    res = productopt.min_product_expectation(op, restarts=restarts, seed=seed)
    return ValidationReport(res.value, res.argmin, res.value >= -WITNESS_TOL, restarts)


def realignment_diagnostic(rho) -> float:
    """Trace norm of the realigned matrix; a value above 1 certifies entanglement."""
    r = as_operator(rho)
    if len(r.dims) != 2:
        raise ValueError(f"realignment needs a bipartite state, got dims {r.dims}")
    da, db = r.dims
    t = np.asarray(r.mat).reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)
    return float(np.linalg.svd(t, compute_uv=False).sum())


def is_ppt(rho, subsystem: int = 0, tol: float = 1e-10) -> bool:
    return partial_transpose(rho, subsystem).min_eigenvalue() >= -tol

