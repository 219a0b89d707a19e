"""Common witnesses for pairs of entangled states.

A witness negative on two states is negative on every convex combination
of them, by linearity of the trace. This module builds such witnesses from
spectral data shared by the two states:

* a shared negative eigenvector of the partial transposes,
* shared kernel vectors of the states and of their partial transposes
  (edge-state constructions), and
* a shared Schmidt-number witness class for pure inputs.

It also scans the segment between two states and classifies each point as
PPT or NPT.

Only the sufficient conditions above are searched. A broader joint search
(a vector on which both partial-transpose forms are negative without being
a shared eigenvector) is a possible extension and is not done here.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import productopt
from .opcore import (
    DEFAULT_ANGLE_TOL,
    DEFAULT_ZERO_TOL,
    DensityState,
    Subspace,
    TensorOperator,
    as_operator,
    identity,
    kernel_basis,
    negative_eigenspace,
    partial_transpose,
    projector,
    schmidt_rank,
    subspace_intersection,
    zero,
)
from .statezoo import mix2
from .witnesscore import (
    ValidationReport,
    Witness,
    edge_witness,
    evaluate,
    pt_projector_witness,
    schmidt_witness,
    validate_witness,
    w1_witness,
)

DETECT_TOL = 1e-10
PT_TAG_TOL = 1e-10
DEGENERATE_BOUND = 1e-9

DECOMPOSABLE_SUFFICIENT = "decomposable-sufficient"
NONDECOMPOSABLE_REQUIRED = "nondecomposable-required"


@dataclass(frozen=True, eq=False)
class CommonWitnessResult:
    witness: Optional[Witness]
    method: str  # theorem1 | theorem2 | theorem3 | schmidt | none-found
    evidence: tuple[float, ...]
    intersection_dim: int
    validation: Optional[ValidationReport] = None
    bound: Optional[productopt.OptResult] = None
    flags: tuple[str, ...] = ()
    details: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.witness is not None


def _detected(evidence) -> bool:
    return len(evidence) > 0 and all(t < -DETECT_TOL for t in evidence)


# --- shared negative partial-transpose eigenvector ------------------------------


def common_npt_witness(rho1, rho2, subsystem: int = 0, tol: float = DEFAULT_ZERO_TOL) -> CommonWitnessResult:
    """Witness ``(|eta><eta|)^T`` with ``eta`` in both negative PT eigenspaces.

    ``eta`` is the unit vector of the intersection minimizing the sum of the
    two partial-transpose forms. An empty intersection gives ``none-found``;
    the condition is sufficient only, so that says nothing about existence.
    """
    r1, r2 = as_operator(rho1), as_operator(rho2)
    pt1, pt2 = partial_transpose(r1, subsystem), partial_transpose(r2, subsystem)
    s1, s2 = negative_eigenspace(pt1, tol), negative_eigenspace(pt2, tol)
    inter = subspace_intersection(s1, s2)
    details = {"neg_dim_1": s1.dim, "neg_dim_2": s2.dim}
    if inter.dim == 0:
        return CommonWitnessResult(None, "none-found", (), 0, details=details)
    b = inter.basis
    red = b.conj().T @ (pt1.mat + pt2.mat) @ b
    _, v = np.linalg.eigh(0.5 * (red + red.conj().T))
    eta = b @ v[:, 0]
    W = pt_projector_witness(eta, r1.dims, subsystem)
    evidence = (evaluate(W, r1), evaluate(W, r2))
    if not _detected(evidence):
        return CommonWitnessResult(None, "none-found", evidence, inter.dim, flags=("not-detected",), details=details)
    details["eta"] = eta
    return CommonWitnessResult(W, "theorem1", evidence, inter.dim, details=details)


# --- shared kernels (edge states) ------------------------------------------------


def rref_basis(sub: Subspace, snap: float = 1e-9) -> list[np.ndarray]:
    """Reduced row-echelon basis with unit pivots (unnormalized).

    For subspaces spanned by integer-coefficient vectors such as
    ``|01> + |12>`` this recovers those vectors; entries within ``snap`` of
    an integer are rounded so hand-written matrices reproduce exactly.
    """
    if sub.dim == 0:
        return []
    m = np.array(sub.basis.T, dtype=complex)
    rows, cols = m.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = r + int(np.argmax(np.abs(m[r:, c])))
        if abs(m[piv, c]) < 1e-10:
            continue
        m[[r, piv]] = m[[piv, r]]
        m[r] /= m[r, c]
        for i in range(rows):
            if i != r:
                m[i] -= m[i, c] * m[r]
        r += 1
    for part in (m.real, m.imag):
        near = np.abs(part - np.round(part)) < snap
        part[near] = np.round(part[near])
    out = m.real + 1j * m.imag
    return [out[i] for i in range(r)]


def _shared_projector(sub: Subspace, paper_mode: bool) -> TensorOperator:
    if sub.dim == 0:
        return zero(sub.space.dims)
    if paper_mode:
        return projector(rref_basis(sub), sub.space.dims, normalize=False)
    return sub.projector()


def common_edge_witness(d1, d2, subsystem: int = 0, offset: Optional[float] = None,
                        paper_mode: bool = False, restarts: int = productopt.DEFAULT_RESTARTS,
                        seed: int = 0, tol: float = DEFAULT_ZERO_TOL,
                        validate: bool = True) -> CommonWitnessResult:
    """Witness built from the kernels shared by two (edge) states.

    ``P`` projects onto ``ker(d1) & ker(d2)`` and ``Q`` onto
    ``ker(d1^T) & ker(d2^T)``. On two factors the witness is
    ``P + Q^T - eps I`` (method ``theorem2``); on three or more it is
    ``Q^T - k (I - P)`` (method ``theorem3``).

    Parameters
    ----------
    offset : float, optional
        ``eps`` or ``k``. When omitted the largest admissible value is
        computed over product vectors (``inf <P + Q^T>`` or
        ``min <Q^T>/<I - P>``); if that bound is not positive the
        construction degenerates and no witness is returned (flag
        ``offset-bound-degenerate``).
    paper_mode : bool
        Use unnormalized row-echelon kernel vectors instead of orthogonal
        projectors, matching hand-written integer matrices.
    """
    d1, d2 = as_operator(d1), as_operator(d2)
    if d1.space != d2.space:
        raise ValueError(f"space mismatch: {d1.dims} vs {d2.dims}")
    dims = d1.dims
    ker = subspace_intersection(kernel_basis(d1, tol), kernel_basis(d2, tol), DEFAULT_ANGLE_TOL)
    pker = subspace_intersection(
        kernel_basis(partial_transpose(d1, subsystem), tol),
        kernel_basis(partial_transpose(d2, subsystem), tol),
        DEFAULT_ANGLE_TOL,
    )
    details = {"kernel_dim": ker.dim, "pt_kernel_dim": pker.dim,
               "kernel_basis": ker.basis, "pt_kernel_basis": pker.basis}
    method = "theorem2" if len(dims) == 2 else "theorem3"
    if ker.dim == 0 and pker.dim == 0:
        return CommonWitnessResult(None, "none-found", (), 0, details=details)

    P = _shared_projector(ker, paper_mode)
    Q = _shared_projector(pker, paper_mode)
    details["P"], details["Q"] = P, Q
    flags = []
    bound = None
    if method == "theorem2":
        base = P + partial_transpose(Q, subsystem)
        if offset is None:
            bound = productopt.min_product_expectation(base, restarts=restarts, seed=seed)
    else:
        base = partial_transpose(Q, subsystem)
        if offset is None:
            bound = productopt.min_ratio_product(base, identity(dims) - P, restarts=restarts, seed=seed)
    if offset is None:
        offset = bound.value
        if offset <= DEGENERATE_BOUND:
            flags.append("offset-bound-degenerate")
            return CommonWitnessResult(None, "none-found", (), ker.dim, bound=bound,
                                       flags=tuple(flags), details=details)

    if method == "theorem2":
        W = edge_witness(P, Q, offset, subsystem)
    else:
        W = w1_witness(Q, P, offset, subsystem)
    evidence = (evaluate(W, d1), evaluate(W, d2))
    validation = validate_witness(W, restarts=restarts, seed=seed) if validate else None
    if validation is not None and not validation.is_def3_witness:
        flags.append("negative-on-product-state")
    if not _detected(evidence):
        flags.append("not-detected")
        return CommonWitnessResult(None, "none-found", evidence, ker.dim, validation, bound,
                                   tuple(flags), details)
    return CommonWitnessResult(W, method, evidence, ker.dim, validation, bound, tuple(flags), details)


# --- Schmidt-number witnesses ----------------------------------------------------


def _pure_vector(rho: TensorOperator, tol: float = 1e-9):
    w, v = np.linalg.eigh(rho.mat)
    if np.sum(w > tol) != 1:
        return None
    return v[:, -1]


def common_schmidt_witness(states: Sequence, k: Optional[int] = None, m: Optional[int] = None) -> CommonWitnessResult:
    """Common class-``k`` witness ``I - m/(k-1) P`` for states on ``m x m``.

    Without ``k`` all inputs must be pure and the class is the smallest
    Schmidt rank among them: a common witness cannot have a class above
    the Schmidt number of any state it detects. A caller-supplied ``k``
    (needed for mixed inputs) is refused with ``none-found`` when it
    exceeds the Schmidt rank of a pure input.

    When found, every convex combination of the inputs has Schmidt number
    at least ``k``.
    """
    ops = [as_operator(s) for s in states]
    if not ops:
        raise ValueError("need at least one state")
    dims = ops[0].dims
    if len(dims) != 2 or dims[0] != dims[1] or any(o.dims != dims for o in ops):
        raise ValueError(f"states must share an m x m space, got {[o.dims for o in ops]}")
    if m is None:
        m = dims[0]
    elif m != dims[0]:
        raise ValueError(f"m={m} does not match dims {dims}")
    ranks = []
    for o in ops:
        v = _pure_vector(o)
        ranks.append(None if v is None else schmidt_rank(v, dims))
    pure_ranks = [r for r in ranks if r is not None]
    details = {"schmidt_ranks": ranks}
    if k is None:
        if len(pure_ranks) != len(ranks):
            raise ValueError("mixed input: the Schmidt class must be supplied")
        k = min(ranks)
    if k < 2:
        raise ValueError(f"Schmidt class must be >= 2, got {k}")
    if pure_ranks and k > min(pure_ranks):
        return CommonWitnessResult(None, "none-found", (), 0, flags=("class-exceeds-schmidt-rank",),
                                   details=details)
    W = schmidt_witness(m, k)
    evidence = tuple(evaluate(W, o) for o in ops)
    if not _detected(evidence):
        return CommonWitnessResult(None, "none-found", evidence, 0, flags=("not-detected",), details=details)
    return CommonWitnessResult(W, "schmidt", evidence, 0, details=details)


# --- segment scans ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ScanReport:
    lambda_grid: np.ndarray
    classification: tuple[str, ...]
    min_pt_eigenvalue: np.ndarray
    detected_by: Optional[np.ndarray] = None
    params: dict = field(default_factory=dict)

    def boundaries(self) -> list[tuple[float, float, str, str]]:
        """Grid intervals where the tag changes, as ``(lam_left, lam_right, left_tag, right_tag)``."""
        out = []
        for i in range(len(self.classification) - 1):
            a, b = self.classification[i], self.classification[i + 1]
            if a != b:
                out.append((float(self.lambda_grid[i]), float(self.lambda_grid[i + 1]), a, b))
        return out

    def to_rows(self) -> list[dict]:
        rows = []
        for i, lam in enumerate(self.lambda_grid):
            rows.append({
                "lambda": float(lam),
                "min_pt_eig": float(self.min_pt_eigenvalue[i]),
                "tag": self.classification[i],
                "witness_trace": None if self.detected_by is None else float(self.detected_by[i]),
            })
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["lambda", "min_pt_eig", "tag", "witness_trace"])
        for r in self.to_rows():
            wt = "" if r["witness_trace"] is None else repr(r["witness_trace"])
            writer.writerow([repr(r["lambda"]), repr(r["min_pt_eig"]), r["tag"], wt])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "params": self.params,
            "rows": self.to_rows(),
            "boundaries": [list(b) for b in self.boundaries()],
        }


def pt_tag(min_eig: float) -> str:
    return "NPT" if min_eig < -PT_TAG_TOL else "PPT"


def lambda_scan(rho1: DensityState, rho2: DensityState, grid_points: int = 101, subsystem: int = 1,
                witness=None, params: Optional[dict] = None) -> ScanReport:
    """Classify ``lam rho1 + (1 - lam) rho2`` on a uniform grid over ``[0, 1]``.

    The default partial transpose acts on the second factor.
    """
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    if rho1.space != rho2.space:
        raise ValueError(f"space mismatch: {rho1.dims} vs {rho2.dims}")
    grid = np.linspace(0.0, 1.0, grid_points)
    mins = np.empty(grid_points)
    traces = None if witness is None else np.empty(grid_points)
    for i, lam in enumerate(grid):
        mixed = mix2(rho1, rho2, float(lam))
        mins[i] = partial_transpose(mixed, subsystem).min_eigenvalue()
        if traces is not None:
            traces[i] = evaluate(witness, mixed)
    tags = tuple(pt_tag(x) for x in mins)
    return ScanReport(grid, tags, mins, traces, dict(params or {}))


@dataclass(frozen=True)
class Advice:
    tag: str
    ppt: tuple[bool, bool]
    caveats: tuple[str, ...] = ()


def decomposability_advice(rho1: DensityState, rho2: DensityState, subsystem: int = 1) -> Advice:
    """Whether a decomposable witness can serve as a common witness.

    Both NPT: a decomposable witness suffices. A PPT input that is claimed
    entangled (``claimed_entangled``) forces a non-decomposable witness,
    because decomposable witnesses never detect PPT states. A PPT input
    without that claim does not trigger the rule; a caveat records that it
    is not detected by partial transposition at all.
    """
    ppt = tuple(partial_transpose(r, subsystem).min_eigenvalue() >= -PT_TAG_TOL for r in (rho1, rho2))
    caveats = []
    for i, (r, p) in enumerate(zip((rho1, rho2), ppt), start=1):
        if p and r.claimed_entangled:
            caveats.append(f"state {i} is PPT; its entanglement rests on provenance ({r.label})")
        elif p:
            caveats.append(f"state {i} is PPT and not NPT-detected")
    needs_nd = any(p and r.claimed_entangled for r, p in zip((rho1, rho2), ppt))
    tag = NONDECOMPOSABLE_REQUIRED if needs_nd else DECOMPOSABLE_SUFFICIENT
    return Advice(tag, ppt, tuple(caveats))
