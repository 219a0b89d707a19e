"""Tensor-structured Hermitian operator algebra.

Operators are dense complex matrices tagged with the local dimensions of
their tensor factors. Basis ordering is big-endian: the multi-index
``(i_1, ..., i_n)`` maps to ``sum_k i_k * prod_{l>k} d_l``, so the first
factor is the most significant digit (``|01>`` on ``[3, 3]`` is index 1,
``|10>`` is index 3).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

HERMITIAN_RTOL = 1e-12
TRACE_ATOL = 1e-12
PSD_ATOL = 1e-10
DEFAULT_ZERO_TOL = 1e-9
DEFAULT_ANGLE_TOL = 1e-8


@dataclass(frozen=True)
class TensorSpace:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) == 0:
            raise ValueError("a tensor space needs at least one factor")
        if any(d < 2 for d in dims):
            raise ValueError(f"every local dimension must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    @property
    def nfactors(self) -> int:
        return len(self.dims)

    def basis_index(self, digits: Sequence[int]) -> int:
        """Flat index of the product basis vector ``|digits>``."""
        if len(digits) != self.nfactors:
            raise ValueError(f"expected {self.nfactors} digits, got {len(digits)}")
        idx = 0
        for i, d in zip(digits, self.dims):
            if not 0 <= i < d:
                raise ValueError(f"digit {i} out of range for local dimension {d}")
            idx = idx * d + i
        return idx

    def ket(self, *digits: int) -> np.ndarray:
        v = np.zeros(self.total, dtype=complex)
        v[self.basis_index(digits)] = 1.0
        return v


def _as_space(space) -> TensorSpace:
    if isinstance(space, TensorSpace):
        return space
    return TensorSpace(tuple(space))


@dataclass(frozen=True, eq=False)
class TensorOperator:
    """Hermitian matrix acting on a :class:`TensorSpace`.

    Construction rejects matrices whose anti-Hermitian part exceeds
    ``1e-12 * max|M|``. Arithmetic (``+``, ``-``, scalar ``*``) returns new
    operators on the same space.
    """

    space: TensorSpace
    mat: np.ndarray

    def __post_init__(self):
        space = _as_space(self.space)
        mat = np.array(self.mat, dtype=complex)
        if mat.shape != (space.total, space.total):
            raise ValueError(
                f"matrix shape {mat.shape} does not match dims {space.dims} "
                f"(expected {space.total}x{space.total})"
            )
        asym = hermitian_defect(mat)
        scale = np.abs(mat).max() if mat.size else 0.0
        if asym > HERMITIAN_RTOL * scale:
            raise ValueError(f"operator is not Hermitian (max |M - M^dag| = {asym:.3e})")
        mat.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "mat", mat)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.space.dims

    def _check_same_space(self, other: "TensorOperator"):
        if other.space != self.space:
            raise ValueError(f"space mismatch: {self.dims} vs {other.dims}")

    def __add__(self, other):
        other = as_operator(other)
        self._check_same_space(other)
        return TensorOperator(self.space, self.mat + other.mat)

    def __sub__(self, other):
        other = as_operator(other)
        self._check_same_space(other)
        return TensorOperator(self.space, self.mat - other.mat)

    def __mul__(self, c):
        c = float(np.real_if_close(c))
        return TensorOperator(self.space, c * self.mat)

    __rmul__ = __mul__

    def __neg__(self):
        return TensorOperator(self.space, -self.mat)

    def trace(self) -> float:
        return float(np.real(np.trace(self.mat)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.mat)[0])


@dataclass(frozen=True, eq=False)
class DensityState:
    """Unit-trace positive semidefinite operator.

    ``claimed_entangled`` records whether the constructing family is known
    (by a theorem or by the family's provenance) to be entangled.
    It is metadata only and is never verified here.
    """

    op: TensorOperator
    label: str = ""
    claimed_entangled: bool = False

    def __post_init__(self):
        tr = self.op.trace()
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        lmin = self.op.min_eigenvalue()
        if lmin < -PSD_ATOL:
            raise ValueError(f"density matrix is not PSD (min eigenvalue {lmin:.3e})")

    @property
    def space(self) -> TensorSpace:
        return self.op.space

    @property
    def dims(self) -> tuple[int, ...]:
        return self.op.space.dims

    @property
    def mat(self) -> np.ndarray:
        return self.op.mat


@dataclass(frozen=True, eq=False)
class Subspace:
    """Orthonormal basis (columns of ``basis``) of a subspace."""

    space: TensorSpace
    basis: np.ndarray
    tol: float = DEFAULT_ZERO_TOL

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=complex).reshape(self.space.total, -1)
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> TensorOperator:
        b = self.basis
        return TensorOperator(self.space, b @ b.conj().T)

    def contains(self, vec: np.ndarray, atol: float = 1e-9) -> bool:
        """True if ``vec`` (any norm) lies in the subspace up to ``atol`` relative residual."""
        vec = np.asarray(vec, dtype=complex)
        nrm = np.linalg.norm(vec)
        if nrm == 0:
            return True
        v = vec / nrm
        residual = v - self.basis @ (self.basis.conj().T @ v)
        return bool(np.linalg.norm(residual) <= atol)


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def hermitian_defect(mat: np.ndarray) -> float:
    mat = np.asarray(mat)
    if mat.size == 0:
        return 0.0
    return float(np.abs(mat - mat.conj().T).max())


def as_operator(x, dims=None) -> TensorOperator:
    """Coerce a :class:`DensityState`, :class:`TensorOperator` or array to an operator."""
    if isinstance(x, TensorOperator):
        return x
    if isinstance(x, DensityState):
        return x.op
    if dims is None:
        raise TypeError("raw arrays need explicit dims")
    return TensorOperator(_as_space(dims), x)


def identity(dims) -> TensorOperator:
    space = _as_space(dims)
    return TensorOperator(space, np.eye(space.total, dtype=complex))


def zero(dims) -> TensorOperator:
    space = _as_space(dims)
    return TensorOperator(space, np.zeros((space.total, space.total), dtype=complex))


def projector(vectors, dims, normalize: bool = True) -> TensorOperator:
    """Sum of ``|v><v|`` over ``vectors``.

    With ``normalize=False`` the vectors are used as given, which is how
    integer-coefficient vectors such as ``|01> + |12>`` enter hand-written
    witness matrices.
    """
    space = _as_space(dims)
    mat = np.zeros((space.total, space.total), dtype=complex)
    for v in vectors:
        v = np.asarray(v, dtype=complex).reshape(-1)
        if v.shape[0] != space.total:
            raise ValueError(f"vector length {v.shape[0]} does not match dims {space.dims}")
        if normalize:
            v = v / np.linalg.norm(v)
        mat += np.outer(v, v.conj())
    return TensorOperator(space, mat)


def ket(dims, *terms) -> np.ndarray:
    """Build a vector from ``(coefficient, digits)`` pairs, unnormalized.

    >>> ket([2, 4], (1, (0, 1)), (1, (1, 2)))  # |01> + |12>
    """
    space = _as_space(dims)
    v = np.zeros(space.total, dtype=complex)
    for coeff, digits in terms:
        v[space.basis_index(digits)] += coeff
    return v


def kron(*ops: np.ndarray) -> np.ndarray:
    return reduce(np.kron, ops)


def partial_transpose(op, subsystem: int) -> TensorOperator:
    """Transpose the indices of one tensor factor.

    Pure index permutation, so applying it twice on the same factor returns
    the input bit-for-bit.
    """
    op = as_operator(op)
    dims = op.dims
    n = len(dims)
    if not 0 <= subsystem < n:
        raise IndexError(f"subsystem {subsystem} out of range for {n} factors")
    t = op.mat.reshape(dims + dims)
    t = np.swapaxes(t, subsystem, n + subsystem)
    return TensorOperator(op.space, t.reshape(op.space.total, op.space.total))


def eigh(op) -> Spectrum:
    """Ascending eigendecomposition via LAPACK ``zheevd`` (deterministic)."""
    op = as_operator(op)
    w, v = np.linalg.eigh(op.mat)
    return Spectrum(w, v)


def _spectral_radius(w: np.ndarray) -> float:
    return float(np.abs(w).max()) if w.size else 0.0


def kernel_basis(op, tol: float = DEFAULT_ZERO_TOL) -> Subspace:
    """Eigenvectors with ``|lambda| <= tol * max|lambda|``."""
    op = as_operator(op)
    spectrum = eigh(op)
    w = spectrum.eigenvalues
    mask = np.abs(w) <= tol * _spectral_radius(w)
    return Subspace(op.space, spectrum.eigenvectors[:, mask], tol)


def negative_eigenspace(op, tol: float = DEFAULT_ZERO_TOL) -> Subspace:
    """Span of eigenvectors with eigenvalue ``< -tol * max|lambda|``."""
    op = as_operator(op)
    spectrum = eigh(op)
    w = spectrum.eigenvalues
    mask = w < -tol * _spectral_radius(w)
    return Subspace(op.space, spectrum.eigenvectors[:, mask], tol)


def subspace_intersection(a: Subspace, b: Subspace, tol: float = DEFAULT_ANGLE_TOL) -> Subspace:
    """Intersection via principal angles.

    The singular values of ``A^dag B`` are the cosines of the principal
    angles; left singular directions with cosine ``>= 1 - tol`` span the
    intersection.
    """
    if a.space != b.space:
        raise ValueError(f"space mismatch: {a.space.dims} vs {b.space.dims}")
    if a.dim == 0 or b.dim == 0:
        return Subspace(a.space, np.zeros((a.space.total, 0), dtype=complex), tol)
    u, s, _ = np.linalg.svd(a.basis.conj().T @ b.basis)
    keep = s >= 1.0 - tol
    return Subspace(a.space, a.basis @ u[:, : len(s)][:, keep], tol)


def schmidt_coefficients(vec, dims) -> np.ndarray:
    """Descending Schmidt coefficients of a normalized bipartite vector."""
    space = _as_space(dims)
    if space.nfactors != 2:
        raise ValueError(f"Schmidt decomposition needs a bipartite space, got {space.dims}")
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    if vec.shape[0] != space.total:
        raise ValueError(f"vector length {vec.shape[0]} does not match dims {space.dims}")
    nrm = np.linalg.norm(vec)
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"vector is not normalized (norm {nrm!r})")
    return np.linalg.svd(vec.reshape(space.dims), compute_uv=False)


def schmidt_rank(vec, dims, tol: float = 1e-9) -> int:
    return int(np.sum(schmidt_coefficients(vec, dims) > tol))
