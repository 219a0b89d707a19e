import numpy as np
import pytest

from comwit.opcore import (
    DensityState,
    Subspace,
    TensorOperator,
    TensorSpace,
    as_operator,
    eigh,
    identity,
    kernel_basis,
    ket,
    negative_eigenspace,
    partial_transpose,
    projector,
    schmidt_coefficients,
    schmidt_rank,
    subspace_intersection,
)
from comwit.statezoo import chi_state, delta_tri, max_entangled, max_entangled_vector, phi_state, tau

from conftest import rand_density, rand_hermitian, rand_operator


def _vec(rho):
    w, v = np.linalg.eigh(rho.mat)
    return v[:, -1]


def test_tensor_space():
    s = TensorSpace([2, 2, 2])
    assert s.total == 8 and s.nfactors == 3
    # big-endian: first factor most significant
    assert s.basis_index((1, 1, 0)) == 6
    assert TensorSpace([2, 4]).basis_index((1, 2)) == 6
    with pytest.raises(ValueError):
        TensorSpace([])
    with pytest.raises(ValueError):
        TensorSpace([3, 1])
    with pytest.raises(ValueError):
        s.basis_index((0, 2, 0))


def test_tensor_operator_hermitian_check():
    m = np.zeros((4, 4), dtype=complex)
    m[0, 1] = 1
    with pytest.raises(ValueError, match="not Hermitian"):
        TensorOperator(TensorSpace([2, 2]), m)
    with pytest.raises(ValueError, match="does not match"):
        TensorOperator(TensorSpace([2, 2]), np.eye(3))
    op = identity([2, 2])
    with pytest.raises(ValueError):
        op.mat[0, 0] = 2
    assert (op + op).trace() == 8
    assert (2 * op - op).trace() == 4
    with pytest.raises(ValueError, match="space mismatch"):
        op + identity([4])


def test_density_state_invariants():
    space = TensorSpace([2, 2])
    with pytest.raises(ValueError, match="trace"):
        DensityState(TensorOperator(space, np.eye(4)))
    with pytest.raises(ValueError, match="PSD"):
        DensityState(TensorOperator(space, np.diag([1.5, -0.5, 0, 0])))
    rho = DensityState(TensorOperator(space, np.eye(4) / 4), "mixed")
    assert rho.dims == (2, 2) and rho.label == "mixed"


def test_partial_transpose_examples():
    I9 = identity([3, 3])
    assert np.array_equal(partial_transpose(I9, 0).mat, I9.mat)
    t = tau(0.4, 0.0)
    assert np.array_equal(partial_transpose(partial_transpose(t, 0), 0).mat, t.mat)
    pt = partial_transpose(max_entangled(3), 0)
    assert abs(pt.min_eigenvalue() + 1 / 3) < 1e-12
    with pytest.raises(IndexError):
        partial_transpose(I9, 2)


def test_partial_transpose_entry_swap():
    rng = np.random.default_rng(0)
    dims = (2, 3, 2)
    op = rand_operator(dims, rng)
    T = op.mat.reshape(dims + dims)
    for k in range(3):
        out = partial_transpose(op, k).mat.reshape(dims + dims)
        for _ in range(50):
            i = tuple(int(rng.integers(d)) for d in dims)
            j = tuple(int(rng.integers(d)) for d in dims)
            i2, j2 = list(i), list(j)
            i2[k], j2[k] = j[k], i[k]
            assert out[i + j] == T[tuple(i2) + tuple(j2)]


def test_partial_transpose_properties():
    rng = np.random.default_rng(1)
    for dims in [(2, 2), (3, 3), (2, 4), (2, 2, 2)]:
        for _ in range(20):
            op = rand_operator(dims, rng)
            for k in range(len(dims)):
                pt = partial_transpose(op, k)
                assert np.array_equal(partial_transpose(pt, k).mat, op.mat)
                assert abs(pt.trace() - op.trace()) < 1e-10
                assert np.abs(pt.mat - pt.mat.conj().T).max() == 0


def test_partial_transpose_swap_symmetric_states():
    rng = np.random.default_rng(2)
    swap = np.zeros((9, 9))
    for i in range(3):
        for j in range(3):
            swap[3 * j + i, 3 * i + j] = 1
    for _ in range(20):
        m = rand_density((3, 3), rng)
        m = 0.5 * (m + swap @ m @ swap)
        op = as_operator(m, (3, 3))
        wa = np.linalg.eigvalsh(partial_transpose(op, 0).mat)
        wb = np.linalg.eigvalsh(partial_transpose(op, 1).mat)
        assert np.abs(wa - wb).max() < 1e-10


def test_eigh_examples():
    d = np.array([0.1, 0.7, 0.3, 0.5, 0.2, 0.9, 0.4, 0.6, 0.8])
    spectrum = eigh(as_operator(np.diag(d), (3, 3)))
    assert np.allclose(spectrum.eigenvalues, np.sort(d), atol=1e-15)
    psi1 = (ket((3, 3), (1, (0, 0)), (1, (1, 1)))) / np.sqrt(2)
    spectrum = eigh(partial_transpose(projector([psi1], (3, 3)), 0))
    assert abs(spectrum.eigenvalues[0] + 0.5) < 1e-12
    assert eigh(partial_transpose(tau(0.4, 0.0), 0)).eigenvalues[0] >= -1e-10
    with pytest.raises(ValueError):
        eigh(as_operator(np.array([[0, 1], [0, 0]]), (2,)))


def test_eigh_reconstruction():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        h = rand_hermitian(9, rng)
        spectrum = eigh(as_operator(h, (3, 3)))
        assert np.all(np.diff(spectrum.eigenvalues) >= 0)
        v = spectrum.eigenvectors
        assert np.abs(v.conj().T @ v - np.eye(9)).max() < 1e-10
        assert np.abs(spectrum.reconstruct() - h).max() <= 1e-9 * np.abs(spectrum.eigenvalues).max()


def test_kernel_basis_examples():
    P = projector([ket((3, 3), (1, (0, 1)))], (3, 3))
    assert kernel_basis(P).dim == 8
    a = ket((2, 4), (1, (0, 1)), (1, (1, 2))) / np.sqrt(2)
    ker = kernel_basis(tau(0.4, 0.0))
    assert abs(np.vdot(a, ker.projector().mat @ a).real - 1) < 1e-9
    p = ket((2, 2, 2), (1, (1, 1, 1)), (-1, (0, 0, 0))) / np.sqrt(2)
    ker = kernel_basis(delta_tri(1, 1, 1))
    assert abs(np.vdot(p, ker.projector().mat @ p).real - 1) < 1e-9


def test_kernel_basis_annihilated():
    rng = np.random.default_rng(4)
    for _ in range(50):
        rank = int(rng.integers(1, 9))
        m = rand_density((3, 3), rng, rank=rank)
        op = as_operator(m, (3, 3))
        ker = kernel_basis(op)
        assert ker.dim == 9 - rank
        lmax = np.abs(np.linalg.eigvalsh(m)).max()
        for v in ker.basis.T:
            assert np.linalg.norm(m @ v) <= 1e-9 * lmax
        b = ker.basis
        assert np.abs(b.conj().T @ b - np.eye(ker.dim)).max() < 1e-10


def test_negative_eigenspace_examples():
    assert negative_eigenspace(identity([3, 3])).dim == 0
    psi1 = ket((3, 3), (1, (0, 0)), (1, (1, 1))) / np.sqrt(2)
    neg = negative_eigenspace(partial_transpose(projector([psi1], (3, 3)), 0))
    e = ket((3, 3), (1, (0, 1)), (-1, (1, 0))) / np.sqrt(2)
    assert neg.dim == 1
    assert neg.contains(e)
    neg2 = negative_eigenspace(partial_transpose(max_entangled(3), 0))
    assert neg2.dim == 3


def test_subspace_intersection_examples():
    rng = np.random.default_rng(5)
    q, _ = np.linalg.qr(rng.normal(size=(9, 3)) + 1j * rng.normal(size=(9, 3)))
    s = Subspace(TensorSpace([3, 3]), q)
    assert subspace_intersection(s, s).dim == 3
    psi1 = ket((3, 3), (1, (0, 0)), (1, (1, 1))) / np.sqrt(2)
    n1 = negative_eigenspace(partial_transpose(projector([psi1], (3, 3)), 0))
    n2 = negative_eigenspace(partial_transpose(max_entangled(3), 0))
    inter = subspace_intersection(n1, n2)
    assert inter.dim == 1
    assert inter.contains(ket((3, 3), (1, (0, 1)), (-1, (1, 0))))
    a = Subspace(TensorSpace([3, 3]), ket((3, 3), (1, (0, 0))))
    b = Subspace(TensorSpace([3, 3]), ket((3, 3), (1, (1, 1))))
    assert subspace_intersection(a, b).dim == 0
    with pytest.raises(ValueError):
        subspace_intersection(a, Subspace(TensorSpace([9]), np.eye(9)[:, :1]))


def test_subspace_intersection_lies_in_both():
    rng = np.random.default_rng(6)
    for _ in range(50):
        shared = rng.normal(size=(9, 2)) + 1j * rng.normal(size=(9, 2))
        extra_a = rng.normal(size=(9, 2)) + 1j * rng.normal(size=(9, 2))
        extra_b = rng.normal(size=(9, 1)) + 1j * rng.normal(size=(9, 1))
        qa, _ = np.linalg.qr(np.hstack([shared, extra_a]))
        qb, _ = np.linalg.qr(np.hstack([shared, extra_b]))
        a, b = Subspace(TensorSpace([3, 3]), qa), Subspace(TensorSpace([3, 3]), qb)
        inter = subspace_intersection(a, b)
        assert inter.dim == 2
        for s in (a, b):
            res = inter.basis - s.projector().mat @ inter.basis
            assert np.abs(res).max() <= 1e-8


def test_schmidt_coefficients_examples():
    c = schmidt_coefficients(max_entangled_vector(3), (3, 3))
    assert np.allclose(c, np.ones(3) / np.sqrt(3), atol=1e-12)
    assert schmidt_rank(max_entangled_vector(3), (3, 3)) == 3
    c = schmidt_coefficients(_vec(chi_state(1.0)), (3, 3))
    assert np.allclose(c, [1, 0, 0], atol=1e-12)
    assert schmidt_rank(_vec(chi_state(1.0)), (3, 3)) == 1
    c = schmidt_coefficients(_vec(phi_state(0.6, 0.6)), (3, 3))
    assert np.allclose(c, [0.6, 0.6, np.sqrt(0.28)], atol=1e-12)
    with pytest.raises(ValueError):
        schmidt_coefficients(np.ones(8) / np.sqrt(8), (2, 2, 2))


def test_schmidt_coefficients_normalized():
    rng = np.random.default_rng(7)
    for dims in [(2, 2), (3, 3), (2, 4), (4, 3)]:
        for _ in range(100):
            v = rng.normal(size=np.prod(dims)) + 1j * rng.normal(size=np.prod(dims))
            v /= np.linalg.norm(v)
            c = schmidt_coefficients(v, dims)
            assert np.all(np.diff(c) <= 0) and np.all(c >= 0)
            assert abs(np.sum(c**2) - 1) < 1e-10
