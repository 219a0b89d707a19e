import numpy as np
import pytest

from comwit.opcore import partial_transpose, projector, schmidt_rank
from comwit.statezoo import (
    chi_state,
    convex_mix,
    delta_tri,
    horodecki_alpha,
    isotropic,
    max_entangled,
    max_entangled_vector,
    mix2,
    phi_state,
    pure_bipartite,
    tau,
    two_level_pure,
    two_level_pure_literal,
)


def _check_density(rho):
    assert abs(np.trace(rho.mat).real - 1) <= 1e-12
    assert np.linalg.eigvalsh(rho.mat)[0] >= -1e-10


def test_max_entangled():
    rho = max_entangled(3)
    assert abs(rho.mat[0, 0] - 1 / 3) < 1e-15
    assert schmidt_rank(max_entangled_vector(3), (3, 3)) == 3
    assert abs(partial_transpose(max_entangled(2), 0).min_eigenvalue() + 0.5) < 1e-12
    with pytest.raises(ValueError):
        max_entangled(1)


def test_pure_bipartite():
    beta = 0.3
    rho = pure_bipartite([beta, np.sqrt(1 - beta**2)], (3, 3))
    m = rho.mat
    c = beta * np.sqrt(1 - beta**2)
    assert np.allclose([m[0, 0], m[0, 4], m[4, 0], m[4, 4]], [beta**2, c, c, 1 - beta**2], atol=1e-15)
    assert np.count_nonzero(np.abs(m) > 1e-15) == 4
    prod = pure_bipartite([1, 0, 0])
    assert not prod.claimed_entangled
    assert partial_transpose(prod, 0).min_eigenvalue() >= -1e-12
    rho = pure_bipartite([0.6, 0.6, np.sqrt(0.28)])
    assert abs(np.trace(rho.mat) - 1) < 1e-12
    assert abs(np.trace(rho.mat @ rho.mat) - 1) < 1e-12
    with pytest.raises(ValueError, match="normalized"):
        pure_bipartite([0.6, 0.6, 0.6])


def test_two_level_literal():
    lit = two_level_pure_literal(0.5)
    assert lit.mat[0, 0] == 0.5
    assert abs(lit.trace() - 1.25) < 1e-15
    assert np.allclose(two_level_pure_literal(1.0).mat, two_level_pure(1.0).mat)
    assert np.allclose(two_level_pure(0.5).mat[0, 0], 0.25)


def test_tau():
    t = tau(0.4, 0.0)
    assert abs(t.mat[0, 0] - 0.4 / 9.8) < 1e-15
    pt = partial_transpose(tau(0.5, 0.0), 0).mat
    pre = 1 / (2 * (2 + 0.5 + 2))
    assert pt[0, 7] == 0
    # the -1 entries of the upper-right block move to the lower-left block's transpose
    assert abs(pt[1, 4] + pre) < 1e-15 and abs(pt[2, 5] + pre) < 1e-15 and abs(pt[3, 6] + pre) < 1e-15
    for b, s in [(0, 0), (1, 0), (0.5, 0.5), (0.5, -0.6)]:
        with pytest.raises(ValueError):
            tau(b, s)


def test_tau_range_draws():
    rng = np.random.default_rng(0)
    for _ in range(200):
        b = rng.uniform(0.01, 0.99)
        s = rng.uniform(-b, b) * 0.999
        t = tau(b, s)
        _check_density(t)
        assert partial_transpose(t, 0).min_eigenvalue() >= -1e-10


def test_delta_tri():
    d = delta_tri(1, 1, 1)
    assert np.allclose(np.diag(d.mat), 1 / 8)
    assert d.mat[0, 7] == d.mat[7, 0] == 1 / 8
    d2 = delta_tri(1, 2, 2)
    assert abs(d2.mat[2, 2] - 2 / 9) < 1e-15
    pt = partial_transpose(d, 2).mat
    assert pt[0, 7] == 0 and pt[1, 6] == pt[6, 1] == 1 / 8
    with pytest.raises(ValueError):
        delta_tri(1, 0, 1)


def test_horodecki_alpha():
    assert partial_transpose(horodecki_alpha(3.5), 1).min_eigenvalue() >= -1e-10
    assert partial_transpose(horodecki_alpha(4.5), 1).min_eigenvalue() < -1e-10
    assert abs(horodecki_alpha(2.5).mat[1, 1] - 2.5 / 21) < 1e-15
    for a in (-0.1, 5.1):
        with pytest.raises(ValueError):
            horodecki_alpha(a)


def test_horodecki_pt_classification():
    for a in np.round(np.arange(3.0, 5.0 + 1e-9, 0.05), 10):
        lmin = partial_transpose(horodecki_alpha(a), 1).min_eigenvalue()
        assert (lmin < -1e-10) == (a > 4), a


def test_isotropic():
    assert np.allclose(isotropic(0).mat, np.eye(9) / 9, atol=1e-15)
    assert np.allclose(isotropic(1).mat, max_entangled(3).mat, atol=1e-15)
    P = projector([max_entangled_vector(3)], (3, 3))
    assert abs(np.trace(P.mat @ isotropic(0.3).mat).real - (0.3 + 0.7 / 9)) < 1e-12
    isotropic(-1 / 8)
    for a in (-0.2, 1.01):
        with pytest.raises(ValueError):
            isotropic(a)


def test_convex_mix():
    d1, d2 = delta_tri(1, 1, 1), delta_tri(1, 2, 2)
    assert np.array_equal(mix2(d1, d2, 1.0).mat, d1.mat)
    assert abs(mix2(d1, d2, 0.5).mat[0, 0] - (1 / 8 + 1 / 9) / 2) < 1e-15
    for lam, a, g in [(0.3, 3.5, 4.5), (0.8, 3.1, 4.9), (0.5, 3.9, 4.1)]:
        m = mix2(horodecki_alpha(a), horodecki_alpha(g), lam)
        assert np.abs(m.mat - horodecki_alpha(lam * a + (1 - lam) * g).mat).max() <= 1e-12
    with pytest.raises(ValueError):
        convex_mix([d1, d2], [0.5, 0.6])
    with pytest.raises(ValueError):
        convex_mix([d1], [0.5, 0.5])
    with pytest.raises(ValueError):
        mix2(d1, tau(0.4, 0), 0.5)


def test_zoo_random_draws():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        which = rng.integers(7)
        if which == 0:
            b = rng.uniform(0.01, 0.99)
            rho = tau(b, rng.uniform(-b, b) * 0.999)
        elif which == 1:
            rho = delta_tri(*rng.uniform(0.05, 5, size=3))
        elif which == 2:
            rho = horodecki_alpha(rng.uniform(0, 5))
        elif which == 3:
            rho = isotropic(rng.uniform(-1 / 8, 1))
        elif which == 4:
            a, b = rng.uniform(0, 0.7, size=2)
            rho = phi_state(a, b)
        elif which == 5:
            rho = chi_state(rng.uniform(-1, 1))
        else:
            rho = mix2(horodecki_alpha(rng.uniform(3, 4)), two_level_pure(rng.uniform(0, 1)), rng.uniform())
        _check_density(rho)
