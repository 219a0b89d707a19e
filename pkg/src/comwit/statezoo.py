"""Constructors for the state families used in the common-witness examples."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .opcore import DensityState, TensorOperator, TensorSpace, schmidt_rank


def _state(mat, dims, label, claimed_entangled=False) -> DensityState:
    return DensityState(TensorOperator(TensorSpace(dims), mat), label, claimed_entangled)


def max_entangled_vector(d: int) -> np.ndarray:
    if d < 2:
        raise ValueError(f"local dimension must be >= 2, got {d}")
    v = np.zeros(d * d, dtype=complex)
    v[[i * d + i for i in range(d)]] = 1 / np.sqrt(d)
    return v


def max_entangled(d: int = 3) -> DensityState:
    """Projector onto ``(1/sqrt(d)) sum_i |ii>``."""
    v = max_entangled_vector(d)
    return _state(np.outer(v, v.conj()), (d, d), f"max_entangled(d={d})", True)


def pure_bipartite(coeffs: Sequence[float], dims=None) -> DensityState:
    """Rank-one state of ``sum_i c_i |ii>``.

    Parameters
    ----------
    coeffs : sequence of float
        Schmidt-basis amplitudes; their squares must sum to one.
    dims : pair of int, optional
        Local dimensions, defaulting to ``(len(coeffs), len(coeffs))``.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if dims is None:
        dims = (len(coeffs), len(coeffs))
    dims = tuple(dims)
    if len(dims) != 2:
        raise ValueError("pure_bipartite builds two-party states only")
    if len(coeffs) > min(dims):
        raise ValueError(f"{len(coeffs)} coefficients do not fit dims {dims}")
    norm2 = float(np.sum(coeffs**2))
    if abs(norm2 - 1.0) > 1e-10:
        raise ValueError(f"coefficients are not normalized (sum of squares {norm2!r})")
    v = np.zeros(dims[0] * dims[1], dtype=complex)
    for i, c in enumerate(coeffs):
        v[i * dims[1] + i] = c
    rank = schmidt_rank(v, dims)
    label = "pure_bipartite(" + ", ".join(f"{c:.6g}" for c in coeffs) + ")"
    return _state(np.outer(v, v.conj()), dims, label, rank >= 2)


def phi_state(a: float, b: float) -> DensityState:
    """``a|00> + b|11> + sqrt(1-a^2-b^2)|22>``."""
    rest = 1.0 - a * a - b * b
    if rest < -1e-12:
        raise ValueError(f"a^2 + b^2 = {a * a + b * b} exceeds 1")
    return pure_bipartite([a, b, np.sqrt(max(rest, 0.0))], (3, 3))


def chi_state(t: float) -> DensityState:
    """``t|00> + sqrt(1-t^2)|11>`` on two qutrits."""
    if not -1.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [-1, 1], got {t}")
    return pure_bipartite([t, np.sqrt(1.0 - t * t), 0.0], (3, 3))


def two_level_pure(beta: float) -> DensityState:
    """Normalized ``beta|00> + sqrt(1-beta^2)|11>`` on two qutrits."""
    return chi_state(beta)


def two_level_pure_literal(beta: float) -> TensorOperator:
    """Matrix with weight ``beta`` (not ``beta**2``) on ``|00><00|``.

    This is the literal unnormalized form of the pure two-level state in the
    mixing example; it is not unit trace unless ``beta`` is 0 or 1 and is
    provided for documentation only.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    c = beta * np.sqrt(1.0 - beta * beta)
    m = np.zeros((9, 9), dtype=complex)
    m[0, 0] = beta
    m[0, 4] = m[4, 0] = c
    m[4, 4] = 1.0 - beta * beta
    return TensorOperator(TensorSpace((3, 3)), m)


def tau(b: float, s: float) -> DensityState:
    """Two-qubit-by-ququart edge state family, ``0 < b < 1``, ``|s| < b``."""
    if not 0.0 < b < 1.0:
        raise ValueError(f"tau needs 0 < b < 1, got b={b}")
    if not abs(s) < b:
        raise ValueError(f"tau needs |s| < b, got s={s}, b={b}")
    ib = 1.0 / b
    m = np.diag([b, 1.0, ib, 1.0, 1.0, ib, 1.0, b]).astype(complex)
    for i, j in ((0, 5), (1, 6), (2, 7)):
        m[i, j] = m[j, i] = -1.0
    m[3, 4] = m[4, 3] = s
    m *= 1.0 / (2.0 * (2.0 + b + ib))
    return _state(m, (2, 4), f"tau(b={b:.6g}, s={s:.6g})", True)


def delta_tri_norm(a: float, b: float, c: float) -> float:
    return 2.0 + a + b + c + 1.0 / a + 1.0 / b + 1.0 / c


def delta_tri(a: float, b: float, c: float) -> DensityState:
    """Three-qubit edge state family, basis order ``|000>, |001>, ..., |111>``."""
    if min(a, b, c) <= 0:
        raise ValueError(f"delta_tri needs a, b, c > 0, got {(a, b, c)}")
    m = np.diag([1.0, a, b, c, 1.0 / c, 1.0 / b, 1.0 / a, 1.0]).astype(complex)
    m[0, 7] = m[7, 0] = 1.0
    m /= delta_tri_norm(a, b, c)
    return _state(m, (2, 2, 2), f"delta_tri(a={a:.6g}, b={b:.6g}, c={c:.6g})", True)


def _cyclic_mixtures():
    plus = np.zeros((9, 9), dtype=complex)
    minus = np.zeros((9, 9), dtype=complex)
    for i, j in ((0, 1), (1, 2), (2, 0)):
        plus[3 * i + j, 3 * i + j] = 1.0 / 3.0
        minus[3 * j + i, 3 * j + i] = 1.0 / 3.0
    return plus, minus


def horodecki_alpha(alpha: float) -> DensityState:
    """Qutrit family ``(2/7) psi+ + (alpha/7) rho_+ + ((5 - alpha)/7) rho_-``.

    PPT for ``alpha <= 4`` on ``[3, 5]``, NPT above 4; entangled for
    ``alpha > 3``. Accepts the full positive range ``0 <= alpha <= 5``.
    """
    if not 0.0 <= alpha <= 5.0:
        raise ValueError(f"alpha must lie in [0, 5], got {alpha}")
    v = max_entangled_vector(3)
    plus, minus = _cyclic_mixtures()
    m = (2.0 / 7.0) * np.outer(v, v.conj()) + (alpha / 7.0) * plus + ((5.0 - alpha) / 7.0) * minus
    return _state(m, (3, 3), f"horodecki_alpha(alpha={alpha:.6g})", alpha > 3.0)


def isotropic(alpha: float, d: int = 3) -> DensityState:
    """``alpha P + (1 - alpha)/d^2 I`` with ``P`` the maximally entangled projector."""
    lo = -1.0 / (d * d - 1)
    if not lo - 1e-15 <= alpha <= 1.0:
        raise ValueError(f"isotropic state needs {lo:.6g} <= alpha <= 1, got {alpha}")
    v = max_entangled_vector(d)
    m = alpha * np.outer(v, v.conj()) + (1.0 - alpha) / (d * d) * np.eye(d * d)
    return _state(m, (d, d), f"isotropic(alpha={alpha:.6g}, d={d})", alpha > 1.0 / (d + 1))


def convex_mix(states: Sequence[DensityState], weights: Sequence[float]) -> DensityState:
    states = list(states)
    weights = np.asarray(weights, dtype=float)
    if len(states) == 0 or len(states) != len(weights):
        raise ValueError("need one weight per state")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError(f"weights must be nonnegative and sum to 1, got {weights.tolist()}")
    space = states[0].space
    if any(s.space != space for s in states):
        raise ValueError("cannot mix states on different spaces")
    mat = sum(w * s.mat for w, s in zip(weights, states))
    label = " + ".join(f"{w:.6g}*[{s.label}]" for w, s in zip(weights, states))
    return DensityState(TensorOperator(space, mat), label)


def mix2(rho1: DensityState, rho2: DensityState, lam: float) -> DensityState:
    """``lam * rho1 + (1 - lam) * rho2``."""
    return convex_mix([rho1, rho2], [lam, 1.0 - lam])
