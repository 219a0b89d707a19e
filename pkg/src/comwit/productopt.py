"""Optimization over pure product vectors.

Two objectives are supported:

* the quadratic form ``<x|H|x>`` (the offset bound of an edge witness), and
* the ratio ``<x|N|x> / <x|D|x>`` (the offset bound of the ``Q^T - k(I - P)``
  witness family).

Both ratio and quadratic form are linear (resp. linear-fractional) in the
density matrix, so their extrema over the convex set of separable states are
attained at extreme points, i.e. at pure product vectors. Restricting the
search to product vectors is therefore exact, not a relaxation.

The local search is alternating minimization: with all factors but one
frozen, the objective is a Hermitian form on the remaining factor and its
exact minimizer is the lowest eigenvector. Every update is non-increasing.
"""

from __future__ import annotations

import itertools
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .opcore import TensorOperator, as_operator

SWEEP_TOL = 1e-12
MAX_SWEEPS = 500
DEFAULT_RESTARTS = 64
DEFAULT_DEN_FLOOR = 1e-8


def _gauge(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    nz = np.flatnonzero(np.abs(v) > 1e-14)
    if nz.size:
        z = v[nz[0]]
        v = v * (abs(z) / z)
        v[nz[0]] = abs(z)
    return v


@dataclass(frozen=True, eq=False)
class ProductVector:
    """Normalized local vectors, one per tensor factor.

    The global phase of every factor is fixed so its first nonzero
    component is real and nonnegative.
    """

    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(_gauge(f) for f in self.factors))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(len(f) for f in self.factors)

    def full(self) -> np.ndarray:
        out = self.factors[0]
        for f in self.factors[1:]:
            out = np.kron(out, f)
        return out

    @classmethod
    def basis(cls, dims, digits) -> "ProductVector":
        factors = []
        for d, i in zip(dims, digits):
            e = np.zeros(d, dtype=complex)
            e[i] = 1.0
            factors.append(e)
        return cls(tuple(factors))

    def to_json(self) -> list:
        return [[[float(z.real), float(z.imag)] for z in f] for f in self.factors]


@dataclass(frozen=True, eq=False)
class OptResult:
    value: float
    argmin: ProductVector
    restarts: int
    converged_fraction: float
    flags: tuple[str, ...] = ()
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "argmin": self.argmin.to_json(),
            "restarts": self.restarts,
            "converged_fraction": self.converged_fraction,
            "flags": list(self.flags),
        }


def haar_product(dims, rng: np.random.Generator) -> ProductVector:
    return ProductVector(tuple(rng.normal(size=d) + 1j * rng.normal(size=d) for d in dims))


def _restart_rng(seed: int, index: int) -> np.random.Generator:
    # one stream per (seed, restart) so serial and threaded runs agree
    return np.random.default_rng([int(seed), int(index)])


def _local_subscripts(n: int, j: int) -> str:
    row = string.ascii_letters[:n]
    col = string.ascii_letters[n: 2 * n]
    subs = [row + col]
    for l in range(n):
        if l != j:
            subs += [row[l], col[l]]
    return ",".join(subs) + "->" + row[j] + col[j]


class _Form:
    """A Hermitian operator reshaped for repeated local contractions."""

    def __init__(self, op: TensorOperator):
        self.op = op
        self.dims = op.dims
        self.tensor = np.asarray(op.mat).reshape(self.dims + self.dims)
        self._subs = [_local_subscripts(len(self.dims), j) for j in range(len(self.dims))]

    def local(self, xs, j: int) -> np.ndarray:
        operands = []
        for l, x in enumerate(xs):
            if l != j:
                operands += [x.conj(), x]
        m = np.einsum(self._subs[j], self.tensor, *operands)
        return 0.5 * (m + m.conj().T)

    def value(self, xs) -> float:
        v = xs[0]
        for x in xs[1:]:
            v = np.kron(v, x)
        return float(np.real(np.vdot(v, self.op.mat @ v)))


def product_expectation(op, p: ProductVector) -> float:
    """``<p|op|p>`` for a product vector ``p``."""
    op = as_operator(op)
    if p.dims != op.dims:
        raise ValueError(f"space mismatch: operator {op.dims} vs product vector {p.dims}")
    v = p.full()
    return float(np.real(np.vdot(v, op.mat @ v)))


@dataclass
class DescentTrace:
    argmin: ProductVector
    value: float
    history: list
    converged: bool


def alternating_descent(op, start: ProductVector, tol: float = SWEEP_TOL,
                        max_sweeps: int = MAX_SWEEPS) -> DescentTrace:
    """Single-start alternating lowest-eigenvector updates.

    ``history`` holds the objective before the first sweep followed by the
    value after every sweep.
    """
    op = as_operator(op)
    form = _Form(op)
    xs = list(start.factors)
    value = form.value(xs)
    history = [value]
    converged = False
    for _ in range(max_sweeps):
        prev = value
        for j in range(len(xs)):
            w, v = np.linalg.eigh(form.local(xs, j))
            xs[j] = v[:, 0]
        value = form.value(xs)
        history.append(value)
        if prev - value < tol:
            converged = True
            break
    return DescentTrace(ProductVector(tuple(xs)), value, history, converged)


def _run_restarts(fn, restarts: int, workers: int):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, range(restarts)))
    return [fn(i) for i in range(restarts)]


def _agreement(values, best) -> float:
    tol = 1e-8 * max(1.0, abs(best))
    return float(np.mean([v - best <= tol for v in values]))


def min_product_expectation(op, restarts: int = DEFAULT_RESTARTS, seed: int = 0,
                            workers: int = 1) -> OptResult:
    """Minimize ``<x|op|x>`` over normalized product vectors.

    Multi-start alternating descent from Haar-random product vectors. The
    result is a heuristic upper bound on the true infimum (no global
    certificate). ``converged_fraction`` is the share of restarts whose
    final value matches the best one to ``1e-8`` relative; a low value
    means the landscape has competing local minima and more restarts may
    help.
    """
    op = as_operator(op)
    if restarts < 1:
        raise ValueError("restarts must be >= 1")

    def one(i):
        return alternating_descent(op, haar_product(op.dims, _restart_rng(seed, i)))

    runs = _run_restarts(one, restarts, workers)
    # ties resolved by restart index
    best = min(range(restarts), key=lambda i: (runs[i].value, i))
    argmin = runs[best].argmin
    value = product_expectation(op, argmin)
    flags = () if all(r.converged for r in runs) else ("sweep-cap-reached",)
    return OptResult(value, argmin, restarts, _agreement([r.value for r in runs], runs[best].value), flags)


def _ratio_descent(num: _Form, den: _Form, xs, floor: float, tol: float, max_sweeps: int):
    t = num.value(xs) / den.value(xs)
    rejected = 0
    converged = False
    for _ in range(max_sweeps):
        prev = t
        for j in range(len(xs)):
            a = num.local(xs, j)
            b = den.local(xs, j)
            # Dinkelbach iterations on the single-factor ratio
            for _inner in range(50):
                _, v = np.linalg.eigh(a - t * b)
                y = v[:, 0]
                d = float(np.real(np.vdot(y, b @ y)))
                if d < floor:
                    rejected += 1
                    break
                t_new = float(np.real(np.vdot(y, a @ y))) / d
                if t_new >= t - tol * max(1.0, abs(t)):
                    if t_new <= t:
                        xs[j], t = y, t_new
                    break
                xs[j], t = y, t_new
        if prev - t < tol * max(1.0, abs(t)):
            converged = True
            break
    return xs, t, converged, rejected


def min_ratio_product(num, den, den_floor: float = DEFAULT_DEN_FLOOR,
                      restarts: int = DEFAULT_RESTARTS, seed: int = 0,
                      bisection: bool = True, workers: int = 1) -> OptResult:
    """Minimize ``<x|num|x> / <x|den|x>`` over product vectors with ``<x|den|x> >= den_floor``.

    Two routes are combined and the lower value is reported together with a
    product vector that reproduces it:

    1. multi-start alternating descent where each single-factor step runs
       Dinkelbach iterations on the local ratio; steps that would drop the
       denominator below ``den_floor`` are rejected;
    2. bisection on ``t`` using ``min_product_expectation(num - t den) >= 0``
       as the feasibility test (only when ``den`` is nonnegative on product
       vectors, which makes that test monotone in ``t``).

    When the best point sits within ten times ``den_floor`` of the
    denominator cutoff the flag ``near-den-floor`` is set: the reported
    value then estimates an infimum that may not be attained.

    Raises
    ------
    ValueError
        If no random start has a denominator above ``den_floor``.
    """
    num = as_operator(num)
    den = as_operator(den)
    if num.space != den.space:
        raise ValueError(f"space mismatch: {num.dims} vs {den.dims}")
    nform, dform = _Form(num), _Form(den)
    dims = num.dims

    def one(i):
        rng = _restart_rng(seed, i)
        for _ in range(100):
            p = haar_product(dims, rng)
            if dform.value(list(p.factors)) >= den_floor:
                break
        else:
            return None
        xs, t, conv, rej = _ratio_descent(nform, dform, list(p.factors), den_floor, SWEEP_TOL, MAX_SWEEPS)
        return ProductVector(tuple(xs)), t, conv, rej

    runs = [r for r in _run_restarts(one, restarts, workers) if r is not None]
    if not runs:
        raise ValueError("feasible set empty: every sampled denominator is below den_floor")
    best_i = min(range(len(runs)), key=lambda i: (runs[i][1], i))
    best_p, best_t = runs[best_i][0], runs[best_i][1]
    details = {
        "descent_value": best_t,
        "floor_rejections": int(sum(r[3] for r in runs)),
        "infeasible_starts": restarts - len(runs),
    }
    flags = []

    if bisection:
        den_min = min_product_expectation(den, restarts=max(8, restarts // 4), seed=seed).value
        if den_min >= -1e-10:
            cand, lo = _bisect_ratio(num, den, best_t, den_floor, max(8, restarts // 4), seed)
            details["bisection_lower"] = lo
            if cand is not None and cand[1] < best_t:
                best_p, best_t = cand
                details["route"] = "bisection"
        else:
            flags.append("den-indefinite-no-bisection")
    details.setdefault("route", "descent")

    d_at = product_expectation(den, best_p)
    value = product_expectation(num, best_p) / d_at
    if d_at < 10 * den_floor:
        flags.append("near-den-floor")
    if not all(r[2] for r in runs):
        flags.append("sweep-cap-reached")
    return OptResult(value, best_p, restarts, _agreement([r[1] for r in runs], runs[best_i][1]),
                     tuple(flags), details)


def _bisect_ratio(num, den, hi, floor, restarts, seed, rtol=1e-10, max_iter=80):
    """Largest ``t`` with ``num - t den`` nonnegative on products, plus the best
    feasible point found along the way."""
    best = None

    def probe(t):
        nonlocal best
        res = min_product_expectation(num - t * den, restarts=restarts, seed=seed)
        if res.value < -1e-12:
            d = product_expectation(den, res.argmin)
            if d >= floor:
                r = product_expectation(num, res.argmin) / d
                if best is None or r < best[1]:
                    best = (res.argmin, r)
            return False
        return True

    if probe(hi):
        return best, hi
    step = max(1.0, abs(hi))
    lo = hi - step
    for _ in range(60):
        if probe(lo):
            break
        step *= 2
        hi, lo = lo, lo - step
    else:
        return best, None
    for _ in range(max_iter):
        if hi - lo <= rtol * max(1.0, abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if probe(mid):
            lo = mid
        else:
            hi = mid
    return best, lo


# --- brute-force oracle --------------------------------------------------------


def _local_grid(d: int, steps: int):
    """Hyperspherical grid of unit vectors in C^d (first component real).

    Returns the vectors and the sum of half-spacings over the ``2(d-1)``
    angles, which bounds the distance from any unit vector to the grid.
    """
    thetas = np.linspace(0.0, np.pi / 2, steps)
    phis = np.linspace(0.0, 2 * np.pi, steps, endpoint=False)
    vecs = []
    for ang in itertools.product(thetas, repeat=d - 1):
        mags = np.empty(d)
        s = 1.0
        for k, a in enumerate(ang):
            mags[k] = s * np.cos(a)
            s *= np.sin(a)
        mags[d - 1] = s
        for ph in itertools.product(phis, repeat=d - 1):
            v = mags.astype(complex)
            v[1:] *= np.exp(1j * np.asarray(ph))
            vecs.append(v)
    half = (d - 1) * (np.pi / 2 / (steps - 1)) / 2 + (d - 1) * (2 * np.pi / steps) / 2
    return np.array(vecs), half


@dataclass(frozen=True)
class GridResult:
    value: float
    bound: float  # |grid minimum - true minimum| <= bound
    points: int


def grid_oracle(op, steps: int = 16, den=None, exact_last: bool = False,
                den_floor: float = DEFAULT_DEN_FLOOR) -> GridResult:
    """Exhaustive grid minimum of ``<x|op|x>`` (or of ``op/den``) over products.

    Each local unit vector is parametrized by ``d-1`` magnitude angles in
    ``[0, pi/2]`` and ``d-1`` relative phases, each sampled at ``steps``
    points. With ``exact_last`` the final factor is not gridded but
    minimized exactly (lowest eigenvalue of the contracted form), which
    keeps larger spaces tractable. ``exact_last`` is not available for the
    ratio.

    ``bound`` is a Lipschitz bound ``2 ||op|| * sum of half-spacings``; it
    is rigorous but loose. For the ratio it is reported as ``inf``.
    """
    op = as_operator(op)
    dims = op.dims
    if op.space.total > 16:
        raise ValueError(f"grid oracle limited to total dimension 16, got {op.space.total}")
    if steps < 8:
        raise ValueError("steps must be >= 8")
    if den is not None and exact_last:
        raise ValueError("exact_last is only available for the quadratic form")
    gridded = dims[:-1] if exact_last else dims
    grids = [_local_grid(d, steps) for d in gridded]
    half_total = sum(h for _, h in grids)

    def contract(mat):
        # (points, rest, rest): operator reduced over the gridded factors
        red = np.asarray(mat)[None, ...]
        rest = op.space.total
        for d, (vecs, _) in zip(gridded, grids):
            rest //= d
            red = red.reshape(red.shape[0], d, rest, d, rest)
            red = np.einsum("pajbk,qa,qb->pqjk", red, vecs.conj(), vecs, optimize=True)
            red = red.reshape(-1, rest, rest)
        return red

    if den is None:
        red = contract(op.mat)
        if exact_last:
            red = 0.5 * (red + np.conj(np.swapaxes(red, 1, 2)))
            values = np.linalg.eigvalsh(red)[:, 0]
        else:
            values = np.real(red[:, 0, 0])
        norm = float(np.abs(np.linalg.eigvalsh(op.mat)).max())
        return GridResult(float(values.min()), 2 * norm * half_total, values.size)

    den = as_operator(den)
    nv = np.real(contract(op.mat)[:, 0, 0])
    dv = np.real(contract(den.mat)[:, 0, 0])
    ok = dv >= den_floor
    if not ok.any():
        raise ValueError("feasible set empty on the grid")
    ratios = nv[ok] / dv[ok]
    return GridResult(float(ratios.min()), float("inf"), int(ok.sum()))
