"""Scripted pipelines that rebuild the worked examples and audit them.

Each target returns a JSON-serializable report with the constructed
matrices, traces, optimizer results and a list of checks. A check has
status ``PASS``, ``FAIL`` or ``FLAG``. ``FLAG`` marks a known discrepancy
in the reference constructions that was reproduced as expected (for
instance a witness offset whose admissible bound evaluates to zero); CI
treats expected flags as success and anything else as a regression.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from . import __version__, productopt
from .commonsearch import (
    NONDECOMPOSABLE_REQUIRED,
    common_edge_witness,
    common_npt_witness,
    common_schmidt_witness,
    decomposability_advice,
    lambda_scan,
)
from .opcore import (
    TensorOperator,
    kernel_basis,
    ket,
    partial_transpose,
    projector,
    subspace_intersection,
)
from .statezoo import (
    chi_state,
    delta_tri,
    horodecki_alpha,
    isotropic,
    max_entangled,
    mix2,
    phi_state,
    pure_bipartite,
    tau,
    two_level_pure,
    two_level_pure_literal,
)
from .textio import dumps
from .witnesscore import (
    edge_witness,
    evaluate,
    projector_minus_eps,
    schmidt_witness,
    validate_witness,
    w1_witness,
    witness_from_npt_eigvec,
)

TARGETS = ("example1", "example2", "example3", "sn1", "sn2", "sn3", "case1", "case2")


@dataclass
class RunConfig:
    seed: int = 42
    restarts: int = 64
    grid: int = 101
    paper_mode: bool = False
    output: Optional[str] = None
    format: str = "json"


# --- reference data --------------------------------------------------------------

EDGE_DIMS = (2, 4)
TRI_DIMS = (2, 2, 2)


def edge_vectors():
    """Integer-coefficient kernel vectors of the two ``tau(b, 0)`` states."""
    a = ket(EDGE_DIMS, (1, (0, 1)), (1, (1, 2)))
    b1 = ket(EDGE_DIMS, (1, (0, 3)), (1, (1, 2)))
    b2 = ket(EDGE_DIMS, (1, (0, 1)), (1, (1, 0)))
    return a, (b1, b2)


def tripartite_vectors():
    p = ket(TRI_DIMS, (1, (1, 1, 1)), (-1, (0, 0, 0)))
    q = ket(TRI_DIMS, (1, (1, 1, 0)), (-1, (0, 0, 1)))
    return p, q


def reference_edge_matrix(eps: float) -> np.ndarray:
    """Reference common edge witness, written out entry by entry."""
    e = eps
    return np.array([
        [-e, 0, 0, 0, 0, 1, 0, 0],
        [0, -e + 2, 0, 0, 0, 0, 1, 0],
        [0, 0, -e, 0, 0, 0, 0, 1],
        [0, 0, 0, -e + 1, 0, 0, 0, 0],
        [0, 0, 0, 0, -e + 1, 0, 0, 0],
        [1, 0, 0, 0, 0, -e, 0, 0],
        [0, 1, 0, 0, 0, 0, -e + 2, 0],
        [0, 0, 1, 0, 0, 0, 0, -e],
    ], dtype=complex)


def reference_tripartite_matrix(k: float) -> np.ndarray:
    """Reference tripartite common witness, written out entry by entry."""
    return np.array([
        [0, 0, 0, 0, 0, 0, 0, -k - 1],
        [0, 1 - k, 0, 0, 0, 0, 0, 0],
        [0, 0, -k, 0, 0, 0, 0, 0],
        [0, 0, 0, -k, 0, 0, 0, 0],
        [0, 0, 0, 0, -k, 0, 0, 0],
        [0, 0, 0, 0, 0, -k, 0, 0],
        [0, 0, 0, 0, 0, 0, 1 - k, 0],
        [-k - 1, 0, 0, 0, 0, 0, 0, 0],
    ], dtype=complex)


def edge_example_witness(eps: float):
    a, bs = edge_vectors()
    P = projector([a], EDGE_DIMS, normalize=False)
    Q = projector(bs, EDGE_DIMS, normalize=False)
    return edge_witness(P, Q, eps, subsystem=0)


def tripartite_example_witness(k: float):
    p, q = tripartite_vectors()
    P = projector([p], TRI_DIMS, normalize=False)
    Q = projector([q], TRI_DIMS, normalize=False)
    return w1_witness(Q, P, k, subsystem=2)


def qutrit_kernel_vectors():
    v1 = ket((3, 3), (1, (1, 1)), (-1, (0, 0)))
    v2 = ket((3, 3), (1, (2, 2)), (-1, (0, 0)))
    return v1, v2


# --- report plumbing -------------------------------------------------------------


class Report:
    def __init__(self, target: str, cfg: RunConfig):
        self.target = target
        self.cfg = cfg
        self.results: dict = {}
        self.checks: list[dict] = []

    def check(self, name: str, ok: bool, detail: str = ""):
        ok = bool(ok)
        self.checks.append({"name": name, "status": "PASS" if ok else "FAIL", "expected": ok, "detail": detail})

    def flag(self, name: str, reproduced: bool, detail: str = ""):
        """Known discrepancy: ``FLAG`` when reproduced, ``FAIL`` when not."""
        reproduced = bool(reproduced)
        self.checks.append({"name": name, "status": "FLAG" if reproduced else "FAIL",
                            "expected": reproduced, "detail": detail})

    @property
    def ok(self) -> bool:
        return all(c["expected"] for c in self.checks)

    def failures(self) -> list[dict]:
        return [c for c in self.checks if not c["expected"]]

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "version": __version__,
            "config": asdict(self.cfg),
            "results": to_jsonable(self.results),
            "checks": self.checks,
            "ok": self.ok,
        }


def to_jsonable(x):
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, TensorOperator):
        return dumps(x)
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return [to_jsonable(v) for v in x]
        return x.tolist()
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if hasattr(x, "to_json"):
        return x.to_json()
    return x


def sign_change_bracket(xs, ys, tol: float = 1e-12) -> tuple[float, float]:
    """Last grid point with ``y >= -tol`` and first with ``y < -tol``, for decreasing ``ys``."""
    neg = np.flatnonzero(np.asarray(ys) < -tol)
    if neg.size == 0 or neg[0] == 0:
        return (np.nan, np.nan)
    i = int(neg[0])
    return float(xs[i - 1]), float(xs[i])


def _mix_traces(W, rho1, rho2, points: int) -> np.ndarray:
    return np.array([evaluate(W, mix2(rho1, rho2, float(lam))) for lam in np.linspace(0, 1, points)])


# --- targets ---------------------------------------------------------------------


def run_example1(cfg: RunConfig) -> Report:
    rep = Report("example1", cfg)
    rho1 = pure_bipartite([1 / np.sqrt(2), 1 / np.sqrt(2), 0.0])
    rho2 = max_entangled(3)
    res = common_npt_witness(rho1, rho2, subsystem=0)
    rep.results.update(method=res.method, intersection_dim=res.intersection_dim, evidence=res.evidence)
    rep.check("intersection-dim-1", res.intersection_dim == 1, f"dim={res.intersection_dim}")
    if not res.found:
        rep.check("common-witness-found", False, res.method)
        return rep
    e_minus = ket((3, 3), (1, (0, 1)), (-1, (1, 0)))
    eta = res.details["eta"]
    overlap = abs(np.vdot(e_minus / np.linalg.norm(e_minus), eta))
    rep.check("eta-is-antisymmetric-01", abs(overlap - 1) < 1e-9, f"|<e-|eta>|={overlap:.12f}")
    t1, t2 = res.evidence
    rep.check("trace-rho1", abs(t1 + 0.5) <= 1e-10, f"{t1!r} vs -1/2")
    rep.check("trace-rho2", abs(t2 + 1 / 3) <= 1e-10, f"{t2!r} vs -1/3")
    traces = _mix_traces(res.witness, rho1, rho2, cfg.grid)
    rep.check("mixes-detected", bool(np.all(traces < -1e-10)), f"max trace {traces.max():.6g}")
    val = validate_witness(res.witness, cfg.restarts, cfg.seed)
    rep.check("witness-nonnegative-on-products", val.is_def3_witness, f"min {val.min_product_expectation:.3e}")
    rep.results.update(witness=res.witness.op, validation=val, mix_traces=traces)
    return rep


def run_example2(cfg: RunConfig, eps: float = 0.1) -> Report:
    rep = Report("example2", cfg)
    d1, d2 = tau(0.4, 0.0), tau(0.5, 0.0)
    for e in (0.1, 0.25, 0.5):
        W = edge_example_witness(e)
        rep.check(f"golden-matrix-eps={e}", bool(np.array_equal(W.op.mat, reference_edge_matrix(e))))
    a, bs = edge_vectors()
    ker = subspace_intersection(kernel_basis(d1), kernel_basis(d2))
    pker = subspace_intersection(kernel_basis(partial_transpose(d1, 0)), kernel_basis(partial_transpose(d2, 0)))
    rep.check("shared-kernel-vector", ker.contains(a), f"kernel dim {ker.dim}")
    rep.check("shared-pt-kernel-vectors", all(pker.contains(b) for b in bs), f"pt-kernel dim {pker.dim}")

    res = common_edge_witness(d1, d2, subsystem=0, offset=eps, paper_mode=cfg.paper_mode,
                              restarts=cfg.restarts, seed=cfg.seed)
    rep.results.update(method=res.method, evidence=res.evidence, eps=eps)
    rep.check("common-witness-found", res.found, res.method)
    if res.found:
        rep.check("evidence-equals-minus-eps", all(abs(t + eps) <= 1e-10 for t in res.evidence),
                  f"{res.evidence}")
        if cfg.paper_mode:
            diff = np.abs(res.witness.op.mat - reference_edge_matrix(eps)).max()
            rep.check("assembled-matches-golden", diff <= 1e-12, f"max diff {diff:.3e}")
        traces = _mix_traces(res.witness, d1, d2, cfg.grid)
        rep.check("mixes-detected", bool(np.all(traces < -1e-10)), f"max trace {traces.max():.6g}")
        rep.results.update(witness=res.witness.op, mix_traces=traces)

    W = edge_example_witness(eps)
    at00 = productopt.product_expectation(W.op, productopt.ProductVector.basis(EDGE_DIMS, (0, 0)))
    val = validate_witness(W, cfg.restarts, cfg.seed)
    rep.results.update(validation=val, expectation_at_00=at00)
    rep.flag("negative-on-product-00", at00 == -eps and abs(val.min_product_expectation + eps) <= 1e-9,
             f"<00|W|00>={at00!r}, product minimum {val.min_product_expectation!r}")
    eps0 = productopt.min_product_expectation(W.base, cfg.restarts, cfg.seed)
    rep.results.update(eps0=eps0)
    rep.flag("eps0-vanishes", eps0.value <= 1e-6, f"eps0 estimate {eps0.value:.3e}")
    return rep


def run_example3(cfg: RunConfig, k: float = 0.25) -> Report:
    rep = Report("example3", cfg)
    d1, d2 = delta_tri(1, 1, 1), delta_tri(1, 2, 2)
    for kk in (0.1, 0.25, 0.5):
        W = tripartite_example_witness(kk)
        rep.check(f"golden-matrix-k={kk}", bool(np.array_equal(W.op.mat, reference_tripartite_matrix(kk))))
    p, q = tripartite_vectors()
    ker = subspace_intersection(kernel_basis(d1), kernel_basis(d2))
    pker = subspace_intersection(kernel_basis(partial_transpose(d1, 2)), kernel_basis(partial_transpose(d2, 2)))
    rep.check("shared-kernel-vector", ker.contains(p), f"kernel dim {ker.dim}")
    rep.check("shared-pt-kernel-vector", pker.contains(q), f"pt-kernel dim {pker.dim}")

    res = common_edge_witness(d1, d2, subsystem=2, offset=k, paper_mode=cfg.paper_mode,
                              restarts=cfg.restarts, seed=cfg.seed)
    rep.results.update(method=res.method, evidence=res.evidence, k=k)
    rep.check("common-witness-found", res.found, res.method)
    if res.found:
        rep.check("evidence-equals-minus-k", all(abs(t + k) <= 1e-10 for t in res.evidence), f"{res.evidence}")
        if cfg.paper_mode:
            diff = np.abs(res.witness.op.mat - reference_tripartite_matrix(k)).max()
            rep.check("assembled-matches-golden", diff <= 1e-12, f"max diff {diff:.3e}")
        traces = _mix_traces(res.witness, d1, d2, cfg.grid)
        rep.check("mixes-detected", bool(np.all(traces < -1e-10)), f"max trace {traces.max():.6g}")
        rep.results.update(witness=res.witness.op, mix_traces=traces)

    W = tripartite_example_witness(k)
    val = validate_witness(W, cfg.restarts, cfg.seed)
    rep.results.update(validation=val)
    rep.flag("negative-on-product-states", not val.is_def3_witness,
             f"product minimum {val.min_product_expectation:.6g}")
    k0 = productopt.min_ratio_product(W.base, W.shift, restarts=cfg.restarts, seed=cfg.seed)
    rep.results.update(k0=k0)
    rep.flag("k0-vanishes", k0.value <= 1e-6, f"k0 estimate {k0.value:.3e}")
    return rep


def run_sn1(cfg: RunConfig) -> Report:
    rep = Report("sn1", cfg)
    s1, s2 = phi_state(0.5, 0.5), phi_state(0.4, 0.6)
    res = common_schmidt_witness([s1, s2])
    rep.results.update(method=res.method, evidence=res.evidence, ranks=res.details.get("schmidt_ranks"))
    rep.check("class-3-common-witness", res.found and res.witness.schmidt_class == 3, res.method)
    c = np.sqrt(0.5)
    expected = 1 - (0.5 + 0.5 + c) ** 2 / 2
    rep.check("trace-phi(0.5,0.5)", abs(res.evidence[0] - expected) <= 1e-10, f"{res.evidence[0]!r}")
    rng = np.random.default_rng(cfg.seed)
    W3 = schmidt_witness(3, 3)
    worst = -np.inf
    for _ in range(100):
        a, b, x, y = rng.uniform(0.25, 0.65, size=4)
        worst = max(worst, evaluate(W3, phi_state(a, b)), evaluate(W3, phi_state(x, y)))
    rep.check("range-draws-all-negative", worst < 0, f"largest trace {worst:.6g}")
    traces = _mix_traces(W3, s1, s2, 11)
    rep.check("mixes-detected", bool(np.all(traces < 0)), f"max trace {traces.max():.6g}")
    return rep


def run_sn2(cfg: RunConfig) -> Report:
    rep = Report("sn2", cfg)
    phi, chi = phi_state(0.5, 0.5), chi_state(0.7)
    res = common_schmidt_witness([phi, chi])
    rep.results.update(method=res.method, evidence=res.evidence, ranks=res.details.get("schmidt_ranks"))
    rep.check("class-2-common-witness", res.found and res.witness.schmidt_class == 2, res.method)
    refused = common_schmidt_witness([phi, chi], k=3)
    rep.check("class-3-refused", not refused.found, ",".join(refused.flags))
    W3 = schmidt_witness(3, 3)
    ts = np.linspace(0, 1, 201)
    worst = min(evaluate(W3, chi_state(t)) for t in ts)
    rep.check("class-3-nonnegative-on-chi", worst >= -1e-12, f"min trace {worst:.3e}")
    traces = _mix_traces(res.witness, phi, chi, 11) if res.found else np.array([np.inf])
    rep.check("mixes-detected", bool(np.all(traces < 0)), f"max trace {traces.max():.6g}")
    return rep


def run_sn3(cfg: RunConfig) -> Report:
    rep = Report("sn3", cfg)
    omega, chi = isotropic(0.5), chi_state(0.7)
    res = common_schmidt_witness([omega, chi], k=2)
    rep.results.update(method=res.method, evidence=res.evidence)
    rep.check("class-2-common-witness", res.found, res.method)
    rep.check("trace-omega", abs(res.evidence[0] + 2 / 3) <= 1e-12, f"{res.evidence[0]!r}")
    W2 = schmidt_witness(3, 2)
    alphas = np.round(np.arange(-0.125, 1.0 + 1e-12, 1e-3), 12)
    traces = np.array([evaluate(W2, isotropic(a)) for a in alphas])
    err = np.abs(traces - (2 - 8 * alphas) / 3).max()
    rep.check("closed-form", err <= 1e-12, f"max error {err:.3e}")
    lo, hi = sign_change_bracket(alphas, traces)
    rep.results.update(sign_change_bracket=(lo, hi))
    rep.check("threshold-0.25", lo <= 0.25 <= hi and hi - lo <= 1e-3 + 1e-12, f"sign change in [{lo}, {hi}]")
    mix = _mix_traces(W2, omega, chi, 11)
    rep.check("mixes-detected", bool(np.all(mix < 0)), f"max trace {mix.max():.6g}")
    return rep


def run_case1(cfg: RunConfig, alpha: float = 3.5, beta: float = 0.5, eps: float = 0.1) -> Report:
    rep = Report("case1", cfg)
    for lam, a, b, want in ((0.5, 3.5, 0.5, "NPT"), (0.9, 3.5, 0.005, "PPT")):
        m = mix2(horodecki_alpha(a), two_level_pure(b), lam)
        lmin = partial_transpose(m, 1).min_eigenvalue()
        got = "NPT" if lmin < -1e-10 else "PPT"
        rep.check(f"spot-lambda={lam}-beta={b}", got == want, f"min PT eigenvalue {lmin:.6g} -> {got}")

    # classification regions on a grid
    npt_ok = all(
        partial_transpose(mix2(horodecki_alpha(a), two_level_pure(b), lam), 1).min_eigenvalue() < -1e-10
        for a in (3.05, 3.5, 3.9) for b in np.linspace(0.08, 0.99, 14) for lam in np.linspace(0, 0.74, 38)
    )
    ppt_ok = all(
        partial_transpose(mix2(horodecki_alpha(a), two_level_pure(b), lam), 1).min_eigenvalue() >= -1e-10
        for a in (3.05, 3.5, 3.9) for b in np.linspace(0.0, 0.01, 6) for lam in np.linspace(0.75, 1, 26)
    )
    rep.check("npt-region", npt_ok)
    rep.check("ppt-region", ppt_ok)

    rho1, rho2 = horodecki_alpha(alpha), two_level_pure(beta)
    ker = subspace_intersection(kernel_basis(rho1), kernel_basis(rho2))
    Wnd = projector_minus_eps(projector([ker.basis[:, 0]], (3, 3)), eps) if ker.dim else None
    scan = lambda_scan(rho1, rho2, cfg.grid, subsystem=1, witness=Wnd,
                       params={"alpha": alpha, "beta": beta, "eps": eps})
    rep.results.update(scan=scan, boundaries=scan.boundaries())
    advice = decomposability_advice(rho1, rho2)
    rep.results.update(advice={"tag": advice.tag, "ppt": advice.ppt, "caveats": advice.caveats})
    rep.check("advice-nondecomposable", advice.tag == NONDECOMPOSABLE_REQUIRED, advice.tag)

    mid = mix2(rho1, rho2, 0.5)
    Wd = witness_from_npt_eigvec(mid, 1)
    td = (evaluate(Wd, mid), evaluate(Wd, rho2), evaluate(Wd, rho1))
    rep.results.update(decomposable_traces=td)
    rep.check("decomposable-misses-ppt-state", td[0] < 0 and td[1] < 0 and td[2] >= 0, f"{td}")

    rep.check("shared-kernel-nonempty", ker.dim > 0, f"dim {ker.dim}")
    if Wnd is not None:
        tr = scan.detected_by
        rep.check("nondecomposable-traces-minus-eps", np.abs(tr + eps).max() <= 1e-10,
                  f"max |trace + eps| {np.abs(tr + eps).max():.3e}")
        eps0 = productopt.min_product_expectation(Wnd.base, cfg.restarts, cfg.seed)
        rep.results.update(eps0=eps0, nondecomposable_witness=Wnd.op)
        rep.flag("eps0-vanishes", eps0.value <= 1e-6, f"eps0 estimate {eps0.value:.3e}")
    literal = two_level_pure_literal(beta)
    rep.results.update(literal_pure_state_trace=literal.trace())
    return rep


def run_case2(cfg: RunConfig, alpha: float = 3.5, gamma: float = 4.5, eps: float = 0.1) -> Report:
    rep = Report("case2", cfg)
    u1, u2 = horodecki_alpha(alpha), horodecki_alpha(gamma)
    v1, v2 = qutrit_kernel_vectors()
    P = projector([v1, v2], (3, 3), normalize=not cfg.paper_mode)
    G = projector_minus_eps(P, eps)
    scan = lambda_scan(u1, u2, cfg.grid, subsystem=1, witness=G,
                       params={"alpha": alpha, "gamma": gamma, "eps": eps})
    lam_star = (gamma - 4) / (gamma - alpha)
    b = scan.boundaries()
    rep.results.update(scan=scan, boundaries=b, lambda_star=lam_star)
    step = 1.0 / (cfg.grid - 1)
    ok = len(b) == 1 and b[0][2:] == ("NPT", "PPT") and b[0][0] - step <= lam_star <= b[0][1] + 1e-12
    rep.check("boundary-brackets-lambda-star", ok, f"boundaries {b}, lambda*={lam_star:.6g}")
    for lam in (0.0, 0.3, 0.7, 1.0):
        m = mix2(u1, u2, lam)
        same = horodecki_alpha(lam * alpha + (1 - lam) * gamma)
        rep.check(f"mix-is-family-member-lambda={lam}", np.abs(m.mat - same.mat).max() <= 1e-12)

    residue = max(abs(evaluate(P, mix2(u1, u2, float(lam)))) for lam in scan.lambda_grid)
    rep.check("kernel-vectors-annihilate-segment", residue <= 1e-12, f"max Tr(P Y) {residue:.3e}")
    tr = scan.detected_by
    rep.check("gamma-traces-minus-eps", np.abs(tr + eps).max() <= 1e-10, f"max |trace + eps| {np.abs(tr + eps).max():.3e}")
    eps0 = productopt.min_product_expectation(P, cfg.restarts, cfg.seed)
    rep.results.update(eps0=eps0, witness=G.op)
    rep.flag("eps0-vanishes", eps0.value <= 1e-6, f"eps0 estimate {eps0.value:.3e}")
    advice = decomposability_advice(u1, u2)
    rep.check("advice-nondecomposable", advice.tag == NONDECOMPOSABLE_REQUIRED, advice.tag)
    return rep


RUNNERS: dict[str, Callable[..., Report]] = {
    "example1": run_example1,
    "example2": run_example2,
    "example3": run_example3,
    "sn1": run_sn1,
    "sn2": run_sn2,
    "sn3": run_sn3,
    "case1": run_case1,
    "case2": run_case2,
}


def run_reproduce(target: str, cfg: Optional[RunConfig] = None, **params) -> Report:
    if target not in RUNNERS:
        raise KeyError(f"unknown target {target!r}; choose from {', '.join(TARGETS)}")
    return RUNNERS[target](cfg or RunConfig(), **params)
