"""Stability certificates for delayed positive systems.

A certificate is a positive vector v with

    continuous:  f(v) + sum_q g_q(v) < 0
    discrete:    f(v) + sum_q g_q(v) < v

Existence is equivalent to delay-independent global asymptotic stability
(continuous any degree, discrete degree zero; discrete positive degree gets
a local claim).  For linear systems the condition is an LP feasibility in v
solved here directly: for a Hurwitz Metzler matrix M, the solution of
M v = -1 is automatically positive, which makes the linear route
deterministic and solver-free.

For nonlinear homogeneous fields the sign pattern of the margins is
constant along each dilation orbit, so the best-effort search explores only
direction space (rays of the positive simplex) and refines the best ray by
multiplicative coordinate descent.  A failed search is NOT a proof of
infeasibility and is reported as plain absence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import (
    CONTINUOUS,
    DISCRETE,
    Certificate,
    PolyVectorField,
    SystemModel,
    dilate,
    is_homogeneous,
)

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class CertificateSearchConfig:
    ray_samples: int = 256
    refine_iters: int = 200
    tolerance: float = DEFAULT_TOLERANCE
    seed: int = 0

    def __post_init__(self):
        if self.ray_samples < 1 or self.refine_iters < 0:
            raise ValueError("search budget must be positive")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")


def margins(model: SystemModel, v: Sequence[float]) -> list[float]:
    """Per-component certificate residuals at v (negative means stable)."""
    out = model.f.evaluate(v)
    gs = model.delayed_sum_at(v)
    for i in range(model.n):
        out[i] += gs[i]
        if model.is_discrete:
            out[i] -= v[i]
    return out


def stability_claim(model: SystemModel) -> str:
    """What a valid certificate buys: global, except discrete positive degree."""
    if model.is_discrete and model.degree > 0.0:
        return "local"
    return "global"


def verify_certificate(
    model: SystemModel,
    v: Sequence[float],
    tolerance: float = DEFAULT_TOLERANCE,
    provenance: str = "user-supplied",
) -> Certificate:
    """Evaluate the margins at v and decide validity.

    Validity requires margin_i < -tolerance * (1 + |f_i(v)|) for all i, so
    a margin that is merely zero up to rounding is rejected (the theory
    needs strict inequality).
    """
    v = tuple(float(x) for x in v)
    if len(v) != model.n:
        raise ValueError(f"certificate vector has length {len(v)}, model n={model.n}")
    if min(v) <= 0.0:
        raise ValueError("certificate vector must be strictly positive")
    m = margins(model, v)
    fv = model.f.evaluate(v)
    valid = all(mi < -tolerance * (1.0 + abs(fi)) for mi, fi in zip(m, fv))
    return Certificate(
        v=v, margins=tuple(m), valid=valid,
        provenance=provenance, claim=stability_claim(model),
    )


# -- linear route -------------------------------------------------------------


def _as_matrix(M) -> np.ndarray:
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    return A


def _require_metzler(A: np.ndarray) -> None:
    off = A - np.diag(np.diag(A))
    if off.min(initial=0.0) < 0.0:
        i, j = np.unravel_index(np.argmin(off), off.shape)
        raise ValueError(f"matrix is not Metzler: entry ({i},{j}) = {A[i, j]}")


def _require_nonnegative(A: np.ndarray, what: str) -> None:
    if A.min(initial=0.0) < 0.0:
        i, j = np.unravel_index(np.argmin(A), A.shape)
        raise ValueError(f"{what} is not nonnegative: entry ({i},{j}) = {A[i, j]}")


def spectral_radius(M) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(_as_matrix(M)))))


def hurwitz_metzler(M) -> bool:
    """Stability test for a Metzler matrix.

    Primary route: M v = -1 has a strictly positive solution exactly when M
    is Hurwitz (Metzler theory).  The eigenvalue spectral abscissa is
    computed as a cross-check and the two must agree.
    """
    A = _as_matrix(M)
    _require_metzler(A)
    try:
        v = np.linalg.solve(A, -np.ones(A.shape[0]))
        solve_says = bool(np.all(v > 0.0))
    except np.linalg.LinAlgError:
        solve_says = False
    eig_says = bool(np.max(np.linalg.eigvals(A).real) < 0.0)
    return solve_says and eig_says


def find_certificate_linear(A, B_list, kind: str) -> np.ndarray | None:
    """Certificate for a linear system from the matrix condition.

    Continuous (A Metzler, B_q nonnegative): feasible iff M = A + sum B_q is
    Hurwitz; then v solving M v = -1 is positive with margins exactly -1.
    Discrete (A, B_q nonnegative): feasible iff the spectral radius of M is
    below one; then v = (I - M)^(-1) 1 >= 1 with (M v) = v - 1 < v.
    Returns None when the spectral condition fails (the corollary is also
    necessary, so absence is conclusive on this route).
    """
    A = _as_matrix(A)
    Bs = [_as_matrix(B) for B in B_list]
    if any(B.shape != A.shape for B in Bs):
        raise ValueError("A and every B must share one shape")
    for q, B in enumerate(Bs):
        _require_nonnegative(B, f"B_{q}")
    M = A + sum(Bs) if Bs else A.copy()
    if kind == CONTINUOUS:
        _require_metzler(A)
        if not hurwitz_metzler(M):
            return None
        v = np.linalg.solve(M, -np.ones(A.shape[0]))
    elif kind == DISCRETE:
        _require_nonnegative(A, "A")
        if spectral_radius(M) >= 1.0:
            return None
        v = np.linalg.solve(np.eye(A.shape[0]) - M, np.ones(A.shape[0]))
    else:
        raise ValueError(f"kind must be {CONTINUOUS!r} or {DISCRETE!r}")
    if np.min(v) <= 0.0:  # cannot happen for a stable Metzler/nonnegative M
        return None
    return v


def linear_model(A, B_list, kind: str) -> SystemModel:
    """Wrap matrices as a SystemModel (standard dilation, degree zero)."""
    from .model import Dilation

    A = _as_matrix(A)
    fields = tuple(PolyVectorField.from_matrix(B) for B in B_list)
    if not fields:
        fields = (PolyVectorField.zero(A.shape[0]),)
    return SystemModel(
        kind=kind,
        f=PolyVectorField.from_matrix(A),
        delayed_terms=fields,
        dilation=Dilation((1.0,) * A.shape[0]),
        degree=0.0,
    )


# -- nonlinear route ----------------------------------------------------------


def _ray_score(model: SystemModel, u: Sequence[float]) -> float:
    """Worst normalized margin along a simplex direction (lower is better)."""
    m = margins(model, u)
    return max(mi / ui for mi, ui in zip(m, u))


def _refine_ray(
    model: SystemModel, u: list[float], iters: int
) -> tuple[list[float], float]:
    """Multiplicative coordinate descent on the simplex direction."""
    n = len(u)
    score = _ray_score(model, u)
    delta = 0.5
    for _ in range(iters):
        improved = False
        for j in range(n):
            for factor in (1.0 + delta, 1.0 / (1.0 + delta)):
                w = list(u)
                w[j] *= factor
                total = sum(w)
                w = [wi / total for wi in w]
                s = _ray_score(model, w)
                if s < score:
                    u, score = w, s
                    improved = True
        if not improved:
            delta *= 0.5
            if delta < 1e-9:
                break
    return u, score


def find_certificate_nonlinear(
    model: SystemModel, cfg: CertificateSearchConfig | None = None
) -> np.ndarray | None:
    """Best-effort certificate search for a homogeneous model.

    Homogeneity makes the margin signs constant along dilation orbits, so
    only simplex directions are sampled; the most promising rays are then
    refined by coordinate descent.  For discrete systems of positive degree
    every direction admits a certificate after shrinking along its orbit,
    so a feasible scale is computed directly.

    Returns a verified certificate vector, or None once the budget is
    exhausted.  None does NOT prove that no certificate exists.
    """
    cfg = cfg or CertificateSearchConfig()
    n = model.n
    if cfg.ray_samples < n:
        raise ValueError(f"ray_samples={cfg.ray_samples} must be at least n={n}")
    for field_ in (model.f, *model.delayed_terms):
        ok, witness = is_homogeneous(field_, model.dilation, model.degree)
        if not ok:
            raise ValueError(f"model failed the exact homogeneity check: {witness}")

    rng = np.random.default_rng(cfg.seed)
    rays: list[list[float]] = [[1.0 / n] * n]
    for i in range(n):
        corner = [0.1 / max(n - 1, 1)] * n
        corner[i] = 0.9
        total = sum(corner)
        rays.append([c / total for c in corner])
    for row in rng.dirichlet(np.ones(n), size=cfg.ray_samples):
        rays.append([max(float(x), 1e-12) for x in row])

    scored = sorted(((_ray_score(model, u), k) for k, u in enumerate(rays)))
    best_u, best_score = None, math.inf
    for s0, k in scored[: max(4, n)]:
        u, s = _refine_ray(model, list(rays[k]), cfg.refine_iters)
        if s < best_score:
            best_u, best_score = u, s

    if best_u is None:
        return None

    if model.is_discrete and model.degree > 0.0:
        # pick a point far enough down the dilation orbit of the best ray:
        # f + g scales by lam**(p + r_i) against the identity's lam**r_i,
        # so any lam**p below min_i u_i / h_i(u) gives strict margins
        h = model.f.evaluate(best_u)
        gsum = model.delayed_sum_at(best_u)
        ratios = []
        for ui, hi, gi in zip(best_u, h, gsum):
            total = hi + gi
            if total > 0.0:
                ratios.append(ui / total)
            elif total < 0.0:
                return None  # violates the non-decreasing regime; give up
        lam_p = 0.5 * min(ratios) if ratios else 0.5
        lam = lam_p ** (1.0 / model.degree)
        candidate = dilate(model.dilation, lam, best_u)
    else:
        if best_score >= 0.0:
            return None
        candidate = tuple(best_u)

    cert = verify_certificate(model, candidate, cfg.tolerance, provenance="ray-search")
    return np.array(cert.v) if cert.valid else None
