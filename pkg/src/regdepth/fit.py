"""Maximum-depth fit: the depth-induced median of a regression sample.

For p == 2 the maximiser of the indicator-form depth over all of R^2 is
attained on the candidate set of lines through two observations with
distinct x (the depth is piecewise constant on the dual-line arrangement
and can only rise on cell boundaries, so arrangement vertices dominate;
the acceptance suite validates this against a dense beta-grid oracle).
``fit_exact_p2`` enumerates exactly that candidate set.  Ties in the
maximal depth -- exact integer-count ties -- are deduplicated within 1e-9
in beta and resolved by averaging the tied candidates.

Candidate lines are scored with their two (or more) defining observations
lying exactly on them: the interpolation conditions hold by construction,
so those residuals are zero in exact arithmetic even where solving the
2x2 system in floats would leave ulp-level noise.  On dyadic inputs this
coincides with plain float evaluation.

``fit_search`` is the general-p derivative-free fallback: multi-start
simplex descent on the negated depth from a least-squares fit plus seeded
perturbations, followed by a deterministic axis pattern polish.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .core import DepthValue, ObservationSet, ParamVector, UnitDirection, design_matrix
from .empirical import _cut_scan_p2, rd_normalized
from . import _fitkernel

__all__ = ["FitResult", "fit_exact_p2", "fit_search"]

TIE_DEDUP_TOL = 1e-9


@dataclass(frozen=True)
class FitResult:
    """Outcome of a deepest-fit computation.

    ``beta_hat`` is the fit (the tie-set average when several candidates
    attain the maximal depth), ``depth`` its depth, ``tie_set_size`` the
    number of distinct maximising candidates, ``method`` the provenance tag
    and ``evaluations`` the number of candidate evaluations (pairs for the
    exact enumerator, objective calls for the search).
    """

    beta_hat: ParamVector
    depth: DepthValue
    tie_set_size: int
    method: str
    evaluations: int


def _candidate_online_mask(xs: np.ndarray, ys: np.ndarray, a: int, slope: float) -> np.ndarray:
    """Points lying exactly on the candidate line anchored at sorted position a."""
    online = np.zeros(xs.size, dtype=bool)
    online[a] = True
    same_x = xs == xs[a]
    online |= same_x & (ys == ys[a])
    with np.errstate(divide="ignore", invalid="ignore"):
        m = (ys - ys[a]) / (xs - xs[a])
    online |= (~same_x) & (m == slope)
    return online


def _candidate_depth_count(xs: np.ndarray, ys: np.ndarray, a: int, slope: float):
    """Exact depth count and witness of the line through sorted position a."""
    online = _candidate_online_mask(xs, ys, a, slope)
    b0 = ys[a] - slope * xs[a]
    r = ys - b0 - slope * xs
    r[online] = 0.0
    return _cut_scan_p2(xs, r)


def _dedup_average(cands: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cluster candidate betas within the dedup tolerance and average.

    Returns (tie set representatives sorted lexicographically, their mean).
    """
    order = np.lexsort((cands[:, 1], cands[:, 0]))
    cands = cands[order]
    reps: list[np.ndarray] = []
    members: list[list[np.ndarray]] = []
    for row in cands:
        placed = False
        for i, rep in enumerate(reps):
            if np.max(np.abs(row - rep)) <= TIE_DEDUP_TOL:
                members[i].append(row)
                placed = True
                break
        if not placed:
            reps.append(row)
            members.append([row])
    tie = np.array([np.mean(group, axis=0) for group in members])
    return tie, tie.mean(axis=0)


def fit_exact_p2(dataset: ObservationSet) -> FitResult:
    """Exact deepest fit for simple regression by pairwise-line enumeration.

    Every line through two observations with distinct x is scored with the
    exact indicator-count depth (a rotating sweep around each anchor keeps
    this affordable at large n); the maximisers are deduplicated and
    averaged per the tie rule.
    """
    if dataset.p != 2:
        raise ValueError(f"exact enumeration needs p == 2, got p = {dataset.p}")
    x = dataset.X[:, 0]
    if np.unique(x).size < 2:
        raise ValueError("all covariate values identical: no non-vertical candidate line")
    xs, ys, gid, G, _ = _fitkernel.prepare_sorted(x, dataset.y)
    best, nevents, anchors, slopes = _fitkernel.sweep_deepest(xs, ys, gid, G)
    cands = np.column_stack([ys[anchors] - slopes * xs[anchors], slopes])
    tie, beta_hat = _dedup_average(cands)
    n = dataset.n
    if tie.shape[0] == 1:
        beta_hat = tie[0]
        count, witness = _candidate_depth_count(xs, ys, int(anchors[0]), float(slopes[0]))
        if count != best:  # pragma: no cover - internal consistency
            raise AssertionError("sweep count disagrees with direct candidate evaluation")
        depth = DepthValue(normalized=best / n, count=float(best), exact=True,
                           witness_direction=UnitDirection(witness))
    else:
        depth = rd_normalized(dataset, beta_hat)
    return FitResult(
        beta_hat=ParamVector(beta_hat),
        depth=depth,
        tie_set_size=int(tie.shape[0]),
        method="exact_p2",
        evaluations=nevents // 2,
    )


def _fit_exact_p2_reference(dataset: ObservationSet):
    """Literal pairwise enumeration; slow test oracle for fit_exact_p2.

    Returns (max count, tie set, beta average).
    """
    x = dataset.X[:, 0]
    xs, ys, gid, G, _ = _fitkernel.prepare_sorted(x, dataset.y)
    n = dataset.n
    best = -1
    rows = []
    for i in range(n):
        for j in range(i + 1, n):
            if xs[i] == xs[j]:
                continue
            m = (ys[j] - ys[i]) / (xs[j] - xs[i])
            count, _ = _candidate_depth_count(xs, ys, i, m)
            b0 = ys[i] - m * xs[i]
            if count > best:
                best = count
                rows = [(b0, m)]
            elif count == best:
                rows.append((b0, m))
    tie, avg = _dedup_average(np.array(rows))
    return best, tie, avg


def fit_search(dataset: ObservationSet, restarts: int, seed: int) -> FitResult:
    """Derivative-free deepest-fit search for any p >= 2.

    Multi-start simplex descent on the negated depth (the depth evaluator
    is exact for p == 2 and direction-sampled otherwise), started from the
    least-squares fit plus seeded Gaussian perturbations, then polished by
    a deterministic axis pattern search.  Never claims exactness.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    p = dataset.p
    W = design_matrix(dataset)
    lsq, *_ = np.linalg.lstsq(W, dataset.y, rcond=None)
    scale = 1.0 + np.abs(lsq)
    rng = np.random.default_rng(seed)
    starts = [lsq]
    for _ in range(restarts - 1):
        starts.append(lsq + scale * rng.standard_normal(p))

    evals = 0
    best_beta = None
    best_val = -1.0

    def objective(beta: np.ndarray) -> float:
        nonlocal evals, best_beta, best_val
        evals += 1
        val = rd_normalized(dataset, beta).normalized
        if val > best_val:
            best_val = val
            best_beta = beta.copy()
        return -val

    for x0 in starts:
        simplex = np.vstack([x0] + [x0 + 0.5 * scale * e for e in np.eye(p)])
        minimize(objective, x0, method="Nelder-Mead",
                 options={"initial_simplex": simplex, "maxiter": 200 * p,
                          "xatol": 1e-6, "fatol": 1e-12})
    # axis pattern polish; the objective is piecewise constant, so walk
    # shrinking steps and keep strict improvements
    step = 0.5 * scale
    while np.max(step) > 1e-6:
        improved = False
        for j in range(p):
            for sgn in (1.0, -1.0):
                cand = best_beta.copy()
                cand[j] += sgn * step[j]
                prev = best_val
                objective(cand)  # records any strict improvement
                if best_val > prev:
                    improved = True
        if not improved:
            step = step / 2.0
    depth = rd_normalized(dataset, best_beta)
    return FitResult(
        beta_hat=ParamVector(best_beta),
        depth=depth,
        tie_set_size=1,
        method="search",
        evaluations=evals,
    )
