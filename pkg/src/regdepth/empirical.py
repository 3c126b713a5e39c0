"""Empirical regression depth of a candidate fit, in four formulations.

All formulations measure how deeply the hyperplane of a fit beta sits
inside the sample.  Writing r_i for the residuals and w_i = (1, x_i) for
the extended covariates:

* ``rd_normalized`` -- the directional-indicator form: the minimum over
  unit directions v of (1/n) * #{i : r_i * (v @ w_i) >= 0}.  This is the
  canonical definition used by the fit and the asymptotics modules.
* ``rd_count_cut`` -- the strict two-sided cut count: minimise over an
  orientation u and a cut position c the smaller of the two strict counts
  #{r_i * (u @ x_i - c) > 0} and #{... < 0}.  Agrees with n times the
  indicator form whenever no residual is zero and the projected covariates
  are distinct; zero residuals drop out of it entirely.
* ``rd_sign_sum`` -- n/2 + (1/2) * min over unit gamma of
  sum_i sign(r_i) * sign(w_i @ gamma).  Directions orthogonal to some w_i
  matter here (sign 0 can lower the sum), so they are enumerated.
* ``rd_bruteforce_oracle`` -- the indicator form minimised over a dense
  deterministic direction grid.  Slow and approximate-from-above by
  construction; used as ground truth in tests.

For p == 2 the first three are computed exactly: the indicator count is
piecewise constant in the direction angle, and sweeping the circle is
equivalent to scanning vertical cut positions between consecutive distinct
covariate values (both semicircles map onto cut scans, one per
orientation).  For p >= 3 a nested quasi-uniform direction lattice plus
deterministic local refinement is used and results are flagged inexact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DepthValue,
    ObservationSet,
    UnitDirection,
    as_params,
    design_matrix,
    residuals,
)
from .directions import kronecker_sphere, fibonacci_sphere, tangent_basis

__all__ = [
    "DirectionCellDecomposition",
    "decompose_directions_p2",
    "rd_normalized",
    "rd_count_cut",
    "rd_sign_sum",
    "rd_bruteforce_oracle",
]

DEFAULT_DIRECTION_BUDGET = 512


# ---------------------------------------------------------------------------
# direction-cell decomposition of the circle (p == 2)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DirectionCellDecomposition:
    """Partition of the circle into arcs on which every sign(v @ w_i) is constant.

    ``critical_angles`` are the sorted angles where some v @ w_i changes
    sign (at most 2n of them; duplicated covariates collapse);
    ``cell_midpoints`` hold one interior representative per open arc and
    ``boundary_directions`` the directions orthogonal to some w_i.
    """

    critical_angles: np.ndarray
    cell_midpoints: list[UnitDirection]
    boundary_directions: list[UnitDirection]


def decompose_directions_p2(dataset: ObservationSet) -> DirectionCellDecomposition:
    """Split the direction circle into sign-constant cells (p == 2 only)."""
    if dataset.p != 2:
        raise ValueError(f"direction-cell decomposition needs p == 2, got p = {dataset.p}")
    x = dataset.X[:, 0]
    phi = np.arctan2(x, 1.0)
    two_pi = 2.0 * np.pi
    crit = np.unique(np.concatenate([(phi + np.pi / 2) % two_pi,
                                     (phi - np.pi / 2) % two_pi]))
    nxt = np.roll(crit, -1).copy()
    nxt[-1] += two_pi
    mids = ((crit + nxt) / 2.0) % two_pi
    return DirectionCellDecomposition(
        critical_angles=crit,
        cell_midpoints=[UnitDirection.from_angle(t) for t in mids],
        boundary_directions=[UnitDirection.from_angle(t) for t in crit],
    )


# ---------------------------------------------------------------------------
# exact p == 2 engines (cut-position scan over the sorted covariate)
# ---------------------------------------------------------------------------

def _cut_scan_p2(x: np.ndarray, r: np.ndarray) -> tuple[int, np.ndarray]:
    """Exact minimum indicator count over all directions, for p == 2.

    Scanning cut positions u between consecutive distinct x values is
    equivalent to sweeping the direction circle: directions in the upper
    semicircle give counts A(k) = #{r>0 right of cut} + #{r<0 left of cut},
    the lower semicircle gives the mirrored B(k), and (+-1, 0) are the
    k = 0 / k = n limits.  Zero residuals contribute 1 in every direction.

    Returns (min count, witness unit direction).
    """
    n = x.size
    order = np.argsort(x, kind="stable")
    xs = x[order]
    rs = r[order]
    n0 = int(np.sum(rs == 0.0))
    pos = rs > 0.0
    neg = rs < 0.0
    P = int(pos.sum())
    N = int(neg.sum())
    S = np.concatenate([[0], np.cumsum(neg.astype(np.int64) - pos.astype(np.int64))])
    valid = np.ones(n + 1, dtype=bool)
    if n > 1:
        valid[1:n] = xs[:-1] < xs[1:]
    Sv = np.where(valid, S, np.iinfo(np.int64).max // 2)
    kA = int(np.argmin(Sv))
    a_min = P + int(S[kA])
    Sv = np.where(valid, S, np.iinfo(np.int64).min // 2)
    kB = int(np.argmax(Sv))
    b_min = N - int(S[kB])

    def cut_direction(k: int, upper: bool) -> np.ndarray:
        if k == 0:
            return np.array([1.0, 0.0]) if upper else np.array([-1.0, 0.0])
        if k == n:
            return np.array([-1.0, 0.0]) if upper else np.array([1.0, 0.0])
        u = 0.5 * (xs[k - 1] + xs[k])
        v = np.array([-u, 1.0]) if upper else np.array([u, -1.0])
        return v / np.linalg.norm(v)

    if a_min <= b_min:
        witness = cut_direction(kA, upper=True)
        best = a_min
    else:
        witness = cut_direction(kB, upper=False)
        best = b_min
    return n0 + best, witness


def _indicator_counts(W: np.ndarray, r: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Count #{i : r_i * (w_i @ v) >= 0} for each direction row of V."""
    prod = (r[:, None] * (W @ V.T)) >= 0.0
    return prod.sum(axis=0)


def _rd_by_cell_midpoints(dataset: ObservationSet, beta) -> int:
    """Reference evaluation of the p == 2 minimum over all cell midpoints.

    Kept as an independent cross-check of the cut scan; the two must agree
    exactly (boundary directions can never go below the open cells because
    v @ w_i == 0 makes the indicator 1).
    """
    decomp = decompose_directions_p2(dataset)
    V = np.array([d.v for d in decomp.cell_midpoints])
    r = residuals(dataset, beta)
    return int(_indicator_counts(design_matrix(dataset), r, V).min())


# ---------------------------------------------------------------------------
# sampled mode for p >= 3
# ---------------------------------------------------------------------------

def _refine_direction(W, r, v0, counts_fn, rounds: int = 8) -> tuple[int, np.ndarray]:
    """Deterministic tangent-pattern descent from v0 on the given count objective."""
    v = v0.copy()
    best = int(counts_fn(v[None, :])[0])
    step = np.pi / 8
    for _ in range(rounds):
        T = tangent_basis(v)
        cands = np.concatenate([v[None, :] + step * T, v[None, :] - step * T])
        cands /= np.linalg.norm(cands, axis=1)[:, None]
        cnts = counts_fn(cands)
        j = int(np.argmin(cnts))
        if cnts[j] < best:
            best = int(cnts[j])
            v = cands[j]
        else:
            step /= 2.0
    return best, v


def _sampled_min(W: np.ndarray, r: np.ndarray, budget: int,
                 counts_fn) -> tuple[int, np.ndarray]:
    """Minimum of a direction-count objective over a nested lattice.

    The candidate set is the first ``budget`` Kronecker lattice points with
    their antipodes, plus one local refinement started from the incumbent of
    every power-of-two prefix.  Because prefixes are nested and refinements
    are attached to fixed prefixes, the result is non-increasing in budget.
    """
    p = W.shape[1]
    lattice = kronecker_sphere(budget, p)
    V = np.concatenate([lattice, -lattice])
    cnts = counts_fn(V)
    j = int(np.argmin(cnts))
    best, best_v = int(cnts[j]), V[j]
    block = 1
    while block <= budget:
        sub = np.concatenate([lattice[:block], -lattice[:block]])
        scnt = counts_fn(sub)
        k = int(np.argmin(scnt))
        ref_cnt, ref_v = _refine_direction(W, r, sub[k], counts_fn)
        if ref_cnt < best:
            best, best_v = ref_cnt, ref_v
        block *= 2
    return best, best_v


# ---------------------------------------------------------------------------
# public depth operations
# ---------------------------------------------------------------------------

def rd_normalized(dataset: ObservationSet, beta, dirs: int | None = None) -> DepthValue:
    """Directional-indicator regression depth of ``beta`` on the sample.

    Exact for p == 2 (full scan of the direction cells); for p >= 3 the
    minimum is taken over ``dirs`` quasi-uniform directions, their
    antipodes, and local refinements, and flagged inexact.
    """
    pv = as_params(beta, dataset.p)
    r = residuals(dataset, pv)
    n = dataset.n
    if dataset.p == 2:
        count, witness = _cut_scan_p2(dataset.X[:, 0], r)
        return DepthValue(normalized=count / n, count=float(count), exact=True,
                          witness_direction=UnitDirection(witness))
    budget = DEFAULT_DIRECTION_BUDGET if dirs is None else int(dirs)
    if budget < 1:
        raise ValueError("direction budget must be >= 1")
    W = design_matrix(dataset)
    count, witness = _sampled_min(W, r, budget, lambda V: _indicator_counts(W, r, V))
    return DepthValue(normalized=count / n, count=float(count), exact=False,
                      witness_direction=UnitDirection(witness))


def _strict_cut_counts(r: np.ndarray, t: np.ndarray, cuts: np.ndarray) -> np.ndarray:
    """min(#{r(t-c) > 0}, #{r(t-c) < 0}) for every cut c (strict on purpose)."""
    s = r[:, None] * (t[:, None] - cuts[None, :])
    return np.minimum((s > 0.0).sum(axis=0), (s < 0.0).sum(axis=0))


def _cuts_for(t: np.ndarray) -> np.ndarray:
    """Candidate cut positions: the projected values themselves, midpoints of
    consecutive distinct values, and one cut outside each end.  The exact
    values matter because the inequalities are strict: a cut at t_i removes
    the i-th term from both sides."""
    tu = np.unique(t)
    mids = 0.5 * (tu[:-1] + tu[1:]) if tu.size > 1 else np.empty(0)
    span = max(1.0, tu[-1] - tu[0])
    return np.concatenate([[tu[0] - span], tu, mids, [tu[-1] + span]])


def rd_count_cut(dataset: ObservationSet, beta, dirs: int | None = None) -> DepthValue:
    """Strict two-sided cut-count depth (raw count, normalized = count/n).

    Exact for p == 2, where the orientation reduces to u in {+1, -1} on the
    scalar covariate.  For p >= 3 the orientation is sampled from a
    quasi-uniform lattice on the covariate sphere and the result is flagged
    inexact.
    """
    pv = as_params(beta, dataset.p)
    r = residuals(dataset, pv)
    n = dataset.n
    if dataset.p == 2:
        x = dataset.X[:, 0]
        best = n
        for u in (1.0, -1.0):
            t = u * x
            best = min(best, int(_strict_cut_counts(r, t, _cuts_for(t)).min()))
        return DepthValue(normalized=best / n, count=float(best), exact=True)
    budget = DEFAULT_DIRECTION_BUDGET if dirs is None else int(dirs)
    if budget < 1:
        raise ValueError("direction budget must be >= 1")
    U = kronecker_sphere(budget, dataset.p - 1)
    best = n
    for u in U:
        t = dataset.X @ u
        best = min(best, int(_strict_cut_counts(r, t, _cuts_for(t)).min()))
    return DepthValue(normalized=best / n, count=float(best), exact=False)


def rd_sign_sum(dataset: ObservationSet, beta, dirs: int | None = None) -> DepthValue:
    """Sign-sum depth n/2 + (1/2) * min over gamma of sum sign(r_i) sign(w_i @ gamma).

    Unlike the indicator form, directions orthogonal to some w_i can
    strictly lower the sum (sign 0 kills a +1 term), so for p == 2 the scan
    covers the open direction cells and every boundary direction.  The
    value can be a half-integer; it is stored in ``count`` with
    normalized = count / n.
    """
    pv = as_params(beta, dataset.p)
    r = residuals(dataset, pv)
    n = dataset.n
    if dataset.p == 2:
        x = dataset.X[:, 0]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        gs = np.sign(r[order])
        G = gs.sum()
        pre = np.concatenate([[0.0], np.cumsum(gs)])
        valid = np.ones(n + 1, dtype=bool)
        if n > 1:
            valid[1:n] = xs[:-1] < xs[1:]
        cell_vals = np.concatenate([(G - 2.0 * pre)[valid], (2.0 * pre - G)[valid]])
        # boundary gamma orthogonal to w at each distinct covariate value
        xd, first = np.unique(xs, return_index=True)
        cum_incl = np.concatenate([[0.0], np.cumsum(gs)])
        last = np.concatenate([first[1:], [n]])
        below = cum_incl[first]          # sum of signs with x < xd
        upto = cum_incl[last]            # sum of signs with x <= xd
        bnd = (G - upto) - below
        best = float(min(cell_vals.min(), bnd.min(), (-bnd).min()))
        value = n / 2.0 + 0.5 * best
        witness = _sign_sum_witness(xs, gs, valid, G, pre, xd, bnd, best, n)
        return DepthValue(normalized=value / n, count=value, exact=True,
                          witness_direction=witness)
    budget = DEFAULT_DIRECTION_BUDGET if dirs is None else int(dirs)
    if budget < 1:
        raise ValueError("direction budget must be >= 1")
    W = design_matrix(dataset)
    sgn_r = np.sign(r)

    def sums_fn(V: np.ndarray) -> np.ndarray:
        return (sgn_r[:, None] * np.sign(W @ V.T)).sum(axis=0)

    best, wit = _sampled_min(W, r, budget, sums_fn)
    value = n / 2.0 + 0.5 * float(best)
    return DepthValue(normalized=value / n, count=value, exact=False,
                      witness_direction=UnitDirection(wit))


def _sign_sum_witness(xs, gs, valid, G, pre, xd, bnd, best, n) -> UnitDirection:
    """Reconstruct one direction attaining the minimal sign sum."""
    upper = G - 2.0 * pre
    lower = 2.0 * pre - G
    for k in np.flatnonzero(valid):
        if upper[k] == best or lower[k] == best:
            if k == 0:
                u = xs[0] - 1.0
            elif k == n:
                u = xs[-1] + 1.0
            else:
                u = 0.5 * (xs[k - 1] + xs[k])
            v = np.array([-u, 1.0]) if upper[k] == best else np.array([u, -1.0])
            return UnitDirection(v / np.linalg.norm(v))
    for j, xval in enumerate(xd):
        sgn = 1.0 if bnd[j] == best else (-1.0 if -bnd[j] == best else 0.0)
        if sgn != 0.0:
            v = sgn * np.array([-xval, 1.0])
            return UnitDirection(v / np.linalg.norm(v))
    raise AssertionError("sign-sum witness not found")  # pragma: no cover


def rd_bruteforce_oracle(dataset: ObservationSet, beta, grid: int) -> DepthValue:
    """Indicator-form depth minimised over a dense deterministic sphere grid.

    Test oracle only: it can only overestimate the true infimum (it
    evaluates the same objective on a subset of directions), so exact-mode
    agreement means the grid hit a minimising cell.  p <= 3 only; beyond
    that the grid sizes needed are hopeless.
    """
    if dataset.p not in (2, 3):
        raise ValueError("brute-force oracle supports p in {2, 3} only")
    grid = int(grid)
    if grid < 1000:
        raise ValueError("grid must be at least 1000")
    pv = as_params(beta, dataset.p)
    r = residuals(dataset, pv)
    W = design_matrix(dataset)
    if dataset.p == 2:
        theta = np.arange(grid) * (2.0 * np.pi / grid)
        V = np.column_stack([np.cos(theta), np.sin(theta)])
    else:
        V = fibonacci_sphere(grid)
    best = dataset.n + 1
    best_v = V[0]
    chunk = max(1, int(2_000_000 // max(1, dataset.n)))
    for lo in range(0, V.shape[0], chunk):
        cnts = _indicator_counts(W, r, V[lo:lo + chunk])
        j = int(np.argmin(cnts))
        if cnts[j] < best:
            best = int(cnts[j])
            best_v = V[lo + j]
    return DepthValue(normalized=best / dataset.n, count=float(best), exact=False,
                      witness_direction=UnitDirection(best_v))
