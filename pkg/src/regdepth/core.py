"""Shared domain types and elementary operations for regression-depth work.

The data model is a sample of regression observations (x, y) with x in
R^(p-1) and scalar response y, together with candidate fits beta in R^p
stored intercept-first: beta[0] is the intercept, beta[1:] the slope block.
Every observation has an extended covariate w = (1, x) so that the fitted
value is w @ beta and the residual is y - w @ beta.

Conventions that the rest of the package relies on:

* intercept-first parameter layout, everywhere;
* residual signs use an exact zero test (no tolerance) -- depth counts
  change at r == 0 and the golden fixtures are dyadic rationals, so the
  comparison is reliable where it matters;
* all randomness flows through explicit seeds, there is no module state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Observation",
    "ObservationSet",
    "ParamVector",
    "UnitDirection",
    "DepthValue",
    "sign_exact",
    "residual",
    "residuals",
    "extend_w",
    "design_matrix",
    "transform_regression",
    "transform_scale",
    "transform_affine",
]

_UNIT_NORM_TOL = 1e-12


def _as_float_vector(values: Sequence[float] | np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {arr}")
    return arr


@dataclass(frozen=True)
class Observation:
    """One regression observation: covariate vector x and response y."""

    x: np.ndarray
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", _as_float_vector(self.x, "x"))
        if not np.isfinite(self.y):
            raise ValueError(f"y must be finite, got {self.y}")
        object.__setattr__(self, "y", float(self.y))


class ObservationSet:
    """A finite sample of observations with shared dimension metadata.

    Internally stored as a dense (n, p-1) covariate matrix ``X`` and a
    response vector ``y`` so the depth routines can stay vectorised; the
    ``observations`` view reconstructs the per-row objects on demand.

    ``p`` is the dimension of the fit vector beta, i.e. 1 + number of
    covariates.  p >= 2 always (a pure-intercept model is out of scope).
    """

    def __init__(self, observations: Iterable[Observation]):
        obs = list(observations)
        if len(obs) < 1:
            raise ValueError("need at least one observation")
        dim = obs[0].x.size
        for o in obs:
            if o.x.size != dim:
                raise ValueError(
                    f"inconsistent covariate length: {o.x.size} != {dim}"
                )
        self._X = np.array([o.x for o in obs], dtype=float).reshape(len(obs), dim)
        self._y = np.array([o.y for o in obs], dtype=float)
        if self.p < 2:
            raise ValueError("p >= 2 required (at least one covariate)")

    @classmethod
    def from_arrays(cls, X: np.ndarray, y: np.ndarray) -> "ObservationSet":
        """Build a set from an (n, p-1) covariate matrix and response vector."""
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
        if X.shape[0] < 1:
            raise ValueError("need at least one observation")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("observations must be finite")
        out = cls.__new__(cls)
        out._X = X.copy()
        out._y = y.astype(float).copy()
        if out.p < 2:
            raise ValueError("p >= 2 required (at least one covariate)")
        return out

    @property
    def X(self) -> np.ndarray:
        return self._X

    @property
    def y(self) -> np.ndarray:
        return self._y

    @property
    def n(self) -> int:
        return self._X.shape[0]

    @property
    def p(self) -> int:
        return self._X.shape[1] + 1

    @property
    def observations(self) -> list[Observation]:
        return [Observation(x=row, y=yy) for row, yy in zip(self._X, self._y)]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"ObservationSet(n={self.n}, p={self.p})"


@dataclass(frozen=True)
class ParamVector:
    """Candidate fit beta in R^p, intercept first: beta = (b0, slopes...)."""

    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "beta", _as_float_vector(self.beta, "beta"))
        if self.beta.size < 2:
            raise ValueError("beta must have length p >= 2")

    @property
    def p(self) -> int:
        return self.beta.size

    @property
    def intercept(self) -> float:
        return float(self.beta[0])

    @property
    def slopes(self) -> np.ndarray:
        return self.beta[1:]


def as_params(beta, p: int | None = None) -> ParamVector:
    """Coerce a sequence or ParamVector to a ParamVector, checking p."""
    pv = beta if isinstance(beta, ParamVector) else ParamVector(np.asarray(beta, dtype=float))
    if p is not None and pv.p != p:
        raise ValueError(f"beta has dimension {pv.p}, expected {p}")
    return pv


@dataclass(frozen=True)
class UnitDirection:
    """A direction on the unit sphere; the norm must be 1 within 1e-12."""

    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", _as_float_vector(self.v, "v"))
        nrm = float(np.linalg.norm(self.v))
        if abs(nrm - 1.0) > _UNIT_NORM_TOL:
            raise ValueError(f"direction norm {nrm} deviates from 1 by more than 1e-12")

    @classmethod
    def from_angle(cls, theta: float) -> "UnitDirection":
        return cls(np.array([np.cos(theta), np.sin(theta)]))

    @property
    def angle(self) -> float:
        """Planar angle in [0, 2*pi); only meaningful for 2-d directions."""
        if self.v.size != 2:
            raise ValueError("angle is defined for 2-d directions only")
        return float(np.arctan2(self.v[1], self.v[0]) % (2.0 * np.pi))


@dataclass(frozen=True)
class DepthValue:
    """Depth of a fit.

    ``normalized`` is always populated and lies in [0, 1].  ``count`` is the
    raw-count value for the count-based formulations (an integer for the
    cut-count form, possibly a half-integer for the sign-sum form); when
    present, normalized == count / n.  ``exact`` records whether the value
    came from exhaustive direction enumeration or from sampled directions.
    """

    normalized: float
    count: float | None = None
    exact: bool = False
    witness_direction: UnitDirection | None = None

    def __post_init__(self):
        if not (0.0 <= self.normalized <= 1.0):
            raise ValueError(f"normalized depth {self.normalized} outside [0, 1]")


def sign_exact(t: float) -> int:
    """Sign with an exact zero: returns 0 iff t == 0.0, else +/-1.

    No tolerance on purpose -- the sign-sum depth and the golden fixtures
    rely on residuals that are exactly zero being detected as such.
    """
    if t > 0.0:
        return 1
    if t < 0.0:
        return -1
    return 0


def extend_w(obs: Observation) -> np.ndarray:
    """Extended covariate (1, x); the leading coordinate is exactly 1."""
    return np.concatenate(([1.0], obs.x))


def design_matrix(dataset: ObservationSet) -> np.ndarray:
    """The (n, p) matrix whose rows are the extended covariates w_i."""
    return np.column_stack([np.ones(dataset.n), dataset.X])


def residual(obs: Observation, beta: ParamVector | Sequence[float]) -> float:
    """Residual y - b0 - x @ slopes of one observation under the fit beta."""
    pv = as_params(beta)
    if pv.p != obs.x.size + 1:
        raise ValueError(f"beta has dimension {pv.p}, expected {obs.x.size + 1}")
    return float(obs.y - pv.intercept - obs.x @ pv.slopes)


def residuals(dataset: ObservationSet, beta: ParamVector | Sequence[float]) -> np.ndarray:
    """Vector of residuals y_i - w_i @ beta over the whole sample."""
    pv = as_params(beta, dataset.p)
    return dataset.y - pv.intercept - dataset.X @ pv.slopes


def transform_regression(dataset: ObservationSet, b: Sequence[float]) -> ObservationSet:
    """Shift responses along a fit: y -> y + w @ b, covariates unchanged.

    Depth is invariant under this when the candidate moves beta -> beta + b,
    and residuals match exactly: r(shifted set, beta + b) == r(set, beta).
    """
    bv = as_params(b, dataset.p)
    y_new = dataset.y + bv.intercept + dataset.X @ bv.slopes
    return ObservationSet.from_arrays(dataset.X, y_new)


def transform_scale(dataset: ObservationSet, s: float) -> ObservationSet:
    """Rescale responses: y -> s * y with s != 0."""
    if s == 0.0 or not np.isfinite(s):
        raise ValueError("scale factor must be finite and nonzero")
    return ObservationSet.from_arrays(dataset.X, s * dataset.y)


def transform_affine(dataset: ObservationSet, A: np.ndarray) -> ObservationSet:
    """Transform covariates x -> A' x with a nonsingular (p-1)x(p-1) matrix.

    Depth is invariant when the slope block of the candidate is mapped
    through A^{-1} (the intercept is untouched).
    """
    A = np.asarray(A, dtype=float)
    d = dataset.p - 1
    if A.shape == () and d == 1:
        A = A.reshape(1, 1)
    if A.shape != (d, d):
        raise ValueError(f"A must be {d}x{d}, got {A.shape}")
    try:
        np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise ValueError("A must be nonsingular") from exc
    return ObservationSet.from_arrays(dataset.X @ A, dataset.y)
