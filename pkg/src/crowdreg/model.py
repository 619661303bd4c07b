"""Bayesian linear regression from multiple noisy annotators.

Each annotator corrupts the true response ``w @ x`` with zero-mean Gaussian
noise whose precision (inverse variance) reflects the effort spent.  A
Gaussian prior on the weight vector and an independent Gamma prior on every
annotator precision give the mean-field approximation

    q(w) = Normal(mean, precision^-1),   q(beta_j) = Gamma(shape_j, rate_j).

The weight update needs the expected annotator precisions and the precision
updates need the weight moments, so :func:`fit_variational` alternates the two
coordinate updates until no parameter moves more than a tolerance.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import InvalidInputError, NumericalFailureError

__all__ = [
    "CrowdDataset",
    "WeightPosterior",
    "PrecisionPosterior",
    "FitReport",
    "default_weight_prior",
    "default_precision_priors",
    "vi_update_weights",
    "vi_update_precision",
    "fit_variational",
    "expected_precision",
    "predictive",
]

# Relative tolerance for the symmetry check on precision matrices.
_SYMMETRY_RTOL = 1e-10


def _frozen_array(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class CrowdDataset:
    """Feature matrix plus a sparse map of per-annotator labels.

    Parameters
    ----------
    instances : (n, d) array
        One row per data instance.
    labels : mapping
        ``(instance index, annotator index) -> label``.  An annotator may
        label any subset of the instances; instances may stay unlabeled.
    num_annotators : int
        Total number of annotators, including ones with no labels yet.
    """

    instances: np.ndarray
    labels: Mapping[tuple[int, int], float]
    num_annotators: int

    def __post_init__(self):
        inst = np.asarray(self.instances, dtype=float)
        if inst.ndim != 2 or inst.shape[1] < 1:
            raise InvalidInputError(
                f"instances must be a 2-D array with at least one feature, "
                f"got shape {inst.shape}"
            )
        if not np.all(np.isfinite(inst)):
            raise InvalidInputError("instances contain non-finite values")
        if self.num_annotators < 1:
            raise InvalidInputError("num_annotators must be at least 1")
        object.__setattr__(self, "instances", _frozen_array(inst))
        object.__setattr__(self, "labels", dict(self.labels))
        n = inst.shape[0]
        for (i, j), y in self.labels.items():
            if not (0 <= i < n and 0 <= j < self.num_annotators):
                raise InvalidInputError(f"label key ({i}, {j}) out of range")
            if not np.isfinite(y):
                raise InvalidInputError(f"label for ({i}, {j}) is not finite")

    @property
    def n(self) -> int:
        return self.instances.shape[0]

    @property
    def d(self) -> int:
        return self.instances.shape[1]

    @property
    def total_labels(self) -> int:
        return len(self.labels)

    @cached_property
    def indicator(self) -> np.ndarray:
        """Binary (n, m) matrix: entry (i, j) is 1 iff annotator j labeled i."""
        ind = np.zeros((self.n, self.num_annotators), dtype=np.int8)
        for (i, j) in self.labels:
            ind[i, j] = 1
        ind.setflags(write=False)
        return ind

    @cached_property
    def label_counts(self) -> np.ndarray:
        """Number of labels provided by each annotator."""
        counts = np.zeros(self.num_annotators, dtype=int)
        for (_, j) in self.labels:
            counts[j] += 1
        counts.setflags(write=False)
        return counts

    @cached_property
    def _suffstats(self):
        """Per-annotator (X_j' X_j, X_j' y_j, y_j' y_j, n_j), stacked."""
        m, d = self.num_annotators, self.d
        gram = np.zeros((m, d, d))
        xty = np.zeros((m, d))
        ysq = np.zeros(m)
        counts = np.zeros(m, dtype=int)
        grouped: dict[int, list[tuple[int, float]]] = defaultdict(list)
        for (i, j), y in self.labels.items():
            grouped[j].append((i, y))
        for j, pairs in grouped.items():
            idx = np.fromiter((i for i, _ in pairs), dtype=int, count=len(pairs))
            yv = np.fromiter((y for _, y in pairs), dtype=float, count=len(pairs))
            rows = self.instances[idx]
            gram[j] = rows.T @ rows
            xty[j] = rows.T @ yv
            ysq[j] = yv @ yv
            counts[j] = len(pairs)
        return gram, xty, ysq, counts

    def annotator_rows(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """Instances labeled by annotator ``j`` and the matching labels."""
        if not 0 <= j < self.num_annotators:
            raise InvalidInputError(f"annotator index {j} out of range")
        pairs = sorted((i, y) for (i, jj), y in self.labels.items() if jj == j)
        idx = np.array([i for i, _ in pairs], dtype=int)
        yv = np.array([y for _, y in pairs], dtype=float)
        return self.instances[idx], yv

    def with_label(self, i: int, j: int, y: float) -> "CrowdDataset":
        """A new dataset with one extra label; the original is untouched."""
        if (i, j) in self.labels:
            raise InvalidInputError(f"label for ({i}, {j}) already present")
        new = dict(self.labels)
        new[(i, j)] = float(y)
        return CrowdDataset(self.instances, new, self.num_annotators)


@dataclass(frozen=True, eq=False)
class WeightPosterior:
    """Gaussian factor over the weight vector: ``Normal(mean, precision^-1)``.

    The precision matrix must be symmetric (to 1e-10 relative) and positive
    definite; construction fails otherwise.  The Cholesky factor is computed
    once and cached, so repeated solves against the same posterior are cheap.
    """

    mean: np.ndarray
    precision: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        prec = np.asarray(self.precision, dtype=float)
        if mean.ndim != 1:
            raise InvalidInputError("mean must be a 1-D vector")
        d = mean.shape[0]
        if prec.shape != (d, d):
            raise InvalidInputError(
                f"precision shape {prec.shape} does not match mean dimension {d}"
            )
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(prec))):
            raise InvalidInputError("posterior parameters must be finite")
        asym = np.abs(prec - prec.T).max()
        scale = max(np.abs(prec).max(), 1e-300)
        if asym > _SYMMETRY_RTOL * scale:
            raise InvalidInputError("precision matrix is not symmetric")
        object.__setattr__(self, "mean", _frozen_array(mean))
        object.__setattr__(self, "precision", _frozen_array(prec))
        try:
            self._chol
        except LinAlgError:
            raise NumericalFailureError(
                "precision matrix is not positive definite"
            ) from None

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @cached_property
    def _chol(self):
        return cho_factor(self.precision, lower=True)

    @cached_property
    def covariance(self) -> np.ndarray:
        cov = cho_solve(self._chol, np.eye(self.dim))
        return _frozen_array(0.5 * (cov + cov.T))

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve ``precision @ x = rhs`` via the cached factorization."""
        return cho_solve(self._chol, np.asarray(rhs, dtype=float))

    def quadform(self, x: np.ndarray):
        """``x' precision^-1 x`` for a vector, or row-wise for a matrix."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise InvalidInputError(
                f"vector dimension {x.shape[-1]} does not match posterior "
                f"dimension {self.dim}"
            )
        if x.ndim == 1:
            return float(max(x @ self.solve(x), 0.0))
        if x.ndim == 2:
            sols = cho_solve(self._chol, x.T)
            return np.maximum(np.einsum("ij,ji->i", x, sols), 0.0)
        raise InvalidInputError("quadform expects a vector or a matrix of rows")


@dataclass(frozen=True)
class PrecisionPosterior:
    """Gamma factor over one annotator precision: ``Gamma(shape, rate)``."""

    shape: float
    rate: float

    def __post_init__(self):
        if not (np.isfinite(self.shape) and self.shape > 0):
            raise InvalidInputError(f"shape must be positive, got {self.shape}")
        if not (np.isfinite(self.rate) and self.rate > 0):
            raise InvalidInputError(f"rate must be positive, got {self.rate}")
        object.__setattr__(self, "shape", float(self.shape))
        object.__setattr__(self, "rate", float(self.rate))


@dataclass(frozen=True)
class FitReport:
    """Outcome of one variational fit."""

    iterations: int
    converged: bool
    final_delta: float


def default_weight_prior(d: int) -> WeightPosterior:
    """Zero mean, identity precision."""
    return WeightPosterior(np.zeros(d), np.eye(d))


def default_precision_priors(m: int) -> list[PrecisionPosterior]:
    """Gamma(1, 1) for every annotator."""
    return [PrecisionPosterior(1.0, 1.0) for _ in range(m)]


def expected_precision(posterior: PrecisionPosterior) -> float:
    """Posterior mean of an annotator precision: shape / rate."""
    return posterior.shape / posterior.rate


def vi_update_weights(
    dataset: CrowdDataset,
    expected_betas: Sequence[float],
    prior: WeightPosterior,
) -> WeightPosterior:
    """Weight-factor update given expected annotator precisions.

    The posterior precision adds ``E[beta_j] x x'`` for every label of every
    annotator to the prior precision; the posterior mean solves the matching
    normal equations.  With no labels (or all expectations zero) the prior is
    returned unchanged.
    """
    e = np.asarray(expected_betas, dtype=float)
    if e.shape != (dataset.num_annotators,):
        raise InvalidInputError(
            f"expected_betas must have length {dataset.num_annotators}, "
            f"got shape {e.shape}"
        )
    if not np.all(np.isfinite(e)) or np.any(e < 0):
        raise InvalidInputError("expected precisions must be finite and >= 0")
    if dataset.d != prior.dim:
        raise InvalidInputError(
            f"dataset dimension {dataset.d} does not match prior dimension "
            f"{prior.dim}"
        )
    gram, xty, _, counts = dataset._suffstats
    if dataset.total_labels == 0 or not np.any((e > 0) & (counts > 0)):
        return prior
    prec = prior.precision + np.tensordot(e, gram, axes=([0], [0]))
    prec = 0.5 * (prec + prec.T)
    rhs = prior.precision @ prior.mean + e @ xty
    try:
        factor = cho_factor(prec, lower=True)
    except LinAlgError:
        raise NumericalFailureError(
            "weight update produced a non positive definite precision"
        ) from None
    mean = cho_solve(factor, rhs)
    return WeightPosterior(mean, prec)


def _precision_sweep(dataset, weights, prior_shapes, prior_rates, paper_literal):
    """Vectorized Gamma updates for all annotators at once.

    Returns updated (shapes, rates).  ``paper_literal`` selects the printed
    form of the rate update, which carries the label-mean cross term with a
    factor of one instead of the factor of two that the mean-field expectation
    of the Gaussian likelihood produces.  The factor-two form is the default;
    it is the one that passes the single-source conjugate check.
    """
    gram, xty, ysq, counts = dataset._suffstats
    mu = weights.mean
    cov = weights.covariance
    quad = np.einsum("jkl,k,l->j", gram, mu, mu)
    trace = np.einsum("jkl,lk->j", gram, cov)
    cross = xty @ mu
    shapes = prior_shapes + counts / 2.0
    if paper_literal:
        rates = prior_rates + 0.5 * (ysq - cross) + 0.5 * trace + 0.5 * quad
    else:
        rates = prior_rates + 0.5 * (ysq - 2.0 * cross + quad) + 0.5 * trace
    if not np.all(np.isfinite(rates)) or np.any(rates[counts > 0] <= 0):
        raise NumericalFailureError(
            "precision update produced a non-positive rate; the weight "
            "posterior has likely diverged"
        )
    return shapes, rates


def vi_update_precision(
    dataset: CrowdDataset,
    weights: WeightPosterior,
    prior: PrecisionPosterior,
    j: int,
    paper_literal_gamma_update: bool = False,
) -> PrecisionPosterior:
    """Gamma-factor update for annotator ``j`` given the weight posterior.

    Shape grows by half the annotator's label count; the rate adds half the
    expected squared residual of those labels under ``q(w)``.  An annotator
    with no labels keeps the prior exactly.
    """
    if not 0 <= j < dataset.num_annotators:
        raise InvalidInputError(f"annotator index {j} out of range")
    if dataset.d != weights.dim:
        raise InvalidInputError("dataset and weight posterior dimensions differ")
    if dataset.label_counts[j] == 0:
        return prior
    shapes = np.full(dataset.num_annotators, prior.shape)
    rates = np.full(dataset.num_annotators, prior.rate)
    new_shapes, new_rates = _precision_sweep(
        dataset, weights, shapes, rates, paper_literal_gamma_update
    )
    return PrecisionPosterior(new_shapes[j], new_rates[j])


def fit_variational(
    dataset: CrowdDataset,
    weight_prior: WeightPosterior,
    precision_priors: Sequence[PrecisionPosterior],
    tolerance: float = 1e-6,
    max_sweeps: int = 200,
    warm_start: tuple[WeightPosterior, Sequence[PrecisionPosterior]] | None = None,
    paper_literal_gamma_update: bool = False,
) -> tuple[WeightPosterior, list[PrecisionPosterior], FitReport]:
    """Alternate the weight and precision updates until they stop moving.

    Convergence is declared when the largest absolute change across the weight
    mean, weight precision and all Gamma parameters in one sweep falls below
    ``tolerance``.  Hitting ``max_sweeps`` first is not an error; the report
    records which happened.  ``warm_start`` seeds the sweep with posteriors
    from a previous fit, which makes incremental refits cheap.
    """
    m = dataset.num_annotators
    if len(precision_priors) != m:
        raise InvalidInputError(
            f"need {m} precision priors, got {len(precision_priors)}"
        )
    if not tolerance > 0:
        raise InvalidInputError("tolerance must be positive")
    if max_sweeps < 1:
        raise InvalidInputError("max_sweeps must be at least 1")

    prior_shapes = np.array([p.shape for p in precision_priors])
    prior_rates = np.array([p.rate for p in precision_priors])

    if warm_start is not None:
        weights, start_precisions = warm_start
        if len(start_precisions) != m:
            raise InvalidInputError("warm start has wrong number of precisions")
        shapes = np.array([p.shape for p in start_precisions])
        rates = np.array([p.rate for p in start_precisions])
    else:
        weights = weight_prior
        shapes = prior_shapes.copy()
        rates = prior_rates.copy()

    converged = False
    delta = np.inf
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        new_weights = vi_update_weights(dataset, shapes / rates, weight_prior)
        new_shapes, new_rates = _precision_sweep(
            dataset, new_weights, prior_shapes, prior_rates,
            paper_literal_gamma_update,
        )
        delta = max(
            np.abs(new_weights.mean - weights.mean).max(initial=0.0),
            np.abs(new_weights.precision - weights.precision).max(initial=0.0),
            np.abs(new_shapes - shapes).max(initial=0.0),
            np.abs(new_rates - rates).max(initial=0.0),
        )
        weights, shapes, rates = new_weights, new_shapes, new_rates
        if delta < tolerance:
            converged = True
            break

    precisions = [PrecisionPosterior(s, r) for s, r in zip(shapes, rates)]
    return weights, precisions, FitReport(sweeps, converged, float(delta))


def predictive(x: np.ndarray, weights: WeightPosterior) -> tuple[float, float]:
    """Posterior predictive mean and variance for a test point.

    The label of ``x`` is Gaussian with mean ``x @ posterior mean`` and
    variance ``x' precision^-1 x`` (zero only for ``x = 0``).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != weights.dim:
        raise InvalidInputError(
            f"test point must be a vector of dimension {weights.dim}"
        )
    return float(x @ weights.mean), weights.quadform(x)
