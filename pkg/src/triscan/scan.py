"""Marker-conditioned scan for trait-on-trait regulation.

For an ordered trait pair (Ti, Tj) and a marker Lk, the triplet
(X1=Lk, X2=Ti, X3=Tj) is scored by the posterior probability of the
one independence model that, given an exogenous X1, pins down the chain
Lk -> Ti -> Tj.  Aggregating that score over markers yields the
regulation probability matrix.

The inner loop is organized per regulator row: for fixed Ti all
(marker, Tj) triplets share r12 per marker and r23 per target, so the
eleven log Bayes factors are evaluated on broadcast (l x block) arrays,
one block of target columns at a time.  The gamma-function prefactors
depend only on (n, nu) and are computed once per scan.  A scalar
reference path (scan_pair) performs the same computation one triplet at
a time for verification.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .data import ExpressionDataset, JointCorrelation, as_sample_matrix, correlation_matrix
from .graphs import PRIOR_PRESETS, prior_weights
from .models import CiModel
from .scoring import (
    DET_TOL,
    TripletCorrelation,
    _check_prior,
    compute_log_bayes_factors,
    log_prefactors,
    posterior_over_models,
    posterior_upper_bound,
)

__all__ = [
    "STRATEGIES",
    "ScanResult",
    "full_scan",
    "scan_pair",
    "rank_edges",
    "MediationFinding",
    "MediationReport",
    "mediation_scan",
    "RegulationScanner",
]

#: Marker aggregation strategies: "max" scores every marker and keeps
#: the best; "loclink" preselects, per regulator, the marker most
#: correlated with it (in absolute value) and scores only that one.
STRATEGIES = ("max", "loclink")

CHAIN_MODEL = CiModel.PARTIAL_13

# Upper bound on elements in one (11, rows, block) score stack; blocks
# this size stay cache resident, which keeps the per-cell cost flat as
# the trait count grows.
_BLOCK_ELEMS = 48_000


def _resolve_prior(prior):
    """Accept a preset name or an explicit 11-weight vector."""
    if isinstance(prior, str):
        return prior_weights(prior), prior
    vec = _check_prior(prior)
    return vec, "custom"


@dataclass
class ScanResult:
    """Output of one scan.

    prob[i, j] estimates p(Ti -> Tj | D); the diagonal is NaN.
    best_marker[i, j] is the index of the marker behind that estimate,
    or -1 where no marker produced one.  meta records n, nu, the prior
    and strategy used, and how many degenerate triplets were skipped.
    """

    prob: np.ndarray
    best_marker: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n_traits(self):
        return self.prob.shape[0]


def _log_bf_batch(r12, r13, r23, e, log_f, log_g):
    """The eleven log Bayes factors on broadcast arrays.

    Mirrors the scalar formulas term for term so both paths agree to
    floating-point noise, including the sorted-order determinant and the
    paired log terms (see scoring.correlation_determinant).  Entries
    where the triplet determinant is not positive produce NaN/inf here
    and must be masked by the caller.
    """
    lo = np.minimum(r12, r13)
    hi = np.maximum(r12, r13)
    a = np.minimum(lo, r23)
    b = np.maximum(lo, np.minimum(hi, r23))
    c = np.maximum(hi, r23)
    det = (1.0 + 2.0 * (a * b * c)) - ((a * a + b * b) + c * c)
    marg = log_f - log_g
    bf = np.empty((11,) + det.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        L = np.log(det)
        l12 = np.log1p(-r12 * r12)
        l13 = np.log1p(-r13 * r13)
        l23 = np.log1p(-r23 * r23)
        bf[0] = 0.0
        bf[1] = marg + (e - 0.5) * l12
        bf[2] = marg + (e - 0.5) * l23
        bf[3] = marg + (e - 0.5) * l13
        bf[4] = log_g + e * (L - (l13 + l23))
        bf[5] = log_g + e * (L - (l12 + l13))
        bf[6] = log_g + e * (L - (l12 + l23))
        bf[7] = log_f + e * (L - l23)
        bf[8] = log_f + e * (L - l13)
        bf[9] = log_f + e * (L - l12)
        bf[10] = log_f + log_g + e * L
    return bf, det


def _posterior6_batch(log_bf, prior_vec):
    """Posterior of the chain model from stacked log Bayes factors.

    Zero-prior models are excluded before the log-sum-exp, matching the
    scalar posterior computation.
    """
    active = np.flatnonzero(prior_vec > 0.0)
    where6 = np.flatnonzero(active == int(CHAIN_MODEL))
    if where6.size == 0:
        return np.zeros(log_bf.shape[1:])
    logs = log_bf[active] + np.log(prior_vec[active])[:, None, None]
    logs -= logs.max(axis=0)
    # Same -700 floor as the scalar posterior: keeps exp out of the
    # subnormal range, whose cost would otherwise scale with n.
    weights = np.exp(np.maximum(logs, -700.0))
    return weights[where6[0]] / weights.sum(axis=0)


def _scan_row(i, mt, tt, prior_vec, e, log_f, log_g, strategy):
    """Scores and best markers for regulator row i.

    Returns (prob_row, marker_row, skipped) where skipped counts
    degenerate (non positive definite) triplets among j != i.
    """
    l, m = mt.shape
    if strategy == "loclink":
        k_star = int(np.argmax(np.abs(mt[:, i])))
        r12 = mt[k_star : k_star + 1, i : i + 1]
        r13 = mt[k_star : k_star + 1, :]
    else:
        k_star = None
        r12 = mt[:, i : i + 1]
        r13 = mt
    r23 = tt[i : i + 1, :]
    rows_out = r13.shape[0]
    p6 = np.empty((rows_out, m))
    bad = np.empty((rows_out, m), dtype=bool)
    # Splitting the columns does not change any per-cell operation; the
    # model axis is reduced independently for every (marker, target).
    block = max(8, _BLOCK_ELEMS // (11 * rows_out))
    for s in range(0, m, block):
        sl = slice(s, min(s + block, m))
        log_bf, det = _log_bf_batch(r12, r13[:, sl], r23[:, sl], e, log_f, log_g)
        bad[:, sl] = det <= DET_TOL
        with np.errstate(invalid="ignore"):
            p6[:, sl] = _posterior6_batch(log_bf, prior_vec)
    p6 = np.where(bad, -1.0, p6)
    best_k = np.argmax(p6, axis=0)
    best_p = p6[best_k, np.arange(m)]
    prob_row = np.where(best_p >= 0.0, best_p, 0.0)
    if strategy == "loclink":
        marker_row = np.where(best_p >= 0.0, k_star, -1)
    else:
        marker_row = np.where(best_p >= 0.0, best_k, -1).astype(int)
    off = np.arange(m) != i
    skipped = int(bad[:, off].sum())
    prob_row[i] = np.nan
    marker_row[i] = -1
    return prob_row, marker_row, skipped


def full_scan(
    corr: JointCorrelation,
    prior="dmag-bk",
    nu: float = 4.0,
    strategy: str = "max",
    threads: int = 1,
) -> ScanResult:
    """Score every ordered trait pair from the joint correlation matrix.

    prior is a preset name (see PRIOR_PRESETS) or an explicit weight
    vector over the eleven models.  strategy "max" reports, per cell,
    the maximum chain posterior over all markers (ties to the lowest
    marker index); "loclink" fixes one marker per regulator first, the
    one with the largest absolute marker-regulator correlation.
    Triplets whose correlation submatrix is not positive definite are
    skipped and counted in meta["skipped_triplets"]; a cell where every
    marker was skipped gets probability 0 and marker -1.

    threads > 1 splits regulator rows across a thread pool; results are
    identical for any thread count.  threads=0 uses one thread per CPU.
    """
    if corr.n_traits < 2:
        raise ValueError(f"need at least 2 traits to scan, got {corr.n_traits}")
    if corr.n_markers < 1:
        raise ValueError("need at least 1 marker to scan")
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    prior_vec, prior_name = _resolve_prior(prior)
    log_f, log_g = log_prefactors(corr.n, nu)
    e = (corr.n + nu) / 2.0
    mt = corr.marker_trait
    tt = corr.trait_trait
    m = corr.n_traits
    prob = np.empty((m, m))
    best = np.empty((m, m), dtype=int)
    rows = range(m)
    if threads == 0:
        threads = os.cpu_count() or 1
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(
                    lambda i: _scan_row(i, mt, tt, prior_vec, e, log_f, log_g, strategy),
                    rows,
                )
            )
    else:
        results = [_scan_row(i, mt, tt, prior_vec, e, log_f, log_g, strategy) for i in rows]
    skipped = 0
    for i, (prob_row, marker_row, row_skipped) in zip(rows, results):
        prob[i] = prob_row
        best[i] = marker_row
        skipped += row_skipped
    meta = {
        "n": corr.n,
        "nu": nu,
        "prior": prior_name,
        "strategy": strategy,
        "n_markers": corr.n_markers,
        "n_traits": corr.n_traits,
        "skipped_triplets": skipped,
    }
    return ScanResult(prob=prob, best_marker=best, meta=meta)


def scan_pair(corr: JointCorrelation, prior, nu, i, j, strategy="max"):
    """Scalar reference for one cell: returns (prob, best_marker, skipped).

    Evaluates each triplet with the per-triplet scoring functions; used
    to verify the batch path.
    """
    prior_vec, _ = _resolve_prior(prior)
    if strategy == "loclink":
        markers = [int(np.argmax(np.abs(corr.marker_trait[:, i])))]
    else:
        markers = range(corr.n_markers)
    best_p, best_k, skipped = -1.0, -1, 0
    for k in markers:
        r12, r13, r23 = corr.triplet(k, i, j)
        try:
            t = TripletCorrelation(r12, r13, r23, corr.n, nu)
        except ValueError:
            skipped += 1
            continue
        p = posterior_over_models(compute_log_bayes_factors(t), prior_vec)[CHAIN_MODEL]
        if p > best_p:
            best_p, best_k = p, k
    if best_k < 0:
        return 0.0, -1, skipped
    return float(best_p), best_k, skipped


def rank_edges(result: ScanResult, top_k: int = None):
    """Edges sorted by probability, then by (regulator, target) index.

    Returns (regulator, target, probability, best_marker) tuples for
    all ordered pairs i != j, at most top_k of them.
    """
    m = result.n_traits
    rows = []
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            rows.append((i, j, float(result.prob[i, j]), int(result.best_marker[i, j])))
    rows.sort(key=lambda r: (-r[2], r[0], r[1]))
    if top_k is not None:
        rows = rows[:top_k]
    return rows


@dataclass(frozen=True)
class MediationFinding:
    mediator: int
    posterior: float
    status: str  # "mediated" or "undetermined"


@dataclass(frozen=True)
class MediationReport:
    edge: tuple
    threshold: float
    findings: tuple


def mediation_scan(
    result: ScanResult,
    corr: JointCorrelation,
    prior,
    nu: float,
    edge,
    threshold: float,
) -> MediationReport:
    """Look for traits mediating an already-confident edge (Ti, Tj).

    Candidates are traits Tm with prob[i, m] and prob[m, j] both at or
    above the threshold.  Each candidate is scored as the chain
    posterior of the trait-only triplet (X1=Ti, X2=Tm, X3=Tj): above
    the threshold it is reported "mediated", otherwise "undetermined"
    since a direct component cannot be ruled out.
    """
    i, j = edge
    if not result.prob[i, j] >= threshold:
        raise ValueError(
            f"edge ({i}, {j}) has probability {result.prob[i, j]}, below threshold {threshold}"
        )
    prior_vec, _ = _resolve_prior(prior)
    findings = []
    for t in range(result.n_traits):
        if t == i or t == j:
            continue
        if not (result.prob[i, t] >= threshold and result.prob[t, j] >= threshold):
            continue
        tt = corr.trait_trait
        try:
            trip = TripletCorrelation(tt[i, t], tt[i, j], tt[t, j], corr.n, nu)
        except ValueError:
            findings.append(MediationFinding(t, math.nan, "undetermined"))
            continue
        p = float(posterior_over_models(compute_log_bayes_factors(trip), prior_vec)[CHAIN_MODEL])
        status = "mediated" if p > threshold else "undetermined"
        findings.append(MediationFinding(t, p, status))
    return MediationReport(edge=(i, j), threshold=threshold, findings=tuple(findings))


class RegulationScanner(BaseEstimator):
    """Estimator wrapper: fit on marker and trait matrices, read a
    probability matrix.

    Parameters mirror full_scan.  After fit, probabilities_[i, j]
    estimates p(trait i regulates trait j), best_markers_ holds the
    marker indices behind the estimates, and upper_bound_ is the
    analytic ceiling no estimate can exceed at this sample size.
    """

    def __init__(self, prior="dmag-bk", nu=4.0, strategy="max", threads=1):
        self.prior = prior
        self.nu = nu
        self.strategy = strategy
        self.threads = threads

    def fit(self, markers, traits):
        """Validate inputs, correlate, scan; returns self."""
        dataset = ExpressionDataset(as_sample_matrix(markers, "markers"),
                                    as_sample_matrix(traits, "traits"))
        self.correlation_ = correlation_matrix(dataset)
        self.result_ = full_scan(
            self.correlation_,
            prior=self.prior,
            nu=self.nu,
            strategy=self.strategy,
            threads=self.threads,
        )
        self.probabilities_ = self.result_.prob
        self.best_markers_ = self.result_.best_marker
        self.n_samples_ = dataset.n
        prior_vec, _ = _resolve_prior(self.prior)
        self.upper_bound_ = posterior_upper_bound(dataset.n, self.nu, prior_vec)
        return self

    def top_edges(self, top_k=None):
        """Ranked (regulator, target, probability, marker) rows."""
        if not hasattr(self, "result_"):
            raise RuntimeError("call fit before top_edges")
        return rank_edges(self.result_, top_k)
