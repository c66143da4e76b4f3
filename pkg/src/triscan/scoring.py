"""Closed-form Bayesian scoring of trivariate covariance structures.

Each of the eleven independence models on three jointly Gaussian variables
has a marginal likelihood available in closed form once the covariance
prior is reduced to its scale-free limit.  Relative to the unconstrained
model, the evidence ratios depend only on the three sample correlations,
the sample count ``n`` and the prior degrees of freedom ``nu``:

* empty model:            ``f * g * |R|^((n+nu)/2)``
* one variable isolated:  ``f * (|R| / (1 - r_jk^2))^((n+nu)/2)``
  where (j, k) is the still-dependent pair
* one partial zero:       ``g * (|R| / ((1-r_ik^2)(1-r_jk^2)))^((n+nu)/2)``
  for independence of (i, j) given k
* one marginal zero:      ``(f / g) * (1 - r_ij^2)^((n+nu-1)/2)``

with ``f = (n+nu-2)/(nu-2)`` and
``g = Gamma((n+nu)/2) Gamma((nu-1)/2) / (Gamma((n+nu-1)/2) Gamma(nu/2))``.

Everything is computed and returned in natural-log space: the determinant
powers overflow ordinary doubles for ``n`` in the low thousands.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .models import N_MODELS, CiModel

__all__ = [
    "DET_TOL",
    "TripletCorrelation",
    "DegenerateCorrelationError",
    "log_prefactors",
    "compute_log_bayes_factors",
    "posterior_over_models",
    "posterior_upper_bound",
    "classify_zero_pattern",
    "consistent_zero_patterns",
    "correlation_determinant",
]

#: Determinants at or below this are treated as numerically singular.
DET_TOL = 1e-12


class DegenerateCorrelationError(ValueError):
    """Raised when a correlation matrix is not usably positive definite."""


def correlation_determinant(r12, r13, r23):
    """Determinant of the 3x3 correlation matrix with the given off-diagonals.

    The three correlations are put in sorted order before combining, so
    the value is bitwise invariant under any relabeling of the variables;
    downstream log evidence terms multiply rounding error by (n + nu) / 2
    and would otherwise lose equivariance at large n.
    """
    lo = min(r12, r13)
    hi = max(r12, r13)
    a = min(lo, r23)
    b = max(lo, min(hi, r23))
    c = max(hi, r23)
    return (1.0 + 2.0 * (a * b * c)) - ((a * a + b * b) + c * c)


@dataclass(frozen=True)
class TripletCorrelation:
    """Sufficient statistic for scoring one variable triplet.

    Holds the three pairwise sample correlations, the number of
    observations and the prior degrees of freedom.  The implied 3x3
    correlation matrix must be positive definite (determinant above
    ``DET_TOL``); perfectly collinear inputs are rejected.
    """

    r12: float
    r13: float
    r23: float
    n: int
    nu: float = 4.0

    def __post_init__(self):
        for name in ("r12", "r13", "r23"):
            r = getattr(self, name)
            if not -1.0 < r < 1.0:
                raise ValueError(f"{name} must lie in (-1, 1), got {r}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not self.nu > 2.0:
            raise ValueError(f"nu must exceed 2, got {self.nu}")
        if self.det <= DET_TOL:
            raise DegenerateCorrelationError(
                f"correlation matrix is numerically singular (det = {self.det:.3e})"
            )

    @property
    def det(self):
        return correlation_determinant(self.r12, self.r13, self.r23)

    def permuted(self, perm):
        """Correlations after relabeling; ``perm`` maps new 1-based positions to old."""
        rs = {(1, 2): self.r12, (1, 3): self.r13, (2, 3): self.r23}

        def r(a, b):
            return rs[tuple(sorted((perm[a - 1], perm[b - 1])))]

        return TripletCorrelation(r(1, 2), r(1, 3), r(2, 3), self.n, self.nu)


def log_prefactors(n, nu=4.0):
    """Natural logs of the two evidence prefactors f(n, nu) and g(n, nu).

    Uses log-gamma throughout; raw gamma values overflow for large ``n``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not nu > 2.0:
        raise ValueError(f"nu must exceed 2, got {nu}")
    log_f = math.log(n + nu - 2.0) - math.log(nu - 2.0)
    log_g = (
        math.lgamma((n + nu) / 2.0)
        + math.lgamma((nu - 1.0) / 2.0)
        - math.lgamma((n + nu - 1.0) / 2.0)
        - math.lgamma(nu / 2.0)
    )
    return log_f, log_g


def compute_log_bayes_factors(t: TripletCorrelation) -> np.ndarray:
    """Log Bayes factor of each model against the unconstrained one.

    Returns an array of eleven finite values indexed by ``CiModel``; entry
    0 is exactly zero.  Relabeling the variables permutes the entries
    accordingly (see ``models.model_permutation``).
    """
    log_f, log_g = log_prefactors(t.n, t.nu)
    e = (t.n + t.nu) / 2.0
    log_det = math.log(t.det)
    l12 = math.log1p(-t.r12 * t.r12)
    l13 = math.log1p(-t.r13 * t.r13)
    l23 = math.log1p(-t.r23 * t.r23)
    marg = log_f - log_g
    # The paired terms are summed before subtraction; addition commutes
    # bitwise, so relabeling cannot perturb the result.
    return np.array(
        [
            0.0,
            marg + (e - 0.5) * l12,
            marg + (e - 0.5) * l23,
            marg + (e - 0.5) * l13,
            log_g + e * (log_det - (l13 + l23)),
            log_g + e * (log_det - (l12 + l13)),
            log_g + e * (log_det - (l12 + l23)),
            log_f + e * (log_det - l23),
            log_f + e * (log_det - l13),
            log_f + e * (log_det - l12),
            log_f + log_g + e * log_det,
        ]
    )


def _check_prior(prior):
    prior = np.asarray(prior, dtype=float)
    if prior.shape != (N_MODELS,):
        raise ValueError(f"prior must have {N_MODELS} entries, got shape {prior.shape}")
    if np.any(prior < 0.0) or not np.all(np.isfinite(prior)):
        raise ValueError("prior weights must be finite and nonnegative")
    total = prior.sum()
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"prior weights must sum to 1, got {total!r}")
    return prior


def posterior_over_models(log_bf, prior) -> np.ndarray:
    """Normalized posterior over the eleven models.

    Combines log Bayes factors with prior weights via log-sum-exp (the
    largest supported term is subtracted before exponentiation).  Models
    with zero prior weight get posterior exactly zero.
    """
    log_bf = np.asarray(log_bf, dtype=float)
    prior = _check_prior(prior)
    support = prior > 0.0
    scores = log_bf[support] + np.log(prior[support])
    scores -= scores.max()
    # Floor at -700: smaller terms are zero against the leading weight of
    # one, and exp into the subnormal range is an order of magnitude
    # slower on common hardware.
    weights = np.exp(np.maximum(scores, -700.0))
    post = np.zeros(N_MODELS)
    post[support] = weights / weights.sum()
    return post


def posterior_upper_bound(n, nu, prior) -> float:
    """Largest attainable posterior of the chain-compatible model.

    The Bayes factor of the model "variable 3 independent of variable 1
    given variable 2" never exceeds g(n, nu), because the correlation
    determinant obeys ``|R| <= (1 - r12^2)(1 - r23^2)``.  Dropping every
    competing model except the unconstrained one from the normalizer
    then caps its posterior at ``g * w6 / (g * w6 + w0)``, a ceiling that
    depends only on the sample count and the prior.
    """
    prior = _check_prior(prior)
    w_chain = prior[CiModel.PARTIAL_13]
    w_full = prior[CiModel.FULL]
    if w_chain == 0.0:
        return 0.0
    _, log_g = log_prefactors(n, nu)
    g = math.exp(log_g)
    return g * w_chain / (g * w_chain + w_full)


# ---------------------------------------------------------------------------
# Zero-pattern classification
# ---------------------------------------------------------------------------

# A pattern is a pair of frozensets of 0-based index pairs: off-diagonal
# zeros of the covariance and of the precision matrix.
_PAIRS = ((0, 1), (0, 2), (1, 2))


def _model_pattern(model):
    """Expected (covariance zeros, precision zeros) for a model id."""
    cov = set()
    prec = set()
    m = int(model)
    if m == CiModel.EMPTY:
        cov = prec = set(_PAIRS)
    elif m in (CiModel.MARGINAL_12, CiModel.MARGINAL_23, CiModel.MARGINAL_13):
        pair = {CiModel.MARGINAL_12: (0, 1), CiModel.MARGINAL_23: (1, 2), CiModel.MARGINAL_13: (0, 2)}[m]
        cov = {pair}
    elif m in (CiModel.PARTIAL_12, CiModel.PARTIAL_23, CiModel.PARTIAL_13):
        pair = {CiModel.PARTIAL_12: (0, 1), CiModel.PARTIAL_23: (1, 2), CiModel.PARTIAL_13: (0, 2)}[m]
        prec = {pair}
    elif m in (CiModel.ISOLATED_1, CiModel.ISOLATED_2, CiModel.ISOLATED_3):
        v = {CiModel.ISOLATED_1: 0, CiModel.ISOLATED_2: 1, CiModel.ISOLATED_3: 2}[m]
        cov = prec = {p for p in _PAIRS if v in p}
    return frozenset(cov), frozenset(prec)


_PATTERN_TO_MODEL = {_model_pattern(m): CiModel(m) for m in range(N_MODELS)}


def _pattern_consistent(cov_zero, prec_zero):
    """Whether a zero pattern survives the positive-definiteness implications.

    For distinct i, j, k in a positive definite pair (covariance,
    precision):

    1. both precision zeros at k        force the covariance zeros at k;
    2. both covariance zeros at k       force the precision zeros at k;
    3. a pair zero in both matrices     forces a zero at k in each matrix
       (one of the two k-pairs, per matrix);
    4. covariance zero (i,k) plus precision zero (j,k) force precision
       zero (i,k) and covariance zero (j,k).
    """

    def cz(a, b):
        return tuple(sorted((a, b))) in cov_zero

    def pz(a, b):
        return tuple(sorted((a, b))) in prec_zero

    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        if pz(i, k) and pz(j, k) and not (cz(i, k) and cz(j, k)):
            return False
        if cz(i, k) and cz(j, k) and not (pz(i, k) and pz(j, k)):
            return False
        if cz(i, j) and pz(i, j):
            if not (pz(i, k) or pz(j, k)):
                return False
            if not (cz(i, k) or cz(j, k)):
                return False
        if cz(i, k) and pz(j, k) and not (pz(i, k) and cz(j, k)):
            return False
        if cz(j, k) and pz(i, k) and not (pz(j, k) and cz(i, k)):
            return False
    return True


def consistent_zero_patterns():
    """All zero patterns realizable by a positive definite trivariate matrix.

    Scans the 64 assignments of zero/nonzero to the six off-diagonal
    entries (three covariance, three precision) and keeps those closed
    under the four implications above.  Exactly the eleven model patterns
    survive.
    """
    out = []
    for mask in range(64):
        cov = frozenset(p for b, p in enumerate(_PAIRS) if mask >> b & 1)
        prec = frozenset(p for b, p in enumerate(_PAIRS) if mask >> (b + 3) & 1)
        if _pattern_consistent(cov, prec):
            out.append((cov, prec))
    return out


def classify_zero_pattern(cov, tol=1e-9):
    """Identify the independence model from a covariance matrix's zeros.

    The matrix is normalized to correlations and its inverse to partial
    correlations so that ``tol`` is scale-free.  Returns the matching
    ``CiModel``, or None when the thresholded pattern is not realizable
    (possible when entries straddle ``tol``).
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {cov.shape}")
    if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-8 * np.abs(cov).max()):
        raise ValueError("covariance matrix must be symmetric")
    d = np.diag(cov)
    if np.any(d <= 0.0):
        raise DegenerateCorrelationError("covariance diagonal must be positive")
    scale = 1.0 / np.sqrt(d)
    corr = cov * np.outer(scale, scale)
    if np.linalg.det(corr) <= DET_TOL:
        raise DegenerateCorrelationError("covariance matrix is not positive definite")
    prec = np.linalg.inv(corr)
    pscale = 1.0 / np.sqrt(np.diag(prec))
    pcor = -prec * np.outer(pscale, pscale)

    cov_zero = frozenset(p for p in _PAIRS if abs(corr[p]) <= tol)
    prec_zero = frozenset(p for p in _PAIRS if abs(pcor[p]) <= tol)
    return _PATTERN_TO_MODEL.get((cov_zero, prec_zero))
