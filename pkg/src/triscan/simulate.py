"""Synthetic data generators with known causal ground truth.

Two families: a three-variable linear structural equation model for
studying one triplet in isolation, and a marker-driven regulatory
network over m traits for exercising the full scan.  All generators
take an explicit seed and are deterministic given it; the random stream
is numpy's PCG64, recorded in metadata so outputs can be reproduced.
"""

from dataclasses import asdict, dataclass, replace

import numpy as np

from .data import ExpressionDataset

__all__ = [
    "GENERATOR_NAME",
    "TRIPLET_MODELS",
    "TripletSpec",
    "gen_triplet_data",
    "GrnSpec",
    "GroundTruth",
    "GRN_PRESETS",
    "gen_grn",
    "sample_grn_data",
    "make_grn_dataset",
    "preset_spec",
    "transitive_closure",
]

GENERATOR_NAME = "numpy-pcg64"

#: Generating structures for the triplet model.  All three make the
#: variables pairwise dependent; they differ in which direct effect is
#: structurally absent.
TRIPLET_MODELS = ("causal", "independent", "full")


@dataclass(frozen=True)
class TripletSpec:
    """Three-variable linear SEM: X1 exogenous, X2 and X3 downstream.

    X1 = e1; X2 = b21*X1 + e2; X3 = b31*X1 + b32*X2 + e3, with Gaussian
    noise and coefficients drawn from a standard normal.  Under "causal"
    b31 = 0 (a chain X1 -> X2 -> X3), under "independent" b32 = 0 (X2
    and X3 share only X1), under "full" all three effects are present.
    The exogenous X1 is standard normal, or Bernoulli with success
    probability drawn uniformly from [0.1, 0.5] when not fixed.
    """

    model: str = "causal"
    exogenous: str = "gaussian"
    bernoulli_p: float = None
    seed: int = 0

    def __post_init__(self):
        if self.model not in TRIPLET_MODELS:
            raise ValueError(f"model must be one of {TRIPLET_MODELS}, got {self.model!r}")
        if self.exogenous not in ("gaussian", "bernoulli"):
            raise ValueError(f"exogenous must be gaussian or bernoulli, got {self.exogenous!r}")
        if self.bernoulli_p is not None and not 0.0 < self.bernoulli_p < 1.0:
            raise ValueError(f"bernoulli_p must lie in (0, 1), got {self.bernoulli_p}")


def gen_triplet_data(spec: TripletSpec, n: int) -> np.ndarray:
    """Sample an n x 3 data matrix with columns (X1, X2, X3)."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    rng = np.random.default_rng(spec.seed)
    b21, b31, b32 = rng.standard_normal(3)
    if spec.model == "causal":
        b31 = 0.0
    elif spec.model == "independent":
        b32 = 0.0
    if spec.exogenous == "bernoulli":
        p = spec.bernoulli_p
        if p is None:
            p = rng.uniform(0.1, 0.5)
        x1 = (rng.random(n) < p).astype(float)
    else:
        x1 = rng.standard_normal(n)
    x2 = b21 * x1 + rng.standard_normal(n)
    x3 = b31 * x1 + b32 * x2 + rng.standard_normal(n)
    return np.column_stack([x1, x2, x3])


@dataclass(frozen=True)
class GrnSpec:
    """Marker-driven regulatory network generator settings.

    The trait-on-trait structure is a random DAG over the given trait
    order: each of the m(m-1)/2 admissible directed edges is included
    independently with probability edge_count_target / (m(m-1)/2), so
    the expected edge count hits the target.  Each marker feeds each
    trait independently with probability marker_link_prob.  All effect
    sizes are uniform on coefficient_range.
    """

    n_traits: int = 100
    n_markers: int = 100
    marker_link_prob: float = 0.05
    edge_count_target: float = 54.0
    coefficient_range: tuple = (-1.0, 1.0)
    seed: int = 0

    def __post_init__(self):
        if self.n_traits < 1 or self.n_markers < 1:
            raise ValueError("need at least one trait and one marker")
        if not 0.0 <= self.marker_link_prob <= 1.0:
            raise ValueError(f"marker_link_prob must lie in [0, 1], got {self.marker_link_prob}")
        if self.edge_count_target < 0:
            raise ValueError(f"edge_count_target must be nonnegative, got {self.edge_count_target}")
        lo, hi = self.coefficient_range
        if not lo < hi:
            raise ValueError(f"coefficient_range must be increasing, got {self.coefficient_range}")


#: Named network sizes; both use 100 markers and 100 traits and differ
#: in how many direct trait-on-trait effects the DAG targets.
GRN_PRESETS = {
    "sparse": GrnSpec(edge_count_target=54.0),
    "dense": GrnSpec(edge_count_target=247.0),
}


def transitive_closure(direct: np.ndarray) -> np.ndarray:
    """Reachability closure of a boolean adjacency matrix, no self-loops.

    Boolean matrix squaring doubles the covered path length each round,
    so the loop runs O(log m) times.
    """
    reach = np.asarray(direct, dtype=bool).copy()
    if reach.ndim != 2 or reach.shape[0] != reach.shape[1]:
        raise ValueError(f"adjacency matrix must be square, got shape {reach.shape}")
    while True:
        step = reach | (reach @ reach)
        if np.array_equal(step, reach):
            break
        reach = step
    np.fill_diagonal(reach, False)
    return reach


@dataclass(frozen=True)
class GroundTruth:
    """True regulatory relations: direct[i, j] means trait i -> trait j."""

    direct: np.ndarray
    ancestral: np.ndarray

    def __post_init__(self):
        if self.direct.shape != self.ancestral.shape:
            raise ValueError("direct and ancestral must have the same shape")
        if np.any(self.direct & ~self.ancestral):
            raise ValueError("every direct edge must also be ancestral")
        if not np.array_equal(transitive_closure(self.ancestral), self.ancestral):
            raise ValueError("ancestral relation must be transitively closed")


def gen_grn(spec: GrnSpec):
    """Draw network structure: returns (A, B, truth).

    B is the m x m trait-on-trait coefficient matrix, strictly lower
    triangular (trait j may depend on traits i < j); A is the m x l
    marker-on-trait coefficient matrix.  truth.direct[i, j] is True
    exactly where B[j, i] is nonzero.
    """
    m, l = spec.n_traits, spec.n_markers
    rng = np.random.default_rng((spec.seed, 0))
    lo, hi = spec.coefficient_range
    n_pairs = m * (m - 1) // 2
    edge_prob = min(1.0, spec.edge_count_target / n_pairs) if n_pairs else 0.0
    tril = np.tri(m, m, -1, dtype=bool)
    b_mask = tril & (rng.random((m, m)) < edge_prob)
    B = np.where(b_mask, rng.uniform(lo, hi, (m, m)), 0.0)
    a_mask = rng.random((m, l)) < spec.marker_link_prob
    A = np.where(a_mask, rng.uniform(lo, hi, (m, l)), 0.0)
    direct = b_mask.T.copy()
    truth = GroundTruth(direct=direct, ancestral=transitive_closure(direct))
    return A, B, truth


def sample_grn_data(A, B, spec: GrnSpec, n: int):
    """Sample (markers, traits) matrices of n rows from the network.

    Markers are Bernoulli with a per-marker success probability drawn
    uniformly from [0.1, 0.5]; traits follow t = B t + A l + e with
    standard normal e, solved exactly by forward substitution down the
    trait order.  A marker column that comes out constant (possible at
    small n) is redrawn so downstream correlation is always defined.
    """
    if n < 2:
        raise ValueError(f"need n >= 2 samples, got {n}")
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    m, l = A.shape
    if B.shape != (m, m):
        raise ValueError(f"B shape {B.shape} does not match {m} traits")
    if np.any(np.triu(B) != 0.0):
        raise ValueError("B must be strictly lower triangular")
    rng = np.random.default_rng((spec.seed, 1))
    probs = rng.uniform(0.1, 0.5, l)
    markers = (rng.random((n, l)) < probs).astype(float)
    for k in range(l):
        tries = 0
        while markers[:, k].std() == 0.0:
            tries += 1
            if tries > 100:
                raise RuntimeError(f"marker column {k} kept coming out constant")
            markers[:, k] = (rng.random(n) < probs[k]).astype(float)
    drive = markers @ A.T + rng.standard_normal((n, m))
    traits = np.empty((n, m))
    for j in range(m):
        traits[:, j] = drive[:, j] + traits[:, :j] @ B[j, :j]
    return markers, traits


def make_grn_dataset(spec: GrnSpec, n: int):
    """Generate structure and data in one call.

    Returns (dataset, truth, metadata); metadata records everything
    needed to regenerate the files.
    """
    A, B, truth = gen_grn(spec)
    markers, traits = sample_grn_data(A, B, spec, n)
    dataset = ExpressionDataset(markers, traits)
    metadata = {
        "generator": GENERATOR_NAME,
        "family": "grn",
        "n": int(n),
        "spec": asdict(spec),
        "direct_edges": int(truth.direct.sum()),
        "ancestral_edges": int(truth.ancestral.sum()),
    }
    return dataset, truth, metadata


def preset_spec(name: str, seed: int = 0) -> GrnSpec:
    """A named preset with the seed substituted in."""
    try:
        base = GRN_PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(GRN_PRESETS)}")
    return replace(base, seed=seed)
