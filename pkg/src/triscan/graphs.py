"""Three-node causal graph enumeration and priors over independence models.

Graphs are either DAGs or directed maximal ancestral graphs (DMAGs, which
add bidirected edges to stand in for latent confounders).  Each valid
graph entails a set of marginal and conditional independences among the
three node pairs, and that set is always one of the eleven realizable
models, so counting graphs per model yields a prior over models.

At this scale everything is done by exhaustive enumeration: there are at
most 4^3 = 64 mark assignments and every path has length at most two.
"""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .models import N_MODELS, CiModel, statements_to_model

__all__ = [
    "Mark",
    "CausalGraph3",
    "PriorSpec",
    "enumerate_graphs",
    "ci_model_of",
    "count_by_model",
    "build_prior",
    "prior_weights",
    "PRIOR_PRESETS",
]

#: Unordered node pairs, in enumeration order.
PAIRS = ((0, 1), (0, 2), (1, 2))


class Mark(IntEnum):
    """Edge state of one node pair (i, j) with i < j."""

    ABSENT = 0
    FORWARD = 1    # i -> j
    BACKWARD = 2   # j -> i
    BIDIRECTED = 3  # i <-> j


@dataclass(frozen=True)
class CausalGraph3:
    """A directed (ancestral) graph on nodes 0, 1, 2.

    ``marks[p]`` is the edge state of ``PAIRS[p]``.  DAGs may not use
    BIDIRECTED; validity (acyclicity, ancestrality) is checked by
    ``is_valid`` rather than at construction so that enumeration can
    filter candidates uniformly.
    """

    kind: str  # "dag" or "dmag"
    marks: tuple

    def __post_init__(self):
        if self.kind not in ("dag", "dmag"):
            raise ValueError(f"kind must be 'dag' or 'dmag', got {self.kind!r}")
        if len(self.marks) != 3:
            raise ValueError("need one mark per node pair")
        if self.kind == "dag" and Mark.BIDIRECTED in self.marks:
            raise ValueError("DAGs cannot contain bidirected edges")

    def edge_present(self, i, j):
        return self.marks[PAIRS.index(tuple(sorted((i, j))))] != Mark.ABSENT

    def directed_edges(self):
        """List of (tail, head) pairs for the directed edges only."""
        out = []
        for (i, j), mark in zip(PAIRS, self.marks):
            if mark == Mark.FORWARD:
                out.append((i, j))
            elif mark == Mark.BACKWARD:
                out.append((j, i))
        return out

    def arrowhead_at(self, node, other):
        """Whether the edge between node and other has an arrowhead at node."""
        i, j = sorted((node, other))
        mark = self.marks[PAIRS.index((i, j))]
        if mark == Mark.ABSENT:
            raise ValueError(f"no edge between {node} and {other}")
        if mark == Mark.BIDIRECTED:
            return True
        head = j if mark == Mark.FORWARD else i
        return node == head

    def is_valid(self):
        """Whether the graph belongs to the catalogue of its kind.

        DAGs must be acyclic.  DMAGs must be ancestral (no directed
        cycle, no almost-directed cycle) and satisfy one further
        catalogue restriction: at an unshielded collider, at most one of
        the two converging edges may be bidirected.  The restriction
        drops exactly the three graphs whose only edges are two
        bidirected ones, fixing the catalogue at 53 DMAGs; the graph
        counts per independence model, and hence the counting priors,
        are defined with respect to this catalogue.
        """
        directed = self.directed_edges()
        # Directed cycles on three nodes require all three pairs directed
        # in a rotation.
        successors = {t: h for t, h in directed}
        if len(directed) == 3 and len(successors) == 3:
            node = 0
            for _ in range(3):
                node = successors.get(node)
                if node is None:
                    break
            if node == 0:
                return False
        # i <-> j plus a directed path between i and j through the third
        # node breaks ancestrality.
        for (i, j), mark in zip(PAIRS, self.marks):
            if mark != Mark.BIDIRECTED:
                continue
            k = 3 - i - j
            if ((i, k) in directed and (k, j) in directed) or (
                (j, k) in directed and (k, i) in directed
            ):
                return False
        # Catalogue restriction: no unshielded collider with two
        # bidirected edges.
        for k in range(3):
            i, j = (n for n in range(3) if n != k)
            if (
                self.marks[PAIRS.index(tuple(sorted((i, k))))] == Mark.BIDIRECTED
                and self.marks[PAIRS.index(tuple(sorted((j, k))))] == Mark.BIDIRECTED
                and self.marks[PAIRS.index((i, j))] == Mark.ABSENT
            ):
                return False
        return True


def _m_connected(graph, i, j, conditioned):
    """Whether i and j are m-connected given the conditioning set.

    The only candidate paths are the direct edge and the two-edge path
    through the remaining node k.  On that path k blocks as a non-collider
    when conditioned on, and unblocks as a collider only when conditioned
    on (ancestors of the conditioning set reduce to membership here).
    """
    if graph.edge_present(i, j):
        return True
    k = 3 - i - j
    if not (graph.edge_present(i, k) and graph.edge_present(k, j)):
        return False
    collider = graph.arrowhead_at(k, i) and graph.arrowhead_at(k, j)
    return collider == (k in conditioned)


def ci_model_of(graph: CausalGraph3) -> CiModel:
    """The independence model entailed by m-separation in the graph."""
    statements = set()
    for a, b in PAIRS:
        if not _m_connected(graph, a, b, frozenset()):
            statements.add(("m", a + 1, b + 1))
        if not _m_connected(graph, a, b, frozenset({3 - a - b})):
            statements.add(("p", a + 1, b + 1))
    return statements_to_model(statements)


@dataclass(frozen=True)
class PriorSpec:
    """Recipe for a prior over independence models.

    ``bk_root`` names a node that may receive no arrowheads (the
    exogenous-first background knowledge; node 0 for marker-first scans).
    ``edge_prob`` switches from graph counting to sparsity weighting:
    each graph is weighted by q^(edges present) * (1-q)^(edges absent),
    ignoring orientation.  ``required_edges`` and ``forbidden_edges`` hold
    (tail, head) pairs; a graph survives only if each required directed
    edge is present and no forbidden one is.
    """

    kind: str = "dmag"
    bk_root: int = None
    edge_prob: float = None
    required_edges: frozenset = frozenset()
    forbidden_edges: frozenset = frozenset()

    def __post_init__(self):
        if self.kind not in ("dag", "dmag"):
            raise ValueError(f"kind must be 'dag' or 'dmag', got {self.kind!r}")
        if self.bk_root is not None and self.bk_root not in (0, 1, 2):
            raise ValueError(f"bk_root must be a node index, got {self.bk_root}")
        if self.edge_prob is not None and not 0.0 <= self.edge_prob <= 1.0:
            raise ValueError(f"edge_prob must lie in [0, 1], got {self.edge_prob}")
        req = frozenset(tuple(e) for e in self.required_edges)
        forb = frozenset(tuple(e) for e in self.forbidden_edges)
        if req & forb:
            raise ValueError(f"edges both required and forbidden: {sorted(req & forb)}")
        object.__setattr__(self, "required_edges", req)
        object.__setattr__(self, "forbidden_edges", forb)


def _admits(spec, graph):
    if spec.bk_root is not None:
        for other in range(3):
            if other != spec.bk_root and graph.edge_present(spec.bk_root, other):
                if graph.arrowhead_at(spec.bk_root, other):
                    return False
    directed = set(graph.directed_edges())
    if spec.required_edges - directed:
        return False
    if spec.forbidden_edges & directed:
        return False
    return True


def enumerate_graphs(spec: PriorSpec):
    """All valid graphs of the spec's kind surviving its constraints.

    Exhausts the 27 (DAG) or 64 (DMAG) mark assignments, keeping the
    acyclic/ancestral ones that satisfy the background knowledge and edge
    constraints.  The result is duplicate-free by construction.
    """
    allowed = (Mark.ABSENT, Mark.FORWARD, Mark.BACKWARD)
    if spec.kind == "dmag":
        allowed = allowed + (Mark.BIDIRECTED,)
    out = []
    for m01 in allowed:
        for m02 in allowed:
            for m12 in allowed:
                g = CausalGraph3(spec.kind, (m01, m02, m12))
                if g.is_valid() and _admits(spec, g):
                    out.append(g)
    return out


def count_by_model(spec: PriorSpec) -> np.ndarray:
    """Number of surviving graphs in each of the eleven model classes."""
    counts = np.zeros(N_MODELS, dtype=int)
    for g in enumerate_graphs(spec):
        counts[ci_model_of(g)] += 1
    return counts


def build_prior(spec: PriorSpec) -> np.ndarray:
    """Prior weights over the eleven models implied by the spec.

    Uniform over surviving graphs unless ``edge_prob`` is set, in which
    case each graph contributes its sparsity weight.  Raises ValueError
    when the constraints eliminate every graph.
    """
    weights = np.zeros(N_MODELS)
    total = 0
    for g in enumerate_graphs(spec):
        if spec.edge_prob is None:
            w = 1.0
        else:
            q = spec.edge_prob
            present = sum(1 for mark in g.marks if mark != Mark.ABSENT)
            w = q**present * (1.0 - q) ** (3 - present)
        weights[ci_model_of(g)] += w
        total += 1
    if total == 0:
        raise ValueError("no graph satisfies the prior constraints")
    s = weights.sum()
    if s == 0.0:
        raise ValueError("every surviving graph has zero weight")
    return weights / s


#: Named prior recipes; "-bk" restricts arrowheads into node 0 (the marker).
PRIOR_PRESETS = {
    "dag": PriorSpec(kind="dag"),
    "dag-bk": PriorSpec(kind="dag", bk_root=0),
    "dmag": PriorSpec(kind="dmag"),
    "dmag-bk": PriorSpec(kind="dmag", bk_root=0),
}


def prior_weights(name, edge_prob=None) -> np.ndarray:
    """Prior weight vector for a named preset.

    ``edge_prob`` switches the preset to sparsity weighting with the given
    per-pair edge probability.
    """
    try:
        spec = PRIOR_PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown prior preset {name!r}; choose from {sorted(PRIOR_PRESETS)}")
    if edge_prob is not None:
        spec = PriorSpec(
            kind=spec.kind,
            bk_root=spec.bk_root,
            edge_prob=edge_prob,
            required_edges=spec.required_edges,
            forbidden_edges=spec.forbidden_edges,
        )
    return build_prior(spec)
