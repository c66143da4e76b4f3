"""The eleven conditional-independence models on three Gaussian variables.

A full-rank trivariate Gaussian admits exactly eleven distinct patterns of
zeros in its covariance and precision matrices.  Grouped by symmetry they
form five cases:

======== =========================== =====================================
case     model ids                   independence statements
======== =========================== =====================================
full     0                           none
acausal  1, 2, 3                     one marginal: 1-2, 2-3, 3-1
causal   4, 5, 6                     one partial: 1-2|3, 2-3|1, 3-1|2
isolated 7, 8, 9                     one variable independent of the rest
empty    10                          all
======== =========================== =====================================

The integer ids are part of the package contract: priors, Bayes factor
vectors and posteriors are all indexed this way.
"""

from enum import IntEnum
from itertools import permutations

__all__ = [
    "CiModel",
    "CanonicalCase",
    "N_MODELS",
    "canonical_case",
    "permute_model",
    "model_permutation",
    "statements_to_model",
]

N_MODELS = 11


class CiModel(IntEnum):
    """Identifier of one conditional-independence model."""

    FULL = 0
    MARGINAL_12 = 1
    MARGINAL_23 = 2
    MARGINAL_13 = 3
    PARTIAL_12 = 4
    PARTIAL_23 = 5
    PARTIAL_13 = 6
    ISOLATED_1 = 7
    ISOLATED_2 = 8
    ISOLATED_3 = 9
    EMPTY = 10


class CanonicalCase(IntEnum):
    """Symmetry class of a model (rows of the five-case table above)."""

    FULL = 0
    ACAUSAL = 1
    CAUSAL = 2
    INDEPENDENT = 3
    EMPTY = 4


# Variable pair (1-based) characterizing the marginal and partial models,
# and the isolated variable for models 7..9.
_MARGINAL_PAIR = {1: (1, 2), 2: (2, 3), 3: (1, 3)}
_PARTIAL_PAIR = {4: (1, 2), 5: (2, 3), 6: (1, 3)}
_ISOLATED_VAR = {7: 1, 8: 2, 9: 3}

_PAIR_TO_MARGINAL = {pair: mid for mid, pair in _MARGINAL_PAIR.items()}
_PAIR_TO_PARTIAL = {pair: mid for mid, pair in _PARTIAL_PAIR.items()}
_VAR_TO_ISOLATED = {v: mid for mid, v in _ISOLATED_VAR.items()}

# Statements are frozensets of ("m", i, j) marginal or ("p", i, j) partial
# (given the remaining variable) independences, with i < j 1-based.
_ALL_PAIRS = ((1, 2), (1, 3), (2, 3))


def _statements_of(model: int) -> frozenset:
    model = int(model)
    if model == CiModel.FULL:
        return frozenset()
    if model in _MARGINAL_PAIR:
        i, j = _MARGINAL_PAIR[model]
        return frozenset({("m", i, j)})
    if model in _PARTIAL_PAIR:
        i, j = _PARTIAL_PAIR[model]
        return frozenset({("p", i, j)})
    if model in _ISOLATED_VAR:
        v = _ISOLATED_VAR[model]
        pairs = [p for p in _ALL_PAIRS if v in p]
        return frozenset({(k, i, j) for k in "mp" for (i, j) in pairs})
    return frozenset({(k, i, j) for k in "mp" for (i, j) in _ALL_PAIRS})


STATEMENTS = {CiModel(m): _statements_of(m) for m in range(N_MODELS)}
_STATEMENTS_TO_MODEL = {stmts: mid for mid, stmts in STATEMENTS.items()}


def statements_to_model(statements) -> CiModel:
    """Map a set of independence statements to its model id.

    ``statements`` holds ("m", i, j) for a marginal independence of the
    1-based pair (i, j) and ("p", i, j) for independence given the third
    variable.  Raises ValueError if the set is not one of the eleven
    realizable combinations.
    """
    key = frozenset(statements)
    try:
        return _STATEMENTS_TO_MODEL[key]
    except KeyError:
        raise ValueError(f"statement set not realizable by a trivariate Gaussian: {sorted(key)}")


def canonical_case(model: int) -> CanonicalCase:
    """Symmetry class of the given model id."""
    model = int(model)
    if model == CiModel.FULL:
        return CanonicalCase.FULL
    if model in _MARGINAL_PAIR:
        return CanonicalCase.ACAUSAL
    if model in _PARTIAL_PAIR:
        return CanonicalCase.CAUSAL
    if model in _ISOLATED_VAR:
        return CanonicalCase.INDEPENDENT
    if model == CiModel.EMPTY:
        return CanonicalCase.EMPTY
    raise ValueError(f"invalid model id {model}")


def permute_model(model: int, perm) -> CiModel:
    """Model id after relabeling the variables.

    ``perm`` maps new 1-based positions to old variables: the relabeled
    variable ``a`` is the original variable ``perm[a - 1]``.  A statement
    about new variables (a, b) is therefore the original statement about
    (perm[a-1], perm[b-1]).
    """
    model = int(model)
    if model in (CiModel.FULL, CiModel.EMPTY):
        return CiModel(model)
    if model in _MARGINAL_PAIR:
        a, b = _MARGINAL_PAIR[model]
        old = tuple(sorted((perm[a - 1], perm[b - 1])))
        return CiModel(_PAIR_TO_MARGINAL[old])
    if model in _PARTIAL_PAIR:
        a, b = _PARTIAL_PAIR[model]
        old = tuple(sorted((perm[a - 1], perm[b - 1])))
        return CiModel(_PAIR_TO_PARTIAL[old])
    if model in _ISOLATED_VAR:
        return CiModel(_VAR_TO_ISOLATED[perm[_ISOLATED_VAR[model] - 1]])
    raise ValueError(f"invalid model id {model}")


def model_permutation(perm) -> list:
    """Index array ``ix`` such that ``new_vector[j] = old_vector[ix[j]]``.

    Relabeled model ``j`` states the same independences as original model
    ``permute_model(j, perm)``, so any per-model vector computed on the
    relabeled triplet equals the original vector gathered through ``ix``.
    """
    return [int(permute_model(j, perm)) for j in range(N_MODELS)]


def all_variable_permutations():
    """The six relabelings of (1, 2, 3), identity first."""
    return list(permutations((1, 2, 3)))
