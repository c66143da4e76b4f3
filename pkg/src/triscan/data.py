"""Loading, validation, and correlation of marker/trait data.

Input files are delimited text (tab by default), one header row of
column names, one sample per row, no quoting.  Marker and trait files
must describe the same samples in the same order.  The scan layer never
touches raw data; it reads entries of the joint correlation matrix
computed here.
"""

import csv
import math

import numpy as np

__all__ = [
    "DatasetError",
    "DimensionMismatchError",
    "MissingValueError",
    "NonNumericValueError",
    "ConstantColumnError",
    "ExpressionDataset",
    "JointCorrelation",
    "as_sample_matrix",
    "standardize_columns",
    "load_matrix",
    "load_dataset",
    "write_matrix",
    "write_dataset",
    "correlation_matrix",
]


class DatasetError(ValueError):
    """Base class for input data problems."""


class DimensionMismatchError(DatasetError):
    pass


class MissingValueError(DatasetError):
    pass


class NonNumericValueError(DatasetError):
    pass


class ConstantColumnError(DatasetError):
    pass


def as_sample_matrix(X, name="X"):
    """Coerce to a 2-D float array of samples by variables, or raise.

    Shared by the loaders and the estimator API.  Rejects missing and
    non-finite entries; a 1-D vector is treated as a single column.
    """
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DatasetError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DatasetError(f"{name} must be non-empty, got shape {arr.shape}")
    bad = ~np.isfinite(arr)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        value = arr[r, c]
        if math.isnan(value):
            raise MissingValueError(f"{name} has a missing value at row {r + 1}, column {c + 1}")
        raise DatasetError(f"{name} has a non-finite value at row {r + 1}, column {c + 1}")
    return np.ascontiguousarray(arr)


def _check_constant_columns(arr, names, what):
    sd = arr.std(axis=0)
    for idx in np.flatnonzero(sd == 0.0):
        raise ConstantColumnError(
            f"{what} column {names[idx]!r} is constant; its correlations are undefined"
        )


class ExpressionDataset:
    """Validated marker and trait matrices over shared samples.

    markers is n x l, traits is n x m, rows are samples.  Construction
    validates shapes, finiteness, and the absence of constant columns.
    """

    def __init__(self, markers, traits, marker_names=None, trait_names=None):
        self.markers = as_sample_matrix(markers, "markers")
        self.traits = as_sample_matrix(traits, "traits")
        if self.markers.shape[0] != self.traits.shape[0]:
            raise DimensionMismatchError(
                f"markers have {self.markers.shape[0]} rows "
                f"but traits have {self.traits.shape[0]}"
            )
        self.n = self.markers.shape[0]
        self.n_markers = self.markers.shape[1]
        self.n_traits = self.traits.shape[1]
        if marker_names is None:
            marker_names = [f"L{k + 1}" for k in range(self.n_markers)]
        if trait_names is None:
            trait_names = [f"T{i + 1}" for i in range(self.n_traits)]
        self.marker_names = list(map(str, marker_names))
        self.trait_names = list(map(str, trait_names))
        if len(self.marker_names) != self.n_markers:
            raise DimensionMismatchError(
                f"{len(self.marker_names)} marker names for {self.n_markers} columns"
            )
        if len(self.trait_names) != self.n_traits:
            raise DimensionMismatchError(
                f"{len(self.trait_names)} trait names for {self.n_traits} columns"
            )
        if self.n < 2:
            raise DatasetError(f"need at least 2 samples, got {self.n}")
        _check_constant_columns(self.markers, self.marker_names, "marker")
        _check_constant_columns(self.traits, self.trait_names, "trait")

    def __repr__(self):
        return (
            f"ExpressionDataset(n={self.n}, "
            f"n_markers={self.n_markers}, n_traits={self.n_traits})"
        )


class JointCorrelation:
    """Sample correlations over markers and traits jointly.

    The matrix is (l+m) x (l+m), ordered markers first, then traits.
    Entry lookups for one (marker, trait, trait) triplet are three array
    reads; the marker_trait and trait_trait views expose the blocks the
    scan iterates over.
    """

    def __init__(self, matrix, n, n_markers, n_traits):
        matrix = np.asarray(matrix, dtype=float)
        p = n_markers + n_traits
        if matrix.shape != (p, p):
            raise DatasetError(
                f"correlation matrix shape {matrix.shape} does not match "
                f"{n_markers} markers + {n_traits} traits"
            )
        if not np.all(np.isfinite(matrix)):
            raise DatasetError("correlation matrix has non-finite entries")
        if np.abs(matrix - matrix.T).max() > 1e-12:
            raise DatasetError("correlation matrix is not symmetric within 1e-12")
        if np.abs(np.diag(matrix) - 1.0).max() > 1e-12:
            raise DatasetError("correlation matrix diagonal is not 1")
        if np.abs(matrix).max() > 1.0 + 1e-12:
            raise DatasetError("correlation entries must lie in [-1, 1]")
        self.matrix = matrix
        self.n = int(n)
        self.n_markers = int(n_markers)
        self.n_traits = int(n_traits)

    @property
    def marker_trait(self):
        """l x m block of marker-trait correlations (read-only view)."""
        return self.matrix[: self.n_markers, self.n_markers :]

    @property
    def trait_trait(self):
        """m x m block of trait-trait correlations (read-only view)."""
        return self.matrix[self.n_markers :, self.n_markers :]

    def triplet(self, marker, trait_i, trait_j):
        """(r12, r13, r23) for the triplet (marker, trait_i, trait_j)."""
        k = marker
        a = self.n_markers + trait_i
        b = self.n_markers + trait_j
        return (self.matrix[k, a], self.matrix[k, b], self.matrix[a, b])

    def __repr__(self):
        return (
            f"JointCorrelation(n={self.n}, "
            f"n_markers={self.n_markers}, n_traits={self.n_traits})"
        )


def standardize_columns(X):
    """Subtract column means and divide by column standard deviations.

    The scan itself is scale-free, so this is never required; it exists
    for comparisons against scale-sensitive methods and for tests of
    that invariance.
    """
    arr = as_sample_matrix(X)
    sd = arr.std(axis=0)
    if np.any(sd == 0.0):
        raise ConstantColumnError("cannot standardize a constant column")
    return (arr - arr.mean(axis=0)) / sd


def load_matrix(path, delimiter="\t"):
    """Read one delimited file into (column_names, n x p float array).

    The first row holds column names.  Empty cells and NA/NaN tokens
    raise MissingValueError; any other unparseable cell raises
    NonNumericValueError.  Cells are located by data row number
    (1-based, header excluded) and column name.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: file is empty")
        names = [h.strip() for h in header]
        width = len(names)
        rows = []
        for rownum, record in enumerate(reader, start=1):
            if len(record) != width:
                raise DimensionMismatchError(
                    f"{path}: row {rownum} has {len(record)} fields, expected {width}"
                )
            values = []
            for colnum, cell in enumerate(record):
                text = cell.strip()
                if text == "" or text.lower() in ("na", "nan"):
                    raise MissingValueError(
                        f"{path}: missing value at row {rownum}, column {names[colnum]!r}"
                    )
                try:
                    value = float(text)
                except ValueError:
                    raise NonNumericValueError(
                        f"{path}: non-numeric value {text!r} at row {rownum}, "
                        f"column {names[colnum]!r}"
                    )
                if not math.isfinite(value):
                    raise MissingValueError(
                        f"{path}: non-finite value at row {rownum}, column {names[colnum]!r}"
                    )
                values.append(value)
            rows.append(values)
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    return names, np.array(rows, dtype=float)


def load_dataset(marker_path, trait_path, delimiter="\t"):
    """Load and cross-validate a marker file and a trait file."""
    marker_names, markers = load_matrix(marker_path, delimiter)
    trait_names, traits = load_matrix(trait_path, delimiter)
    if markers.shape[0] != traits.shape[0]:
        raise DimensionMismatchError(
            f"{marker_path} has {markers.shape[0]} data rows "
            f"but {trait_path} has {traits.shape[0]}"
        )
    return ExpressionDataset(markers, traits, marker_names, trait_names)


def write_matrix(path, names, arr, delimiter="\t"):
    """Write one matrix as delimited text, round-trip safe.

    Values use 17 significant digits, enough to reproduce any double
    exactly on reload.
    """
    arr = np.asarray(arr, dtype=float)
    with open(path, "w", newline="") as fh:
        fh.write(delimiter.join(map(str, names)) + "\n")
        for row in arr:
            fh.write(delimiter.join("%.17g" % v for v in row) + "\n")


def write_dataset(dataset, marker_path, trait_path, delimiter="\t"):
    write_matrix(marker_path, dataset.marker_names, dataset.markers, delimiter)
    write_matrix(trait_path, dataset.trait_names, dataset.traits, delimiter)


def correlation_matrix(dataset) -> JointCorrelation:
    """Pearson correlations over all marker and trait columns jointly.

    Small asymmetries and out-of-range values from floating-point
    round-off are repaired (symmetrize, clip, unit diagonal) so the
    result always satisfies the JointCorrelation invariants.
    """
    joint = np.hstack([dataset.markers, dataset.traits])
    corr = np.corrcoef(joint, rowvar=False)
    corr = np.clip((corr + corr.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return JointCorrelation(corr, dataset.n, dataset.n_markers, dataset.n_traits)
