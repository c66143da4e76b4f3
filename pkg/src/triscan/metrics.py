"""Scoring a probability matrix against known regulatory relations.

Treats every ordered trait pair (i, j), i != j, as one binary
classification instance; the predicted score is the scanned probability
and the label is the presence of the edge in the ground truth.  Curves
use every distinct predicted value as a threshold; nothing is dropped
or interpolated.
"""

import numpy as np

__all__ = [
    "pair_scores",
    "roc_auc",
    "pr_auc",
    "calibration_table",
]


def _as_scores_labels(scores, labels):
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels, dtype=bool).ravel()
    if scores.shape != labels.shape:
        raise ValueError(f"{scores.size} scores for {labels.size} labels")
    if scores.size == 0:
        raise ValueError("no instances to score")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    return scores, labels


def pair_scores(prob, truth):
    """Flatten matched m x m matrices into (scores, labels) over i != j.

    The diagonal carries no prediction (a trait does not regulate
    itself) and is excluded from the instance universe.
    """
    prob = np.asarray(prob, dtype=float)
    truth = np.asarray(truth, dtype=bool)
    if prob.ndim != 2 or prob.shape[0] != prob.shape[1]:
        raise ValueError(f"probability matrix must be square, got shape {prob.shape}")
    if truth.shape != prob.shape:
        raise ValueError(f"truth shape {truth.shape} does not match {prob.shape}")
    off = ~np.eye(prob.shape[0], dtype=bool)
    return _as_scores_labels(prob[off], truth[off])


def _threshold_counts(scores, labels):
    """Cumulative (tp, fp) after each distinct threshold, descending.

    Returns (thresholds, tp, fp): predicting positive at score >=
    thresholds[t] yields tp[t] true and fp[t] false positives.
    """
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]
    # Last index of each tie group marks the threshold boundary.
    boundary = np.flatnonzero(np.append(s[1:] != s[:-1], True))
    tp = np.cumsum(y)[boundary]
    fp = np.cumsum(~y)[boundary]
    return s[boundary], tp, fp


def roc_auc(scores, labels):
    """ROC points and area.

    Points are (false positive rate, true positive rate) at every
    distinct threshold, preceded by (0, 0).  The trapezoid area over
    tie-grouped points equals the Mann-Whitney statistic with ties
    counted half.
    """
    scores, labels = _as_scores_labels(scores, labels)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs at least one positive and one negative instance")
    _, tp, fp = _threshold_counts(scores, labels)
    tpr = np.concatenate([[0.0], tp / n_pos])
    fpr = np.concatenate([[0.0], fp / n_neg])
    points = np.column_stack([fpr, tpr])
    auc = float(np.trapezoid(tpr, fpr))
    return points, auc


def pr_auc(scores, labels):
    """Precision-recall points and stepwise area.

    Points are (recall, precision) at every distinct threshold in
    descending threshold order.  The area integrates precision as a
    right-continuous step function of recall, so each recall increment
    is credited with the precision reached at its own threshold.
    """
    scores, labels = _as_scores_labels(scores, labels)
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise ValueError("precision-recall needs at least one positive instance")
    _, tp, fp = _threshold_counts(scores, labels)
    recall = tp / n_pos
    precision = tp / (tp + fp)
    points = np.column_stack([recall, precision])
    auc = float(np.sum(np.diff(recall, prepend=0.0) * precision))
    return points, auc


def calibration_table(scores, labels, bins=5, equal_width=False):
    """Per-bin mean predicted probability versus observed event rate.

    By default instances are sorted by score and split into bins of
    (near) equal count, any remainder going one instance each to the
    leading (lowest-score) bins.  With equal_width=True the unit
    interval is instead cut into equal-width bins; empty bins report
    NaN averages.  Each row is (mean_score, event_rate, count); counts
    always sum to the instance total.
    """
    scores, labels = _as_scores_labels(scores, labels)
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    rows = []
    if equal_width:
        edges = np.linspace(0.0, 1.0, bins + 1)
        idx = np.clip(np.digitize(scores, edges[1:-1], right=False), 0, bins - 1)
        for b in range(bins):
            mask = idx == b
            count = int(mask.sum())
            if count == 0:
                rows.append((np.nan, np.nan, 0))
            else:
                rows.append((scores[mask].mean(), labels[mask].mean(), count))
    else:
        if scores.size < bins:
            raise ValueError(f"cannot fill {bins} bins from {scores.size} instances")
        order = np.argsort(scores, kind="stable")
        base, remainder = divmod(scores.size, bins)
        start = 0
        for b in range(bins):
            count = base + (1 if b < remainder else 0)
            chunk = order[start : start + count]
            start += count
            rows.append((scores[chunk].mean(), labels[chunk].mean(), count))
    return [(float(m), float(o), int(c)) for m, o, c in rows]
