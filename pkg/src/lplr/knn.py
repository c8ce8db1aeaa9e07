"""Brute-force K-nearest-neighbour classification and its scores."""

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix


@dataclass
class KnnResult:
    predicted: np.ndarray
    accuracy: float | None
    weighted_f1: float | None
    precision: dict
    recall: dict

    def to_dict(self):
        return {
            "predicted": [_plain(v) for v in self.predicted],
            "accuracy": self.accuracy,
            "weighted_f1": self.weighted_f1,
            "precision": {str(k): v for k, v in self.precision.items()},
            "recall": {str(k): v for k, v in self.recall.items()},
        }


def _plain(v):
    return v.item() if isinstance(v, np.generic) else v


def pairwise_distances(X, Y, max_elements=2**22):
    """Euclidean distances from explicit differences.

    Slower than the expanded ``|x|^2 - 2 x.y + |y|^2`` form but free of
    cancellation, so equal distances compare equal and ties break the same
    way every time.
    """
    D = np.empty((X.shape[0], Y.shape[0]))
    chunk = max(1, max_elements // max(1, Y.size))
    for i in range(0, X.shape[0], chunk):
        diff = X[i:i + chunk, None, :] - Y[None, :, :]
        D[i:i + chunk] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return D


def _vote(labels, dists):
    """Majority label; ties go to the smaller summed distance, then the smaller label."""
    best = None
    for lab in np.unique(labels):
        mask = labels == lab
        key = (-int(mask.sum()), float(dists[mask].sum()), lab)
        if best is None or key < best:
            best = key
    return best[2]


def knn_predict(train, labels, test, K=3):
    train = as_matrix(train, "train")
    test = as_matrix(test, "test")
    labels = np.asarray(labels)
    if labels.shape != (train.shape[0],):
        raise ValueError(f"need one label per training row, got {labels.shape} for {train.shape[0]} rows")
    if train.shape[1] != test.shape[1]:
        raise ValueError(f"feature mismatch: train has {train.shape[1]}, test has {test.shape[1]}")
    if K < 1:
        raise ValueError("K must be >= 1")
    K = min(int(K), train.shape[0])
    D = pairwise_distances(test, train)
    # stable sort so equidistant neighbours are taken in training order
    order = np.argsort(D, axis=1, kind="stable")[:, :K]
    return np.array([_vote(labels[idx], D[i, idx]) for i, idx in enumerate(order)])


def classification_scores(y_true, y_pred):
    """Accuracy, support-weighted F1 and per-class precision / recall (0/0 -> 0)."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError("label arrays differ in shape")
    N = y_true.size
    classes = np.unique(np.concatenate([y_true, y_pred]))
    precision, recall = {}, {}
    wf1 = 0.0
    for c in classes:
        tp = int(np.sum((y_pred == c) & (y_true == c)))
        pp = int(np.sum(y_pred == c))
        support = int(np.sum(y_true == c))
        p = tp / pp if pp else 0.0
        r = tp / support if support else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        precision[_plain(c)] = p
        recall[_plain(c)] = r
        wf1 += support / N * f1
    return float(np.mean(y_true == y_pred)), float(wf1), precision, recall


def knn_classify(train, labels, test, K=3, test_labels=None):
    """Predict ``test`` labels; scores are filled in when ``test_labels`` is given."""
    if np.asarray(labels).size == 0:
        raise ValueError("training set is empty")
    pred = knn_predict(train, labels, test, K)
    if test_labels is None:
        return KnnResult(pred, None, None, {}, {})
    acc, wf1, precision, recall = classification_scores(test_labels, pred)
    return KnnResult(pred, acc, wf1, precision, recall)
