"""Clustering and graph quality metrics: ARI and edge-sum comparison."""

from __future__ import annotations

from collections import Counter
from math import comb

import numpy as np

from .tmfg import TmfgGraph, edge_sum


def _canonical(labels) -> list[int]:
    seen: dict = {}
    out = []
    for lab in labels:
        lab = lab.item() if hasattr(lab, "item") else lab
        if lab not in seen:
            seen[lab] = len(seen)
        out.append(seen[lab])
    return out


def ari(truth, pred) -> float:
    """Adjusted Rand Index between two flat labelings.

    Chance-corrected pair-counting agreement: 1 for identical partitions,
    expectation 0 for independent random ones. Binomial counts are exact
    integers; only the final ratio is floating point. When both partitions
    are trivial (the 0/0 case) the result is 1 if they are identical,
    else 0.
    """
    truth = list(truth)
    pred = list(pred)
    if len(truth) != len(pred):
        raise ValueError(f"label lengths differ: {len(truth)} vs {len(pred)}")
    if len(truth) < 2:
        raise ValueError("need at least 2 labeled objects")
    n = len(truth)
    joint = Counter(zip(truth, pred))
    row = Counter(truth)
    col = Counter(pred)
    sum_ij = sum(comb(c, 2) for c in joint.values())
    sum_i = sum(comb(c, 2) for c in row.values())
    sum_j = sum(comb(c, 2) for c in col.values())
    total = comb(n, 2)
    expected = sum_i * sum_j / total
    denom = 0.5 * (sum_i + sum_j) - expected
    if denom == 0.0:
        return 1.0 if _canonical(truth) == _canonical(pred) else 0.0
    return (sum_ij - expected) / denom


def edge_sum_delta(candidate: TmfgGraph, reference: TmfgGraph, S: np.ndarray) -> float:
    """Percent edge-sum reduction of candidate relative to reference.

    Positive means the candidate's edge sum is lower.
    """
    if candidate.n != reference.n:
        raise ValueError("graphs have different vertex counts")
    ref = edge_sum(reference, S)
    if ref == 0.0:
        raise ValueError("reference edge sum is zero")
    return 100.0 * (ref - edge_sum(candidate, S)) / ref
