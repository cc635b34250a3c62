"""Clustering quality scores: pairwise F1 and NMI.

Both metrics compare two labelings of the same article ids and are invariant
under label renaming. Conventions are fixed here so scores stay comparable:
pair-counting F1 with 0/0 ratios scored as 0, and NMI normalized by the
arithmetic mean of the entropies (natural log).
"""

from __future__ import annotations

import json
import math
from collections import Counter
from typing import Dict, Mapping

from .errors import IdSetMismatchError, ParseError

# article id -> cluster label
Labeling = Mapping[str, str]


def _check_ids(pred: Labeling, gold: Labeling) -> None:
    if not pred or not gold:
        raise ValueError("labelings must be non-empty")
    if pred.keys() != gold.keys():
        only_pred = sorted(set(pred) - set(gold))
        only_gold = sorted(set(gold) - set(pred))
        raise IdSetMismatchError(
            f"id sets differ: {len(only_pred)} only in pred {only_pred[:10]}, "
            f"{len(only_gold)} only in gold {only_gold[:10]}",
            only_pred=only_pred,
            only_gold=only_gold,
        )


def pairwise_f1(pred: Labeling, gold: Labeling) -> float:
    """Pair-counting F1 over all unordered article pairs.

    TP are pairs co-clustered in both labelings; precision divides by pairs
    co-clustered in pred, recall by pairs co-clustered in gold. 0/0 ratios
    are 0, and F1 is 0 when precision and recall are both 0.
    """
    _check_ids(pred, gold)
    joint = Counter((pred[a], gold[a]) for a in pred)
    pred_sizes = Counter(pred.values())
    gold_sizes = Counter(gold.values())
    tp = sum(c * (c - 1) // 2 for c in joint.values())
    pred_pairs = sum(c * (c - 1) // 2 for c in pred_sizes.values())
    gold_pairs = sum(c * (c - 1) // 2 for c in gold_sizes.values())
    precision = tp / pred_pairs if pred_pairs else 0.0
    recall = tp / gold_pairs if gold_pairs else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def nmi(pred: Labeling, gold: Labeling) -> float:
    """Mutual information normalized by the mean of the two entropies.

    Counts-based with natural log. Two degenerate labelings (both single
    cluster) score 1.0; exactly one degenerate labeling scores 0.0.
    """
    _check_ids(pred, gold)
    n = len(pred)
    joint = Counter((pred[a], gold[a]) for a in pred)
    pred_sizes = Counter(pred.values())
    gold_sizes = Counter(gold.values())

    def entropy(sizes: Counter) -> float:
        h = 0.0
        for c in sizes.values():
            p = c / n
            h -= p * math.log(p)
        return h

    h_pred = entropy(pred_sizes)
    h_gold = entropy(gold_sizes)
    if h_pred == 0.0 and h_gold == 0.0:
        return 1.0
    if h_pred == 0.0 or h_gold == 0.0:
        return 0.0
    mi = 0.0
    for (pl, gl), c in joint.items():
        mi += (c / n) * math.log(c * n / (pred_sizes[pl] * gold_sizes[gl]))
    value = mi / ((h_pred + h_gold) / 2.0)
    return min(1.0, max(0.0, value))


def load_labels(path) -> Dict[str, str]:
    """Load JSON Lines of {"id": ..., "label": ...}.

    Also accepts a "story" field in place of "label" so the assignment file
    written by `storystream run` can be scored directly.
    """
    labels: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno) from exc
            if not isinstance(record, dict) or "id" not in record:
                raise ParseError("expected an object with 'id'", line=lineno)
            label = record.get("label", record.get("story"))
            if label is None:
                raise ParseError("expected a 'label' (or 'story') field", line=lineno)
            article_id = record["id"]
            if not isinstance(article_id, str):
                raise ParseError("'id' must be a string", line=lineno)
            if article_id in labels:
                raise ParseError(f"id {article_id!r} labeled twice", line=lineno)
            labels[article_id] = str(label)
    return labels
