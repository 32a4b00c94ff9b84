"""Attachment scores, displacement curves and trivial baselines.

Every token is scored, punctuation included.
"""
from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .conllu import DepTree, Token

ROOT_BUCKET = "root"
TAIL = 10


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class Metrics:
    uas: float
    las: float
    n_tokens: int

    def as_dict(self) -> dict:
        return {"uas": self.uas, "las": self.las, "n_tokens": self.n_tokens}


def _check_aligned(gold: Sequence[DepTree], pred: Sequence[DepTree]) -> None:
    if len(gold) != len(pred):
        raise AlignmentError(f"{len(gold)} gold sentences but {len(pred)} predicted")
    for i, (g, p) in enumerate(zip(gold, pred), 1):
        if len(g) != len(p):
            name = g.sentence_id or f"#{i}"
            raise AlignmentError(f"sentence {name}: {len(g)} gold tokens but {len(p)} predicted")


def score(gold: Sequence[DepTree], pred: Sequence[DepTree]) -> Metrics:
    _check_aligned(gold, pred)
    total = heads = labeled = 0
    for g, p in zip(gold, pred):
        for gt, pt in zip(g.tokens, p.tokens):
            total += 1
            if gt.head == pt.head:
                heads += 1
                if gt.deprel == pt.deprel:
                    labeled += 1
    if total == 0:
        return Metrics(1.0, 1.0, 0)
    return Metrics(heads / total, labeled / total, total)


def macro_average(per_treebank: Sequence[Metrics]) -> Metrics:
    if not per_treebank:
        raise ValueError("macro average of nothing")
    m = len(per_treebank)
    return Metrics(sum(x.uas for x in per_treebank) / m, sum(x.las for x in per_treebank) / m,
                   sum(x.n_tokens for x in per_treebank))


@dataclass(frozen=True)
class BucketScore:
    precision: float
    recall: float
    f1: float
    gold_count: int
    pred_count: int
    true_positives: int


def bucket_of(head: int, dep: int, merge_tails: bool = True):
    """Signed displacement dependent - head; root arcs get their own bucket."""
    if head == 0:
        return ROOT_BUCKET
    d = dep - head
    if merge_tails:
        d = max(-TAIL, min(TAIL, d))
    return d


def _prf(tp: int, n_pred: int, n_gold: int) -> tuple[float, float, float]:
    p = tp / n_pred if n_pred else 0.0
    r = tp / n_gold if n_gold else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def displacement_curve(gold: Sequence[DepTree], pred: Sequence[DepTree],
                       merge_tails: bool = True) -> dict:
    """Per-bucket precision/recall/F1; buckets at +-10 hold the merged tails."""
    _check_aligned(gold, pred)
    g_count: dict = defaultdict(int)
    p_count: dict = defaultdict(int)
    tp: dict = defaultdict(int)
    for g, p in zip(gold, pred):
        garcs = g.arcs()
        for t in g.tokens:
            g_count[bucket_of(t.head, t.id, merge_tails)] += 1
        for t in p.tokens:
            b = bucket_of(t.head, t.id, merge_tails)
            p_count[b] += 1
            if (t.head, t.id) in garcs:
                tp[b] += 1
    curve = {}
    for b in set(g_count) | set(p_count):
        pr, rc, f = _prf(tp[b], p_count[b], g_count[b])
        curve[b] = BucketScore(pr, rc, f, g_count[b], p_count[b], tp[b])
    return curve


def _bucket_key(b):
    return (1, 0) if b == ROOT_BUCKET else (0, b)


def curve_csv(curve: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["displacement", "precision", "recall", "f1", "gold_count"])
    for b in sorted(curve, key=_bucket_key):
        s = curve[b]
        w.writerow([b, f"{s.precision:.6f}", f"{s.recall:.6f}", f"{s.f1:.6f}", s.gold_count])
    return buf.getvalue()


def uas_from_curve(curve: dict) -> float:
    """Recombine bucket true positives into corpus UAS."""
    tokens = sum(s.gold_count for s in curve.values())
    return sum(s.true_positives for s in curve.values()) / tokens if tokens else 1.0


def baseline_parse(trees: Iterable[DepTree], strategy: str = "right-branching") -> list[DepTree]:
    """Attach every token to its left (right-branching) or right neighbour."""
    if strategy not in ("right-branching", "left-branching"):
        raise ValueError(f"unknown baseline {strategy!r}")
    out = []
    for tree in trees:
        n = len(tree)
        toks = []
        for t in tree.tokens:
            if strategy == "right-branching":
                h = t.id - 1
            else:
                h = 0 if t.id == n else t.id + 1
            toks.append(Token(t.id, t.form, t.upos, h, "dep"))
        out.append(DepTree(tuple(toks), tree.sentence_id, tree.comments))
    return out
