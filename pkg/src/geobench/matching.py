"""Align predicted toponym spans with gold annotations.

Matching is inexact by default: any character overlap between a predicted
span and a gold span can count as a hit, so "Amherst" predicted inside the
annotated "Town of Amherst" is a true positive. Overlap is purely
positional; surface strings are never compared.

The pairing rule is greedy and deterministic: gold spans are visited in
ascending start order and each takes the still-unmatched prediction with
the largest character overlap, ties broken by smaller prediction start,
then smaller end. A brute-force maximum-matching oracle in the test suite
keeps the greedy rule honest.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import ToponymSpan


def spans_overlap(a: ToponymSpan, b: ToponymSpan) -> bool:
    """True iff the inclusive ranges share at least one character position."""
    return a.start <= b.end and b.start <= a.end


def overlap_size(a: ToponymSpan, b: ToponymSpan) -> int:
    """Number of character positions shared by two inclusive spans (0 if disjoint)."""
    return max(0, min(a.end, b.end) - max(a.start, b.start) + 1)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True)
class MatchReport:
    """One-to-one alignment between gold and predicted spans.

    Invariants: tp == len(pairs), tp + fn == number of gold spans,
    tp + fp == number of predictions, and no span appears in two pairs.
    """

    pairs: tuple[tuple[ToponymSpan, ToponymSpan], ...]
    tp: int
    fp: int
    fn: int
    unmatched_gold: tuple[ToponymSpan, ...] = field(default=())
    unmatched_pred: tuple[ToponymSpan, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.tp != len(self.pairs):
            raise ValueError("tp must equal the number of matched pairs")
        if self.fn != len(self.unmatched_gold) or self.fp != len(self.unmatched_pred):
            raise ValueError("fn/fp must equal the unmatched list sizes")


def match_spans(
    gold: list[ToponymSpan] | tuple[ToponymSpan, ...],
    pred: list[ToponymSpan] | tuple[ToponymSpan, ...],
    exact: bool = False,
) -> MatchReport:
    """Greedily pair gold and predicted spans one-to-one.

    With exact=True a prediction only matches a gold span with identical
    [start, end] bounds (strict mode, off by default).
    """
    gold_order = sorted(range(len(gold)), key=lambda i: (gold[i].start, gold[i].end))
    pred_sorted = sorted(range(len(pred)), key=lambda j: (pred[j].start, pred[j].end))
    taken: set[int] = set()
    pairs: list[tuple[ToponymSpan, ToponymSpan]] = []
    matched_gold: set[int] = set()

    for i in gold_order:
        g = gold[i]
        best_j = -1
        best_overlap = 0
        for j in pred_sorted:
            if j in taken:
                continue
            p = pred[j]
            if exact:
                if p.start == g.start and p.end == g.end:
                    best_j = j
                    best_overlap = g.length
                    break
                continue
            size = overlap_size(g, p)
            # pred_sorted is in (start, end) order, so the first maximal
            # overlap seen already wins the tie-break
            if size > best_overlap:
                best_overlap = size
                best_j = j
        if best_j >= 0 and best_overlap >= 1:
            taken.add(best_j)
            matched_gold.add(i)
            pairs.append((g, pred[best_j]))

    unmatched_gold = tuple(gold[i] for i in range(len(gold)) if i not in matched_gold)
    unmatched_pred = tuple(pred[j] for j in range(len(pred)) if j not in taken)
    return MatchReport(
        pairs=tuple(pairs),
        tp=len(pairs),
        fp=len(unmatched_pred),
        fn=len(unmatched_gold),
        unmatched_gold=unmatched_gold,
        unmatched_pred=unmatched_pred,
    )


def count_confusion(report: MatchReport) -> ConfusionCounts:
    return ConfusionCounts(tp=report.tp, fp=report.fp, fn=report.fn)
