"""Relevance evaluation (MAP, NDCG@10, P@10) and 3-fold parameter tuning.

Graded judgments come from TREC-format qrels; binary relevance for MAP
and P@10 is grade > 0.  Cross-validation deterministically splits the
qid-sorted query set round-robin into three folds, tunes (mu, theta) on
two folds, and reports the mean score of the held-out thirds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

from .retrieval import RankedRun

MEASURES = ("map", "ndcg10", "p10")


@dataclass
class Qrels:
    """(qid, doc_id) -> relevance grade; negative input grades clamp to 0."""

    judgments: Dict[Tuple[str, str], int] = field(default_factory=dict)

    def grade(self, qid: str, doc_id: str) -> int:
        return self.judgments.get((qid, doc_id), 0)

    def judged_qids(self) -> List[str]:
        return sorted({qid for qid, _ in self.judgments})

    def relevant_docs(self, qid: str) -> Dict[str, int]:
        return {
            doc_id: grade
            for (q, doc_id), grade in self.judgments.items()
            if q == qid and grade > 0
        }


def load_qrels(path: str) -> Qrels:
    """Read `qid 0 doc_id grade` rows; later duplicates overwrite earlier."""
    qrels = Qrels()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected `qid 0 doc_id grade`")
            qid, _, doc_id, grade_s = parts
            try:
                grade = int(grade_s)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: grade must be an integer") from exc
            qrels.judgments[(qid, doc_id)] = max(0, grade)
    return qrels


@dataclass
class MetricReport:
    """Per-query metric rows plus their means and evaluation diagnostics."""

    per_query: Dict[str, Dict[str, float]] = field(default_factory=dict)
    means: Dict[str, float] = field(default_factory=dict)
    diagnostics: List[str] = field(default_factory=list)


def _average_precision(ranked: Sequence[str], relevant: Dict[str, int]) -> float:
    hits = 0
    precision_sum = 0.0
    for i, doc_id in enumerate(ranked, start=1):
        if doc_id in relevant:
            hits += 1
            precision_sum += hits / i
    # Unretrieved relevant documents count against recall via this divisor.
    return precision_sum / len(relevant)


def _precision_at_10(ranked: Sequence[str], relevant: Dict[str, int]) -> float:
    return sum(1 for doc_id in ranked[:10] if doc_id in relevant) / 10.0


def _ndcg_at_10(ranked: Sequence[str], relevant: Dict[str, int]) -> float:
    dcg = 0.0
    for i, doc_id in enumerate(ranked[:10], start=1):
        grade = relevant.get(doc_id, 0)
        if grade > 0:
            dcg += (2**grade - 1) / math.log2(i + 1)
    ideal = sorted(relevant.items(), key=lambda kv: (-kv[1], kv[0]))[:10]
    idcg = sum(
        (2**grade - 1) / math.log2(i + 1) for i, (_, grade) in enumerate(ideal, start=1)
    )
    return dcg / idcg


def evaluate(run: RankedRun, qrels: Qrels) -> MetricReport:
    """Score every judged run query; means skip unjudged and zero-relevant qids.

    A query present in the run with no qrels rows at all is dropped with a
    diagnostic; one that is judged but has no relevant documents is
    excluded from the means, also with a diagnostic.
    """
    report = MetricReport()
    judged = set(qrels.judged_qids())
    for qid, entries in run.results.items():
        if qid not in judged:
            report.diagnostics.append(f"qid {qid} has no judgments; dropped")
            continue
        relevant = qrels.relevant_docs(qid)
        if not relevant:
            report.diagnostics.append(f"qid {qid} has no relevant documents; excluded")
            continue
        ranked = [doc_id for doc_id, _ in entries]
        report.per_query[qid] = {
            "map": _average_precision(ranked, relevant),
            "p10": _precision_at_10(ranked, relevant),
            "ndcg10": _ndcg_at_10(ranked, relevant),
        }
    for measure in MEASURES:
        rows = [m[measure] for m in report.per_query.values()]
        report.means[measure] = sum(rows) / len(rows) if rows else 0.0
    return report


def write_metric_report(report: MetricReport, path: str) -> None:
    """CSV rows `qid,map,ndcg10,p10` with a closing `all` summary row."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("qid,map,ndcg10,p10\n")
        for qid in sorted(report.per_query):
            row = report.per_query[qid]
            fh.write(f"{qid},{row['map']:.6f},{row['ndcg10']:.6f},{row['p10']:.6f}\n")
        fh.write(
            "all,{:.6f},{:.6f},{:.6f}\n".format(
                report.means["map"], report.means["ndcg10"], report.means["p10"]
            )
        )


@dataclass(frozen=True)
class CvPlan:
    mu_grid: Tuple[float, ...]
    theta_grid: Tuple[int, ...]
    measure: str = "map"
    folds: int = 3

    def __post_init__(self):
        if not self.mu_grid or not self.theta_grid:
            raise ValueError("mu and theta grids must be non-empty")
        if self.measure not in MEASURES:
            raise ValueError(f"unknown measure {self.measure!r}")
        if self.folds < 2:
            raise ValueError("cross-validation needs at least 2 folds")


@dataclass
class CvResult:
    measure: str
    fold_choices: List[Tuple[float, int]]
    fold_scores: List[float]
    mean_score: float
    diagnostics: List[str] = field(default_factory=list)


def assign_folds(qids: Sequence[str], folds: int = 3) -> List[List[str]]:
    """Round-robin over sorted qids: deterministic, no seed required."""
    ordered = sorted(qids)
    return [ordered[i::folds] for i in range(folds)]


def cross_validate(
    qids: Sequence[str],
    run_for: Callable[[float, int], RankedRun],
    qrels: Qrels,
    plan: CvPlan,
) -> CvResult:
    """Tune (mu, theta) per fold on the other folds, score on the held-out one.

    run_for(mu, theta) must rank the full batch; fold membership only
    controls which per-query scores feed tuning versus testing.  Grid
    ties resolve to the smaller mu, then the smaller theta.
    """
    if len(qids) < plan.folds:
        raise ValueError(f"need at least {plan.folds} queries, got {len(qids)}")
    folds = assign_folds(qids, plan.folds)
    diagnostics: List[str] = []
    grid: List[Tuple[float, int]] = [
        (mu, theta) for mu in sorted(plan.mu_grid) for theta in sorted(plan.theta_grid)
    ]
    per_config: Dict[Tuple[float, int], Dict[str, float]] = {}
    for mu, theta in grid:
        report = evaluate(run_for(mu, theta), qrels)
        diagnostics.extend(d for d in report.diagnostics if d not in diagnostics)
        per_config[(mu, theta)] = {
            qid: row[plan.measure] for qid, row in report.per_query.items()
        }

    def fold_mean(config: Tuple[float, int], members: Sequence[str]) -> float:
        values = [per_config[config][q] for q in members if q in per_config[config]]
        return sum(values) / len(values) if values else 0.0

    choices: List[Tuple[float, int]] = []
    scores: List[float] = []
    for held_out in range(plan.folds):
        train = [q for i, fold in enumerate(folds) if i != held_out for q in fold]
        best = grid[0]
        best_score = fold_mean(best, train)
        for config in grid[1:]:
            score = fold_mean(config, train)
            if score > best_score:
                best, best_score = config, score
        choices.append(best)
        scores.append(fold_mean(best, folds[held_out]))
    return CvResult(
        measure=plan.measure,
        fold_choices=choices,
        fold_scores=scores,
        mean_score=sum(scores) / len(scores),
        diagnostics=diagnostics,
    )
