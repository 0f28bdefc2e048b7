"""Command-line surface for the whole pipeline.

Subcommands: index, windows, score, run, eval, tune, figure-data,
fixture.  Every subcommand is deterministic and idempotent: rerunning
with the same inputs rewrites byte-identical outputs.  Failures exit
nonzero with a single diagnostic line on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .corpus import PositionalIndex, ingest_corpus, load_queries, load_stopwords
from .evaluation import (
    MEASURES,
    CvPlan,
    cross_validate,
    evaluate,
    load_qrels,
    write_metric_report,
)
from .fixtures import planted_pair, retrieval_fixture
from .perturb import load_lexicon
from .retrieval import MODES, RankedRun, RankingConfig, rank, read_run, write_run
from .scoring import VARIANTS, NcdScore, score_batch, select_dependent
from .windows import extract_windows

DEFAULT_MU_GRID = (100.0, 500.0, 800.0, 1000.0, 2000.0, 3000.0, 4000.0, 5000.0, 8000.0, 10000.0)
DEFAULT_THETA_GRID = tuple(range(1, 46))


def _write_scores_csv(scores: Sequence[NcdScore], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("qid,variant,n_q,scoreable,divergences\n")
        for s in scores:
            n_q = f"{s.n_q:.12g}" if s.n_q is not None else ""
            tail = ",".join(f"{d:.12g}" for d in s.divergences)
            fh.write(f"{s.qid},{s.variant},{n_q},{str(s.scoreable).lower()},{tail}\n")


def _load_inputs(args) -> Tuple[PositionalIndex, list, object]:
    stopwords = load_stopwords(args.stopwords) if args.stopwords else None
    index = ingest_corpus(args.corpus, stopwords=stopwords, stop_documents=args.stop_documents)
    queries = load_queries(args.queries, stopwords=stopwords)
    lexicon = load_lexicon(args.lexicon) if args.lexicon else None
    return index, queries, lexicon


def _cmd_index(args) -> int:
    index = ingest_corpus(args.corpus)
    summary = {
        "doc_count": index.doc_count,
        "total_terms": index.total_terms,
        "vocab_size": index.vocab_size,
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def _cmd_windows(args) -> int:
    index, queries, lexicon = _load_inputs(args)
    targets: List[str] = []
    for q in queries:
        for t in q.terms:
            if t not in targets:
                targets.append(t)
            if lexicon is not None:
                syn = lexicon.first_synonym(t)
                if syn is not None and syn not in targets:
                    targets.append(syn)
    payload: Dict[str, object] = {"format": 1, "half_width": args.window, "targets": {}}
    for t in targets:
        ws = extract_windows(index, (t,), n=args.window)
        payload["targets"][t] = {
            "n_windows": ws.stats.n_windows,
            "av_m": ws.stats.av_m,
            "total_mass": ws.stats.total_mass,
            "vocab_size": len(ws.stats.windows_containing),
        }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def _cmd_score(args) -> int:
    index, queries, lexicon = _load_inputs(args)
    if lexicon is None:
        raise SystemExit("score requires --lexicon")
    scores = score_batch(
        queries, args.variant, index, lexicon, n=args.window, threads=args.threads
    )
    _write_scores_csv(scores, args.out)
    if args.theta is not None:
        selected, diagnostics = select_dependent(scores, args.theta)
        sel_path = os.path.join(os.path.dirname(args.out) or ".", "selected.txt")
        with open(sel_path, "w", encoding="utf-8") as fh:
            for qid in selected:
                fh.write(qid + "\n")
        for d in diagnostics:
            print(d, file=sys.stderr)
    return 0


def _selection_for(args, index, queries, lexicon) -> Set[str]:
    if args.selected:
        with open(args.selected, "r", encoding="utf-8") as fh:
            return {line.strip() for line in fh if line.strip()}
    if args.theta is None:
        raise SystemExit("selective mode requires --theta or --selected")
    if lexicon is None:
        raise SystemExit("selective mode with --theta requires --lexicon")
    scores = score_batch(
        queries, args.variant, index, lexicon, n=args.window, threads=args.threads
    )
    selected, diagnostics = select_dependent(scores, args.theta)
    for d in diagnostics:
        print(d, file=sys.stderr)
    return set(selected)


def _cmd_run(args) -> int:
    index, queries, lexicon = _load_inputs(args)
    selected: Optional[Set[str]] = None
    if args.mode == "selective":
        selected = _selection_for(args, index, queries, lexicon)
    config = RankingConfig(mu=args.mu, mode=args.mode, top_k=args.top_k)
    run = rank(queries, index, config, selected=selected)
    write_run(run, args.out, tag=args.tag)
    return 0


def _cmd_eval(args) -> int:
    run = read_run(args.run)
    qrels = load_qrels(args.qrels)
    report = evaluate(run, qrels)
    for d in report.diagnostics:
        print(d, file=sys.stderr)
    write_metric_report(report, args.out)
    return 0


def _cmd_tune(args) -> int:
    index, queries, lexicon = _load_inputs(args)
    if lexicon is None:
        raise SystemExit("tune requires --lexicon")
    qrels = load_qrels(args.qrels)
    scores = score_batch(
        queries, args.variant, index, lexicon, n=args.window, threads=args.threads
    )
    run_cache: Dict[Tuple[float, int], RankedRun] = {}

    def run_for(mu: float, theta: int) -> RankedRun:
        key = (mu, theta)
        if key not in run_cache:
            selected, _ = select_dependent(scores, theta)
            config = RankingConfig(mu=mu, mode="selective", top_k=args.top_k)
            run_cache[key] = rank(queries, index, config, selected=set(selected))
        return run_cache[key]

    plan = CvPlan(
        mu_grid=tuple(args.mu_grid), theta_grid=tuple(args.theta_grid), measure=args.measure
    )
    result = cross_validate([q.qid for q in queries], run_for, qrels, plan)
    payload = {
        "measure": result.measure,
        "folds": [
            {"mu": mu, "theta": theta, "score": score}
            for (mu, theta), score in zip(result.fold_choices, result.fold_scores)
        ],
        "mean_score": result.mean_score,
        "diagnostics": result.diagnostics,
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def _cmd_figure_data(args) -> int:
    qrels = load_qrels(args.qrels)
    os.makedirs(args.out, exist_ok=True)
    wrote = False
    if args.run_a and args.run_b:
        report_a = evaluate(read_run(args.run_a), qrels)
        report_b = evaluate(read_run(args.run_b), qrels)
        shared = sorted(set(report_a.per_query) & set(report_b.per_query))
        deltas = [
            (qid, report_a.per_query[qid][args.measure] - report_b.per_query[qid][args.measure])
            for qid in shared
        ]
        deltas.sort(key=lambda pair: (-pair[1], pair[0]))
        with open(os.path.join(args.out, "delta.csv"), "w", encoding="utf-8") as fh:
            fh.write(f"qid,delta_{args.measure}\n")
            for qid, delta in deltas:
                fh.write(f"{qid},{delta:.6f}\n")
        wrote = True
    if args.sweep:
        rows: List[Tuple[int, float]] = []
        for item in args.sweep:
            if "=" not in item:
                raise SystemExit(f"--sweep expects THETA=RUNFILE, got {item!r}")
            theta_s, path = item.split("=", 1)
            report = evaluate(read_run(path), qrels)
            rows.append((int(theta_s), report.means[args.measure]))
        rows.sort()
        with open(os.path.join(args.out, "sweep.csv"), "w", encoding="utf-8") as fh:
            fh.write(f"theta,mean_{args.measure}\n")
            for theta, value in rows:
                fh.write(f"{theta},{value:.6f}\n")
        wrote = True
    if not wrote:
        raise SystemExit("figure-data needs --run-a/--run-b and/or --sweep entries")
    return 0


def _cmd_fixture(args) -> int:
    fixture = planted_pair() if args.kind == "planted" else retrieval_fixture()
    paths = fixture.write(args.out)
    print("\n".join(f"{name}: {path}" for name, path in sorted(paths.items())))
    return 0


def _add_common_io(p: argparse.ArgumentParser, queries: bool = True) -> None:
    p.add_argument("--corpus", required=True, help="corpus JSONL path")
    if queries:
        p.add_argument("--queries", required=True, help="queries TSV path")
    p.add_argument("--stopwords", help="optional stopword list, one per line")
    p.add_argument(
        "--stop-documents",
        action="store_true",
        help="apply the stopword list to documents too (default: queries only)",
    )
    p.add_argument("--window", type=int, default=5, help="context half-width n")
    p.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count() or 1,
        help="worker threads for batch scoring",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="termdep",
        description="Selective term-dependence retrieval driven by query non-compositionality",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="summarize a corpus index")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_index)

    p = sub.add_parser("windows", help="export window statistics for query terms")
    _add_common_io(p)
    p.add_argument("--lexicon", help="include each term's first synonym")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_windows)

    p = sub.add_parser("score", help="score query non-compositionality")
    _add_common_io(p)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--variant", required=True, choices=VARIANTS)
    p.add_argument("--theta", type=int, help="also write selected.txt for this theta")
    p.add_argument("--out", required=True, help="scores CSV path")
    p.set_defaults(fn=_cmd_score)

    p = sub.add_parser("run", help="rank documents and write a TREC run file")
    _add_common_io(p)
    p.add_argument("--lexicon", help="needed when selective mode scores on the fly")
    p.add_argument("--mode", required=True, choices=MODES)
    p.add_argument("--variant", default="vector:tfidf", choices=VARIANTS)
    p.add_argument("--theta", type=int, help="selection size for selective mode")
    p.add_argument("--selected", help="precomputed selected.txt (overrides --theta)")
    p.add_argument("--mu", type=float, default=1000.0)
    p.add_argument("--top-k", type=int, default=1000)
    p.add_argument("--tag", default=None, help="run tag (default: the mode name)")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("eval", help="evaluate a run file against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--out", required=True, help="metric report CSV path")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("tune", help="3-fold cross-validated (mu, theta) tuning")
    _add_common_io(p)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--variant", default="vector:tfidf", choices=VARIANTS)
    p.add_argument("--measure", default="map", choices=MEASURES)
    p.add_argument("--mu-grid", type=float, nargs="+", default=list(DEFAULT_MU_GRID))
    p.add_argument("--theta-grid", type=int, nargs="+", default=list(DEFAULT_THETA_GRID))
    p.add_argument("--top-k", type=int, default=1000)
    p.add_argument("--out", required=True, help="tuning result JSON path")
    p.set_defaults(fn=_cmd_tune)

    p = sub.add_parser("figure-data", help="per-query deltas and theta sweeps")
    p.add_argument("--qrels", required=True)
    p.add_argument("--measure", default="map", choices=MEASURES)
    p.add_argument("--run-a", help="run file A (delta = A - B)")
    p.add_argument("--run-b", help="run file B")
    p.add_argument("--sweep", action="append", default=[], metavar="THETA=RUNFILE")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=_cmd_figure_data)

    p = sub.add_parser("fixture", help="write a bundled synthetic fixture")
    p.add_argument("--kind", required=True, choices=("planted", "retrieval"))
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=_cmd_fixture)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run" and args.tag is None:
        args.tag = args.mode
    try:
        return args.fn(args)
    except SystemExit:
        raise
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
