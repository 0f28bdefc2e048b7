"""Batch non-compositionality scoring and selection of dependent queries.

A variant names either a vector weighting scheme ("vector:tfidf") or a
smoothing x combination pair ("lm:sgt:qsum"); 5 + 8 = 13 in total.  Each
query's score N_q is the mean semantic divergence between the query
phrase and its one-synonym perturbations; higher N_q = less
compositional = stronger term dependence.  select_dependent picks the
theta least-compositional scoreable queries of a batch.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from .corpus import PositionalIndex, Query
from .langmodel import SmoothedLM, combine_term_lms, kld, laplace_lm, sgt_lm
from .perturb import SynonymLexicon, perturb
from .vectors import SCHEMES, TermVector, build_term_vector, compose_query_vector, cosine_distance
from .windows import WindowSet, extract_windows

VARIANTS: Tuple[str, ...] = tuple(
    [f"vector:{s}" for s in SCHEMES]
    + [f"lm:{sm}:{cm}" for sm in ("laplace", "sgt") for cm in ("qsum", "qavg", "mult", "median")]
)


def parse_variant(variant: str) -> Tuple[str, ...]:
    """Split a variant identifier, validating against the closed registry."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}")
    return tuple(variant.split(":"))


@dataclass
class NcdScore:
    """Per-query outcome of one variant's scoring pass.

    n_q is None exactly when the query is unscoreable; divergences lists
    the per-perturbation values behind the mean.
    """

    qid: str
    variant: str
    n_q: Optional[float]
    divergences: List[float] = field(default_factory=list)
    reason: str = ""
    diagnostics: List[str] = field(default_factory=list)

    @property
    def scoreable(self) -> bool:
        return self.n_q is not None

    @property
    def c_q(self) -> float:
        if self.n_q is None or self.n_q <= 0.0:
            raise ValueError(f"compositionality undefined for query {self.qid!r}")
        return 1.0 / self.n_q


class _WindowCache:
    """Thread-safe per-term WindowSet cache over one index."""

    def __init__(self, index: PositionalIndex, n: int):
        self.index = index
        self.n = n
        self._cache: Dict[str, WindowSet] = {}
        self._lock = threading.Lock()

    def get(self, term: str) -> WindowSet:
        with self._lock:
            ws = self._cache.get(term)
        if ws is None:
            ws = extract_windows(self.index, (term,), n=self.n)
            with self._lock:
                self._cache.setdefault(term, ws)
        return ws

    def has_windows(self, term: str) -> bool:
        return bool(self.get(term).windows)


def _score_vector(
    query: Query, scheme: str, cache: _WindowCache, lexicon: SynonymLexicon
) -> NcdScore:
    variant = f"vector:{scheme}"
    if query.m < 2:
        return NcdScore(query.qid, variant, None, reason="single-term query")
    perturbations = perturb(query, lexicon)
    if not perturbations:
        return NcdScore(query.qid, variant, None, reason="no synonym coverage")
    term_vectors: Dict[str, TermVector] = {}
    for term in query.terms:
        if term in term_vectors:
            continue
        ws = cache.get(term)
        if not ws.windows:
            return NcdScore(
                query.qid, variant, None, reason=f"query term {term!r} absent from corpus"
            )
        term_vectors[term] = build_term_vector(ws, scheme)
    v_q = compose_query_vector([term_vectors[t] for t in query.terms])
    divergences: List[float] = []
    diagnostics: List[str] = []
    for p in perturbations:
        ws = cache.get(p.replacement)
        if not ws.windows:
            diagnostics.append(f"perturbation {p.replacement!r} absent from corpus; skipped")
            continue
        replaced = build_term_vector(ws, scheme)
        parts = [
            replaced if idx == p.j - 1 else term_vectors[t]
            for idx, t in enumerate(query.terms)
        ]
        v_p = compose_query_vector(parts)
        d, degenerate = cosine_distance(v_q, v_p)
        if degenerate:
            diagnostics.append(
                f"zero-norm vector comparing against {p.replacement!r}; distance 1.0"
            )
        divergences.append(d)
    if not divergences:
        return NcdScore(
            query.qid,
            variant,
            None,
            reason="no usable perturbations",
            diagnostics=diagnostics,
        )
    n_q = sum(divergences) / len(divergences)
    return NcdScore(query.qid, variant, n_q, divergences, diagnostics=diagnostics)


def _term_lm(
    term: str,
    smoothing: str,
    cache: _WindowCache,
    vocabulary: Optional[Set[str]],
    sgt_memo: Dict[str, SmoothedLM],
) -> SmoothedLM:
    counts = cache.get(term).stats.window_cf
    if smoothing == "laplace":
        return laplace_lm(counts, vocabulary if vocabulary is not None else set(counts))
    lm = sgt_memo.get(term)
    if lm is None:
        lm = sgt_lm(counts)
        sgt_memo[term] = lm
    return lm


def _score_lm(
    query: Query,
    smoothing: str,
    combination: str,
    cache: _WindowCache,
    lexicon: SynonymLexicon,
    sgt_memo: Dict[str, SmoothedLM],
) -> NcdScore:
    variant = f"lm:{smoothing}:{combination}"
    if query.m < 2:
        return NcdScore(query.qid, variant, None, reason="single-term query")
    perturbations = perturb(query, lexicon)
    if not perturbations:
        return NcdScore(query.qid, variant, None, reason="no synonym coverage")
    for term in query.terms:
        if not cache.has_windows(term):
            return NcdScore(
                query.qid, variant, None, reason=f"query term {term!r} absent from corpus"
            )
    query_vocab: Set[str] = set()
    for term in set(query.terms):
        query_vocab |= set(cache.get(term).stats.window_cf)
    divergences: List[float] = []
    diagnostics: List[str] = []
    for p in perturbations:
        if not cache.has_windows(p.replacement):
            diagnostics.append(f"perturbation {p.replacement!r} absent from corpus; skipped")
            continue
        # Union vocabulary of both phrases' windows; Laplace V and the
        # Good-Turing unseen split are both relative to this comparison.
        union = set(query_vocab)
        for term in set(p.terms):
            union |= set(cache.get(term).stats.window_cf)
        q_models = [
            _term_lm(t, smoothing, cache, union, sgt_memo) for t in query.terms
        ]
        p_models = [
            _term_lm(t, smoothing, cache, union, sgt_memo) for t in p.terms
        ]
        for m in q_models + p_models:
            diagnostics.extend(d for d in m.diagnostics if d not in diagnostics)
        lm_q = combine_term_lms(q_models, combination, vocabulary=union)
        lm_p = combine_term_lms(p_models, combination, vocabulary=union)
        divergences.append(kld(lm_q, lm_p, vocabulary=union))
    if not divergences:
        return NcdScore(
            query.qid,
            variant,
            None,
            reason="no usable perturbations",
            diagnostics=diagnostics,
        )
    n_q = sum(divergences) / len(divergences)
    return NcdScore(query.qid, variant, n_q, divergences, diagnostics=diagnostics)


def score_query(
    query: Query,
    variant: str,
    index: PositionalIndex,
    lexicon: SynonymLexicon,
    n: int = 5,
    _cache: Optional[_WindowCache] = None,
    _sgt_memo: Optional[Dict[str, SmoothedLM]] = None,
) -> NcdScore:
    parts = parse_variant(variant)
    cache = _cache if _cache is not None else _WindowCache(index, n)
    if parts[0] == "vector":
        return _score_vector(query, parts[1], cache, lexicon)
    memo = _sgt_memo if _sgt_memo is not None else {}
    return _score_lm(query, parts[1], parts[2], cache, lexicon, memo)


def score_batch(
    queries: Sequence[Query],
    variant: str,
    index: PositionalIndex,
    lexicon: SynonymLexicon,
    n: int = 5,
    threads: int = 1,
) -> List[NcdScore]:
    """Score every query under one variant; one NcdScore per query, in order.

    Per-query failures surface as unscoreable records rather than
    aborting the batch.  threads > 1 fans queries out over a thread pool;
    results keep batch order regardless.
    """
    parse_variant(variant)
    cache = _WindowCache(index, n)
    sgt_memo: Dict[str, SmoothedLM] = {}

    def one(query: Query) -> NcdScore:
        try:
            return score_query(
                query, variant, index, lexicon, n, _cache=cache, _sgt_memo=sgt_memo
            )
        except Exception as exc:
            return NcdScore(query.qid, variant, None, reason=f"error: {exc}")

    if threads <= 1:
        return [one(q) for q in queries]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, queries))


def select_dependent(
    scores: Sequence[NcdScore],
    theta: Union[int, float],
) -> Tuple[List[str], List[str]]:
    """Pick the theta least-compositional (highest N_q) scoreable queries.

    theta is an absolute count, or a float in [0, 1] read as a fraction of
    the batch and floored.  Returns (selected qids in descending N_q
    order, diagnostics).  Ties break by qid ascending; unscoreable
    queries are never selected; a theta beyond the scoreable count selects
    all scoreable queries with a diagnostic.
    """
    if isinstance(theta, float):
        if not 0.0 <= theta <= 1.0:
            raise ValueError(f"fractional theta must be in [0, 1], got {theta}")
        count = int(theta * len(scores))
    else:
        if theta < 0:
            raise ValueError(f"theta must be non-negative, got {theta}")
        count = theta
    scoreable = [s for s in scores if s.scoreable]
    diagnostics: List[str] = []
    if count > len(scoreable):
        diagnostics.append(
            f"theta={count} exceeds {len(scoreable)} scoreable queries; selecting all"
        )
        count = len(scoreable)
    ranked = sorted(scoreable, key=lambda s: (-s.n_q, s.qid))
    return [s.qid for s in ranked[:count]], diagnostics
