"""Window-based term weighting, term/query vectors, and cosine distance.

Five weighting schemes score a context term inside one window: atc, ltu,
mi, okapi, tfidf.  All logarithms are natural.  weight() evaluates the
raw per-window formula from explicit statistics; for atc the cosine
normalization over the windows containing the term is applied when the
term vector is built, so the per-window atc weights of any term with a
nonzero norm satisfy sum(w^2) == 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .windows import WindowSet

SCHEMES = ("atc", "ltu", "mi", "okapi", "tfidf")


@dataclass(frozen=True)
class TermVector:
    term: str
    weights: Dict[str, float]


@dataclass(frozen=True)
class QueryVector:
    terms: Tuple[str, ...]
    weights: Dict[str, float]


def weight(
    scheme: str,
    f_it: int,
    n_t: int,
    n_windows: int,
    m_i: int,
    av_m: float,
    max_f: int = 1,
    cf_t: Optional[int] = None,
    total_mass: Optional[int] = None,
) -> float:
    """Raw weight of a term with frequency f_it inside one window.

    n_t is the number of windows containing the term, n_windows the window
    count N, m_i the window size, av_m the mean size, max_f the peak
    frequency inside this window.  mi additionally needs cf_t (the term's
    total count across windows) and total_mass (the grand token total).
    Negative okapi values are legitimate and kept.
    """
    if f_it < 1:
        raise ValueError(f"f_it must be >= 1, got {f_it}")
    if n_windows < 1:
        raise ValueError(f"n_windows must be >= 1, got {n_windows}")
    if n_t < 1:
        raise ValueError(f"n_t must be >= 1, got {n_t}")
    if av_m <= 0:
        raise ValueError(f"av_m must be > 0, got {av_m}")
    if scheme == "atc":
        if max_f < 1:
            raise ValueError(f"max_f must be >= 1, got {max_f}")
        return (0.5 + 0.5 * f_it / max_f) * math.log(n_windows / n_t)
    if scheme == "ltu":
        return (math.log(f_it) + 1.0) * math.log(n_windows / n_t) / (
            0.8 + 0.2 * m_i / av_m
        )
    if scheme == "mi":
        if cf_t is None or total_mass is None:
            raise ValueError("mi weighting requires cf_t and total_mass")
        return math.log(f_it * total_mass / (cf_t * m_i))
    if scheme == "okapi":
        return (f_it / (0.5 + 1.5 * m_i / av_m + f_it)) * math.log(
            (n_windows - n_t + 0.5) / (f_it + 0.5)
        )
    if scheme == "tfidf":
        return math.log(f_it) * math.log(n_windows / n_t)
    raise ValueError(f"unknown weighting scheme {scheme!r}")


def window_weight(scheme: str, ws: WindowSet, window_index: int, term: str) -> float:
    """weight() with the statistics read off one window of a WindowSet."""
    stats = ws.stats
    w = ws.windows[window_index]
    return weight(
        scheme,
        f_it=w.counts[term],
        n_t=stats.windows_containing[term],
        n_windows=stats.n_windows,
        m_i=w.size,
        av_m=stats.av_m,
        max_f=stats.max_f[window_index],
        cf_t=stats.window_cf.get(term),
        total_mass=stats.total_mass,
    )


def build_term_vector(
    ws: WindowSet,
    scheme: str,
    absent_as_zero: bool = False,
) -> TermVector:
    """Vector representation of ws.target under `scheme`.

    The component for context term t' is the mean of its per-window
    weights.  By default the mean runs over the windows where t' actually
    occurs; absent_as_zero divides by the total window count instead,
    treating absences as zero-weight occurrences.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown weighting scheme {scheme!r}")
    if not ws.windows:
        raise ValueError(f"target {' '.join(ws.target)!r} has no context windows")
    n_windows = ws.stats.n_windows
    vec: Dict[str, float] = {}
    for term in ws.stats.windows_containing:
        ids = ws.windows_for(term)
        raw = [window_weight(scheme, ws, i, term) for i in ids]
        if scheme == "atc":
            norm = math.sqrt(math.fsum(v * v for v in raw))
            raw = [v / norm for v in raw] if norm > 0.0 else [0.0 for _ in raw]
        denom = n_windows if absent_as_zero else len(ids)
        vec[term] = math.fsum(raw) / denom
    return TermVector(term=" ".join(ws.target), weights=vec)


def compose_query_vector(vectors: Sequence[TermVector]) -> QueryVector:
    """Pointwise product of term vectors over their shared context terms.

    Context terms absent from any constituent vector drop out (product
    with an implicit zero), so the result lives on the intersection
    support.  Commutative and associative up to float rounding.
    """
    if not vectors:
        raise ValueError("compose_query_vector requires at least one term vector")
    keys = set(vectors[0].weights)
    for tv in vectors[1:]:
        keys &= set(tv.weights)
    weights = {k: math.prod(tv.weights[k] for tv in vectors) for k in keys}
    return QueryVector(terms=tuple(tv.term for tv in vectors), weights=weights)


def cosine_distance(u: QueryVector, v: QueryVector) -> Tuple[float, bool]:
    """1 - cosine similarity over the union support; range [0, 2].

    Returns (distance, degenerate): when either vector has zero norm the
    similarity is undefined, so the distance falls back to 1.0 and the
    degenerate flag is set for the caller's diagnostics.
    """
    norm_u = math.sqrt(math.fsum(x * x for x in u.weights.values()))
    norm_v = math.sqrt(math.fsum(x * x for x in v.weights.values()))
    if norm_u == 0.0 or norm_v == 0.0:
        return 1.0, True
    a, b = u.weights, v.weights
    if len(b) < len(a):
        a, b = b, a
    dot = math.fsum(x * b[k] for k, x in a.items() if k in b)
    return 1.0 - dot / (norm_u * norm_v), False
